from fractions import Fraction

import numpy as np
import pytest

from staircase import analysis as an
from staircase import montecarlo as mc
from staircase.errors import StorageError, UsageError
from staircase.params import DelayParams, SystemParams

UNIT = DelayParams(1.0, 1.0)


def test_estimate_close_to_exact():
    est = mc.estimate_mean_tsc(SystemParams(4, 2, 1), UNIT, 200_000, seed=3)
    assert abs(est.mean - 0.8995103) < 4 * est.stderr
    lo, hi = est.ci95()
    assert lo < est.mean < hi


def test_degenerate_delays():
    for params in (SystemParams(4, 2, 1), SystemParams(9, 4, 2)):
        est = mc.estimate_mean_tsc(params, DelayParams(1.0, 3.0), 50, seed=1, exponential=False)
        assert est.mean == pytest.approx(3.0 / (params.n - params.z), rel=1e-14)
        assert est.stderr == pytest.approx(0.0, abs=1e-12)


def test_determinism():
    a = mc.estimate_mean_tsc(SystemParams(6, 3, 1), UNIT, 70_000, seed=5)
    b = mc.estimate_mean_tsc(SystemParams(6, 3, 1), UNIT, 70_000, seed=5)
    c = mc.estimate_mean_tsc(SystemParams(6, 3, 1), UNIT, 70_000, seed=6)
    assert a == b and a != c


def test_single_iteration():
    est = mc.estimate_mean_tsc(SystemParams(3, 2, 1), UNIT, 1)
    assert est.iterations == 1 and est.stderr == 0.0
    with pytest.raises(UsageError):
        mc.estimate_mean_tsc(SystemParams(3, 2, 1), UNIT, 0)


def test_spec_validation():
    with pytest.raises(UsageError):
        mc.ExperimentSpec("fixed-rate", Fraction(1, 3))
    with pytest.raises(UsageError):
        mc.ExperimentSpec("fixed-parity", 3)
    with pytest.raises(UsageError):
        mc.ExperimentSpec("sideways", 2)
    with pytest.raises(UsageError):
        mc.ExperimentSpec("fixed-rate", Fraction(1, 4), (6,))
    with pytest.raises(UsageError):
        mc.ExperimentSpec("fixed-parity", 5, (6,))  # k = 1 violates z < k
    spec = mc.ExperimentSpec("fixed-rate", "1/5")
    assert spec.n_grid[0] == 10 and spec.k_for(10) == 2


def test_fixed_rate_row_savings():
    row = mc.sweep_row(mc.ExperimentSpec("fixed-rate", Fraction(1, 2), iterations=200_000, seed=42), 4)
    assert row.savings == pytest.approx(0.4316, abs=0.01)
    assert row.savings_bound == pytest.approx(0.35087719, abs=1e-6)
    assert row.ub == pytest.approx(1.02777778, abs=1e-6)


def test_fixed_parity_row_savings():
    row = mc.sweep_row(mc.ExperimentSpec("fixed-parity", 5, iterations=200_000, seed=42), 8)
    assert (row.params.n, row.params.k) == (8, 3)
    assert row.savings == pytest.approx(0.4445, abs=0.01)


def test_sweep_rows_respect_bounds():
    for spec in (mc.ExperimentSpec("fixed-rate", Fraction(1, 4), iterations=5000),
                 mc.ExperimentSpec("fixed-parity", 2, (4, 6, 10, 20), iterations=5000, c=0.01),
                 mc.ExperimentSpec("fixed-parity", 10, (12, 20), iterations=5000, c=100.0)):
        for row in mc.run_sweep(spec):
            assert row.tsc.mean <= row.tss.mean
            assert row.savings_bound <= row.savings + 4 * row.tsc.stderr / row.tss.mean


def test_csv_format_and_reproducibility(tmp_path):
    spec = mc.ExperimentSpec("fixed-rate", Fraction(1, 2), (4, 8), iterations=2000, seed=9)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    mc.write_sweep_csv(spec, a)
    mc.write_sweep_csv(spec, b)
    raw = a.read_bytes()
    assert raw == b.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == ",".join(mc.CSV_COLUMNS)
    assert len(lines) == 3 and lines[1].startswith("4,2,1,1.0,1.0,")


def test_rows_independent_of_grid_order():
    a = mc.run_sweep(mc.ExperimentSpec("fixed-parity", 2, (4, 6), iterations=3000))
    b = mc.run_sweep(mc.ExperimentSpec("fixed-parity", 2, (6, 4), iterations=3000))
    assert a[0].tsc == b[1].tsc and a[1].tss == b[0].tss


def test_unwritable_path(tmp_path):
    spec = mc.ExperimentSpec("fixed-rate", Fraction(1, 2), (4,), iterations=10)
    with pytest.raises(StorageError):
        mc.write_sweep_csv(spec, tmp_path / "missing" / "x.csv")


def test_histogram_shape():
    h = mc.histogram_d(SystemParams(100, 50, 1), UNIT, 10_000, seed=42)
    assert h.counts.sum() == 10_000 and h.ds[0] == 50 and h.ds[-1] == 100
    assert 68 <= h.mode <= 72
    assert h.is_unimodal()
    assert h.counts[h.ds > 93].sum() <= 10


def test_histogram_deterministic_delays():
    h = mc.histogram_d(SystemParams(10, 5, 1), UNIT, 100, exponential=False)
    assert h.counts[-1] == 100 and h.counts[:-1].sum() == 0


def test_unimodal_detector():
    assert mc.DHistogram(np.arange(3), np.array([100, 400, 100])).is_unimodal()
    assert not mc.DHistogram(np.arange(5), np.array([400, 10, 400, 10, 400])).is_unimodal()


def test_concentration_respected():
    params = SystemParams(20, 10, 1)
    d = mc.sample_d_star(params, UNIT, 10_000, seed=1)
    ts = np.arange(0, 11)
    emp = mc.deviation_tail(d, ts)
    assert np.all(emp <= an.concentration_bound(ts.astype(float), params))


def test_delta_gap_small_and_nonnegative():
    for n in (8, 20, 40):
        gap = mc.delta_gap(SystemParams(n, n // 2, 1), UNIT, 5000)
        assert 0 <= gap <= 0.05
    assert mc.delta_gap(SystemParams(8, 4, 1), UNIT, 2000, delta=range(4, 9)) == 0.0
    assert mc.default_delta(SystemParams(4, 2, 1), UNIT) == {3, 4}
