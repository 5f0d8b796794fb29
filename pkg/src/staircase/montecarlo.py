"""Seeded Monte-Carlo experiments for the waiting-time model.

Every experiment derives its generator from ``SeedSequence([seed, n, k, z, tag])``
so results depend only on the seed and the row parameters, never on the order
rows are evaluated in.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis
from .delay import classical_times, sample_delays, staircase_times
from .errors import StorageError, UsageError
from .params import DelayParams, SystemParams

BATCH = 1 << 15
DEFAULT_ITERATIONS = 10_000

# stream tags keep experiment kinds from sharing random numbers
_TAG_MEAN, _TAG_SWEEP, _TAG_HIST, _TAG_DELTA = 0, 1, 2, 3


def row_rng(seed: int, params: SystemParams, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), params.n, params.k, params.z, tag])
    return np.random.default_rng(ss)


def _batches(iterations: int):
    if iterations < 1:
        raise UsageError(f"iterations must be >= 1, got {iterations}")
    done = 0
    while done < iterations:
        size = min(BATCH, iterations - done)
        yield size
        done += size


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    iterations: int

    def ci95(self):
        half = 1.96 * self.stderr
        return self.mean - half, self.mean + half


class _Moments:
    def __init__(self):
        self.total = 0.0
        self.squares = 0.0
        self.count = 0

    def add(self, x):
        self.total += math.fsum(x)
        self.squares += math.fsum(x * x)
        self.count += x.size

    def estimate(self) -> Estimate:
        mean = self.total / self.count
        if self.count < 2:
            return Estimate(mean, 0.0, self.count)
        var = max(self.squares - self.count * mean * mean, 0.0) / (self.count - 1)
        return Estimate(mean, math.sqrt(var / self.count), self.count)


def estimate_mean_tsc(params: SystemParams, delay: DelayParams, iterations: int = DEFAULT_ITERATIONS,
                      seed: int = 42, *, exponential: bool = True) -> Estimate:
    """Sample mean of the staircase waiting time with its standard error."""
    rng = row_rng(seed, params, _TAG_MEAN)
    acc = _Moments()
    for size in _batches(iterations):
        t_sc, _ = staircase_times(sample_delays(params, delay, rng, size, exponential=exponential), params)
        acc.add(t_sc)
    return acc.estimate()


def simulate_both(params: SystemParams, delay: DelayParams, iterations: int, seed: int,
                  *, exponential: bool = True):
    """Staircase and classical mean estimates on common delay samples.

    Both schemes see the same draws, so the pathwise ordering carries over to
    the sample means.
    """
    rng = row_rng(seed, params, _TAG_SWEEP)
    sc, ss = _Moments(), _Moments()
    for size in _batches(iterations):
        times = sample_delays(params, delay, rng, size, exponential=exponential)
        sc.add(staircase_times(times, params)[0])
        ss.add(classical_times(times, params))
    return sc.estimate(), ss.estimate()


def sample_d_star(params: SystemParams, delay: DelayParams, iterations: int = DEFAULT_ITERATIONS,
                  seed: int = 42, *, exponential: bool = True) -> np.ndarray:
    rng = row_rng(seed, params, _TAG_HIST)
    out = []
    for size in _batches(iterations):
        out.append(staircase_times(sample_delays(params, delay, rng, size, exponential=exponential), params)[1])
    return np.concatenate(out)


@dataclass(frozen=True)
class DHistogram:
    ds: np.ndarray
    counts: np.ndarray

    @property
    def mode(self) -> int:
        return int(self.ds[np.argmax(self.counts)])

    def is_unimodal(self, sigmas: float = 3.0) -> bool:
        """Rises to the mode then falls, ignoring reversals within sampling noise.

        A step against the trend is tolerated when it is smaller than
        ``sigmas * sqrt(c_i + c_{i+1})``, the Poisson scale of the difference.
        """
        c = self.counts.astype(float)
        peak = int(np.argmax(c))
        step = np.diff(c)
        slack = sigmas * np.sqrt(c[:-1] + c[1:])
        rising = step[:peak] >= -slack[:peak]
        falling = step[peak:] <= slack[peak:]
        return bool(np.all(rising) and np.all(falling))


def histogram_d(params: SystemParams, delay: DelayParams, iterations: int = DEFAULT_ITERATIONS,
                seed: int = 42, *, exponential: bool = True) -> DHistogram:
    """Counts of the minimizing worker count ``d*`` for ``d = k..n``."""
    d = sample_d_star(params, delay, iterations, seed, exponential=exponential)
    ds = np.arange(params.k, params.n + 1)
    counts = np.bincount(d - params.k, minlength=ds.size)
    return DHistogram(ds, counts)


def deviation_tail(d_samples, ts) -> np.ndarray:
    """Empirical ``P(|d - mean(d)| > t)`` centered on the sample mean."""
    d = np.asarray(d_samples, dtype=float)
    dev = np.abs(d - d.mean())
    return np.array([np.mean(dev > t) for t in np.atleast_1d(ts)])


def default_delta(params: SystemParams, delay: DelayParams) -> set[int]:
    """``{d*-1, d*, d*+1}`` clipped to ``k..n``, with ``d*`` the upper-bound argmin."""
    d = analysis.upper_bound_mean_tsc(params, delay).d
    return {x for x in (d - 1, d, d + 1) if params.k <= x <= params.n}


def delta_gap(params: SystemParams, delay: DelayParams, iterations: int = DEFAULT_ITERATIONS,
              seed: int = 42, delta=None) -> float:
    """Normalized mean gap ``(E[T_delta] - E[T_SC]) / E[T_SC]`` on common samples."""
    if delta is None:
        delta = default_delta(params, delay)
    rng = row_rng(seed, params, _TAG_DELTA)
    full, restricted = _Moments(), _Moments()
    for size in _batches(iterations):
        times = sample_delays(params, delay, rng, size)
        full.add(staircase_times(times, params)[0])
        restricted.add(staircase_times(times, params, delta)[0])
    f = full.estimate().mean
    return (restricted.estimate().mean - f) / f


# -- sweeps -----------------------------------------------------------------------

DEFAULT_GRIDS = {
    ("fixed-rate", Fraction(1, 2)): (4, 6, 8, 10, 14, 20, 24, 40, 50, 60, 80, 100),
    ("fixed-rate", Fraction(1, 4)): (8, 12, 16, 20, 24, 40, 48, 52, 60, 80, 100),
    ("fixed-rate", Fraction(1, 5)): (10, 15, 20, 25, 40, 50, 60, 80, 100),
    ("fixed-parity", 2): (4, 6, 8, 10, 14, 20, 24, 40, 50, 60, 80, 100),
    ("fixed-parity", 5): (8, 10, 14, 20, 24, 40, 50, 60, 80, 100),
    ("fixed-parity", 10): (12, 16, 20, 24, 40, 48, 52, 60, 80, 100),
}

CSV_COLUMNS = ("n", "k", "z", "lambda", "c", "mean_tsc_sim", "mean_tss_sim", "savings_sim",
               "savings_bound", "ub_thm1", "lb_thm1", "stderr_tsc")


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: a regime, its rate ``k/n`` or parity ``n-k``, and an ``n`` grid."""
    regime: str
    value: Fraction | int
    n_grid: tuple[int, ...] = ()
    z: int = 1
    lam: float = 1.0
    c: float = 1.0
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 42
    delay: DelayParams = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.regime == "fixed-rate":
            value = Fraction(self.value)
            if value not in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 5)):
                raise UsageError(f"fixed-rate regime supports k/n in {{1/2, 1/4, 1/5}}, got {value}")
        elif self.regime == "fixed-parity":
            value = int(self.value)
            if value not in (2, 5, 10):
                raise UsageError(f"fixed-parity regime supports n-k in {{2, 5, 10}}, got {value}")
        else:
            raise UsageError(f"unknown regime {self.regime!r}; use fixed-rate or fixed-parity")
        object.__setattr__(self, "value", value)
        grid = tuple(self.n_grid) or DEFAULT_GRIDS[(self.regime, value)]
        object.__setattr__(self, "n_grid", grid)
        if self.iterations < 1:
            raise UsageError(f"iterations must be >= 1, got {self.iterations}")
        object.__setattr__(self, "delay", DelayParams(self.lam, self.c))
        for n in grid:
            self.params_for(n)

    def k_for(self, n: int) -> int:
        if self.regime == "fixed-rate":
            k = n * self.value
            if k.denominator != 1:
                raise UsageError(f"n={n} is not a multiple of {self.value.denominator}")
            return int(k)
        return n - self.value

    def params_for(self, n: int) -> SystemParams:
        return SystemParams(n, self.k_for(n), self.z)


@dataclass(frozen=True)
class SweepRow:
    params: SystemParams
    delay: DelayParams
    tsc: Estimate
    tss: Estimate
    savings_bound: float
    ub: float
    lb: float

    @property
    def savings(self) -> float:
        return (self.tss.mean - self.tsc.mean) / self.tss.mean

    def as_record(self) -> dict:
        p = self.params
        return {"n": p.n, "k": p.k, "z": p.z, "lambda": self.delay.lam, "c": self.delay.c,
                "mean_tsc_sim": self.tsc.mean, "mean_tss_sim": self.tss.mean,
                "savings_sim": self.savings, "savings_bound": self.savings_bound,
                "ub_thm1": self.ub, "lb_thm1": self.lb, "stderr_tsc": self.tsc.stderr}


def sweep_row(spec: ExperimentSpec, n: int) -> SweepRow:
    params = spec.params_for(n)
    tsc, tss = simulate_both(params, spec.delay, spec.iterations, spec.seed)
    return SweepRow(params, spec.delay, tsc, tss,
                    analysis.savings_lower_bound(params, spec.delay),
                    analysis.upper_bound_mean_tsc(params, spec.delay).value,
                    analysis.lower_bound_mean_tsc(params, spec.delay).value)


def run_sweep(spec: ExperimentSpec) -> list[SweepRow]:
    return [sweep_row(spec, n) for n in spec.n_grid]


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({key: repr(v) if isinstance(v, float) else v for key, v in r.as_record().items()})
    return buf.getvalue()


def write_sweep_csv(spec: ExperimentSpec, path) -> str:
    text = rows_to_csv(run_sweep(spec))
    try:
        with open(Path(path), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text
