"""Acceptance criteria, one test each.

Every test appends a ``[PASS]`` or ``[FAIL]`` line to the report printed at
the end of the run, then asserts the same condition.
"""
import asyncio
import itertools
import struct
import time

import numpy as np
import pytest
from scipy import stats

from _helpers import secrecy_counts, secrecy_holds
from conftest import ACCEPTANCE_LINES
from staircase import analysis as an
from staircase import montecarlo as mc
from staircase.cluster import HiddenVectorSession, LocalCluster, Worker
from staircase.delay import sample_delays, staircase_times, waiting_time_classical, waiting_time_staircase
from staircase.field import FieldContext
from staircase.linalg import Matrix, matmul
from staircase.params import DelayParams, SystemParams
from staircase.sharing import classical_decode, classical_encode, staircase_decode, staircase_encode

S = SystemParams
UNIT = DelayParams(1.0, 1.0)
CTX = FieldContext(65537)


def report(n: int, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def test_criterion_01_golden_analytics():
    start = time.perf_counter()
    checks = [
        ("ub(4,2,1)", an.upper_bound_mean_tsc(S(4, 2, 1), UNIT).value, 1.02777778),
        ("ub(6,4,1)", an.upper_bound_mean_tsc(S(6, 4, 1), UNIT).value, 0.6125),
        ("ub(8,6,1)", an.upper_bound_mean_tsc(S(8, 6, 1), UNIT).value, 0.44357143),
        ("lb(4,2,1)", an.lower_bound_mean_tsc(S(4, 2, 1), UNIT).value, 0.57142857),
        ("exact(4,2,1)", an.exact_mean_two_stragglers(S(4, 2, 1), UNIT), 0.89951033),
        ("exact(10,8,1)", an.exact_mean_two_stragglers(S(10, 8, 1), UNIT), 0.33105889),
    ]
    elapsed = time.perf_counter() - start
    worst = max(abs(got - want) for _, got, want in checks)
    ok = worst <= 1e-6 and elapsed < 1.0
    report(1, ok, f"golden analytics, max |err| {worst:.1e} (tol 1e-6), {elapsed:.3f}s (< 1s)")


def test_criterion_02_savings_bound():
    got = [an.savings_lower_bound(S(4, 2, 1), DelayParams(1.0, 100.0)),
           an.savings_lower_bound(S(4, 2, 1), DelayParams(1.0, 1.0)),
           an.savings_lower_bound(S(10, 5, 1), DelayParams(1.0, 0.001))]
    want = [0.66169566, 0.35087719, 0.0]
    worst = max(abs(g - w) for g, w in zip(got, want))
    report(2, worst <= 1e-6, f"savings bound {[round(g, 8) for g in got]}, max |err| {worst:.1e} (tol 1e-6)")


def test_criterion_03_montecarlo_vs_closed_form():
    start = time.perf_counter()
    est = mc.estimate_mean_tsc(S(4, 2, 1), UNIT, 1_000_000, seed=42)
    elapsed = time.perf_counter() - start
    err = abs(est.mean - 0.8995103)
    report(3, err <= 1e-2 and elapsed < 30,
           f"MC mean {est.mean:.5f} vs 0.8995103, |err| {err:.1e} (tol 1e-2), {elapsed:.2f}s (< 30s)")


def test_criterion_04_cdf_agreement():
    ks = {}
    for params, fn in [(S(3, 2, 1), an.cdf_tsc_one_straggler), (S(4, 2, 1), an.cdf_tsc_two_stragglers)]:
        t = sample_delays(params, UNIT, np.random.default_rng(4), 100_000)
        sc, _ = staircase_times(t, params)
        ks[str(params)] = stats.kstest(sc, lambda v: fn(v, params, UNIT)).statistic
    grid = np.linspace(0.05, 5.0, 50)
    quad = max(np.max(np.abs(an.cdf_tsc_general(grid, S(3, 2, 1), UNIT) - an.cdf_tsc_one_straggler(grid, S(3, 2, 1), UNIT))),
               np.max(np.abs(an.cdf_tsc_general(grid, S(4, 2, 1), UNIT) - an.cdf_tsc_two_stragglers(grid, S(4, 2, 1), UNIT))))
    ok = max(ks.values()) < 0.01 and quad <= 1e-6
    detail = ", ".join(f"KS{p} {v:.4f}" for p, v in ks.items())
    report(4, ok, f"{detail} (< 0.01); quadrature vs closed form {quad:.1e} on 50 points (tol 1e-6)")


def test_criterion_05_codec_exhaustive():
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    decodes = 0
    bad = []
    for params in (S(3, 2, 1), S(4, 2, 1), S(5, 3, 1), S(6, 4, 2)):
        full = params.b * (params.k - params.z)
        for m in (1, full - 1, 4 * full):
            A = Matrix(CTX.random((m, 8), rng), CTX)
            shares = staircase_encode(A, params, rng=rng)
            for d in range(params.k, params.n + 1):
                need = params.subshares_needed(d)
                for subset in itertools.combinations(shares, d):
                    got = staircase_decode({s.worker_index: s.subshares[:need] for s in subset}, d, params, m)
                    decodes += 1
                    if got != A:
                        bad.append((str(params), m, d))
            cshares = classical_encode(A, params, rng=rng)
            for subset in itertools.combinations(cshares, params.k):
                decodes += 1
                if classical_decode(list(subset), params) != A:
                    bad.append((str(params), m, "classical"))
    elapsed = time.perf_counter() - start
    report(5, not bad and elapsed < 60,
           f"{decodes} exhaustive subset decodes bit-exact, {len(bad)} mismatches, {elapsed:.1f}s (< 60s)")


def test_criterion_06_perfect_secrecy():
    secrets = [(s,) for s in range(5)]
    sc = secrecy_holds(secrecy_counts(staircase_encode, S(3, 2, 1), secrets, n_keys=2))
    cl = secrecy_holds(secrecy_counts(classical_encode, S(3, 2, 1), secrets, n_keys=1))
    report(6, sc and cl, f"GF(5) key enumeration, z-subset share counts identical: staircase {sc}, classical {cl}")


def test_criterion_07_pathwise_dominance():
    params = S(10, 5, 1)
    t = sample_delays(params, UNIT, np.random.default_rng(7), 100_000)
    violations = sum(waiting_time_staircase(row, params).t_sc > waiting_time_classical(row, params) for row in t)
    report(7, violations == 0, f"(10,5,1) T_SC <= T_SS on 100000 samples, {violations} violations")


def test_criterion_08_concentration():
    params = S(20, 10, 1)
    d = mc.sample_d_star(params, UNIT, 10_000, seed=8)
    ts = np.arange(0, params.n - params.k + 1)
    emp = mc.deviation_tail(d, ts)
    bound = an.concentration_bound(ts.astype(float), params)
    conc = bool(np.all(emp <= bound))
    h = mc.histogram_d(S(100, 50, 1), UNIT, 10_000, seed=8)
    shape = h.is_unimodal() and 65 <= h.mode <= 75
    report(8, conc and shape,
           f"tail <= bound for all t: {conc}; histogram (100,50,1) unimodal {h.is_unimodal()}, mode {h.mode} in [65,75]")


def test_criterion_09_delta_restriction():
    gaps = {n: mc.delta_gap(S(n, n // 2, 1), UNIT, 10_000, seed=9) for n in range(8, 101, 2)}
    worst_n = max(gaps, key=gaps.get)
    ok = max(gaps.values()) <= 0.05 and min(gaps.values()) >= 0
    report(9, ok, f"Δ={{d*-1,d*,d*+1}} gap over n=8..100: max {gaps[worst_n]:.2%} at n={worst_n} (<= 5%)")


def test_criterion_10_cluster_end_to_end():
    params, rounds, scale = S(4, 2, 1), 500, 0.02
    rng = np.random.default_rng(10)
    A = Matrix(CTX.random((24, 6), rng), CTX)
    xs = [CTX.random(6, rng) for _ in range(rounds)]
    want = [matmul(A, Matrix(x.reshape(-1, 1), CTX)) for x in xs]

    async def timed(enc, delay, n_rounds):
        async with LocalCluster(enc(A, params, rng=rng), delay=delay, seed=10, time_scale=scale) as cl:
            out = [await cl.master.run_round(x) for x in xs[:n_rounds]]
        return out

    overhead = np.mean([r.elapsed for r in asyncio.run(timed(staircase_encode, None, 100))]) / scale
    sc = asyncio.run(timed(staircase_encode, UNIT, rounds))
    ss = asyncio.run(timed(classical_encode, UNIT, rounds))
    correct = all(r.value == w for r, w in zip(sc, want)) and all(r.value == w for r, w in zip(ss, want))
    mean_sc = np.mean([r.elapsed for r in sc]) / scale
    mean_ss = np.mean([r.elapsed for r in ss]) / scale
    ratio = mean_sc / mean_ss
    exact = an.exact_mean_two_stragglers(params, UNIT)
    rel = abs(mean_sc - overhead - exact) / exact
    # model replay of the same seeded task times, reported to separate sampling noise from overhead
    probe = [Worker(s, UNIT, seed=10) for s in staircase_encode(A, params, rng=rng)]
    replay, _ = staircase_times(np.array([[w.task_time(r) for w in probe] for r in range(1, rounds + 1)]), params)

    sent = []
    async def hidden():
        g1 = staircase_encode(A, params, rng=rng)
        g2 = staircase_encode(A, params, rng=rng)
        async with LocalCluster(g1, delay=UNIT, time_scale=0.002, on_send=lambda w, raw: sent.append(raw)) as c1, \
                LocalCluster(g2, delay=UNIT, time_scale=0.002, seed=11,
                             on_send=lambda w, raw: sent.append(raw)) as c2:
            session = HiddenVectorSession(c1.master, c2.master, rng)
            return [(await session.run_round(x))[0] for x in xs[:20]]

    hidden_ok = all(v == w for v, w in zip(asyncio.run(hidden()), want))
    leaks = sum(np.asarray(x, dtype="<u8").tobytes() in raw for x in xs[:20] for raw in sent)
    ok = correct and ratio < 1 and rel <= 0.15 and hidden_ok and leaks == 0
    report(10, ok,
           f"500 rounds correct {correct}; staircase/classical time ratio {ratio:.3f} (< 1); "
           f"mean {mean_sc:.3f} - overhead {overhead:.3f} vs exact {exact:.4f}, rel err {rel:.1%} (<= 15%), "
           f"seeded model replay {np.mean(replay):.3f}; "
           f"hidden-x correct {hidden_ok}, transcripts containing x: {leaks}")


def test_criterion_11_not_reproducible():
    ACCEPTANCE_LINES.append("[N/A ] criterion 11: cloud-cluster measurements are not reproducible at desk scale; "
                            "covered by criterion 10 (injected delays) and criteria 1-3 (model level)")
    pytest.skip("cloud-cluster measurements are not reproducible here")
