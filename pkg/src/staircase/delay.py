"""Shifted-exponential worker delays and pathwise waiting times.

Each worker's task is ``k - z`` times smaller than the whole job, so its time
is ``T_i = c/(k-z) + Exp(lam * (k-z))``. Waiting-time functions accept a
single sample (shape ``(n,)``) or a batch (shape ``(runs, n)``).
"""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .params import DelayParams, SystemParams


@dataclass(frozen=True)
class DelaySample:
    times: np.ndarray


@dataclass(frozen=True)
class WaitingTime:
    t_sc: float
    t_ss: float
    d_star: int


def sample_delays(params: SystemParams, delay: DelayParams, rng: np.random.Generator,
                  size: int | None = None, *, exponential: bool = True) -> np.ndarray:
    """Draw worker task times; shape ``(n,)`` or ``(size, n)``.

    Uses inverse-CDF exponential draws. ``exponential=False`` drops the random
    part (the infinite-rate limit) and returns the shift alone.
    """
    kz = params.k - params.z
    shape = (params.n,) if size is None else (size, params.n)
    shift = delay.c / kz
    if not exponential:
        return np.full(shape, shift)
    return shift + rng.standard_exponential(shape, method="inv") / (delay.lam * kz)


def sample_task_time(params: SystemParams, delay: DelayParams, rng: np.random.Generator) -> float:
    """One worker's task time, as drawn for a single cluster round."""
    kz = params.k - params.z
    return delay.c / kz + float(rng.standard_exponential(method="inv")) / (delay.lam * kz)


def order_statistics(times) -> np.ndarray:
    return np.sort(np.asarray(times, dtype=float), axis=-1)


def _candidates(times, params: SystemParams, ds: Iterable[int]):
    ds = np.asarray(sorted(set(ds)), dtype=int)
    if ds.size == 0:
        raise UsageError("the set of admissible worker counts is empty")
    if ds.min() < params.k or ds.max() > params.n:
        raise UsageError(f"admissible worker counts must lie in {{{params.k}..{params.n}}}, got {ds.tolist()}")
    t = np.asarray(times, dtype=float)
    if t.shape[-1] != params.n:
        raise UsageError(f"expected {params.n} task times, got {t.shape[-1]}")
    ordered = np.sort(t, axis=-1)
    alpha = (params.k - params.z) / (ds - params.z)
    return ds, alpha * ordered[..., ds - 1]


def staircase_times(times, params: SystemParams, ds: Iterable[int] | None = None):
    """Vectorized ``min_d alpha_d T_(d)`` and the smallest minimizing ``d``."""
    if ds is None:
        ds = range(params.k, params.n + 1)
    ds, cand = _candidates(times, params, ds)
    pos = np.argmin(cand, axis=-1)  # first index wins ties -> smallest d
    return np.take_along_axis(cand, np.expand_dims(pos, -1), -1)[..., 0], ds[pos]


def classical_times(times, params: SystemParams):
    t = np.asarray(times, dtype=float)
    if t.shape[-1] != params.n:
        raise UsageError(f"expected {params.n} task times, got {t.shape[-1]}")
    return np.partition(t, params.k - 1, axis=-1)[..., params.k - 1]


def waiting_time_staircase(sample, params: SystemParams) -> WaitingTime:
    times = sample.times if isinstance(sample, DelaySample) else sample
    t_sc, d_star = staircase_times(times, params)
    return WaitingTime(float(t_sc), float(classical_times(times, params)), int(d_star))


def waiting_time_classical(sample, params: SystemParams) -> float:
    times = sample.times if isinstance(sample, DelaySample) else sample
    return float(classical_times(times, params))


def waiting_time_delta(sample, params: SystemParams, delta: Iterable[int]) -> WaitingTime:
    """Staircase waiting time when only ``d`` in ``delta`` may decode."""
    times = sample.times if isinstance(sample, DelaySample) else sample
    t, d_star = staircase_times(times, params, delta)
    return WaitingTime(float(t), float(classical_times(times, params)), int(d_star))


def subtask_schedule(task_time: float, b: int) -> np.ndarray:
    """Cumulative completion times of a worker's ``b`` equal sub-tasks."""
    return task_time * np.arange(1, b + 1) / b
