"""Closed-form latency analytics for staircase and classical secret sharing.

All quantities assume i.i.d. shifted-exponential task times with
``T_i = c/(k-z) + Exp(lam * (k-z))``. Alternating binomial sums are evaluated
in arbitrary precision (mpmath) and rounded to float at the end.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy import integrate

from .errors import UsageError
from .params import DelayParams, SystemParams


@dataclass(frozen=True)
class AnalysisResult:
    value: float
    d: int | None = None

    def __float__(self):
        return self.value


def harmonic(n: int) -> float:
    if n < 0:
        raise UsageError(f"harmonic number of negative order {n}")
    return math.fsum(1.0 / i for i in range(1, n + 1))


def harmonic_exact(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def _dps_for(n: int) -> int:
    # enough digits to absorb cancellation among terms as large as 4**n
    return 30 + int(n * math.log10(4)) + 1


# -- means -----------------------------------------------------------------

def upper_bound_mean_tsc(params: SystemParams, delay: DelayParams) -> AnalysisResult:
    """Jensen bound: ``min_d (H_n - H_{n-d})/(lam (d-z)) + c/(d-z)``."""
    n, z = params.n, params.z
    best = None
    for d in range(params.k, n + 1):
        v = (harmonic(n) - harmonic(n - d)) / (delay.lam * (d - z)) + delay.c / (d - z)
        if best is None or v < best[0]:
            best = (v, d)
    return AnalysisResult(*best)


def lower_bound_mean_tsc(params: SystemParams, delay: DelayParams) -> AnalysisResult:
    """``c/(n-z)`` plus the largest integrated tail bound over ``d``."""
    n, k, z = params.n, params.k, params.z
    best = None
    with mpmath.workdps(_dps_for(n)):
        for d in range(k, n + 1):
            tail = (n - d) * (n - d + 1)
            acc = mpmath.mpf(0)
            for i in range(k):
                inner = mpmath.mpf(0)
                for j in range(i + 1):
                    term = mpmath.mpf(2 * math.comb(i, j)) / (2 * (n - i + j) * (d - z) + tail)
                    inner += -term if j % 2 else term
                acc += math.comb(n, i) * inner
            if best is None or acc > best[0]:
                best = (acc, d)
        value = delay.c / (n - z) + float(best[0]) / delay.lam
    return AnalysisResult(value, best[1])


def loose_upper_bound_mean_tsc(params: SystemParams, delay: DelayParams, *, literal_log: bool = False) -> float:
    """Log-form relaxation of :func:`upper_bound_mean_tsc`.

    For ``d < n`` the term uses ``H_n - H_{n-d} <= log((n+1)/(n-d))``. The
    ``d = n`` term needs an upper bound on ``H_n`` itself; ``1 + log(n)`` is
    used. ``literal_log=True`` puts ``log(n+1)`` there instead, which is
    smaller than ``H_n`` and so does not bound the mean (at (4,2,1), λ=c=1
    it gives 0.8698 against an exact mean of 0.8995).
    """
    n, z = params.n, params.z
    lam, c = delay.lam, delay.c
    terms = [math.log((n + 1) / (n - d)) / (lam * (d - z)) + c / (d - z) for d in range(params.k, n)]
    h_n = math.log(n + 1) if literal_log else 1.0 + math.log(n)
    terms.append(h_n / (lam * (n - z)) + c / (n - z))
    return min(terms)


def mean_tss(params: SystemParams, delay: DelayParams) -> float:
    """Mean of ``T_(k)`` for classical secret sharing."""
    n, k, z = params.n, params.k, params.z
    return (harmonic(n) - harmonic(n - k)) / (delay.lam * (k - z)) + delay.c / (k - z)


def _one_straggler_mp(k: int, z: int, lam, c):
    kz = k - z
    e = mpmath.exp(-lam * c / kz)
    acc = mpmath.mpf(0)
    for i in range(1, k + 2):
        term = math.comb(k + 1, i) * (i * e / (kz * i + 1) - mpmath.mpf(1) / ((kz + 1) * i))
        acc += -term if i % 2 else term
    return c / mpmath.mpf(kz + 1) + acc / lam


def exact_mean_one_straggler(params: SystemParams, delay: DelayParams) -> float:
    """Exact ``E[T_SC]`` for an ``(k+1, k, z)`` system."""
    if params.n != params.k + 1:
        raise UsageError(f"one-straggler formula needs n = k + 1, got {params}")
    with mpmath.workdps(_dps_for(params.n)):
        return float(_one_straggler_mp(params.k, params.z, mpmath.mpf(delay.lam), mpmath.mpf(delay.c)))


def exact_mean_two_stragglers(params: SystemParams, delay: DelayParams) -> float:
    """Exact ``E[T_SC]`` for an ``(k+2, k, z)`` system.

    Equals the ``(k+2, k+1, z)`` one-straggler mean plus a correction sum.
    """
    if params.n != params.k + 2:
        raise UsageError(f"two-straggler formula needs n = k + 2, got {params}")
    k, z = params.k, params.z
    kz = k - z
    with mpmath.workdps(_dps_for(params.n)):
        lam, c = mpmath.mpf(delay.lam), mpmath.mpf(delay.c)
        base = _one_straggler_mp(k + 1, z, lam, c)
        e4 = mpmath.exp(-4 * lam * c / kz)
        e3 = mpmath.exp(-3 * lam * c / kz)
        acc = mpmath.mpf(0)
        for i in range(2, k + 3):
            term = math.comb(k + 2, i) * math.comb(i, 2) * (e4 / (kz * i + 4) - 2 * e3 / (kz * i + 3))
            acc += -term if i % 2 else term
        return float(base + acc / lam)


def exact_mean_tsc(params: SystemParams, delay: DelayParams) -> float | None:
    """Closed-form mean when ``n - k <= 2``; ``None`` otherwise."""
    gap = params.n - params.k
    if gap == 0:
        return mean_tss(params, delay)
    if gap == 1:
        return exact_mean_one_straggler(params, delay)
    if gap == 2:
        return exact_mean_two_stragglers(params, delay)
    return None


# -- distributions -----------------------------------------------------------

def residual_cdf(y, params: SystemParams, delay: DelayParams):
    """CDF of one worker's exponential part, rate ``lam (k-z)``."""
    y = np.asarray(y, dtype=float)
    rate = delay.lam * (params.k - params.z)
    return np.where(y > 0, -np.expm1(-rate * np.maximum(y, 0.0)), 0.0)


def thresholds(t, params: SystemParams, delay: DelayParams) -> dict[int, np.ndarray]:
    """``t_j = max(((j-z)/(k-z)) (t - c/(j-z)), 0)`` for ``j = k..n``."""
    t = np.asarray(t, dtype=float)
    kz = params.k - params.z
    return {j: np.maximum((j - params.z) / kz * (t - delay.c / (j - params.z)), 0.0)
            for j in range(params.k, params.n + 1)}


def order_statistic_tail(t, d: int, params: SystemParams, delay: DelayParams):
    """``P(T'_(d) > t) = sum_{i<d} C(n,i) F^i (1-F)^(n-i)``."""
    F = residual_cdf(t, params, delay)
    n = params.n
    return sum(math.comb(n, i) * F**i * (1 - F) ** (n - i) for i in range(d))


def ordered_simplex_mass(y, count: int, params: SystemParams, delay: DelayParams):
    """Probability mass of ``0 <= y_1 <= ... <= y_count <= y`` under the product
    of residual distributions: ``F(y)**count / count!``."""
    return residual_cdf(y, params, delay) ** count / math.factorial(count)


def cdf_tsc_one_straggler(t, params: SystemParams, delay: DelayParams):
    if params.n != params.k + 1:
        raise UsageError(f"one-straggler CDF needs n = k + 1, got {params}")
    k = params.k
    th = thresholds(t, params, delay)
    Fk = residual_cdf(th[k], params, delay)
    Fk1 = residual_cdf(th[k + 1], params, delay)
    out = Fk1 ** (k + 1) + Fk**k * (1 - Fk1) * (k + 1)
    return _clip_prob(out)


def cdf_tsc_two_stragglers(t, params: SystemParams, delay: DelayParams):
    if params.n != params.k + 2:
        raise UsageError(f"two-straggler CDF needs n = k + 2, got {params}")
    k = params.k
    th = thresholds(t, params, delay)
    Fk, Fk1, Fk2 = (residual_cdf(th[j], params, delay) for j in (k, k + 1, k + 2))
    inner = Fk1 ** (k + 1) + (k + 1) * Fk**k * ((1 - Fk1) - 0.5 * (1 - Fk2))
    out = Fk2 ** (k + 2) + (k + 2) * (1 - Fk2) * inner
    return _clip_prob(out)


def _clip_prob(x):
    x = np.clip(x, 0.0, 1.0)
    return float(x) if np.ndim(x) == 0 else x


MAX_QUAD_STRAGGLERS = 3


def cdf_tsc_general(t, params: SystemParams, delay: DelayParams, tol: float = 1e-9):
    """``F_TSC(t)`` by adaptive nested quadrature over the ordered region.

    In the probability-integral coordinates ``u_j = F(y_j)`` the tail is
    ``n!/(k-1)! * int u_k^(k-1)`` over ``a_j < u_j``, ``u_k <= ... <= u_n <= 1``
    with ``a_j = F(t_j)``. The ``k-1`` fastest workers and ``u_k`` are
    integrated in closed form; the remaining ``n-k`` levels use QUADPACK.
    """
    n, k = params.n, params.k
    if tol <= 0:
        raise UsageError("tol must be positive")
    if n - k > MAX_QUAD_STRAGGLERS:
        raise UsageError(
            f"quadrature supports n - k <= {MAX_QUAD_STRAGGLERS}, got {n - k}; use Monte-Carlo instead")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(ts)
    for idx, tv in enumerate(ts):
        th = thresholds(tv, params, delay)
        a = {j: float(residual_cdf(th[j], params, delay)) for j in th}
        out[idx] = 1.0 - _tail_quadrature(a, n, k, tol)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if np.ndim(t) == 0 else out


def _tail_quadrature(a: dict[int, float], n: int, k: int, tol: float) -> float:
    scale = math.factorial(n) / math.factorial(k)
    ak_pow = a[k] ** k

    def level(j: int, upper: float) -> float:
        # integrate u_j over [a_j, upper]; j == k is closed form
        if j == k:
            return upper**k - ak_pow
        lo = a[j]
        if upper <= lo:
            return 0.0
        val, _ = integrate.quad(lambda u: level(j - 1, u), lo, upper,
                                epsabs=tol * 1e-3, epsrel=tol, limit=200)
        return val

    return scale * level(n, 1.0)


def mean_from_cdf(cdf, lower: float = 0.0, tol: float = 1e-10) -> float:
    """``E[T] = int_0^inf (1 - F(t)) dt`` for a non-negative variable."""
    val, _ = integrate.quad(lambda t: 1.0 - cdf(t), lower, np.inf, epsabs=tol, epsrel=tol, limit=400)
    return lower + val


# -- savings and concentration -------------------------------------------------

def savings_lower_bound(params: SystemParams, delay: DelayParams) -> float:
    """Lower bound on ``(E[T_SS] - E[T_SC]) / E[T_SS]``, clamped at 0."""
    n, k, z = params.n, params.k, params.z
    lc = delay.lam * delay.c
    hn, hk = harmonic(n), harmonic(n - k)
    ratio = min((k - z) * (lc + hn - harmonic(n - d)) / ((d - z) * (lc + hn - hk))
                for d in range(k, n + 1))
    return max(0.0, 1.0 - ratio)


def concentration_bound(t, params: SystemParams):
    """McDiarmid bound on ``P(|d - E[d]| > t)``: ``2 exp(-2 t^2 / (n (n-k)^2))``.

    Not clamped to 1. For ``n = k`` the minimizing ``d`` is constant and the
    bound is 0 for every ``t >= 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise UsageError("deviation must be non-negative")
    n, k = params.n, params.k
    if n == k:
        out = np.where(t >= 0, 0.0, 2.0)
    else:
        out = 2.0 * np.exp(-2.0 * t**2 / (n * (n - k) ** 2))
    return float(out) if out.ndim == 0 else out
