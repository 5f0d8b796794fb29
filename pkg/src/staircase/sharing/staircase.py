"""Universal Staircase codes: decode from any d in {k..n} workers at optimal download."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from fractions import Fraction

from ..errors import InsufficientSharesError, UsageError
from ..linalg import Matrix
from ..params import SystemParams
from .core import StaircaseShare, assemble_data, collect, encode_blocks, solve_symbols
from .layout import StaircaseLayout, staircase_layout


def communication_cost(d: int, params: SystemParams) -> Fraction:
    """Fraction of each share downloaded when decoding from ``d`` workers."""
    return params.alpha(d)


def staircase_encode(A: Matrix, params: SystemParams, rng=None, keys=None) -> list[StaircaseShare]:
    """Encode ``A`` into ``n`` shares of ``b`` ordered sub-shares each.

    ``A`` is zero-padded to a multiple of ``b * (k - z)`` rows. ``keys`` (a
    scalar or an array of ``z * b`` key blocks) replaces the random keys in
    tests.
    """
    layout = staircase_layout(params, A.rows, A.cols)
    return encode_blocks(A, layout, StaircaseShare, rng=rng, keys=keys)


def staircase_decode(responses: Mapping[int, Sequence[Matrix]], d: int, params: SystemParams,
                     original_m: int | None = None, *, return_keys: bool = False):
    """Decode from ``d`` workers' leading ``alpha_d * b`` sub-shares.

    ``responses`` maps worker index to a prefix of its sub-shares (or of
    its sub-results ``S_ij @ x``). Every worker with a long enough prefix
    takes part; extra workers make the system overdetermined and are used as
    an integrity check. With ``return_keys`` the recovered key blocks come
    back as a second value keyed by key number (1-based).
    """
    params.check_d(d)
    _validate_prefixes(responses, params.b)
    need = params.subshares_needed(d)
    usable = {w: tuple(s[:need]) for w, s in responses.items() if len(s) >= need}
    if len(usable) < d:
        raise InsufficientSharesError(
            f"decoding from d={d} needs {d} workers with {need} leading sub-shares each, "
            f"only {len(usable)} qualify")
    first = next(iter(usable.values()))[0]
    ctx = first.ctx
    rows = original_m if original_m is not None else first.rows * (params.k - params.z) * params.b
    layout = staircase_layout(params, rows, first.cols)
    symbols = solve_symbols(usable, need, layout, ctx)
    data = assemble_data(symbols, layout, rows, ctx)
    if return_keys:
        keys = {s - layout.n_data: blk for s, blk in symbols.items() if not layout.is_data(s)}
        return data, keys
    return data


def feasible_d(prefix_lengths: Mapping[int, int], params: SystemParams) -> list[int]:
    """All ``d`` for which at least ``d`` workers hold ``alpha_d * b`` sub-shares."""
    out = []
    for d in range(params.k, params.n + 1):
        need = params.subshares_needed(d)
        if sum(1 for v in prefix_lengths.values() if v >= need) >= d:
            out.append(d)
    return out


def decode_shares(shares, params: SystemParams, d: int | None = None) -> Matrix:
    """Decode a collection of (possibly truncated) staircase shares.

    Without ``d`` the smallest feasible worker count is used.
    """
    responses, original_m, _ = collect(shares, params)
    if d is None:
        options = feasible_d({w: len(s) for w, s in responses.items()}, params)
        if not options:
            raise InsufficientSharesError(
                f"{len(responses)} share prefixes cannot decode a {params} staircase code")
        d = options[0]
    return staircase_decode(responses, d, params, original_m)


def _validate_prefixes(responses, b: int) -> None:
    for w, subs in responses.items():
        if len(subs) > b:
            raise UsageError(f"worker {w} supplied {len(subs)} sub-shares, more than b={b}")


__all__ = [
    "StaircaseLayout",
    "communication_cost",
    "decode_shares",
    "feasible_d",
    "staircase_decode",
    "staircase_encode",
    "staircase_layout",
]

