"""(n, k, z) threshold secret sharing of a matrix (McEliece-Sarwate form of Shamir)."""
from __future__ import annotations

from ..errors import InsufficientSharesError
from ..linalg import Matrix
from ..params import SystemParams
from .core import ClassicalShare, assemble_data, collect, encode_blocks, solve_symbols
from .layout import classical_layout


def classical_encode(A: Matrix, params: SystemParams, rng=None, keys=None) -> list[ClassicalShare]:
    """Share ``A`` among ``params.n`` workers.

    Share ``i`` is ``sum_j i**j * M[j]`` over ``M = [A_1; ...; A_{k-z}; R_1; ...; R_z]``
    where ``A`` is cut into ``k - z`` row blocks (zero-padded) and the ``R_j``
    are uniform keys. ``rng`` is a numpy Generator (``None`` draws from the OS);
    ``keys`` overrides the key blocks and exists for tests.
    """
    layout = classical_layout(params, A.rows, A.cols)
    return encode_blocks(A, layout, ClassicalShare, rng=rng, keys=keys)


def classical_decode(shares, params: SystemParams) -> Matrix:
    """Recover ``A`` from any ``k`` or more shares (or share-times-vector results)."""
    responses, original_m, ctx = collect(shares, params)
    if len(responses) < params.k:
        raise InsufficientSharesError(f"need {params.k} shares, got {len(responses)}")
    block = next(iter(responses.values()))[0]
    layout = classical_layout(params, original_m, block.cols)
    symbols = solve_symbols(responses, 1, layout, ctx)
    return assemble_data(symbols, layout, original_m, ctx)

