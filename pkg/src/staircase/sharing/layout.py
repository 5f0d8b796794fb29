"""Symbolic block layouts for the two linear secret-sharing codes.

Both codes compute ``C = V @ M`` where ``V`` is a Vandermonde matrix on the
points ``1..n`` and every entry of ``M`` is a block: a data block, a key
block, or zero. A layout records ``M`` as an integer grid of *symbol ids*
(0 for zero, ``1..n_data`` for data blocks, ``n_data+1..`` for keys); share
``i`` is row ``i`` of ``C`` and its ``j``-th sub-share is column ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..params import SystemParams


@dataclass(frozen=True, eq=False)
class BlockLayout:
    params: SystemParams
    m: int
    l: int
    grid: np.ndarray
    n_data: int
    n_keys: int

    @property
    def padded_m(self) -> int:
        return self.unit_rows * self.n_data

    @property
    def unit_rows(self) -> int:
        """Rows of a single block (and of a single sub-share)."""
        return -(-self.m // self.n_data)

    @property
    def subshare_count(self) -> int:
        return self.grid.shape[1]

    @property
    def poly_degree_bound(self) -> int:
        return self.grid.shape[0]

    def is_data(self, sym: int) -> bool:
        return 1 <= sym <= self.n_data

    def symbols_in_prefix(self, columns: int) -> list[int]:
        used = np.unique(self.grid[:, :columns])
        return [int(s) for s in used if s != 0]


@dataclass(frozen=True, eq=False)
class StaircaseLayout(BlockLayout):
    """Column map of the staircase matrix ``M_SC = [M_1 ... M_h]``.

    Step ``i`` (``i = 1..h``) serves ``d_i = n - i + 1`` contacted workers.
    ``M_i`` spans ``widths[i-1]`` sub-share columns starting at
    ``col_starts[i-1]``; downloading ``[M_1 ... M_i]`` is exactly
    ``alpha(d_i) * b`` sub-shares per worker.
    """

    widths: tuple[int, ...] = ()
    col_starts: tuple[int, ...] = ()
    block_shapes: dict = field(default_factory=dict)

    @property
    def b(self) -> int:
        return self.params.b

    @property
    def h(self) -> int:
        return self.params.h

    @property
    def d(self) -> tuple[int, ...]:
        return tuple(self.params.d_(i) for i in range(1, self.h + 1))

    @property
    def b_steps(self) -> tuple[int, ...]:
        return tuple(self.params.b_(i) for i in range(1, self.h + 1))

    def alpha(self, d: int) -> Fraction:
        return self.params.alpha(d)

    def span(self, i: int) -> tuple[int, int]:
        """Half-open sub-share column range of ``M_i``."""
        return self.col_starts[i - 1], self.col_starts[i - 1] + self.widths[i - 1]


def classical_layout(params: SystemParams, m: int, l: int) -> BlockLayout:
    """``M_SS = [A_1; ...; A_{k-z}; R_1; ...; R_z]`` as a single column."""
    _check_dims(m, l)
    n_data = params.k - params.z
    grid = np.arange(1, params.k + 1, dtype=np.int64).reshape(params.k, 1)
    return BlockLayout(params, m, l, grid, n_data, params.z)


def staircase_layout(params: SystemParams, m: int, l: int) -> StaircaseLayout:
    _check_dims(m, l)
    n, k, z = params.n, params.k, params.z
    b, h = params.b, params.h
    kz = k - z
    n_data = kz * b
    bs = [params.b_(i) for i in range(0, h + 1)]  # bs[0] = 1

    widths = []
    for i in range(1, h + 1):
        w, rem = divmod(kz * b, bs[i - 1] * bs[i])
        assert rem == 0, "b must make every staircase width integral"
        widths.append(w)
    assert sum(widths) == b
    starts = [0]
    for w in widths[:-1]:
        starts.append(starts[-1] + w)

    grid = np.zeros((n, b), dtype=np.int64)
    next_key = n_data + 1

    def place_keys(col0: int, width: int, row0: int) -> None:
        nonlocal next_key
        for r in range(z):
            for c in range(width):
                grid[row0 + r, col0 + c] = next_key
                next_key += 1

    # M_1 = [S; R_1]: the data blocks fill S row by row
    w1 = widths[0]
    for r in range(bs[1]):
        for c in range(w1):
            grid[r, c] = 1 + r * w1 + c
    place_keys(0, w1, bs[1])

    for j in range(2, h + 1):
        col0, wj, rows_d = starts[j - 1], widths[j - 1], bs[j]
        # D_{j-1}: row n-j+2 (1-based) of [M_1 ... M_{j-1}], laid out column-major
        source = grid[n - j + 1, :starts[j - 1]]
        assert source.size == rows_d * wj and np.all(source != 0)
        grid[:rows_d, col0:col0 + wj] = source.reshape(wj, rows_d).T
        place_keys(col0, wj, rows_d)

    assert next_key - 1 == n_data + z * b

    unit = -(-m // n_data)
    shapes = {
        "S": (bs[1] * unit, w1 * l),
        **{f"D_{j}": (bs[j + 1] * unit, widths[j] * l) for j in range(1, h)},
        **{f"R_{i}": (z * unit, widths[i - 1] * l) for i in range(1, h + 1)},
    }
    return StaircaseLayout(params, m, l, grid, n_data, z * b,
                           widths=tuple(widths), col_starts=tuple(starts), block_shapes=shapes)


def _check_dims(m: int, l: int) -> None:
    from ..errors import UsageError

    if m <= 0 or l <= 0:
        raise UsageError(f"data matrix must be non-empty, got {m}x{l}")
