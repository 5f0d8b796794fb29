"""Encode/decode machinery shared by the classical and staircase codes."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from ..errors import InconsistentSystemError, InsufficientSharesError, IntegrityError, UsageError
from ..field import FieldContext
from ..linalg import Matrix, matmul, solve, vandermonde
from ..params import SystemParams
from .layout import BlockLayout


@dataclass(frozen=True, eq=False)
class Share:
    """One worker's encoded share: ``b`` ordered sub-share blocks."""

    worker_index: int
    subshares: tuple[Matrix, ...]
    params: SystemParams
    original_m: int

    scheme: ClassVar[str] = ""
    scheme_code: ClassVar[int] = -1

    @property
    def ctx(self) -> FieldContext:
        return self.subshares[0].ctx

    @property
    def b(self) -> int:
        return self.params.b if self.scheme == "staircase" else 1

    def prefix(self, count: int) -> Share:
        return type(self)(self.worker_index, self.subshares[:count], self.params, self.original_m)

    def apply(self, x: Matrix) -> Share:
        """Worker-side computation: every sub-share times ``x``, in order."""
        return type(self)(self.worker_index, tuple(matmul(s, x) for s in self.subshares),
                          self.params, self.original_m)

    def as_matrix(self) -> Matrix:
        """Sub-shares stacked vertically."""
        return Matrix(np.concatenate([s.data for s in self.subshares], axis=0), self.ctx)

    def __eq__(self, other):
        if not isinstance(other, Share):
            return NotImplemented
        return (self.scheme == other.scheme and self.worker_index == other.worker_index
                and self.params == other.params and self.original_m == other.original_m
                and len(self.subshares) == len(other.subshares)
                and all(a == b for a, b in zip(self.subshares, other.subshares)))

    __hash__ = None


class ClassicalShare(Share):
    scheme = "classical"
    scheme_code = 0

    @property
    def block(self) -> Matrix:
        return self.subshares[0]


class StaircaseShare(Share):
    scheme = "staircase"
    scheme_code = 1


SHARE_TYPES = {cls.scheme_code: cls for cls in (ClassicalShare, StaircaseShare)}


def split_rows(A: Matrix, layout: BlockLayout) -> np.ndarray:
    """Zero-pad ``A`` and cut it into ``n_data`` row blocks, shape (n_data, u, l)."""
    u = layout.unit_rows
    data = A.ctx.zeros((layout.padded_m, A.cols))
    data[:A.rows] = A.data
    return data.reshape(layout.n_data, u, A.cols)


def draw_keys(layout: BlockLayout, ctx: FieldContext, rng=None, keys=None) -> np.ndarray:
    shape = (layout.n_keys, layout.unit_rows, layout.l)
    if keys is None:
        return ctx.random(shape, rng)
    arr = np.asarray(keys)
    if arr.ndim == 0:
        # test hook: a constant key, typically 0
        out = ctx.zeros(shape)
        out[...] = int(arr) % ctx.p
        return out
    arr = ctx.asarray(arr)
    if arr.shape != shape:
        try:
            arr = arr.reshape(shape)
        except ValueError:
            raise UsageError(f"keys must have {int(np.prod(shape))} entries, got {arr.size}") from None
    return arr


def encode_blocks(A: Matrix, layout: BlockLayout, share_cls, rng=None, keys=None) -> list[Share]:
    ctx = A.ctx
    params = layout.params
    ctx.check_supports(params.n)
    if A.rows != layout.m or A.cols != layout.l:
        raise UsageError(f"layout was built for {layout.m}x{layout.l}, data is {A.rows}x{A.cols}")
    u, l = layout.unit_rows, layout.l
    symbols = ctx.zeros((1 + layout.n_data + layout.n_keys, u * l))
    symbols[1:1 + layout.n_data] = split_rows(A, layout).reshape(layout.n_data, u * l)
    symbols[1 + layout.n_data:] = draw_keys(layout, ctx, rng, keys).reshape(layout.n_keys, u * l)

    V = vandermonde(list(range(1, params.n + 1)), params.n, layout.poly_degree_bound, ctx)
    cols = []
    for c in range(layout.subshare_count):
        block_col = Matrix(symbols[layout.grid[:, c]], ctx)
        cols.append(matmul(V, block_col).data)
    return [
        share_cls(i + 1, tuple(Matrix(col[i].reshape(u, l), ctx) for col in cols),
                  params, layout.m)
        for i in range(params.n)
    ]


def solve_symbols(responses: Mapping[int, Sequence[Matrix]], columns: int,
                  layout: BlockLayout, ctx: FieldContext) -> dict[int, np.ndarray]:
    """Recover every symbol that appears in the first ``columns`` sub-shares.

    ``responses`` maps worker index (1-based) to at least ``columns`` leading
    sub-share blocks (or sub-results, any common width). Returns
    ``{symbol id: block}``.
    """
    workers = sorted(responses)
    if not workers:
        raise InsufficientSharesError("no responses")
    first = responses[workers[0]][0]
    rows_out, width = first.shape
    unknowns = layout.symbols_in_prefix(columns)
    index = {s: i for i, s in enumerate(unknowns)}
    deg = layout.poly_degree_bound
    n_eq = len(workers) * columns

    coeffs = ctx.zeros((n_eq, len(unknowns)))
    rhs = ctx.zeros((n_eq, rows_out * width))
    eq_worker = []
    for wi, w in enumerate(workers):
        if not 1 <= w <= layout.params.n:
            raise UsageError(f"worker index {w} outside 1..{layout.params.n}")
        powers = [pow(w, r, ctx.p) for r in range(deg)]
        blocks = responses[w]
        for c in range(columns):
            eq = wi * columns + c
            blk = blocks[c]
            if blk.shape != (rows_out, width):
                raise UsageError(f"worker {w} sub-share {c} has shape {blk.shape}, expected {(rows_out, width)}")
            if blk.ctx.p != ctx.p:
                raise UsageError(f"worker {w} responded in GF({blk.ctx.p}), expected GF({ctx.p})")
            for r in range(deg):
                s = int(layout.grid[r, c])
                if s:
                    coeffs[eq, index[s]] = (coeffs[eq, index[s]] + powers[r]) % ctx.p
            rhs[eq] = blk.data.reshape(-1)
            eq_worker.append(w)
    try:
        sol = solve(Matrix(coeffs, ctx), Matrix(rhs, ctx))
    except InconsistentSystemError as exc:
        bad = sorted({eq_worker[r] for r in exc.workers})
        raise IntegrityError(
            f"responses are mutually inconsistent; redundant equations from workers {bad} "
            f"disagree with workers {workers}", bad) from None
    return {s: sol.data[i].reshape(rows_out, width) for s, i in index.items()}


def assemble_data(symbols: Mapping[int, np.ndarray], layout: BlockLayout, original_m: int,
                  ctx: FieldContext) -> Matrix:
    blocks = [symbols[s] for s in range(1, layout.n_data + 1)]
    stacked = np.concatenate(blocks, axis=0)
    return Matrix(stacked[:original_m], ctx)


def collect(shares, params: SystemParams) -> tuple[dict[int, tuple[Matrix, ...]], int, FieldContext]:
    """Normalize a share collection to ``{worker: sub-shares}`` plus metadata."""
    shares = list(shares)
    if not shares:
        raise InsufficientSharesError("no shares supplied")
    seen: dict[int, tuple[Matrix, ...]] = {}
    original = {s.original_m for s in shares}
    if len(original) != 1:
        raise IntegrityError("shares disagree on the original row count",
                             [s.worker_index for s in shares])
    for s in shares:
        if s.params != params:
            raise UsageError(f"share from worker {s.worker_index} belongs to a {s.params} system, not {params}")
        if s.worker_index in seen:
            raise UsageError(f"duplicate share for worker {s.worker_index}")
        seen[s.worker_index] = s.subshares
    return seen, original.pop(), shares[0].ctx
