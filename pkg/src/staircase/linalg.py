"""Dense matrices over GF(p): Vandermonde, product, exact solve, file I/O."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from .errors import (
    FieldMismatchError,
    FormatError,
    InconsistentSystemError,
    SingularMatrixError,
    UsageError,
)
from .field import FieldContext, FieldElement

MATRIX_MAGIC = b"SCMX"
MATRIX_VERSION = 1
_MATRIX_HEADER = struct.Struct("<4sHQII")


@dataclass(frozen=True, eq=False)
class Matrix:
    """Row-major matrix of canonical residues in GF(p)."""

    data: np.ndarray
    ctx: FieldContext = field(default_factory=FieldContext)

    def __post_init__(self):
        arr = self.data
        if arr.ndim != 2:
            raise UsageError(f"matrix data must be 2-D, got shape {arr.shape}")
        if arr.size and (np.any(arr < 0) or np.any(arr >= self.ctx.p)):
            raise UsageError(f"matrix entries must lie in [0, {self.ctx.p})")

    @classmethod
    def from_values(cls, values, ctx: FieldContext | None = None) -> Matrix:
        ctx = ctx or FieldContext()
        arr = ctx.asarray(values)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        return cls(arr, ctx)

    @classmethod
    def identity(cls, size: int, ctx: FieldContext) -> Matrix:
        out = ctx.zeros((size, size))
        for i in range(size):
            out[i, i] = 1
        return cls(out, ctx)

    @classmethod
    def zeros(cls, rows: int, cols: int, ctx: FieldContext) -> Matrix:
        return cls(ctx.zeros((rows, cols)), ctx)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __getitem__(self, key) -> Matrix:
        sub = self.data[key]
        if sub.ndim != 2:
            raise UsageError("indexing must keep the result 2-D; use .data for scalars")
        return Matrix(sub, self.ctx)

    def __matmul__(self, other: Matrix) -> Matrix:
        return matmul(self, other)

    def __add__(self, other: Matrix) -> Matrix:
        _check_same(self, other)
        if self.shape != other.shape:
            raise UsageError(f"shape mismatch {self.shape} + {other.shape}")
        return Matrix((self.data + other.data) % self.ctx.p, self.ctx)

    def __sub__(self, other: Matrix) -> Matrix:
        _check_same(self, other)
        if self.shape != other.shape:
            raise UsageError(f"shape mismatch {self.shape} - {other.shape}")
        return Matrix((self.data - other.data) % self.ctx.p, self.ctx)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.ctx.p == other.ctx.p and self.shape == other.shape
                and bool(np.all(self.data == other.data)))

    __hash__ = None

    def tolist(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.data]

    def __repr__(self):
        return f"Matrix(GF({self.ctx.p}), {self.rows}x{self.cols}, {self.tolist() if self.data.size <= 64 else '...'})"


def _check_same(a: Matrix, b: Matrix) -> None:
    if a.ctx.p != b.ctx.p:
        raise FieldMismatchError(f"operands live in GF({a.ctx.p}) and GF({b.ctx.p})")


def vandermonde(points, rows: int, cols: int, ctx: FieldContext | None = None) -> Matrix:
    """``V[i, j] = points[i] ** j`` for ``j = 0..cols-1``.

    Points must be distinct and nonzero so every square row-subset of a
    Vandermonde with ``cols`` columns (taken over at least ``cols`` rows) is
    invertible.
    """
    if ctx is None:
        ctx = points[0].ctx if points and isinstance(points[0], FieldElement) else FieldContext()
    vals = []
    for pt in points:
        if isinstance(pt, FieldElement):
            if pt.ctx.p != ctx.p:
                raise FieldMismatchError(f"point {pt!r} not in GF({ctx.p})")
            pt = pt.value
        vals.append(int(pt) % ctx.p)
    if len(vals) != rows:
        raise UsageError(f"expected {rows} evaluation points, got {len(vals)}")
    if any(v == 0 for v in vals):
        raise UsageError("evaluation points must be nonzero")
    if len(set(vals)) != len(vals):
        raise UsageError("evaluation points must be pairwise distinct")
    out = ctx.zeros((rows, cols))
    for i, v in enumerate(vals):
        acc = 1
        for j in range(cols):
            out[i, j] = acc
            acc = acc * v % ctx.p
    return Matrix(out, ctx)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a, b)
    if a.cols != b.rows:
        raise UsageError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    return Matrix(a.ctx.matmul(a.data, b.data), a.ctx)


def solve(coeffs: Matrix, rhs: Matrix) -> Matrix:
    """Solve ``coeffs @ X = rhs`` exactly.

    ``coeffs`` may be square or tall; it must have full column rank. Rows
    beyond the first full-rank subset are checked for consistency.
    """
    _check_same(coeffs, rhs)
    if coeffs.rows != rhs.rows:
        raise UsageError(f"coefficient rows {coeffs.rows} != right-hand side rows {rhs.rows}")
    if coeffs.rows < coeffs.cols:
        raise SingularMatrixError(
            f"underdetermined system: {coeffs.rows} equations, {coeffs.cols} unknowns")
    x, bad_rows = _eliminate(coeffs.data, rhs.data, coeffs.ctx)
    if bad_rows:
        raise InconsistentSystemError(
            f"{len(bad_rows)} redundant equation(s) disagree with the solution", bad_rows)
    return Matrix(x, coeffs.ctx)


def _eliminate(a: np.ndarray, b: np.ndarray, ctx: FieldContext):
    """Gauss-Jordan elimination with first-nonzero pivoting.

    Returns the solution and the indices (into the original rows) of
    redundant equations that the solution does not satisfy.
    """
    p = ctx.p
    rows, cols = a.shape
    aug = np.concatenate([a, b], axis=1) if b.shape[1] else a.copy()
    aug = aug.astype(a.dtype, copy=True)
    order = np.arange(rows)
    for col in range(cols):
        nz = np.nonzero(aug[col:, col])[0]
        if nz.size == 0:
            raise SingularMatrixError(f"coefficient matrix is rank deficient (column {col})")
        piv = col + int(nz[0])
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
            order[[col, piv]] = order[[piv, col]]
        inv = ctx.inv(int(aug[col, col]))
        aug[col] = aug[col] * inv % p
        factors = aug[:, col].copy()
        factors[col] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            aug[hit] = (aug[hit] - factors[hit, None] * aug[col][None, :]) % p
    x = aug[:cols, cols:]
    extra = aug[cols:, cols:]
    bad = [int(order[cols + i]) for i in np.nonzero(np.any(extra != 0, axis=1))[0]]
    return x, bad


def inverse(m: Matrix) -> Matrix:
    if m.rows != m.cols:
        raise UsageError("only square matrices have inverses")
    return solve(m, Matrix.identity(m.rows, m.ctx))


# -- file format ---------------------------------------------------------

def write_matrix(fh: BinaryIO, m: Matrix) -> int:
    """Serialize ``m``; returns the number of bytes written."""
    header = _MATRIX_HEADER.pack(MATRIX_MAGIC, MATRIX_VERSION, m.ctx.p, m.rows, m.cols)
    body = np.asarray([int(v) for v in m.data.ravel()], dtype="<u8").tobytes() if m.ctx.dtype is object \
        else m.data.astype("<u8").tobytes()
    fh.write(header)
    fh.write(body)
    return len(header) + len(body)


def read_matrix(fh: BinaryIO) -> Matrix:
    raw = fh.read(_MATRIX_HEADER.size)
    if len(raw) != _MATRIX_HEADER.size:
        raise FormatError("truncated matrix header")
    magic, version, p, rows, cols = _MATRIX_HEADER.unpack(raw)
    if magic != MATRIX_MAGIC:
        raise FormatError(f"bad matrix magic {magic!r}")
    if version != MATRIX_VERSION:
        raise FormatError(f"unsupported matrix version {version}")
    try:
        ctx = FieldContext(p)
    except UsageError as exc:
        raise FormatError(str(exc)) from None
    nbytes = rows * cols * 8
    body = fh.read(nbytes)
    if len(body) != nbytes:
        raise FormatError(f"truncated matrix body: expected {nbytes} bytes, got {len(body)}")
    vals = np.frombuffer(body, dtype="<u8").reshape(rows, cols)
    if vals.size and int(vals.max()) >= p:
        raise FormatError(f"matrix entry out of range for GF({p})")
    data = np.array([int(v) for v in vals.ravel()], dtype=object).reshape(rows, cols) \
        if ctx.dtype is object else vals.astype(np.int64)
    return Matrix(data, ctx)


def save_matrix(path, m: Matrix) -> None:
    with open(path, "wb") as fh:
        write_matrix(fh, m)


def load_matrix(path) -> Matrix:
    with open(path, "rb") as fh:
        m = read_matrix(fh)
        if fh.read(1):
            raise FormatError(f"trailing bytes after matrix in {path}")
    return m


def matrix_header_size() -> int:
    return _MATRIX_HEADER.size
