"""Prime-field arithmetic.

Scalars are :class:`FieldElement` values; bulk data lives in numpy integer
arrays whose entries are canonical residues in ``[0, p)``. The context picks
``int64`` storage when every intermediate of a multiply-accumulate fits in
63 bits and falls back to Python-object arrays otherwise.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import FieldMismatchError, UsageError

DEFAULT_MODULUS = 65537

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(p: int) -> bool:
    """Deterministic Miller-Rabin, exact for every p < 3.3e24."""
    if p < 2:
        return False
    for q in _MR_BASES:
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def egcd_inverse(a: int, p: int) -> int:
    """Inverse of ``a`` modulo ``p`` via the extended Euclidean algorithm."""
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no multiplicative inverse")
    r0, r1 = p, a
    t0, t1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if r0 != 1:
        raise ZeroDivisionError(f"{a} is not invertible modulo {p}")
    return t0 % p


@dataclass(frozen=True)
class FieldContext:
    """GF(p) for a prime ``p`` that fits in an unsigned 64-bit word."""

    p: int = DEFAULT_MODULUS

    def __post_init__(self):
        p = int(self.p)
        object.__setattr__(self, "p", p)
        if p >= 2**64:
            raise UsageError(f"modulus {p} does not fit in 64 bits")
        if not is_prime(p):
            raise UsageError(f"modulus {p} is not prime")

    # -- scalars ---------------------------------------------------------
    def __call__(self, value: int) -> FieldElement:
        return FieldElement(int(value) % self.p, self)

    def embed(self, value: int) -> FieldElement:
        """Embed a non-negative integer below ``p`` without reduction."""
        value = int(value)
        if not 0 <= value < self.p:
            raise UsageError(f"{value} cannot be embedded in GF({self.p})")
        return FieldElement(value, self)

    @staticmethod
    def extract(element: FieldElement) -> int:
        return element.value

    def inv(self, value: int) -> int:
        return egcd_inverse(value, self.p)

    def check_supports(self, n: int) -> None:
        """A Vandermonde code on points 1..n needs ``p >= n + 1``."""
        if self.p < n + 1:
            raise UsageError(f"GF({self.p}) is too small for n={n} workers (need p >= n+1)")

    # -- arrays ----------------------------------------------------------
    @property
    def dtype(self):
        # worst case in solve: x - f*y with x, f, y < p
        if (self.p - 1) ** 2 + self.p < 2**62:
            return np.int64
        return object

    def dot_is_safe(self, inner: int) -> bool:
        return self.dtype is np.int64 and inner * (self.p - 1) ** 2 < 2**63

    def asarray(self, values, *, reduce: bool = True) -> np.ndarray:
        arr = np.asarray(values)
        if self.dtype is object:
            arr = np.vectorize(int, otypes=[object])(arr) if arr.size else arr.astype(object)
        else:
            arr = arr.astype(np.int64)
        if reduce:
            arr = arr % self.p
        return arr

    def zeros(self, shape) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(shape, dtype=object)
            out.fill(0)
            return out
        return np.zeros(shape, dtype=np.int64)

    def random(self, shape, rng=None) -> np.ndarray:
        """Uniform field elements.

        ``rng`` is a numpy Generator for reproducible draws; ``None`` reads
        the operating system's entropy source.
        """
        shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
        count = int(np.prod(shape))
        if rng is None:
            return self.asarray(_os_uniform(count, self.p)).reshape(shape)
        vals = rng.integers(0, self.p, size=count, dtype=np.uint64)
        if self.dtype is object:
            return np.array([int(v) for v in vals], dtype=object).reshape(shape)
        return vals.astype(np.int64).reshape(shape)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        inner = a.shape[-1]
        if self.dot_is_safe(inner):
            return (a @ b) % self.p
        if self.dtype is np.int64:
            # split the inner dimension so partial sums stay in range
            step = max(1, (2**63 - 1) // ((self.p - 1) ** 2))
            out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
            for lo in range(0, inner, step):
                out = (out + (a[:, lo:lo + step] @ b[lo:lo + step]) % self.p) % self.p
            return out
        return np.dot(a.astype(object), b.astype(object)) % self.p


def _os_uniform(count: int, p: int) -> list[int]:
    # rejection sampling over the smallest byte width covering p
    nbytes = max(1, (p.bit_length() + 7) // 8)
    limit = (256**nbytes // p) * p
    out: list[int] = []
    while len(out) < count:
        need = count - len(out)
        raw = os.urandom(nbytes * (need + need // 4 + 8))
        for i in range(0, len(raw), nbytes):
            v = int.from_bytes(raw[i:i + nbytes], "little")
            if v < limit:
                out.append(v % p)
                if len(out) == count:
                    break
    return out


@dataclass(frozen=True)
class FieldElement:
    value: int
    ctx: FieldContext

    def __post_init__(self):
        if not 0 <= self.value < self.ctx.p:
            raise UsageError(f"{self.value} is not a canonical element of GF({self.ctx.p})")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.ctx.p != self.ctx.p:
                raise FieldMismatchError(f"GF({self.ctx.p}) vs GF({other.ctx.p})")
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.ctx.p
        return NotImplemented

    def __add__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement((self.value + v) % self.ctx.p, self.ctx)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement((self.value - v) % self.ctx.p, self.ctx)

    def __rsub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement((v - self.value) % self.ctx.p, self.ctx)

    def __mul__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return FieldElement(self.value * v % self.ctx.p, self.ctx)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.ctx.p, self.ctx)

    def inv(self) -> FieldElement:
        return FieldElement(egcd_inverse(self.value, self.ctx.p), self.ctx)

    def __truediv__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return self * FieldElement(v, self.ctx).inv()

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        return FieldElement(pow(self.value, e, self.ctx.p), self.ctx)

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.ctx.p == other.ctx.p and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.ctx.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.ctx.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"GF({self.ctx.p})({self.value})"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    _same(a, b)
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    _same(a, b)
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _same(a, b)
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inv()


def _same(a: FieldElement, b: FieldElement) -> None:
    if a.ctx.p != b.ctx.p:
        raise FieldMismatchError(f"operands live in GF({a.ctx.p}) and GF({b.ctx.p})")
