from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .errors import UsageError


@dataclass(frozen=True)
class SystemParams:
    """An (n, k, z) system: n workers, any k decode, any z learn nothing.

    ``z = 1`` is the customary "no collusion" setting.
    """

    n: int
    k: int
    z: int = 1

    def __post_init__(self):
        for name in ("n", "k", "z"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise UsageError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 1 <= self.z < self.k <= self.n:
            raise UsageError(f"need 1 <= z < k <= n, got (n, k, z) = ({self.n}, {self.k}, {self.z})")

    @classmethod
    def parse(cls, text: str) -> SystemParams:
        """Parse ``"n,k,z"``."""
        try:
            n, k, z = (int(part) for part in text.split(","))
        except ValueError:
            raise UsageError(f"expected n,k,z but got {text!r}") from None
        return cls(n, k, z)

    @property
    def h(self) -> int:
        return self.n - self.k + 1

    @property
    def b(self) -> int:
        """Sub-shares per share: LCM{k-z+1, ..., n-z} (1 when n = k)."""
        return reduce(math.lcm, range(self.k - self.z + 1, self.n - self.z + 1), 1)

    def d_(self, i: int) -> int:
        """Number of contacted workers in staircase step i = 1..h."""
        return self.n - i + 1

    def b_(self, i: int) -> int:
        """Data rows of staircase step i (``b_0 = 1`` by convention)."""
        return 1 if i == 0 else self.d_(i) - self.z

    def alpha(self, d: int) -> Fraction:
        self.check_d(d)
        return Fraction(self.k - self.z, d - self.z)

    def subshares_needed(self, d: int) -> int:
        """alpha_d * b, always an integer."""
        need = self.alpha(d) * self.b
        assert need.denominator == 1
        return int(need)

    def check_d(self, d: int) -> None:
        if not self.k <= d <= self.n:
            raise UsageError(f"d={d} outside {{{self.k}..{self.n}}}")

    def __str__(self):
        return f"({self.n},{self.k},{self.z})"


@dataclass(frozen=True)
class DelayParams:
    """Shifted-exponential task time: shift ``c`` seconds plus Exp(``lam``)."""

    lam: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise UsageError(f"lambda must be positive and finite, got {self.lam}")
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise UsageError(f"c must be non-negative and finite, got {self.c}")
