"""Deformation parameters (dimension, covector ``a``, scalar ``s``) and the metric."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from .scalar import as_rational

__all__ = ["DeformationParams"]


@dataclass(frozen=True)
class DeformationParams:
    """Exact deformation data with metric ``diag(-1, 1, ..., 1)``.

    ``a`` holds lower-index components ``a_0 .. a_{n-1}``.
    """

    n: int
    a: tuple = field(default=())
    s: mpq = mpq(0)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        a = tuple(as_rational(x) for x in self.a) if self.a else (mpq(0),) * self.n
        if len(a) != self.n:
            raise ValueError(f"a has {len(a)} components, expected {self.n}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s", as_rational(self.s))

    @classmethod
    def from_strings(cls, n: int, a, s) -> "DeformationParams":
        return cls(n, tuple(as_rational(x) for x in a), as_rational(s))

    def eta(self, mu: int) -> int:
        return -1 if mu == 0 else 1

    def eta_matrix(self) -> np.ndarray:
        return np.diag([float(self.eta(m)) for m in range(self.n)])

    def a_upper(self, mu: int) -> mpq:
        return self.eta(mu) * self.a[mu]

    @property
    def a_sq(self) -> mpq:
        return sum((self.eta(m) * x * x for m, x in enumerate(self.a)), mpq(0))

    @property
    def b_coeff(self) -> mpq:
        """``a^2 - s``, the prefactor in ``B = (a^2 - s) D.D``."""
        return self.a_sq - self.s

    @property
    def is_undeformed(self) -> bool:
        return self.s == 0 and all(x == 0 for x in self.a)

    # float mirror for the numeric modules
    @property
    def a_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.a])

    @property
    def s_float(self) -> float:
        return float(self.s)

    def scaled(self, eps_a, eps_s) -> "DeformationParams":
        """Exact rescaling ``a -> eps_a * a``, ``s -> eps_s * s``."""
        ea, es = as_rational(eps_a), as_rational(eps_s)
        return DeformationParams(self.n, tuple(ea * x for x in self.a), es * self.s)

    def to_json(self) -> dict:
        return {"n": self.n, "a": [str(x) for x in self.a], "s": str(self.s)}
