"""Exact truncated power series: univariate coefficient lists and multivariate series.

Univariate series are plain lists ``[c_0, c_1, ...]`` of rationals.  Multivariate
series (``TruncatedSeries``) keep every monomial of total degree <= ``order``;
``BiSeries`` is the two-covector case used for momentum composition, with the
first ``n`` variables read as ``k`` and the last ``n`` as ``q``.
"""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .monomial import degree, pack, unit, unpack
from .scalar import ExactScalar, as_rational

__all__ = [
    "u_mul",
    "u_inv",
    "u_deriv",
    "u_integrate",
    "u_sqrt_one_minus",
    "u_sqrt_one_plus",
    "u_sinhc",
    "u_coshc",
    "binom_half",
    "TruncatedSeries",
    "BiSeries",
]


# ---------------------------------------------------------------------------
# univariate
# ---------------------------------------------------------------------------


def u_mul(a, b, K: int) -> list:
    out = [mpq(0)] * (K + 1)
    for i, x in enumerate(a[: K + 1]):
        if not x:
            continue
        for j, y in enumerate(b[: K + 1 - i]):
            out[i + j] += x * y
    return out


def u_inv(a, K: int) -> list:
    if not a or a[0] == 0:
        raise ZeroDivisionError("series with zero constant term has no inverse")
    inv0 = 1 / a[0]
    out = [inv0]
    for d in range(1, K + 1):
        acc = mpq(0)
        for j in range(1, min(d, len(a) - 1) + 1):
            acc += a[j] * out[d - j]
        out.append(-acc * inv0)
    return out


def u_deriv(a) -> list:
    return [m * c for m, c in enumerate(a)][1:] or [mpq(0)]


def u_integrate(a) -> list:
    """Antiderivative vanishing at 0."""
    return [mpq(0)] + [c / (m + 1) for m, c in enumerate(a)]


def binom_half(m: int) -> mpq:
    """Generalized binomial coefficient ``C(1/2, m)``."""
    out = mpq(1)
    for i in range(m):
        out *= (mpq(1, 2) - i) / (i + 1)
    return out


def u_sqrt_one_minus(K: int) -> list:
    """Coefficients of ``sqrt(1 - t)``."""
    return [binom_half(m) * (-1) ** m for m in range(K + 1)]


def u_sqrt_one_plus(K: int) -> list:
    """Coefficients of ``sqrt(1 + t)``."""
    return [binom_half(m) for m in range(K + 1)]


def u_sinhc(K: int) -> list:
    """``sinh(W)/W`` as a series in ``W^2``."""
    return [mpq(1, factorial(2 * m + 1)) for m in range(K + 1)]


def u_coshc(K: int) -> list:
    """``(cosh W - 1)/W^2`` as a series in ``W^2``."""
    return [mpq(1, factorial(2 * m + 2)) for m in range(K + 1)]


# ---------------------------------------------------------------------------
# multivariate
# ---------------------------------------------------------------------------


def _coerce(c):
    if isinstance(c, ExactScalar):
        return c
    return as_rational(c)


class TruncatedSeries:
    """Power series in ``nvars`` variables, exact through total degree ``order``.

    Coefficients are ``mpq`` (real series) or ``ExactScalar``; the two are not
    mixed within one series (see ``to_gaussian``).
    """

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs=None):
        self.nvars = nvars
        self.order = order
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if c and degree(k) <= order}

    # --- constructors ----------------------------------------------------
    def _new(self, coeffs, order=None):
        return type(self)._make(self, coeffs, self.order if order is None else order)

    @classmethod
    def _make(cls, like, coeffs, order):
        return cls(like.nvars, order, coeffs)

    @classmethod
    def variable(cls, nvars: int, order: int, i: int):
        return cls(nvars, order, {unit(i): mpq(1)})

    @classmethod
    def constant(cls, nvars: int, order: int, c):
        return cls(nvars, order, {0: _coerce(c)})

    @classmethod
    def from_dict(cls, nvars: int, order: int, data):
        return cls(nvars, order, {pack(e): _coerce(c) for e, c in data.items()})

    # --- inspection ------------------------------------------------------
    def coeff(self, exps):
        return self.coeffs.get(pack(exps), mpq(0))

    def items(self):
        n = self.nvars
        keys = sorted(self.coeffs, key=lambda k: (degree(k), tuple(-e for e in unpack(k, n))))
        return [(unpack(k, n), self.coeffs[k]) for k in keys]

    def is_zero(self) -> bool:
        return not self.coeffs

    def homogeneous(self, d: int):
        return self._new({k: c for k, c in self.coeffs.items() if degree(k) == d})

    def truncated(self, order: int):
        return self._new(self.coeffs, min(order, self.order))

    def to_gaussian(self):
        return self._new({k: ExactScalar.coerce(c) for k, c in self.coeffs.items()})

    def is_real(self) -> bool:
        return all(not isinstance(c, ExactScalar) or c.im == 0 for c in self.coeffs.values())

    # --- arithmetic ------------------------------------------------------
    def _check(self, other):
        if other.nvars != self.nvars:
            raise ValueError(f"series in {self.nvars} and {other.nvars} variables")

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = self._new({0: _coerce(other)})
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            prev = out.get(k)
            out[k] = c if prev is None else prev + c
        return self._new(out, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            other = self._new({0: _coerce(other)})
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = _coerce(c)
        return self._new({k: c * v if isinstance(c, ExactScalar) else v * c for k, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        M = min(self.order, other.order)
        groups: list = [[] for _ in range(M + 1)]
        for k, c in other.coeffs.items():
            groups[degree(k)].append((k, c))
        out: dict = {}
        for k1, c1 in self.coeffs.items():
            lim = M - degree(k1)
            for d in range(lim + 1):
                for k2, c2 in groups[d]:
                    key = k1 + k2
                    v = c1 * c2
                    prev = out.get(key)
                    out[key] = v if prev is None else prev + v
        return self._new(out, M)

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, m: int):
        out = self._new({0: mpq(1)})
        for _ in range(m):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.nvars, frozenset(self.coeffs.items())))

    def agrees_with(self, other, order=None) -> bool:
        """Coefficientwise equality through ``order`` (default: common order)."""
        M = min(self.order, other.order) if order is None else order
        diff = (self - other).coeffs
        return all(degree(k) > M for k in diff)

    # --- function application --------------------------------------------
    def apply_univariate(self, coeffs):
        """``sum_m c_m self^m``; requires zero constant term for truncation to be exact."""
        if self.coeffs.get(0):
            raise ValueError("substituted series must have zero constant term")
        out = self._new({})
        power = self._new({0: mpq(1)})
        for m, c in enumerate(coeffs):
            if m > self.order:
                break
            if m:
                power = power * self
                if power.is_zero():
                    break
            if c:
                out = out + power.scale(c)
        return out

    def compose(self, subs):
        """Substitute variable ``i`` by ``subs[i]`` (``None`` keeps the variable).

        Every substituted series must have zero constant term.
        """
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        n = self.nvars
        for s in subs:
            if s is not None:
                self._check(s)
                if s.coeffs.get(0):
                    raise ValueError("substituted series must have zero constant term")
        mask = [s is not None for s in subs]
        grouped: dict = {}
        for k, c in self.coeffs.items():
            exps = unpack(k, n)
            beta = tuple(e if m else 0 for e, m in zip(exps, mask))
            kept = pack(tuple(0 if m else e for e, m in zip(exps, mask)))
            grouped.setdefault(beta, {})[kept] = c
        cache = {tuple([0] * n): self._new({0: mpq(1)})}

        def monomial(beta):
            got = cache.get(beta)
            if got is None:
                i = max(j for j, e in enumerate(beta) if e)
                lower = list(beta)
                lower[i] -= 1
                got = monomial(tuple(lower)) * subs[i]
                cache[beta] = got
            return got

        out = self._new({})
        for beta in sorted(grouped, key=sum):
            if sum(beta) > self.order:
                continue
            out = out + monomial(beta) * self._new(grouped[beta])
        return out

    # --- numerics --------------------------------------------------------
    def evaluate(self, point):
        """Numeric value at ``point`` (floats or complex)."""
        n = self.nvars
        total = 0j
        for k, c in self.coeffs.items():
            term = complex(c) if isinstance(c, ExactScalar) else float(c)
            for x, e in zip(point, unpack(k, n)):
                if e:
                    term *= x**e
            total += term
        return total

    def to_json(self) -> list:
        return [{"exp": list(e), "coeff": str(ExactScalar.coerce(c))} for e, c in self.items()]

    def __str__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"({ExactScalar.coerce(c)})" + _mono("t", e) for e, c in self.items())

    def __repr__(self):
        return f"{type(self).__name__}(nvars={self.nvars}, order={self.order}, terms={len(self.coeffs)})"


def _mono(sym, exps):
    parts = [f"{sym}{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(exps) if e]
    return "*" + "*".join(parts) if parts else ""


class BiSeries(TruncatedSeries):
    """Series in two momentum covectors ``(k, q)``: variables ``k_0..k_{n-1}, q_0..q_{n-1}``."""

    __slots__ = ()

    @property
    def n(self) -> int:
        return self.nvars // 2

    @classmethod
    def k(cls, n: int, order: int, mu: int) -> "BiSeries":
        return cls(2 * n, order, {unit(mu): mpq(1)})

    @classmethod
    def q(cls, n: int, order: int, mu: int) -> "BiSeries":
        return cls(2 * n, order, {unit(n + mu): mpq(1)})

    @classmethod
    def zero(cls, n: int, order: int) -> "BiSeries":
        return cls(2 * n, order, {})

    def split_items(self):
        n = self.n
        return [(e[:n], e[n:], c) for e, c in self.items()]

    def evaluate_kq(self, k, q):
        return self.evaluate(list(k) + list(q))

    def to_json(self) -> list:
        return [
            {"k_exp": list(ke), "q_exp": list(qe), "coeff": str(ExactScalar.coerce(c))}
            for ke, qe, c in self.split_items()
        ]

    @classmethod
    def from_json(cls, n: int, order: int, data) -> "BiSeries":
        coeffs = {}
        for t in data:
            c = ExactScalar.parse(t["coeff"])
            coeffs[pack(tuple(t["k_exp"]) + tuple(t["q_exp"]))] = c.re if c.im == 0 else c
        return cls(2 * n, order, coeffs)
