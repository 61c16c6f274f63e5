"""Normal-ordered Weyl algebra ``[D_mu, X_nu] = eta_{mu nu}`` over Gaussian rationals.

Elements are finite sums ``c * X^alpha * D^beta`` with every ``X`` to the left
of every ``D``.  Operators such as ``xhat`` are infinite series in ``D``; each
element therefore carries ``trunc``, the largest derivative order ``|beta|``
on which its coefficients are exact.  Terms beyond ``trunc`` are dropped.

A product ``u * v`` is exact through order ``min(u.trunc - xdeg(v), v.trunc)``:
commuting ``D^beta`` past ``X^gamma`` lowers the derivative order by at most
``|gamma|``, so missing high-order terms of ``u`` can leak down that far.
"""

from __future__ import annotations

import math
from math import comb, factorial

from gmpy2 import mpq

from . import monomial as mono
from .monomial import degree, pack, sub_indices, unit, unpack
from .params import DeformationParams
from .scalar import ONE, ZERO, ExactScalar

__all__ = [
    "INF",
    "Polynomial",
    "WeylElement",
    "normal_product",
    "commutator",
    "apply",
    "X",
    "D",
    "const",
    "dot_dd",
    "a_dot_d",
    "a_dot_x",
    "x_dot_d",
    "dseries_from_univariate",
    "dseries_invert",
    "DimensionMismatch",
    "DegreeOverflow",
]

INF = math.inf
_Q0 = mpq(0)


class DimensionMismatch(ValueError):
    pass


class DegreeOverflow(ValueError):
    """A polynomial's degree exceeds the truncation order of an operator."""


def _scalar(c) -> ExactScalar:
    return c if isinstance(c, ExactScalar) else ExactScalar.coerce(c)


def _eta_power(j: int, n: int) -> int:
    # eta = diag(-1, 1, ...): only the time component carries a sign
    return -1 if unpack(j, n)[0] % 2 else 1


# ---------------------------------------------------------------------------
# commutative polynomials: the module on which D annihilates 1
# ---------------------------------------------------------------------------


class Polynomial:
    """Polynomial in lower-index commuting variables ``X_0 .. X_{n-1}``."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        self.n = n
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v}

    @classmethod
    def from_dict(cls, n: int, data) -> "Polynomial":
        out = {}
        for exps, c in data.items():
            if len(exps) != n:
                raise DimensionMismatch(f"exponent {exps} has wrong length for n={n}")
            k = pack(exps)
            out[k] = out.get(k, ZERO) + _scalar(c)
        return cls(n, out)

    @classmethod
    def monomial(cls, exps, c=ONE) -> "Polynomial":
        return cls(len(exps), {pack(exps): _scalar(c)})

    @classmethod
    def one(cls, n: int) -> "Polynomial":
        return cls(n, {0: ONE})

    @classmethod
    def variable(cls, n: int, mu: int) -> "Polynomial":
        return cls(n, {unit(mu): ONE})

    @property
    def degree(self) -> int:
        return max((degree(k) for k in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def items(self):
        for k in sorted(self.coeffs, key=lambda k: (degree(k), unpack(k, self.n))):
            yield unpack(k, self.n), self.coeffs[k]

    def _check(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, ZERO) + v
        return Polynomial(self.n, out)

    def __neg__(self):
        return Polynomial(self.n, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "Polynomial":
        c = _scalar(c)
        return Polynomial(self.n, {k: c * v for k, v in self.coeffs.items()})

    def __rmul__(self, c):
        if isinstance(c, Polynomial):
            return NotImplemented
        return self.scale(c)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        out = {}
        for k1, v1 in self.coeffs.items():
            for k2, v2 in other.coeffs.items():
                k = k1 + k2
                out[k] = out.get(k, ZERO) + v1 * v2
        return Polynomial(self.n, out)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def evaluate(self, x) -> complex:
        total = 0j
        for exps, c in self.items():
            term = complex(c)
            for xi, e in zip(x, exps):
                term *= xi**e
            total += term
        return total

    def as_weyl(self) -> "WeylElement":
        return WeylElement(self.n, {k: {0: v} for k, v in self.coeffs.items()}, INF)

    def to_json(self) -> list:
        return [{"x_exp": list(e), "coeff": str(c)} for e, c in self.items()]

    @classmethod
    def from_json(cls, n: int, data) -> "Polynomial":
        return cls.from_dict(n, {tuple(t["x_exp"]): ExactScalar.parse(t["coeff"]) for t in data})

    def __str__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"({c})" + _mono_str("X", e) for e, c in self.items())

    __repr__ = __str__


def _mono_str(sym, exps) -> str:
    parts = []
    for mu, e in enumerate(exps):
        if e == 1:
            parts.append(f"{sym}_{mu}")
        elif e > 1:
            parts.append(f"{sym}_{mu}^{e}")
    return "*" + "*".join(parts) if parts else ""


# ---------------------------------------------------------------------------
# Weyl algebra elements
# ---------------------------------------------------------------------------


class WeylElement:
    """Normal-ordered operator ``sum c X^alpha D^beta`` exact through ``trunc``.

    ``terms`` maps a packed X-exponent to a dict ``{packed D-exponent: coeff}``.
    """

    __slots__ = ("n", "terms", "trunc", "_xdeg")

    def __init__(self, n: int, terms=None, trunc=INF):
        self.n = n
        self.trunc = trunc
        clean = {}
        for xk, dpoly in (terms or {}).items():
            row = {dk: c for dk, c in dpoly.items() if c and degree(dk) <= trunc}
            if row:
                clean[xk] = row
        self.terms = clean
        self._xdeg = None

    # --- constructors ----------------------------------------------------
    @classmethod
    def from_terms(cls, n: int, items, trunc=INF) -> "WeylElement":
        """Build from ``(x_exp, d_exp, coeff)`` triples, summing repeats."""
        terms: dict = {}
        for xe, de, c in items:
            if len(xe) != n or len(de) != n:
                raise DimensionMismatch("exponent length does not match dimension")
            row = terms.setdefault(pack(xe), {})
            dk = pack(de)
            row[dk] = row.get(dk, ZERO) + _scalar(c)
        return cls(n, terms, trunc)

    @classmethod
    def zero(cls, n: int, trunc=INF) -> "WeylElement":
        return cls(n, {}, trunc)

    # --- inspection ------------------------------------------------------
    @property
    def xdeg(self) -> int:
        if self._xdeg is None:
            self._xdeg = max((degree(k) for k in self.terms), default=0)
        return self._xdeg

    @property
    def ddeg(self) -> int:
        return max((degree(dk) for row in self.terms.values() for dk in row), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def is_dseries(self) -> bool:
        return all(xk == 0 for xk in self.terms)

    def items(self):
        """``(x_exp, d_exp, coeff)`` in graded-lexicographic order."""
        n = self.n
        rows = []
        for xk, row in self.terms.items():
            for dk, c in row.items():
                rows.append((unpack(xk, n), unpack(dk, n), c))
        rows.sort(key=lambda r: (sum(r[0]), r[0], sum(r[1]), r[1]))
        return rows

    def coeff(self, x_exp, d_exp) -> ExactScalar:
        return self.terms.get(pack(x_exp), {}).get(pack(d_exp), ZERO)

    def dpart(self, x_exp=None) -> "WeylElement":
        """The D-series multiplying ``X^x_exp`` (default: the constant X-term)."""
        xk = pack(x_exp) if x_exp is not None else 0
        return WeylElement(self.n, {0: dict(self.terms.get(xk, {}))}, self.trunc)

    def truncated(self, order) -> "WeylElement":
        return WeylElement(self.n, self.terms, min(self.trunc, order))

    def num_terms(self) -> int:
        return sum(len(r) for r in self.terms.values())

    # --- linear structure ------------------------------------------------
    def _same(self, other):
        if other.n != self.n:
            raise DimensionMismatch(f"dimensions {self.n} and {other.n}")

    def _lift(self, other):
        if isinstance(other, WeylElement):
            self._same(other)
            return other
        if isinstance(other, Polynomial):
            return other.as_weyl()
        return const(self.n, other)

    def __add__(self, other):
        other = self._lift(other)
        trunc = min(self.trunc, other.trunc)
        out = {xk: dict(row) for xk, row in self.terms.items()}
        for xk, row in other.terms.items():
            tgt = out.setdefault(xk, {})
            for dk, c in row.items():
                prev = tgt.get(dk)
                tgt[dk] = c if prev is None else prev + c
        return WeylElement(self.n, out, trunc)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement(
            self.n, {xk: {dk: -c for dk, c in row.items()} for xk, row in self.terms.items()}, self.trunc
        )

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "WeylElement":
        c = _scalar(c)
        if not c:
            return WeylElement.zero(self.n, self.trunc)
        return WeylElement(
            self.n, {xk: {dk: c * v for dk, v in row.items()} for xk, row in self.terms.items()}, self.trunc
        )

    def __mul__(self, other):
        if isinstance(other, (WeylElement, Polynomial)):
            return normal_product(self, self._lift(other))
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, Polynomial):
            return normal_product(other.as_weyl(), self)
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset((xk, frozenset(r.items())) for xk, r in self.terms.items())))

    # --- serialization ---------------------------------------------------
    def to_json(self) -> list:
        return [{"x_exp": list(xe), "d_exp": list(de), "coeff": str(c)} for xe, de, c in self.items()]

    @classmethod
    def from_json(cls, n: int, data, trunc=INF) -> "WeylElement":
        return cls.from_terms(
            n, ((tuple(t["x_exp"]), tuple(t["d_exp"]), ExactScalar.parse(t["coeff"])) for t in data), trunc
        )

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(
            f"({c})" + _mono_str("X", xe) + _mono_str("D", de) for xe, de, c in self.items()
        )

    def __repr__(self):
        return f"WeylElement(n={self.n}, trunc={self.trunc}, terms={self.num_terms()})"


# ---------------------------------------------------------------------------
# product kernel
# ---------------------------------------------------------------------------


def _by_degree(row: dict) -> list:
    """Group a D-polynomial as ``groups[d] = [(key, re, im), ...]``."""
    groups: list = []
    for dk, c in row.items():
        d = degree(dk)
        while len(groups) <= d:
            groups.append([])
        groups[d].append((dk, c.re, c.im))
    return groups


def _derivative(row: dict, j: int, n: int, factor: int) -> list:
    """``factor * d^j/dD^j`` of a D-polynomial as ``[(key, deg, re, im)]``."""
    if j == 0:
        if factor == 1:
            return [(dk, degree(dk), c.re, c.im) for dk, c in row.items()]
        return [(dk, degree(dk), factor * c.re, factor * c.im) for dk, c in row.items()]
    jexp = unpack(j, n)
    out = []
    for dk, c in row.items():
        bexp = unpack(dk, n)
        f = factor
        for b, jj in zip(bexp, jexp):
            if jj > b:
                f = 0
                break
            for t in range(b - jj + 1, b + 1):
                f *= t
        if f:
            nk = dk - j
            out.append((nk, degree(nk), f * c.re, f * c.im))
    return out


def _accumulate(plist, qgroups, limit, target):
    top = len(qgroups) - 1
    for pk, pd, pr, pi in plist:
        lim = limit - pd
        if lim < 0:
            continue
        upto = top if lim >= top else int(lim)
        p_real = not pi
        for d in range(upto + 1):
            for qk, qr, qi in qgroups[d]:
                key = pk + qk
                if p_real:
                    re = pr * qr
                    im = pr * qi
                else:
                    re = pr * qr - pi * qi
                    im = pr * qi + pi * qr
                acc = target.get(key)
                if acc is None:
                    target[key] = [re, im]
                else:
                    acc[0] += re
                    acc[1] += im


def normal_product(u: WeylElement, v: WeylElement, trunc=INF) -> WeylElement:
    """Canonical normal-ordered product ``u * v``.

    Uses ``F(D) X^gamma = sum_j C(gamma, j) eta^j X^(gamma - j) (d^j F)(D)``.
    """
    if u.n != v.n:
        raise DimensionMismatch(f"dimensions {u.n} and {v.n}")
    n = u.n
    T = min(u.trunc - v.xdeg, v.trunc, trunc)
    if T < 0:
        return WeylElement.zero(n, T)
    acc: dict = {}
    vgroups = [(xg, _by_degree(row)) for xg, row in v.terms.items()]
    for xa, prow in u.terms.items():
        dcache: dict = {}
        for xg, qgroups in vgroups:
            gexp = unpack(xg, n)
            for j in sub_indices(xg, n):
                jexp = unpack(j, n)
                fac = _eta_power(j, n)
                for g, jj in zip(gexp, jexp):
                    fac *= comb(g, jj)
                key = (j, fac)
                plist = dcache.get(key)
                if plist is None:
                    plist = dcache[key] = _derivative(prow, j, n, fac)
                if not plist:
                    continue
                _accumulate(plist, qgroups, T, acc.setdefault(xa + xg - j, {}))
    terms = {}
    for xk, row in acc.items():
        clean = {}
        for dk, (re, im) in row.items():
            if re or im:
                clean[dk] = ExactScalar._raw(re, im)
        if clean:
            terms[xk] = clean
    return WeylElement(n, terms, T)


def commutator(u: WeylElement, v: WeylElement, trunc=INF) -> WeylElement:
    return normal_product(u, v, trunc) - normal_product(v, u, trunc)


def apply(u: WeylElement, p: Polynomial) -> Polynomial:
    """Left action of ``u`` on the polynomial module (``D_mu 1 = 0``)."""
    if u.n != p.n:
        raise DimensionMismatch(f"dimensions {u.n} and {p.n}")
    if p.degree > u.trunc:
        raise DegreeOverflow(f"polynomial degree {p.degree} exceeds operator truncation {u.trunc}")
    n = u.n
    out: dict = {}
    for gk, pc in p.coeffs.items():
        gexp = unpack(gk, n)
        for xa, row in u.terms.items():
            for dk, c in row.items():
                bexp = unpack(dk, n)
                f = _eta_power(dk, n)
                for g, b in zip(gexp, bexp):
                    if b > g:
                        f = 0
                        break
                    for t in range(g - b + 1, g + 1):
                        f *= t
                if not f:
                    continue
                k = xa + gk - dk
                out[k] = out.get(k, ZERO) + c * pc * f
    return Polynomial(n, out)


# ---------------------------------------------------------------------------
# generators and D-series
# ---------------------------------------------------------------------------


def X(n: int, mu: int) -> WeylElement:
    return WeylElement(n, {unit(mu): {0: ONE}})


def D(n: int, mu: int) -> WeylElement:
    return WeylElement(n, {0: {unit(mu): ONE}})


def const(n: int, c) -> WeylElement:
    return WeylElement(n, {0: {0: _scalar(c)}})


def dot_dd(n: int) -> WeylElement:
    """``D_alpha D^alpha``."""
    return WeylElement(n, {0: {2 * unit(m): ExactScalar(-1 if m == 0 else 1) for m in range(n)}})


def a_dot_d(p: DeformationParams) -> WeylElement:
    """``a_alpha D^alpha`` (so that ``A = i * a_dot_d``)."""
    return WeylElement(p.n, {0: {unit(m): ExactScalar(p.a_upper(m)) for m in range(p.n)}})


def a_dot_x(p: DeformationParams) -> WeylElement:
    """``a_alpha X^alpha``."""
    return WeylElement(p.n, {unit(m): {0: ExactScalar(p.a_upper(m))} for m in range(p.n)})


def x_dot_d(n: int) -> WeylElement:
    """``X_alpha D^alpha``."""
    return WeylElement(n, {unit(m): {unit(m): ExactScalar(-1 if m == 0 else 1)} for m in range(n)})


def dseries_from_univariate(coeffs, p: DeformationParams, trunc: int, variable: str = "B") -> WeylElement:
    """``sum_m c_m Y^m`` with ``Y = (a^2 - s) D.D`` or ``Y = A = i a.D``.

    ``Y = B`` raises the derivative order by 2 per power, ``Y = A`` by 1; only
    the coefficients that reach order ``trunc`` are read.
    """
    n = p.n
    if variable == "B":
        y = dot_dd(n).scale(p.b_coeff)
        step = 2
    elif variable == "A":
        y = a_dot_d(p).scale(ExactScalar(0, 1))
        step = 1
    else:
        raise ValueError(f"unknown series variable {variable!r}")
    coeffs = list(coeffs)
    result = WeylElement.zero(n, trunc)
    power = const(n, 1)
    for m, c in enumerate(coeffs):
        if m * step > trunc:
            break
        if m:
            power = normal_product(power, y, trunc)
        c = _scalar(c)
        if c:
            result = result + power.scale(c)
    return WeylElement(n, result.terms, trunc)


def _homogeneous(z: WeylElement) -> list:
    parts: list = []
    for dk, c in z.terms.get(0, {}).items():
        d = degree(dk)
        while len(parts) <= d:
            parts.append({})
        parts[d][dk] = c
    return parts


def dseries_invert(z: WeylElement, trunc=INF) -> WeylElement:
    """Series inverse ``w`` of a D-series with ``z * w = 1`` through ``trunc``."""
    if not z.is_dseries():
        raise ValueError("dseries_invert expects a pure D-series")
    T = min(z.trunc, trunc)
    if T == INF:
        raise ValueError("inverse of a D-series needs a finite truncation order")
    T = int(T)
    parts = _homogeneous(z)
    c0 = parts[0].get(0, ZERO) if parts else ZERO
    if not c0:
        raise ZeroDivisionError("D-series has zero constant term")
    inv0 = c0.inverse()
    n = z.n
    w_parts = [{0: inv0}]
    for d in range(1, T + 1):
        acc: dict = {}
        for j in range(1, min(d, len(parts) - 1) + 1):
            zj = parts[j]
            wr = w_parts[d - j]
            if not zj or not wr:
                continue
            _accumulate(
                [(k, j, c.re, c.im) for k, c in zj.items()],
                _by_degree(wr),
                d,
                acc,
            )
        wd = {}
        for k, (re, im) in acc.items():
            c = -(ExactScalar._raw(re, im) * inv0)
            if c:
                wd[k] = c
        w_parts.append(wd)
    merged = {}
    for part in w_parts:
        merged.update(part)
    return WeylElement(n, {0: merged}, T)
