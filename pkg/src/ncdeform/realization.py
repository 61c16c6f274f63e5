"""Operator realizations of the deformed coordinates and exact identity checks.

The coordinates are realized on the undeformed Heisenberg algebra as

    xhat_mu = X_mu (-A + f(B)) + i (aX) D_mu - (a^2 - s) (XD) D_mu gamma2(B)

with ``A = i a.D``, ``B = (a^2 - s) D.D`` and ``gamma2`` fixed by ``f``.
Every identity is checked by forming ``lhs - rhs`` as a normal-ordered
element and demanding the exact zero through the element's exact order.
Where a series inverse enters (``Z``, ``1/phi``), the residual is also
applied to every monomial up to ``max_degree``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Optional

from gmpy2 import mpq

from . import series as S
from .monomial import degree, monomials_upto, unpack
from .params import DeformationParams
from .scalar import I, ONE, ExactScalar, as_rational
from .weyl import (
    D,
    Polynomial,
    WeylElement,
    X,
    a_dot_d,
    a_dot_x,
    apply,
    commutator,
    const,
    dot_dd,
    dseries_from_univariate,
    dseries_invert,
    normal_product,
    x_dot_d,
)

__all__ = [
    "F_KINDS",
    "RealizationSpec",
    "IdentityResult",
    "VerificationReport",
    "WrongRealization",
    "gamma2_from_f",
    "box_series_from_f",
    "build_xhat",
    "build_M",
    "build_Z_pair",
    "build_box",
    "inverse_realization",
    "phi_inverse_matrix",
    "vacuum_lift",
    "check_axioms",
    "check_jacobi",
    "check_inverse_realization",
    "check_tensor_lift",
    "check_z_suite",
    "check_box",
    "invariant_I2",
    "snyder_map",
]

F_KINDS = ("sqrt_one_minus_B", "unity", "custom")


class WrongRealization(ValueError):
    """An operation was requested for a realization it is not defined for."""


# ---------------------------------------------------------------------------
# univariate data: f, gamma2, and the d'Alembertian integrand
# ---------------------------------------------------------------------------


def gamma2_from_f(f, K: int) -> list:
    """``gamma2 = -(1 + 2 f f') / (f - 2 B f')`` through ``B^K``."""
    f = [as_rational(c) for c in f] + [mpq(0)] * (K + 2)
    if f[0] != 1:
        raise ValueError("f must satisfy f(0) = 1")
    f = f[: K + 2]
    df = S.u_deriv(f)
    num = [mpq(1)] + [mpq(0)] * K
    two_f_df = [2 * c for c in S.u_mul(f, df, K)]
    num = [x + y for x, y in zip(num, two_f_df)]
    den = [f[m] - (2 * df[m - 1] if m >= 1 else 0) for m in range(K + 1)]
    return [-c for c in S.u_mul(num, S.u_inv(den, K), K)]


def box_series_from_f(f, K: int) -> list:
    """Coefficients ``b_m`` with ``box = D.D * sum_m b_m B^m``.

    This is the integral of ``1/(f(t) - t gamma2(t))`` from 0 to ``B``
    divided by ``a^2 - s``, with the division done per power of ``B``.
    """
    f = [as_rational(c) for c in f] + [mpq(0)] * (K + 2)
    g2 = gamma2_from_f(f, K)
    den = [f[m] - (g2[m - 1] if m >= 1 else 0) for m in range(K + 1)]
    integrand = S.u_inv(den, K)
    return [c / (m + 1) for m, c in enumerate(integrand)]


# ---------------------------------------------------------------------------
# the realization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealizationSpec:
    """Parameters plus the choice of ``f(B)`` and a derivative truncation order."""

    params: DeformationParams
    f_kind: str = "sqrt_one_minus_B"
    f_coeffs: tuple = ()
    trunc: int = 8

    def __post_init__(self):
        if self.f_kind not in F_KINDS:
            raise ValueError(f"f_kind must be one of {F_KINDS}, got {self.f_kind!r}")
        if self.f_kind == "custom":
            coeffs = tuple(as_rational(c) for c in self.f_coeffs)
            if not coeffs or coeffs[0] != 1:
                raise ValueError("custom f must start with coefficient 1 (f(0) = 1)")
            object.__setattr__(self, "f_coeffs", coeffs)
        if self.trunc < 2:
            raise ValueError("truncation order must be at least 2")

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def K(self) -> int:
        return self.trunc // 2 + 1

    def with_trunc(self, trunc: int) -> "RealizationSpec":
        return RealizationSpec(self.params, self.f_kind, self.f_coeffs, trunc)

    @cached_property
    def f_series(self) -> list:
        K = self.K
        if self.f_kind == "sqrt_one_minus_B":
            return S.u_sqrt_one_minus(K)
        if self.f_kind == "unity":
            return [mpq(1)] + [mpq(0)] * K
        return (list(self.f_coeffs) + [mpq(0)] * (K + 1))[: K + 1]

    @cached_property
    def gamma2_series(self) -> list:
        if self.f_kind == "sqrt_one_minus_B":
            return [mpq(0)] * (self.K + 1)
        return gamma2_from_f(self.f_series, self.K)

    @cached_property
    def f_op(self) -> WeylElement:
        return dseries_from_univariate(self.f_series, self.params, self.trunc)

    @cached_property
    def gamma2_op(self) -> WeylElement:
        return dseries_from_univariate(self.gamma2_series, self.params, self.trunc)

    @cached_property
    def A(self) -> WeylElement:
        return a_dot_d(self.params).scale(I)

    @cached_property
    def phi(self) -> WeylElement:
        """``-A + f(B)``."""
        return (self.f_op - self.A).truncated(self.trunc)

    @cached_property
    def phi_inv(self) -> WeylElement:
        return dseries_invert(self.phi, self.trunc)

    @cached_property
    def xhat(self) -> tuple:
        return tuple(build_xhat(self, mu) for mu in range(self.n))

    @cached_property
    def M(self) -> dict:
        n = self.n
        return {(m, v): build_M(n, m, v) for m in range(n) for v in range(n)}

    @cached_property
    def Dops(self) -> tuple:
        return tuple(D(self.n, mu) for mu in range(self.n))

    def phi_matrix(self) -> list:
        """``Phi_{alpha mu}(D)`` read off ``xhat_mu = X^alpha Phi_{alpha mu}``."""
        p = self.params
        n = self.n
        rows = []
        for alpha in range(n):
            e = [0] * n
            e[alpha] = 1
            rows.append([self.xhat[mu].dpart(e).scale(p.eta(alpha)) for mu in range(n)])
        return rows

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "f_kind": self.f_kind,
            "f_coeffs": [str(c) for c in self.f_coeffs],
            "trunc": self.trunc,
        }


def build_xhat(spec: RealizationSpec, mu: int) -> WeylElement:
    p = spec.params
    n = p.n
    N = spec.trunc
    first = normal_product(X(n, mu), spec.phi)
    second = normal_product(a_dot_x(p), D(n, mu)).scale(I)
    out = first + second
    if p.b_coeff and any(spec.gamma2_series):
        tail = normal_product(normal_product(x_dot_d(n), D(n, mu)), spec.gamma2_op, N)
        out = out - tail.scale(p.b_coeff)
    return out.truncated(N)


def build_M(n: int, mu: int, nu: int) -> WeylElement:
    """``M_{mu nu} = X_mu D_nu - X_nu D_mu``."""
    if mu == nu:
        return WeylElement.zero(n)
    return normal_product(X(n, mu), D(n, nu)) - normal_product(X(n, nu), D(n, mu))


def build_Z_pair(spec: RealizationSpec):
    """``(Z^{-1}, Z)`` with ``Z^{-1} = -A + sqrt(1 - B)``."""
    if spec.f_kind != "sqrt_one_minus_B":
        raise WrongRealization("the shift operator Z exists only for f(B) = sqrt(1 - B)")
    return spec.phi, spec.phi_inv


def build_box(spec: RealizationSpec) -> WeylElement:
    coeffs = box_series_from_f(spec.f_series, spec.K)
    return _dd_times(spec, coeffs)


def _dd_times(spec: RealizationSpec, coeffs) -> WeylElement:
    """``D.D * sum_m c_m B^m``, exact through ``spec.trunc``.

    The series factor is only needed through order ``trunc - 2`` because
    ``D.D`` is homogeneous of degree 2.
    """
    tail = dseries_from_univariate(coeffs, spec.params, spec.trunc - 2)
    prod = normal_product(dot_dd(spec.n), WeylElement(spec.n, tail.terms))
    return WeylElement(spec.n, prod.terms, spec.trunc)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class IdentityResult:
    identity: str
    indices: list
    status: str
    witness: Optional[list] = None
    order: Optional[float] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "exact-pass"

    def to_json(self) -> dict:
        out = {"identity": self.identity, "indices": list(self.indices), "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.order is not None:
            out["order"] = None if self.order == float("inf") else int(self.order)
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class VerificationReport:
    results: list = field(default_factory=list)

    def add(self, result: IdentityResult):
        self.results.append(result)

    def extend(self, other: "VerificationReport"):
        self.results.extend(other.results)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def by_identity(self) -> dict:
        out: dict = {}
        for r in self.results:
            out.setdefault(r.identity, []).append(r)
        return out

    def to_json(self) -> list:
        return [r.to_json() for r in self.results]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _witness(diff: WeylElement) -> Optional[list]:
    """A monomial ``X^beta`` on which ``diff`` acts nontrivially."""
    best = None
    for row in diff.terms.values():
        for dk in row:
            if best is None or degree(dk) < degree(best):
                best = dk
    return None if best is None else list(unpack(best, diff.n))


def _module_zero(diff: WeylElement, max_degree: int) -> Optional[list]:
    """Apply ``diff`` to every monomial of degree <= max_degree; return a failing one."""
    if diff.is_zero():
        return None
    for exps in monomials_upto(diff.n, max_degree):
        if not apply(diff, Polynomial.monomial(exps)).is_zero():
            return list(exps)
    return None


def _working(spec: RealizationSpec, max_degree: int, margin: int = 2) -> RealizationSpec:
    """Raise the truncation so nested commutators stay exact through ``max_degree``.

    Each commutator with a coordinate costs one order of exactness, and the
    deepest checks nest two of them.
    """
    if spec.trunc < max_degree:
        raise ValueError("truncation order must be at least max_degree")
    if spec.trunc >= max_degree + margin:
        return spec
    return spec.with_trunc(max_degree + margin)


def _verify(name, indices, diff: WeylElement, min_order: int, module: bool = False) -> IdentityResult:
    if diff.trunc < min_order:
        return IdentityResult(
            name, list(indices), "fail", _witness(diff), diff.trunc,
            note=f"exact order {diff.trunc} below required {min_order}",
        )
    if module:
        bad = _module_zero(diff.truncated(min_order), min_order)
        if bad is not None:
            return IdentityResult(name, list(indices), "fail", bad, diff.trunc)
    if not diff.is_zero():
        return IdentityResult(name, list(indices), "fail", _witness(diff), diff.trunc)
    return IdentityResult(name, list(indices), "exact-pass", None, diff.trunc)


# ---------------------------------------------------------------------------
# axiom suite
# ---------------------------------------------------------------------------


def check_axioms(spec: RealizationSpec, max_degree: int = 6, jacobi: bool = True) -> VerificationReport:
    """Lie-algebra relations among ``xhat``, ``M``, ``D`` and the realization identities."""
    spec = _working(spec, max_degree)
    p = spec.params
    n = p.n
    xh, M, Dm = spec.xhat, spec.M, spec.Dops
    eta = p.eta
    a = [ExactScalar(x) for x in p.a]
    s = ExactScalar(p.s)
    rep = VerificationReport()
    zero = WeylElement.zero(n)
    pairs = list(combinations(range(n), 2))

    # boundary condition Phi(0) = eta
    phi = spec.phi_matrix()
    ok = all(
        phi[al][mu].coeff([0] * n, [0] * n) == (eta(al) if al == mu else 0)
        for al in range(n)
        for mu in range(n)
    )
    rep.add(IdentityResult("Phi(0)=eta", [], "exact-pass" if ok else "fail"))

    # [D, X] = eta, [X, X] = 0, [D, D] = 0 on the underlying Heisenberg algebra
    for mu in range(n):
        for nu in range(n):
            d = commutator(Dm[mu], X(n, nu)) - const(n, eta(mu) if mu == nu else 0)
            rep.add(_verify("[D,X]=eta", [mu, nu], d, max_degree))
            rep.add(_verify("[X,X]=0", [mu, nu], commutator(X(n, mu), X(n, nu)), max_degree))

    xx = {}
    for mu, nu in pairs:
        c = commutator(xh[mu], xh[nu])
        xx[mu, nu] = c
        rhs = (xh[nu].scale(a[mu]) - xh[mu].scale(a[nu])).scale(I) + M[mu, nu].scale(s)
        rep.add(_verify("[xhat,xhat]", [mu, nu], c - rhs, max_degree))

    for (mu, nu) in pairs:
        for (la, rho) in pairs:
            lhs = commutator(M[mu, nu], M[la, rho])
            rhs = (
                M[mu, rho].scale(eta(nu) if nu == la else 0)
                - M[nu, rho].scale(eta(mu) if mu == la else 0)
                - M[mu, la].scale(eta(nu) if nu == rho else 0)
                + M[nu, la].scale(eta(mu) if mu == rho else 0)
            )
            rep.add(_verify("[M,M]", [mu, nu, la, rho], lhs - rhs, max_degree))

    for mu, nu in pairs:
        for la in range(n):
            lhs = commutator(M[mu, nu], xh[la])
            rhs = (
                xh[mu].scale(eta(nu) if nu == la else 0)
                - xh[nu].scale(eta(mu) if mu == la else 0)
                - (M[nu, la].scale(a[mu]) - M[mu, la].scale(a[nu])).scale(I)
            )
            rep.add(_verify("[M,xhat]", [mu, nu, la], lhs - rhs, max_degree))

    for mu in range(n):
        for nu in range(n):
            rep.add(_verify("[D,D]", [mu, nu], commutator(Dm[mu], Dm[nu]), max_degree))

    for mu, nu in pairs:
        for la in range(n):
            lhs = commutator(M[mu, nu], Dm[la])
            rhs = Dm[mu].scale(eta(nu) if nu == la else 0) - Dm[nu].scale(eta(mu) if mu == la else 0)
            rep.add(_verify("[M,D]", [mu, nu, la], lhs - rhs, max_degree))

    # deformed Heisenberg-Weyl algebra; the D_mu D_nu gamma2 term carries the
    # sign that follows from the realization itself (see Phi_{mu nu}(D))
    for mu in range(n):
        for nu in range(n):
            lhs = commutator(Dm[mu], xh[nu])
            rhs = spec.phi.scale(eta(mu) if mu == nu else 0) + Dm[nu].scale(I * a[mu])
            dd = normal_product(normal_product(Dm[mu], Dm[nu]), spec.gamma2_op)
            rhs = rhs - dd.scale(p.b_coeff)
            rep.add(_verify("[D,xhat]", [mu, nu], lhs - rhs, max_degree))

    for mu, nu in pairs:
        lhs = M[mu, nu]
        core = normal_product(xh[mu], Dm[nu]) - normal_product(xh[nu], Dm[mu])
        rhs = normal_product(core, spec.phi_inv)
        rep.add(_verify("M=(xD-xD)Phi^-1", [mu, nu], lhs - rhs, max_degree, module=True))
        rep.add(_verify("M Phi=(xD-xD)", [mu, nu], normal_product(lhs, spec.phi) - core, max_degree))

    for mu, nu in pairs:
        for la in range(n):
            lhs = commutator(xx[mu, nu], xh[la])
            rhs = (xh[nu].scale(a[mu]) - xh[mu].scale(a[nu])).scale(a[la]) + (
                xh[mu].scale(eta(nu) if nu == la else 0) - xh[nu].scale(eta(mu) if mu == la else 0)
            ).scale(s)
            rep.add(_verify("trilinear", [mu, nu, la], lhs - rhs, max_degree))

    if jacobi:
        rep.extend(check_jacobi(spec, max_degree))
    return rep


def check_jacobi(spec: RealizationSpec, max_degree: int = 6) -> VerificationReport:
    """``[[u,v],w] + [[v,w],u] + [[w,u],v] = 0`` for distinct generators."""
    spec = _working(spec, max_degree)
    n = spec.n
    gens = [(f"xhat_{m}", spec.xhat[m]) for m in range(n)]
    gens += [(f"M_{m}_{v}", spec.M[m, v]) for m, v in combinations(range(n), 2)]
    gens += [(f"D_{m}", spec.Dops[m]) for m in range(n)]
    comm = {}
    for i, j in combinations(range(len(gens)), 2):
        comm[i, j] = commutator(gens[i][1], gens[j][1])
    rep = VerificationReport()
    for i, j, k in combinations(range(len(gens)), 3):
        J = (
            commutator(comm[i, j], gens[k][1])
            + commutator(comm[j, k], gens[i][1])
            - commutator(comm[i, k], gens[j][1])
        )
        rep.add(_verify("jacobi", [gens[i][0], gens[j][0], gens[k][0]], J, max_degree))
    return rep


# ---------------------------------------------------------------------------
# shift operator Z
# ---------------------------------------------------------------------------


def check_z_suite(spec: RealizationSpec, max_degree: int = 6) -> VerificationReport:
    spec = _working(spec, max_degree)
    zinv, z = build_Z_pair(spec)
    p = spec.params
    n = p.n
    xh, M, Dm = spec.xhat, spec.M, spec.Dops
    a = [ExactScalar(x) for x in p.a]
    s = ExactScalar(p.s)
    rep = VerificationReport()
    rep.add(_verify("Z*Zinv=1", [], normal_product(z, zinv) - const(n, 1), max_degree))
    z2 = normal_product(z, z)
    for mu in range(n):
        lhs = commutator(zinv, xh[mu])
        rhs = zinv.scale(-I * a[mu]) + Dm[mu].scale(s)
        rep.add(_verify("[Zinv,xhat]", [mu], lhs - rhs, max_degree))
        rep.add(_verify("[Z,D]", [mu], commutator(z, Dm[mu]), max_degree, module=True))
        lhs = commutator(z, xh[mu])
        rhs = z.scale(I * a[mu]) - normal_product(Dm[mu], z2).scale(s)
        rep.add(_verify("[Z,xhat]", [mu], lhs - rhs, max_degree, module=True))
    zx = [normal_product(z, xh[nu]) for nu in range(n)]
    for mu, nu in combinations(range(n), 2):
        diff = normal_product(xh[mu], zx[nu]) - normal_product(xh[nu], zx[mu])
        rep.add(_verify("xhat Z xhat sym", [mu, nu], diff, max_degree, module=True))
        core = normal_product(xh[mu], Dm[nu]) - normal_product(xh[nu], Dm[mu])
        rep.add(_verify("M=(xD-xD)Z", [mu, nu], M[mu, nu] - normal_product(core, z), max_degree, module=True))
        lhs = commutator(zinv, M[mu, nu])
        rhs = (Dm[nu].scale(a[mu]) - Dm[mu].scale(a[nu])).scale(-I)
        rep.add(_verify("[Zinv,M]", [mu, nu], lhs - rhs, max_degree))
    if p.a_sq == p.s:
        rep.add(_verify("Zinv=1-A", [], zinv - (const(n, 1) - spec.A), max_degree))
    return rep


# ---------------------------------------------------------------------------
# d'Alembertian
# ---------------------------------------------------------------------------


def check_box(spec: RealizationSpec, max_degree: int = 6) -> VerificationReport:
    """``[box, xhat] = 2D``, ``[M, box] = 0`` and the special forms of ``box``."""
    spec = _working(spec, max_degree)
    p = spec.params
    n = p.n
    box = build_box(spec)
    rep = VerificationReport()
    for mu in range(n):
        diff = commutator(box, spec.xhat[mu]) - spec.Dops[mu].scale(2)
        rep.add(_verify("[box,xhat]", [mu], diff, max_degree))
    for mu, nu in combinations(range(n), 2):
        rep.add(_verify("[M,box]", [mu, nu], commutator(spec.M[mu, nu], box), max_degree))
    if spec.f_kind == "sqrt_one_minus_B":
        # 2(1 - sqrt(1 - B)) / B, coefficientwise through B^4
        closed = [-2 * c for c in S.u_sqrt_one_minus(6)[1:]]
        got = box_series_from_f(spec.f_series, 5)
        ok = all(got[m] == closed[m] for m in range(5))
        rep.add(IdentityResult("box series", [], "exact-pass" if ok else "fail", None, 4))
        closed_op = _dd_times(spec, closed)
        rep.add(_verify("box operator", [], box - closed_op, max_degree))
    if p.a_sq == p.s:
        rep.add(_verify("box=D.D", [], box - dot_dd(n), max_degree))
    return rep


# ---------------------------------------------------------------------------
# inverse realization, vacuum construction, invariants
# ---------------------------------------------------------------------------


def _h_op(spec: RealizationSpec) -> WeylElement:
    """``1 / (f(B) - B gamma2(B))``."""
    K = spec.K
    g2 = spec.gamma2_series
    den = [spec.f_series[m] - (g2[m - 1] if m >= 1 else 0) for m in range(K + 1)]
    return dseries_from_univariate(S.u_inv(den, K), spec.params, spec.trunc)


def phi_inverse_matrix(spec: RealizationSpec) -> list:
    """D-series ``(Phi^{-1})^alpha_mu`` with ``X_mu = xhat_alpha (Phi^{-1})^alpha_mu``."""
    p = spec.params
    n = p.n
    N = spec.trunc
    h = _h_op(spec)
    hg = normal_product(h, spec.gamma2_op, N)
    out = []
    for al in range(n):
        row = []
        for mu in range(n):
            e = const(n, 1 if al == mu else 0)
            e = e - normal_product(spec.Dops[mu], h, N).scale(I * p.a_upper(al))
            dd = normal_product(normal_product(spec.Dops[al], spec.Dops[mu]), hg, N)
            e = e + dd.scale(p.b_coeff * p.eta(al))
            row.append(normal_product(e, spec.phi_inv, N))
        out.append(row)
    return out


def inverse_realization(spec: RealizationSpec, mu: int) -> WeylElement:
    """``X_mu`` rebuilt from ``xhat`` and D-series."""
    p = spec.params
    n = p.n
    N = spec.trunc
    xh = spec.xhat
    h = _h_op(spec)
    a_xhat = WeylElement.zero(n)
    xhat_d = WeylElement.zero(n)
    for al in range(n):
        a_xhat = a_xhat + xh[al].scale(p.a_upper(al))
        xhat_d = xhat_d + normal_product(xh[al], spec.Dops[al]).scale(p.eta(al))
    hd = normal_product(h, spec.Dops[mu], N)
    inner = xh[mu] - normal_product(a_xhat, hd, N).scale(I)
    inner = inner + normal_product(xhat_d, normal_product(hd, spec.gamma2_op, N), N).scale(p.b_coeff)
    return normal_product(inner, spec.phi_inv, N)


def _word_element(spec: RealizationSpec, word: tuple) -> WeylElement:
    out = const(spec.n, 1)
    for mu in word:
        out = normal_product(out, spec.xhat[mu])
    return out


def vacuum_lift(spec: RealizationSpec, target: Polynomial):
    """Noncommutative polynomial ``phihat`` with ``phihat(xhat)|0> = target``.

    Returns ``(words, element)``: ``words`` maps sorted index tuples
    ``(mu_1 <= ... <= mu_k)`` to coefficients of ``xhat_{mu_1} ... xhat_{mu_k}``.
    Built top degree first; each ``xhat`` word acts on 1 as its commutative
    monomial plus strictly lower-degree terms.
    """
    n = spec.n
    if target.degree > spec.trunc:
        raise ValueError("target degree exceeds truncation order")
    words: dict = {}
    residual = target
    cache: dict = {}
    one = Polynomial.one(n)
    while not residual.is_zero():
        top = residual.degree
        for exps, c in list(residual.items()):
            if sum(exps) != top:
                continue
            word = tuple(mu for mu, e in enumerate(exps) for _ in range(e))
            if word not in cache:
                el = _word_element(spec, word)
                cache[word] = (el, apply(el, one))
            words[word] = words.get(word, ExactScalar(0)) + c
            residual = residual - cache[word][1].scale(c)
    words = {w: c for w, c in words.items() if c}
    element = WeylElement.zero(n)
    for w, c in words.items():
        element = element + cache[w][0].scale(c)
    return words, element


def invariant_I2(spec: RealizationSpec):
    """Second-order invariant lifted from ``X.X``; returns ``(element, report)``."""
    p = spec.params
    n = p.n
    rep = VerificationReport()
    xx = Polynomial.from_dict(n, {tuple(2 if m == mu else 0 for m in range(n)): p.eta(mu) for mu in range(n)})
    words, lifted = vacuum_lift(spec, xx)
    claimed_words = {}
    for mu in range(n):
        claimed_words[(mu, mu)] = ExactScalar(p.eta(mu))
        c = -I * ExactScalar((n - 1) * p.a_upper(mu))
        if c:
            claimed_words[(mu,)] = c
    rep.add(IdentityResult("I2 words", [], "exact-pass" if words == claimed_words else "fail"))
    claimed = WeylElement.zero(n)
    for w, c in claimed_words.items():
        claimed = claimed + _word_element(spec, w).scale(c)
    rep.add(_verify("I2 operator", [], lifted - claimed, 2))
    one = Polynomial.one(n)
    on_vac = apply(claimed, one)
    rep.add(IdentityResult("I2|0>=X.X", [], "exact-pass" if on_vac == xx else "fail"))
    for mu, nu in combinations(range(n), 2):
        got = apply(normal_product(spec.M[mu, nu], claimed), one)
        rep.add(IdentityResult("M I2|0>=0", [mu, nu], "exact-pass" if got.is_zero() else "fail"))
    return claimed, rep


def check_tensor_lift(spec: RealizationSpec) -> VerificationReport:
    """``X_mu X_nu`` rebuilt from ``xhat_b (Phi^-1)^b_mu xhat_c (Phi^-1)^c_nu`` on the vacuum."""
    n = spec.n
    N = spec.trunc
    inv = phi_inverse_matrix(spec)
    xs = []
    for mu in range(n):
        el = WeylElement.zero(n)
        for be in range(n):
            el = el + normal_product(spec.xhat[be], inv[be][mu], N)
        xs.append(el)
    rep = VerificationReport()
    one = Polynomial.one(n)
    for mu in range(n):
        rep.add(_verify("X=xhat Phi^-1", [mu], xs[mu] - X(n, mu), 4))
        for nu in range(mu, n):
            got = apply(normal_product(xs[mu], xs[nu]), one)
            want = Polynomial.monomial(tuple((m == mu) + (m == nu) for m in range(n)))
            rep.add(IdentityResult("tensor XX|0>", [mu, nu], "exact-pass" if got == want else "fail"))
    return rep


def check_inverse_realization(spec: RealizationSpec, max_degree: int = 6) -> VerificationReport:
    spec = _working(spec, max_degree)
    rep = VerificationReport()
    for mu in range(spec.n):
        diff = inverse_realization(spec, mu) - X(spec.n, mu)
        rep.add(_verify("inverse realization", [mu], diff, max_degree, module=True))
    return rep


# ---------------------------------------------------------------------------
# map to Snyder space
# ---------------------------------------------------------------------------


def snyder_map(spec: RealizationSpec, max_degree: int = 6):
    """``xtilde_mu = xhat_mu - i a^alpha M_{alpha mu}``; returns ``(xtilde, report)``."""
    spec = _working(spec, max_degree)
    p = spec.params
    n = p.n
    N = spec.trunc
    xh, M, Dm = spec.xhat, spec.M, spec.Dops
    xt = []
    for mu in range(n):
        shift = WeylElement.zero(n)
        for al in range(n):
            shift = shift + M[al, mu].scale(p.a_upper(al))
        xt.append(xh[mu] - shift.scale(I))
    rep = VerificationReport()
    s_minus_a2 = p.s - p.a_sq
    f_inv = dseries_invert(spec.f_op, N)
    for mu, nu in combinations(range(n), 2):
        lhs = commutator(xt[mu], xt[nu])
        rep.add(_verify("[xt,xt]", [mu, nu], lhs - M[mu, nu].scale(s_minus_a2), max_degree))
        if s_minus_a2 == 0:
            rep.add(_verify("commuting xtilde", [mu, nu], lhs, max_degree))
        for la in range(n):
            lhs = commutator(M[mu, nu], xt[la])
            rhs = xt[mu].scale(p.eta(nu) if nu == la else 0) - xt[nu].scale(p.eta(mu) if mu == la else 0)
            rep.add(_verify("[M,xt]", [mu, nu, la], lhs - rhs, max_degree))
        core = normal_product(xt[mu], Dm[nu]) - normal_product(xt[nu], Dm[mu])
        rep.add(_verify("M=(xtD-xtD)/f", [mu, nu], M[mu, nu] - normal_product(core, f_inv, N), max_degree, module=True))
    for mu in range(n):
        rhs = normal_product(X(n, mu), spec.f_op)
        tail = normal_product(normal_product(x_dot_d(n), Dm[mu]), spec.gamma2_op, N)
        rhs = rhs - tail.scale(p.b_coeff)
        rep.add(_verify("xt closed form", [mu], xt[mu] - rhs.truncated(N), max_degree))
    return xt, rep
