"""Deformed momentum addition, coproduct checks and star products.

``Dsum_mu(k, q) = P_mu(K^{-1}(k), q)`` is built twice: as an exact
``BiSeries`` (series composition and inversion) and as a float function
(closed-form flow plus a Newton inverse of ``K``).  The star product on
polynomials uses the exact series; plane waves use the float path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import factorial

import numpy as np
from gmpy2 import mpq

from . import series as S
from .momentum_flow import (
    DomainError,
    NoConvergence,
    _bi_a_dot,
    _bi_dot,
    _radicand,
    _vec,
    _w2,
    big_k,
    big_k_inverse,
    box_of,
    dot,
    even_kernels,
    flow_closed_form,
    flow_series_of,
    z_inverse_of,
)
from .monomial import pack, unpack
from .params import DeformationParams
from .scalar import I, ExactScalar, as_rational
from .series import BiSeries
from .weyl import DegreeOverflow, Polynomial

__all__ = [
    "StarConfig",
    "k_series",
    "k_series_inverse",
    "dsum_series",
    "dsum_float",
    "dsum_offset",
    "coproduct_terms",
    "coproduct_check",
    "coproduct_exact_orders",
    "snyder_closed_form",
    "kappa_closed_form",
    "snyder_closed_series",
    "kappa_closed_series",
    "special_coproducts",
    "star_plane_waves",
    "star_polynomials",
    "associativity_defect",
    "defect_scaling",
]


@dataclass(frozen=True)
class StarConfig:
    params: DeformationParams
    order: int = 6
    tol: float = 1e-10

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("series order must be at least 2")


# ---------------------------------------------------------------------------
# exact series
# ---------------------------------------------------------------------------


def _kq_vars(n: int, order: int):
    return [BiSeries.k(n, order, m) for m in range(n)], [BiSeries.q(n, order, m) for m in range(n)]


def k_series(params: DeformationParams, order: int) -> list:
    """``K_mu(k)`` through ``order`` (series in the k-variables only)."""
    n = params.n
    kv, _ = _kq_vars(n, order)
    zero = [BiSeries.zero(n, order)] * n
    return flow_series_of(params, order, kv, zero)


def k_series_inverse(params: DeformationParams, order: int) -> list:
    """Compositional inverse of ``K`` by the fixed point ``G = k - (K - id)(G)``."""
    return list(_k_series_inverse(params, order))


@lru_cache(maxsize=32)
def _k_series_inverse(params: DeformationParams, order: int) -> tuple:
    # H starts at degree 2, so if G is correct through degree d then k - H(G)
    # is correct through d + 1; pass d therefore works at order d + 1 only
    n = params.n
    kv, _ = _kq_vars(n, order)
    K = k_series(params, order)
    H = [K[m] - kv[m] for m in range(n)]
    G = list(kv)
    for d in range(1, order):
        w = d + 1
        subs = [_at_order(g, w) for g in G] + [None] * n
        G = [kv[m].truncated(w) - H[m].truncated(w).compose(subs) for m in range(n)]
    return tuple(_at_order(g, order) for g in G)


def _at_order(g: BiSeries, order: int) -> BiSeries:
    """Same coefficients, declared exact through ``order``."""
    return BiSeries(g.nvars, order, g.coeffs)


def dsum_series(params: DeformationParams, order: int) -> list:
    """``Dsum_mu(k, q) = P_mu(K^{-1}(k), q)`` through total ``order``."""
    return list(_dsum_series(params, order))


@lru_cache(maxsize=32)
def _dsum_series(params: DeformationParams, order: int) -> tuple:
    n = params.n
    _, qv = _kq_vars(n, order)
    return tuple(flow_series_of(params, order, k_series_inverse(params, order), qv))


def coproduct_terms(params: DeformationParams, order: int = 3) -> list:
    """The first- and second-order coproduct terms as exact ``BiSeries``.

    With ``D -> i k`` in the first factor and ``D -> i q`` in the second and
    an overall factor ``1/i``: the first-order part is
    ``k_mu (aq) - a_mu (kq)`` and the second-order part is
    ``(a^2 - s)/2 k_mu q^2 + a_mu (ak)(kq) - a_mu k^2 (aq)/2 - s k_mu (kq)/2``.
    Returns ``[(zeroth, first, second)]`` per component.
    """
    n = params.n
    kv, qv = _kq_vars(n, order)
    ak, aq = _bi_a_dot(params, order, kv), _bi_a_dot(params, order, qv)
    kk, kq, qq = _bi_dot(n, order, kv, kv), _bi_dot(n, order, kv, qv), _bi_dot(n, order, qv, qv)
    half = mpq(1, 2)
    out = []
    for m in range(n):
        a_m = params.a[m]
        zeroth = kv[m] + qv[m]
        first = kv[m] * aq - kq.scale(a_m)
        second = (
            (kv[m] * qq).scale(half * params.b_coeff)
            + (ak * kq).scale(a_m)
            - (kk * aq).scale(half * a_m)
            - (kv[m] * kq).scale(half * params.s)
        )
        out.append((zeroth, first, second))
    return out


def coproduct_exact_orders(params: DeformationParams, order: int = 4) -> dict:
    """Exact comparison of ``Dsum`` with the coproduct terms, degree by degree.

    Under ``a -> eps a``, ``s -> eps^2 s`` every power of ``eps`` comes with
    one extra power of momentum, so the total-degree ``d + 1`` part of
    ``Dsum`` is exactly its ``eps^d`` coefficient.
    """
    dsum = dsum_series(params, order)
    terms = coproduct_terms(params, order)
    ok = []
    for m, (t0, t1, t2) in enumerate(terms):
        for d, t in ((1, t0), (2, t1), (3, t2)):
            ok.append(dsum[m].homogeneous(d) == t)
    return {"check": "coproduct exact orders", "status": "exact-pass" if all(ok) else "fail"}


# ---------------------------------------------------------------------------
# float path
# ---------------------------------------------------------------------------


def dsum_float(k, q, params: DeformationParams, newton_tol: float = 1e-12) -> np.ndarray:
    """``Dsum(k, q)`` from the closed-form flow and a Newton inverse of ``K``."""
    p = big_k_inverse(k, params, tol=newton_tol)
    return flow_closed_form(p, q, 1.0, params).p


def _sinhc_minus_one(w2: float) -> float:
    """``sinh W / W - 1`` without cancellation for small ``W^2``."""
    if abs(w2) < 0.5:
        total, term = 0.0, 1.0
        for m in range(1, 10):
            term *= w2 / ((2 * m) * (2 * m + 1))
            total += term
        return total
    return even_kernels(w2)[0] - 1.0


def _zinv_minus_one(q, params: DeformationParams) -> float:
    """``Z^{-1}(q) - 1 = (aq) + (a^2 - s) q^2 / (1 + sqrt(1 + (a^2 - s) q^2))``."""
    rad = _radicand(q, params)
    if rad < 0:
        raise DomainError(f"radicand 1 + (a^2 - s) q^2 = {rad:.6g} is negative")
    return dot(params.a_float, q) + float(params.b_coeff) * dot(q, q) / (1.0 + np.sqrt(rad))


def _k_minus_identity(x, params: DeformationParams) -> np.ndarray:
    """``K(x) - x``, accurate relative to its own size."""
    a = params.a_float
    w2 = _w2(x, params)
    ch = even_kernels(w2)[1]
    return (x * dot(a, x) - a * dot(x, x)) * ch + x * _sinhc_minus_one(w2)


def _k_inverse_offset(k, params: DeformationParams, max_iter: int = 50) -> np.ndarray:
    """``K^{-1}(k) - k`` by Newton iteration on the offset itself.

    Iterates until the correction stops shrinking, so the offset is
    resolved to its own rounding level rather than to that of ``k``.
    """
    n = params.n
    h = 1e-6 * (1.0 + float(np.max(np.abs(k))))
    eye = np.eye(n)
    delta = np.zeros(n)
    last = np.inf
    for _ in range(max_iter):
        p = k + delta
        resid = _k_minus_identity(p, params) + delta
        J = np.empty((n, n))
        for j in range(n):
            J[:, j] = (big_k(p + h * eye[j], params) - big_k(p - h * eye[j], params)) / (2 * h)
        step = np.linalg.solve(J, resid)
        size = float(np.max(np.abs(step)))
        if not np.isfinite(size):
            raise NoConvergence(max_iter, float("inf"))
        delta = delta - step
        if size == 0.0 or size >= last:
            return delta
        last = size
    raise NoConvergence(max_iter, last)


def dsum_offset(k, q, params: DeformationParams) -> np.ndarray:
    """``Dsum(k, q) - k - q`` from the float path, free of the cancellation in ``dsum_float``.

    The deformed part is a small correction to ``k + q``; evaluating it
    directly keeps its relative accuracy near machine precision.
    """
    n = params.n
    k, q = _vec(k, n), _vec(q, n)
    a = params.a_float
    s = params.s_float
    delta = _k_inverse_offset(k, params)
    p = k + delta
    w2 = _w2(p, params)
    sh, ch = even_kernels(w2)
    zq_m1 = _zinv_minus_one(q, params)
    zq = 1.0 + zq_m1
    ap, pq = dot(a, p), dot(p, q)
    quad = (p * ap - a * dot(p, p)) * zq + a * ap * pq - s * p * pq
    return delta * zq * sh + k * (zq_m1 * sh + _sinhc_minus_one(w2)) - a * pq * sh + quad * ch


def star_plane_waves(k, q, params: DeformationParams, newton_tol: float = 1e-12) -> np.ndarray:
    """Phase of ``e^{ikX} * e^{iqX}``."""
    return dsum_float(k, q, params, newton_tol)


def _machine_tol(k) -> float:
    return 16 * np.finfo(float).eps * max(1.0e-300, float(np.max(np.abs(k))))


def deformation_size(params: DeformationParams) -> float:
    """``max(|a|_inf, sqrt|s|)``, or 1 when undeformed: the momentum scale at which ``a k`` and ``s k^2`` become order one."""
    size = max(float(np.max(np.abs(params.a_float))), float(np.sqrt(abs(params.s_float))))
    return size if size > 0 else 1.0


def coproduct_momentum_scale(params: DeformationParams, base: float = 1e-4) -> float:
    """Momentum box for ``coproduct_check``.

    Relative to the ``eps^2`` coefficient, the neglected ``eps^4`` term of
    the cubic fit contributes about ``0.3 (size k)^2`` and rounding of the
    offsets about ``6e-14 / (size k)``; ``size k`` near ``1e-4`` keeps both
    below ``1e-8``.
    """
    return base / deformation_size(params)


def coproduct_check(params: DeformationParams, k, q, eps=(0.5, 0.25, 0.125, 0.0625), tol0=1e-6, tol1=1e-6, tol2=1e-5) -> dict:
    """Fit a cubic in ``eps`` to ``Dsum(k, q; eps a, eps^2 s)`` and compare coefficients.

    ``Dsum`` is evaluated as ``k + q`` plus ``dsum_offset``; the cubic is
    fitted to the offsets and ``k + q`` is added to the constant term, so
    the higher coefficients do not inherit the rounding of ``k + q``.  Use
    small momenta, see ``coproduct_momentum_scale``.
    """
    n = params.n
    k, q = _vec(k, n), _vec(q, n)
    eps = [float(e) for e in eps]
    values = []
    for e in eps:
        pe = params.scaled(mpq(e), mpq(e) * mpq(e))
        values.append(dsum_offset(k, q, pe))
    V = np.vander(np.array(eps), 4, increasing=True)
    coeffs = np.linalg.solve(V, np.array(values))
    coeffs[0] += k + q
    a = params.a_float
    s = params.s_float
    b = float(params.b_coeff)
    ak, aq, kk, kq, qq = dot(a, k), dot(a, q), dot(k, k), dot(k, q), dot(q, q)
    expected = [
        k + q,
        k * aq - a * kq,
        0.5 * b * k * qq + a * ak * kq - 0.5 * a * kk * aq - 0.5 * s * k * kq,
    ]
    rows = []
    for order, (tol, exp) in enumerate(zip((tol0, tol1, tol2), expected)):
        scale = float(np.max(np.abs(exp)))
        err = float(np.max(np.abs(coeffs[order] - exp)))
        rel = err / scale if scale > 0 else err
        rows.append({"order": order, "rel_err": rel, "tol": tol, "status": "pass" if rel < tol else "fail"})
    return {
        "check": "coproduct eps-fit",
        "fitted": [c.tolist() for c in coeffs],
        "orders": rows,
        "status": "pass" if all(r["status"] == "pass" for r in rows) else "fail",
    }


# ---------------------------------------------------------------------------
# special cases
# ---------------------------------------------------------------------------


def snyder_closed_form(k, q, params: DeformationParams) -> np.ndarray:
    """``a = 0``: ``k_mu sqrt(1 - s q^2) + q_mu - s k_mu (kq) / (1 + sqrt(1 - s k^2))``."""
    s = params.s_float
    k, q = _vec(k, params.n), _vec(q, params.n)
    rq, rk = 1 - s * dot(q, q), 1 - s * dot(k, k)
    if rq < 0 or rk < 0:
        raise DomainError("radicand 1 - s p^2 is negative")
    return k * np.sqrt(rq) + q - s * k * dot(k, q) / (1 + np.sqrt(rk))


def kappa_closed_form(k, q, params: DeformationParams) -> np.ndarray:
    """``s = 0``: ``k_mu Zinv(q) + q_mu - a_mu (kq) Z(k) + a_mu box(k) Z(k) (aq) / 2``."""
    a = params.a_float
    k, q = _vec(k, params.n), _vec(q, params.n)
    zk = 1.0 / z_inverse_of(k, params)
    return k * z_inverse_of(q, params) + q - a * dot(k, q) * zk + 0.5 * a * box_of(k, params) * zk * dot(a, q)


def _one_over_two_plus(x: BiSeries) -> BiSeries:
    """``1 / (2 + x)`` for ``x`` without constant term."""
    K = x.order
    return x.apply_univariate([mpq((-1) ** m, 2 ** (m + 1)) for m in range(K + 1)])


def snyder_closed_series(params: DeformationParams, order: int) -> list:
    n = params.n
    s = params.s
    K = order // 2 + 1
    kv, qv = _kq_vars(n, order)
    kk, kq, qq = _bi_dot(n, order, kv, kv), _bi_dot(n, order, kv, qv), _bi_dot(n, order, qv, qv)
    sq_q = qq.scale(-s).apply_univariate(S.u_sqrt_one_plus(K))
    sq_k_minus_1 = kk.scale(-s).apply_univariate([mpq(0)] + S.u_sqrt_one_plus(K)[1:])
    inv = _one_over_two_plus(sq_k_minus_1)
    return [kv[m] * sq_q + qv[m] - (kv[m] * kq * inv).scale(s) for m in range(n)]


def kappa_closed_series(params: DeformationParams, order: int) -> list:
    n = params.n
    a2 = params.a_sq
    K = order // 2 + 1
    kv, qv = _kq_vars(n, order)
    ak, aq = _bi_a_dot(params, order, kv), _bi_a_dot(params, order, qv)
    kk, kq, qq = _bi_dot(n, order, kv, kv), _bi_dot(n, order, kv, qv), _bi_dot(n, order, qv, qv)
    sqrt_tail = [mpq(0)] + S.u_sqrt_one_plus(K)[1:]
    zinv_q = aq + qq.scale(a2).apply_univariate(S.u_sqrt_one_plus(K))
    zinv_k_minus_1 = ak + kk.scale(a2).apply_univariate(sqrt_tail)
    z_k = zinv_k_minus_1.apply_univariate([mpq((-1) ** m) for m in range(order + 1)])
    box_k = (kk * _one_over_two_plus(kk.scale(a2).apply_univariate(sqrt_tail))).scale(-2)
    out = []
    for m in range(n):
        a_m = params.a[m]
        out.append(kv[m] * zinv_q + qv[m] - (kq * z_k).scale(a_m) + (box_k * z_k * aq).scale(a_m / 2))
    return out


def special_coproducts(params: DeformationParams, k, q, order: int = 6, tol: float = 1e-10) -> dict:
    """Closed-form coproducts of the ``a = 0`` and ``s = 0`` cases against the general machinery."""
    is_snyder = all(x == 0 for x in params.a)
    is_kappa = params.s == 0
    if not (is_snyder or is_kappa):
        raise ValueError("closed-form coproducts need a = 0 or s = 0")
    k, q = _vec(k, params.n), _vec(q, params.n)
    general = dsum_series(params, order)
    report = {"checks": []}
    cases = []
    if is_snyder:
        cases.append(("snyder", snyder_closed_series, snyder_closed_form))
    if is_kappa:
        cases.append(("kappa", kappa_closed_series, kappa_closed_form))
    float_path = dsum_float(k, q, params, newton_tol=_machine_tol(k))
    for name, ser, closed in cases:
        exact = all(a == b for a, b in zip(ser(params, order), general))
        report["checks"].append({"check": f"{name} series", "order": order, "status": "exact-pass" if exact else "fail"})
        err = float(np.max(np.abs(closed(k, q, params) - float_path)))
        report["checks"].append({"check": f"{name} float", "max_abs_err": err, "tol": tol, "status": "pass" if err < tol else "fail"})
    if is_kappa:
        lhs = z_inverse_of(float_path, params)
        rhs = z_inverse_of(k, params) * z_inverse_of(q, params)
        err = abs(lhs - rhs)
        report["checks"].append({"check": "Delta Z = Z x Z", "max_abs_err": err, "tol": tol, "status": "pass" if err < tol else "fail"})
    report["status"] = "pass" if all(c["status"] in ("pass", "exact-pass") for c in report["checks"]) else "fail"
    return report


# ---------------------------------------------------------------------------
# star product on polynomials
# ---------------------------------------------------------------------------


def _d_monomial(coeffs: dict, exps: tuple, offset: int, nvars: int, n: int) -> dict:
    """Apply ``D^exps`` (with ``D_mu = eta_mu d/dx_mu``) to the block of variables at ``offset``."""
    out: dict = {}
    for key, c in coeffs.items():
        e = list(unpack(key, nvars))
        factor = 1
        ok = True
        for mu, d in enumerate(exps):
            if not d:
                continue
            have = e[offset + mu]
            if have < d:
                ok = False
                break
            factor *= factorial(have) // factorial(have - d)
            if mu == 0 and d % 2:
                factor = -factor
            e[offset + mu] = have - d
        if ok:
            nk = pack(e)
            v = c * factor
            prev = out.get(nk)
            out[nk] = v if prev is None else prev + v
    return {k: v for k, v in out.items() if v}


def star_polynomials(fp: Polynomial, gp: Polynomial, params: DeformationParams, order: int = None, dsum=None) -> Polynomial:
    """``f * g`` from the exponential of ``X_alpha [i Dsum^alpha(-i D_Y, -i D_Z) - D_Y^alpha - D_Z^alpha]``."""
    n = params.n
    if fp.n != n or gp.n != n:
        raise ValueError("polynomial dimension does not match parameters")
    need = fp.degree + gp.degree
    if order is None:
        order = max(need, 2)
    if need > order:
        raise DegreeOverflow(f"deg f + deg g = {need} exceeds series order {order}")
    if dsum is None:
        dsum = dsum_series(params, order)
    # E_alpha as a list of (y-exps, z-exps, coefficient) with degree >= 2
    E = []
    for al in range(n):
        terms = []
        for ke, qe, c in dsum[al].split_items():
            d = sum(ke) + sum(qe)
            if d < 2:
                continue
            terms.append((ke, qe, I * ((-I) ** d) * ExactScalar.coerce(c)))
        E.append(terms)
    N3 = 3 * n
    state: dict = {}
    for fe, fc in fp.items():
        for ge, gc in gp.items():
            key = pack((0,) * n + tuple(fe) + tuple(ge))
            state[key] = state.get(key, ExactScalar(0)) + fc * gc
    state = {k: v for k, v in state.items() if v}
    total = dict(state)
    m = 0
    while state:
        m += 1
        nxt: dict = {}
        for al in range(n):
            sign = -1 if al == 0 else 1
            xshift = 1 << (8 * al)
            for ye, ze, c in E[al]:
                part = _d_monomial(state, ye, n, N3, n)
                part = _d_monomial(part, ze, 2 * n, N3, n)
                for key, v in part.items():
                    nk = key + xshift
                    val = v * c * sign / m
                    prev = nxt.get(nk)
                    nxt[nk] = val if prev is None else prev + val
        state = {k: v for k, v in nxt.items() if v}
        for k, v in state.items():
            prev = total.get(k)
            total[k] = v if prev is None else prev + v
    out: dict = {}
    for key, v in total.items():
        e = unpack(key, N3)
        x = tuple(e[i] + e[n + i] + e[2 * n + i] for i in range(n))
        out[x] = out.get(x, ExactScalar(0)) + v
    return Polynomial.from_dict(n, out)


# ---------------------------------------------------------------------------
# coassociativity diagnostic
# ---------------------------------------------------------------------------


def associativity_defect(k, q, r, params: DeformationParams, newton_tol: float = None) -> float:
    """``|Dsum(Dsum(k, q), r) - Dsum(k, Dsum(q, r))|_inf`` on the float path."""
    k, q, r = (_vec(v, params.n) for v in (k, q, r))
    tol = newton_tol if newton_tol is not None else _machine_tol(np.concatenate([k, q, r]))
    left = dsum_float(dsum_float(k, q, params, tol), r, params, tol)
    right = dsum_float(k, dsum_float(q, r, params, tol), params, tol)
    return float(np.max(np.abs(left - right)))


def defect_scaling(k, q, r, params: DeformationParams, eps=(0.5, 0.25, 0.125, 0.0625)) -> dict:
    """Defect under ``a -> eps a``, ``s -> eps s`` and successive ratios (2 means linear)."""
    vals = [associativity_defect(k, q, r, params.scaled(mpq(e), mpq(e))) for e in eps]
    ratios = [vals[i] / vals[i + 1] if vals[i + 1] > 0 else float("inf") for i in range(len(vals) - 1)]
    return {"eps": list(eps), "defect": vals, "ratios": ratios}
