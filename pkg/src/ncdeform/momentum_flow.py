"""Momentum-space flow generated by conjugation with plane waves.

Float path: the closed-form flow ``P^{(t)}(k, q)``, its ODE, the map ``K``
and a Newton inverse.  Exact path: the flow at ``t = 1`` as a ``BiSeries``
and the nested-commutator expansion computed with the Weyl engine.

Momenta are lower-index numpy arrays; scalar products use the metric.
``W`` only enters through even functions, so everything is written in
terms of ``w2 = W^2`` and stays real when ``w2 < 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from . import series as S
from .params import DeformationParams
from .scalar import I, ExactScalar
from .series import BiSeries

__all__ = [
    "DomainError",
    "NoConvergence",
    "FlowResult",
    "dot",
    "even_kernels",
    "z_inverse_of",
    "box_of",
    "flow_closed_form",
    "flow_velocity",
    "flow_rhs",
    "flow_ode",
    "big_k",
    "big_k_inverse",
    "check_k_identities",
    "mass_shell",
    "flow_series",
    "bch_series",
    "bch_cross_check",
    "taylor_coefficients",
]

TAYLOR_CUT = 1e-8


class DomainError(ValueError):
    """A square-root radicand went negative: momentum outside the real domain."""


class NoConvergence(RuntimeError):
    """Newton iteration did not reach tolerance within ``max_iter`` steps."""

    def __init__(self, max_iter, residual):
        super().__init__(f"no convergence in {max_iter} iterations (residual {residual:.3e})")
        self.max_iter = max_iter
        self.residual = residual


@dataclass
class FlowResult:
    p: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _vec(k, n=None) -> np.ndarray:
    v = np.asarray(k, dtype=float)
    if v.ndim != 1 or (n is not None and v.shape[0] != n):
        raise ValueError(f"expected a momentum of length {n}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("momentum components must be finite")
    return v


def _eta(n: int) -> np.ndarray:
    e = np.ones(n)
    e[0] = -1.0
    return e


def dot(u, v) -> float:
    """``(uv) = eta^{mu nu} u_mu v_nu``."""
    u = np.asarray(u)
    v = np.asarray(v)
    return float(-u[0] * v[0] + np.dot(u[1:], v[1:]))


def even_kernels(w2: float):
    """``(sinh W / W, (cosh W - 1) / W^2)`` as functions of ``w2 = W^2``."""
    w2 = float(w2)
    if abs(w2) < TAYLOR_CUT:
        return 1.0 + w2 / 6.0 + w2 * w2 / 120.0, 0.5 + w2 / 24.0 + w2 * w2 / 720.0
    if w2 > 0:
        w = math.sqrt(w2)
        return math.sinh(w) / w, 2.0 * math.sinh(w / 2) ** 2 / w2
    w = math.sqrt(-w2)
    return math.sin(w) / w, -2.0 * math.sin(w / 2) ** 2 / w2


def _cosh_even(w2: float) -> float:
    """``cosh W`` for real or imaginary ``W``."""
    if w2 >= 0:
        return math.cosh(math.sqrt(w2))
    return math.cos(math.sqrt(-w2))


def _radicand(q, params: DeformationParams) -> float:
    return 1.0 + float(params.b_coeff) * dot(q, q)


def z_inverse_of(q, params: DeformationParams) -> float:
    """``Z^{-1}(q) = (aq) + sqrt(1 + (a^2 - s) q^2)``."""
    q = _vec(q, params.n)
    rad = _radicand(q, params)
    if rad < 0:
        raise DomainError(f"radicand 1 + (a^2 - s) q^2 = {rad:.6g} is negative")
    return dot(params.a_float, q) + math.sqrt(rad)


def box_of(k, params: DeformationParams) -> float:
    """``2/(a^2 - s) [1 - sqrt(1 + (a^2 - s) k^2)]`` in a form regular at ``a^2 = s``."""
    k = _vec(k, params.n)
    rad = _radicand(k, params)
    if rad < 0:
        raise DomainError(f"radicand 1 + (a^2 - s) k^2 = {rad:.6g} is negative")
    return -2.0 * dot(k, k) / (1.0 + math.sqrt(rad))


def _w2(k, params: DeformationParams) -> float:
    ak = dot(params.a_float, k)
    return ak * ak - params.s_float * dot(k, k)


def _flow_pieces(k, q, params):
    """Vectors multiplying ``sinh(tW)/W`` and ``(cosh tW - 1)/W^2``."""
    a = params.a_float
    s = params.s_float
    zq = z_inverse_of(q, params)
    ak, kk, kq = dot(a, k), dot(k, k), dot(k, q)
    lin = k * zq - a * kq
    quad = (k * ak - a * kk) * zq + a * ak * kq - s * k * kq
    return lin, quad, zq


def flow_closed_form(k, q, t, params: DeformationParams) -> FlowResult:
    n = params.n
    k, q = _vec(k, n), _vec(q, n)
    lin, quad, _ = _flow_pieces(k, q, params)
    w2 = _w2(k, params)
    sh, ch = even_kernels(t * t * w2)
    p = q + lin * (t * sh) + quad * (t * t * ch)
    return FlowResult(p, {"w2": w2, "radicand": _radicand(q, params), "iterations": 0})


def flow_velocity(k, q, t, params: DeformationParams) -> np.ndarray:
    """``d/dt`` of the closed form, from ``d/dt sinh(tW)/W = cosh tW``."""
    n = params.n
    k, q = _vec(k, n), _vec(q, n)
    lin, quad, _ = _flow_pieces(k, q, params)
    tw2 = t * t * _w2(k, params)
    sh, _ = even_kernels(tw2)
    return lin * _cosh_even(tw2) + quad * (t * sh)


def flow_rhs(k, p, params: DeformationParams) -> np.ndarray:
    """Right side of the flow ODE for ``f = sqrt(1 - B)``."""
    a = params.a_float
    return k * z_inverse_of(p, params) - a * dot(k, p)


def flow_ode(k, q, t, params: DeformationParams, steps: int = 1000) -> FlowResult:
    """Classic fixed-step RK4 from ``P(0) = q``."""
    n = params.n
    k, p = _vec(k, n), _vec(q, n).copy()
    if steps < 1:
        raise ValueError("steps must be positive")
    h = t / steps
    min_rad = _radicand(p, params)
    for _ in range(steps):
        k1 = flow_rhs(k, p, params)
        k2 = flow_rhs(k, p + 0.5 * h * k1, params)
        k3 = flow_rhs(k, p + 0.5 * h * k2, params)
        k4 = flow_rhs(k, p + h * k3, params)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        min_rad = min(min_rad, _radicand(p, params))
    return FlowResult(p, {"w2": _w2(k, params), "radicand": min_rad, "iterations": steps})


def big_k(k, params: DeformationParams) -> np.ndarray:
    """``K_mu(k) = [k_mu (ak) - a_mu k^2] (cosh W - 1)/W^2 + k_mu sinh W / W``."""
    k = _vec(k, params.n)
    a = params.a_float
    sh, ch = even_kernels(_w2(k, params))
    return (k * dot(a, k) - a * dot(k, k)) * ch + k * sh


def big_k_inverse(k, params: DeformationParams, tol: float = 1e-12, max_iter: int = 50, full_output: bool = False):
    """Newton solve of ``K(p) = k`` with a central-difference Jacobian, starting at ``p = k``."""
    n = params.n
    k = _vec(k, n)
    p = k.copy()
    h = 1e-6 * (1.0 + float(np.max(np.abs(k))))
    eye = np.eye(n)
    resid = big_k(p, params) - k
    it = 0
    while np.max(np.abs(resid)) > tol:
        if it >= max_iter:
            raise NoConvergence(max_iter, float(np.max(np.abs(resid))))
        J = np.empty((n, n))
        for j in range(n):
            J[:, j] = (big_k(p + h * eye[j], params) - big_k(p - h * eye[j], params)) / (2 * h)
        p = p - np.linalg.solve(J, resid)
        resid = big_k(p, params) - k
        it += 1
        if not np.all(np.isfinite(p)):
            raise NoConvergence(it, float("inf"))
    if full_output:
        return p, it
    return p


def check_k_identities(k, params: DeformationParams, tol: float = 1e-9, newton_tol: float = 1e-12) -> dict:
    """Both sides of the ``Z^{-1}(k)`` and ``box(k)`` identities through ``K^{-1}(k)``."""
    k = _vec(k, params.n)
    p, iters = big_k_inverse(k, params, tol=newton_tol, full_output=True)
    w2 = _w2(p, params)
    sh, ch = even_kernels(w2)
    z_lhs = z_inverse_of(k, params)
    z_rhs = _cosh_even(w2) + dot(params.a_float, p) * sh
    box_lhs = box_of(k, params)
    box_rhs = -2.0 * dot(p, p) * ch
    checks = [
        {"check": "Zinv(k) via K^-1", "lhs": z_lhs, "rhs": z_rhs, "abs_err": abs(z_lhs - z_rhs)},
        {"check": "box(k) via K^-1", "lhs": box_lhs, "rhs": box_rhs, "abs_err": abs(box_lhs - box_rhs)},
    ]
    for c in checks:
        c["tol"] = tol
        c["status"] = "pass" if c["abs_err"] < tol else "fail"
    return {"k_inverse": p.tolist(), "w2": w2, "iterations": iters, "checks": checks}


def mass_shell(k, m: float) -> float:
    """``k^2 + m^2``; vanishes on shell whatever the deformation."""
    k = np.asarray(k, dtype=float)
    return dot(k, k) + float(m) ** 2


# ---------------------------------------------------------------------------
# exact series path
# ---------------------------------------------------------------------------


def _bi_dot(n: int, order: int, u, v) -> BiSeries:
    out = BiSeries.zero(n, order)
    for mu in range(n):
        out = out + (u[mu] * v[mu]).scale(-1 if mu == 0 else 1)
    return out


def _bi_a_dot(params: DeformationParams, order: int, u) -> BiSeries:
    out = BiSeries.zero(params.n, order)
    for mu in range(params.n):
        c = params.a_upper(mu)
        if c:
            out = out + u[mu].scale(c)
    return out


def flow_series(params: DeformationParams, order: int) -> list:
    """Exact ``BiSeries`` of ``P_mu(k, q)`` at ``t = 1`` through total ``order``."""
    n = params.n
    kv = [BiSeries.k(n, order, m) for m in range(n)]
    qv = [BiSeries.q(n, order, m) for m in range(n)]
    return flow_series_of(params, order, kv, qv)


def flow_series_of(params: DeformationParams, order: int, kv, qv) -> list:
    """``P_mu(k, q)`` with ``k``, ``q`` replaced by series without constant term."""
    n = params.n
    s = params.s
    K = order // 2 + 1
    ak = _bi_a_dot(params, order, kv)
    aq = _bi_a_dot(params, order, qv)
    kk = _bi_dot(n, order, kv, kv)
    kq = _bi_dot(n, order, kv, qv)
    qq = _bi_dot(n, order, qv, qv)
    w2 = ak * ak - kk.scale(s)
    sh = w2.apply_univariate(S.u_sinhc(K))
    ch = w2.apply_univariate(S.u_coshc(K))
    zq = aq + qq.scale(params.b_coeff).apply_univariate(S.u_sqrt_one_plus(K))
    out = []
    for mu in range(n):
        a_mu = params.a[mu]
        lin = kv[mu] * zq - kq.scale(a_mu)
        quad = (kv[mu] * ak - kk.scale(a_mu)) * zq + (ak * kq).scale(a_mu) - (kv[mu] * kq).scale(s)
        out.append(qv[mu] + lin * sh + quad * ch)
    return out


def bch_series(params: DeformationParams, k_order: int = 3, trunc: int = 10) -> list:
    """``e^{-ik xhat}(-i D_mu) e^{ik xhat}`` by nested commutators, with ``D -> iq``.

    Returns per component a ``BiSeries`` in ``(k, q)`` holding the terms of
    k-degree ``<= k_order``; q-degree is exact through ``trunc - k_order``.
    """
    from .realization import RealizationSpec
    from .weyl import commutator, D as Dop

    n = params.n
    spec = RealizationSpec(params, "sqrt_one_minus_B", trunc=trunc)
    xh = spec.xhat
    q_order = trunc - k_order
    order = k_order + q_order
    out = []
    for mu in range(n):
        coeffs: dict = {}
        level = {(): Dop(n, mu)}
        for m in range(k_order + 1):
            if m:
                level = {w + (al,): commutator(c, xh[al]) for w, c in level.items() for al in range(n)}
            pref = -I * (I ** m) * ExactScalar(mpq(1, math.factorial(m)))
            for word, c in level.items():
                sign = 1
                kexp = [0] * n
                for al in word:
                    sign *= -1 if al == 0 else 1
                    kexp[al] += 1
                for xe, de, coef in c.items():
                    if sum(de) > q_order:
                        continue
                    if any(xe):
                        raise AssertionError("nested commutator left the D-series")
                    val = coef * pref * (I ** sum(de)) * sign
                    key = tuple(kexp) + tuple(de)
                    coeffs[key] = coeffs.get(key, ExactScalar(0)) + val
        real = {}
        for key, v in coeffs.items():
            if v.im != 0:
                raise AssertionError("imaginary coefficient in momentum-space flow")
            real[key] = v.re
        out.append(BiSeries.from_dict(2 * n, order, real))
    return out


def taylor_coefficients(g, m_max: int, radius: float = 0.5, points: int = 64) -> list:
    """Taylor coefficients of an analytic ``g(z)`` at 0 by the trapezoid rule on a circle."""
    vals = [g(radius * cmath.exp(2j * math.pi * j / points)) for j in range(points)]
    out = []
    for m in range(m_max + 1):
        acc = sum(v * cmath.exp(-2j * math.pi * j * m / points) for j, v in enumerate(vals))
        out.append(acc / points / radius**m)
    return out


def _complex_flow(k, q, params: DeformationParams):
    """The closed-form flow at ``t = 1`` for complex ``k`` (analytic continuation)."""
    a = params.a_float
    s = params.s_float

    def cdot(u, v):
        return -u[0] * v[0] + sum(u[i] * v[i] for i in range(1, len(u)))

    zq = cdot(a, q) + cmath.sqrt(1 + float(params.b_coeff) * cdot(q, q))
    ak, kk, kq = cdot(a, k), cdot(k, k), cdot(k, q)
    w2 = ak * ak - s * kk
    if abs(w2) < 1e-6:
        sh = 1 + w2 / 6 + w2 * w2 / 120 + w2**3 / 5040
        ch = 0.5 + w2 / 24 + w2 * w2 / 720 + w2**3 / 40320
    else:
        w = cmath.sqrt(w2)
        sh = cmath.sinh(w) / w
        ch = (cmath.cosh(w) - 1) / w2
    return [
        q[m] + (k[m] * zq - a[m] * kq) * sh + ((k[m] * ak - a[m] * kk) * zq + a[m] * ak * kq - s * k[m] * kq) * ch
        for m in range(len(k))
    ]


def bch_cross_check(k, q, params: DeformationParams, order: int = 3, trunc: int = 12, tol: float = 1e-9) -> dict:
    """Nested-commutator expansion against the closed-form flow, order by order in ``k``.

    Exact route: the commutator expansion and the series of the closed form
    are compared coefficient by coefficient.  Numeric route: the homogeneous
    k-degree-m part of the commutator expansion, summed at the float point
    ``(k, q)``, is compared with the m-th Taylor coefficient of
    ``z -> P(z k, q)`` computed from the closed form alone.
    """
    if order > 3:
        raise ValueError("order must be at most 3")
    n = params.n
    k, q = _vec(k, n), _vec(q, n)
    bch = bch_series(params, order, trunc)
    q_order = trunc - order
    closed = flow_series(params, trunc)
    exact_ok = True
    mismatches = []
    for mu in range(n):
        for ke, qe, c in closed[mu].split_items():
            if sum(ke) <= order and sum(qe) <= q_order:
                if bch[mu].coeff(ke + qe) != c:
                    exact_ok = False
                    mismatches.append({"mu": mu, "k_exp": list(ke), "q_exp": list(qe)})
        for ke, qe, c in bch[mu].split_items():
            if closed[mu].coeff(ke + qe) != c:
                exact_ok = False
                mismatches.append({"mu": mu, "k_exp": list(ke), "q_exp": list(qe)})
    max_err = 0.0
    per_order = []
    taylor = [taylor_coefficients(lambda z, m=mu: _complex_flow(z * k, q, params)[m], order) for mu in range(n)]
    for m in range(order + 1):
        err = 0.0
        for mu in range(n):
            hom = 0.0
            for ke, qe, c in bch[mu].split_items():
                if sum(ke) == m:
                    term = float(c)
                    for x, e in zip(list(k) + list(q), ke + qe):
                        term *= x**e
                    hom += term
            err = max(err, float(abs(hom - taylor[mu][m])))
        per_order.append(err)
        max_err = max(max_err, err)
    return {
        "check": "bch",
        "order": order,
        "q_order": q_order,
        "exact_match": exact_ok,
        "mismatches": mismatches[:10],
        "max_abs_err": max_err,
        "per_order_err": per_order,
        "tol": tol,
        "status": "pass" if exact_ok and max_err < tol else "fail",
    }
