import random

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from ncdeform.coalgebra_star import (
    StarConfig,
    associativity_defect,
    coproduct_check,
    coproduct_exact_orders,
    defect_scaling,
    coproduct_momentum_scale,
    dsum_float,
    dsum_offset,
    dsum_series,
    k_series,
    k_series_inverse,
    kappa_closed_form,
    snyder_closed_form,
    special_coproducts,
    star_plane_waves,
    star_polynomials,
)
from ncdeform.momentum_flow import big_k, big_k_inverse, dot, z_inverse_of
from ncdeform.params import DeformationParams
from ncdeform.scalar import I, ExactScalar
from ncdeform.series import BiSeries
from ncdeform.weyl import DegreeOverflow, Polynomial


def params(n, a, s):
    return DeformationParams.from_strings(n, a, s)


GEN2 = params(2, ["1/10", "-1/20"], "1/8")
GEN3 = params(3, ["1/7", "1/10", "-1/9"], "1/6")
KAPPA3 = params(3, ["1/5", "-1/10", "1/8"], "0")
SNYDER3 = params(3, ["0", "0", "0"], "1/6")


def kvar(n, order, mu):
    return BiSeries.k(n, order, mu)


def qvar(n, order, mu):
    return BiSeries.q(n, order, mu)


def series_values(series, k, q):
    return np.array([s.evaluate(list(k) + list(q)).real for s in series])


# --- K as an exact series ------------------------------------------------------------


def test_config_guard():
    with pytest.raises(ValueError):
        StarConfig(GEN2, order=1)


def test_k_series_undeformed():
    ks = k_series(DeformationParams(3), 6)
    assert all(ks[m] == kvar(3, 6, m) for m in range(3))


def test_k_series_snyder_expansion():
    ks = k_series(SNYDER3, 5)
    kv = [kvar(3, 5, m) for m in range(3)]
    kk = kv[1] * kv[1] + kv[2] * kv[2] - kv[0] * kv[0]
    for m in range(3):
        assert ks[m].truncated(3) == (kv[m] - (kv[m] * kk).scale(SNYDER3.s / 6)).truncated(3)


def test_k_series_third_derivatives_match_float():
    """Third-order coefficients against finite differences of the float K at 0."""
    p = GEN2
    ks = k_series(p, 4)
    h = 1e-2
    for mu in range(2):
        # d^3 K_mu / dk_0^3 and d^3 K_mu / dk_0 dk_1^2 at the origin
        def f(x, y):
            return big_k(np.array([x, y]), p)[mu]

        d000 = (f(2 * h, 0) - 2 * f(h, 0) + 2 * f(-h, 0) - f(-2 * h, 0)) / (2 * h**3)
        d011 = (f(h, h) + f(h, -h) - 2 * f(h, 0) - f(-h, h) - f(-h, -h) + 2 * f(-h, 0)) / (2 * h**3)
        c000 = float(ks[mu].coeff((3, 0, 0, 0))) * 6
        c011 = float(ks[mu].coeff((1, 2, 0, 0))) * 2
        assert abs(d000 - c000) < 1e-4 * (1 + abs(c000))
        assert abs(d011 - c011) < 1e-4 * (1 + abs(c011))


def test_k_inverse_round_trip():
    for p in (GEN2, GEN3):
        n = p.n
        ks = k_series(p, 6)
        inv = k_series_inverse(p, 6)
        subs = inv + [None] * n
        for m in range(n):
            assert ks[m].compose(subs) == kvar(n, 6, m)


def test_k_inverse_undeformed():
    inv = k_series_inverse(DeformationParams(2), 5)
    assert all(inv[m] == kvar(2, 5, m) for m in range(2))


def test_k_inverse_matches_newton():
    p = params(2, ["1/10", "1/20"], "3/100")
    k = np.array([0.1, 0.05])
    inv = k_series_inverse(p, 9)
    got = series_values(inv, k, [0, 0])
    assert np.max(np.abs(got - big_k_inverse(k, p))) < 1e-8


# --- Dsum -------------------------------------------------------------------------


def test_dsum_unit_laws():
    for p in (GEN2, GEN3):
        n = p.n
        ds = dsum_series(p, 6)
        for m in range(n):
            ks = {ke: c for ke, qe, c in ds[m].split_items() if not any(qe)}
            qs = {qe: c for ke, qe, c in ds[m].split_items() if not any(ke)}
            unit = tuple(1 if i == m else 0 for i in range(n))
            assert ks == {unit: 1} and qs == {unit: 1}


def test_dsum_undeformed_is_sum():
    ds = dsum_series(DeformationParams(2), 6)
    assert all(ds[m] == kvar(2, 6, m) + qvar(2, 6, m) for m in range(2))


def test_coproduct_orders_exact():
    for p in (GEN2, GEN3, KAPPA3, SNYDER3):
        assert coproduct_exact_orders(p, 4)["status"] == "exact-pass"


def test_dsum_float_vs_series():
    rng = random.Random(3)
    worst = 0.0
    for _ in range(10):
        n = rng.choice([2, 3])
        a = [f"{rng.randint(-200, 200)}/1000" for _ in range(n)]
        p = params(n, a, f"{rng.randint(-200, 200)}/1000")
        k = np.array([rng.uniform(-0.3, 0.3) for _ in range(n)])
        q = np.array([rng.uniform(-0.3, 0.3) for _ in range(n)])
        ds = dsum_series(p, 10)
        worst = max(worst, float(np.max(np.abs(series_values(ds, k, q) - dsum_float(k, q, p)))))
    assert worst < 1e-8


def test_plane_waves():
    k, q = np.array([0.2, -0.1, 0.3]), np.array([0.1, 0.25, -0.2])
    assert np.allclose(star_plane_waves(k, q, DeformationParams(3)), k + q, rtol=0, atol=1e-15)
    assert np.allclose(star_plane_waves(k, np.zeros(3), GEN3), k, rtol=0, atol=1e-12)
    assert np.allclose(star_plane_waves(k, q, KAPPA3), kappa_closed_form(k, q, KAPPA3), rtol=0, atol=1e-12)


# --- coproduct expansion ---------------------------------------------------------


@pytest.mark.parametrize("p", [GEN2, GEN3, KAPPA3, SNYDER3], ids=["gen2", "gen3", "kappa3", "snyder3"])
def test_coproduct_eps_fit(p):
    rng = random.Random(p.n)
    for _ in range(3):
        k = np.array([rng.uniform(-0.01, 0.01) for _ in range(p.n)])
        q = np.array([rng.uniform(-0.01, 0.01) for _ in range(p.n)])
        rep = coproduct_check(p, k, q)
        assert rep["status"] == "pass", rep["orders"]


def test_offset_agrees_with_float_path():
    rng = np.random.default_rng(5)
    for p in (GEN2, GEN3, KAPPA3, SNYDER3):
        k, q = rng.uniform(-0.05, 0.05, p.n), rng.uniform(-0.05, 0.05, p.n)
        assert np.allclose(dsum_offset(k, q, p), dsum_float(k, q, p, newton_tol=1e-17) - k - q, rtol=0, atol=1e-15)


@pytest.mark.parametrize("p", [GEN2, GEN3, KAPPA3, SNYDER3], ids=["gen2", "gen3", "kappa3", "snyder3"])
def test_offset_relative_accuracy_at_tiny_momenta(p):
    # the series beyond degree 5 is below 1e-20 of the offset here
    ser = dsum_series(p, 5)
    rng = np.random.default_rng(p.n)
    k, q = rng.uniform(-1e-5, 1e-5, p.n), rng.uniform(-1e-5, 1e-5, p.n)
    want = sum(np.array([ser[m].homogeneous(d).evaluate_kq(k, q).real for m in range(p.n)]) for d in (2, 3, 4, 5))
    got = dsum_offset(k, q, p)
    assert np.max(np.abs(got - want)) < 1e-12 * np.max(np.abs(want))


def test_coproduct_fit_small_deformation():
    # |a| well below one: the momentum box must grow so that a k stays near 1e-4
    p = DeformationParams(2, (mpq(1, 5), mpq(-1, 10)), mpq(0))
    box = coproduct_momentum_scale(p)
    assert box == pytest.approx(5e-4)
    rng = np.random.default_rng(0)
    for _ in range(20):
        rep = coproduct_check(p, rng.uniform(-box, box, 2), rng.uniform(-box, box, 2))
        assert rep["status"] == "pass", rep["orders"]


def test_coproduct_zeroth_order_is_sum():
    k, q = np.array([0.004, -0.007]), np.array([0.002, 0.009])
    rep = coproduct_check(GEN2, k, q)
    assert np.allclose(rep["fitted"][0], k + q, rtol=1e-9, atol=0)


# --- closed-form special cases ------------------------------------------------------


def test_snyder_closed_form_example():
    k, q = np.array([0.2, 0.3, -0.1]), np.array([0.15, -0.2, 0.25])
    rep = special_coproducts(SNYDER3, k, q)
    assert rep["status"] == "pass", rep
    s = SNYDER3.s_float
    want = k * np.sqrt(1 - s * dot(q, q)) + q - s * k * dot(k, q) / (1 + np.sqrt(1 - s * dot(k, k)))
    assert np.allclose(snyder_closed_form(k, q, SNYDER3), want, rtol=0, atol=1e-16)


def test_kappa_closed_form_and_multiplicative_z():
    k, q = np.array([0.2, 0.3, -0.1]), np.array([0.15, -0.2, 0.25])
    rep = special_coproducts(KAPPA3, k, q)
    assert rep["status"] == "pass", rep
    names = [c["check"] for c in rep["checks"]]
    assert "Delta Z = Z x Z" in names
    d = dsum_float(k, q, KAPPA3)
    assert abs(z_inverse_of(d, KAPPA3) - z_inverse_of(k, KAPPA3) * z_inverse_of(q, KAPPA3)) < 1e-10
    assert np.allclose(kappa_closed_form(k, np.zeros(3), KAPPA3), k, rtol=0, atol=1e-16)


def test_special_cases_need_a_zero_or_s_zero():
    with pytest.raises(ValueError):
        special_coproducts(GEN2, [0.1, 0.1], [0.1, 0.1])


# --- star product on polynomials --------------------------------------------------


def poly(n, data):
    return Polynomial.from_dict(n, data)


def x(n, mu):
    return Polynomial.variable(n, mu)


coef = st.builds(lambda r, i: ExactScalar(r, i), st.integers(-3, 3), st.integers(-2, 2))
polys2 = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 1)), coef, max_size=3).map(lambda d: poly(2, d))


def test_star_of_coordinates():
    for p in (GEN2, GEN3):
        n = p.n
        for mu in range(n):
            for nu in range(n):
                lhs = star_polynomials(x(n, mu), x(n, nu), p) - star_polynomials(x(n, nu), x(n, mu), p)
                want = (x(n, nu).scale(p.a[mu]) - x(n, mu).scale(p.a[nu])).scale(I)
                assert lhs == want


@settings(max_examples=20)
@given(polys2, polys2)
def test_star_unital_and_undeformed(f, g):
    ds = dsum_series(GEN2, 6)
    one = Polynomial.one(2)
    assert star_polynomials(one, g, GEN2, 6, ds) == g
    assert star_polynomials(f, one, GEN2, 6, ds) == f
    assert star_polynomials(f, g, DeformationParams(2), 6) == f * g


@settings(max_examples=15)
@given(polys2, polys2, polys2, st.integers(-3, 3))
def test_star_bilinear(f, g, h, c):
    ds = dsum_series(GEN2, 6)
    lhs = star_polynomials(f.scale(c) + h, g, GEN2, 6, ds)
    rhs = star_polynomials(f, g, GEN2, 6, ds).scale(c) + star_polynomials(h, g, GEN2, 6, ds)
    assert lhs == rhs


def test_star_matches_plane_wave_expansion():
    """The k_0 q_1 coefficient of e^{ikx} * e^{iqx}: x_0 * x_1 = x_0 x_1 - i a_1 x_0."""
    for p in (GEN2, GEN3):
        n = p.n
        lhs = star_polynomials(x(n, 0), x(n, 1), p)
        assert lhs == x(n, 0) * x(n, 1) - x(n, 0).scale(I * p.a[1])


def test_star_degree_overflow():
    with pytest.raises(DegreeOverflow):
        star_polynomials(x(2, 0) * x(2, 0), x(2, 1), GEN2, order=2)


# --- coassociativity ----------------------------------------------------------------


def test_defect_undeformed_zero():
    k, q, r = np.array([0.2, 0.1]), np.array([-0.1, 0.3]), np.array([0.25, -0.15])
    assert associativity_defect(k, q, r, DeformationParams(2)) < 1e-15


def test_defect_kappa_small():
    rng = random.Random(17)
    worst = 0.0
    for _ in range(20):
        k, q, r = (np.array([rng.uniform(-0.3, 0.3) for _ in range(3)]) for _ in range(3))
        worst = max(worst, associativity_defect(k, q, r, KAPPA3))
    assert worst < 1e-9


def test_defect_scales_linearly():
    k, q, r = np.array([0.3, 0.2, -0.1]), np.array([-0.2, 0.3, 0.25]), np.array([0.1, -0.3, 0.2])
    rep = defect_scaling(k, q, r, GEN3)
    assert rep["defect"][0] > 1e-6
    assert all(1.8 < x < 2.2 for x in rep["ratios"])
