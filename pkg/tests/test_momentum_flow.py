import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncdeform.momentum_flow import (
    DomainError,
    NoConvergence,
    bch_cross_check,
    bch_series,
    big_k,
    big_k_inverse,
    box_of,
    check_k_identities,
    dot,
    even_kernels,
    flow_closed_form,
    flow_ode,
    flow_rhs,
    flow_series,
    flow_velocity,
    mass_shell,
    taylor_coefficients,
    z_inverse_of,
)
from ncdeform.params import DeformationParams

UND2 = DeformationParams(2)


def params(n, a, s):
    return DeformationParams.from_strings(n, a, s)


def small_sample(rng, n, bound=1.0):
    return np.array([rng.uniform(-bound, bound) for _ in range(n)])


def random_float_params(rng, n, bound=0.2):
    """Rationals with denominator 1000 so |a_mu|, |s| <= bound."""
    lim = int(bound * 1000)
    a = [f"{rng.randint(-lim, lim)}/1000" for _ in range(n)]
    return params(n, a, f"{rng.randint(-lim, lim)}/1000")


# --- kernels -------------------------------------------------------------------


def test_kernels_at_zero():
    assert even_kernels(0.0) == (1.0, 0.5)


def test_kernels_imaginary_w():
    sh, ch = even_kernels(-math.pi**2)
    assert sh == pytest.approx(0.0, abs=1e-15)
    assert ch == pytest.approx(2 / math.pi**2, rel=1e-14)


@pytest.mark.parametrize("w2", [1.3, -0.4, 4.0])
def test_kernels_against_complex(w2):
    import cmath

    w = cmath.sqrt(w2)
    sh, ch = even_kernels(w2)
    assert sh == pytest.approx((cmath.sinh(w) / w).real, rel=1e-13)
    assert ch == pytest.approx(((cmath.cosh(w) - 1) / w2).real, rel=1e-13)


@pytest.mark.parametrize("w2", [1e-8, -1e-8])
def test_kernels_continuous_at_cut(w2):
    below = even_kernels(w2 * 0.999999)
    w = math.sqrt(abs(w2))
    if w2 > 0:
        direct = (math.sinh(w) / w, (math.cosh(w) - 1) / w2)
    else:
        direct = (math.sin(w) / w, (math.cos(w) - 1) / w2)
    assert abs(below[0] - direct[0]) < 1e-12
    assert abs(below[1] - direct[1]) < 1e-7  # the direct form loses digits to cancellation here
    above = even_kernels(w2 * 1.000001)
    assert abs(above[0] - below[0]) < 1e-12 and abs(above[1] - below[1]) < 1e-12


# --- Z^{-1} and box -----------------------------------------------------------------


def test_z_inverse_examples():
    assert z_inverse_of([0.3, 0.2], UND2) == 1.0
    p = params(2, ["1/10", "0"], "1/20")
    q = np.array([0.7, 0.4])
    # a^2 = -1/100, q^2 = -0.33
    assert z_inverse_of(q, p) == pytest.approx(-0.07 + math.sqrt(1 + (-0.01 - 0.05) * -0.33))


def test_domain_error():
    p = params(2, ["0", "0"], "4")
    with pytest.raises(DomainError):
        z_inverse_of([0.0, 1.0], p)
    with pytest.raises(DomainError):
        box_of([0.0, 1.0], p)


def test_box_regular_at_a2_equal_s():
    p = params(2, ["1/2", "0"], "-1/4")  # a^2 = s
    k = np.array([0.3, 0.1])
    assert box_of(k, p) == pytest.approx(-dot(k, k), rel=1e-15)


def test_bad_input():
    with pytest.raises(ValueError):
        z_inverse_of([0.1, 0.2, 0.3], UND2)
    with pytest.raises(ValueError):
        z_inverse_of([float("nan"), 0.0], UND2)


# --- flow -------------------------------------------------------------------------


def test_flow_boundary_and_undeformed():
    p = params(2, ["1/10", "0"], "1/20")
    k, q = np.array([0.3, -0.2]), np.array([0.7, 0.4])
    assert np.array_equal(flow_closed_form(k, q, 0.0, p).p, q)
    got = flow_closed_form(k, q, 0.7, UND2).p
    assert np.allclose(got, q + 0.7 * k, atol=1e-15)


def test_flow_example_against_ode():
    p = params(2, ["1/10", "0"], "1/20")
    k, q = np.array([0.3, -0.2]), np.array([0.7, 0.4])
    closed = flow_closed_form(k, q, 1.0, p).p
    ode = flow_ode(k, q, 1.0, p, steps=1000).p
    assert np.max(np.abs(closed - ode)) < 1e-9


def test_ode_zero_field():
    p = params(3, ["1/5", "0", "1/7"], "1/9")
    q = np.array([0.2, 0.3, -0.1])
    assert np.array_equal(flow_ode(np.zeros(3), q, 2.0, p, steps=10).p, q)


def test_flow_matches_ode_sweep():
    rng = random.Random(11)
    worst = 0.0
    for _ in range(25):
        n = rng.choice([2, 3, 4])
        p = random_float_params(rng, n)
        k, q = small_sample(rng, n), small_sample(rng, n)
        worst = max(worst, float(np.max(np.abs(flow_closed_form(k, q, 1.0, p).p - flow_ode(k, q, 1.0, p).p))))
    assert worst < 1e-9


def test_rk4_order():
    p = params(3, ["1/5", "-1/10", "1/7"], "3/20")
    k, q = np.array([0.9, -0.5, 0.7]), np.array([0.6, 0.8, -0.4])
    exact = flow_closed_form(k, q, 1.0, p).p
    e1 = np.max(np.abs(flow_ode(k, q, 1.0, p, steps=10).p - exact))
    e2 = np.max(np.abs(flow_ode(k, q, 1.0, p, steps=20).p - exact))
    assert 12 <= e1 / e2 <= 20


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 1.0])
def test_closed_form_solves_ode(t):
    p = params(3, ["1/10", "1/5", "-1/8"], "-1/6")
    k, q = np.array([0.5, -0.8, 0.3]), np.array([0.2, 0.4, 0.9])
    pt = flow_closed_form(k, q, t, p).p
    resid = flow_velocity(k, q, t, p) - flow_rhs(k, pt, p)
    assert np.max(np.abs(resid)) < 1e-9
    h = 1e-5
    fd = (flow_closed_form(k, q, t + h, p).p - flow_closed_form(k, q, t - h, p).p) / (2 * h)
    assert np.max(np.abs(fd - flow_velocity(k, q, t, p))) < 1e-8


def test_semigroup():
    p = params(2, ["1/10", "-1/20"], "1/8")
    k, q = np.array([0.6, 0.9]), np.array([-0.3, 0.5])
    mid = flow_closed_form(k, q, 0.4, p).p
    two_step = flow_closed_form(k, mid, 0.35, p).p
    assert np.max(np.abs(two_step - flow_closed_form(k, q, 0.75, p).p)) < 1e-9


def test_imaginary_w_branch():
    # a = 0 with s k^2 > 0 makes W imaginary
    p = params(2, ["0", "0"], "1/5")
    k, q = np.array([0.1, 0.9]), np.array([0.2, 0.3])
    assert dot(k, k) > 0
    closed = flow_closed_form(k, q, 1.0, p)
    assert closed.diagnostics["w2"] < 0
    assert np.max(np.abs(closed.p - flow_ode(k, q, 1.0, p).p)) < 1e-9


# --- K and its inverse ---------------------------------------------------------------


def test_big_k_examples():
    k = np.array([0.3, -0.4, 0.2])
    assert np.allclose(big_k(k, DeformationParams(3)), k, atol=0)
    p = params(3, ["1/10", "1/5", "0"], "1/7")
    assert np.array_equal(big_k(np.zeros(3), p), np.zeros(3))
    snyder = params(3, ["0", "0", "0"], "1/7")
    w2 = -snyder.s_float * dot(k, k)
    sh, _ = even_kernels(w2)
    assert np.allclose(big_k(k, snyder), k * sh, rtol=1e-15)


def test_big_k_is_flow_from_zero():
    p = params(3, ["1/10", "1/5", "-1/9"], "1/7")
    k = np.array([0.4, -0.3, 0.6])
    assert np.allclose(big_k(k, p), flow_closed_form(k, np.zeros(3), 1.0, p).p, rtol=0, atol=1e-15)


def test_big_k_inverse_examples():
    k = np.array([0.3, -0.4])
    p, it = big_k_inverse(k, UND2, full_output=True)
    assert np.array_equal(p, k) and it == 0
    kp = params(2, ["1/10", "0"], "1/20")
    assert np.array_equal(big_k_inverse(np.zeros(2), kp), np.zeros(2))


def test_big_k_round_trip():
    rng = random.Random(5)
    worst = 0.0
    for _ in range(50):
        n = rng.choice([2, 3, 4])
        p = random_float_params(rng, n)
        k = small_sample(rng, n)
        worst = max(worst, float(np.max(np.abs(big_k_inverse(big_k(k, p), p) - k))))
    assert worst < 1e-10


def test_big_k_inverse_no_convergence():
    p = params(2, ["0", "0"], "-4")
    with pytest.raises(NoConvergence) as err:
        big_k_inverse(np.array([0.0, 40.0]), p, max_iter=3)
    assert err.value.max_iter == 3


def test_k_identities_example():
    p = params(2, ["1/10", "1/20"], "3/100")
    rep = check_k_identities(np.array([0.4, 0.1]), p)
    assert all(c["status"] == "pass" for c in rep["checks"])
    assert all(c["abs_err"] < 1e-9 for c in rep["checks"])


def test_k_identities_undeformed():
    k = np.array([0.4, 0.1])
    rep = check_k_identities(k, UND2)
    z, b = rep["checks"]
    assert z["lhs"] == z["rhs"] == 1.0
    assert b["lhs"] == pytest.approx(-dot(k, k)) and b["rhs"] == pytest.approx(-dot(k, k))


def test_k_identities_snyder():
    p = params(3, ["0", "0", "0"], "1/6")
    k = np.array([0.2, 0.5, -0.3])
    rep = check_k_identities(k, p)
    assert rep["checks"][0]["lhs"] == pytest.approx(math.sqrt(1 - p.s_float * dot(k, k)), rel=1e-15)
    kinv = np.array(rep["k_inverse"])
    assert rep["w2"] == pytest.approx(-p.s_float * dot(kinv, kinv), rel=1e-14)
    assert all(c["status"] == "pass" for c in rep["checks"])


# --- mass shell -----------------------------------------------------------------------


def test_mass_shell():
    assert mass_shell([2.0, 0.0, 0.0], 2.0) == 0.0
    assert mass_shell([0.0, 0.0], 0.0) == 0.0


def test_mass_shell_independent_of_deformation():
    """Finite differences of the shell value along a and s vanish."""
    k, m = np.array([1.3, 0.4, -0.2]), 0.7

    def shell_at(a0, s):
        p = DeformationParams.from_strings(3, [a0, "0", "0"], s)
        return mass_shell(k, m) + 0.0 * p.s_float

    assert shell_at("11/10", "1/5") - shell_at("9/10", "1/5") == 0.0
    assert shell_at("1", "3/10") - shell_at("1", "1/10") == 0.0


# --- exact series and the nested-commutator expansion ----------------------------


def test_flow_series_matches_float():
    p = params(2, ["1/10", "-1/20"], "1/8")
    ser = flow_series(p, 10)
    k, q = np.array([0.05, 0.08]), np.array([-0.06, 0.04])
    got = flow_closed_form(k, q, 1.0, p).p
    for mu in range(2):
        assert ser[mu].evaluate(list(k) + list(q)).real == pytest.approx(got[mu], abs=1e-12)


def test_bch_undeformed_is_shift():
    series = bch_series(DeformationParams(2), k_order=3, trunc=8)
    for mu in range(2):
        items = {tuple(ke + qe): c for ke, qe, c in series[mu].split_items()}
        k_exp = tuple(1 if i == mu else 0 for i in range(2)) + (0, 0)
        q_exp = (0, 0) + tuple(1 if i == mu else 0 for i in range(2))
        assert items == {k_exp: 1, q_exp: 1}


def test_bch_k_zero_is_q():
    p = params(2, ["1/10", "0"], "1/20")
    rep = bch_cross_check(np.zeros(2), np.array([0.2, -0.1]), p, order=3)
    assert rep["status"] == "pass"
    assert max(rep["per_order_err"][1:]) < 1e-14


def test_bch_first_order():
    p = params(3, ["1/3", "-1/5", "1/7"], "1/4")
    rep = bch_cross_check(np.array([0.2, 0.1, -0.3]), np.array([0.1, 0.15, 0.05]), p, order=3)
    assert rep["exact_match"] and rep["max_abs_err"] < 1e-9


def test_bch_rejects_high_order():
    with pytest.raises(ValueError):
        bch_cross_check([0.1, 0.1], [0.1, 0.1], UND2, order=4)


@given(st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_taylor_coefficients_polynomial(c0, c1):
    coeffs = taylor_coefficients(lambda z: c0 + c1 * z + z**3, 4)
    assert abs(coeffs[0] - c0) < 1e-14 and abs(coeffs[1] - c1) < 1e-14
    assert abs(coeffs[3] - 1) < 1e-13 and abs(coeffs[2]) < 1e-13
