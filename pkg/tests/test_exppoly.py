import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftseries.exppoly import (
    ZERO,
    ExpPoly,
    add,
    characteristic_roots,
    differentiate,
    integrate_from_zero,
    linear_form,
    mul,
    residual,
    solve_first_order,
    solve_second_order,
    total,
)
from strategies import coeffs, exppolys, rates

E = ExpPoly.monomial
T_GRID = np.linspace(0, 2, 21)


def close(a, b, rtol=1e-10):
    va, vb = a(T_GRID), b(T_GRID)
    return np.allclose(va, vb, rtol=rtol, atol=rtol * max(1.0, np.max(np.abs(va))))


# ---------------------------------------------------------------- canonical form


def test_merges_equal_terms_and_orders_by_rate_then_power():
    p = ExpPoly(((1, 0, -1), (2, 1, -2), (3, 0, -1), (1, 0, 2j)))
    assert p.terms == ((2, 1, -2), (4, 0, -1), (1, 0, 2j))


def test_cancellation_drops_the_term():
    assert E(1, 1, -2) + E(-1, 1, -2) == ZERO
    assert (E(0.1, 0, 0) + E(0.2, 0, 0) - E(0.3, 0, 0)).is_zero()


def test_small_standalone_coefficients_survive():
    # the recurrences produce genuinely tiny terms; only cancellation is dropped
    tiny = E(1e-20, 5, -3)
    assert len(tiny) == 1 and tiny.terms[0][0] == 1e-20


def test_rates_within_tolerance_merge():
    p = E(1, 0, 1.0) + E(1, 0, 1.0 + 1e-14)
    assert len(p) == 1 and p.terms[0][0] == 2


def test_at_zero_sums_power_zero_coefficients():
    p = E(2, 0, 1) + E(3, 1, 0) + E(-1j, 0, -4)
    assert p.at_zero() == p(0.0) == 2 - 1j


def test_trig_is_a_complex_exponential_pair():
    c = ExpPoly.cos(3.0)
    assert {q for _, _, q in c.terms} == {3j, -3j}
    np.testing.assert_allclose(c(T_GRID), np.cos(3 * T_GRID), atol=1e-15)
    np.testing.assert_allclose(ExpPoly.sin(2.0, 5)(T_GRID), 5 * np.sin(2 * T_GRID), atol=1e-14)


def test_quintuple_round_trip():
    p = E(1.5, 2, -3) + E(1j, 0, 2j)
    assert ExpPoly.from_quintuples(p.to_quintuples()) == p
    assert [1.5, 0.0, 2, -3.0, 0.0] in p.to_quintuples()


def test_negative_power_rejected():
    with pytest.raises(ValueError):
        ExpPoly(((1, -1, 0),))


# ---------------------------------------------------------------- examples


def test_add_examples():
    assert add(ExpPoly.constant(1), ZERO) == ExpPoly.constant(1)
    assert add(E(1, 1, -2), E(-1, 1, -2)) == ZERO
    got = add(ExpPoly.polynomial([1, 1]), ExpPoly.polynomial([0, -0.5, 0.25]))
    assert got.isclose(ExpPoly.polynomial([1, 0.5, 0.25]))


def test_mul_examples():
    assert mul(E(1, 0, -1), E(1, 0, -1)) == E(1, 0, -2)
    assert mul(E(1, 1, -2), E(1, 0, -1)) == E(1, 1, -3)
    # Burgers k=3 source: T_1 T_2
    assert mul(E(1, 0, -1), E(-1, 1, -2)) == E(-1, 1, -3)


def test_integrate_examples():
    assert integrate_from_zero(ExpPoly.constant(1)) == E(1, 1, 0)
    assert integrate_from_zero(E(1, 2, 0)).isclose(E(1 / 3, 3, 0))
    got = integrate_from_zero(E(1, 1, -2))
    want = ExpPoly.constant(0.25) + E(-0.25, 0, -2) + E(-0.5, 1, -2)
    assert got.isclose(want)
    for t in (0.5, 1.0, 2.0):
        s = np.linspace(0, t, 200_001)
        quad = np.trapezoid(s * np.exp(-2 * s), s) if hasattr(np, "trapezoid") else np.trapz(s * np.exp(-2 * s), s)
        assert abs(got(t) - quad) < 1e-9


def test_differentiate_examples():
    assert differentiate(ExpPoly.constant(7)) == ZERO
    assert differentiate(E(1, 1, -2)).isclose(E(1, 0, -2) + E(-2, 1, -2))
    assert differentiate(ExpPoly.polynomial([1, 0.5, 0.25])).isclose(ExpPoly.polynomial([0.5, 0.5]))


def test_higher_derivative_matches_repeated_first_derivative():
    p = E(1.3, 3, -0.5 + 2j) + E(2, 1, 0) + E(-1, 0, 3)
    d = p
    for h in range(1, 6):
        d = differentiate(d)
        assert p.derivative(h).isclose(d)


def test_solve_first_order_examples():
    assert solve_first_order(0, ZERO, 2.5) == ExpPoly.constant(2.5)
    assert solve_first_order(2, E(-1, 0, -2), 0).isclose(E(-1, 1, -2))
    got = solve_first_order(1, E(0.25, 0, -1), -1 / 6)
    assert got.isclose(E(0.25, 1, -1) + E(-1 / 6, 0, -1))


def test_solve_first_order_against_rk4():
    # T' + T = e^{-t}/4, T(0) = -1/6 integrated by plain RK4
    f = lambda t, y: 0.25 * math.exp(-t) - y
    y, h = -1 / 6, 1e-3
    for i in range(1000):
        t = i * h
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert abs(solve_first_order(1, E(0.25, 0, -1), -1 / 6)(1.0) - y) < 1e-10


def test_solve_second_order_examples():
    assert solve_second_order(0, 0, ZERO, 2, 3).isclose(ExpPoly.polynomial([2, 3]))
    a, l, k, A, B = 1.0, math.pi, 3, 0.7, -0.4
    w = a * k * math.pi / l
    got = solve_second_order(0, w * w, ZERO, A, B)
    want = lambda t: A * np.cos(w * t) + B / w * np.sin(w * t)
    np.testing.assert_allclose(got(T_GRID), want(T_GRID), atol=1e-13)


def test_elliptic_even_mode():
    # u_tt + u_xt + u_xx = 0 on e^{2kx}: mode k reads T'' + 2k T' + 4k^2 T = 0.
    # Index 2 carries -1/2! from cos e^{2x}; sin e^{2x} has no even index.
    s3 = math.sqrt(3)
    T = solve_second_order(4, 16, ZERO, -0.5, 0)
    for t in (0, 0.3, 1):
        want = -0.5 * math.exp(-2 * t) * (math.cos(2 * s3 * t) + math.sin(2 * s3 * t) / s3)
        assert abs(T(t) - want) < 1e-12


def test_resonant_source_gets_polynomial_factor():
    # T'' + T = cos t resonates at +-i: T = t sin t / 2
    T = solve_second_order(0, 1, ExpPoly.cos(1.0), 0, 0)
    np.testing.assert_allclose(T(T_GRID), T_GRID * np.sin(T_GRID) / 2, atol=1e-14)
    assert residual([1, 0, 1], T, ExpPoly.cos(1.0)).is_zero()


def test_double_root():
    # T'' + 2T' + T = 0, T(0) = 1, T'(0) = 0: (1 + t) e^{-t}
    T = solve_second_order(2, 1, ZERO, 1, 0)
    assert T.isclose(E(1, 0, -1) + E(1, 1, -1))
    assert residual([1, 2, 1], T, ZERO).is_zero()
    # source resonant with a double root: T'' + 2T' + T = e^{-t} -> t^2 e^{-t} / 2
    T = solve_second_order(2, 1, E(1, 0, -1), 0, 0)
    assert T.isclose(E(0.5, 2, -1))


def test_characteristic_roots_exact_zero_and_equal():
    assert 0j in characteristic_roots(1.7 - 0.2j, 0)
    r1, r2 = characteristic_roots(-4, 4)
    assert r1 == r2 == 2


# ---------------------------------------------------------------- properties


@given(exppolys(), exppolys(), exppolys())
def test_ring_axioms(a, b, c):
    assert close(a + b, b + a)
    assert close(a * b, b * a)
    assert close((a + b) + c, a + (b + c))
    assert close((a * b) * c, a * (b * c), rtol=1e-9)
    assert close(a * (b + c), a * b + a * c, rtol=1e-9)
    assert (a - a).is_zero()
    assert a * ExpPoly.constant(1) == a


@given(exppolys())
def test_differentiate_inverts_integrate(a):
    # one-pass residual, so cancellation is judged against every contribution
    assert residual([0, 1], integrate_from_zero(a), a).is_zero()
    assert differentiate(integrate_from_zero(a)).isclose(a, rtol=1e-12)
    assert integrate_from_zero(a).at_zero() == pytest.approx(0, abs=1e-12 * max(1, a.max_abs_coeff() * 100))


@given(rates, exppolys(), coeffs)
def test_first_order_residual_is_exactly_zero(rate, source, y0):
    T = solve_first_order(rate, source, y0)
    assert residual([rate, 1], T, source).is_zero()
    # near-resonant sources give large cancelling coefficients; rounding scales with them
    assert abs(T.at_zero() - y0) <= 1e-12 * max(1, abs(y0), T.max_abs_coeff())


@given(st.one_of(coeffs, st.just(0)), st.one_of(coeffs, st.just(0)), exppolys(max_terms=5), coeffs, coeffs)
def test_second_order_residual_is_exactly_zero(a, b, source, y0, y1):
    T = solve_second_order(a, b, source, y0, y1)
    assert residual([b, a, 1], T, source).is_zero()
    assert T.at_zero() == pytest.approx(y0, abs=1e-9 * max(1, T.max_abs_coeff()))
    assert T.derivative().at_zero() == pytest.approx(y1, abs=1e-9 * max(1, T.derivative().max_abs_coeff()))


@given(exppolys(max_terms=5))
def test_conjugate_symmetric_sets_are_real(a):
    p = a + a.conj()
    t = np.linspace(0, 2, 20)
    v = p(t)
    assert np.max(np.abs(v.imag)) <= 1e-12 * max(1.0, np.max(np.abs(v)))


@given(exppolys(), exppolys())
def test_total_agrees_with_chained_addition(a, b):
    assert close(total([a, b, -a]), b)


@given(exppolys(max_terms=4), exppolys(max_terms=4))
def test_linear_form(a, b):
    got = linear_form([(ExpPoly.constant(2), a, 1), (b, a, 0)], b)
    assert close(got, a.derivative() * 2 + b * a - b, rtol=1e-9)
