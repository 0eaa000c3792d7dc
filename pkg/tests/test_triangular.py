import math

import numpy as np
import pytest

from ftseries.basis import BasisFamily, RealExponential, SpatialTerm
from ftseries.catalog import EXAMPLES, builtin_example
from ftseries.diagnostics import bound_check
from ftseries.errors import TermLimitExceeded, UnknownExample, ValidationError
from ftseries.exppoly import ZERO, ExpPoly
from ftseries.linear import solve_all
from ftseries.problem import Structure, detect_structure, validate
from ftseries.triangular import convolve, mode_residual, solve_triangular, splittings

E = ExpPoly.monomial
C = ExpPoly.constant


def burgers_closed_form(k):
    return E((-1) ** (k + 1) * k ** (k - 1) / math.factorial(k), k - 1, -k)


# ---------------------------------------------------------------- convolve


def test_splittings():
    fam = BasisFamily((RealExponential(1),))
    assert list(splittings(fam, (3,), (0,))) == [((0,), (3,)), ((1,), (2,)), ((2,), (1,)), ((3,), (0,))]
    assert list(splittings(fam, (3,), (1,))) == [((0,), (2,)), ((1,), (1,)), ((2,), (0,))]


def test_convolve_burgers_k2():
    fam = BasisFamily((RealExponential(1, 12),))
    T = {(0,): C(1), (1,): E(1, 0, -1)}
    got = convolve(T, T, (2,), fam, SpatialTerm((0,)), SpatialTerm((1,)))
    assert got.isclose(E(1, 0, -2))


def test_convolve_ma1_k2():
    fam = BasisFamily((RealExponential(-1, -2),))
    c = {(j,): 1 / math.factorial(j) for j in range(1, 6)}
    T = {(0,): C(1), (1,): ExpPoly.polynomial([1, 0.5, 0.25]), (2,): ZERO}
    got = convolve(c, T, (2,), fam, None, SpatialTerm((0,)), skip_self=False, left_complete=True)
    assert got.isclose(ExpPoly.polynomial([1.5, 0.5, 0.25]))


def test_convolve_of_zero_modes():
    fam = BasisFamily((RealExponential(1),))
    T = {(j,): ZERO for j in range(5)}
    assert convolve(T, T, (4,), fam) == ZERO


# ---------------------------------------------------------------- solve


def test_burgers_to_six():
    sol = solve_triangular(builtin_example("burgers", N=6))
    T = sol.coefficients[0]
    assert T[(0,)] == C(1)
    for k in range(1, 7):
        assert T[(k,)].isclose(burgers_closed_form(k))
    assert T[(3,)].to_quintuples() == [[1.5, 0.0, 2, -3.0, 0.0]]


def test_ma1_to_four():
    T = solve_triangular(builtin_example("ma1", N=4)).coefficients[0]
    assert T[(0,)] == C(1)
    assert T[(1,)].isclose(ExpPoly.polynomial([1, 0.5, 0.25]))
    assert T[(2,)].isclose(ExpPoly.polynomial([0, 0.5, 1 / 12, 1 / 36]))


def test_ma1_mode_two_by_quadrature():
    # 3 T_2' = T_0/2 + T_1, T_2(0) = 0 integrated numerically
    T2 = solve_triangular(builtin_example("ma1", N=2)).coefficients[0][(2,)]
    s = np.linspace(0, 2, 20001)
    integrand = (0.5 + 1 + s / 2 + s**2 / 4) / 3
    quad = np.sum((integrand[1:] + integrand[:-1]) / 2 * np.diff(s))
    assert abs(T2(2.0) - quad) < 1e-7


def test_qq0_to_four():
    T = solve_triangular(builtin_example("qq0", N=4)).coefficients[0]
    assert T[(1,)].isclose(E(1, 0, -2))
    assert T[(2,)].isclose(E(1, 0, -6))
    assert T[(3,)].isclose(E(1 / 8, 0, -4) + E(-1 / 8, 0, -12))


def test_ex5551_to_five():
    T = solve_triangular(builtin_example("ex5551", N=5)).coefficients[0]
    assert T[(1,)].isclose(E(1, 0, -1))
    assert (2,) not in T and (4,) not in T
    assert T[(3,)].isclose(E(0.25, 1, -1) + E(-1 / 6, 0, -1))


def test_solve_all_routes_triangular_specs():
    spec = builtin_example("burgers", N=5)
    assert detect_structure(spec) is Structure.TRIANGULAR
    a, b = solve_all(spec), solve_triangular(spec)
    assert a.coefficients == b.coefficients


def test_term_limit():
    with pytest.raises(TermLimitExceeded):
        solve_triangular(builtin_example("qq0", N=12), max_terms=20)


# ---------------------------------------------------------------- builtin_example


def test_builtin_burgers():
    spec = builtin_example("burgers")
    ax, = spec.basis.axes
    assert isinstance(ax, RealExponential) and ax.rate == 1 and ax.shift == 12
    assert spec.initial[(0, 0)] == {(0,): 1, (1,): 1}
    q, = spec.quadratic
    assert q.left.spatial.derivative == (0,) and q.right.spatial.derivative == (1,)


def test_builtin_qq0():
    spec = builtin_example("qq0")
    ax, = spec.basis.axes
    assert (ax.step, ax.shift) == (-1, -1)
    assert spec.initial[(0, 0)] == {(1,): 1, (2,): 1}
    lin = [t for t in spec.operator if t.dt == 0]
    assert lin[0].spatial.derivative == (2,) and lin[0].spatial.multipliers[0].exponent == 2
    q, = spec.quadratic
    assert q.left.spatial.derivative == (1,) and q.right.spatial.derivative == (0,)


def test_builtin_wave_and_registry():
    assert builtin_example("wave").basis.axes[0].kind == "sine"
    assert set(EXAMPLES) == {"burgers", "ma1", "qq0", "ex5551", "wave", "hyperbolic",
                             "elliptic", "oo", "stokes_demo"}
    with pytest.raises(UnknownExample):
        builtin_example("heat")
    with pytest.raises(ValidationError):
        builtin_example("wave", colour="red")


def test_builtin_params():
    spec = builtin_example("wave", N=3, a=2.0, l="pi/2", modes="single")
    assert spec.params["a"] == 2.0 and spec.params["l"] == pytest.approx(math.pi / 2)
    assert spec.initial[(0, 0)] == {(1,): 1.0}


# ---------------------------------------------------------------- properties


@pytest.mark.parametrize("name", ["burgers", "ma1", "qq0", "ex5551"])
def test_recurrence_consistency(name):
    spec = validate(builtin_example(name))
    sol = solve_triangular(spec)
    for k in spec.basis.ball(spec.truncation):
        for r in mode_residual(spec, sol, k):
            assert r.is_zero(), (name, k, r)


def test_bounds_at_twenty_samples():
    ma1 = solve_triangular(builtin_example("ma1", N=50))
    assert bound_check(ma1, "ma1", 50, 5.0, samples=20).verdict == "PASS"
    qq0 = solve_triangular(builtin_example("qq0", N=30))
    assert bound_check(qq0, "qq0", 30, 3.0, samples=20).verdict == "PASS"


def test_burgers_closed_form_to_twenty():
    T = solve_triangular(builtin_example("burgers", N=20)).coefficients[0]
    for k in range(1, 21):
        got, want = T[(k,)], burgers_closed_form(k)
        assert len(got) == 1 and got.terms[0][1:] == want.terms[0][1:]
        assert abs(got.terms[0][0] - want.terms[0][0]) <= 1e-10 * abs(want.terms[0][0])
