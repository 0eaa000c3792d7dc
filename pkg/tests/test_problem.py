import math
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftseries.basis import BasisFamily, SpatialTerm, order_key
from ftseries.catalog import builtin_example, burgers_problem, ex5551_problem, stokes_problem, wave_problem
from ftseries.errors import MissingDependency, NonTriangular, ValidationError
from ftseries.exppoly import ZERO, ExpPoly
from ftseries.problem import (
    OperatorTerm,
    ProblemSpec,
    Structure,
    assemble_mode_system,
    detect_structure,
    validate,
)

E = ExpPoly.monomial


def row_dict(ms, p=0):
    return {(e.unknown, e.dt): e.coeff for e in ms.rows[p]}


# ---------------------------------------------------------------- validate


def test_wave_spec_is_valid():
    spec = validate(wave_problem(1.0, math.pi, {1: 1.0}, {}, N=4))
    assert spec.orders == (2,)
    assert set(spec.initial) == {(0, 0), (0, 1)}


def test_stokes_data_violating_divergence():
    with pytest.raises(ValidationError, match="constraint"):
        validate(stokes_problem((1, 1, 1), 1.0, {(1, 0, 0): (1, 0, 0)}))


def test_first_derivative_on_sine_family():
    spec = wave_problem(N=2)
    bad = replace(spec, operator=spec.operator + (OperatorTerm(0, 0, 0, SpatialTerm((1,))),))
    with pytest.raises(ValidationError, match="NotRepresentable"):
        validate(bad)


@pytest.mark.parametrize("mutate,match", [
    (lambda s: replace(s, horizon=0.0), "horizon"),
    (lambda s: replace(s, truncation=-1), "truncation"),
    (lambda s: replace(s, eval_box=((1.0, 1.0),)), "eval_box"),
    (lambda s: replace(s, initial={(0, 2): {(1,): 1.0}}), "time order"),
    (lambda s: replace(s, initial={(0, 0): {(0,): 1.0}}), "index set"),
    (lambda s: replace(s, operator=(OperatorTerm(3, 0, 2, SpatialTerm((0,))),)), "row 4"),
    (lambda s: replace(s, forcing={(0, (0,)): ExpPoly.constant(1)}), "forcing index"),
])
def test_validation_names_the_violated_condition(mutate, match):
    with pytest.raises(ValidationError, match=match):
        validate(mutate(wave_problem(N=3)))


def test_missing_initial_orders_become_zero_maps():
    spec = validate(replace(wave_problem(N=3), initial={(0, 0): {(1,): 1.0}}))
    assert spec.initial[(0, 1)] == {}


# ---------------------------------------------------------------- assembly


def test_wave_mode_row():
    a, l, k = 1.5, 2.0, 3
    spec = validate(wave_problem(a, l, {3: 0.25}, {3: -1.0}, N=4))
    ms = assemble_mode_system(spec, (k,))
    row = row_dict(ms)
    assert row[(0, 2)] == ExpPoly.constant(1)
    assert row[(0, 0)].constant_value() == pytest.approx((a * k * math.pi / l) ** 2)
    assert ms.initial == {(0, 0): 0.25, (0, 1): -1.0}
    assert ms.incoming == ()


def test_burgers_mode_two():
    spec = validate(burgers_problem(N=4))
    solved = {0: {(0,): ExpPoly.constant(1), (1,): E(1, 0, -1)}}
    ms = assemble_mode_system(spec, (2,), solved)
    row = row_dict(ms)
    assert row[(0, 1)] == ExpPoly.constant(1)
    assert row[(0, 0)].constant_value() == pytest.approx(2)  # 2 T_0
    assert ms.rhs(0).isclose(E(-1, 0, -2))  # -T_1 T_1


def test_ex5551_mode_three():
    spec = validate(ex5551_problem(N=5))
    solved = {0: {(1,): E(1, 0, -1), (2,): ZERO}}
    ms = assemble_mode_system(spec, (3,), solved)
    row = row_dict(ms)
    assert row == {(0, 1): ExpPoly.constant(1), (0, 0): ExpPoly.constant(1)}
    assert ms.rhs(0).isclose(E(0.25, 0, -1))
    assert ms.incoming[0][1].startswith("operator term 3 from mode (1,)")


def test_missing_dependency():
    spec = validate(burgers_problem(N=4))
    with pytest.raises(MissingDependency):
        assemble_mode_system(spec, (3,), {0: {(0,): ExpPoly.constant(1)}})


def test_downward_shift_is_non_triangular():
    from ftseries.basis import Multiplier, Power
    fam = BasisFamily((Power(1.0, 0.0),))
    # x^{-1} shifts power indices down by one
    term = OperatorTerm(0, 0, 0, SpatialTerm((0,), 1.0, (Multiplier(0, "power", -1.0),)))
    spec = ProblemSpec(fam, ("u",), (OperatorTerm(0, 0, 1, SpatialTerm((0,))), term),
                       {(0, 0): {(2,): 1.0}}, 3, 1.0, ((1.0, 2.0),))
    with pytest.raises(NonTriangular):
        assemble_mode_system(validate(spec), (3,), {0: {}})


def test_detect_structure():
    assert detect_structure(builtin_example("wave")) is Structure.DIAGONAL
    assert detect_structure(builtin_example("burgers")) is Structure.TRIANGULAR
    assert detect_structure(builtin_example("ma1")) is Structure.TRIANGULAR
    assert detect_structure(builtin_example("ex5551")) is Structure.TRIANGULAR
    assert detect_structure(builtin_example("stokes_demo")) is Structure.DIAGONAL


# ---------------------------------------------------------------- properties


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.integers(1, 8))
def test_assembly_is_linear_in_the_operator(a1, a2, k):
    s1 = wave_problem(a1, math.pi, {1: 1.0}, {}, N=8)
    s2 = replace(s1, operator=(OperatorTerm(0, 0, 0, SpatialTerm((2,), -a2 * a2)),), initial={})
    both = replace(s1, operator=s1.operator + s2.operator)
    r1 = row_dict(assemble_mode_system(validate(s1), (k,)))
    r2 = row_dict(assemble_mode_system(validate(s2), (k,)))
    rb = row_dict(assemble_mode_system(validate(both), (k,)))
    for key in set(r1) | set(r2):
        want = r1.get(key, ZERO) + r2.get(key, ZERO)
        assert rb.get(key, ZERO).isclose(want)


@given(st.permutations(list(range(1, 9))))
def test_diagonal_assembly_is_order_independent(order):
    spec = validate(builtin_example("wave"))
    first = {k: assemble_mode_system(spec, (k,)) for k in range(1, 9)}
    again = {k: assemble_mode_system(spec, (k,)) for k in order}
    assert first == again


@pytest.mark.parametrize("name", ["burgers", "ma1", "qq0", "ex5551"])
def test_triangular_dependencies_point_backwards(name):
    spec = validate(builtin_example(name, N=8))
    ball = sorted(spec.basis.ball(8), key=order_key)
    seen = set()
    for k in ball:
        # every mode must assemble from the modes before it in topological order
        solved = {q: {j: ExpPoly.constant(1) for j in seen} for q in range(spec.n)}
        assemble_mode_system(spec, k, solved)
        seen.add(k)
