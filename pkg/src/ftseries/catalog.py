"""Built-in problems.

Every entry builds a :class:`~ftseries.problem.ProblemSpec` with a default
truncation, time horizon, evaluation box and a standard residual grid.
Parameters can be overridden by keyword (strings such as ``"pi/2"`` are
accepted for real parameters).
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, replace

import numpy as np

from .basis import (
    BasisFamily,
    ComplexExponential,
    FourierSine,
    Generator,
    Multiplier,
    NATURALS,
    POSITIVE,
    Power,
    Product,
    RealExponential,
    Sine,
    SpatialTerm,
    expand_initial_data,
)
from .errors import UnknownExample, ValidationError
from .exppoly import ExpPoly
from .expr import parse_real
from .linear import convert_trig_to_complex
from .problem import Constraint, Factor, OperatorTerm, ProblemSpec, QuadraticTerm, SeriesCoefficientTerm


@dataclass(frozen=True)
class GridSpec:
    """Per-axis ``(min, max, count)`` for space, and explicit sample times."""

    axes: tuple[tuple[float, float, int], ...]
    times: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple((float(a), float(b), int(n)) for a, b, n in self.axes))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if any(n < 2 for _, _, n in self.axes):
            raise ValidationError("grid counts must be >= 2 per axis")
        if not self.times:
            raise ValidationError("at least one sample time is required")

    def coords(self) -> list[np.ndarray]:
        return [np.linspace(a, b, n) for a, b, n in self.axes]

    def to_dict(self) -> dict:
        return {"axes": [list(a) for a in self.axes], "times": list(self.times)}


def _times(lo, hi, n) -> tuple[float, ...]:
    return tuple(np.linspace(lo, hi, n))


@dataclass(frozen=True)
class Example:
    name: str
    summary: str
    build: Callable[..., ProblemSpec]
    defaults: Mapping
    grid: Callable[[ProblemSpec], GridSpec]


def _real(v) -> float:
    return parse_real(v)


def _coeff_map(v) -> dict[int, complex]:
    """``{k: c}`` from a mapping, or from a string ``"1:1,3:0.5"``."""
    if isinstance(v, Mapping):
        return {int(k): complex(c) for k, c in v.items()}
    out = {}
    for part in str(v).split(","):
        part = part.strip()
        if part:
            k, c = part.split(":")
            out[int(k)] = complex(parse_real(c))
    return out


def _real_map(m: Mapping | None) -> dict[str, float]:
    return {str(k): float(complex(v).real) for k, v in sorted((m or {}).items())}


def _trim(m: Mapping, N: int) -> dict:
    return {k: v for k, v in m.items() if sum(abs(c) for c in k) <= N and v != 0}


# ---------------------------------------------------------------- 1-D linear


def wave_problem(a=1.0, l=math.pi, A: Mapping | None = None, B: Mapping | None = None,
                 N: int = 8, horizon: float = 2.0) -> ProblemSpec:
    """``u_tt - a^2 u_xx = 0`` on ``[0, l]`` in the basis ``sin(k pi x / l)``."""
    a, l = _real(a), _real(l)
    fam = BasisFamily((Sine(math.pi / l, POSITIVE),))
    ops = (
        OperatorTerm(0, 0, 2, SpatialTerm((0,))),
        OperatorTerm(0, 0, 0, SpatialTerm((2,), -a * a)),
    )
    A = {(k,): v for k, v in (A or {}).items()}
    B = {(k,): v for k, v in (B or {}).items()}
    return ProblemSpec(
        basis=fam, unknowns=("u",), operator=ops,
        initial={(0, 0): _trim(A, N), (0, 1): _trim(B, N)},
        truncation=N, horizon=horizon, eval_box=((0.0, l),), name="wave",
        params={"a": a, "l": l, "A": _real_map({k[0]: v for k, v in A.items()}),
                "B": _real_map({k[0]: v for k, v in B.items()})},
    )


def _wave(N, a=1.0, l="pi", modes="quartic"):
    if modes == "single":
        A = {1: 1.0}
    elif modes == "quartic":
        A = {k: 1.0 / k**4 for k in range(1, N + 1)}
    else:
        raise ValidationError(f"wave: modes must be 'single' or 'quartic', got {modes!r}")
    spec = wave_problem(a, l, A, {}, N)
    return replace(spec, params={**spec.params, "modes": modes})


def hyperbolic_problem(a=0.0, b=-1.0, l=math.pi, A: Mapping | None = None, B: Mapping | None = None,
                       N: int = 4, horizon: float = 2.0, name: str = "hyperbolic") -> ProblemSpec:
    """``u_tt + a u_xt + b u_xx = 0`` with cosine/sine data, solved over ``exp(i k pi x / l)``."""
    a, b, l = _real(a), _real(b), _real(l)
    fam = BasisFamily((ComplexExponential(math.pi / l),))
    ops = (
        OperatorTerm(0, 0, 2, SpatialTerm((0,))),
        OperatorTerm(0, 0, 1, SpatialTerm((1,), a)),
        OperatorTerm(0, 0, 0, SpatialTerm((2,), b)),
    )
    r0 = convert_trig_to_complex(A or {}, {})
    r1 = convert_trig_to_complex({}, B or {})
    return ProblemSpec(
        basis=fam, unknowns=("u",), operator=ops,
        initial={(0, 0): _trim(r0, N), (0, 1): _trim(r1, N)},
        truncation=N, horizon=horizon, eval_box=((0.0, 2 * l),), name=name,
        params={"a": a, "b": b, "l": l, "A": _real_map(A), "B": _real_map(B)},
    )


def _hyperbolic(N, a=0.0, b=-1.0, l="pi", A="1:1", B=""):
    a, b = _real(a), _real(b)
    if not a * a - 4 * b > 0:
        raise ValidationError("hyperbolic example needs a^2 - 4b > 0")
    return hyperbolic_problem(a, b, l, _coeff_map(A), _coeff_map(B), N)


def elliptic_problem(a=1.0, b=1.0, N: int = 8, horizon: float = 1.0) -> ProblemSpec:
    """``u_tt + a u_xt + b u_xx = 0``, ``u(x,0) = cos e^{2x}``, ``u_t(x,0) = sin e^{2x}``."""
    a, b = _real(a), _real(b)
    fam = BasisFamily((RealExponential(2.0, 0.0, NATURALS),))
    ops = (
        OperatorTerm(0, 0, 2, SpatialTerm((0,))),
        OperatorTerm(0, 0, 1, SpatialTerm((1,), a)),
        OperatorTerm(0, 0, 0, SpatialTerm((2,), b)),
    )
    r0 = expand_initial_data(Generator("cos_of_exponential"), N, fam)
    r1 = expand_initial_data(Generator("sin_of_exponential"), N, fam)
    return ProblemSpec(
        basis=fam, unknowns=("u",), operator=ops, initial={(0, 0): r0, (0, 1): r1},
        truncation=N, horizon=horizon, eval_box=((-2.0, 0.0),), name="elliptic",
        params={"a": a, "b": b},
    )


def _elliptic(N, a=1.0, b=1.0):
    a, b = _real(a), _real(b)
    if not (a > 0 and b > 0 and a * a - 4 * b < 0):
        raise ValidationError("elliptic example needs a, b > 0 and a^2 - 4b < 0")
    return elliptic_problem(a, b, N)


# ---------------------------------------------------------------- 2-D, time-dependent coefficient


def _oo_profile(x):
    return x**3 * (x - math.pi / 2) ** 3


def oo_problem(N: int = 11, horizon: float = 1.0, steps: int = 1024) -> ProblemSpec:
    """``u_t - t (y-3) u_xxy = 0`` over ``(y-3)^{3j/5} sin(2kx)``.

    The data ``x^3 (x - pi/2)^3 sin((y-3)^{3/5})`` lives on odd ``j = 2m-1``.
    """
    fam = BasisFamily((Sine(2.0, POSITIVE), Power(0.6, 3.0, POSITIVE)), names=("x", "y"))
    ops = (
        OperatorTerm(0, 0, 1, SpatialTerm((0, 0))),
        OperatorTerm(0, 0, 0, SpatialTerm((2, 1), -1.0, (Multiplier(1, "power", 1.0),)), (0.0, 1.0)),
    )
    desc = Product((FourierSine(_oo_profile, 0), Generator("sin_of_power", 1)))
    r0 = {k: v for k, v in expand_initial_data(desc, N, fam).items() if abs(v) > 1e-15}
    return ProblemSpec(
        basis=fam, unknowns=("u",), operator=ops, initial={(0, 0): r0},
        truncation=N, horizon=horizon, eval_box=((0.0, math.pi / 2), (3.5, 4.5)),
        steps=steps, name="oo",
    )


def _oo(N, steps=1024):
    return oo_problem(N, steps=int(_real(steps)))


# ---------------------------------------------------------------- triangular


def burgers_problem(N: int = 12, horizon: float = 2.0) -> ProblemSpec:
    """``u_t + u u_x = 0``, ``u(x,0) = 1 + e^{x-12}``, over ``e^{k(x-12)}``."""
    fam = BasisFamily((RealExponential(1.0, 12.0, NATURALS),))
    ident = SpatialTerm((0,))
    return ProblemSpec(
        basis=fam, unknowns=("u",),
        operator=(OperatorTerm(0, 0, 1, ident),),
        quadratic=(QuadraticTerm(0, Factor(0, ident), Factor(0, SpatialTerm((1,)))),),
        initial={(0, 0): _trim({(0,): 1.0, (1,): 1.0}, N)},
        truncation=N, horizon=horizon, eval_box=((0.0, 11.0),), name="burgers",
    )


def ma1_problem(N: int = 20, horizon: float = 5.0) -> ProblemSpec:
    """``u_y - u_xy - (exp(e^{-(x+2)}) - 1) u = y e^{-(x+2)}``, ``u(x,0) = 1 + e^{-(x+2)}``.

    ``y`` plays the role of time.
    """
    fam = BasisFamily((RealExponential(-1.0, -2.0, NATURALS),), names=("x",))
    coeffs = {(j,): 1.0 / math.factorial(j) for j in range(1, N + 1)}
    return ProblemSpec(
        basis=fam, unknowns=("u",),
        operator=(
            OperatorTerm(0, 0, 1, SpatialTerm((0,))),
            OperatorTerm(0, 0, 1, SpatialTerm((1,), -1.0)),
        ),
        series_terms=(SeriesCoefficientTerm(0, coeffs, 0, SpatialTerm((0,)), 0, -1.0),),
        forcing={(0, (1,)): ExpPoly.monomial(1.0, 1)} if N >= 1 else {},
        initial={(0, 0): _trim({(0,): 1.0, (1,): 1.0}, N)},
        truncation=N, horizon=horizon, eval_box=((5.0, 10.0),), name="ma1",
    )


def qq0_problem(N: int = 10, horizon: float = 3.0) -> ProblemSpec:
    """``u_t + (x+1)^2 u_xx + u_x u = 0``, ``u(x,0) = (x+1)^{-1} + (x+1)^{-2}``."""
    fam = BasisFamily((Power(-1.0, -1.0, POSITIVE),))
    return ProblemSpec(
        basis=fam, unknowns=("u",),
        operator=(
            OperatorTerm(0, 0, 1, SpatialTerm((0,))),
            OperatorTerm(0, 0, 0, SpatialTerm((2,), 1.0, (Multiplier(0, "power", 2.0),))),
        ),
        quadratic=(QuadraticTerm(0, Factor(0, SpatialTerm((1,))), Factor(0, SpatialTerm((0,)))),),
        initial={(0, 0): _trim({(1,): 1.0, (2,): 1.0}, N)},
        truncation=N, horizon=horizon, eval_box=((1.0, 5.0),), name="qq0",
    )


def ex5551_problem(N: int = 25, horizon: float = 1.0) -> ProblemSpec:
    """``u_t + u + (x+3)^{1/2} u_x = 0``, ``u(x,0) = sin (x+3)^{-1/4}``, over ``(x+3)^{-k/4}``."""
    fam = BasisFamily((Power(-0.25, -3.0, POSITIVE),))
    r0 = expand_initial_data(Generator("sin_of_power"), N, fam)
    return ProblemSpec(
        basis=fam, unknowns=("u",),
        operator=(
            OperatorTerm(0, 0, 1, SpatialTerm((0,))),
            OperatorTerm(0, 0, 0, SpatialTerm((0,))),
            OperatorTerm(0, 0, 0, SpatialTerm((1,), 1.0, (Multiplier(0, "power", 0.5),))),
        ),
        initial={(0, 0): r0},
        truncation=N, horizon=horizon, eval_box=((0.0, 5.0),), name="ex5551",
    )


# ---------------------------------------------------------------- Stokes

STOKES_WAVEVECTORS = ((1, 0, 0), (0, 1, 1), (1, 1, 0))


def stokes_problem(lam=(1.0, 2.0, 1.0), nu: float = 0.5,
                   initial: Mapping | None = None, forcing: Mapping | None = None,
                   N: int = 4, horizon: float = 1.0) -> ProblemSpec:
    """Linear Stokes flow over ``exp(i sum_j lam_j k_j x_j)``.

    ``initial[k]`` is the velocity triple at wavevector ``k``;
    ``forcing[k]`` a triple of :class:`ExpPoly`.  Unknowns are
    ``u1, u2, u3, p``; the divergence row is a constraint.
    """
    lam = tuple(_real(v) for v in lam)
    fam = BasisFamily(tuple(ComplexExponential(v) for v in lam), names=("x1", "x2", "x3"))
    ops = []
    e = lambda j, d: tuple(d if m == j else 0 for m in range(3))
    for j in range(3):
        ops.append(OperatorTerm(j, j, 1, SpatialTerm((0, 0, 0))))
        for m in range(3):
            ops.append(OperatorTerm(j, j, 0, SpatialTerm(e(m, 2), -nu)))
        ops.append(OperatorTerm(j, 3, 0, SpatialTerm(e(j, 1))))
    init = {(j, 0): {} for j in range(3)}
    for k, vel in (initial or {}).items():
        for j in range(3):
            if vel[j] != 0:
                init[(j, 0)][tuple(k)] = complex(vel[j])
    force = {}
    for k, fs in (forcing or {}).items():
        for j in range(3):
            if not fs[j].is_zero():
                force[(j, tuple(k))] = fs[j]
    spec = ProblemSpec(
        basis=fam, unknowns=("u1", "u2", "u3", "p"), operator=tuple(ops),
        constraints=(Constraint(tuple(Factor(j, SpatialTerm(e(j, 1))) for j in range(3))),),
        initial={key: _trim(m, N) for key, m in init.items()},
        forcing={key: v for key, v in force.items() if sum(map(abs, key[1])) <= N},
        truncation=N, horizon=horizon,
        eval_box=tuple((0.0, 2 * math.pi / abs(v)) for v in lam), name="stokes",
        params={"lam": list(lam), "nu": nu},
    )
    return spec


def _neg(k):
    return tuple(-v for v in k)


def stokes_demo_data():
    """Divergence-free, conjugate-symmetric data on three wavevector pairs."""
    initial = {
        (1, 0, 0): (0.0, 1.0, 0.5j),
        (0, 1, 1): (1.0, 1.0 + 0.5j, -2.0 - 1.0j),
        (1, 1, 0): (2.0, -1.0, 1.0),
    }
    forcing = {
        (1, 0, 0): (ExpPoly.monomial(1.0, 0, -1.0), ExpPoly(), ExpPoly()),
        (0, 1, 1): (ExpPoly(), ExpPoly.cos(1.0, 1j), ExpPoly.constant(0.5)),
        (1, 1, 0): (ExpPoly.monomial(1.0, 1), ExpPoly.sin(2.0), ExpPoly()),
    }
    initial.update({_neg(k): tuple(complex(v).conjugate() for v in vel) for k, vel in list(initial.items())})
    forcing.update({_neg(k): tuple(f.conj() for f in fs) for k, fs in list(forcing.items())})
    return initial, forcing


def _stokes_demo(N, nu=0.5, lam1=1.0, lam2=2.0, lam3=1.0):
    init, force = stokes_demo_data()
    spec = stokes_problem((lam1, lam2, lam3), _real(nu), init, force, N)
    return replace(spec, name="stokes_demo")


# ---------------------------------------------------------------- registry


def _grid_1d(n_x=11, n_t=11, t_lo=0.0, t_hi=None):
    def grid(spec: ProblemSpec) -> GridSpec:
        (lo, hi), = spec.eval_box
        return GridSpec(((lo, hi, n_x),), _times(t_lo, spec.horizon if t_hi is None else t_hi, n_t))

    return grid


def _grid_oo(spec):
    return GridSpec(tuple((lo, hi, 5) for lo, hi in spec.eval_box), _times(0.1 * spec.horizon, 0.9 * spec.horizon, 5))


def _grid_stokes(spec):
    return GridSpec(tuple((lo, hi, 4) for lo, hi in spec.eval_box), _times(0.0, spec.horizon, 3))


EXAMPLES: dict[str, Example] = {
    e.name: e
    for e in (
        Example("burgers", "u_t + u u_x = 0, u(x,0) = 1 + e^{x-12}, x in [0,11]; basis e^{k(x-12)}",
                burgers_problem, {"N": 12}, _grid_1d()),
        Example("ma1", "u_y - u_xy - (exp(e^{-(x+2)}) - 1) u = y e^{-(x+2)}, u(x,0) = 1 + e^{-(x+2)}; "
                "basis e^{-k(x+2)}", ma1_problem, {"N": 20}, _grid_1d()),
        Example("qq0", "u_t + (x+1)^2 u_xx + u_x u = 0, u(x,0) = (x+1)^{-1} + (x+1)^{-2}, x >= 1; "
                "basis (x+1)^{-k}", qq0_problem, {"N": 10}, _grid_1d()),
        Example("ex5551", "u_t + u + (x+3)^{1/2} u_x = 0, u(x,0) = sin (x+3)^{-1/4}, x >= 0; "
                "basis (x+3)^{-k/4}", ex5551_problem, {"N": 25}, _grid_1d()),
        Example("wave", "u_tt - a^2 u_xx = 0 on [0,l], sine data (modes=quartic: A_k = k^-4; "
                "modes=single: A_1 = 1); basis sin(k pi x/l)", _wave,
                {"N": 8, "a": 1.0, "l": "pi", "modes": "quartic"}, _grid_1d()),
        Example("hyperbolic", "u_tt + a u_xt + b u_xx = 0, a^2 - 4b > 0, cosine/sine data; "
                "basis exp(i k pi x/l)", _hyperbolic,
                {"N": 4, "a": 0.0, "b": -1.0, "l": "pi", "A": "1:1", "B": ""}, _grid_1d()),
        Example("elliptic", "u_tt + a u_xt + b u_xx = 0, a^2 - 4b < 0, u(x,0) = cos e^{2x}, "
                "u_t(x,0) = sin e^{2x}; basis e^{2kx}", _elliptic, {"N": 8, "a": 1.0, "b": 1.0},
                _grid_1d()),
        Example("oo", "u_t - t (y-3) u_xxy = 0, u(x,y,0) = x^3 (x-pi/2)^3 sin (y-3)^{3/5}; "
                "basis (y-3)^{3j/5} sin 2kx", _oo, {"N": 11, "steps": 1024}, _grid_oo),
        Example("stokes_demo", "linear Stokes flow in R^3 with pressure, three wavevector pairs, "
                "divergence-free conjugate-symmetric data; basis exp(i lam.k x)", _stokes_demo,
                {"N": 4, "nu": 0.5, "lam1": 1.0, "lam2": 2.0, "lam3": 1.0}, _grid_stokes),
    )
}


def builtin_example(name: str, N: int | None = None, **params) -> ProblemSpec:
    """Spec of the built-in example ``name`` at truncation ``N``."""
    try:
        ex = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}") from None
    kwargs = {k: v for k, v in ex.defaults.items() if k != "N"}
    unknown = set(params) - set(kwargs)
    if unknown:
        raise ValidationError(f"example {name!r} has no parameter(s) {', '.join(sorted(unknown))}")
    kwargs.update(params)
    N = ex.defaults["N"] if N is None else int(N)
    if N < 0:
        raise ValidationError("truncation must be >= 0")
    spec = ex.build(N, **kwargs)
    merged = {**{k: v for k, v in kwargs.items()}, **spec.params}
    return replace(spec, name=name, params=merged)


def standard_grid(spec: ProblemSpec) -> GridSpec:
    """Residual grid of a built-in spec, or a default grid over its box."""
    ex = EXAMPLES.get(spec.name)
    if ex is not None:
        return ex.grid(spec)
    return GridSpec(tuple((lo, hi, 5 if spec.basis.dim > 1 else 11) for lo, hi in spec.eval_box),
                    _times(0.0, spec.horizon, 5))
