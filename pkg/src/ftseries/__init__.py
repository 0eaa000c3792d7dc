"""Fourier-Taylor series solutions of Cauchy problems for PDEs.

Spatial dependence is expanded in an exponential, power or trigonometric
basis; each mode coefficient ``T_k(t)`` solves an ODE, in closed form as an
exponential polynomial where possible and numerically otherwise.
"""
from .basis import (
    BasisFamily,
    ComplexExponential,
    Cosine,
    Multiplier,
    Power,
    RealExponential,
    Sine,
    SpatialTerm,
    apply_spatial_term,
    eval_element,
    expand_initial_data,
    multiply_indices,
)
from .catalog import EXAMPLES, GridSpec, builtin_example, standard_grid
from .diagnostics import (
    abel_identity_check,
    bound_check,
    closed_form_compare,
    initial_data_check,
    residual_check,
    solution_tail_report,
    tail_report,
)
from .documents import from_document, load_archive, load_document, save_archive, to_document
from .errors import *  # noqa: F403
from .exppoly import ZERO, ExpPoly, solve_first_order, solve_second_order
from .linear import SampledTrajectory, SeriesSolution, solve_all, solve_mode
from .problem import (
    Constraint,
    Factor,
    OperatorTerm,
    ProblemSpec,
    QuadraticTerm,
    SeriesCoefficientTerm,
    assemble_mode_system,
    validate,
)
from .triangular import solve_triangular

__version__ = "0.1.0"
