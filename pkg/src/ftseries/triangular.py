"""Sequential solve of problems whose modes feed strictly larger modes."""
from __future__ import annotations

from .basis import order_key
from .convolution import convolve, splittings
from .errors import TermLimitExceeded, UnsupportedOrder
from .exppoly import ZERO, ExpPoly, linear_form
from .linear import SeriesSolution, _finish, solve_mode_closed_form
from .problem import ProblemSpec, assemble_mode_system, validate

__all__ = ["convolve", "splittings", "solve_triangular", "MAX_TERMS"]

MAX_TERMS = 10_000


def solve_triangular(spec: ProblemSpec, max_terms: int = MAX_TERMS) -> SeriesSolution:
    """Solve every mode ``|k| <= N`` in topological order.

    Each mode sees the already solved smaller modes through index shifts,
    known-series products and quadratic Cauchy products; its own diagonal
    part must have constant coefficients and time order <= 2.  Zero modes
    are kept as zero entries while solving so that dependencies resolve,
    and dropped from the returned solution.
    """
    spec = validate(spec)
    solved: dict[int, dict] = {q: {} for q in range(spec.n)}
    results: dict = {}
    backends: dict = {}
    for k in sorted(spec.basis.ball(spec.truncation), key=order_key):
        ms = assemble_mode_system(spec, k, solved)
        if ms.is_trivial():
            for q in range(spec.n):
                solved[q][k] = ZERO
            continue
        try:
            sol = solve_mode_closed_form(ms)
        except UnsupportedOrder as exc:
            raise UnsupportedOrder(f"mode {k}: {exc}") from exc
        for q, T in sol.items():
            if len(T) > max_terms:
                raise TermLimitExceeded(f"mode {k} of unknown {q + 1} has {len(T)} terms (cap {max_terms})")
            solved[q][k] = T
        results[k] = sol
        backends[k] = "closed"
    return _finish(spec, results, backends)


def mode_residual(spec: ProblemSpec, solution: SeriesSolution, k) -> list[ExpPoly]:
    """Per-row residual of the assembled mode-``k`` ODE for a solved family."""
    spec = validate(spec)
    solved = {q: {} for q in range(spec.n)}
    for j in spec.basis.ball(spec.truncation):
        for q in range(spec.n):
            solved[q][j] = solution.coefficients[q].get(j, ZERO)
    ms = assemble_mode_system(spec, tuple(k), solved)
    k = tuple(k)
    return [
        linear_form(((e.coeff, solved[e.unknown][k], e.dt) for e in row), ms.rhs(p))
        for p, row in enumerate(ms.rows)
    ]
