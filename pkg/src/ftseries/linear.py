"""Mode-by-mode solution of diagonal problems.

Constant-coefficient modes of order <= 2 are solved exactly as
:class:`~ftseries.exppoly.ExpPoly`; everything else goes through a fixed-step
RK4 backend with cubic Hermite dense output.  Problems with an algebraic
constraint and a Lagrange-multiplier unknown (the Stokes pressure) are
solved by eliminating the multiplier per mode.
"""
from __future__ import annotations

import os
import warnings
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .basis import BasisFamily, Index, order_key
from .errors import (
    DegenerateMode,
    ModeFailures,
    SolverError,
    StiffnessWarning,
    UnsupportedOrder,
    ValidationError,
)
from .exppoly import ExpPoly, solve_first_order, solve_second_order
from .problem import ModeSystem, ProblemSpec, Structure, assemble_mode_system, detect_structure, validate

STIFFNESS_THRESHOLD = 1e-6


@dataclass(frozen=True, eq=False)
class SampledTrajectory:
    """Values and first derivatives on the uniform grid ``t_i = i * t_end / steps``."""

    t_end: float
    values: np.ndarray
    derivs: np.ndarray
    error_estimate: float = 0.0

    @property
    def steps(self) -> int:
        return self.values.shape[0] - 1

    def at_zero(self) -> complex:
        return complex(self.values[0])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=np.float64)
        Y = self.values.reshape(-1, 1)
        dY = self.derivs.reshape(-1, 1)
        out = kernels.hermite(self.t_end, Y, dY, t_arr.ravel())[:, 0].reshape(t_arr.shape)
        return out[()] if out.ndim == 0 else out


TimeFunction = ExpPoly | SampledTrajectory


@dataclass(frozen=True, eq=False)
class SeriesSolution:
    """Truncated series ``u_q(x, t) = sum_k xi_k(x) T_qk(t)`` for every unknown."""

    basis: BasisFamily
    unknowns: tuple[str, ...]
    coefficients: tuple[Mapping[Index, TimeFunction], ...]
    eval_box: tuple[tuple[float, float], ...] = ()
    horizon: float = 1.0
    provenance: Mapping = field(default_factory=dict)

    def series(self, q: int | str) -> Mapping[Index, TimeFunction]:
        return self.coefficients[self._q(q)]

    def _q(self, q) -> int:
        return self.unknowns.index(q) if isinstance(q, str) else int(q)

    def _time_matrix(self, modes, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if not modes:
            return np.zeros((t.size, 0), dtype=np.complex128)
        return np.stack([np.asarray(modes[k](t), dtype=np.complex128) for k in modes], axis=1)

    def evaluate(self, q, x, t) -> np.ndarray:
        """Values at points ``x`` (shape ``(m, dim)`` or ``(m,)`` in 1-D) and times ``t``.

        Returns shape ``(len(t), m)``.
        """
        modes = self.series(q)
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1 and self.basis.dim == 1:
            x = x[:, None]
        x = np.atleast_2d(x)
        tm = self._time_matrix(modes, t)
        if not modes:
            return np.zeros((tm.shape[0], x.shape[0]), dtype=np.complex128)
        K = np.array(list(modes), dtype=np.int64)
        phi = np.ones((x.shape[0], K.shape[0]), dtype=np.complex128)
        for a in range(self.basis.dim):
            phi *= self.basis.axis_values(a, K[:, a], x[:, a])
        return tm @ phi.T

    def evaluate_grid(self, q, coords, t) -> np.ndarray:
        """Values on the tensor grid ``t x coords[0] x coords[1] ...``."""
        modes = self.series(q)
        coords = [np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in coords]
        tm = self._time_matrix(modes, t)
        shape = (tm.shape[0],) + tuple(c.size for c in coords)
        if not modes:
            return np.zeros(shape, dtype=np.complex128)
        K = np.array(list(modes), dtype=np.int64)
        letters = "abcdefghijklmnopqrs"[: self.basis.dim]
        operands = [tm] + [self.basis.axis_values(a, K[:, a], coords[a]) for a in range(self.basis.dim)]
        spec = "tz," + ",".join(f"{c}z" for c in letters) + "->t" + letters
        return np.einsum(spec, *operands)


# ---------------------------------------------------------------- data conversion


def _key(k) -> int:
    return int(k[0]) if isinstance(k, tuple) else int(k)


def convert_trig_to_complex(cos_coeffs: Mapping, sin_coeffs: Mapping) -> dict[Index, complex]:
    """Rewrite ``sum A_k cos(kwx) + sum B_k sin(kwx)`` over ``exp(ikwx)``, ``k`` in Z."""
    out: dict[Index, complex] = {}

    def put(k, v):
        out[(k,)] = out.get((k,), 0j) + v

    for k, a in cos_coeffs.items():
        k = _key(k)
        if k < 0:
            raise ValueError("cosine coefficients are indexed by naturals")
        if k == 0:
            put(0, complex(a))
        else:
            put(k, a / 2)
            put(-k, a / 2)
    for k, b in sin_coeffs.items():
        k = _key(k)
        if k < 1:
            raise ValueError("sine coefficients are indexed by positive naturals")
        put(k, b / 2j)
        put(-k, -b / 2j)
    return {k: v for k, v in out.items() if v != 0}


# ---------------------------------------------------------------- single modes


def _row_unknowns(ms: ModeSystem) -> dict[int, int]:
    """Map unknown -> row for decoupled systems, else raise UnsupportedOrder."""
    owner: dict[int, int] = {}
    for p, row in enumerate(ms.rows):
        qs = {e.unknown for e in row}
        if not qs:
            if ms.rhs(p).is_zero():
                continue
            raise DegenerateMode(f"mode {ms.index}: row {p + 1} is 0 = nonzero source")
        if len(qs) > 1:
            raise UnsupportedOrder(f"mode {ms.index}: row {p + 1} couples unknowns {sorted(qs)}")
        (q,) = qs
        if q in owner:
            raise UnsupportedOrder(f"mode {ms.index}: unknown {q + 1} appears in two rows")
        owner[q] = p
    return owner


def solve_mode_closed_form(ms: ModeSystem) -> dict[int, ExpPoly]:
    """Exact solution of a constant-coefficient, decoupled mode system of order <= 2."""
    if ms.constraints:
        raise UnsupportedOrder("constrained systems are solved by solve_stokes")
    owner = _row_unknowns(ms)
    out: dict[int, ExpPoly] = {}
    for q, m in enumerate(ms.orders):
        if q not in owner:
            if any(ms.initial.get((q, h), 0) != 0 for h in range(m)):
                raise DegenerateMode(f"mode {ms.index}: unknown {q + 1} has data but no equation")
            out[q] = ExpPoly()
            continue
        p = owner[q]
        coeffs: dict[int, complex] = {}
        for e in ms.rows[p]:
            if not e.coeff.is_constant():
                raise UnsupportedOrder(f"mode {ms.index}: time-dependent coefficient")
            coeffs[e.dt] = coeffs.get(e.dt, 0) + e.coeff.constant_value()
        order = max((h for h, c in coeffs.items() if c != 0), default=-1)
        if order > 2:
            raise UnsupportedOrder(f"mode {ms.index}: order {order} has no closed form")
        if order != m:
            raise DegenerateMode(
                f"mode {ms.index}: leading coefficient of d_t^{m} u_{q + 1} vanishes"
            )
        lead = coeffs[order]
        src = ms.rhs(p) / lead
        c0 = coeffs.get(0, 0) / lead
        c1 = coeffs.get(1, 0) / lead
        if order == 0:
            out[q] = src
        elif order == 1:
            out[q] = solve_first_order(c0, src, ms.initial[(q, 0)])
        else:
            out[q] = solve_second_order(c1, c0, src, ms.initial[(q, 0)], ms.initial[(q, 1)])
    return out


def _pack(ms: ModeSystem):
    orders = np.array(ms.orders, dtype=np.int64)
    if np.any(orders < 1):
        raise UnsupportedOrder(f"mode {ms.index}: numeric backend needs every unknown differentiated in time")
    offsets = np.concatenate(([0], np.cumsum(orders)[:-1])).astype(np.int64)
    S = int(orders.sum())
    tc, tp, tq = [], [], []
    ent_row, ent_col, ent_lo, ent_hi = [], [], [], []

    def push(poly: ExpPoly):
        lo = len(tc)
        for c, p, q in poly.terms:
            tc.append(c)
            tp.append(p)
            tq.append(q)
        return lo, len(tc)

    for p, row in enumerate(ms.rows):
        for e in row:
            col = S + e.unknown if e.dt == ms.orders[e.unknown] else offsets[e.unknown] + e.dt
            lo, hi = push(e.coeff)
            ent_row.append(p)
            ent_col.append(col)
            ent_lo.append(lo)
            ent_hi.append(hi)
    src_lo, src_hi = [], []
    for p in range(len(ms.rows)):
        lo, hi = push(ms.rhs(p))
        src_lo.append(lo)
        src_hi.append(hi)
    y0 = np.zeros(S, dtype=np.complex128)
    for q, m in enumerate(ms.orders):
        for h in range(m):
            y0[offsets[q] + h] = ms.initial.get((q, h), 0)
    ints = lambda v: np.array(v, dtype=np.int64)
    return (
        y0, orders, offsets, ints(ent_row), ints(ent_col), ints(ent_lo), ints(ent_hi),
        ints(src_lo), ints(src_hi),
        np.array(tc, dtype=np.complex128), ints(tp), np.array(tq, dtype=np.complex128),
    )


def solve_mode_numeric(ms: ModeSystem, steps: int = 1024, horizon: float = 1.0) -> dict[int, SampledTrajectory]:
    """Fixed-step RK4 on ``[0, horizon]`` with ``steps`` steps.

    The local error estimate compares against a run with half the steps
    (step doubling) and is stored on each trajectory; a
    :class:`StiffnessWarning` is issued above ``1e-6``.
    """
    if ms.constraints:
        raise UnsupportedOrder("constrained systems are solved by solve_stokes")
    if steps < 2 or steps % 2:
        raise ValueError("steps must be an even number >= 2")
    y0, orders, offsets, *rest = _pack(ms)
    if y0.size != int(orders.sum()) or len(ms.rows) != len(orders):
        raise UnsupportedOrder("row count must equal the number of unknowns")
    try:
        Y, dY = kernels.rk4_system(y0, float(horizon), steps, orders, offsets, *rest)
        Yc, _ = kernels.rk4_system(y0, float(horizon), steps // 2, orders, offsets, *rest)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMode(f"mode {ms.index}: singular leading coefficients") from exc
    if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(Yc))):
        raise SolverError(f"mode {ms.index}: numeric solution is not finite")
    err = float(np.max(np.abs(Y[::2] - Yc))) / 15.0
    if err > STIFFNESS_THRESHOLD:
        warnings.warn(
            f"mode {ms.index}: step-doubling error estimate {err:.2e} exceeds {STIFFNESS_THRESHOLD:g}",
            StiffnessWarning,
            stacklevel=2,
        )
    out = {}
    for q, o in enumerate(offsets):
        out[q] = SampledTrajectory(float(horizon), Y[:, o].copy(), dY[:, o].copy(), err)
    return out


def solve_mode(ms: ModeSystem, steps: int, horizon: float) -> tuple[dict[int, TimeFunction], str]:
    """Closed form where possible, numeric otherwise; returns (solution, backend)."""
    try:
        return solve_mode_closed_form(ms), "closed"
    except UnsupportedOrder:
        return solve_mode_numeric(ms, steps, horizon), "numeric"


# ---------------------------------------------------------------- constrained systems


def _eliminate(ms: ModeSystem) -> dict[int, ExpPoly]:
    """Solve a mode of ``T_j' + d T_j + g_j P = B_j``, ``sum c_j T_j = 0``.

    ``P`` is the unknown with time order 0.  Applying the constraint to the
    evolution rows gives ``P = sum c_j B_j / sum c_j g_j``; when the
    denominator vanishes ``P`` is fixed to 0 (gauge).
    """
    mult = [q for q, m in enumerate(ms.orders) if m == 0]
    if len(ms.constraints) != 1 or len(mult) != 1:
        raise UnsupportedOrder("elimination needs one constraint and one multiplier unknown")
    P = mult[0]
    velocity = [q for q in range(len(ms.orders)) if q != P]
    if any(ms.orders[q] != 1 for q in velocity):
        raise UnsupportedOrder("elimination needs first-order evolution rows")
    info = {}
    for p, row in enumerate(ms.rows):
        own = {e.unknown for e in row} - {P}
        if not row:
            continue
        if len(own) != 1:
            raise UnsupportedOrder(f"mode {ms.index}: row {p + 1} is not a single evolution row")
        (j,) = own
        a = d = g = 0j
        for e in row:
            if not e.coeff.is_constant():
                raise UnsupportedOrder("elimination needs constant coefficients")
            v = e.coeff.constant_value()
            if e.unknown == P:
                g += v
            elif e.dt == 1:
                a += v
            else:
                d += v
        if a == 0:
            raise DegenerateMode(f"mode {ms.index}: row {p + 1} has no time derivative")
        info[j] = (d / a, g / a, ms.rhs(p) / a)
    if set(info) != set(velocity):
        raise UnsupportedOrder("every evolution unknown needs its own row")
    rates = [info[j][0] for j in velocity]
    if any(abs(r - rates[0]) > 1e-12 * max(1.0, abs(rates[0])) for r in rates):
        raise UnsupportedOrder("evolution rows must share their decay rate")
    rate = rates[0]
    c = dict(ms.constraints[0])
    if P in c and c[P] != 0:
        raise UnsupportedOrder("the multiplier unknown may not enter the constraint")
    denom = sum(c.get(j, 0) * info[j][1] for j in velocity)
    numer = ExpPoly()
    for j in velocity:
        numer = numer + info[j][2] * c.get(j, 0)
    scale = max(abs(c.get(j, 0) * info[j][1]) for j in velocity)
    if abs(denom) <= 1e-14 * max(1.0, scale):
        if not numer.is_zero(1e-12):
            raise ValidationError(f"forcing at mode {ms.index} is incompatible with the constraint")
        pressure = ExpPoly()
    else:
        pressure = numer / denom
    out = {P: pressure}
    for j in velocity:
        _, g, src = info[j]
        out[j] = solve_first_order(rate, src - pressure * g, ms.initial[(j, 0)])
    return out


def _support(spec: ProblemSpec) -> list[Index]:
    ks = set()
    for m in spec.initial.values():
        ks |= {k for k, v in m.items() if v != 0}
    ks |= {k for (_, k), v in spec.forcing.items() if not v.is_zero()}
    return sorted((k for k in ks if sum(abs(c) for c in k) <= spec.truncation), key=order_key)


def _threads() -> int:
    raw = os.environ.get("FT_SERIES_THREADS")
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _spec_hash(spec: ProblemSpec) -> str:
    from .documents import spec_hash

    return spec_hash(spec)


def _finish(spec: ProblemSpec, results: dict, backends: dict) -> SeriesSolution:
    coeffs = tuple({} for _ in range(spec.n))
    for k in sorted(results, key=order_key):
        for q, T in results[k].items():
            if isinstance(T, ExpPoly) and T.is_zero():
                continue
            coeffs[q][k] = T
    return SeriesSolution(
        basis=spec.basis,
        unknowns=spec.unknowns,
        coefficients=coeffs,
        eval_box=spec.eval_box,
        horizon=spec.horizon,
        provenance={
            "name": spec.name,
            "spec_hash": _spec_hash(spec),
            "truncation": spec.truncation,
            "backend": {k: backends[k] for k in sorted(backends, key=order_key)},
        },
    )


def _run_modes(spec: ProblemSpec, solve_one) -> SeriesSolution:
    modes = _support(spec)
    failures: dict = {}
    results: dict = {}
    backends: dict = {}

    def task(k):
        ms = assemble_mode_system(spec, k)
        if ms.is_trivial():
            return k, None, None
        sol, backend = solve_one(ms)
        return k, sol, backend

    def collect(k, fut_or_val):
        try:
            k, sol, backend = fut_or_val()
        except (SolverError, ValidationError) as exc:
            failures[k] = exc
            return
        if sol is not None:
            results[k] = sol
            backends[k] = backend

    threads = min(_threads(), max(1, len(modes)))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {k: pool.submit(task, k) for k in modes}
            for k in modes:
                collect(k, futures[k].result)
    else:
        for k in modes:
            collect(k, lambda k=k: task(k))
    if failures:
        raise ModeFailures(failures)
    return _finish(spec, results, backends)


def solve_stokes(spec: ProblemSpec) -> SeriesSolution:
    """Constrained solve: per-mode pressure elimination, then integrating factors."""
    spec = validate(spec)
    if not spec.constraints:
        raise ValidationError("solve_stokes needs a constraint row")
    return _run_modes(spec, lambda ms: (_eliminate(ms), "closed"))


def solve_all(spec: ProblemSpec) -> SeriesSolution:
    """Solve every mode with ``|k| <= N``.

    Triangular problems are handed to
    :func:`ftseries.triangular.solve_triangular`, constrained ones to
    :func:`solve_stokes`.
    """
    spec = validate(spec)
    if detect_structure(spec) is Structure.TRIANGULAR:
        from .triangular import solve_triangular

        return solve_triangular(spec)
    if spec.constraints:
        return solve_stokes(spec)
    return _run_modes(spec, lambda ms: solve_mode(ms, spec.steps, spec.horizon))
