"""Cauchy problems for systems of PDEs and their per-mode ODE systems.

A problem reads, row by row (``p = 0..n-1``)::

    sum_terms A(t) d_t^h [B(x) d_x^alpha u_q]
      + sum_quadratic w (L1 u_q1)(L2 u_q2)
      + sum_series    w c(x) d_t^h (L u_q)      = f_p(x, t)

with ``c(x) = sum_j c_j xi_j`` a known series, initial data
``d_t^h u_q(x, 0) = sum_k r_qhk xi_k`` for ``h < m_q``, and optional algebraic
constraints ``sum_q L_q u_q = 0``.  Rows and unknowns are 0-based here and
1-based in JSON documents.
"""
from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass, field, replace

from .basis import (
    BasisFamily,
    Index,
    SpatialTerm,
    apply_spatial_term,
    norm,
    term_shift,
)
from .convolution import convolve
from .errors import (
    MissingDependency,
    NonTriangular,
    NotRepresentable,
    ValidationError,
)
from .exppoly import ZERO, ExpPoly


@dataclass(frozen=True)
class OperatorTerm:
    """``A(t) d_t^dt [spatial u_unknown]`` in row ``row``; ``A`` is a polynomial."""

    row: int
    unknown: int
    dt: int
    spatial: SpatialTerm
    time_coeff: tuple[complex, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "time_coeff", tuple(complex(c) for c in self.time_coeff))

    @property
    def time_poly(self) -> ExpPoly:
        return ExpPoly.polynomial(self.time_coeff)


@dataclass(frozen=True)
class Factor:
    unknown: int
    spatial: SpatialTerm


@dataclass(frozen=True)
class QuadraticTerm:
    row: int
    left: Factor
    right: Factor
    weight: complex = 1.0


@dataclass(frozen=True)
class SeriesCoefficientTerm:
    """``weight * c(x) * d_t^dt [spatial u_unknown]`` with known ``c_j``."""

    row: int
    coefficients: Mapping[Index, complex]
    unknown: int
    spatial: SpatialTerm
    dt: int = 0
    weight: complex = 1.0


@dataclass(frozen=True)
class Constraint:
    """Algebraic row ``sum_terms spatial(u_unknown) = 0`` holding for all ``t``."""

    terms: tuple[Factor, ...]


@dataclass(frozen=True)
class ProblemSpec:
    basis: BasisFamily
    unknowns: tuple[str, ...]
    operator: tuple[OperatorTerm, ...]
    initial: Mapping[tuple[int, int], Mapping[Index, complex]]
    truncation: int
    horizon: float
    eval_box: tuple[tuple[float, float], ...]
    quadratic: tuple[QuadraticTerm, ...] = ()
    series_terms: tuple[SeriesCoefficientTerm, ...] = ()
    constraints: tuple[Constraint, ...] = ()
    forcing: Mapping[tuple[int, Index], ExpPoly] = field(default_factory=dict)
    steps: int = 1024
    name: str = ""
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for attr in ("unknowns", "operator", "quadratic", "series_terms", "constraints"):
            object.__setattr__(self, attr, tuple(getattr(self, attr)))
        object.__setattr__(self, "eval_box", tuple(tuple(map(float, b)) for b in self.eval_box))

    @property
    def n(self) -> int:
        return len(self.unknowns)

    @property
    def orders(self) -> tuple[int, ...]:
        """``m_q``: highest time-derivative order of each unknown."""
        m = [0] * self.n
        for term in self.operator:
            m[term.unknown] = max(m[term.unknown], term.dt)
        for term in self.series_terms:
            m[term.unknown] = max(m[term.unknown], term.dt)
        return tuple(m)

    def with_truncation(self, N: int) -> ProblemSpec:
        """Same problem with data restricted to ``|k| <= N``.

        Only narrows; builders re-expand initial data for larger ``N``.
        """
        init = {key: {k: v for k, v in m.items() if norm(k) <= N} for key, m in self.initial.items()}
        forcing = {key: v for key, v in self.forcing.items() if norm(key[1]) <= N}
        return replace(self, truncation=N, initial=init, forcing=forcing)


class Structure(enum.Enum):
    DIAGONAL = "diagonal"
    TRIANGULAR = "triangular"


@dataclass(frozen=True)
class RowEntry:
    unknown: int
    dt: int
    coeff: ExpPoly


@dataclass(frozen=True)
class ModeSystem:
    """Per-mode ODE Cauchy problem.

    Row ``p`` reads ``sum(entry.coeff * T_{entry.unknown}^{(entry.dt)}) = rhs(p)``
    where ``rhs(p)`` is the forcing coefficient plus the incoming
    contributions of smaller modes.
    """

    index: Index
    rows: tuple[tuple[RowEntry, ...], ...]
    sources: tuple[ExpPoly, ...]
    initial: Mapping[tuple[int, int], complex]
    orders: tuple[int, ...]
    incoming: tuple[tuple[int, str, ExpPoly], ...] = ()
    constraints: tuple[tuple[tuple[int, complex], ...], ...] = ()

    def rhs(self, p: int) -> ExpPoly:
        out = self.sources[p]
        for row, _, contrib in self.incoming:
            if row == p:
                out = out + contrib
        return out

    def is_trivial(self) -> bool:
        """No data and no sources: the mode solution is zero."""
        return (
            all(abs(v) == 0 for v in self.initial.values())
            and all(self.rhs(p).is_zero() for p in range(len(self.rows)))
        )


# ---------------------------------------------------------------- validation


def _probe_index(family: BasisFamily) -> Index:
    return tuple(1 if ax.index_set == "integers" else 2 for ax in family.axes)


def _check_term(family: BasisFamily, term: SpatialTerm, what: str) -> None:
    if len(term.derivative) != family.dim:
        raise ValidationError(f"{what}: derivative has {len(term.derivative)} axes, basis has {family.dim}")
    try:
        apply_spatial_term(family, term, _probe_index(family))
    except NotRepresentable as exc:
        raise ValidationError(f"{what}: NotRepresentable: {exc}") from exc


def validate(spec: ProblemSpec) -> ProblemSpec:
    """Check the invariants of ``spec``; returns it with absent initial orders filled by zero maps.

    Raises :class:`ValidationError` naming the first violated condition.
    """
    fam = spec.basis
    n = spec.n
    if n < 1:
        raise ValidationError("at least one unknown is required")
    if spec.truncation < 0:
        raise ValidationError("truncation must be >= 0")
    if not spec.horizon > 0:
        raise ValidationError("horizon must be positive")
    if spec.steps < 2:
        raise ValidationError("steps must be >= 2")
    if len(spec.eval_box) != fam.dim:
        raise ValidationError("eval_box needs one (min, max) pair per spatial axis")
    for lo, hi in spec.eval_box:
        if not lo < hi:
            raise ValidationError(f"empty eval_box interval ({lo}, {hi})")

    def check_rc(row, unknown, what):
        if not 0 <= row < n:
            raise ValidationError(f"{what}: row {row + 1} out of range")
        if not 0 <= unknown < n:
            raise ValidationError(f"{what}: unknown {unknown + 1} out of range")

    for i, t in enumerate(spec.operator):
        what = f"operator term {i + 1}"
        check_rc(t.row, t.unknown, what)
        if t.dt < 0:
            raise ValidationError(f"{what}: negative time-derivative order")
        _check_term(fam, t.spatial, what)
    for i, t in enumerate(spec.quadratic):
        what = f"quadratic term {i + 1}"
        check_rc(t.row, t.left.unknown, what)
        check_rc(t.row, t.right.unknown, what)
        if not fam.is_product_closed():
            raise ValidationError(f"{what}: NotClosed: basis is not closed under products")
        _check_term(fam, t.left.spatial, what)
        _check_term(fam, t.right.spatial, what)
    for i, t in enumerate(spec.series_terms):
        what = f"series-coefficient term {i + 1}"
        check_rc(t.row, t.unknown, what)
        if not fam.is_product_closed():
            raise ValidationError(f"{what}: NotClosed: basis is not closed under products")
        _check_term(fam, t.spatial, what)
        for k in t.coefficients:
            if not fam.contains(k):
                raise ValidationError(f"{what}: coefficient index {k} outside the index set")

    orders = spec.orders
    initial = {key: dict(m) for key, m in spec.initial.items()}
    for (q, h), m in initial.items():
        if not 0 <= q < n:
            raise ValidationError(f"initial data for unknown {q + 1} out of range")
        if not 0 <= h < orders[q]:
            raise ValidationError(
                f"initial data for d_t^{h} u_{q + 1} given, but its time order is {orders[q]}"
            )
        for k in m:
            if not fam.contains(k):
                raise ValidationError(f"initial coefficient index {k} outside the index set")
    for q in range(n):
        for h in range(orders[q]):
            initial.setdefault((q, h), {})
    for (p, k), _ in spec.forcing.items():
        if not 0 <= p < n:
            raise ValidationError(f"forcing row {p + 1} out of range")
        if not fam.contains(k):
            raise ValidationError(f"forcing index {k} outside the index set")

    for ci, con in enumerate(spec.constraints):
        what = f"constraint {ci + 1}"
        for f in con.terms:
            if not 0 <= f.unknown < n:
                raise ValidationError(f"{what}: unknown out of range")
            _check_term(fam, f.spatial, what)
            if any(term_shift(fam, f.spatial)):
                raise ValidationError(f"{what}: constraint terms must not shift indices")
        support = set()
        for f in con.terms:
            support |= set(initial.get((f.unknown, 0), {}))
        for k in sorted(support):
            total, scale = 0j, 0.0
            for f in con.terms:
                r = initial.get((f.unknown, 0), {}).get(k, 0)
                v = apply_spatial_term(fam, f.spatial, k).multiplier * r
                total += v
                scale = max(scale, abs(v))
            if abs(total) > 1e-12 * max(1.0, scale):
                raise ValidationError(f"{what} violated by the initial data at k={k}")
    return replace(spec, initial=initial)


def detect_structure(spec: ProblemSpec) -> Structure:
    if spec.quadratic or spec.series_terms:
        return Structure.TRIANGULAR
    for t in spec.operator:
        if any(term_shift(spec.basis, t.spatial)):
            return Structure.TRIANGULAR
    return Structure.DIAGONAL


# ---------------------------------------------------------------- assembly


def _lookup(solved, q: int, j: Index, k: Index) -> ExpPoly:
    if solved is None or j not in solved.get(q, {}):
        raise MissingDependency(f"mode {j} of unknown {q + 1} is needed by mode {k}")
    return solved[q][j]


def assemble_mode_system(
    spec: ProblemSpec,
    k: Index,
    solved: Mapping[int, Mapping[Index, ExpPoly]] | None = None,
) -> ModeSystem:
    """Build the ODE system for mode ``k``.

    ``solved[q][j]`` gives already solved modes, needed when index shifts,
    quadratic or series-coefficient terms couple ``k`` to smaller modes.
    Solved zero modes must be present (as zero) so that a genuinely
    missing dependency can be told apart.
    """
    fam = spec.basis
    k = fam.check_index(k)
    n = spec.n
    rows: list[dict[tuple[int, int], ExpPoly]] = [dict() for _ in range(n)]
    incoming: list[tuple[int, str, ExpPoly]] = []

    def add_entry(p, q, h, coeff: ExpPoly):
        key = (q, h)
        rows[p][key] = rows[p].get(key, ZERO) + coeff

    for i, t in enumerate(spec.operator):
        shift = term_shift(fam, t.spatial)
        if any(s < 0 for s in shift):
            raise NonTriangular(f"operator term {i + 1} shifts indices downwards by {shift}")
        if not any(shift):
            lam = apply_spatial_term(fam, t.spatial, k).multiplier
            if lam != 0:
                add_entry(t.row, t.unknown, t.dt, t.time_poly * lam)
            continue
        j = tuple(a - b for a, b in zip(k, shift))
        if not fam.contains(j):
            continue
        lam = apply_spatial_term(fam, t.spatial, j).multiplier
        if lam == 0:
            continue
        Tj = _lookup(solved, t.unknown, j, k).derivative(t.dt)
        incoming.append((t.row, f"operator term {i + 1} from mode {j}", -(t.time_poly * Tj * lam)))

    zero = (0,) * fam.dim
    for i, t in enumerate(spec.quadratic):
        sl = term_shift(fam, t.left.spatial)
        sr = term_shift(fam, t.right.spatial)
        if any(v < 0 for v in sl + sr):
            raise NonTriangular(f"quadratic term {i + 1} has a negative index shift")
        self_coupled = not any(sl + sr) and fam.contains(zero)
        if self_coupled:
            m_l = lambda idx: apply_spatial_term(fam, t.left.spatial, idx).multiplier
            m_r = lambda idx: apply_spatial_term(fam, t.right.spatial, idx).multiplier
            if k == zero:
                if t.weight * m_l(zero) * m_r(zero) != 0:
                    raise NonTriangular(f"quadratic term {i + 1} is nonlinear in mode {zero}")
            else:
                c = t.weight * m_l(k) * m_r(zero)
                if c != 0:
                    add_entry(t.row, t.left.unknown, 0, _lookup(solved, t.right.unknown, zero, k) * c)
                c = t.weight * m_l(zero) * m_r(k)
                if c != 0:
                    add_entry(t.row, t.right.unknown, 0, _lookup(solved, t.left.unknown, zero, k) * c)
        left = {} if solved is None else solved.get(t.left.unknown, {})
        right = {} if solved is None else solved.get(t.right.unknown, {})
        conv = convolve(left, right, k, fam, t.left.spatial, t.right.spatial, t.weight)
        if not conv.is_zero():
            incoming.append((t.row, f"quadratic term {i + 1}", -conv))

    for i, t in enumerate(spec.series_terms):
        s = term_shift(fam, t.spatial)
        if any(v < 0 for v in s):
            raise NonTriangular(f"series-coefficient term {i + 1} has a negative index shift")
        c0 = t.coefficients.get(zero, 0) if fam.contains(zero) else 0
        if c0 != 0 and not any(s):
            lam = apply_spatial_term(fam, t.spatial, k).multiplier
            if lam != 0:
                add_entry(t.row, t.unknown, t.dt, ExpPoly.constant(t.weight * c0 * lam))
        known = {j: v for j, v in t.coefficients.items()}
        mine = {} if solved is None else {
            j: T.derivative(t.dt) for j, T in solved.get(t.unknown, {}).items()
        }
        # c_0 * T_k sits on the diagonal above; c_k * T_0 and the rest are sources
        mine[k] = ZERO
        conv = convolve(known, mine, k, fam, None, t.spatial, t.weight,
                        skip_self=False, left_complete=True)
        if not conv.is_zero():
            incoming.append((t.row, f"series-coefficient term {i + 1}", -conv))

    orders = spec.orders
    initial = {}
    for q in range(n):
        for h in range(orders[q]):
            initial[(q, h)] = complex(spec.initial.get((q, h), {}).get(k, 0))

    constraints = []
    for con in spec.constraints:
        row = []
        for f in con.terms:
            lam = apply_spatial_term(fam, f.spatial, k).multiplier
            row.append((f.unknown, lam))
        constraints.append(tuple(row))

    sources = tuple(spec.forcing.get((p, k), ZERO) for p in range(n))
    built_rows = tuple(
        tuple(RowEntry(q, h, c) for (q, h), c in sorted(r.items()) if not c.is_zero())
        for r in rows
    )
    return ModeSystem(
        index=k,
        rows=built_rows,
        sources=sources,
        initial=initial,
        orders=orders,
        incoming=tuple(incoming),
        constraints=tuple(constraints),
    )
