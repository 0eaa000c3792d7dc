"""Cauchy-product sums over index splittings in product-closed bases."""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from itertools import product

from .basis import INTEGERS, POSITIVE, BasisFamily, Index, SpatialTerm, apply_spatial_term, term_shift
from .errors import MissingDependency, NonTriangular
from .exppoly import ExpPoly, total


def _lowest(ax) -> int:
    return 1 if ax.index_set == POSITIVE else 0


def splittings(family: BasisFamily, k: Index, shift: Sequence[int]):
    """Pairs ``(r, s)`` of family indices with ``r + s + shift = k``."""
    if any(ax.index_set == INTEGERS for ax in family.axes):
        raise NonTriangular("convolutions need natural index sets on every axis")
    target = [kj - sj for kj, sj in zip(k, shift)]
    ranges = []
    for ax, tj in zip(family.axes, target):
        lo = _lowest(ax)
        ranges.append(range(lo, tj - lo + 1))
    for r in product(*ranges):
        yield tuple(r), tuple(tj - rj for tj, rj in zip(target, r))


def convolve(
    left: Mapping[Index, ExpPoly | complex],
    right: Mapping[Index, ExpPoly | complex],
    k: Index,
    family: BasisFamily,
    left_term: SpatialTerm | None = None,
    right_term: SpatialTerm | None = None,
    weight: complex = 1.0,
    skip_self: bool = True,
    left_complete: bool = False,
) -> ExpPoly:
    """``weight * sum m_L(r) m_R(s) left[r] right[s]`` over ``r + s + shifts = k``.

    ``m_L, m_R`` and the shifts come from the eigen-actions of ``left_term``
    and ``right_term`` (identity when ``None``).  Splittings where either
    factor sits at ``k`` itself are skipped when ``skip_self``: those belong
    to the diagonal part of mode ``k``.  A factor index absent from its map
    raises :class:`MissingDependency`; solved zero modes must be present as
    zero entries.  ``left_complete`` marks ``left`` as a known series whose
    absent indices are zero.
    """
    s_left = term_shift(family, left_term) if left_term is not None else (0,) * family.dim
    s_right = term_shift(family, right_term) if right_term is not None else (0,) * family.dim
    if any(v < 0 for v in s_left + s_right):
        raise NonTriangular("negative index shift inside a product")
    shift = tuple(a + b for a, b in zip(s_left, s_right))
    parts = []
    for r, s in splittings(family, tuple(k), shift):
        if skip_self and (r == tuple(k) or s == tuple(k)):
            continue
        ml = apply_spatial_term(family, left_term, r).multiplier if left_term is not None else 1.0
        mr = apply_spatial_term(family, right_term, s).multiplier if right_term is not None else 1.0
        c = weight * ml * mr
        if c == 0:
            continue
        if r not in left:
            if left_complete:
                continue
            raise MissingDependency(f"mode {r} needed by mode {tuple(k)} is not available")
        if s not in right:
            raise MissingDependency(f"mode {s} needed by mode {tuple(k)} is not available")
        a, b = left[r], right[s]
        if isinstance(a, ExpPoly) and isinstance(b, ExpPoly):
            prod = a * b
        elif isinstance(a, ExpPoly):
            prod = a * complex(b)
        elif isinstance(b, ExpPoly):
            prod = b * complex(a)
        else:
            prod = ExpPoly.constant(complex(a) * complex(b))
        parts.append(prod * c)
    return total(parts)
