"""Spatial basis families and how spatial operator terms act on them.

A family is a tensor product of one-dimensional factors.  With multi-index
``k`` the basis element is ``xi_k(x) = prod_j phi_j(k_j, x_j)`` where each
factor is one of

=====================  ==================================
``ComplexExponential``  ``exp(i * omega * k * x)``
``Sine``                ``sin(omega * k * x)``
``Cosine``              ``cos(omega * k * x)``
``RealExponential``     ``exp(rate * k * (x - shift))``
``Power``               ``(x - shift) ** (step * k)``
=====================  ==================================

A spatial term ``B(x) d^alpha`` acts on ``xi_k`` as ``multiplier * xi_{k+s}``
(an :class:`EigenAction`), where ``s`` is an index shift independent of
``k``.  Exponential and power factors are closed under products, so
``xi_a * xi_b = xi_{a+b}``; that closure is what makes the triangular
recurrences possible.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from itertools import product
from typing import Union

import numpy as np

from .errors import DomainError, NotClosed, NotRepresentable, QuadratureFailure

Index = tuple[int, ...]

NATURALS = "naturals"
POSITIVE = "positive"
INTEGERS = "integers"
_INDEX_SETS = (NATURALS, POSITIVE, INTEGERS)
_SHIFT_TOL = 1e-9


def _check_index_set(name: str) -> None:
    if name not in _INDEX_SETS:
        raise ValueError(f"index set must be one of {_INDEX_SETS}, got {name!r}")


def in_index_set(k: int, index_set: str) -> bool:
    if index_set == NATURALS:
        return k >= 0
    if index_set == POSITIVE:
        return k >= 1
    return True


def _as_integer(value: float, what: str) -> int:
    r = round(value)
    if abs(value - r) > _SHIFT_TOL:
        raise NotRepresentable(f"{what}: non-integer index shift {value:g}")
    return int(r)


# ---------------------------------------------------------------- axes


@dataclass(frozen=True)
class ComplexExponential:
    omega: float
    index_set: str = INTEGERS
    kind = "complex_exponential"

    def __post_init__(self):
        _check_index_set(self.index_set)

    def values(self, ks, x):
        return np.exp(1j * self.omega * np.multiply.outer(x, ks))

    def act(self, k, d, mults):
        if mults:
            raise NotRepresentable("complex exponential axes take constant multipliers only")
        return (1j * self.omega * k) ** d, 0


@dataclass(frozen=True)
class Sine:
    omega: float
    index_set: str = POSITIVE
    kind = "sine"

    def __post_init__(self):
        _check_index_set(self.index_set)

    def values(self, ks, x):
        return np.sin(self.omega * np.multiply.outer(x, ks)).astype(np.complex128)

    def act(self, k, d, mults):
        if mults:
            raise NotRepresentable("sine axes take constant multipliers only")
        if d % 2:
            raise NotRepresentable("odd derivative of a sine leaves the sine family")
        return (-1) ** (d // 2) * (self.omega * k) ** d, 0


@dataclass(frozen=True)
class Cosine:
    omega: float
    index_set: str = NATURALS
    kind = "cosine"

    def __post_init__(self):
        _check_index_set(self.index_set)

    def values(self, ks, x):
        return np.cos(self.omega * np.multiply.outer(x, ks)).astype(np.complex128)

    def act(self, k, d, mults):
        if mults:
            raise NotRepresentable("cosine axes take constant multipliers only")
        if d % 2:
            raise NotRepresentable("odd derivative of a cosine leaves the cosine family")
        return (-1) ** (d // 2) * (self.omega * k) ** d, 0


@dataclass(frozen=True)
class RealExponential:
    rate: float
    shift: float = 0.0
    index_set: str = NATURALS
    kind = "real_exponential"

    def __post_init__(self):
        _check_index_set(self.index_set)
        if self.rate == 0:
            raise ValueError("exponential rate must be nonzero")

    def values(self, ks, x):
        return np.exp(self.rate * np.multiply.outer(np.asarray(x) - self.shift, ks)).astype(
            np.complex128
        )

    def act(self, k, d, mults):
        factor = (self.rate * k) ** d
        s_total = 0.0
        for m in mults:
            if m.kind != "exp":
                raise NotRepresentable("exponential axes take exponential multipliers only")
            x0 = self.shift if m.shift is None else m.shift
            # exp(s(x - x0')) = exp(s(x - x0)) * exp(s(x0 - x0'))
            factor *= math.exp(m.exponent * (self.shift - x0))
            s_total += m.exponent
        return factor, _as_integer(s_total / self.rate, "exponential multiplier")


@dataclass(frozen=True)
class Power:
    step: float
    shift: float = 0.0
    index_set: str = NATURALS
    kind = "power"

    def __post_init__(self):
        _check_index_set(self.index_set)
        if self.step == 0:
            raise ValueError("power step must be nonzero")

    def values(self, ks, x):
        base = np.asarray(x, dtype=np.float64) - self.shift
        expo = self.step * np.asarray(ks, dtype=np.float64)
        integral = np.all(np.isclose(expo, np.round(expo), rtol=0, atol=1e-12))
        if np.any(base < 0) and not integral:
            raise DomainError("fractional power of a negative base")
        if np.any(base == 0) and np.any(expo < 0):
            raise DomainError("negative power at the singular point")
        if np.any(base < 0):
            return np.power.outer(base, np.round(expo)).astype(np.complex128)
        with np.errstate(divide="ignore"):
            return np.power.outer(base, expo).astype(np.complex128)

    def act(self, k, d, mults):
        e = self.step * k
        factor = 1.0
        for i in range(d):
            factor *= e - i
        s_total = 0.0
        for m in mults:
            if m.kind != "power":
                raise NotRepresentable("power axes take power multipliers only")
            if m.shift is not None and abs(m.shift - self.shift) > 1e-12:
                raise NotRepresentable("power multiplier centred away from the basis centre")
            s_total += m.exponent
        return factor, _as_integer((s_total - d) / self.step, "power multiplier")


Axis = Union[ComplexExponential, Sine, Cosine, RealExponential, Power]
_CLOSED = (ComplexExponential, RealExponential, Power)


@dataclass(frozen=True)
class BasisFamily:
    """Tensor-product basis; ``names`` label the spatial coordinates."""

    axes: tuple[Axis, ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("a basis needs at least one axis")
        if not self.names:
            names = ("x",) if len(self.axes) == 1 else tuple(f"x{j + 1}" for j in range(len(self.axes)))
            object.__setattr__(self, "names", names)
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.names) != len(self.axes):
            raise ValueError("one name per axis")

    @property
    def dim(self) -> int:
        return len(self.axes)

    def contains(self, k: Sequence[int]) -> bool:
        return len(k) == self.dim and all(
            in_index_set(int(kj), ax.index_set) for kj, ax in zip(k, self.axes)
        )

    def check_index(self, k: Sequence[int]) -> Index:
        k = tuple(int(v) for v in k)
        if len(k) != self.dim:
            raise ValueError(f"index {k} has dimension {len(k)}, basis has {self.dim}")
        if not self.contains(k):
            raise ValueError(f"index {k} is outside the declared index sets")
        return k

    def is_product_closed(self) -> bool:
        return all(isinstance(ax, _CLOSED) for ax in self.axes)

    def axis_values(self, axis: int, ks, x) -> np.ndarray:
        """Matrix ``[i, j] = phi_axis(ks[j], x[i])``."""
        return self.axes[axis].values(np.asarray(ks), np.asarray(x, dtype=np.float64))

    def ball(self, N: int) -> list[Index]:
        """All indices with ``|k| <= N`` in topological order."""
        ranges = []
        for ax in self.axes:
            lo = -N if ax.index_set == INTEGERS else (1 if ax.index_set == POSITIVE else 0)
            ranges.append(range(lo, N + 1))
        out = [k for k in product(*ranges) if norm(k) <= N]
        out.sort(key=order_key)
        return out


def norm(k: Sequence[int]) -> int:
    return sum(abs(v) for v in k)


def order_key(k: Sequence[int]):
    """Topological order for triangular solves: ``|k|``, then lexicographic."""
    return (norm(k), tuple(k))


# ---------------------------------------------------------------- spatial terms


@dataclass(frozen=True)
class Multiplier:
    """Factor ``(x_axis - shift)**exponent`` or ``exp(exponent*(x_axis - shift))``.

    ``shift=None`` means the centre of the basis axis.
    """

    axis: int
    kind: str
    exponent: float
    shift: float | None = None

    def __post_init__(self):
        if self.kind not in ("power", "exp"):
            raise ValueError(f"multiplier kind must be 'power' or 'exp', got {self.kind!r}")


@dataclass(frozen=True)
class SpatialTerm:
    """``coeff * prod(multipliers) * d^derivative`` acting on a scalar field."""

    derivative: tuple[int, ...]
    coeff: complex = 1.0
    multipliers: tuple[Multiplier, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "derivative", tuple(int(d) for d in self.derivative))
        object.__setattr__(self, "multipliers", tuple(self.multipliers))
        if any(d < 0 for d in self.derivative):
            raise ValueError("derivative orders must be natural numbers")

    @classmethod
    def identity(cls, dim: int) -> SpatialTerm:
        return cls((0,) * dim)

    def evaluate_multiplier(self, family: BasisFamily, x: Sequence[np.ndarray]) -> np.ndarray:
        """``B(x)`` on points given as per-axis coordinate arrays (broadcast)."""
        out = np.asarray(self.coeff, dtype=np.complex128)
        for m in self.multipliers:
            x0 = _axis_shift(family.axes[m.axis]) if m.shift is None else m.shift
            base = np.asarray(x[m.axis], dtype=np.float64) - x0
            if m.kind == "power":
                if np.any(base <= 0) and not float(m.exponent).is_integer():
                    raise DomainError("fractional power multiplier of a nonpositive base")
                out = out * base.astype(np.complex128) ** m.exponent
            else:
                out = out * np.exp(m.exponent * base)
        return out


def _axis_shift(ax: Axis) -> float:
    return getattr(ax, "shift", 0.0)


@dataclass(frozen=True)
class EigenAction:
    multiplier: complex
    shift: Index

    def target(self, k: Sequence[int]) -> Index:
        return tuple(a + b for a, b in zip(k, self.shift))


def eval_element(family: BasisFamily, k: Sequence[int], x) -> complex:
    """Value of ``xi_k`` at the point ``x`` (a scalar for 1-D bases)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    k = family.check_index(k)
    if x.size != family.dim:
        raise ValueError(f"point has {x.size} coordinates, basis has {family.dim}")
    val = 1.0 + 0j
    for j, ax in enumerate(family.axes):
        val *= complex(ax.values(np.array([k[j]]), np.array([x[j]]))[0, 0])
    return val


def apply_spatial_term(family: BasisFamily, term: SpatialTerm, k: Sequence[int]) -> EigenAction:
    """Action of ``term`` on ``xi_k`` as ``multiplier * xi_{k+shift}``.

    Raises :class:`NotRepresentable` when the image is not a multiple of a
    single basis element of the family.
    """
    k = tuple(int(v) for v in k)
    if len(term.derivative) != family.dim:
        raise ValueError("derivative multi-index does not match the basis dimension")
    for m in term.multipliers:
        if not 0 <= m.axis < family.dim:
            raise ValueError(f"multiplier axis {m.axis} out of range")
    mult = complex(term.coeff)
    shift = []
    for j, ax in enumerate(family.axes):
        mults = [m for m in term.multipliers if m.axis == j]
        f, s = ax.act(k[j], term.derivative[j], mults)
        mult *= f
        shift.append(s)
    action = EigenAction(mult, tuple(shift))
    if mult != 0 and not family.contains(action.target(k)):
        raise NotRepresentable(f"term maps index {k} to {action.target(k)}, outside the family")
    return action


def term_shift(family: BasisFamily, term: SpatialTerm) -> Index:
    """Index shift of ``term``; it does not depend on the index."""
    probe = tuple(2 if ax.index_set != INTEGERS else 1 for ax in family.axes)
    shift = []
    for j, ax in enumerate(family.axes):
        mults = [m for m in term.multipliers if m.axis == j]
        shift.append(ax.act(probe[j], term.derivative[j], mults)[1])
    return tuple(shift)


def multiply_indices(family: BasisFamily, k1: Sequence[int], k2: Sequence[int]) -> Index:
    """Index of ``xi_{k1} * xi_{k2}``."""
    for ax in family.axes:
        if not isinstance(ax, _CLOSED):
            raise NotClosed(f"{ax.kind} axes are not closed under products")
    k = tuple(int(a) + int(b) for a, b in zip(k1, k2))
    if len(k) != family.dim or len(k1) != len(k2):
        raise ValueError("index dimensions differ")
    return k


# ---------------------------------------------------------------- expansions


@dataclass(frozen=True)
class Explicit:
    coefficients: Mapping[Index, complex]


@dataclass(frozen=True)
class Generator:
    """Series of ``scale * f(xi_1)`` on one closed axis, in powers of ``xi_1``.

    ``f`` is one of ``geometric`` (``1/(1-z)``), ``cos``, ``sin``, ``exp`` or
    ``exp_minus_one``; the aliases in :data:`GENERATOR_ALIASES` additionally
    pin the axis kind.
    """

    name: str
    axis: int = 0
    scale: complex = 1.0


@dataclass(frozen=True)
class FourierSine:
    """Sine-series coefficients of ``function`` on ``[0, pi/omega]`` for one Sine axis."""

    function: Callable
    axis: int = 0
    scale: complex = 1.0
    tol: float = 1e-12


@dataclass(frozen=True)
class FourierCosine:
    function: Callable
    axis: int = 0
    scale: complex = 1.0
    tol: float = 1e-12


@dataclass(frozen=True)
class Product:
    """Outer product of one-dimensional expansions, one per axis."""

    factors: tuple
    scale: complex = 1.0


Expansion = Union[Explicit, Generator, FourierSine, FourierCosine, Product]

GENERATOR_ALIASES = {
    "cos_of_exponential": ("cos", RealExponential),
    "sin_of_exponential": ("sin", RealExponential),
    "exp_of_exponential_minus_one": ("exp_minus_one", RealExponential),
    "cos_of_power": ("cos", Power),
    "sin_of_power": ("sin", Power),
    "geometric": ("geometric", None),
}


def _generator_coeff(name: str, j: int) -> float:
    if name == "geometric":
        return 1.0
    if name == "exp":
        return 1.0 / math.factorial(j)
    if name == "exp_minus_one":
        return 0.0 if j == 0 else 1.0 / math.factorial(j)
    if name == "cos":
        return 0.0 if j % 2 else (-1) ** (j // 2) / math.factorial(j)
    if name == "sin":
        return (-1) ** ((j - 1) // 2) / math.factorial(j) if j % 2 else 0.0
    raise ValueError(f"unknown generator {name!r}")


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
                     max_intervals: int = 200_000) -> float:
    """Adaptive Simpson quadrature to absolute tolerance ``tol``."""

    def simpson(fa, fm, fb, h):
        return h / 6 * (fa + 4 * fm + fb)

    fa, fm, fb = f(a), f((a + b) / 2), f(b)
    stack = [(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol)]
    total = 0.0
    used = 1
    eps = np.finfo(float).eps
    while stack:
        lo, hi, flo, fmid, fhi, whole, tl = stack.pop()
        mid = (lo + hi) / 2
        fl, fr = f((lo + mid) / 2), f((mid + hi) / 2)
        left = simpson(flo, fl, fmid, mid - lo)
        right = simpson(fmid, fr, fhi, hi - mid)
        delta = left + right - whole
        if abs(delta) <= 15 * tl or abs(delta) <= 64 * eps * (abs(left) + abs(right)):
            total += left + right + delta / 15
            continue
        used += 1
        if used > max_intervals:
            raise QuadratureFailure(f"tolerance {tol:g} not reached within {max_intervals} intervals")
        stack.append((lo, mid, flo, fl, fmid, left, tl / 2))
        stack.append((mid, hi, fmid, fr, fhi, right, tl / 2))
    return total


def _expand_1d(desc, family: BasisFamily, N: int) -> dict[int, complex]:
    """Coefficients on one axis, keyed by the axis index component."""
    ax = family.axes[desc.axis]
    lo = -N if ax.index_set == INTEGERS else (1 if ax.index_set == POSITIVE else 0)
    ks = [k for k in range(lo, N + 1)]
    out: dict[int, complex] = {}
    if isinstance(desc, Generator):
        name, need = GENERATOR_ALIASES.get(desc.name, (desc.name, None))
        if need is not None and not isinstance(ax, need):
            raise ValueError(f"generator {desc.name!r} needs a {need.kind} axis, got {ax.kind}")
        if not isinstance(ax, _CLOSED):
            raise ValueError(f"generators need a product-closed axis, got {ax.kind}")
        for j in range(0, N + 1):
            c = _generator_coeff(name, j) * desc.scale
            if c == 0:
                continue
            if not in_index_set(j, ax.index_set):
                raise ValueError(f"generator term {j} is outside the axis index set")
            out[j] = complex(c)
        return out
    if isinstance(desc, (FourierSine, FourierCosine)):
        want = Sine if isinstance(desc, FourierSine) else Cosine
        if not isinstance(ax, want):
            raise ValueError(f"{type(desc).__name__} needs a {want.kind} axis, got {ax.kind}")
        L = math.pi / ax.omega
        trig = math.sin if want is Sine else math.cos
        for k in ks:
            if k < 0:
                continue
            g = lambda x, k=k: float(desc.function(x)) * trig(ax.omega * k * x)
            val = adaptive_simpson(g, 0.0, L, tol=desc.tol)
            weight = 1 / L if (want is Cosine and k == 0) else 2 / L
            c = weight * val * desc.scale
            if c != 0 and in_index_set(k, ax.index_set):
                out[k] = complex(c)
        return out
    raise TypeError(f"not a one-dimensional expansion: {desc!r}")


def expand_initial_data(desc: Expansion, N: int, family: BasisFamily) -> dict[Index, complex]:
    """Coefficients ``r_k`` with ``|k| <= N`` of an expansion descriptor."""
    if isinstance(desc, Explicit):
        out = {}
        for k, v in desc.coefficients.items():
            k = (k,) if isinstance(k, (int, np.integer)) else tuple(k)
            k = family.check_index(k)
            if norm(k) <= N and complex(v) != 0:
                out[k] = complex(v)
        return out
    if isinstance(desc, Product):
        if len(desc.factors) != family.dim:
            raise ValueError("product expansions need one factor per axis")
        per_axis = []
        for j, fac in enumerate(desc.factors):
            if fac.axis != j:
                fac = type(fac)(**{**fac.__dict__, "axis": j})
            per_axis.append(_expand_1d(fac, family, N))
        out = {}
        for combo in product(*(sorted(m.items()) for m in per_axis)):
            k = tuple(kj for kj, _ in combo)
            if norm(k) > N:
                continue
            v = complex(desc.scale)
            for _, c in combo:
                v *= c
            if v != 0:
                out[k] = v
        return out
    if family.dim != 1:
        raise ValueError("multi-dimensional bases need Explicit or Product expansions")
    return {(k,): v for k, v in _expand_1d(desc, family, N).items() if abs(k) <= N}
