"""Exponential polynomials in time.

An :class:`ExpPoly` is a finite sum ``sum_j c_j * t**p_j * exp(q_j * t)`` with
complex ``c_j``, ``q_j`` and natural ``p_j``.  The set is closed under
addition, multiplication, differentiation and integration, and under the
integrating-factor solves of constant-coefficient linear ODEs, which is all
the mode recurrences need.

Trigonometric time functions are carried as conjugate rate pairs, e.g.
``cos(w t) = exp(iwt)/2 + exp(-iwt)/2``.
"""
from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels

#: A merged coefficient that cancels to at most this fraction of the largest
#: contribution merged into it is dropped.  Lone small coefficients are kept:
#: the triangular recurrences produce genuinely tiny but nonzero terms.
COEFF_TOL = 1e-14
#: Two rates closer than this (scaled by max(1, |q|)) are merged.
RATE_TOL = 1e-12
#: A source rate within this distance of a characteristic root is resonant.
RESONANCE_TOL = 1e-10

Term = tuple[complex, int, complex]


def _derivative_terms(terms: Iterable[Term], order: int) -> list[Term]:
    """Unmerged terms of the ``order``-th derivative (Leibniz on ``t^p e^{qt}``)."""
    out = []
    for c, p, q in terms:
        # d^h (t^p e^{qt}) = sum_j C(h, j) q^(h-j) p!/(p-j)! t^(p-j) e^{qt}
        falling = 1
        for j in range(min(order, p) + 1):
            if j:
                falling *= p - j + 1
            if q != 0 or j == order:
                out.append((c * math.comb(order, j) * q ** (order - j) * falling, p - j, q))
    return out


def _canonical(terms: Iterable[Term]) -> tuple[Term, ...]:
    raw = []
    for c, p, q in terms:
        p = int(p)
        if p < 0:
            raise ValueError(f"negative power {p}")
        c = complex(c)
        if c != 0:
            raw.append((p, complex(q), c))
    raw.sort(key=lambda r: (r[0], r[1].real, r[1].imag))

    merged: list[list] = []
    for p, q, c in raw:
        if merged:
            last = merged[-1]
            if last[0] == p and abs(last[1] - q) <= RATE_TOL * max(1.0, abs(q)):
                last[2] += c
                last[3] = max(last[3], abs(c))
                continue
        merged.append([p, q, c, abs(c)])

    out = [(c, p, q) for p, q, c, scale in merged if abs(c) > COEFF_TOL * scale]
    out.sort(key=lambda r: (r[2].real, r[2].imag, r[1]))
    return tuple(out)


@dataclass(frozen=True)
class ExpPoly:
    """Immutable exponential polynomial in canonical form.

    ``terms`` holds ``(coeff, power, rate)`` triples.  Construction always
    canonicalizes: equal ``(power, rate)`` pairs are merged, negligible
    coefficients dropped and the remaining terms ordered by
    ``(rate.real, rate.imag, power)``.
    """

    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _canonical(self.terms))

    # construction helpers

    @classmethod
    def constant(cls, c) -> ExpPoly:
        return cls(((c, 0, 0),))

    @classmethod
    def monomial(cls, c, power: int = 0, rate=0) -> ExpPoly:
        return cls(((c, power, rate),))

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> ExpPoly:
        """Polynomial in ``t`` from ascending coefficients."""
        return cls(tuple((c, p, 0) for p, c in enumerate(coeffs)))

    @classmethod
    def cos(cls, omega: float, amplitude=1.0) -> ExpPoly:
        return cls(((amplitude / 2, 0, 1j * omega), (amplitude / 2, 0, -1j * omega)))

    @classmethod
    def sin(cls, omega: float, amplitude=1.0) -> ExpPoly:
        return cls(((amplitude / 2j, 0, 1j * omega), (-amplitude / 2j, 0, -1j * omega)))

    @classmethod
    def from_quintuples(cls, rows: Iterable[Sequence[float]]) -> ExpPoly:
        return cls(tuple((complex(a, b), int(p), complex(c, d)) for a, b, p, c, d in rows))

    def to_quintuples(self) -> list[list]:
        # + 0.0 folds -0.0 into 0.0 so archives do not depend on sign-of-zero noise
        return [[c.real + 0.0, c.imag + 0.0, p, q.real + 0.0, q.imag + 0.0] for c, p, q in self.terms]

    # inspection

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self, tol: float = 0.0) -> bool:
        """No terms, or (with ``tol``) every coefficient at most ``tol``."""
        return all(abs(c) <= tol for c, _, _ in self.terms)

    def is_constant(self) -> bool:
        return all(p == 0 and q == 0 for _, p, q in self.terms)

    def constant_value(self) -> complex:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self.terms[0][0] if self.terms else 0j

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c, _, _ in self.terms), default=0.0)

    def at_zero(self) -> complex:
        return sum((c for c, p, _ in self.terms if p == 0), 0j)

    def isclose(self, other: ExpPoly, rtol: float = 1e-10, atol: float = COEFF_TOL) -> bool:
        """Canonical-form equality up to a coefficient tolerance."""
        scale = max(self.max_abs_coeff(), other.max_abs_coeff(), 0.0)
        return (self - other).is_zero(atol + rtol * scale)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = np.array([t[0] for t in self.terms], dtype=np.complex128)
        p = np.array([t[1] for t in self.terms], dtype=np.int64)
        q = np.array([t[2] for t in self.terms], dtype=np.complex128)
        return c, p, q

    def __call__(self, t):
        """Evaluate at scalar or array ``t`` (complex result)."""
        t_arr = np.asarray(t, dtype=np.float64)
        if not self.terms:
            out = np.zeros(t_arr.shape, dtype=np.complex128)
        else:
            c, p, q = self.arrays()
            out = kernels.exppoly_eval(c, p, q, t_arr.ravel()).reshape(t_arr.shape)
        return out[()] if out.ndim == 0 else out

    # algebra

    def __add__(self, other) -> ExpPoly:
        if not isinstance(other, ExpPoly):
            other = ExpPoly.constant(other)
        return ExpPoly(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self) -> ExpPoly:
        return ExpPoly(tuple((-c, p, q) for c, p, q in self.terms))

    def __sub__(self, other) -> ExpPoly:
        if not isinstance(other, ExpPoly):
            other = ExpPoly.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> ExpPoly:
        return (-self) + other

    def __mul__(self, other) -> ExpPoly:
        if isinstance(other, ExpPoly):
            return ExpPoly(
                tuple(
                    (c1 * c2, p1 + p2, q1 + q2)
                    for c1, p1, q1 in self.terms
                    for c2, p2, q2 in other.terms
                )
            )
        other = complex(other)
        return ExpPoly(tuple((c * other, p, q) for c, p, q in self.terms))

    __rmul__ = __mul__

    def __truediv__(self, other) -> ExpPoly:
        return self * (1 / complex(other))

    def conj(self) -> ExpPoly:
        """Complex conjugate as a function of real ``t``."""
        return ExpPoly(tuple((c.conjugate(), p, q.conjugate()) for c, p, q in self.terms))

    def shift_rate(self, r) -> ExpPoly:
        """Multiply by ``exp(r t)``."""
        return ExpPoly(tuple((c, p, q + r) for c, p, q in self.terms))

    def derivative(self, order: int = 1) -> ExpPoly:
        return ExpPoly(tuple(_derivative_terms(self.terms, order)))

    def integral(self) -> ExpPoly:
        """Antiderivative vanishing at ``t = 0``."""
        return integrate_from_zero(self)

    def __repr__(self) -> str:
        if not self.terms:
            return "ExpPoly(0)"
        parts = []
        for c, p, q in self.terms:
            s = f"({c:.6g})"
            if p:
                s += f"*t^{p}" if p > 1 else "*t"
            if q != 0:
                s += f"*exp(({q:.6g})t)"
            parts.append(s)
        return "ExpPoly(" + " + ".join(parts) + ")"


ZERO = ExpPoly()
ONE = ExpPoly.constant(1)


def add(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return a + b


def mul(a: ExpPoly, b: ExpPoly) -> ExpPoly:
    return a * b


def differentiate(a: ExpPoly) -> ExpPoly:
    return a.derivative()


# constant-coefficient linear ODE machinery


def _taylor_at(char: Sequence[complex], q: complex) -> list[complex]:
    """Taylor coefficients ``L^(j)(q)/j!`` of ``L(s) = sum_h char[h] s^h``."""
    order = len(char) - 1
    return [
        sum(char[h] * math.comb(h, j) * q ** (h - j) for h in range(j, order + 1))
        for j in range(order + 1)
    ]


def _particular(char: Sequence[complex], c: complex, p: int, q: complex, mult: int) -> ExpPoly:
    """Particular solution of ``L(D) y = c t^p e^{qt}``.

    ``mult`` is the multiplicity of ``q`` as a root of the characteristic
    polynomial, so the ansatz is ``e^{qt} * sum_{i=mult}^{p+mult} d_i t^i``.
    """
    beta = _taylor_at(char, q)
    for j in range(mult):
        beta[j] = 0j
    order = len(char) - 1
    d = [0j] * (p + mult + order + 1)
    for n in range(p, -1, -1):
        acc = c if n == p else 0j
        for j in range(mult + 1, order + 1):
            acc -= beta[j] * d[n + j] * math.perm(n + j, j)
        d[n + mult] = acc / (beta[mult] * math.perm(n + mult, mult))
    return ExpPoly(tuple((d[i], i, q) for i in range(mult, p + mult + 1)))


def _resonance(q: complex, roots: Sequence[complex]) -> tuple[int, complex | None]:
    hits = [r for r in roots if abs(q - r) < RESONANCE_TOL]
    return len(hits), (hits[0] if hits else None)


def integrate_from_zero(a: ExpPoly) -> ExpPoly:
    """Exact ``F(t) = int_0^t a(s) ds``."""
    return solve_first_order(0, a, 0)


def solve_first_order(rate, source: ExpPoly, initial) -> ExpPoly:
    """Solve ``T' + rate*T = source`` with ``T(0) = initial``.

    Equivalent to ``exp(-rate t) * (initial + int_0^t source(s) exp(rate s) ds)``
    but built from per-term particular solutions so that the source rates are
    carried through untouched.  A source rate within ``RESONANCE_TOL`` of
    ``-rate`` is treated as resonant and the homogeneous rate snaps to it.
    """
    rate = complex(rate)
    root = -rate
    char = (rate, 1)
    part = ZERO
    for c, p, q in source.terms:
        mult, hit = _resonance(q, (root,))
        if hit is not None:
            root = q
        part = part + _particular(char, c, p, q, mult)
    return part + ExpPoly.monomial(complex(initial) - part.at_zero(), 0, root)


def characteristic_roots(a, b) -> tuple[complex, complex]:
    """Roots of ``s^2 + a s + b``; equal roots are returned exactly equal."""
    a, b = complex(a), complex(b)
    disc = cmath.sqrt(a * a - 4 * b)
    # larger root without cancellation, the other from r1 * r2 = b
    big = (-a - disc) / 2 if abs(-a - disc) >= abs(-a + disc) else (-a + disc) / 2
    if big == 0:
        return 0j, 0j
    r1, r2 = b / big, big
    if (r1.real, r1.imag) < (r2.real, r2.imag):
        r1, r2 = r2, r1
    if abs(r1 - r2) < RESONANCE_TOL:
        r1 = r2 = -a / 2
    return r1, r2


def solve_second_order(a, b, source: ExpPoly, y0, y1) -> ExpPoly:
    """Solve ``T'' + a T' + b T = source`` with ``T(0) = y0, T'(0) = y1``.

    Resonant source terms get the ``t``-multiplied particular solution; a
    double characteristic root gives the ``(C1 + C2 t) e^{rt}`` homogeneous
    part.
    """
    a, b = complex(a), complex(b)
    r1, r2 = characteristic_roots(a, b)
    double = r1 == r2
    char = (b, a, 1)
    part = ZERO
    for c, p, q in source.terms:
        mult = 0
        if abs(q - r1) < RESONANCE_TOL:
            mult += 1
            r1 = q
            if double:
                mult += 1
                r2 = q
        if not double and abs(q - r2) < RESONANCE_TOL:
            mult += 1
            r2 = q
        part = part + _particular(char, c, p, q, mult)

    Y0 = complex(y0) - part.at_zero()
    Y1 = complex(y1) - part.derivative().at_zero()
    if double:
        hom = ExpPoly(((Y0, 0, r1), (Y1 - r1 * Y0, 1, r1)))
    else:
        c2 = (Y1 - r1 * Y0) / (r2 - r1)
        hom = ExpPoly(((Y0 - c2, 0, r1), (c2, 0, r2)))
    return part + hom


def total(polys: Iterable[ExpPoly]) -> ExpPoly:
    """Sum merged in one pass.

    Unlike chained ``+``, every coefficient is compared against all the
    contributions that cancelled into it, so a residual that vanishes up to
    rounding comes out as the zero ExpPoly.
    """
    return ExpPoly(tuple(term for poly in polys for term in poly.terms))


def linear_form(entries: Iterable[tuple[ExpPoly, ExpPoly, int]], source: ExpPoly | None = None) -> ExpPoly:
    """``sum coeff * f^(h) - source`` over ``(coeff, f, h)`` entries, merged in one pass.

    Derivatives and products are expanded into raw terms first, so each
    coefficient of the result is judged against every contribution that
    cancelled into it (see :func:`total`).
    """
    raw = [] if source is None else [(-c, p, q) for c, p, q in source.terms]
    for coeff, f, h in entries:
        d = _derivative_terms(f.terms, h)
        raw.extend((c1 * c2, p1 + p2, q1 + q2) for c1, p1, q1 in coeff.terms for c2, p2, q2 in d)
    return ExpPoly(tuple(raw))


def residual(coeffs: Sequence, solution: ExpPoly, source: ExpPoly) -> ExpPoly:
    """``sum_h coeffs[h] * solution^(h) - source`` as an ExpPoly."""
    return linear_form(((ExpPoly.constant(a), solution, h) for h, a in enumerate(coeffs) if a != 0), source)
