"""Riemann equations ``y'' + p(z) y' + q(z) y = 0`` with three regular singular points.

An equation is fixed by its divisor and its table of six exponents. The
coefficients are stored as partial fractions over the finite divisor points::

    p(z) = sum_i P_i / (z - a_i)
    q(z) = sum_i A_i / (z - a_i)**2 + B_i / (z - a_i)

and are always derived from the exponents, never supplied directly.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .representation import INF, Divisor, is_infinite

FUCHS_TOL = 1e-9


def _c(x) -> complex:
    return complex(x)


def _is_integer(x: complex, tol: float = FUCHS_TOL) -> bool:
    return abs(x - round(x.real)) <= tol


@dataclass(frozen=True)
class ExponentTable:
    """Exponent pairs per divisor point, optionally split as integer + fractional part."""

    beta: tuple[tuple[complex, complex], tuple[complex, complex], tuple[complex, complex]]
    phi: tuple[tuple[int, int], ...] | None = None
    rho: tuple[tuple[complex, complex], ...] | None = None

    def __post_init__(self):
        beta = tuple((_c(a), _c(b)) for a, b in self.beta)
        if len(beta) != 3:
            raise ValueError("an exponent table has three rows")
        object.__setattr__(self, "beta", beta)
        if (self.phi is None) != (self.rho is None):
            raise ValueError("integer and fractional parts come together")
        if self.phi is not None:
            for (f1, f2), (r1, r2), (b1, b2) in zip(self.phi, self.rho, beta):
                if abs(f1 + r1 - b1) > 1e-12 * (1 + abs(b1)) or abs(f2 + r2 - b2) > 1e-12 * (1 + abs(b2)):
                    raise ValueError("beta must equal phi + rho")

    @classmethod
    def from_split(cls, phi, rho) -> "ExponentTable":
        phi = tuple((int(a), int(b)) for a, b in phi)
        rho = tuple((_c(a), _c(b)) for a, b in rho)
        beta = tuple((f1 + r1, f2 + r2) for (f1, f2), (r1, r2) in zip(phi, rho))
        return cls(beta, phi, rho)

    def __getitem__(self, i):
        return self.beta[i]

    def point_sum(self, i: int) -> complex:
        return self.beta[i][0] + self.beta[i][1]

    def shifted(self, shifts) -> "ExponentTable":
        """Add an integer ``shifts[i]`` to both exponents at point ``i``."""
        beta = tuple((b1 + s, b2 + s) for (b1, b2), s in zip(self.beta, shifts))
        if self.phi is None:
            return ExponentTable(beta)
        phi = tuple((f1 + s, f2 + s) for (f1, f2), s in zip(self.phi, shifts))
        return ExponentTable(beta, phi, self.rho)

    @property
    def resonant(self) -> bool:
        return any(_is_integer(b1 - b2) for b1, b2 in self.beta)


def fuchs_sum(t: ExponentTable) -> complex:
    return sum(b1 + b2 for b1, b2 in t.beta)


def satisfies_fuchs(t: ExponentTable, tol: float = FUCHS_TOL) -> bool:
    return abs(fuchs_sum(t) - 1) <= tol


@dataclass(frozen=True)
class HypergeometricParams:
    alpha: complex
    beta: complex
    gamma: complex

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def exponent_table(self) -> ExponentTable:
        a, b, g = self.alpha, self.beta, self.gamma
        return ExponentTable(((0, 1 - g), (0, g - a - b), (a, b)))

    def equation(self) -> "RiemannEquation":
        return build_equation(HYPERGEOMETRIC_DIVISOR, self.exponent_table())


HYPERGEOMETRIC_DIVISOR = Divisor((0.0, 1.0, INF))


def _pf_term(c: complex, poles: list[complex], double: int | None):
    """Partial fractions of ``c / prod_k (z - poles[k])^{m_k}``.

    ``m_k = 2`` for ``k == double`` and 1 otherwise. Returns per-pole
    ``(coefficient of 1/(z-a)^2, coefficient of 1/(z-a))``.
    """
    out = []
    for k, a in enumerate(poles):
        others = [b for j, b in enumerate(poles) if j != k]
        if k == double:
            g = c
            for b in others:
                g /= a - b
            out.append((g, -g * sum(1 / (a - b) for b in others)))
        else:
            g = c
            for j, b in enumerate(poles):
                if j != k:
                    g /= (a - b) ** (2 if j == double else 1)
            out.append((0j, g))
    return out


@dataclass(frozen=True)
class RiemannEquation:
    divisor: Divisor
    exponents: ExponentTable
    # per divisor index; zero at the infinite point
    P: tuple[complex, complex, complex]
    A: tuple[complex, complex, complex]
    B: tuple[complex, complex, complex]

    @property
    def form(self) -> str:
        return "finite" if self.divisor.infinity_index is None else "infinity"

    @property
    def resonant(self) -> bool:
        return self.exponents.resonant

    def _finite(self):
        return [(self.divisor[i], self.P[i], self.A[i], self.B[i]) for i in self.divisor.finite_indices]

    def p(self, z):
        """p(z); works elementwise on numpy arrays."""
        return sum(pi / (z - a) for a, pi, _, _ in self._finite())

    def q(self, z):
        total = 0
        for a, _, ai, bi in self._finite():
            w = 1 / (z - a)
            total = total + (ai * w + bi) * w
        return total

    def laurent_at_infinity(self) -> tuple[complex, complex, complex]:
        """``(p1, q1, q2)`` with p ~ p1/z and q ~ q1/z + q2/z^2 at infinity."""
        p1 = sum(pi for _, pi, _, _ in self._finite())
        q1 = sum(bi for _, _, _, bi in self._finite())
        q2 = sum(ai + bi * a for a, _, ai, bi in self._finite())
        return p1, q1, q2


def build_equation(divisor: Divisor, t: ExponentTable, tol: float = FUCHS_TOL) -> RiemannEquation:
    """Coefficients of the Riemann equation with divisor ``divisor`` and exponents ``t``."""
    if not isinstance(divisor, Divisor):
        divisor = Divisor(tuple(divisor))
    if not satisfies_fuchs(t, tol):
        raise ValueError(f"exponents violate the Fuchs relation: sum = {fuchs_sum(t)}, expected 1")
    stored = t
    defect = fuchs_sum(t) - 1
    if defect != 0:
        # spread a tolerated defect over all six exponents; left alone it lands
        # entirely in one point's indicial polynomial
        t = ExponentTable(tuple((b1 - defect / 6, b2 - defect / 6) for b1, b2 in t.beta))
    P = [0j, 0j, 0j]
    A = [0j, 0j, 0j]
    B = [0j, 0j, 0j]
    fin = list(divisor.finite_indices)
    inf = divisor.infinity_index
    for i in fin:
        P[i] = 1 - t.point_sum(i)

    def add(contrib):
        for i, (a2, b1) in zip(fin, contrib):
            A[i] += a2
            B[i] += b1

    poles = [divisor[i] for i in fin]
    prods = {i: t.beta[i][0] * t.beta[i][1] for i in range(3)}
    if inf is None:
        # sum_i b_i b_i' prod_{j!=i}(a_i - a_j) / ((z - a_i) prod_k (z - a_k))
        for k, i in enumerate(fin):
            c = prods[i]
            for j in fin:
                if j != i:
                    c *= divisor[i] - divisor[j]
            add(_pf_term(c, poles, k))
    else:
        (i1, i2) = fin
        a1, a2 = divisor[i1], divisor[i2]
        # [b1 b1' (a1-a2)/(z-a1) + b2 b2' (a2-a1)/(z-a2) + b3 b3'] / ((z-a1)(z-a2))
        add(_pf_term(prods[i1] * (a1 - a2), poles, 0))
        add(_pf_term(prods[i2] * (a2 - a1), poles, 1))
        add(_pf_term(prods[inf], poles, None))
    return RiemannEquation(divisor, stored, tuple(P), tuple(A), tuple(B))


def eval_normal_form(divisor: Divisor, t: ExponentTable, z: complex) -> tuple[complex, complex]:
    """(p(z), q(z)) straight from the closed-form rational expressions.

    Independent of the partial-fraction storage; used to cross-check it.
    """
    inf = divisor.infinity_index
    fin = divisor.finite_indices
    p = sum((1 - t.point_sum(i)) / (z - divisor[i]) for i in fin)
    if inf is None:
        prod_all = np.prod([z - divisor[i] for i in fin])
        q = 0
        for i in fin:
            num = t.beta[i][0] * t.beta[i][1]
            for j in fin:
                if j != i:
                    num *= divisor[i] - divisor[j]
            q += num / (z - divisor[i])
        q /= prod_all
    else:
        i1, i2 = fin
        a1, a2 = divisor[i1], divisor[i2]
        b = t.beta
        q = (b[i1][0] * b[i1][1] * (a1 - a2) / (z - a1)
             + b[i2][0] * b[i2][1] * (a2 - a1) / (z - a2)
             + b[inf][0] * b[inf][1]) / ((z - a1) * (z - a2))
    return complex(p), complex(q)


def _quadratic_roots(b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of x^2 + b x + c, ordered by (real, imag)."""
    s = cmath.sqrt(b * b - 4 * c)
    r1 = (-b + s) / 2 if abs(-b + s) >= abs(-b - s) else (-b - s) / 2
    r2 = c / r1 if r1 != 0 else -b - r1
    return tuple(sorted((r1, r2), key=lambda x: (x.real, x.imag)))


def indicial_exponents(eq: RiemannEquation, point) -> tuple[complex, complex]:
    """Roots of the indicial equation at a divisor point.

    Finite ``a``: ``b(b-1) + p_{-1} b + q_{-2} = 0``. Infinity, in the chart
    ``w = 1/z`` with ``p ~ p1/z``, ``q ~ q2/z^2``: ``b(b+1) - p1 b + q2 = 0``.
    """
    i = eq.divisor.index_of(point)
    if is_infinite(eq.divisor[i]):
        p1, q1, q2 = eq.laurent_at_infinity()
        if abs(q1) > 1e-9 * (1 + abs(q2)):
            raise ValueError("infinity is not a regular singular point")
        return _quadratic_roots(1 - p1, q2)
    return _quadratic_roots(eq.P[i] - 1, eq.A[i])


def singular_points(eq: RiemannEquation, tol: float = 1e-12) -> list[int]:
    """Indices of divisor points where the coefficients are genuinely singular."""
    out = []
    for i in eq.divisor.finite_indices:
        scale = 1 + max(abs(eq.P[j]) + abs(eq.A[j]) + abs(eq.B[j]) for j in eq.divisor.finite_indices)
        if max(abs(eq.P[i]), abs(eq.A[i]), abs(eq.B[i])) > tol * scale:
            out.append(i)
    inf = eq.divisor.infinity_index
    if inf is not None:
        p1, _, q2 = eq.laurent_at_infinity()
        q3 = sum(2 * eq.A[i] * eq.divisor[i] + eq.B[i] * eq.divisor[i] ** 2 for i in eq.divisor.finite_indices)
        if abs(p1 - 2) > tol or abs(q2) > tol or abs(q3) > tol * (1 + abs(q2)):
            out.append(inf)
    return sorted(out)


def is_rsl(eq: RiemannEquation, tol: float = FUCHS_TOL) -> bool:
    """True iff the first-derivative term vanishes identically."""
    no_p = all(abs(eq.P[i]) <= tol for i in eq.divisor.finite_indices)
    by_sums = eq.divisor.infinity_index is not None and all(
        abs(eq.exponents.point_sum(i) - 1) <= tol for i in eq.divisor.finite_indices)
    if no_p != by_sums:
        raise RuntimeError("p-coefficient and exponent sums disagree on the RSL form")
    return no_p


def mobius_relocate(eq: RiemannEquation, images) -> RiemannEquation:
    """Same exponents, divisor moved to ``images`` (point i goes to images[i])."""
    target = images if isinstance(images, Divisor) else Divisor(tuple(images))
    return build_equation(target, eq.exponents)


def integer_shear(eq: RiemannEquation, index: int, s: int, compensate: int | None = None) -> RiemannEquation:
    """Multiply solutions by ``((z - a_index)/(z - a_compensate))**s``.

    Exponents at ``a_index`` move by ``+s`` and at the compensating point by
    ``-s``; the multiplier is single-valued so the monodromy is unchanged. The
    compensating point defaults to infinity when present, otherwise the last
    other point.
    """
    if isinstance(s, bool) or int(s) != s:
        raise ValueError("shear amount must be an integer")
    s = int(s)
    if is_infinite(eq.divisor[index]):
        raise ValueError("shear point must be finite")
    if compensate is None:
        inf = eq.divisor.infinity_index
        compensate = inf if inf is not None else max(j for j in range(3) if j != index)
    if compensate == index:
        raise ValueError("compensating point must differ from the shear point")
    shifts = [0, 0, 0]
    shifts[index] += s
    shifts[compensate] -= s
    return build_equation(eq.divisor, eq.exponents.shifted(shifts))
