"""Integrality of hypergeometric monodromy.

The hypergeometric equation on ``{0, 1, inf}`` has monodromy in SL(2, C)
exactly when ``gamma`` and ``alpha + beta`` are integers, and in SL(2, Z) when
additionally ``k = exp(2 pi i alpha) + exp(2 pi i beta)`` is an integer. The
integral members form the two-parameter family ``alpha = -beta`` with
``exp(2 pi i alpha) = (k + sqrt(k^2 - 4)) / 2`` and ``gamma = l``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algebra2 import kernel_vector, inv2, is_scalar, log_branch
from .continuation import monodromy_of
from .equation import HypergeometricParams, RiemannEquation
from .representation import MonodromyRep, RepClass, classify, common_eigenvectors

EXACT_TOL = 1e-9
# parameters recovered from numerical monodromy
NUMERIC_TOL = 1e-6


def dist_to_integer(x: complex) -> float:
    x = complex(x)
    return abs(x - round(x.real))


def trace_at_infinity(h: HypergeometricParams) -> complex:
    """``exp(2 pi i alpha) + exp(2 pi i beta)``, the trace of the generator at infinity."""
    return cmath.exp(2j * math.pi * h.alpha) + cmath.exp(2j * math.pi * h.beta)


@dataclass(frozen=True)
class Sl2zVerdict:
    in_sl2c: bool
    in_sl2z: bool
    k: int | None
    b: complex
    k_distance: float
    conjugator: np.ndarray | None = None


@dataclass(frozen=True)
class FamilyMember:
    k: int
    l: int
    params: HypergeometricParams
    equation: RiemannEquation


def sl2c_condition(h: HypergeometricParams, tol: float = EXACT_TOL) -> bool:
    return dist_to_integer(h.gamma) <= tol and dist_to_integer(h.alpha + h.beta) <= tol


def sl2z_criterion(h: HypergeometricParams, tol: float = EXACT_TOL, conjugator: bool = True) -> Sl2zVerdict:
    """Decide SL(2, Z) membership; with ``conjugator`` also build an integer form numerically."""
    tr = trace_at_infinity(h)
    dist = dist_to_integer(tr)
    in_c = sl2c_condition(h, tol)
    in_z = in_c and dist <= tol
    k = round(tr.real) if in_z else None
    s = None
    if in_z and conjugator:
        s = numeric_integer_conjugator(h)
    return Sl2zVerdict(in_c, in_z, k, tr - 2, dist, s)


def _unipotent_param(g: np.ndarray, upper: bool, tol: float) -> complex:
    """Off-diagonal entry of ``[[1, c], [0, 1]]`` (or its transpose), shape-checked."""
    eye = np.eye(2)
    off = g[0, 1] if upper else g[1, 0]
    model = eye.astype(complex)
    if upper:
        model[0, 1] = off
    else:
        model[1, 0] = off
    if np.max(np.abs(g - model)) > tol * (1 + abs(off)):
        kind = "upper" if upper else "lower"
        raise ValueError(f"generator is not {kind} unipotent: {g.tolist()}")
    return complex(off)


def _rational_scale(c0: complex, c1: complex, tol: float) -> complex | None:
    """``t`` with ``c0 / t`` and ``c1 / t`` integers, for a rational ratio ``c1 / c0``."""
    if abs(c0) <= tol:
        c0, c1 = c1, c0
    if abs(c0) <= tol:
        return 1.0
    ratio = c1 / c0
    if abs(ratio.imag) > tol:
        return None
    frac = Fraction(ratio.real).limit_denominator(10_000)
    if abs(frac - ratio.real) > tol * (1 + abs(ratio.real)):
        return None
    return c0 / frac.denominator


def integer_conjugator(rep: MonodromyRep, tol: float = EXACT_TOL) -> np.ndarray | None:
    """``S`` with integer ``S G S^-1`` for a hypergeometric rep in triangular normal form.

    Reducible form: ``G0``, ``G1`` upper unipotent; ``S`` scales the
    off-diagonal entries to integers (``diag(1/c, 1)`` when ``G1 = I``).
    Irreducible form: ``G0 = [[1, 0], [d, 1]]``, ``G1 = [[1, c], [0, 1]]``;
    ``S = diag(d, 1)`` gives ``[[1, 0], [1, 1]]`` and ``[[1, cd], [0, 1]]``,
    which is integral iff ``b = cd`` is. ``None`` when no integer form exists.
    """
    g0, g1 = rep.G1, rep.G2
    lower0 = abs(g0[0, 1]) <= tol * (1 + abs(g0[1, 0]))
    if lower0 and abs(g0[1, 0]) > tol and abs(g1[1, 0]) <= tol:
        d = _unipotent_param(g0, upper=False, tol=tol)
        c = _unipotent_param(g1, upper=True, tol=tol)
        if abs(c) <= tol:
            raise ValueError("irreducible normal form needs a non-trivial G1")
        b = c * d
        if dist_to_integer(b) > tol:
            return None
        return np.diag([d, 1.0]).astype(complex)
    c0 = _unipotent_param(g0, upper=True, tol=tol)
    c1 = _unipotent_param(g1, upper=True, tol=tol)
    t = _rational_scale(c0, c1, tol)
    if t is None:
        return None
    return np.diag([1 / t, 1.0]).astype(complex)


def _fixed_vector(g: np.ndarray) -> np.ndarray:
    """Kernel of ``G - I``; avoids the square-root sensitivity of a Jordan block's eigenvectors."""
    return kernel_vector(g - np.eye(2))


def normal_form_basis(rep: MonodromyRep) -> np.ndarray:
    """``P`` with ``P G P^-1`` in the triangular normal form of :func:`integer_conjugator`."""
    g0, g1 = rep.G1, rep.G2
    if classify(rep).tag == RepClass.IRREDUCIBLE:
        # G1 fixes the first basis vector, G0 the second
        basis = np.column_stack([_fixed_vector(g1), _fixed_vector(g0)])
    else:
        common = common_eigenvectors(rep)
        v = np.array([1, 0], dtype=complex) if not common else common[0]
        w = np.array([-np.conj(v[1]), np.conj(v[0])])
        basis = np.column_stack([v, w])
    return inv2(basis)


def numeric_integer_conjugator(h: HypergeometricParams) -> np.ndarray | None:
    """Integer conjugator for the numerically continued monodromy of ``h``."""
    mono = monodromy_of(h.equation())
    rep = mono.to_rep()
    if all(is_scalar(g) for g in rep.generators):
        return np.eye(2, dtype=complex)
    p = normal_form_basis(rep)
    normal = rep.conjugated(p)
    s = integer_conjugator(normal, tol=NUMERIC_TOL)
    return None if s is None else s @ p


def family_alpha(k: int) -> complex:
    """``log((k + sqrt(k^2 - 4)) / 2) / (2 pi i)`` with arg in ``[0, 2 pi)``."""
    x = (k + cmath.sqrt(k * k - 4)) / 2
    return log_branch(x)


def enumerate_family(k: int, l: int) -> FamilyMember:
    alpha = family_alpha(k)
    params = HypergeometricParams(alpha, -alpha, l)
    return FamilyMember(int(k), int(l), params, params.equation())
