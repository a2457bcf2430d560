"""Oracles, random representation generators and the equation corpus used by the tests."""
from __future__ import annotations

import cmath
import math

import numpy as np

from riemann_monodromy.equation import ExponentTable, HypergeometricParams, build_equation
from riemann_monodromy.representation import DEFAULT_DIVISOR, INF, Divisor, MonodromyRep, make_rep

TAU = 2 * math.pi


def expm2(m, terms: int = 40) -> np.ndarray:
    """Matrix exponential by scaling and squaring a truncated Taylor series."""
    m = np.asarray(m, dtype=complex)
    norm = float(np.abs(m).sum(axis=1).max())
    k = int(math.ceil(math.log2(norm))) + 1 if norm > 0.5 else 0
    a = m / 2 ** k
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for n in range(1, terms):
        term = term @ a / n
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def random_invertible(rng, max_cond: float = 30.0) -> np.ndarray:
    while True:
        s = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if np.linalg.cond(s) < max_cond:
            return s


def _unit(theta: float) -> complex:
    return cmath.exp(1j * TAU * theta)


def _frac_ok(x: complex, margin: float) -> bool:
    """Fractional angle of ``x`` away from 0 (mod 1) by ``margin``."""
    t = (cmath.phase(x) / TAU) % 1.0
    return margin <= t <= 1 - margin


def irreducible_rep(rng, divisor: Divisor = DEFAULT_DIVISOR, margin: float = 0.05) -> MonodromyRep:
    """Eigenvalue ratios kept away from resonance and eigenvalue products from reducibility."""
    while True:
        mats = []
        for _ in range(2):
            a, b = rng.uniform(0.05, 0.95, size=2)
            s = random_invertible(rng)
            mats.append(s @ np.diag([_unit(a), _unit(b)]) @ np.linalg.inv(s))
        rep = make_rep(mats[0], mats[1], divisor)
        eigs = [np.linalg.eigvals(g) for g in rep.generators]
        # keeps imaginary parts of the exponents at G3 below about 0.1
        if any(abs(math.log(abs(x))) > 0.6 for e in eigs for x in e):
            continue
        if any(not _frac_ok(e[0] / e[1], margin) for e in eigs):
            continue
        if any(not _frac_ok(x, 0.02) for e in eigs for x in e):
            continue
        gap = min(abs(x * y * z - 1) for x in eigs[0] for y in eigs[1] for z in eigs[2])
        if gap < margin:
            continue
        return rep


def diagonal_rep(rng, divisor: Divisor = DEFAULT_DIVISOR, margin: float = 0.05) -> MonodromyRep:
    """Decomposable with no scalar generator, conjugated by a random matrix."""
    while True:
        th = rng.uniform(0.05, 0.95, size=4)
        d1 = np.diag([_unit(th[0]), _unit(th[1])])
        d2 = np.diag([_unit(th[2]), _unit(th[3])])
        d3 = np.linalg.inv(d2 @ d1)
        if any(not _frac_ok(d[0, 0] / d[1, 1], margin) for d in (d1, d2, d3)):
            continue
        s = random_invertible(rng)
        si = np.linalg.inv(s)
        return make_rep(s @ d1 @ si, s @ d2 @ si, divisor)


def scalar_diagonal_rep(rng, divisor: Divisor = DEFAULT_DIVISOR) -> MonodromyRep:
    """Decomposable with exactly one scalar generator (the third)."""
    while True:
        a, b, c = rng.uniform(0.05, 0.95, size=3)
        lam = _unit(c)
        d1 = np.diag([_unit(a), _unit(b)])
        if not _frac_ok(d1[0, 0] / d1[1, 1], 0.05):
            continue
        d2 = np.linalg.inv(lam * d1)
        s = random_invertible(rng)
        si = np.linalg.inv(s)
        return make_rep(s @ d1 @ si, s @ d2 @ si, divisor)


def jordan_rep(rng, divisor: Divisor = DEFAULT_DIVISOR) -> MonodromyRep:
    """All three generators non-diagonalizable with a common eigenvector."""
    while True:
        l1, l2 = _unit(rng.uniform()), _unit(rng.uniform())
        c1, c2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        if abs(l2 * c1 + l1 * c2) < 0.3 or min(abs(c1), abs(c2)) < 0.3:
            continue
        s = random_invertible(rng)
        si = np.linalg.inv(s)
        g1 = s @ np.array([[l1, c1], [0, l1]]) @ si
        g2 = s @ np.array([[l2, c2], [0, l2]]) @ si
        return make_rep(g1, g2, divisor)


def indecomposable_rep(rng, divisor: Divisor = DEFAULT_DIVISOR) -> MonodromyRep:
    """Common eigenvector, G1 diagonalizable, no common eigenbasis."""
    while True:
        th = rng.uniform(0.05, 0.95, size=4)
        x, y, u, v = (_unit(t) for t in th)
        c = rng.normal() + 1j * rng.normal()
        if abs(c) < 0.3 or not _frac_ok(x / y, 0.05) or not _frac_ok(u / v, 0.05):
            continue
        g1 = np.diag([x, y])
        g2 = np.array([[u, c], [0, v]])
        s = random_invertible(rng)
        si = np.linalg.inv(s)
        return make_rep(s @ g1 @ si, s @ g2 @ si, divisor)


def corpus() -> list[tuple[str, object]]:
    """Named equations used for engine self-consistency checks."""
    out = [
        ("golden", build_equation(DEFAULT_DIVISOR, ExponentTable(((2, -1), (-1, 2), (0, -1))))),
        ("q-zero", build_equation(Divisor((0, 1, 2)), ExponentTable(((0, 0.5), (0, 0.5), (0, 0))))),
        ("hyp-half", HypergeometricParams(0.5, -0.5, 1).equation()),
        ("hyp-third", HypergeometricParams(1 / 3, -1 / 3, 0).equation()),
        ("hyp-generic", HypergeometricParams(0.2, 0.45, 0.7).equation()),
        ("hyp-complex", HypergeometricParams(0.3 + 0.1j, -0.15, 0.6 - 0.05j).equation()),
    ]
    tables = [
        ((0.3, -0.6), (0.25, 0.9), (0.1, 0.05)),
        ((1.2, -0.4), (0.35 + 0.1j, -0.2), (0.45 - 0.1j, -0.4)),
        ((0.15, 0.55), (-0.7, 0.2), (0.6, 0.2)),
    ]
    divisors = [
        Divisor((-1, 1, INF)),
        Divisor((INF, 0.3 + 1j, -2)),
        Divisor((1j, 0, 3)),
        Divisor((2, 1, 0)),
        Divisor((0.5 - 0.5j, INF, -1 + 2j)),
    ]
    for k, d in enumerate(divisors):
        for j, t in enumerate(tables):
            if (k + j) % 2 == 0:
                out.append((f"table{j}-div{k}", build_equation(d, ExponentTable(t))))
    return out
