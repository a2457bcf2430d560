"""Monodromy representations of the thrice-punctured sphere and their classification.

Generator convention: ``G_i`` is the monodromy along a loop winding once
counterclockwise around ``a_i``; generators are ordered so that
``G3 @ G2 @ G1 == I``.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field

import numpy as np

from .algebra2 import cmat2, det2, eig2, inv2, is_invertible, is_scalar, maxabs

INF = complex(float("inf"), 0.0)
POINT_SEPARATION = 1e-9
CONVENTION = "ccw loops, G3 @ G2 @ G1 = I"


def is_infinite(p: complex) -> bool:
    return cmath.isinf(p)


@dataclass(frozen=True)
class Divisor:
    """Three distinct points of the Riemann sphere; ``INF`` marks infinity."""

    points: tuple[complex, complex, complex]

    def __post_init__(self):
        pts = tuple(INF if is_infinite(complex(p)) else complex(p) for p in self.points)
        if len(pts) != 3:
            raise ValueError("a divisor has exactly three points")
        if sum(is_infinite(p) for p in pts) > 1:
            raise ValueError("at most one point may be infinite")
        finite = [p for p in pts if not is_infinite(p)]
        for i, p in enumerate(finite):
            if not cmath.isfinite(p):
                raise ValueError("divisor points must be finite numbers or INF")
            for q in finite[i + 1:]:
                if abs(p - q) <= POINT_SEPARATION:
                    raise ValueError(f"coincident divisor points {p} and {q}")
        object.__setattr__(self, "points", pts)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def infinity_index(self) -> int | None:
        for i, p in enumerate(self.points):
            if is_infinite(p):
                return i
        return None

    @property
    def finite_indices(self) -> tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.points) if not is_infinite(p))

    def index_of(self, point: complex, tol: float = 1e-9) -> int:
        point = complex(point)
        for i, p in enumerate(self.points):
            if is_infinite(p) and is_infinite(point):
                return i
            if not is_infinite(p) and not is_infinite(point) and abs(p - point) <= tol:
                return i
        raise ValueError(f"{point} is not a point of the divisor")


DEFAULT_DIVISOR = Divisor((-1.0, 1.0, INF))


@dataclass(frozen=True)
class MonodromyRep:
    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    divisor: Divisor = DEFAULT_DIVISOR
    convention: str = CONVENTION

    @property
    def generators(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.G1, self.G2, self.G3)

    def product_residual(self) -> float:
        return maxabs(self.G3 @ self.G2 @ self.G1 - np.eye(2))

    def conjugated(self, s: np.ndarray) -> "MonodromyRep":
        si = inv2(s)
        return MonodromyRep(*(s @ g @ si for g in self.generators), self.divisor, self.convention)


def make_rep(g1, g2, divisor: Divisor = DEFAULT_DIVISOR) -> MonodromyRep:
    """Representation from two generators; ``G3 = (G2 G1)^-1``."""
    g1, g2 = cmat2(g1), cmat2(g2)
    for g in (g1, g2):
        if not is_invertible(g):
            raise ValueError("monodromy generators must be invertible")
    return MonodromyRep(g1, g2, inv2(g2 @ g1), divisor)


def rep_from_triple(g1, g2, g3, divisor: Divisor = DEFAULT_DIVISOR, tol: float = 1e-10) -> MonodromyRep:
    """Representation from three generators, checking the product relation."""
    g1, g2, g3 = cmat2(g1), cmat2(g2), cmat2(g3)
    for g in (g1, g2, g3):
        if not is_invertible(g):
            raise ValueError("monodromy generators must be invertible")
    scale = 1.0 + maxabs(g1) * maxabs(g2) * maxabs(g3)
    if maxabs(g3 @ g2 @ g1 - np.eye(2)) > tol * scale:
        raise ValueError("generators violate G3 G2 G1 = I")
    return MonodromyRep(g1, g2, g3, divisor)


class Theorem(str, enum.Enum):
    """The four realizability results for rank-two representations."""

    IRREDUCIBLE = "irreducible-realization"
    DIAGONAL = "diagonal-needs-scalar-generator"
    DIAGONALIZABLE_POINT = "indecomposable-diagonalizable-point"
    JORDAN = "non-diagonalizable-obstruction"


@dataclass(frozen=True)
class RepClass:
    tag: str  # Irreducible | Decomposable | IndecomposableDiagonalizableAt | AllJordan
    indices: frozenset[int] = field(default_factory=frozenset)

    IRREDUCIBLE = "Irreducible"
    DECOMPOSABLE = "Decomposable"
    INDECOMPOSABLE = "IndecomposableDiagonalizableAt"
    ALL_JORDAN = "AllJordan"

    @property
    def scalar_indices(self) -> frozenset[int]:
        """1-based indices of scalar generators (Decomposable only)."""
        return self.indices if self.tag == self.DECOMPOSABLE else frozenset()


@dataclass(frozen=True)
class RealizabilityVerdict:
    realizable: bool
    theorem: Theorem
    detail: str


def _common_eigenvector(v: np.ndarray, m: np.ndarray, tol: float = 1e-9) -> bool:
    mv = m @ v
    wedge = abs(v[0] * mv[1] - v[1] * mv[0])
    return wedge <= tol * (np.linalg.norm(v) * np.linalg.norm(mv) + 1e-300) or np.linalg.norm(mv) == 0


def _eigenvectors(m: np.ndarray) -> list[np.ndarray] | None:
    """Eigenvectors of ``m`` (None for a scalar matrix: every vector qualifies)."""
    if is_scalar(m):
        return None
    ed = eig2(m)
    if ed.diagonalizable:
        return [ed.eigenbasis[:, 0], ed.eigenbasis[:, 1]]
    return [ed.eigenbasis[:, 0]]


def common_eigenvectors(rep: MonodromyRep) -> list[np.ndarray] | None:
    """Eigenvectors shared by all generators; None when all generators are scalar."""
    g1, g2, _ = rep.generators
    cand = _eigenvectors(g1)
    other = g2
    if cand is None:
        cand = _eigenvectors(g2)
        other = None
        if cand is None:
            return None
    if other is None:
        return cand
    return [v for v in cand if _common_eigenvector(v, other)]


def classify(rep: MonodromyRep) -> RepClass:
    gens = rep.generators
    scalars = frozenset(i + 1 for i, g in enumerate(gens) if is_scalar(g))
    common = common_eigenvectors(rep)
    if common is None:
        return RepClass(RepClass.DECOMPOSABLE, scalars)
    if not common:
        return RepClass(RepClass.IRREDUCIBLE)
    diag = frozenset(i + 1 for i, g in enumerate(gens) if eig2(g).diagonalizable)
    if len(diag) == 3 and len(common) == 2:
        basis = np.column_stack(common)
        if abs(det2(basis)) > 1e-9 and all(_common_eigenvector(v, g) for v in common for g in gens):
            return RepClass(RepClass.DECOMPOSABLE, scalars)
    if not diag:
        return RepClass(RepClass.ALL_JORDAN)
    return RepClass(RepClass.INDECOMPOSABLE, diag)


def verdict_for(cls: RepClass) -> RealizabilityVerdict:
    if cls.tag == RepClass.IRREDUCIBLE:
        return RealizabilityVerdict(True, Theorem.IRREDUCIBLE,
                                    "irreducible rank-two representations are always realizable")
    if cls.tag == RepClass.DECOMPOSABLE:
        if cls.scalar_indices:
            idx = ", ".join(f"G{i}" for i in sorted(cls.scalar_indices))
            return RealizabilityVerdict(True, Theorem.DIAGONAL, f"diagonal with scalar generator(s) {idx}")
        return RealizabilityVerdict(False, Theorem.DIAGONAL,
                                    "diagonal representation with no scalar generator")
    if cls.tag == RepClass.INDECOMPOSABLE:
        idx = ", ".join(f"G{i}" for i in sorted(cls.indices))
        return RealizabilityVerdict(True, Theorem.DIAGONALIZABLE_POINT,
                                    f"reducible, indecomposable, diagonalizable at {idx}")
    return RealizabilityVerdict(False, Theorem.JORDAN, "no generator is diagonalizable")


def is_realizable(rep: MonodromyRep) -> RealizabilityVerdict:
    return verdict_for(classify(rep))


def is_sl(rep: MonodromyRep, tol: float = 1e-9) -> bool:
    return all(abs(det2(g) - 1) <= tol for g in rep.generators)
