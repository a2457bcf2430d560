"""Exact-shape 2x2 complex matrix algebra.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype ``complex``.
Everything here is closed-form; no general n x n machinery is used.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# equal-eigenvalue threshold, relative to (1 + |l1| + |l2|)
EIG_MERGE_TOL = 1e-9
# rounding perturbs the discriminant by ~eps |M|^2, which splits a double
# eigenvalue by ~sqrt(eps) |M|; a discriminant this small counts as zero
DISC_MERGE_TOL = 1e-13
# scalar-matrix threshold, relative to (1 + max|G|)
SCALAR_TOL = 1e-9


def cmat2(entries) -> np.ndarray:
    """Coerce nested sequences (or a flat length-4 sequence) to a 2x2 complex array."""
    m = np.array(entries, dtype=complex)
    if m.shape == (4,):
        m = m.reshape(2, 2)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def det2(m: np.ndarray) -> complex:
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def inv2(m: np.ndarray) -> np.ndarray:
    d = det2(m)
    if d == 0:
        raise ValueError("singular matrix")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / d


def maxabs(m) -> float:
    return float(np.max(np.abs(m)))


def is_invertible(m: np.ndarray, tol: float = 1e-12) -> bool:
    scale = maxabs(m)
    return scale > 0 and abs(det2(m)) > tol * scale * scale


def is_scalar(m: np.ndarray, tol: float = SCALAR_TOL) -> bool:
    lam = (m[0, 0] + m[1, 1]) / 2
    return maxabs(m - lam * np.eye(2)) <= tol * (1.0 + maxabs(m))


def log_branch(lam: complex) -> complex:
    """``log(lam) / (2 pi i)`` with ``arg`` taken in ``[0, 2 pi)``.

    The real part of the result therefore lies in ``[0, 1)``.
    """
    if lam == 0:
        raise ValueError("logarithm of zero")
    a = math.atan2(lam.imag, lam.real)
    if a < 0:
        a += TWO_PI
    if a >= TWO_PI:
        a -= TWO_PI
    return complex(a / TWO_PI, -math.log(abs(lam)) / TWO_PI)


def _sort_key(z: complex):
    return (z.real, z.imag)


@dataclass(frozen=True)
class EigenData:
    eigenvalues: tuple[complex, complex]
    diagonalizable: bool
    # columns: eigenvectors when diagonalizable; (principal, generalized) otherwise
    eigenbasis: np.ndarray

    @property
    def repeated(self) -> bool:
        l1, l2 = self.eigenvalues
        return l1 == l2


def kernel_vector(n: np.ndarray) -> np.ndarray:
    """A unit vector spanning the kernel of a rank-one 2x2 matrix."""
    # rows (a, b) give kernel vectors (b, -a); pick the better-conditioned row
    r0 = np.array([n[0, 1], -n[0, 0]])
    r1 = np.array([n[1, 1], -n[1, 0]])
    v = r0 if np.linalg.norm(r0) >= np.linalg.norm(r1) else r1
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.array([1.0, 0.0], dtype=complex)
    return v / nv


def eig2(m: np.ndarray) -> EigenData:
    """Eigen-analysis of a 2x2 matrix from its characteristic polynomial.

    Eigenvalues are ordered by (real part, imaginary part). Scalar matrices are
    diagonalizable with the identity as eigenbasis.
    """
    m = np.asarray(m, dtype=complex)
    tr = complex(m[0, 0] + m[1, 1])
    dt = det2(m)
    disc = tr * tr - 4 * dt
    s = cmath.sqrt(disc)
    # larger-magnitude root first, the other from Vieta to avoid cancellation
    r1 = (tr + s) / 2 if abs(tr + s) >= abs(tr - s) else (tr - s) / 2
    r2 = dt / r1 if r1 != 0 else tr - r1
    l1, l2 = sorted((r1, r2), key=_sort_key)

    if (abs(l1 - l2) <= EIG_MERGE_TOL * (1 + abs(l1) + abs(l2))
            or abs(disc) <= DISC_MERGE_TOL * (1 + maxabs(m)) ** 2):
        lam = tr / 2
        nil = m - lam * np.eye(2)
        if maxabs(nil) <= SCALAR_TOL * (1 + maxabs(m)):
            return EigenData((lam, lam), True, np.eye(2, dtype=complex))
        # Jordan block: principal vector is the dominant column of N, N e_j = v
        j = int(np.argmax(np.linalg.norm(nil, axis=0)))
        v = nil[:, j].copy()
        w = np.zeros(2, dtype=complex)
        w[j] = 1.0
        return EigenData((lam, lam), False, np.column_stack([v, w]))

    basis = np.column_stack([kernel_vector(m - l1 * np.eye(2)), kernel_vector(m - l2 * np.eye(2))])
    return EigenData((l1, l2), True, basis)


@dataclass(frozen=True)
class NormalizedLog:
    E: np.ndarray
    rho: tuple[complex, complex]


def _log_divided_difference(l1: complex, l2: complex, f1: complex, f2: complex) -> complex:
    """(f1 - f2) / (l1 - l2) for f = log_branch, stable for nearby eigenvalues."""
    d = l1 - l2
    if abs(d) < 0.1 * max(abs(l1), abs(l2)):
        principal = 2 * cmath.atanh(d / (l1 + l2)) / (2j * math.pi)
        # same sheet of the branch: use the cancellation-free form
        if abs((f1 - f2) - principal) < 0.25:
            return principal / d
    return (f1 - f2) / d


def normalized_log(g: np.ndarray) -> NormalizedLog:
    """``E = log(G) / (2 pi i)`` whose eigenvalues have real part in ``[0, 1)``.

    Non-diagonalizable input uses ``log(l I + N) = log(l) I + N / l``.
    """
    g = np.asarray(g, dtype=complex)
    if not is_invertible(g):
        raise ValueError("normalized logarithm of a singular matrix")
    ed = eig2(g)
    l1, l2 = ed.eigenvalues
    eye = np.eye(2, dtype=complex)
    if l1 == l2:
        f = log_branch(l1)
        nil = g - l1 * eye
        if ed.diagonalizable:
            nil = np.zeros((2, 2), dtype=complex)
        e = f * eye + nil / (2j * math.pi * l1)
        return NormalizedLog(e, (f, f))
    f1, f2 = log_branch(l1), log_branch(l2)
    # Newton form: f(G) = f(l1) I + f[l1, l2] (G - l1 I)
    e = f1 * eye + _log_divided_difference(l1, l2, f1, f2) * (g - l1 * eye)
    return NormalizedLog(e, (f1, f2))


def conjugate(s: np.ndarray, m: np.ndarray) -> np.ndarray:
    """``S M S^-1``."""
    return s @ m @ inv2(s)


def _commutator_system(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of the linear map vec(S) -> vec(S A - B S) (row-major vec)."""
    eye = np.eye(2)
    return np.kron(eye, a.T) - np.kron(b, eye)


def conjugacy_residual(s: np.ndarray, pairs) -> float:
    """max_k |S A_k S^-1 - B_k|_max / (1 + |B_k|_max) over ``(A_k, B_k)`` pairs."""
    sinv = inv2(s)
    return max(maxabs(s @ a @ sinv - b) / (1.0 + maxabs(b)) for a, b in pairs)


def two_sided_residual(s: np.ndarray, pairs) -> float:
    """Conjugacy residual checked in both directions.

    A nearly singular ``S`` can squash an off-diagonal entry and make the
    forward residual small for non-conjugate pairs; the inverse direction then
    exposes it.
    """
    back = [(b, a) for a, b in pairs]
    return max(conjugacy_residual(s, pairs), conjugacy_residual(inv2(s), back))


# deterministic trial coefficients for picking an invertible element of a null space
_TRIALS = (
    (1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 0.0),
    (1.0, 0.6180339887j, 0.0, 0.0),
    (0.7071067812, -0.3090169944, 0.4142135624j, 0.0),
    (-0.2360679775j, 1.0, 0.5772156649, 0.3183098862),
    (0.5, 0.8660254038j, -0.7320508076, 1.0),
)


def simultaneous_conjugator(a1, a2, b1, b2, tol: float = 1e-8) -> np.ndarray | None:
    """Invertible S with ``S A_k S^-1 = B_k`` (k = 1, 2) within ``tol`` both ways, or None.

    Solves the stacked 8x4 system ``S A_k - B_k S = 0`` by SVD; singular values at
    or below ``tol`` times the largest define the (numerical) null space, whose
    elements are tested for invertibility and for the conjugacy residual.
    """
    a1, a2, b1, b2 = (np.asarray(x, dtype=complex) for x in (a1, a2, b1, b2))
    scale = max(maxabs(x) for x in (a1, a2, b1, b2))
    sys = np.vstack([_commutator_system(a1, b1), _commutator_system(a2, b2)]) / scale
    _, sv, vh = np.linalg.svd(sys)
    null = [vh[k].conj() for k in range(4) if sv[k] <= max(tol, 1e-14) * max(sv[0], 1.0)]
    if not null:
        return None
    pairs = ((a1, b1), (a2, b2))
    eye = np.eye(2, dtype=complex)
    if two_sided_residual(eye, pairs) <= tol:
        return eye
    best, best_res = None, math.inf
    for coeffs in _TRIALS:
        vec = sum(c * v for c, v in zip(coeffs, null))
        if not np.any(vec):
            continue
        s = np.asarray(vec, dtype=complex).reshape(2, 2)
        s = s / maxabs(s)
        if abs(det2(s)) <= 1e-6:
            continue
        res = two_sided_residual(s, pairs)
        if res < best_res:
            best, best_res = s, res
        if res <= tol:
            break
    if best is None or best_res > tol:
        return None
    return best
