"""Numerical analytic continuation along loops of the punctured sphere.

The companion system ``Y' = A(z) Y`` with ``A = [[0, 1], [-q, -p]]`` is
integrated along paths ``z(t)``, ``t in [0, 1]``, by an adaptive Dormand-Prince
5(4) pair. The state is the fundamental matrix ``Y`` (rows: value, derivative;
columns: solutions) started from the identity, so the final state is the
transfer matrix of the path.

Continuing the basis ``Y`` along a loop yields ``Y @ M``; following loop
``g1`` and then ``g2`` yields ``Y @ M2 @ M1``. Loops are arranged so that
``G3 @ G2 @ G1 = I``.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra2 import inv2, maxabs
from .equation import RiemannEquation
from .representation import Divisor, MonodromyRep, is_infinite

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
H_MIN = 1e-12
H_MAX = 0.1
SAFETY = 0.9
# per-step error target as a fraction of the requested tol, so that the
# accumulated error over a loop stays near tol times the solution size
LOCAL_TOL_FACTOR = 0.1


class IntegrationError(RuntimeError):
    """Step-size underflow or a non-finite state during continuation."""


@dataclass(frozen=True)
class Segment:
    z0: complex
    z1: complex

    def at(self, t):
        return self.z0 + t * (self.z1 - self.z0), self.z1 - self.z0

    def sample(self, n: int = 16) -> list[complex]:
        return [self.z0 + k / n * (self.z1 - self.z0) for k in range(n + 1)]

    def reversed(self) -> "Segment":
        return Segment(self.z1, self.z0)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    theta0: float
    sweep: float

    def at(self, t):
        e = self.radius * cmath.exp(1j * (self.theta0 + t * self.sweep))
        return self.center + e, 1j * self.sweep * e

    def sample(self, n: int = 64) -> list[complex]:
        return [self.at(k / n)[0] for k in range(n + 1)]

    @property
    def start(self) -> complex:
        return self.at(0.0)[0]


@dataclass(frozen=True)
class Loop:
    """Lasso around one finite divisor point: tail out, full ccw circle, tail back."""

    index: int
    tail: Segment
    circle: Arc

    def pieces(self) -> list:
        return [self.tail, self.circle, self.tail.reversed()]


@dataclass(frozen=True)
class PathPlan:
    divisor: Divisor
    base: complex
    loops: tuple[Loop, ...]  # one per finite point, in divisor order
    order: tuple[int, ...]  # divisor indices in the order the relation multiplies them
    chart_center: complex | None  # centre of the w = 1/(z - c) chart for infinity

    def loop(self, index: int) -> Loop:
        for lp in self.loops:
            if lp.index == index:
                return lp
        raise KeyError(index)

    def min_clearance(self) -> float:
        """Smallest distance from any path point to a divisor point it should avoid."""
        worst = math.inf
        finite = self.divisor.finite_indices
        for lp in self.loops:
            for j in finite:
                if j == lp.index:
                    continue
                worst = min(worst, _dist_to_segment(self.divisor[j], lp.tail.z0, lp.tail.z1))
                worst = min(worst, abs(self.divisor[j] - lp.circle.center) - lp.circle.radius)
        return worst


def _dist_to_segment(p: complex, a: complex, b: complex) -> float:
    d = b - a
    t = ((p - a) * d.conjugate()).real / (abs(d) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _largest_gap_order(base: complex, points: dict[int, complex]) -> tuple[tuple[int, ...], float, float]:
    """Indices sorted ccw by direction seen from ``base``, starting after the largest gap.

    Returns the order, the gap width and the bisecting direction of the gap.
    """
    ang = sorted((cmath.phase(a - base), i) for i, a in points.items())
    n = len(ang)
    best, start = -1.0, 0
    for k in range(n):
        nxt = ang[(k + 1) % n][0] + (2 * math.pi if k + 1 == n else 0.0)
        gap = nxt - ang[k][0]
        if gap > best:
            best, start = gap, (k + 1) % n
    order = tuple(ang[(start + k) % n][1] for k in range(n))
    mid = ang[(start - 1) % n][0] + best / 2
    return order, best, mid


def _build_plan(divisor: Divisor, base: complex) -> PathPlan:
    finite = {i: divisor[i] for i in divisor.finite_indices}
    radii = {}
    for i, a in finite.items():
        dists = [abs(a - b) for j, b in finite.items() if j != i] + [abs(a - base)]
        radii[i] = min(dists) / 3.0
    loops = []
    for i, a in finite.items():
        u = (base - a) / abs(base - a)
        start = a + radii[i] * u
        loops.append(Loop(i, Segment(base, start), Arc(a, radii[i], cmath.phase(u), 2 * math.pi)))
    order, gap, mid = _largest_gap_order(base, finite)
    inf = divisor.infinity_index
    if inf is not None:
        order = order + (inf,)
    chart = None
    if gap > math.pi + 1e-9:
        # centre on the inward side so that every finite point lies inside the
        # circle about the centre through the base point
        o = cmath.exp(1j * mid)
        need = 0.0
        for a in finite.values():
            along = (a - base) * o.conjugate()
            need = max(need, abs(a - base) ** 2 / (-2 * along.real))
        chart = base - 2.0 * max(need, 1e-3) * o
    return PathPlan(divisor, base, tuple(loops), order, chart)


def _plan_ok(plan: PathPlan) -> bool:
    for lp in plan.loops:
        for j in plan.divisor.finite_indices:
            if j != lp.index:
                r_j = plan.loop(j).circle.radius
                if _dist_to_segment(plan.divisor[j], lp.tail.z0, lp.tail.z1) < 1.5 * r_j:
                    return False
    return True


def plan_loops(divisor: Divisor, base: complex | None = None) -> PathPlan:
    """Deterministic loop system for ``divisor``.

    The default base sits above the centroid of the finite points at 1.5 times
    their diameter; loop radii are a third of the distance to the nearest other
    finite point or the base. A caller-supplied base that coincides with a
    divisor point, or whose tails would graze another point, is replaced by the
    default.
    """
    finite = [divisor[i] for i in divisor.finite_indices]
    centroid = sum(finite) / len(finite)
    spread = max(abs(a - b) for a in finite for b in finite)
    if base is not None:
        base = complex(base)
        if min(abs(base - a) for a in finite) > 1e-9 * (1 + spread):
            plan = _build_plan(divisor, base)
            if _plan_ok(plan):
                return plan
        log.warning("base point %s rejected; using the default base", base)
    for k in range(64):
        # 0, +1, -1, +2, -2, ... quarter-diameter shifts along the real axis
        shift = ((k + 1) // 2) * (1 if k % 2 else -1) * 0.25 * spread
        plan = _build_plan(divisor, centroid + shift + 1.5j * spread)
        if _plan_ok(plan):
            return plan
    raise RuntimeError("could not place a base point")  # pragma: no cover


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class Coefficients:
    """Evaluates (p, q) for one equation or a batch sharing a divisor."""

    def __init__(self, poles, P, A, B):
        self.terms = [(a, P[k], A[k], B[k]) for k, a in enumerate(poles)]

    @classmethod
    def of(cls, eq: RiemannEquation) -> "Coefficients":
        fin = eq.divisor.finite_indices
        return cls([eq.divisor[i] for i in fin], [eq.P[i] for i in fin],
                   [eq.A[i] for i in fin], [eq.B[i] for i in fin])

    @classmethod
    def batch(cls, eqs: list[RiemannEquation]) -> "Coefficients":
        div = eqs[0].divisor
        fin = div.finite_indices
        return cls([div[i] for i in fin],
                   [np.array([e.P[i] for e in eqs]) for i in fin],
                   [np.array([e.A[i] for e in eqs]) for i in fin],
                   [np.array([e.B[i] for e in eqs]) for i in fin])

    def __call__(self, z):
        p = 0
        q = 0
        for a, pk, ak, bk in self.terms:
            w = 1 / (z - a)
            p = p + pk * w
            q = q + (ak * w + bk) * w
        return p, q


class InfinityChart:
    """(p, q) of the equation rewritten in ``w = 1/(z - c)``."""

    def __init__(self, coef: Coefficients, center: complex):
        self.coef = coef
        self.center = center

    def __call__(self, w):
        z = self.center + 1 / w
        p, q = self.coef(z)
        w2 = w * w
        return 2 / w - p / w2, q / (w2 * w2)


def _err_ratio(err, y, ynew, tol):
    if isinstance(err, np.ndarray):
        emax = np.max(np.abs(err), axis=0)
        ymax = np.max(np.maximum(np.abs(y), np.abs(ynew)), axis=0)
        return float(np.max(emax / (tol * (1 + ymax))))
    emax = max(abs(e) for e in err)
    ymax = max(max(abs(a), abs(b)) for a, b in zip(y, ynew))
    return emax / (tol * (1 + ymax))


def _finite(y) -> bool:
    if isinstance(y, np.ndarray):
        return bool(np.all(np.isfinite(y)))
    return all(cmath.isfinite(c) for c in y)


def _combine(y, h, coeffs, ks):
    """``y + h * sum(coeffs[j] * ks[j])``; lists of scalars or ``(4, K)`` arrays."""
    if isinstance(y, np.ndarray):
        acc = 0
        for a, k in zip(coeffs, ks):
            if a:
                acc = acc + a * k
        return y + h * acc
    return [y[c] + h * sum(a * k[c] for a, k in zip(coeffs, ks) if a) for c in range(4)]


def integrate_piece(pq, piece, y, tol: float = DEFAULT_TOL, record: list | None = None):
    """Carry the state ``y = [Y00, Y01, Y10, Y11]`` along ``piece``.

    ``y`` is a list of four complex scalars, or a ``(4, K)`` array for a batch
    of ``K`` equations whose ``pq(z)`` returns arrays. Returns
    ``(y_end, accepted_steps)``.
    """
    batch = isinstance(y, np.ndarray)
    tol = tol * LOCAL_TOL_FACTOR

    def f(t, s):
        z, zd = piece.at(t)
        p, q = pq(z)
        out = [zd * s[2], zd * s[3], -zd * (q * s[0] + p * s[2]), -zd * (q * s[1] + p * s[3])]
        return np.array(out) if batch else out

    t, h, steps = 0.0, 0.01, 0
    k1 = f(t, y)
    if record is not None:
        record.append(piece.at(0.0)[0])
    while t < 1.0:
        h = min(h, 1.0 - t)
        ks = [k1]
        for st in range(1, 7):
            ys = _combine(y, h, _A[st], ks)
            ks.append(f(t + _C[st] * h, ys))
        # the seventh stage is evaluated at the 5th-order solution (FSAL)
        ynew = ys
        err = _combine(0 * y if batch else [0, 0, 0, 0], h, _E, ks)
        ratio = _err_ratio(err, y, ynew, tol)
        if ratio <= 1.0:
            if not _finite(ynew):
                raise IntegrationError("non-finite state during continuation")
            t += h
            y = ynew
            k1 = ks[6]
            steps += 1
            if record is not None:
                record.append(piece.at(t)[0])
            fac = 5.0 if ratio == 0 else min(5.0, max(0.2, SAFETY * ratio ** -0.2))
        else:
            if not math.isfinite(ratio):
                raise IntegrationError("non-finite error estimate during continuation")
            fac = max(0.2, SAFETY * ratio ** -0.2)
        h = min(H_MAX, h * fac)
        if h < H_MIN and t < 1.0:
            raise IntegrationError(f"step size underflow at t={t:.6g} on {piece}")
    return y, steps


def _identity_state(like=None):
    if like is None:
        return [1 + 0j, 0j, 0j, 1 + 0j]
    y = np.zeros((4, len(like)), dtype=complex)
    y[0] = 1
    y[3] = 1
    return y


def _state_to_mat(y) -> np.ndarray:
    """(2, 2) for scalars, (K, 2, 2) for batches."""
    if isinstance(y, np.ndarray):
        return y.T.reshape(-1, 2, 2)
    return np.array([[y[0], y[1]], [y[2], y[3]]], dtype=complex)


def _as_pieces(path) -> list:
    path = list(path)
    if path and not isinstance(path[0], (Segment, Arc)):
        pts = [complex(z) for z in path]
        return [Segment(a, b) for a, b in zip(pts, pts[1:])]
    return path


def transport_pieces(pq, pieces, tol: float = DEFAULT_TOL, like=None, record: list | None = None):
    """Transfer matrix (or batch of them) of a sequence of path pieces."""
    m = None
    total = 0
    for piece in pieces:
        y, n = integrate_piece(pq, piece, _identity_state(like), tol, record)
        total += n
        t = _state_to_mat(y)
        m = t if m is None else t @ m
    return m, total


def transport(eq: RiemannEquation, path, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Transfer matrix of the companion system along ``path``.

    ``path`` is a sequence of :class:`Segment`/:class:`Arc` pieces or a polyline
    of complex points; it must keep clear of the divisor.
    """
    pieces = _as_pieces(path)
    fin = [eq.divisor[i] for i in eq.divisor.finite_indices]
    for piece in pieces:
        for z in piece.sample(64):
            if min(abs(z - a) for a in fin) < 1e-8:
                raise ValueError("path passes through a singular point")
    m, _ = transport_pieces(Coefficients.of(eq), pieces, tol)
    return m


def integral_of_p(eq: RiemannEquation, path) -> complex:
    """Exact ``integral of p dz`` along a path, from the residues of ``p``."""
    total = 0j
    for piece in _as_pieces(path):
        pts = piece.sample(256) if isinstance(piece, Arc) else [piece.z0, piece.z1]
        for i in eq.divisor.finite_indices:
            a = eq.divisor[i]
            dlog = sum(cmath.log((z1 - a) / (z0 - a)) for z0, z1 in zip(pts, pts[1:]))
            total += eq.P[i] * dlog
    return total


def _loop_matrix(tail, circle):
    """``T^-1 C T``: the return tail is the exact inverse of the outgoing one."""
    if tail.ndim == 2:
        return inv2(tail) @ circle @ tail
    d = tail[:, 0, 0] * tail[:, 1, 1] - tail[:, 0, 1] * tail[:, 1, 0]
    tinv = np.empty_like(tail)
    tinv[:, 0, 0] = tail[:, 1, 1] / d
    tinv[:, 1, 1] = tail[:, 0, 0] / d
    tinv[:, 0, 1] = -tail[:, 0, 1] / d
    tinv[:, 1, 0] = -tail[:, 1, 0] / d
    return tinv @ circle @ tail


def _inv_any(m):
    return inv2(m) if m.ndim == 2 else np.linalg.inv(m)


def _is_even_cyclic(order: tuple[int, ...]) -> bool:
    return order in ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _generators_from_loops(mats: dict, order: tuple[int, ...]):
    """Generators ``(G1, G2, G3)`` with ``G3 G2 G1 = I`` from per-point loop matrices.

    ``mats`` maps divisor index to matrix; ``order`` is the sequence in which
    the loops compose to a contractible loop, i.e. ``M[o3] M[o2] M[o1] = I``.
    An odd sequence is re-based by conjugating the second generator.
    """
    if _is_even_cyclic(order):
        return mats[0], mats[1], mats[2]
    m0 = mats[0]
    return m0, m0 @ mats[1] @ _inv_any(m0), mats[2]


@dataclass
class NumericMonodromy:
    G: tuple[np.ndarray, np.ndarray, np.ndarray]
    residual: float
    tol_used: float
    steps: int
    plan: PathPlan
    derived_index: int | None = None  # generator obtained from the product relation
    infinity_mismatch: float | None = None
    loop_matrices: dict = field(default_factory=dict)

    def to_rep(self) -> MonodromyRep:
        return MonodromyRep(*self.G, self.plan.divisor)


def _chart_loop(plan: PathPlan):
    """Lasso around w = 0 in the chart w = 1/(z - c), starting at the base."""
    c = plan.chart_center
    if c is None:
        raise ValueError("base point admits no outward chart loop around infinity")
    wb = 1 / (plan.base - c)
    fin = [plan.divisor[i] for i in plan.divisor.finite_indices]
    rmin = min(abs(1 / (a - c)) for a in fin)
    r = abs(wb) / 3.0
    if rmin - abs(wb) <= 0:
        raise ValueError("finite points are not enclosed by the chart loop")
    u = wb / abs(wb)
    tail = Segment(wb, r * u)
    circle = Arc(0j, r, cmath.phase(u), 2 * math.pi)
    return tail, circle, wb


def infinity_generator(coef: Coefficients, plan: PathPlan, tol: float, like=None, record=None):
    """Monodromy around infinity computed directly in the ``w = 1/(z - c)`` chart.

    The ccw loop about ``w = 0`` is a clockwise loop enclosing every finite
    point, i.e. the inverse of the product of the finite-point loops.
    """
    tail, circle, wb = _chart_loop(plan)
    chart = InfinityChart(coef, plan.chart_center)
    rec_w = [] if record is not None else None
    t_mat, n1 = transport_pieces(chart, [tail], tol, like, rec_w)
    c_mat, n2 = transport_pieces(chart, [circle], tol, like, rec_w)
    w_loop = _loop_matrix(t_mat, c_mat)
    # z-state (y, y') -> w-state (y, dy/dw) = (y, -y' / w^2)
    s = np.array([[1, 0], [0, -1 / wb ** 2]], dtype=complex)
    si = np.array([[1, 0], [0, -wb ** 2]], dtype=complex)
    if record is not None:
        record.extend(plan.chart_center + 1 / w for w in rec_w)
    return si @ w_loop @ s, n1 + n2


def loop_matrices(coef: Coefficients, plan: PathPlan, tol: float, like=None, record: dict | None = None):
    mats, steps = {}, 0
    for lp in plan.loops:
        rec = [] if record is not None else None
        t_mat, n1 = transport_pieces(coef, [lp.tail], tol, like, rec)
        c_mat, n2 = transport_pieces(coef, [lp.circle], tol, like, rec)
        if record is not None:
            record[lp.index] = rec
        mats[lp.index] = _loop_matrix(t_mat, c_mat)
        steps += n1 + n2
    return mats, steps


def monodromy_of(eq: RiemannEquation, plan: PathPlan | None = None, tol: float = DEFAULT_TOL,
                 verify_infinity: bool = False, record: dict | None = None) -> NumericMonodromy:
    """Monodromy generators of ``eq`` in the fixed loop convention.

    For a divisor containing infinity, the generator at infinity comes from the
    product relation; ``verify_infinity`` additionally integrates it in the
    chart at infinity, reports the mismatch, and uses the direct matrix for the
    residual. For a finite divisor every loop is integrated and, with
    ``verify_infinity``, the (regular) point at infinity is checked to have
    trivial monodromy.
    """
    if plan is None:
        plan = plan_loops(eq.divisor)
    if plan.divisor != eq.divisor:
        raise ValueError("path plan was made for a different divisor")
    coef = Coefficients.of(eq)
    mats, steps = loop_matrices(coef, plan, tol, record=record)
    inf = eq.divisor.infinity_index
    mismatch = None
    direct = None
    if verify_infinity:
        rec = [] if record is not None else None
        direct, n = infinity_generator(coef, plan, tol, record=rec)
        steps += n
        if record is not None:
            record["inf"] = rec
    derived = None
    if inf is not None:
        o1, o2 = plan.order[0], plan.order[1]
        mats[inf] = inv2(mats[o2] @ mats[o1])
        derived = inf
        if direct is not None:
            mismatch = maxabs(direct - mats[inf]) / (1 + maxabs(mats[inf]))
    elif direct is not None:
        mismatch = maxabs(direct - np.eye(2))
    g = _generators_from_loops(mats, plan.order)
    if inf is not None and direct is not None:
        check = dict(mats)
        check[inf] = direct
        gc = _generators_from_loops(check, plan.order)
        residual = maxabs(gc[2] @ gc[1] @ gc[0] - np.eye(2))
    else:
        residual = maxabs(g[2] @ g[1] @ g[0] - np.eye(2))
    return NumericMonodromy(g, residual, tol, steps, plan, derived, mismatch, mats)


def monodromy_batch(eqs: list[RiemannEquation], plan: PathPlan | None = None,
                    tol: float = 1e-7) -> np.ndarray:
    """Generators for many equations on one divisor at once; shape ``(K, 3, 2, 2)``.

    All equations share the step sequence, so this is meant for screening.
    """
    div = eqs[0].divisor
    if any(e.divisor != div for e in eqs):
        raise ValueError("batched equations must share a divisor")
    if plan is None:
        plan = plan_loops(div)
    coef = Coefficients.batch(eqs)
    like = np.zeros(len(eqs))
    mats, _ = loop_matrices(coef, plan, tol, like=like)
    inf = div.infinity_index
    if inf is not None:
        o1, o2 = plan.order[0], plan.order[1]
        mats[inf] = np.linalg.inv(mats[o2] @ mats[o1])
    g = _generators_from_loops(mats, plan.order)
    return np.stack(g, axis=1)


def eigenvalue_law_error(eq: RiemannEquation, mono: NumericMonodromy) -> float:
    """Max distance between the eigenvalues of G_i and {exp(2 pi i beta_i^j)} as multisets."""
    worst = 0.0
    for i in range(3):
        g = mono.G[i]
        tr = g[0, 0] + g[1, 1]
        dt = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        s = cmath.sqrt(tr * tr - 4 * dt)
        ev = ((tr + s) / 2, (tr - s) / 2)
        ex = tuple(cmath.exp(2j * math.pi * b) for b in eq.exponents.beta[i])
        d = min(max(abs(ev[0] - ex[0]), abs(ev[1] - ex[1])), max(abs(ev[0] - ex[1]), abs(ev[1] - ex[0])))
        worst = max(worst, d)
    return worst
