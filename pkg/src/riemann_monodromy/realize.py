"""Witness equations for monodromy representations.

Realizable classes are answered by enumerating exponent tables whose
fractional parts are fixed by the target's normalized logarithms, computing
each candidate's monodromy numerically, and looking for a simultaneous
conjugator. Diagonal representations with a scalar generator use the explicit
power-function construction instead.
"""
from __future__ import annotations

import functools
import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .algebra2 import eig2, inv2, is_scalar, log_branch, maxabs, normalized_log, simultaneous_conjugator
from .continuation import IntegrationError, monodromy_batch, monodromy_of, plan_loops
from .equation import ExponentTable, RiemannEquation, build_equation, is_rsl, singular_points
from .representation import (
    DEFAULT_DIVISOR, Divisor, MonodromyRep, RealizabilityVerdict, RepClass, classify, is_sl, verdict_for,
)

log = logging.getLogger(__name__)

# a witness is accepted when its conjugacy residual is within ACCEPT_FACTOR * tol;
# monodromy is integrated at tol / ACCEPT_FACTOR
ACCEPT_FACTOR = 100.0
# numerical inputs: fractional parts this close to an integer are snapped
SNAP_TOL = 1e-6
SCREEN_INTEGRATION_TOL = 1e-5
SCREEN_CONJUGACY_TOL = 1e-3
BATCH_SIZES = (4, 32, 256, 1024)


@dataclass(frozen=True)
class SearchConfig:
    shear_bound: int = 4
    tol: float = 1e-8
    max_candidates: int = 5000

    def __post_init__(self):
        if self.shear_bound < 0 or self.tol <= 0 or self.max_candidates <= 0:
            raise ValueError("search bounds must be positive")

    @property
    def integration_tol(self) -> float:
        return self.tol / ACCEPT_FACTOR

    @property
    def accept_tol(self) -> float:
        return self.tol * ACCEPT_FACTOR


@dataclass
class RealizationWitness:
    equation: RiemannEquation | None = None
    conjugator: np.ndarray | None = None
    residual: float | None = None
    candidates_tried: int = 0
    refusal: RealizabilityVerdict | None = None
    unresolved: str | None = None  # search exhausted or numerics failed

    @property
    def found(self) -> bool:
        return self.equation is not None and self.conjugator is not None


@dataclass
class VerificationReport:
    ok: bool
    residual: float
    tol: float
    conjugator: np.ndarray | None
    trace_gap: float
    monodromy_residual: float
    notes: list[str] = field(default_factory=list)


def trace_invariants(gens) -> np.ndarray:
    """tr G_i and tr G_i G_j (i < j): conjugacy invariants used for round trips."""
    g = list(gens)
    out = [np.trace(x) for x in g]
    out += [np.trace(g[i] @ g[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    return np.array(out)


def _snapped_rho(rep: MonodromyRep) -> list[list[complex]]:
    rows = []
    for g in rep.generators:
        r = list(normalized_log(g).rho)
        for k in range(2):
            if abs(r[k] - 1) <= SNAP_TOL:
                r[k] -= 1
            if abs(r[k]) <= SNAP_TOL:
                r[k] = 0j
        if abs(r[0] - r[1]) <= SNAP_TOL:
            r[0] = r[1] = (r[0] + r[1]) / 2
        rows.append(r)
    return rows


@functools.lru_cache(maxsize=8)
def _shift_tuples(bound: int) -> dict[int, np.ndarray]:
    """All integer 6-tuples in [-bound, bound], grouped by sum, ordered by (sum |phi|, lex)."""
    axis = np.arange(-bound, bound + 1)
    grid = np.stack(np.meshgrid(*([axis] * 6), indexing="ij"), -1).reshape(-1, 6)
    # lexsort takes its primary key last
    order = np.lexsort(tuple(grid[:, k] for k in range(5, -1, -1)) + (np.abs(grid).sum(1),))
    grid = grid[order]
    sums = grid.sum(1)
    return {int(t): grid[sums == t] for t in np.unique(sums)}


def _class_key(phi, tied) -> tuple:
    """Integer parts modulo per-point shifts (shears leave the monodromy unchanged).

    ``tied[i]`` marks points whose two fractional parts coincide, where the
    order within the pair carries no information.
    """
    key = []
    for i in range(3):
        f1, f2 = int(phi[2 * i]), int(phi[2 * i + 1])
        m = min(f1, f2)
        pair = (f1 - m, f2 - m)
        key.append(tuple(sorted(pair)) if tied[i] else pair)
    return tuple(key)


def _rho_rows(rep: MonodromyRep):
    """Snapped fractional parts adjusted to meet the Fuchs relation, and the forced sum of phi."""
    rho = _snapped_rho(rep)
    need = 1 - sum(sum(r) for r in rho)
    n = round(need.real)
    if abs(need - n) > SNAP_TOL:
        return None, None
    delta = (need - n) / 6
    return [tuple(r + delta for r in row) for row in rho], n


def _phi_stream(rep: MonodromyRep, cfg: SearchConfig, point_sums):
    rho, n = _rho_rows(rep)
    if rho is None:
        return None, iter(())
    grid = _shift_tuples(cfg.shear_bound).get(n)
    if grid is None:
        return rho, iter(())
    if point_sums:
        keep = np.ones(len(grid), dtype=bool)
        for i, target in point_sums.items():
            want = target - (rho[i][0] + rho[i][1])
            if abs(want - round(want.real)) > SNAP_TOL:
                return rho, iter(())
            keep &= grid[:, 2 * i] + grid[:, 2 * i + 1] == round(want.real)
        grid = grid[keep]
    return rho, iter(grid)


def candidate_exponents(rep: MonodromyRep, cfg: SearchConfig = SearchConfig(),
                        point_sums: dict[int, int] | None = None) -> Iterator[ExponentTable]:
    """Exponent tables ``beta = phi + rho`` compatible with the local monodromy of ``rep``.

    ``rho`` comes from the normalized logarithm of each generator; ``phi``
    ranges over integers with ``|phi| <= shear_bound`` subject to the Fuchs
    relation, ordered by total ``|phi|``. The stream is empty when the
    fractional parts cannot meet the relation. ``point_sums`` optionally pins
    ``beta_i^1 + beta_i^2`` at given divisor indices.
    """
    rho, phis = _phi_stream(rep, cfg, point_sums)
    for phi in phis:
        pairs = tuple((int(phi[2 * i]), int(phi[2 * i + 1])) for i in range(3))
        yield ExponentTable.from_split(pairs, rho)


def _genuine(eq: RiemannEquation) -> bool:
    return len(singular_points(eq)) == 3


def _class_representatives(rep, cfg, divisor, point_sums=None) -> Iterator[RiemannEquation]:
    """First table of each shear class (in enumeration order) with three genuine singular points."""
    rho, phis = _phi_stream(rep, cfg, point_sums)
    if rho is None:
        return
    tied = [abs(r[0] - r[1]) <= SNAP_TOL for r in rho]
    seen = set()
    for phi in phis:
        key = _class_key(phi, tied)
        if key in seen:
            continue
        pairs = tuple((int(phi[2 * i]), int(phi[2 * i + 1])) for i in range(3))
        try:
            eq = build_equation(divisor, ExponentTable.from_split(pairs, rho))
        except ValueError:
            continue
        if not _genuine(eq):
            continue
        seen.add(key)
        yield eq


def _pairs(target: MonodromyRep, gens):
    return target.G1, target.G2, gens[0], gens[1]


def _screen_batch(eqs, target, plan) -> list[bool]:
    """Loose-tolerance pass over a batch; a candidate that fails to integrate is dropped."""
    try:
        gens = monodromy_batch(eqs, plan, tol=SCREEN_INTEGRATION_TOL)
    except IntegrationError:
        if len(eqs) == 1:
            return [False]
        mid = len(eqs) // 2
        return _screen_batch(eqs[:mid], target, plan) + _screen_batch(eqs[mid:], target, plan)
    near_null = _has_conjugacy_null_space(target, gens, SCREEN_CONJUGACY_TOL)
    out = []
    for k in range(len(eqs)):
        g = gens[k]
        if not near_null[k]:
            out.append(False)
            continue
        s = simultaneous_conjugator(*_pairs(target, g), tol=SCREEN_CONJUGACY_TOL)
        out.append(s is not None)
    return out


def _has_conjugacy_null_space(target: MonodromyRep, gens: np.ndarray, tol: float) -> np.ndarray:
    """Batched necessary condition: ``S A_k = B_k S`` has a numerical null space."""
    eye = np.eye(2)
    blocks = []
    for k in range(2):
        a = target.generators[k]
        b = gens[:, k]
        blocks.append(np.kron(eye, a.T)[None] - np.einsum("kij,ab->kiajb", b, eye).reshape(-1, 4, 4))
    sys = np.concatenate(blocks, axis=1)
    finite = np.all(np.isfinite(sys), axis=(1, 2))
    sys[~finite] = 0
    # scale by the matrices themselves, as simultaneous_conjugator does
    g_abs = np.where(np.isfinite(gens[:, :2]), np.abs(gens[:, :2]), 0).max(axis=(1, 2, 3))
    scale = np.maximum(g_abs, max(maxabs(target.G1), maxabs(target.G2)))
    sv = np.linalg.svd(sys / scale[:, None, None], compute_uv=False)
    return finite & (sv[:, -1] <= tol * np.maximum(sv[:, 0], 1.0))


def _verify_equation(eq, target, plan, cfg):
    """(conjugator, residual) when ``eq`` realizes ``target`` at the search tolerance."""
    try:
        mono = monodromy_of(eq, plan, tol=cfg.integration_tol)
    except IntegrationError as exc:
        log.debug("candidate failed to integrate: %s", exc)
        return None
    s = simultaneous_conjugator(*_pairs(target, mono.G), tol=cfg.accept_tol)
    if s is None:
        return None
    res = _conjugacy_report(s, target.generators, mono.G)
    return (s, res) if res <= cfg.accept_tol else None


def _conjugacy_report(s, target_gens, computed) -> float:
    si = inv2(s)
    res = 0.0
    for a, b in zip(target_gens, computed):
        res = max(res, maxabs(s @ a @ si - b) / (1 + maxabs(b)), maxabs(si @ b @ s - a) / (1 + maxabs(a)))
    return res


def _search(target: MonodromyRep, cfg: SearchConfig, divisor: Divisor,
            point_sums: dict[int, int] | None = None) -> RealizationWitness:
    plan = plan_loops(divisor)
    reps = _class_representatives(target, cfg, divisor, point_sums)
    tried = 0
    sizes = iter(BATCH_SIZES)
    size = next(sizes)
    while tried < cfg.max_candidates:
        batch = list(itertools.islice(reps, min(size, cfg.max_candidates - tried)))
        if not batch:
            break
        flags = _screen_batch(batch, target, plan)
        for k, (eq, keep) in enumerate(zip(batch, flags)):
            if not keep:
                continue
            got = _verify_equation(eq, target, plan, cfg)
            if got is not None:
                return RealizationWitness(eq, got[0], got[1], tried + k + 1)
        tried += len(batch)
        size = next(sizes, size)
    reason = f"no candidate verified within shear bound {cfg.shear_bound} ({tried} shear classes tried)"
    return RealizationWitness(candidates_tried=tried, unresolved=reason)


def forced_search(rep: MonodromyRep, cfg: SearchConfig = SearchConfig(),
                  divisor: Divisor | None = None) -> RealizationWitness:
    """Bounded search regardless of the class verdict.

    Used to confirm empirically that refused classes admit no witness.
    """
    return _search(rep, cfg, divisor or rep.divisor)


def _diagonal_table(rep: MonodromyRep, scalar: int, shift: int = 0) -> ExponentTable:
    """Exponents of the equation spanned by two power functions.

    Non-scalar points carry the logarithms of the eigenvalues in a common
    eigenbasis; the scalar point gets ``(nu + 1, nu)``, with ``nu`` moved by
    ``shift``. With every generator scalar the pattern
    ``(l1 + 2, l1 - 1), (l2 - 1, l2 + 2), (l3, l3 - 1)`` is used.
    """
    gens = rep.generators
    if all(is_scalar(g) for g in gens):
        l1 = log_branch(complex(gens[0][0, 0]))
        l2 = log_branch(complex(gens[1][0, 0])) + shift
        l3 = -l1 - l2
        return ExponentTable(((l1 + 2, l1 - 1), (l2 - 1, l2 + 2), (l3, l3 - 1)))
    others = [i for i in range(3) if i != scalar]
    basis = None
    for i in others:
        if not is_scalar(gens[i]):
            basis = eig2(gens[i]).eigenbasis
            break
    bi = inv2(basis)
    diag = {i: np.diag(bi @ gens[i] @ basis) for i in others}
    nu = log_branch(complex(gens[scalar][0, 0] + gens[scalar][1, 1]) / 2) + shift
    lam = tuple(log_branch(complex(d)) for d in diag[others[0]])
    mu = tuple(-x - nu for x in lam)
    rows = [None, None, None]
    rows[others[0]] = lam
    rows[others[1]] = mu
    rows[scalar] = (nu + 1, nu)
    return ExponentTable(tuple(rows))


def _diagonal_equation(rep: MonodromyRep, scalar: int) -> RiemannEquation:
    """Power-function construction, shifting ``nu`` until all three points are singular."""
    eq = None
    for shift in (0, 1, -1, 2, -2):
        eq = build_equation(rep.divisor, _diagonal_table(rep, scalar, shift))
        if _genuine(eq):
            return eq
    return eq


def realize_riemann(rep: MonodromyRep, cfg: SearchConfig = SearchConfig()) -> RealizationWitness:
    """A Riemann equation on ``rep.divisor`` whose monodromy is conjugate to ``rep``.

    Non-realizable classes get a refusal naming the theorem; exhausting the
    bounded search is reported as unresolved, not as non-realizability.
    """
    cls = classify(rep)
    verdict = verdict_for(cls)
    if not verdict.realizable:
        return RealizationWitness(refusal=verdict)
    if cls.tag == RepClass.DECOMPOSABLE:
        scalar = min(cls.scalar_indices) - 1
        eq = _diagonal_equation(rep, scalar)
        got = _verify_equation(eq, rep, plan_loops(rep.divisor), cfg)
        if got is None:
            return RealizationWitness(candidates_tried=1,
                                      unresolved="power-function construction failed numerical verification")
        return RealizationWitness(eq, got[0], got[1], 1)
    return _search(rep, cfg, rep.divisor)


def _rsl_divisor(rep: MonodromyRep) -> Divisor:
    return rep.divisor if rep.divisor.infinity_index is not None else DEFAULT_DIVISOR


def realize_rsl(rep: MonodromyRep, cfg: SearchConfig = SearchConfig()) -> RealizationWitness:
    """An equation ``y'' + q y = 0`` (infinity in the divisor) realizing ``rep``.

    Candidates have exponent sum 1 at both finite points. A divisor without
    infinity is replaced by ``{-1, 1, inf}``, keeping the point order.
    """
    if not is_sl(rep):
        raise ValueError("RSL realization needs generators of determinant 1")
    verdict = verdict_for(classify(rep))
    if not verdict.realizable:
        raise ValueError(f"representation is not realizable ({verdict.theorem.value}): {verdict.detail}")
    divisor = _rsl_divisor(rep)
    target = MonodromyRep(*rep.generators, divisor)
    sums = {i: 1 for i in divisor.finite_indices}
    w = _search(target, cfg, divisor, sums)
    if w.found and not is_rsl(w.equation):
        raise RuntimeError("RSL search returned an equation with a first-derivative term")
    return w


def verify_witness(w: RealizationWitness, rep: MonodromyRep, tol: float = SearchConfig().tol) -> VerificationReport:
    """Recompute the witness monodromy at a tighter tolerance and re-derive the conjugator."""
    if w.equation is None:
        raise ValueError("witness carries no equation")
    eq = w.equation
    cfg = SearchConfig(tol=tol)
    target = rep if rep.divisor == eq.divisor else MonodromyRep(*rep.generators, eq.divisor)
    notes = []
    try:
        mono = monodromy_of(eq, plan_loops(eq.divisor), tol=cfg.integration_tol / 10)
    except IntegrationError as exc:
        return VerificationReport(False, float("inf"), tol, None, float("inf"), float("inf"), [str(exc)])
    gap = float(np.max(np.abs(trace_invariants(mono.G) - trace_invariants(target.generators))))
    s = simultaneous_conjugator(*_pairs(target, mono.G), tol=cfg.accept_tol)
    if s is None:
        notes.append("no simultaneous conjugator at the requested tolerance")
        return VerificationReport(False, float("inf"), tol, None, gap, mono.residual, notes)
    res = _conjugacy_report(s, target.generators, mono.G)
    return VerificationReport(res <= cfg.accept_tol, res, tol, s, gap, mono.residual, notes)
