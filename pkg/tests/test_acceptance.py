"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import math
import time

import numpy as np

from riemann_monodromy.continuation import integral_of_p, monodromy_of, plan_loops, transport
from riemann_monodromy.equation import (
    ExponentTable, HypergeometricParams, build_equation, indicial_exponents, is_rsl, satisfies_fuchs,
)
from riemann_monodromy.realize import (
    SearchConfig, forced_search, realize_riemann, realize_rsl, trace_invariants, verify_witness,
)
from riemann_monodromy.representation import (
    DEFAULT_DIVISOR, INF, Divisor, RepClass, Theorem, classify, is_realizable, is_sl, make_rep,
)
from riemann_monodromy.sl2z import dist_to_integer, enumerate_family, sl2z_criterion

from conftest import ACCEPTANCE_LINES
from helpers import corpus, diagonal_rep, indecomposable_rep, irreducible_rep, jordan_rep, scalar_diagonal_rep

SHEAR_BOUND = 4
# exhaustive no-witness searches per refused class (each takes seconds)
EXHAUSTIVE_DIAGONAL = 5
EXHAUSTIVE_JORDAN = 12


def verdict(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def same_pair(a, b, tol):
    return (abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol) or (
        abs(a[0] - b[1]) <= tol and abs(a[1] - b[0]) <= tol)


def test_fuchs_relation():
    rng = np.random.default_rng(101)
    divisors = [DEFAULT_DIVISOR, Divisor((0, 1, INF)), Divisor((0, 1, 2)), Divisor((INF, 1j, -2 + 0.5j))]
    # exact, within tolerance, just outside, far outside
    offsets = [0, 3e-10, 5e-9, 0.37]
    mismatches = round_trip_fail = built = 0
    worst = 0.0
    for k in range(500):
        rho = rng.uniform(0, 1, 6) + 1j * rng.uniform(-0.3, 0.3, 6)
        beta = rho + rng.integers(-3, 4, 6)
        beta[5] += 1 - beta.sum() + offsets[k % 4] * np.exp(2j * math.pi * rng.uniform())
        t = ExponentTable(tuple((beta[2 * i], beta[2 * i + 1]) for i in range(3)))
        d = divisors[k % len(divisors)]
        should = abs(beta.sum() - 1) <= 1e-9
        try:
            eq = build_equation(d, t)
        except ValueError:
            mismatches += should
            continue
        built += 1
        mismatches += not should
        for i, pt in enumerate(d):
            got = indicial_exponents(eq, pt)
            gap = min(max(abs(got[0] - t[i][0]), abs(got[1] - t[i][1])),
                      max(abs(got[0] - t[i][1]), abs(got[1] - t[i][0])))
            worst = max(worst, gap)
            round_trip_fail += gap > 1e-9
    ok = mismatches == 0 and round_trip_fail == 0 and built > 0
    verdict("fuchs-relation", ok,
            f"500 tables, {built} built, {mismatches} accept/reject mismatches, worst indicial gap {worst:.1e} (<= 1e-9)")


def test_golden_example():
    t = ExponentTable(((2, -1), (-1, 2), (0, -1)))
    eq = build_equation(DEFAULT_DIVISOR, t)
    # -8/(z^2-1)^2 = -2/(z-1)^2 + 2/(z-1) - 2/(z+1)^2 - 2/(z+1)
    coef_err = max(
        max(abs(p) for p in eq.P),
        abs(eq.A[0] + 2), abs(eq.B[0] + 2), abs(eq.A[1] + 2), abs(eq.B[1] - 2),
    )
    rng = np.random.default_rng(102)
    pts = rng.normal(size=20) * 3 + 1j * rng.normal(size=20) * 3
    sample_err = max(abs(eq.q(z) + 8 / (z * z - 1) ** 2) / (1 + abs(eq.q(z))) for z in pts)
    mono = monodromy_of(eq, tol=1e-10, verify_infinity=True)
    gen_err = max(np.abs(g - np.eye(2)).max() for g in mono.G)
    ok = coef_err <= 1e-12 and sample_err <= 1e-12 and is_rsl(eq) and gen_err < 1e-6
    verdict("golden-example", ok,
            f"coefficient error {coef_err:.1e}, sampled q error {sample_err:.1e} (<= 1e-12), "
            f"is_rsl={is_rsl(eq)}, max |G_i - I| = {gen_err:.1e} (< 1e-6)")


def test_realizability_theorems():
    rng = np.random.default_rng(103)
    cfg = SearchConfig(shear_bound=SHEAR_BOUND)
    start = time.perf_counter()
    problems = []
    worst = 0.0
    for name, gen in (("irreducible", irreducible_rep), ("indecomposable", indecomposable_rep)):
        for k in range(50):
            rep = gen(rng)
            w = realize_riemann(rep, cfg)
            if w.refusal is not None:
                problems.append(f"{name} #{k} falsely refused")
                continue
            if not w.found:
                problems.append(f"{name} #{k} unresolved")
                continue
            report = verify_witness(w, rep, cfg.tol)
            worst = max(worst, report.residual)
            if not report.ok or report.residual >= 1e-6:
                problems.append(f"{name} #{k} residual {report.residual:.1e}")
    refused = {"diagonal": [], "jordan": []}
    for name, gen, theorem in (("diagonal", diagonal_rep, Theorem.DIAGONAL),
                               ("jordan", jordan_rep, Theorem.JORDAN)):
        for k in range(50):
            rep = gen(rng)
            w = realize_riemann(rep, cfg)
            if w.refusal is None or w.refusal.theorem is not theorem:
                problems.append(f"{name} #{k} not refused with {theorem.value}")
            refused[name].append(rep)
    searched = 0
    for name, count in (("diagonal", EXHAUSTIVE_DIAGONAL), ("jordan", EXHAUSTIVE_JORDAN)):
        for rep in refused[name][:count]:
            w = forced_search(rep, cfg)
            searched += 1
            if w.found:
                problems.append(f"{name} refused rep has witness {w.equation.exponents.beta}")
    ok = not problems
    detail = (f"50 per class; worst witness residual {worst:.1e} (< 1e-6); {searched} exhaustive "
              f"shear-bound-{SHEAR_BOUND} searches on refused reps found no witness; "
              f"{time.perf_counter() - start:.0f}s")
    if problems:
        detail += "; " + "; ".join(problems[:5])
    verdict("realizability-theorems", ok, detail)


def _hypergeometric_triples(rng, n):
    out = []
    while len(out) < n:
        a, b, g = rng.uniform(-1, 1, 3) + 1j * rng.uniform(-0.1, 0.1, 3)
        diffs = (1 - g, g - a - b, a - b)
        if min(dist_to_integer(x) for x in diffs) < 0.05:
            continue
        out.append(HypergeometricParams(a, b, g))
    return out


def test_hypergeometric_round_trip():
    rng = np.random.default_rng(104)
    worst, problems = 0.0, []
    for k, h in enumerate(_hypergeometric_triples(rng, 20)):
        rep = monodromy_of(h.equation(), tol=1e-10).to_rep()
        w = realize_riemann(rep)
        if not w.found:
            problems.append(f"#{k} {w.unresolved or w.refusal}")
            continue
        report = verify_witness(w, rep)
        again = monodromy_of(w.equation, tol=1e-10).G
        gap = float(np.abs(trace_invariants(again) - trace_invariants(rep.generators)).max())
        worst = max(worst, gap)
        if gap >= 1e-6 or not report.ok:
            problems.append(f"#{k} trace gap {gap:.1e}")
    detail = f"20 triples, worst trace gap {worst:.1e} (< 1e-6)"
    verdict("hypergeometric-round-trip", not problems, detail + ("; " + "; ".join(problems) if problems else ""))


def _sl_rep(rng, k):
    gen = (irreducible_rep, indecomposable_rep, scalar_diagonal_rep)[k % 3]
    rep = gen(rng)
    d1, d2 = np.sqrt(np.linalg.det(rep.G1)), np.sqrt(np.linalg.det(rep.G2))
    return make_rep(rep.G1 / d1, rep.G2 / d2)


def test_rsl_realization():
    rng = np.random.default_rng(105)
    worst_p = worst_res = 0.0
    problems = []
    done = 0
    classes = set()
    while done < 20:
        rep = _sl_rep(rng, done)
        if not is_sl(rep) or not is_realizable(rep).realizable:
            continue
        classes.add(classify(rep).tag)
        w = realize_rsl(rep)
        done += 1
        if not w.found:
            problems.append(f"#{done} {w.unresolved}")
            continue
        pts = rng.normal(size=20) * 3 + 1j * rng.normal(size=20) * 3
        worst_p = max(worst_p, max(abs(w.equation.p(z)) for z in pts))
        report = verify_witness(w, rep)
        worst_res = max(worst_res, report.residual)
        if not report.ok or report.residual >= 1e-6:
            problems.append(f"#{done} residual {report.residual:.1e}")
    ok = not problems and worst_p < 1e-10
    detail = (f"20 SL reps ({', '.join(sorted(classes))}); max |p| {worst_p:.1e} (< 1e-10); "
              f"worst conjugacy residual {worst_res:.1e} (< 1e-6)")
    verdict("rsl-realization", ok, detail + ("; " + "; ".join(problems) if problems else ""))


def test_sl2z_family():
    problems = []
    worst = 0.0
    for k in range(-4, 5):
        for l in range(-2, 3):
            m = enumerate_family(k, l)
            v = sl2z_criterion(m.params)
            if not v.in_sl2z or v.k != k:
                problems.append(f"(k={k}, l={l}) criterion")
            for g in monodromy_of(m.equation).G:
                worst = max(worst, dist_to_integer(np.trace(g)))
    reject = sl2z_criterion(HypergeometricParams(0.2, -0.2, 0), conjugator=False)
    rejected = not reject.in_sl2z and abs(reject.k_distance - 0.382) < 1e-3
    ok = not problems and worst < 1e-6 and rejected
    verdict("sl2z-family", ok,
            f"45 members pass with recovered k; worst trace distance to Z {worst:.1e} (< 1e-6); "
            f"(1/5, -1/5, 0) rejected={rejected} with distance {reject.k_distance:.3f}")


def test_continuation_self_consistency():
    eqs = corpus()
    worst_rel = worst_liouville = worst_inf = 0.0
    checked_inf = 0
    for _, eq in eqs:
        with_inf = eq.divisor.infinity_index is not None
        mono = monodromy_of(eq, tol=1e-10, verify_infinity=with_inf)
        worst_rel = max(worst_rel, mono.residual)
        if with_inf:
            worst_inf = max(worst_inf, mono.infinity_mismatch)
            checked_inf += 1
        for lp in plan_loops(eq.divisor).loops:
            m = transport(eq, lp.pieces(), 1e-10)
            worst_liouville = max(worst_liouville,
                                  abs(np.linalg.det(m) - np.exp(-integral_of_p(eq, lp.pieces()))))
    ok = worst_rel < 1e-7 and worst_liouville < 1e-8 and worst_inf < 1e-6 and checked_inf >= 10
    verdict("continuation-self-consistency", ok,
            f"{len(eqs)} equations; worst relation residual {worst_rel:.1e} (< 1e-7); "
            f"worst Liouville gap {worst_liouville:.1e} (< 1e-8); infinity chart on {checked_inf} "
            f"equations, worst mismatch {worst_inf:.1e} (< 1e-6)")
