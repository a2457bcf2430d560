import itertools

import numpy as np
import pytest

from riemann_monodromy.algebra2 import cmat2
from riemann_monodromy.continuation import monodromy_of
from riemann_monodromy.equation import HypergeometricParams, is_rsl, singular_points
from riemann_monodromy.realize import (
    SearchConfig, candidate_exponents, forced_search, realize_riemann, realize_rsl, trace_invariants,
    verify_witness,
)
from riemann_monodromy.representation import (
    DEFAULT_DIVISOR, INF, Divisor, MonodromyRep, RepClass, Theorem, classify, make_rep, rep_from_triple,
)

from helpers import diagonal_rep, indecomposable_rep, irreducible_rep, jordan_rep, random_invertible, scalar_diagonal_rep

EYE = np.eye(2, dtype=complex)
IDENTITY = make_rep(EYE, EYE)
GOLDEN = ((2, -1), (-1, 2), (0, -1))
QUARTER = make_rep(np.diag([1j, -1j]), np.diag([-1j, 1j]))
CFG = SearchConfig()


def pairs_equal(beta, expect, tol=1e-9):
    """Row by row, each exponent pair compared as a multiset."""
    def same(row, erow):
        a, b = (complex(x) for x in row)
        c, d = erow
        return (abs(a - c) <= tol and abs(b - d) <= tol) or (abs(a - d) <= tol and abs(b - c) <= tol)
    return all(same(r, e) for r, e in zip(beta, expect))


def conjugate_by(s, gens):
    si = np.linalg.inv(s)
    return [s @ g @ si for g in gens]


def test_candidates_for_identity():
    tables = list(itertools.islice(candidate_exponents(IDENTITY, CFG), 3000))
    assert all(abs(sum(sum(r) for r in t.beta) - 1) < 1e-12 for t in tables)
    assert any(pairs_equal(t.beta, GOLDEN) for t in tables)
    assert all(t.rho == ((0, 0), (0, 0), (0, 0)) for t in tables[:5])


def test_candidates_for_quarter_rep():
    first = next(candidate_exponents(QUARTER, CFG))
    assert pairs_equal(first.rho, ((0.25, 0.75), (0.75, 0.25), (0, 0)))
    assert sum(sum(p) for p in first.phi) == -1


def test_candidates_ordered_by_total_shift():
    totals = [sum(abs(x) for p in t.phi for x in p) for t in itertools.islice(candidate_exponents(QUARTER, CFG), 500)]
    assert totals == sorted(totals)


def test_candidates_empty_on_congruence_obstruction():
    # not a representation: the determinants do not multiply to one
    theta = np.sqrt(2) / 10
    bad = MonodromyRep(np.diag([np.exp(2j * np.pi * theta), 1]), EYE, EYE, DEFAULT_DIVISOR)
    assert list(candidate_exponents(bad, CFG)) == []


def test_candidate_bound_respected():
    cfg = SearchConfig(shear_bound=1)
    assert all(max(abs(x) for p in t.phi for x in p) <= 1 for t in candidate_exponents(IDENTITY, cfg))


def test_realize_identity_gives_golden_equation():
    w = realize_riemann(IDENTITY)
    assert w.found
    assert pairs_equal(w.equation.exponents.beta, GOLDEN)
    assert np.allclose(w.conjugator, EYE)
    for z in (0.4j, 2.0):
        assert abs(w.equation.q(z) + 8 / (z * z - 1) ** 2) < 1e-12


def test_realize_refuses_all_jordan():
    rep = rep_from_triple(cmat2([1, 1, 0, 1]), cmat2([1, 1, 0, 1]), cmat2([1, -2, 0, 1]))
    w = realize_riemann(rep)
    assert not w.found and w.refusal.theorem is Theorem.JORDAN


def test_realize_refuses_scalar_free_diagonal():
    w = realize_riemann(rep_from_triple(np.diag([2, 3]), np.diag([5, 7]), np.diag([1 / 10, 1 / 21])))
    assert not w.found and w.refusal.theorem is Theorem.DIAGONAL


def test_realize_hypergeometric_round_trip():
    source = HypergeometricParams(1 / 3, -1 / 3, 0).equation()
    rep = monodromy_of(source).to_rep()
    w = realize_riemann(rep)
    assert w.found
    report = verify_witness(w, rep)
    assert report.ok and report.residual < 1e-6


def test_realize_diagonal_with_scalar_uses_direct_construction():
    w = realize_riemann(QUARTER)
    assert w.found and w.candidates_tried == 1
    # exponents (nu + 1, nu) at the scalar point
    b1, b2 = w.equation.exponents[2]
    assert abs(abs(b1 - b2) - 1) < 1e-12
    assert singular_points(w.equation) == [0, 1, 2]
    assert verify_witness(w, QUARTER).ok


def test_rsl_identity():
    w = realize_rsl(IDENTITY)
    assert w.found and is_rsl(w.equation)
    assert pairs_equal(w.equation.exponents.beta, GOLDEN)


def test_rsl_quarter_rep():
    w = realize_rsl(QUARTER)
    assert w.found and is_rsl(w.equation)
    eq = w.equation
    for i in eq.divisor.finite_indices:
        assert abs(eq.exponents.point_sum(i) - 1) < 1e-9
    assert verify_witness(w, QUARTER).ok


def test_rsl_requires_sl():
    with pytest.raises(ValueError):
        realize_rsl(make_rep(np.diag([2, 3]), EYE))


def test_rsl_relocates_finite_divisor():
    rep = make_rep(EYE, EYE, Divisor((0, 1, 2)))
    w = realize_rsl(rep)
    assert w.found and INF in w.equation.divisor.points and is_rsl(w.equation)


def test_verify_against_conjugated_copy():
    w = realize_riemann(IDENTITY)
    assert verify_witness(w, IDENTITY).residual < 1e-6
    rng = np.random.default_rng(0)
    rep = irreducible_rep(rng)
    w = realize_riemann(rep)
    s = random_invertible(rng)
    moved = rep.conjugated(s)
    report = verify_witness(w, moved)
    assert report.ok and report.residual < 1e-6
    assert not np.allclose(report.conjugator, w.conjugator)


def test_verify_against_unrelated_rep_fails():
    rng = np.random.default_rng(1)
    w = realize_riemann(irreducible_rep(rng))
    report = verify_witness(w, irreducible_rep(rng))
    assert not report.ok
    assert report.trace_gap > 1e-3


def test_verify_needs_equation():
    with pytest.raises(ValueError):
        verify_witness(realize_riemann(rep_from_triple(cmat2([1, 1, 0, 1]), cmat2([1, 1, 0, 1]),
                                                       cmat2([1, -2, 0, 1]))), IDENTITY)


@pytest.mark.parametrize("gen", [irreducible_rep, indecomposable_rep, scalar_diagonal_rep])
def test_witnesses_are_sound(gen):
    rng = np.random.default_rng(21)
    for _ in range(5):
        rep = gen(rng)
        w = realize_riemann(rep, CFG)
        assert w.found
        assert w.residual <= CFG.accept_tol
        mono = monodromy_of(w.equation, tol=1e-10)
        got = conjugate_by(w.conjugator, rep.generators)
        assert max(np.abs(a - b).max() for a, b in zip(got, mono.G)) < 1e-5
        assert verify_witness(w, rep, CFG.tol / 10).ok


def test_irreducible_searches_succeed_200():
    rng = np.random.default_rng(22)
    for _ in range(200):
        rep = irreducible_rep(rng)
        assert realize_riemann(rep, CFG).found


@pytest.mark.parametrize("gen", [diagonal_rep, jordan_rep])
def test_refusals_only_for_refused_classes(gen):
    rng = np.random.default_rng(23)
    for _ in range(20):
        rep = gen(rng)
        w = realize_riemann(rep)
        assert w.refusal is not None
        assert classify(rep).tag in (RepClass.DECOMPOSABLE, RepClass.ALL_JORDAN)


def test_forced_search_on_jordan_finds_nothing():
    w = forced_search(jordan_rep(np.random.default_rng(24)), CFG)
    assert not w.found and w.unresolved


def test_rsl_witnesses_have_infinity():
    rng = np.random.default_rng(25)
    for _ in range(4):
        rep = irreducible_rep(rng)
        # rescale into SL(2, C); G3 is re-derived from the relation
        d1, d2 = np.sqrt(np.linalg.det(rep.G1)), np.sqrt(np.linalg.det(rep.G2))
        srep = make_rep(rep.G1 / d1, rep.G2 / d2)
        w = realize_rsl(srep)
        assert w.found
        assert is_rsl(w.equation) and INF in w.equation.divisor.points
        assert verify_witness(w, srep).ok


@pytest.mark.parametrize("source", [
    HypergeometricParams(0.2, 0.45, 0.7),
    HypergeometricParams(0.3 + 0.05j, -0.15, 0.6),
    HypergeometricParams(1 / 3, 0.25, 0.4),
])
def test_equation_monodromy_realize_round_trip(source):
    rep = monodromy_of(source.equation()).to_rep()
    w = realize_riemann(rep)
    assert w.found
    again = monodromy_of(w.equation).G
    assert np.abs(trace_invariants(again) - trace_invariants(rep.generators)).max() < 1e-6


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(shear_bound=-1)
    with pytest.raises(ValueError):
        SearchConfig(tol=0)
