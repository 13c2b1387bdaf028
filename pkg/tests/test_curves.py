"""Plane curves with PGL2 symmetry: equations, singular points, nodes, genus, invariance."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from mumford import curves as cv
from mumford.ff import embed, field_make, prime_power


def P(F, terms):
    return cv.HomogPoly3.make(F, terms)


def _brute_singular(C, ext):
    """Independent scan: evaluate the polynomial and its three partials at every point of P2."""
    E = field_make(C.field.p, C.field.s * ext)
    G = C.over(E)
    parts = [G.partial(i) for i in range(3)]
    pts = []
    for x in range(E.q):
        for y in range(E.q):
            pts.append((1, x, y))
    pts += [(0, 1, y) for y in range(E.q)] + [(0, 0, 1)]
    return sorted(pt for pt in pts if G(pt) == 0 and all(d(pt) == 0 for d in parts))


def _coords(points):
    return sorted(p.coords for p in points)


# equations


def test_quadric_unitary_q3():
    F = field_make(3, 1)
    C = cv.build_curve("quadric-unitary", 3, w=2)
    expected = P(F, {(2, 2, 0): 2, (2, 0, 2): 2, (0, 2, 2): 2})
    assert C == expected


def test_lines_q3():
    F = field_make(3, 1)
    z0, z1, z2 = (P(F, {e: 1}) for e in [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    expected = z0 * z2 * (z0 - z1 + z2) * (z0 + z1 + z2)
    assert cv.build_curve("lines", 3) == expected


def test_bh_char2_q4():
    F = field_make(2, 2)
    expected = P(F, {(1, 0, 4): 1, (4, 0, 1): 1, (0, 5, 0): 1, (1, 3, 1): 1, (2, 1, 2): 1})
    assert cv.build_curve("bh-char2", 4) == expected


@pytest.mark.parametrize("family,q", [("quadric-unitary", 4), ("bh-char2", 3), ("lines-deformed", 4)])
def test_parity_checks(family, q):
    with pytest.raises(ValueError):
        cv.build_curve(family, q, lam=1)


def test_w_must_be_nonsquare():
    with pytest.raises(ValueError):
        cv.build_curve("quadric-unitary", 5, w=4)


def test_lambda_required_and_nonzero():
    with pytest.raises(ValueError):
        cv.build_curve("lines-deformed", 3)
    with pytest.raises(ValueError):
        cv.build_curve("lines-deformed", 3, lam=0)


@pytest.mark.parametrize("q,expected", [(3, 1), (7, 1), (5, 2), (13, 2)])
def test_epsilon_printed_rule(q, expected):
    F = field_make(q, 1)
    w = cv.least_nonsquare(F)
    assert cv.epsilon(F, w) == (1 if expected == 1 else w)


def test_curve_json_round_trip():
    C = cv.build_curve("bh-char2", 4)
    assert cv.HomogPoly3.from_json(C.to_json()) == C
    assert C.to_json()["degree"] == 5


# singular points


@pytest.mark.parametrize("family,q,ext", [("quadric-unitary", 3, 2), ("lines", 3, 2), ("quadric-unitary", 5, 1),
                                          ("bh-char2", 4, 1), ("lines", 4, 1)])
def test_scan_agrees_with_brute_force(family, q, ext):
    C = cv.build_curve(family, q)
    assert _coords(cv.singular_points(C, ext)) == _brute_singular(C, ext)


def test_quadric_unitary_q3_nodes():
    C = cv.build_curve("quadric-unitary", 3, w=2)
    pts = cv.singular_points(C, 2)
    assert _coords(pts) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    for pt in pts:
        node, rational = cv.is_node(C, pt)
        assert node
    r = cv.genus_report(C, 2)
    assert r.nodes == 3 and r.plucker_genus == 0
    assert all(not s.tangents_rational_over_base for s in r.singular_points)


def test_smooth_conic_has_no_singular_points():
    F = field_make(3, 1)
    conic = P(F, {(1, 0, 1): 1, (0, 2, 0): 2})
    assert cv.singular_points(conic, 3) == []


def test_lines_q3_nodes_rational():
    C = cv.build_curve("lines", 3)
    r = cv.genus_report(C, 2)
    assert r.nodes == 6 and all(s.tangents_rational for s in r.singular_points)


def test_cusp_is_not_a_node():
    F = field_make(5, 1)
    cusp = P(F, {(0, 2, 1): 1, (3, 0, 0): 4})  # y^2 z - x^3
    pt = cv.PlanePoint.make(F, (0, 0, 1))
    assert cv.is_node(cusp, pt)[0] is False
    with pytest.raises(cv.NonNodal):
        cv.genus_report(cusp, 1)


def test_is_node_rejects_smooth_point():
    F = field_make(3, 1)
    conic = P(F, {(1, 0, 1): 1, (0, 2, 0): 2})
    with pytest.raises(ValueError):
        cv.is_node(conic, cv.PlanePoint.make(F, (1, 0, 0)))


def test_lines_q4_reducible_flag():
    r = cv.genus_report(cv.build_curve("lines", 4), 1)
    assert r.nodes == 10 and r.plucker_genus < 0 and r.reducible


def test_scan_budget():
    with pytest.raises(cv.BudgetExceeded):
        cv.singular_points(cv.build_curve("lines", 3), 4, budget=100)


def test_quadric_deformed_q3_smooth_at_degree_4():
    lam = cv.random_lambda(3, 4, random.Random(7))
    C = cv.build_curve("quadric-unitary-deformed", 3, w=2, lam=lam, lam_s=4)
    r = cv.genus_report(C, 1)
    assert r.nodes == 0 and r.plucker_genus == 3


# symmetry


def test_lines_invariant_under_conic_action():
    assert cv.invariance_check(cv.build_curve("lines", 3), cv.pgl2_action(3, "conic"))


def test_quadric_invariant_under_quadric_action():
    assert cv.invariance_check(cv.build_curve("quadric-unitary", 3, w=2), cv.pgl2_action(3, "quadric", w=2))


def test_non_invariant_witness():
    F = field_make(3, 1)
    res = cv.invariance_check(P(F, {(4, 0, 0): 1}), cv.pgl2_action(3, "conic"))
    assert not res and res.witness is not None


def test_quadric_model_needs_odd_q():
    with pytest.raises(ValueError):
        cv.pgl2_action(4, "quadric")


def test_node_orbit_transitive_q5():
    C = cv.build_curve("quadric-unitary", 5)
    gens = cv.pgl2_action(5, "quadric")
    pts = set(cv.singular_points(C, 2))
    assert len(pts) == 10
    assert cv.orbit(next(iter(pts)), gens) == pts


# polynomial arithmetic


_exps = st.tuples(st.integers(0, 3), st.integers(0, 3)).map(lambda t: (t[0], t[1], 3 - t[0] - t[1]) if sum(t) <= 3
                                                             else (3, 0, 0))
_polys = st.dictionaries(_exps, st.integers(0, 8), max_size=6)
_points = st.tuples(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))


@settings(max_examples=60, deadline=None)
@given(_polys, _polys, _points)
def test_evaluation_is_multiplicative(a, b, x):
    F = field_make(3, 2)
    A, B = cv.HomogPoly3.make(F, a, 3), cv.HomogPoly3.make(F, b, 3)
    assert (A * B)(x) == F.mul(A(x), B(x))
    assert (A + B)(x) == F.add(A(x), B(x))


@settings(max_examples=40, deadline=None)
@given(_polys, _points, st.lists(st.integers(0, 8), min_size=9, max_size=9))
def test_substitution_matches_evaluation(a, x, M):
    F = field_make(3, 2)
    A = cv.HomogPoly3.make(F, a, 3)
    Mx = tuple(F.add(F.add(F.mul(M[3 * r], x[0]), F.mul(M[3 * r + 1], x[1])), F.mul(M[3 * r + 2], x[2]))
               for r in range(3))
    assert A.substitute(M)(x) == A(Mx)


@settings(max_examples=40, deadline=None)
@given(_polys, st.sampled_from([(1, 0, 0), (0, 1, 0), (0, 0, 1)]))
def test_first_hasse_derivative_is_partial(a, alpha):
    F = field_make(2, 2)
    A = cv.HomogPoly3.make(F, {e: c % 4 for e, c in a.items()}, 3)
    assert A.hasse(alpha) == A.partial(alpha.index(1))


def test_over_embeds_coefficients():
    F, E = field_make(2, 2), field_make(2, 4)
    C = cv.build_curve("bh-char2", 4)
    assert all(c2 == embed(F, E, c) for (_, c), (_, c2) in zip(C.coeffs, C.over(E).coeffs))
    assert prime_power(E.q) == (2, 4)


def test_deforming_quadric_sign_at_q_1_mod_4():
    # with the printed epsilon = w the q=5 deformation is singular; with -w it is smooth at this degree
    F = field_make(5, 1)
    w = cv.least_nonsquare(F)
    lam = cv.random_lambda(5, 4, random.Random(7))
    printed = cv.build_curve("quadric-unitary-deformed", 5, w=w, lam=lam, lam_s=4)
    flipped = cv.build_curve("quadric-unitary-deformed", 5, w=w, lam=lam, lam_s=4, eps=(-w) % 5)
    assert cv.singular_points(printed, 1)
    assert not cv.singular_points(flipped, 1)
