"""Acceptance suite: eleven end-to-end criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the terminal summary)
or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import random
import sys
from fractions import Fraction

import pytest

from mumford import amalgam as am, catalog, curves as cv, schottky as sk, strat
from mumford.ff import prime_power
from mumford.grpcat import ConcreteGroup, Cyclic, CyclicOps, DihedralOps, PGL2, Borel

RESULTS: dict[int, tuple[bool, str]] = {}
SEED = 20240101


class Check:
    """Collects named sub-checks so a failing criterion reports every failing part."""

    def __init__(self):
        self.failed: list[str] = []
        self.count = 0

    def __call__(self, ok: bool, what: str) -> None:
        self.count += 1
        if not ok:
            self.failed.append(what)

    @property
    def ok(self) -> bool:
        return not self.failed

    def detail(self) -> str:
        if self.ok:
            return f"{self.count} checks"
        shown = "; ".join(self.failed[:6]) + (" ..." if len(self.failed) > 6 else "")
        return f"{len(self.failed)}/{self.count} checks failed: {shown}"


def _cert_checks(c: Check, cert, label: str) -> None:
    c(cert.valid, f"{label}: certificate invalid {cert.problems}")
    c(cert.graph.connected, f"{label}: graph disconnected")
    c(cert.genus == 1 + cert.graph.num_edges - cert.graph.num_vertices, f"{label}: Betti number")
    c(cert.genus == cert.genus_from_mu, f"{label}: graph genus {cert.genus} != 1+|im|mu {cert.genus_from_mu}")


# ---------------------------------------------------------------------------
# criteria


def criterion_1() -> Check:
    """Bound tables recompute exactly for q in {3,4,5,7,8,9}."""
    c = Check()
    for q in (3, 4, 5, 7, 8, 9):
        p, _ = prime_power(q)
        rows = catalog.bound_tables(p, q)
        c(bool(rows), f"q={q}: no rows")
        for r in rows:
            tag = f"q={q} {r.family_id}{dict(r.params)}"
            for name, ok in r.checks().items():
                c(ok, f"{tag}: {name}")
            c(r.g0 == 1 + r.mu * r.N0, f"{tag}: g0")
            c(catalog.suitable(r.N0, r.mu), f"{tag}: not suitable")
    rows5 = {r.family_id: r for r in catalog.bound_tables(5, 5)}
    r = rows5.get("8.4.pgl-dihedral")
    c(r is not None and (r.N0, r.mu, r.g0) == (120, Fraction(3, 40), 10), "PGL2(5)*C6 D6 row")
    r = rows5.get("8.5.pgl-b2")
    c(r is not None and (r.N0, r.mu, r.g0) == (7200, Fraction(19, 600), 229), "PGL row q=5 strict table")
    return c


def criterion_2() -> Check:
    """The sum formula and max(3) + maxp + 2 agree wherever the latter applies (no trivial edges).

    Trees with a trivial edge are checked against the branch count their enumerator guarantees.
    """
    c = Check()
    total = 0
    for p in (2, 3, 5, 7):
        for expected, insts in ((2, catalog.enumerate_two_branch(p, 9, 3)), (3, catalog.enumerate_three_branch(p, 9, 3))):
            for inst in insts:
                total += 1
                tag = f"p={p} {inst.family_id}{dict(inst.params)}"
                try:
                    b = am.branch_count(inst.tree)
                except am.BranchCountMismatch as exc:
                    c(False, f"{tag}: {exc}")
                    continue
                if b.indecomposable:
                    c(b.total == b.max3 + b.maxp + 2, f"{tag}: {b.total} != {b.max3}+{b.maxp}+2")
                c(b.total == expected, f"{tag}: br={b.total}, enumerator promises {expected}")
    c(total >= 200, f"only {total} instances")
    return c


def criterion_3() -> Check:
    """Genus certificates for the free product onto S3, the five maps onto 12(g-1) groups, pgl-dihedral."""
    c = Check()
    tree = am.free_product(5, Cyclic(2), Cyclic(3))
    hom = sk.AmalgamHom(tree, DihedralOps(3),
                        {"v1": sk.VertexMap(ConcreteGroup(CyclicOps(2), [1]), [(0, 1)]),
                         "v2": sk.VertexMap(ConcreteGroup(CyclicOps(3), [1]), [(1, 0)])},
                        [sk.EdgeMap([], [])])
    cert = sk.verify_hom(hom)
    _cert_checks(c, cert, "C2*C3->D3")
    c(cert.genus == 2, f"C2*C3->D3 genus {cert.genus}")
    for g in range(2, 7):
        cert = sk.verify_hom(sk.build_named("herrlich-g", g=g))
        _cert_checks(c, cert, f"phi_{g}")
        c(cert.genus == g, f"phi_{g}: genus {cert.genus}")
        c(cert.image_order == 12 * (g - 1), f"phi_{g}: order {cert.image_order} != 12(g-1)")
    for q, g in ((3, 3), (4, 6), (5, 10)):
        cert = sk.verify_hom(sk.build_named("pgl-dihedral", q=q))
        _cert_checks(c, cert, f"pgl-dihedral q={q}")
        c(cert.genus == g, f"pgl-dihedral q={q}: genus {cert.genus}")
    return c


def criterion_4() -> Check:
    """|H2| = 72, three choices of V each of genus 6, and exactly three kernels of index 72."""
    c = Check()
    choices = sk._hm_choices(2)
    c(len(choices) == 3, f"{len(choices)} choices of V")
    for k in range(len(choices)):
        cert = sk.verify_hom(sk.build_named("h-m", m=2, choice=k))
        _cert_checks(c, cert, f"V-choice {k}")
        c(cert.image_order == 72 and cert.genus == 6, f"V-choice {k}: order {cert.image_order}, genus {cert.genus}")
    tree = am.chain(3, [PGL2(3), Borel(2, 2)], [Borel(1, 2)])
    r = sk.count_index_homs(tree, 72, sk.count_candidates("h2", 72))
    c(r.kernels == 3, f"count at order 72 gave {r.kernels}")
    return c


def criterion_5() -> Check:
    c = Check()
    cert = sk.verify_hom(sk.build_named("two-eval", q=5, a=0, a2=1, pgl=True))
    _cert_checks(c, cert, "two-eval")
    c(cert.image_order == 7200, f"order {cert.image_order}")
    c(cert.genus == 229, f"genus {cert.genus}")
    return c


def criterion_6() -> Check:
    c = Check()
    hom = sk.build_named("commutator", q=4)
    cert = sk.verify_hom(hom)
    _cert_checks(c, cert, "commutator q=4")
    c(cert.image_order == 60 * 4**5, f"order {cert.image_order}")
    c(cert.genus == 1 + cert.image_order * am.mu(hom.tree), "genus vs mu")
    return c


def _deformed_scans(c: Check) -> None:
    rng = random.Random(SEED)
    cases = [("quadric-unitary-deformed", 3), ("lines-deformed", 3), ("bh-char2-deformed", 4),
             ("dual-lines-char2-deformed", 4), ("fukasawa", 4)]
    for family, q in cases:
        _, s = prime_power(q)
        for _ in range(20):
            lam = cv.random_lambda(q, 4, rng)
            C = cv.build_curve(family, q, lam=lam, lam_s=4 * s)
            pts = cv.singular_points(C, 1)
            c(not pts, f"{family} q={q} lambda={lam}: {len(pts)} singular points over F_{q}^4")


def criterion_7() -> Check:
    """Singular points, nodes and symmetry of the plane curves; deformed scans."""
    c = Check()
    for q in (3, 5, 7):
        C = cv.build_curve("quadric-unitary", q)
        r = cv.genus_report(C, 2)
        c(r.nodes == q * (q - 1) // 2, f"quadric-unitary q={q}: {r.nodes} nodes")
        c(all(s.is_node and not s.tangents_rational_over_base for s in r.singular_points),
          f"quadric-unitary q={q}: tangent types")
        c(r.plucker_genus == 0, f"quadric-unitary q={q}: genus {r.plucker_genus}")
        gens = cv.pgl2_action(q, "quadric")
        c(bool(cv.invariance_check(C, gens)), f"quadric-unitary q={q}: not invariant")
        pts = {s.point for s in r.singular_points}
        c(bool(pts) and cv.orbit(next(iter(pts)), gens) == pts, f"quadric-unitary q={q}: orbit not transitive")
    for q in (3, 5):
        r = cv.genus_report(cv.build_curve("lines", q), 2)
        c(r.nodes == q * (q + 1) // 2, f"lines q={q}: {r.nodes} nodes")
        c(all(s.tangents_rational for s in r.singular_points), f"lines q={q}: tangents")
    pts = cv.singular_points(cv.build_curve("bh-char2", 4), 2)
    c(len(pts) == 6, f"bh-char2 q=4: {len(pts)} singular points over F_16")
    _deformed_scans(c)
    return c


def criterion_8() -> Check:
    c = Check()
    hits = [g for g in range(2, 10**4 + 1) if catalog.compare(12 * (g - 1), g) > 0]
    c(hits == [4, 5], f"F(g) < 12(g-1) at {hits[:10]}")
    for q in range(3, 10):
        g = q * (q - 1) // 2
        c(catalog.f_bound(g).exact == q**3 - q and catalog.compare(q**3 - q, g) == 0, f"F({g}) vs q={q}")
    ab = catalog.aut_bound(6, 3)
    c(ab.value == 72 and ab.exception, "aut_bound(6,3)")
    for p in (2, 3, 5, 7):
        for g in range(2, 7):
            expected = 12 * (g - 1) if g <= 5 else (72 if p == 3 else 60)
            ab = catalog.aut_bound(g, p)
            c(ab.value == expected and ab.max_g == expected, f"Max({g}) at p={p}")
    return c


def criterion_9() -> Check:
    c = Check()
    for p in (2, 3, 5, 7, 11, 13):
        insts = catalog.mu_twelfth(p)
        c(len(insts) == (3 if p in (2, 3, 5) else 4), f"p={p}: {len(insts)} amalgams")
        for inst in insts:
            (_, g1), (_, g2) = inst.tree.vertices
            c(am.mu(inst.tree) == Fraction(1, 12), f"p={p} {inst.family_id}: mu")
            c(am.realizable_simple(g1, inst.tree.edges[0].group, g2, p), f"p={p} {inst.family_id}: not realizable")
    return c


def criterion_10() -> Check:
    """Tame coefficients, the series identity, derivative valuations and irregularity."""
    c = Check()
    for p in (2, 3, 5):
        for m in range(1, 9):
            if m % p == 0:
                continue
            for n in range(0, 31):
                for i in range(m):
                    c(strat.tame_coeff(i, m, n, p) == strat.tame_oracle(i, m, n, p), f"tame p={p} i={i} m={m} n={n}")
                c(strat.tame_f(n, m, p) <= n, f"tame f p={p} m={m} n={n}")
    for p in (2, 3, 5):
        res = strat.as_series(p, 8, 60 * p)
        c(res.identity_ok, f"p={p}: R^p - R identity")
        for n in range(1, 9):
            v = strat.as_derivative(res, 1, n).valuation()
            c(v == 1 + n - 2 * n * p, f"p={p} n={n}: val {v} != {1 + n - 2 * n * p}")
        fs = [strat.as_f(n, p, res=res).f for n in range(1, 6)]
        c(any(f > n for n, f in zip(range(1, 6), fs)), f"p={p}: f = {fs} never exceeds n")
    return c


def criterion_11() -> Check:
    """Searched homomorphisms land in the predicted PSL2 or PGL2."""
    c = Check()
    found = 0
    for p in (2, 3, 5):
        for e in catalog.enumerate_small_mu(p, 9, 3):
            inst = e.instance
            if am.mu(inst.tree) <= 0:
                continue
            s = sk.least_common_exponent(inst.tree)
            if p**s > 25:
                continue
            tag = f"p={p} {inst.family_id}{dict(inst.params)} s={s}"
            r = sk.search_hom(inst.tree, s)
            c(r is not None, f"{tag}: no hom found")
            if r is None:
                continue
            found += 1
            c(r.certificate.valid, f"{tag}: invalid certificate")
            c(r.predicted is not None, f"{tag}: no prediction")
            c(bool(r.matches), f"{tag}: image {r.image}, predicted {r.predicted}")
    c(found >= 10, f"only {found} instances")
    return c


CRITERIA = {
    1: ("bound tables recompute exactly", criterion_1),
    2: ("branch-count formulas agree on all enumerated instances", criterion_2),
    3: ("genus certificates (C2*C3, five maps, pgl-dihedral)", criterion_3),
    4: ("index-72 quotients: three choices, genus 6, three kernels", criterion_4),
    5: ("two-eval(5,0,1,pgl): order 7200, genus 229", criterion_5),
    6: ("commutator(4): order 61440, genus from both paths", criterion_6),
    7: ("plane curves: nodes, tangents, orbit, deformed scans", criterion_7),
    8: ("F(g), Max(g) and the automorphism bound", criterion_8),
    9: ("mu = 1/12 amalgams are realizable", criterion_9),
    10: ("divided derivatives: tame oracle, identity, valuations, irregularity", criterion_10),
    11: ("PSL/PGL image prediction on catalog instances", criterion_11),
}


def _line(k: int, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {CRITERIA[k][0]} ({detail})"


def _run(k: int) -> tuple[bool, str]:
    check = CRITERIA[k][1]()
    RESULTS[k] = (check.ok, check.detail())
    return RESULTS[k]


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_acceptance(k, capsys):
    ok, detail = _run(k)
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


def summary_lines() -> list[str]:
    return [_line(k, *RESULTS[k]) for k in sorted(RESULTS)]


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        ok, detail = _run(k)
        print(_line(k, ok, detail), flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
