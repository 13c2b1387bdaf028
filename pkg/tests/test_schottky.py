"""Homomorphisms with torsion-free kernel: certificates, named constructions, counting, search."""

import json
from fractions import Fraction

import pytest

from mumford import amalgam as am, catalog, schottky as sk
from mumford.ff import field_make
from mumford.grpcat import (PGL2, Borel, ConcreteGroup, CyclicOps, DihedralOps, NonHomomorphism, NotEmbeddable,
                            PGL2Ops, A5, Cyclic, Dihedral)


def _free_c2_c3(images3):
    tree = am.free_product(5, Cyclic(2), Cyclic(3))
    src2, src3 = ConcreteGroup(CyclicOps(2), [1]), ConcreteGroup(CyclicOps(3), [1])
    return sk.AmalgamHom(tree, DihedralOps(3), {"v1": sk.VertexMap(src2, [(0, 1)]), "v2": sk.VertexMap(src3, images3)},
                         [sk.EdgeMap([], [])])


def _assert_two_genus_paths(cert):
    assert cert.valid, cert.problems
    assert cert.graph.connected
    assert cert.genus == 1 + cert.graph.num_edges - cert.graph.num_vertices
    assert cert.genus == cert.genus_from_mu
    assert cert.genus - 1 == cert.image_order * am.mu(cert.hom.tree)


def test_free_product_onto_s3_has_genus_2():
    cert = sk.verify_hom(_free_c2_c3([(1, 0)]))
    _assert_two_genus_paths(cert)
    assert cert.genus == 2 and cert.image_order == 6


def test_non_injective_vertex_map_is_invalid():
    cert = sk.verify_hom(_free_c2_c3([(0, 0)]))
    assert not cert.valid and not cert.injective_on_vertices


def test_non_homomorphism_is_reported_with_witness():
    with pytest.raises(NonHomomorphism) as exc:
        sk.verify_hom(_free_c2_c3([(0, 1)]))  # an involution cannot be the image of a 3-cycle
    assert exc.value.witness is not None


def test_lemma_phi3_over_f3():
    h = sk.build_named("herrlich-g", g=3)
    F3 = field_make(3, 1)
    P = PGL2Ops(F3)
    assert h.vertices["v1"].images == [P.make((1, 1, 0, 1)), P.make((2, 0, 0, 1))]
    cert = sk.verify_hom(h)
    _assert_two_genus_paths(cert)
    assert (cert.genus, cert.image_order) == (3, 24)


@pytest.mark.parametrize("g", [2, 3, 4, 5, 6])
def test_herrlich_maps(g):
    cert = sk.verify_hom(sk.build_named("herrlich-g", g=g))
    _assert_two_genus_paths(cert)
    assert cert.genus == g and cert.image_order == 12 * (g - 1)


@pytest.mark.parametrize("q", [3, 4, 5])
def test_pgl_dihedral(q):
    cert = sk.verify_hom(sk.build_named("pgl-dihedral", q=q))
    _assert_two_genus_paths(cert)
    assert cert.genus == q * (q - 1) // 2
    assert cert.image_order == q**3 - q


@pytest.mark.parametrize("q", [3, 4, 5])
def test_dihedral_borel(q):
    cert = sk.verify_hom(sk.build_named("dihedral-borel", q=q))
    _assert_two_genus_paths(cert)
    assert cert.genus == q * (q - 1) // 2


@pytest.mark.parametrize("name,params", [
    ("diag-product", {"q": 3, "d": 2}),
    ("diag-product-split", {"q": 3, "partition": [1, 1]}),
    ("qplus-product", {"q": 3, "d": 1}),
    ("d2-chain", {"l": 3, "n": 2}),
    ("a4-chain", {"n": 2}),
])
def test_catalogued_constructions_certify(name, params):
    _assert_two_genus_paths(sk.verify_hom(sk.build_named(name, **params)))


def test_diag_product_image_is_det_linked():
    cert = sk.verify_hom(sk.build_named("diag-product", q=3, d=2))
    # pairs (g1, g2) with det g1 = det g2 mod squares: |PGL2(F_3)|^2 / 2
    assert cert.image_order == 24 * 24 // 2


@pytest.mark.parametrize("choice", [0, 1, 2])
def test_h2_choices(choice):
    cert = sk.verify_hom(sk.build_named("h-m", m=2, choice=choice))
    _assert_two_genus_paths(cert)
    assert (cert.image_order, cert.genus) == (72, 6)


def test_h_m_choice_count():
    for m in (2, 3):
        assert len(sk._hm_choices(m)) == (3**m - 3 ** (m - 1)) // 2


def test_commutator_q3():
    cert = sk.verify_hom(sk.build_named("commutator", q=3))
    _assert_two_genus_paths(cert)
    assert cert.image_order == 12 * 3**4


def test_invalid_params():
    with pytest.raises(ValueError):
        sk.build_named("pgl-dihedral", q=2)
    with pytest.raises(ValueError):
        sk.build_named("two-eval", q=5, a=1, a2=1, pgl=True)
    with pytest.raises(ValueError):
        sk.build_named("no-such-thing")
    with pytest.raises(ValueError):
        sk.build_named("herrlich-g", g=7)


def test_hom_json_round_trip():
    h = sk.build_named("herrlich-g", g=4)
    back = sk.hom_from_json(json.loads(json.dumps(sk.hom_to_json(h))))
    c1, c2 = sk.verify_hom(h), sk.verify_hom(back)
    assert (c1.genus, c1.image_order, c1.valid) == (c2.genus, c2.image_order, c2.valid)


def test_count_d3_d2_order_12():
    tree = am.chain(5, [Dihedral(3), Dihedral(2)], [Cyclic(2)])
    r = sk.count_index_homs(tree, 12, sk.count_candidates("d3d2", 12))
    assert r.kernels == 2


def test_count_order_one_is_zero():
    tree = am.chain(5, [Dihedral(3), Dihedral(2)], [Cyclic(2)])
    assert sk.count_index_homs(tree, 1, []).kernels == 0


def test_count_budget_is_reported():
    tree = am.chain(5, [Dihedral(3), Dihedral(2)], [Cyclic(2)])
    with pytest.raises(sk.BudgetExceeded):
        sk.count_index_homs(tree, 12, sk.count_candidates("d3d2", 12), budget=5)


def test_search_pgl4_d5():
    tree = am.chain(2, [PGL2(4), Dihedral(5)], [Cyclic(5)])
    r = sk.search_hom(tree, 2)
    assert r is not None and r.certificate.valid
    assert r.image == "PGL"


def test_search_borel_pair_p3():
    tree = am.chain(3, [Borel(1, 2), Borel(1, 2)], [Cyclic(2)])
    r = sk.search_hom(tree, 1)
    assert r is not None and r.certificate.valid
    assert r.certificate.image_order == 24 and r.image == "PGL"


def test_search_precondition():
    tree = am.chain(7, [A5, Dihedral(5)], [Cyclic(5)])
    with pytest.raises(NotEmbeddable):
        sk.search_hom(tree, 1)


@pytest.mark.parametrize("p,fid,expected", [(3, "3.2.i", "PSL"), (3, "4.8.i", "PGL"), (2, "3.2.ix", "PGL")])
def test_search_matches_prediction_small(p, fid, expected):
    inst = next(e.instance for e in catalog.enumerate_small_mu(p, 9, 3) if e.instance.family_id == fid)
    s = sk.least_common_exponent(inst.tree)
    r = sk.search_hom(inst.tree, s)
    assert r is not None and r.certificate.valid
    assert r.predicted == expected and r.image == expected and r.matches


def test_prediction_only_below_one_twelfth():
    tree = am.chain(2, [PGL2(4), Dihedral(5)], [Cyclic(5)])
    assert am.mu(tree) == Fraction(1, 12)
    assert sk.predict_image(tree, 2) is None


def test_induced_ops_associative():
    h = sk.build_named("commutator", q=3)
    elems = [img for vm in h.vertices.values() for img in vm.images]
    target = h.target
    for x in elems:
        for y in elems:
            for z in elems:
                assert target.mul(target.mul(x, y), z) == target.mul(x, target.mul(y, z))
