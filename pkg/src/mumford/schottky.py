"""Homomorphisms from amalgams to finite groups with torsion-free kernel, their genus
certificates via the quotient graph, the named constructions, exhaustive kernel counts and a
search for maps into PGL2 over a finite field."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Iterable, Sequence

from .amalgam import TreeOfGroups, chain, det_kernel_index, mu, validate
from .ff import Field, embed, field_make, field_of_order, prime_power
from .grpcat import (
    DEFAULT_BUDGET,
    A4,
    Borel,
    ConcreteGroup,
    Cyclic,
    CyclicOps,
    Dihedral,
    DihedralOps,
    DirectProductOps,
    GroupOps,
    NonHomomorphism,
    NotEmbeddable,
    PGL2,
    PGL2Ops,
    PSL2,
    PermOps,
    VectorOps,
    _small_generating_set,
    closure,
    concrete,
    embedded_form,
    extend_hom,
    form_embeds_in,
    order,
    pgl2_elements,
)

__all__ = [
    "AffineOps",
    "InducedOps",
    "VertexMap",
    "EdgeMap",
    "AmalgamHom",
    "QuotientGraph",
    "SchottkyCertificate",
    "BudgetExceeded",
    "verify_hom",
    "quotient_graph",
    "build_named",
    "NAMED",
    "count_index_homs",
    "CountResult",
    "search_hom",
    "SearchResult",
    "predict_image",
    "presentation",
    "least_common_exponent",
    "count_candidates",
    "hom_to_json",
    "hom_from_json",
]


class BudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# extra element arithmetic


class AffineOps(GroupOps):
    """Maps y -> s*y + v of F^d with s in F^*; elements (s, v), composed as maps."""

    def __init__(self, F: Field, d: int):
        self.F, self.d = F, d
        self.identity = (1, (0,) * d)

    def mul(self, x, y):
        F = self.F
        s1, v1 = x
        s2, v2 = y
        return (F.mul(s1, s2), tuple(F.add(a, F.mul(s1, b)) for a, b in zip(v1, v2)))

    def inv(self, x):
        F = self.F
        s, v = x
        si = F.inv(s)
        return (si, tuple(F.neg(F.mul(si, a)) for a in v))


class InducedOps(GroupOps):
    """G acting on F_q^{P^1(F_q)} through the module induced from the Borel character.

    Elements (g, f) with g in G (canonical PGL2 tuples over F_q) and f a tuple indexed by the
    points of P^1(F_q) (index 0 is infinity, index 1 + a is the point a). The point stabilizer of
    infinity acts on its coordinate through (a b; 0 d) -> a/d; coset representatives
    h_a = (a -1; 1 0) carry infinity to a.
    """

    def __init__(self, F: Field, psl: bool):
        self.F, self.psl = F, psl
        self.pg = PGL2Ops(F)
        q = F.q
        self.n = q + 1
        self.identity = (self.pg.identity, (0,) * self.n)
        self.points = ["inf"] + list(range(q))
        self._h = [self.pg.identity] + [self.pg.make((a, F.neg(1), 1, 0)) for a in range(q)]
        self._hinv = [self.pg.inv(h) for h in self._h]
        elems = pgl2_elements(self.pg)
        if psl and F.p != 2:
            elems = [g for g in elems if F.is_square(self.pg.det(g))]
        self.G = elems
        self._act: dict[tuple, tuple[tuple[int, ...], tuple[int, ...]]] = {}

    def _index(self, pt) -> int:
        return 0 if pt == "inf" else 1 + pt

    def action(self, g) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(perm, scalars): coordinate i goes to perm[i] multiplied by scalars[i]."""
        got = self._act.get(g)
        if got is not None:
            return got
        F, pg = self.F, self.pg
        perm, scal = [], []
        for i, pt in enumerate(self.points):
            j = self._index(pg.act(g, pt))
            b = pg.mul(pg.mul(self._hinv[j], g), self._h[i])
            if b[2] != 0:  # pragma: no cover - b fixes infinity by construction
                raise AssertionError("coset representative does not fix infinity")
            perm.append(j)
            scal.append(F.div(b[0], b[3]))
        got = (tuple(perm), tuple(scal))
        self._act[g] = got
        return got

    def act(self, g, f):
        perm, scal = self.action(g)
        out = [0] * self.n
        mul = self.F.mul
        for i, v in enumerate(f):
            if v:
                out[perm[i]] = mul(scal[i], v)
        return tuple(out)

    def mul(self, x, y):
        g1, f1 = x
        g2, f2 = y
        add = self.F.add
        return (self.pg.mul(g1, g2), tuple(add(a, b) for a, b in zip(f1, self.act(g1, f2))))

    def inv(self, x):
        g, f = x
        gi = self.pg.inv(g)
        return (gi, tuple(self.F.neg(v) for v in self.act(gi, f)))

    def unit(self, idx: int, value: int):
        f = [0] * self.n
        f[idx] = value
        return (self.pg.identity, tuple(f))


# ---------------------------------------------------------------------------
# JSON for element arithmetic


def ops_to_json(ops: GroupOps) -> dict:
    if isinstance(ops, PGL2Ops):
        return {"kind": "pgl2", "p": ops.F.p, "s": ops.F.s}
    if isinstance(ops, AffineOps):
        return {"kind": "affine", "p": ops.F.p, "s": ops.F.s, "d": ops.d}
    if isinstance(ops, InducedOps):
        return {"kind": "induced", "p": ops.F.p, "s": ops.F.s, "psl": ops.psl}
    if isinstance(ops, DirectProductOps):
        return {"kind": "product", "factors": [ops_to_json(f) for f in ops.factors]}
    if isinstance(ops, PermOps):
        return {"kind": "perm", "n": ops.n}
    if isinstance(ops, DihedralOps):
        return {"kind": "dihedral", "l": ops.l}
    if isinstance(ops, CyclicOps):
        return {"kind": "cyclic", "m": ops.m}
    if isinstance(ops, VectorOps):
        return {"kind": "vector", "p": ops.p, "n": ops.n}
    raise ValueError(f"no JSON form for {type(ops).__name__}")


def ops_from_json(d: dict) -> GroupOps:
    kind = d["kind"]
    if kind == "pgl2":
        return PGL2Ops(field_make(d["p"], d["s"]))
    if kind == "affine":
        return AffineOps(field_make(d["p"], d["s"]), d["d"])
    if kind == "induced":
        return InducedOps(field_make(d["p"], d["s"]), bool(d["psl"]))
    if kind == "product":
        return DirectProductOps([ops_from_json(f) for f in d["factors"]])
    if kind == "perm":
        return PermOps(d["n"])
    if kind == "dihedral":
        return DihedralOps(d["l"])
    if kind == "cyclic":
        return CyclicOps(d["m"])
    if kind == "vector":
        return VectorOps(d["p"], d["n"])
    raise ValueError(f"unknown element arithmetic {kind!r}")


def _to_tuple(x):
    return tuple(_to_tuple(y) for y in x) if isinstance(x, list) else x


def _to_list(x):
    return [_to_list(y) for y in x] if isinstance(x, tuple) else x


# ---------------------------------------------------------------------------
# homomorphism data


@dataclass
class VertexMap:
    source: ConcreteGroup  # a copy of the vertex group
    images: list  # images of source.gens in the target


@dataclass
class EdgeMap:
    gens_u: list  # generators of the edge group inside the source of edge.u
    gens_v: list  # the same generators inside the source of edge.v, in the same order


@dataclass
class AmalgamHom:
    tree: TreeOfGroups
    target: GroupOps
    vertices: dict[str, VertexMap]
    edges: list[EdgeMap]
    name: str = ""
    params: dict = field(default_factory=dict)


def hom_to_json(h: AmalgamHom) -> dict:
    return {
        "name": h.name,
        "params": h.params,
        "tree": h.tree.to_json(),
        "target": ops_to_json(h.target),
        "vertices": {
            v: {"ops": ops_to_json(m.source.ops), "gens": _to_list(list(m.source.gens)), "images": _to_list(list(m.images))}
            for v, m in h.vertices.items()
        },
        "edges": [{"gens_u": _to_list(list(e.gens_u)), "gens_v": _to_list(list(e.gens_v))} for e in h.edges],
    }


def hom_from_json(d: dict) -> AmalgamHom:
    try:
        tree = TreeOfGroups.from_json(d["tree"])
        target = ops_from_json(d["target"])
        verts = {}
        for v, m in d["vertices"].items():
            ops = ops_from_json(m["ops"])
            verts[v] = VertexMap(ConcreteGroup(ops, [_to_tuple(g) for g in m["gens"]]), [_to_tuple(x) for x in m["images"]])
        edges = [EdgeMap([_to_tuple(g) for g in e["gens_u"]], [_to_tuple(g) for g in e["gens_v"]]) for e in d["edges"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed hom JSON: {exc}") from None
    return AmalgamHom(tree, target, verts, edges, d.get("name", ""), d.get("params", {}))


# ---------------------------------------------------------------------------
# verification


@dataclass
class QuotientGraph:
    num_vertices: int
    num_edges: int
    connected: bool
    vertex_counts: dict[str, int]
    edge_counts: list[int]


@dataclass
class SchottkyCertificate:
    valid: bool
    injective_on_vertices: bool
    image_order: int
    genus: int | None
    genus_from_mu: Fraction | None
    graph: QuotientGraph | None
    problems: list[str]
    hom: AmalgamHom | None = None

    def to_json(self) -> dict:
        g = self.graph
        return {
            "valid": self.valid,
            "injective_on_vertices": self.injective_on_vertices,
            "image_order": self.image_order,
            "genus": self.genus,
            "genus_from_mu": None if self.genus_from_mu is None else str(self.genus_from_mu),
            "graph": None if g is None else {
                "vertices": g.num_vertices, "edges": g.num_edges, "connected": g.connected,
            },
            "problems": self.problems,
        }


def _coset_labels(ops: GroupOps, elements: Sequence, sub: Sequence) -> dict:
    label: dict = {}
    k = 0
    mul = ops.mul
    for h in elements:
        if h in label:
            continue
        for s in sub:
            label[mul(h, s)] = k
        k += 1
    return label


def quotient_graph(ops: GroupOps, im: Sequence, vertex_images: dict[str, set], edge_images: list[set],
                   edge_ends: list[tuple[str, str]]) -> QuotientGraph:
    """Cosets of the vertex and edge images in im(phi); edge coset hE joins hV_u and hV_v."""
    vlabels = {v: _coset_labels(ops, im, list(s)) for v, s in vertex_images.items()}
    offsets, total = {}, 0
    counts = {}
    for v in vertex_images:
        offsets[v] = total
        counts[v] = max(vlabels[v].values()) + 1
        total += counts[v]
    parent = list(range(total))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ecounts = []
    for (u, v), s in zip(edge_ends, edge_images):
        elabel = _coset_labels(ops, im, list(s))
        reps: dict[int, Any] = {}
        for h, k in elabel.items():
            reps.setdefault(k, h)
        ecounts.append(len(reps))
        for h in reps.values():
            a, b = find(offsets[u] + vlabels[u][h]), find(offsets[v] + vlabels[v][h])
            if a != b:
                parent[a] = b
    roots = {find(x) for x in range(total)}
    return QuotientGraph(total, sum(ecounts), len(roots) == 1, counts, ecounts)


def verify_hom(hom: AmalgamHom, budget: int = DEFAULT_BUDGET) -> SchottkyCertificate:
    """Check the vertex maps, edge agreement and vertex injectivity; compute the genus twice."""
    tree = hom.tree
    problems: list[str] = []
    if validate(tree):
        raise ValueError("tree does not validate")
    if len(hom.edges) != len(tree.edges):
        raise ValueError("one edge map per tree edge is required")
    p, H = tree.p, hom.target
    phis: dict[str, dict] = {}
    injective = True
    for vid, spec in tree.vertices:
        vm = hom.vertices[vid]
        try:
            phi = extend_hom(vm.source.ops, vm.source.gens, H, vm.images, budget=budget)
        except NonHomomorphism as exc:
            raise NonHomomorphism(f"vertex {vid}: {exc}", witness=exc.witness) from None
        if len(phi) != order(spec, p):
            raise ValueError(f"vertex {vid}: source has order {len(phi)}, expected {order(spec, p)}")
        if len(set(phi.values())) != len(phi):
            injective = False
            problems.append(f"vertex {vid}: map is not injective (finite-order kernel elements)")
        phis[vid] = phi
    edge_images = []
    for i, (e, em) in enumerate(zip(tree.edges, hom.edges)):
        su, sv = hom.vertices[e.u].source, hom.vertices[e.v].source
        for x in em.gens_u:
            if x not in phis[e.u]:
                raise ValueError(f"edge {i}: generator {x} is not in the source of {e.u}")
        for x in em.gens_v:
            if x not in phis[e.v]:
                raise ValueError(f"edge {i}: generator {x} is not in the source of {e.v}")
        sub_u = closure(su.ops, em.gens_u, budget)
        if len(sub_u) != order(e.group, p):
            raise ValueError(f"edge {i}: edge generators span {len(sub_u)} elements, expected {order(e.group, p)}")
        iso = extend_hom(su.ops, em.gens_u, sv.ops, em.gens_v, budget=budget)
        if len(set(iso.values())) != len(iso):
            raise ValueError(f"edge {i}: the two edge copies are not isomorphic through the generators")
        for x, y in zip(em.gens_u, em.gens_v):
            if phis[e.u][x] != phis[e.v][y]:
                raise NonHomomorphism(f"edge {i}: images disagree on an edge generator", witness=(x, y))
        edge_images.append({phis[e.u][x] for x in sub_u})
    gens = [img for vm in hom.vertices.values() for img in vm.images]
    im = closure(H, gens, budget)
    vertex_images = {vid: set(phis[vid].values()) for vid, _ in tree.vertices}
    graph = quotient_graph(H, im, vertex_images, edge_images, [(e.u, e.v) for e in tree.edges])
    if not graph.connected:  # pragma: no cover - im is generated by the vertex images
        raise AssertionError("quotient graph is disconnected")
    genus = 1 + graph.num_edges - graph.num_vertices
    from_mu = 1 + len(im) * mu(tree)
    if injective and from_mu != genus:
        problems.append(f"genus from the graph ({genus}) differs from 1 + |im| mu ({from_mu})")
    return SchottkyCertificate(injective and not problems, injective, len(im), genus, from_mu, graph, problems, hom)


# ---------------------------------------------------------------------------
# named constructions


def _field_q(q: int) -> tuple[Field, int, int]:
    p, n = prime_power(q)
    return field_make(p, n), p, n


def _basis(F: Field) -> list[int]:
    """F_p-basis 1, x, ..., x^{s-1} of F as ints."""
    return [F.p**k for k in range(F.s)]


def _pgl_source(q: int, psl: bool = False) -> ConcreteGroup:
    F, _, _ = _field_q(q)
    return concrete(PSL2(q) if psl else PGL2(q), F)


def _find_dihedral_pair(ops: PGL2Ops, l: int, elems: Sequence):
    for a in elems:
        if ops.elem_order(a) != l:
            continue
        ai = ops.inv(a)
        for z in elems:
            if z != ops.identity and ops.mul(z, z) == ops.identity and ops.mul(ops.mul(z, a), z) == ai:
                return a, z
    raise NotEmbeddable(f"no dihedral pair of order {l}")


def _pgl_dihedral(q: int) -> AmalgamHom:
    if q <= 2:
        raise ValueError("pgl-dihedral needs q > 2")
    F, p, _ = _field_q(q)
    src = _pgl_source(q)
    ops = src.ops
    a, z = _find_dihedral_pair(ops, q + 1, src.elements)
    dih = ConcreteGroup(DihedralOps(q + 1), [(1, 0), (0, 1)])
    tree = chain(p, [PGL2(q), Dihedral(q + 1)], [Cyclic(q + 1)])
    return AmalgamHom(tree, ops, {"v1": VertexMap(src, list(src.gens)), "v2": VertexMap(dih, [a, z])},
                      [EdgeMap([a], [(1, 0)])], "pgl-dihedral", {"q": q})


def _dihedral_borel(q: int) -> AmalgamHom:
    if q <= 2:
        raise ValueError("dihedral-borel needs q > 2")
    F, p, n = _field_q(q)
    ops = PGL2Ops(F)
    zeta = F.exp(1)
    d = ops.diag(zeta)
    bor = ConcreteGroup(ops, [d] + [ops.translation(b) for b in _basis(F)])
    dih = ConcreteGroup(DihedralOps(q - 1), [(1, 0), (0, 1)])
    w = (0, 1, 1, 0)
    tree = chain(p, [Dihedral(q - 1), Borel(n, q - 1)], [Cyclic(q - 1)])
    return AmalgamHom(tree, ops, {"v1": VertexMap(dih, [d, w]), "v2": VertexMap(bor, list(bor.gens))},
                      [EdgeMap([(1, 0)], [d])], "dihedral-borel", {"q": q})


def _diag_product_split(q: int, partition: Sequence[int]) -> AmalgamHom:
    """PGL2(F_q) *_B B(n d, q-1) -> prod PGL2(F_{q^{d_i}}), d = sum d_i."""
    parts = list(partition)
    if not parts or any(d < 1 for d in parts):
        raise ValueError("partition entries must be positive")
    d = sum(parts)
    if d < 2:
        raise ValueError("the Borel end needs d >= 2")
    if q < 2:
        raise ValueError("q must be a prime power")
    F, p, n = _field_q(q)
    src = _pgl_source(q)
    big = [field_make(p, n * di) for di in parts]
    tops = [PGL2Ops(E) for E in big]
    target = DirectProductOps(tops)
    emb = [lambda a, E=E: embed(F, E, a) for E in big]

    def lift(g, i):
        return tops[i].canon(*(emb[i](x) for x in g))

    # F_q-bases of the factor fields, first element 1
    bases = []
    for E in big:
        xE = E.x() if E.s > n else 1
        bases.append([E.pow(xE, k) if k else 1 for k in range(E.s // n)])
    # coordinate j of F_q^d belongs to block blk[j] with position pos[j]; coordinate 0 is the edge direction
    blk, pos = [], []
    for i, di in enumerate(parts):
        for k in range(di):
            blk.append(i)
            pos.append(k)

    def translate_image(j: int, a: int):
        """Image of the translation by a (in F_q) along coordinate j.

        Component 0 is sum over block 0 of a_j beta_{0,pos}; component i > 0 is
        a_0 + sum over block i of a_j beta_{i,pos}. Coordinate 0 spans the edge direction.
        """
        out = []
        for i, E in enumerate(big):
            val = 0
            if j == 0:
                val = emb[i](a)
            elif blk[j] == i:
                val = E.mul(emb[i](a), bases[i][pos[j]])
            out.append(tops[i].translation(val))
        return tuple(out)

    zeta = F.exp(1)
    aff = AffineOps(F, d)
    e = [tuple(1 if k == j else 0 for k in range(d)) for j in range(d)]
    vgens = [(zeta, (0,) * d)]
    vimgs = [tuple(lift(src.ops.diag(zeta), i) for i in range(len(parts)))]
    for j in range(d):
        for b in _basis(F):
            vgens.append((1, tuple(F.mul(b, x) for x in e[j])))
            vimgs.append(translate_image(j, b))
    bor = ConcreteGroup(aff, vgens)
    tree = chain(p, [PGL2(q), Borel(n * d, q - 1)], [Borel(n, q - 1)])
    egens_u = [src.ops.diag(zeta)] + [src.ops.translation(b) for b in _basis(F)]
    egens_v = [(zeta, (0,) * d)] + [(1, tuple(F.mul(b, x) for x in e[0])) for b in _basis(F)]
    images = [tuple(lift(g, i) for i in range(len(parts))) for g in src.gens]
    name = "diag-product" if all(di == 1 for di in parts) else "diag-product-split"
    return AmalgamHom(tree, target, {"v1": VertexMap(src, images), "v2": VertexMap(bor, vimgs)},
                      [EdgeMap(egens_u, egens_v)], name, {"q": q, "partition": parts})


def _diag_product(q: int, d: int) -> AmalgamHom:
    if d < 2:
        raise ValueError("diag-product needs d > 1")
    return _diag_product_split(q, [1] * d)


def _eigen_conjugator(ops: PGL2Ops, a) -> tuple:
    """c with c^-1 a c diagonal (a semisimple with eigenvalues in the field of ops)."""
    F = ops.F
    x0, x1, x2, x3 = a
    tr, det = F.add(x0, x3), ops.det(a)
    roots = [t for t in range(F.q) if F.add(F.sub(F.mul(t, t), F.mul(tr, t)), det) == 0]
    if len(roots) != 2:
        raise NotEmbeddable("element is not split semisimple over this field")
    cols = []
    for lam in roots:
        if x1:
            cols.append((x1, F.sub(lam, x0)))
        else:
            cols.append((F.sub(lam, x3), x2))
    (c0, c2), (c1, c3) = cols
    return ops.make((c0, c1, c2, c3))


def _qplus_product(q: int, d: int) -> AmalgamHom:
    if q <= 2:
        raise ValueError("qplus-product needs q > 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    F, p, n = _field_q(q)
    E = field_make(p, 2 * n)
    src = _pgl_source(q)
    big = PGL2Ops(E)
    a, _ = _find_dihedral_pair(src.ops, q + 1, src.elements)
    lift = lambda g: big.canon(*(embed(F, E, x) for x in g))  # noqa: E731
    c = _eigen_conjugator(big, lift(a))
    ci = big.inv(c)
    iota = lambda g: big.mul(big.mul(ci, lift(g)), c)  # noqa: E731
    da = iota(a)
    if da[1] or da[2]:  # pragma: no cover
        raise AssertionError("conjugation did not diagonalize")
    zeta = E.inv(da[3])  # (s 0; 0 1) has canonical form (1, 0, 0, 1/s)
    target = DirectProductOps([big] * d)
    aff = AffineOps(E, d)
    vgens = [(zeta, (0,) * d)]
    for j in range(d):
        for b in _basis(E):
            vgens.append((1, tuple(b if k == j else 0 for k in range(d))))

    def img(x):
        s, v = x
        return tuple(big.canon(s, vi, 0, 1) for vi in v)

    bor = ConcreteGroup(aff, vgens)
    tree = chain(p, [PGL2(q), Borel(2 * n * d, q + 1)], [Cyclic(q + 1)])
    images = [tuple([iota(g)] * d) for g in src.gens]
    return AmalgamHom(tree, target, {"v1": VertexMap(src, images), "v2": VertexMap(bor, [img(x) for x in vgens])},
                      [EdgeMap([a], [(zeta, (0,) * d)])], "qplus-product", {"q": q, "d": d})


def _d2_chain(l: int, n: int) -> AmalgamHom:
    if l < 3 or l % 2 == 0:
        raise ValueError("d2-chain needs odd l >= 3")
    if n < 2:
        raise ValueError("d2-chain needs n >= 2")
    dih = ConcreteGroup(DihedralOps(l), [(1, 0), (0, 1)])
    vec = VectorOps(2, n)
    e = [tuple(1 if k == j else 0 for k in range(n)) for j in range(n)]
    src2 = ConcreteGroup(vec, e)
    tv = VectorOps(2, n - 1)
    target = DirectProductOps([DihedralOps(l), tv])
    z = tv.identity
    v_imgs = [((0, 1), z)] + [((0, 0), tuple(1 if k == j - 1 else 0 for k in range(n - 1))) for j in range(1, n)]
    tree = chain(2, [Dihedral(l), Borel(n, 1)], [Cyclic(2)])
    return AmalgamHom(tree, target, {"v1": VertexMap(dih, [((1, 0), z), ((0, 1), z)]), "v2": VertexMap(src2, v_imgs)},
                      [EdgeMap([(0, 1)], [e[0]])], "d2-chain", {"l": l, "n": n})


def _a4_chain(n: int) -> AmalgamHom:
    if n < 2:
        raise ValueError("a4-chain needs n >= 2")
    P = PermOps(4)
    r, s = P.cycle((0, 1, 2)), P.cycle((0, 1), (2, 3))
    a4 = ConcreteGroup(P, [r, s])
    vec = VectorOps(3, n)
    e = [tuple(1 if k == j else 0 for k in range(n)) for j in range(n)]
    src2 = ConcreteGroup(vec, e)
    tv = VectorOps(3, n - 1)
    target = DirectProductOps([P, tv])
    z = tv.identity
    v_imgs = [(r, z)] + [(P.identity, tuple(1 if k == j - 1 else 0 for k in range(n - 1))) for j in range(1, n)]
    tree = chain(3, [A4, Borel(n, 1)], [Cyclic(3)])
    return AmalgamHom(tree, target, {"v1": VertexMap(a4, [(r, z), (s, z)]), "v2": VertexMap(src2, v_imgs)},
                      [EdgeMap([r], [e[0]])], "a4-chain", {"n": n})


def _d3d2_sources():
    d3 = ConcreteGroup(DihedralOps(3), [(1, 0), (0, 1)])  # a, b
    d2 = ConcreteGroup(VectorOps(2, 2), [(1, 0), (0, 1)])  # b, c
    return d3, d2


def _herrlich(g: int, p: int = 5) -> AmalgamHom:
    """The five maps of D3 *_{C2} D2 onto groups of order 12(g-1), g = 2..6."""
    if g not in range(2, 7):
        raise ValueError("herrlich-g needs g in 2..6")
    d3, d2 = _d3d2_sources()
    D3, C2 = DihedralOps(3), CyclicOps(2)
    a, b, one = (1, 0), (0, 1), (0, 0)
    if g == 2:
        H = DirectProductOps([D3, C2])
        ia, ib, ic = (a, 0), (b, 0), (one, 1)
    elif g in (3, 5):
        F3 = field_make(3, 1)
        P = PGL2Ops(F3)
        ia, ib, ic = P.make((1, 1, 0, 1)), P.make((2, 0, 0, 1)), P.make((0, 1, 1, 0))
        H = P
        if g == 5:
            H = DirectProductOps([P, C2])
            ia, ib, ic = (ia, 0), (ib, 0), (ic, 1)
    elif g == 4:
        H = DirectProductOps([D3, D3])
        ia, ib, ic = (a, a), (b, b), (b, one)
    else:
        F4 = field_make(2, 2)
        P = PGL2Ops(F4)
        H = P
        ib = P.translation(1)
        ia = P.make((1, 1, 1, 0))
        ic = P.translation(F4.x())
    tree = chain(p, [Dihedral(3), Dihedral(2)], [Cyclic(2)])
    return AmalgamHom(tree, H, {"v1": VertexMap(d3, [ia, ib]), "v2": VertexMap(d2, [ib, ic])},
                      [EdgeMap([b], [(1, 0)])], "herrlich-g", {"g": g, "p": p})


def _hm_choices(m: int) -> list[tuple[int, ...]]:
    """Complements V of the line F_3 e_1 in F_3^m, as kernels of lambda = (1, c_2, ..., c_m)."""
    return [(1,) + c for c in product(range(3), repeat=m - 1)]


def _h_m(m: int, choice: int) -> AmalgamHom:
    if m < 2:
        raise ValueError("h-m needs m >= 2")
    choices = _hm_choices(m)
    if not 0 <= choice < len(choices):
        raise ValueError(f"V-choice index must be in 0..{len(choices) - 1}")
    lam = choices[choice]
    F3 = field_make(3, 1)
    src = concrete(PGL2(3), F3)
    P = src.ops
    aff_t = AffineOps(F3, m - 1)
    H = DirectProductOps([P, aff_t])
    zero = (0,) * (m - 1)

    def v1_img(g):
        return (g, (P.det(g), zero))

    aff = AffineOps(F3, m)
    e = [tuple(1 if k == j else 0 for k in range(m)) for j in range(m)]
    vgens = [(2, (0,) * m)] + [(1, x) for x in e]

    def v2_img(x):
        s, w = x
        lw = sum(c * wi for c, wi in zip(lam, w)) % 3
        return (P.canon(s, lw, 0, 1), (s, tuple(w[1:])))

    bor = ConcreteGroup(aff, vgens)
    tree = chain(3, [PGL2(3), Borel(m, 2)], [Borel(1, 2)])
    egens_u = [P.make((2, 0, 0, 1)), P.translation(1)]
    egens_v = [(2, (0,) * m), (1, e[0])]
    return AmalgamHom(tree, H, {"v1": VertexMap(src, [v1_img(g) for g in src.gens]),
                                "v2": VertexMap(bor, [v2_img(x) for x in vgens])},
                      [EdgeMap(egens_u, egens_v)], "h-m", {"m": m, "choice": choice})


def _borel_pair_tree(q: int, pgl: bool):
    """Source of PGL2(q) *_{B(n,q-1)} B(2n,q-1) (or the PSL2 version); translations u = beta + gamma x."""
    F, p, n = _field_q(q)
    if not pgl and p == 2:
        raise ValueError("the PSL2 version needs odd q")
    src = _pgl_source(q, psl=not pgl)
    P = src.ops
    m = q - 1 if pgl or p == 2 else (q - 1) // 2
    zeta = F.exp((q - 1) // m) if m > 1 else 1
    aff = AffineOps(F, 2)
    basis = _basis(F)
    vgens = ([(zeta, (0, 0))] if m > 1 else []) + [(1, (b, 0)) for b in basis] + [(1, (0, b)) for b in basis]
    bor = ConcreteGroup(aff, vgens)
    top = PGL2(q) if pgl or p == 2 else PSL2(q)
    tree = chain(p, [top, Borel(2 * n, m)], [Borel(n, m)])
    egens_u = ([P.diag(zeta)] if m > 1 else []) + [P.translation(b) for b in basis]
    egens_v = ([(zeta, (0, 0))] if m > 1 else []) + [(1, (b, 0)) for b in basis]
    return F, p, src, bor, vgens, tree, egens_u, egens_v


def _two_eval(q: int, a: int, a2: int, pgl: bool) -> AmalgamHom:
    if q <= 3:
        raise ValueError("two-eval needs q > 3")
    if a == a2:
        raise ValueError("two-eval needs a != a'")
    F, p, src, bor, vgens, tree, eu, ev = _borel_pair_tree(q, pgl)
    if not (0 <= a < q and 0 <= a2 < q):
        raise ValueError("a, a' must be field elements 0..q-1")
    P = src.ops
    H = DirectProductOps([P, P])

    def v2_img(x):
        s, (beta, gamma) = x
        return tuple(P.canon(s, F.add(beta, F.mul(gamma, c)), 0, 1) for c in (a, a2))

    return AmalgamHom(tree, H, {"v1": VertexMap(src, [(g, g) for g in src.gens]),
                                "v2": VertexMap(bor, [v2_img(x) for x in vgens])},
                      [EdgeMap(eu, ev)], "two-eval", {"q": q, "a": a, "a2": a2, "pgl": pgl})


def _commutator(q: int, a: int = 0) -> AmalgamHom:
    """Quotient by the commutator subgroup of the normal closure of B_a: G acting on the induced module."""
    if q < 2:
        raise ValueError("q must be a prime power")
    F, p, n = _field_q(q)
    pgl = p == 2
    F, p, src, bor, vgens, tree, eu, ev = _borel_pair_tree(q, pgl)
    ops = InducedOps(F, psl=not pgl)
    P = src.ops
    zero = (0,) * ops.n

    def v2_img(x):
        s, (beta, gamma) = x
        if gamma == 0:
            return (P.canon(s, beta, 0, 1), zero)
        if s != 1 or beta != 0:  # pragma: no cover - generators are pure
            raise AssertionError("mixed generator")
        # translation by gamma (x - a) lies in B_a; translation by gamma x = that times translation by gamma a
        g = P.translation(F.mul(gamma, a))
        return ops.mul((g, zero), ops.unit(0, gamma))

    return AmalgamHom(tree, ops, {"v1": VertexMap(src, [(g, zero) for g in src.gens]),
                                  "v2": VertexMap(bor, [v2_img(x) for x in vgens])},
                      [EdgeMap(eu, ev)], "commutator", {"q": q, "a": a})


NAMED: dict[str, tuple[Callable[..., AmalgamHom], tuple[str, ...]]] = {
    "pgl-dihedral": (_pgl_dihedral, ("q",)),
    "dihedral-borel": (_dihedral_borel, ("q",)),
    "diag-product": (_diag_product, ("q", "d")),
    "diag-product-split": (_diag_product_split, ("q", "partition")),
    "qplus-product": (_qplus_product, ("q", "d")),
    "d2-chain": (_d2_chain, ("l", "n")),
    "a4-chain": (_a4_chain, ("n",)),
    "herrlich-g": (_herrlich, ("g",)),
    "h-m": (_h_m, ("m", "choice")),
    "two-eval": (_two_eval, ("q", "a", "a2", "pgl")),
    "commutator": (_commutator, ("q",)),
}


def build_named(name: str, **params) -> AmalgamHom:
    """One of the catalogued constructions; see NAMED for the parameter names."""
    if name not in NAMED:
        raise ValueError(f"unknown construction {name!r}; known: {', '.join(NAMED)}")
    fn, required = NAMED[name]
    missing = [k for k in required if k not in params]
    if missing:
        raise ValueError(f"{name} needs parameters {', '.join(missing)}")
    return fn(**params)


# ---------------------------------------------------------------------------
# exhaustive counting of normal Schottky quotients


@dataclass
class CandidateCount:
    name: str
    homs: int
    automorphisms: int
    kernels: int


@dataclass
class CountResult:
    kernels: int
    per_candidate: list[CandidateCount]


def _automorphism_count(H: ConcreteGroup, budget: int) -> int:
    elems = H.elements
    gens = _small_generating_set(H.ops, elems)
    orders = {x: H.ops.elem_order(x) for x in elems}
    pools = [[x for x in elems if orders[x] == orders[g]] for g in gens]
    if _space(pools) > budget:
        raise BudgetExceeded(f"automorphism search space {_space(pools)} exceeds budget {budget}")
    count = 0
    for imgs in product(*pools):
        try:
            phi = extend_hom(H.ops, gens, H.ops, list(imgs), budget=len(elems))
        except NonHomomorphism:
            continue
        if len(set(phi.values())) == len(elems):
            count += 1
    return count


def _space(pools) -> int:
    n = 1
    for pl in pools:
        n *= max(1, len(pl))
    return n


def _vertex_order(tree: TreeOfGroups) -> list[tuple[str, int | None]]:
    """Vertices in breadth-first order from the first one, with the index of the edge to the parent."""
    first = tree.vertices[0][0]
    out, seen, queue = [(first, None)], {first}, deque([first])
    while queue:
        v = queue.popleft()
        for i, e in tree.incident(v):
            w = e.v if e.u == v else e.u
            if w not in seen:
                seen.add(w)
                out.append((w, i))
                queue.append(w)
    return out


def _enumerate_homs(source: AmalgamHom, H: ConcreteGroup, budget: int):
    """All vertex-injective homomorphisms of the source amalgam into H (as vertex dicts)."""
    tree = source.tree
    plan = _vertex_order(tree)
    elems = H.elements
    orders = {x: H.ops.elem_order(x) for x in elems}
    steps = [0]

    def rec(k: int, phis: dict):
        if k == len(plan):
            yield dict(phis)
            return
        vid, ei = plan[k]
        src = source.vertices[vid].source
        gens = list(src.gens)
        forced: dict[int, Any] = {}
        if ei is not None:
            e, em = tree.edges[ei], source.edges[ei]
            parent = e.u if e.v == vid else e.v
            mine, theirs = (em.gens_v, em.gens_u) if e.v == vid else (em.gens_u, em.gens_v)
            for x, y in zip(mine, theirs):
                if x in gens:
                    forced[gens.index(x)] = phis[parent][y]
        pools = []
        for j, g in enumerate(gens):
            if j in forced:
                pools.append([forced[j]])
            else:
                og = src.ops.elem_order(g)
                pools.append([x for x in elems if orders[x] == og])
        steps[0] += _space(pools)
        if steps[0] > budget:
            raise BudgetExceeded(f"hom search space exceeds budget {budget}")
        n = src.order
        for imgs in product(*pools):
            try:
                phi = extend_hom(src.ops, gens, H.ops, list(imgs), budget=n)
            except NonHomomorphism:
                continue
            if len(set(phi.values())) != n:
                continue
            if ei is not None:
                e, em = tree.edges[ei], source.edges[ei]
                parent = e.u if e.v == vid else e.v
                mine, theirs = (em.gens_v, em.gens_u) if e.v == vid else (em.gens_u, em.gens_v)
                if any(phi[x] != phis[parent][y] for x, y in zip(mine, theirs)):
                    continue
            phis[vid] = phi
            yield from rec(k + 1, phis)
            del phis[vid]

    yield from rec(0, {})


def presentation(tree: TreeOfGroups, s: int | None = None) -> AmalgamHom:
    """Concrete vertex groups with edge identifications, taken from a compatible embedding in PGL2."""
    if s is None:
        s = least_common_exponent(tree)
    found = search_hom(tree, s)
    if found is None:
        raise NotEmbeddable(f"no compatible embedding in PGL2(F_{tree.p}^{s})")
    return found.hom


def least_common_exponent(tree: TreeOfGroups, smax: int = 64) -> int:
    """Least s such that every vertex group embeds in PGL2(F_{p^s})."""
    forms = [embedded_form(g, tree.p) for _, g in tree.vertices]
    for s in range(1, smax + 1):
        if all(form_embeds_in(f, tree.p, s) for f in forms):
            return s
    raise NotEmbeddable(f"no common field exponent up to {smax}")


def count_index_homs(source: AmalgamHom | TreeOfGroups, target_order: int,
                     candidates: Sequence[tuple[str, ConcreteGroup]], budget: int = 10**7) -> CountResult:
    """Number of normal Schottky subgroups with quotient of the given order among the candidate groups.

    Kernels of surjective vertex-injective maps onto H correspond to such maps modulo Aut(H).
    A bare tree is first given concrete vertex groups through presentation().
    """
    if target_order < 1:
        raise ValueError("target order must be positive")
    if isinstance(source, TreeOfGroups):
        source = presentation(source)
    out = []
    for name, H in candidates:
        if H.order != target_order:
            continue
        homs = 0
        for phis in _enumerate_homs(source, H, budget):
            imgs = {x for phi in phis.values() for x in phi.values()}
            if len(closure(H.ops, list(imgs), budget=H.order)) == H.order:
                homs += 1
        auts = _automorphism_count(H, budget)
        if homs % auts:  # pragma: no cover - Aut(H) acts freely on surjections
            raise AssertionError("surjection count is not a multiple of |Aut(H)|")
        out.append(CandidateCount(name, homs, auts, homs // auts))
    return CountResult(sum(c.kernels for c in out), out)


def count_candidates(name: str, order_: int) -> list[tuple[str, ConcreteGroup]]:
    """Candidate quotient groups used for the two counting checks."""
    if name == "h2":
        h = build_named("h-m", m=2, choice=0)
        gens = [x for vm in h.vertices.values() for x in vm.images]
        S4 = PermOps(4)
        S3 = DihedralOps(3)
        c = [("H2", ConcreteGroup(h.target, gens)),
             ("S4xC3", ConcreteGroup(DirectProductOps([S4, CyclicOps(3)]),
                                     [(S4.cycle((0, 1)), 0), (S4.cycle((0, 1, 2, 3)), 1)])),
             ("A4xS3", ConcreteGroup(DirectProductOps([S4, S3]),
                                     [(S4.cycle((0, 1, 2)), (0, 0)), (S4.cycle((0, 1), (2, 3)), (1, 0)),
                                      (S4.identity, (0, 1))])),
             ("A4xC6", ConcreteGroup(DirectProductOps([S4, CyclicOps(6)]),
                                     [(S4.cycle((0, 1, 2)), 0), (S4.cycle((0, 1), (2, 3)), 1)]))]
        return [x for x in c if x[1].order == order_]
    if name == "d3d2":
        D3, D6 = DihedralOps(3), DihedralOps(6)
        S4 = PermOps(4)
        c = [("D3xC2", ConcreteGroup(DirectProductOps([D3, CyclicOps(2)]), [((1, 0), 0), ((0, 1), 0), ((0, 0), 1)])),
             ("A4", ConcreteGroup(S4, [S4.cycle((0, 1, 2)), S4.cycle((0, 1), (2, 3))])),
             ("C12", ConcreteGroup(CyclicOps(12), [1])),
             ("C2xC6", ConcreteGroup(DirectProductOps([CyclicOps(2), CyclicOps(6)]), [(1, 0), (0, 1)]))]
        return [x for x in c if x[1].order == order_]
    raise ValueError(f"unknown candidate set {name!r}")


# ---------------------------------------------------------------------------
# search for maps into PGL2(F_{p^s})


@dataclass
class SearchResult:
    hom: AmalgamHom
    certificate: SchottkyCertificate
    image: str  # "PSL", "PGL" or "other"
    predicted: str | None  # "PSL", "PGL", "either", or None when mu >= 1/12
    matches: bool | None


def predict_image(tree: TreeOfGroups, s: int) -> str | None:
    """Predicted image in PGL2(F_{p^s}) for mu < 1/12: PSL, PGL, or either."""
    m = mu(tree)
    if m <= 0 or m >= Fraction(1, 12):
        return None
    p = tree.p
    if p == 2:
        return "PGL"
    q = p**s
    if det_kernel_index(tree, q) == 2:
        return "PGL"
    for _, g in tree.vertices:
        f = embedded_form(g, p)
        if f[0] == "tdihedral":
            l = f[1]
            if ((q - 1) // 2) % l == 0 or ((q + 1) // 2) % l == 0:
                return "either"
    return "PSL"


def _image_kind(order_: int, q: int, p: int) -> str:
    n_pgl = q**3 - q
    if order_ == n_pgl:
        return "PGL"
    if p != 2 and order_ == n_pgl // 2:
        return "PSL"
    return "other"


def search_hom(tree: TreeOfGroups, s: int, budget: int = 10**7, require_full: bool = True) -> SearchResult | None:
    """Embed each vertex group in PGL2(F_{p^s}) so that neighbouring embeddings agree on edges.

    Vertices are visited breadth-first. Each child is a standard copy conjugated so that a
    standard copy of the edge group lands on one of the parent's edge subgroups; all such
    placements are tried by backtracking. With require_full the first assignment whose image
    contains PSL2(F_{p^s}) is returned, otherwise the first assignment found. Returns None when
    the search space is exhausted without success.
    """
    if validate(tree):
        raise ValueError("tree does not validate")
    p = tree.p
    for _, g in tree.vertices:
        if not form_embeds_in(embedded_form(g, p), p, s):
            raise NotEmbeddable(f"{g} does not embed in PGL2(F_{p}^{s})")
    F = field_make(p, s)
    ops = PGL2Ops(F)
    allg = pgl2_elements(ops)
    q = F.q
    work = [0]

    def conj(x, g):
        return ops.mul(ops.mul(x, g), ops.inv(x))

    std = {vid: concrete(g, F) for vid, g in tree.vertices}
    plan = _vertex_order(tree)
    edge_std = {ei: concrete(tree.edges[ei].group, F) for _, ei in plan[1:]}
    # placements of the standard edge copy inside each standard vertex copy, deduplicated by generator images
    placements: dict[tuple[str, int], list[tuple[Any, tuple]]] = {}

    def place(vid: str, ei: int):
        key = (vid, ei)
        if key not in placements:
            E0, cset = edge_std[ei], std[vid].element_set
            seen, out = set(), []
            for x in allg:
                work[0] += 1
                imgs = tuple(conj(x, g) for g in E0.gens)
                if imgs in seen or not all(y in cset for y in imgs):
                    continue
                seen.add(imgs)
                out.append((x, imgs))
            if work[0] > budget:
                raise BudgetExceeded(f"search exceeded budget {budget}")
            placements[key] = out
        return placements[key]

    conjugator = {plan[0][0]: ops.identity}
    edge_maps: dict[int, EdgeMap] = {}

    def finish():
        verts = {vid: VertexMap(std[vid], [conj(conjugator[vid], g) for g in std[vid].gens]) for vid, _ in tree.vertices}
        return AmalgamHom(tree, ops, verts, [edge_maps[i] for i in range(len(tree.edges))], "search", {"s": s})

    def rec(k: int):
        if k == len(plan):
            hom = finish()
            if not require_full:
                return hom
            gens = [x for vm in hom.vertices.values() for x in vm.images]
            kind = _image_kind(len(closure(ops, gens, budget=len(allg))), q, p)
            return hom if kind != "other" else None
        vid, ei = plan[k]
        e = tree.edges[ei]
        parent = e.u if e.v == vid else e.v
        seen_maps = set()
        for y, gp in place(parent, ei):
            for z, gc in place(vid, ei):
                c = ops.mul(conjugator[parent], ops.mul(y, ops.inv(z)))
                key = tuple(conj(c, g) for g in std[vid].gens)
                if key in seen_maps:
                    continue
                seen_maps.add(key)
                work[0] += 1
                if work[0] > budget:
                    raise BudgetExceeded(f"search exceeded budget {budget}")
                conjugator[vid] = c
                edge_maps[ei] = EdgeMap(list(gp), list(gc)) if e.u == parent else EdgeMap(list(gc), list(gp))
                got = rec(k + 1)
                if got is not None:
                    return got
        conjugator.pop(vid, None)
        return None

    hom = rec(1)
    if hom is None:
        return None
    cert = verify_hom(hom, budget=budget)
    image = _image_kind(cert.image_order, q, p)
    pred = predict_image(tree, s)
    matches = None
    if pred is not None:
        matches = image == pred or (pred == "either" and image in ("PSL", "PGL"))
    return SearchResult(hom, cert, image, pred, matches)
