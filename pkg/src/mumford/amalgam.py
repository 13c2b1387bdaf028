"""Finite trees of finite groups and their invariants: mu, branch counts, ramification,
determinant kernel, and realizability predicates."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .ff import is_prime
from .grpcat import (
    GroupSpec,
    NotEmbeddable,
    _ppower,
    embedded_form,
    form_order,
    form_slots,
    form_to_spec,
    spec_from_json,
    spec_to_json,
)

__all__ = [
    "Edge",
    "TreeOfGroups",
    "Violation",
    "InvalidTree",
    "BranchCountMismatch",
    "BranchCount",
    "RamificationReport",
    "slot_compatible",
    "validate",
    "mu",
    "branch_count",
    "ramification",
    "det_kernel_index",
    "realizable_simple",
    "realizable_star",
    "realizable",
    "chain",
    "star",
    "free_product",
    "tree_key",
]


class InvalidTree(ValueError):
    def __init__(self, violations: list["Violation"]):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


class BranchCountMismatch(AssertionError):
    """The two branch-count formulas disagree; signals inconsistent slot data."""


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    group: GroupSpec
    slot_u: str | None = None
    slot_v: str | None = None


@dataclass(frozen=True)
class TreeOfGroups:
    """Vertices carry group specs; edges carry the edge group and the branch slot used at each end.

    ``designated`` lists p-group vertices whose order-p edge groups are all identified with one
    fixed cyclic subgroup A (p in {2, 3}).
    """

    p: int
    vertices: tuple[tuple[str, GroupSpec], ...]
    edges: tuple[Edge, ...] = ()
    designated: frozenset = frozenset()

    def vertex_ids(self) -> list[str]:
        return [v for v, _ in self.vertices]

    def group(self, vid: str) -> GroupSpec:
        for v, g in self.vertices:
            if v == vid:
                return g
        raise KeyError(vid)

    def incident(self, vid: str) -> list[tuple[int, Edge]]:
        return [(i, e) for i, e in enumerate(self.edges) if vid in (e.u, e.v)]

    def degree(self, vid: str) -> int:
        return len(self.incident(vid))

    def to_json(self) -> dict:
        d = {
            "p": self.p,
            "vertices": [{"id": v, "group": spec_to_json(g)} for v, g in self.vertices],
            "edges": [
                {"u": e.u, "v": e.v, "group": spec_to_json(e.group), "slot_u": e.slot_u, "slot_v": e.slot_v}
                for e in self.edges
            ],
        }
        if self.designated:
            d["designated"] = sorted(self.designated)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def from_json(d: dict) -> "TreeOfGroups":
        try:
            p = int(d["p"])
            vertices = tuple((str(x["id"]), spec_from_json(x["group"])) for x in d["vertices"])
            edges = tuple(
                Edge(str(x["u"]), str(x["v"]), spec_from_json(x["group"]), x.get("slot_u"), x.get("slot_v"))
                for x in d.get("edges", [])
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed tree JSON: {exc}") from None
        return TreeOfGroups(p, vertices, edges, frozenset(d.get("designated", [])))


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.message}"


def slot_compatible(edge_form: tuple, slot_tag: str | None, slot_form: tuple | None, vertex_form: tuple) -> bool:
    """Whether an edge group of the given form may be attached through the given slot.

    Accepted: a slot whose branch group equals the edge group; the torus slot C_M of a vertex
    B(N, M) for an edge B(n', M) with n' < N; no slot at all (tag None) for a p-group edge
    B(n', 1) inside a Borel vertex, which then absorbs the edge without losing a branch point.
    """
    if slot_tag is None:
        return (
            edge_form[0] == "borel" and edge_form[2] == 1 and vertex_form[0] == "borel"
            and edge_form[1] <= vertex_form[1]
        )
    if edge_form == slot_form:
        return True
    if edge_form[0] == "borel" and slot_tag == "torus" and vertex_form[0] == "borel":
        n1, m1 = edge_form[1], edge_form[2]
        return m1 == slot_form[1] and 1 <= n1 < vertex_form[1]
    return False


def _is_tree(vids: list[str], edges: Sequence[Edge]) -> bool:
    if len(edges) != len(vids) - 1:
        return False
    parent = {v: v for v in vids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(e.u), find(e.v)
        if a == b:
            return False
        parent[a] = b
    return True


def validate(tree: TreeOfGroups) -> list[Violation]:
    """All violated tree invariants (empty list means valid)."""
    out: list[Violation] = []
    p = tree.p
    if not is_prime(p):
        return [Violation("prime", "tree", f"p={p} is not prime")]
    vids = tree.vertex_ids()
    if not vids:
        return [Violation("shape", "tree", "no vertices")]
    if len(set(vids)) != len(vids):
        out.append(Violation("shape", "vertices", "duplicate vertex ids"))
    forms = {}
    for v, g in tree.vertices:
        try:
            forms[v] = embedded_form(g, p)
        except NotEmbeddable as exc:
            out.append(Violation("embedding", f"vertex {v}", str(exc)))
    for i, e in enumerate(tree.edges):
        if e.u not in vids or e.v not in vids:
            out.append(Violation("shape", f"edge {i}", "edge endpoint is not a vertex"))
    if out:
        return out
    if not _is_tree(vids, tree.edges):
        out.append(Violation("shape", "tree", "underlying graph is not a tree (connected and acyclic)"))
    used: dict[tuple[str, str], int] = Counter()
    for i, e in enumerate(tree.edges):
        where = f"edge {i} ({e.u}-{e.v})"
        try:
            ef = embedded_form(e.group, p)
        except NotEmbeddable as exc:
            out.append(Violation("embedding", where, str(exc)))
            continue
        eo = form_order(ef, p)
        for end, tag in ((e.u, e.slot_u), (e.v, e.slot_v)):
            vf = forms[end]
            if form_order(vf, p) % eo:
                out.append(Violation("order", where, f"|{e.group}| does not divide |{tree.group(end)}|"))
            if ef == ("trivial",):
                if tag is not None:
                    out.append(Violation("slot", where, "free-product edge must not name a slot"))
                continue
            slots = dict(form_slots(vf, p))
            if tag is not None and tag not in slots:
                out.append(Violation("slot", where, f"{tag!r} is not a branch slot of {tree.group(end)}"))
                continue
            if not slot_compatible(ef, tag, slots.get(tag), vf):
                if tag is None:
                    msg = f"{e.group} needs a branch slot of {tree.group(end)}"
                else:
                    msg = f"{e.group} does not fit slot {tag!r} ({form_to_spec(slots[tag], p)}) of {tree.group(end)}"
                out.append(Violation("slot", where, msg))
            if tag is not None:
                used[(end, tag)] += 1
    for (end, tag), k in used.items():
        if k > 1:
            out.append(Violation("slot", f"vertex {end}", f"slot {tag!r} carries {k} edges"))
    for v in tree.designated:
        if v not in forms:
            out.append(Violation("designated", f"vertex {v}", "unknown vertex"))
        elif not (forms[v][0] == "borel" and forms[v][2] == 1):
            out.append(Violation("designated", f"vertex {v}", "designated subgroup requires a p-group vertex"))
        elif p not in (2, 3):
            out.append(Violation("designated", f"vertex {v}", "designated subgroups only exist for p in {2,3}"))
    return out


def _check(tree: TreeOfGroups) -> None:
    bad = validate(tree)
    if bad:
        raise InvalidTree(bad)


def mu(tree: TreeOfGroups) -> Fraction:
    """sum over edges of 1/|G_e| minus sum over vertices of 1/|G_v|."""
    _check(tree)
    p = tree.p
    total = Fraction(0)
    for e in tree.edges:
        total += Fraction(1, form_order(embedded_form(e.group, p), p))
    for _, g in tree.vertices:
        total -= Fraction(1, form_order(embedded_form(g, p), p))
    return total


def _br_form(form: tuple, p: int) -> int:
    return len(form_slots(form, p))


@dataclass(frozen=True)
class BranchCount:
    total: int
    max3: int
    maxp: int
    indecomposable: bool

    def __int__(self) -> int:
        return self.total


def branch_count(tree: TreeOfGroups) -> BranchCount:
    """Branch count from vertex/edge contributions, cross-checked against max(3) + maxp + 2."""
    _check(tree)
    p = tree.p
    total = sum(_br_form(embedded_form(g, p), p) for _, g in tree.vertices)
    total -= sum(_br_form(embedded_form(e.group, p), p) for e in tree.edges)
    max3 = sum(1 for _, g in tree.vertices if _br_form(embedded_form(g, p), p) == 3)
    maxp = 0
    if p in (2, 3):
        for v in tree.designated:
            inc = tree.incident(v)
            if len(inc) >= 2 and all(form_order(embedded_form(e.group, p), p) == p for _, e in inc):
                maxp += len(inc) - 1
    indecomposable = all(embedded_form(e.group, p) != ("trivial",) for e in tree.edges)
    if indecomposable and total != max3 + maxp + 2:
        raise BranchCountMismatch(
            f"sum formula gives {total} but max(3)+maxp+2 = {max3}+{maxp}+2 for {tree.dumps()}"
        )
    return BranchCount(total, max3, maxp, indecomposable)


@dataclass(frozen=True)
class RamificationReport:
    branch_groups: tuple[GroupSpec, ...]
    indices: tuple[int, ...]


def _remaining_slots(tree: TreeOfGroups, vid: str) -> list[tuple]:
    p = tree.p
    slots = form_slots(embedded_form(tree.group(vid), p), p)
    used = set()
    for _, e in tree.incident(vid):
        used.add(e.slot_u if e.u == vid else e.slot_v)
    return [f for tag, f in slots if tag not in used]


def ramification(tree: TreeOfGroups) -> RamificationReport:
    """Branch groups left unconsumed by edges at the extremal vertices."""
    _check(tree)
    p = tree.p
    if any(embedded_form(e.group, p) == ("trivial",) for e in tree.edges):
        raise ValueError("ramification requires an indecomposable tree")
    ends = [v for v in tree.vertex_ids() if tree.degree(v) <= 1]
    forms = []
    for v in ends:
        forms += _remaining_slots(tree, v)
    groups = sorted((form_to_spec(f, p) for f in forms), key=lambda g: (form_order(embedded_form(g, p), p), str(g)))
    return RamificationReport(tuple(groups), tuple(sorted(form_order(embedded_form(g, p), p) for g in groups)))


def _det_nontrivial(form: tuple, q: int, p: int) -> bool:
    kind = form[0]
    if kind == "trivial":
        return False
    if kind in ("cyclic", "borel"):
        m = form[1] if kind == "cyclic" else form[2]
        if m == 1:
            return False
        if (q - 1) % m == 0:
            return ((q - 1) // 2) % m != 0
        if (q + 1) % m == 0:
            return ((q + 1) // 2) % m != 0
        raise ValueError(f"cyclic part of order {m} does not divide q+-1 for q={q}")
    if kind == "tdihedral":
        l = form[1]
        if ((q - 1) // 2) % l == 0 or ((q + 1) // 2) % l == 0:
            return False
        if (q - 1) % l == 0 or (q + 1) % l == 0:
            return True
        raise ValueError(f"D_{l} is outside the determinant scope for q={q}")
    if kind == "pgl":
        k = _ppower(form[1], p)
        K = _ppower(q, p)
        if K % k:
            raise ValueError(f"PGL2({form[1]}) is not defined over F_{q}")
        return (K // k) % 2 == 1
    if kind in ("psl", "a5mod3", "ta4", "ta5"):
        return False
    if kind == "ts4":
        return q % 8 not in (1, 7)
    raise ValueError(f"vertex form {kind} is outside the determinant scope")


def det_kernel_index(tree: TreeOfGroups, q: int) -> int:
    """Index of the kernel of det: Gamma -> F_q^*/(F_q^*)^2 (1 or 2)."""
    _check(tree)
    p = tree.p
    if p == 2:
        raise ValueError("det is trivial in characteristic 2 (every element is a square)")
    if _ppower(q, p) is None:
        raise ValueError(f"q={q} is not a power of p={p}")
    for _, g in tree.vertices:
        if _det_nontrivial(embedded_form(g, p), q, p):
            return 2
    return 1


# ---------------------------------------------------------------------------
# realizability


def _slot_forms(form: tuple, p: int) -> list[tuple]:
    return [f for _, f in form_slots(form, p)]


def _simple_a(f1, f3, f2, p) -> bool:
    o3 = form_order(f3, p)
    if o3 % p and f3[0] == "cyclic" and f3 in _slot_forms(f1, p) and f3 in _slot_forms(f2, p):
        return True
    if p == 2 and f1[0] == "dihedral2" and f2[0] == "dihedral2" and f3 == ("borel", 1, 1):
        return True
    if p == 3 and f1 == ("psl", 3) and f2 == ("psl", 3) and f3 == ("borel", 1, 1):
        return True
    return False


def _simple_b(fb, f3, fo, p) -> bool:
    N, m = fb[1], fb[2]
    if m > 1 and f3 == ("cyclic", m) and f3 in _slot_forms(fo, p):
        return True
    if fo[0] == "pgl":
        q = fo[1]
        n = _ppower(q, p)
        if m == q - 1 and f3 == ("borel", n, q - 1) and N % n == 0 and N > n:
            return True
    if fo[0] == "psl" and p != 2:
        q = fo[1]
        n = _ppower(q, p)
        if m == (q - 1) // 2 and f3 == ("borel", n, (q - 1) // 2) and N % n == 0 and N > n:
            return True
    if p == 2 and m == 1 and fo[0] == "dihedral2" and f3 == ("borel", 1, 1) and N > 1:
        return True
    if p == 3 and m == 2 and fo[0] == "a5mod3" and f3 == ("borel", 1, 2) and N > 1:
        return True
    return False


def _dihedral_pair_ok(f1, f2, l: int, p: int) -> bool:
    if l % p and f1 == f2:
        return True
    pair = {f1, f2}
    if p == 2 and pair == {("dihedral2", l), ("pgl", l - 1)}:
        return True
    if p == 2 and l == 2 and f1[0] == f2[0] == "dihedral2":
        return True
    if p == 3 and l == 5 and pair == {("a5mod3",), ("psl", 9)}:
        return True
    if p == 3 and l == 3 and f1 == f2 == ("psl", 3):
        return True
    return False


def realizable_simple(G1: GroupSpec, G3: GroupSpec, G2: GroupSpec, p: int) -> bool:
    """Whether G1 *_{G3} G2 is realizable as a discontinuous subgroup of PGL2(K)."""
    try:
        f1, f3, f2 = embedded_form(G1, p), embedded_form(G3, p), embedded_form(G2, p)
    except NotEmbeddable:
        return False
    if f3[0] not in ("cyclic", "borel"):
        raise ValueError(f"edge group {G3} must be cyclic or of Borel type")
    b1, b2 = f1[0] == "borel", f2[0] == "borel"
    if not b1 and not b2:
        ok = _simple_a(f1, f3, f2, p)
        if ok and f3[0] == "cyclic":
            o1, o2 = form_order(f1, p), form_order(f2, p)
            if o1 % p == 0 and o2 % p == 0 and not _dihedral_pair_ok(f1, f2, f3[1], p):
                raise AssertionError(f"dihedral-pair consistency fails for {G1} *_{G3} {G2}")
        return ok
    if b1 and _simple_b(f1, f3, f2, p):
        return True
    if b2 and _simple_b(f2, f3, f1, p):
        return True
    return False


def realizable_star(H: GroupSpec, parts: Sequence[GroupSpec], p: int) -> bool:
    """Amalgam of >= 3 non-cyclic groups along one common subgroup H, in the given order."""
    parts = list(parts)
    if len(parts) < 3:
        raise ValueError("a star amalgam needs at least 3 parts")
    try:
        fh = embedded_form(H, p)
        fs = [embedded_form(g, p) for g in parts]
    except NotEmbeddable:
        return False
    for f in fs:
        if f[0] in ("cyclic", "trivial") or f == ("borel", 1, 1):
            raise ValueError("star parts must be non-cyclic")
    mid, ends = fs[1:-1], (fs[0], fs[-1])
    if p != 2 and fh == ("cyclic", 2):
        if all(f[0] == "tdihedral" and f[1] % 2 == 1 for f in mid):
            return all(("cyclic", 2) in _slot_forms(f, p) for f in ends)
        return False
    if p not in (2, 3) and fh == ("cyclic", 3):
        if all(f == ("ta4",) for f in mid):
            return all(("cyclic", 3) in _slot_forms(f, p) for f in ends)
        return False
    if p == 2 and fh == ("borel", 1, 1):
        if not all(f[0] == "dihedral2" for f in fs[1:]):
            return False
        g1 = fs[0]
        return g1[0] == "dihedral2" or (g1[0] == "borel" and g1[2] == 1 and g1[1] >= 2)
    if p == 3 and fh == ("borel", 1, 1):
        if not all(f == ("psl", 3) for f in fs[1:]):
            return False
        g1 = fs[0]
        return g1 == ("psl", 3) or (g1[0] == "borel" and g1[2] == 1 and g1[1] >= 2)
    return False


def realizable(tree: TreeOfGroups) -> str:
    """'yes', 'no' or 'unknown'."""
    if validate(tree):
        return "no"
    p = tree.p
    trivial = [e for e in tree.edges if embedded_form(e.group, p) == ("trivial",)]
    if trivial:
        if len(tree.vertices) == 2:
            fs = [embedded_form(g, p) for _, g in tree.vertices]
            if all(f[0] == "cyclic" or (f[0] == "borel" and f[2] == 1) for f in fs):
                return "yes"
        return "unknown"
    from .catalog import match_family

    if match_family(tree) is not None:
        return "yes"
    for e in tree.edges:
        gu, gv = tree.group(e.u), tree.group(e.v)
        fe = embedded_form(e.group, p)
        if fe in (embedded_form(gu, p), embedded_form(gv, p)):
            continue  # an edge equal to a vertex group only relabels a star center
        if not realizable_simple(gu, e.group, gv, p):
            return "no"
    if len(tree.vertices) <= 2:
        return "yes"
    line = _as_line(tree)
    if line is not None:
        groups, edge_groups = line
        if len(set(edge_groups)) == 1 and all(
            embedded_form(g, p)[0] not in ("cyclic", "trivial") for g in groups
        ):
            for order_ in (groups, groups[::-1]):
                try:
                    if realizable_star(edge_groups[0], order_, p):
                        return "yes"
                except ValueError:
                    pass
    return "unknown"


def _as_line(tree: TreeOfGroups):
    degs = {v: tree.degree(v) for v in tree.vertex_ids()}
    if any(d > 2 for d in degs.values()):
        return None
    start = next(v for v, d in degs.items() if d <= 1)
    groups, egroups, prev, cur = [tree.group(start)], [], None, start
    while True:
        nxt = [(e, e.v if e.u == cur else e.u) for _, e in tree.incident(cur) if (e.v if e.u == cur else e.u) != prev]
        if not nxt:
            break
        e, w = nxt[0]
        egroups.append(e.group)
        groups.append(tree.group(w))
        prev, cur = cur, w
    return groups, egroups


# ---------------------------------------------------------------------------
# builders and canonical keys


def _pick_slot(p: int, vertex: GroupSpec, edge: GroupSpec, taken: set[str]) -> str | None:
    vf = embedded_form(vertex, p)
    ef = embedded_form(edge, p)
    if ef == ("trivial",):
        return None
    if slot_compatible(ef, None, None, vf):
        return None
    slots = form_slots(vf, p)
    for t, f in slots:
        if t not in taken and slot_compatible(ef, t, f, vf):
            return t
    raise ValueError(f"no free slot of {vertex} fits edge group {edge} (p={p})")


def _assign_slots(p: int, vertices: Sequence[tuple[str, GroupSpec]], raw_edges: Sequence[tuple[str, str, GroupSpec]]):
    groups = dict(vertices)
    taken: dict[str, set[str]] = {v: set() for v, _ in vertices}
    edges = []
    for u, v, g in raw_edges:
        su = _pick_slot(p, groups[u], g, taken[u])
        sv = _pick_slot(p, groups[v], g, taken[v])
        if su:
            taken[u].add(su)
        if sv:
            taken[v].add(sv)
        edges.append(Edge(u, v, g, su, sv))
    return tuple(edges)


def chain(p: int, groups: Sequence[GroupSpec], edge_groups: Sequence[GroupSpec],
          designated: Iterable[int] = ()) -> TreeOfGroups:
    """A line G_1 -e_1- G_2 - ... with slots assigned automatically; vertex ids v1, v2, ..."""
    if len(edge_groups) != len(groups) - 1:
        raise ValueError("a chain with k vertices needs k-1 edge groups")
    vs = tuple((f"v{i + 1}", g) for i, g in enumerate(groups))
    raw = [(f"v{i + 1}", f"v{i + 2}", e) for i, e in enumerate(edge_groups)]
    return TreeOfGroups(p, vs, _assign_slots(p, vs, raw), frozenset(f"v{i + 1}" for i in designated))


def star(p: int, center: GroupSpec, arms: Sequence[tuple[Sequence[GroupSpec], Sequence[GroupSpec]]],
         designated_center: bool = False) -> TreeOfGroups:
    """A center vertex with arms; each arm is (groups outward, edge groups outward)."""
    vs = [("c", center)]
    raw = []
    for a, (groups, egs) in enumerate(arms):
        if len(groups) != len(egs):
            raise ValueError("each arm needs one edge group per arm vertex")
        prev = "c"
        for j, (g, e) in enumerate(zip(groups, egs)):
            vid = f"a{a + 1}.{j + 1}"
            vs.append((vid, g))
            raw.append((prev, vid, e))
            prev = vid
    vs_t = tuple(vs)
    return TreeOfGroups(p, vs_t, _assign_slots(p, vs_t, raw), frozenset({"c"}) if designated_center else frozenset())


def free_product(p: int, g1: GroupSpec, g2: GroupSpec) -> TreeOfGroups:
    from .grpcat import Trivial

    return TreeOfGroups(p, (("v1", g1), ("v2", g2)), (Edge("v1", "v2", Trivial),))


def tree_key(tree: TreeOfGroups) -> str:
    """Isomorphism-invariant key: vertex forms, edge forms and slot types, designation."""
    p = tree.p
    vids = tree.vertex_ids()
    vlabel = {v: (embedded_form(g, p), v in tree.designated) for v, g in tree.vertices}
    slot_of = {}
    for v, g in tree.vertices:
        slot_of[v] = dict(form_slots(embedded_form(g, p), p))
    adj: dict[str, list[tuple[str, tuple]]] = {v: [] for v in vids}
    for e in tree.edges:
        ef = embedded_form(e.group, p)
        su = slot_of[e.u].get(e.slot_u) if e.slot_u else None
        sv = slot_of[e.v].get(e.slot_v) if e.slot_v else None
        su_t = e.slot_u == "torus"
        sv_t = e.slot_v == "torus"
        adj[e.u].append((e.v, (ef, (su, su_t), (sv, sv_t))))
        adj[e.v].append((e.u, (ef, (sv, sv_t), (su, su_t))))

    def rooted(v, parent):
        kids = sorted(repr((lab, rooted(w, v))) for w, lab in adj[v] if w != parent)
        return repr((vlabel[v], kids))

    return min(rooted(v, None) for v in vids)
