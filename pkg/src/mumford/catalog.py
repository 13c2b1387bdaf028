"""Classification lists and bound tables: two- and three-branch-point families with their
truncations, the small-mu lists, the mu = 1/12 amalgams, N0 bound tables, F(g), suitability
and automorphism bounds, and tame orbifold ramification tuples."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from collections import Counter
from functools import lru_cache
from itertools import product
from math import gcd, isqrt
from typing import Callable, Iterable, Iterator, Sequence

from .amalgam import (
    TreeOfGroups,
    branch_count,
    chain,
    free_product,
    mu,
    ramification,
    realizable_simple,
    star,
    tree_key,
    validate,
)
from .grpcat import (
    A4,
    A5,
    S4,
    Borel,
    Cyclic,
    Dihedral,
    GroupSpec,
    NotEmbeddable,
    PGL2,
    PSL2,
    _least_s_pm,
    _mult_order,
    _ppower,
    branch_slots,
    embedded_form,
    form_min_exponent,
    form_order,
    order,
)

__all__ = [
    "FamilyInstance",
    "SmallMuEntry",
    "BoundRow",
    "enumerate_two_branch",
    "enumerate_three_branch",
    "match_family",
    "enumerate_small_mu",
    "printed_mu",
    "threshold_checks",
    "bound_tables",
    "f_bound",
    "compare",
    "suitable",
    "mu_twelfth",
    "aut_bound",
    "min_genus_pgl2",
    "tame_orbifold_tuples",
    "list_label",
]

Params = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class FamilyInstance:
    family_id: str
    params: Params
    tree: TreeOfGroups
    truncated: bool = False

    def param(self, name: str) -> int | None:
        return dict(self.params).get(name)

    def to_json(self) -> dict:
        return {
            "family_id": self.family_id,
            "params": {k: v for k, v in self.params},
            "truncated": self.truncated,
            "tree": self.tree.to_json(),
        }


def _params(**kw: int) -> Params:
    return tuple(sorted(kw.items()))


# ---------------------------------------------------------------------------
# parameter ranges


def _qs(p: int, qmax: int, qmin: int = 2) -> list[tuple[int, int]]:
    out, n = [], 1
    while p**n <= qmax:
        if p**n >= qmin:
            out.append((p**n, n))
        n += 1
    return out


def _ells(p: int, qmax: int) -> list[int]:
    """Orders l >= 2 prime to p with l | p^s - 1 or l | p^s + 1 for some p^s <= qmax."""
    vals = set()
    for q, _ in _qs(p, qmax):
        for t in (q - 1, q + 1):
            vals |= {d for d in range(2, t + 1) if t % d == 0 and d % p}
    return sorted(vals)


def _exps(p: int, m: int, lo: int, hi: int) -> list[int]:
    """Exponents N in [lo, hi] with m | p^N - 1."""
    r = _mult_order(p, m)
    return [N for N in range(max(lo, 1), hi + 1) if N % r == 0]


# ---------------------------------------------------------------------------
# family skeletons: full-length chains and stars, expanded into truncations


@dataclass(frozen=True)
class _Chain:
    fid: str
    params: Params
    groups: tuple[GroupSpec, ...]
    edges: tuple[GroupSpec, ...]
    core: int | None = None  # index of the designated p-group vertex, kept with both neighbours


@dataclass(frozen=True)
class _Star:
    fid: str
    params: Params
    center: GroupSpec
    arms: tuple[tuple[tuple[GroupSpec, ...], tuple[GroupSpec, ...]], ...]


def _chain_truncations(c: _Chain, p: int) -> Iterator[tuple[TreeOfGroups, bool]]:
    k = len(c.groups)
    for i in range(k):
        for j in range(i + 1, k):
            if c.core is not None and not (i <= c.core - 1 and c.core + 1 <= j):
                continue
            des = () if c.core is None else (c.core - i,)
            try:
                t = chain(p, c.groups[i : j + 1], c.edges[i:j], designated=des)
            except (ValueError, NotEmbeddable):
                continue
            yield t, (i, j) != (0, k - 1)


def _star_truncations(s: _Star, p: int) -> Iterator[tuple[TreeOfGroups, bool]]:
    for cut in product(*(range(len(g) + 1) for g, _ in s.arms)):
        if sum(cut) == 0:
            continue
        arms = [(g[:c], e[:c]) for (g, e), c in zip(s.arms, cut) if c]
        full = all(c == len(g) for (g, _), c in zip(s.arms, cut))
        try:
            t = star(p, s.center, arms)
        except (ValueError, NotEmbeddable):
            continue
        yield t, not full


def _emit(skeletons: Iterable[_Chain | _Star], p: int, seen: set[str], out: list[FamilyInstance]) -> None:
    for sk in skeletons:
        gen = _chain_truncations(sk, p) if isinstance(sk, _Chain) else _star_truncations(sk, p)
        for tree, trunc in gen:
            if validate(tree):
                continue
            key = tree_key(tree)
            if key in seen:
                continue
            seen.add(key)
            out.append(FamilyInstance(sk.fid, sk.params, tree, trunc))


# two branch points; q = p^n


def _two_branch_skeletons(p: int, qmax: int, nmax: int) -> Iterator[_Chain]:
    C, B = Cyclic, Borel
    qs3 = _qs(p, qmax, 3)
    for q, n in qs3:  # (i)
        for n1 in range(1, nmax + 1):
            for n2 in range(2, nmax + 1):
                yield _Chain("3.2.i", _params(q=q, n=n, n1=n1, n2=n2),
                             (B(2 * n * n1, q + 1), PGL2(q), B(n * n2, q - 1)), (C(q + 1), B(n, q - 1)))
    for q, n in qs3:  # (ii)
        for n1 in range(2, nmax + 1):
            for n2 in range(n1, nmax + 1):
                yield _Chain("3.2.ii", _params(q=q, n=n, n1=n1, n2=n2),
                             (B(n * n1, q - 1), PGL2(q), PGL2(q), B(n * n2, q - 1)),
                             (B(n, q - 1), C(q + 1), B(n, q - 1)))
    if p != 2:
        for q, n in qs3:  # (iii)
            s = 2 if q > 3 else 1
            h, k = (q + 1) // 2, (q - 1) // 2
            for n1 in range(1, nmax + 1):
                for n2 in range(2, nmax + 1):
                    yield _Chain("3.2.iii", _params(q=q, n=n, n1=n1, n2=n2),
                                 (B(s * n * n1, h), PSL2(q), B(n * n2, k)), (C(h), B(n, k)))
        for q, n in qs3:  # (iv)
            h, k = (q + 1) // 2, (q - 1) // 2
            for n1 in range(2, nmax + 1):
                for n2 in range(n1, nmax + 1):
                    yield _Chain("3.2.iv", _params(q=q, n=n, n1=n1, n2=n2),
                                 (B(n * n1, k), PSL2(q), PSL2(q), B(n * n2, k)),
                                 (B(n, k), C(h), B(n, k)))
    for n1 in range(1, nmax + 1):  # (v)
        for n2 in range(n1, nmax + 1):
            g = gcd(p**n1 - 1, p**n2 - 1)
            for m in range(1, g + 1):
                if g % m:
                    continue
                yield _Chain("3.2.v", _params(n1=n1, n2=n2, m=m), (B(n1, m), B(n2, m)), (C(m),))
    if p == 3 and qmax >= 9:
        for n1 in range(1, nmax + 1):  # (vi)
            for n2 in range(2, nmax + 1):
                yield _Chain("3.2.vi", _params(n1=n1, n2=n2), (B(2 * n1, 5), A5, B(n2, 2)), (C(5), B(1, 2)))
        for n1 in range(2, nmax + 1):  # (vii)
            for n2 in range(n1, nmax + 1):
                yield _Chain("3.2.vii", _params(n1=n1, n2=n2),
                             (B(n1, 2), A5, A5, B(n2, 2)), (B(1, 2), C(5), B(1, 2)))
        for n1 in range(2, nmax + 1):  # (viii)
            for n2 in range(2, nmax + 1):
                yield _Chain("3.2.viii", _params(n1=n1, n2=n2),
                             (B(n1, 2), A5, PSL2(9), B(2 * n2, 4)), (B(1, 2), C(5), B(2, 4)))
    if p == 2:
        odd = [l for l in _ells(2, qmax) if l % 2]
        for l in odd:  # (ix)
            for n1 in _exps(2, l, 2, nmax):
                for n2 in range(2, nmax + 1):
                    yield _Chain("3.2.ix", _params(l=l, n1=n1, n2=n2),
                                 (B(n1, l), Dihedral(l), B(n2, 1)), (C(l), C(2)))
        for l in odd:  # (x)
            for n1 in range(2, nmax + 1):
                for n2 in range(n1, nmax + 1):
                    yield _Chain("3.2.x", _params(l=l, n1=n1, n2=n2),
                                 (B(n1, 1), Dihedral(l), Dihedral(l), B(n2, 1)), (C(2), C(l), C(2)))
        for q, n in _qs(2, qmax, 4):  # (xi)
            for n1 in range(2, nmax + 1):
                for n2 in range(2, nmax + 1):
                    yield _Chain("3.2.xi", _params(q=q, n=n, n1=n1, n2=n2),
                                 (B(n1, 1), Dihedral(q + 1), PGL2(q), B(n * n2, q - 1)),
                                 (C(2), C(q + 1), B(n, q - 1)))


def _maxp_skeletons(p: int, qmax: int, nmax: int) -> Iterator[_Chain]:
    C, B = Cyclic, Borel
    if p == 2:
        odd = [l for l in _ells(2, qmax) if l % 2]
        pairs = [(l, m) for l in odd for m in odd if l <= m]
        for n0 in range(1, nmax + 1):
            core = B(n0, 1)
            for l, m in pairs:  # (i)
                for n1 in _exps(2, l, 1, nmax):
                    for n2 in _exps(2, m, 1, nmax):
                        yield _Chain("4.3.i", _params(l=l, m=m, n0=n0, n1=n1, n2=n2),
                                     (B(n1, l), Dihedral(l), core, Dihedral(m), B(n2, m)),
                                     (C(l), C(2), C(2), C(m)), core=2)
            for l in odd:  # (ii)
                for m in odd:
                    for n1 in _exps(2, l, 1, nmax):
                        for n2 in range(2, nmax + 1):
                            yield _Chain("4.3.ii", _params(l=l, m=m, n0=n0, n1=n1, n2=n2),
                                         (B(n1, l), Dihedral(l), core, Dihedral(m), Dihedral(m), B(n2, 1)),
                                         (C(l), C(2), C(2), C(m), C(2)), core=2)
            for l, m in pairs:  # (iii)
                for n1 in range(2, nmax + 1):
                    for n2 in range(2, nmax + 1):
                        yield _Chain("4.3.iii", _params(l=l, m=m, n0=n0, n1=n1, n2=n2),
                                     (B(n1, 1), Dihedral(l), Dihedral(l), core, Dihedral(m), Dihedral(m), B(n2, 1)),
                                     (C(2), C(l), C(2), C(2), C(m), C(2)), core=3)
            for q, n in _qs(2, qmax, 4):  # (iv)
                for l in odd:
                    for n1 in _exps(2, l, 1, nmax):
                        for k in range(2, nmax + 1):
                            yield _Chain("4.3.iv", _params(q=q, n=n, l=l, n0=n0, n1=n1, k=k),
                                         (B(n1, l), Dihedral(l), core, Dihedral(q + 1), PGL2(q), B(n * k, q - 1)),
                                         (C(l), C(2), C(2), C(q + 1), B(n, q - 1)), core=2)
            qs = _qs(2, qmax, 4)
            for (q1, a), (q2, b) in product(qs, qs):  # (v)
                if q1 > q2:
                    continue
                for k1 in range(2, nmax + 1):
                    for k2 in range(2, nmax + 1):
                        yield _Chain("4.3.v", _params(q1=q1, q2=q2, n0=n0, k1=k1, k2=k2),
                                     (B(a * k1, q1 - 1), PGL2(q1), Dihedral(q1 + 1), core,
                                      Dihedral(q2 + 1), PGL2(q2), B(b * k2, q2 - 1)),
                                     (B(a, q1 - 1), C(q1 + 1), C(2), C(2), C(q2 + 1), B(b, q2 - 1)), core=3)
    if p == 3:
        P3 = PSL2(3)
        for n0 in range(1, nmax + 1):
            core = B(n0, 1)
            for n1 in range(1, nmax + 1):  # (i)
                for n2 in range(n1, nmax + 1):
                    yield _Chain("4.4.i", _params(n0=n0, n1=n1, n2=n2),
                                 (B(n1, 2), P3, core, P3, B(n2, 2)), (C(2), C(3), C(3), C(2)), core=2)
            for n1 in range(1, nmax + 1):  # (ii)
                for n2 in range(2, nmax + 1):
                    yield _Chain("4.4.ii", _params(n0=n0, n1=n1, n2=n2),
                                 (B(n1, 2), P3, core, P3, P3, B(n2, 1)), (C(2), C(3), C(3), C(2), C(3)), core=2)
            for n1 in range(2, nmax + 1):  # (iii)
                for n2 in range(n1, nmax + 1):
                    yield _Chain("4.4.iii", _params(n0=n0, n1=n1, n2=n2),
                                 (B(n1, 1), P3, P3, core, P3, P3, B(n2, 1)),
                                 (C(3), C(2), C(3), C(3), C(2), C(3)), core=3)


def _borel_arm(p: int, m: int, nmax: int) -> list[tuple[tuple, tuple]]:
    # an arm with no Borel end within bounds is kept as an empty (always truncated) arm
    return [((Borel(N, m),), (Cyclic(m),)) for N in _exps(p, m, 1, nmax)] or [((), ())]


def _sub_arm(p: int, top: GroupSpec, edge: GroupSpec, q: int, k_over: int, nmax: int) -> list[tuple[tuple, tuple]]:
    """Arm ``top *_{B(F_q)} B(n*k, m)`` with k >= 2, attached to the center through ``edge``."""
    n = _ppower(q, p)
    m = (q - 1) // k_over
    return [((top, Borel(n * k, m)), (edge, Borel(n, m))) for k in range(2, nmax + 1)]


def _tame_center_skeletons(p: int, qmax: int, nmax: int) -> Iterator[_Star]:
    C = Cyclic
    arm = lambda m: _borel_arm(p, m, nmax)  # noqa: E731
    if p > 5:  # 4.5
        for a1, a2, a3 in product(arm(2), arm(3), arm(5)):
            yield _Star("4.5", (), A5, (a1, a2, a3))
    if p > 3:  # 4.6
        c3 = arm(3)
        c4 = arm(4)
        for a1, a2, a3 in product(arm(2), c3, c4):
            yield _Star("4.6.i", (), S4, (a1, a2, a3))
        if p == 5:
            for a1, a2, a3 in product(arm(2), _sub_arm(5, PSL2(5), C(3), 5, 2, nmax), c4):
                yield _Star("4.6.ii", (), S4, (a1, a2, a3))
        if p == 7:
            for a1, a2, a3 in product(arm(2), c3, _sub_arm(7, PSL2(7), C(4), 7, 2, nmax)):
                yield _Star("4.6.iii", (), S4, (a1, a2, a3))
        for a1, a2, a3 in product(arm(2), c3, c3):  # 4.7
            yield _Star("4.7.i", (), A4, (a1, a2, a3))
        if p == 5:
            sub = _sub_arm(5, PSL2(5), C(3), 5, 2, nmax)
            for a1, a2, a3 in product(arm(2), sub, c3 + sub):
                yield _Star("4.7.ii", (), A4, (a1, a2, a3))
    if p > 2:  # 4.8
        for l in _ells(p, qmax):
            D = Dihedral(l)
            if embedded_form(D, p)[0] != "tdihedral":
                continue
            c2 = arm(2)
            third: list[tuple[str, list]] = [("4.8.i", arm(l))]
            for q, n in _qs(p, qmax, 3):
                if l == q + 1:
                    third.append(("4.8.ii", _sub_arm(p, PGL2(q), C(l), q, 1, nmax)))
                if l == (q + 1) // 2:
                    third.append(("4.8.iii", _sub_arm(p, PSL2(q), C(l), q, 2, nmax)))
            if p == 3 and l == 5 and qmax >= 9:
                third.append(("4.8.iv", [((A5, Borel(k, 2)), (C(5), Borel(1, 2))) for k in range(2, nmax + 1)]))
            sides: list[tuple[bool, tuple]] = [(False, a) for a in c2]
            if p == 3:
                sides += [(True, ((PSL2(3), Borel(k, 1)), (C(2), C(3)))) for k in range(2, nmax + 1)]
            for fid, options in third:
                for (s1, a1), (s2, a2) in product(sides, sides):
                    for a3 in options:
                        tag = "4.8.v" if (s1 or s2) else fid
                        yield _Star(tag, _params(l=l), D, (a1, a2, a3))


# ---------------------------------------------------------------------------
# public enumerators


@lru_cache(maxsize=64)
def _two_branch(p: int, qmax: int, nmax: int) -> tuple[FamilyInstance, ...]:
    out: list[FamilyInstance] = []
    _emit(_two_branch_skeletons(p, qmax, nmax), p, set(), out)
    return tuple(out)


@lru_cache(maxsize=64)
def _three_branch(p: int, qmax: int, nmax: int) -> tuple[FamilyInstance, ...]:
    out: list[FamilyInstance] = []
    seen: set[str] = set()
    _emit(_maxp_skeletons(p, qmax, nmax), p, seen, out)
    _emit(_tame_center_skeletons(p, qmax, nmax), p, seen, out)
    return tuple(out)


def enumerate_two_branch(p: int, qmax: int = 9, nmax: int = 3) -> list[FamilyInstance]:
    """Two-branch-point families with all truncations, deduplicated by tree shape."""
    return list(_two_branch(p, qmax, nmax))


def enumerate_three_branch(p: int, qmax: int = 9, nmax: int = 3) -> list[FamilyInstance]:
    """Three-branch-point families (designated p-group core, or one tame vertex with three arms)."""
    return list(_three_branch(p, qmax, nmax))


def _bounds_for(tree: TreeOfGroups) -> tuple[int, int]:
    p = tree.p
    qmax, nmax = 9, 3
    for g in [g for _, g in tree.vertices] + [e.group for e in tree.edges]:
        try:
            f = embedded_form(g, p)
        except NotEmbeddable:
            continue
        if f[0] == "borel":
            nmax = max(nmax, f[1])
            if f[2] > 1:
                qmax = max(qmax, p ** _least_s_pm(f[2], p))
        elif f[0] != "trivial":
            qmax = max(qmax, p ** form_min_exponent(f, p))
    return qmax, nmax


def _forms(groups: Iterable[GroupSpec], p: int) -> Counter:
    return Counter(embedded_form(g, p) for g in groups)


def match_family(tree: TreeOfGroups) -> FamilyInstance | None:
    """The listed family instance whose tree has the same shape, if any.

    Skeletons are scanned within bounds derived from the tree; only those containing the tree's
    vertex groups are expanded into truncations.
    """
    if validate(tree):
        return None
    p = tree.p
    qmax, nmax = _bounds_for(tree)
    want = _forms((g for _, g in tree.vertices), p)
    size = len(tree.vertices)
    key = tree_key(tree)
    for gen in (_two_branch_skeletons(p, qmax, nmax), _maxp_skeletons(p, qmax, nmax),
                _tame_center_skeletons(p, qmax, nmax)):
        for sk in gen:
            groups = list(sk.groups) if isinstance(sk, _Chain) else [sk.center] + [g for a, _ in sk.arms for g in a]
            try:
                have = _forms(groups, p)
            except NotEmbeddable:
                continue
            if want - have:
                continue
            trunc = _chain_truncations(sk, p) if isinstance(sk, _Chain) else _star_truncations(sk, p)
            for t, flag in trunc:
                if len(t.vertices) != size or _forms((g for _, g in t.vertices), p) != want:
                    continue
                if validate(t):
                    continue
                if tree_key(t) == key:
                    return FamilyInstance(sk.fid, sk.params, t, flag)
    return None


# ---------------------------------------------------------------------------
# small-mu lists


def list_label(family_id: str) -> str | None:
    """Label in the mu < 1/12 lists: two-branch item k -> A(k), tame dihedral item k -> B(k)."""
    if family_id.startswith("3.2."):
        return f"A({family_id[4:]})"
    if family_id.startswith("4.8."):
        return f"B({family_id[4:]})"
    return None


@dataclass(frozen=True)
class SmallMuEntry:
    instance: FamilyInstance
    mu: Fraction
    label: str | None
    printed: Fraction | None


def _printed_shapes(p: int, qmax: int, nmax: int) -> Iterator[tuple[str, TreeOfGroups, Fraction]]:
    """Trees for which the mu < 1/12 lists print a closed form, with that closed form."""
    C, B = Cyclic, Borel
    for q, n in _qs(p, qmax, 3):
        yield "A(i)", chain(p, [B(2 * n, q + 1), PGL2(q), B(2 * n, q - 1)], [C(q + 1), B(n, q - 1)]), \
            Fraction(q * q - 2, q * (q * q - 1))
        yield "A(ii)", chain(p, [B(2 * n, q - 1), PGL2(q), PGL2(q), B(2 * n, q - 1)],
                             [B(n, q - 1), C(q + 1), B(n, q - 1)]), Fraction(q * q - 2, q * q * (q - 1))
        if p != 2 and q > 3:
            h, k = (q + 1) // 2, (q - 1) // 2
            yield "A(iii)", chain(p, [B(2 * n, h), PSL2(q), B(2 * n, k)], [C(h), B(n, k)]), \
                Fraction(2 * (q * q - 2), q * (q * q - 1))
            yield "A(iv)", chain(p, [B(2 * n, k), PSL2(q), PSL2(q), B(2 * n, k)], [B(n, k), C(h), B(n, k)]), \
                Fraction(2 * (q * q - 2), q * q * (q - 1))
    for n1 in range(1, nmax + 1):
        for n2 in range(n1, nmax + 1):
            g = gcd(p**n1 - 1, p**n2 - 1)
            for m in range(6, g + 1):
                if g % m == 0:
                    yield "A(v)", chain(p, [B(n1, m), B(n2, m)], [C(m)]), \
                        Fraction(p**n2 - p ** (n2 - n1) - 1, p**n2 * m)
    if p == 3 and qmax >= 9:
        for n2 in range(2, nmax + 1):
            yield "A(viii)", chain(3, [PSL2(9), B(2 * n2, 4)], [B(2, 4)]), \
                Fraction(1, 40) - Fraction(1, 4 * 3 ** (2 * n2))
    if p == 2:
        for l in [l for l in _ells(2, qmax) if l % 2]:
            for n1 in _exps(2, l, 2, nmax):
                yield "A(ix)", chain(2, [B(n1, l), Dihedral(l)], [C(l)]), \
                    Fraction(2 ** (n1 - 1) - 1, 2**n1 * l)
        for q, n in _qs(2, qmax, 4):
            for n2 in range(2, nmax + 1):
                yield "A(xi)", chain(2, [Dihedral(q + 1), PGL2(q), B(n * n2, q - 1)], [C(q + 1), B(n, q - 1)]), \
                    Fraction(q**n2 - q - 1, q**n2 * (q * q - 1))
    if p > 2:
        for l in _ells(p, qmax):
            if l <= 5 or embedded_form(Dihedral(l), p)[0] != "tdihedral":
                continue
            for n3 in _exps(p, l, 1, nmax):
                yield "B(i)", chain(p, [Dihedral(l), B(n3, l)], [C(l)]), Fraction(p**n3 - 2, 2 * l * p**n3)
        for q, n in _qs(p, qmax, 3):
            for m in range(2, nmax + 1):
                yield "B(ii)", chain(p, [Dihedral(q + 1), PGL2(q), B(n * m, q - 1)], [C(q + 1), B(n, q - 1)]), \
                    Fraction(q**m - 2, 2 * (q - 1) * q**m)
                h, k = (q + 1) // 2, (q - 1) // 2
                if h >= 2 and embedded_form(Dihedral(h), p)[0] == "tdihedral":
                    yield "B(iii)", chain(p, [Dihedral(h), PSL2(q), B(n * m, k)], [C(h), B(n, k)]), \
                        Fraction(q**m - 2, q**m * (q - 1))


def printed_mu(p: int, qmax: int = 9, nmax: int = 3) -> dict[str, tuple[str, Fraction]]:
    """tree_key -> (list label, printed closed-form mu) for the shapes the lists print."""
    out: dict[str, tuple[str, Fraction]] = {}
    for label, tree, val in _printed_shapes(p, qmax, nmax):
        if validate(tree):
            continue
        out.setdefault(tree_key(tree), (label, val))
    return out


def enumerate_small_mu(p: int, qmax: int = 9, nmax: int = 3) -> list[SmallMuEntry]:
    """Every enumerated two- or three-branch instance with mu < 1/12."""
    printed = printed_mu(p, qmax, nmax)
    out = []
    for inst in _two_branch(p, qmax, nmax) + _three_branch(p, qmax, nmax):
        if any(form_order(embedded_form(e.group, p), p) == 1 for e in inst.tree.edges):
            continue
        val = mu(inst.tree)
        if val < Fraction(1, 12):
            pr = printed.get(tree_key(inst.tree))
            out.append(SmallMuEntry(inst, val, list_label(inst.family_id), pr[1] if pr else None))
    return out


@dataclass(frozen=True)
class ThresholdCheck:
    label: str
    claim: str
    below: tuple[str, Fraction] | None  # (where, mu) at the first parameter claimed below 1/12
    above: tuple[str, Fraction] | None  # (where, mu) at the last parameter claimed not below
    ok: bool
    note: str = ""


def threshold_checks() -> list[ThresholdCheck]:
    """Recompute the boundary parameters of the '< 1/12' claims of the small-mu lists."""
    C, B = Cyclic, Borel
    twelfth = Fraction(1, 12)
    out = []

    def both(label, claim, lo, hi, build, note=""):
        ta, tb = build(*lo), build(*hi)
        ma, mb = mu(ta), mu(tb)
        out.append(ThresholdCheck(label, claim, (str(hi), mb), (str(lo), ma), mb < twelfth <= ma, note))

    # q -> (p, n)
    def pn(q):
        for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
            k = _ppower(q, p)
            if k:
                return p, k
        raise ValueError(q)

    def a1(q):
        p, n = pn(q)
        return chain(p, [B(2 * n, q + 1), PGL2(q), B(2 * n, q - 1)], [C(q + 1), B(n, q - 1)])

    def a2(q):
        p, n = pn(q)
        return chain(p, [B(2 * n, q - 1), PGL2(q), PGL2(q), B(2 * n, q - 1)], [B(n, q - 1), C(q + 1), B(n, q - 1)])

    def a3(q):
        p, n = pn(q)
        return chain(p, [B(2 * n, (q + 1) // 2), PSL2(q), B(2 * n, (q - 1) // 2)], [C((q + 1) // 2), B(n, (q - 1) // 2)])

    def a4(q):
        p, n = pn(q)
        k = (q - 1) // 2
        return chain(p, [B(2 * n, k), PSL2(q), PSL2(q), B(2 * n, k)], [B(n, k), C((q + 1) // 2), B(n, k)])

    def a9(l, n1):
        return chain(2, [B(n1, l), Dihedral(l)], [C(l)])

    def a11(q, n2=2):
        p, n = pn(q)
        return chain(2, [Dihedral(q + 1), PGL2(q), B(n * n2, q - 1)], [C(q + 1), B(n, q - 1)])

    def b2(q, m=2):
        p, n = pn(q)
        return chain(p, [Dihedral(q + 1), PGL2(q), B(n * m, q - 1)], [C(q + 1), B(n, q - 1)])

    def b3(q, m=2):
        p, n = pn(q)
        return chain(p, [Dihedral((q + 1) // 2), PSL2(q), B(n * m, (q - 1) // 2)], [C((q + 1) // 2), B(n, (q - 1) // 2)])

    both("A(i)", "< 1/12 for q >= 13 (n1=1, n2=2)", (11,), (13,), a1)
    both("A(ii)", "< 1/12 for q >= 13 (n1=n2=2)", (11,), (13,), a2)
    both("A(iii)", "< 1/12 for q >= 25 (n1=1, n2=2)", (23,), (25,), a3)
    both("A(iv)", "< 1/12 for q >= 25 (n1=n2=2)", (23,), (25,), a4)
    both("A(ix)", "< 1/12 for l >= 7", (5, 4), (7, 3), a9)
    both("A(xi)", "< 1/12 for q > 8 (n2=2)", (8,), (16,), a11,
         note="the displayed chain is already below 1/12 at q=8; the printed closed form is the mu of its "
              "PGL2 *_B B sub-chain")
    both("B(ii)", "< 1/12 for q >= 7", (5,), (7,), b2)
    both("B(iii)", "< 1/12 for q >= 13", (11,), (13,), b3)
    return out


# ---------------------------------------------------------------------------
# F(g), suitability, automorphism bounds


def compare(N: int | Fraction, g: int | Fraction) -> int:
    """Sign of N - F(g) with F(g) = g*(sqrt(8g+1) + 3), computed exactly."""
    N, g = Fraction(N), Fraction(g)
    if g <= 0:
        raise ValueError("F(g) needs g > 0")
    d = N - 3 * g
    if d < 0:
        return -1
    lhs, rhs = d * d, g * g * (8 * g + 1)
    return (lhs > rhs) - (lhs < rhs)


@dataclass(frozen=True)
class FValue:
    """F(g) = 3g + g*sqrt(8g+1); exact when 8g+1 is a square."""

    g: int

    @property
    def exact(self) -> int | None:
        r = isqrt(8 * self.g + 1)
        return 3 * self.g + self.g * r if r * r == 8 * self.g + 1 else None

    @property
    def floor(self) -> int:
        return 3 * self.g + isqrt(self.g * self.g * (8 * self.g + 1))

    def __float__(self) -> float:
        return self.g * ((8 * self.g + 1) ** 0.5 + 3)


def f_bound(g: int) -> FValue:
    if g < 2:
        raise ValueError("F(g) is used for g >= 2")
    return FValue(g)


def suitable(N0: int, mu_: Fraction) -> bool:
    """g0 = 1 + mu*N0 >= 5 and N0 <= F(g0), exactly (g0 may be a non-integer rational)."""
    mu_ = Fraction(mu_)
    if mu_ <= 0:
        raise ValueError("suitability needs mu > 0")
    g0 = 1 + mu_ * N0
    return g0 >= 5 and compare(N0, g0) <= 0


_MAX_SMALL = {2: 12, 3: 24, 4: 36, 5: 48}


@dataclass(frozen=True)
class AutBound:
    value: int
    bound: int
    exception: bool
    max_g: int | None


def aut_bound(g: int, p: int) -> AutBound:
    """max(12(g-1), floor F(g)), with the p=3, g=6 exception; value is Max(g) where known (g <= 6)."""
    if g < 2:
        raise ValueError("g must be >= 2")
    bound = max(12 * (g - 1), f_bound(g).floor)
    exception = p == 3 and g == 6
    if exception:
        bound = 72
    max_g = _MAX_SMALL.get(g)
    if g == 6:
        max_g = 72 if p == 3 else 60
    return AutBound(max_g if max_g is not None else bound, bound, exception, max_g)


# ---------------------------------------------------------------------------
# bound tables


@dataclass(frozen=True)
class BoundRow:
    family_id: str
    params: Params
    tree: TreeOfGroups
    N0: int
    mu: Fraction
    g0: Fraction
    mu_computed: Fraction
    lcm: int
    strict: bool  # the N0 exceeds the lcm of the vertex orders

    def checks(self) -> dict[str, bool]:
        return {
            "mu": self.mu == self.mu_computed,
            "g0": self.g0 == 1 + self.mu * self.N0,
            "N0": self.N0 > self.lcm if self.strict else self.N0 == self.lcm,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks().values())


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _row(fid, params, tree, N0, mu_, g0, strict) -> BoundRow:
    vs = [order(g, tree.p) for _, g in tree.vertices]
    return BoundRow(fid, params, tree, int(N0), Fraction(mu_), Fraction(g0), mu(tree), _lcm(vs[0], vs[1]), strict)


FIXED_ROWS = ("8.4.pgl3-b32", "8.4.psl3-b31", "8.4.psl5-b22", "8.4.psl5-b32")


def bound_tables(p: int, q: int, mrange: Sequence[int] = (1, 2, 3, 4, 5), nrange: int = 2) -> list[BoundRow]:
    """Rows of the two N0 tables instantiated at (p, q): printed N0, mu, g0 next to recomputed values.

    A row is emitted when its printed side conditions hold and its mu is below 1/12, or when it is
    one of the fixed-parameter rows printed for a single q.
    """
    n = _ppower(q, p)
    if n is None:
        raise ValueError(f"q={q} is not a power of p={p}")
    C, B = Cyclic, Borel
    F = Fraction
    rows: list[BoundRow] = []
    tw = F(1, 12)
    odd = p != 2

    def add(fid, params, groups, edge, N0, mu_, g0, strict=False, fixed=False):
        try:
            t = chain(p, groups, [edge])
        except (ValueError, NotEmbeddable):
            return
        if validate(t):
            return
        r = _row(fid, params, t, N0, mu_, g0, strict)
        if fixed or r.mu < tw:
            rows.append(r)

    if q >= 3:
        add("8.4.pgl-dihedral", _params(q=q), [PGL2(q), Dihedral(q + 1)], C(q + 1),
            q**3 - q, F(q - 2, 2 * q * (q - 1)), F(q * q - q, 2))
        add("8.4.pgl-pgl", _params(q=q), [PGL2(q), PGL2(q)], C(q + 1),
            q**3 - q, F(q * q - q - 2, q**3 - q), q * q - q - 1)
        for m in mrange:
            if m > 3:
                add("8.4.pgl-borel", _params(q=q, m=m), [PGL2(q), B(n * m, q - 1)], B(n, q - 1),
                    q**m * (q * q - 1), F(q**m - q - 1, q**m * (q * q - 1)), q**m - q)
        for m in mrange:
            if m >= 1:
                A = F(q ** (2 * m + 1) - q ** (2 * m) - q ** (2 * m - 1) - q + 1, q ** (2 * m) * (q + 1) * (q - 1))
                add("8.4.pgl-borel-plus", _params(q=q, m=m), [PGL2(q), B(2 * n * m, q + 1)], C(q + 1),
                    q ** (2 * m) * (q * q - 1), A, 1 + q ** (2 * m) * (q * q - 1) * A)
        if odd:
            h, k = (q + 1) // 2, (q - 1) // 2
            add("8.4.psl-dihedral", _params(q=q), [PSL2(q), Dihedral(h)], C(h),
                F(q**3 - q, 2), F(q - 2, q * (q - 1)), F(q * q - q, 2))
            add("8.4.psl-psl", _params(q=q), [PSL2(q), PSL2(q)], C(h),
                F(q**3 - q, 2), F(2 * q * q - 2 * q - 4, q**3 - q), q * q - q - 1)
            for m in mrange:
                if m > 3:
                    add("8.4.psl-borel", _params(q=q, m=m), [PSL2(q), B(n * m, k)], B(n, k),
                        F(q**m * (q * q - 1), 2), F(2 * q**m - 2 * q - 2, q**m * (q * q - 1)), q**m - q)
            for m in mrange:
                if m >= 1:
                    A = F(q ** (2 * m + 1) - q ** (2 * m) - q ** (2 * m - 1) - q + 1,
                          q ** (2 * m) * (q + 1) * (q - 1))
                    add("8.4.psl-borel-plus", _params(q=q, m=m), [PSL2(q), B(2 * n * m, h)], C(h),
                        F(q ** (2 * m) * (q * q - 1), 2), 2 * A, 1 + q ** (2 * m) * (q * q - 1) * A)
    if q == 3:
        add("8.4.pgl3-b32", (), [PGL2(3), B(3, 2)], B(1, 2), 216, F(23, 216), 24, fixed=True)
        add("8.4.psl3-b31", (), [PSL2(3), B(3, 1)], B(1, 1), 108, F(23, 108), 24, fixed=True)
    if q == 5:
        add("8.4.psl5-b22", (), [PSL2(5), B(2, 2)], B(1, 2), 300, F(19, 300), 20, fixed=True)
        add("8.4.psl5-b32", (), [PSL2(5), B(3, 2)], B(1, 2), 1500, F(119, 1500), 120, fixed=True)
    # strictly larger N0
    if q > 3:
        add("8.5.pgl-b3", _params(q=q), [PGL2(q), B(3 * n, q - 1)], B(n, q - 1), q**6,
            F(q**3 - q - 1, q**3 * (q * q - 1)), F(q**6 - q**4 - q**3 + q * q - 1, q * q - 1), strict=True)
    if odd and q > 5:
        k = (q - 1) // 2
        add("8.5.psl-b3", _params(q=q), [PSL2(q), B(3 * n, k)], B(n, k), q**6,
            F(2 * q**3 - 2 * q - 2, q**3 * (q * q - 1)), F(2 * q**6 - 2 * q**4 - 2 * q**3 + q * q - 1, q * q - 1),
            strict=True)
    if odd and q > 3:
        add("8.5.pgl-b2", _params(q=q), [PGL2(q), B(2 * n, q - 1)], B(n, q - 1), F((q**3 - q) ** 2, 2),
            F(q * q - q - 1, q * q * (q * q - 1)), F((q * q - 1) * (q * q - q - 1) + 2, 2), strict=True)
    if p == 2 and q >= 4:
        add("8.5.pgl-b2", _params(q=q), [PGL2(q), B(2 * n, q - 1)], B(n, q - 1), (q**3 - q) ** 2,
            F(q * q - q - 1, q * q * (q * q - 1)), (q * q - 1) * (q * q - q - 1) + 1, strict=True)
    if odd and q > 5:
        k = (q - 1) // 2
        add("8.5.psl-b2", _params(q=q), [PSL2(q), B(2 * n, k)], B(n, k), F((q**3 - q) ** 2, 4),
            F(2 * q * q - 2 * q - 2, q * q * (q * q - 1)), F((q * q - 1) * (q * q - q - 1) + 2, 2), strict=True)
    for l in range(2, q):
        if (q - 1) % l:
            continue
        for n1 in range(n, n + nrange + 1):
            if (p**n1 - 1) % l:
                continue
            n2 = n
            add("8.5.borel-borel", _params(l=l, n1=n1, n2=n2), [B(n1, l), B(n2, l)], C(l), p ** (n1 + n2) * l,
                F(p**n1 - p ** (n1 - n2) - 1, p**n1 * l), p ** (n1 + n2) - p**n1 - p**n2 + 1, strict=True)
        if p == 2 and l % 2 == 0:
            continue
        add("8.5.borel-dihedral", _params(q=q, l=l), [B(n, l), Dihedral(l)], C(l), (q * q + q) * l,
            F(q - 2, 2 * q * l), F(q * q - q, 2), strict=True)
    return rows


# ---------------------------------------------------------------------------
# mu = 1/12, extreme amalgams, tame orbifold tuples


def mu_twelfth(p: int) -> list[FamilyInstance]:
    """The amalgams with mu = 1/12 available in characteristic p."""
    C = Cyclic
    out = [FamilyInstance("8.1.d3-d2", (), chain(p, [Dihedral(3), Dihedral(2)], [C(2)]))]
    if p != 2:
        out.append(FamilyInstance("8.1.s4-d4", (), chain(p, [S4, Dihedral(4)], [C(4)])))
    if p != 3:
        out.append(FamilyInstance("8.1.a4-d3", (), chain(p, [A4, Dihedral(3)], [C(3)])))
    if p != 5:
        out.append(FamilyInstance("8.1.a5-d5", (), chain(p, [A5, Dihedral(5)], [C(5)])))
    for inst in out:
        if mu(inst.tree) != Fraction(1, 12):
            raise AssertionError(f"{inst.family_id}: mu = {mu(inst.tree)}")
    return out


def min_genus_pgl2(q: int) -> tuple[int, list[FamilyInstance]]:
    """Least genus q(q-1)/2 for automorphism group PGL2(F_q), with the amalgams attaining it."""
    if q <= 2:
        raise ValueError("q must exceed 2")
    p = next(r for r in range(2, q + 1) if q % r == 0)
    n = _ppower(q, p)
    if n is None:
        raise ValueError(f"q={q} is not a prime power")
    out = [
        FamilyInstance("7.1.pgl-dihedral", _params(q=q), chain(p, [PGL2(q), Dihedral(q + 1)], [Cyclic(q + 1)])),
        FamilyInstance("7.1.dihedral-borel", _params(q=q),
                       chain(p, [Dihedral(q - 1), Borel(n, q - 1)], [Cyclic(q - 1)])),
    ]
    if q == 4:
        out.append(FamilyInstance("7.1.d3-b21", (), chain(2, [PGL2(2), Borel(2, 1)], [Cyclic(2)])))
    return q * (q - 1) // 2, out


def _tame_ok(g: GroupSpec, p: int) -> bool:
    try:
        return order(g, p) % p != 0
    except NotEmbeddable:
        return False


def tame_orbifold_tuples(p: int, lmax: int = 6) -> list[tuple[FamilyInstance, tuple[int, ...]]]:
    """Tame groups with four branch points and their ramification index tuples."""
    out: list[tuple[FamilyInstance, tuple[int, ...]]] = []
    seen: set[str] = set()
    for l in range(2, lmax + 1):
        for m in range(l, lmax + 1):
            if l % p and m % p:
                t = free_product(p, Cyclic(l), Cyclic(m))
                out.append((FamilyInstance("9.1.free", _params(l=l, m=m), t), (l, l, m, m)))
    tame = [Dihedral(l) for l in range(2, lmax + 1)] + [A4, S4, A5]
    tame = [g for g in tame if _tame_ok(g, p)]
    for i, g1 in enumerate(tame):
        for g2 in tame[i:]:
            common = sorted({s for _, s in branch_slots(g1, p)} & {s for _, s in branch_slots(g2, p)},
                            key=lambda s: order(s, p))
            for e in common:
                t = chain(p, [g1, g2], [e])
                if validate(t):
                    continue
                key = tree_key(t)
                if key in seen:
                    continue
                seen.add(key)
                idx = ramification(t).indices
                out.append((FamilyInstance("9.1.amalgam", (), t), idx))
    return out
