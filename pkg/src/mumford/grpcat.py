"""Finite subgroups of PGL2 in characteristic p: symbolic specs, orders, branch data,
concrete matrix realizations, and generic finite-group machinery."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Callable, Hashable, Iterable, Sequence

from .ff import Field, canon_flat, embed, field_make, is_prime

DEFAULT_BUDGET = 2_000_000

__all__ = [
    "GroupSpec",
    "Cyclic",
    "Dihedral",
    "Borel",
    "PGL2",
    "PSL2",
    "A4",
    "S4",
    "A5",
    "Trivial",
    "BranchDatum",
    "NotEmbeddable",
    "NonHomomorphism",
    "embedded_form",
    "order",
    "branch_slots",
    "branch_data",
    "branch_count_vertex",
    "minimal_field_exponent",
    "aliases",
    "spec_from_json",
    "spec_to_json",
    "GroupOps",
    "PGL2Ops",
    "DirectProductOps",
    "PermOps",
    "DihedralOps",
    "CyclicOps",
    "ConcreteGroup",
    "closure",
    "extend_hom",
    "concrete",
    "pgl2_elements",
]


class NotEmbeddable(ValueError):
    """The group has no embedding into PGL2 over the requested characteristic or field."""


class NonHomomorphism(ValueError):
    """A generator assignment does not extend to a homomorphism; ``witness`` explains where."""

    def __init__(self, msg: str, witness: Any = None):
        super().__init__(msg)
        self.witness = witness


# ---------------------------------------------------------------------------
# symbolic specs


@dataclass(frozen=True, order=True)
class GroupSpec:
    """A finite group family with parameters.

    family: "Cyclic"(m), "Dihedral"(l), "Borel"(n, m), "PGL2"(q), "PSL2"(q), "A4", "S4", "A5".
    """

    family: str
    params: tuple[int, ...] = ()

    def __post_init__(self):
        fam, pr = self.family, self.params
        arity = {"Cyclic": 1, "Dihedral": 1, "Borel": 2, "PGL2": 1, "PSL2": 1, "A4": 0, "S4": 0, "A5": 0}
        if fam not in arity:
            raise ValueError(f"unknown family {fam!r}")
        if len(pr) != arity[fam] or any(not isinstance(x, int) for x in pr):
            raise ValueError(f"{fam} expects {arity[fam]} integer parameter(s), got {pr}")
        if fam == "Cyclic" and pr[0] < 1:
            raise ValueError("Cyclic(m) needs m >= 1")
        if fam == "Dihedral" and pr[0] < 2:
            raise ValueError("Dihedral(l) needs l >= 2")
        if fam == "Borel" and (pr[0] < 0 or pr[1] < 1):
            raise ValueError("Borel(n, m) needs n >= 0, m >= 1")
        if fam == "Borel" and pr[0] == 0:
            # Borel(0, m) is the cyclic group C_m
            object.__setattr__(self, "family", "Cyclic")
            object.__setattr__(self, "params", (pr[1],))
        if fam in ("PGL2", "PSL2"):
            q = pr[0]
            if q < 2:
                raise ValueError("q must be a prime power >= 2")

    def __str__(self) -> str:
        if not self.params:
            return self.family
        return f"{self.family}({','.join(map(str, self.params))})"

    __repr__ = __str__


def Cyclic(m: int) -> GroupSpec:
    return GroupSpec("Cyclic", (m,))


def Dihedral(l: int) -> GroupSpec:
    return GroupSpec("Dihedral", (l,))


def Borel(n: int, m: int) -> GroupSpec:
    return GroupSpec("Borel", (n, m))


def PGL2(q: int) -> GroupSpec:
    return GroupSpec("PGL2", (q,))


def PSL2(q: int) -> GroupSpec:
    return GroupSpec("PSL2", (q,))


A4 = GroupSpec("A4")
S4 = GroupSpec("S4")
A5 = GroupSpec("A5")
Trivial = GroupSpec("Cyclic", (1,))


def spec_to_json(spec: GroupSpec) -> dict:
    f, pr = spec.family, spec.params
    if f == "Cyclic":
        return {"family": f, "m": pr[0]}
    if f == "Dihedral":
        return {"family": f, "l": pr[0]}
    if f == "Borel":
        return {"family": f, "n": pr[0], "m": pr[1]}
    if f in ("PGL2", "PSL2"):
        return {"family": f, "q": pr[0]}
    return {"family": f}


def spec_from_json(d: dict) -> GroupSpec:
    f = d.get("family")
    keys = {"Cyclic": ("m",), "Dihedral": ("l",), "Borel": ("n", "m"), "PGL2": ("q",), "PSL2": ("q",),
            "A4": (), "S4": (), "A5": ()}
    if f not in keys:
        raise ValueError(f"unknown family {f!r}")
    extra = set(d) - {"family", *keys[f]}
    if extra:
        raise ValueError(f"unexpected keys {sorted(extra)} for {f}")
    try:
        return GroupSpec(f, tuple(int(d[k]) for k in keys[f]))
    except KeyError as exc:
        raise ValueError(f"missing key {exc} for {f}") from None


# ---------------------------------------------------------------------------
# embedded forms: the isomorphism type of a spec as a subgroup of PGL2 in characteristic p
#
# ("trivial",) ("cyclic", m) tame with m > 1; ("borel", n, m) with n >= 1;
# ("pgl", q); ("psl", q) for odd q; ("dihedral2", l) for p = 2 and odd l;
# ("tdihedral", l) tame; ("a5mod3",); ("ta4",); ("ts4",); ("ta5",)


def _ppower(q: int, p: int) -> int | None:
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    return k if r == 1 and k >= 1 else None


def _mult_order(p: int, m: int) -> int:
    if m == 1:
        return 1
    r, x = 1, p % m
    while x != 1:
        x = x * p % m
        r += 1
    return r


def embedded_form(spec: GroupSpec, p: int) -> tuple:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    f, pr = spec.family, spec.params
    if f == "Cyclic":
        m = pr[0]
        if m == 1:
            return ("trivial",)
        if m % p:
            return ("cyclic", m)
        if m == p:
            return ("borel", 1, 1)
        raise NotEmbeddable(f"C_{m} does not embed in PGL2 in characteristic {p}")
    if f == "Borel":
        n, m = pr
        if m % p == 0:
            raise NotEmbeddable(f"B({n},{m}): p divides m")
        if m > 1 and (p**n - 1) % m:
            raise NotEmbeddable(f"B({n},{m}): m does not divide p^n - 1 for p={p}")
        return ("borel", n, m)
    if f == "Dihedral":
        l = pr[0]
        if p == 2:
            if l == 2:
                return ("borel", 2, 1)
            if l % 2:
                return ("dihedral2", l)
            raise NotEmbeddable(f"D_{l} does not embed in PGL2 in characteristic 2")
        if l % p == 0:
            if l == p:
                return ("borel", 1, 2)
            raise NotEmbeddable(f"D_{l} does not embed in PGL2 in characteristic {p}")
        return ("tdihedral", l)
    if f in ("PGL2", "PSL2"):
        q = pr[0]
        if _ppower(q, p) is None:
            raise NotEmbeddable(f"{spec}: q is not a power of p={p}")
        if q == 2:
            return ("dihedral2", 3)
        if f == "PSL2" and p != 2:
            return ("psl", q)
        return ("pgl", q)
    if f == "A4":
        if p == 2:
            return ("borel", 2, 3)
        if p == 3:
            return ("psl", 3)
        return ("ta4",)
    if f == "S4":
        if p == 2:
            raise NotEmbeddable("S4 does not embed in PGL2 in characteristic 2")
        if p == 3:
            return ("pgl", 3)
        return ("ts4",)
    if f == "A5":
        if p == 2:
            return ("pgl", 4)
        if p == 3:
            return ("a5mod3",)
        if p == 5:
            return ("psl", 5)
        return ("ta5",)
    raise ValueError(f"unknown family {f}")  # pragma: no cover


def form_order(form: tuple, p: int) -> int:
    kind = form[0]
    if kind == "trivial":
        return 1
    if kind == "cyclic":
        return form[1]
    if kind == "borel":
        return form[2] * p ** form[1]
    if kind == "pgl":
        q = form[1]
        return q**3 - q
    if kind == "psl":
        q = form[1]
        return (q**3 - q) // gcd(2, q - 1)
    if kind in ("dihedral2", "tdihedral"):
        return 2 * form[1]
    return {"a5mod3": 60, "ta4": 12, "ts4": 24, "ta5": 60}[kind]


def order(spec: GroupSpec, p: int) -> int:
    """|G| for a spec valid in characteristic p."""
    return form_order(embedded_form(spec, p), p)


def form_slots(form: tuple, p: int) -> list[tuple[str, tuple]]:
    """Branch slots (tag, branch-group form) of a finite subgroup of PGL2."""
    kind = form[0]
    cyc = lambda m: ("cyclic", m) if m > 1 else ("trivial",)  # noqa: E731
    if kind == "trivial":
        return []
    if kind == "cyclic":
        return [("axis-a", form), ("axis-b", form)]
    if kind == "borel":
        n, m = form[1], form[2]
        if m == 1:
            return [("borel", form)]
        return [("torus", ("cyclic", m)), ("borel", form)]
    if kind == "pgl":
        q = form[1]
        k = _ppower(q, p)
        return [("borel", ("borel", k, q - 1)), ("cyclic", cyc(q + 1))]
    if kind == "psl":
        q = form[1]
        k = _ppower(q, p)
        return [("borel", ("borel", k, (q - 1) // 2)), ("cyclic", cyc((q + 1) // 2))]
    if kind == "dihedral2":
        return [("c2", ("borel", 1, 1)), ("rot", ("cyclic", form[1]))]
    if kind == "tdihedral":
        return [("c2-a", ("cyclic", 2)), ("c2-b", ("cyclic", 2)), ("rot", ("cyclic", form[1]))]
    if kind == "a5mod3":
        return [("c5", ("cyclic", 5)), ("borel", ("borel", 1, 2))]
    if kind == "ta4":
        return [("c2", ("cyclic", 2)), ("c3-a", ("cyclic", 3)), ("c3-b", ("cyclic", 3))]
    if kind == "ts4":
        return [("c2", ("cyclic", 2)), ("c3", ("cyclic", 3)), ("c4", ("cyclic", 4))]
    if kind == "ta5":
        return [("c2", ("cyclic", 2)), ("c3", ("cyclic", 3)), ("c5", ("cyclic", 5))]
    raise ValueError(kind)  # pragma: no cover


def form_to_spec(form: tuple, p: int) -> GroupSpec:
    kind = form[0]
    if kind == "trivial":
        return Trivial
    if kind == "cyclic":
        return Cyclic(form[1])
    if kind == "borel":
        if form[1:] == (1, 1):
            return Cyclic(p)
        return Borel(form[1], form[2])
    if kind == "pgl":
        return PGL2(form[1])
    if kind == "psl":
        return PSL2(form[1])
    if kind in ("dihedral2", "tdihedral"):
        return Dihedral(form[1])
    return {"a5mod3": A5, "ta4": A4, "ts4": S4, "ta5": A5}[kind]


def branch_slots(spec: GroupSpec, p: int) -> list[tuple[str, GroupSpec]]:
    """(tag, branch group) for each branch point of P^1 -> P^1/G."""
    form = embedded_form(spec, p)
    return [(tag, form_to_spec(f, p)) for tag, f in form_slots(form, p)]


@dataclass(frozen=True)
class BranchDatum:
    group: GroupSpec
    count: int


def branch_data(spec: GroupSpec, p: int) -> list[BranchDatum]:
    """Multiset of branch groups of G, aggregated by isomorphism type of the embedded form."""
    counts: dict[tuple, int] = {}
    for _tag, f in form_slots(embedded_form(spec, p), p):
        counts[f] = counts.get(f, 0) + 1
    return [BranchDatum(form_to_spec(f, p), c) for f, c in counts.items()]


def branch_count_vertex(spec: GroupSpec, p: int) -> int:
    return len(form_slots(embedded_form(spec, p), p))


def _least_s_pm(l: int, p: int) -> int:
    s = 1
    while True:
        if (p**s - 1) % l == 0 or (p**s + 1) % l == 0:
            return s
        s += 1
        if s > 64:  # pragma: no cover
            raise NotEmbeddable(f"no s found for l={l}")


def form_min_exponent(form: tuple, p: int) -> int:
    kind = form[0]
    if kind == "trivial":
        return 1
    if kind in ("cyclic", "dihedral2", "tdihedral"):
        return _least_s_pm(form[1], p)
    if kind == "borel":
        n, m = form[1], form[2]
        r = _mult_order(p, m)
        if n % r:
            raise NotEmbeddable(f"B({n},{m}): ord_{m}({p})={r} does not divide {n}")
        return n
    if kind in ("pgl", "psl"):
        return _ppower(form[1], p)
    if kind == "a5mod3":
        return 2
    if kind in ("ta4", "ts4"):
        return 1
    if kind == "ta5":
        return 1 if p % 5 in (1, 4) else 2
    raise ValueError(kind)  # pragma: no cover


def minimal_field_exponent(spec: GroupSpec, p: int) -> int:
    """Least s with spec embedded in PGL2(F_{p^s})."""
    return form_min_exponent(embedded_form(spec, p), p)


def form_embeds_in(form: tuple, p: int, s: int) -> bool:
    """Whether the embedded form lies in PGL2(F_{p^s})."""
    kind = form[0]
    if kind == "trivial":
        return True
    if kind in ("cyclic", "dihedral2", "tdihedral"):
        l = form[1]
        return (p**s - 1) % l == 0 or (p**s + 1) % l == 0
    if kind == "borel":
        n, m = form[1], form[2]
        r = _mult_order(p, m)
        return n % r == 0 and s % r == 0 and n <= s
    if kind in ("pgl", "psl"):
        return s % _ppower(form[1], p) == 0
    if kind == "a5mod3":
        return s % 2 == 0
    if kind in ("ta4", "ts4"):
        return True
    if kind == "ta5":
        return (p**s - 1) % 5 == 0 or (p**s + 1) % 5 == 0
    raise ValueError(kind)  # pragma: no cover


_ALIASES = [
    {("PSL2", (3,)), ("A4", ())},
    {("PGL2", (2,)), ("PSL2", (2,)), ("Dihedral", (3,))},
    {("PGL2", (3,)), ("S4", ())},
    {("PGL2", (4,)), ("PSL2", (4,)), ("A5", ()), ("PSL2", (5,))},
    {("Dihedral", (2,)), ("Borel", (2, 1))},
    {("Borel", (1, 2)), ("Dihedral", (3,))},
]


def aliases(spec: GroupSpec) -> list[GroupSpec]:
    """Specs isomorphic to ``spec`` as abstract groups (equality of specs stays structural)."""
    key = (spec.family, spec.params)
    out = set()
    for cls in _ALIASES:
        if key in cls:
            out |= cls
    out.discard(key)
    return sorted(GroupSpec(f, pr) for f, pr in out)


# ---------------------------------------------------------------------------
# generic finite groups


class GroupOps:
    """Element arithmetic for a family of hashable canonical elements."""

    identity: Hashable

    def mul(self, x, y):  # pragma: no cover - interface
        raise NotImplementedError

    def inv(self, x):
        # generic fallback via powers
        y, prev = x, self.identity
        while y != self.identity:
            prev = y
            y = self.mul(y, x)
        return prev

    def pow(self, x, k: int):
        if k < 0:
            x, k = self.inv(x), -k
        r = self.identity
        while k:
            if k & 1:
                r = self.mul(r, x)
            x = self.mul(x, x)
            k >>= 1
        return r

    def elem_order(self, x, limit: int = 10**7) -> int:
        y, k = x, 1
        while y != self.identity:
            y = self.mul(y, x)
            k += 1
            if k > limit:
                raise ValueError("element order exceeds limit")
        return k


class PGL2Ops(GroupOps):
    """PGL2 over a field; elements are canonical flat 4-tuples."""

    def __init__(self, F: Field):
        self.F = F
        self.identity = (1, 0, 0, 1)

    def canon(self, a, b, c, d):
        F = self.F
        lead = a if a else b
        if lead == 1:
            return (a, b, c, d)
        inv = F.inv(lead)
        m = F.mul
        return (m(a, inv), m(b, inv), m(c, inv), m(d, inv))

    def mul(self, x, y):
        F = self.F
        m, ad = F.mul, F.add
        a, b, c, d = x
        e, f, g, h = y
        return self.canon(ad(m(a, e), m(b, g)), ad(m(a, f), m(b, h)), ad(m(c, e), m(d, g)), ad(m(c, f), m(d, h)))

    def inv(self, x):
        F = self.F
        a, b, c, d = x
        return self.canon(d, F.neg(b), F.neg(c), a)

    def make(self, entries) -> tuple:
        flat = [x for row in entries for x in row] if isinstance(entries[0], (list, tuple)) else list(entries)
        flat = [self.F.from_int(v) if v < 0 else v for v in flat]
        if self.det(flat) == 0:
            raise ValueError("singular matrix")
        return self.canon(*flat)

    def det(self, x) -> int:
        F = self.F
        return F.sub(F.mul(x[0], x[3]), F.mul(x[1], x[2]))

    def diag(self, a: int, d: int = 1):
        return self.canon(a, 0, 0, d)

    def translation(self, b: int):
        return (1, b, 0, 1)

    def trace_ratio(self, x) -> int | None:
        """tr^2/det, a conjugacy invariant in PGL2."""
        F = self.F
        t = F.add(x[0], x[3])
        return F.div(F.mul(t, t), self.det(x))

    def act(self, x, pt):
        """Action on P^1 points, encoded as field elements or the string 'inf'."""
        F = self.F
        a, b, c, d = x
        if pt == "inf":
            return "inf" if c == 0 else F.div(a, c)
        num = F.add(F.mul(a, pt), b)
        den = F.add(F.mul(c, pt), d)
        return "inf" if den == 0 else F.div(num, den)


class DirectProductOps(GroupOps):
    def __init__(self, factors: Sequence[GroupOps]):
        self.factors = list(factors)
        self.identity = tuple(f.identity for f in self.factors)

    def mul(self, x, y):
        return tuple(f.mul(a, b) for f, a, b in zip(self.factors, x, y))

    def inv(self, x):
        return tuple(f.inv(a) for f, a in zip(self.factors, x))


class PermOps(GroupOps):
    """Permutations of range(n) as tuples; (x*y)(i) = x(y(i)) (apply y first)."""

    def __init__(self, n: int):
        self.n = n
        self.identity = tuple(range(n))

    def mul(self, x, y):
        return tuple(x[i] for i in y)

    def inv(self, x):
        out = [0] * self.n
        for i, xi in enumerate(x):
            out[xi] = i
        return tuple(out)

    def cycle(self, *cycles: Sequence[int]):
        img = list(range(self.n))
        for cyc in cycles:
            for i, a in enumerate(cyc):
                img[a] = cyc[(i + 1) % len(cyc)]
        return tuple(img)


class DihedralOps(GroupOps):
    """Abstract dihedral group of order 2l: (k, f) = r^k s^f with s r s = r^-1."""

    def __init__(self, l: int):
        self.l = l
        self.identity = (0, 0)

    def mul(self, x, y):
        k1, f1 = x
        k2, f2 = y
        return ((k1 + (-k2 if f1 else k2)) % self.l, f1 ^ f2)

    def inv(self, x):
        k, f = x
        return (k, 1) if f else ((-k) % self.l, 0)


class CyclicOps(GroupOps):
    def __init__(self, m: int):
        self.m = m
        self.identity = 0

    def mul(self, x, y):
        return (x + y) % self.m

    def inv(self, x):
        return (-x) % self.m


class VectorOps(GroupOps):
    """Elementary abelian group F_p^n as tuples."""

    def __init__(self, p: int, n: int):
        self.p, self.n = p, n
        self.identity = (0,) * n

    def mul(self, x, y):
        return tuple((a + b) % self.p for a, b in zip(x, y))

    def inv(self, x):
        return tuple((-a) % self.p for a in x)


def closure(ops: GroupOps, gens: Iterable, budget: int = DEFAULT_BUDGET) -> list:
    """All elements generated by ``gens`` (breadth-first right multiplication)."""
    gens = [g for g in gens if g != ops.identity]
    seen = {ops.identity}
    out = [ops.identity]
    queue = deque(out)
    while queue:
        x = queue.popleft()
        for g in gens:
            y = ops.mul(x, g)
            if y not in seen:
                seen.add(y)
                out.append(y)
                if len(out) > budget:
                    raise MemoryError(f"group order exceeds element budget {budget}")
                queue.append(y)
    return out


def extend_hom(src_ops: GroupOps, src_gens: Sequence, dst_ops: GroupOps, images: Sequence,
               budget: int = DEFAULT_BUDGET) -> dict:
    """Extend a generator assignment to a homomorphism on <src_gens>, or raise NonHomomorphism.

    Walks the Cayley graph of the source; a consistent walk is a homomorphism because the map
    commutes with right multiplication by every generator.
    """
    if len(src_gens) != len(images):
        raise ValueError("generator and image lists differ in length")
    phi = {src_ops.identity: dst_ops.identity}
    queue = deque([src_ops.identity])
    while queue:
        x = queue.popleft()
        hx = phi[x]
        for g, h in zip(src_gens, images):
            y = src_ops.mul(x, g)
            hy = dst_ops.mul(hx, h)
            old = phi.get(y)
            if old is None:
                phi[y] = hy
                if len(phi) > budget:
                    raise MemoryError("element budget exceeded")
                queue.append(y)
            elif old != hy:
                raise NonHomomorphism("generator assignment is inconsistent", witness=(x, g, old, hy))
    return phi


def try_extend_hom(src_ops, src_gens, dst_ops, images, src_order: int | None = None) -> dict | None:
    try:
        return extend_hom(src_ops, src_gens, dst_ops, images, budget=src_order or DEFAULT_BUDGET)
    except NonHomomorphism:
        return None


@dataclass
class ConcreteGroup:
    """An explicit finite group: element arithmetic plus a generating set."""

    ops: GroupOps
    gens: list
    name: str = ""
    budget: int = DEFAULT_BUDGET
    _elements: list | None = field(default=None, repr=False)
    _set: frozenset | None = field(default=None, repr=False)

    @property
    def elements(self) -> list:
        if self._elements is None:
            self._elements = closure(self.ops, self.gens, self.budget)
        return self._elements

    @property
    def element_set(self) -> frozenset:
        if self._set is None:
            self._set = frozenset(self.elements)
        return self._set

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def identity(self):
        return self.ops.identity

    def mul(self, x, y):
        return self.ops.mul(x, y)

    def inv(self, x):
        return self.ops.inv(x)

    def __contains__(self, x) -> bool:
        return x in self.element_set

    def elem_order(self, x) -> int:
        return self.ops.elem_order(x)

    def generated_subgroup(self, gens: Iterable, name: str = "") -> "ConcreteGroup":
        gens = list(gens)
        for g in gens:
            if g not in self:
                raise ValueError(f"generator {g} not in group")
        return ConcreteGroup(self.ops, gens, name=name, budget=self.budget)

    def left_cosets(self, sub: "ConcreteGroup") -> list[tuple]:
        """Left cosets gH as sorted tuples, in sorted order of their least element."""
        seen: set = set()
        out = []
        for g in sorted(self.elements):
            if g in seen:
                continue
            coset = tuple(sorted(self.ops.mul(g, h) for h in sub.elements))
            seen.update(coset)
            out.append(coset)
        out.sort(key=lambda c: c[0])
        return out

    def hom_to(self, dst_ops: GroupOps, images: Sequence) -> dict:
        return extend_hom(self.ops, self.gens, dst_ops, images, budget=self.order)

    def is_injective_hom(self, dst_ops: GroupOps, images: Sequence) -> bool:
        phi = self.hom_to(dst_ops, images)
        return len(set(phi.values())) == len(phi)

    def image(self, dst_ops: GroupOps, images: Sequence) -> "ConcreteGroup":
        self.hom_to(dst_ops, images)
        return ConcreteGroup(dst_ops, list(images), budget=self.budget)

    def elements_of_order(self, k: int) -> list:
        return [x for x in self.elements if self.ops.elem_order(x) == k]


# ---------------------------------------------------------------------------
# concrete realizations inside PGL2(target)


def pgl2_elements(ops: PGL2Ops, sub: Sequence[int] | None = None) -> list[tuple]:
    """Canonical elements of PGL2 with entries in ``sub`` (default: the whole field)."""
    F = ops.F
    vals = list(sub) if sub is not None else list(range(F.q))
    nz = [v for v in vals if v]
    out = []
    for b in vals:
        for c in vals:
            for d in vals:
                if F.sub(d, F.mul(b, c)):
                    out.append((1, b, c, d))
    for c in nz:
        for d in vals:
            out.append((0, 1, c, d))
    out.sort()
    return out


def _find_cyclic(ops: PGL2Ops, m: int, sub: Sequence[int] | None = None):
    """An element of exact order m; split torus when possible, else a companion matrix."""
    F = ops.F
    vals = list(sub) if sub is not None else list(range(F.q))
    if m == 1:
        return ops.identity
    qq = len(vals)
    if (qq - 1) % m == 0:
        z = F.exp((F.q - 1) // m)
        return ops.diag(z)
    for b in vals:
        for c in vals:
            if c == 0:
                continue
            x = ops.make((0, F.neg(c), 1, F.neg(b)))
            if ops.elem_order(x) == m:
                return x
    raise NotEmbeddable(f"no element of order {m} in PGL2(F_{qq})")


def _find_inverting_involution(ops: PGL2Ops, r, candidates: Iterable):
    rinv = ops.inv(r)
    for s in candidates:
        if s == ops.identity:
            continue
        if ops.mul(s, s) != ops.identity:
            continue
        if ops.mul(ops.mul(s, r), s) == rinv:
            return s
    raise NotEmbeddable("no involution inverting the rotation")


def _find_polyhedral(ops: PGL2Ops, target_order: int, k: int, candidates: list):
    """A pair (a, b) with a^2 = b^3 = (ab)^k = 1 generating a group of the given order."""
    invol = [x for x in candidates if x != ops.identity and ops.mul(x, x) == ops.identity]
    order3 = [x for x in candidates if x != ops.identity and ops.elem_order(x) == 3]
    for a in invol:
        for b in order3:
            ab = ops.mul(a, b)
            if ops.elem_order(ab) != k:
                continue
            if len(closure(ops, [a, b], budget=target_order)) == target_order:
                return a, b
    raise NotEmbeddable("polyhedral generators not found")


def concrete(spec: GroupSpec, target: Field, budget: int = DEFAULT_BUDGET) -> ConcreteGroup:
    """An explicit copy of spec inside PGL2(target)."""
    p, s = target.p, target.s
    form = embedded_form(spec, p)
    if not form_embeds_in(form, p, s):
        raise NotEmbeddable(f"{spec} does not embed in PGL2(F_{target.q})")
    ops = PGL2Ops(target)
    expected = form_order(form, p)
    if expected > budget:
        raise MemoryError(f"group order {expected} exceeds element budget {budget}")
    kind = form[0]
    F = target
    if kind == "trivial":
        gens: list = []
    elif kind == "cyclic":
        gens = [_find_cyclic(ops, form[1])]
    elif kind == "borel":
        n, m = form[1], form[2]
        r = _mult_order(p, m)
        gens = []
        if m > 1:
            gens.append(ops.diag(F.exp((F.q - 1) // m)))
        x = F.x() if s > 1 else 1
        xs = [1]
        for _ in range(n // r - 1):
            xs.append(F.mul(xs[-1], x))
        if m == 1 and r == 1:
            pass
        gens += [ops.translation(b) for b in xs]
    elif kind in ("pgl", "psl"):
        q = form[1]
        k = _ppower(q, p)
        sub = [embed(field_make(p, k), F, a) for a in range(q)]
        if k == s:
            sub = list(range(F.q))
        elems = pgl2_elements(ops, sub)
        if kind == "psl":
            small = field_make(p, k)
            back = {embed(small, F, a): a for a in range(q)}
            elems = [g for g in elems if small.is_square(back[ops.det(g)])]
        grp = ConcreteGroup(ops, [], name=str(spec), budget=budget)
        grp._elements = elems
        grp.gens = _small_generating_set(ops, elems)
        return grp
    elif kind in ("dihedral2", "tdihedral"):
        l = form[1]
        r = _find_cyclic(ops, l)
        if r[1] == 0 and r[2] == 0:
            sw = (0, 1, 1, 0)
            if ops.mul(ops.mul(sw, r), sw) == ops.inv(r):
                gens = [r, sw]
            else:  # pragma: no cover
                gens = [r, _find_inverting_involution(ops, r, pgl2_elements(ops))]
        else:
            gens = [r, _find_inverting_involution(ops, r, pgl2_elements(ops))]
    elif kind in ("a5mod3", "ta4", "ts4", "ta5"):
        k = {"a5mod3": 5, "ta4": 3, "ts4": 4, "ta5": 5}[kind]
        gens = list(_find_polyhedral(ops, expected, k, pgl2_elements(ops)))
    else:  # pragma: no cover
        raise ValueError(kind)
    grp = ConcreteGroup(ops, gens, name=str(spec), budget=budget)
    if grp.order != expected:
        raise AssertionError(f"realization of {spec} has order {grp.order}, expected {expected}")
    return grp


def _small_generating_set(ops: GroupOps, elems: list) -> list:
    """Greedy generating set: add the first element not yet generated until closure is everything."""
    target = len(elems)
    gens: list = []
    current = {ops.identity}
    for x in elems:
        if x in current:
            continue
        gens.append(x)
        current = set(closure(ops, gens, budget=target))
        if len(current) == target:
            break
    # try to shrink to two generators by scanning pairs with the first generator
    if len(gens) > 2:
        for y in elems:
            if len(closure(ops, [gens[0], y], budget=target)) == target:
                return [gens[0], y]
    return gens
