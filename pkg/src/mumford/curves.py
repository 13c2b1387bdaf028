"""Plane curves over finite fields: the nodal models with PGL2 symmetry, exhaustive singular-point
scans over extension fields, node classification, Pluecker genus and invariance checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .ff import Field, ProjMat3, embed, field_make, mat_det, prime_power

__all__ = [
    "HomogPoly3",
    "PlanePoint",
    "SingularPoint",
    "CurveReport",
    "BudgetExceeded",
    "NonNodal",
    "FAMILIES",
    "build_curve",
    "least_nonsquare",
    "epsilon",
    "singular_points",
    "is_node",
    "genus_report",
    "pgl2_action",
    "invariance_check",
    "act_on_point",
    "orbit",
    "random_lambda",
    "DEFAULT_SCAN_BUDGET",
]

DEFAULT_SCAN_BUDGET = 5_000_000

Exp = tuple[int, int, int]


class BudgetExceeded(RuntimeError):
    pass


class NonNodal(ValueError):
    """A singular point whose quadratic part is degenerate."""


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class HomogPoly3:
    """A homogeneous polynomial in three variables; coefficients are ints of ``field``."""

    field: Field
    degree: int
    coeffs: tuple[tuple[Exp, int], ...]  # sorted, nonzero

    @staticmethod
    def make(F: Field, terms: dict[Exp, int], degree: int | None = None) -> "HomogPoly3":
        clean = {e: c for e, c in terms.items() if c}
        degs = {sum(e) for e in clean}
        if len(degs) > 1:
            raise ValueError(f"not homogeneous: degrees {sorted(degs)}")
        d = degs.pop() if degs else (degree or 0)
        if degree is not None and clean and d != degree:
            raise ValueError(f"declared degree {degree} but terms have degree {d}")
        return HomogPoly3(F, d, tuple(sorted(clean.items())))

    def terms(self) -> dict[Exp, int]:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    # arithmetic
    def __add__(self, other: "HomogPoly3") -> "HomogPoly3":
        F = self.field
        out = self.terms()
        for e, c in other.coeffs:
            out[e] = F.add(out.get(e, 0), c)
        return HomogPoly3.make(F, out, self.degree)

    def __neg__(self) -> "HomogPoly3":
        F = self.field
        return HomogPoly3(F, self.degree, tuple((e, F.neg(c)) for e, c in self.coeffs))

    def __sub__(self, other: "HomogPoly3") -> "HomogPoly3":
        return self + (-other)

    def __mul__(self, other: "HomogPoly3") -> "HomogPoly3":
        F = self.field
        out: dict[Exp, int] = {}
        for e1, c1 in self.coeffs:
            for e2, c2 in other.coeffs:
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                out[e] = F.add(out.get(e, 0), F.mul(c1, c2))
        return HomogPoly3.make(F, out, self.degree + other.degree)

    def scale(self, c: int) -> "HomogPoly3":
        F = self.field
        return HomogPoly3.make(F, {e: F.mul(c, a) for e, a in self.coeffs}, self.degree)

    def __pow__(self, k: int) -> "HomogPoly3":
        if k < 0:
            raise ValueError("negative power")
        result = HomogPoly3.make(self.field, {(0, 0, 0): 1}, 0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def over(self, E: Field) -> "HomogPoly3":
        """The same polynomial with coefficients embedded in the extension E."""
        if E == self.field:
            return self
        return HomogPoly3.make(E, {e: embed(self.field, E, c) for e, c in self.coeffs}, self.degree)

    def partial(self, i: int) -> "HomogPoly3":
        F = self.field
        out: dict[Exp, int] = {}
        for e, c in self.coeffs:
            if e[i] == 0:
                continue
            k = F.mul(F.from_int(e[i]), c)
            if k:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = k
        return HomogPoly3.make(F, out, max(self.degree - 1, 0))

    def hasse(self, alpha: Exp) -> "HomogPoly3":
        """Divided derivative: x^b -> binom(b, alpha) x^(b - alpha), exact in characteristic p."""
        F = self.field
        p = F.p
        out: dict[Exp, int] = {}
        for e, c in self.coeffs:
            if any(a > b for a, b in zip(alpha, e)):
                continue
            k = 1
            for a, b in zip(alpha, e):
                k = k * _binom_mod(b, a, p) % p
            if k:
                e2 = tuple(b - a for a, b in zip(alpha, e))
                out[e2] = F.add(out.get(e2, 0), F.mul(F.from_int(k), c))
        return HomogPoly3.make(F, out, max(self.degree - sum(alpha), 0))

    def __call__(self, x: Sequence[int]) -> int:
        F = self.field
        acc = 0
        for (i, j, k), c in self.coeffs:
            acc = F.add(acc, F.mul(c, F.mul(F.pow(x[0], i), F.mul(F.pow(x[1], j), F.pow(x[2], k)))))
        return acc

    def substitute(self, A: Sequence[int]) -> "HomogPoly3":
        """F(A x) for a 3x3 matrix A (row-major, entries in the coefficient field)."""
        F = self.field
        lin = [HomogPoly3.make(F, {(1, 0, 0): A[3 * r], (0, 1, 0): A[3 * r + 1], (0, 0, 1): A[3 * r + 2]}, 1)
               for r in range(3)]
        powers = [[HomogPoly3.make(F, {(0, 0, 0): 1}, 0)] for _ in range(3)]
        for r in range(3):
            for _ in range(self.degree):
                powers[r].append(powers[r][-1] * lin[r])
        out = HomogPoly3.make(F, {}, self.degree)
        for (i, j, k), c in self.coeffs:
            out = out + (powers[0][i] * powers[1][j] * powers[2][k]).scale(c)
        return out

    def to_json(self) -> dict:
        return {
            "field": {"p": self.field.p, "s": self.field.s},
            "degree": self.degree,
            "coeffs": [{"e": list(e), "c": str(c)} for e, c in self.coeffs],
        }

    @staticmethod
    def from_json(d: dict) -> "HomogPoly3":
        try:
            F = field_make(int(d["field"]["p"]), int(d["field"].get("s", 1)))
            terms = {}
            for t in d["coeffs"]:
                e = tuple(int(x) for x in t["e"])
                if len(e) != 3:
                    raise ValueError("exponent triples need three entries")
                c = int(t["c"])
                if not 0 <= c < F.q:
                    raise ValueError(f"coefficient {c} outside the field")
                terms[e] = F.add(terms.get(e, 0), c)
            return HomogPoly3.make(F, terms, int(d["degree"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed curve JSON: {exc}") from None


def _binom_mod(n: int, k: int, p: int) -> int:
    """binom(n, k) mod p by digits."""
    r = 1
    while n or k:
        a, b = n % p, k % p
        if b > a:
            return 0
        r = r * comb(a, b) % p
        n //= p
        k //= p
    return r


def _var(F: Field, i: int) -> HomogPoly3:
    e = [0, 0, 0]
    e[i] = 1
    return HomogPoly3.make(F, {tuple(e): 1}, 1)


def _const(F: Field, c: int) -> HomogPoly3:
    return HomogPoly3.make(F, {(0, 0, 0): c}, 0)


def _lin(F: Field, a: int, b: int, c: int) -> HomogPoly3:
    return HomogPoly3.make(F, {(1, 0, 0): a, (0, 1, 0): b, (0, 0, 1): c}, 1)


# ---------------------------------------------------------------------------
# families


def least_nonsquare(F: Field) -> int:
    for a in range(1, F.q):
        if not F.is_square(a):
            return a
    raise ValueError("every element is a square in characteristic 2")


def epsilon(F: Field, w: int) -> int:
    """1 when q = 3 mod 4, else w."""
    return 1 if F.q % 4 == 3 else w


def _odd_field(q: int) -> Field:
    p, s = prime_power(q)
    if p == 2:
        raise ValueError("this family needs odd q")
    return field_make(p, s)


def _even_field(q: int) -> Field:
    p, s = prime_power(q)
    if p != 2:
        raise ValueError("this family needs q a power of 2")
    return field_make(2, s)


def _check_w(F: Field, w: int | None) -> int:
    if w is None:
        return least_nonsquare(F)
    if not 0 < w < F.q or F.is_square(w):
        raise ValueError(f"w={w} must be a non-square in F_{F.q}^*")
    return w


def _lambda_field(F: Field, lam: int, lam_s: int | None) -> tuple[Field, int]:
    """Coefficient field F_{q^k} containing lambda (given as an int of F_{p^{lam_s}})."""
    s = lam_s or F.s
    if s % F.s:
        raise ValueError("the field of lambda must contain the base field")
    E = field_make(F.p, s)
    if not 0 < lam < E.q:
        raise ValueError("lambda must be a nonzero element of its field")
    return E, lam


def _quadric_unitary(F: Field, w: int) -> HomogPoly3:
    q = F.q
    x = [_var(F, i) for i in range(3)]
    nw = F.neg(w)
    quad = x[0] ** 2 + x[1] ** 2 + (x[2] ** 2).scale(nw)
    herm = x[0] ** (q + 1) + x[1] ** (q + 1) + (x[2] ** (q + 1)).scale(nw)
    return quad ** ((q + 1) // 2) - herm


def _lines(F: Field) -> HomogPoly3:
    out = _var(F, 0)
    for a in range(F.q):
        out = out * _lin(F, F.mul(a, a), F.neg(a), 1)
    return out


def _bh_h(F: Field) -> HomogPoly3:
    q = F.q
    return HomogPoly3.make(F, {(1, 0, q): 1, (q, 0, 1): 1, (0, q + 1, 0): 1}, q + 1)


def _bh_t(F: Field) -> HomogPoly3:
    q, n = F.q, F.s
    terms: dict[Exp, int] = {}
    for i in range(n):
        k = 2**i
        e = (k, q + 1 - 2 * k, k)
        terms[e] = F.add(terms.get(e, 0), 1)
    return HomogPoly3.make(F, terms, q + 1)


def _conic_product(F: Field) -> HomogPoly3:
    out = _var(F, 2)
    for t in range(F.q):
        out = out * _lin(F, 1, t, F.mul(t, t))
    return out


def build_curve(family: str, q: int, w: int | None = None, lam: int | None = None,
                lam_s: int | None = None, eps: int | None = None) -> HomogPoly3:
    """The named plane curve of degree q+1 over F_q (over the field of lambda for deformations).

    lam is an int of F_{p^{lam_s}} (lam_s defaults to the exponent of q). eps overrides the
    coefficient of x3^2 in the deforming quadric (default: epsilon(F, w)).
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    needs_lam = family.endswith("-deformed") or family == "fukasawa"
    if needs_lam and lam is None:
        raise ValueError(f"{family} needs lambda")
    if family == "quadric-unitary":
        F = _odd_field(q)
        return _quadric_unitary(F, _check_w(F, w))
    if family == "quadric-unitary-deformed":
        F = _odd_field(q)
        w = _check_w(F, w)
        E, lam = _lambda_field(F, lam, lam_s)
        x = [_var(E, i) for i in range(3)]
        if eps is not None and not 0 < eps < F.q:
            raise ValueError("eps must be a nonzero element of F_q")
        eps = embed(F, E, epsilon(F, w) if eps is None else eps)
        quad = (x[0] ** 2 + x[1] ** 2 + (x[2] ** 2).scale(eps)) ** ((q + 1) // 2)
        return _quadric_unitary(F, w).over(E) + quad.scale(lam)
    if family == "lines":
        p, s = prime_power(q)
        return _lines(field_make(p, s))
    if family == "lines-deformed":
        F = _odd_field(q)
        E, lam = _lambda_field(F, lam, lam_s)
        z = [_var(E, i) for i in range(3)]
        conic = (z[1] ** 2 - z[0] * z[2]) ** ((q + 1) // 2)
        return _lines(F).over(E) + conic.scale(lam)
    if family == "bh-char2":
        F = _even_field(q)
        return _bh_h(F) - _bh_t(F)
    if family == "bh-char2-deformed":
        F = _even_field(q)
        E, lam = _lambda_field(F, lam, lam_s)
        return (_bh_h(F) - _bh_t(F)).over(E) + _bh_h(F).over(E).scale(lam)
    if family == "dual-lines-char2":
        return _conic_product(_even_field(q))
    if family == "dual-lines-char2-deformed":
        F = _even_field(q)
        E, lam = _lambda_field(F, lam, lam_s)
        return _conic_product(F).over(E) + _bh_h(F).over(E).scale(lam)
    if family == "fukasawa":
        F = _even_field(q)
        E, lam = _lambda_field(F, lam, lam_s) if lam else (F, 0)
        y = _var(E, 1)
        return _conic_product(F).over(E) + (y ** (q + 1)).scale(lam)
    raise AssertionError(family)  # pragma: no cover


FAMILIES = (
    "quadric-unitary",
    "quadric-unitary-deformed",
    "lines",
    "lines-deformed",
    "bh-char2",
    "bh-char2-deformed",
    "dual-lines-char2",
    "dual-lines-char2-deformed",
    "fukasawa",
)


def random_lambda(q: int, k: int, rng: random.Random) -> int:
    """A pseudorandom nonzero element of F_{q^k}, returned as an int of that field."""
    p, s = prime_power(q)
    E = field_make(p, s * k)
    return rng.randrange(1, E.q)


# ---------------------------------------------------------------------------
# points and scanning


@dataclass(frozen=True)
class PlanePoint:
    field: Field
    coords: tuple[int, int, int]

    @staticmethod
    def make(F: Field, coords: Sequence[int]) -> "PlanePoint":
        for c in coords:
            if c:
                inv = F.inv(c)
                return PlanePoint(F, tuple(F.mul(inv, x) for x in coords))
        raise ValueError("the zero vector is not a projective point")

    def degree(self, base: Field) -> int:
        """Least t with all coordinates in F_{q^t}, q = |base|."""
        F = self.field
        for t in range(1, F.s // base.s + 1):
            if (F.s // base.s) % t:
                continue
            qt = base.q**t
            if all(F.pow(c, qt) == c for c in self.coords):
                return t
        return F.s // base.s  # pragma: no cover

    def __str__(self) -> str:
        return "(" + ":".join(map(str, self.coords)) + ")"


class _VecField:
    """Vectorized evaluation over F_Q via discrete logs and base-p digits."""

    def __init__(self, E: Field):
        self.E = E
        Q, p, s = E.q, E.p, E.s
        self.log = np.array([-1] + [E.log(a) for a in range(1, Q)], dtype=np.int64)
        self.exp = np.array([E.exp(k) for k in range(Q - 1)], dtype=np.int64)
        self.digits = np.array([E.coeffs(a) for a in range(Q)], dtype=np.int64).reshape(Q, s)
        self.weights = np.array([p**i for i in range(s)], dtype=np.int64)

    def eval(self, poly: HomogPoly3, cols: list[np.ndarray]) -> np.ndarray:
        E = self.E
        Q, p = E.q, E.p
        n = len(cols[0])
        logs = [self.log[c] for c in cols]
        zero = [c == 0 for c in cols]
        acc = np.zeros((n, E.s), dtype=np.int64)
        for e, c in poly.coeffs:
            lg = np.full(n, E.log(c), dtype=np.int64)
            mask = np.ones(n, dtype=bool)
            for i in range(3):
                if e[i]:
                    lg += e[i] * logs[i]
                    mask &= ~zero[i]
            vals = self.exp[lg % (Q - 1)]
            acc += self.digits[vals] * mask[:, None]
        acc %= p
        return acc @ self.weights


def _chart_columns(Q: int, chart: int, block: range) -> list[np.ndarray]:
    """Canonical points (1:y:z), (0:1:z), (0:0:1); block ranges over y for chart 0."""
    if chart == 0:
        ys = np.repeat(np.arange(block.start, block.stop, dtype=np.int64), Q)
        zs = np.tile(np.arange(Q, dtype=np.int64), len(block))
        return [np.ones_like(ys), ys, zs]
    if chart == 1:
        zs = np.arange(Q, dtype=np.int64)
        return [np.zeros_like(zs), np.ones_like(zs), zs]
    return [np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64)]


def singular_points(F: HomogPoly3, ext: int = 1, budget: int = DEFAULT_SCAN_BUDGET) -> list[PlanePoint]:
    """All points of P^2(F_{Q}) where F and its three partials vanish, Q = |coefficient field|^ext."""
    base = F.field
    if ext < 1:
        raise ValueError("extension degree must be >= 1")
    E = field_make(base.p, base.s * ext)
    Q = E.q
    if Q * Q + Q + 1 > budget:
        raise BudgetExceeded(f"|P^2(F_{Q})| = {Q * Q + Q + 1} exceeds the scan budget {budget}")
    G = F.over(E)
    polys = [G.partial(0), G.partial(1), G.partial(2), G]
    vf = _VecField(E)
    found: list[PlanePoint] = []
    step = max(1, 600_000 // Q)
    blocks = [(0, range(a, min(a + step, Q))) for a in range(0, Q, step)] + [(1, range(0)), (2, range(0))]
    for chart, block in blocks:
        cols = _chart_columns(Q, chart, block)
        for poly in polys:
            if not len(cols[0]):
                break
            if poly.is_zero():
                continue
            keep = vf.eval(poly, cols) == 0
            cols = [c[keep] for c in cols]
        for x, y, z in zip(*cols):
            found.append(PlanePoint(E, (int(x), int(y), int(z))))
    return found


# ---------------------------------------------------------------------------
# nodes


@dataclass
class SingularPoint:
    point: PlanePoint
    is_node: bool
    tangents_rational: bool  # over the field generated by the point's coordinates
    tangents_rational_over_base: bool  # over the field of definition of the polynomial
    degree: int  # degree of the point over the polynomial's field

    def to_json(self) -> dict:
        return {
            "point": list(self.point.coords),
            "node": self.is_node,
            "tangents_rational": self.tangents_rational,
            "tangents_rational_over_base": self.tangents_rational_over_base,
            "degree": self.degree,
        }


def _local_quadratic(F: HomogPoly3, P: PlanePoint) -> tuple[int, int, int]:
    """Coefficients (a, b, c) of a u^2 + b uv + c v^2, the quadratic part at P in the chart of P."""
    E = P.field
    G = F.over(E)
    i = next(k for k, c in enumerate(P.coords) if c)
    j, k = [t for t in range(3) if t != i]

    def alpha(aj: int, ak: int) -> Exp:
        e = [0, 0, 0]
        e[j], e[k] = aj, ak
        return tuple(e)

    return G.hasse(alpha(2, 0))(P.coords), G.hasse(alpha(1, 1))(P.coords), G.hasse(alpha(0, 2))(P.coords)


def _roots_in(E: Field, a: int, b: int, c: int) -> list:
    """Projective roots (t:1) or infinity of a t^2 + b t + c lying in E."""
    roots: list = []
    if a == 0:
        roots.append("inf")
    for t in range(E.q):
        if E.add(E.add(E.mul(a, E.mul(t, t)), E.mul(b, t)), c) == 0:
            roots.append(t)
    return roots


def _in_subfield(E: Field, x, t: int) -> bool:
    """x in F_{p^t} inside E (infinity counts as rational)."""
    return x == "inf" or E.pow(x, E.p**t) == x


def is_node(F: HomogPoly3, P: PlanePoint) -> tuple[bool, bool]:
    """(node, tangents rational over the field generated by P's coordinates)."""
    sp = _classify(F, P)
    return sp.is_node, sp.tangents_rational


def _classify(F: HomogPoly3, P: PlanePoint) -> SingularPoint:
    E = P.field
    if E.p != F.field.p or E.s % F.field.s:
        raise ValueError("the point's field must contain the coefficient field")
    G = F.over(E)
    if G(P.coords) != 0:
        raise ValueError(f"{P} is not on the curve")
    if any(G.partial(i)(P.coords) for i in range(3)):
        raise ValueError(f"{P} is not a singular point")
    a, b, c = _local_quadratic(F, P)
    if E.p == 2:
        node = b != 0
    else:
        disc = E.sub(E.mul(b, b), E.mul(E.from_int(4), E.mul(a, c)))
        node = disc != 0
    deg = P.degree(F.field)
    if not node:
        return SingularPoint(P, False, False, False, deg)
    # field generated by the point's coordinates together with the coefficients
    tP = F.field.s * deg
    roots = _roots_in(E, a, b, c)
    full = len(roots) == 2
    rat_P = full and all(_in_subfield(E, r, tP) for r in roots)
    rat_base = full and deg == 1 and all(_in_subfield(E, r, F.field.s) for r in roots)
    if not full:
        # roots outside E: a quadratic extension of E, never inside the point's field
        rat_P = rat_base = False
    return SingularPoint(P, True, rat_P, rat_base, deg)


@dataclass
class CurveReport:
    degree: int
    scan_field: int
    singular_points: list[SingularPoint]
    count_by_degree: dict[int, int]
    nodes: int
    plucker_genus: int
    reducible: bool
    caveat: str

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "scan_field": self.scan_field,
            "singular_points": [s.to_json() for s in self.singular_points],
            "count_by_degree": {str(k): v for k, v in sorted(self.count_by_degree.items())},
            "nodes": self.nodes,
            "plucker_genus": self.plucker_genus,
            "reducible": self.reducible,
            "caveat": self.caveat,
        }


def genus_report(F: HomogPoly3, ext: int = 1, budget: int = DEFAULT_SCAN_BUDGET) -> CurveReport:
    """Nodes over F_{Q^ext} and the Pluecker genus (d-1)(d-2)/2 - #nodes."""
    pts = singular_points(F, ext, budget)
    classified = [_classify(F, P) for P in pts]
    bad = [s for s in classified if not s.is_node]
    if bad:
        raise NonNodal(f"non-nodal singular point {bad[0].point}")
    counts: dict[int, int] = {}
    for s in classified:
        counts[s.degree] = counts.get(s.degree, 0) + 1
    d = F.degree
    g = (d - 1) * (d - 2) // 2 - len(classified)
    Q = F.field.q**ext
    caveat = (f"singular points were searched over F_{Q} only; points of other degrees would be missed"
              + ("; a negative genus means the curve is reducible" if g < 0 else ""))
    return CurveReport(d, Q, classified, counts, len(classified), g, g < 0, caveat)


# ---------------------------------------------------------------------------
# PGL2 symmetry


def _sym2(F: Field, g: Sequence[int]) -> tuple[int, ...]:
    """Action of g = (a b; c d) on (s^2, st, t^2) for (s, t) -> (a s + b t, c s + d t)."""
    a, b, c, d = g
    m, ad = F.mul, F.add
    two = F.from_int(2)
    return (
        m(a, a), m(two, m(a, b)), m(b, b),
        m(a, c), ad(m(a, d), m(b, c)), m(b, d),
        m(c, c), m(two, m(c, d)), m(d, d),
    )


def _transpose(A: Sequence[int]) -> tuple[int, ...]:
    return tuple(A[3 * c + r] for r in range(3) for c in range(3))


def _reflection(F: Field, diag: Sequence[int], v: Sequence[int]) -> tuple[int, ...] | None:
    """x -> x - 2 B(x,v)/Q(v) v for Q = sum diag_i x_i^2; None when v is isotropic."""
    Qv = 0
    for di, vi in zip(diag, v):
        Qv = F.add(Qv, F.mul(di, F.mul(vi, vi)))
    if Qv == 0:
        return None
    k = F.div(F.from_int(2), Qv)
    rows = []
    for r in range(3):
        for c in range(3):
            x = 1 if r == c else 0
            x = F.sub(x, F.mul(k, F.mul(v[r], F.mul(diag[c], v[c]))))
            rows.append(x)
    return tuple(rows)


def pgl2_action(q: int, model: str = "conic", w: int | None = None) -> list[ProjMat3]:
    """Generators of the image of PGL2(F_q) in PGL3(F_q), acting by substitution x -> A x.

    model "conic": the transposed symmetric square, preserving the product of the lines dual to
    the conic points; model "quadric" (odd q): reflections in the anisotropic vectors of
    x1^2 + x2^2 - w x3^2, whose images in PGL3 form the rotation group, isomorphic to PGL2(F_q).
    """
    p, s = prime_power(q)
    F = field_make(p, s)
    if model == "conic":
        gens = [(1, 1, 0, 1), (0, 1, 1, 0)]
        if s > 1:
            gens += [(1, F.pow(F.x(), k), 0, 1) for k in range(1, s)]
        if q > 2:
            gens.append((F.exp(1), 0, 0, 1))
        out = [_transpose(_sym2(F, g)) for g in gens]
    elif model == "quadric":
        if p == 2:
            raise ValueError("the quadric model needs odd q")
        w = _check_w(F, w)
        diag = (1, 1, F.neg(w))
        out = []
        seen = set()
        for v in _projective_points(F):
            A = _reflection(F, diag, v)
            if A is not None and A not in seen:
                seen.add(A)
                out.append(A)
    else:
        raise ValueError(f"unknown model {model!r}")
    return [ProjMat3(F, A) for A in out]


def _projective_points(F: Field) -> Iterable[tuple[int, int, int]]:
    for y in range(F.q):
        for z in range(F.q):
            yield (1, y, z)
    for z in range(F.q):
        yield (0, 1, z)
    yield (0, 0, 1)


@dataclass
class InvarianceResult:
    invariant: bool
    witness: ProjMat3 | None = None
    scalars: list[int] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.invariant


def invariance_check(F: HomogPoly3, gens: Sequence[ProjMat3]) -> InvarianceResult:
    """Whether F(A x) = c F(x) for every generator A (c a nonzero scalar)."""
    if F.is_zero():
        raise ValueError("zero polynomial")
    scalars = []
    for g in gens:
        A = [embed(g.field, F.field, a) for a in g.entries]
        if mat_det(F.field, A, 3) == 0:
            raise ValueError("singular matrix")
        H = F.substitute(A)
        e0, c0 = F.coeffs[0]
        c = F.field.div(H.terms().get(e0, 0), c0)
        if c == 0 or H != F.scale(c):
            return InvarianceResult(False, g, scalars)
        scalars.append(c)
    return InvarianceResult(True, None, scalars)


def act_on_point(A: ProjMat3, P: PlanePoint) -> PlanePoint:
    """A P; when F(A x) is a multiple of F(x), A^{-1} and hence A permute the singular points."""
    E = P.field
    M = [embed(A.field, E, a) for a in A.entries]
    x = P.coords
    out = []
    for r in range(3):
        acc = 0
        for c in range(3):
            acc = E.add(acc, E.mul(M[3 * r + c], x[c]))
        out.append(acc)
    return PlanePoint.make(E, out)


def orbit(P: PlanePoint, gens: Sequence[ProjMat3]) -> set[PlanePoint]:
    seen = {P}
    todo = [P]
    while todo:
        x = todo.pop()
        for g in gens:
            y = act_on_point(g, x)
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return seen
