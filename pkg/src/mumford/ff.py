"""Exact arithmetic: rationals, finite fields F_{p^s}, projective matrices, p-adic binomials.

Field elements are plain ints ``a = sum c_i p^i`` (low-degree digit first) so that hot
loops stay cheap; :class:`FieldElem` wraps them for the public API.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "Field",
    "FieldElem",
    "field_make",
    "is_prime",
    "embed",
    "binom_padic",
    "proj_canon",
    "ProjMat2",
    "ProjMat3",
    "mat_mul",
    "mat_det",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, s) with q = p^s, or raise ValueError."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = 2
    while q % p:
        p += 1
    s, r = 0, q
    while r % p == 0:
        r //= p
        s += 1
    if r != 1:
        raise ValueError(f"{q} is not a prime power")
    return p, s


def _digits(a: int, p: int, s: int) -> list[int]:
    out = []
    for _ in range(s):
        a, r = divmod(a, p)
        out.append(r)
    return out


def _undigits(ds: Sequence[int], p: int) -> int:
    a = 0
    for c in reversed(ds):
        a = a * p + c
    return a


def _polymulmod(u: Sequence[int], v: Sequence[int], mod: Sequence[int], p: int) -> list[int]:
    """Multiply digit vectors u, v modulo the monic polynomial ``mod`` (length s+1)."""
    s = len(mod) - 1
    prod_ = [0] * (2 * s - 1)
    for i, a in enumerate(u):
        if a:
            for j, b in enumerate(v):
                if b:
                    prod_[i + j] = (prod_[i + j] + a * b) % p
    for k in range(len(prod_) - 1, s - 1, -1):
        c = prod_[k]
        if c:
            for t in range(s + 1):
                prod_[k - s + t] = (prod_[k - s + t] - c * mod[t]) % p
    return prod_[:s] + [0] * (s - len(prod_[:s]))


def _poly_rem(a: list[int], b: list[int], p: int) -> list[int]:
    a = a[:]
    db = len(b) - 1
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) - 1 >= db and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < db:
            break
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - db
        for t in range(db + 1):
            a[shift + t] = (a[shift + t] - c * b[t]) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _irreducible(poly: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    s = len(poly) - 1
    for d in range(1, s // 2 + 1):
        for low in product(range(p), repeat=d):
            if not any(_poly_rem(poly, list(low) + [1], p)):
                return False
    return True


@lru_cache(maxsize=None)
def _least_modulus(p: int, s: int) -> tuple[int, ...]:
    if s == 1:
        return (0, 1)
    # lexicographic order on (c0, c1, ..., c_{s-1}); itertools.product varies the last slot fastest
    for low in product(range(p), repeat=s):
        cand = list(low) + [1]
        if cand[0] == 0:
            continue
        if _irreducible(cand, p):
            return tuple(cand)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class Field:
    """The finite field F_{p^s}; elements are ints in range(q)."""

    def __init__(self, p: int, s: int):
        if not is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if s < 1:
            raise ValueError(f"extension degree must be >= 1, got {s}")
        self.p = p
        self.s = s
        self.q = p**s
        self.modulus: tuple[int, ...] = _least_modulus(p, s)
        self._build_tables()
        self._add_table = None

    def __repr__(self) -> str:
        return f"Field({self.p},{self.s})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and (self.p, self.s) == (other.p, other.s)

    def __hash__(self) -> int:
        return hash((self.p, self.s))

    def __reduce__(self):
        return (field_make, (self.p, self.s))

    def _build_tables(self) -> None:
        p, s, q = self.p, self.s, self.q
        mod = list(self.modulus)
        for g in range(1, q):
            gd = _digits(g, p, s)
            cur = [1] + [0] * (s - 1)
            exp = []
            seen_one = False
            for _ in range(q - 1):
                exp.append(_undigits(cur, p))
                cur = _polymulmod(cur, gd, mod, p)
                if _undigits(cur, p) == 1 and len(exp) < q - 1:
                    seen_one = True
                    break
            if not seen_one:
                break
        self.gen = g
        self._exp = exp + exp
        log = [0] * q
        for k, a in enumerate(exp):
            log[a] = k
        self._log = log

    # element arithmetic on ints
    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self.s == 1:
            return (a + b) % self.p
        t = self._add_table
        if t is not None:
            return t[a][b]
        return self._add_digits(a, b, 1)

    def _add_digits(self, a: int, b: int, sign: int) -> int:
        p = self.p
        r, mult = 0, 1
        for _ in range(self.s):
            a, x = divmod(a, p)
            b, y = divmod(b, p)
            r += ((x + sign * y) % p) * mult
            mult *= p
        return r

    def enable_add_table(self) -> None:
        """Precompute the full addition table (worth it for repeated use on small q)."""
        if self._add_table is None and self.p != 2 and self.s > 1:
            q = self.q
            self._add_table = [[self._add_digits(a, b, 1) for b in range(q)] for a in range(q)]

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.s == 1:
            return (-a) % self.p
        return self._add_digits(0, a, -1)

    def sub(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if self.s == 1:
            return (a - b) % self.p
        t = self._add_table
        if t is not None:
            return t[a][self.neg(b)]
        return self._add_digits(a, b, -1)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            if k == 0:
                return 1
            if k < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 0
        return self._exp[(self._log[a] * k) % (self.q - 1)]

    def log(self, a: int) -> int:
        if a == 0:
            raise ValueError("log of 0")
        return self._log[a]

    def exp(self, k: int) -> int:
        return self._exp[k % (self.q - 1)]

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> F_p -> F_q."""
        return n % self.p

    def elements(self) -> range:
        return range(self.q)

    def is_square(self, a: int) -> bool:
        if a == 0 or self.p == 2:
            return True
        return self._log[a] % 2 == 0

    def sqrt(self, a: int) -> int | None:
        if a == 0:
            return 0
        if self.p == 2:
            return self._exp[(self._log[a] * (self.q // 2)) % (self.q - 1)]
        k = self._log[a]
        if k % 2:
            return None
        return self._exp[k // 2]

    def frob(self, a: int, k: int = 1) -> int:
        return self.pow(a, self.p**k)

    def element_order(self, a: int) -> int:
        from math import gcd

        return (self.q - 1) // gcd(self.q - 1, self._log[a])

    def root_of_unity(self, m: int) -> int:
        """A fixed primitive m-th root of unity (requires m | q-1)."""
        if (self.q - 1) % m:
            raise ValueError(f"no primitive {m}-th root of unity in F_{self.q}")
        return self._exp[(self.q - 1) // m]

    def coeffs(self, a: int) -> list[int]:
        return _digits(a, self.p, self.s)

    def from_coeffs(self, cs: Sequence[int]) -> int:
        if len(cs) > self.s:
            raise ValueError("too many coefficients")
        return _undigits([c % self.p for c in cs], self.p)

    def x(self) -> int:
        """The class of the polynomial variable (the element with digit vector (0,1,0,...))."""
        return self.p if self.s > 1 else 0

    def subfield(self, t: int) -> list[int]:
        """Elements of the subfield F_{p^t} as ints of this field."""
        if self.s % t:
            raise ValueError(f"F_{self.p}^{t} is not a subfield of F_{self.q}")
        qt = self.p**t
        return sorted(a for a in range(self.q) if self.pow(a, qt) == a)

    def elem(self, a: int) -> "FieldElem":
        return FieldElem(self, a)


@lru_cache(maxsize=None)
def field_make(p: int, s: int = 1) -> Field:
    """Return the field F_{p^s} with its deterministic modulus (cached)."""
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if s < 1:
        raise ValueError(f"extension degree must be >= 1, got {s}")
    return Field(p, s)


def field_of_order(q: int) -> Field:
    p, s = prime_power(q)
    return field_make(p, s)


@lru_cache(maxsize=None)
def _embedding(p: int, s_small: int, s_big: int) -> tuple[int, ...]:
    small, big = field_make(p, s_small), field_make(p, s_big)
    if s_big % s_small:
        raise ValueError("not a subfield")
    if s_small == 1:
        return tuple(range(p))
    mod = small.modulus
    root = None
    for a in range(big.q):
        acc = 0
        for c in reversed(mod):
            acc = big.add(big.mul(acc, a), big.from_int(c))
        if acc == 0:
            root = a
            break
    assert root is not None
    table = []
    for e in range(small.q):
        acc = 0
        for c in reversed(small.coeffs(e)):
            acc = big.add(big.mul(acc, root), big.from_int(c))
        table.append(acc)
    return tuple(table)


def embed(small: Field, big: Field, a: int) -> int:
    """Image of a in ``big`` under the fixed embedding (least root of the small modulus)."""
    if small.p != big.p:
        raise ValueError("different characteristics")
    return _embedding(small.p, small.s, big.s)[a]


@dataclass(frozen=True)
class FieldElem:
    """A field element with operator overloading; ``value`` is the int encoding."""

    field: Field
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError("element out of range")

    @property
    def coeffs(self) -> list[int]:
        return self.field.coeffs(self.value)

    def _lift(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise ValueError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return self.field.from_int(other)
        return NotImplemented

    def __add__(self, other):
        return FieldElem(self.field, self.field.add(self.value, self._lift(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.field, self.field.sub(self.value, self._lift(other)))

    def __rsub__(self, other):
        return FieldElem(self.field, self.field.sub(self._lift(other), self.value))

    def __mul__(self, other):
        return FieldElem(self.field, self.field.mul(self.value, self._lift(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(self.field, self.field.neg(self.value))

    def __truediv__(self, other):
        return FieldElem(self.field, self.field.div(self.value, self._lift(other)))

    def __pow__(self, k: int):
        return FieldElem(self.field, self.field.pow(self.value, k))

    def inverse(self) -> "FieldElem":
        return FieldElem(self.field, self.field.inv(self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"FieldElem(F_{self.field.q}, {self.coeffs})"


def binom_padic(i: int, m: int, n: int, p: int) -> int:
    """C(i/m, n) mod p, with i/m read as a p-adic integer, via the digitwise Lucas rule."""
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if m % p == 0:
        raise ValueError(f"p={p} divides m={m}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    m_inv = pow(m, -1, p)
    result = 1
    while n:
        n, n_j = divmod(n, p)
        a_j = (i * m_inv) % p
        i = (i - a_j * m) // p
        if n_j > a_j:
            return 0
        result = result * comb(a_j, n_j) % p
    return result


def mat_mul(F: Field, A: Sequence[int], B: Sequence[int], k: int) -> tuple[int, ...]:
    """Product of k x k matrices stored row-major as flat tuples."""
    out = []
    for r in range(k):
        for c in range(k):
            acc = 0
            for t in range(k):
                acc = F.add(acc, F.mul(A[r * k + t], B[t * k + c]))
            out.append(acc)
    return tuple(out)


def mat_det(F: Field, A: Sequence[int], k: int) -> int:
    if k == 2:
        return F.sub(F.mul(A[0], A[3]), F.mul(A[1], A[2]))
    if k == 3:
        a, b, c, d, e, f, g, h, i = A
        t1 = F.mul(a, F.sub(F.mul(e, i), F.mul(f, h)))
        t2 = F.mul(b, F.sub(F.mul(d, i), F.mul(f, g)))
        t3 = F.mul(c, F.sub(F.mul(d, h), F.mul(e, g)))
        return F.add(F.sub(t1, t2), t3)
    raise ValueError("only 2x2 and 3x3 supported")


def canon_flat(F: Field, A: Sequence[int]) -> tuple[int, ...]:
    """Scale so the first nonzero entry (row-major) is 1."""
    for a in A:
        if a:
            if a == 1:
                return tuple(A)
            inv = F.inv(a)
            return tuple(F.mul(x, inv) for x in A)
    raise ValueError("zero matrix")


@dataclass(frozen=True)
class ProjMat2:
    field: Field
    entries: tuple[int, int, int, int]

    def __mul__(self, other: "ProjMat2") -> "ProjMat2":
        return ProjMat2(self.field, canon_flat(self.field, mat_mul(self.field, self.entries, other.entries, 2)))

    def det(self) -> int:
        return mat_det(self.field, self.entries, 2)


@dataclass(frozen=True)
class ProjMat3:
    field: Field
    entries: tuple[int, ...]

    def __mul__(self, other: "ProjMat3") -> "ProjMat3":
        return ProjMat3(self.field, canon_flat(self.field, mat_mul(self.field, self.entries, other.entries, 3)))

    def det(self) -> int:
        return mat_det(self.field, self.entries, 3)


def proj_canon(F: Field, M) -> ProjMat2 | ProjMat3:
    """Canonical projective representative of a 2x2 or 3x3 matrix (nested rows or flat)."""
    flat = [x for row in M for x in row] if isinstance(M[0], (list, tuple)) else list(M)
    flat = [F.from_int(x) if isinstance(x, int) and x < 0 else x for x in flat]
    if any(not 0 <= x < F.q for x in flat):
        raise ValueError("entry out of range")
    if len(flat) == 4:
        k = 2
    elif len(flat) == 9:
        k = 3
    else:
        raise ValueError("expected a 2x2 or 3x3 matrix")
    if mat_det(F, flat, k) == 0:
        raise ValueError("singular matrix")
    c = canon_flat(F, flat)
    return ProjMat2(F, c) if k == 2 else ProjMat3(F, c)
