"""Higher derivations at a branch point: truncated Laurent series in t, series in X over them,
the tame coefficient formula with an independent series check, and the Artin-Schreier
expansion with its irregularity measurement."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .ff import binom_padic, is_prime

__all__ = [
    "PrecisionError",
    "LaurentSeries",
    "BiSeries",
    "tame_coeff",
    "tame_oracle",
    "tame_f",
    "local_exponents",
    "as_z",
    "as_series",
    "ASResult",
    "as_derivative",
    "as_f",
    "FReport",
    "derivative_valuation",
]


class PrecisionError(ArithmeticError):
    """A requested coefficient lies beyond the known precision."""


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")


# ---------------------------------------------------------------------------
# truncated Laurent series over F_p


@dataclass(frozen=True)
class LaurentSeries:
    """sum_{k} coeffs[k] t^(val + k); terms from t^(val + len(coeffs)) on are unknown unless exact.

    The zero series is represented with an empty coefficient array; its precision is ``val``
    when not exact (known to vanish below t^val).
    """

    p: int
    val: int
    coeffs: tuple[int, ...]
    exact: bool = False

    # construction
    @staticmethod
    def make(p: int, val: int, coeffs, exact: bool = False, prec: int | None = None) -> "LaurentSeries":
        """Strip leading zeros; prec (absolute) bounds the known range for non-exact series."""
        cs = [int(c) % p for c in coeffs]
        if prec is not None and not exact:
            cs = cs[: max(0, prec - val)]
        k = 0
        while k < len(cs) and cs[k] == 0:
            k += 1
        if k == len(cs):
            top = val + len(cs) if prec is None else prec
            return LaurentSeries(p, top if not exact else 0, (), exact)
        cs = cs[k:]
        if exact:
            while cs and cs[-1] == 0:
                cs.pop()
        return LaurentSeries(p, val + k, tuple(cs), exact)

    @staticmethod
    def monomial(p: int, e: int, c: int = 1) -> "LaurentSeries":
        return LaurentSeries.make(p, e, [c], exact=True)

    @staticmethod
    def zero(p: int) -> "LaurentSeries":
        return LaurentSeries(p, 0, (), True)

    # queries
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def prec(self) -> float:
        """Absolute precision: coefficients of t^k are known for k < prec."""
        if self.exact:
            return float("inf")
        return self.val + len(self.coeffs) if self.coeffs else self.val

    def valuation(self) -> int:
        if self.is_zero():
            if self.exact:
                return 10**18
            raise PrecisionError(f"series vanishes to precision t^{self.val}; valuation unknown")
        return self.val

    def coeff(self, k: int) -> int:
        if k >= self.prec:
            raise PrecisionError(f"coefficient of t^{k} is beyond precision t^{self.prec}")
        if not self.coeffs or k < self.val:
            return 0
        i = k - self.val
        return self.coeffs[i] if i < len(self.coeffs) else 0

    def truncate(self, prec: int) -> "LaurentSeries":
        if self.prec <= prec:
            return self
        return LaurentSeries.make(self.p, self.val, self.coeffs, prec=prec)

    # arithmetic
    def _arr(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        p = self.p
        prec = min(self.prec, other.prec)
        if self.is_zero() and self.exact:
            return other
        if other.is_zero() and other.exact:
            return self
        lo = min(x.val for x in (self, other) if x.coeffs) if (self.coeffs or other.coeffs) else 0
        hi = max((x.val + len(x.coeffs) for x in (self, other) if x.coeffs), default=lo)
        if prec != float("inf"):
            hi = min(hi, int(prec))
            lo = min(lo, int(prec))
        out = np.zeros(max(hi - lo, 0), dtype=np.int64)
        for x in (self, other):
            if x.coeffs:
                a = x._arr()[: max(0, hi - x.val)]
                out[x.val - lo: x.val - lo + len(a)] += a
        exact = prec == float("inf")
        return LaurentSeries.make(p, lo, out % p, exact=exact, prec=None if exact else int(prec))

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.p, self.val, tuple((-c) % self.p for c in self.coeffs), self.exact)

    def __sub__(self, other: "LaurentSeries") -> "LaurentSeries":
        return self + (-other)

    def scale(self, c: int) -> "LaurentSeries":
        c %= self.p
        if c == 0:
            return LaurentSeries.make(self.p, self.val, [], self.exact, prec=None if self.exact else int(self.prec))
        return LaurentSeries(self.p, self.val, tuple(x * c % self.p for x in self.coeffs), self.exact)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by t^k."""
        if self.is_zero():
            return LaurentSeries(self.p, self.val + (0 if self.exact else k), (), self.exact)
        return LaurentSeries(self.p, self.val + k, self.coeffs, self.exact)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        p = self.p
        if (self.is_zero() and self.exact) or (other.is_zero() and other.exact):
            return LaurentSeries.zero(p)
        # relative precision of a product is the smaller relative precision
        v = self.val + other.val
        if self.exact and other.exact:
            prec = None
        else:
            rel = min(len(x.coeffs) if not x.exact else 10**9 for x in (self, other))
            prec = v + rel
            if self.is_zero() or other.is_zero():
                return LaurentSeries(p, v + (self.prec - self.val if self.is_zero() else other.prec - other.val), (), False)
        a, b = self._arr(), other._arr()
        if prec is not None:
            keep = prec - v
            a, b = a[:keep], b[:keep]
        c = np.convolve(a, b) % p
        return LaurentSeries.make(p, v, c, exact=prec is None, prec=prec)

    def inverse(self, rel_prec: int | None = None) -> "LaurentSeries":
        """1/self with relative precision rel_prec (default: own relative precision)."""
        p = self.p
        if self.is_zero():
            raise ZeroDivisionError("inverse of a series with no known nonzero term")
        n = rel_prec if rel_prec is not None else (len(self.coeffs) if not self.exact else None)
        if n is None:
            if len(self.coeffs) == 1:
                return LaurentSeries.monomial(p, -self.val, pow(self.coeffs[0], -1, p))
            raise ValueError("inverse of an exact non-monomial needs a precision")
        if not self.exact:
            n = min(n, len(self.coeffs))
        a = list(self.coeffs[:n]) + [0] * max(0, n - len(self.coeffs))
        inv0 = pow(a[0], -1, p)
        b = [0] * n
        b[0] = inv0
        for k in range(1, n):
            s = 0
            for j in range(1, min(k, len(a) - 1) + 1):
                s += a[j] * b[k - j]
            b[k] = (-s * inv0) % p
        return LaurentSeries.make(p, -self.val, b, prec=-self.val + n)

    def __pow__(self, k: int) -> "LaurentSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = LaurentSeries.monomial(self.p, 0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def to_json(self) -> dict:
        return {"val": self.val, "coeffs": list(self.coeffs), "prec": None if self.exact else int(self.prec)}


@dataclass(frozen=True)
class BiSeries:
    """sum_{n <= N} terms[n] X^n with Laurent-series coefficients; X-powers above N are unknown."""

    p: int
    terms: tuple[LaurentSeries, ...]

    @property
    def N(self) -> int:
        return len(self.terms) - 1

    @staticmethod
    def constant(s: LaurentSeries, N: int) -> "BiSeries":
        z = LaurentSeries.zero(s.p)
        return BiSeries(s.p, (s,) + (z,) * N)

    def __getitem__(self, n: int) -> LaurentSeries:
        if n > self.N:
            raise PrecisionError(f"X^{n} is beyond the X-precision {self.N}")
        return self.terms[n]

    def __add__(self, other: "BiSeries") -> "BiSeries":
        N = min(self.N, other.N)
        return BiSeries(self.p, tuple(self.terms[k] + other.terms[k] for k in range(N + 1)))

    def __neg__(self) -> "BiSeries":
        return BiSeries(self.p, tuple(-x for x in self.terms))

    def __sub__(self, other: "BiSeries") -> "BiSeries":
        return self + (-other)

    def __mul__(self, other: "BiSeries") -> "BiSeries":
        N = min(self.N, other.N)
        out = []
        for n in range(N + 1):
            acc = LaurentSeries.zero(self.p)
            for k in range(n + 1):
                a, b = self.terms[k], other.terms[n - k]
                if (a.is_zero() and a.exact) or (b.is_zero() and b.exact):
                    continue
                acc = acc + a * b
            out.append(acc)
        return BiSeries(self.p, tuple(out))

    def mul_series(self, s: LaurentSeries) -> "BiSeries":
        return BiSeries(self.p, tuple(x * s for x in self.terms))

    def __pow__(self, k: int) -> "BiSeries":
        if k < 0:
            raise ValueError("negative power")
        result = BiSeries.constant(LaurentSeries.monomial(self.p, 0), self.N)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result


# ---------------------------------------------------------------------------
# tame case


def _tame_pre(i: int, m: int, n: int, p: int) -> None:
    _check_prime(p)
    if m < 1 or m % p == 0:
        raise ValueError(f"m={m} must be positive and prime to p={p}")
    if not 0 <= i < m:
        raise ValueError("need 0 <= i < m")
    if n < 0:
        raise ValueError("n must be >= 0")


def tame_coeff(i: int, m: int, n: int, p: int) -> int:
    """z^n d_z^(n)(t^i) / t^i = binom(i/m, n) mod p for z = t^m."""
    _tame_pre(i, m, n, p)
    return binom_padic(i, m, n, p)


def _rational_binom_mod(a: Fraction, n: int, p: int) -> int:
    """binom(a, n) mod p for a p-integral rational, via the exact product formula."""
    num = Fraction(1)
    for k in range(n):
        num *= a - k
    for k in range(1, n + 1):
        num /= k
    if num.denominator % p == 0:  # pragma: no cover - binomials of p-adic integers are integral
        raise ArithmeticError("non-integral binomial")
    return num.numerator * pow(num.denominator, -1, p) % p


def tame_oracle(i: int, m: int, n: int, p: int, trunc: int | None = None) -> int:
    """The same coefficient read off psi(t^i) = (t (1 + t^-m X)^(1/m))^i.

    The degree-1/m expansion uses exact rational binomials; the i-th power is a series product.
    """
    _tame_pre(i, m, n, p)
    N = n if trunc is None else trunc
    if N < n:
        raise PrecisionError(f"X-precision {N} is below the requested order {n}")
    root = BiSeries(p, tuple(LaurentSeries.monomial(p, 1 - m * k, _rational_binom_mod(Fraction(1, m), k, p))
                             for k in range(N + 1)))
    psi_i = root**i
    coeff = psi_i[n].shift(m * n)  # multiply by z^n = t^(mn)
    return coeff.coeff(i)


def local_exponents(m: int) -> list[Fraction]:
    """Exponents of the diagonal action on the basis t^0, ..., t^(m-1)."""
    return [Fraction(i, m) for i in range(m)]


def tame_f(n: int, m: int, p: int, i_max: int | None = None) -> int:
    """Least k with z^k d_z^(n) mapping t^i into K{t} for 0 <= i <= i_max (z = t^m)."""
    _check_prime(p)
    if m % p == 0:
        raise ValueError("m must be prime to p")
    i_max = i_max if i_max is not None else 2 * m
    k = 0
    for i in range(i_max + 1):
        if binom_padic(i, m, n, p):
            # d_z^(n) t^i = binom(i/m, n) t^(i - m n)
            k = max(k, ceil((m * n - i) / m))
    return k


# ---------------------------------------------------------------------------
# Artin-Schreier case: t^-p - t^-1 = z^-1


def as_z(p: int, N_t: int) -> LaurentSeries:
    """z = t^p / (1 - t^(p-1)) to absolute precision p + N_t."""
    _check_prime(p)
    one_minus = LaurentSeries.make(p, 0, [1] + [0] * (p - 2) + [p - 1], exact=True)
    return one_minus.inverse(N_t).shift(p)


@dataclass
class ASResult:
    p: int
    N_X: int
    N_t: int
    R: BiSeries
    psi_t: BiSeries
    identity_ok: bool
    checked_to: int  # t-precision of the identity comparison, per X-power (minimum)


def _x_over_z_zx(zi: LaurentSeries, N_X: int) -> BiSeries:
    """X / (z (z + X)) = sum_{k>=0} (-1)^k X^(k+1) z^-(k+2)."""
    p = zi.p
    terms = [LaurentSeries.zero(p)]
    zpow = zi * zi
    for k in range(N_X):
        terms.append(zpow.scale(-1 if k % 2 else 1))
        zpow = zpow * zi
    return BiSeries(p, tuple(terms))


def as_series(p: int, N_X: int = 8, N_t: int | None = None) -> ASResult:
    """R with R^p - R = -X/(z(z+X)) and psi(t) = t / (1 + t R), to X-precision N_X."""
    _check_prime(p)
    if N_X < 1:
        raise ValueError("N_X must be >= 1")
    N_t = N_t if N_t is not None else 60 * p
    z = as_z(p, N_t)
    zi = z.inverse()
    base = _x_over_z_zx(zi, N_X)
    R = BiSeries(p, tuple(LaurentSeries.zero(p) for _ in range(N_X + 1)))
    e = 1
    while e <= N_X:
        R = R + base**e
        e *= p
    lhs = R**p - R
    rhs = -base
    diff = lhs - rhs
    ok = True
    checked = None
    for k in range(N_X + 1):
        d = diff[k]
        if not d.is_zero():
            ok = False
        if not d.exact:
            checked = int(d.prec) if checked is None else min(checked, int(d.prec))
    tS = LaurentSeries.monomial(p, 1)
    one = BiSeries.constant(LaurentSeries.monomial(p, 0), N_X)
    tR = R.mul_series(tS)
    # t / (1 + tR) = t sum (-tR)^l; tR has X-valuation >= 1
    acc = one
    term = one
    for _ in range(N_X):
        term = term * (-tR)
        acc = acc + term
    psi_t = acc.mul_series(tS)
    return ASResult(p, N_X, N_t, R, psi_t, ok, checked if checked is not None else 10**9)


def as_derivative(res: ASResult, i: int, n: int) -> LaurentSeries:
    """d_z^(n)(t^i): the X^n coefficient of psi(t)^i (i may be negative: psi(t^-1) = t^-1 + R)."""
    if n > res.N_X:
        raise PrecisionError(f"order {n} exceeds X-precision {res.N_X}")
    if i == -1:
        return (BiSeries.constant(LaurentSeries.monomial(res.p, -1), res.N_X) + res.R)[n]
    if i < 0:
        raise ValueError("only i >= 0 or i = -1 supported")
    return (res.psi_t**i)[n]


def derivative_valuation(p: int, n: int, N_t: int | None = None) -> int:
    """val_t of d_z^(n)(t)."""
    res = as_series(p, max(n, 1), N_t)
    return as_derivative(res, 1, n).valuation()


@dataclass
class FReport:
    p: int
    n: int
    f: int
    valuations: dict[int, int | None]  # i -> val_t(d^(n) t^i), None when it vanishes to precision
    exceeds_n: bool
    exceeds_3n_over_2: bool
    note: str = "lower bound from generators t^i, i <= i_max"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "f": self.f,
            "valuations": {str(k): v for k, v in sorted(self.valuations.items())},
            "exceeds_n": self.exceeds_n,
            "exceeds_3n_over_2": self.exceeds_3n_over_2,
            "note": self.note,
        }


def as_f(n: int, p: int, i_max: int | None = None, N_t: int | None = None,
         res: ASResult | None = None) -> FReport:
    """Least k with k val_t(z) + val_t(d_z^(n) t^i) >= 0 for 1 <= i <= i_max (val_t(z) = p)."""
    _check_prime(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    i_max = i_max if i_max is not None else 2 * p * p
    if res is None or res.N_X < n or res.p != p:
        res = as_series(p, n, N_t)
    vals: dict[int, int | None] = {}
    power = BiSeries.constant(LaurentSeries.monomial(p, 0), res.N_X)
    k = 0
    min_known = res.N_t // 4
    for i in range(1, i_max + 1):
        power = power * res.psi_t
        d = power[n]
        if d.is_zero():
            known = d.prec - (1 + n - 2 * n * p) if not d.exact else float("inf")
            if known < min_known:
                raise PrecisionError(f"d^({n}) t^{i} is zero only to a short precision; raise N_t")
            vals[i] = None
            continue
        v = d.valuation()
        vals[i] = v
        k = max(k, ceil(-v / p))
    return FReport(p, n, k, vals, k > n, 2 * k > 3 * n)
