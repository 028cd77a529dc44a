"""Exact arithmetic substrate: integers, rationals, F_p polynomials, F_{l^f}.

Everything here is immutable and exact; there is no floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

INFINITY = math.inf

MAX_EXTENSION_DEGREE = 6


class AlgebraError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    if n < 9:
        return True
    # deterministic Miller-Rabin for n < 3.3e24
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def factor(n: int) -> dict[int, int]:
    """Trial-division factorization of a nonzero integer (sign dropped)."""
    n = abs(n)
    if n == 0:
        raise AlgebraError("cannot factor 0")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_part(n: int) -> int:
    sign = -1 if n < 0 else 1
    core = 1
    for q, e in factor(n).items():
        if e % 2:
            core *= q
    return sign * core


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n) with the usual conventions at -1 and 2."""
    if n == 0:
        raise AlgebraError("kronecker symbol undefined for n = 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a|n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def padic_valuation(x: int | Fraction, ell: int) -> int | float:
    """Exact ell-adic valuation of a rational; +inf for zero."""
    if not is_prime(ell):
        raise AlgebraError(f"{ell} is not prime")
    x = Fraction(x)
    if x == 0:
        return INFINITY
    v = 0
    num, den = x.numerator, x.denominator
    while num % ell == 0:
        num //= ell
        v += 1
    while den % ell == 0:
        den //= ell
        v -= 1
    return v


def inverse_mod(a: int, m: int) -> int:
    try:
        return pow(a, -1, m)
    except ValueError:
        raise AlgebraError(f"{a} is not invertible modulo {m}") from None


# ---------------------------------------------------------------------------
# Polynomials over F_p


@dataclass(frozen=True)
class PolyModP:
    """Polynomial over F_p; coefficients low degree first, no trailing zeros."""

    p: int
    coeffs: tuple[int, ...]

    def __init__(self, p: int, coeffs: Sequence[int]):
        cs = [c % p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def x(cls, p: int) -> PolyModP:
        return cls(p, (0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, r: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * r + c) % self.p
        return acc

    def __add__(self, other: PolyModP) -> PolyModP:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return PolyModP(self.p, [x + y for x, y in zip(a, b)])

    def __neg__(self) -> PolyModP:
        return PolyModP(self.p, [-c for c in self.coeffs])

    def __sub__(self, other: PolyModP) -> PolyModP:
        return self + (-other)

    def __mul__(self, other: PolyModP) -> PolyModP:
        if self.is_zero() or other.is_zero():
            return PolyModP(self.p, ())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return PolyModP(self.p, out)

    def __divmod__(self, other: PolyModP) -> tuple[PolyModP, PolyModP]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        p = self.p
        rem = list(self.coeffs)
        dq = other.degree
        inv_lead = inverse_mod(other.coeffs[-1], p)
        quot = [0] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv_lead % p
            if c:
                quot[k - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] = (rem[k - dq + j] - c * b) % p
        return PolyModP(p, quot), PolyModP(p, rem[:dq] if dq > 0 else ())

    def __mod__(self, other: PolyModP) -> PolyModP:
        return divmod(self, other)[1]

    def __floordiv__(self, other: PolyModP) -> PolyModP:
        return divmod(self, other)[0]

    def monic(self) -> PolyModP:
        if self.is_zero():
            return self
        inv = inverse_mod(self.coeffs[-1], self.p)
        return PolyModP(self.p, [c * inv for c in self.coeffs])

    def gcd(self, other: PolyModP) -> PolyModP:
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic()

    def powmod(self, e: int, modulus: PolyModP) -> PolyModP:
        result = PolyModP(self.p, (1,)) % modulus
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def is_irreducible(self) -> bool:
        """Rabin's test."""
        n = self.degree
        if n < 1:
            return False
        if n == 1:
            return True
        f = self.monic()
        x = PolyModP.x(self.p)
        if (x.powmod(self.p**n, f) - x) % f != PolyModP(self.p, ()):
            return False
        for r in factor(n):
            h = x.powmod(self.p ** (n // r), f) - x
            if f.gcd(h).degree > 0:
                return False
        return True


def root_multiplicity(f: PolyModP, r: int) -> int:
    """Largest m with (X - r)^m dividing f over F_p."""
    if f.is_zero():
        raise AlgebraError("root multiplicity of the zero polynomial is undefined")
    lin = PolyModP(f.p, (-r, 1))
    m = 0
    while True:
        q, rem = divmod(f, lin)
        if not rem.is_zero():
            return m
        f = q
        m += 1


# ---------------------------------------------------------------------------
# Finite fields F_{l^f}, f <= 4


@dataclass(frozen=True)
class FiniteField:
    """F_{l^f} realised as F_l[t]/(modulus)."""

    char: int
    degree: int
    modulus: tuple[int, ...]  # monic, low degree first, length degree + 1

    def __post_init__(self):
        if not is_prime(self.char):
            raise AlgebraError(f"{self.char} is not prime")
        if not 1 <= self.degree <= MAX_EXTENSION_DEGREE:
            raise AlgebraError(f"extension degree {self.degree} outside 1..{MAX_EXTENSION_DEGREE}")
        poly = PolyModP(self.char, self.modulus)
        if poly.degree != self.degree or poly.coeffs[-1] != 1 or not poly.is_irreducible():
            raise AlgebraError(f"modulus {self.modulus} is not a monic irreducible of degree {self.degree}")

    @classmethod
    def prime_field(cls, ell: int) -> FiniteField:
        return cls(ell, 1, (0, 1))

    @classmethod
    def of_order(cls, ell: int, f: int) -> FiniteField:
        """F_{ell^f} with the lexicographically first monic irreducible modulus."""
        if f == 1:
            return cls.prime_field(ell)
        for tail in itertools.product(range(ell), repeat=f):
            coeffs = tail + (1,)
            if coeffs[0] and PolyModP(ell, coeffs).is_irreducible():
                return cls(ell, f, coeffs)
        raise AlgebraError("no irreducible polynomial found")  # unreachable

    @property
    def order(self) -> int:
        return self.char**self.degree

    def __call__(self, value: int | Fraction | Sequence[int]) -> FFElem:
        if isinstance(value, (int, Fraction)):
            value = Fraction(value)
            num = value.numerator % self.char
            den = value.denominator % self.char
            if den == 0:
                raise AlgebraError(f"{value} is not {self.char}-integral")
            return FFElem(self, (num * inverse_mod(den, self.char),) + (0,) * (self.degree - 1))
        coeffs = list(value) + [0] * (self.degree - len(value))
        if len(coeffs) > self.degree:
            poly = PolyModP(self.char, coeffs) % PolyModP(self.char, self.modulus)
            coeffs = list(poly.coeffs) + [0] * (self.degree - len(poly.coeffs))
        return FFElem(self, tuple(c % self.char for c in coeffs))

    def zero(self) -> FFElem:
        return self(0)

    def one(self) -> FFElem:
        return self(1)

    def gen(self) -> FFElem:
        return self((0, 1)) if self.degree > 1 else self(0)

    def __iter__(self) -> Iterator[FFElem]:
        for coeffs in itertools.product(range(self.char), repeat=self.degree):
            yield FFElem(self, tuple(reversed(coeffs)))

    def __repr__(self) -> str:
        return f"F_{self.char}^{self.degree}" if self.degree > 1 else f"F_{self.char}"


@dataclass(frozen=True)
class FFElem:
    field: FiniteField
    coeffs: tuple[int, ...]

    def _coerce(self, other) -> FFElem:
        if isinstance(other, FFElem):
            if other.field != self.field:
                raise AlgebraError("mixed finite fields")
            return other
        return self.field(other)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.field(other)
        if not isinstance(other, FFElem):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.field, self.coeffs))

    def __add__(self, other) -> FFElem:
        o = self._coerce(other)
        ell = self.field.char
        return FFElem(self.field, tuple((a + b) % ell for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> FFElem:
        ell = self.field.char
        return FFElem(self.field, tuple(-a % ell for a in self.coeffs))

    def __sub__(self, other) -> FFElem:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> FFElem:
        return self._coerce(other) - self

    def __mul__(self, other) -> FFElem:
        o = self._coerce(other)
        F = self.field
        if F.degree == 1:
            return FFElem(F, (self.coeffs[0] * o.coeffs[0] % F.char,))
        prod = PolyModP(F.char, self.coeffs) * PolyModP(F.char, o.coeffs)
        return F(prod.coeffs)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> FFElem:
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> FFElem:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.order - 2)

    def __truediv__(self, other) -> FFElem:
        return self * self._coerce(other).inverse()

    def is_square(self) -> bool:
        if self.is_zero() or self.field.char == 2:
            return True
        return self ** ((self.field.order - 1) // 2) == self.field.one()

    def frobenius_root(self) -> FFElem:
        """The unique l-th root (inverse Frobenius): square roots in char 2, cube roots in char 3."""
        return self ** (self.field.order // self.field.char)

    def to_int(self) -> int:
        if any(self.coeffs[1:]):
            raise AlgebraError("element is not in the prime field")
        return self.coeffs[0]

    def __repr__(self) -> str:
        if self.field.degree == 1:
            return str(self.coeffs[0])
        terms = [f"{c}*t^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


def finite_field_roots(coeffs: Sequence[FFElem | int], field: FiniteField) -> list[FFElem]:
    """All roots in `field`, with multiplicity, of a polynomial of degree 2 or 3.

    `coeffs` is low degree first. Roots are found by evaluating at every element
    of the field; multiplicities come from repeated synthetic division.
    """
    cs = [c if isinstance(c, FFElem) else field(c) for c in coeffs]
    while cs and cs[-1].is_zero():
        cs.pop()
    if len(cs) - 1 not in (2, 3):
        raise AlgebraError(f"finite_field_roots supports degree 2 or 3, got {len(cs) - 1}")
    roots: list[FFElem] = []
    for x in field:
        acc = field.zero()
        for c in reversed(cs):
            acc = acc * x + c
        if acc.is_zero():
            poly = cs
            while True:
                # synthetic division by (X - x)
                quot = [field.zero()] * (len(poly) - 1)
                carry = field.zero()
                for k in range(len(poly) - 1, 0, -1):
                    carry = carry * x + poly[k]
                    quot[k - 1] = carry
                rem = carry * x + poly[0]
                if not rem.is_zero():
                    break
                roots.append(x)
                poly = quot
                if len(poly) == 1:
                    break
    return roots


def rational_mod(x: Fraction | int, m: int) -> int:
    x = Fraction(x)
    return x.numerator * inverse_mod(x.denominator, m) % m
