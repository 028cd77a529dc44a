"""Weierstrass models, reduction mod primes, point counts and Hecke coefficients."""

from __future__ import annotations

import math
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    FFElem,
    FiniteField,
    factor,
    is_prime,
    kronecker_symbol,
    padic_valuation,
    primes_up_to,
)
from .numberfield import FieldElem, ImagQuadField, NumberField, QQ, Splitting, splitting_in_K


class SingularModel(ValueError):
    pass


class NotApplicable(ValueError):
    pass


def _b_invariants(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, (FieldElem, FFElem)) else x == 0


@dataclass(frozen=True)
class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.

    Coefficients are Fractions for curves over Q and FieldElems after base change.
    """

    ainvs: tuple

    def __post_init__(self):
        if len(self.ainvs) != 5:
            raise ValueError("a Weierstrass model needs five coefficients")
        if _is_zero(self.discriminant):
            raise SingularModel("singular model")

    @classmethod
    def from_ints(cls, ainvs: Sequence[int | str | Fraction]) -> WeierstrassModel:
        return cls(tuple(Fraction(a) for a in ainvs))

    @property
    def base_field(self) -> NumberField:
        a = self.ainvs[0]
        return a.field if isinstance(a, FieldElem) else QQ

    @property
    def is_over_Q(self) -> bool:
        return not isinstance(self.ainvs[0], FieldElem)

    @property
    def b_invariants(self):
        return _b_invariants(*self.ainvs)

    @property
    def c4(self):
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self):
        b2, b4, b6, _ = self.b_invariants
        return -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self):
        c4 = self.c4
        return c4 * c4 * c4 / self.discriminant

    def is_integral(self) -> bool:
        if self.is_over_Q:
            return all(Fraction(a).denominator == 1 for a in self.ainvs)
        return all(a.is_integral() for a in self.ainvs)

    def int_ainvs(self) -> tuple[int, ...]:
        if not (self.is_over_Q and self.is_integral()):
            raise ValueError("model is not an integral model over Q")
        return tuple(int(a) for a in self.ainvs)

    def transform(self, u=1, r=0, s=0, t=0) -> WeierstrassModel:
        """Model for the substitution x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""
        a1, a2, a3, a4, a6 = self.ainvs
        na1 = a1 + 2 * s
        na2 = a2 - s * a1 + 3 * r - s * s
        na3 = a3 + r * a1 + 2 * t
        na4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t
        na6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1
        if isinstance(u, int):
            u = Fraction(u)
        return WeierstrassModel((na1 / u, na2 / u**2, na3 / u**3, na4 / u**4, na6 / u**6))

    def base_change(self, L: NumberField) -> WeierstrassModel:
        return WeierstrassModel(tuple(L(a) for a in self.ainvs))

    def reduce_mod(self, ell: int) -> CurveOverFiniteField:
        F = FiniteField.prime_field(ell)
        return CurveOverFiniteField(F, tuple(F(a) for a in self.ainvs))

    def __str__(self) -> str:
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"


def invariants(model: WeierstrassModel):
    """(c4, c6, discriminant, j)."""
    return model.c4, model.c6, model.discriminant, model.j_invariant


# ---------------------------------------------------------------------------
# minimal models over Q


def _kraus_ok(c4: int, c6: int, p: int) -> bool:
    if p == 3:
        return padic_valuation(c6, 3) != 2
    if p == 2:
        if c6 % 4 == 3:
            return True
        return padic_valuation(c4, 2) >= 4 and c6 % 32 in (0, 8)
    return True


def model_from_c4c6(c4: int, c6: int) -> WeierstrassModel:
    """Reduced integral model with the given invariants (they must satisfy Kraus' conditions)."""
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4, r4 = divmod(b2 * b2 - c4, 24)
    b6, r6 = divmod(-(b2**3) + 36 * b2 * b4 - c6, 216)
    if r4 or r6:
        raise ValueError(f"({c4}, {c6}) are not invariants of an integral model")
    a1 = b2 % 2
    a3 = b6 % 2
    a2 = (b2 - a1) // 4
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    return WeierstrassModel.from_ints((a1, a2, a3, a4, a6))


def minimal_model_Q(model: WeierstrassModel) -> WeierstrassModel:
    """Global minimal model, normalised with a1, a3 in {0, 1} and a2 in {-1, 0, 1}."""
    if not model.is_over_Q:
        raise ValueError("minimal_model_Q needs a model over Q")
    den = math.lcm(*(Fraction(a).denominator for a in model.ainvs))
    integral = model.transform(u=Fraction(1, den)) if den > 1 else model
    c4, c6, disc = int(integral.c4), int(integral.c6), int(integral.discriminant)
    u = 1
    for p, vd in factor(disc).items():
        if vd < 12:
            continue
        d = vd // 12
        if c4:
            d = min(d, padic_valuation(c4, p) // 4)
        if c6:
            d = min(d, padic_valuation(c6, p) // 6)
        while d > 0 and not _kraus_ok(c4 // p ** (4 * d), c6 // p ** (6 * d), p):
            d -= 1
        u *= p**d
    return model_from_c4c6(c4 // u**4, c6 // u**6)


def is_isomorphic_Q(E1: WeierstrassModel, E2: WeierstrassModel) -> bool:
    return minimal_model_Q(E1).ainvs == minimal_model_Q(E2).ainvs


def quadratic_twist(model: WeierstrassModel, d: int) -> WeierstrassModel:
    if d == 0:
        raise ValueError("twist by 0")
    if any(e > 1 for e in factor(d).values()):
        raise ValueError(f"{d} is not squarefree")
    E = minimal_model_Q(model)
    c4, c6 = int(E.c4), int(E.c6)
    # c4*d^2*6^4, c6*d^3*6^6 always satisfy Kraus; minimise afterwards
    return minimal_model_Q(model_from_c4c6(c4 * d * d * 6**4, c6 * d**3 * 6**6))


# ---------------------------------------------------------------------------
# curves over finite fields and point counting


@dataclass(frozen=True)
class CurveOverFiniteField:
    field: FiniteField
    ainvs: tuple[FFElem, ...]

    @property
    def discriminant(self) -> FFElem:
        b2, b4, b6, b8 = _b_invariants(*self.ainvs)
        return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def is_nonsingular(self) -> bool:
        return not self.discriminant.is_zero()


def _affine_count_odd_prime(b2: int, b4: int, b6: int, ell: int) -> int:
    """Affine points of (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 over F_ell."""
    x = np.arange(ell, dtype=np.int64)
    v = ((4 * x + b2 % ell) * x + (2 * b4) % ell) % ell
    v = (v * x + b6 % ell) % ell
    # 1 + legendre(v) solutions in y
    table = np.zeros(ell, dtype=np.int64)
    table[(x * x) % ell] = 2
    table[0] = 1
    return int(table[v].sum())


def _affine_count_generic(curve: CurveOverFiniteField) -> int:
    F = curve.field
    a1, a2, a3, a4, a6 = curve.ainvs
    elems = list(F)
    if F.char != 2:
        b2, b4, b6, _ = _b_invariants(a1, a2, a3, a4, a6)
        total = 0
        for x in elems:
            rhs = ((4 * x + b2) * x + 2 * b4) * x + b6
            total += 1 if rhs.is_zero() else (2 if rhs.is_square() else 0)
        return total
    total = 0
    for x in elems:
        rhs = ((x + a2) * x + a4) * x + a6
        lin = a1 * x + a3
        total += sum(1 for y in elems if (y * y + lin * y - rhs).is_zero())
    return total


def count_points(curve: CurveOverFiniteField) -> int:
    """#E(F_q), point at infinity included."""
    if not curve.is_nonsingular():
        raise SingularModel("singular reduction; use local data at bad primes")
    F = curve.field
    if F.degree == 1 and F.char != 2:
        b2, b4, b6, _ = _b_invariants(*(a.to_int() for a in curve.ainvs))
        return 1 + _affine_count_odd_prime(b2, b4, b6, F.char)
    return 1 + _affine_count_generic(curve)


def _ap_good(ainvs: tuple[int, ...], ell: int) -> int:
    if ell == 2:
        return 3 - count_points(WeierstrassModel.from_ints(ainvs).reduce_mod(2))
    b2, b4, b6, _ = _b_invariants(*ainvs)
    return ell - _affine_count_odd_prime(b2, b4, b6, ell)


def _ap_chunk(args: tuple[tuple[int, ...], list[int]]) -> list[int]:
    ainvs, primes = args
    return [_ap_good(ainvs, ell) for ell in primes]


# ---------------------------------------------------------------------------
# traces of Frobenius and Hecke coefficients


def bad_primes_Q(model: WeierstrassModel) -> list[int]:
    return sorted(factor(int(minimal_model_Q(model).discriminant)))


def a_ell(model: WeierstrassModel, ell: int) -> int:
    """Trace of Frobenius at ell; +-1 / 0 at multiplicative / additive primes."""
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    E = minimal_model_Q(model)
    if int(E.discriminant) % ell:
        return _ap_good(E.int_ainvs(), ell)
    from .local_data import local_data_Q

    return local_data_Q(E, ell).a_v


class HeckeCoefficients:
    """Coefficients a_n of the newform attached to an elliptic curve over Q.

    The cache only ever receives the value determined by the curve, so
    concurrent fills are idempotent.
    """

    def __init__(self, model: WeierstrassModel, label: str | None = None):
        self.model = minimal_model_Q(model)
        self.label = label
        self.bad_primes = frozenset(bad_primes_Q(self.model))
        self._ap: dict[int, int] = {}
        self._lock = threading.Lock()

    def ap(self, ell: int) -> int:
        val = self._ap.get(ell)
        if val is None:
            val = a_ell(self.model, ell)
            with self._lock:
                self._ap[ell] = val
        return val

    def fill(self, bound: int, workers: int = 1, chunk: int = 512) -> None:
        """Compute a_ell for every prime ell <= bound, optionally in worker processes."""
        todo = [ell for ell in primes_up_to(bound) if ell not in self._ap]
        good = [ell for ell in todo if ell not in self.bad_primes]
        for ell in todo:
            if ell in self.bad_primes:
                self.ap(ell)
        ainvs = self.model.int_ainvs()
        chunks = [good[i : i + chunk] for i in range(0, len(good), chunk)]
        if workers > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_ap_chunk, [(ainvs, c) for c in chunks]))
        else:
            results = [_ap_chunk((ainvs, c)) for c in chunks]
        with self._lock:
            for primes, values in zip(chunks, results):
                self._ap.update(zip(primes, values))

    def _prime_power(self, ell: int, k: int) -> int:
        a = self.ap(ell)
        if ell in self.bad_primes:
            return a**k
        prev, cur = 1, a
        for _ in range(k - 1):
            prev, cur = cur, a * cur - ell * prev
        return cur if k else 1

    def a_n(self, n: int) -> int:
        if n < 1:
            raise ValueError("a_n is defined for n >= 1")
        result = 1
        for ell, k in factor(n).items() if n > 1 else ():
            result *= self._prime_power(ell, k)
        return result

    def an_list(self, bound: int, workers: int = 1) -> list[int]:
        """[a_0 = 0, a_1, ..., a_bound] by a smallest-prime-factor sieve."""
        self.fill(bound, workers=workers)
        spf = list(range(bound + 1))
        for i in range(2, math.isqrt(bound) + 1):
            if spf[i] == i:
                for j in range(i * i, bound + 1, i):
                    if spf[j] == j:
                        spf[j] = i
        an = [0] * (bound + 1)
        if bound >= 1:
            an[1] = 1
        for n in range(2, bound + 1):
            ell = spf[n]
            m = n // ell
            if m % ell:
                an[n] = an[ell] * an[m] if m > 1 else self.ap(ell)
            else:
                # n = ell^k * r with ell not dividing r
                pk, r = ell, m
                while r % ell == 0:
                    pk *= ell
                    r //= ell
                if r > 1:
                    an[n] = an[pk] * an[r]
                elif ell in self.bad_primes:
                    an[n] = an[m] * self.ap(ell)
                else:
                    an[n] = self.ap(ell) * an[m] - ell * an[m // ell]
        return an


def a_n(coeffs: HeckeCoefficients, n: int) -> int:
    return coeffs.a_n(n)


# ---------------------------------------------------------------------------
# ordinarity and torsion


def is_ordinary(model: WeierstrassModel, p: int) -> bool:
    E = minimal_model_Q(model)
    if int(E.discriminant) % p == 0:
        raise NotApplicable(f"bad reduction at {p}: ordinarity not applicable")
    return a_ell(E, p) % p != 0


@dataclass(frozen=True)
class TorsionEvidence:
    status: str  # "proved" or "undetermined"
    witness: int | None = None
    count: int | None = None
    searched: tuple[int, ...] = field(default=(), compare=False)


def torsion_p_vanishes_over_K(model: WeierstrassModel, p: int, K: ImagQuadField,
                              search_bound: int) -> TorsionEvidence:
    """Certify E(K)[p] = 0 through a split good prime ell != p with p not dividing #E(F_ell)."""
    E = minimal_model_Q(model)
    disc = int(E.discriminant)
    searched = []
    for ell in primes_up_to(search_bound):
        if ell == p or disc % ell == 0 or splitting_in_K(ell, K) is not Splitting.SPLIT:
            continue
        searched.append(ell)
        n = ell + 1 - a_ell(E, ell)
        if n % p:
            return TorsionEvidence("proved", ell, n, tuple(searched))
    return TorsionEvidence("undetermined", None, None, tuple(searched))


def twist_trace_sign(d: int, ell: int) -> int:
    return kronecker_symbol(d, ell)


# ---------------------------------------------------------------------------
# explicit group law over prime fields (small ell only)


def _points_mod(ainvs: tuple[int, ...], ell: int) -> list[tuple[int, int] | None]:
    a1, a2, a3, a4, a6 = (a % ell for a in ainvs)
    pts: list[tuple[int, int] | None] = [None]
    for x in range(ell):
        rhs = (((x + a2) * x + a4) * x + a6) % ell
        lin = (a1 * x + a3) % ell
        pts.extend((x, y) for y in range(ell) if (y * y + lin * y - rhs) % ell == 0)
    return pts


def _add_mod(P, Q, ainvs, ell):
    a1, a2, a3, a4, a6 = ainvs
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and (y1 + y2 + a1 * x2 + a3) % ell == 0:
        return None
    if x1 == x2:
        num = 3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1
        den = 2 * y1 + a1 * x1 + a3
    else:
        num, den = y2 - y1, x2 - x1
    lam = num * pow(den, -1, ell) % ell
    nu = (y1 - lam * x1) % ell
    x3 = (lam * lam + a1 * lam - a2 - x1 - x2) % ell
    y3 = (-(lam + a1) * x3 - nu - a3) % ell
    return x3, y3


def _mul_mod(k, P, ainvs, ell):
    R = None
    while k:
        if k & 1:
            R = _add_mod(R, P, ainvs, ell)
        P = _add_mod(P, P, ainvs, ell)
        k >>= 1
    return R


def torsion_subgroup_size(model: WeierstrassModel, ell: int, m: int) -> int:
    """#E(F_ell)[m] for a good prime ell, by enumerating points."""
    E = minimal_model_Q(model)
    ainvs = E.int_ainvs()
    if int(E.discriminant) % ell == 0:
        raise SingularModel(f"bad reduction at {ell}")
    return sum(1 for P in _points_mod(ainvs, ell) if _mul_mod(m, P, ainvs, ell) is None)


def frobenius_is_scalar_mod(model: WeierstrassModel, ell: int, p: int, eigenvalue: int) -> bool:
    """Whether Frob_ell acts on E[p] as the scalar `eigenvalue` (which must be +-1 mod p)."""
    eigenvalue %= p
    if eigenvalue == 1:
        return torsion_subgroup_size(model, ell, p) == p * p
    if eigenvalue == p - 1:
        # -Frob on E[p] is Frob on the twist by a non-residue mod ell
        nonres = next(d for d in range(2, ell) if kronecker_symbol(d, ell) == -1)
        E = minimal_model_Q(model)
        c4, c6 = int(E.c4), int(E.c6)
        tw = model_from_c4c6(c4 * nonres**2 * 6**4, c6 * nonres**3 * 6**6)
        if int(tw.discriminant) % ell == 0 or ell in (2, 3):
            raise NotApplicable("twist test needs ell >= 5")
        return torsion_subgroup_size(tw, ell, p) == p * p
    raise ValueError("only eigenvalues +-1 are supported")
