"""Decomposition of primes of K in the anticyclotomic Z_p-tower (Brink's criterion)."""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import is_prime, padic_valuation
from .numberfield import (
    ImagQuadField,
    PrimeIdeal,
    QuadElem,
    Splitting,
    class_number,
    quad_power,
    solve_norm_equation,
    splitting_in_K,
)


class UnsupportedParameters(ValueError):
    pass


@dataclass(frozen=True)
class BrinkParams:
    Delta: int
    p: int
    h: int
    mu: int
    nu: int | None = None

    @classmethod
    def for_field(cls, K: ImagQuadField, p: int, nu: int | None = None) -> BrinkParams:
        h = class_number(K)
        mu = padic_valuation(h, p)
        if nu is None and mu == 0:
            nu = 0
        return cls(K.D, p, h, mu, nu)

    def check(self) -> None:
        if self.Delta % 4 == 3:
            raise UnsupportedParameters(f"Delta = {self.Delta} = 3 mod 4 is outside the supported branch")
        if self.nu is None:
            raise UnsupportedParameters("p divides h: nu must be supplied")
        if self.Delta % self.p == 0:
            raise UnsupportedParameters("p divides Delta")


@dataclass(frozen=True)
class DecompositionResult:
    prime: str
    ell: int
    finitely_decomposed: bool
    t: int | None = None
    s_v: int | None = None
    a: int | None = None
    b: int | None = None
    a_star: int | None = None
    b_star: int | None = None

    def summary(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def is_finitely_decomposed(v: PrimeIdeal, K: ImagQuadField, p: int) -> bool:
    """True iff the residue characteristic splits in K (primes above p included)."""
    return splitting_in_K(v.ell, K) is Splitting.SPLIT


def splits_at_level(b_star: int, n: int, params: BrinkParams) -> bool:
    """Whether v splits completely in K_n: b* = 0 mod p^(n + 1 + mu - nu)."""
    if n == 0:
        return True
    return b_star % params.p ** (n + 1 + params.mu - params.nu) == 0


def depth_from_b_star(b_star: int, params: BrinkParams) -> int:
    if b_star == 0:
        raise ValueError("b* = 0: v would split completely in the whole tower")
    return max(0, padic_valuation(b_star, params.p) - 1 - params.mu + params.nu)


def brink_data(ell: int, params: BrinkParams) -> tuple[int, int, int, int]:
    """(a, b, a*, b*) with a^2 + Delta b^2 = ell^h and a* + b* omega = (a + b omega)^(p-1)."""
    params.check()
    a, b = solve_norm_equation(ell**params.h, params.Delta)
    star = quad_power(QuadElem(a, b), params.p - 1, params.Delta)
    return a, b, int(star.a), int(star.b)


def brink_split_depth(v: PrimeIdeal, K: ImagQuadField, p: int, params: BrinkParams) -> int:
    return decompose(v, K, p, params).t


def decompose(v: PrimeIdeal, K: ImagQuadField, p: int, params: BrinkParams | None = None) -> DecompositionResult:
    if not is_finitely_decomposed(v, K, p):
        return DecompositionResult(v.label, v.ell, False)
    if v.ell == p:
        raise UnsupportedParameters("no split depth is computed for primes above p")
    if p == 2 or not is_prime(p):
        raise UnsupportedParameters("p must be an odd prime")
    if splitting_in_K(p, K) is not Splitting.SPLIT:
        raise UnsupportedParameters(f"{p} does not split in K")
    params = params or BrinkParams.for_field(K, p)
    a, b, a_star, b_star = brink_data(v.ell, params)
    t = depth_from_b_star(b_star, params)
    # agree with the level-by-level criterion
    if not all(splits_at_level(b_star, n, params) for n in range(t + 1)) or splits_at_level(b_star, t + 1, params):
        raise AssertionError("split depth disagrees with the per-level criterion")
    return DecompositionResult(v.label, v.ell, True, t, s_v(t, p), a, b, a_star, b_star)


def s_v(t: int, p: int) -> int:
    if t < 0:
        raise ValueError("t must be non-negative")
    return p**t


def sigma_E_v(s: int, d: int) -> int:
    return s * d
