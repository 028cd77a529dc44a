"""Mod-p congruence evidence: Sturm bounds, oldform stripping, coefficient sweeps, residual images."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import PolyModP, factor, primes_up_to
from .curves import HeckeCoefficients, frobenius_is_scalar_mod, WeierstrassModel, minimal_model_Q
from .local_data import conductor_Q

SUPPORTED_IMAGE_PRIMES = (3, 5, 7)
OBSTRUCTION_SAMPLE = 30


@dataclass(frozen=True)
class SturmData:
    level: int
    weight: int
    index: int
    formula_bound: int
    conservative_bound: int


def sturm_data(N: int, k: int = 2) -> SturmData:
    """Index N^2 prod(1 - l^-2) over l | N, with bounds index/12 + 1 and index + 1."""
    if N < 1:
        raise ValueError("level must be positive")
    index = Fraction(N * N)
    for ell in factor(N) if N > 1 else ():
        index *= 1 - Fraction(1, ell * ell)
    if index.denominator != 1:
        raise AssertionError("index is not an integer")
    index = int(index)
    return SturmData(N, k, index, -(-index // 12) + 1, index + 1)


def resolve_bound(choice: str | int, sturm: SturmData) -> int:
    if isinstance(choice, int):
        return choice
    if choice == "formula":
        return sturm.formula_bound
    if choice == "conservative":
        return sturm.conservative_bound
    return int(choice)


def adjusted_coefficient(coeffs: HeckeCoefficients | Sequence[int], n: int, strip: Iterable[int]) -> int:
    """a_n of prod_{l in strip} (1 - V_l) f, where V_l f(z) = f(l z)."""
    get = coeffs.a_n if isinstance(coeffs, HeckeCoefficients) else coeffs.__getitem__
    total = 0
    strip = sorted(set(strip))
    for r in range(len(strip) + 1):
        for subset in itertools.combinations(strip, r):
            m = math.prod(subset)
            if n % m == 0:
                total += (-1) ** r * get(n // m)
    return total


def auto_strip_sets(E1: WeierstrassModel, E2: WeierstrassModel) -> tuple[frozenset[int], frozenset[int]]:
    """Strip l from the curve whose conductor exponent at l is smaller and at most 1."""
    n1, n2 = conductor_Q(E1), conductor_Q(E2)
    s1, s2 = set(), set()
    for ell in set(n1) | set(n2):
        e1, e2 = n1.get(ell, 0), n2.get(ell, 0)
        if e1 < e2 and e1 <= 1:
            s1.add(ell)
        elif e2 < e1 and e2 <= 1:
            s2.add(ell)
    return frozenset(s1), frozenset(s2)


@dataclass(frozen=True)
class CongruenceReport:
    p: int
    bound: int
    strip: tuple[tuple[int, ...], tuple[int, ...]]
    checked: int
    verdict: str  # "pass" or "fail"
    first_failure: int | None = None
    failure_values: tuple[int, int] | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def summary(self) -> dict:
        out = {
            "p": self.p,
            "bound": self.bound,
            "strip_E1": list(self.strip[0]),
            "strip_E2": list(self.strip[1]),
            "checked": self.checked,
            "verdict": self.verdict,
        }
        if self.first_failure is not None:
            out["first_failure"] = self.first_failure
            out["failure_values"] = list(self.failure_values)
        return out


def _adjusted_list(an: list[int], strip: Iterable[int]) -> list[int]:
    out = list(an)
    for ell in sorted(set(strip)):
        prev = out
        out = [prev[n] - (prev[n // ell] if n % ell == 0 else 0) for n in range(len(prev))]
    return out


def verify_congruence(E1: WeierstrassModel | HeckeCoefficients, E2: WeierstrassModel | HeckeCoefficients,
                      p: int, bound: int, strip_sets=(frozenset(), frozenset()),
                      workers: int = 1) -> CongruenceReport:
    if bound < 1:
        raise ValueError("bound must be at least 1")
    h1 = E1 if isinstance(E1, HeckeCoefficients) else HeckeCoefficients(E1)
    h2 = E2 if isinstance(E2, HeckeCoefficients) else HeckeCoefficients(E2)
    s1, s2 = (tuple(sorted(s)) for s in strip_sets)
    g1 = _adjusted_list(h1.an_list(bound, workers=workers), s1)
    g2 = _adjusted_list(h2.an_list(bound, workers=workers), s2)
    for n in range(1, bound + 1):
        if (g1[n] - g2[n]) % p:
            return CongruenceReport(p, bound, (s1, s2), n, "fail", n, (g1[n], g2[n]))
    return CongruenceReport(p, bound, (s1, s2), bound, "pass")


# ---------------------------------------------------------------------------
# residual image


@dataclass(frozen=True)
class Witness:
    ell: int
    trace: int  # a_ell mod p
    det: int  # ell mod p
    nonscalar: bool | None = None  # only recorded for a repeated eigenvalue +-1

    def as_list(self) -> list:
        out = [self.ell, self.trace, self.det]
        return out if self.nonscalar is None else out + [self.nonscalar]


@dataclass(frozen=True)
class ImageEvidence:
    p: int
    verdict: str  # "surjective", "obstructed", "undetermined"
    obstruction: str | None = None
    witnesses: dict = field(default_factory=dict, hash=False)
    sampled: int = 0

    def summary(self) -> dict:
        out = {"p": self.p, "verdict": self.verdict, "sampled": self.sampled,
               "witnesses": {k: w.as_list() for k, w in sorted(self.witnesses.items())}}
        if self.obstruction:
            out["obstruction"] = self.obstruction
        return out


def _charpoly(w: Witness, p: int) -> PolyModP:
    return PolyModP(p, (w.det, -w.trace, 1))


def excludes(subgroup: str, w: Witness, p: int) -> bool:
    """Whether a Frobenius with this (trace, det) cannot lie in the given maximal subgroup class."""
    f = _charpoly(w, p)
    irreducible = f.is_irreducible()
    if subgroup == "borel":
        return irreducible
    if subgroup == "normalizer-split-cartan":
        return irreducible and w.trace % p != 0
    if subgroup == "normalizer-nonsplit-cartan":
        disc = (w.trace * w.trace - 4 * w.det) % p
        if disc == 0:
            # a non-scalar element with a repeated eigenvalue lies in no nonsplit Cartan normalizer
            return bool(w.nonscalar)
        return not irreducible and w.trace % p != 0
    if subgroup == "exceptional":
        if p == 3:
            return True  # no proper exceptional subgroup has surjective determinant
        u = w.trace * w.trace * pow(w.det, -1, p) % p
        # u in {0, 1, 2, 4} <-> projective order 2, 3, 4, 1 or p
        return u not in (0, 1, 2, 4)
    raise ValueError(subgroup)


NONSCALAR_TEST_BOUND = 500


def _with_scalar_test(h: HeckeCoefficients, w: Witness, p: int) -> Witness:
    if (w.trace * w.trace - 4 * w.det) % p:
        return w
    eigen = w.trace * pow(2, -1, p) % p
    if eigen not in (1, p - 1):
        return w
    return Witness(w.ell, w.trace, w.det, not frobenius_is_scalar_mod(h.model, w.ell, p, eigen))


SUBGROUP_CLASSES = ("borel", "normalizer-split-cartan", "normalizer-nonsplit-cartan", "exceptional")


def residual_image_surjective(E: WeierstrassModel | HeckeCoefficients, p: int,
                              sample_bound: int) -> ImageEvidence:
    if p not in SUPPORTED_IMAGE_PRIMES:
        raise ValueError(f"residual image classification is only tabulated for p in {SUPPORTED_IMAGE_PRIMES}")
    h = E if isinstance(E, HeckeCoefficients) else HeckeCoefficients(E)
    witnesses: dict[str, Witness] = {}
    sampled = 0
    for ell in primes_up_to(sample_bound):
        if ell == p or ell in h.bad_primes:
            continue
        sampled += 1
        w = Witness(ell, h.ap(ell) % p, ell % p)
        if "normalizer-nonsplit-cartan" not in witnesses and ell >= 5 and ell <= NONSCALAR_TEST_BOUND:
            w = _with_scalar_test(h, w, p)
        for cls in SUBGROUP_CLASSES:
            if cls not in witnesses and excludes(cls, w, p):
                witnesses[cls] = w
        if len(witnesses) == len(SUBGROUP_CLASSES):
            return ImageEvidence(p, "surjective", None, witnesses, sampled)
    missing = [c for c in SUBGROUP_CLASSES if c not in witnesses]
    if sampled >= OBSTRUCTION_SAMPLE:
        return ImageEvidence(p, "obstructed", missing[0], witnesses, sampled)
    return ImageEvidence(p, "undetermined", None, witnesses, sampled)


def comparison_level(E1: WeierstrassModel, E2: WeierstrassModel) -> int:
    n1 = math.prod(l**e for l, e in conductor_Q(E1).items())
    n2 = math.prod(l**e for l, e in conductor_Q(E2).items())
    return math.lcm(n1, n2)
