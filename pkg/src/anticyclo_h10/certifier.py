"""Hypothesis-by-hypothesis certification for a p-congruent pair over an imaginary quadratic field."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

from . import __version__
from .algebra import padic_valuation, squarefree_part
from .anticyclo import BrinkParams, UnsupportedParameters, decompose, is_finitely_decomposed, sigma_E_v
from .congruence import (
    auto_strip_sets,
    comparison_level,
    residual_image_surjective,
    resolve_bound,
    sturm_data,
    verify_congruence,
)
from .curves import HeckeCoefficients, WeierstrassModel, bad_primes_Q, minimal_model_Q, torsion_p_vanishes_over_K
from .local_data import (
    ReductionKind,
    check_override,
    d_v,
    local_data_Q,
    local_l_factor,
    sigma_set,
    tamagawa_p_part,
    tate_algorithm,
)
from .numberfield import ImagQuadField, NoPrimitiveSolution, Splitting, UnsupportedField, splitting_in_K

SCHEMA_VERSION = "1"


class Inapplicable(ValueError):
    pass


class Provenance(str, Enum):
    COMPUTED = "computed"
    LMFDB = "ingested-lmfdb"
    USER = "ingested-user"
    UNDETERMINED = "undetermined"


# weakest wins when data are combined
_STRENGTH = {Provenance.COMPUTED: 3, Provenance.LMFDB: 2, Provenance.USER: 1, Provenance.UNDETERMINED: 0}


@dataclass(frozen=True)
class ExternalDatum:
    name: str
    value: int | None
    provenance: Provenance
    citation: str = ""

    @property
    def known(self) -> bool:
        return self.value is not None and self.provenance is not Provenance.UNDETERMINED

    def to_dict(self) -> dict:
        return {"name": self.name, "value": None if self.value is None else str(self.value),
                "provenance": self.provenance.value, "citation": self.citation}


def rank_over_K_from_twists(rank_Q: ExternalDatum | None, rank_twist_Q: ExternalDatum | None,
                            name: str = "rank_K") -> ExternalDatum:
    """rank E(K) = rank E(Q) + rank E^d(Q) for K = Q(sqrt(d))."""
    if rank_Q is None or rank_twist_Q is None or not (rank_Q.known and rank_twist_Q.known):
        return ExternalDatum(name, None, Provenance.UNDETERMINED, "missing twist rank")
    weakest = min((rank_Q.provenance, rank_twist_Q.provenance), key=_STRENGTH.__getitem__)
    return ExternalDatum(name, rank_Q.value + rank_twist_Q.value, weakest,
                         f"{rank_Q.name} + {rank_twist_Q.name}")


# ---------------------------------------------------------------------------
# Euler characteristic route


@dataclass(frozen=True)
class EulerFactors:
    sha: int
    reduction: int
    tamagawa: int

    @property
    def product(self) -> int:
        return self.sha * self.reduction * self.tamagawa

    def as_tuple(self) -> tuple[int, int, int]:
        return self.sha, self.reduction, self.tamagawa


def _p_part(n: int, p: int) -> int:
    return p ** padic_valuation(n, p)


def primes_above_p_counts(E: WeierstrassModel, K: ImagQuadField, p: int) -> dict[str, int]:
    out = {}
    for P in K.primes_above(p):
        data = tate_algorithm(minimal_model_Q(E), P, p)
        if data.kind is not ReductionKind.GOOD:
            raise Inapplicable(f"bad reduction at {P.label}")
        out[P.label] = data.q_v + 1 - data.a_v
    return out


def omega_bad_local_data(E: WeierstrassModel, K: ImagQuadField, p: int) -> list:
    """Local data of E at its bad primes v of K with v not above p and finitely decomposed."""
    E = minimal_model_Q(E)
    out = []
    for ell in bad_primes_Q(E):
        if ell == p or splitting_in_K(ell, K) is not Splitting.SPLIT:
            continue
        for v in K.primes_above(ell):
            data = tate_algorithm(E, v, p)
            if data.kind is not ReductionKind.GOOD:
                out.append(data)
    return out


def euler_characteristic_factors(E1: WeierstrassModel, K: ImagQuadField, p: int, sha: ExternalDatum,
                                 tamagawa_data: Sequence | None = None, rank_K: int = 0) -> EulerFactors:
    if rank_K != 0:
        raise Inapplicable("the Euler characteristic route needs rank E(K) = 0")
    if not sha.known:
        raise Inapplicable("Sha datum missing")
    counts = primes_above_p_counts(E1, K, p)
    reduction = _p_part(math.prod(counts.values()) ** 2, p)
    if tamagawa_data is None:
        tamagawa_data = omega_bad_local_data(E1, K, p)
    tam = math.prod(tamagawa_p_part(d.tamagawa, p) for d in tamagawa_data)
    return EulerFactors(_p_part(sha.value, p), reduction, tam)


def mu_lambda_vanishing(factors: EulerFactors | None) -> bool | None:
    """True iff the Euler characteristic is a p-adic unit; None when it could not be assembled."""
    if factors is None:
        return None
    return factors.product == 1


# ---------------------------------------------------------------------------
# lambda transfer and the rank equation


@dataclass(frozen=True)
class SigmaEntry:
    prime: str
    ell: int
    finitely_decomposed: bool
    s_v: int | None
    d_E1: int
    d_E2: int

    @property
    def contribution(self) -> int:
        if self.s_v is None:
            raise ValueError(f"{self.prime} is not finitely decomposed")
        return sigma_E_v(self.s_v, self.d_E1) - sigma_E_v(self.s_v, self.d_E2)

    def to_dict(self) -> dict:
        return {"prime": self.prime, "ell": str(self.ell), "finitely_decomposed": self.finitely_decomposed,
                "s_v": None if self.s_v is None else str(self.s_v),
                "d_E1": str(self.d_E1), "d_E2": str(self.d_E2)}


class HypothesisFailure(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class LambdaReport:
    lambda_E1: int
    difference: int
    lambda_E2: int
    rank_E2_K: int | None
    equal: bool | None

    def to_dict(self) -> dict:
        return {"lambda_E1": str(self.lambda_E1), "difference": str(self.difference),
                "lambda_E2": str(self.lambda_E2),
                "rank_E2_K": None if self.rank_E2_K is None else str(self.rank_E2_K),
                "equal": self.equal}


def sigma_sum(sigma_data: Sequence[SigmaEntry]) -> int:
    return sum(e.contribution for e in sigma_data)


def lambda_transfer(lambda_E1: int, sigma_data: Sequence[SigmaEntry], rank_E2_K: int | None = None) -> LambdaReport:
    for e in sigma_data:
        if not e.finitely_decomposed:
            raise HypothesisFailure(5, f"{e.prime} is not finitely decomposed")
    diff = sigma_sum(sigma_data)
    lam2 = lambda_E1 + diff
    return LambdaReport(lambda_E1, diff, lam2, rank_E2_K, None if rank_E2_K is None else lam2 == rank_E2_K)


def rank_equation_check(rank_E2_K: int, sigma_data: Sequence[SigmaEntry]) -> bool:
    return rank_E2_K == sigma_sum(sigma_data)


# ---------------------------------------------------------------------------
# certificate


class Status(str, Enum):
    COMPUTED = "verified-computed"
    INGESTED = "verified-ingested"
    FAILED = "failed"
    UNDETERMINED = "undetermined"
    UNSUPPORTED = "unsupported"

    @property
    def verified(self) -> bool:
        return self in (Status.COMPUTED, Status.INGESTED)


HYPOTHESIS_NAMES = {
    1: "good ordinary reduction at both primes above p",
    2: "isomorphic residual representations",
    3: "rank E1(K) = 0 and rank E2(K) > 0",
    4: "no K-rational p-torsion",
    5: "Sigma finitely decomposed in the anticyclotomic tower",
    6: "Sha(E1/K)[p^inf] = 0",
    7: "E1(F_P)[p] = 0 at the primes above p",
    8: "trivial Tamagawa p-parts of E1 on Omega_K",
}

NEGATIVE = "negative-answer-all-layers"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class HypothesisEntry:
    index: int
    status: Status
    evidence: dict

    def to_dict(self) -> dict:
        return {"index": str(self.index), "name": HYPOTHESIS_NAMES.get(self.index, "standing assumptions"),
                "status": self.status.value, "evidence": _canon(self.evidence)}


@dataclass
class Certificate:
    instance: dict
    hypotheses: list[HypothesisEntry]
    rank_equation: dict
    lambda_report: dict | None
    conclusion: str
    extras: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "instance": _canon(self.instance),
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "rank_equation": _canon(self.rank_equation),
            "lambda_report": _canon(self.lambda_report),
            "extras": _canon(self.extras),
            "conclusion": self.conclusion,
            "toolchain": {"package": "anticyclo-h10", "version": __version__},
        }

    def status(self, i: int) -> Status:
        return next(h.status for h in self.hypotheses if h.index == i)


def _canon(x: Any) -> Any:
    """Integers become decimal strings; containers are rebuilt with sorted keys."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, Mapping):
        return {str(k): _canon(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_canon(v) for v in x]
    if hasattr(x, "summary"):
        return _canon(x.summary())
    if hasattr(x, "to_dict"):
        return _canon(x.to_dict())
    raise TypeError(f"cannot canonicalise {type(x).__name__}")


def decide(entries: Sequence[HypothesisEntry], rank_equation: bool | None) -> str:
    """Conclusion from hypothesis statuses and the rank equation verdict."""
    for h in entries:
        if h.status is Status.FAILED:
            return f"refuted-hypothesis({h.index if h.index else 'standing'})"
    if rank_equation is False:
        return "refuted-hypothesis(rank-equation)"
    indices = {h.index for h in entries if h.status.verified}
    if all(i in indices for i in HYPOTHESIS_NAMES) and rank_equation is True:
        return NEGATIVE
    return INCONCLUSIVE


@dataclass(frozen=True)
class CertifyOptions:
    sturm_bound: str | int = "conservative"
    workers: int = 1
    image_sample_bound: int = 1000
    torsion_search_bound: int = 1000
    nu: int | None = None
    local_overrides: Mapping = field(default_factory=dict)


def _external(externals: Mapping[str, ExternalDatum], name: str) -> ExternalDatum | None:
    return externals.get(name)


def _apply_overrides(E: WeierstrassModel, overrides: Mapping, p: int) -> dict:
    """Cross-check injected local data over Q; mismatches raise."""
    checked = {}
    for ell, record in sorted(overrides.items(), key=lambda kv: int(kv[0])):
        data = local_data_Q(E, int(ell), p)
        check_override(data, record)
        checked[str(ell)] = data.summary()
    return checked


def certify(E1: WeierstrassModel, E2: WeierstrassModel, K: ImagQuadField, p: int,
            externals: Mapping[str, ExternalDatum], options: CertifyOptions = CertifyOptions(),
            labels: tuple[str, str] = ("E1", "E2")) -> Certificate:
    E1, E2 = minimal_model_Q(E1), minimal_model_Q(E2)
    instance = {"p": p, "D": K.D, "E1": {"label": labels[0], "ainvs": list(E1.int_ainvs())},
                "E2": {"label": labels[1], "ainvs": list(E2.int_ainvs())}}
    entries: list[HypothesisEntry] = []

    standing = {"p_odd": p % 2 == 1, "p_splitting": splitting_in_K(p, K).value}
    if p % 2 == 0 or splitting_in_K(p, K) is not Splitting.SPLIT:
        entries.append(HypothesisEntry(0, Status.FAILED, standing))
        return Certificate(instance, entries, {"verdict": None}, None, decide(entries, None))
    entries.append(HypothesisEntry(0, Status.COMPUTED, standing))

    extras: dict = {}
    if options.local_overrides:
        extras["local_overrides_checked"] = {
            key: _apply_overrides(E, options.local_overrides.get(key, {}), p)
            for key, E in (("E1", E1), ("E2", E2))
        }
    h1, h2 = HeckeCoefficients(E1, labels[0]), HeckeCoefficients(E2, labels[1])

    # (1) ordinarity at both primes above p
    ev1 = {}
    ok1 = True
    for name, E in (("E1", E1), ("E2", E2)):
        row = {}
        for P in K.primes_above(p):
            data = tate_algorithm(E, P, p)
            good = data.kind is ReductionKind.GOOD
            ordinary = good and data.a_v % p != 0
            row[P.label] = {"kind": data.kind.value, "a_v": data.a_v, "ordinary": ordinary}
            ok1 &= ordinary
        ev1[name] = row
    entries.append(HypothesisEntry(1, Status.COMPUTED if ok1 else Status.FAILED, ev1))

    # (2) congruence and irreducibility
    level = comparison_level(E1, E2)
    sturm = sturm_data(level)
    bound = resolve_bound(options.sturm_bound, sturm)
    strips = auto_strip_sets(E1, E2)
    report = verify_congruence(h1, h2, p, bound, strips, workers=options.workers)
    images = [residual_image_surjective(h, p, options.image_sample_bound) for h in (h1, h2)]
    ev2 = {"sturm": sturm.__dict__, "report": report, "image_E1": images[0], "image_E2": images[1]}
    if not report.passed:
        st2 = Status.FAILED
    elif bound >= sturm.formula_bound and all(im.verdict == "surjective" for im in images):
        st2 = Status.COMPUTED
    else:
        st2 = Status.UNDETERMINED
    entries.append(HypothesisEntry(2, st2, ev2))

    # (3) ranks over K
    d = squarefree_part(K.discriminant)

    def rank_K(tag: str) -> ExternalDatum:
        direct = _external(externals, f"rank_{tag}_K")
        if direct is not None and direct.known:
            return direct
        return rank_over_K_from_twists(_external(externals, f"rank_{tag}_Q"),
                                       _external(externals, f"rank_{tag}_twist_Q"), f"rank_{tag}_K")

    r1, r2 = rank_K("E1"), rank_K("E2")
    ev3 = {"twist_d": d, "rank_E1_K": r1.to_dict(), "rank_E2_K": r2.to_dict()}
    if not (r1.known and r2.known):
        st3 = Status.UNDETERMINED
    elif r1.value == 0 and r2.value > 0:
        st3 = Status.COMPUTED if {r1.provenance, r2.provenance} == {Provenance.COMPUTED} else Status.INGESTED
    else:
        st3 = Status.FAILED
    entries.append(HypothesisEntry(3, st3, ev3))

    # (4) torsion
    tors = [torsion_p_vanishes_over_K(E, p, K, options.torsion_search_bound) for E in (E1, E2)]
    ev4 = {name: {"status": t.status, "witness": t.witness, "count": t.count}
           for name, t in zip(("E1", "E2"), tors)}
    st4 = Status.COMPUTED if all(t.status == "proved" for t in tors) else Status.UNDETERMINED
    entries.append(HypothesisEntry(4, st4, ev4))

    # (5) Sigma
    sigma_data: list[SigmaEntry] = []
    ev5: dict = {}
    st5 = Status.COMPUTED
    try:
        sig = sigma_set(E1, E2, K, p)
        params = None
        for v in sig.primes:
            loc1, loc2 = sig.local[v.label]
            dv1 = d_v(local_l_factor(loc1, p), v.ell, p)
            dv2 = d_v(local_l_factor(loc2, p), v.ell, p)
            fin = is_finitely_decomposed(v, K, p)
            s = None
            if fin:
                params = params or BrinkParams.for_field(K, p, options.nu)
                dec = decompose(v, K, p, params)
                s = dec.s_v
                ev5.setdefault("decomposition", {})[v.label] = dec.summary()
            else:
                st5 = Status.FAILED
            sigma_data.append(SigmaEntry(v.label, v.ell, fin, s, dv1, dv2))
        ev5["bad_primes_K"] = list(sig.bad_primes)
        ev5["members"] = [{"prime": m.label, "curve": m.curve, "reason": m.reason.value} for m in sig.members]
        ev5["sigma"] = [e.to_dict() for e in sigma_data]
    except (UnsupportedField, UnsupportedParameters, NoPrimitiveSolution) as exc:
        st5 = Status.UNSUPPORTED
        ev5["error"] = str(exc)
    entries.append(HypothesisEntry(5, st5, ev5))

    # (6) Sha
    sha = _external(externals, "sha_p_part_E1_K") or ExternalDatum("sha_p_part_E1_K", None, Provenance.UNDETERMINED)
    if not sha.known:
        st6 = Status.UNDETERMINED
    elif sha.value == 1:
        st6 = Status.COMPUTED if sha.provenance is Provenance.COMPUTED else Status.INGESTED
    else:
        st6 = Status.FAILED
    entries.append(HypothesisEntry(6, st6, {"sha_p_part_E1_K": sha.to_dict()}))

    # (7) E1(F_P)[p] = 0
    try:
        counts = primes_above_p_counts(E1, K, p)
        st7 = Status.COMPUTED if all(c % p for c in counts.values()) else Status.FAILED
        ev7 = {"counts": counts}
    except Inapplicable as exc:
        st7, ev7 = Status.FAILED, {"error": str(exc)}
    entries.append(HypothesisEntry(7, st7, ev7))

    # (8) Tamagawa p-parts on Omega_K
    omega = omega_bad_local_data(E1, K, p)
    ev8 = {"omega_bad": [dd.summary() for dd in omega],
           "tamagawa_product_Q": math.prod(local_data_Q(E1, ell).tamagawa for ell in bad_primes_Q(E1))}
    st8 = Status.COMPUTED if all(dd.tamagawa_p == 1 for dd in omega) else Status.FAILED
    entries.append(HypothesisEntry(8, st8, ev8))

    # rank equation
    rank_eq: dict = {"rank_E2_K": r2.value if r2.known else None}
    eq_verdict = None
    if st5 is Status.COMPUTED:
        terms = [{"prime": e.prime, "s_v": e.s_v, "d_E1": e.d_E1, "d_E2": e.d_E2} for e in sigma_data]
        rank_eq["terms"] = terms
        rank_eq["sum"] = sigma_sum(sigma_data)
        if r2.known:
            eq_verdict = rank_equation_check(r2.value, sigma_data)
        # parity: over Q with Sigma closed under conjugation the sum is even
        labels_in = {e.prime for e in sigma_data}
        closed = all(K.conjugate_prime(v).label in labels_in for v in sig.primes)
        if closed and all(e.finitely_decomposed for e in sigma_data):
            rank_eq["parity_even"] = rank_eq["sum"] % 2 == 0
            if not rank_eq["parity_even"]:
                eq_verdict = None
                rank_eq["parity_error"] = "odd Sigma-sum for curves over Q"
    rank_eq["verdict"] = eq_verdict

    # lambda report through the Euler characteristic route
    lam = None
    try:
        factors = euler_characteristic_factors(E1, K, p, sha, omega, r1.value if r1.known else -1)
        vanish = mu_lambda_vanishing(factors)
        extras["euler_factors"] = {"sha": factors.sha, "reduction": factors.reduction,
                                   "tamagawa": factors.tamagawa, "product": factors.product,
                                   "mu_lambda_vanish": vanish}
        if vanish and st5 is Status.COMPUTED:
            lam = lambda_transfer(0, sigma_data, r2.value if r2.known else None).to_dict()
    except Inapplicable as exc:
        extras["euler_factors"] = {"inapplicable": str(exc)}

    return Certificate(instance, entries, rank_eq, lam, decide(entries, eq_verdict), extras)
