"""Tate's algorithm over Q, K and K', local L-factors, d_v and the set Sigma."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .algebra import (
    FFElem,
    PolyModP,
    finite_field_roots,
    inverse_mod,
    is_prime,
    padic_valuation,
    root_multiplicity,
)
from .curves import CurveOverFiniteField, WeierstrassModel, bad_primes_Q, count_points, minimal_model_Q
from .numberfield import (
    QQ,
    CompositumField,
    FieldElem,
    ImagQuadField,
    PrimeIdeal,
    UnsupportedField,
    primes_above,
)

VALUATION_CAP = 50


class TateError(RuntimeError):
    """The Tate loop exceeded its valuation cap; carries diagnostics."""


class OverrideMismatch(ValueError):
    pass


class ReductionKind(str, Enum):
    GOOD = "good"
    SPLIT = "split-multiplicative"
    NONSPLIT = "nonsplit-multiplicative"
    ADDITIVE = "additive"

    @property
    def is_multiplicative(self) -> bool:
        return self in (ReductionKind.SPLIT, ReductionKind.NONSPLIT)


@dataclass(frozen=True)
class LocalReductionData:
    prime: PrimeIdeal = field(compare=False)
    prime_label: str
    kind: ReductionKind
    kodaira: str
    v_disc: int
    tamagawa: int
    a_v: int
    q_v: int
    p: int | None = None

    @property
    def tamagawa_p(self) -> int | None:
        return None if self.p is None else tamagawa_p_part(self.tamagawa, self.p)

    def summary(self) -> dict:
        out = {
            "prime": self.prime_label,
            "kind": self.kind.value,
            "kodaira": self.kodaira,
            "v_disc": self.v_disc,
            "tamagawa": self.tamagawa,
            "a_v": self.a_v,
            "q_v": self.q_v,
        }
        if self.p is not None:
            out["tamagawa_p"] = self.tamagawa_p
        return out


def tamagawa_p_part(c_v: int, p: int) -> int:
    if c_v < 1:
        raise ValueError("Tamagawa numbers are positive")
    return p ** padic_valuation(c_v, p)


# ---------------------------------------------------------------------------
# Tate's algorithm


class _Local:
    """Residue-field helpers at a fixed prime."""

    def __init__(self, P: PrimeIdeal):
        self.P = P
        self.F = P.residue_field
        self.pi = P.uniformizer
        self.ell = P.ell

    def val(self, x) -> int | float:
        return self.P.valuation(x)

    def div(self, x) -> bool:
        return self.val(x) > 0

    def red(self, x) -> FFElem:
        return self.P.reduce(x)

    def lift(self, a: FFElem) -> FieldElem:
        return self.P.lift(a)

    def preduce(self, x) -> FieldElem:
        return self.lift(self.red(x))

    def pinv(self, x) -> FieldElem:
        return self.lift(self.red(x).inverse())

    def proot(self, x) -> FieldElem:
        """Lift of the unique ell-th root (ell = 2 or 3)."""
        return self.lift(self.red(x).frobenius_root())

    def quad_has_root(self, a, b, c) -> bool:
        a, b, c = self.red(a), self.red(b), self.red(c)
        if a.is_zero():
            return not b.is_zero() or c.is_zero()
        if self.ell == 2:
            return bool(finite_field_roots([c, b, a], self.F))
        return (b * b - 4 * a * c).is_square()

    def cubic_distinct_roots(self, b, c, d) -> int:
        roots = finite_field_roots([self.red(d), self.red(c), self.red(b), self.F.one()], self.F)
        return len(set(roots))


def _ainvs_over(model: WeierstrassModel, P: PrimeIdeal) -> tuple[FieldElem, ...]:
    L = P.field
    return tuple(L(a) for a in model.ainvs)


def _result(P, kind, kodaira, vD, cp, model, p, loc) -> LocalReductionData:
    q = P.norm
    if kind is ReductionKind.GOOD:
        F = loc.F
        curve = CurveOverFiniteField(F, tuple(loc.red(a) for a in model.ainvs))
        a_v = q + 1 - count_points(curve)
    elif kind is ReductionKind.SPLIT:
        a_v = 1
    elif kind is ReductionKind.NONSPLIT:
        a_v = -1
    else:
        a_v = 0
    return LocalReductionData(P, P.label, kind, kodaira, int(vD), cp, a_v, q, p)


def tate_algorithm(model: WeierstrassModel, P: PrimeIdeal, p: int | None = None,
                   override: Mapping | None = None) -> LocalReductionData:
    """Local reduction data of `model` at `P`.

    The model must be integral at P. `override`, when given, is a record with
    any of kind / kodaira / tamagawa that must agree with the computed values.
    """
    if P.field.degree > 4:
        raise UnsupportedField("Tate's algorithm is limited to fields of degree <= 4")
    data = _tate(model, P, p)
    if override:
        check_override(data, override)
    return data


def check_override(data: LocalReductionData, override: Mapping) -> None:
    computed = {"kind": data.kind.value, "kodaira": data.kodaira, "tamagawa": data.tamagawa}
    for key, value in override.items():
        if key in computed and str(computed[key]) != str(value):
            raise OverrideMismatch(
                f"{data.prime_label}: injected {key}={value!r} disagrees with computed {computed[key]!r}"
            )


def _tate(model: WeierstrassModel, P: PrimeIdeal, p: int | None) -> LocalReductionData:
    loc = _Local(P)
    ell = loc.ell
    pi = loc.pi
    E = WeierstrassModel(_ainvs_over(model, P))
    if any(loc.val(a) < 0 for a in E.ainvs):
        raise ValueError(f"model is not integral at {P.label}")
    half = inverse_mod(2, ell) if ell != 2 else None

    for _ in range(VALUATION_CAP):
        vD = loc.val(E.discriminant)
        if vD == 0:
            return _result(P, ReductionKind.GOOD, "I0", 0, 1, E, p, loc)
        a1, a2, a3, a4, a6 = E.ainvs
        b2, b4, b6, b8 = E.b_invariants

        # move the singular point to (0, 0)
        if ell == 2:
            if loc.div(b2):
                r = loc.proot(a4)
                t = loc.proot(((r + a2) * r + a4) * r + a6)
            else:
                inv = loc.pinv(a1)
                r = inv * a3
                t = inv * (a4 + r * r)
        elif ell == 3:
            r = loc.proot(-b6) if loc.div(b2) else -loc.pinv(b2) * b4
            t = a1 * r + a3
        else:
            c4, c6 = E.c4, E.c6
            if loc.div(c4):
                r = -b2 * inverse_mod(12, ell)
            else:
                r = -loc.pinv(12 * c4) * (c6 + b2 * c4)
            t = -(a1 * r + a3) * half
        r, t = loc.preduce(r), loc.preduce(t)
        E = E.transform(1, r, 0, t)
        a1, a2, a3, a4, a6 = E.ainvs
        b2, b4, b6, b8 = E.b_invariants

        if not loc.div(b2):
            if loc.quad_has_root(1, a1, -a2):
                return _result(P, ReductionKind.SPLIT, f"I{vD}", vD, vD, E, p, loc)
            cp = 2 if vD % 2 == 0 else 1
            return _result(P, ReductionKind.NONSPLIT, f"I{vD}", vD, cp, E, p, loc)

        add = lambda kod, cp: _result(P, ReductionKind.ADDITIVE, kod, vD, cp, E, p, loc)
        if loc.val(a6) < 2:
            return add("II", 1)
        if loc.val(b8) < 3:
            return add("III", 2)
        if loc.val(b6) < 3:
            return add("IV", 3 if loc.quad_has_root(1, a3 / pi, -a6 / pi**2) else 1)

        # arrange p | a1, a2; p^2 | a3, a4; p^3 | a6
        if ell == 2:
            s = loc.proot(a2)
            t = pi * loc.proot(a6 / pi**2)
        elif ell == 3:
            s = a1
            t = a3
        else:
            s = -a1 * half
            t = -a3 * half
        E = E.transform(1, 0, s, t)
        a1, a2, a3, a4, a6 = E.ainvs

        b = a2 / pi
        c = a4 / pi**2
        d = a6 / pi**3
        w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
        x = 3 * c - b * b
        if not loc.div(w):
            return add("I0*", 1 + loc.cubic_distinct_roots(b, c, d))

        if not loc.div(x):
            # double root: move it to 0 and run the I_m* subprocedure
            if ell == 2:
                r = loc.proot(c)
            elif ell == 3:
                r = c * loc.pinv(b)
            else:
                r = (b * c - 9 * d) * loc.pinv(2 * x)
            E = E.transform(1, pi * loc.preduce(r), 0, 0)
            ix, iy = 3, 3
            mx = my = pi * pi
            for _ in range(VALUATION_CAP):
                a1, a2, a3, a4, a6 = E.ainvs
                a2t, a3t, a4t, a6t = a2 / pi, a3 / my, a4 / (pi * mx), a6 / (mx * my)
                if not loc.div(a3t * a3t + 4 * a6t):
                    cp = 4 if loc.quad_has_root(1, a3t, -a6t) else 2
                    break
                tt = loc.proot(a6t) if ell == 2 else loc.preduce(-a3t * half)
                E = E.transform(1, 0, 0, my * tt)
                my = my * pi
                iy += 1
                a1, a2, a3, a4, a6 = E.ainvs
                a2t, a3t, a4t, a6t = a2 / pi, a3 / my, a4 / (pi * mx), a6 / (mx * my)
                if not loc.div(a4t * a4t - 4 * a6t * a2t):
                    cp = 4 if loc.quad_has_root(a2t, a4t, a6t) else 2
                    break
                if ell == 2:
                    rr = loc.proot(a6t * loc.pinv(a2t))
                else:
                    rr = loc.preduce(-a4t * loc.pinv(2 * a2t))
                E = E.transform(1, mx * rr, 0, 0)
                mx = mx * pi
                ix += 1
            else:
                raise TateError(f"I_m* loop exceeded cap at {P.label}; model {E}")
            return add(f"I{ix + iy - 5}*", cp)

        # triple root: move it to 0
        if ell == 2:
            r = b
        elif ell == 3:
            r = loc.proot(-d)
        else:
            r = -b * inverse_mod(3, ell)
        E = E.transform(1, pi * loc.preduce(r), 0, 0)
        a1, a2, a3, a4, a6 = E.ainvs
        pi2 = pi * pi
        a3t, a6t = a3 / pi2, a6 / pi2**2
        if not loc.div(a3t * a3t + 4 * a6t):
            return add("IV*", 3 if loc.quad_has_root(1, a3t, -a6t) else 1)
        tt = -loc.proot(a6t) if ell == 2 else loc.preduce(-a3t * half)
        E = E.transform(1, 0, 0, pi2 * tt)
        a1, a2, a3, a4, a6 = E.ainvs
        if loc.val(a4) < 4:
            return add("III*", 2)
        if loc.val(a6) < 6:
            return add("II*", 1)
        # non-minimal at P: scale down and restart
        E = E.transform(pi, 0, 0, 0)
    raise TateError(f"valuation cap {VALUATION_CAP} exceeded at {P.label}; model {E}")


def local_data_Q(model: WeierstrassModel, ell: int, p: int | None = None) -> LocalReductionData:
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    return tate_algorithm(minimal_model_Q(model), QQ.primes_above(ell)[0], p)


def tamagawa_product_Q(model: WeierstrassModel) -> int:
    out = 1
    for ell in bad_primes_Q(model):
        out *= local_data_Q(model, ell).tamagawa
    return out


def component_count(kodaira: str) -> int:
    """Irreducible components of the special fibre over the algebraic closure."""
    fixed = {"I0": 1, "II": 1, "III": 2, "IV": 3, "IV*": 7, "III*": 8, "II*": 9}
    if kodaira in fixed:
        return fixed[kodaira]
    if kodaira.endswith("*"):
        return int(kodaira[1:-1]) + 5
    return int(kodaira[1:])


def conductor_exponent(data: LocalReductionData) -> int:
    """Ogg's formula: v(disc_min) + 1 - m."""
    if data.kind is ReductionKind.GOOD:
        return 0
    return data.v_disc + 1 - component_count(data.kodaira)


def conductor_Q(model: WeierstrassModel) -> dict[int, int]:
    return {ell: conductor_exponent(local_data_Q(model, ell)) for ell in bad_primes_Q(model)}


# ---------------------------------------------------------------------------
# local L-factors


@dataclass(frozen=True)
class LocalLFactor:
    coeffs: tuple[int, ...]  # P_v(X), low degree first
    p: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def reduced(self) -> PolyModP:
        return PolyModP(self.p, self.coeffs)


def local_l_factor(data: LocalReductionData, p: int) -> LocalLFactor:
    if data.kind is ReductionKind.GOOD:
        coeffs = (1, -data.a_v, data.q_v)
    elif data.kind.is_multiplicative:
        coeffs = (1, -data.a_v)
    else:
        coeffs = (1,)
    return LocalLFactor(coeffs, p)


def d_v(factor: LocalLFactor, ell: int, p: int) -> int:
    """Multiplicity of ell^{-1} mod p as a root of the reduced L-factor."""
    if ell % p == 0:
        raise ValueError("d_v needs ell != p")
    return root_multiplicity(PolyModP(p, factor.coeffs), inverse_mod(ell, p))


# ---------------------------------------------------------------------------
# the set Sigma


class SigmaReason(str, Enum):
    GOOD_P_DIVIDES = "good-with-p-dividing-count"
    SPLIT_OVER_KP = "split-mult-over-K'"
    IV_OVER_KP = "additive-IV-or-IV*-over-K'"


@dataclass(frozen=True)
class SigmaMember:
    prime: PrimeIdeal = field(compare=False)
    label: str
    curve: int  # 1 or 2
    reason: SigmaReason


@dataclass(frozen=True)
class SigmaSet:
    bad_primes: tuple[str, ...]  # the set of primes of K bad for either curve
    members: tuple[SigmaMember, ...]
    local: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def primes(self) -> list[PrimeIdeal]:
        seen: dict[str, PrimeIdeal] = {}
        for m in self.members:
            seen.setdefault(m.label, m.prime)
        return list(seen.values())

    @property
    def labels(self) -> list[str]:
        return [P.label for P in self.primes]


def unramified_base_change(data: LocalReductionData, f: int) -> tuple[ReductionKind, str]:
    """Reduction kind and Kodaira type after an unramified extension of residue degree f."""
    if data.kind is ReductionKind.NONSPLIT and f % 2 == 0:
        return ReductionKind.SPLIT, data.kodaira
    return data.kind, data.kodaira


def _multiplicative_order(q: int, p: int) -> int:
    k, x = 1, q % p
    while x != 1:
        x = x * q % p
        k += 1
    return k


def _over_K_prime(model: WeierstrassModel, v: PrimeIdeal, data_v: LocalReductionData,
                  K: ImagQuadField, p: int, Kp: CompositumField | None):
    """(kind, kodaira) at each prime w | v of K(mu_p)."""
    if Kp is not None:
        return [(d.kind, d.kodaira) for d in
                (tate_algorithm(model, w, p) for w in Kp.primes_above(v.ell) if _lies_over(w, v))]
    if v.ell == p:
        raise UnsupportedField("primes above p are ramified in K(mu_p)")
    return [unramified_base_change(data_v, _multiplicative_order(v.norm, p))]


def _lies_over(w: PrimeIdeal, v: PrimeIdeal) -> bool:
    return all(w.contains(w.field(g)) for g in v.generators)


def sigma_set(E1: WeierstrassModel, E2: WeierstrassModel, K: ImagQuadField, p: int) -> SigmaSet:
    """Sigma(E1) union Sigma(E2) for curves over Q base-changed to K."""
    Kp = CompositumField(K, p) if p == 3 else None
    curves = (minimal_model_Q(E1), minimal_model_Q(E2))
    ells = sorted(set(bad_primes_Q(curves[0])) | set(bad_primes_Q(curves[1])))
    local: dict = {}
    bad: list[PrimeIdeal] = []
    for ell in ells:
        if ell == p:
            continue
        for v in K.primes_above(ell):
            row = tuple(tate_algorithm(E, v, p) for E in curves)
            local[v.label] = row
            if any(d.kind is not ReductionKind.GOOD for d in row):
                bad.append(v)
    members = []
    for v in bad:
        for i, (E, data) in enumerate(zip(curves, local[v.label]), start=1):
            if data.kind is ReductionKind.GOOD:
                if (data.q_v + 1 - data.a_v) % p == 0:
                    members.append(SigmaMember(v, v.label, i, SigmaReason.GOOD_P_DIVIDES))
                continue
            above = _over_K_prime(E, v, data, K, p, Kp)
            if any(kind is ReductionKind.SPLIT for kind, _ in above):
                members.append(SigmaMember(v, v.label, i, SigmaReason.SPLIT_OVER_KP))
            elif p == 3 and any(kod in ("IV", "IV*") for _, kod in above):
                members.append(SigmaMember(v, v.label, i, SigmaReason.IV_OVER_KP))
    return SigmaSet(tuple(v.label for v in bad), tuple(members), local)
