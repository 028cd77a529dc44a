import math
import random
from fractions import Fraction

import pytest

from anticyclo_h10.curves import WeierstrassModel, bad_primes_Q
from anticyclo_h10.local_data import (
    OverrideMismatch,
    ReductionKind,
    component_count,
    conductor_Q,
    d_v,
    local_data_Q,
    local_l_factor,
    sigma_set,
    tamagawa_p_part,
    tamagawa_product_Q,
    tate_algorithm,
)
from anticyclo_h10.numberfield import QQ, CompositumField, ImagQuadField


def test_corpus_local_data_matches_fixture(fixtures):
    for fx in fixtures.values():
        E = fx.model
        assert sorted(fx.local, key=int) == [str(ell) for ell in bad_primes_Q(E)]
        for ell, rec in fx.local.items():
            data = local_data_Q(E, int(ell))
            assert data.kind.value == rec["kind"], (fx.label, ell)
            assert data.kodaira == rec["kodaira"], (fx.label, ell)
            assert data.tamagawa == int(rec["tamagawa"]), (fx.label, ell)
        conductor = conductor_Q(E)
        assert {str(k): str(v) for k, v in conductor.items()} == {
            ell: rec["conductor_exponent"] for ell, rec in fx.local.items()
        }
        fx.check_conductor()


def test_56b1_and_392c1_over_Q(E1, E2):
    d = local_data_Q(E1, 7, 3)
    assert d.kind is ReductionKind.SPLIT and d.kodaira == "I1"
    assert d_v(local_l_factor(d, 3), 7, 3) == 1
    e = local_data_Q(E2, 7, 3)
    assert e.kind is ReductionKind.ADDITIVE and e.kodaira == "IV" and e.tamagawa == 3
    assert d_v(local_l_factor(e, 3), 7, 3) == 0
    assert local_data_Q(E1, 2).kodaira == "III*"
    assert local_data_Q(E2, 2).kodaira == "III"
    assert tamagawa_product_Q(E1) == 2
    assert tamagawa_p_part(tamagawa_product_Q(E1), 3) == 1


def test_conductors(E1, E2):
    assert conductor_Q(E1) == {2: 3, 7: 1}
    assert conductor_Q(E2) == {2: 3, 7: 2}


def test_prime_above_2_of_compositum(E1, E2, K5):
    (P,) = CompositumField(K5, 3).primes_above(2)
    for E in (E1, E2):
        assert tate_algorithm(E, P, 3).kodaira == "I1*"


def test_sigma_set(E1, E2, K5):
    sig = sigma_set(E1, E2, K5, 3)
    assert sorted(sig.labels) == ["(7, w - 3)", "(7, w - 4)"]
    reasons = {(m.label, m.curve): m.reason.value for m in sig.members}
    assert reasons[("(7, w - 3)", 1)] == "split-mult-over-K'"
    assert reasons[("(7, w - 3)", 2)] == "additive-IV-or-IV*-over-K'"


@pytest.mark.parametrize(
    "kodaira, m",
    [("I0", 1), ("II", 1), ("III", 2), ("IV", 3), ("I5", 5), ("I0*", 5), ("I3*", 8), ("IV*", 7), ("III*", 8), ("II*", 9)],
)
def test_component_count(kodaira, m):
    assert component_count(kodaira) == m


def test_override_mismatch_raises(E1):
    (P,) = QQ.primes_above(7)
    tate_algorithm(E1, P, 3, override={"kind": "split-multiplicative", "tamagawa": "1"})
    with pytest.raises(OverrideMismatch):
        tate_algorithm(E1, P, 3, override={"kind": "nonsplit-multiplicative"})
    with pytest.raises(OverrideMismatch):
        tate_algorithm(E1, P, 3, override={"tamagawa": 3})


def _random_change(rng: random.Random):
    k = rng.choice([1, 1, 2, 3, 6])
    u = Fraction(rng.choice([1, -1]), k)
    return u, rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(-9, 9)


def _signature(d):
    return d.kind, d.kodaira, d.tamagawa, d.a_v


def test_tate_invariance_under_coordinate_changes(fixtures):
    rng = random.Random(7)
    for fx in fixtures.values():
        E = fx.model
        ells = bad_primes_Q(E) + [3, 5]
        base = {ell: _signature(local_data_Q(E, ell)) for ell in ells}
        for _ in range(20):
            E2 = E.transform(*_random_change(rng))
            assert E2.is_integral()
            for ell in ells:
                (P,) = QQ.primes_above(ell)
                assert _signature(tate_algorithm(E2, P)) == base[ell], (fx.label, ell)


def test_tate_invariance_over_quadratic_field(E1, E2, K5):
    rng = random.Random(11)
    for E in (E1, E2):
        EK = E.base_change(K5)
        primes = K5.primes_above(2) + K5.primes_above(7) + K5.primes_above(3)
        base = [_signature(tate_algorithm(EK, P)) for P in primes]
        for _ in range(5):
            u, r, s, t = _random_change(rng)
            w = K5.omega
            moved = EK.transform(u, r + w * rng.randint(-3, 3), s + w * rng.randint(-3, 3), t)
            assert [_signature(tate_algorithm(moved, P)) for P in primes] == base


def test_ogg_formula_consistency(fixtures):
    for fx in fixtures.values():
        N = math.prod(ell**e for ell, e in conductor_Q(fx.model).items())
        assert N == fx.conductor


def test_split_primes_of_K_inherit_traces(E1, E2, K5):
    from anticyclo_h10.curves import a_ell

    for E in (E1, E2):
        for ell in (3, 23, 29, 41):
            for v in K5.primes_above(ell):
                assert tate_algorithm(E, v).a_v == a_ell(E, ell)
        (w,) = K5.primes_above(11)  # inert: a_w = a_l^2 - 2l
        assert tate_algorithm(E, w).a_v == a_ell(E, 11) ** 2 - 22
