import pytest
from hypothesis import given, settings, strategies as st

from anticyclo_h10.algebra import padic_valuation, primes_up_to
from anticyclo_h10.anticyclo import (
    BrinkParams,
    UnsupportedParameters,
    brink_data,
    decompose,
    depth_from_b_star,
    is_finitely_decomposed,
    s_v,
    sigma_E_v,
    splits_at_level,
)
from anticyclo_h10.numberfield import ImagQuadField, QuadElem, Splitting, quad_power, splitting_in_K


def test_golden_decomposition(K5):
    params = BrinkParams.for_field(K5, 3)
    assert (params.h, params.mu, params.nu) == (2, 0, 0)
    for v in K5.primes_above(7):
        res = decompose(v, K5, 3, params)
        assert res.finitely_decomposed
        assert (res.a, res.b) == (2, 3)
        assert (res.a_star, res.b_star) == (-41, 12)
        assert res.t == 0 and res.s_v == 1


def test_inert_prime_not_finitely_decomposed(K5):
    (v,) = K5.primes_above(11)
    assert not is_finitely_decomposed(v, K5, 3)
    assert decompose(v, K5, 3).finitely_decomposed is False


def test_unsupported_parameters(K5):
    with pytest.raises(UnsupportedParameters):
        decompose(K5.primes_above(3)[0], K5, 3)
    with pytest.raises(UnsupportedParameters):
        BrinkParams(7, 3, 1, 0, 0).check()  # Delta = 3 mod 4
    with pytest.raises(UnsupportedParameters):
        BrinkParams(5, 3, 3, 1, None).check()  # nu missing
    with pytest.raises(UnsupportedParameters):
        decompose(ImagQuadField(2).primes_above(3)[0], ImagQuadField(2), 5)  # 5 inert in Q(sqrt -2)


def test_s_v_and_sigma():
    assert s_v(0, 3) == 1
    assert s_v(2, 5) == 25
    assert sigma_E_v(1, 1) == 1 and sigma_E_v(3, 0) == 0
    with pytest.raises(ValueError):
        s_v(-1, 3)


SUPPORTED = [(D, p) for D in (1, 2, 5, 6, 10, 13, 14) for p in (3, 5, 7)
             if D % p and splitting_in_K(p, ImagQuadField(D)) is Splitting.SPLIT]


@pytest.mark.parametrize("D, p", SUPPORTED)
def test_conjugate_primes_share_depth(D, p):
    K = ImagQuadField(D)
    params = BrinkParams.for_field(K, p, 0)
    if params.mu:
        pytest.skip("p divides the class number")
    tested = 0
    for ell in primes_up_to(400):
        if ell == p or splitting_in_K(ell, K) is not Splitting.SPLIT:
            continue
        v, w = K.primes_above(ell)
        rv, rw = decompose(v, K, p, params), decompose(w, K, p, params)
        assert rv.s_v == rw.s_v
        tested += 1
    assert tested > 10


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([ell for ell in primes_up_to(2000) if ell != 3 and
                        splitting_in_K(ell, ImagQuadField(5)) is Splitting.SPLIT]))
def test_depth_independent_of_norm_solution_sign(ell):
    params = BrinkParams.for_field(ImagQuadField(5), 3)
    a, b, _, b_star = brink_data(ell, params)
    t = depth_from_b_star(b_star, params)
    for sa, sb in ((1, -1), (-1, 1), (-1, -1)):
        other = quad_power(QuadElem(sa * a, sb * b), params.p - 1, params.Delta)
        assert depth_from_b_star(int(other.b), params) == t
    # level criterion: splits at levels 0..t and not at t + 1
    assert all(splits_at_level(b_star, n, params) for n in range(t + 1))
    assert not splits_at_level(b_star, t + 1, params)
    assert t == max(0, padic_valuation(b_star, 3) - 1)


def test_some_prime_splits_deeper():
    K = ImagQuadField(5)
    params = BrinkParams.for_field(K, 3)
    depths = {decompose(K.primes_above(ell)[0], K, 3, params).t
              for ell in primes_up_to(3000) if ell != 3 and splitting_in_K(ell, K) is Splitting.SPLIT}
    assert 0 in depths and max(depths) >= 1
