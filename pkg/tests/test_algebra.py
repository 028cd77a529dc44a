from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from anticyclo_h10.algebra import (
    FiniteField,
    PolyModP,
    factor,
    finite_field_roots,
    inverse_mod,
    is_prime,
    kronecker_symbol,
    padic_valuation,
    primes_up_to,
    rational_mod,
    root_multiplicity,
    squarefree_part,
)


def test_primes_and_factor():
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert factor(392) == {2: 3, 7: 2}
    assert squarefree_part(-20) == -5
    assert squarefree_part(392) == 2


@given(st.integers(min_value=2, max_value=10**6))
def test_factor_roundtrip(n):
    f = factor(n)
    prod = 1
    for q, e in f.items():
        assert is_prime(q)
        prod *= q**e
    assert prod == n


def _legendre_bruteforce(a, q):
    a %= q
    if a == 0:
        return 0
    return 1 if any(x * x % q == a for x in range(1, q)) else -1


@given(st.integers(min_value=-500, max_value=500), st.sampled_from([3, 5, 7, 11, 13, 101]))
def test_kronecker_matches_euler_criterion(a, q):
    assert kronecker_symbol(a, q) == _legendre_bruteforce(a, q)


def test_kronecker_even_modulus():
    # (-20 / 3) = 1 since 3 splits in Q(sqrt -5)
    assert kronecker_symbol(-20, 3) == 1
    assert kronecker_symbol(-20, 7) == 1
    assert kronecker_symbol(-20, 11) == -1
    assert kronecker_symbol(-20, 2) == 0


def test_valuations_and_inverse():
    assert padic_valuation(Fraction(9, 4), 2) == -2
    assert padic_valuation(Fraction(9, 4), 3) == 2
    assert padic_valuation(0, 5) == float("inf")
    assert inverse_mod(3, 7) * 3 % 7 == 1
    assert rational_mod(Fraction(1, 2), 7) == 4
    with pytest.raises(ValueError):
        inverse_mod(7, 14)


def test_poly_irreducibility_and_multiplicity():
    assert PolyModP(3, (1, 0, 1)).is_irreducible()  # x^2 + 1 over F_3
    assert not PolyModP(5, (1, 0, 1)).is_irreducible()
    f = PolyModP(3, (1, -2, 1))  # (x - 1)^2
    assert root_multiplicity(f, 1) == 2
    assert root_multiplicity(f, 2) == 0


def test_extension_field_arithmetic():
    F = FiniteField.of_order(3, 2)
    assert F.order == 9
    elems = list(F)
    assert len(set(elems)) == 9
    nonzero = [x for x in elems if x]
    for x in nonzero:
        assert x * x.inverse() == F.one()
        assert x ** (F.order - 1) == F.one()
    assert sum(1 for x in nonzero if x.is_square()) == 4


def test_frobenius_root_char_two():
    F = FiniteField.of_order(2, 2)
    for x in F:
        r = x.frobenius_root()
        assert r * r == x


def test_roots_of_quadratic_and_cubic():
    F7 = FiniteField.prime_field(7)
    roots = finite_field_roots([F7(-2), F7(0), F7(1)], F7)
    assert sorted(r.to_int() for r in roots) == [3, 4]
    cubic = finite_field_roots([F7(-6), F7(11), F7(-6), F7(1)], F7)  # (x-1)(x-2)(x-3)
    assert sorted(r.to_int() for r in cubic) == [1, 2, 3]
