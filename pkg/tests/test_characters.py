import math

import numpy as np
import pytest

from siegel.characters import (Character, CharacterError, EmptyModulusRangeError, FamilySpec,
                               NotFundamentalError, build_family, enumerate_psi_q,
                               fundamental_discriminant, gauss_sum, kronecker_character,
                               kronecker_symbol, psi_count, verify_family_member)


@pytest.mark.parametrize("D, expected", [(5, 5), (4, -4), (8, 8), (3, -3), (-4, -4), (12, 12)])
def test_fundamental_discriminant_resolves_sign(D, expected):
    assert fundamental_discriminant(D) == expected


def test_non_fundamental_modulus_rejected():
    with pytest.raises(NotFundamentalError):
        fundamental_discriminant(9)


def test_kronecker_character_mod_5(chi5):
    assert chi5.modulus == 5
    assert chi5.is_real and chi5.is_primitive
    assert np.allclose(chi5.values, [0, 1, -1, -1, 1])


def test_kronecker_character_matches_symbol():
    chi = kronecker_character(-4)
    for n in range(1, 40):
        assert chi(n) == pytest.approx(kronecker_symbol(-4, n))


@pytest.mark.parametrize("q", [7, 11, 13, 35, 77])
def test_psi_count_matches_enumeration(q):
    members = enumerate_psi_q(q, 5)
    assert len(members) == psi_count(q, 5)


def test_members_are_primitive_with_primitive_twist(chi5):
    for psi in enumerate_psi_q(35, 5):
        assert verify_family_member(psi, chi5)
        assert psi.conductor == 35


def test_modulus_divisible_by_three_needs_opt_out():
    with pytest.raises(CharacterError):
        enumerate_psi_q(15, 5)
    assert len(enumerate_psi_q(15, 5, family_only=False)) == psi_count(15, 5)


def test_gauss_sum_modulus(chi5):
    for psi in enumerate_psi_q(11, 5)[:4] + [chi5]:
        assert abs(gauss_sum(psi)) ** 2 == pytest.approx(psi.modulus, rel=1e-12)


def test_product_with_conjugate_is_principal_on_units(psi7):
    prod = psi7.mul(psi7.conj())
    n = np.arange(1, 50)
    units = n % 7 != 0
    assert np.allclose(prod(n[units]), 1.0)
    assert np.allclose(prod(n[~units]), 0.0)


def test_from_values_round_trip(psi7):
    rebuilt = Character.from_values(7, lambda n: psi7(n))
    assert rebuilt.local_indices == psi7.local_indices


def test_family_counts_and_ratio():
    family = build_family(FamilySpec.from_scale(5, 10))
    assert family.spec.q_list == (11, 13, 17, 19)
    assert family.count() == 9 + 11 + 15 + 17
    assert len(family.members()) == family.count()
    assert family.summary()["ratio"] == pytest.approx(52 / 100)


def test_empty_modulus_range():
    with pytest.raises(EmptyModulusRangeError):
        build_family(FamilySpec.from_scale(5, 1.5))


def test_parity_of_real_character(chi5):
    assert chi5.parity == 0
    chi = kronecker_character(-4)
    assert chi.parity == 1
    assert math.isclose(chi(3).real, -1.0)


@pytest.mark.parametrize("d, n, expected", [(-4, 3, -1), (8, 3, -1), (5, 1, 1), (-4, 1, 1)])
def test_kronecker_symbol_values(d, n, expected):
    assert kronecker_symbol(d, n) == expected


@pytest.mark.parametrize("q, D, expected", [(5, 4, 3), (5, 5, 2), (15, 5, 2)])
def test_small_modulus_counts(q, D, expected):
    members = enumerate_psi_q(q, D, family_only=False)
    assert len(members) == expected == psi_count(q, D)
    chi = kronecker_character(D)
    assert all(verify_family_member(psi, chi) for psi in members)


def test_values_are_completely_multiplicative(chi5, rng):
    characters = [chi5, kronecker_character(-4), enumerate_psi_q(35, 5)[7], enumerate_psi_q(11, 5)[2]]
    m = rng.integers(1, 10 ** 4, size=10 ** 4)
    n = rng.integers(1, 10 ** 4, size=10 ** 4)
    coprime = np.gcd(m, n) == 1
    m, n = m[coprime], n[coprime]
    assert m.size > 5000
    for psi in characters:
        assert np.allclose(psi(m * n), psi(m) * psi(n), atol=1e-12)
