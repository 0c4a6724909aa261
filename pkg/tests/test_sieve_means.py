import math

import numpy as np
import pytest

from siegel.characters import FamilySpec, build_family, enumerate_psi_q
from siegel.sieve_means import (MissingZeroDataError, adversarial_coeffs, brute_force_lhs, decomposition_check,
                                doubling_report, error_mean_report, large_sieve_lhs, large_sieve_ratio,
                                sieve_check, zero_anchored_mean)
from siegel.zeros import ZeroSet


@pytest.fixture(scope="module")
def members():
    return build_family(FamilySpec.from_scale(5, 10)).members()


def test_single_term_ratio(members):
    assert large_sieve_ratio(members, [1.0], 10) == pytest.approx(0.52, rel=1e-14)


def test_multiples_of_modulus_vanish():
    family = enumerate_psi_q(11, 5)
    a = np.zeros(33, dtype=complex)
    a[[10, 21, 32]] = [1.0, -2.0, 0.5j]
    assert large_sieve_lhs(family, a) == 0


def test_unimodular_invariance(members, rng):
    a = rng.normal(size=60) + 1j * rng.normal(size=60)
    base = large_sieve_lhs(members, a)
    assert large_sieve_lhs(members, a * np.exp(0.7j)) == pytest.approx(base, rel=1e-12)


def test_matches_brute_force(members, rng):
    a = rng.choice([-1.0, 1.0], size=20)
    small = members[:6]
    assert large_sieve_lhs(small, a) == pytest.approx(brute_force_lhs(small, a), rel=1e-12)


def test_workers_do_not_change_result(members, rng):
    a = rng.normal(size=100)
    assert large_sieve_lhs(members, a, workers=4) == pytest.approx(large_sieve_lhs(members, a, workers=1), rel=1e-13)


def test_ratio_rejects_long_coefficients(members):
    with pytest.raises(ValueError):
        large_sieve_ratio(members, np.ones(101), 10)
    assert large_sieve_ratio(members, np.zeros(5), 10) == 0.0


def test_adversarial_coefficients(psi7):
    a = adversarial_coeffs(psi7, 20)
    units = sum(1 for n in range(1, 21) if n % 7)
    assert large_sieve_lhs([psi7], a) == pytest.approx(units ** 2, rel=1e-12)


def test_decomposition(members):
    a = np.zeros(30, dtype=complex)
    b = np.zeros(30, dtype=complex)
    a[:15] = 1.0
    b[15:] = -1.0j
    out = decomposition_check(members[:4], a, b)
    assert out["additive_residual"] < 1e-12
    assert out["brute_force_residual"] < 1e-12


def test_decomposition_overlap(members):
    with pytest.raises(ValueError):
        decomposition_check(members[:2], [1.0, 1.0], [0.0, 1.0])


def test_sieve_check_report():
    report = sieve_check(5, 10, trials=5, seed=3)
    assert report.family_size == 52
    assert report.N == 100
    assert report.single_term == pytest.approx(0.52)
    again = sieve_check(5, 10, trials=5, seed=3)
    assert again.ratios == report.ratios


@pytest.mark.slow
def test_doubling_growth_bounded():
    out = doubling_report(5, trials=10)
    assert out["passes"], out["growth"]


def test_zero_mean_empty_set(psi7):
    report = zero_anchored_mean([(psi7, ZeroSet.synthetic([]))], [1.0, 0.5], math.log(5), 10)
    assert report.total == 0
    assert report.anchors == 0


def test_zero_mean_constant_polynomial(psi7):
    a = 0.6 - 0.8j
    report = zero_anchored_mean([(psi7, ZeroSet.synthetic([3.0, 7.5]))], [a], math.log(5), 10)
    assert report.total == pytest.approx(2 * abs(a) ** 2)
    assert report.ratio == pytest.approx(2 / (math.log(5) ** 2 * 100))


def test_zero_mean_missing_data(psi7):
    with pytest.raises(MissingZeroDataError):
        zero_anchored_mean([(psi7, None)], [1.0], math.log(5), 10)


def test_error_mean_shape():
    out = error_mean_report([0.1, 0.2], math.log(5), 10, 10)
    assert out["shape"] == pytest.approx(math.log(5) ** 2 * 100 * 10 ** (-1 / 12) / math.log(10))
    assert out["anchors"] == 2
