import math

import numpy as np
import pytest

from siegel.characters import Character, FamilySpec, build_family, enumerate_psi_q, kronecker_character
from siegel.lfunc import (DEFAULT_POLICY, EvalPolicy, GammaPoleError, KernelParams, LEvaluator, PoleError,
                          completed_lambda_log, delta1, delta_factor, functional_equation_residual,
                          hurwitz_zeta, twist, varsigma, vartheta, vartheta_contour)


def test_hurwitz_zeta_at_two():
    assert hurwitz_zeta(2.0, 1.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-12)


def test_hurwitz_zeta_half_shift():
    # ζ(2, 1/2) = (2² − 1) ζ(2)
    assert hurwitz_zeta(2.0, 0.5) == pytest.approx(3 * math.pi ** 2 / 6, rel=1e-12)


def test_principal_pole():
    with pytest.raises(PoleError):
        LEvaluator(Character.principal(7)).value(1.0)


def test_unknown_precision_mode():
    with pytest.raises(ValueError):
        EvalPolicy(mode="quad")


def test_functional_equation_family_sample(rng):
    members = build_family(FamilySpec.from_scale(5, 20)).members()
    worst = 0.0
    for _ in range(100):
        psi = members[int(rng.integers(len(members)))]
        s = complex(rng.uniform(-0.5, 1.5), rng.uniform(-10, 10))
        worst = max(worst, functional_equation_residual(LEvaluator(psi), s))
    assert worst < 1e-9


def test_delta1_unimodular_on_critical_line(chi5, rng):
    members = enumerate_psi_q(11, 5)
    for _ in range(20):
        psi = members[int(rng.integers(len(members)))]
        t = rng.uniform(-20, 20)
        assert abs(abs(delta1(psi, chi5, complex(0.5, t))) - 1) < 1e-9


def test_delta1_reflection(chi5, rng):
    psi = enumerate_psi_q(13, 5)[3]
    for _ in range(10):
        s = complex(rng.uniform(-1, 2), rng.uniform(-10, 10))
        product = delta1(psi, chi5, s) * delta1(psi.conj(), chi5, 1 - s)
        assert abs(product - 1) < 1e-9


def test_delta_factor_gamma_pole(psi7):
    # parity-0 Δ has Γ((s+a)/2) in the denominator: s = 0 puts a pole there
    if psi7.parity == 0:
        with pytest.raises(GammaPoleError):
            delta_factor(psi7, 0.0)
    else:
        with pytest.raises(GammaPoleError):
            delta_factor(psi7, 2.0)


def test_twist_is_primitive_on_lcm(psi7, chi5):
    twisted = twist(psi7, chi5)
    assert twisted.modulus == 35
    assert twisted.is_primitive


def test_mp_policy_agrees_with_double(psi7):
    s = complex(0.5, 7.3)
    double = LEvaluator(psi7).value(s)
    mp = LEvaluator(psi7, policy=EvalPolicy(mode="mp", dps=30)).value(s)
    assert abs(double - mp) < 1e-10


def test_completed_lambda_is_symmetric_in_modulus(psi7):
    ev = LEvaluator(psi7, policy=DEFAULT_POLICY)
    s = complex(0.5, 4.0)
    conj = LEvaluator(psi7.conj())
    lhs = np.exp(completed_lambda_log(ev, s))
    rhs = np.exp(completed_lambda_log(conj, 1 - s))
    # Λ(s,ψ) = ε(ψ) Λ(1−s,ψ̄) with |ε(ψ)| = 1
    assert abs(lhs) == pytest.approx(abs(rhs), rel=1e-9)


def test_varsigma_symmetry():
    assert varsigma(1.0) == pytest.approx(0.5, abs=1e-12)
    xs = np.logspace(-3, 3, 41)
    assert np.max(np.abs(varsigma(xs) + varsigma(1 / xs) - 1)) < 1e-12


def test_vartheta_range_and_center():
    kp = KernelParams(20.0)
    assert vartheta(1.0, kp) == pytest.approx(0.5, abs=1e-8)
    xs = np.logspace(-4, 4, 81)
    values = vartheta(xs, kp)
    assert np.all(values > 0) and np.all(values < 1)
    far = 20.0 ** 0.1 * math.exp(10) * np.array([1.0, 10.0, 1e3])
    assert np.all(vartheta(far, kp) > 1 - 1e-6)


def test_vartheta_contour_agrees_with_closed_form():
    kp = KernelParams(20.0)
    for x in (0.5, 1.0, 3.0):
        assert vartheta_contour(x, kp) == pytest.approx(vartheta(x, kp), abs=1e-8)


def test_leibniz_value_at_one():
    chi = kronecker_character(-4)
    assert LEvaluator(chi).value(1.0) == pytest.approx(math.pi / 4, abs=1e-12)


def test_value_at_two_matches_dirichlet_series(psi7):
    n = np.arange(1, 200001)
    direct = np.sum(psi7(n) / n.astype(float) ** 2)
    assert abs(LEvaluator(psi7).value(2.0) - direct) < 1e-9


def test_conjugation_symmetry(psi7, rng):
    ev, conj = LEvaluator(psi7), LEvaluator(psi7.conj())
    for _ in range(10):
        s = complex(rng.uniform(-1, 2), rng.uniform(-15, 15))
        value = ev.value(s)
        assert abs(conj.value(s.conjugate()) - np.conj(value)) < 1e-12 * max(1.0, abs(value))
