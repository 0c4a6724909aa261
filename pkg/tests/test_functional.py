import math

import numpy as np
import pytest

from siegel.functional import (ErrorReport, U_decay_report, U_minus_tail, U_pm, X_plus, Y_sums, convolve_exponential,
                               error_functionals, phi, phi_decomposition, phi_functional, phi_star,
                               theta_functional, xi)
from siegel.interval import IntervalFunction
from siegel.lfunc import KernelParams, vartheta
from siegel.mollifier import MollifierContext
from siegel.params import AnalysisParams
from tests.conftest import synthetic_tables


@pytest.fixture(scope="module")
def rho():
    return complex(0.5, 3.0)


def test_U_pair_sums_to_one():
    xs = np.linspace(-2, 2, 201)
    assert np.max(np.abs(U_pm(xs, 10.0, 1) + U_pm(xs, 10.0, -1) - 1)) < 1e-10


def test_U_minus_closed_matches_contour():
    R = 10.0
    eps = 2 * math.pi / R
    for x in (eps, 0.3, -0.4):
        assert U_pm(x, R, -1, method="contour") == pytest.approx(U_pm(x, R, -1), abs=1e-8)


def test_U_minus_tail_is_U_minus():
    assert U_minus_tail(0.628, 10.0) == pytest.approx(U_pm(0.628, 10.0, -1), abs=1e-14)


def test_U_bad_arguments():
    with pytest.raises(ValueError):
        U_pm(0.1, 10.0, 2)
    with pytest.raises(ValueError):
        U_pm(0.1, 10.0, 1, method="series")


def test_U_decay_report():
    report = U_decay_report(10.0, np.linspace(-1, 1, 101))
    assert report["sum_residual"] < 1e-10
    assert report["right_decay_constant"] < 1.0
    assert report["left_decay_constant"] < 1.0


def test_X_plus_at_zero():
    R = 10.0
    expected = (R + math.exp(-2) * math.sin(2 * R) / 2) / math.pi
    assert X_plus(0.0, R) == pytest.approx(expected, rel=1e-13)


def test_phi_decomposition(ctx, rho):
    f = IntervalFunction.polynomial([0.3, -1.0, 0.5, 2.0])
    parts = phi_decomposition(f, ctx, rho)
    assert parts["residual"] < 1e-12 * max(1.0, abs(parts["phi"]))


def test_phi_nodes_inside_interval(ctx, rho):
    nodes = phi_functional(ctx, rho).nodes
    assert np.all(nodes >= -1 - 1e-12) and np.all(nodes <= 1 + 1e-12)


def test_phi_and_phi_star_are_linear(ctx, rho):
    f = IntervalFunction.polynomial([1.0, 2.0, -1.0])
    g = IntervalFunction.exponential(complex(0.1, 0.7), ctx.params.alpha)
    a, b = complex(0.5, -1.0), 2.0
    combo = f.scale(a) + g.scale(b)
    for functional in (phi, phi_star):
        lhs = functional(combo, ctx, rho)
        rhs = a * functional(f, ctx, rho) + b * functional(g, ctx, rho)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_xi_is_linear(ctx, rho):
    f = IntervalFunction.polynomial([1.0, 0.0, -1.0])
    g = IntervalFunction.polynomial([0.0, 1.0])
    options = {"kminus": lambda s: 1.0, "start_nodes": 64, "max_nodes": 64}
    a = complex(0.0, 2.0)
    combo = f.scale(a) + g
    lhs = xi(combo, ctx, rho, **options).value
    rhs = a * xi(f, ctx, rho, **options).value + xi(g, ctx, rho, **options).value
    assert abs(lhs - rhs) < 1e-8 * max(1.0, abs(lhs))


def test_error_report_assembly():
    report = ErrorReport(E1=0.1, E2=0.2, upsilon=3.0, R=10.0)
    term = 3.0 / (10.0 ** (1 / 12) * math.log(10.0))
    assert report.E == pytest.approx(term + 0.3)
    assert report.to_dict()["E_over_floor"] == pytest.approx(report.E * 10.0 ** (1 / 12))


def test_exponential_convolution_closed_form(params, rng):
    alpha, omega = params.alpha, params.omega
    xs = np.linspace(-1, 1, 9)
    for _ in range(20):
        s, t = (3 * omega * rng.uniform(0, 1) * np.exp(2j * math.pi * rng.uniform()) for _ in range(2))
        f = IntervalFunction.exponential(t, alpha)
        numeric = convolve_exponential(f, s, alpha, xs)
        closed = alpha * (np.exp(xs * t / alpha) - np.exp(xs * s / alpha)) / (t - s)
        assert np.max(np.abs(numeric - closed) / np.maximum(1.0, np.abs(closed))) < 1e-9


def test_U_minus_at_zero_is_half():
    assert U_pm(0.0, 10.0, -1) == 0.5
    assert U_pm(0.0, 10.0, -1, method="contour") == pytest.approx(0.5, abs=1e-13)


def test_theta_is_homogeneous(ctx, rho):
    f = IntervalFunction.polynomial([0.5, -1.0, 0.25])
    options = {"kminus": lambda s: 1.0, "start_nodes": 64, "max_nodes": 64}
    c = complex(-1.5, 0.75)
    base = theta_functional(f, ctx, rho, **options).value
    scaled = theta_functional(f.scale(c), ctx, rho, **options).value
    assert abs(scaled - c * base) < 1e-10 * max(1.0, abs(scaled))
    zero = theta_functional(IntervalFunction.polynomial([0.0]), ctx, rho, **options).value
    assert zero == 0


def test_error_functionals_vanish_on_zeroed_tables(psi7, chi5):
    params = AnalysisParams(5, 50.0, R=10.0)
    ctx = MollifierContext(psi7, chi5, params, synthetic_tables(chi5, params.Q))
    report = error_functionals(ctx, complex(0.5, 3.0), upsilon=3.0)
    assert report.E1 == 0 and report.E2 == 0
    assert all(v == 0 for v in report.Y.values())
    assert report.E == pytest.approx(report.upsilon_term)


def test_Y_sums_single_coefficient_by_hand(psi7, chi5):
    params = AnalysisParams(5, 50.0, R=10.0)
    c = 0.75
    ctx = MollifierContext(psi7, chi5, params, synthetic_tables(chi5, params.Q, plus={2: c}))
    rho = complex(0.5, 3.0)
    R, eps = params.R, params.epsilon
    a = params.alpha * math.log(2)
    w = c * np.conj(psi7(2)) * 2 ** (-(1 - rho)) * vartheta(50.0 ** (2 / 3) / 2, KernelParams(50.0))
    ys = Y_sums(ctx, rho)
    assert ys["Y1"] == 0 and ys["Y3"] == 0
    assert ys["Y2"] == pytest.approx(w * U_pm(-2 + eps + a, R, 1), rel=1e-12)
    assert ys["Y4"] == pytest.approx(w * U_pm(eps + a, R, -1), rel=1e-12)
    report = error_functionals(ctx, rho, upsilon=0.0)
    expected = (abs(ys["Y2"]) ** 2 + abs(ys["Y4"]) ** 2) / eps
    assert report.E2 == pytest.approx(expected, rel=1e-12)
