import math

import numpy as np
import pytest

from siegel.coefficients import CoeffTable, iota_table
from siegel.lfunc import KernelParams, vartheta
from siegel.mollifier import (F_sum, G_sum, K_pm, MollifierContext, OmegaRegion, TableSet, build_tables,
                              VanishingDenominatorError, default_capF, k_identity_residuals,
                              membership_diagnostics, membership_thresholds, omega_regions, script_G,
                              script_H, upsilon_functional, upsilon_partial)
from siegel.params import AnalysisParams
from tests.conftest import synthetic_tables


def test_default_capF_is_capped():
    assert default_capF(5) == 3125
    assert default_capF(-8) == 20000


def test_F_tends_to_one(ctx):
    assert abs(F_sum(ctx, 40.0) - 1) < 1e-12


def test_K_sign_is_checked(ctx):
    with pytest.raises(ValueError):
        K_pm(ctx, complex(0.5, 2.0), 0)


def test_k_identities(ctx):
    residuals = k_identity_residuals(ctx, complex(0.7, 5.0))
    assert set(residuals) == {"plus.shift", "minus.shift", "plus.reflect", "minus.reflect"}
    assert max(residuals.values()) < 1e-8


def test_vanishing_denominator(psi7, chi5, params):
    empty = CoeffTable.synthetic("nu", 10, {})
    base = synthetic_tables(chi5, params.Q)
    tables = TableSet(empty, base.upsilon, base.lambda_plus, base.lambda_minus, 10)
    ctx = MollifierContext(psi7, chi5, params, tables)
    with pytest.raises(VanishingDenominatorError):
        script_G(ctx, complex(0.5, 1.0))
    with pytest.raises(VanishingDenominatorError):
        script_H(ctx, complex(0.5, 1.0))


def test_omega_grid_nesting():
    region = OmegaRegion("box", complex(0.5, 0.0), -0.2, 1.0, 3.0)
    coarse, fine = region.grid(5), region.grid(9)
    assert np.array_equal(fine[::2, ::2], coarse)
    assert not region.degenerate


def test_omega_regions_shape(params):
    omega1, omega2 = omega_regions(params)
    assert omega1.sigma_lo == pytest.approx(-2 * math.sqrt(params.alpha))
    assert omega2.half_height == pytest.approx(1 + 10 * params.L)
    assert omega2.sigma_lo < 0


def test_membership_refinement_never_lowers_sups(ctx):
    report = membership_diagnostics(ctx, grid=3, refine=True)
    for key in ("I1", "I2", "I3"):
        assert report.refined[key] >= getattr(report, key)
    assert set(report.passes) == {"I1", "I2", "I3"}
    assert report.thresholds == membership_thresholds(ctx.params)


def test_membership_grid_too_small(ctx):
    with pytest.raises(ValueError):
        membership_diagnostics(ctx, grid=1)


def test_upsilon_single_coefficient_by_hand(psi7, chi5):
    params = AnalysisParams(5, 50.0, R=10.0)
    c = 0.75
    ctx = MollifierContext(psi7, chi5, params, synthetic_tables(chi5, params.Q, plus={2: c}))
    rho = complex(0.5, 3.0)
    u = c * psi7(2) * 2 ** (-rho) * vartheta(50.0 ** (4 / 3) / 2, KernelParams(50.0))
    y2 = math.log(2) / math.log(50.0)
    eps = params.epsilon
    report = upsilon_functional(ctx, rho)
    assert report.parts["plus.head"] == 0
    assert report.parts["plus.body"] == pytest.approx(abs(u) ** 2, rel=1e-12)
    assert report.parts["plus.integral"] == pytest.approx(abs(u) ** 2 * (1 - y2), rel=1e-12)
    assert report.parts["star.epsilon_head"] == pytest.approx(abs(u) ** 2 / eps ** 2, rel=1e-12)
    assert report.minus == 0
    assert report.total == pytest.approx(abs(u) ** 2 * (2 - y2 + eps ** -2), rel=1e-12)
    assert report.threshold == pytest.approx(math.log(10.0) ** 2)


def test_upsilon_partial_window(psi7, chi5):
    params = AnalysisParams(5, 50.0)
    ctx = MollifierContext(psi7, chi5, params, synthetic_tables(chi5, params.Q, plus={2: 1.0, 3: 1.0}))
    s = complex(0.5, 1.0)
    whole = upsilon_partial(ctx, 1, 0.0, 1.0, s)
    y3 = math.log(3) / math.log(50.0)
    assert whole == pytest.approx(upsilon_partial(ctx, 1, 0.0, y3, s) + upsilon_partial(ctx, 1, y3, 1.0, s))
    assert upsilon_partial(ctx, 1, y3, 1.0, s) == 0


def test_FG_minus_one_is_iota_series(psi7, chi5, params):
    ctx = MollifierContext(psi7, chi5, params, build_tables(chi5, params, capF=10))
    iota = iota_table(chi5, 10)
    n = np.arange(1, iota.limit + 1)
    s = 2.0
    series = np.sum(iota.values[1:] * psi7(n) * n ** -s)
    assert abs(F_sum(ctx, s) * G_sum(ctx, s) - 1 - series) < 1e-12


def test_F_reflects_under_conjugation(ctx, rng):
    for _ in range(5):
        s = complex(rng.uniform(0, 2), rng.uniform(-10, 10))
        assert abs(F_sum(ctx.conjugate(), s.conjugate()) - np.conj(F_sum(ctx, s))) < 1e-12


def test_H_is_unimodular_on_critical_line(ctx, rng):
    for t in rng.uniform(-30, 30, size=50):
        assert abs(abs(script_H(ctx, complex(0.5, t))) - 1) < 1e-9
