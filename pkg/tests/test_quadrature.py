import math

import numpy as np
import pytest

from siegel.quadrature import CumulativeQuadrature, adaptive_gl, composite_gl, gauss_legendre


def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(10, 0.0, 2.0)
    assert np.dot(w, x ** 19) == pytest.approx(2.0 ** 20 / 20, rel=1e-13)


def test_adaptive_sine():
    result = adaptive_gl(np.sin, 0.0, math.pi)
    assert result.converged
    assert result.value == pytest.approx(2.0, abs=1e-13)


def test_adaptive_reversed_limits_flip_sign():
    forward = adaptive_gl(np.exp, 0.0, 1.0).value
    backward = adaptive_gl(np.exp, 1.0, 0.0).value
    assert backward == pytest.approx(-forward, rel=1e-14)
    assert adaptive_gl(np.exp, 1.0, 1.0).value == 0.0


def test_adaptive_respects_breakpoints():
    # |x| has a kink at 0
    result = adaptive_gl(np.abs, -1.0, 2.0, breakpoints=(0.0,))
    assert result.value == pytest.approx(2.5, abs=1e-13)


def test_composite_matches_adaptive():
    f = lambda x: np.exp(-x * x)
    assert composite_gl(f, -3.0, 3.0, panels=8) == pytest.approx(adaptive_gl(f, -3.0, 3.0).value, abs=1e-12)


def test_cumulative_cosine_is_sine():
    cum = CumulativeQuadrature(np.cos, np.linspace(-2, 2, 5))
    xs = np.linspace(-2, 2, 37)
    assert np.max(np.abs(cum(xs) - np.sin(xs))) < 1e-13
    assert cum(0.0) == pytest.approx(0.0, abs=1e-15)


def test_cumulative_shifted_origin():
    cum = CumulativeQuadrature(lambda x: 2 * x, [-1.0, 1.0], origin=0.5)
    assert cum(1.0) == pytest.approx(1.0 - 0.25, abs=1e-14)
    assert cum(-1.0) == pytest.approx(1.0 - 0.25, abs=1e-14)
