import math

import numpy as np
import pytest

from siegel.interval import (DomainError, IntervalFunction, MissingDerivativeError, WeightPair, convolve,
                             inner, norm)
from siegel.quadrature import adaptive_gl


def test_domain_error():
    f = IntervalFunction.polynomial([0, 1])
    with pytest.raises(DomainError):
        f(1.5)
    assert f(1.0) == 1.0


def test_sampled_has_no_life_outside_samples():
    f = IntervalFunction.sampled([0.0, 0.5, 1.0], [0.0, 0.25, 1.0])
    assert f.smoothness == "C1"
    with pytest.raises(DomainError):
        f(-0.5)


def test_missing_derivative():
    f = IntervalFunction(np.cos, (-1.0, 1.0))
    assert f.smoothness == "C0"
    with pytest.raises(MissingDerivativeError):
        f.prime(0.0)
    with pytest.raises(MissingDerivativeError):
        inner(f, f, WeightPair(0.1, 6))


def test_exponential_derivative_rule():
    alpha = 1 / math.log(20.0)
    f = IntervalFunction.exponential(complex(0.3, 2.0), alpha)
    assert f.check_derivative(np.linspace(-1, 1, 21)) < 1e-6


def test_weight_values():
    w = WeightPair(0.1, 6)
    assert w.varpi1(0.0) == pytest.approx(0.1 ** -3 * 1.1 ** 6, rel=1e-13)
    assert w.varpi2(0.0) == pytest.approx(12 * 0.1 ** -3 * 1.1 ** 5, rel=1e-13)
    assert w.varpi1(1.0) == pytest.approx(0.1 ** 3, rel=1e-12)


def test_weight_rejects_bad_parameters():
    with pytest.raises(ValueError):
        WeightPair(0.0, 6)
    with pytest.raises(ValueError):
        WeightPair(0.1, 1)


def test_inner_of_constant_is_weight_mass(weight):
    one = IntervalFunction.constant(1.0)
    mass = adaptive_gl(weight.varpi2, -1.0, 1.0, breakpoints=weight.breakpoints()).value
    assert inner(one, one, weight).real == pytest.approx(mass, rel=1e-11)
    assert norm(one, weight) == pytest.approx(math.sqrt(mass), rel=1e-11)


def test_inner_is_hermitian(weight):
    alpha = 1 / math.log(20.0)
    f = IntervalFunction.exponential(complex(0.2, 1.5), alpha)
    g = IntervalFunction.polynomial([1, 2j, -0.5])
    assert inner(f, g, weight) == pytest.approx(np.conj(inner(g, f, weight)), rel=1e-10)


def test_convolve_closed_forms():
    one = IntervalFunction.constant(1.0)
    ident = IntervalFunction.polynomial([0, 1], (-2.0, 2.0))
    conv = convolve(one, ident)
    xs = np.array([-1.0, 0.3, 1.5])
    assert np.allclose(conv(xs), xs ** 2 / 2, atol=1e-12)

    expo = IntervalFunction(np.exp, (-2.0, 2.0), np.exp, "exp")
    conv = convolve(expo, IntervalFunction.constant(1.0))
    assert np.allclose(conv(xs), np.exp(xs) - 1, atol=1e-12)
    assert np.allclose(conv.prime(xs), np.exp(xs), atol=1e-11)
