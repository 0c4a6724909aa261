"""Test functions on [-1, 1], the convolution product and the weighted inner product."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from .quadrature import adaptive_gl

logger = logging.getLogger(__name__)

DOMAIN_SLACK = 1e-12
UNIT = (-1.0, 1.0)


class DomainError(ValueError):
    """Evaluation requested outside the declared domain."""


class MissingDerivativeError(ValueError):
    """An operation needs f' but the function carries no derivative rule."""


@dataclass(frozen=True)
class IntervalFunction:
    """A vectorised rule on a closed interval, optionally with its derivative.

    ``smoothness`` is "C1" when a derivative rule is attached, "C0" otherwise.
    """
    rule: Callable
    domain: Tuple[float, float] = UNIT
    derivative: Optional[Callable] = None
    name: str = "f"
    breakpoints: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def smoothness(self) -> str:
        return "C1" if self.derivative is not None else "C0"

    def _check(self, x: np.ndarray):
        lo, hi = self.domain
        if np.any(x < lo - DOMAIN_SLACK) or np.any(x > hi + DOMAIN_SLACK):
            bad = x[(x < lo - DOMAIN_SLACK) | (x > hi + DOMAIN_SLACK)]
            raise DomainError(f"{self.name} is defined on [{lo}, {hi}], asked at {bad.ravel()[0]}")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        self._check(arr)
        out = self.rule(arr)
        return out if arr.ndim else complex(out) if np.iscomplexobj(out) else float(out)

    def prime(self, x):
        if self.derivative is None:
            raise MissingDerivativeError(f"{self.name} has no derivative rule")
        arr = np.asarray(x, dtype=float)
        self._check(arr)
        out = self.derivative(arr)
        return out if arr.ndim else complex(out) if np.iscomplexobj(out) else float(out)

    def scale(self, c: complex) -> "IntervalFunction":
        d = None if self.derivative is None else (lambda x, f=self.derivative: c * f(x))
        return IntervalFunction(lambda x, f=self.rule: c * f(x), self.domain, d,
                                f"{c}*{self.name}", self.breakpoints)

    def __add__(self, other: "IntervalFunction") -> "IntervalFunction":
        domain = (max(self.domain[0], other.domain[0]), min(self.domain[1], other.domain[1]))
        d = None
        if self.derivative is not None and other.derivative is not None:
            d = lambda x, f=self.derivative, g=other.derivative: f(x) + g(x)
        return IntervalFunction(lambda x, f=self.rule, g=other.rule: f(x) + g(x), domain, d,
                                f"({self.name}+{other.name})",
                                tuple(sorted(set(self.breakpoints) | set(other.breakpoints))))

    def restrict(self, domain: Tuple[float, float]) -> "IntervalFunction":
        return IntervalFunction(self.rule, domain, self.derivative, self.name, self.breakpoints)

    def check_derivative(self, grid: Sequence[float], h: float = 1e-5) -> float:
        """max |f' − centred difference| over interior grid points."""
        if self.derivative is None:
            raise MissingDerivativeError(f"{self.name} has no derivative rule")
        x = np.asarray(grid, dtype=float)
        lo, hi = self.domain
        x = x[(x - h >= lo) & (x + h <= hi)]
        fd = (self.rule(x + h) - self.rule(x - h)) / (2 * h)
        return float(np.max(np.abs(fd - self.derivative(x)))) if x.size else 0.0

    @classmethod
    def exponential(cls, s: complex, alpha: float,
                    domain: Tuple[float, float] = (-math.inf, math.inf)) -> "IntervalFunction":
        """φ_s(x) = Q^{xs} = exp(xs/α)."""
        rate = complex(s) / alpha
        return cls(lambda x: np.exp(rate * x), domain, lambda x: rate * np.exp(rate * x), f"phi[{s}]")

    @classmethod
    def polynomial(cls, coeffs: Sequence[complex], domain: Tuple[float, float] = UNIT) -> "IntervalFunction":
        p = Polynomial(coeffs)
        dp = p.deriv()
        return cls(p, domain, dp, f"poly{tuple(coeffs)}")

    @classmethod
    def constant(cls, c: complex = 1.0, domain: Tuple[float, float] = (-math.inf, math.inf)) -> "IntervalFunction":
        return cls(lambda x: c + 0 * x, domain, lambda x: 0 * x, f"const[{c}]")

    @classmethod
    def sampled(cls, x: Sequence[float], y: Sequence[float], name: str = "sampled") -> "IntervalFunction":
        """Cubic spline through samples; the domain is the sample range."""
        spline = CubicSpline(np.asarray(x, dtype=float), np.asarray(y))
        dspline = spline.derivative()
        return cls(spline, (float(x[0]), float(x[-1])), dspline, name)


ZERO = IntervalFunction.constant(0.0)


@dataclass(frozen=True)
class WeightPair:
    """ϖ₁ and ϖ₂ for the inner product, evaluated through their logarithms."""
    delta: float
    d: int

    def __post_init__(self):
        if self.delta <= 0 or self.d < 2:
            raise ValueError(f"need delta > 0 and d >= 2, got {self.delta}, {self.d}")

    def log_varpi1(self, x):
        x = np.asarray(x, dtype=float)
        return (3 - self.d) * math.log(self.delta) + self.d * np.log1p(self.delta - x * x)

    def varpi1(self, x):
        return np.exp(self.log_varpi1(x))

    def varpi2(self, x):
        x = np.asarray(x, dtype=float)
        log = (math.log(2 * self.d) + (3 - self.d) * math.log(self.delta)
               + np.log1p(self.delta + x * x) + (self.d - 2) * np.log1p(self.delta - x * x))
        return np.exp(log)

    def breakpoints(self) -> Tuple[float, ...]:
        return (-1 + self.delta, 0.0, 1 - self.delta)


def convolve(f: IntervalFunction, g: IntervalFunction, tol: float = 1e-12) -> IntervalFunction:
    """(f*g)(x) = ∫_0^x f(x−y) g(y) dy by adaptive quadrature per point.

    The derivative f(0)g(x) + ∫_0^x f'(x−y)g(y)dy is attached when f' is known.
    """
    f0 = f(0.0)

    def value_at(x: float):
        return adaptive_gl(lambda y: f.rule(x - y) * g.rule(y), 0.0, x, tol=tol).value

    def rule(x):
        x = np.asarray(x, dtype=float)
        out = np.array([value_at(v) for v in x.ravel()]).reshape(x.shape)
        return out if x.ndim else out.item()

    derivative = None
    if f.derivative is not None:
        def derivative(x):
            x = np.asarray(x, dtype=float)
            vals = [f0 * g.rule(v) + adaptive_gl(lambda y, v=v: f.derivative(v - y) * g.rule(y),
                                                 0.0, v, tol=tol).value for v in x.ravel()]
            out = np.array(vals).reshape(x.shape)
            return out if x.ndim else out.item()

    lo = max(f.domain[0], g.domain[0])
    hi = min(f.domain[1], g.domain[1])
    return IntervalFunction(rule, (lo, hi), derivative, f"({f.name}*{g.name})")


def inner(f: IntervalFunction, g: IntervalFunction, w: WeightPair, tol: float = 1e-12) -> complex:
    """<f, g> = ∫_{-1}^{1} [f' ḡ' ϖ₁ + f ḡ ϖ₂] dx.

    Raises:
        MissingDerivativeError: either function lacks a derivative rule
    """
    for h in (f, g):
        if h.derivative is None:
            raise MissingDerivativeError(f"inner product needs a derivative for {h.name}")
        h._check(np.array(UNIT))

    def integrand(x):
        return (f.derivative(x) * np.conj(g.derivative(x)) * w.varpi1(x)
                + f.rule(x) * np.conj(g.rule(x)) * w.varpi2(x))

    breaks = tuple(sorted(set(w.breakpoints()) | set(f.breakpoints) | set(g.breakpoints)))
    result = adaptive_gl(integrand, -1.0, 1.0, tol=tol, breakpoints=breaks)
    return complex(result.value)


def norm(f: IntervalFunction, w: WeightPair, tol: float = 1e-12) -> float:
    return math.sqrt(max(inner(f, f, w, tol).real, 0.0))
