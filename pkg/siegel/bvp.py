"""Sturm-type boundary-value solutions for the weighted inner product.

With P(x) = 1 + δ − x², the homogeneous solutions g₁ (even) and g₂ (odd)
of [ϖ₁g']' − ϖ₂g = 0 are closed forms and are evaluated through logs so
large d does not overflow. g₃ solves the problem with right side −𝒯 and
Neumann ends; it is assembled from g̃ by variation of constants.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .interval import IntervalFunction, WeightPair, inner, norm
from .params import AnalysisParams
from .quadrature import CumulativeQuadrature, adaptive_gl, reference_rule

logger = logging.getLogger(__name__)

MESH_PANELS = 200
LARGE_D = 60


def _log_P(x, delta):
    x = np.asarray(x, dtype=float)
    return np.log1p(delta - x * x)


def _I0(x, delta: float, d: int):
    """∫_0^x P^d, exact by a Gauss rule of degree ≥ 2d."""
    x = np.asarray(x, dtype=float)
    t, w = reference_rule(max(32, d + 2))
    u, wu = 0.5 * (t + 1), 0.5 * w
    y = x[..., None] * u
    return x * (np.exp(d * _log_P(y, delta)) * wu).sum(axis=-1)


@dataclass
class BvpSolution:
    name: str
    function: IntervalFunction
    delta: float
    d: int
    constants: Dict[str, float] = field(default_factory=dict)
    tilde: Optional[IntervalFunction] = None
    bump: Optional["BumpData"] = None

    def __call__(self, x):
        return self.function(x)

    def prime(self, x):
        return self.function.prime(x)


def script_A(delta: float, d: int) -> float:
    """𝒜 = 4d²δ^{1−d}∫_0^1 P^d + 2dδ², via logs."""
    return math.exp(_log_script_A(delta, d))


def _log_script_A(delta: float, d: int) -> float:
    first = math.log(4 * d * d) + (1 - d) * math.log(delta) + math.log(float(_I0(1.0, delta, d)))
    second = math.log(2 * d) + 2 * math.log(delta)
    return float(np.logaddexp(first, second))


def g1_g2(params: AnalysisParams) -> Tuple[BvpSolution, BvpSolution]:
    """g₁ = (2d)^{-1}δ^{d−2}P^{-d} and g₂ = 2d(𝒜δ)^{-1}P^{-d}∫_0^x P^d."""
    delta, d = params.delta, params.d
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    log_delta = math.log(delta)
    log_c1 = (d - 2) * log_delta - math.log(2 * d)

    def g1(x):
        return np.exp(log_c1 - d * _log_P(x, delta))

    def g1_prime(x):
        x = np.asarray(x, dtype=float)
        return 2 * d * x * np.exp(log_c1 - (d + 1) * _log_P(x, delta))

    log_A = _log_script_A(delta, d)
    log_c2 = math.log(2 * d) - log_A - log_delta

    def g2(x):
        x = np.asarray(x, dtype=float)
        i0 = _I0(x, delta, d)
        return np.sign(x) * np.exp(log_c2 - d * _log_P(x, delta) + np.log(np.abs(i0) + (i0 == 0)))

    def g2_prime(x):
        x = np.asarray(x, dtype=float)
        i0 = _I0(x, delta, d)
        tail = np.exp(log_c2 - (d + 1) * _log_P(x, delta) + np.log(np.abs(i0) + (i0 == 0)))
        return 2 * d * x * np.sign(x) * tail + math.exp(log_c2)

    constants = {"script_A": math.exp(log_A) if log_A < 700 else math.inf, "log_script_A": log_A}
    return (BvpSolution("g1", IntervalFunction(g1, (-1.0, 1.0), g1_prime, "g1"), delta, d, constants),
            BvpSolution("g2", IntervalFunction(g2, (-1.0, 1.0), g2_prime, "g2"), delta, d, dict(constants)))


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10 - 15 * t + 6 * t * t)


@dataclass
class BumpData:
    T0: IntervalFunction
    T1: IntervalFunction
    T2: IntervalFunction
    T: IntervalFunction
    center: float
    width: float

    @property
    def breakpoints(self) -> Tuple[float, ...]:
        return self.T.breakpoints

    def integrate_against(self, f: IntervalFunction, tol: float = 1e-12) -> complex:
        """∫_{-1}^{1} f𝒯, with the 𝒯₂ part integrated in its own scaled variable."""
        smooth = adaptive_gl(lambda x: f.rule(x) * self.T1.rule(x), -1.0, 1.0, tol=tol,
                             breakpoints=self.T1.breakpoints).value
        t, w = reference_rule(40)
        x = self.center + self.width * t
        bump = np.dot(w, f.rule(x) * _bump_shape(t)) * 35 / 32
        return complex(smooth - bump)


def _bump_shape(u):
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1, (1 - u * u) ** 3, 0.0)


def default_bump_width(R: float) -> float:
    return max(R ** -10, 1e3 * np.finfo(float).eps)


def bump_data(params: AnalysisParams, width: Optional[float] = None) -> BumpData:
    """𝒯₀ (quintic smoothstep bands), 𝒯₁ (sine kernel times 𝒯₀), 𝒯₂ (unit-mass bump at −1+ε)."""
    R, eps, d1 = params.R, params.epsilon, params.delta1
    if not 0 < eps < d1:
        logger.warning(f"epsilon={eps:.4g} outside (0, delta1={d1:.4g}); the bump at -1+epsilon "
                       f"sits inside the bulk of the interval")
    w = width if width is not None else default_bump_width(R)
    if width is None and w > R ** -10:
        logger.info(f"T2 width widened from R^-10={R ** -10:.3g} to {w:.3g}")
    center = -1 + eps
    inner_edge, outer_edge = 1 - 2 * d1, 1 - d1

    def T0(x):
        return _smoothstep((np.abs(x) - inner_edge) / d1)

    def T0_prime(x):
        x = np.asarray(x, dtype=float)
        t = np.clip((np.abs(x) - inner_edge) / d1, 0.0, 1.0)
        return np.sign(x) * 30 * t * t * (1 - t) ** 2 / d1

    def T1(x):
        x = np.asarray(x, dtype=float)
        z = np.where(x >= 0, 1 + eps - x, -1 + eps - x)
        return R * np.sinc(R * z / math.pi) * T0(x)

    def T2(x):
        return 35 / (32 * w) * _bump_shape((np.asarray(x, dtype=float) - center) / w)

    bands = (-outer_edge, -inner_edge, inner_edge, outer_edge)
    bump_edges = tuple(center + w * k for k in (-1, -0.5, 0, 0.5, 1))
    t0 = IntervalFunction(T0, (-1.0, 1.0), T0_prime, "T0", bands)
    t1 = IntervalFunction(T1, (-1.0, 1.0), None, "T1", bands + (0.0,))
    t2 = IntervalFunction(T2, (-1.0, 1.0), None, "T2", bump_edges)
    t = IntervalFunction(lambda x: T1(x) - T2(x), (-1.0, 1.0), None, "T",
                         tuple(sorted(set(bands + (0.0,) + bump_edges))))
    return BumpData(t0, t1, t2, t, center, w)


def _mesh(bump: BumpData, delta: float) -> np.ndarray:
    return np.unique(np.concatenate([np.linspace(-1, 1, MESH_PANELS + 1), bump.breakpoints,
                                     [-1 + delta, 1 - delta]]))


def g3(params: AnalysisParams, bump: Optional[BumpData] = None) -> BvpSolution:
    """g₃ = −g̃ + ½(a−b)ϖ₁(1)g₁ + ½(a+b)ϖ₁(1)g₂ with a = g̃'(1), b = g̃'(−1).

    g̃ = δ^{d−3}P^{-d}[I₀A − B] where I₀ = ∫_0^x P^d, A = ∫_0^x P^{-d}𝒯 and
    B = ∫_0^x I₀P^{-d}𝒯; A and B are tabulated once on a panel mesh.
    """
    delta, d = params.delta, params.d
    if d > LARGE_D:
        logger.warning(f"d={d}: the g-tilde quadrature is not rescaled and may overflow")
    bump = bump or bump_data(params)
    weight = WeightPair(delta, d)
    T = bump.T.rule
    mesh = _mesh(bump, delta)
    A = CumulativeQuadrature(lambda y: np.exp(-d * _log_P(y, delta)) * T(y), mesh)
    B = CumulativeQuadrature(lambda y: _I0(y, delta, d) * np.exp(-d * _log_P(y, delta)) * T(y), mesh)
    scale = delta ** (d - 3)

    def tilde(x):
        x = np.asarray(x, dtype=float)
        return scale * np.exp(-d * _log_P(x, delta)) * (_I0(x, delta, d) * A(x) - B(x))

    def tilde_prime(x):
        x = np.asarray(x, dtype=float)
        inner_part = _I0(x, delta, d) * A(x) - B(x)
        return scale * (2 * d * x * np.exp(-(d + 1) * _log_P(x, delta)) * inner_part + A(x))

    a, b = float(tilde_prime(1.0)), float(tilde_prime(-1.0))
    w1 = float(weight.varpi1(1.0))
    c1, c2 = 0.5 * (a - b) * w1, 0.5 * (a + b) * w1
    sol1, sol2 = g1_g2(params)
    f1, f2 = sol1.function, sol2.function

    def rule(x):
        return -tilde(x) + c1 * f1.rule(x) + c2 * f2.rule(x)

    def derivative(x):
        return -tilde_prime(x) + c1 * f1.derivative(x) + c2 * f2.derivative(x)

    breaks = tuple(p for p in bump.breakpoints if -1 < p < 1)
    fn = IntervalFunction(rule, (-1.0, 1.0), derivative, "g3", breaks)
    tilde_fn = IntervalFunction(tilde, (-1.0, 1.0), tilde_prime, "g_tilde", breaks)
    constants = {"tilde_prime_right": a, "tilde_prime_left": b, "c1": c1, "c2": c2,
                 "bump_width": bump.width}
    return BvpSolution("g3", fn, delta, d, constants, tilde_fn, bump)


def ode_residual(solution: BvpSolution, rhs=None, grid: Optional[Sequence[float]] = None,
                 h: float = 1e-5, exclude: Sequence[Tuple[float, float]] = ()) -> float:
    """max |[ϖ₁g']' − ϖ₂g − rhs| relative to the size of the terms, on a grid.

    [ϖ₁g']' is a centred difference of the exact flux ϖ₁g'.
    """
    weight = WeightPair(solution.delta, solution.d)
    x = np.linspace(-0.99, 0.99, 1001) if grid is None else np.asarray(grid, dtype=float)
    for lo, hi in exclude:
        x = x[(x < lo) | (x > hi)]
    f = solution.function

    def flux(z):
        return weight.varpi1(z) * f.derivative(z)

    lhs = (flux(x + h) - flux(x - h)) / (2 * h)
    mass = weight.varpi2(x) * f.rule(x)
    forcing = np.zeros_like(x) if rhs is None else rhs(x)
    scale = np.maximum.reduce([np.abs(lhs), np.abs(mass), np.abs(forcing), np.ones_like(x)])
    return float(np.max(np.abs(lhs - mass - forcing) / scale))


def _exclusions(bump: BumpData, pad: float) -> Sequence[Tuple[float, float]]:
    cuts = [(p - pad, p + pad) for p in bump.breakpoints]
    cuts.append((bump.center - bump.width - pad, bump.center + bump.width + pad))
    return cuts


def identity_report(params: AnalysisParams, bump_width: Optional[float] = None) -> Dict:
    """Every boundary, ODE and inner-product identity of g₁, g₂, g₃ in one dict."""
    weight = WeightPair(params.delta, params.d)
    sol1, sol2 = g1_g2(params)
    w1 = float(weight.varpi1(1.0))
    one = IntervalFunction.constant(1.0)
    bump = bump_data(params, bump_width)
    sol3 = g3(params, bump)
    T = bump.T.rule
    pad = 1e-4
    norm_g1_sq = inner(sol1.function, sol1.function, weight).real
    report = {
        "g1.boundary_right": sol1.prime(1.0) * w1,
        "g1.boundary_left": -sol1.prime(-1.0) * w1,
        "g2.boundary_right": sol2.prime(1.0) * w1,
        "g2.boundary_left": sol2.prime(-1.0) * w1,
        "g1.ode_residual": ode_residual(sol1),
        "g2.ode_residual": ode_residual(sol2),
        "g3.ode_residual": ode_residual(sol3, rhs=lambda x: -T(x), exclude=_exclusions(bump, pad)),
        "g3.boundary_right": sol3.prime(1.0),
        "g3.boundary_left": sol3.prime(-1.0),
        "g1.norm_squared": norm_g1_sq,
        "g1.two_g1_at_one": 2 * sol1(1.0),
        "g1.asymptotic": params.delta ** -2 / params.d,
        "g1.inner_with_one": inner(one, sol1.function, weight).real,
        "g2.inner_with_one": inner(one, sol2.function, weight).real,
        "g3.inner_with_one": inner(one, sol3.function, weight).real,
        "g3.integral_T": bump.integrate_against(one).real,
        "g2.at_zero": sol2(0.0),
        "g_tilde.norm": norm(sol3.tilde, weight),
        "R_pow_49_60": params.R ** (49 / 60),
        "script_A": sol1.constants["script_A"],
    }
    report["g_tilde.ratio"] = report["g_tilde.norm"] / report["R_pow_49_60"]
    return report
