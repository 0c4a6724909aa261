"""Approximation of φ₀ ≡ 1 by exponentials φ_θ, θ ∈ T, in the weighted norm.

The primary route is a least-squares solve on a fixed Gauss–Legendre
discretisation of the inner product; the residual φ₀ − h is then split
along g₃ into k (orthogonal to g₃) and r. ``contour_h`` realises the
rectangle-contour construction as an independent cross-check.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .interval import IntervalFunction, WeightPair, inner, norm
from .mollifier import K_pm, MollifierContext
from .quadrature import reference_rule
from .zeros import ShiftedZeroSet

logger = logging.getLogger(__name__)

DUPLICATE_DISTANCE = 1e-10
NUDGE_FLOOR = 1e-6
MAX_NUDGES = 4


class DuplicateNodeError(ValueError):
    """Two exponents in T are closer than the duplicate threshold."""


class SingularGramError(np.linalg.LinAlgError):
    """The Gram system is singular and cannot be regularised."""


def lattice_thetas(alpha: float, L0: int) -> np.ndarray:
    """Synthetic T: θ = ±α + πilα for |l| ≤ L0."""
    ls = np.arange(-L0, L0 + 1)
    return np.concatenate([alpha + 1j * math.pi * ls * alpha, -alpha + 1j * math.pi * ls * alpha])


def thetas_from_set(shifted: ShiftedZeroSet) -> np.ndarray:
    return shifted.values


def exponential_sum(thetas: Sequence[complex], coeffs: Sequence[complex], alpha: float,
                    domain: Tuple[float, float] = (-2.0, 2.0), name: str = "h") -> IntervalFunction:
    """x ↦ Σ A(θ) Q^{xθ}, with its derivative."""
    rates = np.asarray(thetas, dtype=complex) / alpha
    coeffs = np.asarray(coeffs, dtype=complex)

    def rule(x):
        x = np.asarray(x, dtype=float)
        return np.exp(x[..., None] * rates) @ coeffs

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return np.exp(x[..., None] * rates) @ (coeffs * rates)

    return IntervalFunction(rule, domain, derivative, name)


def _check_distinct(thetas: np.ndarray):
    if thetas.size == 0:
        raise ValueError("T must contain at least one exponent")
    gaps = np.abs(thetas[:, None] - thetas[None, :]) + np.eye(thetas.size) * np.inf
    if gaps.min() < DUPLICATE_DISTANCE:
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        raise DuplicateNodeError(f"exponents {thetas[i]} and {thetas[j]} coincide")


def _sobolev_nodes(weight: WeightPair, panels: int = 32, order: int = 24):
    """Nodes x with sqrt(quadrature weight · ϖ₁) and sqrt(quadrature weight · ϖ₂)."""
    edges = np.unique(np.concatenate([np.linspace(-1, 1, panels + 1), weight.breakpoints()]))
    t, w = reference_rule(order)
    half = 0.5 * np.diff(edges)
    x = (half[:, None] * t[None, :] + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    wq = (half[:, None] * w[None, :]).ravel()
    return x, np.sqrt(wq * weight.varpi1(x)), np.sqrt(wq * weight.varpi2(x))


def _design(thetas: np.ndarray, alpha: float, weight: WeightPair):
    x, s1, s2 = _sobolev_nodes(weight)
    rates = thetas / alpha
    basis = np.exp(np.outer(x, rates))
    V = np.vstack([s1[:, None] * basis * rates[None, :], s2[:, None] * basis])
    target = np.concatenate([np.zeros(x.size), s2]).astype(complex)
    return V, target


def gram_matrix(thetas: Sequence[complex], alpha: float, weight: WeightPair) -> np.ndarray:
    """G[i, j] = <φ_θi, φ_θj> on the fixed discretisation.

    Raises:
        DuplicateNodeError: two exponents closer than 1e-10
    """
    thetas = np.asarray(thetas, dtype=complex)
    _check_distinct(thetas)
    V, _ = _design(thetas, alpha, weight)
    return V.T @ V.conj()


def B_sampler(thetas: Sequence[complex], coeffs: Sequence[complex], omega: float,
              samples: int = 256) -> Dict:
    """B(s) = Σ A(θ)/(s−θ) on |s| = ω."""
    s = omega * np.exp(2j * math.pi * np.arange(samples) / samples)
    thetas = np.asarray(thetas, dtype=complex)
    values = (np.asarray(coeffs, dtype=complex)[None, :] / (s[:, None] - thetas[None, :])).sum(axis=1)
    return {"points": s, "values": values, "sup": float(np.max(np.abs(values)))}


@dataclass
class ApproxResult:
    thetas: np.ndarray
    coeffs: np.ndarray
    h: IntervalFunction
    k: IntervalFunction
    r: IntervalFunction
    residual: IntervalFunction
    norms: Dict[str, float]
    report: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "thetas": [[t.real, t.imag] for t in self.thetas],
            "A": [[a.real, a.imag] for a in self.coeffs],
            "norms": self.norms,
            "report": self.report,
        }


def solve_h_k(thetas: Sequence[complex], alpha: float, weight: WeightPair, g3: IntervalFunction,
              R: float, tikhonov_scale: float = 1e-12) -> ApproxResult:
    """Least-squares h ∈ span{φ_θ} and the split of φ₀ − h along g₃.

    Raises:
        DuplicateNodeError: two exponents coincide
        SingularGramError: rank deficiency with no usable Tikhonov weight
    """
    g3 = getattr(g3, "function", g3)
    thetas = np.asarray(thetas, dtype=complex)
    _check_distinct(thetas)
    V, target = _design(thetas, alpha, weight)
    coeffs, _, rank, sv = np.linalg.lstsq(V, target, rcond=None)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    tikhonov = 0.0
    if rank < thetas.size:
        tikhonov = tikhonov_scale * float(np.sum(np.abs(V) ** 2))
        if not np.isfinite(tikhonov) or tikhonov <= 0:
            raise SingularGramError(f"Gram rank {rank} < {thetas.size} and no admissible regularisation")
        logger.warning(f"Gram rank {rank} < {thetas.size}; Tikhonov weight {tikhonov:.3e}")
        aug = np.vstack([V, math.sqrt(tikhonov) * np.eye(thetas.size)])
        coeffs = np.linalg.lstsq(aug, np.concatenate([target, np.zeros(thetas.size)]), rcond=None)[0]
    normal = V.conj().T @ (target - V @ coeffs)
    normal_residual = float(np.max(np.abs(normal)) / max(np.linalg.norm(V) * np.linalg.norm(target), 1e-300))

    h = exponential_sum(thetas, coeffs, alpha)
    one = IntervalFunction.constant(1.0)
    residual = (one + h.scale(-1.0)).restrict((-1.0, 1.0))
    g3_sq = inner(g3, g3, weight).real
    c = inner(residual, g3, weight) / g3_sq
    r = g3.scale(c)
    k = residual + r.scale(-1.0)
    delta = weight.delta
    norms = {"residual": norm(residual, weight), "k": norm(k, weight), "r": norm(r, weight)}

    xs = np.linspace(-2, 2, 801)
    B = B_sampler(thetas, coeffs, alpha * R)
    report = {
        "max_abs_A": float(np.max(np.abs(coeffs))),
        "k_over_delta": norms["k"] / delta,
        "r_over_delta": norms["r"] / delta,
        "residual_over_delta": norms["residual"] / delta,
        "B_sup_over_delta": B["sup"] / delta,
        "h_sup": float(np.max(np.abs(h(xs)))),
        "h_prime_sup": float(np.max(np.abs(h.prime(xs)))),
        "log_R_squared": math.log(R) ** 2,
        "R_log_R": R * math.log(R),
        "k_g3_inner": abs(inner(k, g3, weight)),
        "g3_coefficient": abs(c),
        "normal_residual": normal_residual,
        "condition": condition,
        "tikhonov": tikhonov,
        "rank": int(rank),
    }
    logger.info(f"|T|={thetas.size}: ||phi0-h||/delta={report['residual_over_delta']:.3g}, "
                f"||k||/delta={report['k_over_delta']:.3g}, cond={condition:.3g}")
    return ApproxResult(thetas, coeffs, h, k, r, residual, norms, report)


@dataclass
class ContourH:
    """R̃₁ as a finite exponential sum over the contour nodes."""
    function: IntervalFunction
    nodes: np.ndarray
    weights: np.ndarray
    scale: Tuple[float, float]
    nudges: int
    constant_term: Optional[complex] = None

    def __call__(self, x):
        return self.function(x)


def _rectangle(width: float, height: float, order: int):
    """Counter-clockwise Gauss nodes s_k and ds_k on the rectangle ±width ± i·height."""
    t, w = reference_rule(order)
    corners = [complex(width, -height), complex(width, height), complex(-width, height),
               complex(-width, -height), complex(width, -height)]
    nodes, steps = [], []
    for a, b in zip(corners[:-1], corners[1:]):
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * t)
        steps.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(steps)


def contour_h(ctx: Optional[MollifierContext], rho: complex, alpha: float, R: float,
              kplus: Optional[Callable[[np.ndarray], np.ndarray]] = None, order: int = 64) -> ContourH:
    """R̃₁(x) = (1/2πi)∮ φ_s(x) exp(s²(log R)²/ω²) / (s Q^s 𝒦₊(ρ+s)) ds.

    The rectangle has vertices ±ω ± iω/log R. When |𝒦₊| drops below
    1e-6 at a node the rectangle is enlarged by 5% and retried.
    """
    omega = alpha * R
    spread = (math.log(R) / omega) ** 2
    if kplus is None:
        if ctx is None:
            raise ValueError("either a mollifier context or a synthetic K+ is required")

        def kplus(s):
            return np.array([K_pm(ctx, complex(rho) + v, 1) for v in np.ravel(s)])

    nudges = 0
    factor = 1.0
    while True:
        width, height = omega * factor, omega / math.log(R) * factor
        s, ds = _rectangle(width, height, order)
        kvals = np.asarray(kplus(s), dtype=complex)
        if np.min(np.abs(kvals)) >= NUDGE_FLOOR or nudges >= MAX_NUDGES:
            break
        nudges += 1
        factor *= 1.05
        logger.info(f"K+ nearly vanishes on the contour; enlarging rectangle by 5% (nudge {nudges})")
    weights = np.exp(spread * s * s - s / alpha) / (s * kvals) * ds / (2j * math.pi)
    rates = s / alpha

    def rule(x):
        x = np.asarray(x, dtype=float)
        return np.exp(x[..., None] * rates) @ weights

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return np.exp(x[..., None] * rates) @ (weights * rates)

    fn = IntervalFunction(rule, (-2.0, 2.0), derivative, "R1")
    constant = None
    if ctx is not None:
        constant = 1 / K_pm(ctx, complex(rho), 1)
    return ContourH(fn, s, weights, (width, height), nudges, constant)


def right_side(x: float, alpha: float, R: float, kplus: Callable[[complex], complex],
               order: int = 64) -> complex:
    """The right vertical side of the R̃₁ contour on its own, Gauss–Legendre in t."""
    omega = alpha * R
    spread = (math.log(R) / omega) ** 2
    height = omega / math.log(R)
    t, w = reference_rule(order)
    ts = height * t
    s = omega + 1j * ts
    vals = np.exp((x - 1) * s / alpha + spread * s * s) / (s * np.array([kplus(v) for v in s]))
    return complex(np.dot(w * height, vals) / (2 * math.pi))


def right_side_reference(x: float, alpha: float, R: float) -> complex:
    """Same segment with 𝒦₊ ≡ 1, integrated by scipy.integrate.quad."""
    omega = alpha * R
    spread = (math.log(R) / omega) ** 2
    height = omega / math.log(R)

    def f(t, part):
        s = complex(omega, t)
        v = np.exp((x - 1) * s / alpha + spread * s * s) / s / (2 * math.pi)
        return v.real if part == 0 else v.imag

    re, _ = integrate.quad(f, -height, height, args=(0,), epsabs=1e-13, epsrel=1e-12, limit=200)
    im, _ = integrate.quad(f, -height, height, args=(1,), epsabs=1e-13, epsrel=1e-12, limit=200)
    return complex(re, im)


def projection_residual(contour: ContourH, thetas: Sequence[complex], alpha: float,
                        weight: WeightPair) -> Dict:
    """Distance of R̃₁ − 𝒦₊(ρ)^{-1}φ₀ from span{φ_θ}, in the weighted norm."""
    thetas = np.asarray(thetas, dtype=complex)
    _check_distinct(thetas)
    x, s1, s2 = _sobolev_nodes(weight)
    rates = thetas / alpha
    basis = np.exp(np.outer(x, rates))
    V = np.vstack([s1[:, None] * basis * rates[None, :], s2[:, None] * basis])
    shift = contour.constant_term or 0.0
    fx = contour.function.rule(x) - shift
    dfx = contour.function.derivative(x)
    target = np.concatenate([s1 * dfx, s2 * fx])
    coeffs = np.linalg.lstsq(V, target, rcond=None)[0]
    residual = float(np.linalg.norm(target - V @ coeffs))
    return {"residual": residual, "target_norm": float(np.linalg.norm(target)),
            "relative": residual / max(float(np.linalg.norm(target)), 1e-300), "coeffs": coeffs}
