"""The linear functional Φ on C[-1,1] and the functionals derived from it.

Φ, Φ₁ and Φ* are finite point functionals: weighted sums of f at the nodes
1 − α log n and α log n − 1. Ξ adds two semicircle contour integrals of
𝒦₋(ρ+s)Φ(f*φ_s), and Θ assembles the three. The error functionals ℰ₁, ℰ₂
and ℰ are built from the 𝒳± and 𝒴 sums with the sine kernels and U±.

On desk parameters the 𝓛² prefactor of Ξ is read as 1/α, the value it
takes under the original coupling α = 𝓛^{-2}.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.special import sici

from .interval import IntervalFunction, WeightPair, norm
from .lfunc import vartheta
from .mollifier import K_pm, MollifierContext, upsilon_functional
from .quadrature import adaptive_gl, reference_rule

logger = logging.getLogger(__name__)

XI_START_NODES = 64
XI_MAX_NODES = 1024
XI_TOL = 1e-8
EXP_MINUS_2 = math.exp(-2.0)


def _csum(terms: np.ndarray) -> complex:
    terms = np.asarray(terms, dtype=complex)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass(frozen=True)
class PointFunctional:
    """f ↦ Σ w_i f(x_i); ``n`` keeps the integer each node came from."""
    nodes: np.ndarray
    weights: np.ndarray
    n: np.ndarray

    def __call__(self, f: IntervalFunction) -> complex:
        if not self.nodes.size:
            return 0j
        return self.apply(f(self.nodes))

    def apply(self, values: np.ndarray) -> complex:
        return _csum(self.weights * values)

    def without_unit(self) -> "PointFunctional":
        keep = self.n != 1
        return PointFunctional(self.nodes[keep], self.weights[keep], self.n[keep])

    @staticmethod
    def concat(*parts: "PointFunctional") -> "PointFunctional":
        return PointFunctional(np.concatenate([p.nodes for p in parts]),
                               np.concatenate([p.weights for p in parts]),
                               np.concatenate([p.n for p in parts]))


def _branch(ctx: MollifierContext, sign: int, conj: bool, s: complex, lo: float, hi: float,
            node: Callable[[np.ndarray], np.ndarray], use_minus_table: Optional[bool] = None) -> PointFunctional:
    """Σ_{lo<n≤hi} λ(n)ψ(n)n^{-s}ϑ(Q^{4/3 or 2/3}/n) placed at node(α log n)."""
    minus = sign < 0 if use_minus_table is None else use_minus_table
    table = ctx.tables.lambda_minus if minus else ctx.tables.lambda_plus
    first, last = math.floor(lo) + 1, math.floor(hi + 1e-9)
    if last < first:
        empty = np.array([])
        return PointFunctional(empty, empty.astype(complex), empty.astype(int))
    table.require(last)
    n = np.arange(first, last + 1)
    lam = table.values[first:last + 1]
    keep = np.flatnonzero(lam)
    n, lam = n[keep], lam[keep]
    chars = ctx.psi(n)
    if conj:
        chars = np.conj(chars)
    logn = np.log(n)
    exponent = 4 / 3 if sign > 0 else 2 / 3
    weights = lam * chars * np.exp(-complex(s) * logn) * vartheta(ctx.params.Q ** exponent / n, ctx.kernel)
    return PointFunctional(node(ctx.params.alpha * logn), weights.astype(complex), n)


def phi_functional(ctx: MollifierContext, rho: complex) -> PointFunctional:
    """Φ(·;ρ,ψ) with the minus branch carrying its negative sign in the weights."""
    Q = ctx.params.Q
    plus = _branch(ctx, 1, False, rho, 0, Q ** 1.5, lambda a: 1 - a)
    minus = _branch(ctx, -1, True, 1 - complex(rho), 0, Q, lambda a: a - 1)
    return PointFunctional.concat(plus, PointFunctional(minus.nodes, -minus.weights, minus.n))


def phi(f: IntervalFunction, ctx: MollifierContext, rho: complex) -> complex:
    return phi_functional(ctx, rho)(f)


def phi_decomposition(f: IntervalFunction, ctx: MollifierContext, rho: complex) -> Dict:
    """Φ(f) against ϑ(Q^{4/3})f(1) − ϑ(Q^{2/3})f(−1) + Φ₁(f)."""
    functional = phi_functional(ctx, rho)
    Q, kp = ctx.params.Q, ctx.kernel
    full = functional(f)
    phi1 = functional.without_unit()(f)
    boundary = vartheta(Q ** (4 / 3), kp) * f(1.0) - vartheta(Q ** (2 / 3), kp) * f(-1.0)
    return {"phi": full, "phi1": phi1, "boundary": complex(boundary),
            "residual": abs(full - (boundary + phi1))}


def phi_star_functional(ctx: MollifierContext, rho: complex) -> PointFunctional:
    """Φ* with nodes 1+ε−α log n (Q^ε < n ≤ Q^{3/2}) and α log n−1+ε (1 < n ≤ Q)."""
    Q, eps = ctx.params.Q, ctx.params.epsilon
    plus = _branch(ctx, 1, False, rho, Q ** eps, Q ** 1.5, lambda a: 1 + eps - a)
    minus = _branch(ctx, -1, True, 1 - complex(rho), 1, Q, lambda a: a - 1 + eps)
    return PointFunctional.concat(plus, PointFunctional(minus.nodes, -minus.weights, minus.n))


def phi_star(f: IntervalFunction, ctx: MollifierContext, rho: complex) -> complex:
    return phi_star_functional(ctx, rho)(f)


def convolve_exponential(f: IntervalFunction, s: complex, alpha: float, x: np.ndarray,
                         tol: float = 1e-12, order: int = 24, max_panels: int = 64) -> np.ndarray:
    """(f*φ_s)(x) at many x at once by composite Gauss–Legendre with panel doubling."""
    x = np.asarray(x, dtype=float)
    f._check(np.concatenate([x.ravel(), [0.0]]))
    rate = complex(s) / alpha
    t, w = reference_rule(order)
    panels, previous = 1, None
    while True:
        edges = np.arange(panels + 1) / panels
        half = 0.5 * np.diff(edges)
        u = (half[:, None] * (t[None, :] + 1) + edges[:-1, None]).ravel()
        wu = (half[:, None] * w[None, :]).ravel()
        y = x[:, None] * u[None, :]
        current = (f.rule(x[:, None] - y) * np.exp(rate * y) * wu).sum(axis=1) * x
        if previous is not None:
            change = np.max(np.abs(current - previous)) if x.size else 0.0
            if change <= tol * max(1.0, float(np.max(np.abs(current))) if x.size else 1.0):
                return current
        if panels >= max_panels:
            logger.warning(f"convolution with phi[{s}] stopped at {panels} panels")
            return current
        previous, panels = current, panels * 2


@dataclass
class ContourResult:
    value: complex
    converged: bool
    iterates: List[complex] = field(default_factory=list)
    nodes: int = 0

    def to_dict(self) -> Dict:
        return {"value": self.value, "converged": self.converged,
                "last_iterates": self.iterates[-2:], "nodes": self.nodes}


def _semicircle(order: int, lower: float, upper: float):
    t, w = reference_rule(order)
    half = 0.5 * (upper - lower)
    return half * t + 0.5 * (upper + lower), half * w


def xi(f: IntervalFunction, ctx: MollifierContext, rho: complex,
       kminus: Optional[Callable[[complex], complex]] = None,
       start_nodes: int = XI_START_NODES, tol: float = XI_TOL,
       max_nodes: int = XI_MAX_NODES) -> ContourResult:
    """Ξ(f) over the semicircles 𝒞± of radius ω, Gauss–Legendre in the angle.

    The node count doubles from ``start_nodes`` until two successive values
    agree to ``tol``; a non-converged result carries its last iterates.
    ``kminus`` replaces s ↦ 𝒦₋(ρ+s,ψ) when given.
    """
    params = ctx.params
    alpha, omega, eps = params.alpha, params.omega, params.epsilon
    functional = phi_functional(ctx, rho)
    if kminus is None:
        def kminus(s):
            return K_pm(ctx, complex(rho) + s, -1)

    def half_integral(order: int, lower: float, upper: float, shift: float) -> complex:
        angles, weights = _semicircle(order, lower, upper)
        total = []
        for a, wt in zip(angles, weights):
            s = omega * complex(math.cos(a), math.sin(a))
            conv = convolve_exponential(f, s, alpha, functional.nodes)
            total.append(wt * s * kminus(s) * functional.apply(conv) * np.exp(shift * s / alpha))
        return _csum(np.array(total)) / (2 * math.pi)

    iterates = []
    nodes = start_nodes
    while nodes <= max_nodes:
        right = half_integral(nodes, -math.pi / 2, math.pi / 2, eps)
        left = half_integral(nodes, math.pi / 2, 3 * math.pi / 2, 2 + eps)
        iterates.append((right - EXP_MINUS_2 * left) / alpha)
        if len(iterates) > 1 and abs(iterates[-1] - iterates[-2]) <= tol * max(1.0, abs(iterates[-1])):
            return ContourResult(iterates[-1], True, iterates, nodes)
        nodes *= 2
    logger.warning(f"Xi did not settle within {max_nodes} nodes: last iterates {iterates[-2:]}")
    return ContourResult(iterates[-1], False, iterates, nodes // 2)


@dataclass
class ThetaResult:
    value: complex
    xi: ContourResult
    phi_star: complex
    boundary: complex

    def to_dict(self) -> Dict:
        return {"value": self.value, "xi": self.xi.to_dict(), "phi_star": self.phi_star,
                "boundary": self.boundary}


def theta_functional(f: IntervalFunction, ctx: MollifierContext, rho: complex,
                     kminus: Optional[Callable[[complex], complex]] = None, **xi_options) -> ThetaResult:
    """Θ(f) = −(1−e^{−2})f(−1+ε) + Ξ(f) + Φ*(f)."""
    eps = ctx.params.epsilon
    boundary = -(1 - EXP_MINUS_2) * f(-1 + eps)
    xr = xi(f, ctx, rho, kminus=kminus, **xi_options)
    star = phi_star(f, ctx, rho)
    return ThetaResult(boundary + xr.value + star, xr, star, complex(boundary))


def U_pm(x, R: float, sign: int, method: str = "closed"):
    """U±(x) = (1/2πi)∫_{𝒞±} Q^{xs} ds/s.

    ``closed`` uses 1/2 ± Si(Rx)/π; ``contour`` integrates over the
    semicircle angle, where the integrand is exp(Rx e^{iφ}).
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if method == "closed":
        si, _ = sici(np.asarray(x, dtype=float) * R)
        out = 0.5 + sign * si / math.pi
        return out if np.ndim(out) else float(out)
    if method != "contour":
        raise ValueError(f"unknown method {method}")
    lower, upper = (-math.pi / 2, math.pi / 2) if sign > 0 else (math.pi / 2, 3 * math.pi / 2)

    def one(v):
        res = adaptive_gl(lambda a: np.exp(R * v * np.exp(1j * a)).real, lower, upper, tol=1e-13)
        return res.value.real / (2 * math.pi)

    xs = np.asarray(x, dtype=float)
    out = np.array([one(v) for v in xs.ravel()]).reshape(xs.shape)
    return out if out.ndim else float(out)


def U_minus_tail(eps: float, R: float) -> float:
    """(1/π)∫_R^∞ sin(εy)/y dy through the sine integral."""
    si, _ = sici(eps * R)
    return 0.5 - si / math.pi


def U_decay_report(R: float, xs: np.ndarray) -> Dict:
    """Largest (1+R|x|)·|U∓(x)| on each side and the worst |U₊+U₋−1|."""
    xs = np.asarray(xs, dtype=float)
    plus, minus = U_pm(xs, R, 1), U_pm(xs, R, -1)
    pos, neg = xs >= 0, xs <= 0
    return {
        "sum_residual": float(np.max(np.abs(plus + minus - 1))),
        "right_decay_constant": float(np.max((1 + R * xs[pos]) * np.abs(minus[pos]))) if pos.any() else 0.0,
        "left_decay_constant": float(np.max((1 + R * np.abs(xs[neg])) * np.abs(plus[neg]))) if neg.any() else 0.0,
    }


def _sine_ratio(R: float, x: np.ndarray) -> np.ndarray:
    """sin(Rx)/x, equal to R at x = 0."""
    return R * np.sinc(R * x / math.pi)


def X_plus(x, R: float):
    x = np.asarray(x, dtype=float)
    return (_sine_ratio(R, x) + EXP_MINUS_2 * _sine_ratio(R, 2 + x)) / math.pi


def X_minus(x, R: float):
    x = np.asarray(x, dtype=float)
    return (EXP_MINUS_2 * _sine_ratio(R, x) + _sine_ratio(R, x - 2)) / math.pi


def script_X(ctx: MollifierContext, rho: complex, z: np.ndarray, sign: int) -> np.ndarray:
    """𝒳₊(z;ρ,ψ) or 𝒳₋(z;1−ρ,ψ̄) at an array of z."""
    Q, R = ctx.params.Q, ctx.params.R
    z = np.asarray(z, dtype=float)
    if sign > 0:
        br = _branch(ctx, 1, False, rho, 1, Q ** 1.5, lambda a: a, use_minus_table=True)
        kernel = X_plus(z[:, None] - br.nodes[None, :], R)
    else:
        br = _branch(ctx, -1, True, 1 - complex(rho), 1, Q, lambda a: a, use_minus_table=False)
        kernel = X_minus(z[:, None] + br.nodes[None, :], R)
    if not br.nodes.size:
        return np.zeros(z.shape, dtype=complex)
    return kernel @ br.weights


def E1(ctx: MollifierContext, rho: complex) -> float:
    """ℰ₁: the 𝒳± energies over the two δ₁-length end intervals."""
    params = ctx.params
    eps, d1 = params.epsilon, params.delta1

    def density(offset):
        def g(y):
            z = offset + eps - y
            return np.abs(script_X(ctx, rho, z, 1)) ** 2 + np.abs(script_X(ctx, rho, z, -1)) ** 2
        return g

    right = adaptive_gl(density(1.0), 1 - 2 * d1, 1.0, tol=1e-10)
    left = adaptive_gl(density(-1.0), -1.0, -1 + 2 * d1, tol=1e-10)
    return float(right.value.real + left.value.real)


def Y_sums(ctx: MollifierContext, rho: complex) -> Dict[str, complex]:
    """𝒴₁..𝒴₄ with the closed-form U±."""
    Q, R, eps = ctx.params.Q, ctx.params.R, ctx.params.epsilon
    rho_bar = 1 - complex(rho)
    b1 = _branch(ctx, 1, False, rho, 1, Q ** 1.5, lambda a: a, use_minus_table=True)
    b2 = _branch(ctx, -1, True, rho_bar, 0, Q, lambda a: a, use_minus_table=False)
    b3 = _branch(ctx, 1, False, rho, 0, Q ** 1.5, lambda a: a, use_minus_table=True)
    b4 = _branch(ctx, -1, True, rho_bar, 1, Q, lambda a: a, use_minus_table=False)
    return {
        "Y1": b1.apply(U_pm(eps - b1.nodes, R, 1)) if b1.nodes.size else 0j,
        "Y2": b2.apply(U_pm(-2 + eps + b2.nodes, R, 1)) if b2.nodes.size else 0j,
        "Y3": b3.apply(U_pm(2 + eps - b3.nodes, R, -1)) if b3.nodes.size else 0j,
        "Y4": b4.apply(U_pm(eps + b4.nodes, R, -1)) if b4.nodes.size else 0j,
    }


@dataclass
class ErrorReport:
    E1: float
    E2: float
    upsilon: float
    R: float
    Y: Dict[str, complex] = field(default_factory=dict)

    @property
    def upsilon_term(self) -> float:
        return self.upsilon / (self.R ** (1 / 12) * math.log(self.R))

    @property
    def E(self) -> float:
        return self.upsilon_term + self.E1 + self.E2

    @property
    def floor(self) -> float:
        return self.R ** (-1 / 12)

    def to_dict(self) -> Dict:
        return {"E1": self.E1, "E2": self.E2, "E": self.E, "upsilon": self.upsilon,
                "upsilon_term": self.upsilon_term, "R_pow_minus_1_12": self.floor,
                "E_over_floor": self.E / self.floor, "Y": self.Y}


def error_functionals(ctx: MollifierContext, rho: complex, upsilon: Optional[float] = None) -> ErrorReport:
    """ℰ₁, ℰ₂ = ε^{-1}Σ|𝒴ᵢ|² and ℰ = Υ/(R^{1/12} log R) + ℰ₁ + ℰ₂."""
    params = ctx.params
    if upsilon is None:
        upsilon = upsilon_functional(ctx, rho).total
    ys = Y_sums(ctx, rho)
    e2 = math.fsum(abs(v) ** 2 for v in ys.values()) / params.epsilon
    report = ErrorReport(E1(ctx, rho), e2, upsilon, params.R, ys)
    logger.info(f"{ctx.psi.label()}: E={report.E:.4g} against R^(-1/12)={report.floor:.4g}")
    return report


def phi_vs_kplus(ctx: MollifierContext, rho: complex, s: complex) -> Dict:
    """Φ(φ_s) next to Q^s𝒦₊(ρ+s,ψ)."""
    lhs = phi(IntervalFunction.exponential(s, ctx.params.alpha), ctx, rho)
    rhs = complex(np.exp(complex(s) * ctx.params.log_Q)) * K_pm(ctx, complex(rho) + s, 1)
    return {"phi": lhs, "shape": rhs, "residual": abs(lhs - rhs)}


def phi1_shape(f: IntervalFunction, ctx: MollifierContext, rho: complex) -> Dict:
    """|Φ₁(f)| / (‖f‖ log R)."""
    weight = WeightPair(ctx.params.delta, ctx.params.d)
    size = norm(f, weight)
    value = phi_functional(ctx, rho).without_unit()(f)
    return {"phi1": value, "norm": size, "constant": abs(value) / (size * math.log(ctx.params.R))}


def theta_vs_shape(ctx: MollifierContext, rho: complex,
                   kminus: Optional[Callable[[complex], complex]] = None) -> Dict:
    """Θ(φ₀) next to (1−e^{−2})U₋(ε)Φ(φ₀)."""
    one = IntervalFunction.exponential(0.0, ctx.params.alpha)
    theta = theta_functional(one, ctx, rho, kminus=kminus)
    shape = (1 - EXP_MINUS_2) * U_pm(ctx.params.epsilon, ctx.params.R, -1) * phi(one, ctx, rho)
    return {"theta": theta.value, "shape": shape, "residual": abs(theta.value - shape),
            "converged": theta.xi.converged}
