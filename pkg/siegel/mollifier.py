"""Mollifier sums and the quantities built from them.

F(s,ψ) = Σ_{n≤F} ν(n)ψ(n)n^{-s} and G(s,ψ) = Σ_{n≤F} υ(n)ψ(n)n^{-s} are
combined with Δ₁ and the L-values of ψ and ψχ into 𝓕, 𝓗, 𝓖 and 𝒦±.
The same context evaluates the membership sups over the desk rectangles
and the partial-sum energy Υ(ρ,ψ) built from the λ± tables.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate

from .characters import Character
from .coefficients import CoeffTable, lambda_tables, nu_table, upsilon_table
from .interval import WeightPair
from .lfunc import DEFAULT_POLICY, EvalPolicy, KernelParams, LEvaluator, delta1, delta_factor, twist, vartheta
from .params import AnalysisParams

logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-14
IDENTITY_FLOOR = 1e-8
DEFAULT_CAPF_CEILING = 20000


class VanishingDenominatorError(ArithmeticError):
    """F(s,ψ) is too small to divide by."""

    def __init__(self, s: complex, magnitude: float):
        super().__init__(f"|F(s,psi)| = {magnitude:.3e} at s={s}")
        self.s = s
        self.magnitude = magnitude


@dataclass(eq=False)
class TableSet:
    nu: CoeffTable
    upsilon: CoeffTable
    lambda_plus: CoeffTable
    lambda_minus: CoeffTable
    capF: int

    def describe(self) -> Dict:
        return {"capF": self.capF, "lambda_limit": self.lambda_plus.limit,
                "nu_limit": self.nu.limit, "upsilon_limit": self.upsilon.limit}


def default_capF(D: int, ceiling: int = DEFAULT_CAPF_CEILING) -> int:
    """The D⁵ truncation, capped for desk runs."""
    return int(min(abs(D) ** 5, ceiling))


def build_tables(chi: Character, params: AnalysisParams, capF: Optional[int] = None) -> TableSet:
    capF = capF or default_capF(params.D)
    lam_limit = max(2, math.floor(params.Q ** 1.5))
    plus, minus = lambda_tables(params.alpha, lam_limit)
    logger.info(f"tables: capF={capF}, lambda to {lam_limit}")
    return TableSet(nu_table(chi, capF), upsilon_table(chi, capF), plus, minus, capF)


@dataclass(frozen=True)
class DirichletPolynomial:
    """Σ c_n n^{-s} over the nonzero coefficients only."""
    support: np.ndarray
    coeffs: np.ndarray

    @classmethod
    def from_table(cls, table: CoeffTable, psi: Character, limit: int) -> "DirichletPolynomial":
        table.require(limit)
        n = np.arange(1, limit + 1)
        c = table.values[1:limit + 1] * psi(n)
        keep = np.flatnonzero(c)
        return cls(n[keep], c[keep].astype(complex))

    @cached_property
    def logs(self) -> np.ndarray:
        return np.log(self.support.astype(float))

    def __call__(self, s: complex) -> complex:
        terms = self.coeffs * np.exp(-complex(s) * self.logs)
        return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass(frozen=True, eq=False)
class MollifierContext:
    psi: Character
    chi: Character
    params: AnalysisParams
    tables: TableSet
    policy: EvalPolicy = field(default=DEFAULT_POLICY)

    @cached_property
    def twisted(self) -> Character:
        return twist(self.psi, self.chi)

    @cached_property
    def L_psi(self) -> LEvaluator:
        return LEvaluator(self.psi, self.policy.tolerance, self.policy)

    @cached_property
    def L_twisted(self) -> LEvaluator:
        return LEvaluator(self.twisted, self.policy.tolerance, self.policy)

    @cached_property
    def F_poly(self) -> DirichletPolynomial:
        return DirichletPolynomial.from_table(self.tables.nu, self.psi, self.tables.capF)

    @cached_property
    def G_poly(self) -> DirichletPolynomial:
        return DirichletPolynomial.from_table(self.tables.upsilon, self.psi, self.tables.capF)

    @cached_property
    def kernel(self) -> KernelParams:
        return KernelParams(self.params.Q)

    @cached_property
    def bar(self) -> "MollifierContext":
        return MollifierContext(self.psi.conj(), self.chi, self.params, self.tables, self.policy)

    def conjugate(self) -> "MollifierContext":
        return self.bar

    def LL(self, s: complex) -> complex:
        return self.L_psi.value(s) * self.L_twisted.value(s)


def F_sum(ctx: MollifierContext, s: complex) -> complex:
    return ctx.F_poly(s)


def G_sum(ctx: MollifierContext, s: complex) -> complex:
    return ctx.G_poly(s)


def _denominator(ctx: MollifierContext, s: complex) -> complex:
    value = F_sum(ctx, s)
    if abs(value) < DENOMINATOR_FLOOR:
        raise VanishingDenominatorError(s, abs(value))
    return value


def script_F(ctx: MollifierContext, s: complex) -> complex:
    """𝓕(s,ψ) = F(s,ψ) + Δ₁(s,ψ)F(1−s,ψ̄)."""
    s = complex(s)
    return F_sum(ctx, s) + delta1(ctx.psi, ctx.chi, s) * F_sum(ctx.conjugate(), 1 - s)


def script_H(ctx: MollifierContext, s: complex) -> complex:
    """𝓗(s,ψ) = Δ₁(s,ψ)F(1−s,ψ̄)/F(s,ψ)."""
    s = complex(s)
    return delta1(ctx.psi, ctx.chi, s) * F_sum(ctx.conjugate(), 1 - s) / _denominator(ctx, s)


def script_G(ctx: MollifierContext, s: complex) -> complex:
    """𝓖(s,ψ) = L(s,ψ)L(s,ψχ)/F(s,ψ)."""
    s = complex(s)
    return ctx.LL(s) / _denominator(ctx, s)


def K_pm(ctx: MollifierContext, s: complex, sign: int) -> complex:
    """𝒦±(s,ψ) = L(s±α,ψ)L(s∓α,ψχ)/F(s,ψ)."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    s = complex(s)
    shift = sign * ctx.params.alpha
    return ctx.L_psi.value(s + shift) * ctx.L_twisted.value(s - shift) / _denominator(ctx, s)


def _relative(lhs: complex, rhs: complex) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def k_identity_residuals(ctx: MollifierContext, w: complex) -> Dict[str, float]:
    """Relative residuals of the four rearrangements of 𝒦± at w.

    Two are shift identities through 𝓖(w∓α), two are reflections
    w ↦ 1−w through Δ and the conjugate context.
    """
    w = complex(w)
    a = ctx.params.alpha
    if abs(F_sum(ctx, w)) < IDENTITY_FLOOR:
        raise VanishingDenominatorError(w, abs(F_sum(ctx, w)))
    bar = ctx.conjugate()
    twisted = ctx.twisted
    out = {}
    plus, minus = K_pm(ctx, w, 1), K_pm(ctx, w, -1)
    F = F_sum
    out["plus.shift"] = _relative(
        plus, F(ctx, w - a) / F(ctx, w) * ctx.L_psi.value(w + a) / ctx.L_psi.value(w - a) * script_G(ctx, w - a))
    out["minus.shift"] = _relative(
        minus, F(ctx, w + a) / F(ctx, w) * ctx.L_psi.value(w - a) / ctx.L_psi.value(w + a) * script_G(ctx, w + a))
    reflect = F(bar, 1 - w) / F(ctx, w)
    out["plus.reflect"] = _relative(
        plus, reflect * delta_factor(ctx.psi, w + a) * delta_factor(twisted, w - a) * K_pm(bar, 1 - w, -1))
    out["minus.reflect"] = _relative(
        minus, reflect * delta_factor(ctx.psi, w - a) * delta_factor(twisted, w + a) * K_pm(bar, 1 - w, 1))
    return out


def k_product_residual(ctx: MollifierContext, rho: complex, s: complex) -> Dict:
    """𝒦₊𝒦₋(ρ+s) against (1−e²Q^{−2s})(1−e^{−2}Q^{−2s}); reported only."""
    s = complex(s)
    z = complex(rho) + s
    value = K_pm(ctx, z, 1) * K_pm(ctx, z, -1)
    q2 = np.exp(-2 * s * ctx.params.log_Q)
    shape = (1 - math.e ** 2 * q2) * (1 - math.e ** -2 * q2)
    return {"value": complex(value), "shape": complex(shape), "residual": abs(value - shape)}


def g_near_one_residual(ctx: MollifierContext, rho: complex, s: complex) -> Dict:
    """𝓖(ρ+s) against 1 − Q^{−2s}; reported only."""
    s = complex(s)
    value = script_G(ctx, complex(rho) + s)
    shape = 1 - np.exp(-2 * s * ctx.params.log_Q)
    return {"value": complex(value), "shape": complex(shape), "residual": abs(value - shape)}


@dataclass(frozen=True)
class OmegaRegion:
    """Rectangle s0 + [σ_lo, σ_hi] × [−h, h] sampled on a closed grid."""
    name: str
    s0: complex
    sigma_lo: float
    sigma_hi: float
    half_height: float

    def grid(self, n: int) -> np.ndarray:
        """n×n points; n ↦ 2n−1 keeps every coarse node bit-for-bit."""
        frac = np.arange(n) / (n - 1)
        sig = self.sigma_lo + (self.sigma_hi - self.sigma_lo) * frac
        tau = -self.half_height + 2 * self.half_height * frac
        return self.s0 + sig[:, None] + 1j * tau[None, :]

    @property
    def degenerate(self) -> bool:
        return not self.sigma_hi > self.sigma_lo


def omega_regions(params: AnalysisParams) -> Tuple[OmegaRegion, OmegaRegion]:
    s0 = complex(0.5, params.anchor_height)
    L = params.L
    log_L = math.log(L)
    omega1 = OmegaRegion("Omega1", s0, -2 * math.sqrt(params.alpha), 1.0, 1 + 20 * L)
    omega2 = OmegaRegion("Omega2", s0, -params.alpha * log_L / 10, 0.5, 1 + 10 * L)
    if omega2.sigma_lo >= 0:
        logger.warning(f"Omega2 lower edge {omega2.sigma_lo:.3g} is not left of the critical line (log L <= 0)")
    return omega1, omega2


@dataclass
class MembershipReport:
    I1: float
    I2: float
    I3: float
    thresholds: Dict[str, float]
    grid: int
    refined: Optional[Dict[str, float]] = None

    @property
    def passes(self) -> Dict[str, bool]:
        return {k: getattr(self, k) < v for k, v in self.thresholds.items()}

    @property
    def in_psi_star(self) -> bool:
        return all(self.passes.values())

    @property
    def sensitivity(self) -> Optional[Dict[str, float]]:
        if self.refined is None:
            return None
        return {k: (self.refined[k] - getattr(self, k)) / max(getattr(self, k), 1e-300)
                for k in ("I1", "I2", "I3")}

    def to_dict(self) -> Dict:
        return {"I1": self.I1, "I2": self.I2, "I3": self.I3, "thresholds": self.thresholds,
                "passes": self.passes, "in_psi_star": self.in_psi_star, "grid": self.grid,
                "refined": self.refined, "sensitivity": self.sensitivity}


def _row_sups(ctx: MollifierContext, row1: np.ndarray, row2: np.ndarray) -> Tuple[float, float, float]:
    i1 = i2 = i3 = 0.0
    for s in row1:
        f, g = F_sum(ctx, s), G_sum(ctx, s)
        i1 = max(i1, abs(f) + abs(g))
        i2 = max(i2, abs(f * g - 1))
    for s in row2:
        i3 = max(i3, abs(ctx.LL(s) - script_F(ctx, s)))
    return i1, i2, i3


def _grid_sups(ctx: MollifierContext, n: int, workers: int) -> Dict[str, float]:
    omega1, omega2 = omega_regions(ctx.params)
    g1, g2 = omega1.grid(n), omega2.grid(n)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(lambda k: _row_sups(ctx, g1[k], g2[k]), range(n)))
    return {"I1": max(r[0] for r in rows), "I2": max(r[1] for r in rows), "I3": max(r[2] for r in rows)}


def membership_thresholds(params: AnalysisParams) -> Dict[str, float]:
    L = params.L
    return {"I1": L ** 3 * math.log(L), "I2": 0.5, "I3": L ** (-24 / 5)}


def membership_diagnostics(ctx: MollifierContext, grid: int = 64, refine: bool = False,
                           workers: int = 1) -> MembershipReport:
    """Grid sups of |F|+|G| and |FG−1| over Ω₁ and of |LL−𝓕| over Ω₂.

    With ``refine`` the grid is refined to 2n−1 points per side, which
    contains the coarse grid, so the refined sups never decrease.
    """
    if grid < 2:
        raise ValueError("grid needs at least two points per side")
    sups = _grid_sups(ctx, grid, workers)
    report = MembershipReport(sups["I1"], sups["I2"], sups["I3"], membership_thresholds(ctx.params), grid)
    if refine:
        report.refined = _grid_sups(ctx, 2 * grid - 1, workers)
    logger.info(f"{ctx.psi.label()}: I1={report.I1:.4g} I2={report.I2:.4g} I3={report.I3:.4g} "
                f"in_psi_star={report.in_psi_star}")
    return report


@dataclass(frozen=True)
class _PartialSums:
    """Terms of 𝒰± in increasing n with their breakpoints y = log n / log Q."""
    y: np.ndarray
    terms: np.ndarray

    def between(self, a: float, b: float) -> complex:
        mask = (self.y > a) & (self.y <= b)
        return complex(self.terms[mask].sum())

    def pieces(self, a: float, lo: float, hi: float) -> List[Tuple[float, float, complex]]:
        """(y0, y1, 𝒰(a, y)) with 𝒰(a, ·) constant on each [y0, y1) inside [lo, hi]."""
        inside = self.y[(self.y > lo) & (self.y < hi)]
        edges = np.concatenate(([lo], inside, [hi]))
        out = []
        for y0, y1 in zip(edges[:-1], edges[1:]):
            if y1 > y0:
                out.append((float(y0), float(y1), self.between(a, y0)))
        return out


def _partial_sums(ctx: MollifierContext, sign: int, s: complex, psi: Optional[Character] = None) -> _PartialSums:
    table = ctx.tables.lambda_plus if sign > 0 else ctx.tables.lambda_minus
    psi = psi or ctx.psi
    limit = table.limit
    table.require(math.floor(ctx.params.Q ** 1.5) if sign > 0 else math.floor(ctx.params.Q))
    n = np.arange(2, limit + 1)
    lam = table.values[2:limit + 1]
    keep = np.flatnonzero(lam)
    n, lam = n[keep], lam[keep]
    exponent = 4 / 3 if sign > 0 else 2 / 3
    weight = vartheta(ctx.params.Q ** exponent / n, ctx.kernel)
    terms = lam * psi(n) * np.exp(-complex(s) * np.log(n)) * weight
    return _PartialSums(np.log(n) / ctx.params.log_Q, terms)


def upsilon_partial(ctx: MollifierContext, sign: int, a: float, b: float, s: complex,
                    psi: Optional[Character] = None) -> complex:
    """𝒰±(a, b; s, ψ) = Σ_{Q^a<n≤Q^b} λ±(n)ψ(n)n^{-s}ϑ(Q^{4/3 or 2/3}/n).

    Raises:
        TableShortfallError: the λ table stops short of Q^b
    """
    table = ctx.tables.lambda_plus if sign > 0 else ctx.tables.lambda_minus
    table.require(math.floor(ctx.params.Q ** b))
    return _partial_sums(ctx, sign, s, psi).between(a, b)


@dataclass
class UpsilonReport:
    plus: float
    minus: float
    star: float
    parts: Dict[str, float]
    threshold: float

    @property
    def total(self) -> float:
        return self.plus + self.minus + self.star

    @property
    def below_threshold(self) -> bool:
        return self.total < self.threshold

    def to_dict(self) -> Dict:
        return {"total": self.total, "plus": self.plus, "minus": self.minus, "star": self.star,
                "parts": self.parts, "threshold": self.threshold, "below_threshold": self.below_threshold}


def _upsilon_sign(ctx: MollifierContext, sums: _PartialSums, weight: WeightPair, prefix: str) -> Dict[str, float]:
    d1 = ctx.params.delta1
    parts = {
        f"{prefix}.head": abs(sums.between(0.0, d1)) ** 2,
        f"{prefix}.body": abs(sums.between(d1, 1.0)) ** 2,
    }
    weighted = 0.0
    for y0, y1, u in sums.pieces(0.0, 0.0, d1):
        if u:
            val, _ = integrate.quad(lambda y: math.exp(-float(weight.log_varpi1(1 - y))), y0, y1,
                                    epsabs=0, epsrel=1e-12)
            weighted += abs(u) ** 2 * val
    parts[f"{prefix}.weighted_integral"] = weighted
    parts[f"{prefix}.integral"] = math.fsum(abs(u) ** 2 * (y1 - y0) for y0, y1, u in sums.pieces(d1, d1, 1.0))
    return parts


def upsilon_functional(ctx: MollifierContext, rho: complex) -> UpsilonReport:
    """Υ(ρ,ψ) = Υ₊ + Υ₋ + Υ* with exact integrals of the piecewise-constant sums.

    Only the ϖ₁(1−y)^{-1} factor needs quadrature; it is integrated piece by piece.
    """
    params = ctx.params
    weight = WeightPair(params.delta, params.d)
    plus = _partial_sums(ctx, 1, rho)
    minus = _partial_sums(ctx, -1, rho)
    parts = _upsilon_sign(ctx, plus, weight, "plus")
    parts.update(_upsilon_sign(ctx, minus, weight, "minus"))
    eps = params.epsilon
    parts["star.epsilon_head"] = abs(plus.between(0.0, eps)) ** 2 / eps ** 2
    parts["star.tail"] = abs(plus.between(1.0, 1.5)) ** 2
    parts["star.integral"] = math.fsum(abs(plus.between(y0, 1.5)) ** 2 * (y1 - y0)
                                       for y0, y1, _ in plus.pieces(1.0, 1.0, 1.5))
    report = UpsilonReport(
        plus=math.fsum(v for k, v in parts.items() if k.startswith("plus.")),
        minus=math.fsum(v for k, v in parts.items() if k.startswith("minus.")),
        star=math.fsum(v for k, v in parts.items() if k.startswith("star.")),
        parts=parts,
        threshold=math.log(params.R) ** 2,
    )
    logger.info(f"{ctx.psi.label()}: Upsilon={report.total:.4g} (threshold {report.threshold:.4g})")
    return report
