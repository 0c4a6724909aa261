"""Critical-line zeros of L(s,ψ)L(s,ψχ) in a height window.

Each factor is rotated to a real function on Re s = 1/2 and scanned for sign
changes; the count is audited against the argument principle applied to
the completed L-function on a rectangle around the critical strip.
"""
import cmath
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import loggamma

from .characters import Character
from .lfunc import DEFAULT_POLICY, EvalPolicy, LEvaluator, log_delta_factor, twist
from .params import AnalysisParams

logger = logging.getLogger(__name__)

REFINE_WIDTH = 1e-12
SIMPLICITY_FLOOR = 1e-6
POLE_OFFSET = 1e-6


class FactorSource(Enum):
    PSI = "psi"
    PSI_CHI = "psi_chi"


class MissingAnchorError(ValueError):
    """The anchor is not a zero of the scanned product."""


@dataclass(frozen=True)
class ZeroRecord:
    gamma: float
    source: FactorSource
    derivative: float
    width: float = REFINE_WIDTH
    simple: bool = True
    unresolved: bool = False

    @property
    def rho(self) -> complex:
        return complex(0.5, self.gamma)


@dataclass
class ZeroSet:
    psi_label: str
    window: Tuple[float, float]
    records: List[ZeroRecord] = field(default_factory=list)
    argument_count: Optional[int] = None
    step: Optional[float] = None
    refinements: int = 0

    @classmethod
    def synthetic(cls, ordinates: Sequence[float], source: FactorSource = FactorSource.PSI,
                  window: Optional[Tuple[float, float]] = None) -> "ZeroSet":
        ordinates = sorted(ordinates)
        if window is None:
            window = (ordinates[0] - 1.0, ordinates[-1] + 1.0) if ordinates else (0.0, 0.0)
        return cls("synthetic", window, [ZeroRecord(g, source, 1.0) for g in ordinates])

    @property
    def ordinates(self) -> np.ndarray:
        return np.array([r.gamma for r in self.records])

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.ordinates)

    @property
    def mismatch(self) -> Optional[int]:
        """Argument-principle count minus critical-line count."""
        if self.argument_count is None:
            return None
        return self.argument_count - len(self.records)

    def by_source(self, source: FactorSource) -> List[ZeroRecord]:
        return [r for r in self.records if r.source == source]

    def to_frame(self) -> pd.DataFrame:
        gaps = list(self.gaps) + [np.nan] if self.records else []
        return pd.DataFrame({
            "gamma": [r.gamma for r in self.records],
            "source": [r.source.value for r in self.records],
            "simple": [r.simple for r in self.records],
            "unresolved": [r.unresolved for r in self.records],
            "derivative": [r.derivative for r in self.records],
            "gap": gaps,
        })


def _rotation_phase(psi: Character, t: float) -> float:
    return log_delta_factor(psi, complex(0.5, t)).imag


def hardy_z(psi: Character, t: float, evaluator: Optional[LEvaluator] = None) -> float:
    """Real rotation e^{-iφ(t)/2} L(1/2+it, ψ), where Δ(1/2+it, ψ) = e^{iφ(t)}.

    The phase φ is continuous in t, so sign changes bracket zeros and
    |hardy_z| = |L(1/2+it, ψ)|.
    """
    ev = evaluator or LEvaluator(psi)
    value = ev.value(complex(0.5, t))
    return (cmath.exp(-0.5j * _rotation_phase(psi, t)) * value).real


def _completed_phase(ev: LEvaluator, s: complex) -> float:
    psi = ev.character
    w = (s + psi.parity) / 2
    if w.real < 0.5 and abs(w - round(w.real)) < POLE_OFFSET:
        # Γ pole against a trivial zero of L: Λ is analytic and nonzero here
        s += 2j * POLE_OFFSET
        w = (s + psi.parity) / 2
    gamma_part = (w * math.log(psi.modulus / math.pi) + loggamma(w)).imag
    return gamma_part + cmath.phase(ev.value(s))


def _wrap(x: float) -> float:
    return (x + math.pi) % (2 * math.pi) - math.pi


def argument_principle_count(psi: Character, window: Tuple[float, float],
                             evaluator: Optional[LEvaluator] = None,
                             sigma_lo: float = -0.5, sigma_hi: float = 2.0,
                             spacing: float = 0.25, max_jump: float = math.pi / 4,
                             max_depth: int = 24) -> Dict:
    """Zeros of the completed L-function in the rectangle over the window.

    The phase is tracked along the boundary counter-clockwise with adaptive
    bisection wherever consecutive samples jump by more than max_jump.
    """
    ev = evaluator or LEvaluator(psi)
    t_lo, t_hi = window
    cache: Dict[complex, float] = {}

    def phase(s):
        if s not in cache:
            cache[s] = _completed_phase(ev, s)
        return cache[s]

    def change(z0, z1, depth=0):
        diff = _wrap(phase(z1) - phase(z0))
        if abs(diff) < max_jump or depth >= max_depth:
            return diff
        zm = (z0 + z1) / 2
        return change(z0, zm, depth + 1) + change(zm, z1, depth + 1)

    corners = [complex(sigma_hi, t_lo), complex(sigma_hi, t_hi),
               complex(sigma_lo, t_hi), complex(sigma_lo, t_lo)]
    total = 0.0
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        pieces = max(1, int(math.ceil(abs(z1 - z0) / spacing)))
        nodes = [z0 + (z1 - z0) * j / pieces for j in range(pieces + 1)]
        for a, b in zip(nodes[:-1], nodes[1:]):
            total += change(a, b)
    turns = total / (2 * math.pi)
    if not math.isfinite(turns):
        raise ArithmeticError(f"phase of the completed L-function for {psi.label()} is not finite on the contour")
    return {"count": int(round(turns)), "turns": turns, "samples": len(cache)}


def _scan_factor(psi: Character, ev: LEvaluator, grid: np.ndarray,
                 source: FactorSource, workers: int = 1) -> List[ZeroRecord]:
    def z(t):
        return hardy_z(psi, t, ev)

    chunks = np.array_split(np.arange(len(grid)), max(1, workers))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: [z(t) for t in grid[idx]], chunks))
    else:
        parts = [[z(t) for t in grid[idx]] for idx in chunks]
    values = np.array([v for part in parts for v in part])

    records = []
    for i in range(len(grid) - 1):
        lo, hi = values[i], values[i + 1]
        if lo == 0.0 and i > 0:
            continue
        if lo * hi > 0:
            continue
        if lo == 0.0:
            root = grid[i]
        else:
            root = brentq(z, grid[i], grid[i + 1], xtol=REFINE_WIDTH, rtol=4 * np.finfo(float).eps)
        h = 1e-6
        derivative = abs(z(root + h) - z(root - h)) / (2 * h)
        scale = float(np.max(np.abs(values[max(0, i - 2):i + 4])))
        simple = derivative > SIMPLICITY_FLOOR * max(scale, 1e-300)
        records.append(ZeroRecord(float(root), source, derivative, REFINE_WIDTH, simple, not simple))
    return records


def _auto_step(psi: Character, chi: Character) -> float:
    """An eighth of the mean spacing scale, capped at 0.05."""
    conductor = psi.modulus * twist(psi, chi).modulus
    return min(0.05, 1.0 / (8 * math.log(max(conductor, 3))))


def scan_zero_set(psi: Character, chi: Character, window: Tuple[float, float],
                  step: Optional[float] = None, policy: EvalPolicy = DEFAULT_POLICY,
                  workers: int = 1, max_refinements: int = 3,
                  audit: bool = True) -> ZeroSet:
    """All critical-line zeros of both factors in the window, merged by ordinate.

    On a count mismatch against the argument principle the step is halved
    and the scan repeated, up to max_refinements times; any remaining
    difference is kept on the result as the off-line audit.
    """
    t_lo, t_hi = window
    result = ZeroSet(psi.label(), (t_lo, t_hi))
    if t_hi <= t_lo:
        result.argument_count = 0 if audit else None
        return result
    if step is None:
        step = _auto_step(psi, chi)
    factors = [(psi, FactorSource.PSI), (twist(psi, chi), FactorSource.PSI_CHI)]
    evaluators = [LEvaluator(f, policy.tolerance, policy) for f, _ in factors]

    expected = None
    if audit:
        expected = sum(argument_principle_count(f, (t_lo, t_hi), ev)["count"]
                       for (f, _), ev in zip(factors, evaluators))

    for attempt in range(max_refinements + 1):
        n = max(1, int(math.ceil((t_hi - t_lo) / step)))
        grid = np.linspace(t_lo, t_hi, n + 1)
        records = []
        for (f, source), ev in zip(factors, evaluators):
            records.extend(_scan_factor(f, ev, grid, source, workers))
        records.sort(key=lambda r: (r.gamma, r.source.value))
        for a, b in zip(records[:-1], records[1:]):
            if b.gamma - a.gamma < 2 * REFINE_WIDTH:
                logger.warning(f"unresolved zero cluster near t={a.gamma:.12f} for {psi.label()}")
        result.records = records
        result.step = step
        result.refinements = attempt
        if expected is None or len(records) == expected:
            break
        logger.info(f"{psi.label()}: {len(records)} sign changes vs {expected} by argument principle, halving step")
        step /= 2
    result.argument_count = expected
    if result.mismatch:
        logger.warning(f"{psi.label()}: off-line audit reports {result.mismatch} unmatched zeros in {window}")
    return result


@dataclass
class GapSummary:
    normalized: np.ndarray
    mean: float
    variance: float
    counts: np.ndarray
    edges: np.ndarray
    caveat: str = ("low-height desk statistics; the πα spacing is an asymptotic statement "
                   "for heights near D and is not expected here")

    def to_dict(self) -> Dict:
        return {
            "normalized_gaps": self.normalized.tolist(),
            "mean": self.mean,
            "variance": self.variance,
            "histogram": {"counts": self.counts.tolist(), "edges": self.edges.tolist()},
            "caveat": self.caveat,
        }


def gap_statistics(zs: ZeroSet, alpha: float, bins: int = 20) -> GapSummary:
    """Gaps normalised by πα with a histogram; reported, never asserted."""
    if len(zs.records) < 2:
        raise ValueError("gap statistics need at least two zeros")
    normalized = zs.gaps / (math.pi * alpha)
    counts, edges = np.histogram(normalized, bins=bins)
    return GapSummary(normalized, float(np.mean(normalized)), float(np.var(normalized)), counts, edges)


@dataclass(frozen=True)
class ThetaRecord:
    theta: complex
    source: FactorSource
    region: str
    sign: str
    lattice_index: int
    residual: float


@dataclass
class ShiftedZeroSet:
    rho: ZeroRecord
    thetas: List[ThetaRecord]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.theta for r in self.thetas], dtype=complex)

    def inner(self) -> List[ThetaRecord]:
        return [r for r in self.thetas if r.region == "T1"]


def _classify(theta: complex, alpha: float) -> Tuple[str, int, float]:
    sign = "+" if theta.real > 0 else "-"
    shift = alpha if sign == "+" else -alpha
    l = int(round(theta.imag / (math.pi * alpha)))
    residual = abs(theta - complex(shift, math.pi * l * alpha))
    return sign, l, residual


def shifted_zero_set(rho: ZeroRecord, zs_psi: ZeroSet, zs_psichi: ZeroSet,
                     params: AnalysisParams) -> ShiftedZeroSet:
    """T(ρ,ψ): shifts of neighbouring zeros seen from the anchor ρ.

    ψ-factor zeros give θ = i(γ′−γ) − α and ψχ-factor zeros give
    θ = i(γ′−γ) + α; both kinds are kept inside |θ| < ω, the ψ-factor
    kind also in the annulus ω < |θ| < 3ω.
    """
    psi_zeros = [r.gamma for r in zs_psi.by_source(FactorSource.PSI)]
    psichi_zeros = [r.gamma for r in zs_psichi.by_source(FactorSource.PSI_CHI)]
    pool = psi_zeros if rho.source == FactorSource.PSI else psichi_zeros
    if not any(abs(g - rho.gamma) < 1e-9 for g in pool):
        raise MissingAnchorError(f"anchor γ={rho.gamma} is not among the scanned zeros")

    alpha, omega = params.alpha, params.omega
    thetas = []
    for source, gammas, shift in ((FactorSource.PSI, psi_zeros, -alpha),
                                  (FactorSource.PSI_CHI, psichi_zeros, alpha)):
        for g in gammas:
            theta = complex(shift, g - rho.gamma)
            size = abs(theta)
            if size < omega:
                region = "T1"
            elif source == FactorSource.PSI and size < 3 * omega:
                region = "T2"
            else:
                continue
            sign, l, residual = _classify(theta, alpha)
            thetas.append(ThetaRecord(theta, source, region, sign, l, residual))
    thetas.sort(key=lambda r: (r.theta.imag, r.theta.real))
    return ShiftedZeroSet(rho, thetas)
