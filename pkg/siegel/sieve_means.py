"""Large-sieve ratios and zero-anchored means over the family Ψ.

Constants implicit in the mean-value bounds are never fixed: everything here
is reported as a ratio against the bound's shape.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .characters import Character, FamilySpec, build_family
from .zeros import ZeroSet

logger = logging.getLogger(__name__)


class MissingZeroDataError(ValueError):
    """A family member has no scanned zero set."""


def value_matrix(members: Sequence[Character], N: int) -> np.ndarray:
    """V[j, n-1] = ψ_j(n) for 1 ≤ n ≤ N."""
    n = np.arange(1, N + 1)
    if not members:
        return np.zeros((0, N), dtype=complex)
    return np.vstack([psi(n) for psi in members]).astype(complex)


def _row_energies(V: np.ndarray, coeffs: np.ndarray, workers: int) -> np.ndarray:
    """|Σ a_n ψ(n)|² per member; chunks are reduced in member order."""
    if workers <= 1 or V.shape[0] < 2 * workers:
        return np.abs(V @ coeffs) ** 2
    chunks = np.array_split(np.arange(V.shape[0]), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda idx: np.abs(V[idx] @ coeffs) ** 2, chunks))
    return np.concatenate(parts)


def large_sieve_lhs(members: Sequence[Character], coeffs: Sequence[complex], workers: int = 1) -> float:
    """Σ_ψ |Σ_n a_n ψ(n)|² with a_n indexed from n = 1."""
    coeffs = np.asarray(coeffs, dtype=complex)
    V = value_matrix(members, coeffs.size)
    return math.fsum(_row_energies(V, coeffs, workers))


def brute_force_lhs(members: Sequence[Character], coeffs: Sequence[complex]) -> float:
    """The same sum as a double loop over (m, n); only for small families."""
    total = 0.0
    for psi in members:
        acc = 0j
        for m, am in enumerate(coeffs, start=1):
            for n, an in enumerate(coeffs, start=1):
                acc += am * np.conj(an) * complex(psi(m)) * np.conj(complex(psi(n)))
        total += acc.real
    return total


def large_sieve_ratio(members: Sequence[Character], coeffs: Sequence[complex], Q: float,
                      workers: int = 1) -> float:
    """LHS / (Q² Σ|a_n|²) for coefficients supported on n ≤ N ≤ Q²."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size > Q * Q:
        raise ValueError(f"N={coeffs.size} exceeds Q^2={Q * Q:g}")
    mass = math.fsum(np.abs(coeffs) ** 2)
    if mass == 0:
        return 0.0
    return large_sieve_lhs(members, coeffs, workers) / (Q * Q * mass)


def adversarial_coeffs(psi: Character, N: int) -> np.ndarray:
    """a_n = conj ψ(n), which makes the ψ-term equal to (number of units ≤ N)²."""
    return np.conj(psi(np.arange(1, N + 1))).astype(complex)


@dataclass
class SieveReport:
    D: int
    Q: float
    N: int
    family_size: int
    ratios: List[float]
    adversarial: float
    single_term: float
    seed: int

    @property
    def max_ratio(self) -> float:
        return max(self.ratios + [self.adversarial, self.single_term])

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.ratios)) if self.ratios else 0.0

    def to_dict(self) -> Dict:
        return {
            "D": self.D, "Q": self.Q, "N": self.N, "family_size": self.family_size,
            "trials": len(self.ratios), "seed": self.seed,
            "max_random_ratio": max(self.ratios) if self.ratios else 0.0,
            "mean_random_ratio": self.mean_ratio,
            "adversarial_ratio": self.adversarial,
            "single_term_ratio": self.single_term,
            "max_ratio": self.max_ratio,
        }


def sieve_check(D: int, Q: float, trials: int = 50, seed: int = 0, N: Optional[int] = None,
                max_members: Optional[int] = None, workers: int = 1) -> SieveReport:
    """Random ±1, adversarial and single-term coefficient trials over Ψ."""
    family = build_family(FamilySpec.from_scale(D, Q))
    members = family.members(max_members)
    N = N or int(math.floor(Q * Q))
    rng = np.random.default_rng(seed)
    V = value_matrix(members, N)

    def ratio(a: np.ndarray) -> float:
        mass = math.fsum(np.abs(a) ** 2)
        return math.fsum(_row_energies(V, a, workers)) / (Q * Q * mass)

    ratios = [ratio(rng.choice([-1.0, 1.0], size=N).astype(complex)) for _ in range(trials)]
    adversarial = ratio(adversarial_coeffs(members[0], N)) if members else 0.0
    single = np.zeros(N, dtype=complex)
    single[0] = 1.0
    report = SieveReport(family.spec.D, Q, N, len(members), ratios, adversarial, ratio(single), seed)
    logger.info(f"large sieve Q={Q:g}: |Psi|={len(members)}, max ratio {report.max_ratio:.4f}")
    return report


def doubling_report(D: int, Qs: Sequence[float] = (10, 20, 40), trials: int = 50,
                    seed: int = 0, growth_limit: float = 2.0, workers: int = 1) -> Dict:
    """Max ratio as Q doubles; growth beyond the limit marks a failure."""
    reports = [sieve_check(D, Q, trials, seed, workers=workers) for Q in Qs]
    maxima = [r.max_ratio for r in reports]
    growth = [b / a if a > 0 else math.inf for a, b in zip(maxima[:-1], maxima[1:])]
    return {
        "Q": list(Qs),
        "max_ratio": maxima,
        "growth": growth,
        "passes": all(g <= growth_limit for g in growth),
        "reports": [r.to_dict() for r in reports],
    }


def decomposition_check(members: Sequence[Character], a: Sequence[complex],
                        b: Sequence[complex]) -> Dict[str, float]:
    """LHS(a+b) = LHS(a) + LHS(b) + cross terms, against the double loop.

    a and b must have disjoint supports.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if np.any((a != 0) & (b != 0)):
        raise ValueError("supports overlap")
    V = value_matrix(members, a.size)
    Sa, Sb = V @ a, V @ b
    cross = 2 * math.fsum(np.real(Sa * np.conj(Sb)))
    lhs_a = math.fsum(np.abs(Sa) ** 2)
    lhs_b = math.fsum(np.abs(Sb) ** 2)
    combined = math.fsum(np.abs(Sa + Sb) ** 2)
    brute = brute_force_lhs(members, a + b)
    scale = max(1.0, abs(brute))
    return {
        "additive_residual": abs(combined - (lhs_a + lhs_b + cross)) / scale,
        "brute_force_residual": abs(combined - brute) / scale,
        "cross_term": cross,
    }


def dirichlet_poly_at(psi: Character, coeffs: Sequence[complex], points: Sequence[complex]) -> np.ndarray:
    """P(s, ψ) = Σ a_n ψ(n) n^{-s} at each point."""
    coeffs = np.asarray(coeffs, dtype=complex)
    n = np.arange(1, coeffs.size + 1)
    weights = coeffs * psi(n)
    s = np.asarray(points, dtype=complex)
    return np.exp(-np.outer(s, np.log(n))) @ weights


@dataclass
class MeanReport:
    total: float
    bound: float
    per_member: Dict[str, float] = field(default_factory=dict)
    anchors: int = 0

    @property
    def ratio(self) -> float:
        return self.total / self.bound if self.bound > 0 else 0.0

    def to_dict(self) -> Dict:
        return {"total": self.total, "bound": self.bound, "ratio": self.ratio,
                "anchors": self.anchors, "per_member": self.per_member}


def zero_anchored_mean(entries: Sequence[Tuple[Character, Optional[ZeroSet]]],
                       coeffs: Sequence[complex], L: float, Q: float) -> MeanReport:
    """Σ_ψ Σ_{ρ ∈ S(ψ)} |P(ρ, ψ)|² against 𝓛² Q² Σ |a_n|²/n.

    Raises:
        MissingZeroDataError: an entry carries no zero set
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    n = np.arange(1, coeffs.size + 1)
    bound = L * L * Q * Q * math.fsum(np.abs(coeffs) ** 2 / n)
    per_member: Dict[str, float] = {}
    anchors = 0
    for psi, zs in entries:
        if zs is None:
            raise MissingZeroDataError(f"no zero data for {psi.label()}")
        rhos = [r.rho for r in zs.records]
        anchors += len(rhos)
        values = dirichlet_poly_at(psi, coeffs, rhos) if rhos else np.zeros(0)
        per_member[psi.label()] = math.fsum(np.abs(values) ** 2)
    total = math.fsum(per_member[k] for k in per_member)
    return MeanReport(total, bound, per_member, anchors)


def error_mean_report(values: Sequence[float], L: float, Q: float, R: float) -> Dict[str, float]:
    """Σ ℰ(ρ, ψ) over anchors against 𝓛² Q² R^{-1/12} / log R."""
    total = math.fsum(values)
    shape = L * L * Q * Q * R ** (-1 / 12) / math.log(R)
    return {"total": total, "shape": shape, "ratio": total / shape, "anchors": len(values)}
