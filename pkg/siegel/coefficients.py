import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from sympy import primerange

from .characters import Character

logger = logging.getLogger(__name__)

KINDS = ("nu", "upsilon", "iota", "lambda_plus", "lambda_minus")


class TableShortfallError(ValueError):
    """A requested index lies beyond the table limit."""


@dataclass(eq=False)
class CoeffTable:
    """Arithmetic sequence stored with index n at position n (position 0 unused)."""
    kind: str
    limit: int
    values: np.ndarray
    parameters: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown coefficient kind {self.kind}")
        if len(self.values) != self.limit + 1:
            raise ValueError("values must hold positions 0..limit")

    def __getitem__(self, n):
        return self.values[n]

    def require(self, n: int):
        if n > self.limit:
            raise TableShortfallError(f"{self.kind} table covers n <= {self.limit}, need {n}")

    @classmethod
    def synthetic(cls, kind: str, limit: int, entries: Dict[int, float]) -> "CoeffTable":
        """A table that is zero except for the given entries."""
        values = np.zeros(limit + 1)
        for n, v in entries.items():
            values[n] = v
        return cls(kind, limit, values, {"synthetic": True})


def mobius_table(N: int) -> np.ndarray:
    mu = np.ones(N + 1, dtype=np.int64)
    mu[0] = 0
    for p in primerange(2, N + 1):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def divisor_count_table(N: int) -> np.ndarray:
    tau = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        tau[d::d] += 1
    return tau


def dirichlet_convolve(f: np.ndarray, g: np.ndarray, N: int) -> np.ndarray:
    """(f ⋆ g)(n) for n <= N; arrays are indexed from position 1."""
    out = np.zeros(N + 1, dtype=np.result_type(f, g))
    for d in np.flatnonzero(f[1:N + 1]) + 1:
        m = N // d
        out[d::d] += f[d] * g[1:m + 1]
    return out


def _chi_ints(chi: Character, N: int) -> np.ndarray:
    return np.rint(chi(np.arange(N + 1)).real).astype(np.int64)


def nu_table(chi: Character, N: int) -> CoeffTable:
    """ν(n) = Σ_{d|n} χ(d), the coefficients of ζ(s)L(s,χ)."""
    ones = np.ones(N + 1, dtype=np.int64)
    values = dirichlet_convolve(ones, _chi_ints(chi, N), N)
    values[0] = 0
    return CoeffTable("nu", N, values, {"chi": chi.label()})


def upsilon_table(chi: Character, N: int) -> CoeffTable:
    """υ = μ ⋆ μχ, the coefficients of ζ(s)^{-1}L(s,χ)^{-1}."""
    mu = mobius_table(N)
    values = dirichlet_convolve(mu, mu * _chi_ints(chi, N), N)
    return CoeffTable("upsilon", N, values, {"chi": chi.label()})


def lambda_tables(alpha: float, N: int) -> Tuple[CoeffTable, CoeffTable]:
    """λ± by convolution sieve, the coefficients of ζ(s±α)/ζ(s∓α)."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    n = np.arange(N + 1, dtype=float)
    n[0] = 1.0
    mu = mobius_table(N).astype(float)
    up = n ** alpha
    down = n ** -alpha
    plus = dirichlet_convolve(down, mu * up, N)
    minus = dirichlet_convolve(up, mu * down, N)
    plus[0] = minus[0] = 0.0
    params = {"alpha": alpha}
    return CoeffTable("lambda_plus", N, plus, params), CoeffTable("lambda_minus", N, minus, dict(params))


def iota_table(chi: Character, capF: int, check_bound: bool = True) -> CoeffTable:
    """ι = ν_{≤F} ⋆ υ_{≤F} − [n=1], supported on (F, F²]."""
    N = capF * capF
    nu = nu_table(chi, capF).values
    up = upsilon_table(chi, capF).values
    nu_t = np.zeros(N + 1, dtype=np.int64)
    up_t = np.zeros(N + 1, dtype=np.int64)
    nu_t[:capF + 1] = nu
    up_t[:capF + 1] = up
    values = dirichlet_convolve(nu_t, up_t, N)
    values[1] -= 1
    if check_bound:
        bound = nu_table(chi, N).values * divisor_count_table(N)
        excess = np.flatnonzero(np.abs(values[1:]) > bound[1:])
        if excess.size:
            raise ArithmeticError(f"iota exceeds nu*tau at n={int(excess[0]) + 1}")
    return CoeffTable("iota", N, values, {"chi": chi.label(), "capF": capF})


def weighted_tail_sum(table: CoeffTable, a: float, b: float, weight: int = 0) -> float:
    """Σ_{a≤n≤b} v(n)² τ(n)^{2·weight} / n."""
    lo, hi = max(1, math.ceil(a)), math.floor(b)
    if lo > hi:
        return 0.0
    table.require(hi)
    n = np.arange(lo, hi + 1)
    terms = np.abs(table.values[lo:hi + 1]).astype(float) ** 2 / n
    if weight:
        terms = terms * divisor_count_table(hi)[lo:hi + 1].astype(float) ** (2 * weight)
    return math.fsum(terms)


def inverse_identity_residual(nu: CoeffTable, upsilon: CoeffTable) -> int:
    """max |(ν ⋆ υ)(n) − [n=1]| in integer arithmetic."""
    N = min(nu.limit, upsilon.limit)
    conv = dirichlet_convolve(nu.values, upsilon.values, N)
    conv[1] -= 1
    return int(np.max(np.abs(conv[1:])))


def lambda_reciprocity_residual(plus: CoeffTable, minus: CoeffTable) -> float:
    """max |(λ+ ⋆ λ−)(n) − [n=1]|."""
    N = min(plus.limit, minus.limit)
    conv = dirichlet_convolve(plus.values, minus.values, N)
    conv[1] -= 1.0
    return float(np.max(np.abs(conv[1:])))


def lambda_prime_power_check(plus: CoeffTable, minus: CoeffTable, max_exponent: int = 6) -> Dict:
    """Closed form λ−(p^l) = p^{lα}(1 − p^{−2α}) and |λ+(p^l)| ≤ λ−(p^l)."""
    alpha = plus.parameters["alpha"]
    N = min(plus.limit, minus.limit)
    worst_identity = 0.0
    worst_excess = -math.inf
    checked = 0
    for p in primerange(2, N + 1):
        pl = p
        for l in range(1, max_exponent + 1):
            if pl > N:
                break
            closed = p ** (l * alpha) * (1 - p ** (-2 * alpha))
            worst_identity = max(worst_identity, abs(minus[pl] - closed))
            worst_excess = max(worst_excess, abs(plus[pl]) - minus[pl])
            checked += 1
            pl *= p
    return {
        "checked": checked,
        "identity_residual": worst_identity,
        "max_excess": worst_excess,
        "passed": worst_identity < 1e-12 and worst_excess <= 1e-12,
    }


def lambda_energy_ratio(table: CoeffTable, Q: float, eta: float) -> float:
    """Σ_{1<n≤Q^η} λ(n)²/n divided by η²."""
    return weighted_tail_sum(table, 2, Q ** eta) / eta ** 2
