"""Dirichlet L-values, functional-equation factors and smoothing kernels.

L(s, ψ) is assembled from Hurwitz zeta values, L = q^{-s} Σ_r ψ(r) ζ(s, r/q).
Two precision policies are available: ``double`` runs a vectorised
Euler–Maclaurin summation over all residues at once, ``mp`` defers to
mpmath at a configurable number of digits.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import bernoulli, erfc, factorial, loggamma

from .characters import Character, gauss_sum

logger = logging.getLogger(__name__)

EM_ORDER = 10
_B = bernoulli(2 * EM_ORDER + 2)
_EM_COEFFS = np.array([_B[2 * j] / factorial(2 * j, exact=True) for j in range(EM_ORDER + 2)])


class PoleError(ArithmeticError):
    """Evaluation requested at the pole s = 1."""


class GammaPoleError(ArithmeticError):
    """A Γ argument of the functional-equation factor is a pole."""


@dataclass(frozen=True)
class EvalPolicy:
    mode: str = "double"
    tolerance: float = 1e-12
    dps: int = 30
    max_doublings: int = 6

    def __post_init__(self):
        if self.mode not in ("double", "mp"):
            raise ValueError(f"unknown precision mode {self.mode}")


DEFAULT_POLICY = EvalPolicy()


def _em_terms(s: complex) -> int:
    return max(10, int(math.ceil(abs(s) + 2 * EM_ORDER + 5)))


def _hurwitz_em(s: complex, a: np.ndarray, weights: np.ndarray, policy: EvalPolicy) -> complex:
    """Σ_r w_r ζ(s, a_r) by Euler–Maclaurin.

    When the weights sum to zero the 1/(s-1) parts cancel and the pole term
    is evaluated in its regularised form, so s = 1 is admissible.
    """
    regular = abs(weights.sum()) < 1e-12
    if s == 1 and not regular:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    terms = _em_terms(s)
    for _ in range(policy.max_doublings + 1):
        k = np.arange(terms)
        base = a[:, None] + k[None, :]
        head = np.exp(-s * np.log(base)).sum(axis=1)
        x = a + terms
        logx = np.log(x)
        if regular:
            z = (1 - s) * logx
            small = np.abs(z) < 1e-300
            pole = np.where(small, -logx, -logx * np.expm1(z) / np.where(small, 1, z))
        else:
            pole = np.exp((1 - s) * logx) / (s - 1)
        tail = pole + 0.5 * np.exp(-s * logx)
        rising = complex(s)
        power = np.exp((-s - 1) * logx)
        for j in range(1, EM_ORDER + 1):
            tail = tail + _EM_COEFFS[j] * rising * power
            rising *= (s + 2 * j - 1) * (s + 2 * j)
            power = power / (x * x)
        remainder = np.abs(_EM_COEFFS[EM_ORDER + 1] * rising * power)
        total = complex(np.dot(weights, head + tail))
        bound = float(np.dot(np.abs(weights), remainder))
        if bound <= policy.tolerance * max(1.0, abs(total)):
            return total
        terms *= 2
    logger.warning(f"Euler-Maclaurin tail {bound:.2e} above target at s={s}")
    return total


def hurwitz_zeta(s: complex, a: float, policy: EvalPolicy = DEFAULT_POLICY) -> complex:
    """ζ(s, a) for 0 < a ≤ 1.

    Raises:
        PoleError: at s = 1
    """
    if not 0 < a <= 1:
        raise ValueError(f"a must lie in (0, 1], got {a}")
    s = complex(s)
    if s == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    if policy.mode == "mp":
        with mpmath.workdps(policy.dps):
            return complex(mpmath.zeta(mpmath.mpc(s), mpmath.mpf(a)))
    return _hurwitz_em(s, np.array([float(a)]), np.array([1.0 + 0j]), policy)


@dataclass(frozen=True)
class LEvaluator:
    """Evaluates L(s, ψ) for one character under a fixed policy."""
    character: Character
    tolerance: float = 1e-12
    policy: EvalPolicy = field(default=DEFAULT_POLICY)

    def value(self, s: complex) -> complex:
        psi = self.character
        q = psi.modulus
        s = complex(s)
        if psi.is_principal and s == 1:
            raise PoleError(f"L(s, principal mod {q}) has a pole at s = 1")
        if self.policy.mode == "mp":
            with mpmath.workdps(self.policy.dps):
                coeffs = [mpmath.mpc(complex(v)) for v in psi.values]
                return complex(mpmath.dirichlet(mpmath.mpc(s), coeffs))
        residues = np.flatnonzero(psi.values)
        residues = np.where(residues == 0, q, residues)
        weights = psi.values[residues % q].astype(complex)
        policy = EvalPolicy(self.policy.mode, self.tolerance, self.policy.dps, self.policy.max_doublings)
        total = _hurwitz_em(s, residues / q, weights, policy)
        return complex(np.exp(-s * math.log(q)) * total)

    def values(self, points: Iterable[complex]) -> np.ndarray:
        return np.array([self.value(s) for s in points], dtype=complex)


def L_value(ev: LEvaluator, s: complex) -> complex:
    return ev.value(s)


@lru_cache(maxsize=4096)
def twist(psi: Character, chi: Character) -> Character:
    """ψχ as a character on the lcm modulus."""
    return psi.mul(chi)


@lru_cache(maxsize=4096)
def root_number_factor(psi: Character) -> complex:
    """C(ψ) = τ(ψ) / (i^a √q)."""
    return gauss_sum(psi) / (1j ** psi.parity * math.sqrt(psi.modulus))


def _gamma_pole(z: complex) -> bool:
    return abs(z.imag) < 1e-12 and z.real < 0.5 and abs(z.real - round(z.real)) < 1e-12


def log_delta_factor(psi: Character, s: complex) -> complex:
    """log Δ(s, ψ) on the branch continuous along vertical lines."""
    a = psi.parity
    q = psi.modulus
    s = complex(s)
    upper, lower = (1 - s + a) / 2, (s + a) / 2
    if _gamma_pole(upper) or _gamma_pole(lower):
        raise GammaPoleError(f"Γ pole in Δ at s={s} (parity {a})")
    return complex(np.log(root_number_factor(psi)) + (0.5 - s) * math.log(q / math.pi)
                   + loggamma(upper) - loggamma(lower))


def delta_factor(psi: Character, s: complex) -> complex:
    """Δ(s, ψ) = L(s, ψ) / L(1 - s, ψ̄)."""
    return complex(np.exp(log_delta_factor(psi, s)))


def delta1(psi: Character, chi: Character, s: complex) -> complex:
    """Δ₁(s, ψ) = Δ(s, ψ) Δ(s, ψχ)."""
    return delta_factor(psi, s) * delta_factor(twist(psi, chi), s)


def functional_equation_residual(ev: LEvaluator, s: complex) -> float:
    """|L(s,ψ) − Δ(s,ψ)L(1−s,ψ̄)|."""
    psi = ev.character
    conj = LEvaluator(psi.conj(), ev.tolerance, ev.policy)
    return abs(ev.value(s) - delta_factor(psi, s) * conj.value(1 - complex(s)))


def completed_lambda_log(ev: LEvaluator, s: complex) -> complex:
    """log of (q/π)^{(s+a)/2} Γ((s+a)/2) L(s,ψ), principal branch of the L factor."""
    psi = ev.character
    s = complex(s)
    half = (s + psi.parity) / 2
    if _gamma_pole(half):
        raise GammaPoleError(f"Γ pole in the completed L-function at s={s}")
    return complex(half * math.log(psi.modulus / math.pi) + loggamma(half) + np.log(ev.value(s)))


def log_derivative_delta1(psi: Character, chi: Character, s: complex, h: float = 1e-5) -> Dict:
    """Centered-difference Δ₁'/Δ₁ with the −2𝓛² and Stirling reference values."""
    twisted = twist(psi, chi)

    def log_d1(z):
        return log_delta_factor(psi, z) + log_delta_factor(twisted, z)

    value = (log_d1(s + h) - log_d1(s - h)) / (2 * h)
    t = max(abs(complex(s).imag), 1.0)
    stirling = -sum(math.log(k * t / (2 * math.pi)) for k in (psi.modulus, twisted.modulus))
    L = math.log(chi.modulus)
    return {
        "value": complex(value),
        "minus_two_L_squared": -2 * L * L,
        "stirling_estimate": stirling,
    }


def crude_bound_report(psi: Character, chi: Character, Q: float,
                       sigmas: Iterable[float], heights: Iterable[float]) -> Dict:
    """Largest ratios of |Δ₁| to Q^{1-2σ} (σ ≥ 1/2) and Q^{1-2σ}D^{2-4σ} (σ ≤ 1/2)."""
    D = chi.modulus
    upper, lower = 0.0, 0.0
    for sigma in sigmas:
        for t in heights:
            size = abs(delta1(psi, chi, complex(sigma, t)))
            if sigma >= 0.5 and t > 0:
                upper = max(upper, size / Q ** (1 - 2 * sigma))
            if -2 <= sigma <= 0.5:
                lower = max(lower, size / (Q ** (1 - 2 * sigma) * D ** (2 - 4 * sigma)))
    return {"right_half_ratio": upper, "left_half_ratio": lower,
            "right_half_holds": upper <= 1.0, "left_half_holds": lower <= 1.0}


@dataclass(frozen=True)
class KernelParams:
    Q: float

    @property
    def log_Q(self) -> float:
        return math.log(self.Q)

    @property
    def alpha(self) -> float:
        return 1.0 / math.log(self.Q)


def varsigma(x):
    """ς(x) = (1 + erf(log x)) / 2."""
    return 0.5 * erfc(-np.log(x))


def _erfc_antiderivative(u):
    return u * erfc(-u) + np.exp(-u * u) / math.sqrt(math.pi)


def vartheta(x, kp: KernelParams):
    """ϑ(x) = 5 ∫_{-1/10}^{1/10} ς(Q^y x) dy in closed form."""
    logx = np.log(x)
    width = kp.log_Q / 10
    return 5 / (2 * kp.log_Q) * (_erfc_antiderivative(logx + width) - _erfc_antiderivative(logx - width))


def Y_kernel(s: complex, kp: KernelParams) -> complex:
    s = complex(s)
    tenth = s * kp.log_Q / 10
    return 5 * kp.alpha * (np.exp(tenth) - np.exp(-tenth)) * np.exp(s * s / 4) / (s * s)


def vartheta_contour(x: float, kp: KernelParams, height: float = 40.0) -> float:
    """ϑ(x) from the line integral over Re s = 1."""
    logx = math.log(x)

    def integrand(t):
        s = complex(1.0, t)
        return (np.exp(s * logx) * Y_kernel(s, kp)).real

    value, _ = integrate.quad(integrand, -height, height, epsabs=1e-13, epsrel=1e-12, limit=400)
    return value / (2 * math.pi)
