import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnalysisParams:
    """Coupled desk parameters.

    α = 1/log Q is tied to the family scale, while 𝓛 = log D, R and d are
    free knobs. ω = αR, δ = R^{-9/10}, δ₁ = R^{-8/9}, and ε is the multiple of
    2π/R closest to R^{-11/12} (at least one full period), so εR ∈ 2πℤ.
    """
    D: int
    Q: float
    R: float = 10.0
    d: int = 6
    epsilon_multiple: Optional[int] = None
    anchor_height: float = 0.0

    def __post_init__(self):
        if self.Q <= 1:
            raise ValueError(f"Q must exceed 1, got {self.Q}")
        if self.R < math.pi / 2:
            raise ValueError(f"R must be at least π/2, got {self.R}")
        if self.d < 4 or int(self.d) != self.d:
            raise ValueError(f"d must be an integer >= 4, got {self.d}")
        if abs(self.D) < 3:
            raise ValueError(f"D must be a discriminant magnitude >= 3, got {self.D}")

    @property
    def L(self) -> float:
        return math.log(abs(self.D))

    @property
    def alpha(self) -> float:
        return 1.0 / math.log(self.Q)

    @property
    def log_Q(self) -> float:
        return math.log(self.Q)

    @property
    def omega(self) -> float:
        return self.alpha * self.R

    @property
    def delta(self) -> float:
        return self.R ** -0.9

    @property
    def delta1(self) -> float:
        return self.R ** (-8 / 9)

    @property
    def epsilon(self) -> float:
        k = self.epsilon_multiple
        if k is None:
            k = max(1, round(self.R ** (1 / 12) / (2 * math.pi)))
        return 2 * math.pi * k / self.R

    def validate(self) -> List[str]:
        """Soft checks; each returned string is also logged.

        With at least one full period in ε, ε = 2πk/R exceeds δ₁ for every
        desk-sized R (ε < δ₁ needs R^{1/9} > 2π, about R > 1.5e7), so that
        note is expected and logged at info level; the rest are warnings.
        """
        warnings = []
        if not 0 < self.epsilon < self.delta1:
            logger.info(f"epsilon={self.epsilon:.4g} lies outside (0, delta1={self.delta1:.4g}), expected at desk R")
            warnings.append(f"epsilon={self.epsilon:.4g} lies outside (0, delta1={self.delta1:.4g})")
        hard = []
        if math.log(self.L) <= 0:
            hard.append(f"log L = {math.log(self.L):.4g} <= 0: the Omega_2 strip is degenerate")
        if not self.delta1 > self.delta > 0:
            hard.append("delta1 > delta > 0 violated")
        for w in hard:
            logger.warning(w)
        return warnings + hard

    def prescribed_values(self) -> Dict:
        """What the original coupling would prescribe for this D."""
        L = self.L
        log_L = math.log(L) if L > 1 else float("nan")
        R_formula = math.pi * math.floor(log_L / (30 * math.pi)) - math.pi / 2 if L > 1 else float("nan")
        return {
            "alpha": L ** -2,
            "log_Q": L ** 2,
            "R": R_formula,
            "epsilon": self.R ** (-11 / 12),
        }

    def to_dict(self) -> Dict:
        out = asdict(self)
        out.update({
            "L": self.L, "alpha": self.alpha, "omega": self.omega, "delta": self.delta,
            "delta1": self.delta1, "epsilon": self.epsilon,
            "epsilon_R_over_2pi": self.epsilon * self.R / (2 * math.pi),
            "prescribed": self.prescribed_values(),
        })
        return out
