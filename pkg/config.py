from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, List, Optional, Tuple
import os
from dotenv import dotenv_values, load_dotenv

from siegel.characters import CharacterError, fundamental_discriminant
from siegel.lfunc import EvalPolicy
from siegel.params import AnalysisParams

load_dotenv()


class ConfigError(ValueError):
    """A run configuration violates a hard constraint."""


class Config:
    # Feature Flags
    ENABLE_CONTOUR_ORACLE = os.getenv("ENABLE_CONTOUR_ORACLE", "false").lower() == "true"
    ENABLE_ZERO_MEANS = os.getenv("ENABLE_ZERO_MEANS", "true").lower() == "true"
    ENABLE_HTML_REPORT = os.getenv("ENABLE_HTML_REPORT", "true").lower() == "true"

    # Runtime Settings
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
    WORKERS = int(os.getenv("SIEGEL_WORKERS", "1"))
    PRECISION = os.getenv("SIEGEL_PRECISION", "double")
    MP_DPS = int(os.getenv("SIEGEL_MP_DPS", "30"))
    OUTPUT_DIR = os.getenv("SIEGEL_OUTPUT_DIR", "runs/latest")

    # Artifact Settings
    SCHEMA_VERSION = 1
    MANIFEST_NAME = "manifest.json"

    @classmethod
    def get_eval_policy(cls) -> EvalPolicy:
        return EvalPolicy(mode=cls.PRECISION, dps=cls.MP_DPS)

    @classmethod
    def get_runtime_config(cls) -> Dict[str, Any]:
        return {
            "workers": cls.WORKERS,
            "precision": cls.PRECISION,
            "mp_dps": cls.MP_DPS,
            "output_dir": cls.OUTPUT_DIR,
        }

    @classmethod
    def is_feature_enabled(cls, feature_name: str) -> bool:
        return getattr(cls, f"ENABLE_{feature_name.upper()}", False)


def _window(text: str) -> Tuple[float, float]:
    lo, hi = (float(v) for v in text.split(","))
    return lo, hi


_PARSERS = {
    "D": int, "Q": float, "R": float, "d": int, "capF": int, "epsilon_multiple": int,
    "anchor_height": float, "window": _window, "grid": int, "xi_nodes": int,
    "bump_width": float, "tikhonov_scale": float, "output_dir": str, "workers": int,
    "seed": int, "max_characters": int, "max_anchors": int, "sieve_trials": int,
    "precision": str,
}


@dataclass
class RunConfig:
    """Everything one pipeline run depends on; serialized next to its outputs."""
    D: int = 5
    Q: float = 20.0
    window: Tuple[float, float] = (0.0, 30.0)
    R: float = 10.0
    d: int = 6
    capF: Optional[int] = None
    epsilon_multiple: Optional[int] = None
    anchor_height: float = 0.0
    grid: int = 16
    xi_nodes: int = 64
    bump_width: Optional[float] = None
    tikhonov_scale: float = 1e-12
    output_dir: str = Config.OUTPUT_DIR
    workers: int = Config.WORKERS
    seed: int = 0
    max_characters: int = 4
    max_anchors: int = 2
    sieve_trials: int = 50
    precision: str = Config.PRECISION

    @classmethod
    def from_file(cls, path: str, **overrides) -> "RunConfig":
        """Read KEY=VALUE lines; keys match the field names (case-insensitive)."""
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        exact = {f.name for f in fields(cls)}
        names = {f.name.lower(): f.name for f in fields(cls)}
        values: Dict[str, Any] = {}
        for key, raw in dotenv_values(path).items():
            name = key if key in exact else names.get(key.lower())
            if name is None:
                raise ConfigError(f"unknown config key {key}")
            if raw is None or raw == "":
                continue
            try:
                values[name] = _PARSERS[name](raw)
            except ValueError as e:
                raise ConfigError(f"bad value for {key}: {raw!r} ({e})")
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def analysis_params(self) -> AnalysisParams:
        return AnalysisParams(fundamental_discriminant(self.D), self.Q, self.R, self.d,
                              self.epsilon_multiple, self.anchor_height)

    def eval_policy(self) -> EvalPolicy:
        return EvalPolicy(mode=self.precision, dps=Config.MP_DPS)

    def validate(self) -> List[str]:
        """Hard violations raise ConfigError; soft ones come back as warnings."""
        try:
            fundamental_discriminant(self.D)
        except CharacterError as e:
            raise ConfigError(str(e))
        if self.window[1] < self.window[0]:
            raise ConfigError(f"window {self.window} is reversed")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.grid < 2:
            raise ConfigError("grid needs at least two points per side")
        if self.precision not in ("double", "mp"):
            raise ConfigError(f"precision must be 'double' or 'mp', got {self.precision}")
        try:
            params = self.analysis_params()
        except ValueError as e:
            raise ConfigError(str(e))
        return params.validate()

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["window"] = list(self.window)
        out["params"] = self.analysis_params().to_dict()
        return out
