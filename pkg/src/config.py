"""
Configuration for norden-lab.

Environment variables (optionally from a .env file) provide defaults; the
command line overrides them through RunConfig.
"""
import os
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, field_validator

load_dotenv()

DEFAULT_LAMBDA = "0.3,-0.7,0.2,0.5"

ENV_DEFAULTS: Dict[str, str] = {
    "NORDEN_POINTS": "16",
    "NORDEN_SEED": "42",
    "NORDEN_TOL": "1e-8",
    "NORDEN_LAMBDA": DEFAULT_LAMBDA,
    "NORDEN_AXIOM_TOL": "1e-10",
    "NORDEN_SYMMETRY_TOL": "1e-10",
    "NORDEN_CONDITION_LIMIT": "1e8",
    "NORDEN_LOG_LEVEL": "WARNING",
}


def read_env() -> Dict[str, str]:
    """Collect the NORDEN_* variables, falling back to the defaults."""
    return {name: os.getenv(name, default) for name, default in ENV_DEFAULTS.items()}


def parse_lambdas(text: str) -> List[float]:
    """
    Parse a comma separated list of four reals.

    Args:
        text (str): e.g. "0.3,-0.7,0.2,0.5"

    Returns:
        List[float]: the four parameters
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if len(parts) != 4:
        raise ValueError(f"expected four comma separated values, got {len(parts)}: '{text}'")
    return [float(p) for p in parts]


def validate_config(config: Dict[str, str]) -> None:
    """Validate the numeric environment values, listing every bad one."""
    invalid = []
    for name in ("NORDEN_POINTS", "NORDEN_SEED"):
        try:
            if int(config[name]) < (1 if name == "NORDEN_POINTS" else 0):
                invalid.append(name)
        except (KeyError, ValueError):
            invalid.append(name)
    for name in ("NORDEN_TOL", "NORDEN_AXIOM_TOL", "NORDEN_SYMMETRY_TOL", "NORDEN_CONDITION_LIMIT"):
        try:
            if float(config[name]) <= 0:
                invalid.append(name)
        except (KeyError, ValueError):
            invalid.append(name)
    try:
        parse_lambdas(config.get("NORDEN_LAMBDA", ""))
    except ValueError:
        invalid.append("NORDEN_LAMBDA")
    if invalid:
        raise ValueError(f"Invalid configuration: {', '.join(invalid)}")


class Settings(BaseModel):
    """Global numeric thresholds."""
    axiom_tol: float = 1e-10
    symmetry_tol: float = 1e-10
    condition_limit: float = 1e8
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls, config: Optional[Dict[str, str]] = None) -> "Settings":
        config = config or read_env()
        validate_config(config)
        return cls(
            axiom_tol=float(config["NORDEN_AXIOM_TOL"]),
            symmetry_tol=float(config["NORDEN_SYMMETRY_TOL"]),
            condition_limit=float(config["NORDEN_CONDITION_LIMIT"]),
            log_level=config["NORDEN_LOG_LEVEL"].upper(),
        )


class RunConfig(BaseModel):
    """Parameters of one verification run."""
    points: int = 16
    seed: int = 42
    tol: float = 1e-8
    lambdas: List[float] = [0.3, -0.7, 0.2, 0.5]
    suite: str = "all"

    @field_validator("points")
    @classmethod
    def _points_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("points must be at least 1")
        return value

    @field_validator("seed")
    @classmethod
    def _seed_unsigned(cls, value: int) -> int:
        if value < 0:
            raise ValueError("seed must be non-negative")
        return value

    @field_validator("tol")
    @classmethod
    def _tol_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("tol must be positive")
        return value

    @field_validator("lambdas")
    @classmethod
    def _four_lambdas(cls, value: List[float]) -> List[float]:
        if len(value) != 4:
            raise ValueError("exactly four lambda parameters are required")
        return [float(v) for v in value]

    @classmethod
    def from_env(cls, config: Optional[Dict[str, str]] = None, **overrides) -> "RunConfig":
        """Build a RunConfig from environment defaults, then apply non-None overrides."""
        config = config or read_env()
        validate_config(config)
        values = {
            "points": int(config["NORDEN_POINTS"]),
            "seed": int(config["NORDEN_SEED"]),
            "tol": float(config["NORDEN_TOL"]),
            "lambdas": parse_lambdas(config["NORDEN_LAMBDA"]),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, read once from the environment."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings
