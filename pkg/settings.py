"""
settings.py

Shared configuration: .env loading, environment defaults, the immutable
SeriesConfig used by every numerical routine, and logging setup for the CLI.

Environment variables (all optional, read after .env is loaded):
  OSCPERC_SEED         default RNG seed                  (0)
  OSCPERC_WORKERS      worker threads for sampling       (1)
  OSCPERC_TOL          default truncation tolerance      (1e-12)
  OSCPERC_OUTPUT_DIR   default directory for artifacts   (tests/output)
  OSCPERC_LOG_LEVEL    logging level name                (WARNING)
  OSCPERC_DEBUG        1/true/yes forces DEBUG logging
"""

from __future__ import annotations

import logging
import math
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

load_dotenv()

ROOT = Path(__file__).resolve().parent
ENV_PREFIX = "OSCPERC_"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


# ---------- Environment helpers ----------

def env_str(name: str, default: str) -> str:
    value = os.getenv(ENV_PREFIX + name)
    if value is None or value.strip() == "":
        return default
    return value.strip()


def env_flag(name: str, default: bool = False) -> bool:
    value = os.getenv(ENV_PREFIX + name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes")


def env_int(name: str, default: int) -> int:
    raw = env_str(name, str(default))
    try:
        return int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"Ignoring non-integer {ENV_PREFIX}{name}={raw!r}")
        return default


def env_float(name: str, default: float) -> float:
    raw = env_str(name, repr(default))
    try:
        return float(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"Ignoring non-numeric {ENV_PREFIX}{name}={raw!r}")
        return default


def default_seed() -> int:
    return env_int("SEED", 0)


def default_workers() -> int:
    return max(1, env_int("WORKERS", 1))


def default_tol() -> float:
    return env_float("TOL", 1e-12)


def default_output_dir() -> Path:
    path = Path(env_str("OUTPUT_DIR", str(ROOT / "tests" / "output")))
    return path if path.is_absolute() else ROOT / path


# ---------- Series / quadrature configuration ----------

class SeriesConfig(BaseModel):
    """Truncation orders and tolerances for every infinite sum and ω-integral.

    k_max and m_max of None mean "choose automatically from quad_tol".
    """

    model_config = ConfigDict(frozen=True)

    k_max: Optional[int] = Field(default=None, ge=0)
    m_max: Optional[int] = Field(default=None, ge=0)
    omega_cut: float = Field(default=10.0, gt=0)
    quad_tol: float = Field(default=1e-10, gt=0)
    psi_floor: float = Field(default=1e-300, gt=0)
    term_cap: int = Field(default=10_000_000, gt=0)
    quad_limit: int = Field(default=400, gt=0)

    @field_validator("quad_tol")
    @classmethod
    def _tol_below_one(cls, v: float) -> float:
        if v >= 1.0:
            raise ValueError("quad_tol must be < 1")
        return v

    @property
    def z_cut(self) -> float:
        """Half-width in standard-normal units beyond which Gaussian mass is dropped."""
        return max(10.0, math.sqrt(2.0 * math.log(1.0 / self.quad_tol)) + 1.0)


DEFAULT_SERIES = SeriesConfig()


# ---------- Logging ----------

def configure_logging(verbosity: int = 0) -> int:
    """Install one stream handler on the root logger; returns the level used."""
    if env_flag("DEBUG"):
        level = logging.DEBUG
    elif verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.getLevelName(env_str("LOG_LEVEL", "WARNING").upper())
        if not isinstance(level, int):
            level = logging.WARNING
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
    return level
