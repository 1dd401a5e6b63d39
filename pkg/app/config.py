# app/config.py

import logging
import os
import sys
from typing import Dict

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

from app.errors import ConfigError

ENV_PREFIX = "ENTLAB_"
FORMAT_VERSION = "1"

logger = logging.getLogger(__name__)


def _default_threads() -> int:
    return os.cpu_count() or 1


class Settings(BaseModel):
    """
    Process-wide numerical settings.
    Values come from ENTLAB_* environment variables (a local .env file is honored).
    """

    threads: int = Field(default_factory=_default_threads, ge=1)
    dense_cap: int = Field(default=14, ge=2)
    auto_dense_max_n: int = Field(default=11, ge=2)
    bruteforce_cap: int = Field(default=12, ge=2)
    solver_tol: float = Field(default=1e-10, gt=0)
    lanczos_max_iter: int = Field(default=500, ge=1)
    degeneracy_threshold: float = Field(default=1e-8, ge=0)
    normalization_tol: float = Field(default=1e-12, gt=0)
    entropy_cutoff: float = Field(default=1e-14, ge=0)
    log_level: str = "INFO"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value!r}")
        return value


def _env_overrides(environ: Dict[str, str]) -> Dict[str, str]:
    overrides = {}
    for name in Settings.model_fields:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None and raw.strip():
            overrides[name] = raw.strip()
    return overrides


def load_settings(environ: Dict[str, str] = None) -> Settings:
    """Builds Settings from the environment (after loading a .env file if present)."""
    if environ is None:
        load_dotenv()
        environ = dict(os.environ)

    try:
        return Settings.model_validate(_env_overrides(environ))
    except ValidationError as e:
        fields = ", ".join(ENV_PREFIX + str(err["loc"][0]).upper() for err in e.errors())
        raise ConfigError(f"Invalid environment settings: {fields}") from e


def configure_logging(level: str = None) -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=level or settings.log_level,
        format="[%(levelname)s] %(message)s",
        force=True,
    )


# Resolved once on import.
settings = load_settings()
