from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Manages solver defaults and environment variables.
    """
    # Core application settings
    APP_NAME: str = "copulopt"
    ENVIRONMENT: Optional[str] = None
    SENTRY_DSN: Optional[str] = None
    LOG_LEVEL: str = "WARNING"

    # Grid discretization
    GRID_SUBSAMPLES: int = 9
    GRID_MAX_LEVEL: int = 10
    SINGULAR_EPS: float = 1e-12

    # Quadrature and certificates
    QUAD_NODES: int = 32
    CERTIFY_GRID: int = 256

    # Cyclical monotonicity sampling
    CYCLE_MAX_LENGTH: int = 5
    CYCLE_TRIALS: int = 10000
    SEED: int = 0

    # Assignment solver
    LAP_TIGHT_RTOL: float = 1e-10

    model_config = SettingsConfigDict(
        env_prefix="COPULOPT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Settings loaded once per process from the environment and .env.
    """
    return Settings()
