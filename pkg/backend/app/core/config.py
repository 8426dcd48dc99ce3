"""Toolkit configuration using Pydantic Settings"""
import os
from typing import Any, Optional
from pydantic_settings import BaseSettings
from pydantic import field_validator


class Settings(BaseSettings):
    """Toolkit settings with environment variable support (prefix CHB_)"""

    # Application
    APP_NAME: str = "cahn-hilliard-barrier"
    APP_VERSION: str = "1.0.0"

    # Parallelism - CHB_THREADS is the fallback for --threads
    THREADS: Optional[int] = None

    @field_validator("THREADS", mode="before")
    @classmethod
    def validate_threads(cls, v: Any) -> Optional[int]:
        """Convert empty string to None for THREADS"""
        if v == '' or v is None:
            return None
        v = int(v) if isinstance(v, str) else v
        if v < 1:
            raise ValueError("THREADS must be a positive integer")
        return v

    @property
    def WORKER_COUNT(self) -> int:
        """Thread count actually used when no --threads flag is given"""
        return self.THREADS or os.cpu_count() or 1

    # Reduced model numerics
    ROOT_REL_TOL: float = 1e-12
    ROOT_MAX_ITER: int = 200
    GOLDEN_TOL: float = 1e-10
    BRACKET_GROWTH: float = 1.2

    # Field / certificates
    MEAN_TOL: float = 1e-10
    EPSILON_0: float = 0.05
    KAPPA_PHI_RATIO: float = 10.0  # truncation requires phi <= kappa / ratio
    ENERGY_RATIO_BOUND: float = 2.0  # side condition E(u) <= ratio * E(u_bar)
    VOLUME_REGULARITY_FACTOR: float = 10.0  # side condition V >= factor * phi^(1-d)

    # Constructions
    MAX_GRID_SPACING: float = 0.5
    ETA_GROWTH: float = 1.2
    MIN_IMAGES: int = 16
    SEED_IMAGE_FRACTION: float = 0.25
    PATH_KAPPA_CAP: float = 0.25  # V along paths uses kappa = min(phi^(1/3), cap)
    MIN_CLAMP_RADIUS: float = 2.0  # tail excess of the clamped kink is below 1e-3 c0 from here on

    # String method
    STRING_MAX_ITER: int = 20000
    STRING_TOL: float = 1e-4
    STEP_FRACTION: float = 0.4  # explicit step = fraction * h^2 / d
    UNSTABLE_PATIENCE: int = 10
    UNSTABLE_RISE: float = 0.05  # path maximum above its running minimum, relative to the initial maximum
    STEP_HALVINGS: int = 3
    CLIMB_MAX_ITER: int = 20000

    # Gamma-convergence
    RESCALED_SPACING_FACTOR: float = 0.5  # rescaled grid spacing <= factor * phi

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    class Config:
        env_file = ".env"
        env_prefix = "CHB_"
        case_sensitive = True


# Global settings instance
settings = Settings()
