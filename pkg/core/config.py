"""Configuration management using pydantic-settings."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = Field(default="herdfield")
    log_level: str = Field(default="INFO")

    # Parallelism (HERD_THREADS); outputs never depend on it
    herd_threads: int = Field(default=1, ge=1)

    # Determinism
    default_seed: int = Field(default=20090614, description="Seed for the default w0 box")
    sample_seed: int = Field(default=1234, description="Seed for property-suite weight sampling")
    init_scale: float = Field(default=0.01, gt=0.0, description="Half-width of the default w0 box")

    # Maximizers
    max_sweeps: int = Field(default=10, ge=1)
    exhaustive_cap: int = Field(default=2**20, ge=1)
    enumeration_unit_cap: int = Field(default=12, ge=1, description="Max D+K for RBM enumeration")

    # Progress logging
    log_every: int = Field(default=10_000, ge=1)


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
