from __future__ import annotations

from pydantic.fields import Field
from pydantic_settings import BaseSettings
from pydantic_settings.main import SettingsConfigDict


class Settings(BaseSettings):
    """
    Configuration settings for the application, using Pydantic for validation.

    Every value can be overridden through the environment (or a `.env` file) using the alias
    shown next to it; the CLI global flags take precedence over these defaults.
    """

    name: str = Field(default="Partial Rankings Inference", alias="APP_NAME")
    logfire_token: str | None = Field(default=None, alias="LOGFIRE_TOKEN")
    seed: int = Field(default=0, ge=0, alias="PL_SEED")
    threads: int = Field(default=1, ge=1, alias="PL_THREADS")
    quiet: bool = Field(default=False, alias="PL_QUIET")
    connectivity_rtol: float = Field(default=1e-8, gt=0, alias="PL_CONNECTIVITY_RTOL")
    fisher_samples: int = Field(default=10_000, ge=1, alias="PL_FISHER_SAMPLES")
    exact_fisher_max_k: int = Field(default=8, ge=2, alias="PL_EXACT_FISHER_MAX_K")
    estimator_b: float = Field(default=10.0, ge=0, alias="PL_ESTIMATOR_B")

    model_config = SettingsConfigDict(env_file=".env", populate_by_name=True, extra="ignore")


# Initialize the settings object globally
settings = Settings()  # type: ignore
