from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator
from typing import Optional


class Settings(BaseSettings):
    app_name: str = "fuzzyquery"
    app_version: str = "0.1.0"
    debug: bool = False

    log_level: str = "INFO"
    logger_name: str = "fuzzyquery"
    enable_cloud_logging: bool = False
    gcp_project_id: Optional[str] = None

    tolerance: float = 1e-9
    coincidence_tol: float = 1e-12
    zero_similarity_tol: float = 1e-12
    residual_tol: float = 1e-6
    condition_limit: float = 1e12

    membership_omit_threshold: int = 200_000
    sweep_workers: int = 4
    schema_version: str = "1"

    model_config = SettingsConfigDict(
        env_prefix="FUZZYQUERY_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v):
        """Accept lower-case level names from the environment"""
        return str(v).upper()

    @field_validator("sweep_workers")
    @classmethod
    def at_least_one_worker(cls, v):
        if v < 1:
            raise ValueError("sweep_workers must be >= 1")
        return v


settings = Settings()
