"""Process-wide settings for the toolkit."""

from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings.

    Settings can be overridden via WUSTAT_* environment variables or a .env file.
    """

    # Output directory; --out wins, the config file's output.directory loses
    output_dir: Optional[Path] = None

    # Worker cap for joblib replicate blocks
    threads: int = 1

    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="WUSTAT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


def load_settings() -> Settings:
    """Fresh settings from the current environment."""
    return Settings()
