import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.exceptions import ConfigError
from app.schemas.run_config import RunConfig


logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """
    Process settings.

    Loaded from PIVOT_* environment variables (or a .env file) with
    defaults for local runs.
    """

    model_config = SettingsConfigDict(
        env_prefix="PIVOT_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Where results go unless the command line says otherwise
    output_dir: str = "results"

    # Experiment configuration file
    config: str = "config/default.yaml"

    log_level: str = "INFO"


# Global settings instance
settings = Settings()


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Read and validate an experiment configuration.

    Args:
        path: YAML file; None uses only built-in defaults.
        overrides: Top-level keys replacing file values.

    Returns:
        RunConfig: Validated configuration.

    Raises:
        ConfigError: On unreadable files, bad YAML or failed validation.
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        data = loaded or {}

    # environment beats the file, flags beat both
    if "PIVOT_OUTPUT_DIR" in {k.upper() for k in os.environ}:
        data["output_dir"] = Settings().output_dir
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path or '<defaults>'}: {_format_validation(exc)}") from exc

    if config.output_dir is None:
        config = config.model_copy(update={"output_dir": Settings().output_dir})
    logger.debug("loaded config from %s", path or "<defaults>")
    return config


def dump_run_config(config: RunConfig, path: Path) -> None:
    """Write the effective configuration as YAML."""
    data = config.model_dump(mode="json")
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")

