"""
Configuration settings for the hurdle cost-effectiveness toolkit
"""
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from hurdlecea.exceptions import ConfigurationError
from hurdlecea.schemas import RunConfig

# Load environment variables
load_dotenv()

BASE_DIR = Path(__file__).parent.parent

class Settings:
    # App
    APP_NAME: str = os.getenv("APP_NAME", "hurdlecea")
    APP_VERSION: str = os.getenv("APP_VERSION", "1.0.0")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()

    # Output
    OUTPUT_DIR: str = os.getenv("OUTPUT_DIR", "results")
    DEFAULT_DATASET: str = os.getenv("DEFAULT_DATASET", str(BASE_DIR / "data" / "synthetic_trial.csv"))

    # Execution
    N_WORKERS: int = int(os.getenv("N_WORKERS", "1"))
    SHOW_PROGRESS: bool = os.getenv("SHOW_PROGRESS", "false").lower() == "true"

    # Convergence reporting
    ESS_WARN_THRESHOLD: float = float(os.getenv("ESS_WARN_THRESHOLD", "100"))
    RHAT_WARN_THRESHOLD: float = float(os.getenv("RHAT_WARN_THRESHOLD", "1.1"))

settings = Settings()


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict):
            merged[key] = _merge(merged.get(key) or {}, value)
        elif value is not None:
            merged[key] = value
    return merged


def load_run_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build a RunConfig from an optional YAML file with nested sections
    (data, model, mcmc, econ, sensitivity, report), then apply overrides
    such as {"mcmc": {"seed": 7}}. None-valued overrides are ignored.
    """
    raw: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: invalid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{path}: top level must be a mapping of sections")

    raw = _merge(raw, overrides or {})
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid run configuration: {exc}") from exc
