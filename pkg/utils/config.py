"""
Configuration files and value parsing.

Defaults live in config/default_config.json; user files are JSON with the
same sections and override the defaults key by key.
"""
import copy
import json
import logging
import os
from functools import lru_cache
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .errors import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir))
DEFAULT_CONFIG_PATH = os.path.join(PROJECT_ROOT, "config", "default_config.json")

# Environment variables (also read from a .env file by the CLI)
JOBS_ENV = "SPARSEPICK_JOBS"
LOG_LEVEL_ENV = "SPARSEPICK_LOG_LEVEL"


def load_json_config(path: str) -> Dict[str, Any]:
    """
    Read a JSON configuration file.

    Raises:
        ConfigError: If the file is missing, unreadable or not a JSON object.
    """
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}")
    if not isinstance(payload, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object, got {type(payload).__name__}")
    return payload


@lru_cache(maxsize=1)
def _cached_defaults() -> Dict[str, Any]:
    return load_json_config(DEFAULT_CONFIG_PATH)


def load_default_config() -> Dict[str, Any]:
    """A private copy of config/default_config.json."""
    return copy.deepcopy(_cached_defaults())


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively overlay override onto base; None values in override are ignored."""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def parse_grid(axis: Union[str, float, int, List[float]]) -> List[float]:
    """
    Parse a grid axis.

    Accepts the colon range notation start:step:stop (stop included, e.g.
    "1:1:10" or "50:10:300"), a comma-separated list ("1,1e-1,1e-5"), a single
    number or a list of numbers.

    Raises:
        ConfigError: If the text cannot be parsed or the grid is empty.
    """
    if isinstance(axis, (int, float)):
        return [float(axis)]
    if isinstance(axis, list):
        values = [float(value) for value in axis]
    else:
        text = str(axis).strip()
        try:
            if ":" in text:
                parts = [float(part) for part in text.split(":")]
                if len(parts) != 3 or parts[1] <= 0:
                    raise ConfigError(f"Range '{text}' must be start:step:stop with a positive step")
                start, step, stop = parts
                count = int(np.floor((stop - start) / step + 1e-9)) + 1
                values = [float(np.round(start + k * step, 12)) for k in range(count)]
            else:
                values = [float(part) for part in text.split(",") if part.strip()]
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(f"Cannot parse grid '{text}'")
    if not values:
        raise ConfigError(f"Grid '{axis}' is empty")
    return values


def env_jobs(default: Optional[int] = None) -> Optional[int]:
    """Parallelism degree from SPARSEPICK_JOBS, if set."""
    raw = os.environ.get(JOBS_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{JOBS_ENV} must be an integer, got '{raw}'")


def env_log_level(default: str = "INFO") -> str:
    return os.environ.get(LOG_LEVEL_ENV, default).upper()
