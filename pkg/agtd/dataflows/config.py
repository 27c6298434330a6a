import agtd.default_config as default_config
import copy
from typing import Any, Dict, Mapping, Optional

# Use default config but allow it to be overridden
_config: Optional[Dict[str, Any]] = None


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_value(key: str, value: Any) -> None:
    """Overrides keep the type of their default; a None default takes a string."""
    default = default_config.DEFAULT_CONFIG[key]
    if default is None:
        if value is not None and not isinstance(value, str):
            raise ValueError(f"Config key '{key}' expects a string, got {value!r}")
    elif isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValueError(f"Config key '{key}' expects true/false, got {value!r}")
    elif isinstance(default, int):
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"Config key '{key}' expects an integer, got {value!r}")
    elif isinstance(default, float):
        if not _is_number(value):
            raise ValueError(f"Config key '{key}' expects a number, got {value!r}")
    elif isinstance(default, str):
        if not isinstance(value, str):
            raise ValueError(f"Config key '{key}' expects a string, got {value!r}")
    elif isinstance(default, list):
        if not isinstance(value, (list, tuple)) or not all(_is_number(v) for v in value):
            raise ValueError(f"Config key '{key}' expects a list of numbers, got {value!r}")


def _check_ranges(config: Mapping[str, Any]) -> None:
    bands = config["adi_band_thresholds"]
    if len(bands) != 2 or not 0 < bands[0] < bands[1] < 100:
        raise ValueError(f"adi_band_thresholds must be two cut points 0 < a < b < 100, got {bands}")
    grid = config["yeo_johnson_grid"]
    if len(grid) != 3 or not grid[0] < grid[1] or not grid[2] > 0:
        raise ValueError(f"yeo_johnson_grid must be [lo, hi, step] with lo < hi and step > 0, got {grid}")
    if not 0 < config["watermark_gamma"] < 1:
        raise ValueError(f"watermark_gamma must lie in (0, 1), got {config['watermark_gamma']}")
    if not 0 < config["holdout_fraction"] < 1:
        raise ValueError(f"holdout_fraction must lie in (0, 1), got {config['holdout_fraction']}")
    if config["threads"] < 1:
        raise ValueError(f"threads must be >= 1, got {config['threads']}")


def initialize_config():
    """Initialize the configuration with default values."""
    global _config
    if _config is None:
        _config = copy.deepcopy(default_config.DEFAULT_CONFIG)


def set_config(config: Mapping[str, Any]):
    """Update the configuration with custom values.

    Unknown keys, values of the wrong type and out-of-range settings raise
    ValueError and leave the current configuration untouched.
    """
    initialize_config()
    unknown = set(config) - set(default_config.DEFAULT_CONFIG)
    if unknown:
        raise ValueError(f"Unknown config keys: {', '.join(sorted(unknown))}")
    for key, value in config.items():
        _check_value(key, value)
    merged = {**_config, **copy.deepcopy(dict(config))}
    _check_ranges(merged)
    _config.update(merged)


def reset_config():
    """Drop all overrides and go back to DEFAULT_CONFIG."""
    global _config
    _config = None
    initialize_config()


def get_config() -> Dict[str, Any]:
    """Get the current configuration."""
    if _config is None:
        initialize_config()
    return copy.deepcopy(_config)


# Initialize with default config
initialize_config()
