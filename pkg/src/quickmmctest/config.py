"""
Flat ``key = value`` configuration files.

::

    # switched decisions under BH at low effort
    procedure = bh
    alpha = 0.1
    efforts = 1000
    replications = 100

Keys are the field names of :class:`~quickmmctest.experiments.SimulationConfig`
plus ``threads``. Lists (``efforts``, ``methods``) are comma separated.
"""

from __future__ import annotations

import dataclasses
from typing import Dict

from .errors import ConfigurationError
from .experiments import SimulationConfig

__all__ = [
    "parse_config_text", "read_config", "convert_value", "build_simulation_config", "format_config",
]

_ALIASES = {"threshold": "threshold_rule", "resamples": "R", "iterations": "n_max",
            "method": "methods", "effort": "efforts"}
_FIELDS = {f.name: f for f in dataclasses.fields(SimulationConfig)}
_EXTRA = {"threads"}


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _FIELDS and key not in _EXTRA:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def read_config(path) -> Dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))


def convert_value(key: str, value):
    if not isinstance(value, str):
        return value
    kind = type(getattr(SimulationConfig, key, None)) if key in _FIELDS else int
    try:
        if key in ("efforts", "methods"):
            items = [v.strip() for v in value.split(",") if v.strip()]
            return tuple(int(v) for v in items) if key == "efforts" else tuple(items)
        if kind is bool:
            low = value.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(value)
            return low in ("true", "yes", "1")
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        return value
    except ValueError:
        raise ConfigurationError(f"invalid value {value!r} for {key!r}") from None


def build_simulation_config(values: Dict[str, object], **defaults) -> SimulationConfig:
    """Merge ``defaults`` < ``values`` and validate into a SimulationConfig.

    Errors name the offending key.
    """
    merged = dict(defaults)
    merged.update(values)
    kwargs = {k: convert_value(k, v) for k, v in merged.items() if k in _FIELDS}
    try:
        return SimulationConfig(**kwargs)
    except ConfigurationError as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from None


def format_config(config: SimulationConfig) -> list:
    """``key = value`` lines that :func:`parse_config_text` reads back."""
    lines = []
    for name in _FIELDS:
        value = getattr(config, name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{name} = {value}")
    return lines
