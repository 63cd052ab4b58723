from __future__ import annotations

import logging
from typing import Any, Dict, List

from event_rate.errors import EventRateError

logger = logging.getLogger(__name__)


class ConfigValidationError(EventRateError):
    pass


def raise_if_errors(errors: List[str], config_path: str = "config.yaml") -> None:
    if errors:
        raise ConfigValidationError(
            f"Config validation failed ({config_path}):\n" +
            "\n".join(f"  - {e}" for e in errors)
        )


def validate_config(cfg: Dict[str, Any], config_path: str = "config.yaml") -> None:
    """Structural checks on a raw YAML mapping, before pydantic parsing."""
    errors: List[str] = []

    if not isinstance(cfg, dict):
        raise_if_errors([f"top level must be a mapping, got {type(cfg).__name__}"], config_path)

    if "mode" not in cfg and "preset" not in cfg:
        errors.append("Missing required key: 'mode' (or a 'preset' that provides it)")

    for key in ("dt", "T"):
        if key in cfg:
            try:
                value = float(cfg[key])
                if key == "dt" and value <= 0.0:
                    errors.append(f"{key} must be > 0, got {value}")
                if key == "T" and value < 0.0:
                    errors.append(f"{key} must be >= 0, got {value}")
            except (ValueError, TypeError):
                errors.append(f"{key} must be numeric")

    trigger = cfg.get("trigger") or {}
    if "rho0" in trigger:
        try:
            rho0 = float(trigger["rho0"])
            if not (0.0 < rho0 < 1.0):
                errors.append(f"trigger.rho0 out of range: {rho0}")
        except (ValueError, TypeError):
            errors.append("trigger.rho0 must be numeric")
    if "b" in trigger:
        try:
            if float(trigger["b"]) <= 1.0:
                errors.append(f"trigger.b must be > 1, got {trigger['b']}")
        except (ValueError, TypeError):
            errors.append("trigger.b must be numeric")

    raise_if_errors(errors, config_path)
