"""Built-in experiment configurations; a config file naming a preset overrides it key by key."""
from __future__ import annotations

import copy
from typing import Any, Dict

from event_rate.utils.config_validator import ConfigValidationError

PRESETS: Dict[str, Dict[str, Any]] = {
    # real plant, threshold re-derived at every delay bound
    "real": {
        "mode": "scalar-real",
        "plant": {"A": 5.5651, "B": 1.0, "K": 10.0, "M": 0.4},
        "trigger": {"gamma": 0.2, "rho0": 0.1, "b": 1.0001, "J_offset": 0.1},
        "initial": {"x0": 1.0, "xhat0": 1.0},
        "dt": 0.005,
        "T": 2.0,
    },
    "complex-spiral": {
        "mode": "scalar-complex",
        "plant": {"A": [0.3, 2.0], "B": 0.2, "K": 8.0, "M": 0.2},
        "trigger": {"gamma": 0.05, "rho0": 0.9, "b": 1.0001, "J": 0.0173, "chi": 0.6, "chi_prime": 0.1},
        "initial": {"x0": [0.5, 0.0], "xhat0": [0.5, 0.0]},
        "dt": 0.001,
        "T": 5.0,
    },
    "complex": {
        "mode": "scalar-complex",
        "plant": {"A": [1.0, 1.0], "B": 0.5, "K": 4.0, "M": 0.1},
        "trigger": {"gamma": 0.1, "rho0": 0.9, "b": 1.0001, "J_offset": 0.002, "chi": 0.125, "chi_prime": 0.125},
        "initial": {"x0": [0.5, 0.0], "xhat0": [0.5, 0.0]},
        "dt": 0.005,
        "T": 5.0,
    },
    "pendulum": {
        "mode": "pendulum",
        "vector": {"M": 0.05},
        "trigger": {"gamma": 0.1, "rho0": 0.9, "b": 1.0001, "J_offset": 0.005},
        "dt": 0.005,
        "T": 5.0,
    },
    "pendulum-sweep": {
        "mode": "pendulum",
        "vector": {"M": 0.2},
        "trigger": {"gamma": 0.1, "rho0": 0.9, "b": 1.0001, "J_offset": 0.005},
        "dt": 0.005,
        "T": 5.0,
    },
    "adversary": {
        "mode": "scalar-real",
        "plant": {"A": 5.5651, "B": 1.0, "K": 10.0, "M": 0.0},
        "trigger": {"gamma": 0.3, "rho0": 0.5, "J": 0.1},
        "codec": "minimal",
        "adversary": {"target": "restricted"},
        "dt": 0.005,
        "T": 5.0,
    },
    "adversary-disturbed": {
        "mode": "scalar-real",
        "plant": {"A": 5.5651, "B": 1.0, "K": 10.0, "M": 0.2},
        "trigger": {"gamma": 0.3, "rho0": 0.5, "J": 0.1},
        "codec": "minimal",
        "adversary": {"target": "restricted"},
        "dt": 0.005,
        "T": 5.0,
    },
}

# default gamma grids for `bounds --sweep`
SWEEP_GRIDS: Dict[str, str] = {
    "real": "gamma:0.005:0.5:100",
    "complex": "gamma:0.005:0.5:100",
    "pendulum-sweep": "gamma:0.01:0.3:30",
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_preset(raw: Dict[str, Any]) -> Dict[str, Any]:
    name = raw.get("preset")
    if name is None:
        return copy.deepcopy(raw)
    if name not in PRESETS:
        raise ConfigValidationError(f"unknown preset '{name}', expected one of {sorted(PRESETS)}")
    return _merge(PRESETS[name], raw)
