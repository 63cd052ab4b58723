from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

import pytest
import yaml

from event_rate.bounds.rates import threshold_rule_real
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import PlantConfig, TriggerConfig

# real unstable plant used throughout: A/ln2 = 8.02874
A_REAL = 5.5651
M_REAL = 0.4
RHO0_REAL = 0.1
B_STRETCH = 1.0001


@pytest.fixture
def real_trigger():
    """Trigger for the real plant with the threshold re-derived at each delay bound."""

    def _trigger(gamma: float) -> TriggerConfig:
        J = threshold_rule_real(A_REAL, gamma, M_REAL, RHO0_REAL, 0.1)
        return TriggerConfig(J=J, rho0=RHO0_REAL, gamma=gamma, b=B_STRETCH)

    return _trigger


@pytest.fixture
def real_plant() -> PlantConfig:
    return PlantConfig(A=A_REAL, B=1.0, K=10.0, M=M_REAL)


@pytest.fixture
def spiral_setup():
    """Lightly damped complex pole whose error spirals out of the circle |z| = J."""
    plant = PlantConfig(A=complex(0.3, 2.0), B=0.2, K=8.0, M=0.2)
    trig = TriggerConfig(J=0.0173, rho0=0.9, gamma=0.05, b=B_STRETCH, lam=4, chi=0.6, chi_prime=0.1)
    return plant, trig


@pytest.fixture
def random_channel():
    return lambda gamma: ChannelModel(kind="uniform-on-grid", gamma=gamma)


@pytest.fixture
def uniform_disturbance():
    return lambda M, complex_valued=False: DisturbanceModel(kind="uniform", M=M, complex_valued=complex_valued)


@pytest.fixture
def write_config(tmp_path: Path):
    """Dump a config mapping to YAML under tmp_path and return its path as a string."""

    def _write(cfg: Dict[str, Any], name: str = "config.yaml") -> str:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(cfg, sort_keys=False))
        return str(path)

    return _write
