from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from event_rate.utils.config_validator import ConfigValidationError

logger = logging.getLogger(__name__)

CHANNEL_KINDS = ("constant", "uniform-on-grid", "adversarial-max", "scripted")
DISTURBANCE_KINDS = ("zero", "constant-max", "uniform", "sinusoid", "scripted")


def _on_grid(delay: float, gamma: float, dt: float) -> float:
    """Snap a delay down onto the dt grid, at least one step, never beyond gamma."""
    steps = math.floor(delay / dt + 1e-9)
    return min(gamma, max(dt, steps * dt))


@dataclass(frozen=True)
class ChannelModel:
    kind: str
    gamma: float
    delay: float = math.nan
    delays: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in CHANNEL_KINDS:
            raise ConfigValidationError(f"unknown channel kind '{self.kind}', expected one of {CHANNEL_KINDS}")
        if self.gamma < 0.0:
            raise ConfigValidationError(f"gamma must be >= 0, got {self.gamma}")
        if self.kind == "constant" and not math.isnan(self.delay) and not 0.0 <= self.delay <= self.gamma:
            raise ConfigValidationError(f"constant delay {self.delay} outside [0, gamma={self.gamma}]")
        if self.kind == "scripted":
            if not self.delays:
                raise ConfigValidationError("scripted channel needs at least one delay")
            bad = [d for d in self.delays if not 0.0 <= d <= self.gamma * (1.0 + 1e-12)]
            if bad:
                raise ConfigValidationError(f"scripted delays outside [0, gamma={self.gamma}]: {bad[:5]}")

    def sample(self, k: int, rng: np.random.Generator, dt: float) -> float:
        """Delay of the k-th packet. Random delays land on the dt grid, all others are exact."""
        if self.kind == "scripted":
            return float(self.delays[min(k, len(self.delays) - 1)])
        if self.kind == "constant":
            return self.gamma if math.isnan(self.delay) else self.delay
        if self.kind == "adversarial-max":
            return self.gamma
        n_max = math.floor(self.gamma / dt + 1e-9)
        if n_max < 1:
            return self.gamma
        return _on_grid(float(rng.integers(1, n_max + 1)) * dt, self.gamma, dt)


@dataclass(frozen=True)
class DisturbanceModel:
    kind: str
    M: float
    complex_valued: bool = False
    sign: float = 1.0
    phase: float = 0.0
    omega: float = 1.0
    amplitude: float = 1.0
    values: Tuple[complex, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in DISTURBANCE_KINDS:
            raise ConfigValidationError(
                f"unknown disturbance kind '{self.kind}', expected one of {DISTURBANCE_KINDS}"
            )
        if self.M < 0.0:
            raise ConfigValidationError(f"M must be >= 0, got {self.M}")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ConfigValidationError(f"amplitude is a fraction of M, got {self.amplitude}")
        if self.kind == "scripted":
            if not self.values:
                raise ConfigValidationError("scripted disturbance needs at least one value")
            bad = [v for v in self.values if abs(v) > self.M * (1.0 + 1e-12)]
            if bad:
                raise ConfigValidationError(f"scripted disturbance exceeds M={self.M}: {bad[:5]}")

    def sample(self, k: int, t: float, rng: np.random.Generator):
        """Value held over the k-th grid step starting at t."""
        if self.kind == "zero":
            return 0j if self.complex_valued else 0.0
        if self.kind == "constant-max":
            if self.complex_valued:
                return self.M * cmath.exp(1j * self.phase)
            return self.M * math.copysign(1.0, self.sign)
        if self.kind == "scripted":
            v = self.values[min(k, len(self.values) - 1)]
            return complex(v) if self.complex_valued else float(complex(v).real)
        if self.kind == "sinusoid":
            if self.complex_valued:
                return self.amplitude * self.M * cmath.exp(1j * (self.omega * t + self.phase))
            return self.amplitude * self.M * math.sin(self.omega * t + self.phase)
        if self.complex_valued:
            # uniform on the disc of radius M
            r = self.M * math.sqrt(rng.uniform())
            return r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        return float(rng.uniform(-self.M, self.M))
