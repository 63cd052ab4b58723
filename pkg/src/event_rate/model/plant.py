from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Union

from event_rate.bounds.complex_rates import complex_packet_design
from event_rate.bounds.rates import min_threshold
from event_rate.errors import BoundDomainError
from event_rate.utils.config_validator import raise_if_errors

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]

MODES = ("sufficient-real", "necessary-real", "sufficient-complex")


@dataclass(frozen=True)
class PlantConfig:
    A: Scalar
    B: Scalar
    K: Scalar
    M: float

    @property
    def is_complex(self) -> bool:
        return any(isinstance(v, complex) for v in (self.A, self.B, self.K))

    @property
    def re_a(self) -> float:
        return complex(self.A).real

    @property
    def closed_loop(self) -> Scalar:
        return self.A - self.B * self.K


@dataclass(frozen=True)
class TriggerConfig:
    J: float
    rho0: float
    gamma: float
    b: float = 1.0001
    lam: int = 1
    # slack split used by the complex-plant constraints
    chi: float = 0.125
    chi_prime: float = 0.125


def validate_config(plant: PlantConfig, trig: TriggerConfig, mode: str) -> List[str]:
    """Return every violated precondition for running `mode`; empty means runnable."""
    errors: List[str] = []
    if mode not in MODES:
        return [f"unknown mode '{mode}', expected one of {MODES}"]

    if not trig.J > 0.0:
        errors.append(f"J must be > 0, got {trig.J}")
    if not 0.0 < trig.rho0 < 1.0:
        errors.append(f"rho0 must be in (0, 1), got {trig.rho0}")
    if not trig.gamma >= 0.0:
        errors.append(f"gamma must be >= 0, got {trig.gamma}")
    if not trig.b > 1.0:
        errors.append(f"b must be > 1, got {trig.b}")
    if not plant.M >= 0.0:
        errors.append(f"M must be >= 0, got {plant.M}")
    if plant.B == 0:
        errors.append("B must be non-zero")
    if not plant.re_a > 0.0:
        errors.append(f"plant must be unstable (Re(A) > 0), got A={plant.A}")
    if not complex(plant.closed_loop).real < 0.0:
        errors.append(f"closed loop A - BK = {plant.closed_loop} is not Hurwitz")
    if errors:
        return errors

    if mode == "sufficient-real":
        if plant.is_complex:
            errors.append("sufficient-real mode needs a real plant")
            return errors
        j_min = min_threshold(plant.A, trig.gamma, plant.M, trig.rho0)
        if not trig.J > j_min:
            errors.append(f"J={trig.J:g} must exceed M(e^(A gamma)-1)/(A rho0)={j_min:g}")
    elif mode == "necessary-real":
        if plant.is_complex:
            errors.append("necessary-real mode needs a real plant")
            return errors
        if plant.M > plant.A * trig.J:
            errors.append(f"M={plant.M:g} must be <= A*J={plant.A * trig.J:g}")
    else:
        try:
            complex_packet_design(
                complex(plant.A), trig.gamma, plant.M, trig.J, trig.rho0, trig.b, trig.lam,
                trig.chi, trig.chi_prime,
            )
        except BoundDomainError as e:
            errors.append(str(e))
    return errors


def require_valid(plant: PlantConfig, trig: TriggerConfig, mode: str, source: str = "config") -> None:
    errors = validate_config(plant, trig, mode)
    if errors:
        logger.error("%s rejected for %s: %s", source, mode, errors)
    raise_if_errors(errors, source)


def _expm1_over(a: float, t: float) -> float:
    if a == 0.0:
        return t
    return math.expm1(a * t) / a


@dataclass(frozen=True)
class IspsEnvelope:
    """|x(t)| <= e^{decay t}|x0| + (psi + vartheta) sup|w| + iota."""

    decay: float
    psi: float
    iota: float
    vartheta: float
    d: float  # offset at zero delay

    def bound(self, x0_abs: float, w_sup: float, t: float) -> float:
        return math.exp(self.decay * t) * x0_abs + (self.psi + self.vartheta) * w_sup + self.iota


def envelope_for(plant: PlantConfig, trig: TriggerConfig) -> IspsEnvelope:
    decay = complex(plant.closed_loop).real
    if not decay < 0.0:
        raise BoundDomainError(f"closed loop is not Hurwitz: {plant.closed_loop}")
    re = plant.re_a
    bk = abs(plant.B * plant.K)
    iota = bk * trig.J * math.exp(re * trig.gamma) / -decay
    return IspsEnvelope(
        decay=decay,
        psi=1.0 / -decay,
        iota=iota,
        vartheta=bk * _expm1_over(re, trig.gamma) / -decay,
        d=bk * trig.J / -decay,
    )


def isps_envelope(plant: PlantConfig, trig: TriggerConfig, x0_abs: float, w_sup: float, t: float) -> float:
    return envelope_for(plant, trig).bound(x0_abs, w_sup, t)
