"""Linearized cart-pole: states are cart position, cart velocity, pole angle, pole rate."""
from __future__ import annotations

import logging
import math
from typing import Dict, Optional, Tuple

from event_rate.bounds.rates import RateReport, practical_bits_real, rate_report, threshold_rule_real
from event_rate.engine.state import EventLog
from event_rate.utils.config_validator import ConfigValidationError
from event_rate.vector.modal import ModalDecomposition, VectorPlant, decompose
from event_rate.vector.runner import VectorTrajectory, run_vector

logger = logging.getLogger(__name__)

PENDULUM_A = [
    [0.0, 1.0, 0.0, 0.0],
    [0.0, -0.1818, 2.6730, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, -0.4545, 31.1800, 0.0],
]
PENDULUM_B = [0.0, 1.8180, 0.0, 4.5450]
PENDULUM_K = [-1.00, -2.04, 20.36, 3.93]

PENDULUM_S0 = [0.0, 0.0, 0.0, 0.1001]
PENDULUM_SHAT0 = [0.0, 0.0, 0.0, 0.10]


def pendulum_plant(M: float = 0.05) -> VectorPlant:
    return VectorPlant.from_lists(PENDULUM_A, PENDULUM_B, PENDULUM_K, M)


def check_delay_floor(gamma: float, dt: float) -> None:
    if gamma < 2.0 * dt * (1.0 - 1e-12):
        raise ConfigValidationError(
            f"gamma={gamma:g} is below two sampling times (2*dt={2.0 * dt:g}), "
            "the smallest delay bound a sampled sensor can honour"
        )


def pendulum_bits_comparison(
    gamma: float, M: float, rho0: float = 0.9, b: float = 1.0001, J_offset: float = 0.005,
    decomposition: Optional[ModalDecomposition] = None,
) -> Dict[str, float]:
    """Packet size for the unstable mode sized with the nominal M and with its modal bound."""
    dec = decomposition if decomposition is not None else decompose(pendulum_plant(M))
    mode = dec.unstable_modes[0]
    a = mode.eigenvalue
    out: Dict[str, float] = {"eigenvalue": a, "M": M, "M_tilde": mode.m_tilde}
    for key, m in (("bits_nominal_M", M), ("bits_modal_M", mode.m_tilde)):
        J = threshold_rule_real(a, gamma, m, rho0, J_offset)
        out[key] = practical_bits_real(a, gamma, m, J, rho0, b)
    return out


def run_pendulum(
    gamma: float = 0.1,
    M: float = 0.05,
    rho0: float = 0.9,
    b: float = 1.0001,
    dt: float = 0.005,
    T: float = 5.0,
    seed: int = 0,
    J_offset: float = 0.005,
    channel_kind: str = "uniform-on-grid",
    channel_delay: float = math.nan,
    disturbance_kind: str = "uniform",
    localization: str = "exact",
) -> Tuple[VectorTrajectory, EventLog, RateReport]:
    check_delay_floor(gamma, dt)
    plant = pendulum_plant(M)
    result = run_vector(
        plant, gamma, rho0=rho0, b=b, dt=dt, T=T, seed=seed,
        s0=PENDULUM_S0, shat0=PENDULUM_SHAT0,
        channel_kind=channel_kind, channel_delay=channel_delay,
        disturbance_kind=disturbance_kind, J_offset=J_offset, localization=localization,
    )
    (j, design), = result.designs.items()
    mode = design.mode
    report = rate_report(mode.eigenvalue, gamma, mode.m_tilde, design.trig.J, rho0, b)
    logger.info(
        "pendulum gamma=%g: unstable eigenvalue %.4f, M_tilde=%.4g, J=%.4g, g=%d, R_s=%.4g bit/s",
        gamma, mode.eigenvalue, mode.m_tilde, design.trig.J, design.bits, result.logs[j].realized_rate(),
    )
    return result.trajectory, result.logs[j], report
