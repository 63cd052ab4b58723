"""
Delay and disturbance scripts that force a high triggering rate on any
minimum-size quantizer, and their replay through the simulator.

With w = M held and z(t_s) = +J, the error after a delay d is
J e^{Ad} + (M/A)(e^{Ad} - 1). The script picks the delay that puts z(t_c)
upsilon above the centre of the first quantizer cell, so every reception
leaves |z(t_c+)| = upsilon and the next trigger again fires at +J.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import pandas as pd

from event_rate.adversary.uncertainty import minimal_quantizer
from event_rate.bounds.rates import beta, trig_rate_lower_general
from event_rate.engine.simulator import run
from event_rate.errors import BoundDomainError, InfeasibleRealizationError
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import PlantConfig, TriggerConfig

logger = logging.getLogger(__name__)

TARGETS = ("restricted", "general")


@dataclass(frozen=True)
class WorstCaseRealization:
    target: str
    A: float
    gamma: float
    M: float
    J: float
    alpha: float
    upsilon: float
    delay: float
    z_at_reception: float
    n_events: int

    def channel(self) -> ChannelModel:
        return ChannelModel(kind="scripted", gamma=self.gamma, delays=(self.delay,) * self.n_events)

    def disturbance(self) -> DisturbanceModel:
        return DisturbanceModel(kind="constant-max", M=self.M)

    @property
    def forced_interval(self) -> float:
        """Trigger-to-trigger time under the script: the delay plus regrowth from upsilon to J."""
        A, M, J = self.A, self.M, self.J
        return self.delay + math.log((J * A + M) / (self.upsilon * A + M)) / A

    @property
    def interval_bound(self) -> float:
        rate = trig_rate_lower_general(self.A, self.M, self.J, self.alpha, self.upsilon)
        return 0.0 if math.isinf(rate) else 1.0 / rate

    def delay_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"k": list(range(self.n_events)), "delay": [self.delay] * self.n_events})

    def disturbance_frame(self, n_steps: int) -> pd.DataFrame:
        return pd.DataFrame({"step": list(range(n_steps)), "w": [self.M] * n_steps})


def _delay_to_reach(A: float, M: float, J: float, level: float) -> float:
    return math.log((level + M / A) / (J + M / A)) / A


def worst_case_realization(
    A: float,
    gamma: float,
    M: float,
    J: float,
    target: str = "restricted",
    alpha: Optional[float] = None,
    upsilon: Optional[float] = None,
    n_events: int = 64,
) -> WorstCaseRealization:
    """
    "restricted" uses alpha = beta and upsilon = J/2; "general" takes both from
    the caller. Raises InfeasibleRealizationError when the script cannot exist.
    """
    if target not in TARGETS:
        raise InfeasibleRealizationError(f"unknown target '{target}', expected one of {TARGETS}")
    try:
        q = minimal_quantizer(A, gamma, M, J)
        b_star = beta(A, M, J)
    except BoundDomainError as e:
        raise InfeasibleRealizationError(str(e)) from e

    if target == "restricted":
        if b_star > gamma:
            raise InfeasibleRealizationError(f"beta={b_star:g} exceeds gamma={gamma:g}")
        alpha, upsilon = b_star, 0.5 * J
    elif alpha is None or upsilon is None:
        raise InfeasibleRealizationError("general target needs alpha and upsilon")

    if not 0.0 <= upsilon <= 0.5 * q.width:
        raise InfeasibleRealizationError(
            f"upsilon={upsilon:g} must lie in [0, half a cell = {0.5 * q.width:g}]"
        )
    level = q.lo + 0.5 * q.width + upsilon
    delay = _delay_to_reach(A, M, J, level)
    if delay > min(alpha, gamma) * (1.0 + 1e-12):
        raise InfeasibleRealizationError(
            f"reaching z={level:g} takes {delay:g}s, beyond alpha={alpha:g} / gamma={gamma:g}"
        )
    realization = WorstCaseRealization(
        target=target, A=A, gamma=gamma, M=M, J=J, alpha=alpha, upsilon=upsilon,
        delay=min(delay, gamma), z_at_reception=level, n_events=n_events,
    )
    logger.info(
        "worst-case %s script: delay=%.6g (alpha=%.6g), forced interval %.6g <= %.6g",
        target, realization.delay, alpha, realization.forced_interval, realization.interval_bound,
    )
    return realization


@dataclass(frozen=True)
class ReplayReport:
    ratios: List[float]
    intervals: List[float]
    realized_trig_rate: float
    forced_rate_bound: float
    beta: float
    delay: float
    slack: float

    @property
    def min_ratio(self) -> float:
        return min(self.ratios) if self.ratios else math.nan

    @property
    def ratios_ok(self) -> bool:
        return bool(self.ratios) and self.min_ratio >= 0.5 - self.slack

    @property
    def rate_ok(self) -> bool:
        return self.realized_trig_rate >= self.forced_rate_bound * (1.0 - self.slack)

    def to_dict(self) -> Dict[str, object]:
        return {
            "n_receptions": len(self.ratios),
            "min_ratio": self.min_ratio,
            "max_ratio": max(self.ratios) if self.ratios else math.nan,
            "realized_trig_rate": self.realized_trig_rate,
            "forced_rate_bound": self.forced_rate_bound,
            "beta": self.beta,
            "delay": self.delay,
            "ratios_ok": self.ratios_ok,
            "rate_ok": self.rate_ok,
        }


def replay(
    realization: WorstCaseRealization,
    B: float,
    K: float,
    dt: float = 0.005,
    T: float = 5.0,
    seed: int = 0,
    slack: float = 1e-6,
):
    """Run the script through the simulator with the minimal codec; returns (trajectory, log, report)."""
    r = realization
    plant = PlantConfig(A=r.A, B=B, K=K, M=r.M)
    trig = TriggerConfig(J=r.J, rho0=0.5, gamma=r.gamma)
    traj, log = run(
        plant, trig, r.channel(), r.disturbance(), codec="minimal", dt=dt, T=T, seed=seed,
        x0=0.5 * r.J, xhat0=0.0,
    )
    ratios = [z / r.J for z in log.z_post_jump]
    report = ReplayReport(
        ratios=ratios,
        intervals=log.intervals,
        realized_trig_rate=log.triggering_rate(),
        forced_rate_bound=trig_rate_lower_general(r.A, r.M, r.J, r.alpha, r.upsilon),
        beta=beta(r.A, r.M, r.J),
        delay=r.delay,
        slack=slack,
    )
    if not (report.ratios_ok and report.rate_ok):
        logger.warning("adversary replay missed its targets: %s", report.to_dict())
    return traj, log, report
