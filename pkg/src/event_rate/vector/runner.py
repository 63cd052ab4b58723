from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from event_rate.bounds.complex_rates import complex_packet_design, smallest_lambda, threshold_rule_complex
from event_rate.bounds.rates import (
    min_inter_event_time,
    practical_bits_real,
    sup_error_bound,
    threshold_rule_real,
)
from event_rate.engine.simulator import EventTriggeredLink, propagate
from event_rate.engine.state import EventLog, Scalar, SimState
from event_rate.errors import BoundDomainError
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import TriggerConfig
from event_rate.utils.config_validator import ConfigValidationError
from event_rate.vector.modal import ModalDecomposition, Mode, VectorPlant, decompose

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModeDesign:
    mode: Mode
    trig: TriggerConfig
    bits: int


def design_mode(
    mode: Mode,
    gamma: float,
    rho0: float,
    b: float,
    J_offset: float,
    chi: float = 0.125,
    chi_prime: float = 0.125,
    lam: Optional[int] = None,
) -> ModeDesign:
    """Threshold and packet size for one unstable mode, sized with its own disturbance bound."""
    a, m = mode.eigenvalue, mode.m_tilde
    try:
        if not mode.paired:
            J = threshold_rule_real(a, gamma, m, rho0, J_offset)
            trig = TriggerConfig(J=J, rho0=rho0, gamma=gamma, b=b)
            return ModeDesign(mode=mode, trig=trig, bits=practical_bits_real(a, gamma, m, J, rho0, b))
        J = threshold_rule_complex(a, gamma, m, chi, J_offset)
        if lam is None:
            lam = smallest_lambda(a, gamma, m, J, rho0, b, chi, chi_prime)
        design = complex_packet_design(a, gamma, m, J, rho0, b, lam, chi, chi_prime)
        trig = TriggerConfig(J=J, rho0=rho0, gamma=gamma, b=b, lam=lam, chi=chi, chi_prime=chi_prime)
        return ModeDesign(mode=mode, trig=trig, bits=design.bits)
    except BoundDomainError as e:
        raise ConfigValidationError(f"mode {mode.index} (eigenvalue {a}) cannot be designed: {e}") from e


@dataclass
class VectorTrajectory:
    times: List[float] = field(default_factory=list)
    s: List[np.ndarray] = field(default_factory=list)
    shat: List[np.ndarray] = field(default_factory=list)
    z_modes: List[List[Scalar]] = field(default_factory=list)
    u: List[float] = field(default_factory=list)
    w: List[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.times)

    def states(self) -> np.ndarray:
        return np.asarray(self.s)

    def mode_errors(self, j: int) -> np.ndarray:
        return np.asarray([row[j] for row in self.z_modes])

    def sup_abs_s(self) -> float:
        return float(np.max(np.abs(self.states()))) if self.s else 0.0

    def to_frame(self) -> pd.DataFrame:
        cols: Dict[str, object] = {"t": np.asarray(self.times, dtype=float)}
        n = len(self.s[0]) if self.s else 0
        states, estimates, w = np.asarray(self.s), np.asarray(self.shat), np.asarray(self.w)
        for i in range(n):
            cols[f"x{i + 1}"] = states[:, i]
        for i in range(n):
            cols[f"xhat{i + 1}"] = estimates[:, i]
        n_modes = len(self.z_modes[0]) if self.z_modes else 0
        for j in range(n_modes):
            z = self.mode_errors(j)
            if np.iscomplexobj(z):
                cols[f"z{j + 1}_re"], cols[f"z{j + 1}_im"] = z.real, z.imag
            else:
                cols[f"z{j + 1}"] = z
        cols["u"] = np.asarray(self.u, dtype=float)
        for i in range(n):
            cols[f"w{i + 1}"] = w[:, i]
        return pd.DataFrame(cols)


@dataclass
class VectorRunResult:
    trajectory: VectorTrajectory
    decomposition: ModalDecomposition
    designs: Dict[int, ModeDesign]
    logs: Dict[int, EventLog]

    def stable_mode_bound(self, j: int, t: float) -> float:
        """Open-loop estimation error envelope for a mode that never transmits."""
        mode = self.decomposition.modes[j]
        re = complex(mode.eigenvalue).real
        z0 = abs(self.trajectory.z_modes[0][j]) if self.trajectory.z_modes else 0.0
        if re == 0.0:
            return z0 + mode.m_tilde * t
        return math.exp(re * t) * z0 + (mode.m_tilde / abs(re)) * abs(1.0 - math.exp(re * t))

    def invariants(self) -> Dict[str, Dict[str, object]]:
        """Per-mode post-hoc checks: scalar-loop guarantees for transmitting modes, ISS envelopes for the rest."""
        out: Dict[str, Dict[str, object]] = {}
        traj = self.trajectory
        for j, mode in enumerate(self.decomposition.modes):
            z = np.abs(traj.mode_errors(j)) if traj.z_modes else np.zeros(0)
            key = f"mode{mode.index + 1}"
            if j in self.designs:
                trig, log = self.designs[j].trig, self.logs[j]
                re = complex(mode.eigenvalue).real
                sup_bound = sup_error_bound(re, trig.gamma, mode.m_tilde, trig.J) * (1.0 + 1e-9)
                gap = min_inter_event_time(re, mode.m_tilde, trig.J, trig.rho0) * (1.0 - 1e-9)
                post = max(log.z_post_jump) if log.z_post_jump else 0.0
                sup_z = float(z.max()) if z.size else 0.0
                out[key] = {
                    "eigenvalue": str(mode.eigenvalue),
                    "J": trig.J,
                    "g_bits": self.designs[j].bits,
                    "n_events": log.n_events,
                    "sup_z": sup_z,
                    "sup_z_bound": sup_bound,
                    "min_interval": log.min_interval(),
                    "min_interval_bound": gap,
                    "max_post_jump": post,
                    "ok": bool(sup_z <= sup_bound and log.min_interval() >= gap and post <= trig.rho0 * trig.J * (1.0 + 1e-9)),
                }
            else:
                bounds = np.array([self.stable_mode_bound(j, t) for t in traj.times])
                out[key] = {
                    "eigenvalue": str(mode.eigenvalue),
                    "sup_z": float(z.max()) if z.size else 0.0,
                    "ok": bool(np.all(z <= bounds * (1.0 + 1e-9) + 1e-12)),
                }
        return out

    def all_ok(self) -> bool:
        return all(v["ok"] for v in self.invariants().values())


def run_vector(
    plant: VectorPlant,
    gamma: float,
    rho0: float = 0.9,
    b: float = 1.0001,
    dt: float = 0.005,
    T: float = 5.0,
    seed: int = 0,
    s0: Optional[Sequence[float]] = None,
    shat0: Optional[Sequence[float]] = None,
    channel_kind: str = "uniform-on-grid",
    channel_delay: float = math.nan,
    disturbance_kind: str = "uniform",
    J_offset: float = 0.005,
    chi: float = 0.125,
    chi_prime: float = 0.125,
    lam: Optional[int] = None,
    localization: str = "exact",
    decomposition: Optional[ModalDecomposition] = None,
) -> VectorRunResult:
    """
    Unstable modes each get their own event-triggered link and channel; stable
    modes run the controller's estimator open loop. u = -K s_hat uses every
    mode's estimate.
    """
    dec = decomposition if decomposition is not None else decompose(plant)
    s0 = np.zeros(plant.n) if s0 is None else np.asarray(s0, dtype=float)
    shat0 = s0 if shat0 is None else np.asarray(shat0, dtype=float)
    designs = {
        j: design_mode(m, gamma, rho0, b, J_offset, chi, chi_prime, lam)
        for j, m in enumerate(dec.modes) if not m.stable
    }

    rng = np.random.default_rng(seed)
    n_steps = int(round(T / dt))
    links: Dict[int, EventTriggeredLink] = {
        j: EventTriggeredLink(
            A=d.mode.eigenvalue,
            trig=d.trig,
            channel=ChannelModel(kind=channel_kind, gamma=gamma, delay=channel_delay),
            rng=rng,
            dt=dt,
            bits=d.bits,
            localization=localization,
            label=f"mode{d.mode.index + 1}",
            max_events=n_steps,
        )
        for j, d in designs.items()
    }
    dist = DisturbanceModel(kind=disturbance_kind, M=plant.M)

    x_modes, xhat_modes = dec.to_modes(s0), dec.to_modes(shat0)
    errors = [
        f"mode {dec.modes[j].index + 1}: initial error {abs(x_modes[j] - xhat_modes[j]):g} must be below J={d.trig.J:g}"
        for j, d in designs.items() if not abs(x_modes[j] - xhat_modes[j]) < d.trig.J
    ]
    if errors:
        raise ConfigValidationError("Vector run rejected:\n" + "\n".join(f"  - {e}" for e in errors))

    states = [
        SimState(t=0.0, x=x, xhat_ctrl=xh, xhat_sensor=xh, u=0.0) for x, xh in zip(x_modes, xhat_modes)
    ]
    logger.info(
        "vector run: %d modes (%d event-triggered), gamma=%g, steps=%d, seed=%d",
        len(states), len(links), gamma, n_steps, seed,
    )
    traj = VectorTrajectory()
    for k in range(n_steps):
        w = np.array([dist.sample(k, k * dt, rng) for _ in range(plant.n)], dtype=float)
        w_modes = dec.project(w)
        shat = dec.to_physical([s.xhat_ctrl for s in states])
        u = -float(plant.K_vec @ shat)

        traj.times.append(k * dt)
        traj.s.append(dec.to_physical([s.x for s in states]))
        traj.shat.append(shat)
        traj.z_modes.append([s.z for s in states])
        traj.u.append(u)
        traj.w.append(w)

        for j, mode in enumerate(dec.modes):
            bu = mode.b_tilde * u
            if j in links:
                nxt = links[j].advance(states[j], bu, w_modes[j], dt)
            else:
                nxt = propagate(states[j], mode.eigenvalue, bu, w_modes[j], dt)
            states[j] = replace(nxt, t=(k + 1) * dt, u=u)

    logs = {j: link.log for j, link in links.items()}
    for j, log in logs.items():
        logger.info(
            "mode %d: %d events, R_tr=%.4g/s, R_s=%.4g bit/s",
            dec.modes[j].index + 1, log.n_events, log.triggering_rate(), log.realized_rate(),
        )
    return VectorRunResult(trajectory=traj, decomposition=dec, designs=designs, logs=logs)
