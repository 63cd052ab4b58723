"""
Sampled-data simulation of one event-triggered loop.

Plant and estimators advance on a fixed dt grid under zero-order hold, with
u = -K xhat recomputed at every grid point. Within a step the error
z = x - xhat evolves in closed form, so trigger instants are located exactly
(root of |z(t)| = J) and receptions are applied at their exact t_c. The
grid-aligned variant only checks the trigger condition at grid points.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from event_rate.adversary.uncertainty import MinimalQuantizer, minimal_quantizer
from event_rate.bounds.complex_rates import complex_packet_design
from event_rate.bounds.rates import error_growth, min_inter_event_time, practical_bits_real, sup_error_bound
from event_rate.codec.packet import (
    DecodedEvent,
    Packet,
    decode_complex,
    decode_real,
    encode_cell,
    encode_complex,
    encode_real,
    encode_sign_only,
    reconstruct_zbar_real,
)
from event_rate.engine.state import EventLog, InFlight, Scalar, SimState, Trajectory
from event_rate.errors import UndecodableError, ZenoGuardError
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import PlantConfig, TriggerConfig, envelope_for, require_valid
from event_rate.monitoring.metrics import (
    BITS_SENT,
    POST_JUMP_ERROR,
    REALIZED_RATE,
    RECEPTIONS,
    TRIGGERS,
    UNDECODABLE,
    ZENO_ABORTS,
)
from event_rate.utils.config_validator import ConfigValidationError

logger = logging.getLogger(__name__)

CODECS = ("sufficient", "minimal")
LOCALIZATIONS = ("exact", "grid")

_EPS = 1e-12
_INTERIOR_PROBES = 8


def zoh_gains(a: Scalar, h: float) -> Tuple[Scalar, Scalar]:
    """(e^{ah}, integral_0^h e^{as} ds) for a scalar pole."""
    if isinstance(a, complex):
        phi = cmath.exp(a * h)
        return phi, (h if a == 0 else (phi - 1.0) / a)
    phi = math.exp(a * h)
    return phi, (h if a == 0.0 else math.expm1(a * h) / a)


def error_after(z0: Scalar, a: Scalar, w: Scalar, h: float) -> Scalar:
    phi, g = zoh_gains(a, h)
    return phi * z0 + g * w


def propagate(state: SimState, a: Scalar, bu: Scalar, w: Scalar, h: float) -> SimState:
    """Advance plant and both estimators by h with bu and w held; u itself is untouched."""
    if h <= 0.0:
        return state
    phi, g = zoh_gains(a, h)
    return replace(
        state,
        t=state.t + h,
        x=phi * state.x + g * (bu + w),
        xhat_ctrl=phi * state.xhat_ctrl + g * bu,
        xhat_sensor=phi * state.xhat_sensor + g * bu,
    )


def step(state: SimState, plant: PlantConfig, dt: float, w_sample: Scalar) -> SimState:
    """Zero-order-hold update over dt, then u = -K xhat from the new controller estimate."""
    s = propagate(state, plant.A, plant.B * state.u, w_sample, dt)
    return replace(s, u=-plant.K * s.xhat_ctrl)


def detect_trigger(state: SimState, trig: TriggerConfig) -> bool:
    return state.in_flight is None and abs(state.z) >= trig.J


def on_reception(state: SimState, dec: DecodedEvent) -> SimState:
    return replace(
        state,
        xhat_ctrl=state.xhat_ctrl + dec.zbar,
        xhat_sensor=state.xhat_sensor + dec.zbar,
        in_flight=None,
    )


@dataclass
class EventTriggeredLink:
    """Sensor, channel and controller of one scalar (real or complex) error channel."""

    A: Scalar
    trig: TriggerConfig
    channel: ChannelModel
    rng: np.random.Generator
    dt: float
    bits: int
    codec: str = "sufficient"
    localization: str = "exact"
    quantizer: Optional[MinimalQuantizer] = None
    label: str = "real"
    max_events: Optional[int] = None
    log: EventLog = field(default_factory=EventLog)

    def __post_init__(self) -> None:
        if self.codec not in CODECS:
            raise ConfigValidationError(f"unknown codec '{self.codec}', expected one of {CODECS}")
        if self.localization not in LOCALIZATIONS:
            raise ConfigValidationError(
                f"unknown localization '{self.localization}', expected one of {LOCALIZATIONS}"
            )
        if self.codec == "minimal" and self.quantizer is None:
            raise ConfigValidationError("minimal codec needs a quantizer")

    @property
    def is_complex(self) -> bool:
        return isinstance(self.A, complex)

    def settle(self, state: SimState, bu: Scalar, w: Scalar, t_end: float) -> SimState:
        """Apply every trigger and reception due before t_end; the returned state sits at the last event."""
        if self.localization == "grid" and detect_trigger(state, self.trig):
            state = self._trigger(state)

        while True:
            fl = state.in_flight
            if fl is not None and fl.t_c <= t_end + _EPS:
                state = propagate(state, self.A, bu, w, min(fl.t_c, t_end) - state.t)
                state = self._receive(state)
                continue
            if fl is not None or self.localization == "grid":
                return state
            if detect_trigger(state, self.trig):
                state = self._trigger(state)
                continue
            tau = self._crossing(state.z, w, t_end - state.t)
            if tau is None:
                return state
            state = propagate(state, self.A, bu, w, tau)
            state = self._trigger(state)

    def advance(self, state: SimState, bu: Scalar, w: Scalar, h: float) -> SimState:
        """Events within the step, then the held input carries the state to the step end; u is untouched."""
        t_end = state.t + h
        state = self.settle(state, bu, w, t_end)
        return replace(propagate(state, self.A, bu, w, t_end - state.t), t=t_end)

    def _crossing(self, z0: Scalar, w: Scalar, h: float) -> Optional[float]:
        J = self.trig.J
        if h <= 0.0:
            return None

        def f(tau: float) -> float:
            return abs(error_after(z0, self.A, w, tau)) - J

        # a real error is monotone within a step, a complex one can peak inside it
        probes = _INTERIOR_PROBES if self.is_complex else 1
        lo = 0.0
        for i in range(1, probes + 1):
            hi = h * i / probes
            if f(hi) >= 0.0:
                return brentq(f, lo, hi, xtol=1e-15)
            lo = hi
        return None

    def _encode(self, t_s: float, z: Scalar) -> Packet:
        if self.is_complex:
            return encode_complex(t_s, cmath.phase(z), self.bits, self.trig.lam, self.trig.gamma, self.trig.b)
        sign = 1 if z >= 0.0 else -1
        if self.codec == "minimal" or self.bits == 1:
            return encode_sign_only(t_s, sign)
        return encode_real(t_s, sign, self.bits, self.trig.gamma, self.trig.b)

    def _trigger(self, state: SimState) -> SimState:
        k = self.log.n_events
        if self.max_events is not None and k + 1 > self.max_events:
            ZENO_ABORTS.labels(mode=self.label).inc()
            raise ZenoGuardError(k + 1, self.max_events * self.dt, self.dt)
        t_s, z = state.t, state.z
        delay = self.channel.sample(k, self.rng, self.dt)
        packet = self._encode(t_s, z)

        self.log.ts_list.append(t_s)
        self.log.delays.append(delay)
        self.log.packet_bits.append(self.bits)
        self.log.packets.append(packet.to_hex())
        self.log.z_at_trigger.append(z)
        TRIGGERS.labels(mode=self.label).inc()
        logger.debug("trigger k=%d t_s=%.6f |z|=%.6g delay=%.6g", k, t_s, abs(z), delay)
        return replace(state, in_flight=InFlight(packet=packet, t_s=t_s, t_c=t_s + delay, z_ts=z))

    def _decode(self, fl: InFlight, z_tc: Scalar) -> Tuple[DecodedEvent, Packet]:
        t_c, trig = fl.t_c, self.trig
        if self.codec == "minimal":
            # the receiver is handed the cell of z(t_c) itself
            index, centre = self.quantizer.encode(z_tc)
            packet = encode_cell(index, self.bits, fl.t_s)
            return DecodedEvent(q_ts=math.nan, sign_or_phase=math.copysign(1.0, centre), zbar=centre), packet
        if self.is_complex:
            return decode_complex(fl.packet, t_c, trig.gamma, trig.b, self.A, trig.J), fl.packet
        dec = decode_real(fl.packet, t_c, trig.gamma, trig.b)
        return replace(dec, zbar=reconstruct_zbar_real(dec, t_c, self.A, trig.J)), fl.packet

    def _receive(self, state: SimState) -> SimState:
        fl = state.in_flight
        z_tc = state.z
        try:
            dec, packet = self._decode(fl, z_tc)
        except UndecodableError:
            UNDECODABLE.labels(mode=self.label).inc()
            raise
        state = on_reception(state, dec)
        state = replace(state, t=fl.t_c)
        post = abs(state.z)

        k = len(self.log.tc_list)
        self.log.packets[k] = packet.to_hex()
        self.log.tc_list.append(fl.t_c)
        self.log.z_at_reception.append(z_tc)
        self.log.z_post_jump.append(post)
        RECEPTIONS.labels(mode=self.label).inc()
        BITS_SENT.labels(mode=self.label).inc(packet.g)
        POST_JUMP_ERROR.labels(mode=self.label).observe(post / self.trig.J)
        logger.debug("reception k=%d t_c=%.6f |z(t_c)|=%.6g |z(t_c+)|=%.6g", k, fl.t_c, abs(z_tc), post)
        return state


def design_bits(plant: PlantConfig, trig: TriggerConfig, codec: str = "sufficient") -> int:
    if codec == "minimal":
        return minimal_quantizer(plant.A, trig.gamma, plant.M, trig.J).bits
    if plant.is_complex:
        return complex_packet_design(
            complex(plant.A), trig.gamma, plant.M, trig.J, trig.rho0, trig.b, trig.lam, trig.chi, trig.chi_prime
        ).bits
    return practical_bits_real(plant.A, trig.gamma, plant.M, trig.J, trig.rho0, trig.b)


def run_mode(plant: PlantConfig, codec: str) -> str:
    if plant.is_complex:
        return "sufficient-complex"
    return "necessary-real" if codec == "minimal" else "sufficient-real"


def run(
    plant: PlantConfig,
    trig: TriggerConfig,
    channel: ChannelModel,
    disturbance: DisturbanceModel,
    codec: str = "sufficient",
    dt: float = 0.005,
    T: float = 1.0,
    seed: int = 0,
    x0: Scalar = 0.0,
    xhat0: Optional[Scalar] = None,
    localization: str = "exact",
    bits: Optional[int] = None,
) -> Tuple[Trajectory, EventLog]:
    mode = run_mode(plant, codec)
    require_valid(plant, trig, mode, source="run")
    errors = []
    if not dt > 0.0:
        errors.append(f"dt must be > 0, got {dt}")
    if T < 0.0:
        errors.append(f"T must be >= 0, got {T}")
    if channel.gamma > trig.gamma * (1.0 + 1e-12):
        errors.append(f"channel gamma={channel.gamma} exceeds the design delay bound {trig.gamma}")
    if plant.is_complex and codec == "minimal":
        errors.append("the minimal codec is defined for real plants only")
    if disturbance.M > plant.M * (1.0 + 1e-12):
        errors.append(f"disturbance bound {disturbance.M} exceeds the plant's M={plant.M}")
    xhat0 = x0 if xhat0 is None else xhat0
    if not abs(x0 - xhat0) < trig.J:
        errors.append(f"initial error |x0 - xhat0|={abs(x0 - xhat0):g} must be below J={trig.J:g}")
    if errors:
        raise ConfigValidationError("Run rejected:\n" + "\n".join(f"  - {e}" for e in errors))

    if plant.is_complex:
        x0, xhat0 = complex(x0), complex(xhat0)
    else:
        x0, xhat0 = float(x0), float(xhat0)

    n_steps = int(round(T / dt))
    link = EventTriggeredLink(
        A=plant.A,
        trig=trig,
        channel=channel,
        rng=np.random.default_rng(seed),
        dt=dt,
        bits=bits if bits is not None else design_bits(plant, trig, codec),
        codec=codec,
        localization=localization,
        quantizer=minimal_quantizer(plant.A, trig.gamma, plant.M, trig.J) if codec == "minimal" else None,
        label=mode,
        max_events=n_steps,
    )
    logger.info(
        "run %s codec=%s g=%d gamma=%g J=%g steps=%d seed=%d",
        mode, codec, link.bits, trig.gamma, trig.J, n_steps, seed,
    )

    state = SimState(t=0.0, x=x0, xhat_ctrl=xhat0, xhat_sensor=xhat0, u=-plant.K * xhat0)
    traj = Trajectory()
    for k in range(n_steps):
        w = disturbance.sample(k, k * dt, link.rng)
        traj.record(state, w)
        t_end = (k + 1) * dt
        state = link.settle(state, plant.B * state.u, w, t_end)
        state = replace(step(state, plant, t_end - state.t, w), t=t_end)
    if n_steps:
        traj.record(state, complex(math.nan, math.nan) if plant.is_complex else math.nan)

    REALIZED_RATE.labels(mode=mode).set(link.log.realized_rate())
    logger.info(
        "run done: %d events, R_tr=%.4g/s, R_s=%.4g bit/s",
        link.log.n_events, link.log.triggering_rate(), link.log.realized_rate(),
    )
    return traj, link.log


@dataclass(frozen=True)
class InvariantReport:
    sup_z: float
    sup_z_bound: float
    min_interval: float
    min_interval_bound: float
    max_post_jump: float
    post_jump_bound: float
    isps_worst_ratio: float

    @property
    def sup_z_ok(self) -> bool:
        return self.sup_z <= self.sup_z_bound

    @property
    def interval_ok(self) -> bool:
        return self.min_interval >= self.min_interval_bound

    @property
    def jump_ok(self) -> bool:
        return self.max_post_jump <= self.post_jump_bound

    @property
    def isps_ok(self) -> bool:
        return self.isps_worst_ratio <= 1.0

    @property
    def all_ok(self) -> bool:
        return self.sup_z_ok and self.interval_ok and self.jump_ok and self.isps_ok

    def to_dict(self) -> dict:
        return {
            "sup_z": self.sup_z,
            "sup_z_bound": self.sup_z_bound,
            "min_interval": self.min_interval,
            "min_interval_bound": self.min_interval_bound,
            "max_post_jump": self.max_post_jump,
            "post_jump_bound": self.post_jump_bound,
            "isps_worst_ratio": self.isps_worst_ratio,
            "all_ok": self.all_ok,
        }


def check_invariants(
    traj: Trajectory,
    log: EventLog,
    plant: PlantConfig,
    trig: TriggerConfig,
    dt: float,
    codec: str = "sufficient",
    localization: str = "exact",
) -> InvariantReport:
    """Post-hoc comparison of a finished run against its analytic guarantees."""
    re = plant.re_a
    # grid triggering lets |z(t_s)| overshoot J by up to one step of growth,
    # and the decoder carries that overshoot through e^{Re(A) gamma}
    grid = localization == "grid"
    overshoot = error_growth(re, dt, plant.M, trig.J) - trig.J if grid else 0.0
    reach = trig.gamma + (dt if grid else 0.0)
    slack = 1.0 + 1e-9
    sup_bound = sup_error_bound(re, reach, plant.M, trig.J) * slack
    if codec == "sufficient":
        jump_bound = (trig.rho0 * trig.J + overshoot * math.exp(re * trig.gamma)) * slack
        rho = min(jump_bound / trig.J, 1.0 - 1e-12)
        interval_bound = min_inter_event_time(re, plant.M, trig.J, rho) * (1.0 - 1e-9)
        if grid:
            # both ends of an interval snap to the grid
            interval_bound = max(0.0, interval_bound - 2.0 * dt)
    else:
        interval_bound = 0.0
        jump_bound = trig.J * slack

    # the pre-jump peak at t_c falls between grid samples
    peaks = [abs(z) for z in log.z_at_trigger + log.z_at_reception]
    env = envelope_for(plant, trig)
    x0_abs = abs(traj.x[0]) if traj.x else 0.0
    ratios = [abs(x) / env.bound(x0_abs, plant.M, t) for t, x in zip(traj.times, traj.x)]
    report = InvariantReport(
        sup_z=max([traj.sup_abs("z")] + peaks),
        sup_z_bound=sup_bound,
        min_interval=log.min_interval(),
        min_interval_bound=interval_bound,
        max_post_jump=max(log.z_post_jump) if log.z_post_jump else 0.0,
        post_jump_bound=jump_bound,
        isps_worst_ratio=max(ratios) if ratios else 0.0,
    )
    if not report.all_ok:
        logger.warning("invariant check failed: %s", report.to_dict())
    return report
