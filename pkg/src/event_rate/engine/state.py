from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from event_rate.codec.packet import Packet

Scalar = Union[float, complex]


@dataclass(frozen=True)
class InFlight:
    packet: Packet
    t_s: float
    t_c: float
    z_ts: Scalar


@dataclass(frozen=True)
class SimState:
    t: float
    x: Scalar
    xhat_ctrl: Scalar
    xhat_sensor: Scalar
    u: Scalar
    in_flight: Optional[InFlight] = None

    @property
    def z(self) -> Scalar:
        return self.x - self.xhat_sensor


@dataclass
class EventLog:
    ts_list: List[float] = field(default_factory=list)
    tc_list: List[float] = field(default_factory=list)
    delays: List[float] = field(default_factory=list)
    packet_bits: List[int] = field(default_factory=list)
    packets: List[str] = field(default_factory=list)
    z_at_trigger: List[Scalar] = field(default_factory=list)
    z_at_reception: List[Scalar] = field(default_factory=list)
    z_post_jump: List[float] = field(default_factory=list)

    @property
    def n_events(self) -> int:
        return len(self.ts_list)

    @property
    def intervals(self) -> List[float]:
        return [b - a for a, b in zip(self.ts_list, self.ts_list[1:])]

    def min_interval(self) -> float:
        iv = self.intervals
        return min(iv) if iv else math.inf

    def triggering_rate(self) -> float:
        """Events per second over the completed inter-event intervals."""
        iv = self.intervals
        if not iv:
            return 0.0
        return len(iv) / sum(iv)

    def realized_rate(self) -> float:
        """Bits per second: packets sent at the start of each completed interval over its length."""
        iv = self.intervals
        if not iv:
            return 0.0
        return sum(self.packet_bits[: len(iv)]) / sum(iv)

    def to_frame(self) -> pd.DataFrame:
        n = len(self.tc_list)
        return pd.DataFrame(
            {
                "k": list(range(n)),
                "t_s": self.ts_list[:n],
                "t_c": self.tc_list,
                "delay": self.delays[:n],
                "g_bits": self.packet_bits[:n],
                "z_post_jump": self.z_post_jump,
                "packet": self.packets[:n],
            }
        )


def _columns(prefix: str, values: np.ndarray) -> Dict[str, np.ndarray]:
    if np.iscomplexobj(values):
        return {f"{prefix}_re": values.real, f"{prefix}_im": values.imag}
    return {prefix: values}


@dataclass
class Trajectory:
    """Samples at every grid point up to T; w is the value held over the following step (NaN at T)."""

    times: List[float] = field(default_factory=list)
    x: List[Scalar] = field(default_factory=list)
    xhat: List[Scalar] = field(default_factory=list)
    z: List[Scalar] = field(default_factory=list)
    u: List[Scalar] = field(default_factory=list)
    w: List[Scalar] = field(default_factory=list)

    def record(self, state: SimState, w: Scalar) -> None:
        self.times.append(state.t)
        self.x.append(state.x)
        self.xhat.append(state.xhat_ctrl)
        self.z.append(state.z)
        self.u.append(state.u)
        self.w.append(w)

    def __len__(self) -> int:
        return len(self.times)

    def sup_abs(self, name: str) -> float:
        values = getattr(self, name)
        return float(np.max(np.abs(values))) if values else 0.0

    def to_frame(self) -> pd.DataFrame:
        cols: Dict[str, np.ndarray] = {"t": np.asarray(self.times, dtype=float)}
        for name in ("x", "xhat", "z", "u", "w"):
            cols.update(_columns(name, np.asarray(getattr(self, name))))
        return pd.DataFrame(cols)
