from __future__ import annotations


class EventRateError(Exception):
    pass


class BoundDomainError(EventRateError, ValueError):
    """A rate or bit bound was evaluated outside the parameter region where it is defined."""


class CodecError(EventRateError, ValueError):
    pass


class UndecodableError(CodecError):
    """No bγ-interval overlapping the reception window matches the packet parity bit."""


class ZenoGuardError(EventRateError):
    def __init__(self, n_events: int, horizon: float, dt: float) -> None:
        self.n_events = n_events
        self.horizon = horizon
        self.dt = dt
        super().__init__(
            f"{n_events} triggers within T={horizon:g} exceeds the T/dt={horizon / dt:g} guard"
        )


class InfeasibleRealizationError(BoundDomainError):
    """The requested adversarial delay/disturbance script cannot be built for these parameters."""
