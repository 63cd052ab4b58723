"""
Closed-form bit and rate bounds for a scalar real unstable plant.

All functions take plain floats so they can be swept over arrays of delay
bounds without building a plant object. Arguments follow one convention:
A > 0 is the open-loop pole, gamma the delay bound, M the disturbance bound,
J the trigger threshold, rho0 the post-jump contraction target and b > 1 the
timing-interval stretch.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional

from event_rate.errors import BoundDomainError

logger = logging.getLogger(__name__)


def _require_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not value > 0.0:
            raise BoundDomainError(f"{name} must be > 0, got {value}")


def _require_nonnegative(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not value >= 0.0:
            raise BoundDomainError(f"{name} must be >= 0, got {value}")


def _log2_or_neg_inf(x: float) -> float:
    return math.log2(x) if x > 0.0 else -math.inf


def error_growth(A: float, delay: float, M: float, J: float) -> float:
    """Largest |z| reachable from |z| = J after `delay` seconds of |w| <= M."""
    return J * math.exp(A * delay) + (M / A) * math.expm1(A * delay)


def sup_error_bound(A: float, gamma: float, M: float, J: float) -> float:
    _require_positive(A=A, J=J)
    _require_nonnegative(gamma=gamma, M=M)
    return error_growth(A, gamma, M, J)


def min_inter_event_time(A: float, M: float, J: float, rho0: float) -> float:
    """Lower bound on consecutive trigger spacing given |z(t_c+)| <= rho0 J."""
    _require_positive(A=A, J=J)
    _require_nonnegative(M=M)
    if not 0.0 < rho0 < 1.0:
        raise BoundDomainError(f"rho0 must be in (0, 1), got {rho0}")
    return math.log((J * A + M) / (rho0 * J * A + M)) / A


def min_threshold(A: float, gamma: float, M: float, rho0: float) -> float:
    """J must strictly exceed this for the timing tolerance to be positive."""
    return (M / (A * rho0)) * math.expm1(A * gamma)


def eta(A: float, gamma: float, M: float, J: float, rho0: float) -> float:
    _require_positive(A=A, J=J)
    _require_nonnegative(gamma=gamma, M=M)
    return math.exp(-A * gamma) * (rho0 - (M / (A * J)) * math.expm1(A * gamma))


def timing_margin_real(A: float, gamma: float, M: float, J: float, rho0: float) -> float:
    """ln(1 + eta): A times the largest tolerable error in the decoded trigger time."""
    value = eta(A, gamma, M, J, rho0)
    if value <= 0.0:
        raise BoundDomainError(
            f"threshold J={J:g} does not exceed the minimum {min_threshold(A, gamma, M, rho0):g} "
            f"for gamma={gamma:g}, M={M:g}, rho0={rho0:g}"
        )
    return math.log1p(value)


def timing_tolerance(A: float, gamma: float, M: float, J: float, rho0: float) -> float:
    return timing_margin_real(A, gamma, M, J, rho0) / A


def sufficient_bits_real(A: float, gamma: float, M: float, J: float, rho0: float, b: float) -> float:
    _require_positive(A=A, J=J)
    _require_nonnegative(gamma=gamma, M=M)
    if not b > 1.0:
        raise BoundDomainError(f"b must be > 1, got {b}")
    if not 0.0 < rho0 < 1.0:
        raise BoundDomainError(f"rho0 must be in (0, 1), got {rho0}")
    margin = timing_margin_real(A, gamma, M, J, rho0)
    return max(0.0, 1.0 + _log2_or_neg_inf(A * b * gamma / margin))


def practical_bits_real(A: float, gamma: float, M: float, J: float, rho0: float, b: float) -> int:
    return max(1, math.ceil(sufficient_bits_real(A, gamma, M, J, rho0, b)))


def trig_rate_upper(A: float, M: float, J: float, rho0: float) -> float:
    """Largest triggering rate: one event per minimum inter-event time."""
    interval = min_inter_event_time(A, M, J, rho0)
    if interval <= 0.0:
        return math.inf
    return 1.0 / interval


def sufficient_rate_real(A: float, gamma: float, M: float, J: float, rho0: float, b: float) -> float:
    bits = sufficient_bits_real(A, gamma, M, J, rho0, b)
    if bits == 0.0:
        return 0.0
    return trig_rate_upper(A, M, J, rho0) * bits


def uncertainty_measure(A: float, gamma: float, M: float, J: float) -> float:
    """Lebesgue measure of the two-sided set of errors the controller may face at reception."""
    _require_positive(A=A, J=J)
    _require_nonnegative(gamma=gamma, M=M)
    return 2.0 * (M / A + J) * math.expm1(A * gamma)


def necessary_bits(A: float, gamma: float, M: float, J: float) -> float:
    _require_positive(A=A, J=J)
    _require_nonnegative(gamma=gamma, M=M)
    if M > A * J:
        raise BoundDomainError(f"necessary bound requires M <= A*J, got M={M:g} > {A * J:g}")
    return max(0.0, _log2_or_neg_inf((M / (A * J) + 1.0) * math.expm1(A * gamma)))


def trig_rate_lower_general(A: float, M: float, J: float, alpha: float, upsilon: float) -> float:
    """
    Triggering rate forced when every delay can be stretched to alpha and every
    post-jump error can be steered to upsilon. Returns inf when the forced
    interval is non-positive.
    """
    _require_positive(A=A, J=J)
    _require_nonnegative(M=M, alpha=alpha, upsilon=upsilon)
    if upsilon * A + M == 0.0:
        raise BoundDomainError("upsilon*A + M = 0: inter-event time is unbounded")
    denom = math.log(math.exp(A * alpha) * (J * A + M) / (upsilon * A + M))
    if denom <= 0.0:
        return math.inf
    return A / denom


def necessary_rate_general(A: float, gamma: float, M: float, J: float) -> float:
    bits = necessary_bits(A, gamma, M, J)
    if M == 0.0:
        logger.warning("necessary_rate_general: M=0 gives an unbounded inter-event time; returning 0")
        return 0.0
    if bits == 0.0:
        return 0.0
    return A * bits / math.log(math.exp(A * gamma) * (J * A + M) / M)


def beta(A: float, M: float, J: float) -> float:
    """Delay at which a single quantizer cell can no longer cover the uncertainty set."""
    _require_positive(A=A, J=J)
    _require_nonnegative(M=M)
    return math.log1p(2.0 * A * J / (A * J + M)) / A


def necessary_rate_restricted(A: float, gamma: float, M: float, J: float) -> float:
    bits = necessary_bits(A, gamma, M, J)
    b_star = beta(A, M, J)
    if b_star > gamma:
        raise BoundDomainError(f"beta={b_star:g} exceeds gamma={gamma:g}")
    if bits == 0.0:
        return 0.0
    return A * bits / math.log(
        (1.0 + 2.0 * A * J / (A * J + M)) * (J * A + M) / (0.5 * J * A + M)
    )


def trig_rate_lower_restricted(A: float, M: float, J: float) -> float:
    return trig_rate_lower_general(A, M, J, beta(A, M, J), 0.5 * J)


def datarate_baseline(A: complex) -> float:
    """Rate needed by a time-triggered stabilizer: A/ln 2, or 2 Re(A)/ln 2 for a complex pole."""
    if isinstance(A, complex):
        return 2.0 * A.real / math.log(2.0)
    return float(A) / math.log(2.0)


def threshold_rule_real(A: float, gamma: float, M: float, rho0: float, J_offset: float) -> float:
    return min_threshold(A, gamma, M, rho0) + J_offset


@dataclass(frozen=True)
class RateReport:
    gamma: float
    suff_bits: float
    practical_bits: int
    suff_rate: float
    nec_bits: float
    nec_rate_general: float
    nec_rate_restricted: float
    trig_upper: float
    trig_lower_restricted: float
    beta: float
    datarate: float
    J: float = math.nan
    mode: str = "real"
    lam: Optional[int] = None

    def to_row(self) -> Dict[str, object]:
        return asdict(self)


def _or_nan(fn, *args) -> float:
    try:
        return fn(*args)
    except BoundDomainError as e:
        logger.warning("bound undefined, emitting NaN: %s", e)
        return math.nan


def rate_report(A: float, gamma: float, M: float, J: float, rho0: float, b: float) -> RateReport:
    """Every real-plant bound at one operating point; undefined entries are NaN."""
    suff = sufficient_bits_real(A, gamma, M, J, rho0, b)
    practical = practical_bits_real(A, gamma, M, J, rho0, b)
    b_star = _or_nan(beta, A, M, J)
    report = RateReport(
        gamma=gamma,
        suff_bits=suff,
        practical_bits=practical,
        suff_rate=sufficient_rate_real(A, gamma, M, J, rho0, b),
        nec_bits=_or_nan(necessary_bits, A, gamma, M, J),
        nec_rate_general=_or_nan(necessary_rate_general, A, gamma, M, J),
        nec_rate_restricted=_or_nan(necessary_rate_restricted, A, gamma, M, J),
        trig_upper=trig_rate_upper(A, M, J, rho0),
        trig_lower_restricted=(
            _or_nan(trig_rate_lower_restricted, A, M, J) if b_star <= gamma else math.nan
        ),
        beta=b_star,
        datarate=datarate_baseline(A),
        J=J,
    )
    logger.debug("rate report gamma=%g: %s", gamma, report)
    return report
