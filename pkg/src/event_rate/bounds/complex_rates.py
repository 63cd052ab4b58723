"""
Packet-size and rate bounds for a scalar complex unstable plant.

The packet carries lam phase bits plus g - lam timing bits. The timing error
enters the phase of the reconstructed estimate through zeta = 1 - cos(Im(A) * err),
so the bit requirement is found as the smallest integer g that satisfies the
bound evaluated at its own zeta.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

from event_rate.bounds.rates import min_inter_event_time
from event_rate.errors import BoundDomainError

logger = logging.getLogger(__name__)

FIXED_POINT_SEARCH = 64


def _re(A: complex) -> float:
    re = complex(A).real
    if not re > 0.0:
        raise BoundDomainError(f"Re(A) must be > 0, got {re}")
    return re


def timing_error_bound(gamma: float, b: float, g: int, lam: int) -> float:
    """Largest |t_s - decoded t_s| for a complex packet of g bits, lam of them phase bits."""
    return b * gamma / 2.0 ** (g - lam)


def zeta_for_bits(A: complex, gamma: float, b: float, g: int, lam: int) -> float:
    x = min(abs(complex(A).imag) * timing_error_bound(gamma, b, g, lam), math.pi)
    return 1.0 - math.cos(x)


def phase_cell_term(lam: int) -> float:
    """|e^{i phi} - e^{i phi_q}| bound for a phase quantized into 2^lam cells."""
    return 2.0 * math.sin(math.pi / 2.0 ** (lam + 1))


def timing_margin_complex(
    A: complex, gamma: float, M: float, J: float, rho0: float, lam: int, zeta: float
) -> float:
    """
    Log of the admissible timing-error growth factor. Non-positive when the
    phase quantization alone already uses up the contraction budget.
    """
    re = _re(A)
    grow = math.expm1(re * gamma)
    num = 1.0 + math.exp(-re * gamma) * (rho0 - (M / (re * J)) * grow)
    den = phase_cell_term(lam) + 1.0 + math.sqrt(2.0 * zeta)
    if num <= 0.0:
        return -math.inf
    return math.log(num / den)


def complex_bits_at(
    A: complex, gamma: float, M: float, J: float, rho0: float, b: float, lam: int, zeta: float
) -> float:
    re = _re(A)
    margin = timing_margin_complex(A, gamma, M, J, rho0, lam, zeta)
    if margin <= 0.0:
        return math.inf
    x = re * b * gamma / margin
    if x <= 0.0:
        return 0.0
    return max(0.0, lam + math.log2(x))


def complex_constraint_violations(
    A: complex,
    gamma: float,
    M: float,
    J: float,
    rho0: float,
    lam: int,
    chi: float,
    chi_prime: float,
    zeta: float = 0.0,
) -> List[str]:
    errors: List[str] = []
    re = _re(A)
    e = math.exp(re * gamma)
    grow = math.expm1(re * gamma)

    if lam < 1:
        errors.append(f"lam must be >= 1, got {lam}")
        return errors
    if not (0.0 < chi + chi_prime < 1.0) or chi <= 0.0 or chi_prime <= 0.0:
        errors.append(f"need chi, chi' > 0 and 0 < chi + chi' < 1, got chi={chi}, chi'={chi_prime}")
        return errors

    rhs = (M / (re * J)) * grow + e * (phase_cell_term(lam) + math.sqrt(2.0 * zeta))
    if rho0 < rhs:
        errors.append(f"rho0={rho0:g} below the phase/threshold floor {rhs:g}")
    j_min = (M / (re * chi)) * grow
    if J < j_min:
        errors.append(f"J={J:g} below M(e^(Re(A)gamma)-1)/(Re(A)chi)={j_min:g}")
    if math.sqrt(2.0 * zeta) * e > chi_prime:
        errors.append(f"sqrt(2 zeta) e^(Re(A)gamma)={math.sqrt(2.0 * zeta) * e:g} exceeds chi'={chi_prime:g}")
    lam_min = math.log2(math.pi / math.asin((1.0 - chi - chi_prime) / (2.0 * e))) - 1.0
    if not lam > lam_min:
        errors.append(f"lam={lam} must exceed {lam_min:g}")
    return errors


@dataclass(frozen=True)
class ComplexPacketDesign:
    gbar: float
    bits: int
    lam: int
    zeta: float
    timing_error: float


def complex_packet_design(
    A: complex,
    gamma: float,
    M: float,
    J: float,
    rho0: float,
    b: float,
    lam: int,
    chi: float = 0.125,
    chi_prime: float = 0.125,
    enforce_constraints: bool = True,
) -> ComplexPacketDesign:
    """Smallest g >= lam + 1 that satisfies the bit bound at its own zeta."""
    if lam < 1:
        raise BoundDomainError(f"lam must be >= 1, got {lam}")
    if not b > 1.0:
        raise BoundDomainError(f"b must be > 1, got {b}")
    if enforce_constraints:
        # constraints only tighten as zeta grows, so zeta = 0 is a quick necessary check
        errors = complex_constraint_violations(A, gamma, M, J, rho0, lam, chi, chi_prime, 0.0)
        if errors:
            raise BoundDomainError("complex bit bound constraints violated: " + "; ".join(errors))

    last_gbar = math.inf
    for g in range(lam + 1, lam + 1 + FIXED_POINT_SEARCH):
        zeta = zeta_for_bits(A, gamma, b, g, lam)
        gbar = complex_bits_at(A, gamma, M, J, rho0, b, lam, zeta)
        last_gbar = gbar
        if gbar > g:
            continue
        if enforce_constraints and complex_constraint_violations(
            A, gamma, M, J, rho0, lam, chi, chi_prime, zeta
        ):
            continue
        return ComplexPacketDesign(
            gbar=gbar, bits=g, lam=lam, zeta=zeta, timing_error=timing_error_bound(gamma, b, g, lam)
        )

    if not enforce_constraints and math.isinf(last_gbar):
        logger.warning("complex bit bound: timing margin is non-positive for every g; returning inf")
        return ComplexPacketDesign(gbar=math.inf, bits=-1, lam=lam, zeta=math.nan, timing_error=math.nan)
    raise BoundDomainError(
        f"no packet size in [{lam + 1}, {lam + FIXED_POINT_SEARCH}] satisfies the complex bit bound"
    )


def sufficient_bits_complex(
    A: complex,
    gamma: float,
    M: float,
    J: float,
    rho0: float,
    b: float,
    lam: int,
    chi: float = 0.125,
    chi_prime: float = 0.125,
    enforce_constraints: bool = True,
) -> float:
    return complex_packet_design(
        A, gamma, M, J, rho0, b, lam, chi, chi_prime, enforce_constraints
    ).gbar


def practical_bits_complex(
    A: complex,
    gamma: float,
    M: float,
    J: float,
    rho0: float,
    b: float,
    lam: int,
    chi: float = 0.125,
    chi_prime: float = 0.125,
) -> int:
    return complex_packet_design(A, gamma, M, J, rho0, b, lam, chi, chi_prime).bits


def sufficient_rate_complex(
    A: complex,
    gamma: float,
    M: float,
    J: float,
    rho0: float,
    b: float,
    lam: int,
    chi: float = 0.125,
    chi_prime: float = 0.125,
) -> float:
    gbar = sufficient_bits_complex(A, gamma, M, J, rho0, b, lam, chi, chi_prime)
    if gbar == 0.0:
        return 0.0
    return gbar / min_inter_event_time(_re(A), M, J, rho0)


def smallest_lambda(
    A: complex,
    gamma: float,
    M: float,
    J: float,
    rho0: float,
    b: float,
    chi: float = 0.125,
    chi_prime: float = 0.125,
    lam_max: int = 32,
) -> int:
    """Fewest phase bits for which a complex packet design exists."""
    reasons: Optional[str] = None
    for lam in range(1, lam_max + 1):
        try:
            complex_packet_design(A, gamma, M, J, rho0, b, lam, chi, chi_prime)
            return lam
        except BoundDomainError as e:
            reasons = str(e)
    raise BoundDomainError(f"no lam <= {lam_max} admits a packet design (last: {reasons})")


def rule_of_thumb_lambda(A: complex, gamma: float) -> int:
    """Phase-bit rule of thumb with chi = chi' = 1/8, clamped to at least one bit."""
    re = _re(A)
    arg = math.pi / (2.0 * math.asin(7.0 / 8.0) * math.exp(re * gamma))
    return max(1, math.ceil(math.log2(arg)))


def threshold_rule_complex(A: complex, gamma: float, M: float, chi: float, J_offset: float) -> float:
    re = _re(A)
    return (M / (re * chi)) * math.expm1(re * gamma) + J_offset
