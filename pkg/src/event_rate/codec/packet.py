"""
Packet layout shared by sensor and controller.

Real plants send [sign, parity, index...]: the parity of the bγ-interval that
contains t_s followed by the MSB-first index of the subinterval of that interval.
Complex plants replace the sign with lam bits quantizing the phase of z(t_s).
A one-bit real packet carries the sign only; the decoder then assumes t_s sits
in the middle of the reception window.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from event_rate.errors import CodecError, UndecodableError

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]


@dataclass(frozen=True)
class Packet:
    bits: Tuple[int, ...]
    t_generated: float
    g: int
    lam: int = 0  # phase bits; 0 marks a real packet whose first bit is the sign

    def __post_init__(self) -> None:
        if len(self.bits) != self.g:
            raise CodecError(f"packet declares g={self.g} but carries {len(self.bits)} bits")
        if any(bit not in (0, 1) for bit in self.bits):
            raise CodecError(f"packet bits must be 0/1, got {self.bits}")

    @property
    def is_complex(self) -> bool:
        return self.lam > 0

    def to_hex(self) -> str:
        """g:lam:HEX with the bit string read MSB-first."""
        value = _bits_to_int(self.bits)
        width = max(1, math.ceil(self.g / 4))
        return f"{self.g}:{self.lam}:{value:0{width}X}"

    @classmethod
    def from_hex(cls, text: str, t_generated: float = math.nan) -> "Packet":
        try:
            g_text, lam_text, hex_text = text.strip().split(":")
            g, lam, value = int(g_text), int(lam_text), int(hex_text, 16)
        except ValueError as e:
            raise CodecError(f"malformed packet '{text}': expected g:lam:HEX") from e
        if g < 1 or value >= 2 ** g:
            raise CodecError(f"packet '{text}' does not fit in g={g} bits")
        return cls(bits=_int_to_bits(value, g), t_generated=t_generated, g=g, lam=lam)


@dataclass(frozen=True)
class DecodedEvent:
    q_ts: float
    sign_or_phase: float  # +-1 for real packets, phase-cell centre in radians for complex ones
    zbar: Optional[Scalar] = None


def _bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for bit in bits:
        value = (value << 1) | bit
    return value


def _int_to_bits(value: int, width: int) -> Tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _check_timing(t_s: float, gamma: float, b: float) -> None:
    if t_s < 0.0:
        raise CodecError(f"t_s must be >= 0, got {t_s}")
    if not gamma > 0.0:
        raise CodecError(f"gamma must be > 0 to encode timing, got {gamma}")
    if not b > 1.0:
        raise CodecError(f"b must be > 1, got {b}")


def _timing_bits(t_s: float, n_index_bits: int, gamma: float, b: float) -> List[int]:
    width = b * gamma
    j = math.floor(t_s / width)
    n_sub = 2 ** n_index_bits
    idx = min(n_sub - 1, max(0, math.floor((t_s - j * width) / (width / n_sub))))
    return [j % 2] + list(_int_to_bits(idx, n_index_bits))


def _decode_timing(timing_bits: Sequence[int], t_c: float, gamma: float, b: float) -> float:
    """Midpoint of the subinterval the timing bits select within the reception window."""
    width = b * gamma
    parity = timing_bits[0]
    index_bits = timing_bits[1:]
    lo = t_c - gamma
    slack = 1e-12 * max(1.0, abs(t_c))
    first = math.floor(max(0.0, lo - slack) / width)
    last = math.floor((t_c + slack) / width)

    matches = [j for j in range(first, last + 1) if j % 2 == parity]
    if not matches:
        raise UndecodableError(
            f"no interval of width {width:g} overlapping [{lo:g}, {t_c:g}] has parity {parity}"
        )
    if len(matches) > 1:
        # only reachable through the rounding slack; keep the interval that overlaps most
        matches.sort(key=lambda j: -(min(t_c, (j + 1) * width) - max(lo, j * width)))
    j = matches[0]
    n_sub = 2 ** len(index_bits)
    idx = _bits_to_int(index_bits)
    return j * width + (idx + 0.5) * width / n_sub


def encode_real(t_s: float, sign_z: int, g: int, gamma: float, b: float) -> Packet:
    if g < 2:
        raise CodecError(f"real timing packets need g >= 2, got {g}")
    if sign_z not in (1, -1):
        raise CodecError(f"sign must be +1 or -1, got {sign_z}")
    _check_timing(t_s, gamma, b)
    bits = [1 if sign_z > 0 else 0] + _timing_bits(t_s, g - 2, gamma, b)
    return Packet(bits=tuple(bits), t_generated=t_s, g=g, lam=0)


def encode_sign_only(t_s: float, sign_z: int) -> Packet:
    if sign_z not in (1, -1):
        raise CodecError(f"sign must be +1 or -1, got {sign_z}")
    return Packet(bits=(1 if sign_z > 0 else 0,), t_generated=t_s, g=1, lam=0)


def encode_cell(index: int, g: int, t_s: float) -> Packet:
    """Packet carrying a bare quantizer cell index, negative-side cells first."""
    if not 0 <= index < 2 ** g:
        raise CodecError(f"cell {index} does not fit in g={g} bits")
    return Packet(bits=_int_to_bits(index, g), t_generated=t_s, g=g, lam=0)


def decode_real(p: Packet, t_c: float, gamma: float, b: float) -> DecodedEvent:
    if p.is_complex:
        raise CodecError("decode_real given a complex packet")
    sign = 1.0 if p.bits[0] == 1 else -1.0
    if p.g == 1:
        return DecodedEvent(q_ts=t_c - 0.5 * gamma, sign_or_phase=sign)
    if not gamma > 0.0:
        raise CodecError(f"gamma must be > 0 to decode timing, got {gamma}")
    return DecodedEvent(q_ts=_decode_timing(p.bits[1:], t_c, gamma, b), sign_or_phase=sign)


def reconstruct_zbar_real(dec: DecodedEvent, t_c: float, A: float, J: float) -> float:
    return dec.sign_or_phase * J * math.exp(A * (t_c - dec.q_ts))


def phase_cell(phase: float, lam: int) -> int:
    phase = phase % (2.0 * math.pi)
    n = 2 ** lam
    return min(n - 1, math.floor(phase / (2.0 * math.pi / n)))


def phase_cell_centre(cell: int, lam: int) -> float:
    return (cell + 0.5) * 2.0 * math.pi / 2 ** lam


def encode_complex(t_s: float, phase_z: float, g: int, lam: int, gamma: float, b: float) -> Packet:
    if lam < 1:
        raise CodecError(f"lam must be >= 1, got {lam}")
    if g <= lam:
        raise CodecError(f"g={g} leaves no timing bits after lam={lam} phase bits")
    _check_timing(t_s, gamma, b)
    bits = list(_int_to_bits(phase_cell(phase_z, lam), lam)) + _timing_bits(t_s, g - lam - 1, gamma, b)
    return Packet(bits=tuple(bits), t_generated=t_s, g=g, lam=lam)


def decode_complex(p: Packet, t_c: float, gamma: float, b: float, A: complex, J: float) -> DecodedEvent:
    if not p.is_complex:
        raise CodecError("decode_complex given a real packet")
    if not gamma > 0.0:
        raise CodecError(f"gamma must be > 0 to decode timing, got {gamma}")
    phi = phase_cell_centre(_bits_to_int(p.bits[: p.lam]), p.lam)
    q_ts = _decode_timing(p.bits[p.lam:], t_c, gamma, b)
    zbar = cmath.exp(A * (t_c - q_ts)) * J * cmath.exp(1j * phi)
    return DecodedEvent(q_ts=q_ts, sign_or_phase=phi, zbar=zbar)
