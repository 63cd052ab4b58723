"""
The set of errors z(t_c) the controller cannot tell apart at reception time,
and the smallest quantizer that still meets the |z(t_c+)| < J contract on it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from event_rate.bounds.rates import error_growth
from event_rate.errors import BoundDomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UncertaintySet:
    lo: float
    hi: float
    sign: int = 1

    @property
    def measure(self) -> float:
        return self.hi - self.lo

    @property
    def two_sided_measure(self) -> float:
        return 2.0 * self.measure

    def contains(self, y: float, tol: float = 1e-12) -> bool:
        return self.lo - tol <= y <= self.hi + tol


def _check(A: float, gamma: float, M: float, J: float) -> None:
    if not A > 0.0 or not J > 0.0:
        raise BoundDomainError(f"need A > 0 and J > 0, got A={A}, J={J}")
    if gamma < 0.0 or M < 0.0:
        raise BoundDomainError(f"need gamma >= 0 and M >= 0, got gamma={gamma}, M={M}")
    if M > A * J:
        raise BoundDomainError(f"uncertainty set needs M <= A*J, got M={M:g} > {A * J:g}")


def uncertainty_set(A: float, gamma: float, M: float, J: float, sign: int = 1) -> UncertaintySet:
    """Interval of z(t_c) for a positive (or, mirrored, negative) trigger at |z| = J."""
    _check(A, gamma, M, J)
    hi = error_growth(A, gamma, M, J)
    if sign >= 0:
        return UncertaintySet(lo=J, hi=hi, sign=1)
    return UncertaintySet(lo=-hi, hi=-J, sign=-1)


def sample_sensor_side(
    A: float, gamma: float, M: float, J: float, n: int, rng: np.random.Generator, pieces: int = 4
) -> np.ndarray:
    """
    Monte Carlo z(t_s + delay) from z(t_s) = J under random delays and piecewise
    constant disturbances. Half of the draws use bang-bang disturbances so the
    extremes of the set are actually reached.
    """
    _check(A, gamma, M, J)
    delay = rng.uniform(0.0, gamma, size=n)
    w = rng.uniform(-M, M, size=(n, pieces))
    bang = rng.uniform(size=n) < 0.5
    w[bang] = np.where(rng.uniform(size=(int(bang.sum()), pieces)) < 0.5, -M, M)
    return _integrate(A, J, delay, w)


def sample_controller_side(
    A: float, gamma: float, M: float, J: float, t_c: float, n: int, rng: np.random.Generator, pieces: int = 4
) -> np.ndarray:
    """Same set seen from the receiver: the trigger time t_r ranges over [t_c - gamma, t_c]."""
    _check(A, gamma, M, J)
    t_r = rng.uniform(t_c - gamma, t_c, size=n)
    w = rng.uniform(-M, M, size=(n, pieces))
    bang = rng.uniform(size=n) < 0.5
    w[bang] = np.where(rng.uniform(size=(int(bang.sum()), pieces)) < 0.5, -M, M)
    return _integrate(A, J, t_c - t_r, w)


def _integrate(A: float, J: float, delay: np.ndarray, w: np.ndarray) -> np.ndarray:
    pieces = w.shape[1]
    h = delay / pieces
    out = J * np.exp(A * delay)
    for p in range(pieces):
        end = (p + 1) * h
        out = out + w[:, p] * np.exp(A * (delay - end)) * np.expm1(A * h) / A
    return out


@dataclass(frozen=True)
class MinimalQuantizer:
    """Equal-width cells covering one signed uncertainty interval, mirrored for the other sign."""

    J: float
    lo: float
    hi: float
    n_cells: int

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def total_cells(self) -> int:
        return 2 * self.n_cells

    @property
    def bits(self) -> int:
        return max(1, math.ceil(math.log2(self.total_cells)))

    def cells(self) -> List[Tuple[float, float]]:
        w = self.width
        positive = [(self.lo + i * w, self.lo + (i + 1) * w) for i in range(self.n_cells)]
        negative = [(-hi, -lo) for lo, hi in positive]
        return negative[::-1] + positive

    def centres(self) -> List[float]:
        return [0.5 * (lo + hi) for lo, hi in self.cells()]

    def encode(self, z: float) -> Tuple[int, float]:
        """Cell index (negative side first) and centre for the cell containing z, clamped to the range."""
        mag = min(self.hi, max(self.lo, abs(z)))
        i = min(self.n_cells - 1, math.floor((mag - self.lo) / self.width)) if self.width > 0.0 else 0
        centre = self.lo + (i + 0.5) * self.width
        if z >= 0.0:
            return self.n_cells + i, centre
        return self.n_cells - 1 - i, -centre


def minimal_quantizer(A: float, gamma: float, M: float, J: float) -> MinimalQuantizer:
    """Fewest cells of width <= 2J covering the uncertainty set; residual |z - centre| <= J."""
    s = uncertainty_set(A, gamma, M, J)
    n = max(1, math.ceil(s.measure / (2.0 * J) - 1e-12))
    q = MinimalQuantizer(J=J, lo=s.lo, hi=s.hi, n_cells=n)
    logger.debug("minimal quantizer: %d cells per side, width %g, %d bits", n, q.width, q.bits)
    return q
