"""
Diagonalization of a multi-state plant into independent scalar modes.

Modes are indexed by descending real part. A complex-conjugate pair is kept
as one complex mode (the +Im member); its partner's coordinate is always the
conjugate, so physical states are rebuilt as 2 Re(P_j s_j) for that pair.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import expm

from event_rate.utils.config_validator import ConfigValidationError, raise_if_errors

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]

MAX_CONDITION = 1e8
_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class VectorPlant:
    A_mat: np.ndarray
    B_vec: np.ndarray
    K_vec: np.ndarray
    M: float

    @classmethod
    def from_lists(cls, A: Sequence[Sequence[float]], B: Sequence[float], K: Sequence[float], M: float) -> "VectorPlant":
        return cls(
            A_mat=np.asarray(A, dtype=float),
            B_vec=np.asarray(B, dtype=float).reshape(-1),
            K_vec=np.asarray(K, dtype=float).reshape(-1),
            M=float(M),
        )

    @property
    def n(self) -> int:
        return self.A_mat.shape[0]

    @property
    def closed_loop(self) -> np.ndarray:
        return self.A_mat - np.outer(self.B_vec, self.K_vec)

    def validate(self) -> List[str]:
        errors: List[str] = []
        if self.A_mat.ndim != 2 or self.A_mat.shape[0] != self.A_mat.shape[1]:
            return [f"A must be square, got shape {self.A_mat.shape}"]
        if self.B_vec.shape != (self.n,) or self.K_vec.shape != (self.n,):
            return [f"B and K must have {self.n} entries, got {self.B_vec.shape} and {self.K_vec.shape}"]
        if self.M < 0.0:
            errors.append(f"M must be >= 0, got {self.M}")
        worst = float(np.max(np.linalg.eigvals(self.closed_loop).real))
        if not worst < 0.0:
            errors.append(f"closed loop A - BK is not Hurwitz (max Re eig = {worst:g})")
        return errors


@dataclass(frozen=True)
class Mode:
    index: int  # column of P
    eigenvalue: Scalar
    b_tilde: Scalar
    m_tilde: float
    stable: bool
    paired: bool = False

    @property
    def is_complex(self) -> bool:
        return self.paired


@dataclass(frozen=True)
class ModalDecomposition:
    P: np.ndarray
    P_inv: np.ndarray
    eigenvalues: np.ndarray
    modes: Tuple[Mode, ...]

    @property
    def unstable_modes(self) -> List[Mode]:
        return [m for m in self.modes if not m.stable]

    def _cast(self, mode: Mode, value: complex) -> Scalar:
        return complex(value) if mode.paired else float(np.real(value))

    def to_modes(self, s: Sequence[float]) -> List[Scalar]:
        full = self.P_inv @ np.asarray(s, dtype=float)
        return [self._cast(m, full[m.index]) for m in self.modes]

    def project(self, v: np.ndarray) -> List[Scalar]:
        """Modal coordinates of a physical-space vector (disturbance, input direction)."""
        return self.to_modes(v)

    def to_physical(self, values: Sequence[Scalar]) -> np.ndarray:
        out = np.zeros(self.P.shape[0])
        for mode, v in zip(self.modes, values):
            contrib = self.P[:, mode.index] * v
            out += 2.0 * np.real(contrib) if mode.paired else np.real(contrib)
        return out

    def reconstruction_residual(self, A_mat: np.ndarray) -> float:
        rebuilt = self.P @ np.diag(self.eigenvalues) @ self.P_inv
        return float(np.max(np.abs(rebuilt - A_mat)) / max(1.0, np.max(np.abs(A_mat))))


def decompose(plant: VectorPlant, max_condition: float = MAX_CONDITION) -> ModalDecomposition:
    raise_if_errors(plant.validate(), "vector plant")
    eigvals, eigvecs = np.linalg.eig(plant.A_mat)

    order = sorted(range(len(eigvals)), key=lambda i: (-eigvals[i].real, -eigvals[i].imag))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    scale = max(1.0, float(np.max(np.abs(eigvals))))
    gaps = [abs(a - b) for i, a in enumerate(eigvals) for b in eigvals[i + 1:]]
    if gaps and min(gaps) < 1e-9 * scale:
        raise ConfigValidationError("A has repeated eigenvalues; only diagonalizable plants with distinct modes are supported")

    has_pairs = bool(np.any(np.abs(eigvals.imag) > _IMAG_TOL * scale))
    P = eigvecs.astype(complex) if has_pairs else eigvecs.real.astype(float)
    lam = eigvals.copy() if has_pairs else eigvals.real.copy()
    # marginal modes come back as +-1e-17; pin them to zero so they count as stable
    tiny = np.abs(lam.real) <= _IMAG_TOL * scale
    lam[tiny] = 1j * lam[tiny].imag if has_pairs else 0.0

    partner_of = {}
    for i, ev in enumerate(eigvals):
        if ev.imag > _IMAG_TOL * scale:
            j = int(np.argmin(np.abs(eigvals - np.conj(ev))))
            partner_of[i] = j
            P[:, j] = np.conj(P[:, i])
            lam[j] = np.conj(lam[i])
    for i, ev in enumerate(eigvals):
        if abs(ev.imag) <= _IMAG_TOL * scale and has_pairs:
            P[:, i] = P[:, i].real
            lam[i] = lam[i].real

    cond = float(np.linalg.cond(P))
    if not np.isfinite(cond) or cond > max_condition:
        raise ConfigValidationError(f"eigenvector matrix is ill-conditioned (cond={cond:.3g} > {max_condition:g})")
    P_inv = np.linalg.inv(P)
    b_tilde = P_inv @ plant.B_vec
    m_tilde = np.sum(np.abs(P_inv), axis=1) * plant.M

    partners = set(partner_of.values())
    modes = []
    for i in range(len(eigvals)):
        if i in partners:
            continue
        paired = i in partner_of
        ev = complex(lam[i]) if paired else float(np.real(lam[i]))
        modes.append(
            Mode(
                index=i,
                eigenvalue=ev,
                b_tilde=complex(b_tilde[i]) if paired else float(np.real(b_tilde[i])),
                m_tilde=float(m_tilde[i]),
                stable=bool(np.real(lam[i]) <= 0.0),
                paired=paired,
            )
        )
    logger.info(
        "decomposed %dx%d plant: eigenvalues %s, cond(P)=%.3g, %d unstable mode(s)",
        plant.n, plant.n, np.round(lam, 4).tolist(), cond, sum(not m.stable for m in modes),
    )
    return ModalDecomposition(P=P, P_inv=P_inv, eigenvalues=np.asarray(lam), modes=tuple(modes))


def zoh_discretize(A_mat: np.ndarray, B_mat: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold pair (Phi, Gamma) from one matrix exponential of the augmented system."""
    n, m = A_mat.shape[0], B_mat.shape[1]
    block = np.zeros((n + m, n + m))
    block[:n, :n] = A_mat
    block[:n, n:] = B_mat
    E = expm(block * dt)
    return E[:n, :n], E[:n, n:]


def simulate_physical(
    plant: VectorPlant, s0: Sequence[float], u_seq: Sequence[float], w_seq: Sequence[Sequence[float]], dt: float
) -> np.ndarray:
    """Roll the physical plant forward under recorded held inputs; rows are states at step starts."""
    # input columns: B for u, identity for w
    inputs = np.hstack([plant.B_vec.reshape(-1, 1), np.eye(plant.n)])
    Phi, Gamma = zoh_discretize(plant.A_mat, inputs, dt)
    s = np.asarray(s0, dtype=float)
    out = np.zeros((len(u_seq), plant.n))
    for k, (u, w) in enumerate(zip(u_seq, w_seq)):
        out[k] = s
        s = Phi @ s + Gamma @ np.concatenate(([u], np.asarray(w, dtype=float)))
    return out
