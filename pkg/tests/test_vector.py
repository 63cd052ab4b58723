"""
Multi-state plants split into scalar modes.

 Discretization
   - zero-order hold of a scalar pole and of a double integrator
 Decomposition
   - cart-pole eigenvalues, ordering and modal disturbance bound
   - complex pairs kept as one mode
   - repeated eigenvalues and malformed matrices rejected
 Runs
   - modal simulation agrees with the physical plant under the same inputs
   - per-mode guarantees hold, and 100 seeded cart-pole runs keep every state below 10
   - delay floor of two sampling times
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from event_rate.utils.config_validator import ConfigValidationError
from event_rate.vector.modal import VectorPlant, decompose, simulate_physical, zoh_discretize
from event_rate.vector.pendulum import (
    PENDULUM_S0,
    PENDULUM_SHAT0,
    check_delay_floor,
    pendulum_bits_comparison,
    pendulum_plant,
    run_pendulum,
)
from event_rate.vector.runner import run_vector

TOL = 1e-10


def _spiral_pair() -> VectorPlant:
    return VectorPlant.from_lists([[0.3, 2.0], [-2.0, 0.3]], [0.0, 1.0], [0.0, 2.0], 0.05)


# ── discretization ────────────────────────────────────────────────────────────


def test_zoh_scalar_pole():
    Phi, Gamma = zoh_discretize(np.array([[2.0]]), np.array([[0.5]]), 0.1)
    assert abs(Phi[0, 0] - math.exp(0.2)) < TOL
    assert abs(Gamma[0, 0] - 0.5 * math.expm1(0.2) / 2.0) < TOL


def test_zoh_double_integrator():
    dt = 0.05
    Phi, Gamma = zoh_discretize(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]), dt)
    np.testing.assert_allclose(Phi, [[1.0, dt], [0.0, 1.0]], atol=TOL)
    np.testing.assert_allclose(Gamma, [[0.5 * dt * dt], [dt]], atol=TOL)


# ── decomposition ─────────────────────────────────────────────────────────────


def test_pendulum_modes():
    dec = decompose(pendulum_plant(0.05))
    eig = [complex(m.eigenvalue).real for m in dec.modes]
    np.testing.assert_allclose(eig, [5.5651, 0.0, -0.1428, -5.6041], atol=1e-3)
    assert eig == sorted(eig, reverse=True)
    assert [m.stable for m in dec.modes] == [False, True, True, True]
    assert len(dec.unstable_modes) == 1
    assert dec.modes[1].eigenvalue == 0.0
    assert dec.reconstruction_residual(pendulum_plant(0.05).A_mat) < 1e-9


def test_modal_disturbance_bound_scales_with_M():
    small = decompose(pendulum_plant(0.05)).unstable_modes[0].m_tilde
    large = decompose(pendulum_plant(0.2)).unstable_modes[0].m_tilde
    assert small > 0.0
    assert abs(large - 4.0 * small) < 1e-9 * large


def test_modal_coordinates_round_trip():
    dec = decompose(pendulum_plant(0.05))
    s = np.array([0.1, -0.2, 0.05, 0.3])
    np.testing.assert_allclose(dec.to_physical(dec.to_modes(s)), s, atol=1e-12)


def test_complex_pair_is_one_mode():
    dec = decompose(_spiral_pair())
    assert len(dec.modes) == 1
    mode = dec.modes[0]
    assert mode.paired and mode.is_complex and not mode.stable
    assert abs(mode.eigenvalue - complex(0.3, 2.0)) < 1e-12
    s = np.array([0.4, -0.7])
    np.testing.assert_allclose(dec.to_physical(dec.to_modes(s)), s, atol=1e-12)


def test_repeated_eigenvalues_rejected():
    jordan = VectorPlant.from_lists([[1.0, 1.0], [0.0, 1.0]], [0.0, 1.0], [6.0, 4.0], 0.1)
    with pytest.raises(ConfigValidationError, match="repeated"):
        decompose(jordan)


def test_malformed_plants_rejected():
    with pytest.raises(ConfigValidationError, match="square"):
        decompose(VectorPlant.from_lists([[1.0, 2.0, 3.0]], [1.0], [1.0], 0.1))
    with pytest.raises(ConfigValidationError, match="entries"):
        decompose(VectorPlant.from_lists([[1.0, 0.0], [0.0, -1.0]], [1.0], [2.0, 0.0], 0.1))
    with pytest.raises(ConfigValidationError, match="Hurwitz"):
        decompose(VectorPlant.from_lists([[1.0, 0.0], [0.0, -1.0]], [0.0, 1.0], [0.0, 1.0], 0.1))


# ── runs ──────────────────────────────────────────────────────────────────────


def test_modal_run_matches_physical_plant():
    plant = pendulum_plant(0.05)
    result = run_vector(plant, 0.1, dt=0.005, T=1.0, seed=3, s0=PENDULUM_S0, shat0=PENDULUM_SHAT0)
    traj = result.trajectory
    physical = simulate_physical(plant, PENDULUM_S0, traj.u, traj.w, 0.005)
    np.testing.assert_allclose(traj.states(), physical, atol=1e-7)
    assert {"t", "x1", "x4", "xhat1", "z1", "u", "w4"} <= set(traj.to_frame().columns)


def test_pendulum_run_meets_per_mode_guarantees():
    result = run_vector(
        pendulum_plant(0.05), 0.1, dt=0.005, T=5.0, seed=0, s0=PENDULUM_S0, shat0=PENDULUM_SHAT0
    )
    assert list(result.designs) == [0]
    invariants = result.invariants()
    assert set(invariants) == {"mode1", "mode2", "mode3", "mode4"}
    assert invariants["mode1"]["g_bits"] == result.designs[0].bits
    assert result.all_ok(), invariants


def test_hundred_seeded_pendulum_runs_stay_bounded():
    plant = pendulum_plant(0.05)
    dec = decompose(plant)
    failures = []
    for seed in range(100):
        result = run_vector(
            plant, 0.1, dt=0.005, T=5.0, seed=seed, s0=PENDULUM_S0, shat0=PENDULUM_SHAT0, decomposition=dec
        )
        sup_s = result.trajectory.sup_abs_s()
        if not (sup_s < 10.0 and result.all_ok()):
            failures.append((seed, sup_s, result.invariants()))
    assert failures == []


def test_vector_run_rejects_large_initial_error():
    with pytest.raises(ConfigValidationError, match="initial error"):
        run_vector(pendulum_plant(0.05), 0.1, T=0.1, s0=[0.0, 0.0, 0.0, 5.0], shat0=[0.0, 0.0, 0.0, 0.0])


def test_run_pendulum_report():
    traj, log, report = run_pendulum(gamma=0.1, M=0.05, T=1.0, seed=1)
    assert len(traj) == 200
    assert report.gamma == 0.1
    assert abs(report.datarate - 5.5651 / math.log(2.0)) < 1e-2
    assert set(log.packet_bits) <= {report.practical_bits}


def test_bits_comparison_keys():
    out = pendulum_bits_comparison(0.1, 0.05)
    assert set(out) == {"eigenvalue", "M", "M_tilde", "bits_nominal_M", "bits_modal_M"}
    assert out["bits_nominal_M"] >= 1 and out["bits_modal_M"] >= 1
    assert out["M_tilde"] > 0.0


def test_delay_floor():
    check_delay_floor(0.01, 0.005)
    with pytest.raises(ConfigValidationError, match="two sampling times"):
        check_delay_floor(0.005, 0.005)
    with pytest.raises(ConfigValidationError):
        run_pendulum(gamma=0.005, dt=0.005)
