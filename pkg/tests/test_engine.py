"""
Closed-loop simulation of one event-triggered channel.

 Stepping
   - zero-order-hold gains and the closed-form error
   - step keeps z at zero without disturbance, matches e^(At) and a fine quadrature
   - trigger test and reception jump
 Real plant
   - first trigger lands exactly where |z| reaches J
   - post-jump contraction, minimum spacing, sup |z| and the ISpS envelope hold on 1000 seeds
   - the trajectory ends with a sample at T
   - grid-aligned triggering stays within its widened guarantees
   - same seed, same output
 Complex plant
   - every packet carries the designed phase and timing bits
 Guards
   - invalid runs rejected before any step
   - trigger-count guard aborts a run whose grid cannot keep up
"""
from __future__ import annotations

import cmath
import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from event_rate.adversary.uncertainty import minimal_quantizer
from event_rate.bounds.rates import min_inter_event_time
from event_rate.codec.packet import DecodedEvent, encode_real
from event_rate.engine.simulator import (
    check_invariants,
    design_bits,
    detect_trigger,
    error_after,
    on_reception,
    run,
    step,
    zoh_gains,
)
from event_rate.engine.state import InFlight, SimState
from event_rate.errors import ZenoGuardError
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import PlantConfig, TriggerConfig, envelope_for
from event_rate.monitoring.metrics import REGISTRY
from event_rate.utils.config_validator import ConfigValidationError

TOL = 1e-12
A_REAL = 5.5651
M_REAL = 0.4


def _real_run(real_plant, real_trigger, random_channel, uniform_disturbance, **kwargs):
    trig = real_trigger(0.2)
    params = dict(dt=0.005, T=2.0, seed=1337, x0=1.0)
    params.update(kwargs)
    traj, log = run(real_plant, trig, random_channel(0.2), uniform_disturbance(M_REAL), **params)
    return trig, traj, log


# ── stepping ──────────────────────────────────────────────────────────────────


def test_zoh_gains_real():
    phi, g = zoh_gains(2.0, 0.1)
    assert abs(phi - math.exp(0.2)) < TOL
    assert abs(g - math.expm1(0.2) / 2.0) < TOL
    assert zoh_gains(0.0, 0.1) == (1.0, 0.1)


def test_zoh_gains_complex():
    a = complex(0.3, 2.0)
    phi, g = zoh_gains(a, 0.05)
    assert abs(phi - cmath.exp(a * 0.05)) < TOL
    assert abs(g - (cmath.exp(a * 0.05) - 1.0) / a) < TOL


def test_error_after_solves_the_error_equation():
    # dz/dt = a z + w with w held
    z = error_after(0.3, 2.0, 0.5, 0.25)
    expected = 0.3 * math.exp(0.5) + 0.25 * math.expm1(0.5)
    assert abs(z - expected) < TOL


def test_step_without_disturbance_keeps_error_at_zero(real_plant):
    state = SimState(t=0.0, x=1.0, xhat_ctrl=1.0, xhat_sensor=1.0, u=-real_plant.K * 1.0)
    for _ in range(1000):
        state = step(state, real_plant, 0.005, 0.0)
        assert state.z == 0.0
    assert abs(state.t - 5.0) < 1e-9
    assert state.u == -real_plant.K * state.xhat_ctrl


def test_step_open_loop_matches_exponential():
    plant = PlantConfig(A=0.5, B=1.0, K=1.0, M=0.0)
    state = SimState(t=0.0, x=0.7, xhat_ctrl=0.0, xhat_sensor=0.0, u=0.0)
    for k in range(1, 1001):
        state = step(state, plant, 0.001, 0.0)
        expected = 0.7 * math.exp(0.5 * k * 0.001)
        assert abs(state.x - expected) <= 1e-12 * expected
    assert state.u == 0.0


def test_step_matches_fine_quadrature(real_plant):
    dt = 0.01
    h = dt / 100
    rng = np.random.default_rng(7)
    state = SimState(t=0.0, x=0.3, xhat_ctrl=0.25, xhat_sensor=0.25, u=-real_plant.K * 0.25)
    for _ in range(50):
        w = float(rng.uniform(-M_REAL, M_REAL))
        drive = real_plant.B * state.u + w
        forced = sum(math.exp(A_REAL * (dt - (i + 0.5) * h)) * h for i in range(100)) * drive
        expected = math.exp(A_REAL * dt) * state.x + forced
        state = step(state, real_plant, dt, w)
        assert abs(state.x - expected) <= 1e-8 * max(1.0, abs(expected))


def test_detect_trigger_threshold_and_in_flight(real_trigger):
    trig = real_trigger(0.2)
    at_threshold = SimState(t=0.0, x=trig.J, xhat_ctrl=0.0, xhat_sensor=0.0, u=0.0)
    assert detect_trigger(at_threshold, trig)
    assert detect_trigger(replace(at_threshold, x=-trig.J), trig)
    assert not detect_trigger(replace(at_threshold, x=0.999 * trig.J), trig)
    packet = encode_real(0.0, 1, 11, 0.2, 1.0001)
    busy = replace(at_threshold, in_flight=InFlight(packet=packet, t_s=0.0, t_c=0.1, z_ts=trig.J))
    assert not detect_trigger(busy, trig)


def test_on_reception_with_exact_estimate_zeroes_error():
    packet = encode_real(0.0, 1, 11, 0.2, 1.0001)
    state = SimState(
        t=0.1, x=1.3, xhat_ctrl=1.0, xhat_sensor=1.0, u=-10.0,
        in_flight=InFlight(packet=packet, t_s=0.0, t_c=0.1, z_ts=0.2),
    )
    after = on_reception(state, DecodedEvent(q_ts=0.0, sign_or_phase=1.0, zbar=state.z))
    assert abs(after.z) <= 1e-15
    assert after.xhat_ctrl == after.xhat_sensor
    assert after.in_flight is None
    assert after.u == state.u


def test_run_without_disturbance_never_triggers(real_plant, real_trigger):
    trig = real_trigger(0.2)
    traj, log = run(
        real_plant, trig, ChannelModel(kind="constant", gamma=0.2), DisturbanceModel(kind="zero", M=0.0),
        dt=0.005, T=5.0, x0=1.0,
    )
    assert log.n_events == 0
    assert all(z == 0.0 for z in traj.z)
    assert len(traj) == 1001


# ── real plant ────────────────────────────────────────────────────────────────


def test_first_trigger_at_exact_crossing(real_plant, real_trigger):
    trig = real_trigger(0.2)
    channel = ChannelModel(kind="adversarial-max", gamma=0.2)
    disturbance = DisturbanceModel(kind="constant-max", M=M_REAL)
    _, log = run(real_plant, trig, channel, disturbance, dt=0.005, T=1.0, x0=1.0)
    # from z = 0 under w = M, |z| = J at ln(1 + J A / M) / A
    expected = math.log1p(trig.J * A_REAL / M_REAL) / A_REAL
    assert abs(log.ts_list[0] - expected) < 1e-9
    assert abs(abs(log.z_at_trigger[0]) - trig.J) < 1e-9
    assert all(abs(tc - ts - 0.2) < 1e-12 for ts, tc in zip(log.ts_list, log.tc_list))


def test_real_run_meets_guarantees(real_plant, real_trigger, random_channel, uniform_disturbance):
    trig, traj, log = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance)
    assert len(traj) == 401
    assert log.n_events >= 1
    assert set(log.packet_bits) == {11}
    assert all(0.0 <= d <= 0.2 for d in log.delays)
    assert all(p <= trig.rho0 * trig.J * (1.0 + 1e-9) for p in log.z_post_jump)
    report = check_invariants(traj, log, real_plant, trig, 0.005)
    assert report.all_ok, report.to_dict()


def test_thousand_seeded_runs_hold_every_guarantee(real_plant, real_trigger, random_channel, uniform_disturbance):
    failures = []
    for seed in range(1000):
        trig, traj, log = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance, seed=seed)
        report = check_invariants(traj, log, real_plant, trig, 0.005)
        if not report.all_ok:
            failures.append((seed, report.to_dict()))
    assert failures == []


def test_sup_error_includes_pre_jump_peak(real_plant, real_trigger, random_channel, uniform_disturbance):
    trig, traj, log = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance)
    report = check_invariants(traj, log, real_plant, trig, 0.005)
    assert report.sup_z >= max([0.0] + [abs(z) for z in log.z_at_reception])
    assert report.sup_z >= trig.J * (1.0 - 1e-9)


def test_isps_ratio_is_unpadded(real_plant, real_trigger, random_channel, uniform_disturbance):
    trig, traj, log = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance)
    report = check_invariants(traj, log, real_plant, trig, 0.005)
    env = envelope_for(real_plant, trig)
    expected = max(abs(x) / env.bound(1.0, M_REAL, t) for t, x in zip(traj.times, traj.x))
    assert abs(report.isps_worst_ratio - expected) < TOL
    assert report.isps_ok
    assert not replace(report, isps_worst_ratio=1.005).isps_ok


def test_final_sample_at_horizon(real_plant, real_trigger, random_channel, uniform_disturbance):
    _, traj, _ = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance, T=1.0)
    assert len(traj) == 201
    assert abs(traj.times[-1] - 1.0) < TOL
    assert math.isnan(traj.w[-1])
    assert not math.isnan(traj.x[-1])


def test_constant_max_run_spacing(real_plant, real_trigger):
    trig = real_trigger(0.2)
    channel = ChannelModel(kind="adversarial-max", gamma=0.2)
    disturbance = DisturbanceModel(kind="constant-max", M=M_REAL)
    traj, log = run(real_plant, trig, channel, disturbance, dt=0.005, T=3.0, x0=1.0)
    assert log.n_events >= 3
    assert log.min_interval() >= min_inter_event_time(A_REAL, M_REAL, trig.J, trig.rho0) * (1.0 - 1e-9)
    report = check_invariants(traj, log, real_plant, trig, 0.005)
    assert report.jump_ok and report.interval_ok and report.sup_z_ok


def test_grid_localization_within_widened_guarantees(real_plant, real_trigger, random_channel, uniform_disturbance):
    trig, traj, log = _real_run(
        real_plant, real_trigger, random_channel, uniform_disturbance, localization="grid"
    )
    report = check_invariants(traj, log, real_plant, trig, 0.005, localization="grid")
    assert report.jump_ok and report.interval_ok and report.sup_z_ok
    assert report.post_jump_bound > trig.rho0 * trig.J


def test_same_seed_same_output(real_plant, real_trigger, random_channel, uniform_disturbance):
    _, traj_a, log_a = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance)
    _, traj_b, log_b = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance)
    pd.testing.assert_frame_equal(traj_a.to_frame(), traj_b.to_frame())
    pd.testing.assert_frame_equal(log_a.to_frame(), log_b.to_frame())


def test_zero_horizon_is_empty(real_plant, real_trigger, random_channel, uniform_disturbance):
    _, traj, log = _real_run(real_plant, real_trigger, random_channel, uniform_disturbance, T=0.0)
    assert len(traj) == 0
    assert log.n_events == 0
    assert log.to_frame().empty
    assert log.realized_rate() == 0.0


def test_minimal_codec_keeps_error_below_threshold():
    plant = PlantConfig(A=A_REAL, B=1.0, K=10.0, M=0.0)
    trig = TriggerConfig(J=0.1, rho0=0.5, gamma=0.3)
    q = minimal_quantizer(A_REAL, 0.3, 0.0, 0.1)
    traj, log = run(
        plant, trig, ChannelModel(kind="uniform-on-grid", gamma=0.3), DisturbanceModel(kind="zero", M=0.0),
        codec="minimal", dt=0.005, T=3.0, seed=4, x0=0.05, xhat0=0.0,
    )
    assert log.n_events >= 1
    assert set(log.packet_bits) == {q.bits}
    assert max(log.z_post_jump) <= 0.5 * q.width + 1e-9
    report = check_invariants(traj, log, plant, trig, 0.005, codec="minimal")
    assert report.jump_ok and report.sup_z_ok


def test_design_bits_per_codec(real_plant, real_trigger, spiral_setup):
    assert design_bits(real_plant, real_trigger(0.2)) == 11
    plant, trig = spiral_setup
    assert design_bits(plant, trig) == 5
    no_noise = PlantConfig(A=A_REAL, B=1.0, K=10.0, M=0.0)
    assert design_bits(no_noise, TriggerConfig(J=0.1, rho0=0.5, gamma=0.3), codec="minimal") == 3


# ── complex plant ─────────────────────────────────────────────────────────────


def test_spiral_run(spiral_setup, random_channel, uniform_disturbance):
    plant, trig = spiral_setup
    traj, log = run(
        plant, trig, random_channel(trig.gamma), uniform_disturbance(plant.M, complex_valued=True),
        dt=0.001, T=2.0, seed=2, x0=complex(0.5, 0.0),
    )
    assert all(isinstance(z, complex) for z in traj.z)
    assert all(p.startswith("5:4:") for p in log.packets)
    report = check_invariants(traj, log, plant, trig, 0.001)
    assert report.all_ok, report.to_dict()
    assert {"z_re", "z_im", "x_re", "x_im"} <= set(traj.to_frame().columns)


# ── guards ────────────────────────────────────────────────────────────────────


def test_run_rejects_bad_setup(real_plant, real_trigger, spiral_setup, uniform_disturbance):
    trig = real_trigger(0.2)
    channel = ChannelModel(kind="constant", gamma=0.2)
    with pytest.raises(ConfigValidationError, match="initial error"):
        run(real_plant, trig, channel, uniform_disturbance(M_REAL), x0=10.0, xhat0=0.0)
    with pytest.raises(ConfigValidationError, match="exceeds the design delay bound"):
        run(real_plant, trig, ChannelModel(kind="constant", gamma=0.3), uniform_disturbance(M_REAL))
    with pytest.raises(ConfigValidationError, match="exceeds the plant"):
        run(real_plant, trig, channel, uniform_disturbance(1.0))
    with pytest.raises(ConfigValidationError, match="dt must be > 0"):
        run(real_plant, trig, channel, uniform_disturbance(M_REAL), dt=0.0)
    plant, strig = spiral_setup
    with pytest.raises(ConfigValidationError):
        run(plant, strig, ChannelModel(kind="constant", gamma=strig.gamma),
            uniform_disturbance(plant.M, complex_valued=True), codec="minimal")


def test_run_rejects_threshold_below_minimum(real_plant, random_channel, uniform_disturbance):
    trig = TriggerConfig(J=0.5, rho0=0.1, gamma=0.2)
    with pytest.raises(ConfigValidationError, match="must exceed"):
        run(real_plant, trig, random_channel(0.2), uniform_disturbance(M_REAL))


def test_trigger_guard_aborts_coarse_grid(real_plant, real_trigger):
    trig = real_trigger(0.2)
    channel = ChannelModel(kind="adversarial-max", gamma=0.2)
    disturbance = DisturbanceModel(kind="constant-max", M=M_REAL)
    before = REGISTRY.get_sample_value("event_rate_zeno_aborts_total", {"mode": "sufficient-real"}) or 0.0
    with pytest.raises(ZenoGuardError) as exc:
        run(real_plant, trig, channel, disturbance, dt=1.5, T=3.0, x0=1.0)
    assert exc.value.n_events == 3
    after = REGISTRY.get_sample_value("event_rate_zeno_aborts_total", {"mode": "sufficient-real"})
    assert after == before + 1.0
