"""
Plant, trigger, channel and disturbance models.

 Plant / trigger
   - every violated precondition is reported, not just the first
   - per-mode threshold checks
   - ISpS envelope coefficients, non-decreasing in gamma, sup|w| and |x0|
 Channel
   - delays stay in [0, gamma] and on the sampling grid
 Disturbance
   - samples stay within M
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from event_rate.bounds.rates import min_threshold
from event_rate.errors import BoundDomainError
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import (
    PlantConfig,
    TriggerConfig,
    envelope_for,
    isps_envelope,
    require_valid,
    validate_config,
)
from event_rate.utils.config_validator import ConfigValidationError

TOL = 1e-12
A_REAL = 5.5651
M_REAL = 0.4


# ── plant / trigger ───────────────────────────────────────────────────────────


def test_valid_real_plant(real_plant, real_trigger):
    assert validate_config(real_plant, real_trigger(0.2), "sufficient-real") == []


def test_all_basic_violations_reported():
    plant = PlantConfig(A=-1.0, B=0.0, K=1.0, M=-0.1)
    trig = TriggerConfig(J=0.0, rho0=1.0, gamma=-0.1, b=1.0)
    errors = validate_config(plant, trig, "sufficient-real")
    joined = "\n".join(errors)
    for fragment in ("J must be > 0", "rho0", "gamma", "b must be > 1", "M must be >= 0", "B must be non-zero", "unstable"):
        assert fragment in joined


def test_non_hurwitz_closed_loop_rejected():
    plant = PlantConfig(A=A_REAL, B=1.0, K=1.0, M=M_REAL)
    errors = validate_config(plant, TriggerConfig(J=2.0, rho0=0.1, gamma=0.2), "sufficient-real")
    assert any("Hurwitz" in e for e in errors)


def test_sufficient_mode_needs_threshold_above_minimum(real_plant):
    j_min = min_threshold(A_REAL, 0.2, M_REAL, 0.1)
    errors = validate_config(real_plant, TriggerConfig(J=0.5 * j_min, rho0=0.1, gamma=0.2), "sufficient-real")
    assert len(errors) == 1 and "must exceed" in errors[0]


def test_necessary_mode_needs_small_disturbance(real_plant):
    errors = validate_config(real_plant, TriggerConfig(J=0.01, rho0=0.5, gamma=0.2), "necessary-real")
    assert len(errors) == 1 and "A*J" in errors[0]


def test_real_modes_reject_complex_plant(spiral_setup):
    plant, trig = spiral_setup
    assert validate_config(plant, trig, "sufficient-real") == ["sufficient-real mode needs a real plant"]
    assert validate_config(plant, trig, "sufficient-complex") == []


def test_complex_mode_reports_constraint_failure(spiral_setup):
    plant, trig = spiral_setup
    errors = validate_config(plant, TriggerConfig(J=trig.J, rho0=0.1, gamma=trig.gamma, lam=1), "sufficient-complex")
    assert errors


def test_unknown_mode():
    plant = PlantConfig(A=1.0, B=1.0, K=2.0, M=0.0)
    assert "unknown mode" in validate_config(plant, TriggerConfig(J=1.0, rho0=0.5, gamma=0.1), "bogus")[0]


def test_require_valid_raises_with_source(real_plant):
    with pytest.raises(ConfigValidationError, match=r"Config validation failed \(unit\)"):
        require_valid(real_plant, TriggerConfig(J=0.01, rho0=0.1, gamma=0.2), "sufficient-real", source="unit")


def test_plant_properties(spiral_setup):
    plant, _ = spiral_setup
    assert plant.is_complex
    assert plant.re_a == 0.3
    assert plant.closed_loop == complex(0.3, 2.0) - 0.2 * 8.0


def test_isps_envelope_coefficients(real_plant, real_trigger):
    trig = real_trigger(0.2)
    env = envelope_for(real_plant, trig)
    d = A_REAL - 10.0
    assert abs(env.decay - d) < TOL
    assert abs(env.psi - 1.0 / abs(d)) < TOL
    assert abs(env.iota - 10.0 * trig.J * math.exp(A_REAL * 0.2) / abs(d)) < 1e-9
    assert abs(env.vartheta - 10.0 * math.expm1(A_REAL * 0.2) / (A_REAL * abs(d))) < 1e-9
    assert abs(env.d - 10.0 * trig.J / abs(d)) < 1e-9


def test_isps_envelope_decays_to_its_offset(real_plant, real_trigger):
    trig = real_trigger(0.2)
    env = envelope_for(real_plant, trig)
    far = isps_envelope(real_plant, trig, 1.0, M_REAL, 50.0)
    assert abs(far - ((env.psi + env.vartheta) * M_REAL + env.iota)) < 1e-9
    assert isps_envelope(real_plant, trig, 1.0, M_REAL, 0.0) > far


@pytest.mark.parametrize(
    "vary, values",
    [
        ("gamma", np.linspace(0.0, 0.3, 13)),
        ("w_sup", np.linspace(0.0, 0.4, 9)),
        ("x0", np.linspace(0.0, 2.0, 9)),
    ],
)
def test_isps_envelope_monotone(real_plant, vary, values):
    for t in (0.0, 0.1, 1.0, 10.0):
        bounds = []
        for v in values:
            v = float(v)
            trig = TriggerConfig(J=0.5, rho0=0.1, gamma=v if vary == "gamma" else 0.2)
            w_sup = v if vary == "w_sup" else M_REAL
            x0 = v if vary == "x0" else 1.0
            via_fn = isps_envelope(real_plant, trig, x0, w_sup, t)
            assert via_fn == envelope_for(real_plant, trig).bound(x0, w_sup, t)
            bounds.append(via_fn)
        assert all(b >= a for a, b in zip(bounds, bounds[1:])), (vary, t, bounds)


def test_envelope_needs_hurwitz_loop():
    with pytest.raises(BoundDomainError):
        envelope_for(PlantConfig(A=A_REAL, B=1.0, K=1.0, M=M_REAL), TriggerConfig(J=2.0, rho0=0.1, gamma=0.2))


# ── channel ───────────────────────────────────────────────────────────────────


def test_uniform_delays_on_grid_and_bounded(random_channel):
    ch = random_channel(0.2)
    rng = np.random.default_rng(3)
    dt = 0.005
    delays = [ch.sample(k, rng, dt) for k in range(500)]
    assert all(dt <= d <= 0.2 for d in delays)
    assert all(abs(d / dt - round(d / dt)) < 1e-9 for d in delays)
    assert len(set(delays)) > 10


def test_delay_bound_below_one_step_uses_gamma(random_channel):
    ch = random_channel(0.002)
    assert ch.sample(0, np.random.default_rng(0), 0.005) == 0.002


def test_constant_and_adversarial_delays():
    rng = np.random.default_rng(0)
    assert ChannelModel(kind="constant", gamma=0.2).sample(0, rng, 0.005) == 0.2
    assert ChannelModel(kind="constant", gamma=0.2, delay=0.05).sample(3, rng, 0.005) == 0.05
    assert ChannelModel(kind="adversarial-max", gamma=0.2).sample(9, rng, 0.005) == 0.2


def test_scripted_delays_repeat_last_entry():
    ch = ChannelModel(kind="scripted", gamma=0.2, delays=(0.1, 0.15))
    rng = np.random.default_rng(0)
    assert [ch.sample(k, rng, 0.005) for k in range(4)] == [0.1, 0.15, 0.15, 0.15]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "lossy", "gamma": 0.1},
        {"kind": "constant", "gamma": -0.1},
        {"kind": "constant", "gamma": 0.1, "delay": 0.2},
        {"kind": "scripted", "gamma": 0.1},
        {"kind": "scripted", "gamma": 0.1, "delays": (0.05, 0.3)},
    ],
)
def test_invalid_channels_rejected(kwargs):
    with pytest.raises(ConfigValidationError):
        ChannelModel(**kwargs)


# ── disturbance ───────────────────────────────────────────────────────────────


def test_uniform_disturbance_bounded(uniform_disturbance):
    rng = np.random.default_rng(5)
    real = uniform_disturbance(0.4)
    disc = uniform_disturbance(0.2, complex_valued=True)
    assert all(abs(real.sample(k, 0.0, rng)) <= 0.4 for k in range(500))
    samples = [disc.sample(k, 0.0, rng) for k in range(500)]
    assert all(isinstance(w, complex) and abs(w) <= 0.2 + TOL for w in samples)


def test_deterministic_disturbances():
    rng = np.random.default_rng(0)
    assert DisturbanceModel(kind="zero", M=0.4).sample(0, 0.0, rng) == 0.0
    assert DisturbanceModel(kind="zero", M=0.4, complex_valued=True).sample(0, 0.0, rng) == 0j
    assert DisturbanceModel(kind="constant-max", M=0.4, sign=-1.0).sample(0, 0.0, rng) == -0.4
    w = DisturbanceModel(kind="constant-max", M=0.2, complex_valued=True, phase=math.pi / 2).sample(0, 0.0, rng)
    assert abs(w - 0.2j) < TOL
    sine = DisturbanceModel(kind="sinusoid", M=0.4, amplitude=0.5, omega=2.0)
    assert abs(sine.sample(0, 0.3, rng) - 0.2 * math.sin(0.6)) < TOL


def test_scripted_disturbance():
    d = DisturbanceModel(kind="scripted", M=0.4, values=(0.1, -0.4))
    rng = np.random.default_rng(0)
    assert [d.sample(k, 0.0, rng) for k in range(3)] == [0.1, -0.4, -0.4]
    with pytest.raises(ConfigValidationError, match="exceeds"):
        DisturbanceModel(kind="scripted", M=0.4, values=(0.5,))


def test_invalid_disturbances_rejected():
    with pytest.raises(ConfigValidationError):
        DisturbanceModel(kind="gusty", M=0.4)
    with pytest.raises(ConfigValidationError):
        DisturbanceModel(kind="uniform", M=-0.4)
    with pytest.raises(ConfigValidationError):
        DisturbanceModel(kind="sinusoid", M=0.4, amplitude=1.5)
