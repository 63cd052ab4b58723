"""
event-rate command line.

  event-rate simulate  --config config.yaml [--sweep gamma:0.01:0.3:30]
  event-rate bounds    --config config.yaml
  event-rate adversary --config config_adversary.yaml
  event-rate pendulum  [--gamma 0.1] [--M 0.05]
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from event_rate.adversary.realization import replay, worst_case_realization
from event_rate.bounds.complex_rates import (
    complex_packet_design,
    rule_of_thumb_lambda,
    smallest_lambda,
    sufficient_rate_complex,
    threshold_rule_complex,
)
from event_rate.bounds.rates import (
    RateReport,
    datarate_baseline,
    min_inter_event_time,
    rate_report,
    threshold_rule_real,
)
from event_rate.cli.constants import (
    ADVERSARY_DELAYS_CSV,
    ADVERSARY_DISTURBANCE_CSV,
    ADVERSARY_REPORT_JSON,
    BOUNDS_CSV,
    EVENTS_CSV,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_ZENO,
    MODE_CUSTOM_VECTOR,
    MODE_PENDULUM,
    MODE_SCALAR_COMPLEX,
    SUMMARY_JSON,
    SWEEP_CSV,
    SWEEP_COLUMNS,
    TRAJECTORY_CSV,
)
from event_rate.cli.schemas import AdversaryBlock, ExperimentConfig, SweepBlock, to_scalar
from event_rate.engine.simulator import check_invariants, design_bits, run
from event_rate.errors import BoundDomainError, UndecodableError, ZenoGuardError
from event_rate.model.channel import ChannelModel, DisturbanceModel
from event_rate.model.plant import PlantConfig, TriggerConfig
from event_rate.monitoring.metrics import write_metrics
from event_rate.presets import resolve_preset
from event_rate.utils.config_validator import ConfigValidationError, validate_config
from event_rate.utils.io import load_yaml, save_csv, save_json
from event_rate.vector.modal import VectorPlant, decompose
from event_rate.vector.pendulum import (
    PENDULUM_S0,
    PENDULUM_SHAT0,
    check_delay_floor,
    pendulum_bits_comparison,
    pendulum_plant,
)
from event_rate.vector.runner import VectorRunResult, run_vector

logger = logging.getLogger(__name__)


def parse_sweep(text: str) -> SweepBlock:
    try:
        param, lo, hi, points = text.split(":")
        return SweepBlock(param=param, lo=float(lo), hi=float(hi), points=int(points))
    except (ValueError, ValidationError) as e:
        raise ConfigValidationError(f"--sweep expects gamma:lo:hi:n, got '{text}' ({e})") from e


def load_experiment(
    path: Optional[str],
    seed: Optional[int] = None,
    sweep: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    raw: Dict[str, Any] = load_yaml(path) if path else {}
    raw = raw or {}
    for key, value in (overrides or {}).items():
        raw[key] = value if not isinstance(value, dict) else {**raw.get(key, {}), **value}
    validate_config(raw, path or "<defaults>")
    raw = resolve_preset(raw)
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigValidationError(f"Config validation failed ({path}):\n{e}") from e
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    if sweep is not None:
        cfg = cfg.model_copy(update={"sweep": parse_sweep(sweep)})
    return cfg


# ---------------------------------------------------------------------------
# config -> domain objects
# ---------------------------------------------------------------------------


def plant_config(cfg: ExperimentConfig) -> PlantConfig:
    p = cfg.plant
    return PlantConfig(A=to_scalar(p.A), B=to_scalar(p.B), K=to_scalar(p.K), M=p.M)


def trigger_for(cfg: ExperimentConfig, plant: PlantConfig, gamma: float) -> TriggerConfig:
    t = cfg.trigger
    if plant.is_complex:
        A = complex(plant.A)
        J = t.J if t.J is not None else threshold_rule_complex(A, gamma, plant.M, t.chi, t.J_offset)
        if t.lam is not None:
            lam = t.lam
        elif t.lam_rule == "rule-of-thumb":
            lam = rule_of_thumb_lambda(A, gamma)
        else:
            try:
                lam = smallest_lambda(A, gamma, plant.M, J, t.rho0, t.b, t.chi, t.chi_prime)
            except BoundDomainError as e:
                raise ConfigValidationError(str(e)) from e
        return TriggerConfig(J=J, rho0=t.rho0, gamma=gamma, b=t.b, lam=lam, chi=t.chi, chi_prime=t.chi_prime)
    J = t.J if t.J is not None else threshold_rule_real(plant.A, gamma, plant.M, t.rho0, t.J_offset)
    return TriggerConfig(J=J, rho0=t.rho0, gamma=gamma, b=t.b)


def channel_for(cfg: ExperimentConfig, gamma: float) -> ChannelModel:
    c = cfg.channel
    return ChannelModel(
        kind=c.kind,
        gamma=gamma,
        delay=math.nan if c.delay is None else c.delay,
        delays=tuple(c.delays or ()),
    )


def disturbance_for(cfg: ExperimentConfig, M: float, complex_valued: bool) -> DisturbanceModel:
    d = cfg.disturbance
    return DisturbanceModel(
        kind=d.kind,
        M=M,
        complex_valued=complex_valued,
        sign=d.sign,
        phase=d.phase,
        omega=d.omega,
        amplitude=d.amplitude,
        values=tuple(to_scalar(v) for v in (d.values or ())),
    )


def vector_plant(cfg: ExperimentConfig) -> VectorPlant:
    v = cfg.vector
    if cfg.mode == MODE_PENDULUM:
        return pendulum_plant(v.M if v is not None else 0.05)
    return VectorPlant.from_lists(v.A, v.B, v.K, v.M)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _scalar_point(cfg: ExperimentConfig, gamma: float, seed: int):
    plant = plant_config(cfg)
    trig = trigger_for(cfg, plant, gamma)
    initial = cfg.initial
    x0 = to_scalar(initial.x0)
    xhat0 = None if initial.xhat0 is None else to_scalar(initial.xhat0)
    traj, log = run(
        plant, trig, channel_for(cfg, gamma), disturbance_for(cfg, plant.M, plant.is_complex),
        codec=cfg.codec, dt=cfg.dt, T=cfg.T, seed=seed, x0=x0, xhat0=xhat0, localization=cfg.localization,
    )
    inv = check_invariants(traj, log, plant, trig, cfg.dt, cfg.codec, cfg.localization)
    summary = {
        "mode": cfg.mode,
        "gamma": gamma,
        "seed": seed,
        "J": trig.J,
        "lam": trig.lam if plant.is_complex else None,
        "g_bits": design_bits(plant, trig, cfg.codec),
        "n_events": log.n_events,
        "trig_rate": log.triggering_rate(),
        "realized_rate": log.realized_rate(),
        "max_abs_z": traj.sup_abs("z"),
        "max_abs_x": traj.sup_abs("x"),
        "datarate_baseline": datarate_baseline(plant.A),
        "invariants": inv.to_dict(),
        "invariants_ok": inv.all_ok,
    }
    return traj.to_frame(), {"": log}, summary


def _vector_result(cfg: ExperimentConfig, gamma: float, seed: int) -> VectorRunResult:
    plant = vector_plant(cfg)
    t, v = cfg.trigger, cfg.vector
    if cfg.mode == MODE_PENDULUM:
        check_delay_floor(gamma, cfg.dt)
        s0 = v.s0 if v is not None and v.s0 is not None else PENDULUM_S0
        shat0 = v.shat0 if v is not None and v.shat0 is not None else PENDULUM_SHAT0
    else:
        s0, shat0 = v.s0, v.shat0
    return run_vector(
        plant, gamma, rho0=t.rho0, b=t.b, dt=cfg.dt, T=cfg.T, seed=seed, s0=s0, shat0=shat0,
        channel_kind=cfg.channel.kind,
        channel_delay=math.nan if cfg.channel.delay is None else cfg.channel.delay,
        disturbance_kind=cfg.disturbance.kind, J_offset=t.J_offset, chi=t.chi, chi_prime=t.chi_prime,
        lam=t.lam, localization=cfg.localization,
    )


def _vector_point(cfg: ExperimentConfig, gamma: float, seed: int):
    result = _vector_result(cfg, gamma, seed)
    traj = result.trajectory
    invariants = result.invariants()
    first = min(result.logs) if result.logs else None
    log = result.logs[first] if first is not None else None
    summary: Dict[str, Any] = {
        "mode": cfg.mode,
        "gamma": gamma,
        "seed": seed,
        "eigenvalues": [str(e) for e in result.decomposition.eigenvalues],
        "g_bits": result.designs[first].bits if first is not None else None,
        "n_events": log.n_events if log else 0,
        "trig_rate": log.triggering_rate() if log else 0.0,
        "realized_rate": log.realized_rate() if log else 0.0,
        "max_abs_z": max((float(v["sup_z"]) for v in invariants.values()), default=0.0),
        "max_abs_x": traj.sup_abs_s(),
        "modes": invariants,
        "invariants_ok": all(v["ok"] for v in invariants.values()),
    }
    if cfg.mode == MODE_PENDULUM:
        summary["bits"] = pendulum_bits_comparison(
            gamma, vector_plant(cfg).M, cfg.trigger.rho0, cfg.trigger.b, cfg.trigger.J_offset,
            decomposition=result.decomposition,
        )
    logs = {f"mode{result.decomposition.modes[j].index + 1}": lg for j, lg in result.logs.items()}
    return traj.to_frame(), logs, summary


def simulate_point(cfg: ExperimentConfig, gamma: float, seed: int):
    if cfg.mode in (MODE_PENDULUM, MODE_CUSTOM_VECTOR):
        return _vector_point(cfg, gamma, seed)
    return _scalar_point(cfg, gamma, seed)


def _sweep(cfg: ExperimentConfig, fn: Callable[[float, int], Any], workers: int) -> List[Any]:
    """Evaluate fn at every sweep point concurrently; results keep grid order."""
    grid = cfg.sweep.grid()
    seeds = [cfg.seed + k for k in range(len(grid))]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        return list(ex.map(fn, grid, seeds))


def _write_run(out_dir: Path, frame: pd.DataFrame, logs: Dict[str, Any], summary: Dict[str, Any]) -> None:
    save_csv(frame, str(out_dir / TRAJECTORY_CSV))
    for i, (name, log) in enumerate(logs.items()):
        # the first event-triggered channel owns events.csv
        fname = EVENTS_CSV if i == 0 else f"events_{name}.csv"
        save_csv(log.to_frame(), str(out_dir / fname))
    save_json(summary, str(out_dir / SUMMARY_JSON))


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path, workers: int = 4) -> int:
    if cfg.sweep is None:
        frame, logs, summary = simulate_point(cfg, cfg.trigger.gamma, cfg.seed)
        _write_run(out_dir, frame, logs, summary)
        print(f"Wrote {out_dir / TRAJECTORY_CSV}, {out_dir / EVENTS_CSV}, {out_dir / SUMMARY_JSON}")
        print(
            f"  events: {summary['n_events']}  R_s: {summary['realized_rate']:.4g} bit/s  "
            f"invariants ok: {summary['invariants_ok']}"
        )
        return EXIT_OK

    results = _sweep(cfg, lambda g, s: simulate_point(cfg, g, s)[2], workers)
    rows = [{col: r.get(col) for col in SWEEP_COLUMNS} for r in results]
    save_csv(pd.DataFrame(rows, columns=list(SWEEP_COLUMNS)), str(out_dir / SWEEP_CSV))
    save_json({"points": results}, str(out_dir / SUMMARY_JSON))
    print(f"Wrote {out_dir / SWEEP_CSV} ({len(rows)} points)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def _complex_report(cfg: ExperimentConfig, plant: PlantConfig, gamma: float) -> RateReport:
    trig = trigger_for(cfg, plant, gamma)
    A = complex(plant.A)
    design = complex_packet_design(A, gamma, plant.M, trig.J, trig.rho0, trig.b, trig.lam, trig.chi, trig.chi_prime)
    return RateReport(
        gamma=gamma,
        suff_bits=design.gbar,
        practical_bits=design.bits,
        suff_rate=sufficient_rate_complex(A, gamma, plant.M, trig.J, trig.rho0, trig.b, trig.lam, trig.chi, trig.chi_prime),
        nec_bits=math.nan,
        nec_rate_general=math.nan,
        nec_rate_restricted=math.nan,
        trig_upper=1.0 / min_inter_event_time(A.real, plant.M, trig.J, trig.rho0),
        trig_lower_restricted=math.nan,
        beta=math.nan,
        datarate=datarate_baseline(A),
        J=trig.J,
        mode="complex",
        lam=trig.lam,
    )


def bounds_rows(cfg: ExperimentConfig, gamma: float) -> List[RateReport]:
    t = cfg.trigger
    if cfg.mode in (MODE_PENDULUM, MODE_CUSTOM_VECTOR):
        dec = decompose(vector_plant(cfg))
        rows = []
        for mode in dec.unstable_modes:
            if mode.paired:
                sub = PlantConfig(A=complex(mode.eigenvalue), B=mode.b_tilde, K=0.0, M=mode.m_tilde)
                rows.append(replace(_complex_report(cfg, sub, gamma), mode=f"mode{mode.index + 1}"))
                continue
            J = t.J if t.J is not None else threshold_rule_real(mode.eigenvalue, gamma, mode.m_tilde, t.rho0, t.J_offset)
            report = rate_report(mode.eigenvalue, gamma, mode.m_tilde, J, t.rho0, t.b)
            rows.append(replace(report, mode=f"mode{mode.index + 1}"))
        return rows
    plant = plant_config(cfg)
    if plant.is_complex or cfg.mode == MODE_SCALAR_COMPLEX:
        return [_complex_report(cfg, plant, gamma)]
    trig = trigger_for(cfg, plant, gamma)
    return [rate_report(plant.A, gamma, plant.M, trig.J, trig.rho0, trig.b)]


def cmd_bounds(cfg: ExperimentConfig, out_dir: Path, workers: int = 4) -> int:
    if cfg.sweep is None:
        reports = bounds_rows(cfg, cfg.trigger.gamma)
    else:
        per_point = _sweep(cfg, lambda g, _s: bounds_rows(cfg, g), workers)
        reports = [r for rows in per_point for r in rows]
    df = pd.DataFrame([r.to_row() for r in reports])
    save_csv(df, str(out_dir / BOUNDS_CSV))
    print(f"Wrote {out_dir / BOUNDS_CSV} ({len(df)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# adversary
# ---------------------------------------------------------------------------


def cmd_adversary(cfg: ExperimentConfig, out_dir: Path) -> int:
    plant = plant_config(cfg)
    if plant.is_complex:
        raise ConfigValidationError("adversary constructions are defined for real plants only")
    trig = trigger_for(cfg, plant, cfg.trigger.gamma)
    adv = cfg.adversary or AdversaryBlock()
    realization = worst_case_realization(
        plant.A, trig.gamma, plant.M, trig.J, target=adv.target, alpha=adv.alpha, upsilon=adv.upsilon,
        n_events=adv.n_events,
    )
    traj, log, report = replay(realization, B=plant.B, K=plant.K, dt=cfg.dt, T=cfg.T, seed=cfg.seed)

    n_steps = int(round(cfg.T / cfg.dt))
    save_csv(realization.delay_frame(), str(out_dir / ADVERSARY_DELAYS_CSV))
    save_csv(realization.disturbance_frame(n_steps), str(out_dir / ADVERSARY_DISTURBANCE_CSV))
    save_csv(traj.to_frame(), str(out_dir / TRAJECTORY_CSV))
    save_csv(log.to_frame(), str(out_dir / EVENTS_CSV))
    out = {
        "target": realization.target,
        "A": plant.A,
        "gamma": trig.gamma,
        "M": plant.M,
        "J": trig.J,
        "alpha": realization.alpha,
        "upsilon": realization.upsilon,
        "forced_interval": realization.forced_interval,
        "interval_bound": realization.interval_bound,
        "ratios": report.ratios,
        **report.to_dict(),
    }
    save_json(out, str(out_dir / ADVERSARY_REPORT_JSON))
    print(f"Wrote {out_dir / ADVERSARY_REPORT_JSON}")
    print(
        f"  receptions: {len(report.ratios)}  min |z(t_c+)|/J: {report.min_ratio:.4f}  "
        f"R_tr: {report.realized_trig_rate:.4g} >= {report.forced_rate_bound:.4g}: {report.rate_ok}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="event-rate", description="Event-triggered control over rate-limited channels")
    ap.add_argument("--log-level", default="INFO", help="Python logging level")
    ap.add_argument("--metrics-file", default=None, help="Write Prometheus text metrics here on exit")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
        p.add_argument("--config", required=config_required, help="YAML experiment config")
        p.add_argument("--out-dir", default="artifacts/run", help="Directory for CSV/JSON outputs")
        p.add_argument("--seed", type=int, default=None, help="Override the config seed")
        p.add_argument("--sweep", default=None, help="gamma:lo:hi:n grid over the delay bound")
        p.add_argument("--workers", type=int, default=4, help="Concurrent sweep points")

    common(sub.add_parser("simulate", help="Run one closed-loop simulation (or a gamma sweep)"))
    common(sub.add_parser("bounds", help="Evaluate the rate and packet-size bounds"))
    common(sub.add_parser("adversary", help="Build and replay a worst-case delay/disturbance script"))
    p_pend = sub.add_parser("pendulum", help="Cart-pole case study (built-in preset)")
    common(p_pend, config_required=False)
    p_pend.add_argument("--gamma", type=float, default=None)
    p_pend.add_argument("--M", type=float, default=None)
    p_pend.add_argument("--T", type=float, default=None)
    return ap


def _pendulum_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {} if args.config else {"preset": "pendulum"}
    if args.gamma is not None:
        overrides["trigger"] = {"gamma": args.gamma}
    if args.M is not None:
        overrides["vector"] = {"M": args.M}
    if args.T is not None:
        overrides["T"] = args.T
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        overrides = _pendulum_overrides(args) if args.cmd == "pendulum" else None
        cfg = load_experiment(args.config, seed=args.seed, sweep=args.sweep, overrides=overrides)
        logger.info("%s: mode=%s preset=%s seed=%d", args.cmd, cfg.mode, cfg.preset, cfg.seed)
        if args.cmd in ("simulate", "pendulum"):
            code = cmd_simulate(cfg, out_dir, args.workers)
        elif args.cmd == "bounds":
            code = cmd_bounds(cfg, out_dir, args.workers)
        else:
            code = cmd_adversary(cfg, out_dir)
    except (ConfigValidationError, BoundDomainError, UndecodableError) as e:
        logger.error("%s", e)
        code = EXIT_CONFIG
    except ZenoGuardError as e:
        logger.error("zeno guard: %s", e)
        code = EXIT_ZENO
    if args.metrics_file:
        write_metrics(args.metrics_file)
    return code


if __name__ == "__main__":
    sys.exit(main())
