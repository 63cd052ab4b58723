# dev tool: regenerate every bound sweep, preset simulation and adversary replay in one go
# usage: PYTHONPATH=src python scripts/reproduce.py [--out-dir artifacts/reproduce] [--workers 4]

from __future__ import annotations

import argparse
import logging
import math
from pathlib import Path

from event_rate.cli.constants import BOUNDS_CSV, EXIT_OK
from event_rate.cli.main import cmd_adversary, cmd_bounds, cmd_simulate, load_experiment
from event_rate.presets import PRESETS, SWEEP_GRIDS
from event_rate.utils.io import load_csv, save_json

SIMULATED = ("real", "complex-spiral", "complex", "pendulum")
ADVERSARIAL = ("adversary", "adversary-disturbed")


def _crossing(bounds_csv: Path) -> float:
    """Smallest delay bound at which the sufficient rate exceeds the time-triggered baseline."""
    df = load_csv(str(bounds_csv), required_columns=["gamma", "suff_rate", "datarate"])
    above = df[df["suff_rate"] > df["datarate"]]
    return float(above["gamma"].min()) if len(above) else math.nan


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="artifacts/reproduce")
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--seed", type=int, default=1337)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    root = Path(args.out_dir)
    summary = {"bounds": {}, "simulate": [], "adversary": []}

    for name, grid in SWEEP_GRIDS.items():
        out = root / "bounds" / name
        cfg = load_experiment(None, seed=args.seed, sweep=grid, overrides={"preset": name})
        assert cmd_bounds(cfg, out, args.workers) == EXIT_OK
        crossing = _crossing(out / BOUNDS_CSV)
        assert not math.isnan(crossing), f"{name}: sufficient rate never exceeds the baseline over {grid}"
        summary["bounds"][name] = {"sweep": grid, "crossing_gamma": crossing}

    for name in SIMULATED:
        cfg = load_experiment(None, seed=args.seed, overrides={"preset": name})
        assert cmd_simulate(cfg, root / "simulate" / name, args.workers) == EXIT_OK
        summary["simulate"].append(name)

    for name in ADVERSARIAL:
        cfg = load_experiment(None, seed=args.seed, overrides={"preset": name})
        assert cmd_adversary(cfg, root / "adversary" / name) == EXIT_OK
        summary["adversary"].append(name)

    missing = sorted(set(PRESETS) - set(SWEEP_GRIDS) - set(SIMULATED) - set(ADVERSARIAL))
    if missing:
        print(f"[reproduce] presets not exercised: {missing}")
    save_json(summary, str(root / "reproduce.json"))
    print(f"Wrote {root / 'reproduce.json'}")


if __name__ == "__main__":
    main()
