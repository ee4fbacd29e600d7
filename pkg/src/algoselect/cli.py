"""``algoselect`` command line: run, analyze, simulate.

Exit statuses: 0 success, 1 usage error, 2 data error, 3 bound failure
(``simulate --assert-bounds``) or flagged cells (``run --fail-on-flagged``).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from algoselect import __version__
from algoselect.analysis import build_report, compatibility_and_ratios, export_heatmap, export_ratios, format_summary
from algoselect.harness import DataError, read_records, run_matrix
from algoselect.problems import DEFAULT_BUDGET, PROBLEMS, suite_manifest
from algoselect.simulate import (
    SIMULATIONS,
    fpl_bound_ratio,
    run_adaptive,
    run_cascade,
    run_fpl,
    run_ucb_tree,
    ucb_tree_bound,
)

log = logging.getLogger("algoselect")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BOUND = 0, 1, 2, 3

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "workers": 1,
    "problems": list(PROBLEMS),
    "repetitions": 7,
    "budget": DEFAULT_BUDGET,
    "extended": False,
    "fail_on_flagged": False,
    "bootstrap_resamples": 10_000,
    "confidence": 0.95,
    "T": 1000,
    "K": 2,
    "seeds": 20,
    "depth": 2,
    "switch_at": None,
    "fpl_ratio_bound": 8.0,
    "cascade_tolerance": 0.05,
    "ucb_constant": 3.0,
    "adaptive_win_fraction": 0.8,
}

# thresholds used by --assert-bounds; the same numbers the acceptance suite checks
CASCADE_ARMS = ((0.0, 0.3), (10.0, 0.0))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global_flags(p: argparse.ArgumentParser, *, suppress: bool) -> None:
    # defined on the root and again on each subcommand so flags work in either position
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON config file")
    p.add_argument("--out", default=d, help="output directory (default: $ALGOSELECT_OUT or ./results)")
    p.add_argument("--seed", type=int, default=d, help="base seed")
    p.add_argument("--workers", type=int, default=d, help="worker processes for the run matrix")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="algoselect", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute the problem x algorithm x repetition matrix")
    _global_flags(run, suppress=True)
    run.add_argument("--reps", dest="repetitions", type=int, default=argparse.SUPPRESS,
                     help="repetitions per cell")
    run.add_argument("--problems", type=lambda s: [p for p in s.split(",") if p], default=argparse.SUPPRESS,
                     help="comma-separated problem ids")
    run.add_argument("--budget", type=float, default=argparse.SUPPRESS, help="per-solve time budget, seconds")
    run.add_argument("--extended", action="store_true", default=argparse.SUPPRESS,
                     help="run every algorithm on every problem")
    run.add_argument("--fail-on-flagged", dest="fail_on_flagged", action="store_true", default=argparse.SUPPRESS,
                     help="exit 3 if any cell was flagged")

    an = sub.add_parser("analyze", help="CV, bootstrap, entropy and heatmap over a runs.jsonl")
    _global_flags(an, suppress=True)
    an.add_argument("--runs", default=argparse.SUPPRESS, help="JSONL input (default: <out>/runs.jsonl)")
    an.add_argument("--resamples", dest="bootstrap_resamples", type=int, default=argparse.SUPPRESS,
                    help="bootstrap resamples (>= 1000)")
    an.add_argument("--confidence", type=float, default=argparse.SUPPRESS,
                    help="bootstrap CI level")

    sim = sub.add_parser("simulate", help="online-selection simulations with regret ledgers")
    _global_flags(sim, suppress=True)
    sim.add_argument("simulation", help=f"one of: {', '.join(SIMULATIONS)}")
    sim.add_argument("--T", type=int, default=argparse.SUPPRESS, help="horizon")
    sim.add_argument("--K", type=int, default=argparse.SUPPRESS, help="number of arms (fpl, adaptive-window)")
    sim.add_argument("--seeds", type=int, default=argparse.SUPPRESS, help="number of seeds")
    sim.add_argument("--depth", type=int, default=argparse.SUPPRESS, help="tree depth (ucb-tree)")
    sim.add_argument("--switch-at", dest="switch_at", type=int, default=argparse.SUPPRESS,
                     help="round of the distribution switch (adaptive-window)")
    sim.add_argument("--assert-bounds", dest="assert_bounds", action="store_true",
                     help="exit 3 if the summary violates its bound")
    return parser


def load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - set(DEFAULTS) - {"out", "runs"})
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """defaults < config file < command-line flags."""
    cfg = dict(DEFAULTS)
    cfg["out"] = os.environ.get("ALGOSELECT_OUT", "results")
    cfg.update(load_config(args.config))
    for key, value in vars(args).items():
        if key in ("config", "command", "verbose", "assert_bounds", "simulation") or value is None:
            continue
        cfg[key] = value
    return cfg


def _write_resolved(out: Path, command: str, cfg: dict[str, Any]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    doc = {"command": command, "version": __version__, **cfg}
    # ``run`` owns config.resolved.json; the others must not clobber it
    name = "config.resolved.json" if command == "run" else f"{command}.resolved.json"
    (out / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# -- commands --------------------------------------------------------------------------


def cmd_run(cfg: dict[str, Any]) -> int:
    unknown = [p for p in cfg["problems"] if p not in PROBLEMS]
    if unknown:
        raise UsageError(f"unknown problems: {', '.join(unknown)}")
    if int(cfg["repetitions"]) < 1:
        raise UsageError("--reps must be >= 1")
    if float(cfg["budget"]) <= 0:
        raise UsageError("--budget must be positive")
    out = Path(cfg["out"])
    _write_resolved(out, "run", cfg)
    with open(out / "runs.jsonl", "w", encoding="utf-8") as sink:
        records = run_matrix(
            suite_manifest(cfg["problems"]),
            int(cfg["repetitions"]),
            int(cfg["seed"]),
            budget=float(cfg["budget"]),
            workers=int(cfg["workers"]),
            extended=bool(cfg["extended"]),
            sink=sink,
        )
    flagged = sum(r.flagged for r in records)
    print(f"{len(records)} records written to {out / 'runs.jsonl'} ({flagged} flagged)")
    if flagged and cfg["fail_on_flagged"]:
        return EXIT_BOUND
    return EXIT_OK


def cmd_analyze(cfg: dict[str, Any]) -> int:
    out = Path(cfg["out"])
    runs = Path(cfg.get("runs") or out / "runs.jsonl")
    try:
        records = read_records(runs)
    except FileNotFoundError:
        print(f"error: no run records at {runs}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"error: {runs}: {exc}", file=sys.stderr)
        return EXIT_DATA
    report = build_report(
        records,
        bootstrap_resamples=int(cfg["bootstrap_resamples"]),
        confidence=float(cfg["confidence"]),
        bootstrap_seed=int(cfg["seed"]),
    )
    _write_resolved(out, "analyze", {**cfg, "runs": str(runs)})
    (out / "report.json").write_text(report.to_json() + "\n")
    (out / "heatmap.csv").write_text(export_heatmap(records))
    (out / "ratios.csv").write_text(export_ratios(compatibility_and_ratios(records)))
    print(format_summary(report))
    return EXIT_OK


def _simulate_one(name: str, cfg: dict[str, Any], seed: int) -> tuple[dict[str, Any], dict[str, str]]:
    T, K, depth = int(cfg["T"]), int(cfg["K"]), int(cfg["depth"])
    if name == "fpl":
        ledger = run_fpl(T, K, seed)
        return {"seed": seed, "regret": ledger.regret(), "ratio": fpl_bound_ratio(ledger)}, {"": ledger.to_csv()}
    if name == "cascade":
        res = run_cascade(T, CASCADE_ARMS, seed)
        row = {"seed": seed, "average_cost_plus_loss": res.average_cost_plus_loss, "excess": res.excess}
        return row, {"": res.ledger.to_csv()}
    if name == "adaptive-window":
        adaptive, plain = run_adaptive(T, K, seed, switch_at=cfg["switch_at"])
        row = {
            "seed": seed,
            "adaptive_segment_regret": adaptive.segment_regret(),
            "fpl_segment_regret": plain.segment_regret(),
            "adaptive_static_regret": adaptive.regret(),
            "fpl_static_regret": plain.regret(),
        }
        row["adaptive_wins"] = row["adaptive_segment_regret"] < row["fpl_segment_regret"]
        return row, {"_adaptive": adaptive.to_csv(), "_fpl": plain.to_csv()}
    ledger = run_ucb_tree(T, depth, seed)
    return {"seed": seed, "regret": ledger.regret()}, {"": ledger.to_csv()}


def summarize(name: str, cfg: dict[str, Any], rows: list[dict[str, Any]]) -> dict[str, Any]:
    T = int(cfg["T"])
    s: dict[str, Any] = {"simulation": name, "T": T, "seeds": len(rows)}
    if name == "fpl":
        ratios = [r["ratio"] for r in rows]
        s.update(K=int(cfg["K"]), mean_ratio=float(np.mean(ratios)), max_ratio=float(np.max(ratios)),
                 mean_regret=float(np.mean([r["regret"] for r in rows])), bound=cfg["fpl_ratio_bound"])
        s["within_bound"] = s["mean_ratio"] <= s["bound"]
    elif name == "cascade":
        s.update(arms=[list(a) for a in CASCADE_ARMS], optimal=min(c + m for c, m in CASCADE_ARMS),
                 mean_average_cost_plus_loss=float(np.mean([r["average_cost_plus_loss"] for r in rows])),
                 tolerance=cfg["cascade_tolerance"])
        s["mean_excess"] = s["mean_average_cost_plus_loss"] - s["optimal"]
        s["within_bound"] = abs(s["mean_excess"]) <= s["tolerance"]
    elif name == "adaptive-window":
        wins = sum(r["adaptive_wins"] for r in rows)
        s.update(K=int(cfg["K"]), wins=wins, required_win_fraction=cfg["adaptive_win_fraction"],
                 mean_adaptive_segment_regret=float(np.mean([r["adaptive_segment_regret"] for r in rows])),
                 mean_fpl_segment_regret=float(np.mean([r["fpl_segment_regret"] for r in rows])))
        s["within_bound"] = wins >= math.ceil(cfg["adaptive_win_fraction"] * len(rows))
    else:
        depth = int(cfg["depth"])
        bound = ucb_tree_bound(T, depth, cfg["ucb_constant"]) if T > 1 else float("inf")
        mean_regret = float(np.mean([r["regret"] for r in rows]))
        s.update(depth=depth, mean_regret=mean_regret, max_regret=float(np.max([r["regret"] for r in rows])),
                 bound=bound if math.isfinite(bound) else None)
        s["ratio"] = mean_regret / bound if math.isfinite(bound) else 0.0
        s["within_bound"] = mean_regret <= bound
    s["per_seed"] = rows
    return s


def cmd_simulate(cfg: dict[str, Any], name: str, assert_bounds: bool) -> int:
    if name not in SIMULATIONS:
        raise UsageError(f"unknown simulation {name!r}; choose from {', '.join(SIMULATIONS)}")
    if int(cfg["T"]) < 1 or int(cfg["seeds"]) < 1:
        raise UsageError("--T and --seeds must be >= 1")
    if name in ("fpl", "adaptive-window") and int(cfg["K"]) < 2:
        raise UsageError("--K must be >= 2")
    if name == "ucb-tree" and int(cfg["depth"]) < 1:
        raise UsageError("--depth must be >= 1")
    out = Path(cfg["out"])
    _write_resolved(out, "simulate", {**cfg, "simulation": name})
    base = int(cfg["seed"])
    rows = []
    for i in range(int(cfg["seeds"])):
        row, ledgers = _simulate_one(name, cfg, base + i)
        rows.append(row)
        for suffix, text in ledgers.items():
            (out / f"{name}_seed{base + i}{suffix}.csv").write_text(text)
    summary = summarize(name, cfg, rows)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    headline = {k: v for k, v in summary.items() if k != "per_seed"}
    for k in sorted(headline):
        print(f"{k}: {headline[k]}")
    if assert_bounds and not summary["within_bound"]:
        print("bound check failed", file=sys.stderr)
        return EXIT_BOUND
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        return cmd_simulate(cfg, args.simulation, args.assert_bounds)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"algoselect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"algoselect: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
