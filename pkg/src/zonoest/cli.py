"""Command-line runner: ``estimate run`` and ``estimate check``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .exceptions import EmptySet, ModelNotFound, ParseError, ZonoestError
from .filter import EstimatorConfig, MethodId, StepRecord, run_estimators
from .scenario import Scenario, consistent_samples, load_scenario, simulate_truth
from .sets import mc_volume, project_2d

log = logging.getLogger("zonoest")

METRIC_COLUMNS = ("k", "method", "wall_time_s", "mc_volume", "mc_stderr", "containment_fraction", "status")

EXIT_OK, EXIT_PARSE, EXIT_IO, EXIT_MODEL, EXIT_RUNTIME = 0, 2, 3, 4, 5


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def evaluate_records(records: list[StepRecord], samples_per_step: list[np.ndarray], n_volume: int, seed: int):
    """Fill volume and containment fields of each record in place."""
    cache_by_k: dict[int, dict] = {}
    for rec in records:
        if rec.updated is None:
            continue
        cache = cache_by_k.setdefault(rec.k, {})
        pts = samples_per_step[rec.k]
        rec.containment_fraction = float(rec.updated.contains_points(pts, cache=cache).mean())
        try:
            rec.volume, rec.volume_stderr = mc_volume(rec.updated, n_volume, seed + 7919 * rec.k)
        except EmptySet:
            rec.volume, rec.volume_stderr = 0.0, 0.0


def execute(sc: Scenario):
    """Simulate, estimate and evaluate a scenario; returns ``(records, states, measurements)``."""
    model = sc.model()
    states, ys = simulate_truth(model, sc)
    cfg = EstimatorConfig(strategy=sc.family, seed=sc.seed)
    records = run_estimators(model, sc.X0, sc.W, sc.V, ys, sc.methods, cfg,
                             on_record=lambda r: log.info("k=%d %-6s %s %.3fs", r.k, r.method.value, r.status, r.wall_time))
    samples = consistent_samples(model, sc, ys, sc.samples, sc.seed + 1, truth=states)
    evaluate_records(records, samples, sc.samples, sc.seed + 2)
    return records, states, ys


def write_outputs(records: list[StepRecord], out: Path, directions: int = 64):
    out.mkdir(parents=True, exist_ok=True)
    (out / "sets").mkdir(exist_ok=True)
    (out / "polygons").mkdir(exist_ok=True)
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for r in records:
            w.writerow([r.k, r.method.value, _fmt(r.wall_time), _fmt(r.volume), _fmt(r.volume_stderr),
                        _fmt(r.containment_fraction), r.status])
    for r in records:
        if r.updated is None:
            continue
        name = f"{r.k}_{r.method.value}"
        with open(out / "sets" / f"{name}.json", "w") as fh:
            json.dump(r.updated.to_dict(), fh)
        try:
            poly = project_2d(r.updated, (0, 1), directions)
        except EmptySet:
            poly = np.zeros((0, 2))
        with open(out / "polygons" / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("x", "y"))
            for x, y in poly:
                w.writerow((repr(float(x)), repr(float(y))))


def run_scenario(path, out_dir, overrides: dict | None = None) -> int:
    """Run a scenario file and write ``metrics.csv``, ``sets/`` and ``polygons/`` under ``out_dir``."""
    try:
        sc = load_scenario(path).with_overrides(**(overrides or {}))
    except ModelNotFound as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MODEL
    except (ParseError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        print(f"error: cannot create {out}: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        records, _, _ = execute(sc)
    except ZonoestError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        write_outputs(records, out, sc.polygon_directions)
    except OSError as err:
        print(f"error: writing outputs: {err}", file=sys.stderr)
        return EXIT_IO
    for r in records:
        print(f"k={r.k} {r.method.value:<6} status={r.status:<12} volume={_fmt(r.volume)} "
              f"contained={_fmt(r.containment_fraction)} time={r.wall_time:.3f}s")
    return EXIT_OK


def check_scenario(path) -> int:
    try:
        sc = load_scenario(path)
    except ModelNotFound as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_MODEL
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    m = sc.model()
    print(f"ok: model={m.name} nx={m.nx} nw={m.nw} nmu={m.nmu} steps={sc.steps} "
          f"methods={','.join(x.value for x in sc.methods)} family={sc.family}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="estimate", description="Set-membership state estimation with zonotopic sets.")
    p.add_argument("-v", "--verbose", action="store_true", help="log every step")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario and write metrics, sets and polygons")
    r.add_argument("--scenario", required=True, help="scenario JSON file (or built-in name: example1, unicycle)")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--methods", help="comma-separated subset of RRSR,D-RRSR,D-ZB,D-CZ,COMB")
    r.add_argument("--steps", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--samples", type=int)
    r.add_argument("--family", help="canonical | canonical+K | exhaustive")
    c = sub.add_parser("check", help="validate a scenario file")
    c.add_argument("--scenario", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "check":
        return check_scenario(args.scenario)
    overrides = {"steps": args.steps, "seed": args.seed, "samples": args.samples, "family": args.family}
    if args.methods:
        try:
            overrides["methods"] = [MethodId.parse(m) for m in args.methods.split(",") if m.strip()]
        except ValueError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_PARSE
    return run_scenario(args.scenario, args.out, overrides)


if __name__ == "__main__":
    sys.exit(main())
