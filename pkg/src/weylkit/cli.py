"""Command-line driver: run experiments, validate configs, export operators.

Exit codes: 0 ok, 2 config error, 3 capacity/truncation/grid error,
4 numerical-tolerance failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__
from .calibration import calibration_record
from .config import EXPERIMENT_NAMES, ExperimentConfig, canonical_json
from .errors import (
    AlignmentError,
    CapacityError,
    ConfigError,
    DomainError,
    FDStepError,
    GridError,
    GridMismatchError,
    MarginExhaustedError,
    ModeError,
    ResampleError,
    SerializationError,
    TruncationError,
    WindowError,
    ZeroNormError,
)
from .experiments import DESCRIPTIONS, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_TOLERANCE = 4
EXIT_IO = 5

_CAPACITY_ERRORS = (
    CapacityError,
    TruncationError,
    GridError,
    AlignmentError,
    GridMismatchError,
    ResampleError,
    MarginExhaustedError,
    WindowError,
    ModeError,
    DomainError,
)
_TOLERANCE_ERRORS = (ZeroNormError, FDStepError)


def _load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SerializationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


def _write_csv(path: Path, columns, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _summary_lines(name: str, report: dict) -> list[str]:
    lines = [f"experiment: {name}", f"config hash: {report['config_hash']}"]
    failures = report["results"].get("failures", [])
    lines.append(f"status: {'ok' if not failures else 'TOLERANCE FAILURE'}")
    for f in failures:
        lines.append(f"  failure: {f}")
    for key, val in report["results"].items():
        if key in ("tables", "failures", "reports", "report", "resolutions"):
            continue
        if isinstance(val, (int, float, str, bool)):
            lines.append(f"{key}: {val}")
    return lines


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    results = run_experiment(cfg)
    report = {
        "experiment": cfg.experiment,
        "config": cfg.full,
        "config_hash": cfg.hash,
        "seed": cfg["panel"]["seed"],
        "tool_version": __version__,
        "calibration": calibration_record(),
        "results": results,
    }
    out_dir = Path(args.out or cfg["output_dir"]) / cfg.hash
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(
            json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        for tname, table in results.get("tables", {}).items():
            _write_csv(out_dir / f"{tname}.csv", table["columns"], table["rows"])
        (out_dir / "summary.txt").write_text(
            "\n".join(_summary_lines(cfg.experiment, report)) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {out_dir}/report.json")
    if results.get("failures"):
        for f in results["failures"]:
            print(f"tolerance failure: {f}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_list(_args: argparse.Namespace) -> int:
    for name in EXPERIMENT_NAMES:
        print(f"{name:18} {DESCRIPTIONS[name]}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load_config(args.config)
    diags = [f"experiment {cfg.experiment}: schema ok"]
    from .hermite import build_context
    from .weyl import GridSpec

    c = cfg["context"]
    ctx = build_context(c["n"], c["N"], float(c["L_xi"]), c["points"])
    diags.append(
        f"context ok: N={ctx.N}, h_xi={ctx.h_xi}, capacity bound "
        f"{math.sqrt(2 * ctx.N + 1) + 2.0:.3f} <= L_xi={ctx.L_xi}"
    )
    g = cfg["grid"]
    grid = GridSpec(c["n"], float(g["L_z"]), g["m_pts"])
    ratio = grid.h_z / ctx.h_xi
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise AlignmentError(
            f"grid spacing h_z={grid.h_z} not an integer multiple of h_xi={ctx.h_xi}"
        )
    diags.append(f"grid ok: h_z={grid.h_z} = {round(ratio)} * h_xi")
    t = cfg["tgrid"]
    if t["t_pts"] & (t["t_pts"] - 1):
        raise GridError(f"t_pts={t['t_pts']} is not a power of two")
    diags.append(f"tgrid ok: t_pts={t['t_pts']}")
    for line in diags:
        print(line)
    return EXIT_OK


def cmd_export_matrix(args: argparse.Namespace) -> int:
    import numpy as np

    from .derivations import heat_band
    from .hermite import (
        OperatorMatrix,
        annihilation,
        build_context,
        creation,
        dyadic_projection,
        hermite_operator,
        projection,
        spectral_function,
    )
    from .serialization import save_operator

    ctx = build_context(args.n, args.N, args.L_xi, args.points)
    name, _, arg = args.name.partition(":")
    if name == "annihilation":
        m = annihilation(ctx)
    elif name == "creation":
        m = creation(ctx)
    elif name == "hermite":
        m = hermite_operator(ctx)
    elif name == "projection":
        m = projection(ctx, int(arg))
    elif name == "chi":
        m = dyadic_projection(ctx, int(arg))
    elif name == "heat-band":
        m = heat_band(ctx, int(arg))
    elif name == "riesz":
        m = annihilation(ctx) @ spectral_function(ctx, lambda t: t**-0.5)
    else:
        raise ConfigError(
            f"unknown matrix {args.name!r}; use annihilation, creation, hermite, "
            "projection:J, chi:K, heat-band:J or riesz"
        )
    try:
        save_operator(args.out, m)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="weylkit",
        description="numerical workbench for Weyl multipliers and fiberwise "
        "multiplier transforms",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named experiment from a JSON config")
    p_run.add_argument("--config", required=True, help="path to the JSON config")
    p_run.add_argument("--out", default=None, help="override the output directory")
    p_run.set_defaults(fn=cmd_run)

    p_list = sub.add_parser("list-experiments", help="list experiment names")
    p_list.set_defaults(fn=cmd_list)

    p_val = sub.add_parser("validate", help="dry-run precondition checks on a config")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(fn=cmd_validate)

    p_exp = sub.add_parser("export-matrix", help="materialise a named operator matrix")
    p_exp.add_argument("--name", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--n", type=int, default=1)
    p_exp.add_argument("--N", type=int, default=64)
    p_exp.add_argument("--L-xi", dest="L_xi", type=float, default=13.5)
    p_exp.add_argument("--points", type=int, default=216)
    p_exp.set_defaults(fn=cmd_export_matrix)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _TOLERANCE_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except _CAPACITY_ERRORS as exc:
        print(f"capacity/validation error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (OSError, SerializationError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
