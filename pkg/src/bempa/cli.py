"""Command-line entry point: ``bempa run|validate|report-meas|decompose-b``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, describe_cells, echo, git_blob_hash, load_config, meas_settings
from .vqe import CSV_COLUMNS, sweep

OUT_ENV = "BEMPA_OUT"

log = logging.getLogger("bempa")


def _out_dir(args, cfg) -> Path:
    if args.out:
        return Path(args.out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    return Path(cfg.out_dir)


def _write_csv(path: Path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


def _load(path) -> Optional[tuple]:
    try:
        return load_config(path)
    except ConfigError as exc:
        for diag in exc.diagnostics:
            print(f"error: {path}: {diag}", file=sys.stderr)
        return None
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def cmd_validate(args) -> int:
    loaded = _load(args.config)
    if loaded is None:
        return 2
    cfg, _ = loaded
    cells = describe_cells(cfg)
    for line in cells:
        print(line)
    print(f"ok: {len(cells)} cells")
    return 0


def cmd_run(args) -> int:
    loaded = _load(args.config)
    if loaded is None:
        return 2
    cfg, raw = loaded
    seed = cfg.seed if args.seed is None else args.seed
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    cells = cfg.cells(seed)
    if not cells:
        print(f"error: {args.config}: no sweep cells (need at least one model and one ansatz)", file=sys.stderr)
        return 2
    workers = args.workers or os.cpu_count() or 1
    log.info("running %d cells with %d workers into %s", len(cells), workers, out)
    outcome = sweep(cells, workers=workers)
    if args.format == "csv":
        _write_csv(out / "results.csv", outcome.rows, CSV_COLUMNS)
    else:
        _write_json(out / "results.json", outcome.rows)
    _write_json(out / "trajectories.json", {k: v for k, v in outcome.results.items() if v is not None})
    manifest = {
        "config_path": str(args.config),
        "config": echo(raw),
        "config_git_hash": git_blob_hash(raw),
        "seed": seed,
        "cells": [{"key": c.key, "seed": c.cfg.seed} for c in cells],
        "errors": outcome.errors,
        "version": __version__,
        "finished_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    _write_json(out / "manifest.json", manifest)
    for key, msg in outcome.errors.items():
        print(f"failed: {key}: {msg}", file=sys.stderr)
    n_conv = sum(1 for r in outcome.rows if r.get("converged") is True)
    print(f"{len(cells)} cells, {n_conv} converged, {len(outcome.errors)} failed -> {out}")
    return 0 if outcome.ok else 1


def cmd_report_meas(args) -> int:
    from .meas import encoding_report

    loaded = _load(args.config)
    if loaded is None:
        return 2
    cfg, raw = loaded
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    params, templates, d_list, encodings = meas_settings(cfg)
    rows = encoding_report(params, templates, d_list, encodings)
    if args.format == "csv":
        flat = [
            dict(r, weight_histogram=";".join(f"{w}:{c}" for w, c in r["weight_histogram"]),
                 r_hat="" if r["r_hat"] is None else r["r_hat"])
            for r in rows
        ]
        _write_csv(out / "meas_report.csv", flat, list(rows[0]) if rows else [])
    else:
        _write_json(out / "meas_report.json", rows)
    _write_json(out / "manifest.json", {
        "config_path": str(args.config),
        "config": echo(raw),
        "config_git_hash": git_blob_hash(raw),
        "version": __version__,
    })
    for r in rows:
        rh = "-" if r["r_hat"] is None else f"{r['r_hat']:.3f}"
        print(f"{r['lattice']:>10} d={r['d']:<3} {r['encoding']:<9} qubits={r['n_qubits']:<4} "
              f"terms={r['n_terms']:<6} mean_weight={r['mean_weight']:.3f} R_hat={rh}")
    return 0


def cmd_decompose_b(args) -> int:
    from .circuit import b_decomposition, b_unitary, circuit_depth, verify_decomposition

    circuit = b_decomposition()
    print(circuit.to_text())
    dist = verify_decomposition(circuit, b_unitary(args.alpha), [args.alpha])
    print(f"depth: {circuit_depth(circuit)}")
    print(f"distance to exp(-i alpha G_B) at alpha={args.alpha}: {dist:.3e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bempa", description="Particle-conserving VQE experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config")
    common.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("run", parents=[common], help="run a VQE sweep")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: logical cores)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report-meas", parents=[common], help="encoding and measurement-cost report")
    p.set_defaults(func=cmd_report_meas)

    p = sub.add_parser("decompose-b", help="print the depth-13 B-gate circuit and check it")
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_decompose_b)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
