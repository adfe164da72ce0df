"""
Command-line entry point.

    memflux materials [--export FILE]
    memflux curve --material NAME [--h-min KA --h-max KA --samples N --R A_PER_M --recoil T]
    memflux simulate --id A --iq A
    memflux sweep [--parallel N] [--plot] [--metric COL ...]

All commands accept --config FILE (merged over the packaged defaults) and --out-dir DIR.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .config import Config, ConfigError
from .material import PRESETS, MagnetSpec, MagnetState, mu_0, recoil_B
from .protocol import ProtocolError, run_protocol
from .sweep import METRIC_COLUMNS, SweepGrid, emit_csv, emit_heatmap, run_sweep

_logger = logging.getLogger(__name__)


def _load_config(args: argparse.Namespace) -> Config:
    return Config.load(args.config) if args.config else Config.default()


def _out_dir(args: argparse.Namespace, config: Config) -> Path:
    return Path(args.out_dir or config.output.dir)


def _material_from_arg(name: str, config: Config) -> MagnetSpec:
    p = Path(name)
    if p.suffix in (".yaml", ".yml", ".json") and p.exists():
        doc = yaml.safe_load(p.read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ConfigError(f"{p}: expected a mapping of material fields")
        doc.setdefault("name", p.stem)
        try:
            return MagnetSpec(**doc)
        except TypeError as ex:
            raise ConfigError(f"{p}: {ex}") from ex
    return config.material(name)


def cmd_materials(args: argparse.Namespace) -> int:
    specs = list(PRESETS.values())
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("name", "Br_T", "iHc_A_per_m", "mu_rec", "mu_g", "R_A_per_m", "note"))
    for s in specs:
        w.writerow((s.name, f"{s.Br:.9g}", f"{s.iHc:.9g}", f"{s.mu_rec:.9g}", f"{s.mu_g:.9g}", f"{s.R:.9g}", s.note))
    if args.export:
        doc = [
            {"name": s.name, "Br": s.Br, "iHc": s.iHc, "mu_rec": s.mu_rec, "mu_g": s.mu_g, "R": s.R, "note": s.note}
            for s in specs
        ]
        Path(args.export).write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    config = _load_config(args)
    spec = _material_from_arg(args.material, config)
    if args.R is not None:
        spec = spec.replace(R=args.R)
    H = np.linspace(args.h_min * 1e3, args.h_max * 1e3, args.samples)
    J = spec.loop.descending_J(H)
    B = J + mu_0 * H
    cols = ["H_A_per_m", "J_T", "B_T"]
    data = [H, J, B]
    if args.recoil is not None:
        state = MagnetState(spec, args.recoil)
        Brec = recoil_B(state, H)
        cols += ["B_recoil_T", "J_recoil_T"]
        data += [Brec, Brec - mu_0 * H]
    out = open(args.output, "w", encoding="utf-8", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*data):
            w.writerow([f"{v:.9g}" for v in row])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    res = run_protocol(config, args.id, args.iq)
    text = json.dumps(res.to_record(), indent=2) + "\n"
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    parallelism = args.parallel or config.sweep.parallelism
    table = run_sweep(SweepGrid.from_config(config), config, parallelism)
    out = _out_dir(args, config)
    path = emit_csv(table, out / "sweep.csv")
    print(f"wrote {path} ({len(table.rows)} rows, {len(table.errors)} errors)")
    for c in METRIC_COLUMNS:
        v = table.column(c)
        v = v[np.isfinite(v)]
        if v.size:
            print(f"  {c:10s} min {v.min():+.6f}  max {v.max():+.6f}")
    if args.plot:
        for metric in args.metric or METRIC_COLUMNS:
            print(f"wrote {emit_heatmap(table, metric, out / f'{metric}.svg')}")
    for r in table.errors:
        print(json.dumps({"id_A": r.id_A, "iq_A": r.iq_A, "error": r.error}), file=sys.stderr)
    return 1 if table.errors else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memflux", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config merged over the packaged defaults")
    common.add_argument("--out-dir", help="output directory (default: output.dir of the config)")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("materials", parents=[common], help="list material presets")
    m.add_argument("--export", help="also write the presets to this YAML file")
    m.set_defaults(func=cmd_materials)

    c = sub.add_parser("curve", parents=[common], help="export a demagnetization curve as CSV")
    c.add_argument("--material", default="studied-LCF", help="preset/config material name, or a YAML spec file")
    c.add_argument("--h-min", type=float, default=-300.0, help="kA/m")
    c.add_argument("--h-max", type=float, default=50.0, help="kA/m")
    c.add_argument("--samples", type=int, default=701)
    c.add_argument("--R", type=float, help="override the knee round radius [A/m]")
    c.add_argument("--recoil", type=float, help="also export the recoil line with this remanence [T]")
    c.add_argument("--output", help="CSV path (default: stdout)")
    c.set_defaults(func=cmd_curve)

    s = sub.add_parser("simulate", parents=[common], help="run the five-interval protocol at one load point")
    s.add_argument("--id", type=float, required=True, help="interval-3 d-axis current [A]")
    s.add_argument("--iq", type=float, required=True, help="interval-3 q-axis current [A]")
    s.add_argument("--output", help="JSON path (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", parents=[common], help="run the protocol over the (i_d, i_q) grid")
    w.add_argument("--parallel", type=int, help="worker processes (default: sweep.parallelism)")
    w.add_argument("--plot", action="store_true", help="emit SVG heatmaps")
    w.add_argument("--metric", action="append", choices=METRIC_COLUMNS, help="heatmap column (repeatable; default all)")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (ConfigError, ProtocolError, KeyError, ValueError, OSError) as ex:
        print(json.dumps({"error": type(ex).__name__, "message": str(ex)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
