"""Command-line entry point: ``fr3link {run,sweep,tradeoff,budget}``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .architectures import (
    architecture_nf_db,
    component_counts,
    parse_architectures,
    power_breakdown,
)
from .config import SWEEP_PARAMS, SimConfig, load_config, parse_grid
from .harness import (
    SweepRow,
    build_architecture,
    component_table,
    run_point,
    se_power_tradeoff,
    sweep,
)
from .report import emit_csv, emit_plot_data, knee_table, plot_series, read_csv, tradeoff_series


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML file with [scenario], [hardware], "
                                               "[optimizer] and [sweep] sections")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--arch", help="architecture name such as FI-HAD-SRF, or 'all'")
    p.add_argument("--combiner", help="comma-separated subset of lmmse,rzfc,zfc,mrc")
    p.add_argument("--out", type=Path, help="CSV output path")
    p.add_argument("--workers", type=int, help="process-pool size for Monte-Carlo trials")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fr3link", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate one operating point")
    _common(p)

    p = sub.add_parser("sweep", help="sweep one parameter over a grid")
    _common(p)
    p.add_argument("--param", choices=SWEEP_PARAMS)
    p.add_argument("--grid", help="start:stop:step or comma-separated values")
    p.add_argument("--plot-data", type=Path, help="JSON file with grouped plot series")
    p.add_argument("--resume", action="store_true",
                   help="reuse rows already present in --out")

    p = sub.add_parser("tradeoff", help="ADC-resolution sweep and SE/power knee search")
    _common(p)
    p.add_argument("--grid", default="1:10:1", help="ADC bit grid")
    p.add_argument("--threshold", type=float, help="knee threshold in bps/Hz per dB")
    p.add_argument("--plot-data", type=Path)

    p = sub.add_parser("budget", help="power, noise-figure and component-count tables")
    _common(p)
    return ap


def _config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    if args.seed is not None:
        cfg.scenario.seed = args.seed
    if args.trials is not None:
        cfg.sweep.trials = args.trials
    if args.arch:
        cfg.sweep.architectures = tuple(parse_architectures(args.arch))
    if args.combiner:
        cfg.sweep.combiners = tuple(m.strip() for m in args.combiner.split(","))
        cfg.optimizer.combiner = cfg.sweep.combiners[0]
    if args.workers is not None:
        cfg.sweep.workers = args.workers
    cfg.validate()
    return cfg


def _print_rows(rows) -> None:
    print(f"{'value':>8}  {'arch':<11} {'method':<6} {'eta_tot':>8} {'ci95':>6} "
          f"{'P_T dBW':>8} {'NF dB':>6}  status")
    for r in rows:
        print(f"{r.value:>8.3g}  {r.arch:<11} {r.method:<6} {r.eta_tot_mean:>8.3f} "
              f"{r.eta_tot_ci95:>6.3f} {r.p_total_dbw:>8.3f} {r.nf_db:>6.2f}  {r.status}")


def cmd_run(args) -> int:
    cfg = _config(args)
    rows = []
    for a in cfg.sweep.architectures:
        for m in cfg.sweep.combiners:
            try:
                pt = run_point(cfg, a, m)
                rows.append(SweepRow.from_point("none", 0.0, pt))
            except ValueError as exc:
                rows.append(SweepRow.failed("none", 0.0, a, m, str(exc)))
    _print_rows(rows)
    if args.out:
        emit_csv(rows, args.out)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    param = args.param or cfg.sweep.param
    grid = parse_grid(args.grid) if args.grid else cfg.sweep.grid
    resume = read_csv(args.out) if args.resume and args.out and args.out.exists() else ()
    rows = sweep(cfg, param, grid, resume=resume)
    _print_rows(rows)
    if args.out:
        emit_csv(rows, args.out)
    if args.plot_data:
        emit_plot_data(plot_series(rows), args.plot_data)
    return 0


def cmd_tradeoff(args) -> int:
    cfg = _config(args)
    rows = sweep(cfg, "adc_bits", parse_grid(args.grid))
    threshold = cfg.sweep.knee_threshold if args.threshold is None else args.threshold
    knees = se_power_tradeoff(rows, threshold)
    print(knee_table(knees))
    if args.out:
        emit_csv(rows, args.out)
    if args.plot_data:
        emit_plot_data(tradeoff_series(rows, knees), args.plot_data)
    return 0


_COUNT_KEYS = ("antennas", "adcs", "phase_shifters", "rf_if_filters", "if_bb_mixers",
               "dividers", "combiners")


def cmd_budget(args) -> int:
    cfg = _config(args)
    table = component_table(cfg)
    header = ["arch", "static_w", "dynamic_w", "total_w", "total_dbw", "nf_db", *_COUNT_KEYS]
    recs = []
    for a in cfg.sweep.architectures:
        arch = build_architecture(cfg, a)
        pb = power_breakdown(arch, cfg.scenario.bandwidths_hz, cfg.hardware.adc_bits,
                             cfg.hardware.adc_nu, table)
        counts = component_counts(arch)
        recs.append([a, pb.static_w, pb.dynamic_w, pb.total_w, pb.total_dbw,
                     architecture_nf_db(arch, 0, table), *(counts[k] for k in _COUNT_KEYS)])
    print(f"{'arch':<11} {'P_s W':>8} {'P_d W':>8} {'P_T dBW':>8} {'NF dB':>6}  counts")
    for r in recs:
        print(f"{r[0]:<11} {r[1]:>8.4f} {r[2]:>8.4f} {r[4]:>8.3f} {r[5]:>6.2f}  "
              + " ".join(f"{k}={v}" for k, v in zip(_COUNT_KEYS, r[6:])))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in recs:
                w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "sweep": cmd_sweep, "tradeoff": cmd_tradeoff,
               "budget": cmd_budget}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
