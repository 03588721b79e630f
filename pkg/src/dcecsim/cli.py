"""Command-line interface.

Subcommands: ``analytic``, ``simulate``, ``sweep <name>``, ``validate-bounds``
and ``optimal-k``.  Exit codes: 0 success, 1 validation error, 2 bound
violation, 3 I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import experiments
from .config import Config, config_from_dict, load_config
from .experiments import (PRESET_NAMES, evaluate_analytic, evaluate_simulated,
                          optimal_k_report, preset, spec_from_file,
                          validate_bounds, write_csv)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BOUND_VIOLATION = 2
EXIT_IO = 3


def _load(args) -> Config:
    if args.config is None:
        return config_from_dict({})
    return load_config(args.config)


def _apply_overrides(cfg: Config, args) -> Config:
    n_drops = args.drops if args.drops is not None else cfg.n_drops
    seed = args.seed if args.seed is not None else cfg.seed
    return replace(cfg, n_drops=n_drops, seed=seed)


def _print_row(row: dict, label: str) -> None:
    print(f"--- {label}")
    print(f"  F={row['F']:.6f}  P_m={row['P_m']:.6f}")
    for key in ("R_B", "R_N", "R_C", "R_D"):
        ci = row.get(f"ci_{key}", 0.0)
        extra = f" +- {ci / 1e9:.4f}" if ci else ""
        print(f"  {key} = {row[key] / 1e9:.4f}{extra} Gbit/s")
    print(f"  D_total = {row['D_total']:.6f} s  "
          f"(backhaul {row['D_backhaul']:.6f}, nearest {row['D_nearest']:.6f}, "
          f"cluster {row['D_cluster']:.6f}, d2d {row['D_d2d']:.6f})")


def cmd_analytic(args) -> int:
    cfg = _apply_overrides(_load(args), args)
    for policy in args.policies.split(","):
        row = evaluate_analytic(cfg, policy.strip().upper())
        row["sweep_value"] = 0
        _print_row(row, f"analytic [{policy.strip().upper()}]")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_csv(os.path.join(args.out, f"analytic__{policy.strip().upper()}.csv"),
                      [row])
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(_load(args), args)
    for policy in args.policies.split(","):
        policy = policy.strip().upper()
        drop_log = [] if args.dump_samples else None
        row = evaluate_simulated(cfg, policy, cfg.n_drops, cfg.seed,
                                 threads=args.threads, drop_log=drop_log)
        row["sweep_value"] = 0
        _print_row(row, f"simulate [{policy}] n={cfg.n_drops} seed={cfg.seed}")
        if args.dump_samples:
            from .montecarlo import dump_samples
            dump_samples(drop_log, args.dump_samples)
            print(f"wrote {args.dump_samples}")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_csv(os.path.join(args.out, f"simulate__{policy}.csv"), [row])
    if args.dump_drop:
        import numpy as np

        from .geometry import drop_to_rows, sample_drop
        drop = sample_drop(cfg.params, np.random.default_rng((cfg.seed, 0)))
        with open(args.dump_drop, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("kind,x,y,pair_id\n")
            for kind, x, y, pair_id in drop_to_rows(drop):
                fh.write(f"{kind},{x:.12g},{y:.12g},{pair_id}\n")
        print(f"wrote {args.dump_drop}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(_load(args), args)
    if args.name.endswith(".json") or os.path.sep in args.name:
        spec = spec_from_file(args.name, cfg.n_drops, cfg.seed)
        # explicit flags take precedence over the fragment's own values
        overrides = {}
        if args.drops is not None:
            overrides["n_drops"] = args.drops
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            spec = replace(spec, **overrides)
    else:
        spec = preset(args.name, cfg, cfg.n_drops, cfg.seed)
    os.makedirs(args.out, exist_ok=True)
    paths = experiments.run(spec, cfg, args.out, threads=args.threads)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def _parse_grid(text: str):
    # "alpha:1.4,1.6,2;lambda:80,160,240,320,400;K:1,2,4"
    parts = dict(p.split(":", 1) for p in text.split(";"))
    alphas = [float(x) for x in parts["alpha"].split(",")]
    lams = [float(x) for x in parts["lambda"].split(",")]
    ks = [int(x) for x in parts["K"].split(",")]
    return [(a, l, k) for a in alphas for l in lams for k in ks]


def cmd_validate_bounds(args) -> int:
    cfg = _apply_overrides(_load(args), args)
    grid = _parse_grid(args.grid)
    checks = validate_bounds(cfg, grid, cfg.n_drops, cfg.seed,
                             threads=args.threads)
    header = (f"{'alpha':>6} {'lamBS':>6} {'K':>3} {'link':>4} "
              f"{'bound(G)':>10} {'sim(G)':>10} {'ci(G)':>8} {'gap%':>8} ok")
    print(header)
    any_bad = False
    for c in checks:
        print(f"{c.alpha:6.2f} {c.lambda_bs_km2:6.0f} {c.k_cluster:3d} "
              f"{c.link:>4} {c.bound / 1e9:10.4f} {c.sim_mean / 1e9:10.4f} "
              f"{c.sim_ci / 1e9:8.4f} {c.gap_pct:8.2f} {'yes' if c.ok else 'NO'}")
        any_bad |= not c.ok
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "validate_bounds.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("alpha,lambda_BS,K,link,bound,sim_mean,sim_ci,gap_pct,ok\n")
            for c in checks:
                fh.write(f"{c.alpha:.12g},{c.lambda_bs_km2:.12g},{c.k_cluster},"
                         f"{c.link},{c.bound:.12g},{c.sim_mean:.12g},"
                         f"{c.sim_ci:.12g},{c.gap_pct:.12g},{int(c.ok)}\n")
        print(f"wrote {path}")
    if any_bad:
        print("bound violation detected", file=sys.stderr)
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def cmd_optimal_k(args) -> int:
    cfg = _apply_overrides(_load(args), args)
    lo, hi = (int(x) for x in args.k_range.split(":", 1))
    b_values = [float(x) for x in args.b_values.split(",")]
    rows = optimal_k_report(cfg, range(lo, hi + 1), b_values)
    print(f"{'B(G)':>8} {'K*':>4} {'D(s)':>10}")
    for row in rows:
        print(f"{row['B'] / 1e9:8.2f} {row['K_star']:4d} {row['D_at_K_star']:10.6f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "optimal_k.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("B,K_star,D_at_K_star\n")
            for row in rows:
                fh.write(f"{row['B']:.12g},{row['K_star']},"
                         f"{row['D_at_K_star']:.12g}\n")
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dcecsim",
        description="Cooperative edge caching in mmWave dense networks: "
                    "closed-form performance model and Monte Carlo simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sim=False):
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory for CSV files")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--drops", type=int, default=None)
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (wall time only; never output)")

    p = sub.add_parser("analytic", help="closed-form rates and delay")
    common(p)
    p.add_argument("--policies", default="DCEC")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo rates and delay")
    common(p)
    p.add_argument("--policies", default="DCEC")
    p.add_argument("--dump-samples", metavar="FILE",
                   help="write per-drop samples (drop,class,rate_bps,load)")
    p.add_argument("--dump-drop", metavar="FILE",
                   help="write one sampled topology (kind,x,y,pair_id)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep",
                       help="run a named preset or a JSON sweep file")
    p.add_argument("name",
                   help=f"one of {', '.join(PRESET_NAMES)}, or a path to a "
                        f"JSON sweep definition")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate-bounds",
                       help="analytic bounds vs simulation on a grid")
    common(p)
    p.add_argument("--grid",
                   default="alpha:1.4,1.6,2;lambda:80,160,240,320,400;K:1,2,4")
    p.set_defaults(func=cmd_validate_bounds)

    p = sub.add_parser("optimal-k", help="optimal cluster size vs backhaul")
    common(p)
    p.add_argument("--k-range", default="1:8")
    p.add_argument("--b-values", default="2e9,3e9,4e9,8e9,16e9")
    p.set_defaults(func=cmd_optimal_k)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
