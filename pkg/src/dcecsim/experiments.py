"""Named experiment sweeps, CSV emission and the bound-validation report.

Every sweep preset is a function of the base configuration returning an
:class:`ExperimentSpec`; the CLI exposes them by name.  Output CSVs are
deterministic for a fixed config and seed (fixed column order, fixed float
formatting, LF line endings).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

from . import analytic
from .config import Config
from .montecarlo import run_experiment, run_rate_grid
from .popularity import (CacheConfig, build_placement, request_probabilities,
                         zipf_popularity)

CSV_COLUMNS = ("sweep_value", "F", "P_m", "R_B", "R_N", "R_C", "R_D",
               "D_total", "D_backhaul", "D_nearest", "D_cluster", "D_d2d",
               "ci_R_B", "ci_R_N", "ci_R_C", "ci_R_D", "ci_D_total")

SWEPT_VARIABLES = ("xi", "lambda_BS", "lambda_UE", "K", "B", "C_s")
MODES = ("analytic", "simulate", "both")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    swept_variable: str
    values: tuple
    policies: tuple = ("DCEC",)
    mode: str = "analytic"
    n_drops: int = 10000
    seed: int = 1
    couple_ue_density: bool = True  # density sweeps keep lambda_UE/lambda_BS fixed

    def __post_init__(self):
        if self.swept_variable not in SWEPT_VARIABLES:
            raise ValueError(f"unknown swept variable: {self.swept_variable!r}")
        if not self.values:
            raise ValueError("sweep values must not be empty")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode: {self.mode!r}")
        for p in self.policies:
            if p not in ("DCEC", "MPC"):
                raise ValueError(f"unknown policy: {p!r}")
        if self.n_drops < 1:
            raise ValueError("n_drops must be >= 1")


def _apply_sweep(cfg: Config, swept: str, value, couple: bool) -> Config:
    """Return a copy of the configuration with one swept variable applied."""
    params, catalog, cache = cfg.params, cfg.catalog, cfg.cache
    if swept == "xi":
        catalog = zipf_popularity(catalog.size, float(value))
    elif swept == "lambda_BS":
        new_bs = float(value) * 1e-6
        if couple:
            ratio = params.ue_density_lambda_UE / params.sbs_density_lambda_BS
            params = params.with_(sbs_density_lambda_BS=new_bs,
                                  ue_density_lambda_UE=ratio * new_bs)
        else:
            params = params.with_(sbs_density_lambda_BS=new_bs)
    elif swept == "lambda_UE":
        params = params.with_(ue_density_lambda_UE=float(value) * 1e-6)
    elif swept == "K":
        cache = CacheConfig(cache.user_capacity, cache.sbs_capacity, int(value))
    elif swept == "B":
        params = params.with_(backhaul_capacity_B=float(value))
    elif swept == "C_s":
        cache = CacheConfig(cache.user_capacity, int(value), cache.cluster_size)
    else:
        raise ValueError(f"unknown swept variable: {swept!r}")
    return replace(cfg, params=params, catalog=catalog, cache=cache)


def evaluate_analytic(cfg: Config, policy: str) -> dict:
    """One analytic row: offloading, rates and delay decomposition."""
    params, catalog, cache = cfg.params, cfg.catalog, cfg.cache
    probs = request_probabilities(catalog, cache, params.paired_fraction_delta,
                                  policy)
    k = cache.cluster_size if policy == "DCEC" else 1
    rates = analytic.rate_bounds(params, probs, k)
    delay = analytic.content_delay(params, probs, rates)
    f = 1.0 - probs.p_miss
    return {
        "F": f, "P_m": probs.p_miss,
        "R_B": rates.backhaul, "R_N": rates.nearest_lb,
        "R_C": rates.cluster_lb, "R_D": rates.d2d_lb,
        "D_total": delay.total, "D_backhaul": delay.backhaul,
        "D_nearest": delay.nearest, "D_cluster": delay.cluster,
        "D_d2d": delay.d2d,
        "ci_R_B": 0.0, "ci_R_N": 0.0, "ci_R_C": 0.0, "ci_R_D": 0.0,
        "ci_D_total": 0.0,
    }


def evaluate_simulated(cfg: Config, policy: str, n_drops: int, seed: int,
                       threads: int = 1, drop_log: list | None = None) -> dict:
    """One simulated row: empirical mean rates and the delay built on them."""
    params, catalog, cache = cfg.params, cfg.catalog, cfg.cache
    probs = request_probabilities(catalog, cache, params.paired_fraction_delta,
                                  policy)
    placement = build_placement(catalog, cache, policy)
    summary = run_experiment(params, catalog, placement, probs, n_drops, seed,
                             threads=threads,
                             interference_mode=cfg.interference_mode,
                             drop_log=drop_log)
    nu = params.content_size_nu
    legs = {}
    for leg, prob, stat in (("D_backhaul", probs.p_miss, summary.backhaul),
                            ("D_nearest", probs.p_miss, summary.nearest),
                            ("D_cluster", probs.p_cluster, summary.cluster),
                            ("D_d2d", probs.p_d2d, summary.d2d)):
        if prob > 0.0 and stat.count > 0 and stat.mean > 0.0:
            legs[leg] = prob * nu / stat.mean
        elif prob == 0.0:
            legs[leg] = 0.0
        else:
            legs[leg] = math.nan
    total = sum(legs.values())
    return {
        "F": 1.0 - probs.p_miss, "P_m": probs.p_miss,
        "R_B": summary.backhaul.mean, "R_N": summary.nearest.mean,
        "R_C": summary.cluster.mean, "R_D": summary.d2d.mean,
        "D_total": total, **legs,
        "ci_R_B": summary.backhaul.ci, "ci_R_N": summary.nearest.ci,
        "ci_R_C": summary.cluster.ci, "ci_R_D": summary.d2d.ci,
        "ci_D_total": summary.delay.ci,
    }


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".12g")
    return str(x)


def write_csv(path: str, rows: list[dict]) -> None:
    """Write sweep rows with the fixed column set, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in CSV_COLUMNS) + "\n")


def run(spec: ExperimentSpec, cfg: Config, out_dir: str,
        threads: int = 1) -> list[str]:
    """Run one sweep; emit one CSV per (policy, mode).  Returns paths."""
    modes = ("analytic", "simulate") if spec.mode == "both" else (spec.mode,)
    paths = []
    for policy in spec.policies:
        for mode in modes:
            rows = []
            for value in spec.values:
                point = _apply_sweep(cfg, spec.swept_variable, value,
                                     spec.couple_ue_density)
                if mode == "analytic":
                    row = evaluate_analytic(point, policy)
                else:
                    row = evaluate_simulated(point, policy, spec.n_drops,
                                             spec.seed, threads)
                row["sweep_value"] = value
                rows.append(row)
            path = os.path.join(out_dir, f"{spec.name}__{policy}__{mode}.csv")
            write_csv(path, rows)
            paths.append(path)
    return paths


# --- named presets ---------------------------------------------------------

def _xi_values():
    return tuple(round(0.1 * i, 2) for i in range(1, 13))


def preset(name: str, cfg: Config, n_drops: int, seed: int) -> ExperimentSpec:
    """Instantiate a named sweep against the base configuration."""
    common = dict(name=name, n_drops=n_drops, seed=seed)
    if name == "offloading_vs_xi":
        return ExperimentSpec(swept_variable="xi", values=_xi_values(),
                              policies=("DCEC", "MPC"), mode="analytic", **common)
    if name == "offloading_vs_cs":
        return ExperimentSpec(swept_variable="C_s",
                              values=(50, 100, 150, 200, 250, 300, 350, 400),
                              policies=("DCEC", "MPC"), mode="analytic", **common)
    if name == "offloading_vs_k":
        return ExperimentSpec(swept_variable="K", values=(1, 2, 3, 4, 5, 6, 7, 8),
                              policies=("DCEC",), mode="analytic", **common)
    if name == "nearest_rate_vs_density":
        return ExperimentSpec(swept_variable="lambda_BS",
                              values=(80, 160, 240, 320, 400),
                              policies=("DCEC",), mode="both", **common)
    if name == "cluster_rate_vs_density":
        return ExperimentSpec(swept_variable="lambda_BS",
                              values=(80, 160, 240, 320, 400),
                              policies=("DCEC",), mode="both", **common)
    if name == "cluster_rate_vs_k":
        return ExperimentSpec(swept_variable="K", values=(1, 2, 3, 4, 5, 6, 7, 8),
                              policies=("DCEC",), mode="both", **common)
    if name == "d2d_rate_vs_density":
        # sweep the user density so the busy-pair density P_d * lambda_UE
        # lands on round targets per km^2
        probs = request_probabilities(cfg.catalog, cfg.cache,
                                      cfg.params.paired_fraction_delta, "DCEC")
        targets = (40, 120, 200, 280, 360, 440, 520, 600, 680, 800)
        values = tuple(round(t / probs.p_d2d, 3) for t in targets)
        return ExperimentSpec(swept_variable="lambda_UE", values=values,
                              policies=("DCEC",), mode="both", **common)
    if name == "delay_vs_xi":
        return ExperimentSpec(swept_variable="xi", values=_xi_values(),
                              policies=("DCEC", "MPC"), mode="analytic", **common)
    if name == "delay_vs_density":
        return ExperimentSpec(swept_variable="lambda_BS",
                              values=(80, 160, 240, 320, 400),
                              policies=("DCEC", "MPC"), mode="both", **common)
    if name == "delay_vs_backhaul":
        return ExperimentSpec(swept_variable="B",
                              values=(1e9, 2e9, 4e9, 8e9, 12e9, 16e9),
                              policies=("DCEC", "MPC"), mode="analytic", **common)
    if name == "delay_vs_k":
        return ExperimentSpec(swept_variable="K", values=(1, 2, 3, 4, 5, 6, 7, 8),
                              policies=("DCEC",), mode="analytic", **common)
    raise ValueError(f"unknown sweep preset: {name!r}")


PRESET_NAMES = ("offloading_vs_xi", "offloading_vs_cs", "offloading_vs_k",
                "nearest_rate_vs_density", "cluster_rate_vs_density",
                "cluster_rate_vs_k", "d2d_rate_vs_density", "delay_vs_xi",
                "delay_vs_density", "delay_vs_backhaul", "delay_vs_k")

_SPEC_KEYS = {"name", "swept_variable", "values", "policies", "mode",
              "n_drops", "seed", "couple_ue_density"}


def spec_from_file(path: str, default_drops: int, default_seed: int) -> ExperimentSpec:
    """Load a custom sweep definition from a JSON fragment.

    Expected shape (``policies``/``mode``/``n_drops``/``seed``/
    ``couple_ue_density`` optional):

        {"name": "my_sweep", "swept_variable": "K",
         "values": [1, 2, 4], "policies": ["DCEC", "MPC"],
         "mode": "analytic"}
    """
    import json

    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown key(s) in sweep file: {sorted(unknown)}")
    for key in ("name", "swept_variable", "values"):
        if key not in doc:
            raise ValueError(f"sweep file missing required key {key!r}")
    return ExperimentSpec(
        name=str(doc["name"]),
        swept_variable=str(doc["swept_variable"]),
        values=tuple(doc["values"]),
        policies=tuple(doc.get("policies", ("DCEC",))),
        mode=str(doc.get("mode", "analytic")),
        n_drops=int(doc.get("n_drops", default_drops)),
        seed=int(doc.get("seed", default_seed)),
        couple_ue_density=bool(doc.get("couple_ue_density", True)),
    )


# --- validation report -----------------------------------------------------

@dataclass(frozen=True)
class BoundCheck:
    alpha: float
    lambda_bs_km2: float
    k_cluster: int
    link: str
    bound: float
    sim_mean: float
    sim_ci: float
    gap_pct: float
    ok: bool


def validate_bounds(cfg: Config, grid, n_drops: int, seed: int,
                    threads: int = 1) -> list[BoundCheck]:
    """Check every analytic rate lower bound against the simulated mean.

    ``grid`` yields (alpha, lambda_BS per km^2, K).  A bound passes when it
    does not exceed the simulated mean by more than two standard errors.
    Simulation samples are produced by the shared-topology grid runner.
    """
    grid = [(float(a), float(l), int(k)) for a, l, k in grid]
    alphas = sorted({a for a, _, _ in grid})
    lams = sorted({l for _, l, _ in grid})
    ks = sorted({k for _, _, k in grid})
    stats = run_rate_grid(cfg.params, cfg.catalog, cfg.cache, alphas, lams,
                          ks, n_drops, seed)
    checks = []
    for alpha, lam_km2, k in grid:
        point = _apply_sweep(cfg, "lambda_BS", lam_km2, couple=True)
        point = replace(point,
                        params=point.params.with_(pathloss_exp_alpha=alpha),
                        cache=CacheConfig(point.cache.user_capacity,
                                          point.cache.sbs_capacity, k))
        params, catalog, cache = point.params, point.catalog, point.cache
        probs = request_probabilities(catalog, cache,
                                      params.paired_fraction_delta, "DCEC")
        cell = stats[(alpha, lam_km2, k)]
        bounds = analytic.rate_bounds(params, probs, cache.cluster_size)
        for link, bound, stat in (("R_N", bounds.nearest_lb, cell.nearest),
                                  ("R_C", bounds.cluster_lb, cell.cluster),
                                  ("R_D", bounds.d2d_lb, cell.d2d)):
            ok = bound <= stat.mean + 2.0 * stat.stderr
            gap = (stat.mean - bound) / bound * 100.0 if bound > 0 else math.inf
            checks.append(BoundCheck(alpha=alpha, lambda_bs_km2=lam_km2,
                                     k_cluster=k, link=link, bound=bound,
                                     sim_mean=stat.mean, sim_ci=stat.ci,
                                     gap_pct=gap, ok=bool(ok)))
    return checks


def optimal_k_report(cfg: Config, k_range, b_values) -> list[dict]:
    """Rows (B, K*, D_at_K*) using the analytic delay."""
    rows = []
    for b in b_values:
        point = _apply_sweep(cfg, "B", b, couple=True)
        k_star = analytic.optimal_cluster_size(point.params, point.catalog,
                                               point.cache, k_range)
        best = CacheConfig(point.cache.user_capacity, point.cache.sbs_capacity,
                           k_star)
        delay = analytic.policy_delay(point.params, point.catalog, best, "DCEC")
        rows.append({"B": float(b), "K_star": k_star, "D_at_K_star": delay.total})
    return rows
