"""Benchmark and diagnostic reports: timing against the multi-restart
baseline, direction correlation profiles, and matched-step residual
contrast, with CSV/JSON writers and a run manifest.

All stochastic inputs come from the experiment config, so everything except
wall-clock columns is reproducible byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import generator as gen
from . import inversion as inv
from . import operators as ops
from . import perceptual as perc
from .config import ExperimentConfig
from .explore import (
    ExplorationDirection,
    ExplorationResult,
    build_direction,
    default_k_top,
    eta_scale_for,
    explore,
    select_K,
)
from .metrics import LatentMetricPair, anisotropy_profile, coupling, latent_metrics


@dataclass
class BenchContext:
    """One fully prepared problem instance shared by all reports."""

    config: ExperimentConfig
    g: gen.GeneratorInstance
    z_true: np.ndarray
    y: ops.MeasurementVector
    z0: np.ndarray
    trace: inv.InversionTrace
    metrics: LatentMetricPair
    inversion_seconds: float
    metrics_seconds: float


@dataclass
class BenchReport:
    method: str
    per_solution_seconds: List[float]
    total_seconds: float
    feasible_count: int
    diversity: float  # mean pairwise perceptual distance over feasible x
    residual_min: float
    residual_max: float

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "per_solution_seconds": self.per_solution_seconds,
            "total_seconds": self.total_seconds,
            "feasible_count": self.feasible_count,
            "diversity": self.diversity,
            "residual_min": self.residual_min,
            "residual_max": self.residual_max,
        }


@dataclass
class TimingResult:
    explored: BenchReport
    baseline: BenchReport
    speedup: Optional[float]  # baseline_total / explored_total; None if undefined
    flags: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "explored": self.explored.to_json(),
            "baseline": self.baseline.to_json(),
            "speedup": self.speedup,
            "flags": self.flags,
        }


def truth_latent(config: ExperimentConfig) -> np.ndarray:
    rng = np.random.default_rng(config.truth_seed)
    return config.truth_scale * rng.standard_normal(config.generator.latent_dim)


def prepare(config: ExperimentConfig) -> BenchContext:
    """Instantiate the generator, measure a seeded truth, invert once, and
    freeze the latent metrics at the base solution."""
    g = gen.instantiate(config.generator)
    z_true = truth_latent(config)
    y = ops.measure(
        config.operator, gen.generate(g, z_true), config.noise_sigma, config.noise_seed
    )
    # materializing the feature map is fixed preprocessing shared by both
    # methods; build it before the timers so neither side pays for it
    perc.get_extractor(config.features, config.generator.signal_shape)
    t0 = time.monotonic()
    z0, trace = inv.invert(y, config.operator, g, config.inversion)
    t1 = time.monotonic()
    metrics = latent_metrics(g, config.operator, config.features, z0)
    t2 = time.monotonic()
    return BenchContext(
        config=config,
        g=g,
        z_true=z_true,
        y=y,
        z0=z0,
        trace=trace,
        metrics=metrics,
        inversion_seconds=t1 - t0,
        metrics_seconds=t2 - t1,
    )


def _diversity(fe: perc.FeatureExtractorSpec, xs: List[gen.SignalTensor]) -> float:
    if len(xs) < 2:
        return 0.0
    pds = [
        perc.perceptual_distance(fe, xs[i], xs[j])
        for i in range(len(xs))
        for j in range(i + 1, len(xs))
    ]
    return float(np.mean(pds))


def explored_report(ctx: BenchContext, result: ExplorationResult) -> BenchReport:
    cfg = ctx.config
    feasible = [r for r in result.records if r.feasible]
    # elapsed_s is cumulative within the exploration run
    marks = [r.elapsed_s for r in result.records]
    per = [b - a for a, b in zip([0.0] + marks[:-1], marks)]
    residuals = [r.measurement_residual for r in result.records]
    return BenchReport(
        method="explored",
        per_solution_seconds=per,
        total_seconds=ctx.inversion_seconds + ctx.metrics_seconds + result.wall_seconds,
        feasible_count=len(feasible),
        diversity=_diversity(cfg.features, [r.x for r in feasible]),
        residual_min=float(min(residuals)) if residuals else float("nan"),
        residual_max=float(max(residuals)) if residuals else float("nan"),
    )


def baseline_report(ctx: BenchContext) -> BenchReport:
    cfg = ctx.config
    runs = inv.multi_restart_invert(
        ctx.y, cfg.operator, ctx.g, cfg.inversion, cfg.n_solutions
    )
    threshold = cfg.exploration.feasibility_threshold
    xs, residuals, per = [], [], []
    for z, trace in runs:
        per.append(trace.wall_seconds)
        if z is None or not trace.residuals:
            continue
        residuals.append(trace.residuals[-1])
        if trace.residuals[-1] <= threshold:
            xs.append(gen.generate(ctx.g, z))
    return BenchReport(
        method="baseline",
        per_solution_seconds=per,
        total_seconds=float(sum(per)),
        feasible_count=len(xs),
        diversity=_diversity(cfg.features, xs),
        residual_min=float(min(residuals)) if residuals else float("nan"),
        residual_max=float(max(residuals)) if residuals else float("nan"),
    )


def run_timing(ctx: BenchContext) -> TimingResult:
    """Time producing n_solutions by latent exploration versus re-solving
    from scratch for each one. Sequential wall clock; pin BLAS threads to 1
    outside this call for a fair single-threaded comparison."""
    cfg = ctx.config
    result = explore(
        ctx.g, cfg.operator, cfg.features, ctx.y, ctx.z0,
        cfg.exploration, cfg.n_solutions, ctx.metrics,
    )
    explored = explored_report(ctx, result)
    baseline = baseline_report(ctx)
    flags = []
    if not result.complete:
        flags.append(f"exploration incomplete: {result.diagnostic}")
    if baseline.feasible_count == 0:
        flags.append("baseline produced no feasible solutions; speedup undefined")
        speedup = None
    elif explored.total_seconds > 0:
        speedup = baseline.total_seconds / explored.total_seconds
    else:
        speedup = None
    return TimingResult(explored, baseline, speedup, flags)


def run_correlation_report(
    ctx: BenchContext, direction: Optional[ExplorationDirection] = None
) -> List[Dict[str, float]]:
    """Per-eigenindex correlation profile of the raw source vector v^K and
    the projected direction d against both eigenbases."""
    cfg = ctx.config
    mp = ctx.metrics
    if direction is None:
        direction = build_direction(mp, cfg.exploration)
    v_k = mp.eig_x.vector(direction.source_index)
    d = direction.d
    rows = []
    for j in range(1, mp.eig_y.dim + 1):
        rows.append({
            "j": j,
            "lambda_j": float(mp.eig_y.value(j)),
            "omega_j": float(mp.eig_x.value(j)),
            "abs_vK_dot_u": float(abs(v_k @ mp.eig_y.vector(j))),
            "abs_d_dot_u": float(abs(d @ mp.eig_y.vector(j))),
            "abs_vK_dot_v": float(abs(v_k @ mp.eig_x.vector(j))),
            "abs_d_dot_v": float(abs(d @ mp.eig_x.vector(j))),
            "removed": int(j in direction.removed_set),
        })
    return rows


def run_residual_contrast(
    ctx: BenchContext, direction: Optional[ExplorationDirection] = None
) -> List[Dict[str, float]]:
    """Matched-step comparison: stepping along the raw v^K breaks the
    measurements, stepping along the projected d keeps them."""
    cfg = ctx.config
    mp = ctx.metrics
    if direction is None:
        direction = build_direction(mp, cfg.exploration)
    v_k = mp.eig_x.vector(direction.source_index)
    scale = eta_scale_for(mp, direction.source_index)
    x0 = gen.generate(ctx.g, ctx.z0)
    rows = []
    for e in sorted(set(abs(e) for e in cfg.exploration.eta_grid if e != 0)):
        eta = e * scale
        out = {"eta": float(eta)}
        for tag, vec in (("raw", v_k), ("projected", direction.d)):
            x = gen.generate(ctx.g, ctx.z0 + eta * vec)
            out[f"{tag}_residual"] = ops.measurement_mse(
                ops.apply(cfg.operator, x).values, ctx.y.values
            )
            out[f"{tag}_perceptual"] = perc.perceptual_distance(cfg.features, x, x0)
        rows.append(out)
    return rows


def run_spectra(ctx: BenchContext) -> dict:
    mp = ctx.metrics
    prof_y = anisotropy_profile(mp.eig_y.eigenvalues)
    prof_x = anisotropy_profile(mp.eig_x.eigenvalues)
    c = coupling(mp.eig_y, mp.eig_x)
    params = ctx.config.exploration
    k_top = default_k_top(mp, params)
    return {
        "lambda": mp.eig_y.eigenvalues.tolist(),
        "omega": mp.eig_x.eigenvalues.tolist(),
        "lambda_cumulative": prof_y.cumulative_fraction.tolist(),
        "omega_cumulative": prof_x.cumulative_fraction.tolist(),
        "participation_ratio_y": prof_y.participation_ratio,
        "participation_ratio_x": prof_x.participation_ratio,
        "coupling": c.tolist(),
        "k_top": k_top,
        "suggested_K": select_K(c, params, k_top),
    }


def write_csv(path: str, rows: List[dict]) -> None:
    if not rows:
        raise ValueError("nothing to write")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def write_json(path: str, obj: dict) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(outdir: str, config: ExperimentConfig, outputs: List[str]) -> str:
    """Atomically write a manifest tying every artifact to the config hash."""
    manifest = {
        "config_hash": config.config_hash(),
        "config": config.to_json(),
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    path = os.path.join(outdir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path
