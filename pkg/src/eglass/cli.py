"""Command line entry point.

Subcommands: invert, explore, spectra, bench, serve. Reports land in the
output directory as delimited text plus JSON, with figures rendered next to
them and a manifest tying everything to the config hash.

Exit codes: 0 success, 1 error (bad config, divergence), 2 partial result
(exploration ran out of directions before filling the solution budget).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL = 2

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eglass",
        description="explore alternative solutions to inverse problems "
        "in a generator's latent space",
    )
    src = parser.add_mutually_exclusive_group()
    src.add_argument("--config", help="experiment config JSON file")
    src.add_argument("--preset", choices=("sr", "ip", "cs"),
                     help="built-in problem preset")
    parser.add_argument("--seed", type=int, default=None,
                        help="override every stochastic seed from one value")
    parser.add_argument("--threads", type=int, default=1,
                        help="BLAS/OpenMP thread cap (default 1)")
    parser.add_argument("--outdir", default="runs", help="report directory")
    parser.add_argument("--quiet", action="store_true", help="suppress progress lines")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("invert", help="recover the base latent solution")
    p_explore = sub.add_parser("explore", help="emit alternative solutions")
    p_explore.add_argument("--n-solutions", type=int, default=None)
    sub.add_parser("spectra", help="report metric spectra and coupling")
    sub.add_parser("bench", help="timing and diagnostic reports")
    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8710)
    return parser


def _load(args):
    from . import config as cfgm

    if args.config:
        cfg = cfgm.load_config(args.config)
    else:
        cfg = cfgm.preset(args.preset or "sr")
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _write_jsonl(path: str, rows) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def cmd_invert(args, cfg) -> int:
    from . import bench

    ctx = bench.prepare(cfg)
    out = args.outdir
    os.makedirs(out, exist_ok=True)
    _write_jsonl(os.path.join(out, "trace.jsonl"), ctx.trace.records())
    base = {
        "z0": ctx.z0.tolist(),
        "residual": ctx.trace.residuals[-1],
        "converged": ctx.trace.converged,
        "iterations": len(ctx.trace.residuals),
        "wall_seconds": ctx.trace.wall_seconds,
    }
    bench.write_json(os.path.join(out, "base_solution.json"), base)
    bench.write_manifest(out, cfg, ["trace.jsonl", "base_solution.json"])
    _say(args, f"residual {base['residual']:.3e} after {base['iterations']} iterations")
    if not ctx.trace.converged:
        print("inversion did not converge", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_explore(args, cfg) -> int:
    import csv

    from . import bench, plots
    from .explore import explore

    if args.n_solutions is not None:
        from dataclasses import replace

        cfg = replace(cfg, n_solutions=args.n_solutions)
    ctx = bench.prepare(cfg)
    result = explore(
        ctx.g, cfg.operator, cfg.features, ctx.y, ctx.z0,
        cfg.exploration, cfg.n_solutions, ctx.metrics,
    )
    out = args.outdir
    os.makedirs(out, exist_ok=True)
    _write_jsonl(os.path.join(out, "solutions.jsonl"),
                 [r.to_json() for r in result.records])
    summary = [
        {
            "direction_id": r.direction_id,
            "eta": r.eta,
            "measurement_residual": r.measurement_residual,
            "perceptual_from_base": r.perceptual_from_base,
            "feasible": int(r.feasible),
        }
        for r in result.records
    ]
    outputs = ["solutions.jsonl"]
    if summary:
        with open(os.path.join(out, "summary.csv"), "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
            writer.writeheader()
            writer.writerows(summary)
        outputs.append("summary.csv")
        plots.solution_gallery(
            [r.x.values for r in result.records],
            cfg.generator.signal_shape,
            os.path.join(out, "solutions.png"),
        )
        outputs.append("solutions.png")
    bench.write_manifest(out, cfg, outputs)
    feasible = sum(r.feasible for r in result.records)
    _say(args, f"{feasible} feasible of {len(result.records)} records "
               f"({result.diagnostic})")
    return EXIT_OK if result.complete else EXIT_PARTIAL


def cmd_spectra(args, cfg) -> int:
    from . import bench, plots

    ctx = bench.prepare(cfg)
    spectra = bench.run_spectra(ctx)
    out = args.outdir
    os.makedirs(out, exist_ok=True)
    bench.write_json(os.path.join(out, "spectra.json"), spectra)
    plots.spectra_figure(spectra, os.path.join(out, "spectra.png"))
    bench.write_manifest(out, cfg, ["spectra.json", "spectra.png"])
    _say(args, f"k_top {spectra['k_top']}, suggested source index "
               f"{spectra['suggested_K']}")
    return EXIT_OK


def cmd_bench(args, cfg) -> int:
    from . import bench, plots

    ctx = bench.prepare(cfg)
    timing = bench.run_timing(ctx)
    corr = bench.run_correlation_report(ctx)
    contrast = bench.run_residual_contrast(ctx)
    spectra = bench.run_spectra(ctx)
    out = args.outdir
    os.makedirs(out, exist_ok=True)
    bench.write_json(os.path.join(out, "timing.json"), timing.to_json())
    bench.write_csv(os.path.join(out, "correlation.csv"), corr)
    bench.write_csv(os.path.join(out, "contrast.csv"), contrast)
    bench.write_json(os.path.join(out, "spectra.json"), spectra)
    plots.spectra_figure(spectra, os.path.join(out, "spectra.png"))
    plots.correlation_figure(corr, cfg.exploration.tau,
                             os.path.join(out, "correlation.png"))
    plots.contrast_figure(contrast, cfg.exploration.feasibility_threshold,
                          os.path.join(out, "contrast.png"))
    bench.write_manifest(out, cfg, [
        "timing.json", "correlation.csv", "contrast.csv", "spectra.json",
        "spectra.png", "correlation.png", "contrast.png",
    ])
    if timing.speedup is None:
        _say(args, f"speedup undefined ({'; '.join(timing.flags)})")
    else:
        _say(args, f"speedup {timing.speedup:.2f}x "
                   f"({timing.explored.total_seconds:.2f}s vs "
                   f"{timing.baseline.total_seconds:.2f}s)")
    for flag in timing.flags:
        print(f"warning: {flag}", file=sys.stderr)
    return EXIT_OK if not timing.flags else EXIT_PARTIAL


def cmd_serve(args, cfg) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(cfg)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    for var in _THREAD_VARS:
        os.environ.setdefault(var, str(args.threads))

    try:
        from .inversion import InversionDivergence

        cfg = _load(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR

    handlers = {
        "invert": cmd_invert,
        "explore": cmd_explore,
        "spectra": cmd_spectra,
        "bench": cmd_bench,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args, cfg)
    except (ValueError, InversionDivergence) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
