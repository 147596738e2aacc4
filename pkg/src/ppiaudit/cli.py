"""Command-line entry point: run, benchmark, ablate, grid, slpa, mcl.

Exit codes: 0 success, 2 missing or unreadable input (or bad config),
3 empty gold standard after filtering.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from . import _accel
from .annotations import AnnotationError, GoldError
from .config import ConfigError, load_config
from .embeddings import CACHE_ENV, clear_cache
from .evaluation import benchmark, write_benchmark
from .mcl import run_mcl, write_partition
from .pipeline import (
    ABLATIONS, GRID_PARAMS, InputError, full_benchmark, load_inputs, run_ablation, run_grid,
    run_pipeline, run_slpa_baseline, write_run_outputs,
)

logger = logging.getLogger("ppiaudit")

EXIT_INPUT = 2
EXIT_EMPTY_GOLD = 3

# flag -> config key for the supplementation caps
SUPPLEMENT_FLAGS = {
    "max_rel_growth": "echo.max_rel_growth",
    "max_added": "echo.max_added",
    "min_gain": "echo.min_gain",
    "gate_topo": "echo.gate_topo",
    "gate_sem": "echo.gate_sem",
    "gate_go": "echo.gate_go",
}


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("inputs and run control")
    g.add_argument("--config", "-c", help="flat key = value config file")
    g.add_argument("--edges", help="edge list (tab/whitespace separated)")
    g.add_argument("--gaf", help="GO annotation file (GAF 2.x)")
    g.add_argument("--gold", help="reference complexes, one per line")
    g.add_argument("--terms", help="GO term labels (OBO or two-column TSV), optional")
    g.add_argument("--dataset", help="output subdirectory name")
    g.add_argument("--out", help="output root directory (default: out)")
    g.add_argument("--seed", type=int, help="seed for embeddings, SLPA and splits (default 42)")
    g.add_argument("--threads", type=int, help="kernel threads; outputs do not depend on it")
    g.add_argument("--no-timing", action="store_true",
                   help="omit runtime fields so repeated runs are byte-identical")
    g.add_argument("--clear-embedding-cache", action="store_true",
                   help=f"drop cached embeddings before running (cache dir from ${CACHE_ENV})")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; repeatable")
    g.add_argument("-v", "--verbose", action="count", default=0)
    s = p.add_argument_group("supplementation caps")
    s.add_argument("--max-rel-growth", type=float, help="relative size cap (default 0.15)")
    s.add_argument("--max-added", type=int, help="absolute additions cap (default 2)")
    s.add_argument("--min-gain", type=float, help="minimum evidence gain (default 0.38)")
    s.add_argument("--gate-topo", type=float, help="topology gate (default 0.12)")
    s.add_argument("--gate-sem", type=float, help="semantic gate (default 0.28)")
    s.add_argument("--gate-go", type=float, help="GO gate (default 0.25)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppiaudit",
        description="Overlapping module detection with per-assignment evidence bundles and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="full pipeline; writes communities, bundles and reports")
    _common(p)

    p = sub.add_parser("benchmark", help="all methods and ablations plus held-out splits")
    _common(p)

    p = sub.add_parser("ablate", help="ablation benchmark rows")
    _common(p)
    p.add_argument("--mode", action="append", choices=[*ABLATIONS, "all"], required=True)

    p = sub.add_parser("grid", help="one benchmark row per parameter value")
    _common(p)
    p.add_argument("--param", choices=GRID_PARAMS, required=True)
    p.add_argument("--values", required=True, help="comma-separated values, e.g. 1.4,2.0,3.0")

    p = sub.add_parser("slpa", help="SLPA baseline only")
    _common(p)
    p.add_argument("--threshold", type=float, help="memory frequency threshold (default 0.1)")
    p.add_argument("--iterations", type=int, help="propagation steps (default 100)")

    p = sub.add_parser("mcl", help="MCL baseline only")
    _common(p)
    p.add_argument("--inflation", type=float, help="inflation power (default 2.0)")
    return parser


def config_from_args(args: argparse.Namespace):
    overrides = {
        "edges": args.edges, "gaf": args.gaf, "gold": args.gold, "terms": args.terms,
        "dataset": args.dataset, "out": args.out, "seed": args.seed, "threads": args.threads,
    }
    for flag, key in SUPPLEMENT_FLAGS.items():
        overrides[key] = getattr(args, flag)
    if args.no_timing:
        overrides["timing"] = False
    if getattr(args, "threshold", None) is not None:
        overrides["slpa.threshold"] = args.threshold
    if getattr(args, "iterations", None) is not None:
        overrides["slpa.iterations"] = args.iterations
    if getattr(args, "inflation", None) is not None:
        overrides["mcl.inflation"] = args.inflation
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    return load_config(args.config, overrides)


def _prepare(args):
    cfg = config_from_args(args)
    if args.clear_embedding_cache:
        n = clear_cache(cfg.path("embed.cache_dir"))
        logger.info("removed %d cached embedding files", n)
    return cfg


def cmd_run(args) -> int:
    cfg = _prepare(args)
    res = run_pipeline(cfg, rebuild_cache=args.clear_embedding_cache)
    out = write_run_outputs(res)
    echo = res.reports[0]
    print(f"{len(res.final)} modules, {len(res.bundles)} assignments, F1 {echo.f1:.3f} -> {out}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _prepare(args)
    res = run_pipeline(cfg, rebuild_cache=args.clear_embedding_cache)
    out = write_run_outputs(res)
    full, held, seeds = full_benchmark(res)
    write_benchmark(out / "benchmark.csv", full)
    write_benchmark(out / "heldout.csv", held, {"seed": seeds})
    for r in full:
        print(f"{r.method:<14} F1 {r.f1:.3f}  P {r.precision:.3f}  R {r.recall:.3f}  size {r.mean_size:.2f}")
    return 0


def cmd_ablate(args) -> int:
    cfg = _prepare(args)
    res = run_pipeline(cfg, rebuild_cache=args.clear_embedding_cache)
    modes = ABLATIONS if "all" in args.mode else tuple(dict.fromkeys(args.mode))
    rows = [run_ablation(res, m) for m in modes]
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_benchmark(out / "ablation.csv", rows)
    for r in rows:
        print(f"{r.method:<14} F1 {r.f1:.3f}  mean size {r.mean_size:.2f}")
    return 0


def cmd_grid(args) -> int:
    cfg = _prepare(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be numbers: {args.values!r}") from None
    res = run_pipeline(cfg, rebuild_cache=args.clear_embedding_cache)
    rows = run_grid(res, args.param, values)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"grid_{args.param.replace('.', '_')}.csv"
    write_benchmark(path, rows, {"param": [args.param] * len(rows), "value": [f"{v:g}" for v in values]})
    for v, r in zip(values, rows):
        print(f"{args.param}={v:g}  F1 {r.f1:.3f}")
    return 0


def cmd_slpa(args) -> int:
    cfg = _prepare(args)
    res = run_pipeline(cfg, rebuild_cache=args.clear_embedding_cache)
    mods, report = run_slpa_baseline(res)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_partition(out / "communities_slpa.csv", mods.modules, prefix="S")
    write_benchmark(out / "benchmark_slpa.csv", [report])
    print(f"slpa: {len(mods)} modules, F1 {report.f1:.3f}")
    return 0


def cmd_mcl(args) -> int:
    cfg = _prepare(args)
    _accel.set_threads(cfg["threads"])
    inputs = load_inputs(cfg)
    t0 = time.perf_counter()
    part = run_mcl(inputs.graph, inflation=cfg["mcl.inflation"], max_iter=cfg["mcl.max_iter"],
                   prune_eps=cfg["mcl.prune_eps"], tol=cfg["mcl.tol"])
    elapsed = time.perf_counter() - t0 if cfg["timing"] else None
    report = benchmark("mcl", part.modules, inputs.gold, None, elapsed, cfg["match.threshold"])
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_partition(out / "communities_mcl.csv", part.modules, prefix="K")
    write_benchmark(out / "benchmark_mcl.csv", [report])
    print(f"mcl: {len(part)} modules ({part.iterations} iterations), F1 {report.f1:.3f}")
    return 0


COMMANDS = {
    "run": cmd_run,
    "benchmark": cmd_benchmark,
    "ablate": cmd_ablate,
    "grid": cmd_grid,
    "slpa": cmd_slpa,
    "mcl": cmd_mcl,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except GoldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_GOLD
    except (InputError, ConfigError, AnnotationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
