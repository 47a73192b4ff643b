"""Command-line entry point: ``mfodbo {run,fit-pv,sweep-delta,ablation,stats}``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import harness, pv
from ._backend import BACKEND
from .core import ObjectiveEvaluationError, UsageError
from .dbo import OptimizerConfig

DEFAULT_ABLATION_OBJECTIVES = "rastrigin,ackley,griewank"


def _add_common(p: argparse.ArgumentParser, with_delta: bool = True) -> None:
    p.add_argument("--seed", type=int, default=None, help="seed base (default 0)")
    p.add_argument("--runs", type=int, default=None, help="independent runs per cell (default 30)")
    p.add_argument("--iters", type=int, default=None, help="iterations per run (default 500)")
    p.add_argument("--pop", type=int, default=None, help="population size (default 30)")
    if with_delta:
        p.add_argument("--delta", type=float, default=None, help="fractional order (default 0.1)")
    p.add_argument("--memory", type=int, default=None, help="memory depth m (default 4)")
    p.add_argument("--workers", type=int, default=None, help="parallel worker processes (default 1)")
    p.add_argument("--out-dir", type=Path, default=None, help="directory for CSV/text outputs")


def _overrides(args) -> dict[str, str]:
    pairs = {
        "seed": args.seed, "runs": args.runs, "iterations": args.iters, "population": args.pop,
        "delta": getattr(args, "delta", None), "memory": args.memory, "workers": args.workers,
    }
    return {k: str(v) for k, v in pairs.items() if v is not None}


def _print_summary(report: harness.ExperimentReport) -> None:
    print("variant\tobjective\tmean\tstd\tbest")
    for r in report.summary_rows():
        if r["runs"]:
            print(f"{r['variant']}\t{r['objective']}\t{r['mean']:.6e}\t{r['std']:.3e}\t{r['best']:.6e}")
        else:
            print(f"{r['variant']}\t{r['objective']}\tall {r['failed']} runs failed")
    for c in report.errors():
        print(f"error: {c.variant}/{c.objective}/run {c.run}: {c.error}", file=sys.stderr)


def _finish(report: harness.ExperimentReport, out_dir) -> int:
    if out_dir is not None:
        harness.write_report(report, out_dir)
    _print_summary(report)
    return 1 if report.errors() else 0


def cmd_run(args) -> int:
    conf = harness.parse_config_file(args.plan)
    conf.update(_overrides(args))
    plan = harness.plan_from_mapping(conf)
    return _finish(harness.run_plan(plan), args.out_dir)


def cmd_ablation(args) -> int:
    conf = {"objectives": args.objectives, "dim": str(args.dim)}
    conf.update(_overrides(args))
    plan = harness.plan_from_mapping(conf)
    return _finish(harness.run_plan(plan), args.out_dir)


def cmd_sweep_delta(args) -> int:
    conf = {"objectives": args.objectives, "dim": str(args.dim), "deltas": args.deltas}
    conf.update(_overrides(args))
    plan = harness.plan_from_mapping(conf)
    report = harness.run_plan(plan)
    rc = _finish(report, args.out_dir)
    results = report.results()
    names = [v.name for v in plan.variants]
    if len(plan.objectives) > 1:
        means = [[float(results[n][o].mean()) if len(results[n][o]) else float("inf")
                  for o in plan.objectives] for n in names]
        print("\nFriedman mean rank by delta")
        for n, r in sorted(harness.stats.friedman_ranks(means, names).items(), key=lambda kv: kv[1]):
            print(f"{n}\t{r:.3f}")
    return rc


def cmd_fit_pv(args) -> int:
    ds = pv.load_iv_csv(args.data) if args.data else pv.bundled_dataset(args.model)
    cfg = OptimizerConfig()
    if args.iters is not None:
        cfg = replace(cfg, iterations=args.iters)
    if args.pop is not None:
        cfg = replace(cfg, population=args.pop)
    if args.delta is not None:
        cfg = replace(cfg, delta=args.delta)
    if args.memory is not None:
        cfg = replace(cfg, memory=args.memory)
    fit = harness.fit_pv(args.model, ds, runs=args.runs or 30, config=cfg,
                         seed_base=args.seed or 0, workers=args.workers or 1, variant=args.variant)
    for name, value in fit.parameters.items():
        print(f"{name}\t{value:.6g}")
    print(f"RMSE\t{fit.rmse:.6e}")
    if args.out_dir is not None:
        harness.write_pv_fit(fit, args.out_dir)
    return 0


def cmd_stats(args) -> int:
    results = harness.load_finals(args.finals)
    text = harness.format_stats(results, args.reference)
    if args.out_dir is not None:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "stats.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfodbo", description="Dung beetle optimizer experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--version", action="version", version=f"%(prog)s (kernels: {BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a plan file of key = value lines")
    p.add_argument("plan", type=Path)
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablation", help="DBO/DBO1/DBO2/DBO3/MFO-DBO on a set of objectives")
    p.add_argument("--objectives", default=DEFAULT_ABLATION_OBJECTIVES,
                   help=f"comma list of objective descriptors (default {DEFAULT_ABLATION_OBJECTIVES})")
    p.add_argument("--dim", type=int, default=harness.DEFAULT_DIM)
    _add_common(p)
    p.set_defaults(func=cmd_ablation)

    p = sub.add_parser("sweep-delta", help="MFO-DBO over a grid of fractional orders")
    p.add_argument("--objectives", default="rastrigin,ackley")
    p.add_argument("--deltas", default=",".join(f"{d:g}" for d in harness.DELTA_GRID))
    p.add_argument("--dim", type=int, default=harness.DEFAULT_DIM)
    _add_common(p, with_delta=False)
    p.set_defaults(func=cmd_sweep_delta)

    p = sub.add_parser("fit-pv", help="fit a PV model and report the best of several runs")
    p.add_argument("model", choices=pv.MODELS)
    p.add_argument("--data", type=Path, default=None, help="I-V CSV (default: bundled data)")
    p.add_argument("--variant", default="MFO-DBO")
    _add_common(p)
    p.set_defaults(func=cmd_fit_pv)

    p = sub.add_parser("stats", help="recompute statistics from a saved finals.csv")
    p.add_argument("finals", type=Path)
    p.add_argument("--reference", default=None, help="baseline variant (default DBO if present)")
    p.add_argument("--out-dir", type=Path, default=None)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ObjectiveEvaluationError, OSError) as exc:
        print(f"mfodbo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
