"""Experiment runner: run matrices, PV fits and report files.

Every run gets its seed from ``seed_for(seed_base, variant, objective, run)``
so any single cell can be re-run in isolation. Outputs are CSV tables and a
plain-text statistics summary; floats are written with ``repr`` so repeated
runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import os
import shlex
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import pv, stats
from .benchfns import BUILTIN_NAMES, external_objective, get_function
from .core import ObjectiveSpec, SearchSpace, UsageError
from .dbo import VARIANTS, OptimizerConfig, RunTrace, VariantFlags, run

log = logging.getLogger(__name__)

DEFAULT_DIM = 10
ABLATION_VARIANTS = ("DBO", "DBO1", "DBO2", "DBO3", "MFO-DBO")
DELTA_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))


def seed_for(seed_base: int, variant: str, objective: str, run_index: int) -> int:
    """seed_base + blake2b-64 of ``variant|objective|run``, modulo 2**64."""
    key = f"{variant}|{objective}|{run_index}".encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (int(seed_base) + h) % 2**64


def resolve_objective(descriptor: str, dim: int = DEFAULT_DIM) -> ObjectiveSpec:
    """Build an objective from a text descriptor.

    ``rastrigin`` or ``rastrigin:30``  builtin function (default 10-D)
    ``pv:sdm`` or ``pv:ddm:data.csv``  PV model on bundled or given data
    ``cmd:DIM:LO:HI:program args``     external program, one call per point
    """
    kind, _, rest = descriptor.partition(":")
    if kind == "pv":
        model, _, path = rest.partition(":")
        ds = pv.load_iv_csv(path) if path else pv.bundled_dataset(model)
        obj = pv.pv_objective(model, ds)
        return ObjectiveSpec(descriptor, obj.space, obj.evaluate)
    if kind == "cmd":
        parts = rest.split(":", 3)
        if len(parts) != 4:
            raise UsageError(f"expected cmd:DIM:LO:HI:command, got {descriptor!r}")
        try:
            d, lo, hi = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError:
            raise UsageError(f"bad DIM/LO/HI in {descriptor!r}") from None
        return external_objective(shlex.split(parts[3]), SearchSpace.uniform(d, lo, hi), descriptor)
    if kind in BUILTIN_NAMES:
        try:
            d = int(rest) if rest else dim
        except ValueError:
            raise UsageError(f"bad dimension in {descriptor!r}") from None
        fn = get_function(kind, d)
        return ObjectiveSpec(descriptor, fn.space, fn.evaluate)
    raise UsageError(f"unknown objective {descriptor!r}; use a builtin name, pv:MODEL[:path] or cmd:...")


@dataclass(frozen=True)
class VariantSpec:
    name: str
    flags: VariantFlags
    delta: float = 0.1
    memory: int = 4

    @classmethod
    def named(cls, name: str, delta: float = 0.1, memory: int = 4, label: Optional[str] = None) -> "VariantSpec":
        if name not in VARIANTS:
            raise UsageError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}")
        return cls(label or name, VARIANTS[name], delta, memory)


@dataclass(frozen=True)
class ExperimentPlan:
    objectives: tuple
    variants: tuple
    runs: int = 30
    population: int = 30
    iterations: int = 500
    seed_base: int = 0
    dim: int = DEFAULT_DIM
    workers: int = 1
    base_config: OptimizerConfig = OptimizerConfig()

    def __post_init__(self):
        if not self.objectives or not self.variants:
            raise UsageError("a plan needs at least one objective and one variant")
        if self.runs < 1:
            raise UsageError("runs must be at least 1")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise UsageError(f"variant labels must be unique, got {names}")

    def config_for(self, variant: VariantSpec, objective: str, run_index: int) -> OptimizerConfig:
        return replace(
            self.base_config,
            population=self.population,
            iterations=self.iterations,
            seed=seed_for(self.seed_base, variant.name, objective, run_index),
            variants=variant.flags,
            delta=variant.delta,
            memory=variant.memory,
        )

    def cells(self) -> list[tuple[VariantSpec, str, int]]:
        return [(v, o, r) for v in self.variants for o in self.objectives for r in range(self.runs)]


@dataclass
class CellResult:
    variant: str
    objective: str
    run: int
    seed: int
    final: float = float("nan")
    curve: Optional[np.ndarray] = None
    exploration: Optional[np.ndarray] = None
    position: Optional[np.ndarray] = None
    error: str = ""

    @property
    def key(self) -> tuple:
        return (self.variant, self.objective, self.run)


def _run_cell(args) -> CellResult:
    variant, objective, run_index, config, dim = args
    cell = CellResult(variant.name, objective, run_index, config.seed)
    try:
        trace = run(resolve_objective(objective, dim), config)
    except Exception as exc:  # recorded per cell; the matrix goes on
        cell.error = f"{type(exc).__name__}: {exc}"
        return cell
    cell.final = trace.best_value
    cell.curve = trace.best_fitness
    cell.exploration = trace.exploration_pct
    cell.position = trace.best_position
    return cell


def _map(fn, tasks: list, workers: int) -> list:
    workers = max(1, min(int(workers), os.cpu_count() or 1, len(tasks) or 1))
    if workers == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass
class ExperimentReport:
    plan: ExperimentPlan
    cells: list = field(default_factory=list)

    def finals(self, variant: str, objective: str) -> np.ndarray:
        return np.array([c.final for c in self.cells
                         if c.variant == variant and c.objective == objective and not c.error])

    def errors(self) -> list[CellResult]:
        return [c for c in self.cells if c.error]

    def results(self) -> dict:
        """``{variant: {objective: finals}}`` for the stats module."""
        return {v.name: {o: self.finals(v.name, o) for o in self.plan.objectives} for v in self.plan.variants}

    def summary_rows(self) -> list[dict]:
        rows = []
        for v in self.plan.variants:
            for o in self.plan.objectives:
                vals = self.finals(v.name, o)
                row = {"variant": v.name, "objective": o, "runs": len(vals),
                       "failed": self.plan.runs - len(vals)}
                if len(vals):
                    row.update(stats.summarize(vals))
                rows.append(row)
        return rows

    def mean_curve(self, variant: str, objective: str) -> Optional[tuple[np.ndarray, np.ndarray]]:
        cells = [c for c in self.cells if c.variant == variant and c.objective == objective and not c.error]
        if not cells:
            return None
        return (np.mean([c.curve for c in cells], axis=0), np.mean([c.exploration for c in cells], axis=0))


def run_plan(plan: ExperimentPlan, out_dir: Optional[Path] = None) -> ExperimentReport:
    """Execute every (variant, objective, run) cell and aggregate deterministically."""
    tasks = [(v, o, r, plan.config_for(v, o, r), plan.dim) for v, o, r in plan.cells()]
    log.info("running %d cells on up to %d workers", len(tasks), plan.workers)
    cells = sorted(_map(_run_cell, tasks, plan.workers), key=lambda c: c.key)
    report = ExperimentReport(plan, cells)
    for c in report.errors():
        log.warning("cell %s/%s/run %d failed: %s", c.variant, c.objective, c.run, c.error)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _slug(text: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in text)


SUMMARY_COLUMNS = ("variant", "objective", "runs", "failed", "mean", "std", "best", "worst", "median")


def write_report(report: ExperimentReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS,
               ([r.get(k, "") for k in SUMMARY_COLUMNS] for r in report.summary_rows()))
    _write_csv(out / "finals.csv", ("variant", "objective", "run", "seed", "final", "error"),
               ((c.variant, c.objective, c.run, c.seed, c.final, c.error) for c in report.cells))
    for v in report.plan.variants:
        for o in report.plan.objectives:
            mc = report.mean_curve(v.name, o)
            if mc is None:
                continue
            best, explore = mc
            _write_csv(out / f"convergence_{_slug(v.name)}_{_slug(o)}.csv",
                       ("iteration", "mean_best_fitness", "exploration_pct", "exploitation_pct"),
                       ((t + 1, best[t], explore[t], 100.0 - explore[t]) for t in range(len(best))))
    (out / "stats.txt").write_text(format_stats(report.results()), encoding="utf-8")


def load_finals(path) -> dict:
    """Read a ``finals.csv`` back into ``{variant: {objective: finals}}``."""
    results: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row.get("error"):
                continue
            cell = results.setdefault(row["variant"], {}).setdefault(row["objective"], [])
            cell.append(float(row["final"]))
    if not results:
        raise UsageError(f"{path}: no successful runs")
    return {v: {o: np.array(x) for o, x in objs.items()} for v, objs in results.items()}


def format_stats(results: dict, reference: Optional[str] = None) -> str:
    """Plain-text B|S|W, Wilcoxon and Friedman summary."""
    names = list(results)
    ref = reference or ("DBO" if "DBO" in results else names[0])
    objectives = sorted({o for v in results.values() for o in v})
    lines = [f"reference: {ref}", ""]
    if len(names) > 1:
        lines.append("variant\tobjective\tB|S|W\tp_value\twilcoxon")
        usable = {v: {o: x for o, x in results[v].items() if len(x) >= 2} for v in names}
        rows = stats.compare_table(
            {v: {o: usable[v][o] for o in objectives if o in usable[v] and o in usable[ref]} for v in names}, ref
        )
        for r in rows:
            lines.append(f"{r['algorithm']}\t{r['function']}\t{r['bsw']}\t{r['p_value']:.6g}\t{r['wilcoxon']}")
        lines.append("")
        for v in names:
            if v == ref:
                continue
            tally = stats.bsw_tally([r["bsw"] for r in rows if r["algorithm"] == v])
            wil = [r["wilcoxon"] for r in rows if r["algorithm"] == v]
            lines.append(f"{v} vs {ref}: B|S|W = {tally[0]}|{tally[1]}|{tally[2]}, "
                         f"+/≈/− = {wil.count(stats.PLUS)}/{wil.count(stats.APPROX)}/{wil.count(stats.MINUS)}")
    complete = [o for o in objectives if all(len(results[v].get(o, ())) for v in names)]
    if len(names) > 1 and len(complete) > 1:
        means = [[float(np.mean(results[v][o])) for o in complete] for v in names]
        ranks = stats.friedman_ranks(means, names)
        lines += ["", "Friedman mean rank"]
        for v, r in sorted(ranks.items(), key=lambda kv: (kv[1], kv[0])):
            lines.append(f"{v}\t{r:.4f}")
    return "\n".join(lines) + "\n"


def ablation_plan(objectives: Sequence[str], delta: float = 0.1, memory: int = 4, **kwargs) -> ExperimentPlan:
    variants = tuple(VariantSpec.named(n, delta, memory) for n in ABLATION_VARIANTS)
    return ExperimentPlan(tuple(objectives), variants, **kwargs)


def delta_sweep_plan(objectives: Sequence[str], deltas: Sequence[float] = DELTA_GRID,
                     memory: int = 4, **kwargs) -> ExperimentPlan:
    variants = tuple(VariantSpec.named("MFO-DBO", d, memory, label=f"MFO-DBO[delta={d:g}]") for d in deltas)
    return ExperimentPlan(tuple(objectives), variants, **kwargs)


def emit_convergence(trace: RunTrace, path) -> None:
    """One row per iteration: iteration, best_fitness, exploration_pct, exploitation_pct."""
    explore, exploit = trace.exploration_pct, trace.exploitation_pct
    _write_csv(Path(path), ("iteration", "best_fitness", "exploration_pct", "exploitation_pct"),
               ((t + 1, trace.best_fitness[t], explore[t], exploit[t]) for t in range(len(trace.best_fitness))))


@dataclass
class PvFit:
    model: str
    dataset: pv.IvDataset
    position: np.ndarray
    rmse: float
    finals: np.ndarray
    trace: RunTrace

    @property
    def parameters(self) -> dict[str, float]:
        return pv.describe(self.position, self.model)

    def iv_table(self) -> list[tuple[float, float, float, float]]:
        model_i = pv.simulate_current(self.position, self.dataset, self.model)
        return [(float(v), float(i), float(m), float(v * m))
                for v, i, m in zip(self.dataset.voltage, self.dataset.current, model_i)]


def _pv_cell(args):
    model, ds, config = args
    return run(pv.pv_objective(model, ds), config)


def fit_pv(model: str, dataset: Optional[pv.IvDataset] = None, runs: int = 30,
           config: Optional[OptimizerConfig] = None, seed_base: int = 0, workers: int = 1,
           variant: str = "MFO-DBO") -> PvFit:
    """Best of ``runs`` independent fits of ``model`` to ``dataset``.

    ``config`` supplies everything except the seed and the variant flags,
    which come from ``seed_for`` and ``variant``.
    """
    ds = dataset if dataset is not None else pv.bundled_dataset(model)
    if runs < 1:
        raise UsageError("runs must be at least 1")
    if variant not in VARIANTS:
        raise UsageError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    config = replace(config or OptimizerConfig(), variants=VARIANTS[variant])
    objective = f"pv:{model}"
    tasks = [(model, ds, replace(config, seed=seed_for(seed_base, variant, objective, r))) for r in range(runs)]
    traces = _map(_pv_cell, tasks, workers)
    finals = np.array([t.best_value for t in traces])
    best = traces[int(np.argmin(finals))]
    return PvFit(model, ds, best.best_position, best.best_value, finals, best)


def write_pv_fit(fit: PvFit, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "parameters.csv", ("name", "value"),
               list(fit.parameters.items()) + [("rmse", fit.rmse)])
    _write_csv(out / "iv_table.csv", ("V", "I_measured", "I_model", "P_model"), fit.iv_table())
    _write_csv(out / "finals.csv", ("run", "rmse"), enumerate(fit.finals.tolist()))
    emit_convergence(fit.trace, out / "convergence.csv")


def parse_config_file(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise UsageError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            out[key.strip().lower()] = value.strip()
    return out


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def plan_from_mapping(conf: dict[str, str]) -> ExperimentPlan:
    """Build a plan from config keys; unset keys keep the standard defaults."""
    known = {"objectives", "variants", "runs", "population", "iterations", "seed", "delta",
             "memory", "dim", "workers", "deltas", "k"}
    unknown = set(conf) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    try:
        delta = float(conf.get("delta", 0.1))
        memory = int(conf.get("memory", 4))
        kw = dict(
            runs=int(conf.get("runs", 30)),
            population=int(conf.get("population", 30)),
            iterations=int(conf.get("iterations", 500)),
            seed_base=int(conf.get("seed", 0)),
            dim=int(conf.get("dim", DEFAULT_DIM)),
            workers=int(conf.get("workers", 1)),
        )
        base = OptimizerConfig(K=float(conf["k"])) if "k" in conf else OptimizerConfig()
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None
    objectives = tuple(_split(conf.get("objectives", "")))
    if "deltas" in conf:
        deltas = [float(d) for d in _split(conf["deltas"])]
        return delta_sweep_plan(objectives, deltas, memory, base_config=base, **kw)
    names = _split(conf.get("variants", ",".join(ABLATION_VARIANTS)))
    variants = tuple(VariantSpec.named(n, delta, memory) for n in names)
    return ExperimentPlan(objectives, variants, base_config=base, **kw)
