import csv
import sys

import numpy as np
import pytest

from mfodbo import harness, pv
from mfodbo.cli import main
from mfodbo.core import UsageError
from mfodbo.dbo import OptimizerConfig, run


def small_plan(**kw):
    base = dict(runs=2, population=8, iterations=15, seed_base=5)
    base.update(kw)
    return harness.ExperimentPlan(("sphere:3",), (harness.VariantSpec.named("DBO"),), **base)


def test_seed_schedule_is_pure_and_distinct():
    a = harness.seed_for(0, "DBO", "sphere", 0)
    assert a == harness.seed_for(0, "DBO", "sphere", 0)
    assert harness.seed_for(1, "DBO", "sphere", 0) == (a + 1) % 2**64
    seeds = {harness.seed_for(0, v, o, r) for v in ("DBO", "MFO-DBO") for o in ("a", "b") for r in range(10)}
    assert len(seeds) == 40


def test_minimal_matrix():
    rep = harness.run_plan(small_plan())
    assert len(rep.cells) == 2
    row = rep.summary_rows()[0]
    assert row["runs"] == 2 and row["failed"] == 0
    assert row["best"] <= row["mean"] <= row["worst"]


def test_single_cell_rerun_matches_matrix():
    plan = small_plan(runs=3)
    rep = harness.run_plan(plan)
    v = plan.variants[0]
    alone = run(harness.resolve_objective("sphere:3"), plan.config_for(v, "sphere:3", 2))
    assert alone.best_value == rep.cells[2].final


def test_outputs_byte_identical(tmp_path):
    plan = harness.ablation_plan(["sphere:2", "rastrigin:2"], runs=2, population=8, iterations=10)
    harness.run_plan(plan, tmp_path / "a")
    harness.run_plan(plan, tmp_path / "b")
    for name in ("summary.csv", "finals.csv", "stats.txt", "convergence_MFO-DBO_rastrigin_2.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_aggregation_matches_serial(tmp_path):
    plan = harness.ablation_plan(["sphere:2"], runs=3, population=8, iterations=10)
    serial = harness.run_plan(plan, tmp_path / "s")
    par = harness.run_plan(harness.ExperimentPlan(plan.objectives, plan.variants, runs=3, population=8,
                                                  iterations=10, workers=2), tmp_path / "p")
    assert [c.final for c in serial.cells] == [c.final for c in par.cells]
    assert (tmp_path / "s" / "finals.csv").read_bytes() == (tmp_path / "p" / "finals.csv").read_bytes()


def test_cell_errors_recorded_and_matrix_continues(tmp_path):
    fail = f"cmd:2:-1:1:{sys.executable} -c 'raise SystemExit(3)'"
    plan = harness.ExperimentPlan(("sphere:2", fail), (harness.VariantSpec.named("DBO"),),
                                  runs=2, population=4, iterations=3)
    rep = harness.run_plan(plan, tmp_path)
    assert len(rep.errors()) == 2
    assert len(rep.finals("DBO", "sphere:2")) == 2
    rows = list(csv.DictReader(open(tmp_path / "finals.csv")))
    assert sum(bool(r["error"]) for r in rows) == 2


def test_resolve_objective_variants(tmp_path):
    assert harness.resolve_objective("ackley").space.dim == 10
    assert harness.resolve_objective("ackley:4").space.dim == 4
    assert harness.resolve_objective("pv:ddm").space.dim == 7
    f = tmp_path / "iv.csv"
    pv.write_iv_csv(pv.bundled_dataset("sdm"), f)
    assert harness.resolve_objective(f"pv:sdm:{f}").space.dim == 5
    obj = harness.resolve_objective(f"cmd:3:-1:1:{sys.executable} -c print(1)")
    assert obj.evaluate(np.zeros(3)) == 1.0
    for bad in ("nosuch", "cmd:2:x:1:true", "rastrigin:many"):
        with pytest.raises(UsageError):
            harness.resolve_objective(bad)


def test_emit_convergence(tmp_path):
    tr = run(harness.resolve_objective("sphere:3"), OptimizerConfig(iterations=500, seed=0))
    path = tmp_path / "conv.csv"
    harness.emit_convergence(tr, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["iteration", "best_fitness", "exploration_pct", "exploitation_pct"]
    assert len(rows) == 501
    best = [float(r[1]) for r in rows[1:]]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert all(abs(float(r[2]) + float(r[3]) - 100.0) < 1e-9 for r in rows[1:])
    first = path.read_bytes()
    harness.emit_convergence(tr, path)
    assert path.read_bytes() == first


def test_emit_convergence_unwritable(tmp_path):
    tr = run(harness.resolve_objective("sphere:2"), OptimizerConfig(iterations=2, seed=0))
    with pytest.raises(OSError):
        harness.emit_convergence(tr, tmp_path / "missing" / "dir" / "c.csv")


def test_fit_pv_small(tmp_path):
    fit = harness.fit_pv("sdm", runs=2, config=OptimizerConfig(iterations=40))
    assert fit.finals.shape == (2,)
    assert fit.rmse == fit.finals.min()
    table = fit.iv_table()
    assert len(table) == 26
    v, i_meas, i_model, p_model = table[3]
    assert p_model == pytest.approx(v * i_model)
    harness.write_pv_fit(fit, tmp_path)
    params = dict(csv.reader(open(tmp_path / "parameters.csv")))
    assert set(params) >= {"I_ph", "I_sd", "R_s", "R_sh", "n", "rmse"}


def test_delta_sweep_plan():
    plan = harness.delta_sweep_plan(["sphere:2", "ackley:2"], runs=2, population=8, iterations=5)
    assert [v.delta for v in plan.variants] == list(harness.DELTA_GRID)
    rep = harness.run_plan(plan)
    assert len(rep.cells) == 10 * 2 * 2


def test_config_file(tmp_path):
    f = tmp_path / "plan.txt"
    f.write_text("# demo\nobjectives = sphere:2, ackley:2\nvariants = DBO, MFO-DBO\nruns = 3\n"
                 "iterations = 7  # short\npopulation = 10\nseed = 9\n")
    plan = harness.plan_from_mapping(harness.parse_config_file(f))
    assert plan.objectives == ("sphere:2", "ackley:2")
    assert [v.name for v in plan.variants] == ["DBO", "MFO-DBO"]
    assert (plan.runs, plan.iterations, plan.population, plan.seed_base) == (3, 7, 10, 9)
    f.write_text("runs 3\n")
    with pytest.raises(UsageError, match=":1:"):
        harness.parse_config_file(f)
    with pytest.raises(UsageError):
        harness.plan_from_mapping({"objectives": "sphere", "colour": "red"})


def test_format_stats_and_reload(tmp_path):
    plan = harness.ablation_plan(["sphere:2", "rastrigin:2"], runs=3, population=8, iterations=10)
    rep = harness.run_plan(plan, tmp_path)
    text = (tmp_path / "stats.txt").read_text()
    assert "reference: DBO" in text and "Friedman mean rank" in text
    assert harness.format_stats(harness.load_finals(tmp_path / "finals.csv")) == text


def test_cli_ablation_and_stats(tmp_path, capsys):
    out = tmp_path / "abl"
    rc = main(["ablation", "--objectives", "sphere:2,griewank:2", "--runs", "2", "--iters", "8",
               "--pop", "8", "--out-dir", str(out)])
    assert rc == 0
    assert (out / "summary.csv").exists()
    capsys.readouterr()
    assert main(["stats", str(out / "finals.csv")]) == 0
    assert "MFO-DBO vs DBO" in capsys.readouterr().out


def test_cli_run_plan_file(tmp_path, capsys):
    f = tmp_path / "p.txt"
    f.write_text("objectives = sphere:2\nvariants = DBO3\nruns = 2\niterations = 5\npopulation = 8\n")
    assert main(["run", str(f), "--seed", "3", "--iters", "6", "--out-dir", str(tmp_path / "o")]) == 0
    rows = list(csv.reader(open(tmp_path / "o" / "convergence_DBO3_sphere_2.csv")))
    assert len(rows) == 7


def test_cli_sweep_delta(capsys):
    assert main(["sweep-delta", "--objectives", "sphere:2,ackley:2", "--deltas", "0.1,1.0",
                 "--runs", "2", "--iters", "5", "--pop", "8"]) == 0
    assert "Friedman mean rank by delta" in capsys.readouterr().out


def test_cli_fit_pv(tmp_path, capsys):
    assert main(["fit-pv", "sdm", "--runs", "1", "--iters", "20", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "RMSE" in out and "I_ph" in out
    assert (tmp_path / "iv_table.csv").exists()


def test_cli_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n")
    assert main(["fit-pv", "sdm", "--data", str(bad), "--runs", "1", "--iters", "2"]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "nope.txt")]) == 2
    with pytest.raises(SystemExit):
        main(["fit-pv", "tdm"])
