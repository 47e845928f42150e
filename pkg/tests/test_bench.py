import sys
import os
import json
from pathlib import Path

import pandas as pd
import pytest
from pydantic import ValidationError

# Add src directory to sys.path to allow importing qae_lab
# This assumes tests are run from the project root
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from qae_lab import config
from qae_lab.bench import plan as plan_module
from qae_lab.bench import runner
from qae_lab.bench.plan import EstimatorEntry, ExperimentPlan, default_plan, load_plan
from qae_lab.bench.plotting import plot_svg
from qae_lab.bench.report import run_tables
from qae_lab.bench.runner import RowTask, relative_error, replay, row_seed, run_bounds, run_sweep
from qae_lab.distributions import PointSpec, UniformSpec
from qae_lab.estimators import EstimatorConfig
from qae_lab.exceptions import PlanError, SchemaError
from qae_lab.main import main

PLANS_DIR = Path(__file__).resolve().parent.parent / "plans"


@pytest.fixture
def small_plan() -> ExperimentPlan:
    """Two tiny distributions, an exact, a swept MLAE and a swept CMC estimator."""
    return ExperimentPlan(
        distributions=[UniformSpec(n_qubits=2), PointSpec(value=1.0, n_qubits=2)],
        statistics=["mean", "var"],
        estimators=[
            EstimatorEntry(name="exact"),
            EstimatorEntry(
                name="mlae",
                params=EstimatorConfig(shots=20),
                sweep_param="max_iter",
                sweep_values=[1, 2],
            ),
            EstimatorEntry(name="cmc", sweep_param="n_samples", sweep_values=[50, 200]),
        ],
        repetitions=2,
        seed=7,
    )


@pytest.fixture
def plan_file(tmp_path: Path, small_plan: ExperimentPlan) -> Path:
    path = tmp_path / "plan.json"
    path.write_text(small_plan.model_dump_json(indent=2), encoding="utf-8")
    return path


def test_row_seed_is_deterministic_and_distinct():
    seeds = {row_seed(2024, d, e, b, r) for d in range(2) for e in range(2) for b in range(2) for r in range(2)}
    assert len(seeds) == 16
    assert row_seed(2024, 1, 0, 1, 0) == row_seed(2024, 1, 0, 1, 0)
    assert all(0 <= s < 2**63 for s in seeds)


def test_row_key_round_trip():
    task = RowTask(3, "cvar", 1, 12, 4)
    assert task.row_key == "d03-cvar-e01-b012-r004"
    assert RowTask.from_key(task.row_key) == task
    with pytest.raises(PlanError):
        RowTask.from_key("not-a-key")


def test_relative_error():
    assert relative_error(1.1, 1.0) == pytest.approx(10.0)
    assert relative_error(0.002, 0.0) == pytest.approx(0.2)


def test_bounds_csv(tmp_path: Path):
    """Tests the closed-form bounds file at alpha = 0.05."""
    frame = run_bounds(0.05, [1e-3, 1e-2], tmp_path)
    written = pd.read_csv(tmp_path / config.BOUNDS_CSV_NAME)
    assert list(written.columns) == config.BOUNDS_COLUMNS
    assert len(written) == 2
    assert written.loc[0, "mlae_lower"] == pytest.approx(217.94, abs=0.01)
    assert written.loc[0, "iqae_upper"] == pytest.approx(2.976e5, rel=1e-3)
    assert written.loc[1, "cmc_ref"] == pytest.approx(38416)
    assert list(frame["epsilon"]) == [1e-3, 1e-2]


def test_bounds_reject_empty_grid(tmp_path: Path):
    with pytest.raises(PlanError):
        run_bounds(0.05, [], tmp_path)


def test_sweep_rows_and_columns(tmp_path: Path, small_plan: ExperimentPlan):
    frame = run_sweep(small_plan, tmp_path, workers=2)
    # 2 distributions x 2 statistics x (1 + 2 + 2) budgets x 2 repetitions
    assert len(frame) == 40
    assert list(frame.columns) == config.SWEEP_COLUMNS
    assert list(frame["row_key"]) == sorted(frame["row_key"])
    assert (frame["error"] == "").all()

    exact = frame[frame["estimator"] == "exact"]
    assert (exact["relative_error"] < 1e-9).all()
    assert (exact["oracle_queries_A"] == 0).all()

    cmc_rows = frame[frame["estimator"] == "cmc"]
    assert set(cmc_rows["oracle_queries_A"]) == {50, 200}

    mlae_rows = frame[(frame["estimator"] == "mlae") & (frame["statistic"] == "mean")]
    # max_iter 1 -> schedule [0, 1]; max_iter 2 -> [0, 1, 2]
    assert set(mlae_rows["grover_applications"]) == {20, 60}


def test_sweep_is_byte_identical_across_runs(tmp_path: Path, small_plan: ExperimentPlan):
    """Tests that the sweep CSV depends only on the plan and seed, not on worker count."""
    run_sweep(small_plan, tmp_path / "one", workers=1)
    run_sweep(small_plan, tmp_path / "two", workers=3)
    first = (tmp_path / "one" / config.SWEEP_CSV_NAME).read_bytes()
    second = (tmp_path / "two" / config.SWEEP_CSV_NAME).read_bytes()
    assert first == second


def test_replay_reproduces_row(tmp_path: Path, small_plan: ExperimentPlan):
    frame = run_sweep(small_plan, tmp_path)
    key = "d00-mean-e01-b001-r001"
    stored = frame[frame["row_key"] == key].iloc[0]
    row = replay(small_plan, key)
    assert row.seed == stored["seed"]
    assert row.estimate == stored["estimate"]
    assert row.grover_applications == stored["grover_applications"]
    assert (row.ci_low, row.ci_high) == (stored["ci_low"], stored["ci_high"])


def test_replay_rejects_unknown_rows(small_plan: ExperimentPlan):
    with pytest.raises(PlanError):
        replay(small_plan, "d05-mean-e00-b000-r000")
    with pytest.raises(PlanError):
        replay(small_plan, "d00-cvar-e00-b000-r000")


def test_failed_rows_are_recorded(tmp_path: Path, small_plan: ExperimentPlan, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(runner, "estimate_statistic", boom)
    frame = run_sweep(small_plan, tmp_path)
    quantum = frame[frame["estimator"] != "cmc"]
    assert (quantum["error"] == "RuntimeError: boom").all()
    assert (frame[frame["estimator"] == "cmc"]["error"] == "").all()


def test_tables(tmp_path: Path):
    """Tests the averaged table cells for the uniform distribution."""
    plan = ExperimentPlan(
        distributions=[UniformSpec()],
        statistics=["mean", "var", "cvar"],
        estimators=[EstimatorEntry(name="exact"), EstimatorEntry(name="cmc", n_samples=1000)],
        repetitions=2,
    )
    document = run_tables(plan, tmp_path)
    assert len(document["cells"]) == 6
    var_cell = next(c for c in document["cells"] if c["statistic"] == "var" and c["estimator"] == "exact")
    assert var_cell["estimate"] == 0.9375
    assert var_cell["achieved_level"] == pytest.approx(1.0)
    assert var_cell["continuous_reference"] == pytest.approx(0.95)
    assert var_cell["continuous_at_achieved"] is None
    assert var_cell["errors"] == []
    assert len(var_cell["seeds"]) == 2

    with open(tmp_path / config.TABLES_JSON_NAME, "r", encoding="utf-8") as f:
        assert json.load(f) == json.loads(json.dumps(document))
    text = (tmp_path / config.TABLES_TEXT_NAME).read_text(encoding="utf-8")
    assert "== var ==" in text
    assert "U(0, 1)" in text


def test_plot_bounds_svg_is_reproducible(tmp_path: Path):
    run_bounds(0.05, [1e-4, 1e-3, 1e-2], tmp_path)
    csv_path = tmp_path / config.BOUNDS_CSV_NAME
    first = plot_svg(csv_path, "bounds", tmp_path / "a.svg").read_bytes()
    second = plot_svg(csv_path, "bounds", tmp_path / "b.svg").read_bytes()
    assert first.startswith(b"<?xml")
    assert first == second


def test_plot_sweep_svg(tmp_path: Path, small_plan: ExperimentPlan):
    run_sweep(small_plan, tmp_path)
    out = plot_svg(tmp_path / config.SWEEP_CSV_NAME, "sweep")
    assert out == tmp_path / "sweep.svg"
    assert out.stat().st_size > 0


def test_plot_rejects_empty_csv(tmp_path: Path):
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(SchemaError):
        plot_svg(empty, "bounds")
    assert not (tmp_path / "bounds.svg").exists()

    header_only = tmp_path / "header.csv"
    header_only.write_text(",".join(config.SWEEP_COLUMNS) + "\n", encoding="utf-8")
    with pytest.raises(SchemaError):
        plot_svg(header_only, "sweep")
    assert not (tmp_path / "sweep.svg").exists()


def test_shipped_plans_load():
    for name in ("tables.json", "sweep.json"):
        plan = load_plan(PLANS_DIR / name)
        assert plan.distributions


def test_default_plan_matches_table_settings():
    plan = default_plan()
    assert [s.label for s in plan.distributions] == ["N(0.1, 0.01)", "N(0.1, 0.05)", "W(1.8)", "U(0, 1)"]
    assert plan.level == 0.95
    assert all(e.params.shots == 100 for e in plan.estimators if e.name != "fae")


def test_invalid_plans_are_rejected(tmp_path: Path):
    missing = tmp_path / "missing.json"
    with pytest.raises(PlanError):
        load_plan(missing)

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(PlanError):
        load_plan(broken)

    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"distributions": [], "estimators": [{"name": "iqae"}]}), encoding="utf-8")
    with pytest.raises(PlanError):
        load_plan(empty)


def test_estimator_entry_validation():
    with pytest.raises(ValidationError):
        EstimatorEntry(name="qpe")
    with pytest.raises(ValidationError):
        EstimatorEntry(name="iqae", sweep_param="epsilon", sweep_values=[0.1, 0.01])
    with pytest.raises(ValidationError):
        EstimatorEntry(name="iqae", sweep_param="colour", sweep_values=[1])
    with pytest.raises(ValidationError):
        EstimatorEntry(name="iqae", sweep_values=[1])


def test_cmc_budgets_span_oracle_range():
    entry = EstimatorEntry(name="cmc", sweep_param="n_samples")
    budgets = entry.budgets((100, 200_000))
    assert len(budgets) == plan_module.DEFAULT_SWEEP_POINTS
    assert budgets[0] == ("n_samples", 100.0)
    assert budgets[-1] == ("n_samples", 200_000.0)
    with pytest.raises(PlanError):
        entry.budgets(None)


def test_config_for_revalidates_swept_values():
    entry = EstimatorEntry(name="iqae", sweep_param="epsilon", sweep_values=[0.01, 0.6])
    with pytest.raises(ValidationError):
        entry.config_for("epsilon", 0.6)
    assert entry.config_for("epsilon", 0.01).epsilon == 0.01


def test_cli_bounds(tmp_path: Path):
    assert main(["bounds", "--out", str(tmp_path), "--epsilons", "0.001", "0.01"]) == 0
    assert len(pd.read_csv(tmp_path / config.BOUNDS_CSV_NAME)) == 2


def test_cli_sweep_and_replay(tmp_path: Path, plan_file: Path):
    out = tmp_path / "results"
    assert main(["sweep", "--plan", str(plan_file), "--out", str(out), "--workers", "2"]) == 0
    csv_path = out / config.SWEEP_CSV_NAME
    assert main(
        ["replay", "--plan", str(plan_file), "--row-key", "d01-var-e01-b000-r001", "--csv", str(csv_path)]
    ) == 0


def test_cli_sweep_exit_code_on_failed_rows(tmp_path: Path, plan_file: Path, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(runner, "estimate_statistic", boom)
    with pytest.raises(SystemExit) as excinfo:
        main(["sweep", "--plan", str(plan_file), "--out", str(tmp_path)])
    assert excinfo.value.code == 1
    # the partial results are still written
    assert (tmp_path / config.SWEEP_CSV_NAME).exists()


def test_cli_plot_failure_exit_code(tmp_path: Path):
    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(SystemExit) as excinfo:
        main(["plot", "--csv", str(empty), "--kind", "bounds"])
    assert excinfo.value.code == 1
    assert not (tmp_path / "bounds.svg").exists()


def test_cli_rejects_bad_plan(tmp_path: Path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"distributions": [{"kind": "normal", "mu": 0, "sigma": -1}]}), encoding="utf-8")
    with pytest.raises(SystemExit) as excinfo:
        main(["tables", "--plan", str(bad), "--out", str(tmp_path)])
    assert excinfo.value.code == 1


def test_tables_do_not_depend_on_worker_count(tmp_path: Path):
    plan = ExperimentPlan(
        distributions=[UniformSpec(n_qubits=2), PointSpec(value=1.0, n_qubits=2)],
        statistics=["mean", "cvar"],
        estimators=[EstimatorEntry(name="mlae", params=EstimatorConfig(shots=20, max_iter=2))],
        repetitions=2,
        seed=3,
    )
    run_tables(plan, tmp_path / "one", workers=1)
    run_tables(plan, tmp_path / "three", workers=3)
    for name in (config.TABLES_JSON_NAME, config.TABLES_TEXT_NAME):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "three" / name).read_bytes()


def test_cli_tables_with_workers(tmp_path: Path, plan_file: Path):
    assert main(["tables", "--plan", str(plan_file), "--out", str(tmp_path), "--workers", "2"]) == 0
    assert (tmp_path / config.TABLES_JSON_NAME).exists()


def test_dotenv_sets_output_dir(tmp_path: Path, monkeypatch):
    """Tests that settings from a .env file in the working directory reach the CLI."""
    # register the variable so teardown removes what load_dotenv sets
    monkeypatch.setenv("QAE_LAB_OUTPUT_DIR", "unused")
    monkeypatch.delenv("QAE_LAB_OUTPUT_DIR")
    (tmp_path / ".env").write_text("QAE_LAB_OUTPUT_DIR=from_dotenv\n", encoding="utf-8")
    monkeypatch.chdir(tmp_path)
    assert main(["bounds", "--epsilons", "0.01"]) == 0
    assert (tmp_path / "from_dotenv" / config.BOUNDS_CSV_NAME).exists()
    assert not (tmp_path / "results").exists()


def test_config_reads_environment_at_construction(monkeypatch):
    monkeypatch.setenv("QAE_LAB_WORKERS", "3")
    monkeypatch.setenv("QAE_LAB_LOG_LEVEL", "debug")
    settings = config.Config()
    assert settings.workers == 3
    assert settings.log_level == "DEBUG"
    assert config.Config(workers=2).workers == 2


def test_config_rejects_dense_limit_above_qubit_limit(monkeypatch):
    monkeypatch.setenv("QAE_LAB_MAX_QUBITS", "8")
    monkeypatch.setenv("QAE_LAB_DENSE_MAX_QUBITS", "9")
    with pytest.raises(ValueError):
        config.Config()


def test_cli_exits_on_invalid_environment(tmp_path: Path, monkeypatch):
    monkeypatch.setenv("QAE_LAB_WORKERS", "0")
    with pytest.raises(SystemExit) as excinfo:
        main(["bounds", "--out", str(tmp_path)])
    assert excinfo.value.code == 1
