import json
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

import cli
from config.experiment_config import (
    DEFAULT_PAIRED_FRACTIONS,
    DatasetSource,
    ExperimentConfig,
    SyntheticSource,
    apply_overrides,
    config_to_dict,
    experiment_config_from_dict,
    load_experiment_config,
)
from config.settings import load_settings
from src.experiment.report import (
    METADATA_JSON,
    REPORT_CSV,
    REPORT_MD,
    RUNS_CSV,
    TIMINGS_JSON,
    emit_report,
    format_cell,
    render_markdown,
    runs_frame,
    summary_frame,
    write_report_bundle,
)
from src.experiment.runner import CellResult, FractionSummary, run_experiment, run_lambda_grid
from src.utils.errors import ConfigError
from src.utils.validation import validate_experiment_config
from tests.conftest import make_dataset

TINY_CONFIG = {
    "dataset": {"synthetic": {"n_clusters": 2, "n": 20, "dims": [3, 3], "separation": 10.0, "seed": 0}},
    "paired_fractions": [1.0],
    "repeats": 1,
    "kmeans_restarts": 2,
    "train": {"epochs_step1": 2, "epochs_step3": 1, "learning_rate": 0.001, "knn_k": 2, "hidden_width": 4},
}


def _write_config(directory, payload=None):
    path = directory / "config.json"
    path.write_text(json.dumps(payload if payload is not None else TINY_CONFIG))
    return path


# -- config -----------------------------------------------------------------------

def test_defaults_sweep_five_fractions_ten_repeats():
    config = ExperimentConfig()
    assert config.paired_fractions == DEFAULT_PAIRED_FRACTIONS == (0.1, 0.3, 0.5, 0.7, 0.9)
    assert config.repeats == 10
    assert config.train.hp.alpha == 0.1
    assert config.unpaired_policy == "drop-one"


@pytest.mark.parametrize(
    "payload",
    [
        {"repeats": 2, "colour": "blue"},
        {"train": {"lambda4": 1.0}},
        {"dataset": {"synthetic": {"n": 10, "views": 3}}},
        {"dataset": {"manifest": "a.json", "synthetic": {"n": 10}}},
        {"paired_fractions": [0.0]},
        {"repeats": 0},
        {"eigensolver": "arpack"},
    ],
)
def test_invalid_config_rejected(payload):
    with pytest.raises(ConfigError):
        experiment_config_from_dict(payload)


def test_relative_manifest_resolves_against_config_dir(tmp_path):
    path = _write_config(tmp_path, {"dataset": {"manifest": "data/manifest.json"}})
    config = load_experiment_config(path)
    assert config.dataset.manifest == str(tmp_path / "data" / "manifest.json")


def test_missing_and_malformed_config_files(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "absent.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_experiment_config(broken)


def test_config_dict_round_trip():
    config = experiment_config_from_dict(TINY_CONFIG)
    assert experiment_config_from_dict(config_to_dict(config)) == config


def test_overrides():
    config = apply_overrides(
        ExperimentConfig(),
        {"paired_fraction": 0.3, "seed": 7, "k_latent": 5, "clusters": 4, "lambda2": 0.5, "knn_k": 3, "tau": None},
    )
    assert config.paired_fractions == (0.3,)
    assert config.base_seed == 7
    assert config.n_clusters == 4
    assert config.train.hp.latent_dim == 5
    assert config.train.hp.lambda2 == 0.5
    assert config.train.hp.tau == 0.5
    assert config.train.knn_k == 3
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), {"gamma": 1.0})


def test_duplicate_fractions_collapse():
    assert ExperimentConfig(paired_fractions=(0.5, 0.5, 1.0)).paired_fractions == (0.5, 1.0)


# -- validation and settings ----------------------------------------------------

def test_validation_accepts_defaults():
    assert validate_experiment_config(ExperimentConfig()) == (True, "")


def test_validation_reports_missing_manifest(tmp_path):
    config = ExperimentConfig(dataset=DatasetSource(manifest=str(tmp_path / "nope.json")))
    ok, message = validate_experiment_config(config)
    assert not ok
    assert "manifest not found" in message


def test_validation_reports_too_few_paired_samples():
    config = ExperimentConfig(
        dataset=DatasetSource(synthetic=SyntheticSource(n=20)),
        paired_fractions=(0.1,),
    )
    ok, message = validate_experiment_config(config)
    assert not ok
    assert "knn_k=5" in message


def test_validation_reports_too_many_clusters():
    config = ExperimentConfig(dataset=DatasetSource(synthetic=SyntheticSource(n=20)), n_clusters=25)
    ok, message = validate_experiment_config(config)
    assert not ok
    assert "exceeds" in message


@pytest.mark.parametrize("name,value", [("PVCMC_JOBS", "many"), ("PVCMC_JOBS", "0"), ("PVCMC_LOG_LEVEL", "LOUD")])
def test_bad_settings(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigError):
        load_settings()


def test_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("PVCMC_OUT_DIR", str(tmp_path))
    monkeypatch.setenv("PVCMC_JOBS", "3")
    monkeypatch.setenv("PVCMC_LOG_LEVEL", "debug")
    settings = load_settings()
    assert settings.out_dir == tmp_path
    assert settings.jobs == 3
    assert settings.log_level == "DEBUG"


# -- sweeps and reports -----------------------------------------------------------

def test_report_shape(tiny_experiment):
    report = run_experiment(tiny_experiment)
    assert report.complete
    assert [s.fraction for s in report.summaries] == [0.5, 1.0]
    for summary in report.summaries:
        assert [run.repeat for run in summary.runs] == [0, 1]
        assert [run.seed for run in summary.runs] == [0, 1]
        assert 0.0 <= summary.mean("acc") <= 1.0
        assert 0.0 <= summary.mean("nmi") <= 1.0
        assert abs(sum(summary.mean_weights()) - 1.0) < 1e-9


def test_single_repeat_has_zero_std(tiny_experiment):
    report = run_experiment(replace(tiny_experiment, repeats=1, paired_fractions=(1.0,)))
    assert report.summaries[0].std("acc") == 0.0
    assert report.summaries[0].std("nmi") == 0.0


def test_report_bundle_is_reproducible(tmp_path, tiny_experiment):
    first = write_report_bundle(run_experiment(tiny_experiment), tmp_path / "a")
    second = write_report_bundle(run_experiment(tiny_experiment), tmp_path / "b")
    for name in (REPORT_CSV, RUNS_CSV, REPORT_MD, METADATA_JSON):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    timings = json.loads(first["timings"].read_text())
    assert len(timings) == 4 and all(entry["wall_time"] >= 0 for entry in timings)
    assert second["timings"].name == TIMINGS_JSON


def test_failed_cell_marks_whole_fraction(tmp_path, tiny_experiment):
    config = replace(
        tiny_experiment,
        paired_fractions=(0.1, 1.0),
        repeats=1,
        train=replace(tiny_experiment.train, knn_k=5),
    )
    report = run_experiment(config)
    assert not report.complete
    failed, ok = report.summaries
    assert failed.mean("acc") is None and failed.mean_weights() is None
    assert format_cell(failed, "acc").startswith("FAILED(ImputationError")
    assert ok.complete
    markdown = render_markdown(report)
    assert "FAILED(ImputationError" in markdown
    frame = summary_frame(report)
    assert frame["status"].tolist() == ["failed", "ok"]
    assert "ImputationError" in runs_frame(report)["error"].iloc[0]


def test_cell_format_four_decimals():
    summary = FractionSummary(0.5, [CellResult(0.5, 0, 0, acc=0.5, nmi=0.2), CellResult(0.5, 1, 1, acc=1.0, nmi=0.3)])
    assert format_cell(summary, "acc") == "0.7500±0.2500"
    assert format_cell(summary, "nmi") == "0.2500±0.0500"


def test_csv_keeps_full_precision_markdown_rounds(tmp_path, tiny_experiment):
    report = run_experiment(replace(tiny_experiment, paired_fractions=(1.0,)))
    emit_report(report, tmp_path, "csv")
    emit_report(report, tmp_path, "markdown")
    frame = pd.read_csv(tmp_path / REPORT_CSV)
    summary = report.summaries[0]
    assert frame["acc_mean"].iloc[0] == summary.mean("acc")
    assert f"{summary.mean('acc'):.4f}±{summary.std('acc'):.4f}" in (tmp_path / REPORT_MD).read_text()
    with pytest.raises(ConfigError):
        emit_report(report, tmp_path, "html")


def test_experiment_needs_labels(tiny_experiment):
    X = np.random.default_rng(0).uniform(size=(10, 2))
    with pytest.raises(ConfigError):
        run_experiment(tiny_experiment, dataset=make_dataset(X, X.copy()))


def test_metadata_records_seed_rule_and_missing_rate(tiny_experiment):
    metadata = run_experiment(replace(tiny_experiment, repeats=1)).metadata
    assert metadata["fraction_semantics"]["missing_rate"] == {"0.5": 0.5, "1": 0.0}
    assert "base_seed + repeat" in metadata["seed_rule"]
    assert metadata["config"]["repeats"] == 1


def test_lambda_grid_applies_value_to_all_three(tiny_experiment):
    config = replace(tiny_experiment, paired_fractions=(1.0,), repeats=1)
    reports = run_lambda_grid(config, grid=(0.0, 0.5))
    assert [value for value, _ in reports] == [0.0, 0.5]
    for value, report in reports:
        train = report.metadata["config"]["train"]
        assert train["lambda1"] == train["lambda2"] == train["lambda3"] == value


@pytest.mark.slow
def test_parallel_cells_match_sequential(tiny_experiment):
    sequential = runs_frame(run_experiment(tiny_experiment, jobs=1))
    parallel = runs_frame(run_experiment(tiny_experiment, jobs=2))
    pd.testing.assert_frame_equal(sequential, parallel)


# -- command line -------------------------------------------------------------------

def test_cli_eval(tmp_path, capsys):
    (tmp_path / "y.csv").write_text("0\n0\n1\n1\n")
    (tmp_path / "l.csv").write_text("1\n1\n0\n0\n")
    code = cli.main(["eval", "--true", str(tmp_path / "y.csv"), "--pred", str(tmp_path / "l.csv")])
    assert code == cli.EXIT_OK
    assert "ACC=1.0000 NMI=1.0000" in capsys.readouterr().out


def test_cli_eval_missing_file_is_config_error(tmp_path, capsys):
    code = cli.main(["eval", "--true", str(tmp_path / "missing.csv"), "--pred", str(tmp_path / "missing.csv")])
    assert code == cli.EXIT_CONFIG
    assert "❌ Error" in capsys.readouterr().err


def test_cli_synth(tmp_path):
    code = cli.main(["synth", "--out-dir", str(tmp_path), "--clusters", "2", "--n", "12", "--dims", "3,2"])
    assert code == cli.EXIT_OK
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["views"] == ["view0.csv", "view1.csv"]


def test_cli_run_rejects_unknown_config_key(tmp_path):
    path = _write_config(tmp_path, {"repeats": 1, "bogus": True})
    assert cli.main(["run", "--config", str(path), "--out-dir", str(tmp_path / "out")]) == cli.EXIT_CONFIG


def test_cli_run_writes_report(tmp_path):
    path = _write_config(tmp_path)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(path), "--out-dir", str(out)]) == cli.EXIT_OK
    for name in (REPORT_CSV, RUNS_CSV, REPORT_MD, METADATA_JSON, TIMINGS_JSON):
        assert (out / name).exists()


def test_cli_run_single_format(tmp_path):
    path = _write_config(tmp_path)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(path), "--out-dir", str(out), "--format", "markdown"]) == cli.EXIT_OK
    assert (out / REPORT_MD).exists()
    assert not (out / REPORT_CSV).exists()


def test_cli_train_dumps_artifacts(tmp_path, capsys):
    path = _write_config(tmp_path)
    out = tmp_path / "train"
    code = cli.main(["train", "--config", str(path), "--out-dir", str(out), "--dump-embedding", "--seed", "3"])
    assert code == cli.EXIT_OK
    labels = (out / "labels.csv").read_text().split()
    assert len(labels) == 20 and set(labels) <= {"0", "1"}
    assert (out / "result.json").exists() and (out / "z.npy").exists()
    assert (out / "embedding.csv").exists()
    assert "ACC=" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [["run", "--paired-fraction", "abc"], ["run", "--bogus"], ["train", "--seed", "x"], ["eval"], []],
)
def test_cli_bad_arguments_are_config_errors(argv):
    assert cli.main(argv) == cli.EXIT_CONFIG


def test_cli_help_exits_cleanly(capsys):
    assert cli.main(["--help"]) == cli.EXIT_OK
    assert "usage" in capsys.readouterr().out


def test_cli_train_fraction_defaults_to_fully_paired(capsys):
    args = cli.build_parser().parse_args(["train"])
    assert cli._train_fraction(args, ExperimentConfig()) == 1.0
    assert "Paired fraction: 1.0" in capsys.readouterr().out


def test_cli_train_fraction_from_flag():
    args = cli.build_parser().parse_args(["train", "--paired-fraction", "0.3"])
    config = cli._config_from_args(args)
    assert cli._train_fraction(args, config) == 0.3
