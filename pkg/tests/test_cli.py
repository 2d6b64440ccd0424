import json

import pandas as pd
import pytest

from fuzzyquery.cli.main import main


@pytest.fixture
def workspace(tmp_path):
    spec = tmp_path / "spec.yaml"
    spec.write_text(
        "k: 2\nd: 2\nsizes: [20, 20]\ncenter_separation: 100.0\npoint_std: 1.0\nseed: 4\n"
    )
    return tmp_path


def _last_json(text: str) -> dict:
    return json.loads(text.strip().splitlines()[-1])


@pytest.fixture
def prepared(workspace, capsys):
    data = workspace / "data.csv"
    target = workspace / "target.json"
    assert main(["generate", "--spec", str(workspace / "spec.yaml"), "--out", str(data)]) == 0
    assert main(["target", "--data", str(data), "--mode", "hard-labels", "--out", str(target)]) == 0
    capsys.readouterr()
    return data, target


def test_generate_reports_shape(workspace, capsys):
    out = workspace / "data.csv"
    assert main(["generate", "--spec", str(workspace / "spec.yaml"), "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert (summary["n"], summary["d"], summary["k"]) == (40, 2, 2)
    assert list(pd.read_csv(out).columns) == ["x0", "x1", "label"]


def test_solve_then_evaluate(workspace, prepared, capsys):
    data, target = prepared
    result = workspace / "result.json"
    log = workspace / "queries.jsonl"
    argv = ["solve", "--data", str(data), "--target", str(target), "--m", "30", "--seed", "1",
            "--query-log", str(log), "--out", str(result)]
    assert main(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["solver"] == "two-phase"
    assert set(summary["per_stage"]) == {"sample", "grid"}
    assert len(log.read_text().splitlines()) == summary["queries"]["membership"]

    assert main(["evaluate", "--target", str(target), "--estimate", str(result), "--data", str(data)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["argmax_accuracy"] == 1.0
    assert report["membership_error"] == 0.0


def test_solve_through_similarity_oracle(workspace, prepared, capsys):
    data, target = prepared
    argv = ["solve", "--data", str(data), "--target", str(target), "--m", "30", "--similarity",
            "--out", str(workspace / "result.json")]
    assert main(argv) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["queries"]["membership"] == 0
    assert summary["queries"]["pair"] > 0


def test_missing_target_is_a_config_error(workspace, prepared, capsys):
    data, _ = prepared
    argv = ["solve", "--data", str(data), "--target", str(workspace / "absent.json"),
            "--out", str(workspace / "result.json")]
    assert main(argv) == 2
    payload = _last_json(capsys.readouterr().err)
    assert payload["error"] == "ConfigError"


def test_invalid_override_is_a_config_error(workspace, prepared, capsys):
    data, target = prepared
    argv = ["solve", "--data", str(data), "--target", str(target), "--eta", "1.5",
            "--out", str(workspace / "result.json")]
    assert main(argv) == 2
    assert "errors" in _last_json(capsys.readouterr().err)["context"]


def test_empty_sample_is_a_runtime_error(workspace, prepared, capsys):
    data, target = prepared
    argv = ["solve", "--data", str(data), "--target", str(target), "--m", "1",
            "--out", str(workspace / "result.json")]
    assert main(argv) == 3
    payload = _last_json(capsys.readouterr().err)
    assert payload["error"] == "DegenerateSampleError"
    assert not (workspace / "result.json").exists()


def test_sweep_and_aggregate(workspace, prepared, capsys):
    data, _ = prepared
    config = workspace / "sweep.yaml"
    config.write_text(
        "name: cli\nseed: 3\ntrials: 2\n"
        f"dataset:\n  kind: csv\n  path: {data}\n"
        "target:\n  mode: hard-labels\n"
        "solvers: [two-phase, lloyd]\n"
        "grid:\n  nu: [20, 40]\n"
    )
    records = workspace / "records.jsonl"
    assert main(["sweep", "--config", str(config), "--workers", "1", "--out", str(records)]) == 0
    assert json.loads(capsys.readouterr().out)["runs"] == 2 * 2 * 2
    assert len(records.read_text().splitlines()) == 8

    summary = workspace / "summary.csv"
    assert main(["aggregate", "--records", str(records), "--out", str(summary)]) == 0
    frame = pd.read_csv(summary)
    assert len(frame) == 4
    assert set(frame["solver"]) == {"two-phase", "lloyd"}


def test_kappa_with_similarity_is_a_config_error(workspace, prepared, capsys):
    data, target = prepared
    argv = ["solve", "--data", str(data), "--target", str(target), "--similarity", "--kappa", "0.1",
            "--noise-sigma", "0.1", "--out", str(workspace / "result.json")]
    assert main(argv) == 2
    assert _last_json(capsys.readouterr().err)["error"] == "ConfigError"
    assert not (workspace / "result.json").exists()
