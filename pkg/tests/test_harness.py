"""Experiment configs, reports, envelope fits, and the CLI."""

import json
import math

import numpy as np
import pytest

from entrobound import (
    ConfigValidationError,
    ExperimentConfig,
    FitModel,
    Report,
    emit,
    fit_envelope,
    log_ratio_envelope,
    run,
)
from entrobound.cli import main


# ---------------------------------------------------------------------------
# envelope fits

def test_fit_recovers_a_power_law_exactly():
    m = np.array([4.0, 8.0, 16.0, 32.0, 64.0])
    values = 3.25 * m ** (-0.5)
    fit = fit_envelope((m, values), model=FitModel.POWER_M)
    assert abs(fit.exponent + 0.5) <= 1e-9
    assert abs(fit.constant - 3.25) <= 1e-9
    assert fit.residual_rms <= 1e-9
    assert fit.points_used == 5


def test_fit_recovers_a_log_ratio_law_exactly():
    n = 64
    k = np.arange(6, 65, dtype=float)
    values = 0.75 * log_ratio_envelope(n, k, 1.0) ** 0.5
    fit = fit_envelope((k, values), n, model=FitModel.LOG_RATIO_K)
    assert abs(fit.exponent - 0.5) <= 1e-9
    assert abs(fit.constant - 0.75) <= 1e-9
    assert fit.model == "log-ratio-k"


def test_fit_drops_small_k_by_default():
    n = 16
    k = np.array([2.0, 3.0, 4.0, 8.0, 16.0])
    values = log_ratio_envelope(n, k, 1.0) ** 0.5
    values[:2] = 1.0  # garbage below log2(n), as in trivial-bound entries
    fit = fit_envelope((k, values), n, model=FitModel.LOG_RATIO_K)
    assert fit.points_used == 3
    assert fit.k_range == (4, 16)
    assert abs(fit.exponent - 0.5) <= 1e-9
    noisy = fit_envelope((k, values), n, model=FitModel.LOG_RATIO_K,
                         include_small_k=True)
    assert noisy.points_used == 5
    assert abs(noisy.exponent - 0.5) > 1e-3


def test_fit_input_validation():
    with pytest.raises(ValueError):
        fit_envelope((np.array([4.0, 8.0]), np.array([1.0, 0.5])))
    with pytest.raises(ValueError, match="entries \\[1\\]"):
        fit_envelope((np.array([1.0, 2.0, 3.0]), np.array([1.0, 0.0, 0.5])))
    with pytest.raises(ValueError):
        fit_envelope((np.array([4.0, 8.0, 16.0]), np.ones(3)),
                     model=FitModel.LOG_RATIO_K)


# ---------------------------------------------------------------------------
# configs

def test_config_fills_experiment_defaults():
    cfg = ExperimentConfig(experiment="sigma-decay", seed=0).resolved()
    assert (cfg.q, cfg.n, cfg.samples) == (2.0, 256, 50)
    assert cfg.m_list == [4, 8, 16, 32, 64]


def test_config_derives_a_dyadic_k_list():
    cfg = ExperimentConfig(experiment="ball-entropy", seed=0, n=64).resolved()
    assert cfg.k_list == [6, 12, 24, 64]


def test_config_validation_collects_all_problems():
    cfg = ExperimentConfig(experiment="ball-entropy", seed=0, p=1.0, n=8,
                           k_list=[0, 4], samples=16)
    with pytest.raises(ConfigValidationError) as exc:
        cfg.validate()
    text = "\n".join(exc.value.problems)
    assert "p:" in text and "k_list:" in text
    assert len(exc.value.problems) == 2


def test_config_validation_edges():
    with pytest.raises(ConfigValidationError):
        ExperimentConfig(experiment="nope", seed=0).resolved().validate()
    with pytest.raises(ConfigValidationError):
        ExperimentConfig(experiment="sigma-decay", seed=True).resolved().validate()
    with pytest.raises(ConfigValidationError):
        ExperimentConfig(experiment="duality-check", seed=0, n=13).resolved().validate()
    with pytest.raises(ConfigValidationError):
        ExperimentConfig(experiment="it1", seed=0, n=512,
                         support_size=256).resolved().validate()


def test_config_json_round_trip_rejects_unknown_fields():
    cfg = ExperimentConfig(experiment="mp-duality", seed=3, p=3.0).resolved()
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    with pytest.raises(ConfigValidationError):
        ExperimentConfig.from_json({"experiment": "it1", "seed": 0, "bogus": 1})
    with pytest.raises(ConfigValidationError):
        ExperimentConfig.from_json({"experiment": "it1"})


# ---------------------------------------------------------------------------
# reports

def _tiny_report():
    return Report(experiment="demo", columns={"k": [1, 2], "v": [0.5, 0.25]},
                  metadata={"seed": 0}, summary=["line one", "line two"])


def test_report_csv_uses_repr_floats():
    text = _tiny_report().csv_text()
    assert text.splitlines()[0] == "k,v"
    assert "0.25" in text
    assert text.endswith("\n")


def test_report_json_is_sorted_and_terminated():
    text = _tiny_report().json_text()
    doc = json.loads(text)
    assert doc["columns"]["v"] == [0.5, 0.25]
    assert text == json.dumps(doc, indent=2, sort_keys=True) + "\n"


def test_emit_writes_files(tmp_path):
    out = tmp_path / "report.csv"
    text = emit(_tiny_report(), "csv", str(out))
    assert out.read_text() == text
    with pytest.raises(ConfigValidationError):
        emit(_tiny_report(), "yaml")


# ---------------------------------------------------------------------------
# runners

_TINY = {
    "sigma-decay": dict(n=8, m_list=[1, 2, 4], samples=4),
    "ball-entropy": dict(p=2.0, n=8, k_list=[3, 8], samples=128),
    "duality-check": dict(q=2.0, n=4, m=2, samples=64),
    "mp-duality": dict(p=3.0, subspace_dim=2, support_size=16, trials=2),
    "it1": dict(p=2.0, subspace_dim=2, support_size=32, n=8, k_list=[3, 8],
                samples=48),
    "it2-octahedron": dict(q=2.0, n=8, k_list=[3, 8], samples=64),
}


@pytest.mark.parametrize("experiment", sorted(_TINY))
def test_runners_produce_consistent_reports(experiment):
    cfg = ExperimentConfig(experiment=experiment, seed=1, **_TINY[experiment])
    report, text = run(cfg)
    assert report.experiment == experiment
    lengths = {len(col) for col in report.columns.values()}
    assert len(lengths) == 1
    assert report.metadata["version"].startswith("entrobound")
    assert report.summary
    assert text


@pytest.mark.parametrize("experiment", ["sigma-decay", "ball-entropy", "it1"])
def test_runs_are_byte_identical(experiment):
    cfg = ExperimentConfig(experiment=experiment, seed=2, format="json",
                           **_TINY[experiment])
    _, first = run(cfg)
    _, second = run(cfg)
    assert first == second


def test_run_rejects_invalid_configs():
    with pytest.raises(ConfigValidationError):
        run(ExperimentConfig(experiment="ball-entropy", seed=0, p=1.0))


# ---------------------------------------------------------------------------
# command line

def test_cli_writes_machine_output_to_stdout(capsys):
    code = main(["sigma-decay", "--seed", "1", "--n", "8",
                 "--m-list", "1,2,4", "--samples", "4"])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.splitlines()[0] == "m,sigma"
    assert "fitted exponent" in captured.err


def test_cli_writes_files_and_summarizes(tmp_path, capsys):
    out = tmp_path / "decay.json"
    code = main(["sigma-decay", "--seed", "1", "--n", "8", "--m-list", "1,2,4",
                 "--samples", "4", "--format", "json", "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert f"wrote {out}" in captured.out
    doc = json.loads(out.read_text())
    assert doc["experiment"] == "sigma-decay"


def test_cli_rejects_bad_parameters(capsys):
    code = main(["ball-entropy", "--seed", "0", "--p", "1.0", "--n", "8"])
    captured = capsys.readouterr()
    assert code == 2
    assert "error: p:" in captured.err


def test_cli_requires_a_seed(capsys):
    code = main(["mp-duality"])
    captured = capsys.readouterr()
    assert code == 2
    assert "seed: required" in captured.err


def test_cli_flags_override_the_config_file(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"seed": 1, "p": 2.0, "n": 8, "samples": 64,
                                  "format": "json"}))
    code = main(["ball-entropy", "--config", str(config), "--n", "6"])
    captured = capsys.readouterr()
    assert code == 0
    doc = json.loads(captured.out)
    assert doc["metadata"]["n"] == 6
    assert doc["metadata"]["seed"] == 1


def test_cli_reports_unreadable_configs(tmp_path, capsys):
    code = main(["sigma-decay", "--config", str(tmp_path / "absent.json"),
                 "--seed", "0"])
    captured = capsys.readouterr()
    assert code == 2
    assert "config: cannot read" in captured.err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["sigma-decay", "--config", str(bad), "--seed", "0"]) == 2
