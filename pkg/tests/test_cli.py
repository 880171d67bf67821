import json

import numpy as np
import pytest

from certopt import cli
from certopt.manifest import MANIFEST_SCHEMA, ManifestError, RunManifest, validate
from certopt.mopso import ParetoArchive, PopulationHistory

FAST = ["--n", "60", "--epochs", "3", "--swarm-size", "20", "--iterations", "20"]


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)


@pytest.fixture
def zrun(tmp_path):
    """A generated ZDT3 run with two cheaply trained models."""
    d = tmp_path / "z"
    assert run("generate", "zdt3", "--run", d, "--n", 80, "--seed", 3) == 0
    assert run("train", "--run", d, "--epochs", 3) == 0
    return d


@pytest.mark.parametrize("name, header", [
    ("binh_korn", "x1,x2,f1,f2,g1,g2"),
    ("zdt3", "x1,x2,x3,f1,f2"),
])
def test_generate_shape(tmp_path, name, header):
    assert run("generate", name, "--run", tmp_path, "--n", 1000, "--seed", 7) == 0
    lines = (tmp_path / "dataset.csv").read_text().splitlines()
    assert lines[0] == header and len(lines) == 1001
    corr = (tmp_path / "correlation.csv").read_text().splitlines()
    assert corr[0] == "column," + header


def test_generate_is_byte_identical(tmp_path):
    for sub in ("a", "b"):
        assert run("generate", "binh_korn", "--run", tmp_path / sub, "--seed", 7, "--n", 200) == 0
    for f in ("dataset.csv", "correlation.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_generate_rejects_tiny_n(tmp_path, capsys):
    assert run("generate", "zdt3", "--run", tmp_path, "--n", 5) == 1
    assert "at least 10" in capsys.readouterr().err


def test_missing_target_names_columns(zrun, capsys):
    assert run("train", "--run", zrun, "--target", "g1") == 1
    assert "f1, f2" in capsys.readouterr().err


def test_train_writes_artifacts(zrun):
    m = RunManifest.load(zrun)
    assert set(m.artifacts["models"]) == {"f1", "f2"}
    metrics = json.loads((zrun / "metrics" / "f1.json").read_text())
    assert {"mse", "mae", "widths", "n_params", "loss"} <= set(metrics)
    assert (zrun / "parity" / "f2.csv").read_text().startswith("predicted,actual\n")


def test_train_with_widths(zrun):
    assert run("train", "--run", zrun, "--target", "f1", "--widths", "3,7,1", "--epochs", 2) == 0
    assert json.loads((zrun / "models" / "f1.json").read_text())["widths"] == [3, 7, 1]


def test_tune_writes_leaderboard(zrun):
    assert run("train", "--run", zrun, "--target", "f2", "--tune", "--hb-R", 3,
               "--hb-eta", 3, "--epochs", 2) == 0
    board = json.loads((zrun / "leaderboards" / "f2.json").read_text())
    assert board["entries"][0]["rank"] == 1
    assert "f2" in RunManifest.load(zrun).artifacts["leaderboards"]


def test_optimize_counts(zrun):
    assert run("optimize", "--run", zrun, "--swarm-size", 10, "--iterations", 5) == 0
    assert PopulationHistory.from_csv(zrun / "history.csv").count == 50
    arch = ParetoArchive.from_csv(zrun / "archive.csv", 3, 2)
    assert arch.is_mutually_nondominated()


def test_certify_exit_codes(zrun, capsys):
    assert run("optimize", "--run", zrun, "--swarm-size", 20, "--iterations", 20) == 0
    assert run("certify", "--run", zrun, "--epsilon", 1e-12) == 2
    assert "FAIL" in capsys.readouterr().out
    assert run("certify", "--run", zrun, "--self", "--epsilon", 0.05) == 0
    report = json.loads((zrun / "report.json").read_text())
    assert all(o["rb"] == 0.0 for o in report["per_objective"])
    assert report["verdict"] == "pass"


def test_certify_needs_population(zrun, capsys):
    assert run("optimize", "--run", zrun, "--swarm-size", 10, "--iterations", 5) == 0
    assert run("certify", "--run", zrun) == 1
    assert "larger swarm" in capsys.readouterr().err


def test_certify_without_history(zrun, capsys):
    assert run("certify", "--run", zrun) == 1
    assert "optimize" in capsys.readouterr().err


def test_command_without_run(tmp_path, capsys):
    assert run("train", "--run", tmp_path / "nothing") == 1
    assert "generate" in capsys.readouterr().err


@pytest.mark.parametrize("name, outputs", [
    ("binh_korn", {"f1", "f2", "g1", "g2"}),
    ("zdt3", {"f1", "f2"}),
    ("dtlz2", {"f1", "f2", "f3"}),
])
def test_repro_model_sets(tmp_path, name, outputs):
    code = run("repro", name, "--run", tmp_path, "--seed", 2, *FAST)
    assert code in (0, 2)
    m = RunManifest.load(tmp_path)
    assert set(m.artifacts["models"]) == outputs
    assert m.stages == ["generate", "train", "optimize", "certify", "optimize_rigorous", "fronts"]
    for rel in m.referenced():
        assert (tmp_path / rel).is_file()
    assert set(m.seeds) >= {"data", "train", "optimize", "certify", "rigorous"}
    fronts = json.loads((tmp_path / "fronts.json").read_text())
    assert {"predicted", "reevaluated"} <= set(fronts)


def test_report_command(tmp_path, capsys):
    run("repro", "zdt3", "--run", tmp_path, "--seed", 1, *FAST)
    capsys.readouterr()
    assert run("report", "--run", tmp_path) == 0
    out = capsys.readouterr().out
    assert "robustness (Np=381" in out and "front agreement" in out


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# budget\npso.swarm_size = 12  # small\npso.iterations=3\n"
                   "train.epochs=2\nrobust.epsilon = 0.2\nwidths.f1 = 3,5,1\nseed = 4\n")
    d = tmp_path / "run"
    assert run("generate", "zdt3", "--run", d, "--config", cfg, "--n", 40) == 0
    m = RunManifest.load(d)
    assert m.config["pso"]["swarm_size"] == 12 and m.config["robust"]["epsilon"] == 0.2
    assert m.seeds["data"] == 4
    assert run("train", "--run", d, "--target", "f1") == 0
    assert json.loads((d / "models" / "f1.json").read_text())["widths"] == [3, 5, 1]
    assert run("optimize", "--run", d) == 1  # the f2 model is still missing
    assert run("train", "--run", d, "--target", "f2") == 0
    # flags beat the file
    assert run("optimize", "--run", d, "--config", cfg, "--iterations", 2) == 0
    assert PopulationHistory.from_csv(d / "history.csv").count == 24
    assert RunManifest.load(d).config["pso"]["iterations"] == 2


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("pso.swarm = 10\n")
    assert run("generate", "zdt3", "--run", tmp_path / "r", "--config", cfg) == 1
    assert "swarm_size" in capsys.readouterr().err


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "41")
    assert run("generate", "zdt3", "--run", tmp_path, "--n", 20) == 0
    assert RunManifest.load(tmp_path).seeds["data"] == 41
    assert run("generate", "zdt3", "--run", tmp_path / "b", "--n", 20, "--seed", 3) == 0
    assert RunManifest.load(tmp_path / "b").seeds["data"] == 3


def test_dtlz2_form_flag(tmp_path):
    assert run("generate", "dtlz2", "--run", tmp_path, "--n", 20, "--dtlz2-form", "standard") == 0
    assert RunManifest.load(tmp_path).config["data"]["dtlz2_form"] == "standard"


def test_manifest_round_trip(zrun):
    m = RunManifest.load(zrun)
    doc = json.loads((zrun / "manifest.json").read_text())
    assert m.to_dict() == doc
    validate(doc)
    assert doc["schema"] == MANIFEST_SCHEMA["$id"] == "certopt.manifest/1"


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("seeds"),
    lambda d: d.update(schema="certopt.manifest/0"),
    lambda d: d["artifacts"].update(unknown="x.csv"),
    lambda d: d["seeds"].update(data="seven"),
])
def test_manifest_schema_rejects(zrun, mutate):
    doc = json.loads((zrun / "manifest.json").read_text())
    mutate(doc)
    with pytest.raises(ManifestError):
        validate(doc)


def test_manifest_detects_tampered_config(zrun):
    doc = json.loads((zrun / "manifest.json").read_text())
    doc["config"]["seed"] = 999
    with pytest.raises(ManifestError, match="run_id"):
        RunManifest.from_dict(doc, zrun)


def test_manifest_refuses_missing_files(tmp_path):
    m = RunManifest(tmp_path, "zdt3")
    m.record("history", "history.csv")
    with pytest.raises(ManifestError, match="history.csv"):
        m.save()


def test_config_snapshot_round_trip():
    cfg = cli.RunConfig(seed=5)
    cfg = cli.apply_setting(cfg, "widths.f2", [3, 4, 1])
    cfg = cli.apply_setting(cfg, "robust.N", 10000)
    assert cli.RunConfig.from_snapshot(cfg.snapshot()) == cfg
