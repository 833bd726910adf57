import json
import subprocess
import sys

import numpy as np
import pytest

from walkpca import tables
from walkpca.cli import main
from walkpca.config import config_from_dict
from walkpca.experiment import run_experiment


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def test_simulate_pca_compare_chain(tmp_path, capsys):
    w = tmp_path / "w.traj"
    assert run(["simulate", "--process", "flat", "--n", 1000, "--d", 2000, "--seed", 7, "--out", w], capsys)[0] == 0
    assert run(["pca", "--in", w, "--k", 50, "--out-dir", tmp_path], capsys)[0] == 0
    spec = tables.read_spectrum(tmp_path / "spectrum.csv")
    assert spec.k.tolist() == list(range(1, 51))
    assert run(["predict", "--process", "flat", "--n", 1000, "--k", 50, "--out", tmp_path / "p.csv"], capsys)[0] == 0
    pred = tables.read_spectrum(tmp_path / "p.csv")
    assert pred.explained_ratio[0] == pytest.approx(0.6079, abs=1e-4)

    code, out = run(["compare", "--empirical", tmp_path / "spectrum.csv", "--predicted", tmp_path / "p.csv",
                     "--k-range", "1:20", "--projections", tmp_path / "projections.csv",
                     "--out", tmp_path / "r.json"], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert set(doc["spectrum"]) >= {"per_k", "median_rel_error", "max_rel_error"}
    assert len(doc["spectrum"]["per_k"]) == 20
    assert set(doc["projection"]) >= {"per_k_corr", "zero_crossings"}
    assert json.loads((tmp_path / "r.json").read_text()) == doc


def test_compare_with_distance_and_averaging(tmp_path, capsys):
    w = tmp_path / "ou.traj"
    run(["simulate", "--process", "ou", "--alpha", 0.1, "--n", 300, "--d", 500, "--out", w,
         "--distance", tmp_path / "dist.csv"], capsys)
    run(["pca", "--in", w, "--k", 30, "--out-dir", tmp_path], capsys)
    run(["predict", "--process", "ou", "--alpha", 0.1, "--n", 300, "--k", 30, "--out", tmp_path / "p.csv"], capsys)
    code, out = run(["compare", "--empirical", tmp_path / "spectrum.csv", "--predicted", tmp_path / "p.csv",
                     "--distance", tmp_path / "dist.csv", "--alpha", 0.1, "--averaging", "avg.csv",
                     "--out-dir", tmp_path], capsys)
    assert code == 0
    doc = json.loads(out.out)
    assert doc["plateau"]["predicted"] == pytest.approx(2.294157, rel=1e-6)
    assert set(doc["plateau"]) >= {"estimate", "predicted", "rel_dev"}
    assert doc["averaging"]["n_c"] == pytest.approx(1 / 0.19)
    assert doc["averaging"]["series_file"] == "avg.csv"


def test_pipeline_equals_in_process(tmp_path, capsys):
    cfg = config_from_dict({"version": 1, "name": "eq", "process": "momentum", "gamma": 0.5,
                            "n": 200, "d": 300, "seeds": [7], "k": 50, "proj_components": 4,
                            "tableau_pairs": [], "k_range": [1, 10]})
    run_experiment(cfg, tmp_path / "runner")
    seed_dir = tmp_path / "runner" / "eq" / "seed_7"

    w = tmp_path / "w.traj"
    run(["simulate", "--process", "momentum", "--gamma", 0.5, "--n", 200, "--d", 300, "--seed", 7, "--out", w], capsys)
    run(["pca", "--in", w, "--k", 50, "--proj-components", 4, "--out-dir", tmp_path], capsys)
    run(["predict", "--process", "momentum", "--gamma", 0.5, "--n", 200, "--k", 50, "--out", tmp_path / "p.csv"], capsys)

    for a, b in [("spectrum.csv", "spectrum.csv"), ("projections.csv", "projections.csv"), ("p.csv", "predicted.csv")]:
        x, y = tables.read_csv(tmp_path / a), tables.read_csv(seed_dir / b)
        assert list(x) == list(y)
        for col in x:
            np.testing.assert_allclose(x[col], y[col], rtol=1e-12, atol=0)


def test_text_trajectories_feed_the_pipeline(tmp_path, capsys):
    w = tmp_path / "w.txt"
    run(["simulate", "--process", "flat", "--n", 40, "--d", 30, "--text", "--out", w], capsys)
    assert w.read_text().count("\n") == 40
    assert run(["pca", "--in", w, "--k", 5, "--out-dir", tmp_path], capsys)[0] == 0


def test_project_subcommand(tmp_path, capsys):
    w = tmp_path / "w.traj"
    run(["simulate", "--process", "flat", "--n", 20, "--d", 100, "--out", w], capsys)
    assert run(["project", "--in", w, "--target-dim", 10, "--seed", 3, "--out", tmp_path / "y.traj"], capsys)[0] == 0
    from walkpca.trajectory_io import read_trajectory

    assert read_trajectory(tmp_path / "y.traj").d == 10


def test_unknown_config_key_exits_2(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"version": 1, "name": "x", "colour": "red"}))
    code, out = run(["run", p, "--out-dir", tmp_path], capsys)
    assert code == 2
    assert "colour" in out.err


def test_divergence_exits_3(tmp_path, capsys):
    code, out = run(["simulate", "--process", "linreg", "--n", 3000, "--d", 50, "--lr", 1.0,
                     "--out", tmp_path / "w.traj"], capsys)
    assert code == 3 and "diverged" in out.err


def test_io_failures_exit_4(tmp_path, capsys):
    assert run(["pca", "--in", tmp_path / "missing.traj", "--k", 2], capsys)[0] == 4
    bad = tmp_path / "bad.traj"
    bad.write_bytes(b"WSP1garbage")
    assert run(["pca", "--in", bad, "--k", 2], capsys)[0] == 4


def test_invalid_arguments_exit_2(tmp_path, capsys):
    assert run(["simulate", "--process", "ou", "--alpha", 3.0, "--n", 10, "--d", 2,
                "--out", tmp_path / "w.traj"], capsys)[0] == 2
    assert run(["predict", "--process", "decayed", "--decay-rate", 0.9, "--n", 10, "--k", 3,
                "--out", tmp_path / "p.csv"], capsys)[0] == 2


def test_run_small_config_with_figures(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"version": 1, "name": "tiny", "process": "ou", "alpha": [0.1, 0.5],
                             "n": 120, "d": 200, "seeds": [0, 1], "k": 30, "k_range": [1, 10],
                             "compare_averaging": True, "burn_in_factor": 2.0,
                             "tableau_pairs": [[1, 2]]}))
    code, out = run(["run", p, "--out-dir", tmp_path, "--threads", 2, "--figures"], capsys)
    assert code == 0
    root = tmp_path / "tiny"
    summary = json.loads((root / "summary.json").read_text())
    assert set(summary["runs"]) == {"alpha_0.1", "alpha_0.5"}
    seed = root / "alpha_0.1" / "seed_1"
    for name in ("spectrum.csv", "predicted.csv", "projections.csv", "tableau_1_2.csv", "distance.csv",
                 "averaging.csv", "report.json", "spectrum.png", "tableau.png", "distance.png", "averaging.png"):
        assert (seed / name).exists(), name
    assert (root / "alpha_0.1" / "spectrum_mean.csv").exists()
    header = (seed / "tableau_1_2.csv").read_text().splitlines()[0]
    assert header == "t,proj_k1,proj_k2,lissajous_k1,lissajous_k2"


def test_figures_are_opt_in(tmp_path):
    cfg = config_from_dict({"version": 1, "name": "nofig", "n": 50, "d": 40, "k": 10, "k_range": [1, 5]})
    run_experiment(cfg, tmp_path)
    assert not list((tmp_path / "nofig").rglob("*.png"))


def test_linreg_run_writes_decay_artifacts(tmp_path):
    cfg = config_from_dict({"version": 1, "name": "lr", "process": "linreg", "n": 2000, "d": 100,
                            "lr": 1e-3, "k": 10, "k_range": [1, 5], "decay_stride": 50})
    run_experiment(cfg, tmp_path)
    seed = tmp_path / "lr" / "seed_0"
    rep = json.loads((seed / "report.json").read_text())
    assert rep["decay_fit"]["stride"] == 50
    assert 0 < rep["decay_fit"]["rate_per_step"] < 1
    assert (seed / "decayed_walk" / "tableau_1_2.csv").exists()
    assert tables.read_csv(seed / "step_norms.csv")["t"][:2].tolist() == [50.0, 100.0]
    walk = json.loads((seed / "decayed_walk" / "report.json").read_text())
    assert walk["process"]["decay_rate"] == pytest.approx(rep["decay_fit"]["rate_per_step"])


def test_threads_do_not_change_outputs(tmp_path):
    cfg = config_from_dict({"version": 1, "name": "det", "process": "flat", "n": 100, "d": 150,
                            "seeds": [0, 1, 2], "k": 20, "k_range": [1, 5]})
    run_experiment(cfg, tmp_path / "a", threads=1)
    run_experiment(cfg, tmp_path / "b", threads=3)
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "walkpca.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("simulate", "pca", "predict", "compare", "project", "run"):
        assert cmd in res.stdout
