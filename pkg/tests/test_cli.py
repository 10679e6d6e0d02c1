import json
import os

import numpy as np
import pytest

from conducta.cli import main
from conducta.graph import load_edge_list, write_edge_list

from conftest import two_clique_graph


@pytest.fixture
def clique_fixture(tmp_path):
    """Edge list, labels and partition config for the planted two-clique graph."""
    g = two_clique_graph(12)
    graph_path = tmp_path / "graph.txt"
    write_edge_list(g, graph_path)
    labels_path = tmp_path / "labels.txt"
    labels_path.write_text("\n".join(["0"] * 12 + ["1"] * 12) + "\n")
    config = {
        "schema": 1,
        "graph": {"edges": str(graph_path)},
        "pipeline": {"r_refs": 4, "n_train": 10, "seed": 11},
        "mh": {"steps": 120, "burn_in": 40, "chains": 2},
        "labels": str(labels_path),
        "out_dir": str(tmp_path / "out"),
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    return g, graph_path, labels_path, config_path, config


def make_training_csv(path, rng, n=20, noisy=True):
    rows = ["vertex,coord_0,coord_1,conductance"]
    X = rng.uniform(-2, 2, size=(n, 2))
    y = np.sin(X[:, 0]) * 0.2 + 0.4 + (rng.normal(size=n) * 0.02 if noisy else 0.0)
    for i in range(n):
        rows.append(f"{i},{X[i,0]},{X[i,1]},{y[i]}")
    path.write_text("\n".join(rows) + "\n")
    return X, y


class TestBuildGraph:
    def test_from_points(self, tmp_path, capsys):
        pts = tmp_path / "pts.csv"
        pts.write_text("0,0\n0,1\n1,0\n5,5\n5,6\n6,5\n")
        out = tmp_path / "graph.txt"
        rc = main(["build-graph", "--points", str(pts), "--k", "2", "--out", str(out)])
        assert rc == 0
        g = load_edge_list(out)
        assert g.n == 6
        assert "n=6" in capsys.readouterr().out

    def test_missing_file_exit2(self, tmp_path, capsys):
        rc = main(["build-graph", "--points", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "nope.csv" in capsys.readouterr().err

    def test_disconnected_warning_names_largest(self, tmp_path, capsys):
        edges = tmp_path / "e.txt"
        edges.write_text("0 1 1.0\n1 2 1.0\n3 4 1.0\n")
        rc = main(["build-graph", "--edges", str(edges), "--out", str(tmp_path / "o.txt")])
        assert rc == 0
        err = capsys.readouterr().err
        assert "largest has 3" in err

    def test_validation_error_exit2(self, tmp_path, capsys):
        pts = tmp_path / "pts.csv"
        pts.write_text("0,0\n1,1\n")
        rc = main(["build-graph", "--points", str(pts), "--k", "5", "--out", str(tmp_path / "o")])
        assert rc == 2


class TestEmbedCommand:
    def test_writes_csv(self, tmp_path, clique_fixture):
        _, graph_path, _, _, _ = clique_fixture
        out = tmp_path / "emb.csv"
        rc = main(["embed", "--graph", str(graph_path), "--refs", "3", "--seed", "4", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "vertex,coord_0,coord_1,coord_2,l2norm"
        assert len(lines) == 25


class TestConductanceCommand:
    def test_two_triangle_center0(self, tmp_path, two_triangle, capsys):
        graph_path = tmp_path / "tt.txt"
        write_edge_list(two_triangle, graph_path)
        out = tmp_path / "prof.csv"
        rc = main([
            "conductance", "--graph", str(graph_path), "--centers", "0",
            "--radius", "10", "--budget", "0.5", "--out", str(out),
        ])
        assert rc == 0
        rows = [line.split(",") for line in out.read_text().strip().splitlines()[1:]]
        by_radius = {float(r[1]): r for r in rows}
        assert float(by_radius[1.0][4]) == pytest.approx(1.0 / 7.0, abs=1e-15)
        assert by_radius[1.0][5] == "true"
        assert "conductance 0.14285714285714285 at radius 1" in capsys.readouterr().out

    def test_infeasible_center_reported(self, tmp_path, two_triangle, capsys):
        graph_path = tmp_path / "tt.txt"
        write_edge_list(two_triangle, graph_path)
        out = tmp_path / "prof.csv"
        rc = main([
            "conductance", "--graph", str(graph_path), "--centers", "2",
            "--budget", "0.1", "--out", str(out),
        ])
        assert rc == 0
        assert "infeasible" in capsys.readouterr().out
        rows = out.read_text().strip().splitlines()[1:]
        assert all(r.endswith("false") for r in rows)

    def test_all_centers(self, tmp_path, two_triangle):
        graph_path = tmp_path / "tt.txt"
        write_edge_list(two_triangle, graph_path)
        out = tmp_path / "prof.csv"
        rc = main(["conductance", "--graph", str(graph_path), "--centers", "all", "--out", str(out)])
        assert rc == 0
        centers = {line.split(",")[0] for line in out.read_text().strip().splitlines()[1:]}
        assert centers == {"0", "1", "2", "3", "4", "5"}

    def test_bad_center_exit2(self, tmp_path, two_triangle):
        graph_path = tmp_path / "tt.txt"
        write_edge_list(two_triangle, graph_path)
        rc = main(["conductance", "--graph", str(graph_path), "--centers", "9", "--out", str(tmp_path / "p.csv")])
        assert rc == 2


class TestFitGpCommand:
    def test_dump_and_print(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        train = tmp_path / "train.csv"
        make_training_csv(train, rng)
        out = tmp_path / "model.json"
        rc = main([
            "fit-gp", "--train", str(train), "--lengthscale", "1.0",
            "--signal-var", "1.0", "--noise-var", "0.01", "--out", str(out),
        ])
        assert rc == 0
        payload = json.loads(out.read_text())
        assert payload["n_train"] == 20
        assert "log_marginal_likelihood" in capsys.readouterr().out


class TestMcmcCommand:
    def test_synthetic_run(self, tmp_path):
        rng = np.random.default_rng(1)
        train = tmp_path / "train.csv"
        make_training_csv(train, rng)
        samples = tmp_path / "samples.csv"
        diag = tmp_path / "diag.json"
        rc = main([
            "mcmc", "--train", str(train), "--steps", "300", "--burn-in", "100",
            "--chains", "2", "--seed", "3",
            "--samples-out", str(samples), "--diagnostics-out", str(diag),
        ])
        assert rc == 0
        header = samples.read_text().splitlines()[0]
        assert header == "chain,step,lengthscale,signal_var,noise_var,log_posterior,accepted"
        d = json.loads(diag.read_text())
        assert set(d["ess"]) == {"lengthscale", "signal_var", "noise_var"}
        assert d["rhat"] is not None

    def test_single_chain_omits_rhat(self, tmp_path):
        rng = np.random.default_rng(2)
        train = tmp_path / "train.csv"
        make_training_csv(train, rng, n=10)
        diag = tmp_path / "diag.json"
        rc = main([
            "mcmc", "--train", str(train), "--steps", "60", "--burn-in", "20",
            "--chains", "1", "--samples-out", str(tmp_path / "s.csv"),
            "--diagnostics-out", str(diag),
        ])
        assert rc == 0
        assert json.loads(diag.read_text())["rhat"] is None

    def test_steps_not_above_burnin_exit2(self, tmp_path):
        rng = np.random.default_rng(3)
        train = tmp_path / "train.csv"
        make_training_csv(train, rng, n=8)
        rc = main([
            "mcmc", "--train", str(train), "--steps", "50", "--burn-in", "50",
            "--samples-out", str(tmp_path / "s.csv"), "--diagnostics-out", str(tmp_path / "d.json"),
        ])
        assert rc == 2

    def test_empty_training_exit2(self, tmp_path):
        train = tmp_path / "train.csv"
        train.write_text("vertex,coord_0,conductance\n")
        rc = main([
            "mcmc", "--train", str(train), "--samples-out", str(tmp_path / "s.csv"),
            "--diagnostics-out", str(tmp_path / "d.json"),
        ])
        assert rc == 2


class TestPartitionCommand:
    def test_planted_two_clique(self, clique_fixture, capsys):
        _, _, _, config_path, config = clique_fixture
        rc = main(["partition", "--config", str(config_path)])
        assert rc == 0
        out_dir = config["out_dir"]
        clustering = json.loads(open(os.path.join(out_dir, "clustering.json")).read())
        assert len(clustering["clusters"]) == 2
        sizes = sorted(len(c["vertices"]) for c in clustering["clusters"])
        assert sizes == [12, 12]
        report = json.loads(open(os.path.join(out_dir, "report.json")).read())
        assert report["scores"]["ari"] == 1.0
        for name in (
            "clustering.json", "report.json", "report.txt", "training_pairs.csv",
            "posterior_samples.csv", "diagnostics.json", "predictions.csv",
            "conductance_band.svg", "conductance_band.csv",
        ):
            assert os.path.exists(os.path.join(out_dir, name)), name

    def test_byte_identical_reruns(self, clique_fixture, tmp_path):
        _, _, _, config_path, _ = clique_fixture
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["partition", "--config", str(config_path), "--out-dir", str(out_a)]) == 0
        assert main(["partition", "--config", str(config_path), "--out-dir", str(out_b)]) == 0
        for name in ("clustering.json", "report.json", "posterior_samples.csv", "conductance_band.svg"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name

    def test_env_seed_override(self, clique_fixture, tmp_path, monkeypatch):
        _, _, _, config_path, _ = clique_fixture
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        monkeypatch.setenv("CONDUCTA_SEED", "777")
        assert main(["partition", "--config", str(config_path), "--out-dir", str(out_a)]) == 0
        monkeypatch.delenv("CONDUCTA_SEED")
        assert main(["partition", "--config", str(config_path), "--seed", "777", "--out-dir", str(out_b)]) == 0
        assert (out_a / "clustering.json").read_bytes() == (out_b / "clustering.json").read_bytes()

    def test_n_train_too_large_exit2_before_outputs(self, clique_fixture, tmp_path, capsys):
        _, _, _, config_path, config = clique_fixture
        doc = json.loads(config_path.read_text())
        doc["pipeline"]["n_train"] = 100
        doc["out_dir"] = str(tmp_path / "never")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        rc = main(["partition", "--config", str(bad)])
        assert rc == 2
        assert not os.path.exists(doc["out_dir"])

    def test_missing_config_exit2(self, tmp_path):
        assert main(["partition", "--config", str(tmp_path / "none.json")]) == 2

    def test_bad_schema_exit2(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"schema": 99}))
        assert main(["partition", "--config", str(cfg)]) == 2


class TestPlotCommand:
    @pytest.fixture
    def plot_inputs(self, tmp_path):
        rng = np.random.default_rng(5)
        train = tmp_path / "train.csv"
        make_training_csv(train, rng)
        samples = tmp_path / "samples.csv"
        main([
            "mcmc", "--train", str(train), "--steps", "150", "--burn-in", "50",
            "--chains", "1", "--seed", "2", "--samples-out", str(samples),
            "--diagnostics-out", str(tmp_path / "d.json"),
        ])
        emb = tmp_path / "emb.csv"
        rows = ["vertex,coord_0,coord_1,l2norm"]
        pts = rng.uniform(-2, 2, size=(15, 2))
        for i, p in enumerate(pts):
            rows.append(f"{i},{p[0]},{p[1]},{np.linalg.norm(p)}")
        emb.write_text("\n".join(rows) + "\n")
        return train, samples, emb

    def test_band_and_csv(self, tmp_path, plot_inputs):
        train, samples, emb = plot_inputs
        svg = tmp_path / "fig.svg"
        series = tmp_path / "series.csv"
        rc = main([
            "plot", "--train", str(train), "--samples", str(samples),
            "--embedding", str(emb), "--subsample", "5",
            "--out", str(svg), "--series-out", str(series),
        ])
        assert rc == 0
        assert svg.read_bytes().startswith(b"<?xml")
        lines = series.read_text().strip().splitlines()
        assert lines[0] == "x_norm,mean,lo,hi"
        for line in lines[1:]:
            _, mean, lo, hi = map(float, line.split(","))
            assert lo <= mean <= hi

    def test_sample_paths_columns(self, tmp_path, plot_inputs):
        train, samples, emb = plot_inputs
        series = tmp_path / "series.csv"
        rc = main([
            "plot", "--train", str(train), "--samples", str(samples),
            "--embedding", str(emb), "--paths", "3", "--path-seed", "1",
            "--out", str(tmp_path / "f.svg"), "--series-out", str(series),
        ])
        assert rc == 0
        header = series.read_text().splitlines()[0].split(",")
        assert header[:4] == ["x_norm", "mean", "lo", "hi"]
        assert len([h for h in header if h.startswith("sample_")]) == 3
