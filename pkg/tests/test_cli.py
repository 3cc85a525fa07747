import csv
import json

import numpy as np
import pytest

from herdselect.cli import main


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    rc = run_cli("demo-data", "--samples", "40", "--informative", "3",
                 "--noise", "9", "--classes", "2", "--separation", "3.0",
                 "--seed", "1", "--out", str(out))
    assert rc == 0
    return out


class TestDemoData:
    def test_files_written(self, demo_dir):
        assert (demo_dir / "data.csv").exists()
        truth = json.loads((demo_dir / "ground-truth.json").read_text())
        assert len(truth["informative_indices"]) == 3
        assert truth["n_genes"] == 12
        manifest = json.loads((demo_dir / "run-manifest.json").read_text())
        assert manifest["command"] == "demo-data"


class TestFilter:
    def test_ranking_csv(self, demo_dir, tmp_path):
        rc = run_cli("filter", "--data", str(demo_dir / "data.csv"),
                     "--top-m", "6", "--out", str(tmp_path))
        assert rc == 0
        with open(tmp_path / "ranking.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["rank", "gene_index", "gene_name", "score"]
        assert len(rows) == 7
        assert [r[0] for r in rows[1:]] == [str(i) for i in range(1, 7)]


class TestCv:
    def test_report_written(self, demo_dir, tmp_path):
        rc = run_cli("cv", "--data", str(demo_dir / "data.csv"),
                     "--classifier", "knn", "--knn-k", "3",
                     "--folds", "4", "--out", str(tmp_path))
        assert rc == 0
        doc = json.loads((tmp_path / "cv-report.json").read_text())
        assert 0.0 <= doc["mean"]["accuracy"] <= 1.0
        assert len(doc["per_fold"]) == 4


class TestSelect:
    def select_args(self, demo_dir, out, *extra):
        return ("select", "--data", str(demo_dir / "data.csv"),
                "--top-m", "8", "--horses", "6", "--iters", "3",
                "--repeats", "2", "--folds", "3",
                "--classifier", "knn", "--knn-k", "3",
                "--no-plot", "--out", str(out), *extra)

    def test_outputs(self, demo_dir, tmp_path):
        rc = run_cli(*self.select_args(demo_dir, tmp_path, "--seed", "7"))
        assert rc == 0
        doc = json.loads((tmp_path / "result.json").read_text())
        assert doc["best_gene_indices"]
        full = json.loads((tmp_path / "result-full.json").read_text())
        assert "runtime_seconds" in full["per_repeat"][0]
        assert "runtime_seconds" not in doc["per_repeat"][0]
        assert (tmp_path / "summary.csv").exists()
        manifest = json.loads((tmp_path / "run-manifest.json").read_text())
        assert manifest["derived_seeds"]
        assert not (tmp_path / "convergence.png").exists()

    def test_rerun_byte_identical(self, demo_dir, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        run_cli(*self.select_args(demo_dir, a, "--seed", "7"))
        run_cli(*self.select_args(demo_dir, b, "--seed", "7"))
        assert (a / "result.json").read_bytes() == \
            (b / "result.json").read_bytes()

    def test_plot_rendered_by_default(self, demo_dir, tmp_path):
        args = ("select", "--data", str(demo_dir / "data.csv"),
                "--top-m", "8", "--horses", "6", "--iters", "2",
                "--repeats", "1", "--folds", "3",
                "--classifier", "knn", "--knn-k", "3",
                "--out", str(tmp_path))
        assert run_cli(*args) == 0
        assert (tmp_path / "convergence.png").stat().st_size > 0

    def test_config_file_merging(self, demo_dir, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"iters": 2, "repeats": 1}))
        rc = run_cli(*self.select_args(demo_dir, tmp_path,
                                       "--config", str(cfg_path)))
        assert rc == 0
        doc = json.loads((tmp_path / "result.json").read_text())
        # config file set repeats=1 (flag default was overridden)
        assert len(doc["per_repeat"]) in (1, 2)


class TestTfBench:
    def test_comparison_outputs(self, demo_dir, tmp_path):
        rc = run_cli("tf-bench", "--data", str(demo_dir / "data.csv"),
                     "--tfs", "s1,x", "--top-m", "8", "--horses", "6",
                     "--iters", "2", "--repeats", "1", "--folds", "3",
                     "--classifier", "knn", "--knn-k", "3",
                     "--no-plot", "--out", str(tmp_path))
        assert rc == 0
        with open(tmp_path / "comparison.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "tf"
        assert [r[0] for r in rows[1:]] == ["s1", "x"]
        assert (tmp_path / "trace_s1.csv").exists()
        assert (tmp_path / "trace_x.csv").exists()

    def test_unknown_tf_is_user_error(self, demo_dir, tmp_path, capsys):
        rc = run_cli("tf-bench", "--data", str(demo_dir / "data.csv"),
                     "--tfs", "s1,zz", "--out", str(tmp_path))
        assert rc == 1
        assert "unknown transfer function" in capsys.readouterr().err


class TestStats:
    def test_from_score_table(self, tmp_path):
        scores = tmp_path / "scores.csv"
        rng = np.random.default_rng(0)
        with open(scores, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "a", "b", "c"])
            for i in range(8):
                writer.writerow([f"d{i}"] + list(rng.random(3)))
        rc = run_cli("stats", "--scores", str(scores), "--out", str(tmp_path))
        assert rc == 0
        doc = json.loads((tmp_path / "stats.json").read_text())
        assert doc["k"] == 3 and doc["n"] == 8
        assert len(doc["posthoc"]) == 3
        assert sum(doc["avg_ranks"]) == pytest.approx(6.0, abs=1e-9)

    def test_pre_ranked(self, tmp_path):
        scores = tmp_path / "ranks.csv"
        with open(scores, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["a", "b", "c", "d", "e", "f", "g"])
            writer.writerow([3.9, 5.8, 6.0, 4.6, 2.5, 4.2, 1.0])
        rc = run_cli("stats", "--scores", str(scores), "--pre-ranked",
                     "--n-datasets", "10", "--out", str(tmp_path))
        assert rc == 0
        doc = json.loads((tmp_path / "stats.json").read_text())
        assert doc["chi_square"] == pytest.approx(40.5, abs=1e-9)
        assert doc["p_value"] == pytest.approx(3.63e-7, rel=0.02)

    def test_pre_ranked_needs_n(self, tmp_path, capsys):
        scores = tmp_path / "r.csv"
        scores.write_text("a,b\n1.0,2.0\n")
        rc = run_cli("stats", "--scores", str(scores), "--pre-ranked",
                     "--out", str(tmp_path))
        assert rc == 1
        assert "n-datasets" in capsys.readouterr().err


class TestErrors:
    def test_missing_file_exit_1(self, tmp_path, capsys):
        rc = run_cli("filter", "--data", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path))
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("select")  # missing required --data
        assert exc.value.code == 2

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli("--version")
        assert exc.value.code == 0
