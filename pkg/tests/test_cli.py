import json

import numpy as np
import pytest

from gwosae.cli import main


def run_cli(*args):
    return main(list(args))


BASE_TRAIN = [
    "train",
    "--synth", "30x10x2",
    "--dims", "10,5,3,2",
    "--algo", "gwo",
    "--seed", "7",
    "--pop", "5",
    "--iters", "6",
]


class TestTrainCommand:
    def test_happy_path(self, tmp_path, capsys):
        model = tmp_path / "model.json"
        curves = tmp_path / "curves"
        rc = run_cli(*BASE_TRAIN, "--out-model", str(model), "--curves-dir", str(curves))
        assert rc == 0
        out = capsys.readouterr().out
        assert "test accuracy:" in out
        pct = float(out.split(":")[1].strip().rstrip("%"))
        assert 0.0 <= pct <= 100.0
        assert model.exists()
        for stage in ("ae1", "ae2", "softmax"):
            f = curves / f"{stage}.csv"
            assert f.exists()
            assert len(f.read_text().strip().splitlines()) == 1 + 6

    def test_missing_dims_exits_2(self, capsys):
        rc = run_cli("train", "--synth", "30x10x2")
        assert rc == 2
        assert "--dims" in capsys.readouterr().err

    def test_wrong_dims_arity_exits_2(self, capsys):
        rc = run_cli("train", "--synth", "30x10x2", "--dims", "200,50")
        assert rc == 2
        assert "4" in capsys.readouterr().err

    def test_requires_exactly_one_dataset_source(self, capsys):
        rc = run_cli("train", "--dims", "10,5,3,2")
        assert rc == 2
        assert "--data or --synth" in capsys.readouterr().err

    def test_unknown_flag_is_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli(*BASE_TRAIN, "--frobnicate", "1")
        assert exc.value.code == 2

    def test_dims_must_match_dataset(self, tmp_path, capsys):
        rc = run_cli("train", "--synth", "30x10x2", "--dims", "9,5,3,2",
                     "--out-model", str(tmp_path / "m.json"),
                     "--curves-dir", str(tmp_path / "c"))
        assert rc == 2
        assert "does not match" in capsys.readouterr().err

    def test_model_file_byte_identical_across_runs(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        run_cli(*BASE_TRAIN, "--out-model", str(a), "--curves-dir", str(tmp_path / "ca"))
        run_cli(*BASE_TRAIN, "--out-model", str(b), "--curves-dir", str(tmp_path / "cb"))
        assert a.read_bytes() == b.read_bytes()
        for stage in ("ae1", "ae2", "softmax"):
            assert (tmp_path / "ca" / f"{stage}.csv").read_bytes() == (
                tmp_path / "cb" / f"{stage}.csv"
            ).read_bytes()

    def test_config_file_merged_under_flags(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"synth": [30, 10, 2], "dims": [10, 5, 3, 2],
                                   "pop": 5, "iters": 6, "seed": 7}))
        rc = run_cli("train", "--config", str(cfg),
                     "--out-model", str(tmp_path / "m.json"),
                     "--curves-dir", str(tmp_path / "c"))
        assert rc == 0
        assert "test accuracy:" in capsys.readouterr().out

    def test_config_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dimz": [1, 2, 3, 4]}))
        rc = run_cli("train", "--config", str(cfg))
        assert rc == 2
        assert "dimz" in capsys.readouterr().err

    def test_search_box_flag(self, tmp_path):
        model = tmp_path / "m.json"
        rc = run_cli(*BASE_TRAIN, "--search-box=-1,1",
                     "--out-model", str(model), "--curves-dir", str(tmp_path / "c"))
        assert rc == 0
        doc = json.loads(model.read_text())
        assert doc["spec"]["search_box"] == [-1.0, 1.0]

    def test_algo_param_flag(self, tmp_path):
        model = tmp_path / "m.json"
        rc = run_cli(*BASE_TRAIN, "--algo-param", "a_start=1.5",
                     "--algo-param", "a_end=0.5",
                     "--out-model", str(model), "--curves-dir", str(tmp_path / "c"))
        assert rc == 0
        doc = json.loads(model.read_text())
        assert doc["spec"]["optimizer"]["algorithm_params"] == {"a_start": 1.5, "a_end": 0.5}

    def test_bad_algo_param_exits_2(self, capsys):
        rc = run_cli(*BASE_TRAIN, "--algo-param", "a_start")
        assert rc == 2
        assert "KEY=VALUE" in capsys.readouterr().err

    def test_synth_seed_defaults_to_seed(self, tmp_path):
        # Same --seed without --synth-seed must give the same dataset and model.
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli(*BASE_TRAIN, "--out-model", str(a), "--curves-dir", str(tmp_path / "ca"))
        run_cli(*BASE_TRAIN, "--synth-seed", "7",
                "--out-model", str(b), "--curves-dir", str(tmp_path / "cb"))
        assert a.read_bytes() == b.read_bytes()


class TestSynthAndExpectShape:
    def test_synth_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "data.csv"
        rc = run_cli("synth", "--samples", "62", "--features", "2000",
                     "--classes", "2", "--seed", "3", "--out", str(out))
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 63
        assert lines[0].split(",")[-1] == "label"

    def test_expect_shape_accepts_matching(self, tmp_path, capsys):
        out = tmp_path / "colon_like.csv"
        run_cli("synth", "--samples", "62", "--features", "2000", "--classes", "2",
                "--seed", "3", "--out", str(out))
        rc = run_cli("train", "--data", str(out), "--expect-shape", "2000,62,2",
                     "--dims", "2000,20,8,2", "--pop", "4", "--iters", "2",
                     "--seed", "1",
                     "--out-model", str(tmp_path / "m.json"),
                     "--curves-dir", str(tmp_path / "c"))
        assert rc == 0

    def test_expect_shape_rejects_mismatch(self, tmp_path, capsys):
        out = tmp_path / "small.csv"
        run_cli("synth", "--samples", "10", "--features", "4", "--classes", "2",
                "--seed", "3", "--out", str(out))
        rc = run_cli("train", "--data", str(out), "--expect-shape", "2000,62,2",
                     "--dims", "4,3,2,2", "--pop", "4", "--iters", "2",
                     "--out-model", str(tmp_path / "m.json"),
                     "--curves-dir", str(tmp_path / "c"))
        assert rc == 2
        assert "shape mismatch" in capsys.readouterr().err


class TestEvaluateCommand:
    @pytest.fixture()
    def trained_model(self, tmp_path):
        data = tmp_path / "data.csv"
        run_cli("synth", "--samples", "30", "--features", "10", "--classes", "2",
                "--seed", "5", "--out", str(data))
        model = tmp_path / "model.json"
        run_cli("train", "--data", str(data), "--dims", "10,5,3,2",
                "--pop", "5", "--iters", "6", "--seed", "7",
                "--out-model", str(model), "--curves-dir", str(tmp_path / "c"))
        return model, data

    def test_evaluate_prints_accuracy_and_writes_confusion(self, trained_model, tmp_path, capsys):
        model, data = trained_model
        out = tmp_path / "confusion.csv"
        rc = run_cli("evaluate", "--model", str(model), "--data", str(data),
                     "--out-confusion", str(out))
        assert rc == 0
        printed = capsys.readouterr().out
        assert "accuracy:" in printed
        lines = out.read_text().strip().splitlines()
        counts = [int(v) for ln in lines[1:] for v in ln.split(",")[1:]]
        assert sum(counts) == 30

    def test_evaluate_dim_mismatch_names_both(self, trained_model, tmp_path, capsys):
        model, _ = trained_model
        other = tmp_path / "other.csv"
        run_cli("synth", "--samples", "10", "--features", "6", "--classes", "2",
                "--seed", "5", "--out", str(other))
        rc = run_cli("evaluate", "--model", str(model), "--data", str(other))
        assert rc == 2
        err = capsys.readouterr().err
        assert "10" in err and "6" in err

    def test_corrupted_model_clean_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("garbage")
        data = tmp_path / "d.csv"
        run_cli("synth", "--samples", "10", "--features", "4", "--classes", "2",
                "--seed", "1", "--out", str(data))
        rc = run_cli("evaluate", "--model", str(bad), "--data", str(data))
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestCompareCommand:
    def test_two_algorithms(self, tmp_path, capsys):
        out = tmp_path / "cmp"
        rc = run_cli("compare", "--synth", "30x10x2", "--dims", "10,5,3,2",
                     "--algos", "gwo,pso", "--repeats", "2", "--seed", "7",
                     "--pop", "5", "--iters", "6", "--out", str(out))
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        assert len(report["algorithms"]) == 2
        for entry in report["algorithms"]:
            assert len(entry["accuracies"]) == 2
        assert (out / "report.txt").exists()
        assert (out / "result.json").exists()
        assert (out / "curves" / "curves_long.csv").exists()

    def test_unknown_algorithm_exits_2(self, capsys):
        rc = run_cli("compare", "--synth", "30x10x2", "--dims", "10,5,3,2",
                     "--algos", "xyz")
        assert rc == 2
        assert "gwo, pso, ga, abc" in capsys.readouterr().err

    def test_single_algorithm_single_repeat(self, tmp_path):
        out = tmp_path / "one"
        rc = run_cli("compare", "--synth", "30x10x2", "--dims", "10,5,3,2",
                     "--algos", "gwo", "--repeats", "1", "--seed", "3",
                     "--pop", "5", "--iters", "4", "--out", str(out))
        assert rc == 0
        report = json.loads((out / "report.json").read_text())
        assert len(report["algorithms"][0]["accuracies"]) == 1


class TestCurvesCommand:
    def test_reemit_from_result(self, tmp_path):
        out = tmp_path / "cmp"
        run_cli("compare", "--synth", "30x10x2", "--dims", "10,5,3,2",
                "--algos", "gwo", "--repeats", "1", "--seed", "3",
                "--pop", "5", "--iters", "4", "--out", str(out))
        redo = tmp_path / "again"
        rc = run_cli("curves", "--result", str(out / "result.json"),
                     "--out-dir", str(redo))
        assert rc == 0
        for f in (out / "curves").iterdir():
            assert (redo / f.name).read_bytes() == f.read_bytes()

    def test_missing_result_file(self, tmp_path, capsys):
        rc = run_cli("curves", "--result", str(tmp_path / "nope.json"))
        assert rc == 2

    def test_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run_cli("curves", "--help")
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "--result" in out and "--out-dir" in out
