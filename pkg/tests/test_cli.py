import json

import pytest

import stabilimeter as sm
from stabilimeter.cli import (
    EXIT_CAPACITY,
    EXIT_LEARNER,
    EXIT_OK,
    EXIT_PARAMETER,
    EXIT_PARSE,
    build_parser,
    run,
)


@pytest.fixture
def demorgan_files(tmp_path):
    a = tmp_path / "a.sexpr"
    b = tmp_path / "b.sexpr"
    a.write_text("(not (or (var 0) (var 1)))")
    b.write_text("(and (not (var 0)) (not (var 1)))")
    return str(a), str(b)


@pytest.fixture
def demo_dir(tmp_path):
    out = tmp_path / "demo"
    assert run(["demo", "correlated", "--out", str(out), "--seed", "5"]) == EXIT_OK
    return out


class TestAgreementCommand:
    def test_de_morgan_estimate(self, demorgan_files, tmp_path, capsys):
        a, b = demorgan_files
        out = tmp_path / "agree.json"
        code = run(["agreement", a, b, "--n", "10000", "--seed", "3",
                    "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["agreement"] == 1.0
        assert doc["worst_case_std"] == 0.005

    def test_exact_mode(self, tmp_path):
        a = tmp_path / "a.sexpr"
        b = tmp_path / "b.sexpr"
        a.write_text("(and (var 0) (var 1))")
        b.write_text("(var 0)")
        out = tmp_path / "exact.json"
        assert run(["agreement", a.as_posix(), b.as_posix(), "--exact",
                    "--out", str(out)]) == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["agreement_exact"] == "3/4"

    def test_capacity_exit_code(self, tmp_path, capsys):
        a = tmp_path / "a.sexpr"
        b = tmp_path / "b.sexpr"
        a.write_text("(var 29)")
        b.write_text("(var 0)")
        assert run(["agreement", str(a), str(b), "--exact"]) == EXIT_CAPACITY
        assert "estimate_agreement" in capsys.readouterr().err

    def test_formula_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.sexpr"
        bad.write_text("(xor (var 0) (var 1))")
        good = tmp_path / "good.sexpr"
        good.write_text("(var 0)")
        assert run(["agreement", str(bad), str(good)]) == EXIT_PARSE


class TestStabilityCommand:
    def test_constant_learner_reports_perfect_stability(self, demo_dir, tmp_path):
        out = tmp_path / "stab.json"
        code = run(["stability", "--data", str(demo_dir / "train.csv"),
                    "--schema", str(demo_dir / "schema.txt"),
                    "--learner", "constant", "--m", "5", "--n", "200",
                    "--seed", "1", "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["stability_estimate"] == 1.0

    def test_demo_then_tree_stability(self, demo_dir, tmp_path):
        # documented defaults: instability visible, both fold accuracies high
        out = tmp_path / "stab.json"
        code = run(["stability", "--data", str(demo_dir / "train.csv"),
                    "--schema", str(demo_dir / "schema.txt"),
                    "--learner", "tree", "--m", "20", "--n", "4000",
                    "--seed", "5", "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["stability_estimate"] < 1.0
        acc1 = sum(it["acc1"] for it in doc["iterations"]) / doc["m"]
        acc2 = sum(it["acc2"] for it in doc["iterations"]) / doc["m"]
        assert acc1 > 0.9 and acc2 > 0.9

    def test_learner_failure_exit(self, demo_dir, capsys):
        # k exceeds the half size: the learner fails inside the loop
        code = run(["stability", "--data", str(demo_dir / "train.csv"),
                    "--schema", str(demo_dir / "schema.txt"),
                    "--learner", "knn", "--k", "150", "--m", "2", "--n", "10",
                    "--seed", "0"])
        assert code == EXIT_LEARNER

    def test_parameter_error_exit(self, demo_dir):
        code = run(["stability", "--data", str(demo_dir / "train.csv"),
                    "--schema", str(demo_dir / "schema.txt"),
                    "--m", "0", "--seed", "0"])
        assert code == EXIT_PARAMETER

    def test_csv_format(self, demo_dir, tmp_path):
        out = tmp_path / "stab.csv"
        assert run(["stability", "--data", str(demo_dir / "train.csv"),
                    "--schema", str(demo_dir / "schema.txt"),
                    "--learner", "majority", "--m", "3", "--n", "50",
                    "--seed", "1", "--format", "csv", "--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "iteration,acc1,acc2,stab"
        assert len(lines) == 4


class TestDatasetParsing:
    def test_small_file(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("x1,x2,class\n0,1,1\n1,0,0\n1,1,1\n0,0,0\n")
        data = sm.load_dataset_csv(f)
        assert len(data) == 4
        assert len(data.schema) == 2

    def test_round_trip_via_files(self, demo_dir):
        data = sm.load_dataset_csv(demo_dir / "train.csv",
                                   schema_path=demo_dir / "schema.txt")
        assert len(data) == 200

    def test_csv_parse_error_exit(self, tmp_path, capsys):
        f = tmp_path / "bad.csv"
        f.write_text("x1,x2\n0,1\n")
        code = run(["stability", "--data", str(f), "--m", "2", "--seed", "0"])
        assert code == EXIT_PARSE
        assert "class" in capsys.readouterr().err


class TestBiasStrengthCommand:
    def test_always_prefers_smaller_tree(self, tmp_path):
        f1 = tmp_path / "f1.sexpr"
        f2 = tmp_path / "f2.sexpr"
        f1.write_text("(var 0)")
        f2.write_text("(and (var 0) (and (var 1) (var 2)))")
        out = tmp_path / "bias.json"
        code = run(["bias-strength", str(f1), str(f2), "--learner", "tree",
                    "--min-gain-ratio", "0.2", "--vars", "6",
                    "--trials", "10", "--n", "400", "--train-size", "100",
                    "--seed", "1", "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["biased_toward_f1_at_half"] is True
        assert doc["flip_threshold"] >= 0.5

    def test_csv_curve(self, tmp_path):
        f1 = tmp_path / "f1.sexpr"
        f2 = tmp_path / "f2.sexpr"
        f1.write_text("(var 0)")
        f2.write_text("(var 1)")
        out = tmp_path / "bias.csv"
        code = run(["bias-strength", str(f1), str(f2), "--learner", "majority",
                    "--trials", "3", "--n", "100", "--train-size", "20",
                    "--p-step", "0.1", "--seed", "1", "--format", "csv",
                    "--out", str(out)])
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "p,preference_for_f1"
        assert len(lines) == 12  # header plus the 11 grid points 0, 0.1, ..., 1.0


class TestDriftCommand:
    def test_alarm_fires_at_drift_pair(self, tmp_path):
        drift_dir = tmp_path / "batches"
        assert run(["demo", "drift", "--out", str(drift_dir), "--seed", "2",
                    "--batch-size", "300", "--label-noise", "0"]) == EXIT_OK
        out = tmp_path / "drift.json"
        code = run(["drift", str(drift_dir), "--learner", "tree", "--n", "1000",
                    "--threshold", "0.5", "--seed", "2", "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        fired = [p for p in doc["pairs"] if p["fired"]]
        assert doc["fired_count"] == 1
        assert fired[0]["pair"] == [4, 5]

    def test_missing_directory_is_parse_error(self, tmp_path):
        assert run(["drift", str(tmp_path / "nope"), "--seed", "0"]) == EXIT_PARSE


class TestDemoCommand:
    def test_correlated_outputs(self, demo_dir):
        assert (demo_dir / "train.csv").exists()
        assert (demo_dir / "schema.txt").exists()

    def test_config_file_overrides(self, tmp_path):
        cfg = tmp_path / "demo.cfg"
        cfg.write_text("size=40\nattrs=4\nlabel-noise=0\n")
        out = tmp_path / "gen"
        assert run(["demo", "correlated", "--config", str(cfg),
                    "--out", str(out), "--seed", "1"]) == EXIT_OK
        data = sm.load_dataset_csv(out / "train.csv",
                                   schema_path=out / "schema.txt")
        assert len(data) == 40 and len(data.schema) == 4

    def test_bad_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "demo.cfg"
        cfg.write_text("bogus=1\n")
        assert run(["demo", "correlated", "--config", str(cfg),
                    "--out", str(tmp_path / "x")]) == EXIT_PARSE


class TestReproducibility:
    def test_identical_reruns_byte_identical(self, demorgan_files, tmp_path):
        a, b = demorgan_files
        outs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            assert run(["agreement", a, b, "--n", "5000", "--seed", "17",
                        "--out", str(out)]) == EXIT_OK
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_env_seed_fallback(self, demorgan_files, tmp_path, monkeypatch):
        a, b = demorgan_files
        out1, out2 = tmp_path / "envseed.json", tmp_path / "flagseed.json"
        monkeypatch.setenv("STABILIMETER_SEED", "123")
        assert run(["agreement", a, b, "--n", "2000", "--out", str(out1)]) == EXIT_OK
        monkeypatch.delenv("STABILIMETER_SEED")
        assert run(["agreement", a, b, "--n", "2000", "--seed", "123",
                    "--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()


class TestHelp:
    def test_declared_flags_appear_in_help(self):
        parser = build_parser()
        # every External Interfaces flag is documented on some subcommand
        flag_names = ["--data", "--schema", "--learner", "--min-gain-ratio",
                      "--max-depth", "--k", "--epsilon", "--m", "--n", "--seed",
                      "--dist", "--p-step", "--trials", "--train-size",
                      "--threshold", "--out", "--format", "--jobs"]
        helps = []
        for action in parser._subparsers._group_actions[0].choices.values():
            helps.append(action.format_help())
        combined = "\n".join(helps)
        for flag in flag_names:
            assert flag in combined
