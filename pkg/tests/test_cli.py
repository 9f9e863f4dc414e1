import json
import os

import pytest

from randset import harness as hn
from randset.cli import dispatch


@pytest.fixture
def config_path(tmp_path):
    data = {
        "schema": "v1",
        "master_seed": 321,
        "trials": 3,
        "replicates": 3,
        "rademacher_draws": 32,
        "n": 15,
        "distribution": {
            "kind": "gaussian-mixture-classification",
            "means": [[0.6, 0.0], [-0.6, 0.0]],
            "covariance_scale": 1.0,
            "atomize": {"num_atoms": 12, "seed": 2},
        },
        "loss": {"kind": "clipped-logistic", "dimension": 2, "B": 1.0},
        "dynamics": {"iterations": 8, "eta": 0.02, "beta": 6.0,
                     "batch_size": "full"},
        "bounds": [
            {"formula": "cld-brownian", "zeta": 0.1, "lambda": "optimize"},
            {"formula": "rademacher-lower", "zeta": 0.1, "lambda": 5.0},
        ],
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


class TestUsageErrors:
    def test_missing_config_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        code = dispatch(["sgld-bound", "--config", str(missing)])
        assert code == 2
        assert str(missing) in capsys.readouterr().err

    def test_bad_override_exits_2(self, config_path, capsys):
        code = dispatch([
            "sgld-bound", "--config", str(config_path),
            "--set", "no.such.key=1",
        ])
        assert code == 2

    def test_unknown_config_key_exits_2(self, config_path, tmp_path, capsys):
        data = json.loads(config_path.read_text())
        data["mystery"] = True
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(data))
        assert dispatch(["sgld-bound", "--config", str(bad)]) == 2

    def test_help_lists_config_keys(self, capsys):
        code = dispatch(["sgld-bound", "--help"])
        assert code == 0
        out = capsys.readouterr().out
        for key, typ, default, _ in hn.CONFIG_KEYS:
            assert key in out
            assert f"default={default}" in out


class TestExperiments:
    def test_cld_bound_runs_and_reports(self, config_path, tmp_path, capsys):
        out = tmp_path / "records.jsonl"
        code = dispatch(["cld-bound", "--config", str(config_path),
                         "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr().out
        assert "coverage[cld-brownian]" in captured
        assert out.exists()

    def test_thin_adapter_matches_library(self, config_path, tmp_path):
        out = tmp_path / "records.jsonl"
        assert dispatch(["sgld-bound", "--config", str(config_path),
                         "--out", str(out)]) == 0
        cli_records = hn.read_records(out)

        data = json.loads(config_path.read_text())
        data["pipeline"] = "sgld"
        direct = hn.run_trials(hn.ExperimentConfig.from_dict(data))
        assert len(cli_records) == len(direct)
        for a, b in zip(cli_records, direct):
            da, db = a.to_dict(), b.to_dict()
            da.pop("wall_time")
            db.pop("wall_time")
            assert da == db

    def test_override_changes_results(self, config_path, tmp_path):
        out1 = tmp_path / "r1.jsonl"
        out2 = tmp_path / "r2.jsonl"
        dispatch(["sgld-bound", "--config", str(config_path), "--out", str(out1)])
        dispatch(["sgld-bound", "--config", str(config_path), "--out", str(out2),
                  "--set", "dynamics.beta=12"])
        a = hn.read_records(out1)[0]
        b = hn.read_records(out2)[0]
        assert a.kl_mean != b.kl_mean

    def test_dump_traj_writes_header(self, config_path, tmp_path):
        out = tmp_path / "records.jsonl"
        dump = tmp_path / "traj.txt"
        code = dispatch(["sgld-bound", "--config", str(config_path),
                         "--out", str(out), "--dump-traj", str(dump)])
        assert code == 0
        text = dump.read_text().splitlines()
        assert text[0].startswith("# trajectory dump v1")
        assert len(text) > 8

    def test_fractal_dim_pipeline(self, config_path, tmp_path, capsys):
        data = json.loads(config_path.read_text())
        data["covering"] = {"metric": "euclidean",
                            "scales": [0.2, 0.1, 0.05, 0.025]}
        data["bounds"] = [{"formula": "fractal-dimension", "zeta": 0.1,
                           "metric": "euclidean", "eps": 0.1}]
        data["replicates"] = 1
        data["dynamics"]["iterations"] = 30
        cfg = tmp_path / "fractal.json"
        cfg.write_text(json.dumps(data))
        out = tmp_path / "records.jsonl"
        code = dispatch(["fractal-dim", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        records = hn.read_records(out)
        assert records[0].curve is not None
        assert "euclidean" in records[0].dims


class TestReport:
    def test_empty_records_exit_3(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        code = dispatch(["report", "--records", str(empty),
                         "--out", str(tmp_path / "rep")])
        assert code == 3
        assert "no records" in capsys.readouterr().err

    def test_report_writes_csv_and_figures(self, config_path, tmp_path, capsys):
        out = tmp_path / "records.jsonl"
        dispatch(["cld-bound", "--config", str(config_path), "--out", str(out)])
        rep_dir = tmp_path / "rep"
        code = dispatch(["report", "--records", str(out), "--out", str(rep_dir)])
        assert code == 0
        for name in ("bound_vs_gap.csv", "term_breakdown.csv",
                     "bound_vs_gap.png", "term_breakdown.png"):
            path = rep_dir / name
            assert path.exists() and path.stat().st_size > 0

    def test_report_output_matches_library_summary(self, config_path, tmp_path,
                                                   capsys):
        out = tmp_path / "records.jsonl"
        dispatch(["cld-bound", "--config", str(config_path), "--out", str(out)])
        capsys.readouterr()
        code = dispatch(["report", "--records", str(out),
                         "--out", str(tmp_path / "rep")])
        assert code == 0
        cli_out = capsys.readouterr().out
        summary = hn.summarize(hn.read_records(out), 0.05)
        for line in summary.lines():
            assert line in cli_out


class TestOracleSuiteCommand:
    def test_fast_suite_passes(self, capsys):
        code = dispatch(["oracle-suite", "--seed", "7", "--fast"])
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS symmetrization" in out
        assert "FAIL" not in out

    def test_seed_required(self, capsys):
        assert dispatch(["oracle-suite"]) == 2
