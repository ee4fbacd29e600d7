import json
import subprocess
import sys

import pytest

from algoselect.cli import main
from algoselect.harness import read_records, write_records

from conftest import synthetic_records


@pytest.fixture
def out(tmp_path):
    return tmp_path / "results"


class TestRun:
    def test_two_reps_one_problem(self, out, capsys):
        assert main(["run", "--reps", "2", "--problems", "sorting", "--out", str(out)]) == 0
        assert len(read_records(out / "runs.jsonl")) == 4
        resolved = json.loads((out / "config.resolved.json").read_text())
        assert resolved["repetitions"] == 2 and resolved["problems"] == ["sorting"] and resolved["seed"] == 0
        assert "4 records" in capsys.readouterr().out

    def test_config_file_and_flag_precedence(self, tmp_path, out):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"repetitions": 3, "problems": ["sorting"], "seed": 11}))
        assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "12"]) == 0
        recs = read_records(out / "runs.jsonl")
        assert len(recs) == 6
        resolved = json.loads((out / "config.resolved.json").read_text())
        assert resolved["seed"] == 12 and resolved["repetitions"] == 3

    def test_global_flags_before_subcommand(self, out):
        assert main(["--out", str(out), "--seed", "4", "run", "--reps", "1", "--problems", "sorting"]) == 0
        assert json.loads((out / "config.resolved.json").read_text())["seed"] == 4

    def test_env_default_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ALGOSELECT_OUT", str(tmp_path / "envout"))
        assert main(["run", "--reps", "1", "--problems", "sorting"]) == 0
        assert (tmp_path / "envout" / "runs.jsonl").exists()

    def test_missing_config(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1
        err = capsys.readouterr().err
        assert "usage:" in err and "nope.json" in err

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"repetitons": 3}))
        assert main(["run", "--config", str(cfg)]) == 1

    def test_unknown_problem(self, out):
        assert main(["run", "--problems", "tsp", "--out", str(out)]) == 1

    def test_bad_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as e:
            main(["run", "--reps", "many"])
        assert e.value.code == 1

    def test_fail_on_flagged(self, out):
        args = ["run", "--reps", "1", "--problems", "sorting", "--out", str(out), "--budget", "1e-9"]
        assert main(args) == 0
        assert main(args + ["--fail-on-flagged"]) == 3


class TestAnalyze:
    def test_writes_outputs_and_summary(self, out, capsys):
        out.mkdir()
        recs = synthetic_records(
            {("sorting", "sorting/systematic"): [0.001, 0.0011, 0.0012],
             ("sorting", "sorting/randomized"): [0.002, 0.0021, 0.0022]}
        )
        write_records(recs, out / "runs.jsonl")
        assert main(["analyze", "--out", str(out)]) == 0
        for name in ("report.json", "heatmap.csv", "ratios.csv"):
            assert (out / name).exists()
        stdout = capsys.readouterr().out
        assert "Mean Absolute CV Gap (Median Predictor)" in stdout
        assert "95% CI for Absolute CV Gap (Bootstrap)" in stdout
        report = json.loads((out / "report.json").read_text())
        assert "conditional_entropy_bits" in report and "geometric_mean_ratio" in report

    def test_two_records(self, out):
        out.mkdir()
        write_records(synthetic_records({("sorting", "sorting/systematic"): [0.1],
                                         ("sorting", "sorting/randomized"): [0.2]}), out / "runs.jsonl")
        assert main(["analyze", "--out", str(out)]) == 0
        assert json.loads((out / "report.json").read_text())["problems"] == ["sorting"]

    def test_byte_identical_twice(self, out):
        out.mkdir()
        rt = {(p, f"{p}/{s}"): [0.001 * (i + 1) * (2 if s == "randomized" else 1) for i in range(4)]
              for p in ("sorting", "sat") for s in ("systematic", "randomized")}
        write_records(synthetic_records(rt), out / "runs.jsonl")
        main(["analyze", "--out", str(out)])
        first = (out / "report.json").read_bytes()
        main(["analyze", "--out", str(out)])
        assert (out / "report.json").read_bytes() == first

    def test_corrupt_line(self, out, capsys):
        out.mkdir()
        good = synthetic_records({("p", "a"): [0.1]})[0].to_json()
        (out / "runs.jsonl").write_text(good + "\n" + "garbage\n")
        assert main(["analyze", "--out", str(out)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_empty_file(self, out):
        out.mkdir()
        (out / "runs.jsonl").write_text("")
        assert main(["analyze", "--out", str(out)]) == 2

    def test_missing_file(self, out):
        assert main(["analyze", "--out", str(out)]) == 2


class TestSimulate:
    def test_fpl_ledgers_and_summary(self, out):
        assert main(["simulate", "fpl", "--T", "1000", "--K", "2", "--seeds", "10", "--out", str(out)]) == 0
        assert len(list(out.glob("fpl_seed*.csv"))) == 10
        summary = json.loads((out / "summary.json").read_text())
        assert "max_ratio" in summary and len(summary["per_seed"]) == 10

    def test_single_round(self, out):
        assert main(["simulate", "fpl", "--T", "1", "--seeds", "5", "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert all(0.0 <= r["regret"] <= 1.0 for r in summary["per_seed"])

    def test_ucb_tree_within_bound(self, out):
        args = ["simulate", "ucb-tree", "--depth", "2", "--T", "10000", "--seeds", "2", "--out", str(out)]
        assert main(args + ["--assert-bounds"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["mean_regret"] < summary["bound"]

    @pytest.mark.parametrize("name", ["cascade", "adaptive-window"])
    def test_other_simulations_run(self, name, out):
        assert main(["simulate", name, "--T", "300", "--seeds", "2", "--out", str(out)]) == 0
        assert json.loads((out / "summary.json").read_text())["simulation"] == name

    def test_bound_failure_exit_code(self, tmp_path, out):
        cfg = tmp_path / "strict.json"
        cfg.write_text(json.dumps({"fpl_ratio_bound": -1.0}))
        args = ["simulate", "fpl", "--T", "100", "--seeds", "2", "--out", str(out), "--config", str(cfg)]
        assert main(args) == 0
        assert main(args + ["--assert-bounds"]) == 3

    def test_unknown_simulation(self, out):
        assert main(["simulate", "hedge", "--out", str(out)]) == 1

    def test_idempotent(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            main(["simulate", "cascade", "--T", "200", "--seeds", "3", "--out", str(d)])
        assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
        assert (a / "cascade_seed1.csv").read_bytes() == (b / "cascade_seed1.csv").read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "algoselect.cli", "simulate", "ucb-tree", "--T", "50", "--seeds", "1",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "within_bound: True" in proc.stdout
