import csv
import io
import json
import subprocess
import sys

import pytest

from singbound.cli import build_parser, dispatch, resolve
from singbound.experiment import ExperimentConfig


def run(capsys, *argv, environ=None):
    code = dispatch(list(argv), environ=environ or {})
    out, err = capsys.readouterr()
    return code, out, err


class TestExamples:
    def test_bounds_rows(self, capsys):
        code, out, _ = run(capsys, "bounds", "--figure", "1", "--resolution", "10", "--out", "-")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][0] == "mu" and len(rows) == 11

    def test_certify_search(self, capsys, tmp_path):
        f = tmp_path / "bernoulli.json"
        f.write_text(json.dumps({"atoms": [[-1, "1/2"], [1, "1/2"]]}))
        code, out, _ = run(capsys, "certify", "--alpha", str(f), "--r", "2", "--search")
        assert code == 0
        doc = json.loads(out)
        assert doc["certificate"]["p"] == "1/2"
        assert doc["report"]["valid"]

    def test_certify_csv(self, capsys):
        code, out, _ = run(capsys, "certify", "--alpha", "gamma:1/2", "--format", "csv")
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and rows[0] == ["p", "q", "r", "valid", "slack_min", "worst_t"]
        assert rows[1][:4] == ["1/2", "1/4", "1", "True"]

    def test_simulate_exhaustive(self, capsys):
        code, out, _ = run(capsys, "simulate", "--n", "2", "--dist", "bernoulli", "--exhaustive")
        assert code == 0 and json.loads(out)["probability"] == "1/2"

    def test_eigen_exhaustive(self, capsys):
        code, out, _ = run(capsys, "eigen", "--n", "2", "--k", "1", "--exhaustive")
        assert code == 0 and json.loads(out)["probability"] == "55/81"

    def test_spectrum(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--alpha", "bernoulli", "--normal", "[1, 1]",
                           "--Q", "13", "--eps2", "0.5")
        doc = json.loads(out)
        assert code == 0 and doc["spectrum"] == [0, 1, 5, 6, 7, 8, 12] and doc["size"] == 7
        assert all(doc["checks"].values())

    def test_gap_actions(self, capsys):
        g = '{"Q": 101, "v0": 0, "basis": [3], "dims": [7]}'
        assert json.loads(run(capsys, "gap", "--gap", g)[1])["size"] == 7
        assert json.loads(run(capsys, "gap", "--gap", g, "--action", "phi", "--element", "-6")[1])["coefficients"] == [-2]
        doc = json.loads(run(capsys, "gap", "--gap", '{"Q":101,"basis":[1,2],"dims":[7,7]}', "--action", "proper")[1])
        assert doc["proper"] is False and doc["counterexample"] is not None
        doc = json.loads(run(capsys, "gap", "--gap", g, "--action", "sumset", "--m", "2")[1])
        assert doc["size"] == 13
        doc = json.loads(run(capsys, "gap", "--gap", '{"Q":1009,"basis":[1,50],"dims":[7,7]}',
                             "--action", "reduce", "--set", "[1, 2]")[1])
        assert doc["members"] and len(doc["result"]["basis"]) == 1


class TestExitCodes:
    def test_usage(self, capsys):
        assert run(capsys)[0] == 2
        assert run(capsys, "nope")[0] == 2
        assert run(capsys, "bounds", "--figure", "3")[0] == 2

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "simulate", "--n", "3", "--dist", "bernoulli", "--fixed-rows", "[[1,1,1],[2,2,2]]")
        assert code == 1 and "singbound simulate" in err
        assert run(capsys, "certify")[0] == 1
        assert run(capsys, "gap", "--gap", '{"Q":101,"basis":[3],"dims":[7]}', "--action", "phi",
                   "--element", "1")[0] == 1

    def test_entry_point(self):
        res = subprocess.run([sys.executable, "-m", "singbound.cli", "simulate", "--n", "1", "--dist",
                              "gamma:1/3", "--exhaustive"], capture_output=True, text=True)
        assert res.returncode == 0 and json.loads(res.stdout)["probability"] == "2/3"


class TestConfig:
    def test_precedence(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"trials": 50, "n": 3, "master_seed": 9}))
        p = build_parser()
        args = p.parse_args(["simulate", "--config", str(cfg), "--dist", "bernoulli"])
        assert resolve(args, {})["trials"] == 50 and resolve(args, {})["seed"] == 9
        assert resolve(args, {"SINGBOUND_TRIALS": "70"})["trials"] == 70
        args = p.parse_args(["simulate", "--config", str(cfg), "--trials", "90"])
        assert resolve(args, {"SINGBOUND_TRIALS": "70"})["trials"] == 90
        args = p.parse_args(["simulate"])
        assert resolve(args, {})["trials"] == 10_000

    def test_round_trip(self, capsys, tmp_path):
        code, out, _ = run(capsys, "simulate", "--n", "3", "--dist", "gamma:1/2", "--trials", "500", "--seed", "4")
        doc = json.loads(out)
        ec = ExperimentConfig.from_json(doc["config"])
        assert ec.to_json() == doc["config"] and ec.master_seed == 4 and ec.trials == 500
        # rerunning from the emitted config gives the same result
        f = tmp_path / "cfg.json"
        f.write_text(json.dumps({"n": ec.n, "trials": ec.trials, "seed": ec.master_seed, "dist": "gamma:1/2"}))
        assert json.loads(run(capsys, "simulate", "--config", str(f))[1]) == doc

    def test_manifest(self, capsys, tmp_path):
        out = tmp_path / "sim.csv"
        code, _, _ = run(capsys, "simulate", "--n", "2", "--dist", "bernoulli", "--trials", "100",
                         "--format", "csv", "--out", str(out))
        assert code == 0
        man = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
        assert set(man) == {"subcommand", "config", "seeds", "versions", "outputs", "wall_clock_seconds"}
        assert man["subcommand"] == "simulate" and man["outputs"] == [str(out)]
        header = out.read_text().splitlines()[0]
        assert header.startswith("n,trials,singular")


class TestDeterminism:
    @pytest.mark.parametrize("cmd", [
        ["simulate", "--n", "4", "--dist", "gamma:1/2", "--trials", "5000", "--block-size", "300"],
        ["eigen", "--n", "3", "--k", "1", "--trials", "5000", "--block-size", "300"],
        ["spectrum", "--alpha", "bernoulli", "--normal", "[1, 3, 4]", "--Q", "101", "--eps2", "0.2"],
    ])
    @pytest.mark.parametrize("fmt", ["json", "csv"])
    def test_threads(self, capsys, cmd, fmt):
        outs = {run(capsys, *cmd, "--seed", "17", "--threads", str(t), "--format", fmt)[1] for t in (1, 4, 16)}
        assert len(outs) == 1
