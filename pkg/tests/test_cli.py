import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from ebits.cli import Report, RunConfig, emit, main, run
from ebits.concentration import EnsembleSpec, exact_entropy_rate, typical_subspace_log_dim
from ebits.seeding import BLOCK_SIZE, block_rng, blocks


def run_json(command, workers=1, **kw):
    cfg = RunConfig(command, **kw)
    return emit(run(cfg, workers=workers), "json")


def metrics(data):
    return {m["name"]: m for m in json.loads(data)["results"]}


class TestCommands:
    def test_entropy_half(self):
        m = metrics(run_json("entropy", p=0.5))
        assert m["entropy_of_entanglement"]["value"] == pytest.approx(1.0, abs=1e-12)

    def test_filter(self):
        m = metrics(run_json("filter", p=0.75, trials=100_000, seed=7))
        rate = m["pass_rate"]
        assert rate["reference"] == 0.5
        assert abs(rate["value"] - 0.5) <= 3 * rate["stderr"]
        assert m["passed_state_entanglement"]["value"] == pytest.approx(1.0, abs=1e-10)

    def test_teleport(self):
        m = metrics(run_json("teleport", trials=2000, seed=3))
        assert m["min_fidelity"]["value"] >= 1 - 1e-9
        assert sum(m[f"freq_{n}"]["value"] for n in ("Psi+", "Psi-", "Phi+", "Phi-")) == pytest.approx(1.0)

    def test_otp(self):
        m = metrics(run_json("otp", trials=5000, seed=1))
        assert m["key_agreement"]["value"] == 1.0
        assert m["message_roundtrip"]["value"] == 1.0

    @pytest.mark.parametrize("k", [4, 16])
    def test_concentrate(self, k):
        m = metrics(run_json("concentrate", k=k, p=0.75, trials=3000, batch_size=64, seed=2))
        for j in range(k + 1):
            f = m[f"freq_j={j}"]
            assert abs(f["value"] - f["reference"]) <= 4 * max(f["stderr"], 1e-3)
        rate = m["mean_rate"]
        assert abs(rate["value"] - rate["reference"]) <= 4 * rate["stderr"]

    def test_yield_curve_csv(self):
        cfg = RunConfig("yield-curve", p=0.75, k=4096, format="csv")
        rows = list(csv.DictReader(io.StringIO(emit(run(cfg), "csv").decode())))
        assert [r["name"] for r in rows] == [f"exact_entropy_rate@k={2**i}" for i in range(1, 13)]
        for i, r in enumerate(rows, start=1):
            assert float(r["value"]) == exact_entropy_rate(EnsembleSpec.of(2**i, 0.75))
            assert float(r["reference"]) == pytest.approx(0.8112781244591328, abs=1e-15)
            assert r["stderr"] == ""

    def test_typical_dim(self):
        m = metrics(run_json("typical-dim", p=0.75, k=1024, epsilon=0.01))
        assert m["epsilon"]["value"] == 0.01
        expected = typical_subspace_log_dim(EnsembleSpec.of(1024, 0.75), 0.01) / 1024
        assert m["log2_dim_per_pair"]["value"] == expected


class TestDeterminism:
    @pytest.mark.parametrize(
        "command, kw",
        [
            ("teleport", dict(trials=3000)),
            ("filter", dict(trials=50_000)),
            ("otp", dict(trials=5000)),
            ("concentrate", dict(k=4, trials=5000)),
            ("concentrate", dict(k=16, trials=3000)),
        ],
    )
    def test_byte_identical_across_runs_and_workers(self, command, kw):
        ref = run_json(command, seed=123, **kw)
        assert run_json(command, seed=123, **kw) == ref
        assert run_json(command, workers=4, seed=123, **kw) == ref
        assert run_json(command, seed=124, **kw) != ref

    def test_trial_stream_is_function_of_index(self):
        a = block_rng(5, 3).random(10)
        np.testing.assert_array_equal(a, block_rng(5, 3).random(10))
        assert not np.array_equal(a, block_rng(5, 4).random(10))
        assert not np.array_equal(a, block_rng(6, 3).random(10))

    def test_blocks_cover_trials(self):
        parts = blocks(2 * BLOCK_SIZE + 5)
        assert [n for _, n in parts] == [BLOCK_SIZE, BLOCK_SIZE, 5]
        assert [b for b, _ in parts] == [0, 1, 2]

    def test_seed_range(self):
        block_rng(2**64 - 1, 0)
        with pytest.raises(ValueError):
            block_rng(2**64, 0)


class TestSeedIndependence:
    def test_chi_square_disjoint_streams(self):
        # 10**6 draws: 1000 blocks x 1000; pair block b with block b+500
        draws = np.array([block_rng(99, b).random(1000) for b in range(1000)])
        x = np.floor(draws[:500] * 10).astype(int).ravel()
        y = np.floor(draws[500:] * 10).astype(int).ravel()
        table = np.zeros((10, 10))
        np.add.at(table, (x, y), 1)
        _, pval, _, _ = stats.chi2_contingency(table)
        assert pval > 1e-3
        _, pval_uniform = stats.chisquare(np.bincount(np.floor(draws.ravel() * 100).astype(int), minlength=100))
        assert pval_uniform > 1e-3

    def test_adjacent_blocks_uncorrelated(self):
        draws = np.array([block_rng(0, b).random(2000) for b in range(200)])
        corr = np.corrcoef(draws)
        off = corr[~np.eye(200, dtype=bool)]
        assert np.max(np.abs(off)) < 5 / math.sqrt(2000)


class TestEmit:
    def test_empty_report(self):
        data = json.loads(emit(Report(RunConfig("entropy")), "json"))
        assert list(data) == ["command", "config", "results", "references"]
        assert data["results"] == []
        assert data["config"]["command"] == "entropy"

    def test_key_order(self):
        data = json.loads(run_json("entropy", p=0.6))
        assert list(data) == ["command", "config", "results", "references"]
        assert list(data["config"]) == ["command", "p", "k", "trials", "batch_size", "epsilon", "seed", "format", "out"]
        assert list(data["results"][0]) == ["name", "value", "stderr", "reference"]

    def test_seventeen_digits_round_trip(self):
        rep = Report(RunConfig("entropy"))
        values = [0.1, 1 / 3, math.pi, 2.0, 1e-300, 0.8112781244591328]
        for i, v in enumerate(values):
            rep.add(f"v{i}", v, stderr=v / 7)
        text = emit(rep, "json").decode()
        assert "0.10000000000000001" in text
        back = json.loads(text)["results"]
        assert [m["value"] for m in back] == values
        assert [m["stderr"] for m in back] == [v / 7 for v in values]

    def test_csv_layout(self):
        rep = Report(RunConfig("entropy"))
        rep.add("a", 0.5, 0.01, 0.25)
        rep.add("b", 1.0)
        assert emit(rep, "csv").decode().splitlines() == [
            "name,value,stderr,reference",
            "a,0.5,0.01,0.25",
            "b,1.0,,",
        ]

    def test_timing_is_opt_in(self):
        rep = run(RunConfig("entropy"))
        assert "elapsed_seconds" not in json.loads(emit(rep, "json"))
        assert json.loads(emit(rep, "json", timing=True))["elapsed_seconds"] >= 0

    def test_writes_file(self, tmp_path):
        out = tmp_path / "r.json"
        data = emit(run(RunConfig("entropy")), "json", out)
        assert out.read_bytes() == data


class TestMain:
    def test_success(self, capsysbinary):
        assert main(["entropy", "--p", "0.5"]) == 0
        data = json.loads(capsysbinary.readouterr().out)
        assert data["results"][-1]["value"] == 1.0

    def test_out_flag(self, tmp_path, capsysbinary):
        out = tmp_path / "f.csv"
        assert main(["filter", "--p", "0.75", "--trials", "1000", "--format", "csv", "--out", str(out)]) == 0
        assert capsysbinary.readouterr().out == b""
        assert out.read_text().startswith("name,value,stderr,reference\n")

    @pytest.mark.parametrize(
        "argv",
        [
            ["entropy", "--p", "abc"],
            ["entropy", "--p", "1.5"],
            ["filter", "--p", "0.3"],
            ["typical-dim", "--epsilon", "2"],
            ["teleport", "--trials", "0"],
            ["concentrate", "--k", "3", "--batch-size", "64"],
            ["entropy", "--format", "xml"],
            ["entropy", "--seed", "-1"],
            ["bogus"],
        ],
    )
    def test_invalid_flags(self, argv, capsys):
        code = main(argv)
        err = capsys.readouterr().err
        assert code != 0
        assert len(err.strip().splitlines()) == 1
        assert "error" in err

    def test_unwritable_out(self, tmp_path, capsys):
        code = main(["entropy", "--out", str(tmp_path / "missing" / "r.json")])
        assert code == 1
        assert "cannot write" in capsys.readouterr().err

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ebits", "entropy", "--p", "1.0"], capture_output=True, check=True
        )
        assert json.loads(proc.stdout)["results"][-1]["value"] == 0.0
