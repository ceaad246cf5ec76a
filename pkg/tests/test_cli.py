"""Command-line plumbing: artifacts, exit codes, determinism."""
from __future__ import annotations

import csv
import json

import pytest

from fbauction import example_1, save_instance
from fbauction.cli import main


def _solve_args(out, extra=()):
    return ["solve", "--example", "1", "--max-iters", "400", "--check-interval", "100", "--out", str(out), *extra]


@pytest.fixture()
def solved(tmp_path):
    out = tmp_path / "run"
    assert main(_solve_args(out)) == 0
    return out


def test_solve_writes_all_artifacts(solved):
    for name in ["strategies.csv", "payoffs.csv", "certificate.json", "manifest.json"]:
        assert (solved / name).exists(), name

    with open(solved / "strategies.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4 * 401
    for agent in range(4):
        cdf = [float(r["cdf"]) for r in rows if int(r["agent_id"]) == agent]
        assert all(b >= a - 1e-12 for a, b in zip(cdf, cdf[1:]))
        assert cdf[-1] == pytest.approx(1.0, abs=1e-9)

    with open(solved / "payoffs.csv", newline="") as fh:
        payoff_rows = list(csv.DictReader(fh))
    assert len(payoff_rows) == 4 * 401
    assert set(payoff_rows[0]) == {"agent_id", "bid", "expected_payoff"}

    cert = json.loads((solved / "certificate.json").read_text())
    assert set(cert) == {"epsilon", "gaps", "payoffs", "best_response_bids", "iterations", "config_echo"}
    assert cert["iterations"] == 400

    manifest = json.loads((solved / "manifest.json").read_text())
    assert manifest["instance"]["name"] == "example-1"
    assert manifest["config"]["max_iterations"] == 400
    assert manifest["config"]["schedule"] == {"kind": "harmonic", "coefficient": 1.0}
    assert manifest["iterations_run"] == 400
    assert [k for k, _ in manifest["trajectory"]] == [100, 200, 300, 400]


def test_solve_reruns_byte_identically(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(_solve_args(first)) == 0
    assert main(_solve_args(second)) == 0
    for name in ["strategies.csv", "payoffs.csv", "certificate.json"]:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_verify_reproduces_certificate(solved, capsys):
    cert = json.loads((solved / "certificate.json").read_text())
    capsys.readouterr()
    assert main(["verify", "--example", "1", str(solved / "strategies.csv")]) == 0
    replay = json.loads(capsys.readouterr().out)
    assert abs(replay["epsilon"] - cert["epsilon"]) <= 1e-12
    assert replay["gaps"] == cert["gaps"]


def test_verify_hand_written_equilibrium(tmp_path, capsys):
    doc = {
        "values": [1.0, 0.5],
        "scenarios": [{"members": [0, 1], "prob": 1.0}],
        "grid": {"max": 1.0, "steps": 4},
    }
    instance_file = tmp_path / "duel.json"
    instance_file.write_text(json.dumps(doc))
    # mutual pure best responses: undercut at 0.25 vs priced-out at 0
    lines = ["agent_id,bid,pdf,cdf"]
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    masses = {0: 1, 1: 0}
    for agent, at in masses.items():
        running = 0.0
        for j, b in enumerate(grid):
            w = 1.0 if j == at else 0.0
            running += w
            lines.append(f"{agent},{b},{w},{running}")
    strategies = tmp_path / "strategies.csv"
    strategies.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--file", str(instance_file), str(strategies)]) == 0
    replay = json.loads(capsys.readouterr().out)
    assert replay["epsilon"] == 0.0


def test_verify_rejects_garbage_csv(tmp_path):
    garbage = tmp_path / "garbage.csv"
    garbage.write_text("who,what\n1,2\n")
    assert main(["verify", "--example", "1", str(garbage)]) == 2
    short = tmp_path / "short.csv"
    short.write_text("agent_id,bid,pdf\n0,0.0,1.0\n")
    assert main(["verify", "--example", "1", str(short)]) == 2


def test_solve_invalid_instance_exits_2(tmp_path, capsys):
    doc = {
        "values": [0.5, 0.5],
        "scenarios": [{"members": [0, 1], "prob": 0.5}, {"members": [0], "prob": 0.6}],
        "grid": {"max": 1.0, "steps": 10},
    }
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["solve", "--file", str(bad), "--out", str(tmp_path / "out")]) == 2
    assert "sum to 1.1" in capsys.readouterr().err


def test_solve_unreadable_file_exits_1(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{oops")
    assert main(["solve", "--file", str(broken), "--out", str(tmp_path / "out")]) == 1
    assert main(["solve", "--file", str(tmp_path / "missing.json"), "--out", str(tmp_path / "out")]) == 1
    # structurally incomplete document: independent players need their probs
    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"players": [{"values": [0.1, 0.2]}], "grid": {"max": 1.0, "steps": 4}}))
    assert main(["solve", "--file", str(partial), "--out", str(tmp_path / "out")]) == 1


def test_solve_unreached_target_exits_3(tmp_path):
    out = tmp_path / "out"
    code = main(["solve", "--example", "1", "--max-iters", "0", "--eps-target", "1e-9", "--out", str(out)])
    assert code == 3
    assert (out / "certificate.json").exists()  # artifacts still written


def test_solve_file_instance_with_overrides(tmp_path):
    source = tmp_path / "ex1.json"
    save_instance(example_1().instance, source)
    out = tmp_path / "out"
    code = main([
        "solve", "--file", str(source), "--grid-steps", "50", "--alpha", "0.5",
        "--eta-kind", "harmonic", "--eta-c", "1.0", "--max-iters", "200", "--out", str(out),
    ])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["instance"]["grid"] == {"max": 1.0, "steps": 50}
    assert manifest["instance"]["alpha"] == 0.5
    assert manifest["instance"]["sha256"]
    assert manifest["config"]["schedule"] == {"kind": "harmonic", "coefficient": 1.0}


def test_batch_runs_each_seed(tmp_path):
    out = tmp_path / "batch"
    code = main([
        "batch", "--seed-start", "0", "--seed-count", "2",
        "--max-iters", "300", "--check-interval", "100", "--out", str(out),
    ])
    assert code == 0
    with open(out / "batch.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["seed"] for r in rows] == ["0", "1"]
    assert all(float(r["epsilon"]) > 0 for r in rows)

    # determinism: re-running a seed reproduces its epsilon exactly
    out2 = tmp_path / "batch2"
    assert main([
        "batch", "--seed-start", "0", "--seed-count", "1",
        "--max-iters", "300", "--check-interval", "100", "--out", str(out2),
    ]) == 0
    with open(out2 / "batch.csv", newline="") as fh:
        repeat = list(csv.DictReader(fh))
    assert repeat[0]["epsilon"] == rows[0]["epsilon"]


def test_batch_empty_seed_range(tmp_path):
    out = tmp_path / "empty"
    assert main(["batch", "--seed-count", "0", "--out", str(out)]) == 0
    assert (out / "batch.csv").read_text().strip() == "seed,epsilon,duration_seconds"


def test_show_prints_instance(capsys):
    assert main(["show", "--example", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["instance"]["values"] == pytest.approx([1 / 3, 2 / 3, 1.0])
    assert doc["instance"]["grid"] == {"max": 1.0, "steps": 600}
    assert doc["recommended_config"]["max_iterations"] == 1_000_000
