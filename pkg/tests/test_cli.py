import json

import pytest

from passivegrasp.cli import run
from passivegrasp.fixtures import DATA_DIR

TWO = str(DATA_DIR / "two_finger.json")


def test_check_unstable_is_an_answer(capsys):
    assert run(["check", TWO, "--preload", "0", "--wrench", "0", "1", "0", "0", "0", "0"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("UNSTABLE (proven at round 1)")
    assert "witness" not in out


def test_check_stable_prints_witness_and_trace(capsys):
    code = run(["check", TWO, "--wrench", "0", "1.5", "0", "0", "0", "0", "--q-max", "4",
                "--trace"])
    assert code == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("STABLE\nrounds ")
    assert "witness:" in cap.out
    assert cap.err.startswith("round,objective,max_delta_deg,nodes,ms\n1,")


def test_max_wrench_output_is_deterministic(tmp_path):
    args = ["max-wrench", TWO, "--direction", "0", "1", "0", "0", "0", "0", "--q-max", "5"]
    assert run(args + ["-o", str(tmp_path / "a.txt")]) == 0
    assert run(args + ["-o", str(tmp_path / "b.txt")]) == 0
    a = (tmp_path / "a.txt").read_bytes()
    assert a == (tmp_path / "b.txt").read_bytes()
    assert a.startswith(b"s* = 2.22")


def test_force_map_has_a_row_per_degree(tmp_path):
    out = tmp_path / "map.csv"
    assert run(["force-map", TWO, "--plane", "xy", "--resolution-deg", "1", "--q-max", "0",
                "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "theta_deg,s_star,status"
    assert len(rows) == 361
    assert rows[1].startswith("0,") and rows[-1].startswith("359,")


def test_optimal_torques_infeasible_exit(tmp_path):
    # one fixed contact pushing along +y cannot hold a +y load
    doc = {"contacts": [{"position": [0, 0, 0], "normal": [0, 1, 0], "mu": 0.5}],
           "num_joints": 0, "jacobian": [[], [], []], "commanded_torques": [],
           "wrench": [0, 1, 0, 0, 0, 0]}
    path = tmp_path / "palm.json"
    path.write_text(json.dumps(doc))
    assert run(["optimal-torques", str(path), "--q-max", "2"]) == 1


def test_inconclusive_exit(capsys):
    code = run(["check", TWO, "--wrench", "0", "2.2", "0", "0", "0", "0", "--node-limit", "1"])
    assert code == 3
    assert "inconclusive" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["check", "missing.json", "--wrench", "0", "1", "0", "0", "0", "0"],
    ["check", TWO, "--preload", "1", "2"],
    ["check", TWO, "--preload", "-1"],
    ["check", TWO, "--eta-deg", "95", "--wrench", "0", "1", "0", "0", "0", "0"],
    ["check", TWO, "--gamma-deg", "70", "--wrench", "0", "1", "0", "0", "0", "0"],
    ["max-wrench", TWO],
    ["max-wrench", TWO, "--direction", "0", "0", "0", "0", "0", "0"],
    ["force-map", TWO, "--plane", "xq"],
    ["force-map", TWO, "--resolution-deg", "7"],
    ["ablate", TWO, "--wrench", "0", "1", "0", "0", "0", "0", "--eta-deg", "2"],
    ["optimal-torques", TWO, "--preload", "0.1"],
    ["bogus"],
])
def test_input_errors(argv, capsys):
    assert run(argv) == 2


def test_missing_wrench(capsys):
    assert run(["check", TWO]) == 2
    assert "no wrench" in capsys.readouterr().err
