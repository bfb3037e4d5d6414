import csv
from pathlib import Path

import numpy as np
import pytest

from braced.bracing import ConstraintSpec, region_distance
from braced.resolve import STRATEGIES
from braced.robot import forward_kinematics
from braced.sim.cli import main
from braced.sim.config import load_scenario
from braced.sim.ik import seed_configuration
from braced.sim.path import path_pose
from braced.spatial import Frame

SCENARIO = Path(__file__).resolve().parents[1] / "src" / "braced" / "data" / "scenario_circle.yaml"
SHORT = ["--set", "simulation.duration=0.5"]


def test_validate_ok(capsys):
    assert main(["validate", "--config", str(SCENARIO)]) == 0
    out = capsys.readouterr().out
    assert "brace normal offset" in out and "500" in out


def test_validate_reports_bad_start(capsys):
    assert main(["validate", "--config", str(SCENARIO), "--set", "simulation.q2=[0, 0, 0, 0, 0]"]) == 2
    assert "path start" in capsys.readouterr().err


def test_validate_reports_config_error(tmp_path, capsys):
    p = tmp_path / "c.yaml"
    p.write_text("robot: builtin\n")
    assert main(["validate", "--config", str(p)]) == 2
    assert "c.yaml" in capsys.readouterr().err


def test_simulate_all_strategies(tmp_path, capsys):
    assert main(["simulate", "--config", str(SCENARIO), "--strategy", "all", "--out", str(tmp_path)] + SHORT) == 0
    rows = list(csv.DictReader(open(tmp_path / "summary.csv")))
    assert [r["strategy"] for r in rows] == list(STRATEGIES)
    for s in STRATEGIES:
        assert (tmp_path / f"trace_{s}.csv").exists()
        assert (tmp_path / "plots" / s / "k.dat").exists()
    assert "mean_Ci" in capsys.readouterr().out


def test_simulate_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--config", str(SCENARIO), "--out"]
    assert main(args + [str(a)] + SHORT) == 0
    assert main(args + [str(b), "--jobs", "3"] + SHORT) == 0
    for s in STRATEGIES:
        assert (a / f"trace_{s}.csv").read_bytes() == (b / f"trace_{s}.csv").read_bytes()


def test_simulate_flags(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(SCENARIO), "--strategy", "braced-min-norm", "--out", str(out),
                 "--dt", "0.01", "--sw2-variant", "paper-verbatim", "--seed-ik"] + SHORT) == 0
    rows = list(csv.reader(open(out / "trace_braced-min-norm.csv")))
    assert len(rows) == 1 + 51
    assert float(rows[2][0]) == 0.01


def test_simulate_abort_is_reported(tmp_path):
    code = main(["simulate", "--config", str(SCENARIO), "--strategy", "braced-min-norm", "--out", str(tmp_path),
                 "--set", "constraint.r_max=1e-4"])
    assert code == 3
    row = next(csv.DictReader(open(tmp_path / "summary.csv")))
    assert row["status"].startswith("error")


def test_sweep(tmp_path, capsys):
    assert main(["sweep", "--config", str(SCENARIO), "--param", "path.radius", "--values", "[0.05, 0.08]",
                 "--out", str(tmp_path), "--set", "resolution.strategy=braced-min-norm"] + SHORT) == 0
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert [r["path.radius"] for r in rows] == ["0.05", "0.08"]
    assert (tmp_path / "path.radius=0.05" / "summary.csv").exists()


def test_bad_set_syntax(capsys):
    assert main(["validate", "--config", str(SCENARIO), "--set", "nokey"]) == 2


def test_ik_seed_recovers_braced_start():
    sc = load_scenario(SCENARIO)
    target, _ = path_pose(sc.path, 0.0)
    guess = sc.initial.as_vector() + 0.1
    cfg = seed_configuration(sc.robot, sc.constraint, target, q_guess=guess)
    b, e = forward_kinematics(sc.robot, cfg)
    assert abs(sc.constraint.normal_offset(b.origin)) < 1e-8
    assert np.linalg.norm(e.origin - target) < 1e-8
    assert np.allclose(b.z_axis, sc.constraint.normal, atol=1e-8)
    assert region_distance(sc.constraint, b.origin) < sc.constraint.r_max


def test_ik_seed_gives_up_on_unreachable_target():
    sc = load_scenario(SCENARIO)
    with pytest.raises(RuntimeError):
        seed_configuration(sc.robot, sc.constraint, np.array([10.0, 0, 0]), restarts=2, iters=20)
