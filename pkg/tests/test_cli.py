import json
import math

import pytest

from contactmech.cli import main

BASE = """
seed = 7
initial_conditions = [[1.0, 0.0, 0.0]]

[chart]
n = 1

[hamiltonian]
expression = "(x1^2 + y1^2)/2 + $gamma*z"
parameters = {gamma = 0.1}

[integrator]
method = "rk4"
step = 1e-2
t_span = [0.0, 1.0]
"""

REDUCE = """
seed = 3
initial_conditions = [[0.2, 0.4, 0.0, 0.3, 0.5]]

[chart]
n = 2

[hamiltonian]
expression = "(y1^2 + y2^2)/2 + y1 + cos(x2) + 0.1*z"

[integrator]
step = 1e-2
t_span = [0.0, 1.0]

[action]
generators = [["1", "0", "0", "0", "0"]]
translated = ["x1"]
reconstruct = true
"""


def write(tmp_path, text, name="scenario.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(tmp_path, *args, config=BASE):
    cfg = write(tmp_path, config)
    out = tmp_path / "out"
    return main([*args, "--config", cfg, "--out", str(out), "--quiet"]), out


def test_integrate_writes_artifacts(tmp_path):
    code, out = run(tmp_path, "integrate")
    assert code == 0
    report = json.loads((out / "integrate.json").read_text())
    assert report["command"] == "integrate"
    assert report["seed"] == 7
    assert len(report["config_sha256"]) == 64
    assert report["trajectories"][0]["steps"] == 100
    lines = (out / "trajectory_0.csv").read_text().splitlines()
    assert lines[0] == "t,x1,y1,z,H,RH,energy_defect,div_defect"
    assert len(lines) == 102
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "1"
    assert float(lines[-1].split(",")[4]) == pytest.approx(
        0.5 * math.exp(-0.1), abs=1e-8)


def test_check_frame_and_brackets_pass(tmp_path):
    for what in ("frame", "brackets"):
        code, out = run(tmp_path, "check", what)
        assert code == 0
        report = json.loads((out / f"check_{what}.json").read_text())
        assert report["passed"] is True


def test_check_submanifold_coisotropic(tmp_path):
    config = BASE + '\n[submanifold]\nconstraints = ["y1"]\n'
    code, out = run(tmp_path, "check", "submanifold", config=config)
    assert code == 0
    report = json.loads((out / "check_submanifold.json").read_text())
    assert report["kind"] == "coisotropic"
    assert report["passed"] is True


def test_check_submanifold_legendrian(tmp_path):
    config = BASE + ('\n[submanifold]\n'
                     'parametrization = ["s", "0.8", "0.8*s"]\n'
                     'parameters = ["s"]\n')
    code, out = run(tmp_path, "check", "submanifold", config=config)
    assert code == 0
    report = json.loads((out / "check_submanifold.json").read_text())
    assert report["kind"] == "legendrian"
    assert report["passed"] is True


def test_check_failure_exits_one(tmp_path):
    config = BASE + '\n[submanifold]\nconstraints = ["x1", "y1"]\n'
    code, out = run(tmp_path, "check", "submanifold", config=config)
    assert code == 1
    report = json.loads((out / "check_submanifold.json").read_text())
    assert report["passed"] is False


def test_lift_check_and_alias_agree(tmp_path):
    code, out = run(tmp_path, "check", "lift")
    assert code == 0
    first = (out / "check_lift.json").read_bytes()
    code, out = run(tmp_path, "lift-check")
    assert code == 0
    assert (out / "check_lift.json").read_bytes() == first


def test_lift_check_rejects_non_hamiltonian_field(tmp_path):
    config = BASE + '\n[lift]\nfield = ["0", "1", "0"]\n'
    code, out = run(tmp_path, "check", "lift", config=config)
    assert code == 1
    report = json.loads((out / "check_lift.json").read_text())
    assert report["max_residual"] >= 1e-2


def test_reduce_pipeline(tmp_path):
    code, out = run(tmp_path, "reduce", config=REDUCE)
    assert code == 0
    report = json.loads((out / "reduce.json").read_text())
    assert report["passed"] is True
    assert report["reduced_n"] == 1
    assert report["reduced_hamiltonian"] == "y1^2 / 2 + cos(x1) + 0.1 * z"
    assert report["max_mismatch"] <= 1e-6
    assert report["reconstruction_error"] <= 1e-6
    lines = (out / "reduce_comparison.csv").read_text().splitlines()
    assert lines[0] == "t,mismatch"
    lines = (out / "reconstruction.csv").read_text().splitlines()
    assert lines[0] == "t,x1,x2,y1,y2,z"


def test_reduce_nonzero_mu_is_config_error(tmp_path, capsys):
    config = REDUCE.replace("reconstruct = true", "mu = [0.5]")
    code, _ = run(tmp_path, "reduce", config=config)
    assert code == 2
    assert "mu" in capsys.readouterr().err


def test_reduce_noninvariant_reports_failure(tmp_path):
    config = REDUCE.replace(
        '"(y1^2 + y2^2)/2 + y1 + cos(x2) + 0.1*z"',
        '"x1 + z"')
    code, out = run(tmp_path, "reduce", config=config)
    assert code == 1
    report = json.loads((out / "reduce.json").read_text())
    assert report["passed"] is False
    assert report["invariance_defect"] == pytest.approx(1.0)


def test_unknown_key_rejected(tmp_path, capsys):
    code, out = run(tmp_path, "integrate", config=BASE + "\nbogus = 1\n")
    assert code == 2
    assert "bogus" in capsys.readouterr().err
    assert not out.exists() or not any(out.iterdir())


def test_bad_expression_rejected(tmp_path, capsys):
    config = BASE.replace("(x1^2 + y1^2)/2 + $gamma*z", "x1 + + y1")
    code, out = run(tmp_path, "integrate", config=config)
    assert code == 2
    assert "expression" in capsys.readouterr().err
    assert not out.exists()


def test_blowup_exits_three(tmp_path, capsys):
    config = """
seed = 0
initial_conditions = [[0.0, 0.0, -1.0]]

[chart]
n = 1

[hamiltonian]
expression = "z^2"

[integrator]
step = 1e-3
t_span = [0.0, 2.0]
"""
    code, _ = run(tmp_path, "integrate", config=config)
    assert code == 3
    assert "numerical failure" in capsys.readouterr().err


def test_seed_override_changes_report(tmp_path):
    cfg = write(tmp_path, BASE)
    out = tmp_path / "out"
    main(["check", "frame", "--config", cfg, "--out", str(out),
          "--seed", "99", "--quiet"])
    report = json.loads((out / "check_frame.json").read_text())
    assert report["seed"] == 99


def test_determinism(tmp_path):
    cfg = write(tmp_path, BASE)
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["check", "brackets", "--config", cfg,
                     "--out", str(out), "--quiet"]) == 0
        blobs.append((out / "check_brackets.json").read_bytes())
    assert blobs[0] == blobs[1]
