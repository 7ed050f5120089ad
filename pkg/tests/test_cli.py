import json
import math
import subprocess
import sys

import pytest

from gaussvarlp import SCHEMA
from gaussvarlp.cli import COMMANDS, build_parser, main, resolve, run
from gaussvarlp.errors import ConfigError


def report(out_dir, command):
    return json.loads((out_dir / f"{command}.json").read_text())


def test_check_exponent_constant_is_trivial(tmp_path):
    assert main(["run", "check-exponent", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "check-exponent")
    assert rep["schema"] == SCHEMA
    res = rep["results"]
    for key in ("LH0", "LH0_reciprocal", "LHinf", "P_gamma_inf"):
        assert res[key]["estimated_constant"] == 0.0 and res[key]["passed"]
    assert set(rep) >= {"inputs_echo", "results", "tolerances", "runtime"}


def test_norm_closed_form_in_one_dimension(tmp_path):
    # ||exp(x^2/4)||_2 against gamma_1 is (int exp(x^2/2) dgamma_1)^{1/2} = 2^{1/4}
    cfg = {"command": "norm", "d": 1, "exponent": {"family": "constant", "p": 2},
           "field": {"kind": "expression", "source": "exp(x1**2/4)"}}
    path = tmp_path / "norm.json"
    path.write_text(json.dumps(cfg))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    res = report(tmp_path / "o", "norm")["results"]
    assert res["value"] == pytest.approx(2**0.25, abs=1e-6)
    assert {"value", "error_estimate", "iterations"} <= set(res)


def test_theta_of_linear_profile_is_minus_infinity(tmp_path):
    assert main(["theta", "--profile", "x1", "--out", str(tmp_path)]) == 0
    res = report(tmp_path, "theta")["results"]
    assert all(v["theta"] == "-inf" and v["unbounded_flag"] for v in res["theta"])
    assert res["unbounded_below"]


def test_theta_of_bounded_below_profile(tmp_path):
    assert main(["theta", "--out", str(tmp_path)]) == 0
    res = report(tmp_path, "theta")["results"]
    assert not res["unbounded_below"]
    assert all(math.isfinite(v["theta"]) for v in res["theta"])


def test_kernel_sweep_csv_is_deterministic(tmp_path):
    args = ["kernel-sweep", "--n", "40", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "kernel-sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "kernel-sweep.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == "x1,x2,y1,y2,value,bound,ratio"
    assert len(lines) == 41
    main(["kernel-sweep", "--n", "40", "--seed", "4", "--out", str(tmp_path / "c")])
    assert a != (tmp_path / "c" / "kernel-sweep.csv").read_bytes()


def test_flags_override_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "apply", "at": [1.0, 0.0],
                                "field": {"kind": "hermite", "alpha": [1, 0]}}))
    assert main(["run", "--config", str(path), "--at", "0.5,0.5", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "apply")
    assert rep["inputs_echo"]["at"] == ["0.5,0.5"]
    assert rep["results"]["points"] == [[0.5, 0.5]]
    assert rep["inputs_echo"]["field"]["alpha"] == [1, 0]


def test_tol_flag_reaches_the_spec(tmp_path):
    assert main(["apply", "--tol", "1e-4", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "apply")
    assert rep["tolerances"]["outer_tol"] == 1e-4


def test_report_can_be_rerun_as_config(tmp_path):
    assert main(["covering", "--cover-radius", "2", "--grid-n", "80",
                 "--out", str(tmp_path / "a")]) == 0
    echo = report(tmp_path / "a", "covering")["inputs_echo"]
    path = tmp_path / "echo.json"
    path.write_text(json.dumps(echo))
    assert main(["run", "covering", "--config", str(path), "--out", str(tmp_path / "b")]) == 0
    a = report(tmp_path / "a", "covering")["results"]
    b = report(tmp_path / "b", "covering")["results"]
    assert a == b


@pytest.mark.parametrize("argv,needle", [
    (["norm", "--exponent", '{"family": "constant", "p": 0.5}'], "exponent.p"),
    (["apply", "--field", '{"kind": "ball", "center": [0, 0]}'], "field.radius"),
    (["apply", "--spec", '{"variant": "x"}'], "spec.variant"),
    (["weaktype", "--lambdas", "log:1:0.1:3"], "lambdas"),
    (["kernel-sweep", "--regime", "sideways"], "regime"),
    (["covering", "--tol", "0.1"], "tol"),
    (["theta", "--gh-order", "8"], "gh_order"),
    (["apply", "--d", "3"], "d"),
    (["run"], "command"),
    (["norm", "--config", "/nonexistent/c.json"], "config"),
])
def test_errors_exit_one_and_name_the_field(argv, needle, capsys):
    assert main(argv) == 1
    assert needle in capsys.readouterr().err


def test_config_for_another_command_is_rejected(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"command": "norm"}))
    assert main(["theta", "--config", str(path)]) == 1
    assert "norm" in capsys.readouterr().err


def test_numerical_flags_exit_two(tmp_path):
    # a coarse t-rule with a tight tolerance trips the refinement check
    spec = {"variant": "alternative", "m": 2, "tau_panels": 8, "t_order": 2,
            "outer_tol": 1e-14}
    code = run("apply", {"spec": spec, "field": {"kind": "ball", "center": [0.5, 0.2],
                                                 "radius": 0.7}},
               out_dir=tmp_path)
    assert code == 2
    assert report(tmp_path, "apply")["flags"]


def test_run_rejects_flags_of_other_commands(capsys):
    assert main(["run", "theta", "--lambdas", "0.1,1"]) == 1
    assert "lambdas" in capsys.readouterr().err


def test_unknown_setting_rejected():
    with pytest.raises(ConfigError) as exc:
        resolve("norm", {"grid_size": 3})
    assert exc.value.field == "grid_size"


def test_declaration_from_file(tmp_path):
    (tmp_path / "p.json").write_text(json.dumps({"family": "constant", "p": 3}))
    cfg = resolve("norm", flags={"exponent": "@" + str(tmp_path / "p.json")})
    assert cfg["exponent"] == {"family": "constant", "p": 3}


def test_parser_knows_every_command():
    parser = build_parser()
    for name in COMMANDS:
        ns = parser.parse_args([name])
        assert ns.command == name


def test_console_entry_point_runs():
    out = subprocess.run([sys.executable, "-m", "gaussvarlp.cli", "theta", "--profile", "x1"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert json.loads(out.stdout)["command"] == "theta"
