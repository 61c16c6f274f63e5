import argparse
import json
import subprocess
import sys

import pytest

from ncdeform.cli import COMMANDS, main, run_subcommand
from ncdeform.config import ConfigError, RunConfig, load_config

KAPPA = {"n": 2, "a": ["1/3", "0"], "s": "1/5"}
KAPPA_S0 = {"n": 2, "a": ["1/5", "-1/10"], "s": "0"}


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


# --- config validation -------------------------------------------------------------


def test_config_defaults():
    cfg = RunConfig.from_dict({"n": 3})
    assert cfg.a == ("0", "0", "0") and cfg.f == "sqrt" and cfg.trunc == 8
    assert cfg.params.is_undeformed


@pytest.mark.parametrize(
    "data",
    [
        {"n": 1},
        {"n": True},
        {"n": 2, "a": ["1/2"]},
        {"n": 2, "a": [0.5, "0"]},
        {"n": 2, "a": ["1/0", "0"]},
        {"n": 2, "s": "x"},
        {"n": 2, "f": "cosh"},
        {"n": 2, "f": {"series": ["2", "1"]}},
        {"n": 2, "trunc": 4, "max_degree": 6},
        {"n": 2, "tolerances": {"ode": -1}},
        {"n": 2, "tolerances": {"wrong": 1e-3}},
        {"n": 2, "colour": "red"},
        [1, 2],
    ],
)
def test_config_rejects(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_custom_f_series():
    cfg = RunConfig.from_dict({"n": 2, "a": ["1/3", "0"], "s": "1/5", "f": {"series": ["1", "-1/2", "1/3"]}})
    assert cfg.realization_spec().f_kind == "custom"


# --- subcommands ---------------------------------------------------------------------


def test_axioms_undeformed_all_exact():
    code, rep = run_subcommand(RunConfig.from_dict({"n": 2}), "axioms")
    assert code == 0
    assert {r["status"] for r in rep["results"]} == {"exact-pass"}


@pytest.mark.parametrize("cmd", [c for c in COMMANDS if c != "eval"])
def test_every_command_passes_on_kappa_config(cmd):
    code, rep = run_subcommand(RunConfig.from_dict(KAPPA), cmd)
    assert code == 0, rep
    assert rep["command"] == cmd and rep["status"] == "pass"


def test_coproduct_special_case_included():
    code, rep = run_subcommand(RunConfig.from_dict(KAPPA_S0), "coproduct")
    assert code == 0
    assert "Delta Z = Z x Z" in [c["check"] for c in rep["results"]]


def test_flow_report_schema():
    args = argparse.Namespace(seed=3, samples=10, expr=None)
    code, rep = run_subcommand(RunConfig.from_dict(KAPPA), "flow", args)
    assert code == 0 and rep["results"][0]["samples"] == 10
    row = rep["results"][0]
    assert {"check", "samples", "max_abs_err", "tol", "status"} <= set(row)
    assert row["max_abs_err"] < row["tol"] == 1e-9


def test_zops_rejects_unity_f():
    with pytest.raises(ConfigError):
        run_subcommand(RunConfig.from_dict(dict(KAPPA, f="one")), "zops")


def test_unknown_command():
    with pytest.raises(ConfigError):
        run_subcommand(RunConfig.from_dict(KAPPA), "dance")


# --- main and exit codes ------------------------------------------------------------


def test_main_eval(tmp_path, capsys):
    cfg = write(tmp_path, KAPPA)
    assert main(["eval", "[xhat_0, xhat_1] - i*(a_0*xhat_1 - a_1*xhat_0) - s*M_0_1", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] == [] and out["text"] == "0"


def test_main_eval_vacuum(tmp_path, capsys):
    cfg = write(tmp_path, KAPPA)
    assert main(["eval", "[xhat_0, xhat_1] |0>", "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    # i (a_0 X_1 - a_1 X_0) with a = (1/3, 0)
    assert out["text"] == "(0+1/3*i)*X_1"


def test_main_syntax_error(tmp_path, capsys):
    cfg = write(tmp_path, KAPPA)
    assert main(["eval", "[D_0, X_", "--config", cfg]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["status"] == "error" and "col 8" in err["error"]


def test_main_bad_config(tmp_path, capsys):
    cfg = write(tmp_path, {"n": 1})
    assert main(["axioms", "--config", cfg]) == 2
    assert "n must be" in capsys.readouterr().err


def test_main_failure_exit_code(tmp_path, monkeypatch):
    from ncdeform import cli

    monkeypatch.setitem(cli._DISPATCH, "box", lambda cfg, args: {"status": "fail", "results": []})
    assert main(["box", "--config", write(tmp_path, KAPPA)]) == 1


def test_out_file_deterministic(tmp_path):
    cfg = write(tmp_path, KAPPA)
    outs = []
    for name in ("r1.json", "r2.json"):
        path = tmp_path / name
        assert main(["kinverse", "--config", cfg, "--out", str(path), "--samples", "10", "--seed", "4"]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["config"]["a"] == ["1/3", "0"]


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, {"n": 2})
    proc = subprocess.run(
        [sys.executable, "-m", "ncdeform.cli", "box", "--config", cfg], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
