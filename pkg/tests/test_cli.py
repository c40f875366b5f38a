import json
import subprocess
import sys

import pytest

from qgls.cli import main
from qgls.config import echo, load_config
from qgls.parallel import parallel_map
from qgls.serialize import decode_float, dumps

IS_PSI = {"kind": "iwaniec_sbordone", "a": 0.1, "b": 0.5, "theta": 1.0}


def run(capsys, sub, doc=None, *flags, tmp_path=None):
    argv = [sub, *flags]
    if doc is not None:
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        argv += ["--input", str(path)]
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cli(capsys, tmp_path):
    return lambda sub, doc=None, *flags: run(capsys, sub, doc, *flags, tmp_path=tmp_path)


def test_norm_example(cli):
    code, out, _ = cli("norm", {"function": {"variant": "power_log", "big_delta": 2.0}}, "--p", "0.25")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(16.0, rel=1e-12)


def test_norm_grid_csv(cli):
    doc = {"function": {"variant": "sampled", "grid": [0.0, 0.5], "values": [1.0, 3.0]}, "p_grid": [0.5, 1.0]}
    code, out, _ = cli("norm", doc, "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "p,value,abs_error_estimate,converged"
    assert float(lines[2].split(",")[1]) == pytest.approx(2.0)


@pytest.mark.parametrize("doc,path", [
    ({"function": {}}, "function.variant"),
    ({"function": {"variant": "power_log", "big_delta": 2.0, "colour": 1}}, "function.colour"),
    ({"function": {"variant": "power_log", "big_delta": 2.0}}, "p"),
    ({"function": {"variant": "sampled", "grid": [0.0, 0.5], "values": ["x", 1]}, "p": 0.5}, "function.values[0]"),
])
def test_config_errors(cli, doc, path):
    code, out, err = cli("norm", doc)
    assert code == 2 and out == ""
    e = json.loads(err)
    assert e["error"] == "config" and e["path"] == path


def test_usage_errors(cli):
    assert cli("nonsense")[0] == 2
    code, _, err = cli("norm", None, "--format", "xml")
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_bad_json(cli, tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["norm", "--input", str(p)]) == 2
    assert json.loads(capsys.readouterr().err)["path"] == "$"


def test_computation_error_exit_one(cli):
    # x^-2 has no finite norm beyond p = 1/2
    code, out, err = cli("natural-fn", {"function": {"variant": "power_log", "big_delta": 2.0}, "a": 0.1, "b": 0.6})
    assert code == 1 and out == ""
    assert "error" in json.loads(err)


def test_gls_and_inf_encoding(cli):
    doc = {"function": {"variant": "power_log", "big_delta": 2.0}, "psi": {"kind": "constant", "a": 0.1, "b": 0.5}}
    code, out, _ = cli("gls-norm", doc)
    d = json.loads(out)
    assert code == 0
    # the norm blows up at the right endpoint
    assert d["value"] == "inf" and decode_float(d["value"]) == float("inf")


def test_gls_finite(cli):
    doc = {"function": {"variant": "power_log", "big_delta": 2.0}, "psi": IS_PSI}
    code, out, _ = cli("gls-norm", doc)
    d = json.loads(out)
    assert code == 0 and 0 < d["value"] < float("inf")
    assert d["config"]["psi"] == IS_PSI


def test_natural(cli):
    code, out, _ = cli("natural-fn", {"function": {"variant": "power_log", "big_delta": 2.0}, "a": 0.1, "b": 0.5,
                                      "grid_size": 9})
    d = json.loads(out)
    assert code == 0 and d["psi"]["kind"] == "tabulated" and len(d["psi"]["nodes"]) == 9


def test_fundamental(cli):
    code, out, _ = cli("fundamental", {"psi": IS_PSI, "delta_grid": [1e-4, 0.1, 1.0]})
    d = json.loads(out)
    assert code == 0 and d["all_hold"] and len(d["rows"]) == 3


def test_tail_modes(cli):
    doc = {"function": {"variant": "power_log", "big_delta": 2.0}, "psi": IS_PSI, "u_grid": [2.0, 100.0]}
    code, out, _ = cli("tail", doc)
    assert code == 0 and json.loads(out)["bounds_hold"]
    code, out, _ = cli("tail", {"tail_model": {"b": 0.5}})
    d = json.loads(out)
    assert code == 0 and d["bounds_hold"] and len(d["rows"]) == 10
    assert d["gap_law_slope"] == pytest.approx(1.0, abs=0.1)


def test_boyd(cli):
    code, out, _ = cli("boyd", {"psi": IS_PSI, "s_exponents": [200, 400, 800]})
    d = json.loads(out)
    assert code == 0
    assert d["gamma1"] == pytest.approx(1 / 0.5, rel=0.02) and d["gamma2"] == pytest.approx(1 / 0.1, rel=0.02)


def test_fixpoint(cli):
    code, out, _ = cli("fixpoint", {"problem": {"kind": "scalar_scaling"}, "max_iter": 4})
    d = json.loads(out)
    assert code == 0 and d["sound"] and len(d["iterations"]) == 5
    assert d["iterations"][1]["bound"] == pytest.approx(1.6 / 9)
    code, out, _ = cli("fixpoint", {"problem": {"kind": "scalar_scaling", "factor": 0.5}}, "--mode",
                       "triangle_squared")
    assert code == 1  # 0.25 * 4 is not below one


def test_transfer(cli):
    doc = {"psi": {"kind": "constant", "a": 0.2, "b": 0.8}, "operator": {"kind": "dilation", "s": 2.0},
           "theta": {"kind": "power_of_s", "s": 2.0},
           "corpus": [{"variant": "indicator", "intervals": [[0.0, 1.0]], "space": {"kind": "half_line"}}]}
    code, out, _ = cli("transfer", doc)
    d = json.loads(out)
    assert code == 0 and d["max_ratio"] == pytest.approx(1.0, abs=1e-6)
    doc["theta"] = {"kind": "constant"}
    assert cli("transfer", doc)[0] == 1


def test_verify_suite(cli):
    code, out, _ = cli("verify", None, "--suite", "quasi-triangle")
    d = json.loads(out)
    assert code == 0 and d["all_passed"]
    assert {c["suite"] for c in d["checks"]} == {"quasi-triangle"}


def test_output_file(tmp_path, capsys):
    dest = tmp_path / "out.csv"
    assert main(["verify", "--suite", "measure", "--format", "csv", "-o", str(dest)]) == 0
    assert capsys.readouterr().out == ""
    assert dest.read_text().startswith("suite,check,passed,value,limit\n")


def test_stdin(monkeypatch, capsys):
    import io
    monkeypatch.setattr(sys, "stdin", io.StringIO('{"function": {"variant": "power_log", "big_delta": 2.0}}'))
    assert main(["norm", "-i", "-", "--p", "0.25"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(16.0)


@pytest.mark.parametrize("sub,doc", [
    ("gls-norm", {"function": {"variant": "tail_defined", "tail": {"kind": "analytic", "b": 0.5}},
                  "psi": {"kind": "tail_model", "a": 0.05, "b": 0.5, "gamma": 0.0}}),
    ("transfer", {"psi": {"kind": "bandaliyev", "b": 0.5}, "operator": {"kind": "identity"},
                  "theta": {"kind": "constant", "c": 2.0},
                  "corpus": [{"variant": "sampled", "grid": [0.0, 1.0], "values": [1.0, -1.0],
                              "space": {"kind": "finite_discrete", "weights": [0.5, 0.5]}}]}),
    ("tail", {"tail_model": {"b": 0.7, "gamma": 1.0, "slowly_varying": {"kind": "log_power", "kappa": 0.5}}}),
])
def test_echo_round_trip(sub, doc):
    cfg = load_config(json.dumps(doc), sub)
    again = load_config(dumps(echo(cfg)), sub)
    assert again == cfg


def test_module_entry_point_deterministic():
    cmd = [sys.executable, "-m", "qgls", "verify", "--suite", "gls"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and json.loads(a)["all_passed"]


def test_parallel_map_order(monkeypatch):
    monkeypatch.setenv("QGLS_THREADS", "4")
    assert parallel_map(lambda x: x * x, list(range(50))) == [x * x for x in range(50)]
    monkeypatch.setenv("QGLS_THREADS", "1")
    assert parallel_map(str, [3, 1, 2]) == ["3", "1", "2"]
