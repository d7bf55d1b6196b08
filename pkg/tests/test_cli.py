from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from wallcross import cli, suite
from wallcross.correlator import CheckReport


@pytest.fixture
def quintic_file(tmp_path):
    path = tmp_path / "quintic.json"
    path.write_text(json.dumps({"r": 5, "weights": [1, 1, 1, 1, 1]}))
    return str(path)


def run(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_ifunc_json(capsys, quintic_file):
    status, out, _ = run(capsys, "ifunc", "--model", quintic_file, "--max-deg", "10", "--format", "json")
    assert status == 0
    data = json.loads(out)
    assert len(data["I0"]) == len(data["I1"]) == 11
    assert data["I0"][0] == "1" and data["I0"][5] == "1/375000" and data["I0"][10] == "3/13671875000"
    assert data["I1"][1] == "1" and data["I1"][6] == "2/140625"


def test_vdim(capsys, quintic_file):
    status, out, _ = run(capsys, "vdim", "--model", quintic_file, "--gamma", "g=1;|2,2,2,2,2")
    assert status == 0
    assert out.splitlines() == ["ordinary: 0", "master: 1"]


def test_scalar_commands(capsys, quintic_file):
    _, out, _ = run(capsys, "selection", "--model", quintic_file, "--gamma", "g=1;|2", "--format", "json")
    assert json.loads(out)["selection_rule"] is False
    _, out, _ = run(capsys, "epsilon", "--model", quintic_file, "--gamma", "g=1;|2,2,2,2,2")
    assert "epsilon: -1" in out
    _, out, _ = run(capsys, "classify", "--model", quintic_file, "--format", "json")
    kinds = {row["state"]: row["kind"] for row in json.loads(out)}
    assert kinds[5] == "broad" and kinds[2] == "narrow"


def test_node_data_and_fixed_points(capsys):
    status, out, _ = run(capsys, "node-data", "--model", "3:1", "--J", "3,3", "--format", "json")
    assert status == 0
    (row,) = json.loads(out)
    assert (row["k"], row["ell"], row["a_infinity"], row["r_prime"], row["c"]) == (2, 1, 1, 3, -1)
    status, out, _ = run(capsys, "fixed-points", "--model", "5:1", "--gamma", "g=1;|2,2,2", "--format", "json")
    assert [row["component"] for row in json.loads(out)] == ["F0", "Finf", "F_{1,2}", "F_{1,3}", "F_{1,2,3}"]
    status, out, _ = run(capsys, "fixed-points", "--model", "5:1", "--gamma", "2|2,2", "--genus0")
    assert status == 0 and "Finf" not in out


def test_mu_formats_agree(capsys, quintic_file):
    base = ["mu", "--model", quintic_file, "--vars", "2", "--max-deg", "5"]
    _, text, _ = run(capsys, *base)
    _, js, _ = run(capsys, *base, "--format", "json")
    _, table, _ = run(capsys, *base, "--format", "csv")
    assert "phi1: 1/375000*t2^5*z" in text
    data = json.loads(js)
    rows = list(csv.DictReader(io.StringIO(table)))
    assert len(rows) == sum(len(v) for v in data.values())
    assert {"component": "phi2", "monomial": "t2", "num": "1", "den": "1"} in rows
    _, again, _ = run(capsys, *base, "--format", "json")
    assert again == js


def test_mu_narrow_and_twisted(capsys):
    status, out, _ = run(capsys, "mu", "--model", "6:2,3", "--max-deg", "2", "--broad-mode", "narrow")
    assert status == 0
    assert {line.split(":")[0] for line in out.splitlines()} <= {"phi1", "phi5"}
    status, out, _ = run(capsys, "mu", "--model", "5:1", "--max-deg", "2", "--twisted")
    assert status == 0 and "lam1" in out


def test_check_wallcross_pass_and_fail(capsys):
    status, out, _ = run(capsys, "check", "wallcross", "--model", "3:1", "--genus", "1", "--t-deg", "3", "--u-deg", "1")
    assert status == 0 and out.startswith("PASS")
    status, out, _ = run(
        capsys, "check", "wallcross", "--model", "3:1", "--genus", "1", "--t-deg", "3", "--u-deg", "1", "--perturb", "2=1"
    )
    assert status == 1
    report = json.loads(out)
    assert report["ok"] is False and report["mismatches"]


def test_check_wallcross_quintic_genus_two(capsys, quintic_file):
    status, _, _ = run(capsys, "check", "wallcross", "--model", quintic_file, "--genus", "2", "--t-deg", "6", "--u-deg", "2")
    assert status == 0


def test_other_checks(capsys, quintic_file):
    assert run(capsys, "check", "dilaton", "--model", quintic_file, "--genus", "2", "--t-deg", "6")[0] == 0
    assert run(capsys, "check", "genus0", "--model", "5:1", "--t-deg", "4")[0] == 0
    assert run(capsys, "check", "genus0", "--model", "5:1", "--t-deg", "4", "--perturb", "2=1")[0] == 1
    assert run(capsys, "check", "residue", "--model", quintic_file, "--gamma", "g=1;|2,2,2,2,2", "--d", "1,0,0,0,0")[0] == 0
    assert run(capsys, "check", "mu-aggregation", "--model", "5:1", "--max-deg", "4")[0] == 0
    status, out, _ = run(capsys, "check", "residue", "--model", "5:1", "--gamma", "3|2,2", "--genus0")
    assert status == 0 and json.loads(out)["rhs"] == "1"


def test_jfunc(capsys):
    status, out, _ = run(capsys, "jfunc", "--model", "5:1", "--t-deg", "0")
    assert status == 0 and out.startswith("phi1: z\n")
    status, out, _ = run(capsys, "jfunc", "--model", "5:1", "--t-deg", "1", "--format", "json")
    assert json.loads(out)["check"]["ok"] is True


def test_toml_model(capsys, tmp_path):
    path = tmp_path / "m.toml"
    path.write_text("r = 6\nweights = [2, 3]\n")
    status, out, _ = run(capsys, "classify", "--model", str(path), "--state", "2")
    assert status == 0 and "broad" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["mu", "--model", "missing.json", "--max-deg", "2"],
        ["vdim", "--model", "5:1", "--gamma", "x|y"],
        ["vdim", "--model", "5:1", "--gamma", "2,2"],
        ["mu", "--model", "5:1", "--max-deg", "13"],
        ["mu", "--model", "4:3", "--max-deg", "2"],
        ["ifunc", "--model", "5:1", "--max-deg", "3"],
        ["node-data", "--model", "5:1", "--J", ",".join(["2"] * 11)],
        ["check", "wallcross", "--model", "5:1", "--genus", "1", "--t-deg", "2", "--u-deg", "1", "--perturb", "oops"],
    ],
)
def test_input_errors_exit_two(capsys, argv):
    status, out, err = run(capsys, *argv)
    assert status == 2 and err.startswith("error:") and not out


def test_malformed_model_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "classify", "--model", str(path))[0] == 2


def test_thread_env_var(monkeypatch, capsys):
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    assert run(capsys, "verify-all")[0] == 2


def test_verify_all_parallel_is_ordered(monkeypatch, capsys):
    def fake(i):
        return lambda: CheckReport(f"c{i}", True, i)

    monkeypatch.setattr(suite, "CRITERIA", tuple((f"{i} fake", fake(i)) for i in range(5)))
    monkeypatch.setenv(cli.THREADS_ENV, "1")
    serial = run(capsys, "verify-all", "--format", "json")
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    parallel = run(capsys, "verify-all", "--format", "json")
    assert serial == parallel and serial[0] == 0
    names = [c["criterion"] for c in json.loads(serial[1])["criteria"]]
    assert names == [f"{i} fake" for i in range(5)]


def test_console_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "wallcross.cli", "vdim", "--model", "5:1,1,1,1,1", "--gamma", "g=1;|2,2,2,2,2"],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.splitlines()[0] == "ordinary: 0"
