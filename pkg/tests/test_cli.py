import json
import subprocess
import sys

import pytest

from dopkit import cli


def _run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def _strip_stamp(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("# generated") and '"generated"' not in l)


@pytest.fixture
def wconfig(tmp_path):
    p = tmp_path / "w.json"
    p.write_text(json.dumps({"weight": {"kind": "krawtchouk", "p": 0.9}, "N": 40}))
    return p


def test_nodes_csv(capsys):
    code, out, _ = _run(["nodes", "--density", "uniform", "--a", "0", "--b", "1", "--N", "4", "--out", "csv"], capsys)
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows == ["j,x", "0,0.125", "1,0.375", "2,0.625", "3,0.875"]
    assert '"N": 4' in out


def test_poly_and_zeros(wconfig, tmp_path, capsys):
    out_path = tmp_path / "p.csv"
    assert cli.run(["poly", "--config", str(wconfig), "--k", "10", "--eval-grid", "0:1:11",
                    "--out", str(out_path)]) == 0
    lines = [l for l in out_path.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "z,log_abs_pi,sign,log_abs_p,p" and len(lines) == 12
    code, out, _ = _run(["zeros", "--config", str(wconfig), "--k", "7", "--out", "csv"], capsys)
    assert code == 0 and len([l for l in out.splitlines() if not l.startswith("#")]) == 8


def test_eqm_json(wconfig, tmp_path):
    out = tmp_path / "e.json"
    assert cli.run(["eqm", "--config", str(wconfig), "--c", "1/2", "--grid", "400", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [s["kind"] for s in doc["result"]["segments"]] == ["void", "band", "saturated"]
    assert doc["config"]["c"] == "1/2"


def test_kernel_and_sample(wconfig, tmp_path, capsys):
    out = tmp_path / "k.json"
    assert cli.run(["kernel", "--config", str(wconfig), "--k", "20", "--stats", "diag,sine,gaps",
                    "--grid", "400", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())["result"]
    assert len(doc["diag"]) == 40 and "sine" in doc and len(doc["gaps"]) == 2
    code1, a, _ = _run(["sample", "--config", str(wconfig), "--k", "6", "--n-samples", "20", "--seed", "7",
                        "--out", "csv"], capsys)
    code2, b, _ = _run(["sample", "--config", str(wconfig), "--k", "6", "--n-samples", "20", "--seed", "7",
                        "--out", "csv"], capsys)
    assert code1 == code2 == 0
    assert _strip_stamp(a) == _strip_stamp(b)


def test_hexagon(capsys):
    code, out, _ = _run(["hexagon", "--a", "3", "--b", "3", "--c", "3", "--out", "json"], capsys)
    assert code == 0 and json.loads(out)["result"]["tilings"] == 980
    code, out, _ = _run(["hexagon", "--a", "4", "--b", "4", "--c", "4", "--m", "4", "--profile", "--out", "csv"],
                        capsys)
    assert code == 0 and "hole_probability" in out


def test_verify(wconfig, tmp_path):
    out = tmp_path / "v.json"
    assert cli.run(["verify", "--config", str(wconfig), "--c", "1/2", "--N", "40,60",
                    "--checks", "band,saturated,hardedge", "--grid", "1000", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())["result"]
    assert [r["N"] for r in doc["runs"]] == [40, 60]
    assert all(r["hardedge"] for r in doc["runs"])


def test_configuration_errors(tmp_path, wconfig, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"weight": {"kind": "krawtchouk",\n  "p": 0.9,}\n}')
    code, _, err = _run(["eqm", "--config", str(bad), "--c", "1/2"], capsys)
    assert code == 1 and "bad.json:2:" in err
    code, _, err = _run(["eqm", "--config", str(wconfig), "--c", "0.5"], capsys)
    assert code == 1 and "p/q" in err
    code, _, err = _run(["eqm", "--config", str(wconfig), "--c", "1/3"], capsys)
    assert code == 1 and "not an integer" in err


def test_unknown_flag_exits_with_usage():
    proc = subprocess.run([sys.executable, "-m", "dopkit", "nodes", "--N", "4", "--bogus"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr


def test_numeric_failure_exit_code(wconfig, capsys, monkeypatch):
    from dopkit import orthopoly
    from dopkit.errors import PrecisionError

    def fail(*args, **kwargs):
        raise PrecisionError("ladder exhausted", step=3)

    monkeypatch.setattr(orthopoly, "build_basis_adaptive", fail)
    code, _, err = _run(["poly", "--config", str(wconfig), "--k", "5"], capsys)
    assert code == 2 and "numeric failure" in err


def test_accept_small_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        proc = subprocess.run([sys.executable, "-m", "dopkit", "accept", "--suite", "small", "--seed", "3",
                               "--out", str(path)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert proc.stdout.count("[PASS]") == 3
    assert a.read_bytes() == b.read_bytes()
