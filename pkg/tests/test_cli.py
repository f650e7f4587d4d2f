import json

import numpy as np
import pytest

from magicpoly.cli import main

GHZ = "ghz:N=2,phi=0.785398163397"
FACET_LINE = '{"n": 2, "a": {"5": 1, "6": 1, "9": 1, "12": 1, "3": 1, "10": -1, "15": -1}, "b": 1}'


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate_and_cache(tmp_path, capsys):
    code, out, _ = run(capsys, "enumerate", "2", "--stab-cache", str(tmp_path))
    assert code == 0 and out.strip() == "D_S=60"
    assert (tmp_path / "stabilizers_N2.bin").exists()
    code, out, err = run(capsys, "enumerate", "2", "--stab-cache", str(tmp_path))
    assert code == 0 and "validated" in err
    code, _, _ = run(capsys, "enumerate", "1", "--cache", str(tmp_path / "stabilizers_N2.bin"))
    assert code == 4
    assert run(capsys, "enumerate", "0")[0] == 2


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", GHZ)
    d = json.loads(out)
    assert code == 0 and d["magic_detected"]
    assert d["M"] == pytest.approx(2 * np.sqrt(2) - 1, abs=1e-8)
    assert d["rom"] == pytest.approx(np.sqrt(2), abs=1e-8)
    assert d["manifest"]["D_S"] == 60


def test_eval_text_and_errors(capsys):
    code, out, _ = run(capsys, "eval", "product:N=1,phi=0.785398163397", "--format", "text", "--quantifiers", "M")
    assert code == 0 and out.startswith("M=1.41421356")
    assert run(capsys, "eval", "ghz:N=2,foo=1")[0] == 2
    assert run(capsys, "eval", GHZ, "--quantifiers", "Q")[0] == 2


def test_sweep_csv_is_deterministic(tmp_path, capsys):
    args = ["sweep", GHZ, "--mu-start", "0.3", "--mu-end", "0.5", "--mu-step", "0.1"]
    code, out, _ = run(capsys, *args)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "mu,M,W_plus_1,ST,RoM" and lines[-1].startswith("#")
    assert len(lines) == 5
    rows = [list(map(float, line.split(","))) for line in lines[1:-1]]
    # every mu here sits below the GHZ threshold near 0.547
    assert [r[1] for r in rows] == [1.0, 1.0, 1.0]
    assert all(r[3] >= 1 for r in rows)
    out_file = tmp_path / "s.csv"
    assert run(capsys, *args, "--threads", "2", "-o", str(out_file))[0] == 0
    assert out_file.read_text() == out


def test_sweep_raw_jsonl(capsys):
    code, out, _ = run(capsys, "sweep", GHZ, "--mu-start", "1", "--mu-end", "1", "--format", "jsonl", "--raw",
                       "--quantifiers", "W,ST")
    rec = json.loads(out.splitlines()[0])
    assert code == 0 and set(rec) == {"mu", "W", "ST"}
    assert float(rec["W"]) == pytest.approx(2 * np.sqrt(2) - 2)


def test_sweep_rom_refused_at_five_qubits(capsys):
    code, _, err = run(capsys, "sweep", "product:N=5,phi=0.785398163397", "--quantifiers", "M,RoM")
    assert code == 3 and "refused" in err
    assert run(capsys, "sweep", GHZ, "--mu-step", "0")[0] == 2


def test_facet_verify(tmp_path, capsys):
    path = tmp_path / "f.jsonl"
    path.write_text(FACET_LINE + "\n")
    code, out, _ = run(capsys, "facet", "verify", str(path))
    d = json.loads(out)
    assert code == 0 and d["verified"] and d["bound"] == 1 and d["lower_bound"] == -3
    path.write_text(FACET_LINE.replace('"b": 1', '"b": 2') + "\n")
    assert run(capsys, "facet", "verify", str(path))[0] == 4
    assert run(capsys, "facet", "verify")[0] == 2


def test_facet_discover_and_orbit(tmp_path, capsys):
    lib = tmp_path / "lib.jsonl"
    code, out, _ = run(capsys, "facet", "discover", "--state", GHZ, "--facet-lib", str(lib))
    h = json.loads(out)
    assert code == 0 and h["b"] == 1 and len(h["a"]) == 7
    assert lib.read_text().strip() == out.strip()
    one = tmp_path / "oct.jsonl"
    one.write_text('{"n": 1, "a": {"1": 1, "2": 1, "3": 1}, "b": 1}\n')
    code, out, _ = run(capsys, "facet", "orbit", str(one))
    assert code == 0 and len(out.strip().splitlines()) == 8
