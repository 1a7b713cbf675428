import json
import subprocess
import sys

import pytest

from sympindex.cli import main
from sympindex.modelfile import dumps, emit_model
from sympindex.models import GOLDEN_AXES, ellipsoid, single_loop_model


@pytest.fixture
def single_loop(tmp_path):
    p = tmp_path / "loop.json"
    p.write_text(dumps(emit_model(single_loop_model())))
    return p


@pytest.fixture
def golden(tmp_path):
    p = tmp_path / "golden.json"
    assert main(["ellipsoid", "--axes", *GOLDEN_AXES, "--out", str(p)]) == 0
    return p


def test_index_table(single_loop, capsys):
    assert main(["index", "--model", str(single_loop), "--orbit", "y1", "--max", "5"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "m,i_maslov,i_viterbo,nullity,iterate"
    assert [int(r.split(",")[2]) for r in rows[1:]] == [0, 2, 4, 6, 8]


def test_unknown_orbit(single_loop, capsys):
    assert main(["index", "--model", str(single_loop), "--orbit", "zz"]) == 2
    assert "zz" in capsys.readouterr().err


def test_mean_signs(golden, capsys):
    assert main(["mean", "--model", str(golden)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert [r.split(",")[3] for r in rows] == ["1", "1"]


def test_jump_single_loop(single_loop, tmp_path):
    out = tmp_path / "cert.json"
    assert main(["jump", "--model", str(single_loop), "--count", "3", "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    for c in [rec] + rec["additional"]:
        assert c["N"] % 2 == 0 and c["m"] == [c["N"] // 2]
    assert main(["verify", "--model", str(single_loop), "--certificate", str(out)]) == 0


def test_verify_tampered(single_loop, tmp_path, capsys):
    out = tmp_path / "cert.json"
    main(["jump", "--model", str(single_loop), "--out", str(out)])
    rec = json.loads(out.read_text())
    rec["m"] = [rec["m"][0] + 1]
    out.write_text(json.dumps(rec))
    assert main(["verify", "--model", str(single_loop), "--certificate", str(out)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_other_model(single_loop, golden, tmp_path):
    out = tmp_path / "cert.json"
    main(["jump", "--model", str(single_loop), "--out", str(out)])
    assert main(["verify", "--model", str(golden), "--certificate", str(out)]) == 2


def test_report_golden(golden, tmp_path, capsys):
    js = tmp_path / "rep.json"
    assert main(["report", "--model", str(golden), "--json", str(js)]) == 0
    out = capsys.readouterr().out
    assert "lower bound 2; non-hyperbolic: y1, y2" in out
    rec = json.loads(js.read_text())
    assert rec["bound"] == 2 and all(c["ok"] for c in rec["checks"])


def test_resonance_and_perfect(golden, capsys):
    assert main(["resonance", "--model", str(golden)]) == 0
    assert "admissible\tyes" in capsys.readouterr().out
    assert main(["perfect", "--model", str(golden)]) == 0


def test_exit_codes(tmp_path, golden, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["mean", "--model", str(bad)]) == 2
    assert main(["mean", "--model", str(tmp_path / "missing.json")]) == 2
    half = tmp_path / "half.json"
    half.write_text(json.dumps({"n": 2, "rotations": {"a": {"type": "irrational", "decimal": "0.500000000000",
                                                               "digits": 12}},
                                "characteristics": [{"initial_index": 2, "blocks": [
                                    {"kind": "N1", "lambda": 1, "b": 1}, {"kind": "R", "rho": "a"}]}]}))
    assert main(["mean", "--model", str(half)]) == 3
    assert main(["jump", "--model", str(golden), "--scan-limit", "10"]) == 4
    res = tmp_path / "res.json"
    res.write_text(json.dumps({"n": 1, "characteristics": [
        {"initial_index": 1, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]},
        {"initial_index": 4, "blocks": [{"kind": "N1", "lambda": 1, "b": 1}]}]}))
    assert main(["resonance", "--model", str(res)]) == 1
    with pytest.raises(SystemExit) as info:
        main(["jump"])
    assert info.value.code == 2


def test_worker_count_does_not_change_output(golden, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["jump", "--model", str(golden), "--count", "2", "--dual", "--workers", "1", "--out", str(a)]) == 0
    assert main(["jump", "--model", str(golden), "--count", "2", "--dual", "--workers", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_abstract_jump(tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({
        "rotations": {"s": {"type": "irrational", "decimal": "0.41421356237309504880168872420969807856967187537694",
                            "digits": 50}},
        "betas": [-1], "alphas": [[{"const": 1, "terms": [[1, "s"]]}]], "delta": "1/10"}))
    out = tmp_path / "sol.json"
    assert main(["abstract-jump", "--instance", str(inst), "--out", str(out)]) == 0
    sols = json.loads(out.read_text())["solutions"]
    assert [(s["N"], s["m"][0], s["Delta"][0]) for s in sols] == [(408, 985, 1), (985, 2378, 0), (1393, 3363, 1)]


def test_module_entry_point(single_loop):
    proc = subprocess.run([sys.executable, "-m", "sympindex", "index", "--model", str(single_loop), "--orbit", "y1",
                           "--max", "2"], capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[1].startswith("1,1,0,1,")
