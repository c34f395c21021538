import json
import subprocess
import sys

import pytest

from conftest import DATA
from ringopt import __version__
from ringopt.cli import main

QUARTIC = str(DATA / "quartic.c")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_json(capsys):
    code, out, _ = run(capsys, "analyze", QUARTIC, "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == 1 and doc["tool_version"] == __version__
    [fn] = doc["functions"]
    assert fn["function"] == "polyCalc" and fn["variable"] == "x"
    assert fn["polynomial"] == {"degree": 4, "coefficients": ["A0", "A1", "A2", "A3", "A4"]}
    assert fn["annotation"]["ring_prop"] == "#pragma ring_prop (+, 0, -, *, 1) int"
    costs = {c["scheme"]: (c["adds"], c["muls"]) for c in fn["costs"]}
    assert costs["naive"] == (4, 10) and costs["incremental"] == (4, 7) and costs["horner"] == (4, 4)


def test_analyze_json_is_deterministic(capsys):
    first = run(capsys, "analyze", QUARTIC, "--json")[1]
    assert run(capsys, "analyze", QUARTIC, "--json")[1] == first


def test_analyze_table(capsys):
    code, out, _ = run(capsys, "analyze", QUARTIC)
    assert code == 0
    assert "\033[" not in out
    rows = [ln.split() for ln in out.splitlines()[2:]]
    assert rows == [
        ["naive", "4", "10", "8"],
        ["incremental", "4", "7", "5"],
        ["horner", "4", "4", "8"],
        ["balanced", "4", "6", "5"],
        ["llvm-f0", "4", "6", "6"],
    ]


def test_no_annotations_warns(capsys, tmp_path):
    src = tmp_path / "plain.c"
    src.write_text("int f(int x) { return x; }\n")
    code, out, err = run(capsys, "analyze", str(src), "--json")
    assert code == 0 and "warning" in err
    assert json.loads(out)["functions"] == []


@pytest.mark.parametrize(
    "text",
    [
        "#pragma math_exp (x)\nint f(int x) { return x; }\n",
        "#pragma ring_prop (+, 0, -, *, 1) float\n#pragma math_exp (x)\nfloat f(float x) { return x; }\n",
        "#pragma ring_prop (+, 0, -, *, 1) int\n#pragma math_exp (A/x)\nint f(int x) { return 0; }\n",
    ],
)
def test_bad_input_exits_2(capsys, tmp_path, text):
    src = tmp_path / "bad.c"
    src.write_text(text)
    code, _, err = run(capsys, "analyze", str(src))
    assert code == 2
    assert err.startswith("ringopt: ") and str(src) in err


def test_missing_file_exits_2(capsys, tmp_path):
    assert run(capsys, "analyze", str(tmp_path / "nope.c"))[0] == 2


def test_transform_stdout_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "transform", QUARTIC, "--scheme", "horner", "-o", "-")
    assert code == 0 and "(((A4*x + A3)*x + A2)*x + A1)*x + A0" in out
    dest = tmp_path / "out.c"
    assert run(capsys, "transform", QUARTIC, "-o", str(dest))[0] == 0
    assert dest.read_text() == out


def test_transform_without_annotations(capsys, tmp_path):
    src = tmp_path / "plain.c"
    src.write_text("int f(int x) { return x; }\n")
    assert run(capsys, "transform", str(src))[0] == 2


def test_verify_source(capsys):
    code, out, err = run(capsys, "verify", QUARTIC, "--width", "8")
    assert code == 0
    [fn] = json.loads(out)["functions"]
    schemes = [v["scheme"] for v in fn["verification"]]
    assert schemes == ["naive", "incremental", "horner", "balanced", "llvm-f0"]
    assert all(v["passed"] and v["points_checked"] == 256 * 32 for v in fn["verification"])
    assert "horner: pass" in err


def test_verify_sampled_wide(capsys):
    code, out, _ = run(capsys, "verify", QUARTIC, "--width", "64", "--samples", "500", "--scheme", "horner")
    assert code == 0
    [v] = json.loads(out)["functions"][0]["verification"]
    assert v["mode"] == "sampled" and v["points_checked"] == 500


def test_verify_default_falls_back_to_sampling(capsys):
    code, out, _ = run(capsys, "verify", QUARTIC, "--width", "32", "--scheme", "naive")
    assert code == 0
    assert json.loads(out)["functions"][0]["verification"][0]["mode"] == "sampled"


def test_verify_exhaustive_too_large(capsys):
    assert run(capsys, "verify", QUARTIC, "--width", "32", "--exhaustive")[0] == 2


def _plan(capsys, tmp_path, expr, scheme):
    dest = tmp_path / f"{scheme}.json"
    assert run(capsys, "plan", "--expr", expr, "--scheme", scheme, "-o", str(dest))[0] == 0
    return dest


def test_verify_good_plan(capsys, tmp_path):
    dest = _plan(capsys, tmp_path, "A0 + A1*x + A2*x^2", "balanced")
    code, out, _ = run(capsys, "verify", "--plan", str(dest))
    assert code == 0
    assert json.loads(out)["functions"][0]["verification"][0]["counterexample"] is None


def test_verify_corrupted_plan(capsys, tmp_path):
    dest = _plan(capsys, tmp_path, "A0 + A1*x + A2*x^2", "horner")
    doc = json.loads(dest.read_text())
    for node in doc["nodes"]:
        if node["op"] == "add":
            node["op"] = "mul"
            break
    dest.write_text(json.dumps(doc))
    code, out, err = run(capsys, "verify", "--plan", str(dest))
    assert code == 1 and "FAIL" in err
    cx = json.loads(out)["functions"][0]["verification"][0]["counterexample"]
    assert set(cx["binding"]) == {"x", "A0", "A1", "A2"}
    assert cx["expected"] != cx["actual"]


def test_verify_unreadable_plan(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", "--plan", str(bad))[0] == 2
    bad.write_text(json.dumps({"variable": "x", "math_exp": "x", "nodes": [], "root": 0}))
    assert run(capsys, "verify", "--plan", str(bad))[0] == 2


def test_verify_needs_input(capsys):
    assert run(capsys, "verify")[0] == 2


def test_expr_table_and_json(capsys):
    code, out, _ = run(capsys, "expr", "--expr", "(x + 1)*(x + 1)")
    assert code == 0 and "degree 2" in out
    code, out, _ = run(capsys, "expr", "--expr", "(y + 1)^2", "--var", "y", "--json")
    fn = json.loads(out)["functions"][0]
    assert fn["polynomial"]["coefficients"] == ["1", "2", "1"] and fn["variable"] == "y"


def test_expr_verify(capsys):
    code, out, _ = run(capsys, "expr", "--expr", "A*x^3 - B", "--verify")
    assert code == 0
    assert all(v["passed"] for v in json.loads(out)["functions"][0]["verification"])


@pytest.mark.parametrize("expr", ["A0/x", "x^y", "", "x^-1", "x +"])
def test_expr_errors(capsys, expr):
    assert run(capsys, "expr", "--expr", expr)[0] == 2


def test_emit_bench(capsys, tmp_path):
    code, out, _ = run(capsys, "emit-bench", "--degree", "4")
    assert code == 0 and out == (DATA.parent / "golden" / "bench_deg4_w32.c").read_text()
    assert run(capsys, "emit-bench", "--degree", "65")[0] == 2
    assert run(capsys, "emit-bench", "--schemes", "")[0] == 2


def test_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "ringopt", "analyze", QUARTIC, "--json"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["functions"][0]["function"] == "polyCalc"
