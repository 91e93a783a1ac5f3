import csv
import io
import json
import subprocess
import sys

import pytest

from biconj.cli import fmt, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_conj_example():
    code, out, _ = call("conj", "--fn", "abs(x)", "--grid", "-2:2:5", "--dual", "-2:2:5")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["s1", "fstar"]
    assert [r["s1"] for r in table] == ["-2", "-1", "0", "1", "2"]  # no s = 3 row
    assert table[-1]["fstar"] == "2"


def test_biconj_convex_fixed_point():
    code, out, _ = call("biconj", "--fn", "x^2", "--grid", "-1:1:21")
    assert code == 0
    for r in rows(out):
        assert abs(float(r["f"]) - float(r["fss"])) <= 1e-12


def test_biconj_writes_inf_token():
    code, out, _ = call("biconj", "--fn", "x^2 + ind(-1,1)", "--grid", "-2:2:5")
    assert code == 0
    assert [r["fss"] for r in rows(out)][0] == "inf"


def test_exit_codes():
    assert call("conj", "--fn", "ind(5,6)", "--grid", "-1:1:5")[0] == 3
    assert call("conj", "--fn", "x^^2")[0] == 2
    assert call("conj", "--fn", "x", "--grid", "1:0:5")[0] == 2
    assert call("conj", "--fn", "x", "--kappa", "0.5")[0] == 2
    assert call("conj", "--fn", "x", "--eps-val", "0")[0] == 2
    assert call("conj", "--fn", "1/x")[0] == 2
    assert call("conj")[0] == 2
    assert call("verify-theorem", "--fn", "x^2", "--format", "csv")[0] == 2
    assert call("originate", "--fn", "x^2 + ind(-1,1)", "--at", "1.5")[0] == 4
    assert call("staircase", "--fn", "x")[0] == 2  # negative psi
    # an absurd uniqueness threshold hides the |x| witness, so the conditions disagree
    assert call("verify-theorem", "--fn", "abs(x)", "--kappa", "100")[0] == 5


def test_originate_examples():
    code, out, _ = call("originate", "--fn", "(x^2-1)^2", "--at", "0")
    d = json.loads(out)
    assert code == 0 and d["value"] == 0.0
    assert sorted((a["point"][0], a["weight"], a["f"]) for a in d["atoms"]) == [(-1.0, 0.5, 0.0), (1.0, 0.5, 0.0)]
    assert d["concentration_ok"]
    d = json.loads(call("originate", "--fn", "x^2", "--at", "0.5")[1])
    assert [(a["point"][0], a["weight"], a["f"]) for a in d["atoms"]] == [(0.5, 1.0, 0.25)]


@pytest.mark.parametrize(
    "src,expect,witness",
    [("x^2", True, None), ("abs(x)", False, 1.0), ("(x^2-1)^2", False, 0.0)],
)
def test_verify_theorem_examples(src, expect, witness):
    code, out, _ = call("verify-theorem", "--fn", src)
    v = json.loads(out)["verdict"]
    assert code == 0
    assert v["condition_i"] is expect and v["condition_ii"] is expect
    if witness is not None:
        assert any(abs(w["dual_node"][0] - witness) < 1e-9 for w in v["witnesses"])


def test_scan_quadratic():
    # slopes 2k/10 are never x_i + x_{i+1} on the default grid, so no ties
    code, out, _ = call("scan", "--fn", "x^2", "--dual", "-2:2:21")
    assert code == 0
    for r in rows(out):
        assert r["cluster_count"] == "1" and float(r["diameter"]) == 0.0
    # the auto grid hits tie slopes: two adjacent minimizers, still one cluster
    code, out, _ = call("scan", "--fn", "x^2")
    for r in rows(out):
        assert r["cluster_count"] == "1" and float(r["diameter"]) <= 0.05 + 1e-12


def test_staircase_example():
    code, out, _ = call("staircase", "--fn", "abs(x)", "--grid", "-0.7:0.7:3", "--m", "1", "--N", "8")
    assert code == 0
    assert [float(r["psi_m"]) for r in rows(out)] == [0.5, 0.0, 0.5]


def test_demo_lsc_constant():
    code, out, _ = call("demo-lsc", "--fn", "3")
    d = json.loads(out)
    assert code == 0 and d["holds"] and d["liminf"] == d["limit_integral"] == 3.0


def test_json_embeds_config_and_tilt():
    code, out, _ = call("tilt", "--fn", "abs(x)", "--grid", "-2:2:9", "--at", "1")
    d = json.loads(out)
    assert d["config"]["fn"] == "abs(x)" and d["config"]["grid"] == ["-2:2:9"]
    assert d["diameter"] == 2.0 and not d["unique"]


def test_fn_file_uses_header_grid(tmp_path):
    p = tmp_path / "f.fn"
    p.write_text("# dim=1 grid=-1:1:3\nabs(x)\n")
    code, out, _ = call("biconj", "--fn-file", str(p))
    assert code == 0 and len(rows(out)) == 3


def test_two_dimensional_grid():
    code, out, _ = call("conj", "--fn", "x1^2 + x2^2", "--grid", "-1:1:3", "--grid", "-1:1:3", "--dual", "-1:1:3")
    t = rows(out)
    assert code == 0 and list(t[0]) == ["s1", "s2", "fstar"] and len(t) == 9


def test_out_file(tmp_path):
    target = tmp_path / "o.csv"
    code, out, _ = call("conj", "--fn", "x^2", "--out", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("s1,fstar")


def test_fmt_round_trip():
    for v in [0.1, 1 / 3, 2.0**-1074, 1e308, -5.5, float("inf")]:
        assert float(fmt(v)) == v


def test_subprocess_byte_identical():
    cmd = [sys.executable, "-m", "biconj.cli", "verify-theorem", "--fn", "(x^2-1)^2", "--grid", "-2:2:41"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a
