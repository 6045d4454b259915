import json
import subprocess
import sys
from fractions import Fraction

import pytest

from crosspoly.cli import canonical_json, decimal_string, main


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip()
    return code, out, json.loads(out)


def test_two_ball_interval_example(tmp_path, capsys):
    f = write(tmp_path, "i.json", {"kind": "two_balls", "c": ["0.3"], "r": "1/2"})
    code, _, rec = run(capsys, "volume", "two-balls", "-i", f, "--delta", "0.1")
    assert code == 0
    assert 1.0 <= float(rec["value"]) <= 1.1
    assert rec["guarantee"] == {"lower_exact": True, "upper_factor": "1.1"}
    assert rec["params"] == {"M": 40, "beta": None, "delta": "1/10", "epsilon": None}
    assert rec["engine"] == "two_ball"
    assert isinstance(rec["wall_time_ms"], int)
    assert len(rec["instance_digest"]) == 64


def test_knapsack_example(tmp_path, capsys):
    f = write(tmp_path, "a.json", {"kind": "knapsack_dual", "a": [1, 1]})
    code, _, rec = run(capsys, "volume", "knapsack-dual", "-i", f, "--epsilon", "0.25")
    assert code == 0
    assert 1.875 <= float(rec["value"]) <= 3.125
    assert rec["params"]["beta"] == "31/32" and rec["params"]["epsilon"] == "1/4"
    assert rec["guarantee"]["lower_exact"] is False


def test_check_reduction(tmp_path, capsys):
    f = write(tmp_path, "a.json", {"kind": "knapsack_dual", "a": [1, 1]})
    code, out, rec = run(capsys, "check", "reduction", "-i", f)
    assert code == 0
    assert rec == {"lhs": 1, "rhs": 1, "pass": True}


def test_output_round_trips(tmp_path, capsys):
    f = write(tmp_path, "a.json", {"kind": "knapsack_dual", "a": [2, 1]})
    _, out, rec = run(capsys, "volume", "knapsack-dual", "-i", f, "--epsilon", "0.5")
    assert canonical_json(rec) == out


def test_digest_ignores_number_spelling(tmp_path, capsys):
    digests = set()
    for c in (["0.3"], ["3/10"], [0.3]):
        f = write(tmp_path, "i.json", {"kind": "two_balls", "c": c, "r": 0.5})
        digests.add(run(capsys, "volume", "two-balls", "-i", f, "--delta", "0.5")[2]["instance_digest"])
    assert len(digests) == 1
    f = write(tmp_path, "j.json", {"kind": "two_balls", "c": ["0.2"], "r": 0.5})
    assert run(capsys, "volume", "two-balls", "-i", f)[2]["instance_digest"] not in digests


def test_balls_form_is_normalised(tmp_path, capsys):
    balls = [{"center": ["1/4", 0], "radius": "1/2"}, {"center": [0, 0], "radius": 2}]
    f = write(tmp_path, "b.json", {"kind": "two_balls", "balls": balls})
    _, _, exact = run(capsys, "oracle", "exact", "-i", f)
    _, _, approx = run(capsys, "volume", "two-balls", "-i", f, "--delta", "0.2")
    v, z = Fraction(exact["exact"]), float(approx["value"])
    assert float(v) * (1 - 1e-9) <= z <= 1.2 * float(v) * (1 + 1e-9)


def test_k_balls_and_v_polytope(tmp_path, capsys):
    f = write(tmp_path, "k.json", {"kind": "k_balls", "centers": [[0, 0], ["1/10", 0], [0, "1/10"]],
                                   "radii": [1, 1, 1]})
    _, _, exact = run(capsys, "oracle", "exact", "-i", f)
    _, _, approx = run(capsys, "volume", "k-balls", "-i", f, "--delta", "0.5")
    assert float(exact["value"]) <= float(approx["value"]) <= 1.5 * float(exact["value"]) * (1 + 1e-9)
    g = write(tmp_path, "v.json", {"kind": "v_polytope", "vertices": [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]]})
    code, _, rec = run(capsys, "volume", "v-polytope", "-i", g)
    assert code == 0 and rec["exact"] == "5/2" and rec["value"] == "2.5"
    assert run(capsys, "oracle", "exact", "-i", g)[2]["exact"] == "5/2"


def test_oracle_exact_knapsack(tmp_path, capsys):
    f = write(tmp_path, "a.json", {"kind": "knapsack_dual", "a": [1, 1]})
    assert run(capsys, "oracle", "exact", "-i", f)[2]["exact"] == "5/2"


def test_oracle_mc(tmp_path, capsys):
    f = write(tmp_path, "k.json", {"kind": "k_balls", "centers": [[1, 1], ["6/5", "6/5"]], "radii": [1, "1/2"]})
    _, _, a = run(capsys, "oracle", "mc", "-i", f, "--samples", "20000", "--seed", "4")
    _, _, b = run(capsys, "oracle", "mc", "-i", f, "--samples", "20000", "--seed", "4")
    assert a["value"] == b["value"] and a["params"]["seed"] == 4
    assert abs(float(a["value"]) - 0.5) <= float(a["half_width"]) * 2


@pytest.mark.parametrize("doc, argv, code", [
    ({"kind": "two_balls", "balls": [{"center": [0], "radius": 1}, {"center": [0, 0], "radius": 1}]},
     ["volume", "two-balls"], 2),
    ({"kind": "two_balls", "c": [1, 0], "r": "1/2"}, ["volume", "two-balls"], 3),
    ({"kind": "two_balls", "c": [0], "r": 2}, ["volume", "two-balls"], 2),
    ({"kind": "knapsack_dual", "a": [1, 2]}, ["check", "reduction"], 3),
    ({"kind": "knapsack_dual", "a": [0, 2]}, ["volume", "knapsack-dual"], 2),
    ({"kind": "v_polytope", "vertices": [[0, 0], [1, 0], [2, 0]]}, ["volume", "v-polytope"], 4),
    ({"kind": "v_polytope", "vertices": [[0, 0], [1, 0], [2, 0], [0, 1]]}, ["volume", "v-polytope"], 4),
    ({"kind": "k_balls", "centers": [[0], [1]], "radii": [1, "1/2"]}, ["volume", "k-balls"], 3),
    ({"kind": "hexagons"}, ["volume", "two-balls"], 2),
    ({"kind": "knapsack_dual", "a": [1, 1]}, ["volume", "two-balls"], 2),
    ({"kind": "two_balls", "c": [0], "r": 1}, ["volume", "two-balls", "--delta", "1"], 2),
])
def test_exit_codes(tmp_path, capsys, doc, argv, code):
    f = write(tmp_path, "x.json", doc)
    got, _, rec = run(capsys, *argv, "-i", f)
    assert got == code
    assert set(rec) == {"error"} and rec["error"]["type"] and rec["error"]["message"]


def test_unreadable_instances(tmp_path, capsys):
    assert run(capsys, "volume", "two-balls", "-i", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "volume", "two-balls", "-i", str(bad))[0] == 2


def test_bench(tmp_path, capsys):
    f = write(tmp_path, "b.json", {"seed": 1, "rows": [{"n": 1, "delta": 0.1}, {"n": 2, "M": 16}]})
    code, _, rec = run(capsys, "bench", "-i", f)
    assert code == 0
    rows = rec["rows"]
    assert [r["n"] for r in rows] == [1, 2] and rows[0]["M"] == 40 and rows[1]["M"] == 16
    assert rows[0]["wall_time_ms"] < 1000


def test_bench_empty(tmp_path, capsys):
    f = write(tmp_path, "b.json", [])
    assert run(capsys, "bench", "-i", f)[:3:2] == (0, {"rows": []})
    assert run(capsys, "bench")[2] == {"rows": []}


def test_output_file(tmp_path, capsys):
    f = write(tmp_path, "a.json", {"kind": "knapsack_dual", "a": [1, 1]})
    out = tmp_path / "out.json"
    assert main(["check", "reduction", "-i", f, "-o", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text()) == {"lhs": 1, "rhs": 1, "pass": True}


def test_missing_instance_flag():
    with pytest.raises(SystemExit) as exc:
        main(["volume", "two-balls"])
    assert exc.value.code == 2


@pytest.mark.parametrize("x, s", [
    (Fraction(1, 10), "0.1"), (Fraction(5, 2), "2.5"), (1e-7, "0.0000001"), (3.0, "3"),
    (Fraction(1, 3), "0.33333333333333333"), (0, "0"), (Fraction(-1, 4), "-0.25"),
])
def test_decimal_string(x, s):
    assert decimal_string(x) == s


def test_module_entry_point(tmp_path):
    f = write(tmp_path, "a.json", {"kind": "knapsack_dual", "a": [1, 1]})
    proc = subprocess.run([sys.executable, "-m", "crosspoly", "check", "reduction", "-i", f],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout) == {"lhs": 1, "rhs": 1, "pass": True}
