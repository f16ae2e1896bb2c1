import csv
import io
import json
import subprocess
import sys

import pytest

from lacpair.cli import HEADERS, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_paircorr_row_deterministic(capsys):
    argv = ("paircorr", "--seq", "geometric:1.5", "--alpha", "1.2345", "--N", "1024",
            "--window", "indicator:1.0", "--algorithm", "sorted")
    code, out1, _ = run(capsys, *argv)
    _, out2, _ = run(capsys, *argv)
    assert code == 0 and out1 == out2
    r = rows(out1)
    assert r[0] == list(HEADERS["paircorr"]) and len(r) == 2
    assert float(r[1][4]) == 0.90625


def test_paircorr_algorithms_agree(capsys):
    vals = set()
    for alg in ("direct", "sorted", "smooth"):
        _, out, _ = run(capsys, "paircorr", "--alpha", "1/7", "--N", "300", "--algorithm", alg)
        vals.add(float(rows(out)[1][4]))
    assert len(vals) == 1


def test_count_b_both(capsys):
    code, out, _ = run(capsys, "count-b", "--N", "10", "--epsilon", "0.2", "--mode", "both",
                       "--seq", "geometric:2")
    r = rows(out)
    assert code == 0 and r[0] == list(HEADERS["count-b"])
    assert [x[4] for x in r[1:]] == ["oracle", "fast"] and r[1][5] == r[2][5] == "16504"


def test_count_a_grid_json(capsys):
    code, out, err = run(capsys, "count-a", "--grid", "20,40,80", "--epsilon", "0.2",
                         "--out", "json", "--delta-ref", "1")
    doc = json.loads(out)
    assert code == 0 and doc["columns"] == list(HEADERS["count-a"])
    assert [r["N"] for r in doc["rows"]] == [20, 40, 80]
    assert "passed=True" in err


def test_expect_and_variance(capsys):
    for cmd in ("expect", "variance"):
        code, out, _ = run(capsys, cmd, "--N", "64", "--samples", "100", "--seed", "5")
        r = rows(out)
        assert code == 0 and r[0] == list(HEADERS[cmd])
        assert r[1][2:4] == ["100", "5"]
        lo, hi = float(r[1][7]), float(r[1][8])
        assert lo <= hi


def test_convergence_out_file(tmp_path, capsys):
    dest = tmp_path / "conv.csv"
    code, out, _ = run(capsys, "convergence", "--delta", "1", "--m-max", "5", "--samples", "2",
                       "--seed", "1", "--out-file", str(dest))
    assert code == 0 and out == ""
    r = rows(dest.read_text())
    assert r[0] == list(HEADERS["convergence"]) and [x[0] for x in r[1:5]] == ["4", "9", "16", "25"]


def test_convergence_json_embeds_seed(capsys):
    _, out, _ = run(capsys, "convergence", "--grid", "32,64", "--seq", "poisson", "--seed", "8",
                    "--out", "json")
    doc = json.loads(out)
    assert doc["seed"] == 8 and doc["rows"][0]["alpha"] == "nan"


@pytest.mark.parametrize("argv", [
    ("paircorr", "--N", "10", "--bogus"),
    ("paircorr", "--N", "1", "--alpha", "1"),
    ("paircorr", "--N", "10"),
    ("paircorr", "--N", "10", "--alpha", "1", "--window", "triangle:1", "--algorithm", "sorted"),
    ("paircorr", "--N", "10", "--alpha", "1", "--window", "box:1"),
    ("count-b", "--epsilon", "0.2"),
    ("count-b", "--N", "10", "--epsilon", "zero"),
    ("expect", "--N", "64", "--samples", "10"),
    ("convergence", "--delta", "1"),
    ("convergence", "--grid", "8,4"),
    ("expect", "--N", "64", "--seed", "-1"),
    ("paircorr", "--N", "10", "--alpha", "1", "--seq", "custom:/nonexistent/file"),
])
def test_validation_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_budget_exit_3(capsys):
    code, out, err = run(capsys, "count-b", "--N", "40", "--epsilon", "0.2", "--mode", "oracle")
    assert code == 3 and out == "" and "budget" in err


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    r = rows(out)
    assert code == 0 and r[0] == list(HEADERS["selftest"])
    assert all(x[1] == "true" for x in r[1:])


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "lacpair", "paircorr", "--N", "16", "--alpha", "1.5"],
                       capture_output=True, text=True, check=False)
    assert p.returncode == 0 and p.stdout.startswith("N,alpha,window,algorithm,value")
