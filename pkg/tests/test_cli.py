import csv
import io
import json

import pytest

from sturmian.cli import farey, main


def run(capsys, *args):
    code = 0
    try:
        main(list(args))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spectrum_single_band(capsys):
    code, out, _ = run(capsys, "spectrum", "--cf", "0,0,1", "--V", "5")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert doc["bands"] == [{"index": 0, "lo": 3.0, "hi": 7.0, "type": "B"}]


def test_spectrum_type_a(capsys):
    doc = json.loads(run(capsys, "spectrum", "--cf", "0,0", "--V", "5")[1])
    assert [(b["lo"], b["hi"], b["type"]) for b in doc["bands"]] == [(-2.0, 2.0, "A")]


def test_spectrum_from_alpha(capsys):
    doc = json.loads(run(capsys, "spectrum", "--alpha", "5/13", "--V", "5")[1])
    bands = doc["bands"]
    assert len(bands) == 13 and all(a["hi"] < b["lo"] for a, b in zip(bands, bands[1:]))


def test_spectrum_csv(capsys):
    _, out, _ = run(capsys, "spectrum", "--cf", "0,0,2", "--V", "5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["index", "lo", "hi", "type"] and len(rows) == 2


def test_butterfly_qmax_one(capsys):
    _, out, _ = run(capsys, "butterfly", "--V", "3", "--qmax", "1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["alpha"], float(r["lo"]), float(r["hi"])) for r in rows] == [("0", -2.0, 2.0), ("1", 1.0, 5.0)]
    assert list(rows[0]) == ["alpha", "V", "lo", "hi"]


def test_butterfly_deterministic_across_threads(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "butterfly", "--V", "2", "--qmax", "12", "--format", "csv", "--out", str(a))
    run(capsys, "butterfly", "--V", "2", "--qmax", "12", "--format", "csv", "--out", str(b), "--threads", "4")
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.DictReader(io.StringIO(a.read_text())))
    assert len(rows) == sum(f.denominator for f in farey(12))


def test_butterfly_rejects_zero_potential(capsys):
    code, out, err = run(capsys, "butterfly", "--V", "0", "--qmax", "3")
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == "UsageError"


def test_farey_order():
    assert [str(x) for x in farey(3)] == ["0", "1/3", "1/2", "2/3", "1"]


def test_ids_grid(capsys):
    code, out, _ = run(capsys, "ids", "--cf", "1", "--V", "5", "--k", "6", "--grid", "5")
    rows = json.loads(out)["rows"]
    assert code == 0 and rows[0]["ids"] == 0.0 and rows[-1]["ids"] == 1.0
    assert [r["ids"] for r in rows] == sorted(r["ids"] for r in rows)


def test_ids_code(capsys):
    _, out, _ = run(capsys, "ids", "--cf", "2,1,1,2", "--V", "5", "--k", "4", "--code", "G2.B.G2.B.G2")
    row = json.loads(out)["rows"][0]
    assert row["code"] == "G2.B.G2.B.G2" and row["E_lo"] < row["E_hi"]


def test_ids_needs_energy(capsys):
    code, _, err = run(capsys, "ids", "--cf", "1", "--V", "5", "--k", "3")
    assert code == 2 and json.loads(err)["schema"] == 1


def test_gaplabels(capsys):
    code, out, _ = run(capsys, "gaplabels", "--cf", "1", "--V", "5", "--ell", "-3:3")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and [c["ell"] for c in doc["certificates"]] == list(range(-3, 4))


def test_gaplabels_failure_exit(capsys):
    code, out, _ = run(capsys, "gaplabels", "--cf", "1", "--V", "5", "--ell", "7", "--k", "1")
    assert code == 1 and not json.loads(out)["passed"]


def test_verify_suite(capsys):
    code, out, _ = run(capsys, "verify", "cf")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] and all(c["suite"] == "cf" for c in doc["checks"])


@pytest.mark.parametrize("args", [
    ("spectrum", "--cf", "0,0,x", "--V", "5"),
    ("spectrum", "--V", "5"),
    ("spectrum", "--cf", "0,1", "--V", "5"),
    ("butterfly", "--V", "1", "--qmax", "9999"),
    ("nonsense",),
])
def test_errors_are_json(capsys, args):
    code, _, err = run(capsys, *args)
    doc = json.loads(err)
    assert code == 2 and doc["schema"] == 1 and doc["error"]


def test_identical_runs_identical_bytes(capsys):
    first = run(capsys, "gaplabels", "--cf", "2,1,1,2", "--V", "5", "--ell", "-2:2")[1]
    second = run(capsys, "gaplabels", "--cf", "2,1,1,2", "--V", "5", "--ell", "-2:2", "--threads", "3")[1]
    assert first == second
