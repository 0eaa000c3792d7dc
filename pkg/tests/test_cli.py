import csv
import io
import json
import math

import pytest

from ftseries import cli
from ftseries.catalog import EXAMPLES
from ftseries.cli import main
from ftseries.errors import DegenerateMode


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_solve_wave_archive(tmp_path, capsys):
    path = tmp_path / "wave.ftz.json"
    code, _, err = run(capsys, "solve", "--example", "wave", "--N", "8", "-o", str(path))
    assert code == 0 and "N=8" in err
    doc = json.loads(path.read_text())
    assert len(doc["modes"]) == 8


def test_solve_burgers_mode_three(capsys):
    code, out, _ = run(capsys, "solve", "--example", "burgers", "--N", "12")
    assert code == 0
    mode3 = next(m for m in json.loads(out)["modes"] if m["index"] == [3])
    assert mode3["exppoly"] == [[1.5, 0.0, 2, -3.0, 0.0]]


def test_solve_missing_input(tmp_path, capsys):
    code, out, err = run(capsys, "solve", "--input", str(tmp_path / "missing.json"))
    assert code == 1 and out == "" and "error" in err


def test_solve_unknown_example_and_bad_param(capsys):
    assert run(capsys, "solve", "--example", "heat")[0] == 1
    assert run(capsys, "solve", "--example", "wave", "--param", "colour=red")[0] == 1


def test_solver_failure_exit_code(capsys, monkeypatch):
    def boom(spec):
        raise DegenerateMode("forced")

    monkeypatch.setattr(cli, "solve_all", boom)
    code, _, err = run(capsys, "solve", "--example", "wave")
    assert code == 2 and "forced" in err


def test_eval_wave_single_mode(capsys):
    code, out, _ = run(capsys, "eval", "--example", "wave", "--param", "modes=single",
                       "--grid", "x=pi/2:pi:2", "--times", "0")
    assert code == 0
    table = rows(out)
    assert table[0] == ["t", "x", "re_u", "im_u"]
    assert float(table[1][1]) == pytest.approx(math.pi / 2)
    assert float(table[1][2]) == pytest.approx(1.0, abs=1e-15)


def test_eval_from_archive(tmp_path, capsys):
    path = tmp_path / "b.json"
    run(capsys, "solve", "--example", "burgers", "-o", str(path))
    code, out, _ = run(capsys, "eval", "--archive", str(path), "--grid", "x=0:1:2", "--times", "0")
    assert code == 0
    assert float(rows(out)[1][2]) == pytest.approx(1 + math.exp(-12), rel=1e-15)


def test_eval_zero_data_is_zero(capsys):
    code, out, _ = run(capsys, "eval", "--example", "wave", "--N", "0", "--times", "0,1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["t", "x", "re_u", "im_u"]
    assert all(r[2] == 0.0 and r[3] == 0.0 for r in doc["rows"])


def test_eval_row_order(capsys):
    code, out, _ = run(capsys, "eval", "--example", "oo", "--grid", "x=0:1:2", "--grid", "y=3.5:4.5:3",
                       "--times", "0,0.5")
    assert code == 0
    body = [tuple(float(v) for v in r[:3]) for r in rows(out)[1:]]
    assert body == sorted(body)
    assert len(body) == 2 * 2 * 3


def test_eval_outside_box(capsys):
    assert run(capsys, "eval", "--example", "burgers", "--grid", "x=-5:1:3")[0] == 3
    assert run(capsys, "eval", "--example", "burgers", "--times", "99")[0] == 3


def test_verify_wave(capsys):
    code, out, _ = run(capsys, "verify", "--example", "wave", "--N", "8")
    assert code == 0 and out.startswith("wave N=8: PASS")


def test_verify_qq0_includes_bound(capsys):
    code, out, _ = run(capsys, "verify", "--example", "qq0", "--N", "10", "--format", "json")
    assert code == 0
    checks = {c["check"]: c["verdict"] for c in json.loads(out)["checks"]}
    assert checks["bound qq0"] == "PASS"


def test_verify_corrupted_archive(tmp_path, capsys):
    path = tmp_path / "b.json"
    run(capsys, "solve", "--example", "burgers", "-o", str(path))
    doc = json.loads(path.read_text())
    mode = next(m for m in doc["modes"] if m["index"] == [2])
    mode["exppoly"][0][0] *= 1.01
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", "--archive", str(path))
    assert code == 4 and "FAIL" in out


def test_verify_archive_refuses_overrides(tmp_path, capsys):
    path = tmp_path / "b.json"
    run(capsys, "solve", "--example", "burgers", "-o", str(path))
    assert run(capsys, "verify", "--archive", str(path), "--N", "3")[0] == 1


@pytest.mark.parametrize("name", sorted(EXAMPLES))
def test_verify_every_builtin(name, capsys):
    code, out, _ = run(capsys, "verify", "--example", name, "--format", "csv")
    assert code == 0, out
    assert all(r[3] == "PASS" for r in rows(out)[1:])


def test_examples_listing(capsys, tmp_path):
    code, out, _ = run(capsys, "examples")
    assert code == 0
    for name in EXAMPLES:
        assert name in out
    code, out, _ = run(capsys, "examples", "--format", "json")
    assert {e["name"] for e in json.loads(out)} == set(EXAMPLES)


def test_input_document_round_trip(tmp_path, capsys):
    from ftseries.catalog import builtin_example
    from ftseries.documents import to_document

    doc = tmp_path / "w.json"
    doc.write_text(json.dumps(to_document(builtin_example("wave", N=4))))
    a = run(capsys, "solve", "--input", str(doc))[1]
    b = run(capsys, "solve", "--example", "wave", "--N", "4")[1]
    assert a == b


def test_identical_invocations_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / f"{i}.json" for i in range(2)]
    for p in paths:
        assert run(capsys, "solve", "--example", "stokes_demo", "-o", str(p))[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
