import json
import math

import numpy as np
import pytest

from ftseries.catalog import builtin_example
from ftseries.documents import (
    archive_document, from_document, load_archive, load_document, save_archive, spec_hash, to_document,
)
from ftseries.errors import ValidationError
from ftseries.linear import solve_all

HEAT_DOC = {
    "schema": 1,
    "name": "heat",
    "basis": {"names": ["x"], "axes": [{"kind": "sine", "index_set": "positive", "omega": 1.0}]},
    "unknowns": ["u"],
    "operator": [
        {"row": 1, "unknown": 1, "dt": 1, "derivative": [0]},
        {"row": 1, "unknown": 1, "dt": 0, "derivative": [2], "coeff": -1.0},
    ],
    "initial": [{"unknown": 1, "order": 0, "coefficients": [[[1], 1.0], [[3], 0.5]]}],
    "truncation": 3,
    "horizon": "pi/2",
    "eval_box": [[0, "pi"]],
}


def test_hand_written_document_with_pi_strings(tmp_path):
    path = tmp_path / "heat.json"
    path.write_text(json.dumps(HEAT_DOC))
    spec = load_document(path)
    assert spec.horizon == pytest.approx(math.pi / 2)
    assert spec.eval_box[0][1] == pytest.approx(math.pi)
    sol = solve_all(spec)
    x, t = 1.1, 0.7
    want = math.exp(-t) * math.sin(x) + 0.5 * math.exp(-9 * t) * math.sin(3 * x)
    assert sol.evaluate(0, np.array([x]), np.array([t]))[0, 0].real == pytest.approx(want, abs=1e-13)


@pytest.mark.parametrize("text,value", [("pi", math.pi), ("pi/2", math.pi / 2), ("2pi", 2 * math.pi)])
def test_pi_strings(text, value):
    doc = dict(HEAT_DOC, horizon=text)
    assert from_document(doc).horizon == pytest.approx(value, rel=1e-15)


def test_document_errors(tmp_path):
    with pytest.raises(ValidationError):
        load_document(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        load_document(bad)
    with pytest.raises(ValidationError):
        from_document({k: v for k, v in HEAT_DOC.items() if k != "unknowns"})


@pytest.mark.parametrize("name", ["wave", "burgers", "ma1", "stokes_demo"])
def test_document_round_trip(name):
    spec = builtin_example(name, N=4)
    again = from_document(json.loads(json.dumps(to_document(spec))))
    assert spec_hash(again) == spec_hash(spec)
    assert to_document(again) == to_document(spec)


@pytest.mark.parametrize("name", ["burgers", "wave", "oo", "stokes_demo", "elliptic"])
def test_archive_round_trip_bit_identical(name, tmp_path):
    spec = builtin_example(name)
    sol = solve_all(spec)
    path = tmp_path / "a.json"
    save_archive(sol, spec, path)
    sol2, spec2 = load_archive(path)
    rng = np.random.default_rng(7)
    pts = np.column_stack([rng.uniform(lo, hi, 100) for lo, hi in spec.eval_box])
    if spec.basis.dim == 1:
        pts = pts[:, 0]
    times = rng.uniform(0, spec.horizon, 100)
    for q in range(len(spec.unknowns)):
        a = sol.evaluate(q, pts, times)
        b = sol2.evaluate(q, pts, times)
        assert np.array_equal(a, b)


@pytest.mark.parametrize("name", ["burgers", "oo"])
def test_archives_are_deterministic(name):
    texts = {save_archive(solve_all(builtin_example(name)), builtin_example(name), None) for _ in range(2)}
    assert len(texts) == 1


def test_archive_contents():
    spec = builtin_example("burgers", N=12)
    doc = archive_document(solve_all(spec), spec)
    assert doc["schema"] == 1 and doc["spec_hash"] == spec_hash(spec)
    mode3 = next(m for m in doc["modes"] if m["index"] == [3])
    assert mode3["exppoly"] == [[1.5, 0.0, 2, -3.0, 0.0]]


def test_archive_rejects_foreign_documents(tmp_path):
    with pytest.raises(ValidationError):
        load_archive({"schema": 99, "kind": "ftseries-solution"})
    path = tmp_path / "a.json"
    path.write_text(json.dumps(HEAT_DOC))
    with pytest.raises(ValidationError):
        load_archive(path)
