"""JSON problem documents and solution archives.

Problem document (``schema`` 1)::

    {
      "schema": 1,
      "name": "wave",
      "basis": {"names": ["x"], "axes": [{"kind": "sine", "omega": 1.0, "index_set": "positive"}]},
      "unknowns": ["u"],
      "operator": [{"row": 1, "unknown": 1, "dt": 2, "derivative": [0]},
                   {"row": 1, "unknown": 1, "dt": 0, "derivative": [2], "coeff": -1}],
      "quadratic": [], "series_coefficient_terms": [], "constraints": [],
      "initial": [{"unknown": 1, "order": 0, "coefficients": [[[1], 1.0]]}],
      "forcing": [],
      "truncation": 8, "horizon": 2.0, "eval_box": [[0, "pi"]],
      "steps": 1024, "params": {}
    }

Rows, unknowns and multiplier axes are 1-based.  Numbers may be strings such
as ``"pi/2"``; complex numbers are ``[re, im]`` pairs.  An initial entry may
give an ``expansion`` instead of ``coefficients``::

    {"kind": "generator", "name": "cos_of_exponential", "axis": 1}
    {"kind": "fourier_sine", "function": "x**3*(x-pi/2)**3", "axis": 1}
    {"kind": "product", "factors": [...]}

A spatial term is ``derivative`` (per axis), optional ``coeff`` and optional
``multipliers`` (``{"axis", "kind": "power"|"exp", "exponent", "shift"}``);
``time_coeff`` lists the polynomial ``A(t)`` in ascending powers.  Forcing
entries carry an exp-polynomial as ``(re c, im c, p, re q, im q)``
quintuples.

Solution archives embed the problem document and store each mode either as
exp-polynomial quintuples or as a sampled trajectory.
"""
from __future__ import annotations

import hashlib
import json
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from .basis import (
    BasisFamily,
    ComplexExponential,
    Cosine,
    Explicit,
    FourierCosine,
    FourierSine,
    Generator,
    Multiplier,
    Power,
    Product,
    RealExponential,
    Sine,
    SpatialTerm,
    expand_initial_data,
    order_key,
)
from .errors import ValidationError
from .exppoly import ExpPoly
from .expr import compile_function, dump_complex, parse_complex, parse_real
from .problem import Constraint, Factor, OperatorTerm, ProblemSpec, QuadraticTerm, SeriesCoefficientTerm

SCHEMA = 1
ARCHIVE_SCHEMA = 1

_AXES = {
    "complex_exponential": (ComplexExponential, ("omega",)),
    "sine": (Sine, ("omega",)),
    "cosine": (Cosine, ("omega",)),
    "real_exponential": (RealExponential, ("rate", "shift")),
    "power": (Power, ("step", "shift")),
}


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


# ---------------------------------------------------------------- reading


def _need(d: Mapping, key: str, where: str):
    if key not in d:
        raise ValidationError(f"{where}: missing key {key!r}")
    return d[key]


def _axis(d: Mapping, where: str):
    kind = _need(d, "kind", where)
    if kind not in _AXES:
        raise ValidationError(f"{where}: unknown axis kind {kind!r}")
    cls, fields = _AXES[kind]
    kwargs = {f: parse_real(d[f]) for f in fields if f in d}
    if "index_set" in d:
        kwargs["index_set"] = d["index_set"]
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _basis(d: Mapping) -> BasisFamily:
    axes = tuple(_axis(a, f"basis axis {i + 1}") for i, a in enumerate(_need(d, "axes", "basis")))
    return BasisFamily(axes, tuple(d.get("names", ())))


def _index(v) -> tuple[int, ...]:
    if isinstance(v, int):
        return (v,)
    return tuple(int(c) for c in v)


def _spatial(d: Mapping, dim: int, where: str) -> SpatialTerm:
    deriv = d.get("derivative", [0] * dim)
    if isinstance(deriv, int):
        deriv = [deriv]
    if len(deriv) != dim:
        raise ValidationError(f"{where}: derivative needs {dim} entries")
    mults = []
    for m in d.get("multipliers", ()):
        axis = int(_need(m, "axis", where)) - 1
        shift = m.get("shift")
        mults.append(Multiplier(axis, m.get("kind", "power"), parse_real(_need(m, "exponent", where)),
                                None if shift is None else parse_real(shift)))
    try:
        return SpatialTerm(tuple(deriv), parse_complex(d.get("coeff", 1)), tuple(mults))
    except ValueError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _factor(d: Mapping, dim: int, where: str) -> Factor:
    return Factor(int(_need(d, "unknown", where)) - 1, _spatial(d, dim, where))


def _coefficients(rows, where: str) -> dict:
    out = {}
    for row in rows:
        if len(row) != 2:
            raise ValidationError(f"{where}: coefficient entries are [index, value]")
        out[_index(row[0])] = parse_complex(row[1])
    return out


def _expansion(d: Mapping, names: tuple[str, ...], where: str):
    kind = _need(d, "kind", where)
    axis = int(d.get("axis", 1)) - 1
    scale = parse_complex(d.get("scale", 1))
    if kind == "generator":
        return Generator(_need(d, "name", where), axis, scale)
    if kind in ("fourier_sine", "fourier_cosine"):
        var = names[axis] if 0 <= axis < len(names) else "x"
        f = compile_function(_need(d, "function", where), (var,))
        cls = FourierSine if kind == "fourier_sine" else FourierCosine
        return cls(f, axis, scale, float(d.get("tol", 1e-12)))
    if kind == "product":
        return Product(tuple(_expansion(f, names, where) for f in _need(d, "factors", where)), scale)
    if kind == "explicit":
        return Explicit(_coefficients(_need(d, "coefficients", where), where))
    raise ValidationError(f"{where}: unknown expansion kind {kind!r}")


def from_document(doc: Mapping, N: int | None = None) -> ProblemSpec:
    """Build a spec from a document; ``N`` overrides the stored truncation."""
    if not isinstance(doc, Mapping):
        raise ValidationError("a problem document is a JSON object")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ValidationError(f"unsupported document schema {doc.get('schema')!r}")
    try:
        basis = _basis(_need(doc, "basis", "document"))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"basis: {exc}") from exc
    dim = basis.dim
    unknowns = tuple(_need(doc, "unknowns", "document"))
    truncation = int(doc.get("truncation", 8)) if N is None else int(N)
    if truncation < 0:
        raise ValidationError("truncation must be >= 0")

    ops = []
    for i, t in enumerate(doc.get("operator", ())):
        where = f"operator term {i + 1}"
        ops.append(OperatorTerm(
            int(_need(t, "row", where)) - 1, int(_need(t, "unknown", where)) - 1, int(t.get("dt", 0)),
            _spatial(t, dim, where), tuple(parse_complex(c) for c in t.get("time_coeff", [1])),
        ))
    quad = []
    for i, t in enumerate(doc.get("quadratic", ())):
        where = f"quadratic term {i + 1}"
        quad.append(QuadraticTerm(int(_need(t, "row", where)) - 1,
                                  _factor(_need(t, "left", where), dim, where),
                                  _factor(_need(t, "right", where), dim, where),
                                  parse_complex(t.get("weight", 1))))
    series = []
    for i, t in enumerate(doc.get("series_coefficient_terms", ())):
        where = f"series-coefficient term {i + 1}"
        coeffs = {k: v for k, v in _coefficients(_need(t, "coefficients", where), where).items()
                  if sum(map(abs, k)) <= truncation}
        series.append(SeriesCoefficientTerm(int(_need(t, "row", where)) - 1, coeffs,
                                            int(_need(t, "unknown", where)) - 1, _spatial(t, dim, where),
                                            int(t.get("dt", 0)), parse_complex(t.get("weight", 1))))
    cons = []
    for i, c in enumerate(doc.get("constraints", ())):
        where = f"constraint {i + 1}"
        cons.append(Constraint(tuple(_factor(f, dim, where) for f in _need(c, "terms", where))))

    initial: dict = {}
    for i, entry in enumerate(doc.get("initial", ())):
        where = f"initial entry {i + 1}"
        key = (int(_need(entry, "unknown", where)) - 1, int(entry.get("order", 0)))
        if "coefficients" in entry:
            desc = Explicit(_coefficients(entry["coefficients"], where))
        else:
            desc = _expansion(_need(entry, "expansion", where), basis.names, where)
        try:
            data = expand_initial_data(desc, truncation, basis)
        except ValueError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
        merged = initial.setdefault(key, {})
        for k, v in data.items():
            merged[k] = merged.get(k, 0) + v

    forcing = {}
    for i, f in enumerate(doc.get("forcing", ())):
        where = f"forcing entry {i + 1}"
        k = _index(_need(f, "index", where))
        if sum(map(abs, k)) > truncation:
            continue
        poly = ExpPoly.from_quintuples(_need(f, "exppoly", where))
        key = (int(_need(f, "row", where)) - 1, k)
        forcing[key] = forcing.get(key, ExpPoly()) + poly

    box = tuple((parse_real(lo), parse_real(hi)) for lo, hi in _need(doc, "eval_box", "document"))
    return ProblemSpec(
        basis=basis, unknowns=unknowns, operator=tuple(ops), initial=initial,
        truncation=truncation, horizon=parse_real(_need(doc, "horizon", "document")), eval_box=box,
        quadratic=tuple(quad), series_terms=tuple(series), constraints=tuple(cons),
        forcing=forcing, steps=int(doc.get("steps", 1024)), name=str(doc.get("name", "")),
        params=dict(doc.get("params", {})),
    )


def load_document(path: str | Path, N: int | None = None) -> ProblemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return from_document(doc, N)


# ---------------------------------------------------------------- writing


def _dump_axis(ax) -> dict:
    for kind, (cls, fields) in _AXES.items():
        if type(ax) is cls:
            d = {"kind": kind, "index_set": ax.index_set}
            d.update({f: float(getattr(ax, f)) for f in fields})
            return d
    raise TypeError(f"unknown axis {ax!r}")


def _dump_spatial(term: SpatialTerm) -> dict:
    d = {"derivative": list(term.derivative), "coeff": dump_complex(term.coeff)}
    if term.multipliers:
        d["multipliers"] = [
            {"axis": m.axis + 1, "kind": m.kind, "exponent": float(m.exponent),
             "shift": None if m.shift is None else float(m.shift)}
            for m in term.multipliers
        ]
    return d


def _dump_coeffs(m: Mapping) -> list:
    return [[list(k), dump_complex(v)] for k, v in sorted(m.items(), key=lambda kv: order_key(kv[0]))]


def _jsonable(v):
    if isinstance(v, (str, bool)) or v is None:
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, complex):
        return dump_complex(v)
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


def to_document(spec: ProblemSpec) -> dict:
    """Document with explicit (already expanded) initial coefficients."""
    return {
        "schema": SCHEMA,
        "name": spec.name,
        "basis": {"names": list(spec.basis.names), "axes": [_dump_axis(a) for a in spec.basis.axes]},
        "unknowns": list(spec.unknowns),
        "operator": [
            {"row": t.row + 1, "unknown": t.unknown + 1, "dt": t.dt, **_dump_spatial(t.spatial),
             "time_coeff": [dump_complex(c) for c in t.time_coeff]}
            for t in spec.operator
        ],
        "quadratic": [
            {"row": t.row + 1, "weight": dump_complex(t.weight),
             "left": {"unknown": t.left.unknown + 1, **_dump_spatial(t.left.spatial)},
             "right": {"unknown": t.right.unknown + 1, **_dump_spatial(t.right.spatial)}}
            for t in spec.quadratic
        ],
        "series_coefficient_terms": [
            {"row": t.row + 1, "unknown": t.unknown + 1, "dt": t.dt, "weight": dump_complex(t.weight),
             "coefficients": _dump_coeffs(t.coefficients), **_dump_spatial(t.spatial)}
            for t in spec.series_terms
        ],
        "constraints": [
            {"terms": [{"unknown": f.unknown + 1, **_dump_spatial(f.spatial)} for f in c.terms]}
            for c in spec.constraints
        ],
        "initial": [
            {"unknown": q + 1, "order": h, "coefficients": _dump_coeffs(m)}
            for (q, h), m in sorted(spec.initial.items())
        ],
        "forcing": [
            {"row": p + 1, "index": list(k), "exppoly": v.to_quintuples()}
            for (p, k), v in sorted(spec.forcing.items(), key=lambda kv: (kv[0][0], order_key(kv[0][1])))
        ],
        "truncation": spec.truncation,
        "horizon": float(spec.horizon),
        "eval_box": [[float(lo), float(hi)] for lo, hi in spec.eval_box],
        "steps": spec.steps,
        "params": _jsonable(dict(spec.params)),
    }


def spec_hash(spec: ProblemSpec) -> str:
    return hashlib.sha256(canonical_json(to_document(spec)).encode()).hexdigest()


# ---------------------------------------------------------------- archives


def _complex_rows(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in a]


def archive_document(solution, spec: ProblemSpec) -> dict:
    from .linear import SampledTrajectory

    modes = []
    for q, series in enumerate(solution.coefficients):
        for k in sorted(series, key=order_key):
            T = series[k]
            entry = {"unknown": q + 1, "index": list(k)}
            if isinstance(T, SampledTrajectory):
                entry["sampled"] = {
                    "t_end": T.t_end, "steps": T.steps, "error_estimate": T.error_estimate,
                    "values": _complex_rows(T.values), "derivatives": _complex_rows(T.derivs),
                }
            else:
                entry["exppoly"] = T.to_quintuples()
            modes.append(entry)
    prov = solution.provenance
    backends = prov.get("backend", {})
    return {
        "schema": ARCHIVE_SCHEMA,
        "kind": "ftseries-solution",
        "spec_hash": spec_hash(spec),
        "problem": to_document(spec),
        "truncation": spec.truncation,
        "unknowns": list(solution.unknowns),
        "backend": [[list(k), b] for k, b in sorted(backends.items(), key=lambda kv: order_key(kv[0]))],
        "modes": modes,
    }


def save_archive(solution, spec: ProblemSpec, path: str | Path | None) -> str:
    """Serialize deterministically; writes to ``path`` when given and returns the text."""
    text = json.dumps(archive_document(solution, spec), sort_keys=True, indent=1, allow_nan=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_archive(path_or_doc) -> tuple:
    """Return ``(solution, spec)`` from an archive file or parsed document."""
    from .linear import SampledTrajectory, SeriesSolution

    if isinstance(path_or_doc, Mapping):
        doc = path_or_doc
    else:
        try:
            doc = json.loads(Path(path_or_doc).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read {path_or_doc}: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path_or_doc}: invalid JSON: {exc}") from exc
    if doc.get("schema") != ARCHIVE_SCHEMA or doc.get("kind") != "ftseries-solution":
        raise ValidationError("not a solution archive of a supported schema")
    spec = from_document(doc["problem"])
    coeffs = tuple({} for _ in spec.unknowns)
    for i, m in enumerate(doc["modes"]):
        q = int(m["unknown"]) - 1
        if not 0 <= q < len(coeffs):
            raise ValidationError(f"archive mode {i + 1}: unknown out of range")
        k = spec.basis.check_index(m["index"])
        if "exppoly" in m:
            coeffs[q][k] = ExpPoly.from_quintuples(m["exppoly"])
        else:
            s = m["sampled"]
            vals = np.array([complex(a, b) for a, b in s["values"]], dtype=np.complex128)
            ders = np.array([complex(a, b) for a, b in s["derivatives"]], dtype=np.complex128)
            if vals.size != int(s["steps"]) + 1 or ders.size != vals.size:
                raise ValidationError(f"archive mode {i + 1}: sample count does not match steps")
            coeffs[q][k] = SampledTrajectory(float(s["t_end"]), vals, ders, float(s.get("error_estimate", 0)))
    backends = {tuple(k): b for k, b in doc.get("backend", [])}
    sol = SeriesSolution(
        basis=spec.basis, unknowns=spec.unknowns, coefficients=coeffs, eval_box=spec.eval_box,
        horizon=spec.horizon,
        provenance={"name": spec.name, "spec_hash": doc.get("spec_hash", ""),
                    "truncation": spec.truncation, "backend": backends},
    )
    return sol, spec
