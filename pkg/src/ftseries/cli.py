"""Command-line front end: ``ftseries {solve,eval,verify,examples}``.

Exit codes: 1 invalid input, 2 solver failure, 3 grid outside the box,
4 a verification check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from .catalog import EXAMPLES, GridSpec, builtin_example, standard_grid
from .diagnostics import (
    BOUNDS,
    FAIL,
    PASS,
    REFERENCES,
    bound_check,
    closed_form_compare,
    initial_data_check,
    render_table,
    residual_check,
    solution_tail_report,
)
from .documents import load_archive, load_document, save_archive
from .errors import DomainError, FTSeriesError, GridDomainError, SolverError, ValidationError
from .expr import parse_real
from .linear import SeriesSolution, solve_all
from .problem import ProblemSpec

EXIT_VALIDATION, EXIT_SOLVER, EXIT_GRID, EXIT_VERIFY = 1, 2, 3, 4

#: Closed-form comparisons against references; numeric modes get the looser bound.
COMPARE_TOL = 1e-9
COMPARE_TOL_NUMERIC = 1e-6
INITIAL_TOL = 1e-9


@dataclass
class RunConfig:
    command: str
    example: str | None = None
    input: str | None = None
    archive: str | None = None
    N: int | None = None
    params: dict = field(default_factory=dict)
    format: str = "text"
    output: str | None = None
    grid: dict = field(default_factory=dict)
    times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.N is not None and self.N < 0:
            raise ValidationError("--N must be >= 0")
        for name, (_, _, n) in self.grid.items():
            if n < 2:
                raise ValidationError(f"--grid {name}: count must be >= 2")


# ---------------------------------------------------------------- parsing


def _grid_arg(text: str) -> tuple[str, tuple[float, float, int]]:
    try:
        name, rng = text.split("=", 1)
        lo, hi, n = rng.split(":")
        return name.strip(), (parse_real(lo), parse_real(hi), int(n))
    except ValueError:
        raise ValidationError(f"--grid expects axis=min:max:count, got {text!r}") from None


def _times_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(parse_real(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ValidationError(f"--times expects t0,t1,..., got {text!r}") from None


def _param_arg(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ValidationError(f"--param expects key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _param_value(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftseries", description="Fourier-Taylor series solutions of Cauchy problems.")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp, archive: bool):
        g = sp.add_mutually_exclusive_group(required=not archive)
        g.add_argument("--example", help="built-in example name (see `ftseries examples`)")
        g.add_argument("--input", help="problem document (JSON)")
        if archive:
            g.add_argument("--archive", help="solution archive written by `ftseries solve`")
        sp.add_argument("--N", type=int, help="truncation order (largest mode norm)")
        sp.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="built-in example parameter, repeatable")
        sp.add_argument("-o", "--output", help="output file (default: stdout)")

    sp = sub.add_parser("solve", help="solve a problem and write a solution archive")
    source(sp, archive=False)

    sp = sub.add_parser("eval", help="evaluate a solution on a grid")
    source(sp, archive=True)
    sp.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    sp.add_argument("--grid", action="append", default=[], metavar="AXIS=MIN:MAX:COUNT")
    sp.add_argument("--times", help="comma-separated sample times")

    sp = sub.add_parser("verify", help="run residual, tail, bound and closed-form checks")
    source(sp, archive=True)
    sp.add_argument("--format", choices=("csv", "json", "text"), default="text")

    sp = sub.add_parser("examples", help="list the built-in examples")
    sp.add_argument("--format", choices=("csv", "json", "text"), default="text")
    sp.add_argument("-o", "--output")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    grid = dict(_grid_arg(g) for g in getattr(ns, "grid", []))
    times = getattr(ns, "times", None)
    return RunConfig(
        command=ns.command,
        example=getattr(ns, "example", None),
        input=getattr(ns, "input", None),
        archive=getattr(ns, "archive", None),
        N=getattr(ns, "N", None),
        params={k: _param_value(v) for k, v in map(_param_arg, getattr(ns, "param", []))},
        format=getattr(ns, "format", "text"),
        output=getattr(ns, "output", None),
        grid=grid,
        times=None if times is None else _times_arg(times),
    )


# ---------------------------------------------------------------- commands


def load_problem(cfg: RunConfig) -> ProblemSpec:
    if cfg.example is not None:
        return builtin_example(cfg.example, cfg.N, **cfg.params)
    if cfg.params:
        raise ValidationError("--param applies to built-in examples only")
    return load_document(cfg.input, cfg.N)


def load_solution(cfg: RunConfig) -> tuple[SeriesSolution, ProblemSpec]:
    if cfg.archive is not None:
        if cfg.N is not None or cfg.params:
            raise ValidationError("--N and --param cannot change an archived solution")
        return load_archive(cfg.archive)
    spec = load_problem(cfg)
    return solve_all(spec), spec


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_solve(cfg: RunConfig) -> int:
    spec = load_problem(cfg)
    sol = solve_all(spec)
    text = save_archive(sol, spec, None)
    _emit(text, cfg.output)
    n = sum(len(c) for c in sol.coefficients)
    print(f"solved {spec.name or 'problem'}: N={spec.truncation}, {n} nonzero mode(s)", file=sys.stderr)
    return 0


def eval_grid(cfg: RunConfig, sol: SeriesSolution, spec: ProblemSpec) -> GridSpec:
    """Grid from ``--grid``/``--times`` over the standard grid, checked against the box."""
    base = standard_grid(spec)
    names = spec.basis.names
    extra = set(cfg.grid) - set(names)
    if extra:
        raise ValidationError(f"unknown grid axis {', '.join(sorted(extra))}; axes are {', '.join(names)}")
    axes = tuple(cfg.grid.get(n, base.axes[a]) for a, n in enumerate(names))
    grid = GridSpec(axes, base.times if cfg.times is None else cfg.times)
    for (lo, hi, _), (blo, bhi), name in zip(grid.axes, spec.eval_box, names):
        slack = 1e-12 * (bhi - blo)
        if lo < blo - slack or hi > bhi + slack:
            raise GridDomainError(f"grid axis {name} [{lo:g}, {hi:g}] leaves the box [{blo:g}, {bhi:g}]")
    for t in grid.times:
        if t < 0 or t > spec.horizon * (1 + 1e-12):
            raise GridDomainError(f"time {t:g} outside [0, {spec.horizon:g}]")
    return grid


def eval_table(sol: SeriesSolution, spec: ProblemSpec, grid: GridSpec) -> tuple[list[str], list[list[float]]]:
    """Header and rows: time-major, then axis-lexicographic; ``re``/``im`` per unknown."""
    coords = grid.coords()
    times = np.asarray(grid.times)
    fields = [sol.evaluate_grid(q, coords, times) for q in range(len(sol.unknowns))]
    header = ["t", *spec.basis.names]
    for u in sol.unknowns:
        header += [f"re_{u}", f"im_{u}"]
    mesh = np.meshgrid(times, *coords, indexing="ij")
    cols = [m.ravel() for m in mesh]
    for f in fields:
        flat = f.ravel()
        cols += [flat.real, flat.imag]
    rows = np.column_stack(cols).tolist()
    return header, rows


def cmd_eval(cfg: RunConfig) -> int:
    sol, spec = load_solution(cfg)
    grid = eval_grid(cfg, sol, spec)
    header, rows = eval_table(sol, spec, grid)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[repr(v) for v in r] for r in rows])
        text = buf.getvalue()
    elif cfg.format == "json":
        text = json.dumps({"columns": header, "rows": rows}) + "\n"
    else:
        text = render_table(header, rows) + "\n"
    _emit(text, cfg.output)
    return 0


def verify_checks(sol: SeriesSolution, spec: ProblemSpec) -> list[dict]:
    """Every applicable check as ``{check, value, threshold, verdict, detail}``."""
    out = []
    err = initial_data_check(sol, spec)
    out.append({"check": "initial data", "value": err, "threshold": INITIAL_TOL,
                "verdict": PASS if err <= INITIAL_TOL else FAIL, "detail": "max |d_t^h T_k(0) - data|"})

    res = residual_check(sol, spec)
    out.append({"check": "residual", "value": res.worst,
                "threshold": max(res.tol, 10 * res.floor), "verdict": res.verdict,
                "detail": f"finite differences, noise floor {res.floor:.2e}"})

    tail = solution_tail_report(sol, spec)
    worst = max(tail.entries, key=lambda e: e.ratio)
    out.append({"check": "tail (proxy)", "value": worst.ratio, "threshold": 0.95,
                "verdict": tail.verdict, "detail": f"worst decay ratio: {worst.kind}"})

    if spec.name in BOUNDS:
        b = bound_check(sol, spec.name, spec.truncation, spec.horizon)
        detail = "all sampled" if b.violation is None else \
            f"k={b.violation[0]} t={b.violation[1]:.4g} value {b.violation[2]} > {b.violation[3]}"
        out.append({"check": f"bound {spec.name}", "value": b.checked_modes, "threshold": None,
                    "verdict": b.verdict, "detail": detail})

    if spec.name in REFERENCES:
        numeric = any(v != "closed" for v in sol.provenance.get("backend", {}).values())
        tol = COMPARE_TOL_NUMERIC if numeric else COMPARE_TOL
        d = closed_form_compare(sol, spec)
        out.append({"check": "closed form", "value": d, "threshold": tol,
                    "verdict": PASS if d <= tol else FAIL, "detail": f"max |series - {spec.name} reference|"})
    return out


def cmd_verify(cfg: RunConfig) -> int:
    sol, spec = load_solution(cfg)
    checks = verify_checks(sol, spec)
    ok = all(c["verdict"] == PASS for c in checks)
    if cfg.format == "json":
        text = json.dumps({"problem": spec.name, "truncation": spec.truncation,
                           "verdict": PASS if ok else FAIL, "checks": checks}, indent=1) + "\n"
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["check", "value", "threshold", "verdict", "detail"], lineterminator="\n")
        w.writeheader()
        w.writerows(checks)
        text = buf.getvalue()
    else:
        rows = [(c["check"], c["value"], "" if c["threshold"] is None else c["threshold"], c["verdict"], c["detail"])
                for c in checks]
        text = (f"{spec.name or 'problem'} N={spec.truncation}: {PASS if ok else FAIL}\n"
                + render_table(("check", "value", "threshold", "verdict", "detail"), rows) + "\n")
    _emit(text, cfg.output)
    return 0 if ok else EXIT_VERIFY


def cmd_examples(cfg: RunConfig) -> int:
    rows = [(e.name, ", ".join(f"{k}={v}" for k, v in e.defaults.items()), e.summary) for e in EXAMPLES.values()]
    if cfg.format == "json":
        text = json.dumps([{"name": n, "defaults": dict(EXAMPLES[n].defaults), "problem": s}
                           for n, _, s in rows], indent=1) + "\n"
    elif cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("name", "defaults", "problem"))
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = render_table(("name", "defaults", "problem"), rows) + "\n"
    _emit(text, cfg.output)
    return 0


COMMANDS = {"solve": cmd_solve, "eval": cmd_eval, "verify": cmd_verify, "examples": cmd_examples}


def run(cfg: RunConfig) -> int:
    return COMMANDS[cfg.command](cfg)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns))
    except (GridDomainError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FTSeriesError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
