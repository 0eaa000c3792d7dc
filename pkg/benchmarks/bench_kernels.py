"""Numba vs pure-numpy kernels on workloads taken from the built-in examples.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--steps 1024]

The RK4 workload integrates every mode system of the ``oo`` example, the
only built-in that needs the numeric backend.  Both kernels must agree to
rounding; the script exits non-zero if they do not.
"""
import argparse
import sys
import time

import numpy as np

from ftseries import kernels
from ftseries.catalog import builtin_example
from ftseries.linear import _pack, _support
from ftseries.problem import assemble_mode_system, validate


def best_of(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def flat(out):
    """All arrays of a kernel result as one vector."""
    if isinstance(out, (list, tuple)):
        return np.concatenate([flat(o) for o in out])
    return np.ravel(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=1024)
    args = ap.parse_args(argv)

    if kernels.NUMBA is None:
        print("numba is not importable; nothing to compare")
        return 1

    spec = validate(builtin_example("oo", steps=args.steps))
    packed = [_pack(assemble_mode_system(spec, k)) for k in _support(spec)]
    T = spec.horizon

    def rk4(ns):
        return lambda: [ns.rk4_system(p[0], T, args.steps, *p[1:]) for p in packed]

    rng = np.random.default_rng(0)
    n_terms = 40
    c = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    p = rng.integers(0, 4, size=n_terms).astype(np.int64)
    q = -rng.uniform(0, 3, size=n_terms) + 1j * rng.normal(size=n_terms)
    t = np.linspace(0, 2, 200_000)

    Y, dY = kernels.NUMPY.rk4_system(packed[0][0], T, args.steps, *packed[0][1:])
    th = np.linspace(0, T, 200_000)
    Yc = Y.reshape(Y.shape[0], -1)
    dYc = dY.reshape(dY.shape[0], -1)

    work = [
        (f"rk4_system ({len(packed)} modes x {args.steps} steps)", rk4),
        (f"exppoly_eval ({n_terms} terms x {t.size} times)", lambda ns: lambda: ns.exppoly_eval(c, p, q, t)),
        (f"hermite ({th.size} times)", lambda ns: lambda: ns.hermite(T, Yc, dYc, th)),
    ]

    rows = []
    ok = True
    for label, make in work:
        t_np, out_np = best_of(make(kernels.NUMPY), args.repeat)
        t_nb, out_nb = best_of(make(kernels.NUMBA), args.repeat)
        diff = float(np.max(np.abs(flat(out_np) - flat(out_nb))))
        scale = max(1.0, float(np.max(np.abs(flat(out_np)))))
        ok &= diff <= 1e-10 * scale
        rows.append((label, t_np * 1e3, t_nb * 1e3, t_np / t_nb, diff))

    w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{w}}  {'numpy ms':>10}  {'numba ms':>10}  {'speedup':>8}  {'max diff':>9}")
    for label, a, b, s, d in rows:
        print(f"{label:<{w}}  {a:10.2f}  {b:10.2f}  {s:7.1f}x  {d:9.1e}")
    if not ok:
        print("kernels disagree beyond rounding", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
