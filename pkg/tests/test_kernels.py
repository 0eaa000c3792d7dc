import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ftseries import kernels
from ftseries.catalog import builtin_example
from ftseries.linear import _pack, _support
from ftseries.problem import assemble_mode_system, validate

needs_numba = pytest.mark.skipif(kernels.NUMBA is None, reason="numba not importable")

PROBE = ("import numpy as np; from ftseries import kernels; from ftseries.catalog import builtin_example; "
         "from ftseries.linear import solve_all; s = builtin_example('oo', N=3, steps=64); "
         "print(kernels.backend(), repr(complex(solve_all(s).evaluate(0, np.array([[0.7, 4.0]]), [0.9])[0, 0])))")


def probe(flag):
    env = dict(os.environ, FT_SERIES_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, capture_output=True, text=True, check=True)
    name, value = out.stdout.split(maxsplit=1)
    return name, complex(eval(value))


@needs_numba
def test_env_switch_selects_backend():
    a, va = probe("0")
    b, vb = probe("1")
    assert (a, b) == ("numpy", "numba")
    assert abs(va - vb) <= 1e-12 * max(1.0, abs(va))


@needs_numba
@settings(max_examples=50)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_exppoly_eval_agrees(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    p = rng.integers(0, 4, size=n).astype(np.int64)
    q = rng.uniform(-3, 1, size=n) + 1j * rng.normal(size=n)
    t = rng.uniform(0, 2, size=17)
    a = kernels.NUMPY.exppoly_eval(c, p, q, t)
    b = kernels.NUMBA.exppoly_eval(c, p, q, t)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@needs_numba
def test_rk4_and_hermite_agree_on_oo_modes():
    spec = validate(builtin_example("oo", N=5, steps=128))
    for k in list(_support(spec))[:6]:
        packed = _pack(assemble_mode_system(spec, k))
        Ya, dYa = kernels.NUMPY.rk4_system(packed[0], spec.horizon, 128, *packed[1:])
        Yb, dYb = kernels.NUMBA.rk4_system(packed[0], spec.horizon, 128, *packed[1:])
        np.testing.assert_allclose(Ya, Yb, rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(dYa, dYb, rtol=1e-12, atol=1e-14)
        th = np.linspace(0, spec.horizon, 301)
        Y, dY = Ya.reshape(Ya.shape[0], -1), dYa.reshape(dYa.shape[0], -1)
        np.testing.assert_allclose(kernels.NUMPY.hermite(spec.horizon, Y, dY, th),
                                   kernels.NUMBA.hermite(spec.horizon, Y, dY, th), rtol=1e-12, atol=1e-14)


def test_benchmark_script_runs():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    script = os.path.join(root, "benchmarks", "bench_kernels.py")
    out = subprocess.run([sys.executable, script, "--repeat", "1", "--steps", "64"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "speedup" in out.stdout
