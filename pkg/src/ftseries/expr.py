"""Parsing of numeric literals and small scalar expressions in documents.

Numbers may be given as JSON numbers, ``[re, im]`` pairs, or strings such as
``"pi"``, ``"pi/2"``, ``"2pi"`` or ``"-3/5"``.  Functions (for quadrature
expansions) are arithmetic expressions in named variables using a fixed
whitelist of numpy functions.
"""
from __future__ import annotations

import ast
import math
import re
from collections.abc import Callable

import numpy as np

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh, "abs": np.abs,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_OPS = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd,
)


def _check(tree: ast.AST, names: set[str]) -> None:
    for node in ast.walk(tree):
        if not isinstance(node, _OPS):
            raise ValueError(f"disallowed syntax: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in names:
            raise ValueError(f"unknown name {node.id!r}")
        if isinstance(node, ast.Call) and not (
            isinstance(node.func, ast.Name) and node.func.id in _FUNCS
        ):
            raise ValueError("only whitelisted functions may be called")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ValueError(f"bad literal {node.value!r}")


def _prepare(text: str) -> str:
    # "2pi" -> "2*pi"
    return re.sub(r"(\d)\s*(pi|e)\b", r"\1*\2", text.strip())


def parse_real(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        tree = ast.parse(_prepare(value), mode="eval")
        _check(tree, set(_CONSTS))
        return float(eval(compile(tree, "<number>", "eval"), {"__builtins__": {}}, dict(_CONSTS)))
    raise ValueError(f"not a real number: {value!r}")


def parse_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {value!r}")
        return complex(parse_real(value[0]), parse_real(value[1]))
    return complex(parse_real(value))


def dump_complex(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def compile_function(text: str, variables: tuple[str, ...] = ("x",)) -> Callable:
    """Compile ``text`` into a vectorized callable of ``variables``."""
    tree = ast.parse(_prepare(text), mode="eval")
    _check(tree, set(variables) | set(_CONSTS) | set(_FUNCS))
    code = compile(tree, "<function>", "eval")
    env = {"__builtins__": {}, **_FUNCS, **_CONSTS}

    def f(*args):
        return eval(code, env, dict(zip(variables, args)))

    f.__doc__ = text
    return f
