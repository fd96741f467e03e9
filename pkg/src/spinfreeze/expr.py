"""Tiny arithmetic evaluator for numeric fields in scenario documents.

Lets documents write ``pi/2 - 0.1`` or ``sqrt(12)/sqrt(2)`` instead of long
decimal literals.  Only numbers, ``+ - * / **``, unary minus, ``pi``,
``sqrt`` and caller-supplied names are accepted.
"""

from __future__ import annotations

import ast
import math
from collections.abc import Mapping

from .errors import ParseError

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}
_FUNCS = {"sqrt": math.sqrt}
_CONSTS = {"pi": math.pi}


def evaluate(value, names: Mapping[str, float] | None = None, locus: str | None = None) -> float:
    """Return ``value`` as a float, evaluating it if it is an expression string."""
    if isinstance(value, bool):
        raise ParseError(f"expected a number, got {value!r}", locus)
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"expected a number or expression, got {value!r}", locus)
    env = dict(_CONSTS)
    if names:
        env.update(names)
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad expression {value!r}: {exc.msg}", locus) from None
    try:
        return float(_eval(tree.body, env))
    except (KeyError, TypeError, ZeroDivisionError, ValueError) as exc:
        raise ParseError(f"cannot evaluate {value!r}: {exc}", locus) from None


def free_names(value) -> set[str]:
    """Names referenced by an expression, excluding built-in constants."""
    if not isinstance(value, str):
        return set()
    try:
        tree = ast.parse(value.strip(), mode="eval")
    except SyntaxError:
        return set()
    return {
        node.id
        for node in ast.walk(tree)
        if isinstance(node, ast.Name) and node.id not in _CONSTS and node.id not in _FUNCS
    }


def _eval(node, env):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise KeyError(f"unknown name {node.id!r}")
        return env[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        operand = _eval(node.operand, env)
        return -operand if isinstance(node.op, ast.USub) else operand
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval(node.args[0], env))
    raise TypeError(f"unsupported syntax {ast.dump(node)}")
