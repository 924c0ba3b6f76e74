"""Restricted arithmetic expressions for user-supplied Lagrangians.

Grammar: ``+ - * /``, ``**`` with a numeric exponent, parentheses, the
variables ``x0..x3`` and ``w0..w3``, the functions ``sqrt(a)`` and
``abs2(a, b, ...)`` (sum of squares), and numeric constants with an optional
unit suffix from the closed unit set (``2s``, ``0.5 s/m2``, ``3 1/s``).

Expressions are parsed once with :mod:`ast`, validated against a whitelist and
then interpreted, either on :class:`~noether_lab.quantities.Quantity` values
(dimension check) or on floats/arrays/Duals (numerics).
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction
from typing import Any, Sequence

from . import autodiff
from .quantities import (
    DIMENSIONLESS,
    METER,
    RATE,
    SECOND,
    SPEED,
    UNIT_DIMS,
    Dim,
    DimensionMismatch,
    Quantity,
    collapse_relativistic,
)
from .spacetime import ModelKind

__all__ = ["Expression", "ExpressionError", "parse_expression"]

_VARS = {f"x{k}" for k in range(4)} | {f"w{k}" for k in range(4)}
_FUNCS = {"sqrt", "abs2"}
_UNIT_ALT = "|".join(re.escape(u) for u in UNIT_DIMS)
_UNIT_LITERAL = re.compile(
    rf"(?<![\w.])(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)[ \t]*(?P<unit>{_UNIT_ALT})(?![\w/])"
)


class ExpressionError(ValueError):
    pass


def _rewrite_units(text: str) -> str:
    return _UNIT_LITERAL.sub(lambda m: f"__q({m.group('num')}, '{m.group('unit')}')", text)


def _validate(node: ast.AST) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        if isinstance(node.op, ast.Pow) and _const_value(node.right) is None:
            raise ExpressionError("exponents must be numeric constants")
        _validate(node.left)
        _validate(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.UAdd, ast.USub)):
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        _validate(node.operand)
    elif isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ExpressionError("only plain function calls are allowed")
        name = node.func.id
        if name == "__q":
            if len(node.args) != 2 or not all(isinstance(a, ast.Constant) for a in node.args):
                raise ExpressionError("malformed unit literal")
            return
        if name not in _FUNCS:
            raise ExpressionError(f"unknown function {name!r}")
        if name == "sqrt" and len(node.args) != 1:
            raise ExpressionError("sqrt takes one argument")
        if name == "abs2" and not node.args:
            raise ExpressionError("abs2 needs at least one argument")
        for a in node.args:
            _validate(a)
    elif isinstance(node, ast.Name):
        if node.id not in _VARS:
            raise ExpressionError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExpressionError(f"constant {node.value!r} not allowed")
    else:
        raise ExpressionError(f"syntax element {type(node).__name__} not allowed")


def _const_value(node: ast.AST) -> float | None:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        v = _const_value(node.operand)
        return None if v is None else -v
    return None


class Expression:
    """A validated expression over ``x0..x3`` and ``w0..w3``."""

    def __init__(self, source: str) -> None:
        self.source = source
        try:
            tree = ast.parse(_rewrite_units(source), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from None
        _validate(tree)
        self._tree = tree.body

    def evaluate(self, env: dict[str, Any], *, quantities: bool = False, model: ModelKind | None = None) -> Any:
        return _Interpreter(env, quantities, model).visit(self._tree)

    def __call__(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        env = {f"x{k}": x[k] for k in range(4)}
        env.update({f"w{k}": w[k] for k in range(4)})
        return self.evaluate(env)

    def result_dim(self, model: ModelKind) -> Dim:
        """Dimension of the expression on V(1) for the given model."""
        if model is ModelKind.NONREL:
            xd = [SECOND, METER, METER, METER]
            wd = [DIMENSIONLESS, SPEED, SPEED, SPEED]
        else:
            xd = [SECOND] * 4
            wd = [DIMENSIONLESS] * 4
        # generic sample values keep divisions and roots well defined
        env = {f"x{k}": Quantity(1.0 + 0.37 * k, xd[k]) for k in range(4)}
        env.update({f"w{k}": Quantity(1.0 + 0.11 * k, wd[k]) for k in range(4)})
        try:
            out = self.evaluate(env, quantities=True, model=model)
        except DimensionMismatch as exc:
            raise ExpressionError(f"{self.source!r} is dimensionally inconsistent: {exc}") from None
        if not isinstance(out, Quantity):
            out = Quantity(float(out), DIMENSIONLESS)
        return collapse_relativistic(out.dim) if model is ModelKind.REL else out.dim

    def check_lagrangian_dim(self, model: ModelKind) -> None:
        d = self.result_dim(model)
        if d != RATE:
            raise ExpressionError(f"{self.source!r} has dimension {d}, a Lagrangian needs 1/s")


class _Interpreter:
    def __init__(self, env: dict[str, Any], quantities: bool, model: ModelKind | None) -> None:
        self.env = env
        self.quantities = quantities
        self.model = model

    def visit(self, node: ast.AST) -> Any:
        if isinstance(node, ast.BinOp):
            left = self.visit(node.left)
            if isinstance(node.op, ast.Pow):
                k = _const_value(node.right)
                if self.quantities:
                    return _as_q(left) ** Fraction(k).limit_denominator(1000)
                return left ** k
            right = self.visit(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            return left / right
        if isinstance(node, ast.UnaryOp):
            v = self.visit(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            name = node.func.id  # type: ignore[attr-defined]
            if name == "__q":
                value, unit = (a.value for a in node.args)  # type: ignore[attr-defined]
                if self.quantities:
                    d = UNIT_DIMS[unit]
                    return Quantity(float(value), collapse_relativistic(d) if self.model is ModelKind.REL else d)
                return float(value)
            args = [self.visit(a) for a in node.args]
            if name == "sqrt":
                return _as_q(args[0]).sqrt() if self.quantities else autodiff.sqrt(args[0])
            total = args[0] * args[0]
            for a in args[1:]:
                total = total + a * a
            return total
        if isinstance(node, ast.Name):
            return self.env[node.id]
        if isinstance(node, ast.Constant):
            return Quantity(float(node.value)) if self.quantities else float(node.value)
        raise ExpressionError(f"unexpected node {type(node).__name__}")


def _as_q(v: Any) -> Quantity:
    return v if isinstance(v, Quantity) else Quantity(float(v), DIMENSIONLESS)


def parse_expression(source: str, model: ModelKind | None = None) -> Expression:
    expr = Expression(source)
    if model is not None:
        expr.check_lagrangian_dim(model)
    return expr

