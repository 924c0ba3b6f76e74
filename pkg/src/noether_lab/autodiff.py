"""Forward-mode automatic differentiation with nestable dual numbers.

A :class:`Dual` carries a value and a list of directional derivatives. Values
and derivatives may be numpy arrays (one lane per sample) or Duals themselves,
which gives exact higher derivatives by nesting. Every seeding gets a fresh
integer tag; when two Duals with different tags meet, the one with the larger
tag (the innermost seeding) is the outer layer and the other is a constant at
that layer. That rule prevents perturbation confusion.

Only the operations used by the Lagrangian kernels are provided:
``+ - * /``, integer/real powers and :func:`sqrt`.
"""

from __future__ import annotations

import itertools
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "Dual",
    "new_tag",
    "sqrt",
    "primal",
    "seed",
    "jacobian_rows",
    "value_and_grad",
    "value_grad_hessian",
    "directional",
]

_tags = itertools.count(1)


def new_tag() -> int:
    return next(_tags)


def _tag_of(x: Any) -> int:
    return x.tag if isinstance(x, Dual) else 0


def _split(x: Any, tag: int, n: int) -> tuple[Any, list[Any] | None]:
    if isinstance(x, Dual) and x.tag == tag:
        return x.val, x.der
    return x, None


class Dual:
    __slots__ = ("val", "der", "tag")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, val: Any, der: Sequence[Any], tag: int) -> None:
        self.val = val
        self.der = list(der)
        self.tag = tag

    def __repr__(self) -> str:
        return f"Dual(tag={self.tag}, val={self.val!r}, der={self.der!r})"

    def _binary(self, other: Any, op: str) -> Dual:
        tag = max(self.tag, _tag_of(other))
        n = len(self.der) if self.tag == tag else len(other.der)
        a, da = _split(self, tag, n)
        b, db = _split(other, tag, n)
        if op == "add":
            val = a + b
            der = _merge(da, db, lambda x, y: x + y, lambda x: x, lambda y: y)
        elif op == "sub":
            val = a - b
            der = _merge(da, db, lambda x, y: x - y, lambda x: x, lambda y: -y)
        elif op == "mul":
            val = a * b
            der = _merge(da, db, lambda x, y: x * b + a * y, lambda x: x * b, lambda y: a * y)
        else:  # div
            val = a / b
            if db is None:
                der = [x / b for x in da]
            else:
                inv = 1.0 / b
                q = val * inv
                der = _merge(da, db, lambda x, y: x * inv - q * y, lambda x: x * inv, lambda y: -q * y)
        return Dual(val, der, tag)

    def _rbinary(self, other: Any, op: str) -> Dual:
        # other is not a Dual (or has a lower tag and reached here via reflection)
        tag = self.tag
        a, b, db = other, self.val, self.der
        if op == "sub":
            return Dual(a - b, [-y for y in db], tag)
        if op == "div":
            val = a / b
            q = val / b
            return Dual(val, [-q * y for y in db], tag)
        raise AssertionError(op)

    def __add__(self, other: Any) -> Dual:
        return self._binary(other, "add")

    def __radd__(self, other: Any) -> Dual:
        return self._binary(other, "add")

    def __sub__(self, other: Any) -> Dual:
        return self._binary(other, "sub")

    def __rsub__(self, other: Any) -> Dual:
        return self._rbinary(other, "sub")

    def __mul__(self, other: Any) -> Dual:
        return self._binary(other, "mul")

    def __rmul__(self, other: Any) -> Dual:
        return self._binary(other, "mul")

    def __truediv__(self, other: Any) -> Dual:
        return self._binary(other, "div")

    def __rtruediv__(self, other: Any) -> Dual:
        return self._rbinary(other, "div")

    def __neg__(self) -> Dual:
        return Dual(-self.val, [-d for d in self.der], self.tag)

    def __pos__(self) -> Dual:
        return self

    def __pow__(self, k: float) -> Dual:
        if isinstance(k, Dual):
            raise TypeError("Dual exponents are not supported")
        if k == 2:
            return self * self
        if k == 0.5:
            return sqrt(self)
        val = self.val ** k
        slope = k * self.val ** (k - 1)
        return Dual(val, [slope * d for d in self.der], self.tag)


def _merge(da, db, both, only_a, only_b):
    if da is None:
        return [only_b(y) for y in db]
    if db is None:
        return [only_a(x) for x in da]
    return [both(x, y) for x, y in zip(da, db)]


def sqrt(x: Any) -> Any:
    if isinstance(x, Dual):
        root = sqrt(x.val)
        half_inv = 0.5 / root
        return Dual(root, [half_inv * d for d in x.der], x.tag)
    return np.sqrt(x)


def primal(x: Any) -> Any:
    """Strip every dual layer."""
    while isinstance(x, Dual):
        x = x.val
    return x


def seed(values: Sequence[Any], tag: int | None = None) -> list[Dual]:
    """Seed each input with its own unit direction."""
    tag = new_tag() if tag is None else tag
    n = len(values)
    return [Dual(v, [1.0 if j == i else 0.0 for j in range(n)], tag) for i, v in enumerate(values)]


def _derivs(out: Any, tag: int, n: int, shape: tuple[int, ...]) -> list[Any]:
    if isinstance(out, Dual) and out.tag == tag:
        return [np.broadcast_to(d, shape) if not isinstance(d, Dual) else d for d in out.der]
    return [np.zeros(shape) for _ in range(n)]


def jacobian_rows(out: Any, tag: int, n: int) -> list[Any]:
    """Derivative list of ``out`` at layer ``tag`` (zeros if it does not depend on it)."""
    if isinstance(out, Dual) and out.tag == tag:
        return list(out.der)
    return [0.0] * n


def value_and_grad(f: Callable[[list[Any]], Any], args: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Value and gradient of a scalar kernel, vectorized over sample lanes.

    ``args`` is a list of n arrays sharing one shape ``S``; returns arrays of
    shape ``S`` and ``S + (n,)``.
    """
    args = [np.asarray(a, dtype=float) for a in args]
    shape = np.broadcast_shapes(*(a.shape for a in args))
    tag = new_tag()
    out = f(seed(args, tag))
    val = np.broadcast_to(primal(out), shape).astype(float)
    grad = np.stack([np.broadcast_to(d, shape) for d in _derivs(out, tag, len(args), shape)], axis=-1)
    return val, grad.astype(float)


def value_grad_hessian(
    f: Callable[[list[Any]], Any], args: Sequence[np.ndarray]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact value, gradient and Hessian by nesting two seedings."""
    args = [np.asarray(a, dtype=float) for a in args]
    n = len(args)
    shape = np.broadcast_shapes(*(a.shape for a in args))
    outer = new_tag()
    xs = seed(args, outer)
    inner = new_tag()
    ys = [Dual(x, [1.0 if j == i else 0.0 for j in range(n)], inner) for i, x in enumerate(xs)]
    out = f(ys)
    val = np.broadcast_to(primal(out), shape).astype(float)
    grad = np.zeros(shape + (n,))
    hess = np.zeros(shape + (n, n))
    first = jacobian_rows(out, inner, n)
    for i, gi in enumerate(first):
        grad[..., i] = np.broadcast_to(primal(gi), shape)
        second = jacobian_rows(gi, outer, n)
        for j, hij in enumerate(second):
            hess[..., i, j] = np.broadcast_to(primal(hij), shape)
    return val, grad, hess


def directional(f: Callable[[list[Any]], Any], args: Sequence[Any], direction: Sequence[Any]) -> Any:
    """d/de f(args + e * direction) at e = 0; args and direction may be Duals."""
    tag = new_tag()
    xs = [Dual(a, [d], tag) for a, d in zip(args, direction)]
    out = f(xs)
    if isinstance(out, Dual) and out.tag == tag:
        return out.der[0]
    return 0.0 * primal(args[0])
