"""Dimensioned scalars over the two base measure lines, time (s) and distance (m).

hbar = 1 throughout, so a mass value has dimension s/m^2. In the relativistic
model distances are identified with time intervals (c = 1); use
:func:`collapse_relativistic` to fold a dimension into pure time.
"""

from __future__ import annotations

import contextlib
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

__all__ = [
    "Dim",
    "Quantity",
    "DimensionMismatch",
    "DIMENSIONLESS",
    "SECOND",
    "METER",
    "MASS",
    "SPEED",
    "RATE",
    "q_add",
    "q_sub",
    "q_mul",
    "q_div",
    "collapse_relativistic",
    "parse_quantity",
    "format_quantity",
    "checks_enabled",
    "set_checks",
    "dimension_checks",
    "UNIT_DIMS",
]

_CHECKS = True


def checks_enabled() -> bool:
    return _CHECKS


def set_checks(enabled: bool) -> None:
    """Globally enable or disable dimension checks (the release hot-loop switch)."""
    global _CHECKS
    _CHECKS = bool(enabled)


@contextlib.contextmanager
def dimension_checks(enabled: bool) -> Iterator[None]:
    previous = _CHECKS
    set_checks(enabled)
    try:
        yield
    finally:
        set_checks(previous)


class DimensionMismatch(ValueError):
    pass


Rational = Union[int, Fraction]


@dataclass(frozen=True)
class Dim:
    """Exponents of (second, meter). Stored as exact fractions."""

    time_exp: Fraction = Fraction(0)
    length_exp: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "time_exp", Fraction(self.time_exp))
        object.__setattr__(self, "length_exp", Fraction(self.length_exp))

    def __mul__(self, other: Dim) -> Dim:
        return Dim(self.time_exp + other.time_exp, self.length_exp + other.length_exp)

    def __truediv__(self, other: Dim) -> Dim:
        return Dim(self.time_exp - other.time_exp, self.length_exp - other.length_exp)

    def __pow__(self, k: Rational) -> Dim:
        k = Fraction(k)
        return Dim(self.time_exp * k, self.length_exp * k)

    def inverse(self) -> Dim:
        return Dim(-self.time_exp, -self.length_exp)

    @property
    def is_dimensionless(self) -> bool:
        return self.time_exp == 0 and self.length_exp == 0

    def __str__(self) -> str:
        return _dim_label(self)


DIMENSIONLESS = Dim()
SECOND = Dim(1, 0)
METER = Dim(0, 1)
MASS = Dim(1, -2)
SPEED = Dim(-1, 1)
RATE = Dim(-1, 0)

# closed unit set of the literal grammar; order matters for the regex below
UNIT_DIMS = {
    "s/m2": MASS,
    "1/s": RATE,
    "m/s": SPEED,
    "dimensionless": DIMENSIONLESS,
    "s": SECOND,
    "m": METER,
}


def _dim_label(d: Dim) -> str:
    for name, dim in UNIT_DIMS.items():
        if dim == d:
            return "" if name == "dimensionless" else name

    def part(sym: str, e: Fraction) -> str:
        return sym if e == 1 else f"{sym}^{e}"

    num = [part(s, e) for s, e in (("s", d.time_exp), ("m", d.length_exp)) if e > 0]
    den = [part(s, -e) for s, e in (("s", d.time_exp), ("m", d.length_exp)) if e < 0]
    label = "*".join(num) or "1"
    if den:
        label += "/" + "/".join(den)
    return label


def collapse_relativistic(d: Dim) -> Dim:
    """Identify distances with time intervals: (t, l) -> (t + l, 0)."""
    return Dim(d.time_exp + d.length_exp, 0)


@dataclass(frozen=True)
class Quantity:
    value: float
    dim: Dim = DIMENSIONLESS

    def _coerce(self, other: object) -> Quantity:
        if isinstance(other, Quantity):
            return other
        if isinstance(other, (int, float)):
            return Quantity(float(other), DIMENSIONLESS)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> Quantity:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return q_add(self, other)

    __radd__ = __add__

    def __sub__(self, other: object) -> Quantity:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return q_sub(self, other)

    def __rsub__(self, other: object) -> Quantity:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return q_sub(other, self)

    def __mul__(self, other: object) -> Quantity:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return q_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> Quantity:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return q_div(self, other)

    def __rtruediv__(self, other: object) -> Quantity:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return q_div(other, self)

    def __pow__(self, k: Rational) -> Quantity:
        k = Fraction(k)
        return Quantity(self.value ** float(k), self.dim ** k)

    def __neg__(self) -> Quantity:
        return Quantity(-self.value, self.dim)

    def __pos__(self) -> Quantity:
        return self

    def __abs__(self) -> Quantity:
        return Quantity(abs(self.value), self.dim)

    def sqrt(self) -> Quantity:
        return self ** Fraction(1, 2)

    def to(self, dim: Dim) -> float:
        """Return the bare value, asserting the dimension."""
        if _CHECKS and dim != self.dim:
            raise DimensionMismatch(f"expected {dim!s}, got {self.dim!s}")
        return self.value

    def __float__(self) -> float:
        if _CHECKS and not self.dim.is_dimensionless:
            raise DimensionMismatch(f"cannot convert {self} to a bare float")
        return float(self.value)

    def __str__(self) -> str:
        return format_quantity(self)


def q_add(a: Quantity, b: Quantity) -> Quantity:
    if _CHECKS and a.dim != b.dim:
        raise DimensionMismatch(f"cannot add {a.dim!s} and {b.dim!s}")
    return Quantity(a.value + b.value, a.dim)


def q_sub(a: Quantity, b: Quantity) -> Quantity:
    if _CHECKS and a.dim != b.dim:
        raise DimensionMismatch(f"cannot subtract {b.dim!s} from {a.dim!s}")
    return Quantity(a.value - b.value, a.dim)


def q_mul(a: Quantity, b: Quantity) -> Quantity:
    return Quantity(a.value * b.value, a.dim * b.dim)


def q_div(a: Quantity, b: Quantity) -> Quantity:
    return Quantity(a.value / b.value, a.dim / b.dim)


_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_UNIT = "|".join(re.escape(u) for u in UNIT_DIMS)
_LITERAL = re.compile(rf"^\s*(?P<num>{_FLOAT})\s*(?P<unit>{_UNIT})?\s*$")


def parse_quantity(text: str) -> Quantity:
    """Parse ``<float><unit>``; a missing unit means dimensionless.

    >>> parse_quantity("2.5 s/m2").dim == MASS
    True
    """
    m = _LITERAL.match(text)
    if m is None:
        raise ValueError(f"not a quantity literal: {text!r}")
    unit = m.group("unit") or "dimensionless"
    return Quantity(float(m.group("num")), UNIT_DIMS[unit])


def format_quantity(q: Quantity, digits: int = 17) -> str:
    label = _dim_label(q.dim)
    num = f"{q.value:.{digits}g}"
    return f"{num} {label}" if label else num


def isclose(a: Quantity, b: Quantity, rel: float = 1e-12, abs_tol: float = 0.0) -> bool:
    if _CHECKS and a.dim != b.dim:
        raise DimensionMismatch(f"cannot compare {a.dim!s} and {b.dim!s}")
    return math.isclose(a.value, b.value, rel_tol=rel, abs_tol=abs_tol)
