"""Affine spacetime models in one canonical chart.

Both models store vectors as four floats in a fixed chart: slot 0 is the
timelike direction, slots 1-3 are spacelike. A :class:`FourVector` also
carries an overall dimension ``D``; the time slot then has dimension ``D*s``
and the space slots ``D*m`` (non-relativistic), or all four slots ``D*s``
(relativistic, after identifying meters with seconds).

Frame independence is not built into the storage. It is checked by
covariance tests against the group actions in :mod:`noether_lab.groups`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .quantities import (
    DIMENSIONLESS,
    METER,
    RATE,
    SECOND,
    Dim,
    DimensionMismatch,
    Quantity,
    checks_enabled,
    collapse_relativistic,
    parse_quantity,
)

__all__ = [
    "ModelKind",
    "FourVector",
    "Event",
    "WrongModel",
    "NotSpacelike",
    "NotFutureLike",
    "ETA",
    "CONE_MARGIN",
    "tau_of",
    "b_inner",
    "g_inner",
    "normalize_to_V1",
    "is_future_like",
    "is_velocity",
    "chart_norm",
    "future_margin",
    "parse_vector",
    "four_vector",
    "event",
    "velocity",
]

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])
ETA.setflags(write=False)

# strict future-likeness margin on chart-normalized data
CONE_MARGIN = 1e-12


class ModelKind(enum.Enum):
    NONREL = "nonrel"
    REL = "rel"

    @classmethod
    def parse(cls, text: str) -> ModelKind:
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "nonrel": cls.NONREL,
            "nonrelativistic": cls.NONREL,
            "galilean": cls.NONREL,
            "rel": cls.REL,
            "relativistic": cls.REL,
            "lorentzian": cls.REL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown model {text!r}") from None


class WrongModel(ValueError):
    pass


class NotSpacelike(ValueError):
    pass


class NotFutureLike(ValueError):
    pass


def _slot_dims(model: ModelKind, dim: Dim) -> tuple[Dim, Dim]:
    if model is ModelKind.REL:
        d = collapse_relativistic(dim * SECOND)
        return d, d
    return dim * SECOND, dim * METER


@dataclass(frozen=True)
class FourVector:
    """Element of M (``dim`` dimensionless) or of M/I (``dim`` 1/s), etc."""

    values: np.ndarray
    model: ModelKind
    dim: Dim = DIMENSIONLESS

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float).reshape(4)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.model is ModelKind.REL:
            object.__setattr__(self, "dim", collapse_relativistic(self.dim * SECOND) / SECOND)

    @classmethod
    def from_quantities(cls, comps: Sequence[Quantity], model: ModelKind) -> FourVector:
        if len(comps) != 4:
            raise ValueError("a four-vector needs exactly 4 components")
        if model is ModelKind.REL:
            dims = {collapse_relativistic(c.dim) for c in comps if c.value != 0.0}
            if len(dims) > 1 and checks_enabled():
                raise DimensionMismatch(f"inhomogeneous relativistic components: {dims}")
            d = dims.pop() if dims else SECOND
            return cls(np.array([c.value for c in comps]), model, d / SECOND)
        t_dim = comps[0].dim
        space = {c.dim for c in comps[1:] if c.value != 0.0}
        if len(space) > 1 and checks_enabled():
            raise DimensionMismatch(f"inhomogeneous spatial components: {space}")
        if comps[0].value == 0.0 and space:
            dim = space.pop() / METER
        else:
            dim = t_dim / SECOND
            if space and checks_enabled() and space.pop() != dim * METER:
                raise DimensionMismatch("time and space slots do not share a scale dimension")
        return cls(np.array([c.value for c in comps]), model, dim)

    def components(self) -> list[Quantity]:
        td, sd = _slot_dims(self.model, self.dim)
        return [Quantity(float(self.values[0]), td)] + [Quantity(float(v), sd) for v in self.values[1:]]

    def _check(self, other: FourVector) -> None:
        if other.model is not self.model:
            raise WrongModel("cannot mix relativistic and non-relativistic vectors")
        if checks_enabled() and other.dim != self.dim:
            raise DimensionMismatch(f"vector dimensions differ: {self.dim} vs {other.dim}")

    def __add__(self, other: FourVector) -> FourVector:
        self._check(other)
        return FourVector(self.values + other.values, self.model, self.dim)

    def __sub__(self, other: FourVector) -> FourVector:
        self._check(other)
        return FourVector(self.values - other.values, self.model, self.dim)

    def __neg__(self) -> FourVector:
        return FourVector(-self.values, self.model, self.dim)

    def scale(self, factor: float | Quantity) -> FourVector:
        if isinstance(factor, Quantity):
            return FourVector(self.values * factor.value, self.model, self.dim * factor.dim)
        return FourVector(self.values * float(factor), self.model, self.dim)

    def __mul__(self, factor: float | Quantity) -> FourVector:
        return self.scale(factor)

    __rmul__ = __mul__

    def __truediv__(self, factor: float | Quantity) -> FourVector:
        if isinstance(factor, Quantity):
            return FourVector(self.values / factor.value, self.model, self.dim / factor.dim)
        return FourVector(self.values / float(factor), self.model, self.dim)

    def allclose(self, other: FourVector, atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=atol))


@dataclass(frozen=True)
class Event:
    """A spacetime point, stored as its displacement from the chart origin."""

    displacement: FourVector = field(default_factory=lambda: FourVector(np.zeros(4), ModelKind.NONREL))

    def __post_init__(self) -> None:
        if checks_enabled() and self.displacement.dim != DIMENSIONLESS:
            raise DimensionMismatch("an event displacement must have dimension of M")

    @classmethod
    def at(cls, coords: Sequence[float], model: ModelKind) -> Event:
        return cls(FourVector(np.asarray(coords, dtype=float), model))

    @property
    def model(self) -> ModelKind:
        return self.displacement.model

    @property
    def coords(self) -> np.ndarray:
        return self.displacement.values

    def __sub__(self, other: Event) -> FourVector:
        return self.displacement - other.displacement

    def __add__(self, w: FourVector) -> Event:
        return Event(self.displacement + w)


def tau_of(w: FourVector) -> Quantity:
    """Time evaluation; kernel is the spacelike subspace."""
    if w.model is not ModelKind.NONREL:
        raise WrongModel("tau is only defined in the non-relativistic model")
    return Quantity(float(w.values[0]), w.dim * SECOND)


def b_inner(e1: FourVector, e2: FourVector) -> Quantity:
    for e in (e1, e2):
        if e.model is not ModelKind.NONREL:
            raise WrongModel("the Euclidean structure is non-relativistic")
        if e.values[0] != 0.0:
            raise NotSpacelike(f"tau(e) = {e.values[0]!r} != 0")
    return Quantity(float(e1.values[1:] @ e2.values[1:]), e1.dim * e2.dim * METER * METER)


def g_inner(w1: FourVector, w2: FourVector) -> Quantity:
    """Lorentz form with signature (-,+,+,+)."""
    if w1.model is not ModelKind.REL or w2.model is not ModelKind.REL:
        raise WrongModel("the Lorentz form is relativistic")
    return Quantity(float(w1.values @ ETA @ w2.values), w1.dim * w2.dim * SECOND * SECOND)


def chart_norm(values: np.ndarray) -> np.ndarray:
    return np.linalg.norm(values, axis=-1)


def future_margin(values: np.ndarray, model: ModelKind) -> np.ndarray:
    """Normalized distance into the future cone; positive inside.

    nonrel: w0 / |w|; rel: (w0 - |w_space|) / |w|, i.e. zero on the light cone.
    """
    values = np.asarray(values, dtype=float)
    norm = chart_norm(values)
    norm = np.where(norm > 0.0, norm, 1.0)
    if model is ModelKind.NONREL:
        return values[..., 0] / norm
    return (values[..., 0] - np.linalg.norm(values[..., 1:], axis=-1)) / norm


def is_future_like(w: FourVector | np.ndarray, model: ModelKind | None = None) -> bool | np.ndarray:
    if isinstance(w, FourVector):
        return bool(future_margin(w.values, w.model) > CONE_MARGIN)
    return future_margin(w, model) > CONE_MARGIN


def is_velocity(u: FourVector, tol: float = 1e-12) -> bool:
    """Membership in V(1) for the vector's model."""
    if checks_enabled() and u.dim != RATE:
        return False
    if u.model is ModelKind.NONREL:
        return bool(u.values[0] == 1.0)
    return bool(abs(u.values @ ETA @ u.values + 1.0) <= tol and u.values[0] > 0.0)


def normalize_to_V1(w: FourVector) -> FourVector:
    """Rescale a future-like vector onto V(1)."""
    if not is_future_like(w):
        raise NotFutureLike(f"{w.values} is not future-like")
    if w.model is ModelKind.NONREL:
        return w / tau_of(w)
    norm = np.sqrt(-(w.values @ ETA @ w.values))
    return FourVector(w.values / norm, w.model, RATE)


# -- literal syntax `[t, x, y, z]` with unit suffixes --------------------------------

_VECTOR = re.compile(r"^\s*\[(?P<body>[^\[\]]*)\]\s*$")


def parse_vector(text: str, model: ModelKind) -> FourVector:
    m = _VECTOR.match(text)
    if m is None:
        raise ValueError(f"not a vector literal: {text!r}")
    parts = [p for p in m.group("body").split(",")]
    if len(parts) != 4:
        raise ValueError(f"expected 4 components, got {len(parts)} in {text!r}")
    return FourVector.from_quantities([parse_quantity(p) for p in parts], model)


def four_vector(coords: Sequence[float], model: ModelKind, dim: Dim = DIMENSIONLESS) -> FourVector:
    return FourVector(np.asarray(coords, dtype=float), model, dim)


def event(coords: Sequence[float], model: ModelKind) -> Event:
    return Event.at(coords, model)


def velocity(coords: Sequence[float], model: ModelKind) -> FourVector:
    """A vector of M/I in chart units (nonrel: time slot 1, space in m/s)."""
    return FourVector(np.asarray(coords, dtype=float), model, RATE)
