"""Generators and finite elements of the proper Noether and Poincare groups.

Generators and maps live in the canonical chart as plain float arrays: time in
seconds, space in meters (relativistic: everything in seconds). A non-relativistic
boost generator therefore carries a velocity in m/s in its time column.

The affine exponential is summed as a series on the 5x5 augmented matrix
``[[H, h], [0, 0]]``, which reproduces both the linear series for the
underlying linear map and the translation series
``sum_{n>=1} (sH)^(n-1) s h / n!``.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .quantities import DIMENSIONLESS, checks_enabled, DimensionMismatch
from .spacetime import ETA, Event, FourVector, ModelKind, WrongModel, parse_vector

__all__ = [
    "Generator",
    "AffineMap",
    "AlgebraViolation",
    "SeriesDivergence",
    "algebra_residual",
    "check_algebra",
    "exp_generator",
    "is_member",
    "membership_report",
    "standard_basis",
    "basis_names",
    "apply_affine",
    "apply_linear",
    "compose",
    "commutator",
    "closure_residual",
    "span_rank",
    "translation",
    "rotation",
    "boost",
    "random_generator",
    "parse_generator",
]

ALGEBRA_TOL = 1e-10
MEMBER_TOL = 1e-10
SERIES_MAX_TERMS = 40


class AlgebraViolation(ValueError):
    pass


class SeriesDivergence(ArithmeticError):
    """The exponential series did not settle within the term cap."""


@dataclass(frozen=True)
class Generator:
    """Affine Lie-algebra element ``H(x) = linear @ (x - o) + translation``."""

    linear: np.ndarray
    translation: np.ndarray
    model: ModelKind
    name: str = ""

    def __post_init__(self) -> None:
        lin = np.array(self.linear, dtype=float).reshape(4, 4)
        tr = np.array(self.translation, dtype=float).reshape(4)
        lin.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tr)

    def __add__(self, other: Generator) -> Generator:
        _same_model(self.model, other.model)
        return Generator(self.linear + other.linear, self.translation + other.translation, self.model)

    def __mul__(self, c: float) -> Generator:
        return Generator(self.linear * c, self.translation * c, self.model, self.name)

    __rmul__ = __mul__

    def vector_field(self, x: Sequence[Any]) -> list[Any]:
        """``H(x)`` for chart coordinates (works on Duals)."""
        return _affine_combo(self.linear, self.translation, x)

    def linear_apply(self, w: Sequence[Any]) -> list[Any]:
        return _affine_combo(self.linear, None, w)

    def augmented(self) -> np.ndarray:
        a = np.zeros((5, 5))
        a[:4, :4] = self.linear
        a[:4, 4] = self.translation
        return a

    def vectorized(self) -> np.ndarray:
        return np.concatenate([self.linear.ravel(), self.translation])


@dataclass(frozen=True)
class AffineMap:
    """``x -> linear @ x + translation`` in chart coordinates."""

    linear: np.ndarray = field(default_factory=lambda: np.eye(4))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(4))
    model: ModelKind = ModelKind.NONREL

    def __post_init__(self) -> None:
        lin = np.array(self.linear, dtype=float).reshape(4, 4)
        tr = np.array(self.translation, dtype=float).reshape(4)
        lin.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "translation", tr)

    @classmethod
    def identity(cls, model: ModelKind) -> AffineMap:
        return cls(np.eye(4), np.zeros(4), model)

    def __matmul__(self, other: AffineMap) -> AffineMap:
        return compose(self, other)

    def inverse(self) -> AffineMap:
        inv = np.linalg.inv(self.linear)
        return AffineMap(inv, -inv @ self.translation, self.model)

    def augmented(self) -> np.ndarray:
        a = np.eye(5)
        a[:4, :4] = self.linear
        a[:4, 4] = self.translation
        return a

    def apply_points(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.linear.T + self.translation

    def apply_vectors(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(w) @ self.linear.T

    def point_components(self, x: Sequence[Any]) -> list[Any]:
        return _affine_combo(self.linear, self.translation, x)

    def vector_components(self, w: Sequence[Any]) -> list[Any]:
        return _affine_combo(self.linear, None, w)


def _affine_combo(mat: np.ndarray, shift: np.ndarray | None, x: Sequence[Any]) -> list[Any]:
    # skips exact zeros so sparse generators stay cheap on Dual inputs
    out = []
    for i in range(4):
        acc: Any = 0.0
        for j in range(4):
            c = mat[i, j]
            if c == 0.0:
                continue
            term = x[j] if c == 1.0 else c * x[j]
            acc = term if isinstance(acc, float) and acc == 0.0 else acc + term
        if shift is not None and shift[i] != 0.0:
            acc = acc + shift[i]
        out.append(acc)
    return out


def _same_model(a: ModelKind, b: ModelKind) -> None:
    if a is not b:
        raise WrongModel(f"model mismatch: {a.value} vs {b.value}")


def algebra_residual(gen: Generator) -> float:
    """Distance of the linear part from the model's Lie algebra."""
    h = gen.linear
    if gen.model is ModelKind.NONREL:
        # tau . H = 0 and H restricted to E antisymmetric
        spatial = h[1:, 1:]
        return float(max(np.abs(h[0]).max(), np.abs(spatial + spatial.T).max()))
    return float(np.abs(h.T @ ETA + ETA @ h).max())


def check_algebra(gen: Generator, tol: float = ALGEBRA_TOL) -> None:
    res = algebra_residual(gen)
    if res > tol:
        raise AlgebraViolation(f"generator {gen.name or ''} leaves the Lie algebra (residual {res:.3e})")


def exp_generator(gen: Generator, s: float = 1.0, tol: float = ALGEBRA_TOL) -> AffineMap:
    """One-parameter subgroup element ``e^{sH}``."""
    check_algebra(gen, tol)
    a = s * gen.augmented()
    # scale into the unit ball so the series converges well inside the term cap
    norm = float(np.abs(a).sum(axis=0).max())
    squarings = max(0, math.ceil(math.log2(norm))) if np.isfinite(norm) and norm > 1.0 else 0
    a = a / 2.0 ** squarings
    total = np.eye(5)
    term = np.eye(5)
    for n in range(1, SERIES_MAX_TERMS + 1):
        term = term @ a / n
        total = total + term
        tn = np.abs(term).max()
        if tn == 0.0 or tn < 1e-16 * np.abs(total).max():
            break
    else:
        raise SeriesDivergence(f"exponential series not converged after {SERIES_MAX_TERMS} terms")
    for _ in range(squarings):
        total = total @ total
    return AffineMap(total[:4, :4], total[:4, 4], gen.model)


def membership_report(lmap: AffineMap, tol: float = MEMBER_TOL) -> dict[str, bool]:
    lin = lmap.linear
    if lmap.model is ModelKind.NONREL:
        rot = lin[1:, 1:]
        return {
            "preserves_tau": bool(np.abs(lin[0] - np.array([1.0, 0.0, 0.0, 0.0])).max() <= tol),
            "orthogonal_on_E": bool(np.abs(rot.T @ rot - np.eye(3)).max() <= tol),
            "orientation": bool(abs(np.linalg.det(rot) - 1.0) <= tol),
        }
    return {
        "lorentz": bool(np.abs(lin.T @ ETA @ lin - ETA).max() <= tol * max(1.0, np.abs(lin).max() ** 2)),
        "orientation": bool(abs(np.linalg.det(lin) - 1.0) <= tol * max(1.0, np.abs(lin).max() ** 4)),
        "arrow": bool(lin[0, 0] > 0.0),
    }


def is_member(lmap: AffineMap, tol: float = MEMBER_TOL) -> bool:
    return all(membership_report(lmap, tol).values())


def compose(a: AffineMap, b: AffineMap) -> AffineMap:
    """``a o b``."""
    _same_model(a.model, b.model)
    return AffineMap(a.linear @ b.linear, a.linear @ b.translation + a.translation, a.model)


def apply_affine(lmap: AffineMap, x: Event) -> Event:
    _same_model(lmap.model, x.model)
    return Event(FourVector(lmap.apply_points(x.coords), x.model))


def apply_linear(lmap: AffineMap, w: FourVector) -> FourVector:
    _same_model(lmap.model, w.model)
    return FourVector(lmap.apply_vectors(w.values), w.model, w.dim)


# -- named generators -----------------------------------------------------------------


def translation(h: Sequence[float], model: ModelKind) -> Generator:
    h = np.asarray(h, dtype=float)
    return Generator(np.zeros((4, 4)), h, model, name="translation")


def rotation(axis: int, model: ModelKind) -> Generator:
    if axis not in (1, 2, 3):
        raise ValueError("rotation axis must be 1, 2 or 3")
    i, j = [k for k in (1, 2, 3) if k != axis]
    if axis == 2:
        i, j = j, i  # right-handed: (3,1) plane for axis 2
    h = np.zeros((4, 4))
    h[i, j] = -1.0
    h[j, i] = 1.0
    return Generator(h, np.zeros(4), model, name=f"rotation_{axis}")


def boost(axis: int, model: ModelKind) -> Generator:
    if axis not in (1, 2, 3):
        raise ValueError("boost axis must be 1, 2 or 3")
    h = np.zeros((4, 4))
    h[axis, 0] = 1.0  # Galilean: u -> u + s e_axis (m/s)
    if model is ModelKind.REL:
        h[0, axis] = 1.0
    return Generator(h, np.zeros(4), model, name=f"boost_{axis}")


def basis_names() -> list[str]:
    return [f"translation_{k}" for k in range(4)] + [f"rotation_{k}" for k in (1, 2, 3)] + [
        f"boost_{k}" for k in (1, 2, 3)
    ]


def standard_basis(model: ModelKind) -> list[Generator]:
    """Four translations, three rotations, three boosts."""
    gens = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        gens.append(Generator(np.zeros((4, 4)), e, model, name=f"translation_{k}"))
    gens += [rotation(k, model) for k in (1, 2, 3)]
    gens += [boost(k, model) for k in (1, 2, 3)]
    return gens


def commutator(a: Generator, b: Generator) -> Generator:
    """Bracket of affine vector fields: linear part [A, B], translation A b - B a."""
    _same_model(a.model, b.model)
    lin = a.linear @ b.linear - b.linear @ a.linear
    tr = a.linear @ b.translation - b.linear @ a.translation
    return Generator(lin, tr, a.model)


def span_rank(gens: Sequence[Generator], rel_threshold: float = 1e-8) -> int:
    mat = np.stack([g.vectorized() for g in gens])
    sv = np.linalg.svd(mat, compute_uv=False)
    return int((sv > rel_threshold * sv.max()).sum()) if sv.size and sv.max() > 0 else 0


def closure_residual(gens: Sequence[Generator]) -> float:
    """Largest least-squares residual of re-expanding all brackets in the basis."""
    basis = np.stack([g.vectorized() for g in gens], axis=1)
    worst = 0.0
    for a in gens:
        for b in gens:
            target = commutator(a, b).vectorized()
            coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
            worst = max(worst, float(np.abs(basis @ coef - target).max()))
    return worst


def random_generator(model: ModelKind, rng: np.random.Generator, scale: float = 1.0) -> Generator:
    coef = rng.normal(size=10) * scale
    lin = np.zeros((4, 4))
    tr = np.zeros(4)
    for c, g in zip(coef, standard_basis(model)):
        lin += c * g.linear
        tr += c * g.translation
    return Generator(lin, tr, model, name="random")


# -- literal syntax --------------------------------------------------------------------

_NAMED = re.compile(r"^\s*(?P<kind>rotation|boost)\s+axis\s*=\s*(?P<axis>[123])\s*$")
_TRANSLATION = re.compile(r"^\s*translation\s+(?P<vec>\[.*\])\s*$")
_RAW = re.compile(r"^\s*matrix\s+(?P<mat>\[\[.*\]\])\s+(?P<vec>\[.*\])\s*$")


def parse_generator(text: str, model: ModelKind) -> Generator:
    """Parse ``translation [t,x,y,z]``, ``rotation axis=k``, ``boost axis=k`` or
    ``matrix [[...],...] [t,x,y,z]`` (raw chart entries)."""
    m = _NAMED.match(text)
    if m:
        axis = int(m.group("axis"))
        return rotation(axis, model) if m.group("kind") == "rotation" else boost(axis, model)
    m = _TRANSLATION.match(text)
    if m:
        vec = parse_vector(m.group("vec"), model)
        if checks_enabled() and vec.dim != DIMENSIONLESS:
            raise DimensionMismatch("a translation must be a vector of M")
        return translation(vec.values, model)
    m = _RAW.match(text)
    if m:
        mat = np.array(json.loads(m.group("mat")), dtype=float)
        if mat.shape != (4, 4):
            raise ValueError("raw generator matrix must be 4x4")
        vec = parse_vector(m.group("vec"), model)
        return Generator(mat, vec.values, model, name="raw")
    raise ValueError(f"cannot parse generator literal {text!r}")

