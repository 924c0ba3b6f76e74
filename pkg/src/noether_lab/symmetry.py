"""Symmetry tests for Lagrangians under affine spacetime maps.

A map is a symmetry when it changes the Lagrangian only by a full
time-derivative. For an affine map ``F`` with linear part ``Lin`` the change is

    delta(x, w) = L(F x, Lin w) - L(x, w)

on the homogeneous extension (homogeneity absorbs any rescaling of time).
The infinitesimal version along a generator ``H`` is the directional derivative

    deltaL(x, w) = dL/dx . H(x) + dL/dw . (H w).

Both are handed to :func:`~noether_lab.lagrangians.is_full_time_derivative`.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import autodiff
from .groups import (
    AffineMap,
    Generator,
    check_algebra,
    exp_generator,
    is_member,
    random_generator,
    standard_basis,
)
from .lagrangians import (
    FTDReport,
    Lagrangian,
    SamplingBox,
    is_full_time_derivative,
    reference_scale,
    sample_box,
)
from .spacetime import WrongModel

__all__ = [
    "Status",
    "SymmetryVerdict",
    "CertificationReport",
    "NotAGroupElement",
    "EXACT_TOL",
    "SYMMETRY_TOL",
    "check_finite_symmetry",
    "check_infinitesimal_symmetry",
    "certify_free",
    "finite_delta",
    "infinitesimal_delta",
]

EXACT_TOL = 1e-10
SYMMETRY_TOL = 1e-6


class NotAGroupElement(ValueError):
    pass


class Status(enum.Enum):
    EXACT = "exact_invariance"
    FULL_TIME_DERIVATIVE = "up_to_full_time_derivative"
    NOT_A_SYMMETRY = "not_a_symmetry"

    @property
    def is_symmetry(self) -> bool:
        return self is not Status.NOT_A_SYMMETRY


@dataclass
class SymmetryVerdict:
    status: Status
    name: str
    max_delta: float  # relative to scale
    lin_residual: float
    curl_residual: float
    witness_norm: float
    scale: float
    seed: int
    exact_tol: float = EXACT_TOL
    symmetry_tol: float = SYMMETRY_TOL
    ftd: FTDReport | None = field(default=None, repr=False)

    @property
    def is_symmetry(self) -> bool:
        return self.status.is_symmetry

    @property
    def witness(self):
        return self.ftd.witness if self.ftd is not None else None


def finite_delta(L: Lagrangian, F: AffineMap):
    def kernel(x: Sequence[Any], w: Sequence[Any]) -> Any:
        return L.kernel(F.point_components(x), F.vector_components(w)) - L.kernel(x, w)

    return kernel


def infinitesimal_delta(L: Lagrangian, H: Generator):
    def lagr(z: Sequence[Any]) -> Any:
        return L.kernel(z[:4], z[4:])

    def kernel(x: Sequence[Any], w: Sequence[Any]) -> Any:
        return autodiff.directional(lagr, list(x) + list(w), H.vector_field(x) + H.linear_apply(w))

    return kernel


def _verdict(L: Lagrangian, kernel, name: str, box: SamplingBox) -> SymmetryVerdict:
    samples = sample_box(box, L.model)
    scale = reference_scale([L], samples)
    ftd = is_full_time_derivative(kernel, L.model, box, scale=scale, samples=samples)
    denom = scale if scale > 0.0 else 1.0
    max_delta = ftd.max_abs / denom
    if max_delta < EXACT_TOL:
        status = Status.EXACT
    elif ftd.lin_residual <= SYMMETRY_TOL and ftd.curl_residual <= SYMMETRY_TOL:
        status = Status.FULL_TIME_DERIVATIVE
    else:
        status = Status.NOT_A_SYMMETRY
    return SymmetryVerdict(
        status=status,
        name=name,
        max_delta=max_delta,
        lin_residual=ftd.lin_residual,
        curl_residual=ftd.curl_residual,
        witness_norm=ftd.witness.norm,
        scale=scale,
        seed=box.seed,
        ftd=ftd,
    )


def check_finite_symmetry(
    L: Lagrangian,
    F: AffineMap,
    box: SamplingBox = SamplingBox(),
    require_member: bool = True,
    name: str = "map",
) -> SymmetryVerdict:
    if F.model is not L.model:
        raise WrongModel("map and Lagrangian belong to different models")
    if require_member and not is_member(F):
        raise NotAGroupElement(f"{name} is not a proper {'Noether' if L.model.value == 'nonrel' else 'Poincare'} map")
    return _verdict(L, finite_delta(L, F), name, box)


def check_infinitesimal_symmetry(L: Lagrangian, H: Generator, box: SamplingBox = SamplingBox()) -> SymmetryVerdict:
    if H.model is not L.model:
        raise WrongModel("generator and Lagrangian belong to different models")
    check_algebra(H)
    return _verdict(L, infinitesimal_delta(L, H), H.name or "generator", box)


@dataclass
class CertificationReport:
    lagrangian: str
    model: str
    directions: list[SymmetryVerdict]
    finite: list[SymmetryVerdict]
    seed: int

    @property
    def all_pass(self) -> bool:
        return all(v.is_symmetry for v in self.directions + self.finite)

    def passed(self, prefix: str = "") -> list[str]:
        return [v.name for v in self.directions if v.name.startswith(prefix) and v.is_symmetry]

    def failed(self, prefix: str = "") -> list[str]:
        return [v.name for v in self.directions + self.finite if v.name.startswith(prefix) and not v.is_symmetry]

    def by_name(self) -> dict[str, SymmetryVerdict]:
        return {v.name: v for v in self.directions + self.finite}

    def to_text(self) -> str:
        lines = [f"lagrangian: {self.lagrangian}", f"model: {self.model}", f"seed: {self.seed}"]
        for v in self.directions + self.finite:
            lines.append(
                f"{v.name:<14} {v.status.value:<28} lin={v.lin_residual:.17g} curl={v.curl_residual:.17g} "
                f"witness={v.witness_norm:.17g} max_delta={v.max_delta:.17g}"
            )
        n_dir = sum(v.is_symmetry for v in self.directions)
        n_fin = sum(v.is_symmetry for v in self.finite)
        lines.append(f"directions passed: {n_dir}/{len(self.directions)}")
        lines.append(f"finite elements passed: {n_fin}/{len(self.finite)}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["generator", "status", "lin_residual", "curl_residual", "witness_norm", "seed"])
        for v in self.directions + self.finite:
            writer.writerow(
                [v.name, v.status.value, f"{v.lin_residual:.17g}", f"{v.curl_residual:.17g}",
                 f"{v.witness_norm:.17g}", v.seed]
            )
        return buf.getvalue()


def certify_free(
    L: Lagrangian,
    box: SamplingBox = SamplingBox(),
    n_random: int = 20,
    seed: int = 0,
    random_scale: float = 0.5,
) -> CertificationReport:
    """Check all ten basis directions and ``n_random`` random finite group elements."""
    directions = [check_infinitesimal_symmetry(L, H, box) for H in standard_basis(L.model)]
    rng = np.random.default_rng(seed)
    finite = []
    for k in range(n_random):
        F = exp_generator(random_generator(L.model, rng, random_scale))
        finite.append(check_finite_symmetry(L, F, box, name=f"random_{k}"))
    return CertificationReport(L.name, L.model.value, directions, finite, seed)
