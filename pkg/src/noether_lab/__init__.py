"""Spacetime symmetries, Lagrangian equivalence and fixed-endpoint variational solves."""

from .groups import AffineMap, Generator, exp_generator, is_member, standard_basis
from .lagrangians import (
    CounterexampleB,
    FreeNonRel,
    FreeRel,
    Lagrangian,
    SamplingBox,
    UserLagrangian,
    are_equivalent,
    is_full_time_derivative,
)
from .quantities import Dim, Quantity, parse_quantity
from .spacetime import Event, FourVector, ModelKind
from .symmetry import Status, certify_free, check_finite_symmetry, check_infinitesimal_symmetry
from .variational import WorldPath, action, action_gradient, el_residual, proper_time, solve_stationary

__all__ = [
    "AffineMap",
    "CounterexampleB",
    "Dim",
    "Event",
    "FourVector",
    "FreeNonRel",
    "FreeRel",
    "Generator",
    "Lagrangian",
    "ModelKind",
    "Quantity",
    "SamplingBox",
    "Status",
    "UserLagrangian",
    "WorldPath",
    "action",
    "action_gradient",
    "are_equivalent",
    "certify_free",
    "check_finite_symmetry",
    "check_infinitesimal_symmetry",
    "el_residual",
    "exp_generator",
    "is_full_time_derivative",
    "is_member",
    "parse_quantity",
    "proper_time",
    "solve_stationary",
    "standard_basis",
]
