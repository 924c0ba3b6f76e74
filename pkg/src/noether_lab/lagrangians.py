"""Lagrangians on the future cone, full time-derivatives and equivalence.

Every Lagrangian here is the positively degree-1 homogeneous extension of a
physical Lagrangian given on V(1):

    nonrel:  L(x, w) = L(x, w / w0) * w0
    rel:     L(x, w) = L(x, w / |w|) * |w|,   |w| = sqrt(w0^2 - |w_space|^2)

The extension is built into each ``kernel``; users of :class:`UserLagrangian`
only write the V(1) restriction.

Kernels take lists of four components for ``x`` and ``w`` whose entries may be
numpy arrays (one lane per sample) or :class:`~noether_lab.autodiff.Dual`
numbers, so values and exact derivatives share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.stats import qmc

from . import autodiff
from .expressions import Expression, parse_expression
from .quantities import MASS, RATE, DimensionMismatch, Quantity, checks_enabled, collapse_relativistic
from .spacetime import (
    CONE_MARGIN,
    Event,
    FourVector,
    ModelKind,
    NotFutureLike,
    WrongModel,
    future_margin,
)

__all__ = [
    "Lagrangian",
    "FreeNonRel",
    "FreeRel",
    "CounterexampleB",
    "UserLagrangian",
    "KernelLagrangian",
    "FullTimeDerivative",
    "SamplingBox",
    "SamplingDegenerate",
    "Witness",
    "FTDReport",
    "evaluate",
    "grad_x",
    "grad_w",
    "is_full_time_derivative",
    "are_equivalent",
    "equivalence_report",
    "sample_box",
    "Samples",
    "reference_scale",
    "homogeneous_norm",
]

NEAR_CONE = 1e-9

Kernel = Callable[[Sequence[Any], Sequence[Any]], Any]


def homogeneous_norm(w: Sequence[Any], model: ModelKind) -> Any:
    """The degree-1 scale of ``w``: tau(w) or the Lorentz length."""
    if model is ModelKind.NONREL:
        return w[0]
    return autodiff.sqrt(w[0] * w[0] - w[1] * w[1] - w[2] * w[2] - w[3] * w[3])


def _mass_value(m: float | Quantity, model: ModelKind) -> float:
    if isinstance(m, Quantity):
        want = MASS if model is ModelKind.NONREL else RATE
        got = m.dim if model is ModelKind.NONREL else collapse_relativistic(m.dim)
        if checks_enabled() and got != want:
            raise DimensionMismatch(f"mass must have dimension {want}, got {m.dim}")
        return float(m.value)
    return float(m)


def _split(a: np.ndarray) -> list[np.ndarray]:
    return [a[..., k] for k in range(4)]


class Lagrangian:
    """Base class. Subclasses implement :meth:`kernel` (already homogeneous)."""

    model: ModelKind
    name: str = "lagrangian"

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        raise NotImplementedError

    # -- array interface ---------------------------------------------------------------

    def check_domain(self, w: np.ndarray) -> None:
        w = np.asarray(w, dtype=float)
        margin = future_margin(w, self.model)
        if np.any(~(margin > CONE_MARGIN)):
            raise NotFutureLike("velocity argument is not future-like")
        if self.model is ModelKind.REL:
            nrm = np.sqrt(np.maximum(w[..., 0] ** 2 - (w[..., 1:] ** 2).sum(-1), 0.0))
            if np.any(nrm < NEAR_CONE * np.linalg.norm(w, axis=-1)):
                raise NotFutureLike("velocity argument too close to the light cone")

    def __call__(self, x: np.ndarray, w: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        self.check_domain(w)
        shape = np.broadcast_shapes(x.shape[:-1], w.shape[:-1])
        return np.broadcast_to(self.kernel(_split(x), _split(w)), shape).astype(float)

    def jet(self, x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, d/dx and d/dw (forward mode, exact)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        self.check_domain(w)
        x, w = np.broadcast_arrays(x, w)
        val, g = autodiff.value_and_grad(lambda z: self.kernel(z[:4], z[4:]), _split(x) + _split(w))
        return val, g[..., :4], g[..., 4:]

    def hessian(self, x: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Value, gradient (8) and Hessian (8x8) in the stacked variable (x, w)."""
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        self.check_domain(w)
        x, w = np.broadcast_arrays(x, w)
        return autodiff.value_grad_hessian(lambda z: self.kernel(z[:4], z[4:]), _split(x) + _split(w))

    def __sub__(self, other: Lagrangian) -> KernelLagrangian:
        if other.model is not self.model:
            raise WrongModel("cannot subtract Lagrangians of different models")
        return KernelLagrangian(self.model, lambda x, w: self.kernel(x, w) - other.kernel(x, w),
                                name=f"({self.name}) - ({other.name})")


class KernelLagrangian(Lagrangian):
    """Wraps an arbitrary homogeneous kernel."""

    def __init__(self, model: ModelKind, kernel: Kernel, name: str = "kernel") -> None:
        self.model = model
        self._kernel = kernel
        self.name = name

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        return self._kernel(x, w)


class FreeNonRel(Lagrangian):
    """Half m |u - c|^2 with mass m (s/m^2) and absolute velocity c."""

    def __init__(self, m: float | Quantity = 1.0, c: Sequence[float] | FourVector | None = None) -> None:
        self.model = ModelKind.NONREL
        self.m = _mass_value(m, self.model)
        if c is None:
            c = np.zeros(3)
        elif isinstance(c, FourVector):
            if c.values[0] != 1.0:
                raise ValueError("c must lie in V(1)")
            c = c.values[1:]
        else:
            c = np.asarray(c, dtype=float)
            if c.shape == (4,):
                if c[0] != 1.0:
                    raise ValueError("c must lie in V(1)")
                c = c[1:]
        self.c = np.asarray(c, dtype=float).reshape(3)
        self.name = f"free_nonrel(m={self.m:g}, c={self.c.tolist()})"

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        w0 = w[0]
        total = 0.0
        for k in range(3):
            d = w[k + 1] - self.c[k] * w0 if self.c[k] != 0.0 else w[k + 1]
            total = d * d if k == 0 else total + d * d
        # 1/2 m |w_s/w0 - c|^2 w0 = 1/2 m |w_s - c w0|^2 / w0
        return (0.5 * self.m) * total / w0


class FreeRel(Lagrangian):
    """m |w|: mass (1/s) times the Lorentz length of the velocity."""

    def __init__(self, m: float | Quantity = 1.0) -> None:
        self.model = ModelKind.REL
        self.m = _mass_value(m, self.model)
        self.name = f"free_rel(m={self.m:g})"

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        return self.m * homogeneous_norm(w, self.model)


class CounterexampleB(Lagrangian):
    """(x - o) . B . w + phi(w) with antisymmetric B.

    Translation symmetric, yet not equivalent to any x-independent Lagrangian
    when B != 0. ``B`` and ``o`` are chart numbers.
    """

    def __init__(
        self,
        B: np.ndarray,
        o: Sequence[float] | Event | None = None,
        phi: str | Lagrangian = "kinetic",
        m: float | Quantity = 1.0,
        model: ModelKind = ModelKind.NONREL,
    ) -> None:
        B = np.array(B, dtype=float).reshape(4, 4)
        if np.any(B + B.T != 0.0):
            raise ValueError("B must be exactly antisymmetric")
        B.setflags(write=False)
        self.B = B
        if isinstance(phi, Lagrangian):
            model = phi.model
            self.phi = phi
        elif phi == "kinetic":
            if model is not ModelKind.NONREL:
                raise WrongModel("phi='kinetic' is the non-relativistic free Lagrangian")
            self.phi = FreeNonRel(m)
        elif phi in ("proper", "proper_time"):
            if model is not ModelKind.REL:
                raise WrongModel("phi='proper' is the relativistic free Lagrangian")
            self.phi = FreeRel(m)
        else:
            raise ValueError(f"unknown phi kind {phi!r}")
        self.model = model
        if o is None:
            o = np.zeros(4)
        elif isinstance(o, Event):
            o = o.coords
        self.o = np.asarray(o, dtype=float).reshape(4)
        self.name = f"counterexample_B(phi={self.phi.name})"

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        total: Any = 0.0
        for i in range(4):
            row = 0.0
            nonzero = False
            for j in range(4):
                if self.B[i, j] != 0.0:
                    term = self.B[i, j] * w[j]
                    row = term if not nonzero else row + term
                    nonzero = True
            if nonzero:
                xi = x[i] - self.o[i] if self.o[i] != 0.0 else x[i]
                total = total + xi * row
        return total + self.phi.kernel(x, w)


class UserLagrangian(Lagrangian):
    """User expression on V(1), extended homogeneously by the library."""

    def __init__(self, expression: str | Expression, model: ModelKind) -> None:
        self.model = model
        if isinstance(expression, str):
            expression = parse_expression(expression, model)
        else:
            expression.check_lagrangian_dim(model)
        self.expression = expression
        self.name = f"user({expression.source})"

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        n = homogeneous_norm(w, self.model)
        u = [wk / n for wk in w]
        return self.expression(x, u) * n


# -- quantity-level operations ---------------------------------------------------------


def _check_args(L: Lagrangian, x: Event, w: FourVector) -> None:
    if x.model is not L.model or w.model is not L.model:
        raise WrongModel("Lagrangian, event and velocity must share a model")
    if checks_enabled() and w.dim != RATE:
        raise DimensionMismatch(f"velocity argument must be in M/I, got dimension {w.dim}")


def evaluate(L: Lagrangian, x: Event, w: FourVector) -> Quantity:
    """Value of the homogeneous Lagrangian; dimension 1/s."""
    _check_args(L, x, w)
    return Quantity(float(L(x.coords, w.values)), RATE)


def grad_x(L: Lagrangian, x: Event, w: FourVector) -> np.ndarray:
    _check_args(L, x, w)
    return L.jet(x.coords, w.values)[1]


def grad_w(L: Lagrangian, x: Event, w: FourVector) -> np.ndarray:
    _check_args(L, x, w)
    return L.jet(x.coords, w.values)[2]


# -- full time-derivatives -------------------------------------------------------------


class FullTimeDerivative(Lagrangian):
    """f(x, w) = D phi(x) . w for a scalar potential phi on events."""

    def __init__(self, potential: Callable[[Sequence[Any]], Any], model: ModelKind) -> None:
        self.model = model
        self.potential = potential
        self.name = "full_time_derivative"

    def kernel(self, x: Sequence[Any], w: Sequence[Any]) -> Any:
        return autodiff.directional(self.potential, x, w)


class SamplingDegenerate(ValueError):
    pass


@dataclass(frozen=True)
class SamplingBox:
    """Where and how densely the full time-derivative criterion is sampled."""

    center: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    half_width: float = 10.0
    points: int = 256
    directions: int = 16
    tol: float = 1e-7
    seed: int = 0
    min_points: int = 16
    max_speed: float = 1.0


@dataclass
class Samples:
    x: np.ndarray  # (P, 4)
    w: np.ndarray  # (P, D, 4)
    w_alt: np.ndarray  # (P, D, 4)
    alpha: np.ndarray  # (P, D)
    beta: np.ndarray  # (P, D)


def sample_box(box: SamplingBox, model: ModelKind) -> Samples:
    if box.points < box.min_points or box.directions < 2 or not box.half_width > 0.0:
        raise SamplingDegenerate(
            f"need >= {box.min_points} points, >= 2 directions and a positive half-width; got {box}"
        )
    sobol = qmc.Sobol(d=4, scramble=True, seed=box.seed)
    unit = sobol.random(box.points)
    x = np.asarray(box.center) + box.half_width * (2.0 * unit - 1.0)
    rng = np.random.default_rng([box.seed, 1])
    shape = (box.points, box.directions)
    w = _random_future(rng, shape, model, box.max_speed)
    w_alt = np.roll(w, 1, axis=1)
    alpha = rng.uniform(0.25, 2.0, size=shape)
    beta = rng.uniform(0.25, 2.0, size=shape)
    return Samples(x, w, w_alt, alpha, beta)


def _random_future(rng: np.random.Generator, shape: tuple[int, ...], model: ModelKind, vmax: float) -> np.ndarray:
    direction = rng.normal(size=shape + (3,))
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    radius = vmax * rng.uniform(0.0, 1.0, size=shape) ** (1.0 / 3.0)
    lam = rng.uniform(0.5, 2.0, size=shape)
    out = np.empty(shape + (4,))
    if model is ModelKind.NONREL:
        out[..., 0] = 1.0
        out[..., 1:] = direction * radius[..., None]
    else:
        # radius doubles as the rapidity
        out[..., 0] = np.cosh(radius)
        out[..., 1:] = direction * np.sinh(radius)[..., None]
    return out * lam[..., None]


@dataclass
class Witness:
    """Sampled w-gradient a(x) of a full time-derivative."""

    x: np.ndarray
    a: np.ndarray
    at: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def norm(self) -> float:
        return float(np.abs(self.a).max()) if self.a.size else 0.0

    def is_constant(self, tol: float = 1e-9) -> bool:
        spread = np.abs(self.a - self.a[0]).max()
        return bool(spread <= tol * max(1.0, self.norm))


@dataclass
class FTDReport:
    is_ftd: bool
    lin_residual: float
    curl_residual: float
    scale: float
    max_abs: float
    witness: Witness  # meaningful only when is_ftd
    seed: int
    tol: float

    def __bool__(self) -> bool:
        return self.is_ftd


def _as_kernel(f: Lagrangian | Kernel) -> Kernel:
    return f.kernel if isinstance(f, Lagrangian) else f


def _eval_kernel(kern: Kernel, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    shape = np.broadcast_shapes(x.shape[:-1], w.shape[:-1])
    return np.broadcast_to(autodiff.primal(kern(_split(x), _split(w))), shape).astype(float)


def _w_gradient(kern: Kernel, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    x, w = np.broadcast_arrays(x, w)
    xs = _split(x)
    _, g = autodiff.value_and_grad(lambda z: kern(xs, z), _split(w))
    return g


def reference_scale(lagrangians: Sequence[Lagrangian | Kernel], samples: Samples) -> float:
    xs = np.broadcast_to(samples.x[:, None, :], samples.w.shape)
    return max(float(np.abs(_eval_kernel(_as_kernel(L), xs, samples.w)).max()) for L in lagrangians)


def is_full_time_derivative(
    f: Lagrangian | Kernel,
    model: ModelKind,
    box: SamplingBox = SamplingBox(),
    scale: float | None = None,
    samples: Samples | None = None,
) -> FTDReport:
    """Certify f(x, w) = D phi(x) . w on a sampling box.

    Checks (i) linearity in w and (ii) symmetry of the x-Jacobian of the
    w-gradient a(x). Residuals are relative to ``scale`` (default: the largest
    sampled |f|); the curl residual is multiplied by the box half-width so both
    residuals compare magnitudes of f.
    """
    kern = _as_kernel(f)
    s = samples if samples is not None else sample_box(box, model)
    P, D = s.w.shape[:2]
    xs = np.broadcast_to(s.x[:, None, :], s.w.shape)

    f1 = _eval_kernel(kern, xs, s.w)
    f2 = _eval_kernel(kern, xs, s.w_alt)
    combo = s.alpha[..., None] * s.w + s.beta[..., None] * s.w_alt
    f12 = _eval_kernel(kern, xs, combo)
    max_abs = float(np.abs(f1).max())
    if scale is None:
        scale = max_abs
    denom = scale if scale > 0.0 else 1.0
    lin = float(np.abs(f12 - s.alpha * f1 - s.beta * f2).max()) / denom

    w_ref = s.w[:, 0, :]
    a = _w_gradient(kern, s.x, w_ref)
    h = 1e-4 * max(1.0, box.half_width)
    jac = np.empty((P, 4, 4))
    for j in range(4):
        step = np.zeros(4)
        step[j] = h
        jac[:, :, j] = (_w_gradient(kern, s.x + step, w_ref) - _w_gradient(kern, s.x - step, w_ref)) / (2 * h)
    curl = float(np.abs(jac - np.swapaxes(jac, 1, 2)).max()) * box.half_width / denom

    def at(x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return _w_gradient(kern, x, np.broadcast_to(w_ref[0], x.shape))

    ok = lin < box.tol and curl < box.tol
    return FTDReport(ok, lin, curl, float(scale), max_abs, Witness(s.x, a, at), box.seed, box.tol)


def equivalence_report(L1: Lagrangian, L2: Lagrangian, box: SamplingBox = SamplingBox()) -> FTDReport:
    if L1.model is not L2.model:
        raise WrongModel("equivalence is only defined within one model")
    s = sample_box(box, L1.model)
    scale = reference_scale([L1, L2], s)
    return is_full_time_derivative(L2 - L1, L1.model, box, scale=scale, samples=s)


def are_equivalent(L1: Lagrangian, L2: Lagrangian, box: SamplingBox = SamplingBox()) -> bool:
    """True iff L2 - L1 is a full time-derivative on the sampling box."""
    return equivalence_report(L1, L2, box).is_ftd
