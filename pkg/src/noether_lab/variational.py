"""Discrete fixed-endpoint action, stationarity solver and diagnostics.

A :class:`WorldPath` holds N+1 events over a parameter grid on [0, 1]. The
action is the midpoint rule

    S = sum_i L(mid_i, chord_i / ds_i) * ds_i,

which by degree-1 homogeneity equals ``sum_i L(mid_i, chord_i)``; any strictly
increasing relabelling of the grid leaves it unchanged.

Gauge handling
--------------
nonrel: node times are pinned to ``t0 + s_i (t1 - t0)`` and only spatial
coordinates vary, matching variations by spacelike vectors.

rel: the action is invariant under sliding nodes along the path. Two gauges:
``"penalty"`` adds ``kappa * sum_i (|chord_i| - mean)^2`` to the Newton
objective; ``"projection"`` restricts Newton steps to the complement of the
per-node tangent directions and afterwards slides nodes along the path to
equal Lorentz chord lengths. Both select the same discrete solution.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import LinearOperator, lsqr, splu

from .lagrangians import Lagrangian
from .quantities import SECOND, Quantity
from .spacetime import ETA, Event, ModelKind, WrongModel, future_margin, CONE_MARGIN

__all__ = [
    "WorldPath",
    "ActionReport",
    "ChordNotFutureLike",
    "NoConvergence",
    "action",
    "action_gradient",
    "action_hessian",
    "variation_gradient",
    "el_residual",
    "proper_time",
    "momentum_series",
    "momentum_deviation",
    "solve_stationary",
    "straight_path",
    "max_chord_deviation",
    "unit_velocities",
    "resample_arclength",
    "path_csv",
    "GAUGES",
]

GAUGES = ("penalty", "projection")
PENALTY_WEIGHT = 1e3


class ChordNotFutureLike(ValueError):
    pass


class NoConvergence(RuntimeError):
    def __init__(self, iterations: int, residual: float, history: Sequence[float]) -> None:
        super().__init__(f"no convergence after {iterations} iterations (gradient norm {residual:.3e})")
        self.iterations = iterations
        self.residual = residual
        self.history = list(history)


@dataclass(frozen=True)
class WorldPath:
    nodes: np.ndarray
    model: ModelKind
    s: np.ndarray | None = None

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 4 or nodes.shape[0] < 2:
            raise ValueError("nodes must have shape (N+1, 4) with N >= 1")
        s = np.linspace(0.0, 1.0, nodes.shape[0]) if self.s is None else np.array(self.s, dtype=float)
        if s.shape != (nodes.shape[0],):
            raise ValueError("parameter grid must have one entry per node")
        if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0.0):
            raise ValueError("parameter grid must increase strictly from 0 to 1")
        nodes.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "s", s)
        bad = np.flatnonzero(~(future_margin(self.chords, self.model) > CONE_MARGIN))
        if bad.size:
            raise ChordNotFutureLike(f"chords {bad.tolist()} are not future-like")

    @property
    def N(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def chords(self) -> np.ndarray:
        return np.diff(self.nodes, axis=0)

    @property
    def ds(self) -> np.ndarray:
        return np.diff(self.s)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @property
    def velocities(self) -> np.ndarray:
        return self.chords / self.ds[:, None]

    def events(self) -> list[Event]:
        return [Event.at(n, self.model) for n in self.nodes]

    def reparameterized(self, s: np.ndarray) -> WorldPath:
        return WorldPath(self.nodes, self.model, s)

    def with_nodes(self, nodes: np.ndarray) -> WorldPath:
        return WorldPath(nodes, self.model, self.s)


def straight_path(x0: Event | np.ndarray, x1: Event | np.ndarray, N: int, model: ModelKind,
                  s: np.ndarray | None = None) -> WorldPath:
    a = x0.coords if isinstance(x0, Event) else np.asarray(x0, dtype=float)
    b = x1.coords if isinstance(x1, Event) else np.asarray(x1, dtype=float)
    grid = np.linspace(0.0, 1.0, N + 1) if s is None else np.asarray(s, dtype=float)
    return WorldPath(a + grid[:, None] * (b - a), model, grid)


def _check_model(L: Lagrangian, p: WorldPath) -> None:
    if L.model is not p.model:
        raise WrongModel("Lagrangian and path belong to different models")


def action(L: Lagrangian, p: WorldPath) -> float:
    _check_model(L, p)
    ds = p.ds
    return float(np.sum(L(p.midpoints, p.chords / ds[:, None]) * ds))


def _segment_terms(L: Lagrangian, p: WorldPath) -> tuple[np.ndarray, np.ndarray]:
    """Per-segment derivative of ds * L wrt (p_i, p_{i+1}); shapes (N, 4) each."""
    _, gx, gw = L.jet(p.midpoints, p.velocities)
    ds = p.ds[:, None]
    return 0.5 * ds * gx - gw, 0.5 * ds * gx + gw


def _full_gradient(L: Lagrangian, p: WorldPath) -> np.ndarray:
    left, right = _segment_terms(L, p)
    g = np.zeros_like(p.nodes)
    g[:-1] += left
    g[1:] += right
    return g


def action_gradient(L: Lagrangian, p: WorldPath) -> np.ndarray:
    """dS/dp_i for interior nodes, shape (N-1, 4)."""
    _check_model(L, p)
    return _full_gradient(L, p)[1:-1]


def _free_components(model: ModelKind) -> np.ndarray:
    return np.arange(1, 4) if model is ModelKind.NONREL else np.arange(4)


def variation_gradient(L: Lagrangian, p: WorldPath) -> np.ndarray:
    """Gradient on the admissible variations (nonrel: spatial components only)."""
    return action_gradient(L, p)[:, _free_components(p.model)]


def _segment_blocks(p: WorldPath, hess: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """COO data/rows/cols for per-segment 8x8 blocks acting on (p_i, p_{i+1})."""
    base = 4 * np.arange(p.N)[:, None] + np.arange(8)[None, :]
    rows = np.broadcast_to(base[:, :, None], hess.shape)
    cols = np.broadcast_to(base[:, None, :], hess.shape)
    return hess.ravel(), rows.ravel(), cols.ravel()


def _hessian_sparse(L: Lagrangian, p: WorldPath) -> sp.csr_matrix:
    _, _, hess = L.hessian(p.midpoints, p.velocities)
    ds = p.ds
    eye = np.eye(4)
    T = np.zeros((p.N, 8, 8))
    T[:, :4, :4] = T[:, :4, 4:] = 0.5 * eye
    T[:, 4:, :4] = -eye / ds[:, None, None]
    T[:, 4:, 4:] = eye / ds[:, None, None]
    blocks = ds[:, None, None] * np.einsum("nki,nkl,nlj->nij", T, hess, T)
    size = 4 * (p.N + 1)
    data, rows, cols = _segment_blocks(p, blocks)
    return sp.coo_matrix((data, (rows, cols)), shape=(size, size)).tocsr()


def action_hessian(L: Lagrangian, p: WorldPath) -> np.ndarray:
    """Dense Hessian of S wrt all node coordinates, shape (4(N+1), 4(N+1))."""
    _check_model(L, p)
    return _hessian_sparse(L, p).toarray()


# -- relativistic gauge penalty --------------------------------------------------------


def _lorentz_lengths(chords: np.ndarray) -> np.ndarray:
    return np.sqrt(-np.einsum("ni,ij,nj->n", chords, ETA, chords))


def _penalty_terms(p: WorldPath, kappa: float) -> tuple[float, np.ndarray, sp.csr_matrix, np.ndarray]:
    """Value, gradient and Hessian ``A - u u^T`` (sparse A, dense u) of the chord penalty."""
    c = p.chords
    n = _lorentz_lengths(c)
    N = p.N
    d = n - n.mean()
    value = kappa * float(d @ d)
    dn = (-(c @ ETA)) / n[:, None]  # dn_i/dc_i; c_i = p_{i+1} - p_i
    size = 4 * (N + 1)
    G = sp.coo_matrix(
        (np.concatenate([-dn, dn], axis=1).ravel(),
         (np.repeat(np.arange(N), 8), (4 * np.arange(N)[:, None] + np.arange(8)).ravel())),
        shape=(N, size),
    ).tocsr()
    grad = 2.0 * kappa * (G.T @ d)
    D = np.diag([1.0, -1.0, -1.0, -1.0])
    Dc = c @ D
    d2n = D[None] / n[:, None, None] - np.einsum("ni,nj->nij", Dc, Dc) / n[:, None, None] ** 3
    local = np.empty((N, 8, 8))
    local[:, :4, :4] = local[:, 4:, 4:] = d2n
    local[:, :4, 4:] = local[:, 4:, :4] = -d2n
    local *= (2.0 * kappa * d)[:, None, None]
    data, rows, cols = _segment_blocks(p, local)
    A = 2.0 * kappa * (G.T @ G) + sp.coo_matrix((data, (rows, cols)), shape=(size, size))
    u = np.sqrt(2.0 * kappa / N) * np.asarray(G.sum(axis=0)).ravel()
    return value, grad, A.tocsr(), u


# -- diagnostics -----------------------------------------------------------------------


def proper_time(p: WorldPath) -> Quantity:
    if p.model is not ModelKind.REL:
        raise WrongModel("proper time is a relativistic notion")
    return Quantity(float(np.sum(_lorentz_lengths(p.chords))), SECOND)


def momentum_series(L: Lagrangian, p: WorldPath) -> np.ndarray:
    """Canonical momentum dL/dw at each segment midpoint, shape (N, 4)."""
    _check_model(L, p)
    return L.jet(p.midpoints, p.velocities)[2]


def momentum_deviation(L: Lagrangian, p: WorldPath) -> tuple[float, float]:
    """(max pairwise deviation, mean norm) of the momentum series."""
    mom = momentum_series(L, p)
    dev = 0.0
    for lo in range(0, mom.shape[0], 256):
        diff = mom[lo:lo + 256, None, :] - mom[None, :, :]
        dev = max(dev, float(np.sqrt((diff ** 2).sum(-1)).max()))
    return dev, float(np.linalg.norm(mom, axis=1).mean())


def _fd_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    k = len(offsets)
    V = np.vander(offsets, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def _stencil(i: int, n_nodes: int, width: int) -> np.ndarray:
    half = width // 2
    lo = min(max(i - half, 0), n_nodes - width)
    return np.arange(lo, lo + width)


def el_residual(L: Lagrangian, p: WorldPath, kind: str = "discrete") -> np.ndarray:
    """Per-interior-node Euler-Lagrange residual norms, shape (N-1,).

    ``kind="discrete"``: dS/dp_i divided by the dual cell length; zero at an
    exact discrete stationary point.

    ``kind="continuous"``: the continuous operator
    ``dL/dx - d/ds dL/dw = dL/dx - (d2L/dw dx) p' - (d2L/dw dw) p''`` evaluated
    at the nodes with fourth-order finite-difference derivatives of the path.
    On a discrete solution this measures the truncation error, O(1/N^2).
    """
    _check_model(L, p)
    comps = _free_components(p.model)
    if kind == "discrete":
        g = action_gradient(L, p)
        cell = 0.5 * (p.ds[1:] + p.ds[:-1])
        return np.linalg.norm(g[:, comps] / cell[:, None], axis=1)
    if kind != "continuous":
        raise ValueError(f"unknown residual kind {kind!r}")
    n_nodes = p.N + 1
    if n_nodes < 7:
        raise ValueError("the continuous residual needs at least 7 nodes")
    vel = np.empty((p.N - 1, 4))
    acc = np.empty((p.N - 1, 4))
    for row, i in enumerate(range(1, p.N)):
        idx = _stencil(i, n_nodes, 5 if 2 <= i <= p.N - 2 else 6)
        off = p.s[idx] - p.s[i]
        vel[row] = _fd_weights(off, 1) @ p.nodes[idx]
        acc[row] = _fd_weights(off, 2) @ p.nodes[idx]
    _, grad, hess = L.hessian(p.nodes[1:-1], vel)
    gx = grad[:, :4]
    h_wx = hess[:, 4:, :4]
    h_ww = hess[:, 4:, 4:]
    res = gx - np.einsum("nij,nj->ni", h_wx, vel) - np.einsum("nij,nj->ni", h_ww, acc)
    return np.linalg.norm(res[:, comps], axis=1)


def max_chord_deviation(p: WorldPath) -> float:
    """Largest Euclidean (chart) distance of a node from the straight segment."""
    a, b = p.nodes[0], p.nodes[-1]
    d = b - a
    rel = p.nodes - a
    t = np.clip(rel @ d / (d @ d), 0.0, 1.0)
    return float(np.linalg.norm(rel - t[:, None] * d, axis=1).max())


def unit_velocities(p: WorldPath) -> np.ndarray:
    """Chords normalized onto V(1) (tau or Lorentz length)."""
    c = p.chords
    if p.model is ModelKind.NONREL:
        return c / c[:, :1]
    return c / _lorentz_lengths(c)[:, None]


def resample_arclength(p: WorldPath, n: int | None = None) -> np.ndarray:
    """Nodes re-spaced uniformly in chart arc length (for comparing gauges)."""
    n = p.N if n is None else n
    seg = np.linalg.norm(p.chords, axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, arc[-1], n + 1)
    return np.stack([np.interp(target, arc, p.nodes[:, k]) for k in range(4)], axis=1)


# -- solver ----------------------------------------------------------------------------


@dataclass
class ActionReport:
    action: float
    gradient_norm: float
    el_residual: np.ndarray
    momentum: np.ndarray
    momentum_deviation: float
    momentum_mean_norm: float
    iterations: int
    gauge: str
    converged: bool
    proper_time: float | None = None
    history: list[float] = field(default_factory=list)

    def summary(self) -> dict[str, object]:
        out: dict[str, object] = {
            "action": self.action,
            "gradient_norm": self.gradient_norm,
            "max_el_residual": float(self.el_residual.max()) if self.el_residual.size else 0.0,
            "momentum_deviation": self.momentum_deviation,
            "momentum_mean_norm": self.momentum_mean_norm,
            "iterations": self.iterations,
            "gauge": self.gauge,
            "converged": self.converged,
        }
        if self.proper_time is not None:
            out["proper_time"] = self.proper_time
        return out


def _free_index(model: ModelKind, N: int) -> np.ndarray:
    comps = _free_components(model)
    return np.concatenate([4 * i + comps for i in range(1, N)])


def _tangent_complement(p: WorldPath) -> sp.csr_matrix:
    """Block-diagonal basis (4(N-1) x 3(N-1)) orthogonal to the node tangents."""
    t = p.nodes[2:] - p.nodes[:-2]
    t = t / np.linalg.norm(t, axis=1, keepdims=True)
    _, _, vt = np.linalg.svd(t[:, None, :])  # (N-1, 4, 4); rows 1..3 span the complement
    blocks = np.swapaxes(vt[:, 1:, :], 1, 2)  # (N-1, 4, 3)
    k = np.arange(p.N - 1)
    rows = np.broadcast_to((4 * k[:, None, None] + np.arange(4)[None, :, None]), blocks.shape)
    cols = np.broadcast_to((3 * k[:, None, None] + np.arange(3)[None, None, :]), blocks.shape)
    shape = (4 * (p.N - 1), 3 * (p.N - 1))
    return sp.coo_matrix((blocks.ravel(), (rows.ravel(), cols.ravel())), shape=shape).tocsr()


class _System:
    """Newton matrix ``A - u u^T`` with sparse A; steps are mapped through Q when given."""

    def __init__(self, A: sp.spmatrix, u: np.ndarray | None = None, Q: sp.spmatrix | None = None) -> None:
        self.A = sp.csc_matrix(A)
        self.u = u
        self.Q = Q

    def _matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.A @ v
        return out - self.u * (self.u @ v) if self.u is not None else out

    def rmatvec(self, v: np.ndarray) -> np.ndarray:
        out = self.A.T @ v
        return out - self.u * (self.u @ v) if self.u is not None else out

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        try:
            lu = splu(self.A)
            y = lu.solve(rhs)
            if self.u is not None:
                z = lu.solve(self.u)
                y = y + z * (self.u @ y) / (1.0 - self.u @ z)
            if not np.all(np.isfinite(y)):
                raise RuntimeError("non-finite step")
        except RuntimeError:
            op = LinearOperator(self.A.shape, matvec=self._matvec, rmatvec=self.rmatvec)
            y = lsqr(op, rhs, atol=1e-15, btol=1e-15, iter_lim=20 * self.A.shape[0])[0]
        return self.step(y)

    def step(self, y: np.ndarray) -> np.ndarray:
        return self.Q @ y if self.Q is not None else y


def _objective(L: Lagrangian, p: WorldPath, gauge: str, kappa: float, jacobian: bool = True):
    """(gauge-fixed gradient, Newton system or None, action gradient) on the free coordinates."""
    idx = _free_index(p.model, p.N)
    g_full = _full_gradient(L, p).ravel()
    g_s = g_full[idx]
    H = _hessian_sparse(L, p)[idx][:, idx] if jacobian else None
    if p.model is ModelKind.NONREL:
        return g_s, (_System(H) if jacobian else None), g_s
    if gauge == "penalty":
        _, gp, A, u = _penalty_terms(p, kappa)
        system = _System(H + A[idx][:, idx], u[idx]) if jacobian else None
        return (g_full + gp)[idx], system, g_s
    Q = _tangent_complement(p)
    return Q.T @ g_s, (_System(Q.T @ H @ Q, Q=Q) if jacobian else None), g_s


def _respace(p: WorldPath) -> WorldPath:
    """Move nodes along the path to equal Lorentz chord lengths (a gauge-orbit move)."""
    arc = np.concatenate([[0.0], np.cumsum(_lorentz_lengths(p.chords))])
    target = np.linspace(0.0, arc[-1], p.N + 1)
    nodes = CubicSpline(arc, p.nodes, axis=0)(target)
    nodes[0], nodes[-1] = p.nodes[0], p.nodes[-1]
    try:
        return p.with_nodes(nodes)
    except ChordNotFutureLike:
        return p


def _trial(p: WorldPath, idx: np.ndarray, z: np.ndarray) -> WorldPath | None:
    nodes = p.nodes.copy().ravel()
    nodes[idx] = z
    try:
        return p.with_nodes(nodes.reshape(-1, 4))
    except ChordNotFutureLike:
        return None


def solve_stationary(
    L: Lagrangian,
    x0: Event | np.ndarray,
    x1: Event | np.ndarray,
    N: int = 200,
    gauge: str = "penalty",
    initial: WorldPath | np.ndarray | None = None,
    tol: float = 1e-9,
    max_iter: int = 100,
    kappa: float = PENALTY_WEIGHT,
) -> tuple[WorldPath, ActionReport]:
    """Find a path with vanishing action gradient between fixed endpoints.

    Damped Newton on the gauge-fixed gradient system with a backtracking line
    search on half the squared gradient norm; steps that make a chord leave
    the future cone are rejected. When Newton fails to give a descent step,
    up to 50 gradient-descent steps on the same merit function are taken.
    """
    if N < 8:
        raise ValueError("N must be at least 8")
    if gauge not in GAUGES:
        raise ValueError(f"gauge must be one of {GAUGES}")
    model = L.model
    if initial is None:
        p = straight_path(x0, x1, N, model)
    elif isinstance(initial, WorldPath):
        p = initial
    else:
        p = WorldPath(np.asarray(initial, dtype=float), model)
    a = x0.coords if isinstance(x0, Event) else np.asarray(x0, dtype=float)
    b = x1.coords if isinstance(x1, Event) else np.asarray(x1, dtype=float)
    if p.N != N or not (np.array_equal(p.nodes[0], a) and np.array_equal(p.nodes[-1], b)):
        raise ValueError("initial path must have N segments and the requested endpoints")
    if model is ModelKind.NONREL:
        # pin node times to the parameter grid
        nodes = p.nodes.copy()
        nodes[:, 0] = a[0] + p.s * (b[0] - a[0])
        p = p.with_nodes(nodes)

    idx = _free_index(model, N)
    reach = 0.25 * float(np.linalg.norm(b - a))
    history: list[float] = []
    polish = 0
    it = 0
    fallback_left = 50
    for it in range(1, max_iter + 1):
        G, system, g_s = _objective(L, p, gauge, kappa)
        gnorm = float(np.linalg.norm(g_s))
        history.append(gnorm)
        if gnorm <= tol * (1.0 + abs(action(L, p))):
            # a few extra Newton steps while they still pay off
            if polish >= 3 or (len(history) > 1 and history[-1] > 0.5 * history[-2]) or gnorm == 0.0:
                break
            polish += 1
        merit0 = 0.5 * float(G @ G)
        if merit0 == 0.0:
            break
        step = _cap_step(system.solve(-G), reach)
        z0 = p.nodes.ravel()[idx]
        accepted = _line_search(L, p, idx, z0, step, merit0, gauge, kappa)
        if accepted is None and fallback_left > 0:
            accepted = _gradient_descent(L, p, idx, gauge, kappa, fallback_left)
            fallback_left = 0
        if accepted is None:
            break
        p = accepted
        if gauge == "projection" and model is ModelKind.REL:
            p = _respace(p)

    gnorm = float(np.linalg.norm(variation_gradient(L, p)))
    S = action(L, p)
    if gnorm > tol * (1.0 + abs(S)):
        # the gauge-fixed system can settle where the bare action gradient
        # keeps an O(h^2) component along the path; remove it directly
        p, extra = _polish(L, p, idx, history, tol * (1.0 + abs(S)), max_steps=min(20, max_iter - it))
        it += extra
        gnorm = history[-1]
        S = action(L, p)
    converged = gnorm <= tol * (1.0 + abs(S))
    if not converged:
        raise NoConvergence(it, gnorm, history)
    dev, mean = momentum_deviation(L, p)
    report = ActionReport(
        action=S,
        gradient_norm=gnorm,
        el_residual=el_residual(L, p),
        momentum=momentum_series(L, p),
        momentum_deviation=dev,
        momentum_mean_norm=mean,
        iterations=it,
        gauge=gauge if model is ModelKind.REL else "time",
        converged=True,
        proper_time=proper_time(p).value if model is ModelKind.REL else None,
        history=history,
    )
    return p, report


def _polish(L: Lagrangian, p: WorldPath, idx: np.ndarray, history: list[float], target: float,
            max_steps: int = 20) -> tuple[WorldPath, int]:
    """Newton steps on the bare action gradient (least squares if singular)."""
    steps = 0
    history.append(float(np.linalg.norm(_full_gradient(L, p).ravel()[idx])))
    for steps in range(1, max_steps + 1):
        g = _full_gradient(L, p).ravel()[idx]
        step = _System(_hessian_sparse(L, p)[idx][:, idx]).solve(-g)
        merit0 = 0.5 * float(g @ g)
        z0 = p.nodes.ravel()[idx]
        alpha, nxt = 1.0, None
        while alpha > 1e-10:
            trial = _trial(p, idx, z0 + alpha * step)
            if trial is not None:
                gt = _full_gradient(L, trial).ravel()[idx]
                if 0.5 * float(gt @ gt) <= (1.0 - 1e-4 * alpha) * merit0:
                    nxt = trial
                    break
            alpha *= 0.5
        if nxt is None:
            break
        p = nxt
        history.append(float(np.linalg.norm(_full_gradient(L, p).ravel()[idx])))
        if history[-1] <= 1e-3 * target:
            break
    return p, steps


def _cap_step(step: np.ndarray, reach: float) -> np.ndarray:
    """Scale a Newton step so no coordinate moves further than ``reach``."""
    big = float(np.abs(step).max()) if step.size else 0.0
    return step * (reach / big) if big > reach else step


def _merit(L: Lagrangian, p: WorldPath, gauge: str, kappa: float) -> float:
    G = _objective(L, p, gauge, kappa, jacobian=False)[0]
    return 0.5 * float(G @ G)


def _line_search(L, p, idx, z0, step, merit0, gauge, kappa) -> WorldPath | None:
    alpha = 1.0
    while alpha > 1e-10:
        trial = _trial(p, idx, z0 + alpha * step)
        if trial is not None:
            m = _merit(L, trial, gauge, kappa)
            if m <= (1.0 - 1e-4 * alpha) * merit0 or m < 1e-30:
                return trial
        alpha *= 0.5
    return None


def _gradient_descent(L, p, idx, gauge, kappa, n_steps) -> WorldPath | None:
    """Steepest descent on half the squared gauge-fixed gradient."""
    moved = None
    for _ in range(n_steps):
        G, system, _ = _objective(L, p, gauge, kappa)
        merit0 = 0.5 * float(G @ G)
        direction = system.step(-system.rmatvec(G))
        z0 = p.nodes.ravel()[idx]
        scale = float(np.linalg.norm(direction))
        if scale == 0.0:
            break
        alpha = 1.0 / scale
        nxt = None
        while alpha > 1e-14:
            trial = _trial(p, idx, z0 + alpha * direction)
            if trial is not None and _merit(L, trial, gauge, kappa) < merit0:
                nxt = trial
                break
            alpha *= 0.5
        if nxt is None:
            break
        p = moved = nxt
    return moved


def path_csv(L: Lagrangian, p: WorldPath) -> str:
    """Path dump: s, t, x, y, z, |chord|, EL_residual, momentum components."""
    chord_len = (
        _lorentz_lengths(p.chords) if p.model is ModelKind.REL else np.linalg.norm(p.chords[:, 1:], axis=1)
    )
    res = el_residual(L, p)
    mom = momentum_series(L, p)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "t", "x", "y", "z", "chord_norm", "el_residual", "p0", "p1", "p2", "p3"])
    fmt = "{:.17g}".format
    for i in range(p.N + 1):
        row = [fmt(p.s[i])] + [fmt(v) for v in p.nodes[i]]
        row.append(fmt(chord_len[i]) if i < p.N else "")
        row.append(fmt(res[i - 1]) if 0 < i < p.N else "")
        row += [fmt(v) for v in mom[i]] if i < p.N else ["", "", "", ""]
        w.writerow(row)
    return buf.getvalue()
