"""Shared fixtures-by-function for the test modules."""

import numpy as np

from noether_lab.lagrangians import CounterexampleB, FreeNonRel, FreeRel, UserLagrangian
from noether_lab.spacetime import ModelKind

NR, REL = ModelKind.NONREL, ModelKind.REL

# generic antisymmetric matrix with a full spatial block
B_GENERIC = np.array(
    [
        [0.0, 0.3, -0.2, 0.5],
        [-0.3, 0.0, 0.7, -0.4],
        [0.2, -0.7, 0.0, 0.25],
        [-0.5, 0.4, -0.25, 0.0],
    ]
)
B_SPATIAL = B_GENERIC.copy()
B_SPATIAL[0, :] = 0.0
B_SPATIAL[:, 0] = 0.0


def builtin_lagrangians():
    return [
        FreeNonRel(1.3, c=[0.2, -0.1, 0.3]),
        CounterexampleB(B_GENERIC, o=[0.5, -1.0, 2.0, 0.0]),
        UserLagrangian("0.5 s/m2 * abs2(w1, w2, w3) - 0.1 s/m2 * x1 * w2 / 1s", NR),
        FreeRel(0.7),
        CounterexampleB(0.2 * B_GENERIC, phi="proper", m=1.1, model=REL),
        UserLagrangian("2 1/s * sqrt(w0 * w0 - abs2(w1, w2, w3))", REL),
    ]


def random_future(rng, model, n, max_speed=0.8):
    """n future-like vectors with random positive scale."""
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = max_speed * rng.uniform(0.0, 1.0, size=n)
    lam = rng.uniform(0.2, 5.0, size=n)
    w = np.empty((n, 4))
    w[:, 0] = 1.0
    w[:, 1:] = d * r[:, None]
    return w * lam[:, None]


def random_events(rng, n, width=5.0):
    return rng.uniform(-width, width, size=(n, 4))
