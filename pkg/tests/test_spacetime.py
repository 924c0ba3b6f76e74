import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from noether_lab.groups import exp_generator, random_generator
from noether_lab.quantities import METER, RATE, SECOND, Dim, DimensionMismatch, Quantity
from noether_lab.spacetime import (
    Event,
    FourVector,
    ModelKind,
    NotFutureLike,
    NotSpacelike,
    WrongModel,
    b_inner,
    four_vector,
    g_inner,
    is_future_like,
    is_velocity,
    normalize_to_V1,
    parse_vector,
    tau_of,
)

NR, REL = ModelKind.NONREL, ModelKind.REL
finite = st.floats(-50, 50, allow_nan=False)
vec4 = st.lists(finite, min_size=4, max_size=4)


def test_tau_projects_time_slot():
    assert tau_of(parse_vector("[3s, 1m, 0m, 0m]", NR)) == Quantity(3.0, SECOND)


def test_spacelike_vectors_have_zero_tau():
    assert tau_of(four_vector([0, 1, 2, 3], NR)).value == 0.0


@given(vec4, vec4, finite, finite)
def test_tau_is_linear(a, b, s, t):
    w1, w2 = four_vector(a, NR), four_vector(b, NR)
    lhs = tau_of(w1 * s + w2 * t).value
    assert lhs == pytest.approx(s * tau_of(w1).value + t * tau_of(w2).value, abs=1e-9)


def test_tau_is_nonrelativistic_only():
    with pytest.raises(WrongModel):
        tau_of(four_vector([1, 0, 0, 0], REL))


def test_b_inner_examples():
    e1 = parse_vector("[0s, 1m, 0m, 0m]", NR)
    e2 = parse_vector("[0s, 3m, 4m, 0m]", NR)
    assert b_inner(e1, e1) == Quantity(1.0, METER * METER)
    assert b_inner(e2, e2).value == 25.0


def test_b_inner_needs_spacelike():
    with pytest.raises(NotSpacelike):
        b_inner(four_vector([1, 0, 0, 0], NR), four_vector([0, 1, 0, 0], NR))


@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3))
def test_b_inner_symmetric_and_positive(a, b):
    e1, e2 = four_vector([0, *a], NR), four_vector([0, *b], NR)
    assert b_inner(e1, e2).value == b_inner(e2, e1).value
    if max(map(abs, a)) > 1e-100:
        assert b_inner(e1, e1).value > 0


def test_g_inner_examples():
    assert g_inner(four_vector([1, 0, 0, 0], REL), four_vector([1, 0, 0, 0], REL)).value == -1.0
    w = parse_vector("[5s, 3s, 0s, 0s]", REL)
    g = g_inner(w, w)
    assert g.value == -16.0 and g.dim == Dim(2, 0)
    null = four_vector([1, 1, 0, 0], REL)
    assert g_inner(null, null).value == 0.0


def test_g_inner_is_relativistic_only():
    with pytest.raises(WrongModel):
        g_inner(four_vector([1, 0, 0, 0], NR), four_vector([1, 0, 0, 0], NR))


def test_normalize_examples():
    u = normalize_to_V1(parse_vector("[2s, 4m, 0m, 0m]", NR))
    assert np.allclose(u.values, [1, 2, 0, 0]) and u.dim == RATE
    u = normalize_to_V1(parse_vector("[5s, 3s, 0s, 0s]", REL))
    assert np.allclose(u.values, [1.25, 0.75, 0, 0])
    assert g_inner(u, u).value == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("model", [NR, REL])
def test_normalize_is_idempotent(model):
    u = normalize_to_V1(four_vector([2.0, 0.3, -0.4, 0.5], model))
    assert is_velocity(u)
    assert np.allclose(normalize_to_V1(u).values, u.values, atol=1e-15)


@pytest.mark.parametrize("model, w", [(NR, [0, 1, 0, 0]), (NR, [-1, 0, 0, 0]), (REL, [1, 2, 0, 0]), (REL, [1, 1, 0, 0])])
def test_normalize_rejects_non_future(model, w):
    assert not is_future_like(four_vector(w, model))
    with pytest.raises(NotFutureLike):
        normalize_to_V1(four_vector(w, model))


def test_events_subtract_to_vectors():
    a = Event.at([1, 2, 3, 4], NR)
    b = Event.at([0, 1, 1, 1], NR)
    d = a - b
    assert isinstance(d, FourVector) and np.array_equal(d.values, [1, 1, 2, 3])
    assert np.array_equal((b + d).coords, a.coords)


def test_mixed_models_refuse():
    with pytest.raises(WrongModel):
        Event.at([0, 0, 0, 0], NR) - Event.at([0, 0, 0, 0], REL)


def test_vector_literal_dimension_checks():
    with pytest.raises(DimensionMismatch):
        parse_vector("[1s, 1m, 1s, 0]", NR)
    with pytest.raises(ValueError):
        parse_vector("[1s, 1m]", NR)


@given(st.integers(0, 2**32 - 1))
def test_galilean_maps_preserve_tau(seed):
    rng = np.random.default_rng(seed)
    F = exp_generator(random_generator(NR, rng, 1.0))
    w = four_vector(rng.normal(size=4), NR)
    moved = four_vector(F.linear @ w.values, NR)
    assert abs(tau_of(moved).value - tau_of(w).value) <= 1e-12 * max(1.0, abs(tau_of(w).value))


@given(st.integers(0, 2**32 - 1))
def test_lorentz_maps_preserve_g(seed):
    rng = np.random.default_rng(seed)
    F = exp_generator(random_generator(REL, rng, 1.0))
    w1, w2 = (four_vector(rng.normal(size=4), REL) for _ in range(2))
    before = g_inner(w1, w2).value
    after = g_inner(four_vector(F.linear @ w1.values, REL), four_vector(F.linear @ w2.values, REL)).value
    scale = np.linalg.norm(F.linear) ** 2 * np.linalg.norm(w1.values) * np.linalg.norm(w2.values)
    assert abs(after - before) <= 1e-12 * scale
