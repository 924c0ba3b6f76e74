import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noether_lab.groups import (
    SeriesDivergence,
    AffineMap,
    AlgebraViolation,
    Generator,
    apply_affine,
    apply_linear,
    boost,
    check_algebra,
    closure_residual,
    commutator,
    compose,
    exp_generator,
    is_member,
    parse_generator,
    random_generator,
    rotation,
    span_rank,
    standard_basis,
    translation,
)
from noether_lab.spacetime import Event, ModelKind, WrongModel, four_vector, g_inner, is_velocity, normalize_to_V1

NR, REL = ModelKind.NONREL, ModelKind.REL
seeds = st.integers(0, 2**32 - 1)


def rotation_matrix(axis: int, angle: float) -> np.ndarray:
    """Closed-form right-handed rotation about a chart axis, time slot untouched."""
    i, j = [k for k in (1, 2, 3) if k != axis]
    if axis == 2:  # keep the cyclic orientation z -> x
        i, j = j, i
    out = np.eye(4)
    c, s = math.cos(angle), math.sin(angle)
    out[i, i], out[i, j], out[j, i], out[j, j] = c, -s, s, c
    return out


def hyperbolic_matrix(axis: int, rapidity: float) -> np.ndarray:
    out = np.eye(4)
    ch, sh = math.cosh(rapidity), math.sinh(rapidity)
    out[0, 0], out[0, axis], out[axis, 0], out[axis, axis] = ch, sh, sh, ch
    return out


def test_translation_series_truncates():
    F = exp_generator(translation([1.0, 2.0, 0.0, 0.0], NR))
    assert np.array_equal(F.linear, np.eye(4))
    assert np.array_equal(F.translation, [1.0, 2.0, 0.0, 0.0])


@pytest.mark.parametrize("model", [NR, REL])
@pytest.mark.parametrize("axis", [1, 2, 3])
def test_rotation_matches_closed_form(model, axis):
    F = exp_generator(rotation(axis, model), math.pi / 2)
    assert np.abs(F.linear - rotation_matrix(axis, math.pi / 2)).max() < 1e-13
    G = exp_generator(rotation(axis, model), 0.7)
    assert np.abs(G.linear - rotation_matrix(axis, 0.7)).max() < 1e-13


def test_quarter_turn_about_z_has_unit_entries():
    F = exp_generator(rotation(3, NR), math.pi / 2)
    assert np.abs(F.linear - np.array([[1, 0, 0, 0], [0, 0, -1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])).max() < 1e-15


@pytest.mark.parametrize("axis", [1, 2, 3])
def test_boost_matches_closed_form(axis):
    F = exp_generator(boost(axis, REL), 0.5)
    assert np.abs(F.linear - hyperbolic_matrix(axis, 0.5)).max() < 1e-13


@pytest.mark.parametrize("axis", [1, 2, 3])
def test_galilean_boost_is_shear(axis):
    v = 0.3
    F = exp_generator(boost(axis, NR), v)
    want = np.eye(4)
    want[axis, 0] = v
    assert np.abs(F.linear - want).max() < 1e-15


def test_identity_and_reflections():
    assert is_member(AffineMap.identity(NR)) and is_member(AffineMap.identity(REL))
    assert not is_member(AffineMap(np.diag([1.0, -1.0, 1.0, 1.0]), np.zeros(4), NR))
    assert not is_member(AffineMap(np.diag([1.0, -1.0, 1.0, 1.0]), np.zeros(4), REL))
    assert not is_member(AffineMap(np.diag([-1.0, 1.0, 1.0, 1.0]), np.zeros(4), NR))
    assert not is_member(AffineMap(np.diag([-1.0, -1.0, 1.0, 1.0]), np.zeros(4), REL))


@pytest.mark.parametrize("model", [NR, REL])
def test_random_exponentials_are_members(model):
    rng = np.random.default_rng(11)
    for _ in range(100):
        F = exp_generator(random_generator(model, rng, 1.0))
        assert is_member(F)
        assert abs(np.linalg.det(F.linear) - 1.0) < 1e-10


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.sampled_from([NR, REL]))
def test_one_parameter_subgroup(seed, s, t, model):
    H = random_generator(model, np.random.default_rng(seed), 1.0)
    lhs = exp_generator(H, s + t)
    rhs = compose(exp_generator(H, s), exp_generator(H, t))
    assert np.abs(lhs.augmented() - rhs.augmented()).max() < 1e-10


@pytest.mark.parametrize("model", [NR, REL])
def test_standard_basis(model):
    basis = standard_basis(model)
    assert len(basis) == 10
    for H in basis:
        check_algebra(H)
    assert span_rank(basis) == 10
    assert closure_residual(basis) < 1e-10


def test_commutator_of_rotations_is_rotation():
    c = commutator(rotation(1, NR), rotation(2, NR))
    assert np.allclose(c.linear, rotation(3, NR).linear)


def test_algebra_violation():
    bad = Generator(np.diag([1.0, 0.0, 0.0, 0.0]), np.zeros(4), NR)
    with pytest.raises(AlgebraViolation):
        exp_generator(bad)
    sym = np.zeros((4, 4))
    sym[1, 2] = sym[2, 1] = 1.0
    with pytest.raises(AlgebraViolation):
        exp_generator(Generator(sym, np.zeros(4), REL))
    # a relativistic boost is not a Galilean generator
    with pytest.raises(AlgebraViolation):
        exp_generator(Generator(boost(1, REL).linear, np.zeros(4), NR))


def test_apply_examples():
    x = Event.at([1.0, 2.0, 3.0, 4.0], NR)
    ident = AffineMap.identity(NR)
    assert np.array_equal(apply_affine(ident, x).coords, x.coords)
    T = exp_generator(translation([1.0, 0.0, 0.0, 0.5], NR))
    assert np.array_equal(apply_affine(T, x).coords, [2.0, 2.0, 3.0, 4.5])
    w = four_vector([1.0, 0.2, 0.0, 0.0], NR)
    assert np.array_equal(apply_linear(T, w).values, w.values)
    with pytest.raises(WrongModel):
        apply_affine(AffineMap.identity(REL), x)


@given(seeds)
def test_linear_action_matches_point_differences(seed):
    rng = np.random.default_rng(seed)
    F = exp_generator(random_generator(NR, rng, 1.0))
    a, b = Event.at(rng.normal(size=4), NR), Event.at(rng.normal(size=4), NR)
    lhs = apply_linear(F, a - b).values
    rhs = (apply_affine(F, a) - apply_affine(F, b)).values
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_boost_keeps_velocities_on_hyperboloid():
    u = normalize_to_V1(four_vector([2.0, 0.5, -0.3, 0.1], REL))
    F = exp_generator(boost(2, REL), 0.8)
    out = apply_linear(F, u)
    assert is_velocity(out)
    assert g_inner(out, out).value == pytest.approx(-1.0, abs=1e-12)


def test_inverse_and_composition():
    rng = np.random.default_rng(3)
    F = exp_generator(random_generator(REL, rng, 1.0))
    both = F @ F.inverse()
    assert np.abs(both.augmented() - np.eye(5)).max() < 1e-12


def test_parse_generator_forms():
    assert np.array_equal(parse_generator("rotation axis=3", NR).linear, rotation(3, NR).linear)
    assert np.array_equal(parse_generator("boost axis=1", REL).linear, boost(1, REL).linear)
    T = parse_generator("translation [1s, 0m, 0m, 0m]", NR)
    assert np.array_equal(exp_generator(T, 2.0).translation, [2.0, 0.0, 0.0, 0.0])
    raw = parse_generator("matrix [[0,0,0,0],[0,0,-1,0],[0,1,0,0],[0,0,0,0]] [0s,0m,0m,0m]", NR)
    assert np.array_equal(raw.linear, rotation(3, NR).linear)
    for text in ("rotation axis=4", "shear axis=1", "matrix [[1]] [0,0,0,0]"):
        with pytest.raises(ValueError):
            parse_generator(text, NR)
    assert np.array_equal(exp_generator(parse_generator("boost axis=1", REL), 0.0).linear, np.eye(4))


def test_large_parameter_exponential_is_accurate():
    # norm of s*H around 6.7: needs the scaled series
    H = random_generator(NR, np.random.default_rng(28185), 1.0)
    F = exp_generator(H, 2.5)
    half = exp_generator(H, 1.25)
    assert is_member(F)
    assert np.abs((half @ half).augmented() - F.augmented()).max() < 1e-12
    R = exp_generator(rotation(3, REL), 40.0).linear
    assert np.abs(R - rotation_matrix(3, 40.0)).max() < 1e-12


def test_non_finite_parameter_diverges():
    with pytest.raises(SeriesDivergence):
        exp_generator(rotation(1, NR), float("nan"))
