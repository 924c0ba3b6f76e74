import numpy as np
import pytest

from helpers import B_GENERIC, B_SPATIAL, NR, REL
from noether_lab.groups import AffineMap, Generator, boost, exp_generator, random_generator, rotation, standard_basis, translation
from noether_lab.lagrangians import CounterexampleB, FreeNonRel, FreeRel, FullTimeDerivative, KernelLagrangian, SamplingBox
from noether_lab.spacetime import WrongModel
from noether_lab.symmetry import (
    NotAGroupElement,
    Status,
    certify_free,
    check_finite_symmetry,
    check_infinitesimal_symmetry,
    finite_delta,
)

BOX = SamplingBox(points=64, directions=8)


def test_boost_changes_free_lagrangian_by_known_amount():
    m, c = 1.3, np.array([0.2, -0.1, 0.3])
    v = np.array([0.4, 0.0, -0.2])
    G = Generator(np.zeros((4, 4)), np.zeros(4), NR)
    for k in range(3):
        G = G + boost(k + 1, NR) * v[k]
    F = exp_generator(G)
    L = FreeNonRel(m, c)
    verdict = check_finite_symmetry(L, F, BOX)
    assert verdict.status is Status.FULL_TIME_DERIVATIVE
    rng = np.random.default_rng(0)
    delta = finite_delta(L, F)
    for _ in range(20):
        u = np.concatenate([[1.0], rng.normal(size=3)])
        x = rng.normal(size=4)
        got = delta(list(x), list(u))
        assert got == pytest.approx(m * (u[1:] - c) @ v + 0.5 * m * v @ v, rel=1e-12, abs=1e-12)


def test_translation_witness_is_a_dot_B():
    a = np.array([0.5, -1.0, 2.0, 0.3])
    L = CounterexampleB(B_GENERIC, o=[1.0, 0.0, 0.0, -1.0])
    v = check_finite_symmetry(L, exp_generator(translation(a, NR)), BOX)
    assert v.status is Status.FULL_TIME_DERIVATIVE
    assert v.witness.is_constant()
    assert np.allclose(v.witness.a[0], a @ B_GENERIC, atol=1e-12)


def test_free_rel_is_exactly_invariant_under_poincare():
    rng = np.random.default_rng(1)
    for _ in range(5):
        F = exp_generator(random_generator(REL, rng, 1.0))
        v = check_finite_symmetry(FreeRel(2.0), F, BOX)
        assert v.status is Status.EXACT
        assert v.witness_norm < 1e-8


def test_rotation_not_commuting_with_B_fails():
    L = CounterexampleB(B_SPATIAL)
    assert check_infinitesimal_symmetry(L, rotation(1, NR), BOX).status is Status.NOT_A_SYMMETRY
    # rotation about the axis of a planar B commutes with it
    planar = np.zeros((4, 4))
    planar[1, 2], planar[2, 1] = 0.7, -0.7
    assert check_infinitesimal_symmetry(CounterexampleB(planar), rotation(3, NR), BOX).is_symmetry


@pytest.mark.parametrize("L", [FreeNonRel(1.0, [0.1, 0.0, 0.0]), CounterexampleB(B_GENERIC), FreeRel(1.0)])
def test_zero_generator_is_exact(L):
    zero = Generator(np.zeros((4, 4)), np.zeros(4), L.model, name="zero")
    assert check_infinitesimal_symmetry(L, zero, BOX).status is Status.EXACT


def test_spatial_translation_exact_boost_ftd_for_free_nonrel():
    L = FreeNonRel(1.0, [0.3, 0.0, 0.0])
    assert check_infinitesimal_symmetry(L, translation([0, 1, 0, 0], NR), BOX).status is Status.EXACT
    v = check_infinitesimal_symmetry(L, boost(2, NR), BOX)
    assert v.status is Status.FULL_TIME_DERIVATIVE and v.witness_norm > 0.1


def test_membership_is_enforced():
    bad = AffineMap(np.diag([1.0, -1.0, 1.0, 1.0]), np.zeros(4), NR)
    with pytest.raises(NotAGroupElement):
        check_finite_symmetry(FreeNonRel(), bad, BOX)
    assert check_finite_symmetry(FreeNonRel(), bad, BOX, require_member=False).status is Status.EXACT
    with pytest.raises(WrongModel):
        check_finite_symmetry(FreeRel(1.0), AffineMap.identity(NR), BOX)


@pytest.mark.parametrize("L", [FreeNonRel(1.2, [0.1, -0.2, 0.0]), CounterexampleB(B_GENERIC), FreeRel(0.9),
                               CounterexampleB(0.2 * B_GENERIC, phi="proper", model=REL)])
def test_finite_and_infinitesimal_agree(L):
    for H in standard_basis(L.model):
        inf = check_infinitesimal_symmetry(L, H, BOX).is_symmetry
        for s in (1e-3, 1e-2):
            assert check_finite_symmetry(L, exp_generator(H, s), BOX, name=H.name).is_symmetry == inf, (H.name, s)


def test_verdicts_invariant_under_equivalence():
    L = CounterexampleB(B_GENERIC)
    extra = FullTimeDerivative(lambda x: 0.2 * x[0] * x[1] + 0.05 * x[2] * x[3], NR)
    L2 = KernelLagrangian(NR, lambda x, w: L.kernel(x, w) + extra.kernel(x, w))
    for H in standard_basis(NR):
        a = check_infinitesimal_symmetry(L, H, BOX).is_symmetry
        b = check_infinitesimal_symmetry(L2, H, BOX).is_symmetry
        assert a == b, H.name


def test_certify_free_reports():
    rep = certify_free(FreeNonRel(1.0, [0.2, -0.1, 0.3]), BOX, n_random=5)
    assert rep.all_pass and len(rep.passed()) == 10
    rep = certify_free(CounterexampleB(B_SPATIAL), BOX, n_random=3)
    assert set(rep.passed("translation")) == {f"translation_{k}" for k in range(4)}
    assert rep.failed("rotation")
    rep = certify_free(FreeRel(1.0), BOX, n_random=3)
    assert all(v.status is Status.EXACT for v in rep.directions + rep.finite)
    text, csv = rep.to_text(), rep.to_csv()
    assert "directions passed: 10/10" in text
    assert csv.splitlines()[0] == "generator,status,lin_residual,curl_residual,witness_norm,seed"
    assert len(csv.splitlines()) == 1 + 10 + 3
