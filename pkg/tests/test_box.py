import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from snipal.box import ActiveSet, active_set, apply_jacobian, moreau_dual_step, project
from snipal.problem import BoxSet


def test_project_examples():
    np.testing.assert_array_equal(project([-1.0, 2.0], BoxSet.nonnegative(2)), [0.0, 2.0])
    np.testing.assert_array_equal(project([0.5], BoxSet([-1.0], [1.0])), [0.5])
    np.testing.assert_array_equal(project([2.0, -3.0], BoxSet([0.0, 0.0], [1.0, 1.0])), [1.0, 0.0])


def test_active_set_excludes_boundary_and_exterior():
    aset = active_set(np.array([0.5, 0.0, 1.0, -2.0]), BoxSet(np.zeros(4), np.ones(4)))
    np.testing.assert_array_equal(aset.indices, [0])
    assert aset.p == 1


def test_active_set_free_and_fixed():
    assert active_set(np.array([3.0, -1e9, 0.0]), BoxSet.free(3)).p == 3
    assert active_set(np.array([0.0, 5.0]), BoxSet(np.zeros(2), np.zeros(2))).p == 0


def test_active_set_invariants():
    with pytest.raises(ValueError):
        ActiveSet(np.array([2, 1]), 4)
    with pytest.raises(ValueError):
        ActiveSet(np.array([0, 4]), 4)


def test_apply_jacobian_examples():
    np.testing.assert_array_equal(apply_jacobian(ActiveSet(np.array([0]), 2), [3.0, 4.0]), [3.0, 0.0])
    np.testing.assert_array_equal(apply_jacobian(ActiveSet(np.array([], dtype=int), 2), [3.0, 4.0]), [0.0, 0.0])
    np.testing.assert_array_equal(apply_jacobian(ActiveSet.full(2), [3.0, 4.0]), [3.0, 4.0])


def test_moreau_dual_step_examples():
    K = BoxSet.nonnegative(2)
    np.testing.assert_array_equal(moreau_dual_step([-2.0, 3.0], K, 1.0), [2.0, 0.0])
    np.testing.assert_array_equal(moreau_dual_step([1.0, 3.0], K, 1.0), [0.0, 0.0])
    np.testing.assert_array_equal(moreau_dual_step([-2.0, 3.0], K, 2.0), [1.0, 0.0])
    with pytest.raises(ValueError):
        moreau_dual_step([1.0], BoxSet.nonnegative(1), 0.0)


def _boxes(n):
    lo = hnp.arrays(float, n, elements=st.floats(-5, 0))
    width = hnp.arrays(float, n, elements=st.floats(0, 5))
    return st.tuples(lo, width).map(lambda t: BoxSet(t[0], t[0] + t[1]))


vec = lambda n: hnp.arrays(float, n, elements=st.floats(-10, 10))


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(_boxes(n), vec(n), vec(n))))
def test_projection_nonexpansive_and_idempotent(args):
    box, w1, w2 = args
    p1, p2 = project(w1, box), project(w2, box)
    assert np.linalg.norm(p1 - p2) <= np.linalg.norm(w1 - w2) + 1e-12
    np.testing.assert_array_equal(project(p1, box), p1)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(_boxes(n), vec(n), st.floats(0.01, 100))))
def test_moreau_identity(args):
    box, w, sigma = args
    # z = (proj(w) - w) / sigma, so proj(w) - sigma z recovers w
    np.testing.assert_allclose(project(w, box) - sigma * moreau_dual_step(w, box, sigma), w, atol=1e-12)


@given(st.integers(0, 10_000))
def test_jacobian_consistency(seed):
    rng = np.random.default_rng(seed)
    n = 6
    box = BoxSet(-rng.random(n), rng.random(n))
    w = 3 * rng.standard_normal(n)
    h = 1e-9
    # keep away from the kinks so a step of h cannot cross a bound
    assume_ok = np.min(np.minimum(np.abs(w - box.lower), np.abs(w - box.upper))) > 1e-6
    if not assume_ok:
        return
    aset = active_set(w, box)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        np.testing.assert_allclose(project(w + e, box) - project(w, box), apply_jacobian(aset, e),
                                   rtol=1e-6, atol=1e-20)
