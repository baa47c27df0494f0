import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snipal.admm import AdmmConfig, AdmmNormalSolver, RankDeficientError, admm_run, admm_step
from snipal.box import project
from snipal.instances import gen_transportation
from snipal.problem import BoxSet, LpProblem, PrimalDualPoint

from conftest import tiny_lp


def test_gamma_open_interval():
    for g in (0.0, 2.0, -1.0):
        with pytest.raises(ValueError):
            AdmmConfig(gamma_step=g)
    with pytest.raises(ValueError):
        AdmmConfig(sigma=0.0)
    AdmmConfig(gamma_step=1.999)


def test_tiny_lp_reaches_switch_tol(tiny):
    res = admm_run(tiny, cfg=AdmmConfig(gamma_step=1.9, sigma=1.0, max_iters=5000))
    assert res.status == "switched"
    assert res.eta <= 1e-4
    assert res.iterations == len(res.etas)


def test_kkt_point_is_fixed(tiny):
    x, y = np.array([1.0, 0.0]), np.array([1.0])
    solver = AdmmNormalSolver(tiny.A)
    x1, y1, z1 = admm_step(tiny, x, y, 1.0, 1.9, solver)
    np.testing.assert_allclose(z1, tiny.c - tiny.A.rmatvec(y), atol=1e-15)
    np.testing.assert_allclose(y1, y, atol=1e-15)
    np.testing.assert_allclose(x1, x, atol=1e-15)


@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_z_update_matches_closed_form(seed, sigma):
    prob = tiny_lp(seed)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(prob.n), rng.standard_normal(prob.m)
    _, _, z = admm_step(prob, x, y, sigma, 1.0, AdmmNormalSolver(prob.A))
    w = x + sigma * (prob.A.rmatvec(y) - prob.c)
    np.testing.assert_allclose(z, (project(w, prob.box) - w) / sigma, rtol=1e-14, atol=1e-14)
    # first-order condition: x + sigma (z + A'y - c) lies in K and -z is in its normal cone
    u = x + sigma * (z + prob.A.rmatvec(y) - prob.c)
    assert prob.box.contains(u, tol=1e-12)
    v = np.random.default_rng(seed + 1).uniform(-1, 1, prob.n)
    cand = project(u + v, prob.box)
    assert -z @ (cand - u) <= 1e-9 * (1 + np.abs(z).sum())


@given(st.integers(0, 10_000))
def test_y_update_residual(seed):
    prob = tiny_lp(seed)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal(prob.n), rng.standard_normal(prob.m)
    sigma = 1.3
    _, y1, z = admm_step(prob, x, y, sigma, 1.0, AdmmNormalSolver(prob.A))
    M = prob.A.to_dense()
    rhs = prob.b / sigma - M @ (x / sigma + z - prob.c)
    assert np.linalg.norm(M @ M.T @ y1 - rhs) <= 1e-10 * (1 + np.linalg.norm(prob.b))


@pytest.mark.parametrize("gamma", [1.0, 1.618, 1.9])
@settings(max_examples=15)
@given(seed=st.integers(0, 10_000))
def test_converges_for_step_lengths(gamma, seed):
    prob = tiny_lp(seed)
    res = admm_run(prob, cfg=AdmmConfig(gamma_step=gamma, max_iters=5000))
    assert res.eta <= 1e-4


def test_cg_path_matches_cholesky():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((6, 15))
    prob = LpProblem(A, A @ rng.random(15), rng.standard_normal(15), BoxSet.nonnegative(15))
    a = admm_run(prob, cfg=AdmmConfig(max_iters=30, switch_tol=1e-12))
    b = admm_run(prob, cfg=AdmmConfig(max_iters=30, switch_tol=1e-12, direct_limit=0))
    np.testing.assert_allclose(a.point.x, b.point.x, rtol=1e-7, atol=1e-9)


def test_rank_deficiency_reported():
    # transportation constraints always have one redundant row
    prob = gen_transportation(3, 4, seed=0)
    with pytest.raises(RankDeficientError, match="full row rank"):
        admm_run(prob)
    dup = LpProblem(np.array([[1.0, 1.0], [1.0, 1.0]]), [1.0, 1.0], [1.0, 2.0], BoxSet.nonnegative(2))
    with pytest.raises(RankDeficientError):
        AdmmNormalSolver(dup.A)


def test_start_point_used(tiny):
    start = PrimalDualPoint([1.0, 0.0], [1.0])
    res = admm_run(tiny, start)
    assert res.iterations == 1 and res.status == "switched"


def test_max_iter_status(tiny):
    res = admm_run(tiny, cfg=AdmmConfig(max_iters=1, switch_tol=1e-14))
    assert res.status == "max-iter"
    assert len(res.etas) == 1
