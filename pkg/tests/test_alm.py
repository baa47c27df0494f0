import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snipal.alm import (
    InnerSolverFailure,
    SnipalConfig,
    SolverTrace,
    finite_termination_probe,
    snipal_solve,
    weighted_norm,
)
from snipal.problem import PrimalDualPoint, kkt_residual
from snipal.ssn import SsnConfig, grad_psi

from conftest import tiny_lp


def test_tiny_lp_from_zero(tiny):
    res = snipal_solve(tiny)
    assert res.status == "converged"
    assert res.kkt.eta <= 1e-8
    np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-7)
    assert res.kkt.pobj == pytest.approx(1.0, abs=1e-7)


def test_start_at_kkt_point(tiny):
    start = PrimalDualPoint([1.0, 0.0], [1.0])
    res = snipal_solve(tiny, start)
    assert res.iterations <= 1
    assert res.kkt.eta <= 1e-8


def test_fixed_point_of_one_outer_step(tiny):
    # at a KKT pair the subproblem gradient vanishes and Step 2 returns x unchanged
    from snipal.ssn import ssn_minimize

    x, y = np.array([1.0, 0.0]), np.array([1.0])
    for sigma, tau in ((0.5, 1.0), (3.0, 1e-3)):
        np.testing.assert_allclose(grad_psi(tiny, x, y, sigma, tau, y), [0.0], atol=1e-15)
        res = ssn_minimize(tiny, x, y, sigma, tau, SsnConfig(grad_tol=1e-14))
        assert res.iterations == 0
        np.testing.assert_array_equal(res.y, y)
        np.testing.assert_array_equal(res.proj, x)


def test_dimension_error_before_iterating(tiny):
    with pytest.raises(ValueError, match="start point"):
        snipal_solve(tiny, PrimalDualPoint([0.0, 0.0, 0.0], [0.0]))


def test_max_outer_zero(tiny):
    res = snipal_solve(tiny, cfg=SnipalConfig(max_outer=0))
    assert res.status == "max-iter"
    assert res.iterations == 0
    assert res.kkt.eta == pytest.approx(0.5)


@given(st.integers(0, 10_000))
@settings(max_examples=25)
def test_schedules_and_gate_threshold(seed):
    prob = tiny_lp(seed)
    cfg = SnipalConfig()
    res = snipal_solve(prob, cfg=cfg)
    rows = res.trace.rows
    assert res.status == "converged"
    for a, b in zip(rows, rows[1:]):
        assert b.sigma >= a.sigma
        assert b.tau <= a.tau
    for k, r in enumerate(rows):
        assert r.tau >= cfg.tau_min
        assert r.eps == cfg.eps(k, res.trace.eta0)
        assert r.threshold_a == min(math.sqrt(r.tau), 1.0) * r.eps / r.sigma
        assert r.criterion in ("A", "B")
        if r.criterion == "A":
            assert r.grad_norm <= r.threshold_a


def test_schedule_formulas():
    cfg = SnipalConfig(tau0=2.0, tau_decay=0.5, tau_min=0.3, eps0=1.0, eps_rate=0.25, delta0=0.4, delta_rate=0.5)
    assert [cfg.tau(k) for k in range(4)] == [2.0, 1.0, 0.5, 0.3]
    assert cfg.eps(2, 1.0) == 1.0 * 0.0625 * 2.0
    assert cfg.delta(1) == 0.2
    # geometric sequences are summable
    assert sum(cfg.eps(k, 0.0) for k in range(200)) < 1.0 / (1 - 0.25) + 1e-12


def test_initial_sigma(tiny):
    cfg = SnipalConfig()
    assert cfg.initial_sigma(tiny) == 0.5
    assert cfg.initial_sigma(tiny, 1e-2) == pytest.approx(50.0)
    assert cfg.initial_sigma(tiny, 5.0) == 0.5
    assert SnipalConfig(sigma0=3.0).initial_sigma(tiny, 1e-3) == 3.0
    assert SnipalConfig(sigma_max=0.1).initial_sigma(tiny) == 0.1


def test_config_validation():
    bad = [{"sigma0": 0.0}, {"sigma_growth": 1.0}, {"tau_min": 0.0}, {"tau_decay": 0.0},
           {"eps_rate": 1.0}, {"delta0": 1.0}, {"kkt_tol": 0.0}, {"max_outer": -1}]
    for kw in bad:
        with pytest.raises(ValueError):
            SnipalConfig(**kw)


def test_weighted_norm_examples():
    assert weighted_norm([3.0], [4.0], 1.0) == 5.0
    assert weighted_norm([0.0], [3.0, 4.0], 7.0) == 5.0
    assert weighted_norm([1.0], [0.0], 4.0) == 2.0
    with pytest.raises(ValueError):
        weighted_norm([1.0], [1.0], 0.0)


def test_finite_termination_probe_examples():
    assert finite_termination_probe([1e-2, 3e-4, 1e-12]) == 3
    assert finite_termination_probe([1e-2, 5e-3, 2e-3, 1e-3, 5e-4]) is None
    assert finite_termination_probe([1e-12]) is None
    assert finite_termination_probe([1e-5, 1e-7, 1e-9], kkt_tol=1e-8) is None


def test_trace_round_trip(tiny):
    res = snipal_solve(tiny)
    back = SolverTrace.from_dict(res.trace.to_dict())
    assert back == res.trace
    assert len(back) == res.iterations
    assert back.total_ssn == sum(r.itssn for r in res.trace.rows)


def test_callback_sees_every_row(tiny):
    seen = []
    res = snipal_solve(tiny, callback=seen.append)
    assert seen == res.trace.rows


def test_final_report_matches_point(tiny):
    res = snipal_solve(tiny)
    rep = kkt_residual(tiny, res.point)
    assert rep.eta == res.kkt.eta
    np.testing.assert_allclose(res.point.z, tiny.c - tiny.A.rmatvec(res.y))


def test_inner_failure_carries_trace(tiny, monkeypatch):
    from snipal import alm

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic")

    monkeypatch.setattr(alm, "ssn_minimize", boom)
    with pytest.raises(InnerSolverFailure) as info:
        snipal_solve(tiny)
    assert isinstance(info.value.trace, SolverTrace)
    assert "outer iteration 1" in str(info.value)


def test_forced_acceptance_is_flagged(tiny):
    cfg = SnipalConfig(max_resumptions=0, delta0=0.0, ssn=SsnConfig(max_iters=0), max_outer=2)
    res = snipal_solve(tiny, cfg=cfg)
    assert any(r.criterion == "forced" for r in res.trace.rows)
    assert res.warnings


def test_sigma_frozen_after_expensive_inner_solve(tiny):
    cfg = SnipalConfig(freeze_sigma_after=0, kkt_tol=1e-12)
    res = snipal_solve(tiny, cfg=cfg)
    for a, b in zip(res.trace.rows, res.trace.rows[1:]):
        if a.itssn > 0:
            assert b.sigma == a.sigma


@pytest.mark.parametrize("seed", range(10))
def test_random_sparse_small(seed):
    from snipal.instances import gen_random_sparse

    prob = gen_random_sparse(20, 100, 0.2, seed=seed)
    res = snipal_solve(prob)
    assert res.status == "converged"
    x_hat = prob.meta["feasible_point"]
    # weak duality against the stored feasible point
    assert res.kkt.pobj <= prob.c @ x_hat + 1e-6 * (1 + abs(res.kkt.pobj))
