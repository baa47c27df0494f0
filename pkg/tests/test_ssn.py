import numpy as np
import pytest
from hypothesis import given, strategies as st

from snipal.problem import BoxSet, LpProblem
from snipal.ssn import LineSearchError, SsnConfig, Subproblem, grad_psi, psi_value, ssn_minimize

from conftest import tiny_lp

# A=[1 1], b=1, c=0, K=R2+, x~=0, y~=0, sigma=tau=1 gives psi(y) = -y + 1.5 y^2 for y > 0
SCALAR = LpProblem(np.array([[1.0, 1.0]]), np.array([1.0]), np.zeros(2), BoxSet.nonnegative(2))
ZERO2, ZERO1 = np.zeros(2), np.zeros(1)


def _scalar_psi(y):
    # independent scalar formula for the instance above
    s = max(y, 0.0)
    return -y - 2 * s * (-y) - 2 * s * s / 2 + 0.5 * y * y


def test_psi_example():
    assert psi_value(SCALAR, ZERO2, ZERO1, 1.0, 1.0, np.array([1.0])) == pytest.approx(0.5)
    for y in (-0.7, 0.2, 1.0, 3.5):
        assert psi_value(SCALAR, ZERO2, ZERO1, 1.0, 1.0, np.array([y])) == pytest.approx(_scalar_psi(y))


def test_grad_example():
    np.testing.assert_allclose(grad_psi(SCALAR, ZERO2, ZERO1, 1.0, 1.0, np.array([1.0])), [2.0])


def test_minimize_example():
    res = ssn_minimize(SCALAR, ZERO2, ZERO1, 1.0, 1.0, SsnConfig(grad_tol=1e-12))
    assert res.status == "converged"
    assert abs(res.y[0] - 1 / 3) <= 1e-10
    assert res.iterations <= 3


def test_start_at_minimizer_takes_no_steps():
    res = ssn_minimize(SCALAR, ZERO2, ZERO1, 1.0, 1.0, SsnConfig(grad_tol=1e-12), y0=np.array([1 / 3]))
    assert res.iterations == 0
    assert res.status == "converged"


def test_stationary_at_kkt_point(tiny):
    # x=(1,0), y=1 is a KKT pair of the tiny LP
    x, y = np.array([1.0, 0.0]), np.array([1.0])
    np.testing.assert_allclose(grad_psi(tiny, x, y, 0.7, 0.3, y), [0.0], atol=1e-15)
    res = ssn_minimize(tiny, x, y, 0.7, 0.3, SsnConfig(grad_tol=1e-12))
    assert res.iterations == 0


def test_free_box_is_quadratic_and_one_newton_step():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((3, 6))
    prob = LpProblem(A, rng.standard_normal(3), rng.standard_normal(6), BoxSet.free(6))
    xt, yt = rng.standard_normal(6), rng.standard_normal(3)
    sigma, tau = 0.8, 0.5
    # with Pi = identity, psi is an explicit quadratic in y
    Q = sigma * A @ A.T + tau / sigma * np.eye(3)

    def quad(y):
        v = prob.c - A.T @ y
        s = xt - sigma * v
        return -prob.b @ y - s @ v - (s - xt) @ (s - xt) / (2 * sigma) + tau / (2 * sigma) * (y - yt) @ (y - yt)

    y = rng.standard_normal(3)
    assert psi_value(prob, xt, yt, sigma, tau, y) == pytest.approx(quad(y), rel=1e-12)
    res = ssn_minimize(prob, xt, yt, sigma, tau, SsnConfig(grad_tol=1e-10))
    assert res.iterations == 1
    assert res.trace[0]["step"] == 1.0
    g0 = grad_psi(prob, xt, yt, sigma, tau, yt)
    np.testing.assert_allclose(res.y, yt - np.linalg.solve(Q, g0), rtol=1e-9)


def test_locally_affine_projection_region():
    # every component of w strictly outside a finite box: J is empty, Pi is locally constant
    prob = LpProblem(np.array([[1.0, 2.0]]), [0.5], [10.0, -10.0], BoxSet([0.0, 0.0], [1.0, 1.0]))
    sub = Subproblem(prob, np.zeros(2), np.zeros(1), 1.0, 2.0)
    y = np.array([0.1])
    ev = sub.evaluate(y)
    np.testing.assert_array_equal(ev.proj, [0.0, 1.0])
    np.testing.assert_allclose(ev.grad, -prob.b + prob.A.matvec(ev.proj) + 2.0 * (y - 0.0))
    h = 1e-4
    slope = (sub.value(y + h) - sub.value(y - h)) / (2 * h)
    assert slope == pytest.approx(ev.grad[0], rel=1e-8)


@given(st.integers(0, 10_000))
def test_gradient_matches_central_differences(seed):
    prob = tiny_lp(seed)
    rng = np.random.default_rng(seed)
    xt, yt = rng.standard_normal(prob.n), rng.standard_normal(prob.m)
    sigma, tau = 10 ** rng.uniform(-1, 1), 10 ** rng.uniform(-2, 0)
    sub = Subproblem(prob, xt, yt, sigma, tau)
    y = rng.standard_normal(prob.m)
    g = sub.gradient(y)
    h = 1e-6 * (1 + np.linalg.norm(y))
    fd = np.array([(sub.value(y + h * e) - sub.value(y - h * e)) / (2 * h) for e in np.eye(prob.m)])
    assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1e-3) + 1e-7


@given(st.integers(0, 10_000))
def test_armijo_descent_from_trace(seed):
    prob = tiny_lp(seed)
    rng = np.random.default_rng(seed)
    cfg = SsnConfig(grad_tol=1e-10)
    res = ssn_minimize(prob, rng.standard_normal(prob.n), rng.standard_normal(prob.m), 2.0, 0.5, cfg)
    assert res.status in ("converged", "stalled")
    for row in res.trace:
        assert row["slope"] < 0
        noise = 1e-12 * (1 + abs(row["psi"]))
        assert row["new_psi"] <= row["psi"] + cfg.mu * row["step"] * row["slope"] + noise


def test_superlinear_tail_and_unit_step():
    rng = np.random.default_rng(11)
    m, n = 20, 60
    A = rng.standard_normal((m, n))
    prob = LpProblem(A, A @ rng.random(n), rng.standard_normal(n), BoxSet.nonnegative(n))
    res = ssn_minimize(prob, rng.random(n), np.zeros(m), 1.0, 1e-1, SsnConfig(grad_tol=1e-11))
    assert res.status == "converged"
    norms = [r["grad_norm"] for r in res.trace] + [res.grad_norm]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert res.trace[-1]["step"] == 1.0
    # the active set settles in the tail, after which ratios fall
    assert norms[-1] / norms[-2] < norms[-2] / norms[-3] or norms[-1] <= 1e-11


def test_config_validation():
    for bad in ({"eta_bar": 1.0}, {"gamma_exp": 0.0}, {"mu": 0.5}, {"delta_ls": 1.0}, {"max_backtracks": 0}):
        with pytest.raises(ValueError):
            SsnConfig(**bad)
    with pytest.raises(ValueError):
        Subproblem(SCALAR, ZERO2, ZERO1, 0.0, 1.0)


def test_max_iter_status():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((10, 30))
    prob = LpProblem(A, A @ rng.random(30), rng.standard_normal(30), BoxSet.nonnegative(30))
    res = ssn_minimize(prob, np.zeros(30), np.zeros(10), 10.0, 1e-3, SsnConfig(max_iters=1, grad_tol=1e-14))
    assert res.status == "max-iter" and res.iterations == 1


def test_line_search_error_carries_diagnostics(monkeypatch):
    # a corrupted gradient makes the Newton direction point uphill for psi
    from snipal import ssn

    orig = ssn.Subproblem.evaluate

    def bad(self, y, aty=None, with_grad=True):
        ev = orig(self, y, aty, with_grad)
        if ev.grad is not None:
            ev.grad = -ev.grad + 5.0
        return ev

    monkeypatch.setattr(ssn.Subproblem, "evaluate", bad)
    with pytest.raises(LineSearchError) as info:
        ssn_minimize(SCALAR, ZERO2, ZERO1, 1.0, 1.0, SsnConfig(max_backtracks=5))
    assert "grad_norm" in info.value.diagnostics
