import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from snipal.problem import BoxSet, LpProblem

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def tiny_lp(seed):
    """Random solvable LP with m <= 4, n <= 8 and either a finite box or x >= 0.

    Feasibility comes from ``b = A x_hat`` with ``x_hat`` inside the box; for
    the orthant case ``c = A'y + z`` with ``z > 0`` bounds the objective.
    """
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 5))
    n = int(rng.integers(m + 1, 9))
    A = rng.standard_normal((m, n))
    if rng.random() < 0.5:
        lo = -rng.random(n)
        up = rng.random(n) + 0.1
        box = BoxSet(lo, up)
        x_hat = lo + (up - lo) * rng.random(n)
        c = rng.standard_normal(n)
    else:
        box = BoxSet.nonnegative(n)
        x_hat = rng.random(n)
        c = A.T @ rng.standard_normal(m) + rng.random(n)
    return LpProblem(A, A @ x_hat, c, box)


def tiny_example():
    """A=[1 1], b=1, c=(1,2), x >= 0; optimum x=(1,0), y=1, value 1."""
    return LpProblem(np.array([[1.0, 1.0]]), np.array([1.0]), np.array([1.0, 2.0]), BoxSet.nonnegative(2))


@pytest.fixture
def tiny():
    return tiny_example()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_newton_case(rng, regime=None):
    """Random (A, active set, sigma, tau) with ``p < m`` or ``p >= m``."""
    from snipal.box import ActiveSet
    from snipal.linalg import as_operator

    m = int(rng.integers(2, 40))
    n = int(rng.integers(m + 1, 41)) if m < 40 else 41
    A = rng.standard_normal((m, n))
    regime = regime or ("lt" if rng.random() < 0.5 else "ge")
    if regime == "lt":
        p = int(rng.integers(1, m))
    else:
        p = int(rng.integers(m, n + 1))
    idx = np.sort(rng.choice(n, size=p, replace=False))
    sigma = float(10 ** rng.uniform(-2, 2))
    tau = float(10 ** rng.uniform(-3, 0))
    return as_operator(A), ActiveSet(idx, n), sigma, tau


def loose_g_case(rng):
    """A p < m system on which a 1e-2 MINRES solve of G stops well short of exact."""
    from snipal.box import ActiveSet
    from snipal.linalg import as_operator

    m = int(rng.integers(25, 40))
    n = m + int(rng.integers(5, 30))
    p = int(rng.integers(m // 2, m))
    A = rng.standard_normal((m, n)) * np.exp(rng.uniform(-2, 2, n))
    idx = np.sort(rng.choice(n, size=p, replace=False))
    return as_operator(A), ActiveSet(idx, n), float(10 ** rng.uniform(0, 2)), float(10 ** rng.uniform(-2, 0))


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion; printed in the terminal summary."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        _ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
