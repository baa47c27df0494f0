"""Ground truth and convergence diagnostics.

* :func:`vertex_enumerate_solve` is a brute-force LP oracle for tiny problems.
* :func:`rate_estimate` classifies the decay of a residual sequence.
* :func:`empirical_condition` estimates the extreme eigenvalues of a Newton
  matrix by Lanczos.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
import logging

import numpy as np
import scipy.linalg as sla

from .problem import LpProblem

logger = logging.getLogger(__name__)

__all__ = [
    "OracleSolution",
    "vertex_enumerate_solve",
    "rate_estimate",
    "RateEstimate",
    "ConditionEstimate",
    "empirical_condition",
]

MAX_ORACLE_N = 12


@dataclass
class OracleSolution:
    status: str
    value: float | None = None
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    basis: tuple | None = None
    n_vertices: int = 0


def _independent_rows(A, b, tol):
    """Drop dependent rows of ``[A b]``; returns (A_r, b_r) or None if inconsistent."""
    m = A.shape[0]
    if m == 0:
        return A, b
    _, R, piv = sla.qr(A.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R)) if R.size else np.zeros(0)
    r = int(np.sum(d > tol * max(1.0, d.max() if d.size else 0.0)))
    keep = np.sort(piv[:r])
    Ar, br = A[keep], b[keep]
    if r < m:
        # the dropped rows must be consistent combinations of the kept ones
        coef, *_ = np.linalg.lstsq(Ar.T, A.T, rcond=None)
        if np.max(np.abs(coef.T @ br - b)) > 1e-9 * (1 + np.abs(b).max()):
            return None
    return Ar, br


def vertex_enumerate_solve(prob: LpProblem, cap: float | None = None, tol: float = 1e-9) -> OracleSolution:
    """Solve a tiny LP exactly by enumerating basic solutions.

    Each candidate fixes ``n - m`` nonbasic variables at finite bounds and
    solves for the ``m`` basic ones.  Infinite bounds are replaced by
    ``+-cap`` for the enumeration (``cap`` is required when a variable has an
    infinite bound it could be fixed at, i.e. a free variable or an infinite
    upper bound); an optimum that moves when ``cap`` is doubled is reported
    as unbounded.

    Parameters
    ----------
    prob : LpProblem
        At most ``MAX_ORACLE_N`` (12) variables.
    cap : float, optional
        Bounding box half-width replacing infinite bounds.  Defaults to
        ``1e6 * (1 + ||b||_inf)``.
    tol : float
        Feasibility tolerance on bounds and equalities (relative).
    """
    if prob.n > MAX_ORACLE_N:
        raise ValueError(f"vertex enumeration is limited to n <= {MAX_ORACLE_N}, got n={prob.n}")
    A = prob.A.to_dense()
    b = np.asarray(prob.b, dtype=float)
    c = np.asarray(prob.c, dtype=float)
    lo0, up0 = prob.box.lower, prob.box.upper
    if cap is None:
        cap = 1e6 * (1.0 + (np.abs(b).max() if b.size else 0.0))
    red = _independent_rows(A, b, 1e-10)
    if red is None:
        return OracleSolution("infeasible")
    Ar, br = red
    best = _enumerate(Ar, br, c, np.maximum(lo0, -cap), np.minimum(up0, cap), tol)
    if best is None:
        return OracleSolution("infeasible")
    infinite = ~(np.isfinite(lo0) & np.isfinite(up0))
    if np.any(infinite):
        wide = _enumerate(Ar, br, c, np.maximum(lo0, -2 * cap), np.minimum(up0, 2 * cap), tol)
        if wide[0] < best[0] - 1e-9 * (1 + abs(best[0])):
            return OracleSolution("unbounded", n_vertices=best[3])
    value, x, basis, count, y = best
    return OracleSolution("optimal", float(value + prob.offset), x, y, basis, count)


def _enumerate(A, b, c, lo, up, tol):
    m, n = A.shape
    best_val, best_x, best_basis = np.inf, None, None
    optimal = []
    count = 0
    scale = 1.0 + (np.abs(b).max() if b.size else 0.0)
    for B in combinations(range(n), m):
        B = list(B)
        AB = A[:, B]
        if m and abs(np.linalg.det(AB)) < 1e-12 * max(1.0, np.abs(AB).max() ** m):
            continue
        N = [j for j in range(n) if j not in B]
        choices = [(lo[j], up[j]) if lo[j] != up[j] else (lo[j],) for j in N]
        corners = list(product(*choices))
        xN = np.array(corners, dtype=float).reshape(len(corners), len(N))
        rhs = b[:, None] - A[:, N] @ xN.T
        xB = np.linalg.solve(AB, rhs).T if m else np.zeros((xN.shape[0], 0))
        x = np.empty((xN.shape[0], n))
        x[:, B] = xB
        x[:, N] = xN
        width = tol * (1.0 + np.abs(x))
        ok = np.all((x >= lo - width) & (x <= up + width), axis=1)
        ok &= np.all(np.abs(x @ A.T - b) <= tol * scale, axis=1) if m else ok
        count += int(ok.sum())
        for row in x[ok]:
            row = np.clip(row, lo, up)
            v = float(c @ row)
            if v < best_val - 1e-12 * (1 + abs(v)):
                best_val, best_x, best_basis = v, row, tuple(B)
                optimal = [(row, tuple(B))]
            elif abs(v - best_val) <= 1e-12 * (1 + abs(v)):
                optimal.append((row, tuple(B)))
    if best_x is None:
        return None
    y = _dual_from_bases(A, c, lo, up, optimal, tol)
    return best_val, best_x, best_basis, count, y


def _dual_from_bases(A, c, lo, up, optimal, tol):
    """Multipliers ``A_B' y = c_B`` from an optimal basis whose reduced costs have the right signs."""
    m = A.shape[0]
    if m == 0:
        return np.zeros(0)
    for x, B in optimal:
        y = np.linalg.solve(A[:, list(B)].T, c[list(B)])
        z = c - A.T @ y
        t = 1e-9 * (1 + np.abs(c).max())
        at_lo = np.abs(x - lo) <= tol * (1 + np.abs(x))
        at_up = np.abs(x - up) <= tol * (1 + np.abs(x))
        # z_j >= 0 allowed at lower, <= 0 at upper, 0 strictly inside
        good = np.where(at_lo & at_up, True,
                        np.where(at_lo, z >= -t, np.where(at_up, z <= t, np.abs(z) <= t)))
        if np.all(good):
            return y
    return None


@dataclass
class RateEstimate:
    ratios: np.ndarray
    trend: str

    def __iter__(self):
        return iter((self.ratios, self.trend))


def rate_estimate(seq, tail: int | None = None, linear_cap: float = 1.0 - 1e-3) -> RateEstimate:
    """Successive ratios ``r_k = e_{k+1} / e_k`` and a trend label.

    ``"superlinear"`` when the ratios are strictly decreasing and below one,
    ``"linear"`` when every ratio is at most ``linear_cap``, otherwise
    ``"none"``.  ``tail`` restricts the classification to the last ``tail``
    ratios; all ratios are still returned.
    """
    e = np.asarray(seq, dtype=float)
    if e.ndim != 1 or e.size < 3:
        raise ValueError("need a sequence of at least 3 values")
    if np.any(e <= 0):
        raise ValueError("sequence entries must be positive")
    r = e[1:] / e[:-1]
    t = r if tail is None else r[-max(2, int(tail)):]
    if np.all(np.diff(t) < 0) and t[-1] < 1 and t[0] < 1:
        trend = "superlinear"
    elif np.all(t <= linear_cap):
        trend = "linear"
    else:
        trend = "none"
    return RateEstimate(r, trend)


@dataclass
class ConditionEstimate:
    lam_min: float
    lam_max: float
    kappa: float
    steps: int

    def __iter__(self):
        return iter((self.lam_min, self.lam_max, self.kappa))


def lanczos_extremes(apply, dim: int, steps: int, seed: int = 0):
    """Extreme Ritz values of a symmetric operator after ``steps`` Lanczos steps
    with full reorthogonalization."""
    rng = np.random.default_rng(seed)
    k = min(steps, dim)
    Q = np.zeros((dim, k))
    alpha = np.zeros(k)
    beta = np.zeros(k)
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    j = 0
    for j in range(k):
        Q[:, j] = q
        w = apply(q)
        alpha[j] = q @ w
        w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
        w -= Q[:, : j + 1] @ (Q[:, : j + 1].T @ w)
        nb = np.linalg.norm(w)
        if j + 1 == k or nb <= 1e-12 * max(1.0, abs(alpha[j])):
            break
        beta[j] = nb
        q = w / nb
    n_used = j + 1
    ritz = sla.eigvalsh_tridiagonal(alpha[:n_used], beta[: n_used - 1]) if n_used > 1 else alpha[:1]
    return float(ritz[0]), float(ritz[-1]), n_used


def empirical_condition(sys, probes: int = 50, seed: int = 0) -> ConditionEstimate:
    """Lanczos estimate of ``lam_min``, ``lam_max`` and ``kappa`` of ``H``.

    Ritz values lie inside the spectrum, so ``kappa`` never exceeds the true
    condition number.
    """
    if probes < 20:
        raise ValueError("probes must be at least 20")
    lo, hi, used = lanczos_extremes(sys.apply_h, sys.m, probes, seed)
    return ConditionEstimate(lo, hi, hi / lo, used)
