"""MINRES and CG without preconditioning.

Both return a :class:`KrylovResult` whose ``residual`` is recomputed explicitly
as ``rhs - op(solution)`` at exit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import hypot

import numpy as np

__all__ = ["KrylovResult", "minres_solve", "cg_solve"]

CONVERGED = "converged"
MAX_ITER = "max-iter"
BREAKDOWN = "breakdown"
INDEFINITE = "indefinite"


@dataclass
class KrylovResult:
    solution: np.ndarray
    residual: np.ndarray
    iterations: int
    flag: str
    resnorms: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.flag == CONVERGED

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))


def _as_callable(op):
    if callable(op) and not hasattr(op, "matvec"):
        return op
    if hasattr(op, "matvec"):
        return op.matvec
    M = np.asarray(op, dtype=float)
    return lambda v: M @ v


def minres_solve(op, rhs, tol: float = 1e-10, maxit: int | None = None, atol: float = 0.0) -> KrylovResult:
    """Solve ``op x = rhs`` for symmetric ``op`` by MINRES from ``x0 = 0``.

    Stops once ``||rhs - op x|| <= max(tol * ||rhs||, atol)``.  Singular but
    consistent systems (``rhs`` in the range of ``op``) are allowed.
    ``resnorms`` holds the Lanczos-recurrence residual norms, nonincreasing by
    construction.
    """
    A = _as_callable(op)
    b = np.asarray(rhs, dtype=float)
    n = b.size
    if maxit is None:
        maxit = max(2 * n, 20)
    beta1 = float(np.linalg.norm(b))
    x = np.zeros(n)
    if beta1 == 0.0:
        return KrylovResult(x, b.copy(), 0, CONVERGED, [0.0])
    thresh = max(tol * beta1, atol)

    v_old = np.zeros(n)
    v = b / beta1
    beta = 0.0
    c_old, s_old, c, s = 1.0, 0.0, 1.0, 0.0
    w_old = np.zeros(n)
    w = np.zeros(n)
    phi = beta1
    resnorms = [beta1]
    flag = MAX_ITER
    k = 0
    while k < maxit:
        k += 1
        p = A(v)
        alpha = float(v @ p)
        p = p - alpha * v - beta * v_old
        beta_next = float(np.linalg.norm(p))
        # apply the two previous Givens rotations to column k of the tridiagonal
        eps = s_old * beta
        delta_bar = c_old * beta
        delta = c * delta_bar + s * alpha
        gamma_bar = -s * delta_bar + c * alpha
        gamma = hypot(gamma_bar, beta_next)
        if gamma == 0.0:
            flag = BREAKDOWN
            break
        c_new, s_new = gamma_bar / gamma, beta_next / gamma
        w_new = (v - delta * w - eps * w_old) / gamma
        x = x + (c_new * phi) * w_new
        phi = -s_new * phi
        resnorms.append(abs(phi))
        w_old, w = w, w_new
        c_old, s_old, c, s = c, s, c_new, s_new
        if abs(phi) <= thresh or beta_next == 0.0:
            r = b - A(x)
            if np.linalg.norm(r) <= thresh:
                return KrylovResult(x, r, k, CONVERGED, resnorms)
            if beta_next == 0.0:
                flag = BREAKDOWN
                break
        v_old, v = v, p / beta_next
        beta = beta_next
    r = b - A(x)
    if np.linalg.norm(r) <= thresh:
        flag = CONVERGED
    return KrylovResult(x, r, k, flag, resnorms)


def cg_solve(op, rhs, tol: float = 1e-10, maxit: int | None = None, atol: float = 0.0) -> KrylovResult:
    """Conjugate gradients for symmetric positive definite ``op`` from ``x0 = 0``.

    Nonpositive curvature ``p'Ap <= 0`` stops the iteration with flag
    ``"indefinite"``.
    """
    A = _as_callable(op)
    b = np.asarray(rhs, dtype=float)
    n = b.size
    if maxit is None:
        maxit = max(2 * n, 20)
    x = np.zeros(n)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    thresh = max(tol * bnorm, atol)
    rr = float(r @ r)
    resnorms = [np.sqrt(rr)]
    if np.sqrt(rr) <= thresh:
        return KrylovResult(x, r, 0, CONVERGED, resnorms)
    p = r.copy()
    flag = MAX_ITER
    k = 0
    while k < maxit:
        k += 1
        Ap = A(p)
        curv = float(p @ Ap)
        if curv <= 0.0:
            flag = INDEFINITE
            break
        alpha = rr / curv
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(r @ r)
        resnorms.append(np.sqrt(rr_new))
        if np.sqrt(rr_new) <= thresh:
            r_true = b - A(x)
            if np.linalg.norm(r_true) <= thresh:
                return KrylovResult(x, r_true, k, CONVERGED, resnorms)
            r = r_true
            rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    r = b - A(x)
    if flag == MAX_ITER and np.linalg.norm(r) <= thresh:
        flag = CONVERGED
    return KrylovResult(x, r, k, flag, resnorms)
