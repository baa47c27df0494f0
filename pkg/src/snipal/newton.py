"""Semismooth Newton linear systems ``H dy = g`` with ``H = (tau/sigma) I + sigma A_J A_J'``.

Four strategies are available:

``DIRECT_H``
    Cholesky of the ``m x m`` matrix ``A_J A_J' + rho I`` (``p >= m``).
``SMW_G``
    Sherman-Morrison-Woodbury reduction to ``G = rho I_p + A_J' A_J``
    (``p < m``): ``dy = (sigma/tau) (g - A_J G^{-1} A_J' g)``.
``ITERATIVE_H``
    Krylov solve on ``H`` using matrix-free products.
``ITERATIVE_G``
    Krylov solve on ``G``; the outer residual is recovered exactly as
    ``-A_J xi / rho`` from the inner residual ``xi``.

Here ``rho = tau / sigma**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
import logging

import numpy as np

from .box import ActiveSet
from .linalg.dense import CholeskyFactor, NotPositiveDefiniteError
from .linalg.krylov import cg_solve, minres_solve
from .linalg.operators import LinearOperator

logger = logging.getLogger(__name__)

__all__ = ["Strategy", "NewtonSystem", "NewtonSolve", "build", "condition_bound"]

DIRECT_LIMIT = 2000


class Strategy(str, Enum):
    DIRECT_H = "direct_h"
    SMW_G = "smw_g"
    ITERATIVE_H = "iterative_h"
    ITERATIVE_G = "iterative_g"


@dataclass
class NewtonSolve:
    dy: np.ndarray
    residual: np.ndarray
    strategy: Strategy
    krylov_iters: int = 0
    inner_tol: float | None = None
    inner_residual: np.ndarray | None = None
    flag: str = "converged"

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))


@dataclass(frozen=True, eq=False)
class NewtonSystem:
    sigma: float
    tau: float
    aset: ActiveSet
    a_sub: LinearOperator
    strategy: Strategy
    krylov: str = "minres"
    maxit: int | None = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.sigma > 0 and self.tau > 0):
            raise ValueError("sigma and tau must be positive")
        if self.krylov not in ("minres", "cg"):
            raise ValueError(f"unknown Krylov method {self.krylov!r}")

    @property
    def rho(self) -> float:
        return self.tau / self.sigma**2

    @property
    def m(self) -> int:
        return self.a_sub.shape[0]

    @property
    def p(self) -> int:
        return self.aset.p

    def apply_h(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.m,):
            raise ValueError(f"v has shape {v.shape}, expected ({self.m},)")
        out = (self.tau / self.sigma) * v
        if self.p:
            out = out + self.sigma * self.a_sub.matvec(self.a_sub.rmatvec(v))
        return out

    def apply_g(self, v) -> np.ndarray:
        return self.rho * v + self.a_sub.rmatvec(self.a_sub.matvec(v))

    def dense_h(self) -> np.ndarray:
        S = self.a_sub.to_sparse()
        return (self.tau / self.sigma) * np.eye(self.m) + self.sigma * (S @ S.T).toarray()

    @cached_property
    def _sparse_sub(self):
        return self.a_sub.to_sparse()

    @cached_property
    def _factor(self) -> CholeskyFactor:
        S = self._sparse_sub
        if self.strategy is Strategy.DIRECT_H:
            M = (S @ S.T).toarray()
        else:
            M = (S.T @ S).toarray()
        M[np.diag_indices_from(M)] += self.rho
        return CholeskyFactor(M)

    @cached_property
    def _frob(self) -> float:
        return float(np.sqrt(np.sum(self.a_sub.column_norms_sq())))

    def _krylov(self):
        return minres_solve if self.krylov == "minres" else cg_solve

    def solve(self, g, tol: float, inner_tol: float | None = None) -> NewtonSolve:
        """Solve ``H dy = g`` to absolute residual ``tol``.

        ``inner_tol`` overrides the relative tolerance of the inner Krylov
        solve on the G-system (used to study the residual mapping).
        """
        g = np.asarray(g, dtype=float)
        if g.shape != (self.m,):
            raise ValueError(f"g has shape {g.shape}, expected ({self.m},)")
        if not np.any(g):
            return NewtonSolve(np.zeros(self.m), np.zeros(self.m), self.strategy)
        if self.p == 0:
            return NewtonSolve((self.sigma / self.tau) * g, np.zeros(self.m), self.strategy)
        strategy = self.strategy
        if strategy in (Strategy.DIRECT_H, Strategy.SMW_G):
            try:
                factor = self._factor
            except NotPositiveDefiniteError as exc:
                fallback = Strategy.ITERATIVE_H if strategy is Strategy.DIRECT_H else Strategy.ITERATIVE_G
                logger.warning("factorization failed (%s); falling back to %s", exc, fallback.value)
                return self._solve_iterative(g, tol, inner_tol, fallback)
            if strategy is Strategy.DIRECT_H:
                dy = factor.solve(g) / self.sigma
            else:
                S = self._sparse_sub
                v = factor.solve(S.T @ g)
                dy = (self.sigma / self.tau) * (g - S @ v)
            return NewtonSolve(dy, g - self.apply_h(dy), strategy)
        return self._solve_iterative(g, tol, inner_tol, strategy)

    def _solve_iterative(self, g, tol, inner_tol, strategy) -> NewtonSolve:
        solver = self._krylov()
        maxit = self.maxit
        if strategy is Strategy.ITERATIVE_H:
            res = solver(self.apply_h, g, tol=0.0, maxit=maxit or max(2 * self.m, 50), atol=tol)
            return NewtonSolve(res.solution, g - self.apply_h(res.solution), strategy,
                               res.iterations, tol, None, res.flag)
        A = self.a_sub
        rhs = A.rmatvec(g)
        # ||eta|| <= ||A_J|| ||xi|| / rho, with ||A_J|| bounded by its Frobenius norm
        if inner_tol is None:
            atol, rtol = tol * self.rho / (1.0 + self._frob), 0.0
        else:
            atol, rtol = 0.0, inner_tol
        res = solver(self.apply_g, rhs, tol=rtol, maxit=maxit or max(2 * self.p, 50), atol=atol)
        v = res.solution
        dy = (self.sigma / self.tau) * (g - A.matvec(v))
        eta = -A.matvec(res.residual) / self.rho
        logger.debug("G-system: inner atol=%.3e rtol=%.3e iters=%d", atol, rtol, res.iterations)
        return NewtonSolve(dy, eta, strategy, res.iterations, atol if inner_tol is None else rtol,
                           res.residual, res.flag)


def _select(m: int, p: int, direct_limit: int) -> Strategy:
    if p >= m:
        return Strategy.DIRECT_H if m <= direct_limit else Strategy.ITERATIVE_H
    return Strategy.SMW_G if p <= direct_limit else Strategy.ITERATIVE_G


def build(prob, aset: ActiveSet, sigma: float, tau: float, strategy_hint=None,
          direct_limit: int = DIRECT_LIMIT, krylov: str = "minres", maxit: int | None = None) -> NewtonSystem:
    """Assemble the Newton system for active set ``aset``.

    ``strategy_hint`` may be a :class:`Strategy`, one of its values, or one of
    ``"auto"``, ``"direct"`` (direct H or SMW by the ``p`` vs ``m`` rule),
    ``"smw"``, ``"minres"``/``"cg"`` (iterative, H or G by the same rule).
    """
    A = prob if isinstance(prob, LinearOperator) else prob.A
    m = A.shape[0]
    a_sub = A.column_subset(aset.indices)
    p = aset.p
    hint = strategy_hint.value if isinstance(strategy_hint, Strategy) else strategy_hint
    if hint in (None, "auto"):
        strategy = _select(m, p, direct_limit)
    elif hint == "direct":
        strategy = Strategy.DIRECT_H if p >= m else Strategy.SMW_G
    elif hint == "smw":
        strategy = Strategy.SMW_G
    elif hint in ("minres", "cg"):
        strategy = Strategy.ITERATIVE_H if p >= m else Strategy.ITERATIVE_G
        krylov = hint
    else:
        strategy = Strategy(hint)
    return NewtonSystem(float(sigma), float(tau), aset, a_sub, strategy, krylov, maxit)


def condition_bound(sys: NewtonSystem, norm_a: float) -> float:
    """Upper bound ``1 + ||A||^2 sigma^2 / tau`` on the condition number of H."""
    return 1.0 + norm_a**2 * sys.sigma**2 / sys.tau
