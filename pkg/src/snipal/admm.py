"""Two-block ADMM on the dual ``min -b'y + delta*_K(-z)  s.t.  A'y + z = c``.

With a fixed penalty ``sigma`` and step length ``gamma`` in ``(0, 2)`` one sweep is

    z <- (Proj_K(w) - w) / sigma,            w = x + sigma (A'y - c)
    y <- (AA')^{-1} (b/sigma - A(x/sigma + z - c))
    x <- x + gamma sigma (z + A'y - c)

It is used to produce a cheap starting point for :func:`snipal.alm.snipal_solve`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np

from .box import moreau_dual_step
from .linalg.dense import CholeskyFactor, NotPositiveDefiniteError
from .linalg.krylov import cg_solve
from .problem import LpProblem, PrimalDualPoint, kkt_residual

logger = logging.getLogger(__name__)

__all__ = ["AdmmConfig", "AdmmResult", "RankDeficientError", "AdmmNormalSolver", "admm_step", "admm_run"]

# pivot ratio of chol(AA') below which A is treated as rank deficient
_RANK_TOL = 1e-13


class RankDeficientError(np.linalg.LinAlgError):
    """``AA'`` is singular to working precision, so the y-update is undefined."""


@dataclass(frozen=True)
class AdmmConfig:
    sigma: float = 1.0
    gamma_step: float = 1.9
    max_iters: int = 200
    switch_tol: float = 1e-4
    direct_limit: int = 2000
    cg_tol: float = 1e-12

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.gamma_step < 2:
            raise ValueError(f"gamma_step must lie strictly inside (0, 2), got {self.gamma_step}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not self.switch_tol > 0:
            raise ValueError("switch_tol must be positive")


@dataclass
class AdmmResult:
    point: PrimalDualPoint
    iterations: int
    status: str
    etas: list = field(default_factory=list)

    @property
    def eta(self) -> float:
        return self.etas[-1] if self.etas else float("nan")


class AdmmNormalSolver:
    """Solves ``AA' y = r``; dense Cholesky cached once, or CG above ``direct_limit`` rows."""

    def __init__(self, A, direct_limit: int = 2000, cg_tol: float = 1e-12):
        self.A = A
        self.m = A.shape[0]
        self.cg_tol = cg_tol
        self.factor = None
        if self.m <= direct_limit:
            S = A.to_sparse()
            M = (S @ S.T).toarray()
            try:
                self.factor = CholeskyFactor(M)
            except NotPositiveDefiniteError as exc:
                raise RankDeficientError(f"AA' is not positive definite (pivot {exc.pivot}); "
                                         "A does not have full row rank") from exc
            ratio = self.factor.pivot_ratio()
            if ratio < _RANK_TOL:
                raise RankDeficientError(f"AA' is numerically singular (pivot ratio {ratio:.2e}); "
                                         "A does not have full row rank")

    def solve(self, rhs) -> np.ndarray:
        if self.factor is not None:
            return self.factor.solve(rhs)
        op = lambda v: self.A.matvec(self.A.rmatvec(v))
        res = cg_solve(op, rhs, tol=self.cg_tol, maxit=max(2 * self.m, 100))
        if res.flag == "indefinite":
            raise RankDeficientError("CG met zero curvature on AA'; A does not have full row rank")
        return res.solution


def admm_step(prob: LpProblem, x, y, sigma: float, gamma: float, solver: AdmmNormalSolver):
    """One sweep; returns ``(x, y, z)``."""
    A = prob.A
    w = x + sigma * (A.rmatvec(y) - prob.c)
    z = moreau_dual_step(w, prob.box, sigma)
    y = solver.solve(prob.b / sigma - A.matvec(x / sigma + z - prob.c))
    x = x + gamma * sigma * (z + A.rmatvec(y) - prob.c)
    return x, y, z


def admm_run(prob: LpProblem, start: PrimalDualPoint | None = None,
             cfg: AdmmConfig | None = None) -> AdmmResult:
    """Iterate until the KKT residual (with the ADMM ``z``) is at most ``switch_tol``.

    Returns status ``"switched"`` on success and ``"max-iter"`` otherwise; the
    point carries ``z`` so callers can inspect it, though the solver restarts
    from ``(x, y)`` alone.

    Raises
    ------
    RankDeficientError
        If ``AA'`` cannot be factored.
    """
    cfg = cfg or AdmmConfig()
    solver = AdmmNormalSolver(prob.A, cfg.direct_limit, cfg.cg_tol)
    if start is None:
        x, y = np.zeros(prob.n), np.zeros(prob.m)
    else:
        x, y = np.array(start.x, dtype=float), np.array(start.y, dtype=float)
    z = prob.c - prob.A.rmatvec(y)
    etas = []
    status = "max-iter"
    it = 0
    for it in range(1, cfg.max_iters + 1):
        x, y, z = admm_step(prob, x, y, cfg.sigma, cfg.gamma_step, solver)
        eta = kkt_residual(prob, PrimalDualPoint(x, y, z)).eta
        etas.append(eta)
        if eta <= cfg.switch_tol:
            status = "switched"
            break
    logger.info("ADMM: %s after %d iterations, eta=%.2e", status, it, etas[-1] if etas else float("nan"))
    return AdmmResult(PrimalDualPoint(x, y, z), it, status, etas)
