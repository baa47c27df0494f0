"""Estimator-style façade over the solver.

``SnipalLP().fit(A, b, c)`` solves ``min c'x s.t. Ax = b, lower <= x <= upper``
and stores the solution in fitted attributes.  There is nothing to predict;
the class exists so that parameters can be inspected, cloned and set with
the familiar ``get_params``/``set_params`` protocol.
"""
from __future__ import annotations

from dataclasses import replace
import logging

from sklearn.base import BaseEstimator

from . import _validation as V
from .admm import AdmmConfig, RankDeficientError, admm_run
from .alm import SnipalConfig, SnipalResult, snipal_solve
from .ssn import SsnConfig

logger = logging.getLogger(__name__)

__all__ = ["SnipalLP", "solve_lp", "LINSYS_CHOICES", "WARMSTART_CHOICES"]

LINSYS_CHOICES = {"auto", "direct", "smw", "minres", "cg"}
WARMSTART_CHOICES = {"admm", "none"}


def solve_lp(prob, cfg: SnipalConfig | None = None, warmstart: str = "none",
             admm_cfg: AdmmConfig | None = None, callback=None) -> SnipalResult:
    """Solve ``prob``, optionally from an ADMM warm start.

    When ``AA'`` is singular (e.g. transportation constraints, which always
    carry one redundant row) the warm start is skipped with a warning and the
    solve starts from zero.
    """
    cfg = cfg or SnipalConfig()
    start = None
    notes = []
    if warmstart == "admm":
        try:
            adm = admm_run(prob, None, admm_cfg or AdmmConfig())
            start = adm.point
            notes.append(f"admm warm start: {adm.status} after {adm.iterations} iterations, eta={adm.eta:.3e}")
        except RankDeficientError as exc:
            notes.append(f"admm warm start skipped: {exc}")
            logger.info(notes[-1])
    elif warmstart != "none":
        raise ValueError(f"warmstart must be 'admm' or 'none', got {warmstart!r}")
    res = snipal_solve(prob, start, cfg, callback)
    res.warnings[:0] = notes
    return res


class SnipalLP(BaseEstimator):
    """Box-constrained LP solver with the estimator parameter protocol.

    Parameters
    ----------
    tol : float, default=1e-8
        Target relative KKT residual.
    sigma0 : float or None, default=None
        Initial penalty; ``None`` uses ``1 / (1 + ||b||)``.
    sigma_growth : float, default=5.0
    tau0 : float, default=1.0
    tau_decay : float, default=0.5
    max_outer : int, default=200
    linsys : {"auto", "direct", "smw", "minres", "cg"}, default="auto"
    warm_start : {"none", "admm"}, default="none"
    admm_max_iters : int, default=200

    Attributes
    ----------
    x_, y_, z_ : ndarray
        Primal solution, equality multipliers and box multipliers ``c - A'y``.
    status_ : str
        ``"converged"`` or ``"max-iter"``.
    kkt_ : KktReport
    trace_ : SolverTrace
    n_iter_ : int
        Outer iterations performed.
    objective_ : float
        Primal objective including any constant offset.
    """

    def __init__(self, tol=1e-8, sigma0=None, sigma_growth=5.0, tau0=1.0, tau_decay=0.5, max_outer=200,
                 linsys="auto", warm_start="none", admm_max_iters=200):
        self.tol = tol
        self.sigma0 = sigma0
        self.sigma_growth = sigma_growth
        self.tau0 = tau0
        self.tau_decay = tau_decay
        self.max_outer = max_outer
        self.linsys = linsys
        self.warm_start = warm_start
        self.admm_max_iters = admm_max_iters

    def _config(self) -> SnipalConfig:
        V.check_scalar(self.tol, "tol", min_val=0, include_boundaries="neither")
        if self.sigma0 is not None:
            V.check_scalar(self.sigma0, "sigma0", min_val=0, include_boundaries="neither")
        V.check_scalar(self.sigma_growth, "sigma_growth", min_val=1, include_boundaries="neither")
        V.check_scalar(self.tau0, "tau0", min_val=0, include_boundaries="neither")
        V.check_scalar(self.tau_decay, "tau_decay", min_val=0, max_val=1, include_boundaries="right")
        V.check_scalar(self.max_outer, "max_outer", target_type=int, min_val=0)
        V.check_scalar(self.admm_max_iters, "admm_max_iters", target_type=int, min_val=0)
        V.check_choice(self.linsys, "linsys", LINSYS_CHOICES)
        V.check_choice(self.warm_start, "warm_start", WARMSTART_CHOICES)
        base = SnipalConfig()
        return replace(base, sigma0=self.sigma0, sigma_growth=float(self.sigma_growth), tau0=float(self.tau0),
                       tau_decay=float(self.tau_decay), kkt_tol=float(self.tol), max_outer=self.max_outer,
                       ssn=replace(SsnConfig(), linsys=self.linsys))

    def fit(self, A, b=None, c=None, lower=None, upper=None):
        """Solve the LP given by ``A`` (array, sparse matrix, operator or LpProblem).

        Returns
        -------
        self
        """
        cfg = self._config()
        prob = V.check_problem(A, b, c, lower, upper)
        res = solve_lp(prob, cfg, self.warm_start, AdmmConfig(max_iters=self.admm_max_iters))
        self.problem_ = prob
        self.result_ = res
        self.x_ = res.point.x
        self.y_ = res.point.y
        self.z_ = res.point.z
        self.status_ = res.status
        self.kkt_ = res.kkt
        self.trace_ = res.trace
        self.n_iter_ = res.iterations
        self.objective_ = res.kkt.pobj
        return self
