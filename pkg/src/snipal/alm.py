"""Outer inexact proximal augmented Lagrangian loop (SNIPAL).

Iteration ``k`` approximately minimizes
``psi_k(y) = L_{sigma_k}(y; x^k) + tau_k/(2 sigma_k) ||y - y^k||^2`` by
semismooth Newton, then sets ``x^{k+1} = Proj_K(x^k - sigma_k (c - A'y^{k+1}))``.
An inner solution is accepted under either gate

* (A): ``||grad psi_k|| <= min(sqrt(tau_k), 1) / sigma_k * eps_k``
* (B): ``||grad psi_k|| <= delta_k min(sqrt(tau_k), 1) / sigma_k * ||(dy, dx)||_Lambda``

with ``||(dy, dx)||_Lambda = sqrt(tau_k ||dy||^2 + ||dx||^2)``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
import logging
import time

import numpy as np

from .problem import LpProblem, PrimalDualPoint, kkt_residual
from .ssn import SsnConfig, ssn_minimize

logger = logging.getLogger(__name__)

__all__ = [
    "SnipalConfig",
    "TraceRow",
    "SolverTrace",
    "SnipalResult",
    "InnerSolverFailure",
    "snipal_solve",
    "weighted_norm",
    "finite_termination_probe",
]

CONVERGED = "converged"
MAX_ITER = "max-iter"


class InnerSolverFailure(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SnipalConfig:
    """Parameter schedules.

    ``sigma_k = min(sigma_max, sigma_{k-1} * sigma_growth)`` (growth skipped
    after an expensive inner solve), ``tau_k = max(tau_min, tau0 * tau_decay**k)``,
    ``eps_k = eps0 * eps_rate**k * (1 + eta_0)`` and
    ``delta_k = delta0 * delta_rate**k``.  ``sigma0=None`` means
    ``1 / (1 + ||b||)``, divided by ``min(1, eta_start)`` when the solve starts
    from a supplied point whose KKT residual is ``eta_start``; a start that is
    already accurate thus begins with a correspondingly weaker proximal term.
    """

    sigma0: float | None = None
    sigma_max: float = 1e8
    sigma_growth: float = 5.0
    tau0: float = 1.0
    tau_min: float = 1e-4
    tau_decay: float = 0.5
    eps0: float = 0.5
    eps_rate: float = 0.5
    delta0: float = 0.5
    delta_rate: float = 0.5
    kkt_tol: float = 1e-8
    max_outer: int = 200
    max_resumptions: int = 5
    freeze_sigma_after: int = 100
    ssn: SsnConfig = field(default_factory=SsnConfig)

    def __post_init__(self):
        if self.sigma0 is not None and not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not self.sigma_max > 0:
            raise ValueError("sigma_max must be positive")
        if not self.sigma_growth > 1:
            raise ValueError("sigma_growth must exceed 1")
        if not (self.tau0 > 0 and self.tau_min > 0):
            raise ValueError("tau0 and tau_min must be positive")
        if not 0 < self.tau_decay <= 1:
            raise ValueError("tau_decay must lie in (0, 1]")
        if not (self.eps0 > 0 and 0 < self.eps_rate < 1):
            raise ValueError("eps schedule must be positive and geometric with rate in (0, 1)")
        if not (0 <= self.delta0 < 1 and 0 <= self.delta_rate < 1):
            raise ValueError("delta schedule must lie in [0, 1) with rate in [0, 1)")
        if not self.kkt_tol > 0:
            raise ValueError("kkt_tol must be positive")
        if self.max_outer < 0:
            raise ValueError("max_outer must be nonnegative")

    def initial_sigma(self, prob: LpProblem, eta_start: float | None = None) -> float:
        if self.sigma0 is not None:
            return min(self.sigma0, self.sigma_max)
        sigma = 1.0 / (1.0 + np.linalg.norm(prob.b))
        if eta_start is not None and eta_start > 0:
            sigma /= min(1.0, eta_start)
        return min(sigma, self.sigma_max)

    def tau(self, k: int) -> float:
        return max(self.tau_min, self.tau0 * self.tau_decay**k)

    def eps(self, k: int, eta0: float) -> float:
        return self.eps0 * self.eps_rate**k * (1.0 + eta0)

    def delta(self, k: int) -> float:
        return self.delta0 * self.delta_rate**k


@dataclass
class TraceRow:
    k: int
    sigma: float
    tau: float
    itssn: int
    itkrylov: int
    eta_p: float
    eta_d: float
    eta_c: float
    eta: float
    pobj: float
    dobj: float
    time: float
    eps: float
    threshold_a: float
    grad_norm: float
    criterion: str
    ssn_status: str


@dataclass
class SolverTrace:
    kkt_tol: float
    eta0: float
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    @property
    def etas(self) -> list:
        return [r.eta for r in self.rows]

    @property
    def total_ssn(self) -> int:
        return sum(r.itssn for r in self.rows)

    @property
    def total_krylov(self) -> int:
        return sum(r.itkrylov for r in self.rows)

    def to_dict(self) -> dict:
        return {"kkt_tol": self.kkt_tol, "eta0": self.eta0, "rows": [asdict(r) for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "SolverTrace":
        return cls(d["kkt_tol"], d["eta0"], [TraceRow(**r) for r in d["rows"]])


@dataclass
class SnipalResult:
    point: PrimalDualPoint
    trace: SolverTrace
    status: str
    kkt: object
    warnings: list = field(default_factory=list)

    @property
    def x(self):
        return self.point.x

    @property
    def y(self):
        return self.point.y

    @property
    def iterations(self) -> int:
        return len(self.trace)


def weighted_norm(dy, dx, tau: float) -> float:
    """``sqrt(tau ||dy||^2 + ||dx||^2)``."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    dy = np.asarray(dy, dtype=float)
    dx = np.asarray(dx, dtype=float)
    return float(np.sqrt(tau * (dy @ dy) + dx @ dx))


def _check_start(prob, start):
    if start is None:
        return np.zeros(prob.n), np.zeros(prob.m)
    x = np.array(start.x, dtype=float)
    y = np.array(start.y, dtype=float)
    if x.shape != (prob.n,) or y.shape != (prob.m,):
        raise ValueError(f"start point has shapes x{x.shape}, y{y.shape}; "
                         f"problem needs x({prob.n},), y({prob.m},)")
    return x, y


def snipal_solve(prob: LpProblem, start: PrimalDualPoint | None = None,
                 cfg: SnipalConfig | None = None, callback=None) -> SnipalResult:
    """Run the outer loop until ``eta <= cfg.kkt_tol`` or ``cfg.max_outer`` iterations.

    ``callback(row)`` is called with every :class:`TraceRow` as it is produced.
    """
    cfg = cfg or SnipalConfig()
    x, y = _check_start(prob, start)
    t0 = time.perf_counter()
    report = kkt_residual(prob, PrimalDualPoint(x, y))
    trace = SolverTrace(cfg.kkt_tol, report.eta)
    notes = []
    if report.eta <= cfg.kkt_tol:
        return SnipalResult(PrimalDualPoint(x, y).with_slack(prob), trace, CONVERGED, report, notes)

    sigma = cfg.initial_sigma(prob, None if start is None else report.eta)
    status = MAX_ITER
    for k in range(cfg.max_outer):
        tau = cfg.tau(k)
        eps_k = cfg.eps(k, trace.eta0)
        delta_k = cfg.delta(k)
        scale = min(np.sqrt(tau), 1.0) / sigma
        thresh_a = min(np.sqrt(tau), 1.0) * eps_k / sigma

        def gate_b(ev, x=x, y=y, tau=tau, scale=scale, delta_k=delta_k):
            if delta_k == 0:
                return False
            dist = weighted_norm(ev.y - y, ev.proj - x, tau)
            return ev.grad_norm <= delta_k * scale * dist

        ssn_cfg = replace(cfg.ssn, grad_tol=thresh_a)
        itssn = itkrylov = 0
        y_inner = None
        try:
            for attempt in range(cfg.max_resumptions + 1):
                res = ssn_minimize(prob, x, y, sigma, tau, ssn_cfg, y0=y_inner, accept=gate_b)
                itssn += res.iterations
                itkrylov += res.krylov_iters
                if res.status in ("converged", "accepted", "stalled"):
                    break
                y_inner = res.y
                ssn_cfg = replace(ssn_cfg, grad_tol=ssn_cfg.grad_tol / 2)
        except Exception as exc:
            raise InnerSolverFailure(f"inner solver failed at outer iteration {k + 1}: {exc}", trace) from exc

        gnorm = res.grad_norm
        if gnorm <= thresh_a:
            criterion = "A"
        elif gate_b(res):
            criterion = "B"
        else:
            criterion = "forced"
            notes.append(f"outer iteration {k + 1}: inner solve accepted without (A)/(B), "
                         f"ssn status {res.status}, ||grad||={gnorm:.3e}")
            logger.warning(notes[-1])

        y = res.y
        x = res.proj.copy()
        report = kkt_residual(prob, PrimalDualPoint(x, y))
        row = TraceRow(k + 1, sigma, tau, itssn, itkrylov, report.eta_p, report.eta_d, report.eta_c,
                       report.eta, report.pobj, report.dobj, time.perf_counter() - t0,
                       eps_k, thresh_a, gnorm, criterion, res.status)
        trace.rows.append(row)
        logger.info("k=%d itssn=%d eta=%.2e pobj=%.8e sigma=%.2e tau=%.2e",
                    k + 1, itssn, report.eta, report.pobj, sigma, tau)
        if callback is not None:
            callback(row)
        if report.eta <= cfg.kkt_tol:
            status = CONVERGED
            break
        if itssn <= cfg.freeze_sigma_after:
            sigma = min(cfg.sigma_max, sigma * cfg.sigma_growth)

    pt = PrimalDualPoint(x, y).with_slack(prob)
    return SnipalResult(pt, trace, status, report, notes)


def finite_termination_probe(trace: SolverTrace, kkt_tol: float | None = None) -> int | None:
    """Outer iteration (1-based) at which ``eta`` fell below ``kkt_tol`` in one
    step from above ``100 * kkt_tol``, or ``None``.

    ``trace`` may also be a plain sequence of eta values.
    """
    if isinstance(trace, SolverTrace):
        etas = trace.etas
        tol = trace.kkt_tol if kkt_tol is None else kkt_tol
    else:
        etas = list(trace)
        tol = 1e-8 if kkt_tol is None else kkt_tol
    for i in range(1, len(etas)):
        if etas[i] <= tol and etas[i - 1] > 100 * tol:
            return i + 1
    return None
