"""Semismooth Newton minimization of the proximal augmented Lagrangian subproblem.

For fixed ``(x_tilde, y_tilde, sigma, tau)`` the subproblem objective is

    psi(y) = L_sigma(y; x_tilde) + tau / (2 sigma) * ||y - y_tilde||^2

with ``L_sigma(y; x) = -b'y - <s, c - A'y> - ||s - x||^2 / (2 sigma)`` and
``s = Proj_K(x - sigma (c - A'y))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np

from . import newton
from .box import active_set, project

logger = logging.getLogger(__name__)

__all__ = [
    "SsnConfig",
    "SsnResult",
    "LineSearchError",
    "Subproblem",
    "psi_value",
    "grad_psi",
    "ssn_minimize",
]

_EPS = np.finfo(float).eps


class LineSearchError(RuntimeError):
    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SsnConfig:
    eta_bar: float = 0.1
    gamma_exp: float = 0.5
    mu: float = 1e-4
    delta_ls: float = 0.5
    max_iters: int = 100
    grad_tol: float = 1e-8
    max_backtracks: int = 50
    linsys: str = "auto"
    direct_limit: int = newton.DIRECT_LIMIT
    krylov_maxit: int | None = None

    def __post_init__(self):
        if not 0 < self.eta_bar < 1:
            raise ValueError("eta_bar must lie in (0, 1)")
        if not 0 < self.gamma_exp <= 1:
            raise ValueError("gamma_exp must lie in (0, 1]")
        if not 0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 1/2)")
        if not 0 < self.delta_ls < 1:
            raise ValueError("delta_ls must lie in (0, 1)")
        if self.max_iters < 0 or self.max_backtracks < 1:
            raise ValueError("iteration limits must be nonnegative")
        if not self.grad_tol >= 0:
            raise ValueError("grad_tol must be nonnegative")


@dataclass
class Evaluation:
    """Quantities at one point ``y`` of the subproblem."""

    y: np.ndarray
    aty: np.ndarray
    w: np.ndarray
    proj: np.ndarray
    value: float
    scale: float
    grad: np.ndarray | None = None

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad))


class Subproblem:
    """``psi`` and its gradient for fixed proximal centre and parameters."""

    def __init__(self, prob, x_tilde, y_tilde, sigma, tau):
        if not (sigma > 0 and tau > 0):
            raise ValueError("sigma and tau must be positive")
        self.prob = prob
        self.x_tilde = np.asarray(x_tilde, dtype=float)
        self.y_tilde = np.asarray(y_tilde, dtype=float)
        self.sigma = float(sigma)
        self.tau = float(tau)

    def evaluate(self, y, aty=None, with_grad=True) -> Evaluation:
        prob, sig = self.prob, self.sigma
        y = np.asarray(y, dtype=float)
        if aty is None:
            aty = prob.A.rmatvec(y)
        v = prob.c - aty
        w = self.x_tilde - sig * v
        s = project(w, prob.box)
        dy = y - self.y_tilde
        by = float(prob.b @ y)
        sv = float(s @ v)
        dsx = s - self.x_tilde
        quad = float(dsx @ dsx) / (2.0 * sig)
        prox = self.tau / (2.0 * sig) * float(dy @ dy)
        value = -by - sv - quad + prox
        ev = Evaluation(y, aty, w, s, value, abs(by) + abs(sv) + quad + prox)
        if with_grad:
            ev.grad = -prob.b + prob.A.matvec(s) + (self.tau / sig) * dy
        return ev

    def value(self, y) -> float:
        return self.evaluate(y, with_grad=False).value

    def gradient(self, y) -> np.ndarray:
        return self.evaluate(y).grad


def psi_value(prob, x_tilde, y_tilde, sigma, tau, y) -> float:
    return Subproblem(prob, x_tilde, y_tilde, sigma, tau).value(y)


def grad_psi(prob, x_tilde, y_tilde, sigma, tau, y) -> np.ndarray:
    """``-b + A Proj_K(x_tilde + sigma (A'y - c)) + (tau/sigma) (y - y_tilde)``."""
    return Subproblem(prob, x_tilde, y_tilde, sigma, tau).gradient(y)


@dataclass
class SsnResult:
    y: np.ndarray
    status: str
    iterations: int
    grad_norm: float
    krylov_iters: int
    proj: np.ndarray
    aty: np.ndarray
    trace: list = field(default_factory=list)


def ssn_minimize(prob, x_tilde, y_tilde, sigma, tau, cfg: SsnConfig | None = None,
                 y0=None, accept=None) -> SsnResult:
    """Minimize ``psi`` by semismooth Newton steps with Armijo backtracking.

    Each Newton system is solved to absolute residual
    ``min(eta_bar, ||grad||**(1 + gamma_exp))``.  Iteration stops when
    ``||grad psi|| <= cfg.grad_tol`` (status ``"converged"``), when
    ``accept(evaluation)`` returns true (``"accepted"``), after
    ``cfg.max_iters`` steps (``"max-iter"``), or when the predicted decrease
    falls to rounding level and no progress is possible (``"stalled"``).

    ``y0`` (default ``y_tilde``) lets a caller resume from an earlier iterate.
    """
    cfg = cfg or SsnConfig()
    sub = Subproblem(prob, x_tilde, y_tilde, sigma, tau)
    y = np.array(y_tilde if y0 is None else y0, dtype=float)
    ev = sub.evaluate(y)
    trace = []
    krylov_total = 0
    status = "max-iter"
    j = 0
    while True:
        gnorm = ev.grad_norm
        if gnorm <= cfg.grad_tol:
            status = "converged"
            break
        if accept is not None and accept(ev):
            status = "accepted"
            break
        if j >= cfg.max_iters:
            break
        aset = active_set(ev.w, prob.box)
        system = newton.build(prob, aset, sub.sigma, sub.tau, cfg.linsys,
                              cfg.direct_limit, maxit=cfg.krylov_maxit)
        lin_tol = min(cfg.eta_bar, gnorm ** (1.0 + cfg.gamma_exp))
        sol = system.solve(-ev.grad, lin_tol)
        krylov_total += sol.krylov_iters
        d = sol.dy
        slope = float(ev.grad @ d)
        if not slope < 0:
            # inexact solve lost descent; use steepest descent scaled by 1/||H||-ish
            d = -ev.grad * (sub.sigma / sub.tau)
            slope = float(ev.grad @ d)
        atd = prob.A.rmatvec(d)
        alpha = 1.0
        noise = 16 * _EPS * (1.0 + ev.scale)
        new = None
        for _ in range(cfg.max_backtracks):
            trial = sub.evaluate(y + alpha * d, ev.aty + alpha * atd, with_grad=False)
            if trial.value <= ev.value + cfg.mu * alpha * slope + noise:
                new = trial
                break
            alpha *= cfg.delta_ls
        if new is None:
            unit = sub.evaluate(y + d, ev.aty + atd)
            if abs(slope) <= 1e3 * noise and unit.grad_norm < gnorm:
                # function values are at rounding level; accept on gradient decrease
                new, alpha = unit, 1.0
            elif abs(slope) <= 1e3 * noise:
                status = "stalled"
                break
            else:
                raise LineSearchError(
                    f"line search failed after {cfg.max_backtracks} backtracks",
                    {"iteration": j, "grad_norm": gnorm, "slope": slope, "psi": ev.value,
                     "linsys_residual": sol.residual_norm, "strategy": sol.strategy.value,
                     "p": aset.p})
        if new.grad is None:
            new.grad = -prob.b + prob.A.matvec(new.proj) + (sub.tau / sub.sigma) * (new.y - sub.y_tilde)
        trace.append({
            "iter": j + 1,
            "grad_norm": gnorm,
            "new_grad_norm": new.grad_norm,
            "step": alpha,
            "psi": ev.value,
            "new_psi": new.value,
            "slope": slope,
            "p": aset.p,
            "strategy": sol.strategy.value,
            "krylov_iters": sol.krylov_iters,
            "linsys_residual": sol.residual_norm,
            "linsys_tol": lin_tol,
        })
        y, ev = new.y, new
        j += 1
    return SsnResult(ev.y, status, j, ev.grad_norm, krylov_total, ev.proj, ev.aty, trace)
