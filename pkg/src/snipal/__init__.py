"""Semismooth Newton inexact proximal augmented Lagrangian solver for box-constrained LPs.

Solves ``min c'x  s.t.  Ax = b,  l <= x <= u`` through its dual, with an
optional ADMM warm start.
"""
from .admm import AdmmConfig, AdmmResult, RankDeficientError, admm_run
from .alm import (
    InnerSolverFailure,
    SnipalConfig,
    SnipalResult,
    SolverTrace,
    TraceRow,
    finite_termination_probe,
    snipal_solve,
    weighted_norm,
)
from .box import ActiveSet, active_set, apply_jacobian, moreau_dual_step, project
from .diagnostics import OracleSolution, empirical_condition, rate_estimate, vertex_enumerate_solve
from .estimator import SnipalLP, solve_lp
from .newton import NewtonSolve, NewtonSystem, Strategy, condition_bound
from .problem import BoxSet, KktReport, LpProblem, PrimalDualPoint, kkt_residual, objective_values, problems_equal
from .ssn import LineSearchError, SsnConfig, SsnResult, grad_psi, psi_value, ssn_minimize

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "AdmmResult", "RankDeficientError", "admm_run",
    "InnerSolverFailure", "SnipalConfig", "SnipalResult", "SolverTrace", "TraceRow",
    "finite_termination_probe", "snipal_solve", "weighted_norm",
    "ActiveSet", "active_set", "apply_jacobian", "moreau_dual_step", "project",
    "OracleSolution", "empirical_condition", "rate_estimate", "vertex_enumerate_solve",
    "SnipalLP", "solve_lp",
    "NewtonSolve", "NewtonSystem", "Strategy", "condition_bound",
    "BoxSet", "KktReport", "LpProblem", "PrimalDualPoint", "kkt_residual", "objective_values", "problems_equal",
    "LineSearchError", "SsnConfig", "SsnResult", "grad_psi", "psi_value", "ssn_minimize",
]
