"""LP data model and the relative KKT residual used as the global stopping test.

The primal problem is ``min c'x  s.t.  Ax = b,  l <= x <= u`` and its dual is
``max b'y - delta*_K(A'y - c)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Optional
import logging
import warnings

import numpy as np

from .linalg.operators import LinearOperator, as_operator

logger = logging.getLogger(__name__)

__all__ = [
    "BoxSet",
    "LpProblem",
    "PrimalDualPoint",
    "KktReport",
    "ObjectiveValues",
    "kkt_residual",
    "objective_values",
    "dual_conjugate",
    "problems_equal",
]


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BoxSet:
    """Componentwise box ``{x : lower <= x <= upper}``; bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = _frozen(np.atleast_1d(self.lower))
        up = _frozen(np.atleast_1d(self.upper))
        if lo.shape != up.shape or lo.ndim != 1:
            raise ValueError(f"bound shapes differ: {lo.shape} vs {up.shape}")
        if np.any(np.isnan(lo)) or np.any(np.isnan(up)):
            raise ValueError("bounds must not contain NaN")
        if np.any(lo > up):
            i = int(np.flatnonzero(lo > up)[0])
            raise ValueError(f"lower[{i}]={lo[i]} exceeds upper[{i}]={up[i]}")
        if np.any(lo == np.inf) or np.any(up == -np.inf):
            raise ValueError("lower bounds cannot be +inf, upper bounds cannot be -inf")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def nonnegative(cls, n: int) -> "BoxSet":
        return cls(np.zeros(n), np.full(n, np.inf))

    @classmethod
    def free(cls, n: int) -> "BoxSet":
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def n(self) -> int:
        return self.lower.size

    def is_nonnegative_orthant(self) -> bool:
        return bool(np.all(self.lower == 0) and np.all(np.isposinf(self.upper)))

    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def permute(self, perm) -> "BoxSet":
        return BoxSet(self.lower[perm], self.upper[perm])

    def __eq__(self, other):
        if not isinstance(other, BoxSet):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)


@dataclass(frozen=True, eq=False)
class LpProblem:
    """Standard-form LP ``min c'x + offset  s.t.  Ax = b,  x in box``.

    ``A`` may be passed as a dense array, a scipy sparse matrix or any
    :class:`~snipal.linalg.operators.LinearOperator`.  ``meta`` carries
    provenance (generator spec, names, known feasible points for tests).
    """

    A: LinearOperator
    b: np.ndarray
    c: np.ndarray
    box: BoxSet
    offset: float = 0.0
    row_names: Optional[tuple] = None
    col_names: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = as_operator(self.A)
        b = _frozen(np.atleast_1d(self.b))
        c = _frozen(np.atleast_1d(self.c))
        m, n = A.shape
        if b.shape != (m,):
            raise ValueError(f"b has shape {b.shape}, expected ({m},)")
        if c.shape != (n,):
            raise ValueError(f"c has shape {c.shape}, expected ({n},)")
        if self.box.n != n:
            raise ValueError(f"box has dimension {self.box.n}, expected {n}")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("b and c must be finite")
        if self.row_names is not None and len(self.row_names) != m:
            raise ValueError("row_names length does not match A")
        if self.col_names is not None and len(self.col_names) != n:
            raise ValueError("col_names length does not match A")
        if m > n:
            warnings.warn(f"more constraints than variables (m={m} > n={n})", stacklevel=3)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def shape(self) -> tuple:
        return self.A.shape

    def permute_columns(self, perm) -> "LpProblem":
        perm = np.asarray(perm)
        S = self.A.to_sparse()[:, perm]
        names = None if self.col_names is None else tuple(self.col_names[i] for i in perm)
        return LpProblem(S, self.b, self.c[perm], self.box.permute(perm), self.offset,
                         self.row_names, names, dict(self.meta))


def problems_equal(p: LpProblem, q: LpProblem, rtol: float = 0.0, names: bool = False) -> bool:
    """Whether ``p`` and ``q`` carry the same data (exactly when ``rtol == 0``)."""
    if p.shape != q.shape:
        return False
    if names and (p.row_names != q.row_names or p.col_names != q.col_names):
        return False
    D = (p.A.to_sparse() - q.A.to_sparse()).tocoo()
    scale = max(1.0, float(abs(p.A.to_sparse()).max()) if p.A.to_sparse().nnz else 1.0)
    if D.nnz and np.max(np.abs(D.data)) > rtol * scale:
        return False
    def close(u, v):
        with np.errstate(invalid="ignore"):
            return bool(np.all((u == v) | (np.abs(u - v) <= rtol * np.maximum(1.0, np.abs(u)))))

    return (close(p.b, q.b) and close(p.c, q.c) and close(p.box.lower, q.box.lower)
            and close(p.box.upper, q.box.upper) and close(np.array([p.offset]), np.array([q.offset])))


@dataclass(frozen=True, eq=False)
class PrimalDualPoint:
    """Iterate ``(x, y)`` with optional dual slack ``z`` (defaults to ``c - A'y``)."""

    x: np.ndarray
    y: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        x = _frozen(np.atleast_1d(self.x))
        y = _frozen(np.atleast_1d(self.y))
        z = None if self.z is None else _frozen(np.atleast_1d(self.z))
        for name, v in (("x", x), ("y", y), ("z", z)):
            if v is not None and not np.all(np.isfinite(v)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def zeros(cls, prob: LpProblem) -> "PrimalDualPoint":
        return cls(np.zeros(prob.n), np.zeros(prob.m))

    def slack(self, prob: LpProblem) -> np.ndarray:
        if self.z is not None:
            return self.z
        return prob.c - prob.A.rmatvec(self.y)

    def with_slack(self, prob: LpProblem) -> "PrimalDualPoint":
        return PrimalDualPoint(self.x, self.y, self.slack(prob))


class ObjectiveValues(NamedTuple):
    pobj: float
    dobj: float

    @property
    def gap(self) -> float:
        return self.pobj - self.dobj


@dataclass(frozen=True)
class KktReport:
    eta_p: float
    eta_d: float
    eta_c: float
    eta: float
    pobj: float
    dobj: float

    @property
    def gap(self) -> float:
        return self.pobj - self.dobj

    def as_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in ("eta_p", "eta_d", "eta_c", "eta", "pobj", "dobj")}


def _check_point(prob: LpProblem, pt: PrimalDualPoint):
    if pt.x.shape != (prob.n,):
        raise ValueError(f"x has shape {pt.x.shape}, expected ({prob.n},)")
    if pt.y.shape != (prob.m,):
        raise ValueError(f"y has shape {pt.y.shape}, expected ({prob.m},)")
    if pt.z is not None and pt.z.shape != (prob.n,):
        raise ValueError(f"z has shape {pt.z.shape}, expected ({prob.n},)")


def dual_conjugate(box: BoxSet, v: np.ndarray, tol: float = 0.0) -> float:
    """Support function ``sup_{x in box} <v, x>``.

    Components with ``|v_i| <= tol`` facing an infinite bound contribute zero;
    otherwise an infinite bound facing a nonzero slope gives ``+inf``.
    """
    pos = v > 0
    neg = v < 0
    up, lo = box.upper, box.lower
    small = np.abs(v) <= tol
    if np.any(pos & np.isposinf(up) & ~small) or np.any(neg & np.isneginf(lo) & ~small):
        return np.inf
    take_up = pos & np.isfinite(up)
    take_lo = neg & np.isfinite(lo)
    return float(v[take_up] @ up[take_up] + v[take_lo] @ lo[take_lo])


def objective_values(prob: LpProblem, pt: PrimalDualPoint) -> ObjectiveValues:
    """Primal ``c'x`` and dual ``b'y`` (both shifted by the problem offset)."""
    return ObjectiveValues(float(prob.c @ pt.x) + prob.offset, float(prob.b @ pt.y) + prob.offset)


def kkt_residual(prob: LpProblem, pt: PrimalDualPoint) -> KktReport:
    """Relative KKT residual of ``pt``.

    ``eta = max(eta_p, eta_d, eta_c)`` with

    * ``eta_p = ||b - Ax|| / (1 + ||b||)``
    * ``eta_d = ||A'y + z - c|| / (1 + ||c||)``
    * ``eta_c = ||x - Proj_K(x - z)|| / (1 + ||x|| + ||z||)``
    """
    _check_point(prob, pt)
    x, y = pt.x, pt.y
    aty = prob.A.rmatvec(y)
    z = pt.z if pt.z is not None else prob.c - aty
    nb, nc = np.linalg.norm(prob.b), np.linalg.norm(prob.c)
    eta_p = np.linalg.norm(prob.b - prob.A.matvec(x)) / (1.0 + nb)
    eta_d = np.linalg.norm(aty + z - prob.c) / (1.0 + nc)
    proj = np.clip(x - z, prob.box.lower, prob.box.upper)
    eta_c = np.linalg.norm(x - proj) / (1.0 + np.linalg.norm(x) + np.linalg.norm(z))
    pobj = float(prob.c @ x) + prob.offset
    conj = dual_conjugate(prob.box, aty - prob.c, tol=1e-12 * (1.0 + nc))
    dobj = float(prob.b @ y) - conj + prob.offset
    return KktReport(float(eta_p), float(eta_d), float(eta_c),
                     float(max(eta_p, eta_d, eta_c)), pobj, dobj)
