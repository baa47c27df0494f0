"""Input checks shared by the estimator and the command line."""
from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .linalg.operators import LinearOperator
from .problem import BoxSet, LpProblem

__all__ = ["check_scalar", "check_vector", "check_problem", "check_choice"]


def check_scalar(x, name, target_type=numbers.Real, min_val=None, max_val=None, include_boundaries="both"):
    """Validate a scalar parameter, returning it unchanged.

    ``include_boundaries`` is one of ``"both"``, ``"left"``, ``"right"`` or
    ``"neither"`` and applies to ``min_val``/``max_val``.
    """
    if isinstance(x, bool) or not isinstance(x, target_type):
        raise TypeError(f"{name} must be {target_type}, got {type(x).__name__}")
    if isinstance(x, numbers.Real) and np.isnan(x):
        raise ValueError(f"{name} must not be NaN")
    left = include_boundaries in ("both", "left")
    right = include_boundaries in ("both", "right")
    if min_val is not None and (x < min_val or (not left and x == min_val)):
        raise ValueError(f"{name} == {x}, must be {'>=' if left else '>'} {min_val}")
    if max_val is not None and (x > max_val or (not right and x == max_val)):
        raise ValueError(f"{name} == {x}, must be {'<=' if right else '<'} {max_val}")
    return x


def check_choice(x, name, choices):
    if x not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {x!r}")
    return x


def check_vector(v, name, size, allow_inf=False):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = np.full(size, float(arr))
    arr = arr.ravel() if arr.ndim == 2 and 1 in arr.shape else arr
    if arr.shape != (size,):
        raise ValueError(f"{name} has shape {np.shape(v)}, expected ({size},)")
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} contains NaN")
    if not allow_inf and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_problem(A, b=None, c=None, lower=None, upper=None) -> LpProblem:
    """Build an :class:`LpProblem` from arrays, or pass one through.

    ``lower`` defaults to zeros and ``upper`` to ``+inf``, i.e. ``x >= 0``.
    """
    if isinstance(A, LpProblem):
        if any(v is not None for v in (b, c, lower, upper)):
            raise ValueError("pass either an LpProblem or (A, b, c, lower, upper), not both")
        return A
    if b is None or c is None:
        raise ValueError("b and c are required when A is not an LpProblem")
    if not (isinstance(A, LinearOperator) or sp.issparse(A)):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"A must be 2-D, got {A.ndim}-D")
        if not np.all(np.isfinite(A)):
            raise ValueError("A must be finite")
    m, n = A.shape
    b = check_vector(b, "b", m)
    c = check_vector(c, "c", n)
    lo = np.zeros(n) if lower is None else check_vector(lower, "lower", n, allow_inf=True)
    up = np.full(n, np.inf) if upper is None else check_vector(upper, "upper", n, allow_inf=True)
    return LpProblem(A, b, c, BoxSet(lo, up))
