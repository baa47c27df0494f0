"""Dense Cholesky with a cached factor, and power-iteration norm estimates."""
from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpotrf

__all__ = ["NotPositiveDefiniteError", "CholeskyFactor", "dense_cholesky_solve", "spectral_norm_estimate"]


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite: non-positive pivot at index {pivot}")


class CholeskyFactor:
    """Lower Cholesky factor of a dense SPD matrix, reusable across right-hand sides."""

    def __init__(self, mat):
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        self.n = mat.shape[0]
        if self.n == 0:
            self._factor = mat.copy()
            return
        L, info = dpotrf(mat, lower=1, clean=1, overwrite_a=0)
        if info > 0:
            raise NotPositiveDefiniteError(info - 1)
        if info < 0:
            raise ValueError(f"dpotrf: illegal argument {-info}")
        self._factor = L

    @property
    def L(self) -> np.ndarray:
        return self._factor

    def pivot_ratio(self) -> float:
        """``min(diag(L))**2 / max(diag(L))**2``, a cheap rank-deficiency indicator."""
        if self.n == 0:
            return 1.0
        d = np.abs(np.diag(self._factor))
        return float((d.min() / d.max()) ** 2)

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.n == 0:
            return rhs.copy()
        return cho_solve((self._factor, True), rhs)


def dense_cholesky_solve(mat, rhs) -> np.ndarray:
    return CholeskyFactor(mat).solve(rhs)


def spectral_norm_estimate(op, iters: int = 100, seed: int = 0) -> float:
    """Power iteration on ``A'A``; returns ``||A v||`` for the final unit ``v``.

    The estimate never exceeds ``||A||_2`` and approaches it from below.
    """
    m, n = op.shape
    if m == 0 or n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        u = op.matvec(v)
        est = float(np.linalg.norm(u))
        w = op.rmatvec(u)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    return max(est, float(np.linalg.norm(op.matvec(v))))
