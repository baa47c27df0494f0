"""Linear operators: explicit sparse, Kronecker structured, stacked and column-subset views."""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LinearOperator",
    "SparseOperator",
    "KroneckerOperator",
    "StackedOperator",
    "ColumnSubsetOperator",
    "as_operator",
]


class LinearOperator:
    """An ``m x n`` map with ``matvec`` (x -> Ax) and ``rmatvec`` (y -> A'y).

    Subclasses implement ``_matvec``, ``_rmatvec`` and ``to_sparse``.
    """

    shape: tuple

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.shape[1],):
            raise ValueError(f"matvec: expected vector of length {self.shape[1]}, got {x.shape}")
        return self._matvec(x)

    def rmatvec(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.shape[0],):
            raise ValueError(f"rmatvec: expected vector of length {self.shape[0]}, got {y.shape}")
        return self._rmatvec(y)

    def __matmul__(self, x):
        return self.matvec(x)

    def column_subset(self, indices) -> "LinearOperator":
        idx = _as_indices(indices, self.shape[1])
        return ColumnSubsetOperator(self, idx)

    def to_sparse(self) -> sp.csc_matrix:
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def column_norms_sq(self) -> np.ndarray:
        S = self.to_sparse()
        return np.asarray(S.multiply(S).sum(axis=0)).ravel()

    @property
    def nnz(self) -> int:
        return int(self.to_sparse().nnz)

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.shape})"


def _as_indices(indices, n):
    if hasattr(indices, "indices") and hasattr(indices, "n"):
        indices = indices.indices
    idx = np.asarray(indices, dtype=np.intp).ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"column index out of range for {n} columns")
    return idx


class SparseOperator(LinearOperator):
    """Explicit sparse matrix held in both CSR (for Ax) and CSC (for A'y, column slicing)."""

    def __init__(self, matrix):
        if sp.issparse(matrix):
            csr = sp.csr_matrix(matrix, dtype=float)
        else:
            csr = sp.csr_matrix(np.atleast_2d(np.asarray(matrix, dtype=float)))
        csr.sum_duplicates()
        csr.sort_indices()
        self.csr = csr
        self.csc = csr.tocsc()
        self.csc.sort_indices()
        self.shape = csr.shape

    def _matvec(self, x):
        return self.csr @ x

    def _rmatvec(self, y):
        return self.csc.T @ y

    def column_subset(self, indices) -> "SparseOperator":
        idx = _as_indices(indices, self.shape[1])
        return SparseOperator(self.csc[:, idx])

    def to_sparse(self):
        return self.csc

    def column_norms_sq(self):
        return np.asarray(self.csc.multiply(self.csc).sum(axis=0)).ravel()


class KroneckerOperator(LinearOperator):
    """The map ``x -> vec(B mat(x) D')`` whose matrix is ``kron(D, B)``.

    ``vec`` stacks columns (Fortran order).  ``B`` is ``pB x nB`` and ``D`` is
    ``pD x nD``; the factors may be dense arrays or sparse matrices and
    ``kron(D, B)`` is never formed by ``matvec``/``rmatvec``.
    """

    def __init__(self, B, D):
        self.B = B if sp.issparse(B) else np.atleast_2d(np.asarray(B, dtype=float))
        self.D = D if sp.issparse(D) else np.atleast_2d(np.asarray(D, dtype=float))
        (pb, nb), (pd, nd) = self.B.shape, self.D.shape
        self.shape = (pb * pd, nb * nd)

    def _matvec(self, x):
        nb, nd = self.B.shape[1], self.D.shape[1]
        X = x.reshape((nb, nd), order="F")
        Y = self.B @ X
        Y = (self.D @ np.asarray(Y).T).T
        return np.asarray(Y).ravel(order="F")

    def _rmatvec(self, y):
        pb, pd = self.B.shape[0], self.D.shape[0]
        Y = y.reshape((pb, pd), order="F")
        X = self.B.T @ Y
        X = (self.D.T @ np.asarray(X).T).T
        return np.asarray(X).ravel(order="F")

    @cached_property
    def _sparse(self):
        return sp.kron(sp.csc_matrix(self.D), sp.csc_matrix(self.B), format="csc")

    def to_sparse(self):
        return self._sparse

    def column_norms_sq(self):
        def colsq(M):
            if sp.issparse(M):
                return np.asarray(M.multiply(M).sum(axis=0)).ravel()
            return np.sum(M * M, axis=0)

        # column j = iB + nB*iD of kron(D, B) is kron(D[:, iD], B[:, iB])
        return np.outer(colsq(self.D), colsq(self.B)).ravel()


class StackedOperator(LinearOperator):
    """Vertical (``axis=0``) or horizontal (``axis=1``) concatenation of operators."""

    def __init__(self, blocks, axis: int = 0):
        blocks = [as_operator(b) for b in blocks]
        if not blocks:
            raise ValueError("need at least one block")
        if axis not in (0, 1):
            raise ValueError("axis must be 0 or 1")
        keep = 1 - axis
        if len({b.shape[keep] for b in blocks}) != 1:
            raise ValueError("block shapes are incompatible for concatenation")
        self.blocks = blocks
        self.axis = axis
        sizes = [b.shape[axis] for b in blocks]
        self._offsets = np.concatenate([[0], np.cumsum(sizes)])
        shape = [0, 0]
        shape[axis] = int(self._offsets[-1])
        shape[keep] = blocks[0].shape[keep]
        self.shape = tuple(shape)

    def _split(self, v):
        o = self._offsets
        return [v[o[i]:o[i + 1]] for i in range(len(self.blocks))]

    def _matvec(self, x):
        if self.axis == 0:
            return np.concatenate([b.matvec(x) for b in self.blocks])
        return sum(b.matvec(xi) for b, xi in zip(self.blocks, self._split(x)))

    def _rmatvec(self, y):
        if self.axis == 0:
            return sum(b.rmatvec(yi) for b, yi in zip(self.blocks, self._split(y)))
        return np.concatenate([b.rmatvec(y) for b in self.blocks])

    @cached_property
    def _sparse(self):
        parts = [b.to_sparse() for b in self.blocks]
        stack = sp.vstack if self.axis == 0 else sp.hstack
        return sp.csc_matrix(stack(parts, format="csc"))

    def to_sparse(self):
        return self._sparse

    def column_norms_sq(self):
        if self.axis == 0:
            return sum(b.column_norms_sq() for b in self.blocks)
        return np.concatenate([b.column_norms_sq() for b in self.blocks])


class ColumnSubsetOperator(LinearOperator):
    """Lazy view ``A[:, idx]``: scatter into the parent's domain, then apply."""

    def __init__(self, parent: LinearOperator, indices):
        self.parent = parent
        self.indices = np.asarray(indices, dtype=np.intp)
        self.shape = (parent.shape[0], self.indices.size)

    def _matvec(self, x):
        full = np.zeros(self.parent.shape[1])
        full[self.indices] = x
        return self.parent.matvec(full)

    def _rmatvec(self, y):
        return self.parent.rmatvec(y)[self.indices]

    def column_subset(self, indices):
        idx = _as_indices(indices, self.shape[1])
        return ColumnSubsetOperator(self.parent, self.indices[idx])

    def to_sparse(self):
        return sp.csc_matrix(self.parent.to_sparse()[:, self.indices])

    def column_norms_sq(self):
        return self.parent.column_norms_sq()[self.indices]


def as_operator(obj) -> LinearOperator:
    """Wrap dense arrays and scipy sparse matrices as :class:`SparseOperator`."""
    if isinstance(obj, LinearOperator):
        return obj
    return SparseOperator(obj)
