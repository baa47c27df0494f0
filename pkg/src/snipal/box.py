"""Projection onto the box K and its generalized Jacobian."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import BoxSet

__all__ = ["ActiveSet", "project", "active_set", "apply_jacobian", "moreau_dual_step"]


@dataclass(frozen=True, eq=False)
class ActiveSet:
    """Indices (0-based, increasing) where the projection argument is strictly inside the box."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        if idx.ndim != 1:
            raise ValueError("indices must be one-dimensional")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n or np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be strictly increasing and within [0, n)")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, mask) -> "ActiveSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(np.flatnonzero(mask), mask.size)

    @classmethod
    def full(cls, n: int) -> "ActiveSet":
        return cls(np.arange(n), n)

    @property
    def p(self) -> int:
        return int(self.indices.size)

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[self.indices] = True
        return out

    def __len__(self):
        return self.p

    def __eq__(self, other):
        if not isinstance(other, ActiveSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.indices, other.indices)


def project(w, box: BoxSet) -> np.ndarray:
    """Euclidean projection onto the box (componentwise median of l, w, u)."""
    w = np.asarray(w, dtype=float)
    if w.shape != box.lower.shape:
        raise ValueError(f"w has shape {w.shape}, box has dimension {box.n}")
    return np.clip(w, box.lower, box.upper)


def active_set(w, box: BoxSet) -> ActiveSet:
    # strict inequalities: boundary ties get a zero Jacobian entry
    w = np.asarray(w, dtype=float)
    if w.shape != box.lower.shape:
        raise ValueError(f"w has shape {w.shape}, box has dimension {box.n}")
    return ActiveSet.from_mask((box.lower < w) & (w < box.upper))


def apply_jacobian(aset: ActiveSet, v) -> np.ndarray:
    """Apply the diagonal 0/1 Jacobian ``Diag(e_J)`` to ``v``."""
    v = np.asarray(v, dtype=float)
    if v.shape != (aset.n,):
        raise ValueError(f"v has shape {v.shape}, expected ({aset.n},)")
    out = np.zeros_like(v)
    out[aset.indices] = v[aset.indices]
    return out


def moreau_dual_step(w, box: BoxSet, sigma: float) -> np.ndarray:
    """Return ``(Proj_K(w) - w) / sigma``, the ADMM z-update for the pre-formed argument ``w``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    w = np.asarray(w, dtype=float)
    return (project(w, box) - w) / sigma
