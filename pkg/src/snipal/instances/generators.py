"""Deterministic generators for the benchmark LP families.

Every generator is a pure function of its parameters and ``seed``.  Random
streams come from ``numpy.random.PCG64`` seeded with
``SeedSequence([seed, family_code, stream_code])`` so that families and the
individual draws inside a family never share a stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
import logging

import numpy as np
import scipy.sparse as sp

from ..linalg.operators import KroneckerOperator, SparseOperator, StackedOperator
from ..problem import BoxSet, LpProblem

logger = logging.getLogger(__name__)

__all__ = [
    "GeneratorSpec",
    "FAMILIES",
    "gen_random_sparse",
    "gen_transportation",
    "gen_generalized_transportation",
    "gen_covering_packing",
    "covering_packing_from_matrix",
    "gen_correlation_clustering",
    "clustering_objective",
    "generate",
]

_FAMILY_CODES = {
    "random_sparse": 1,
    "transportation": 2,
    "generalized_transportation": 3,
    "covering_packing": 4,
    "correlation_clustering": 5,
}


def _rng(seed: int, family: str, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), _FAMILY_CODES[family], stream])
    return np.random.Generator(np.random.PCG64(ss))


def _sprand(rng, m, n, density, values):
    """Sparse ``m x n`` pattern with about ``density*m*n`` entries drawn by ``values(rng, k)``."""
    nnz = int(round(density * m * n))
    nnz = min(max(nnz, 0), m * n)
    flat = rng.choice(m * n, size=nnz, replace=False) if nnz < m * n else np.arange(m * n)
    rows, cols = np.divmod(flat, n)
    return sp.csr_matrix((values(rng, nnz), (rows, cols)), shape=(m, n))


def _fill_empty_rows(rng, A, m, n, density, values, tries=10):
    for attempt in range(tries):
        empty = np.flatnonzero(np.diff(A.indptr) == 0)
        if empty.size == 0:
            return A
        logger.info("resampling: %d empty rows (attempt %d)", empty.size, attempt + 1)
        A = _sprand(rng, m, n, density, values)
    empty = np.flatnonzero(np.diff(A.indptr) == 0)
    if empty.size:
        logger.info("inserting one entry in each of %d empty rows", empty.size)
        cols = rng.integers(0, n, size=empty.size)
        A = (A + sp.csr_matrix((values(rng, empty.size), (empty, cols)), shape=(m, n))).tocsr()
    return A


def _spec(family, seed, **params):
    return {"family": family, "seed": int(seed), "params": params}


def gen_random_sparse(m: int, n: int, d: float, seed: int = 0, support: float = 0.1) -> LpProblem:
    """Random sparse LP with entries uniform in (-50, 50) at a density-``d`` pattern.

    ``b = A x_hat`` for a nonnegative ``x_hat`` supported on a fraction
    ``support`` of the columns, and ``c = A'y_hat + z_hat`` with ``z_hat >= 0``
    vanishing on that support, so ``(x_hat, y_hat)`` is an optimal pair.
    """
    if not 0 < d <= 1:
        raise ValueError("density d must lie in (0, 1]")
    if m > n:
        raise ValueError("random sparse instances need m <= n")
    rng = _rng(seed, "random_sparse", 0)
    values = lambda r, k: 100.0 * (r.random(k) - 0.5)
    A = _fill_empty_rows(rng, _sprand(rng, m, n, d, values), m, n, d, values)
    rng_bc = _rng(seed, "random_sparse", 1)
    k = max(1, int(round(support * n)))
    supp = np.sort(rng_bc.choice(n, size=k, replace=False))
    x_hat = np.zeros(n)
    x_hat[supp] = rng_bc.random(k)
    y_hat = rng_bc.standard_normal(m)
    z_hat = 10.0 * rng_bc.random(n)
    z_hat[supp] = 0.0
    A = A.tocsc()
    b = A @ x_hat
    c = A.T @ y_hat + z_hat
    meta = {
        "generator": _spec("random_sparse", seed, m=m, n=n, d=d, support=support),
        "feasible_point": x_hat,
        "optimal_dual": y_hat,
        "optimal_value": float(c @ x_hat),
    }
    return LpProblem(SparseOperator(A), b, c, BoxSet.nonnegative(n), meta=meta)


def _transport_draws(s, t, seed):
    rng = _rng(seed, "transportation", 0)
    M = np.abs(rng.random((s, t)))
    C = np.maximum(np.ceil(100.0 * rng.random((s, t))), 1.0)
    return M, C


def _transport_operator(s, t, structured, weights=None):
    if structured and weights is None:
        top = KroneckerOperator(np.eye(s), np.ones((1, t)))
        bottom = KroneckerOperator(np.ones((1, s)), np.eye(t))
        return StackedOperator([top, bottom], axis=0)
    # vec(X) stacks columns: X[i, j] -> i + j*s
    j, i = np.meshgrid(np.arange(t), np.arange(s))
    col = (i + j * s).ravel()
    w = np.ones(s * t) if weights is None else np.asarray(weights, dtype=float).reshape(s, t).ravel()
    top = sp.csr_matrix((w, (i.ravel(), col)), shape=(s, s * t))
    bottom = sp.csr_matrix((np.ones(s * t), (j.ravel(), col)), shape=(t, s * t))
    return SparseOperator(sp.vstack([top, bottom]))


def gen_transportation(s: int, t: int, seed: int = 0, structured: bool = False) -> LpProblem:
    """Transportation LP: ship supplies ``a = M 1`` to demands ``b = M'1``.

    ``structured=True`` realizes the constraint map as the stacked Kronecker
    operators ``[e_t' (x) I_s ; I_t (x) e_s']`` instead of an explicit matrix.
    """
    if s < 1 or t < 1:
        raise ValueError("s and t must be positive")
    M, C = _transport_draws(s, t, seed)
    a = M.sum(axis=1)
    dem = M.sum(axis=0)
    A = _transport_operator(s, t, structured)
    meta = {
        "generator": _spec("transportation", seed, s=s, t=t, structured=structured),
        "feasible_point": M.ravel(order="F"),
    }
    return LpProblem(A, np.concatenate([a, dem]), C.ravel(order="F"), BoxSet.nonnegative(s * t), meta=meta)


def gen_generalized_transportation(s: int, t: int, seed: int = 0, weights=None) -> LpProblem:
    """Generalized transportation LP with row weights ``h_ij`` normalized to ``sum h = s t``.

    ``M`` and the costs use the same streams as :func:`gen_transportation`;
    passing ``weights=np.ones((s, t))`` reproduces that instance.
    """
    if s < 1 or t < 1:
        raise ValueError("s and t must be positive")
    M, C = _transport_draws(s, t, seed)
    if weights is None:
        H = _rng(seed, "generalized_transportation", 0).random((s, t))
    else:
        H = np.array(weights, dtype=float).reshape(s, t)
    H = (s * t / H.sum()) * H
    a = (H * M).sum(axis=1)
    dem = M.sum(axis=0)
    A = _transport_operator(s, t, False, weights=H)
    meta = {
        "generator": _spec("generalized_transportation", seed, s=s, t=t),
        "feasible_point": M.ravel(order="F"),
        "weights": H,
    }
    return LpProblem(A, np.concatenate([a, dem]), C.ravel(order="F"), BoxSet.nonnegative(s * t), meta=meta)


def covering_packing_from_matrix(kind: str, A, c, meta=None) -> LpProblem:
    """Standard form of covering ``min c'x, Ax >= 1`` or packing ``min -c'x, Ax <= 1``."""
    kind = kind.lower()
    if kind not in ("covering", "packing"):
        raise ValueError(f"kind must be 'covering' or 'packing', got {kind!r}")
    A = sp.csr_matrix(A, dtype=float)
    m, n = A.shape
    c = np.asarray(c, dtype=float)
    sign = -1.0 if kind == "covering" else 1.0
    full = sp.hstack([A, sign * sp.identity(m, format="csr")], format="csc")
    cost = np.concatenate([c if kind == "covering" else -c, np.zeros(m)])
    return LpProblem(SparseOperator(full), np.ones(m), cost, BoxSet.nonnegative(n + m), meta=meta or {})


def gen_covering_packing(kind: str, m: int, n: int, den: float, seed: int = 0) -> LpProblem:
    """Random covering/packing LP with a rounded uniform (so 0/1) constraint matrix."""
    if not 0 < den <= 1:
        raise ValueError("den must lie in (0, 1]")
    rng = _rng(seed, "covering_packing", 0)
    c = rng.random(n)
    values = lambda r, k: np.round(r.random(k))
    A = _sprand(rng, m, n, den, values)
    A.eliminate_zeros()
    A = _fill_empty_rows(rng, A, m, n, den, lambda r, k: np.ones(k))
    if kind.lower() == "packing":
        # an empty column would let -c_j x_j decrease without bound
        empty = np.flatnonzero(np.diff(A.tocsc().indptr) == 0)
        if empty.size:
            logger.info("packing: placing one entry in each of %d empty columns", empty.size)
            rows = rng.integers(0, m, size=empty.size)
            A = (A + sp.csr_matrix((np.ones(empty.size), (rows, empty)), shape=(m, n))).tocsr()
    A.data[:] = 1.0
    meta = {"generator": _spec(kind.lower(), seed, m=m, n=n, den=den)}
    prob = covering_packing_from_matrix(kind, A, c, meta)
    if kind.lower() == "packing":
        prob.meta["feasible_point"] = np.concatenate([np.zeros(n), np.ones(m)])
    else:
        # x = 1 covers every (nonempty) row; slack takes up the excess
        prob.meta["feasible_point"] = np.concatenate([np.ones(n), np.asarray(A.sum(axis=1)).ravel() - 1.0])
    return prob


def gen_correlation_clustering(p: int, edge_prob: float = 1.0, planted_k: int = 2, noise: float = 0.0,
                               seed: int = 0, all_rotations: bool = False) -> LpProblem:
    """LP relaxation of correlation clustering on a planted random graph.

    Edge weights are ``+1`` inside a planted cluster and ``-1`` across, each
    flipped with probability ``noise``.  The primal has ``|E|`` equality rows
    ``[-I, I, T'] x = m - p`` over ``2|E| + M`` nonnegative variables, where ``T``
    maps edge values to ``-y_ij - y_jk + y_ik`` for every triangle ``i<j<k``
    (all three rotations when ``all_rotations``).  The disagreement value is
    ``sum(m) - c'x``; see :func:`clustering_objective`.
    """
    if p < 3:
        raise ValueError("need at least 3 nodes")
    if not 0 < edge_prob <= 1:
        raise ValueError("edge_prob must lie in (0, 1]")
    rng = _rng(seed, "correlation_clustering", 0)
    pairs = list(combinations(range(p), 2))
    if edge_prob < 1:
        keep = rng.random(len(pairs)) < edge_prob
        pairs = [e for e, k in zip(pairs, keep) if k]
    edges = {e: i for i, e in enumerate(pairs)}
    labels = _rng(seed, "correlation_clustering", 1).integers(0, planted_k, size=p)
    weight = np.array([1.0 if labels[i] == labels[j] else -1.0 for i, j in pairs])
    flips = _rng(seed, "correlation_clustering", 2).random(len(pairs)) < noise
    weight[flips] *= -1.0
    m_e = np.abs(np.minimum(0.0, weight))
    p_e = np.maximum(0.0, weight)

    rows, cols, vals = [], [], []
    patterns = [(-1.0, -1.0, 1.0)]
    if all_rotations:
        patterns += [(1.0, -1.0, -1.0), (-1.0, 1.0, -1.0)]
    ntri = 0
    for i, j, k in combinations(range(p), 3):
        ij, jk, ik = edges.get((i, j)), edges.get((j, k)), edges.get((i, k))
        if ij is None or jk is None or ik is None:
            continue
        for coef in patterns:
            rows += [ntri] * 3
            cols += [ij, jk, ik]
            vals += list(coef)
            ntri += 1
    nE = len(pairs)
    T = sp.csr_matrix((vals, (rows, cols)), shape=(ntri, nE))
    I = sp.identity(nE, format="csr")
    A = sp.hstack([-I, I, T.T], format="csc")
    cost = np.concatenate([np.zeros(nE), np.ones(nE), np.zeros(ntri)])
    truth = np.array([0.0 if labels[i] == labels[j] else 1.0 for i, j in pairs])
    meta = {
        "generator": _spec("correlation_clustering", seed, p=p, edge_prob=edge_prob, planted_k=planted_k,
                           noise=noise, all_rotations=all_rotations),
        "disagreement_constant": float(m_e.sum()),
        "edges": pairs,
        "planted_labels": labels,
        "planted_dual": truth,
        "n_triangles": ntri,
        "feasible_point": np.concatenate([p_e, m_e, np.zeros(ntri)]),
    }
    return LpProblem(SparseOperator(A), m_e - p_e, cost, BoxSet.nonnegative(2 * nE + ntri), meta=meta)


def clustering_objective(prob: LpProblem, pobj: float) -> float:
    """Disagreement cost of the relaxation from the primal objective ``c'x``."""
    return prob.meta["disagreement_constant"] - pobj


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", canonical_family(self.family))

    def build(self) -> LpProblem:
        return generate(self.family, seed=self.seed, **self.params)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "seed": self.seed}


_ALIASES = {
    "random": "random_sparse", "random_sparse": "random_sparse", "sparse": "random_sparse",
    "transport": "transportation", "transportation": "transportation", "tp": "transportation",
    "gtransport": "generalized_transportation", "generalized_transportation": "generalized_transportation",
    "gtp": "generalized_transportation",
    "covering": "covering", "cover": "covering",
    "packing": "packing", "pack": "packing",
    "cc": "correlation_clustering", "correlation_clustering": "correlation_clustering",
}


def canonical_family(name: str) -> str:
    try:
        return _ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown generator family {name!r}; choose from {sorted(set(_ALIASES.values()))}")


FAMILIES = {
    "random_sparse": lambda seed=0, **kw: gen_random_sparse(seed=seed, **kw),
    "transportation": lambda seed=0, **kw: gen_transportation(seed=seed, **kw),
    "generalized_transportation": lambda seed=0, **kw: gen_generalized_transportation(seed=seed, **kw),
    "covering": lambda seed=0, **kw: gen_covering_packing("covering", seed=seed, **kw),
    "packing": lambda seed=0, **kw: gen_covering_packing("packing", seed=seed, **kw),
    "correlation_clustering": lambda seed=0, **kw: gen_correlation_clustering(seed=seed, **kw),
}


def generate(family: str, seed: int = 0, **params) -> LpProblem:
    return FAMILIES[canonical_family(family)](seed=seed, **params)
