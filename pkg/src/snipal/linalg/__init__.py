from .operators import (
    LinearOperator,
    SparseOperator,
    KroneckerOperator,
    StackedOperator,
    ColumnSubsetOperator,
    as_operator,
)
from .krylov import KrylovResult, minres_solve, cg_solve
from .dense import NotPositiveDefiniteError, CholeskyFactor, dense_cholesky_solve, spectral_norm_estimate

__all__ = [
    "LinearOperator",
    "SparseOperator",
    "KroneckerOperator",
    "StackedOperator",
    "ColumnSubsetOperator",
    "as_operator",
    "KrylovResult",
    "minres_solve",
    "cg_solve",
    "NotPositiveDefiniteError",
    "CholeskyFactor",
    "dense_cholesky_solve",
    "spectral_norm_estimate",
]
