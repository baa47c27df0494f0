"""Problem instances: benchmark generators, MPS files and the native JSON container."""
from .generators import (
    FAMILIES,
    GeneratorSpec,
    canonical_family,
    clustering_objective,
    covering_packing_from_matrix,
    gen_correlation_clustering,
    gen_covering_packing,
    gen_generalized_transportation,
    gen_random_sparse,
    gen_transportation,
    generate,
)
from .mps import MpsParseError, parse_mps, read_mps, write_mps
from .native import NativeFormatError, dumps, from_native, read_native, to_native, write_native


def load_problem(path):
    """Read an ``.mps`` file or a native ``.json`` container, chosen by suffix."""
    from pathlib import Path

    p = Path(path)
    if p.suffix.lower() in (".json", ".lp.json", ".snlp"):
        return read_native(p)
    return read_mps(p)


__all__ = [
    "FAMILIES", "GeneratorSpec", "canonical_family", "clustering_objective", "covering_packing_from_matrix",
    "gen_correlation_clustering", "gen_covering_packing", "gen_generalized_transportation",
    "gen_random_sparse", "gen_transportation", "generate",
    "MpsParseError", "parse_mps", "read_mps", "write_mps",
    "NativeFormatError", "dumps", "from_native", "read_native", "to_native", "write_native", "load_problem",
]
