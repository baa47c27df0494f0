"""Native problem container: one deterministic JSON document.

Layout (keys are written sorted, so identical problems give identical bytes)::

    {
      "format": "snipal-lp",
      "version": 1,
      "header": {"m": ..., "n": ..., "nnz": ..., "provenance": {...} | null},
      "A": {"rows": [...], "cols": [...], "vals": [...]},   # 0-based, column-major order
      "b": [...], "c": [...],
      "lower": [...], "upper": [...],                       # "inf" / "-inf" for infinite bounds
      "offset": 0.0,
      "row_names": [...] | null, "col_names": [...] | null
    }

Floats are written with ``repr`` precision and read back exactly.
``provenance`` holds the generator spec (family, seed, parameters) when the
problem came from a generator.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..problem import BoxSet, LpProblem

__all__ = ["FORMAT", "VERSION", "to_native", "from_native", "dumps", "write_native", "read_native", "NativeFormatError"]

FORMAT = "snipal-lp"
VERSION = 1


class NativeFormatError(ValueError):
    pass


def _enc(v: float):
    if np.isposinf(v):
        return "inf"
    if np.isneginf(v):
        return "-inf"
    return float(v)


def _dec(v) -> float:
    if isinstance(v, str):
        if v in ("inf", "-inf"):
            return float(v)
        raise NativeFormatError(f"bad bound value {v!r}")
    return float(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _enc(float(obj))
    return obj


def to_native(prob: LpProblem) -> dict:
    A = prob.A.to_sparse().tocsc()
    A.sum_duplicates()
    A.sort_indices()
    cols = np.repeat(np.arange(A.shape[1]), np.diff(A.indptr))
    prov = prob.meta.get("generator")
    return {
        "format": FORMAT,
        "version": VERSION,
        "header": {"m": prob.m, "n": prob.n, "nnz": int(A.nnz),
                   "provenance": _jsonable(prov) if prov is not None else None},
        "A": {"rows": A.indices.tolist(), "cols": cols.tolist(), "vals": A.data.tolist()},
        "b": prob.b.tolist(),
        "c": prob.c.tolist(),
        "lower": [_enc(v) for v in prob.box.lower],
        "upper": [_enc(v) for v in prob.box.upper],
        "offset": float(prob.offset),
        "row_names": list(prob.row_names) if prob.row_names is not None else None,
        "col_names": list(prob.col_names) if prob.col_names is not None else None,
    }


def from_native(doc: dict, source: str | None = None) -> LpProblem:
    try:
        if doc.get("format") != FORMAT:
            raise NativeFormatError(f"not a {FORMAT} document")
        if doc.get("version") != VERSION:
            raise NativeFormatError(f"unsupported version {doc.get('version')!r}")
        m, n = int(doc["header"]["m"]), int(doc["header"]["n"])
        trip = doc["A"]
        A = sp.csc_matrix((np.asarray(trip["vals"], dtype=float),
                           (np.asarray(trip["rows"], dtype=int), np.asarray(trip["cols"], dtype=int))),
                          shape=(m, n))
        box = BoxSet(np.array([_dec(v) for v in doc["lower"]]), np.array([_dec(v) for v in doc["upper"]]))
        meta = {"source": source}
        if doc["header"].get("provenance") is not None:
            meta["generator"] = doc["header"]["provenance"]
        rn, cn = doc.get("row_names"), doc.get("col_names")
        return LpProblem(A, np.asarray(doc["b"], dtype=float), np.asarray(doc["c"], dtype=float), box,
                         float(doc.get("offset", 0.0)), tuple(rn) if rn is not None else None,
                         tuple(cn) if cn is not None else None, meta)
    except (KeyError, TypeError) as exc:
        raise NativeFormatError(f"malformed {FORMAT} document: {exc!r}") from exc


def dumps(prob: LpProblem) -> str:
    return json.dumps(to_native(prob), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def write_native(prob: LpProblem, path) -> str:
    text = dumps(prob)
    Path(path).write_text(text)
    return text


def read_native(path) -> LpProblem:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NativeFormatError(f"{path}: invalid JSON ({exc})") from exc
    return from_native(doc, str(path))
