"""MPS reader and writer.

Lines are split on whitespace, so both fixed and free MPS parse as long as
names contain no blanks.  Supported sections are ``NAME``, ``OBJSENSE``,
``ROWS``, ``COLUMNS``, ``RHS``, ``RANGES``, ``BOUNDS`` and ``ENDATA``.

Conversion to standard form
---------------------------
Every constrained row becomes an equality.  A row with activity interval
``[lo, hi]`` is

=============  ==========================  ================
row            equality                    slack bounds
=============  ==========================  ================
``E``          ``a'x = rhs``                (no slack)
``L``          ``a'x + s = hi``            ``0 <= s``
``G``          ``a'x - s = lo``            ``0 <= s``
ranged         ``a'x - s = lo``            ``0 <= s <= hi - lo``
=============  ==========================  ================

RANGES value ``R`` on a row with right-hand side ``rhs`` gives

=====  ===========  ===================  ===================
row    sign of R    lo                   hi
=====  ===========  ===================  ===================
``E``  R > 0        rhs                  rhs + R
``E``  R < 0        rhs + R              rhs
``L``  any          rhs - abs(R)         rhs
``G``  any          rhs                  rhs + abs(R)
=====  ===========  ===================  ===================

A right-hand side on the objective row ``r`` contributes the constant ``-r``.
``OBJSENSE MAX`` negates the costs and the constant; the problem is always
stored as a minimization.  ``BV`` bounds are relaxed to ``[0, 1]`` and
``LI``/``UI`` to plain bounds, each with a warning; integrality ``MARKER``
lines are skipped with a warning.  ``UP`` with a negative value on a column
whose lower bound was never set makes the lower bound ``-inf`` (with a
warning), as most readers do.
"""
from __future__ import annotations

from pathlib import Path
import logging
import warnings

import numpy as np
import scipy.sparse as sp

from ..problem import BoxSet, LpProblem

logger = logging.getLogger(__name__)

__all__ = ["MpsParseError", "read_mps", "write_mps", "parse_mps"]

_SECTIONS = {"NAME", "OBJSENSE", "OBJSENCE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}
_BOUND_KEYS = {"LO", "UP", "FX", "FR", "MI", "PL", "BV", "LI", "UI"}


class MpsParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.path = path


def _num(tok, lineno, path):
    try:
        v = float(tok)
    except ValueError:
        raise MpsParseError(f"malformed number {tok!r}", lineno, path) from None
    if np.isnan(v):
        raise MpsParseError(f"NaN value {tok!r}", lineno, path)
    return v


def _pairs(tokens, lineno, path, what):
    """Split ``[setname] name value [name value]`` into (setname, pairs)."""
    if len(tokens) % 2 == 1:
        setname, rest = tokens[0], tokens[1:]
    else:
        setname, rest = None, tokens
    if not rest or len(rest) > 4:
        raise MpsParseError(f"malformed {what} line", lineno, path)
    return setname, [(rest[i], _num(rest[i + 1], lineno, path)) for i in range(0, len(rest), 2)]


def parse_mps(text: str, path: str | None = None) -> LpProblem:
    """Parse MPS ``text``; see the module docstring for the conventions used."""
    name = None
    sense = 1.0
    obj_row = None
    row_type: dict[str, str] = {}
    row_order: list[str] = []
    col_index: dict[str, int] = {}
    col_order: list[str] = []
    entries: dict[tuple[int, str], float] = {}
    cost: dict[int, float] = {}
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    lower: dict[int, float] = {}
    upper: dict[int, float] = {}
    lower_set: set[int] = set()
    sets = {"RHS": None, "RANGES": None, "BOUNDS": None}
    section = None
    ended = False
    in_integer = False

    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        tokens = line.split()
        if not raw[0].isspace():
            head = tokens[0].upper()
            if head not in _SECTIONS:
                raise MpsParseError(f"unknown section {tokens[0]!r}", lineno, path)
            section = "OBJSENSE" if head == "OBJSENCE" else head
            if section == "NAME":
                name = " ".join(tokens[1:]) or None
            elif section == "OBJSENSE" and len(tokens) > 1:
                sense = _objsense(tokens[1], lineno, path)
            elif section == "ENDATA":
                ended = True
                break
            elif len(tokens) > 1 and section in sets:
                raise MpsParseError(f"unexpected data on {section} header", lineno, path)
            continue
        if section is None:
            raise MpsParseError("data before the first section header", lineno, path)
        if section == "NAME":
            raise MpsParseError("unexpected data in NAME section", lineno, path)
        if section == "OBJSENSE":
            sense = _objsense(tokens[0], lineno, path)
        elif section == "ROWS":
            if len(tokens) != 2:
                raise MpsParseError("ROWS lines need a type and a name", lineno, path)
            kind, rname = tokens[0].upper(), tokens[1]
            if kind not in ("N", "E", "L", "G"):
                raise MpsParseError(f"unknown row type {tokens[0]!r}", lineno, path)
            if rname in row_type:
                raise MpsParseError(f"duplicate row {rname!r}", lineno, path)
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                else:
                    warnings.warn(f"{path or 'mps'}:{lineno}: extra free row {rname!r} ignored", stacklevel=2)
            row_type[rname] = kind
            if kind != "N":
                row_order.append(rname)
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1].strip("'\"").upper() == "MARKER":
                marker = tokens[2].strip("'\"").upper()
                warnings.warn(f"{path or 'mps'}:{lineno}: integrality marker {marker} skipped "
                              "(solving the LP relaxation)", stacklevel=2)
                in_integer = marker == "INTORG"
                continue
            if len(tokens) not in (3, 5):
                raise MpsParseError("COLUMNS lines need a column and one or two (row, value) pairs", lineno, path)
            cname = tokens[0]
            if cname not in col_index:
                col_index[cname] = len(col_order)
                col_order.append(cname)
            j = col_index[cname]
            for k in range(1, len(tokens), 2):
                rname, val = tokens[k], _num(tokens[k + 1], lineno, path)
                if rname not in row_type:
                    raise MpsParseError(f"column {cname!r} refers to unknown row {rname!r}", lineno, path)
                if row_type[rname] == "N":
                    if rname != obj_row:
                        continue
                    if j in cost and cost[j] != val:
                        raise MpsParseError(f"conflicting objective entries for column {cname!r}", lineno, path)
                    cost[j] = val
                    continue
                key = (j, rname)
                if key in entries and entries[key] != val:
                    raise MpsParseError(f"duplicate entry for column {cname!r} in row {rname!r} "
                                        f"with conflicting values", lineno, path)
                entries[key] = val
        elif section in ("RHS", "RANGES"):
            setname, pairs = _pairs(tokens, lineno, path, section)
            if not _same_set(sets, section, setname, lineno, path):
                continue
            target = rhs if section == "RHS" else ranges
            for rname, val in pairs:
                if rname not in row_type:
                    raise MpsParseError(f"{section} refers to unknown row {rname!r}", lineno, path)
                if section == "RANGES" and row_type[rname] == "N":
                    raise MpsParseError(f"RANGES on free row {rname!r}", lineno, path)
                if rname in target and target[rname] != val:
                    raise MpsParseError(f"conflicting {section} values for row {rname!r}", lineno, path)
                target[rname] = val
        elif section == "BOUNDS":
            key = tokens[0].upper()
            if key not in _BOUND_KEYS:
                raise MpsParseError(f"unsupported bound type {tokens[0]!r}", lineno, path)
            needs_value = key in ("LO", "UP", "FX", "LI", "UI")
            # set name is optional; value present for valued keys (BV may carry one)
            body = tokens[1:]
            nvals = 1 if needs_value else (1 if key == "BV" and len(body) == 3 else 0)
            if len(body) == 1 + nvals:
                setname, cname = None, body[0]
            elif len(body) == 2 + nvals:
                setname, cname = body[0], body[1]
            else:
                raise MpsParseError(f"malformed {key} bound line", lineno, path)
            if not _same_set(sets, "BOUNDS", setname, lineno, path):
                continue
            if cname not in col_index:
                raise MpsParseError(f"bound on unknown column {cname!r}", lineno, path)
            j = col_index[cname]
            val = _num(body[-1], lineno, path) if nvals else None
            if key in ("LI", "UI", "BV"):
                warnings.warn(f"{path or 'mps'}:{lineno}: integer bound {key} on {cname!r} relaxed", stacklevel=2)
            if key in ("LO", "LI"):
                lower[j] = val
                lower_set.add(j)
            elif key in ("UP", "UI"):
                if val < 0 and j not in lower_set and lower.get(j, 0.0) == 0.0:
                    warnings.warn(f"{path or 'mps'}:{lineno}: negative upper bound on {cname!r} "
                                  "with default lower bound; lower bound set to -inf", stacklevel=2)
                    lower[j] = -np.inf
                upper[j] = val
            elif key == "FX":
                lower[j] = upper[j] = val
                lower_set.add(j)
            elif key == "FR":
                lower[j], upper[j] = -np.inf, np.inf
                lower_set.add(j)
            elif key == "MI":
                lower[j] = -np.inf
                lower_set.add(j)
            elif key == "PL":
                upper[j] = np.inf
            elif key == "BV":
                lower[j], upper[j] = 0.0, 1.0
                lower_set.add(j)
    if not ended:
        warnings.warn(f"{path or 'mps'}: missing ENDATA", stacklevel=2)
    if in_integer:
        warnings.warn(f"{path or 'mps'}: unterminated integer MARKER block", stacklevel=2)
    if obj_row is None:
        warnings.warn(f"{path or 'mps'}: no objective row; using zero costs", stacklevel=2)
    return _assemble(name, sense, obj_row, row_type, row_order, col_order, entries, cost, rhs,
                     ranges, lower, upper, path)


def _objsense(tok, lineno, path):
    t = tok.upper()
    if t in ("MAX", "MAXIMIZE"):
        return -1.0
    if t in ("MIN", "MINIMIZE"):
        return 1.0
    raise MpsParseError(f"unknown objective sense {tok!r}", lineno, path)


def _same_set(sets, section, setname, lineno, path):
    if setname is None:
        return True
    if sets[section] is None:
        sets[section] = setname
    if setname != sets[section]:
        warnings.warn(f"{path or 'mps'}:{lineno}: additional {section} set {setname!r} ignored", stacklevel=3)
        return False
    return True


def _assemble(name, sense, obj_row, row_type, row_order, col_order, entries, cost, rhs, ranges,
              lower, upper, path):
    n0 = len(col_order)
    row_pos = {r: i for i, r in enumerate(row_order)}
    m = len(row_order)
    lo_row = np.empty(m)
    hi_row = np.empty(m)
    for i, r in enumerate(row_order):
        v = rhs.get(r, 0.0)
        kind = row_type[r]
        lo, hi = {"E": (v, v), "L": (-np.inf, v), "G": (v, np.inf)}[kind]
        if r in ranges:
            R = ranges[r]
            if kind == "E":
                lo, hi = (v, v + R) if R >= 0 else (v + R, v)
            elif kind == "L":
                lo = v - abs(R)
            else:
                hi = v + abs(R)
        lo_row[i], hi_row[i] = lo, hi

    rows, cols, vals = [], [], []
    for (j, r), v in entries.items():
        rows.append(row_pos[r])
        cols.append(j)
        vals.append(v)
    b = np.empty(m)
    slack_cols, slack_lo, slack_hi, slack_names = [], [], [], []
    taken = set(col_order)
    for i, r in enumerate(row_order):
        lo, hi = lo_row[i], hi_row[i]
        if lo == hi:
            b[i] = lo
            continue
        j = n0 + len(slack_cols)
        if np.isfinite(lo):
            coef, b[i], ub = -1.0, lo, hi - lo
        else:
            coef, b[i], ub = 1.0, hi, np.inf
        rows.append(i)
        cols.append(j)
        vals.append(coef)
        slack_cols.append(j)
        slack_lo.append(0.0)
        slack_hi.append(ub)
        sname = f"{r}_slack"
        while sname in taken:
            sname += "_"
        taken.add(sname)
        slack_names.append(sname)

    n = n0 + len(slack_cols)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(m, n))
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = sense * v
    l = np.zeros(n)
    u = np.full(n, np.inf)
    for j, v in lower.items():
        l[j] = v
    for j, v in upper.items():
        u[j] = v
    l[n0:] = slack_lo
    u[n0:] = slack_hi
    bad = np.flatnonzero(l > u)
    if bad.size:
        raise MpsParseError(f"column {(col_order + slack_names)[bad[0]]!r} has lower bound above upper bound",
                            None, path)
    offset = -sense * rhs.get(obj_row, 0.0) if obj_row is not None else 0.0
    meta = {"name": name, "source": str(path) if path is not None else None,
            "objsense": "max" if sense < 0 else "min",
            "row_types": {r: row_type[r] for r in row_order}, "n_structural": n0}
    return LpProblem(A, b, c, BoxSet(l, u), offset, tuple(row_order), tuple(col_order + slack_names), meta)


def read_mps(path) -> LpProblem:
    path = Path(path)
    return parse_mps(path.read_text(), str(path))


def _fmt(v: float) -> str:
    return repr(float(v))


def write_mps(prob: LpProblem, path=None, name: str | None = None) -> str:
    """Write ``prob`` (all rows as ``E``) in free MPS; returns the text.

    Reading the output back yields the same standard-form data exactly.
    """
    m, n = prob.shape
    rnames = list(prob.row_names) if prob.row_names is not None else [f"R{i + 1}" for i in range(m)]
    cnames = list(prob.col_names) if prob.col_names is not None else [f"C{j + 1}" for j in range(n)]
    objname = "OBJ"
    while objname in rnames:
        objname += "_"
    A = prob.A.to_sparse().tocsc()
    A.sort_indices()
    out = [f"NAME {name or prob.meta.get('name') or 'snipal'}", "ROWS", f" N {objname}"]
    out += [f" E {r}" for r in rnames]
    out.append("COLUMNS")
    for j in range(n):
        lo, hi = A.indptr[j], A.indptr[j + 1]
        if prob.c[j] != 0:
            out.append(f" {cnames[j]} {objname} {_fmt(prob.c[j])}")
        for k in range(lo, hi):
            out.append(f" {cnames[j]} {rnames[A.indices[k]]} {_fmt(A.data[k])}")
        if lo == hi and prob.c[j] == 0:
            # keep the column declared even when it has no entries
            out.append(f" {cnames[j]} {objname} 0.0")
    out.append("RHS")
    for i in range(m):
        if prob.b[i] != 0:
            out.append(f" RHS {rnames[i]} {_fmt(prob.b[i])}")
    if prob.offset != 0:
        out.append(f" RHS {objname} {_fmt(-prob.offset)}")
    bounds = []
    for j, (l, u) in enumerate(zip(prob.box.lower, prob.box.upper)):
        cn = cnames[j]
        if l == u:
            bounds.append(f" FX BND {cn} {_fmt(l)}")
            continue
        if l == -np.inf and u == np.inf:
            bounds.append(f" FR BND {cn}")
            continue
        if l == -np.inf:
            bounds.append(f" MI BND {cn}")
        elif l != 0:
            bounds.append(f" LO BND {cn} {_fmt(l)}")
        if u != np.inf:
            bounds.append(f" UP BND {cn} {_fmt(u)}")
    if bounds:
        out.append("BOUNDS")
        out += bounds
    out.append("ENDATA")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
