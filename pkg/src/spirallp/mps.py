"""MPS reader producing a GeneralLp.

Handles both classic fixed-format files (fields at columns 2-3, 5-12, 15-22,
25-36, 40-47, 50-61) and free-format files (whitespace separated).  Free
format is assumed when any data line starts in column one or contains a tab.
Supported sections: NAME, OBJSENSE (minimization only), ROWS, COLUMNS, RHS,
RANGES, BOUNDS, ENDATA.  The first N row is the objective; later N rows are
kept as free rows.  Integer markers and integer bound types are rejected.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .model import GeneralLp

_FIXED_FIELDS = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)]
_SECTIONS = {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA"}


class MpsParseError(ValueError):
    """Malformed or unsupported MPS content; message carries the line number."""


def _fail(lineno: int, message: str):
    raise MpsParseError("line %d: %s" % (lineno, message))


def _number(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        # Fortran-style exponents (1.5D+02) appear in some old files.
        try:
            return float(token.replace("D", "E").replace("d", "e"))
        except ValueError:
            _fail(lineno, "bad numeric field %r" % token)


def _fixed_fields(line: str) -> list[str]:
    out = []
    for start, stop in _FIXED_FIELDS:
        out.append(line[start:stop].strip())
    # Anything beyond column 61 is ignored in fixed format.
    return out


def _logical_lines(text: str):
    """Yield (lineno, raw) for content lines, skipping blanks and comments."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.rstrip()
        if not stripped.strip():
            continue
        if stripped.lstrip().startswith("*"):
            continue
        yield lineno, stripped


def _detect_free_format(lines) -> bool:
    for _, raw in lines:
        if "\t" in raw:
            return True
        if raw[0] not in (" ", "\t"):
            tokens = raw.split()
            # A column-one line that is not a section header counts as free
            # format only when it could plausibly be data (two or more
            # fields); a lone stray word is a malformed section header.
            if tokens[0].upper() not in _SECTIONS and len(tokens) >= 2:
                return True
    return False


def parse_mps(data) -> GeneralLp:
    """Parse MPS bytes (or text) into a GeneralLp.

    Duplicate matrix entries are summed.  An RHS entry on the objective row
    becomes an objective constant (with sign flipped, the usual convention).
    Raises MpsParseError with a line number on malformed input.
    """
    if isinstance(data, (bytes, bytearray)):
        text = bytes(data).decode("latin-1")
    elif hasattr(data, "read"):
        blob = data.read()
        text = blob.decode("latin-1") if isinstance(blob, (bytes, bytearray)) else str(blob)
    else:
        text = str(data)

    lines = list(_logical_lines(text))
    free_format = _detect_free_format(lines)

    name = ""
    section = None
    saw_endata = False

    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    row_pos: dict[str, int] = {}
    objective_row = None

    col_index: dict[str, int] = {}
    col_names: list[str] = []
    entries_r: list[int] = []
    entries_c: list[int] = []
    entries_v: list[float] = []
    obj_coeffs: dict[int, float] = {}

    rhs_values: dict[str, float] = {}
    range_values: dict[str, float] = {}
    rhs_set = None
    range_set = None
    bound_set = None
    objective_shift = 0.0

    lower_explicit: set[int] = set()
    bounds_lo: dict[int, float] = {}
    bounds_up: dict[int, float] = {}

    def fields_of(raw: str, section: str) -> list[str]:
        if free_format:
            tokens = raw.split()
            # Fixed format leaves field 1 blank in these sections; mirror that
            # so field indices line up between the two modes.
            if section in ("COLUMNS", "RHS", "RANGES"):
                return [""] + tokens
            return tokens
        return _fixed_fields(raw)

    def row_id(token: str, lineno: int) -> str:
        if token not in row_sense:
            _fail(lineno, "unknown row %r" % token)
        return token

    def col_id(token: str, lineno: int, create: bool = False) -> int:
        if token not in col_index:
            if not create:
                _fail(lineno, "unknown column %r" % token)
            col_index[token] = len(col_names)
            col_names.append(token)
        return col_index[token]

    for lineno, raw in lines:
        if saw_endata:
            break
        if raw[0] not in (" ", "\t"):
            tokens = raw.split()
            head = tokens[0].upper()
            if head in _SECTIONS:
                section = head
                if head == "NAME":
                    name = tokens[1] if len(tokens) > 1 else ""
                elif head == "OBJSENSE" and len(tokens) > 1:
                    if tokens[1].upper() in ("MAX", "MAXIMIZE"):
                        _fail(lineno, "maximization objectives are not supported")
                    if tokens[1].upper() not in ("MIN", "MINIMIZE"):
                        _fail(lineno, "unrecognized objective sense %r" % tokens[1])
                elif head == "ENDATA":
                    saw_endata = True
                continue
            if not free_format:
                _fail(lineno, "unknown section %r" % tokens[0])
            # Free format allows data lines starting in column one; fall
            # through and treat this as data for the current section.

        if section is None:
            _fail(lineno, "data before any section header")

        f = fields_of(raw, section)
        f = f + [""] * (6 - len(f))

        if section == "OBJSENSE":
            sense = (f[0] or f[1]).upper()
            if sense in ("MAX", "MAXIMIZE"):
                _fail(lineno, "maximization objectives are not supported")
            if sense not in ("MIN", "MINIMIZE"):
                _fail(lineno, "unrecognized objective sense %r" % sense)
            continue

        if section == "ROWS":
            sense, rname = f[0].upper(), f[1]
            if not rname:
                _fail(lineno, "row line missing a name")
            if sense not in ("N", "E", "L", "G"):
                _fail(lineno, "unknown row sense %r" % f[0])
            if rname in row_sense:
                _fail(lineno, "duplicate row %r" % rname)
            if sense == "N" and objective_row is None:
                objective_row = rname
                row_sense[rname] = "OBJ"
                continue
            row_sense[rname] = sense
            row_pos[rname] = len(row_order)
            row_order.append(rname)
            continue

        if section == "COLUMNS":
            if "'MARKER'" in f:
                if "'INTORG'" in f or "'INTEND'" in f:
                    _fail(lineno, "integer sections are not supported")
                continue
            cname = f[1]
            if not cname:
                _fail(lineno, "column line missing a name")
            j = col_id(cname, lineno, create=True)
            for rf, vf in ((f[2], f[3]), (f[4], f[5])):
                if not rf:
                    continue
                value = _number(vf, lineno)
                rname = row_id(rf, lineno)
                if rname == objective_row:
                    obj_coeffs[j] = obj_coeffs.get(j, 0.0) + value
                else:
                    entries_r.append(row_pos[rname])
                    entries_c.append(j)
                    entries_v.append(value)
            continue

        if section == "RHS":
            set_name = f[1]
            if rhs_set is None:
                rhs_set = set_name
            if set_name != rhs_set:
                continue
            for rf, vf in ((f[2], f[3]), (f[4], f[5])):
                if not rf:
                    continue
                value = _number(vf, lineno)
                rname = row_id(rf, lineno)
                if rname == objective_row:
                    objective_shift = -value
                else:
                    rhs_values[rname] = value
            continue

        if section == "RANGES":
            set_name = f[1]
            if range_set is None:
                range_set = set_name
            if set_name != range_set:
                continue
            for rf, vf in ((f[2], f[3]), (f[4], f[5])):
                if not rf:
                    continue
                value = _number(vf, lineno)
                rname = row_id(rf, lineno)
                if rname == objective_row:
                    _fail(lineno, "range on the objective row")
                range_values[rname] = value
            continue

        if section == "BOUNDS":
            btype = f[0].upper()
            set_name = f[1]
            if bound_set is None:
                bound_set = set_name
            if set_name != bound_set:
                continue
            if btype in ("BV", "LI", "UI"):
                _fail(lineno, "integer bound type %s is not supported" % btype)
            if btype not in ("LO", "UP", "FX", "FR", "MI", "PL"):
                _fail(lineno, "unknown bound type %r" % f[0])
            j = col_id(f[2], lineno)
            if btype == "LO":
                bounds_lo[j] = _number(f[3], lineno)
                lower_explicit.add(j)
            elif btype == "UP":
                value = _number(f[3], lineno)
                bounds_up[j] = value
                # Classic convention: a negative upper bound with no explicit
                # lower bound sends the lower bound to -inf.
                if value < 0.0 and j not in lower_explicit:
                    bounds_lo[j] = -np.inf
            elif btype == "FX":
                value = _number(f[3], lineno)
                bounds_lo[j] = value
                bounds_up[j] = value
                lower_explicit.add(j)
            elif btype == "FR":
                bounds_lo[j] = -np.inf
                bounds_up[j] = np.inf
                lower_explicit.add(j)
            elif btype == "MI":
                bounds_lo[j] = -np.inf
                lower_explicit.add(j)
            elif btype == "PL":
                bounds_up[j] = np.inf
            continue

        _fail(lineno, "data line in unsupported section %r" % section)

    if not saw_endata:
        raise MpsParseError("missing ENDATA")
    if objective_row is None:
        raise MpsParseError("no objective (N) row found")

    m = len(row_order)
    n = len(col_names)
    A = sp.csc_matrix(
        (np.array(entries_v, dtype=float), (entries_r, entries_c)), shape=(m, n)
    )

    c = np.zeros(n)
    for j, value in obj_coeffs.items():
        c[j] = value

    row_lower = np.empty(m)
    row_upper = np.empty(m)
    for i, rname in enumerate(row_order):
        sense = row_sense[rname]
        r = rhs_values.get(rname, 0.0)
        if sense == "E":
            lo, up = r, r
        elif sense == "L":
            lo, up = -np.inf, r
        elif sense == "G":
            lo, up = r, np.inf
        else:  # free row
            lo, up = -np.inf, np.inf
        if rname in range_values:
            rng = range_values[rname]
            if sense == "E":
                if rng >= 0.0:
                    lo, up = r, r + rng
                else:
                    lo, up = r + rng, r
            elif sense == "L":
                lo = up - abs(rng)
            elif sense == "G":
                up = lo + abs(rng)
        row_lower[i] = lo
        row_upper[i] = up

    col_lower = np.zeros(n)
    col_upper = np.full(n, np.inf)
    for j, v in bounds_lo.items():
        col_lower[j] = v
    for j, v in bounds_up.items():
        col_upper[j] = v

    return GeneralLp(
        A=A,
        c=c,
        row_lower=row_lower,
        row_upper=row_upper,
        col_lower=col_lower,
        col_upper=col_upper,
        objective_shift=objective_shift,
        name=name,
        row_names=row_order,
        col_names=col_names,
    )


def parse_mps_file(path) -> GeneralLp:
    with open(path, "rb") as handle:
        return parse_mps(handle.read())
