"""Problem representations: standard form, general (ranged/bounded) form, the
full-row-rank reformulation, and the box form every numeric routine consumes.

Standard form is  min c.x  s.t. Ax = b, x >= 0.  General form carries row
intervals l_w <= Ax <= u_w and column bounds l_x <= x <= u_x (infinities are
plain numpy inf sentinels).  The reformulation appends one slack-style
variable per row, giving an equality system with full row rank by
construction.  BoxLp is the internal common denominator: equality constraints
plus per-variable bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DEFAULT_SHIFT = 10.0


def _canonical_csc(A, shape=None) -> sp.csc_matrix:
    """Copy A into deduplicated, sorted CSC so equal problems compare equal."""
    mat = sp.csc_matrix(A, shape=shape, dtype=float, copy=True)
    mat.sum_duplicates()
    mat.sort_indices()
    mat.eliminate_zeros()
    return mat


def _vector(v, length: int, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel().copy()
    if arr.shape[0] != length:
        raise ValueError("%s has length %d, expected %d" % (name, arr.shape[0], length))
    return arr


@dataclass
class StandardLp:
    """min c.x subject to Ax = b, x >= 0."""

    A: sp.csc_matrix
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.A = _canonical_csc(self.A)
        m, n = self.A.shape
        self.b = _vector(self.b, m, "b")
        self.c = _vector(self.c, n, "c")
        if not (np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise ValueError("standard-form data must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def to_box(self) -> "BoxLp":
        m, n = self.A.shape
        return BoxLp(
            A=self.A,
            b=self.b,
            c=self.c,
            lower=np.zeros(n),
            upper=np.full(n, np.inf),
        )


@dataclass
class BoxLp:
    """min c.x + c0 subject to Ax = b, lower <= x <= upper.

    The working representation for the solver, geometry, and crossover code.
    Bounds may be infinite; lower == upper fixes a variable.
    """

    A: sp.csc_matrix
    b: np.ndarray
    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    c0: float = 0.0
    name: str = ""

    def __post_init__(self):
        self.A = _canonical_csc(self.A)
        m, n = self.A.shape
        self.b = _vector(self.b, m, "b")
        self.c = _vector(self.c, n, "c")
        self.lower = _vector(self.lower, n, "lower")
        self.upper = _vector(self.upper, n, "upper")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise ValueError("lower bound exceeds upper bound at column %d" % bad)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.c0

    def is_standard(self) -> bool:
        return bool(np.all(self.lower == 0.0) and np.all(np.isinf(self.upper)))


@dataclass
class GeneralLp:
    """min c.x subject to row_lower <= Ax <= row_upper, col_lower <= x <= col_upper."""

    A: sp.csc_matrix
    c: np.ndarray
    row_lower: np.ndarray
    row_upper: np.ndarray
    col_lower: np.ndarray
    col_upper: np.ndarray
    objective_sense: str = "min"
    objective_shift: float = 0.0
    name: str = ""
    row_names: list[str] = field(default_factory=list)
    col_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.objective_sense != "min":
            raise ValueError("only minimization problems are supported")
        self.A = _canonical_csc(self.A)
        m, n = self.A.shape
        self.c = _vector(self.c, n, "c")
        self.row_lower = _vector(self.row_lower, m, "row_lower")
        self.row_upper = _vector(self.row_upper, m, "row_upper")
        self.col_lower = _vector(self.col_lower, n, "col_lower")
        self.col_upper = _vector(self.col_upper, n, "col_upper")
        if np.any(self.row_lower > self.row_upper):
            bad = int(np.argmax(self.row_lower > self.row_upper))
            raise ValueError("row %d has lower > upper" % bad)
        if np.any(self.col_lower > self.col_upper):
            bad = int(np.argmax(self.col_lower > self.col_upper))
            raise ValueError("column %d has lower > upper" % bad)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class ReformulatedLp:
    """Equality form of a GeneralLp with one shifted row variable per row.

    Writing w = Ax + shift, the constraints become [A, -I](x, w) = -shift*1
    with w bounded by the shifted row interval.  The extended matrix has full
    row rank because of the identity block.
    """

    base: GeneralLp
    shift: float = DEFAULT_SHIFT
    A_ext: sp.csc_matrix = None
    rhs: np.ndarray = None
    var_lower: np.ndarray = None
    var_upper: np.ndarray = None

    def __post_init__(self):
        m, n = self.base.shape
        if self.A_ext is None:
            self.A_ext = _canonical_csc(
                sp.hstack([self.base.A, -sp.identity(m, format="csc")], format="csc")
            )
            self.rhs = np.full(m, -self.shift)
            self.var_lower = np.concatenate([self.base.col_lower, self.base.row_lower + self.shift])
            self.var_upper = np.concatenate([self.base.col_upper, self.base.row_upper + self.shift])

    @property
    def shape(self) -> tuple[int, int]:
        return self.A_ext.shape

    @property
    def n_original(self) -> int:
        return self.base.shape[1]

    def to_box(self) -> BoxLp:
        m, n = self.base.shape
        c_ext = np.concatenate([self.base.c, np.zeros(m)])
        return BoxLp(
            A=self.A_ext,
            b=self.rhs,
            c=c_ext,
            lower=self.var_lower,
            upper=self.var_upper,
            c0=self.base.objective_shift,
            name=self.base.name,
        )

    def extend_point(self, x: np.ndarray) -> np.ndarray:
        """Lift a point of the base problem to reformulated variables (x, Ax + shift)."""
        x = np.asarray(x, dtype=float).ravel()
        return np.concatenate([x, self.base.A @ x + self.shift])

    def restrict_point(self, xw: np.ndarray) -> np.ndarray:
        """Map a reformulated point back to the original variables."""
        return np.asarray(xw, dtype=float).ravel()[: self.n_original].copy()


def reformulate(lp: GeneralLp, shift: float = DEFAULT_SHIFT) -> ReformulatedLp:
    """Append one shifted row variable per row, yielding a full-row-rank equality LP."""
    return ReformulatedLp(base=lp, shift=shift)


def toy_example() -> StandardLp:
    """The two-variable running example: min 2 x1 + 3 x2 s.t. x1 + 2 x2 = 1, x >= 0."""
    return StandardLp(
        A=sp.csc_matrix(np.array([[1.0, 2.0]])),
        b=np.array([1.0]),
        c=np.array([2.0, 3.0]),
    )


def as_box(problem) -> BoxLp:
    """Coerce any supported problem type to its box form."""
    if isinstance(problem, BoxLp):
        return problem
    if isinstance(problem, (StandardLp, ReformulatedLp)):
        return problem.to_box()
    if isinstance(problem, GeneralLp):
        return reformulate(problem).to_box()
    raise TypeError("cannot interpret %r as an LP" % (type(problem).__name__,))
