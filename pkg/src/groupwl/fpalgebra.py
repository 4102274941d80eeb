"""Dense linear algebra over prime fields F_p (odd p).

Matrices are small (a few hundred rows at most) but may be wide, so everything
is plain row-major numpy with vectorised row operations.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_odd_prime(p: int) -> int:
    """Return ``p`` if it is an odd prime, else raise :class:`ParameterError`."""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
        raise ParameterError(f"modulus must be an integer, got {p!r}")
    p = int(p)
    if p == 2:
        raise ParameterError("p = 2 is not supported; an odd prime is required")
    if not is_prime(p):
        raise ParameterError(f"{p} is not prime")
    return p


def index_pairs(n: int) -> list[tuple[int, int]]:
    """Ordered pairs (i, j), i < j, in lexicographic order."""
    return list(combinations(range(n), 2))


class FpMatrix:
    """Immutable dense matrix over F_p.

    ``data`` is a read-only int64 array with entries in ``[0, p)``.  Optional
    row/column labels travel with the matrix (generator indices or index pairs).
    """

    __slots__ = ("data", "p", "row_labels", "col_labels")

    def __init__(self, data, p: int, row_labels: Sequence | None = None,
                 col_labels: Sequence | None = None):
        p = check_odd_prime(p)
        arr = np.array(data, dtype=np.int64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {arr.shape}")
        arr %= p
        arr.setflags(write=False)
        if row_labels is not None and len(row_labels) != arr.shape[0]:
            raise DimensionError("row label count does not match row count")
        if col_labels is not None and len(col_labels) != arr.shape[1]:
            raise DimensionError("column label count does not match column count")
        self.data = arr
        self.p = p
        self.row_labels = tuple(row_labels) if row_labels is not None else None
        self.col_labels = tuple(col_labels) if col_labels is not None else None

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FpMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), p)

    @classmethod
    def identity(cls, n: int, p: int) -> "FpMatrix":
        return cls(np.eye(n, dtype=np.int64), p)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and bool(
            np.array_equal(self.data, other.data))

    def __hash__(self) -> int:
        return hash((self.p, self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"FpMatrix(p={self.p}, shape={self.shape}, data={self.data.tolist()})"

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    def with_zero_columns(self, cols) -> "FpMatrix":
        out = self.data.copy()
        cols = list(cols)
        if cols:
            out[:, cols] = 0
        return FpMatrix(out, self.p, self.row_labels, self.col_labels)

    def permute_columns(self, perm, signs=None) -> "FpMatrix":
        """Column ``j`` of the result is ``signs[j] * self[:, perm[j]]``."""
        out = self.data[:, list(perm)]
        if signs is not None:
            out = out * np.asarray(signs, dtype=np.int64)[None, :]
        return FpMatrix(out, self.p, self.row_labels)


def _as_matrix(M) -> FpMatrix:
    if not isinstance(M, FpMatrix):
        raise TypeError(f"expected FpMatrix, got {type(M).__name__}")
    return M


def rref(M: FpMatrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns.

    The returned array keeps only the non-zero rows, so its row count is the rank.
    """
    M = _as_matrix(M)
    p = M.p
    A = M.data.copy()
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    c = 0
    while r < rows and c < cols:
        live = A[r:, c:].any(axis=0)
        if not live.any():
            break
        c += int(np.argmax(live))
        piv = r + int(np.flatnonzero(A[r:, c])[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        factors = A[:, c].copy()
        factors[r] = 0
        nzr = np.nonzero(factors)[0]
        if nzr.size:
            A[nzr] = (A[nzr] - factors[nzr, None] * A[r][None, :]) % p
        pivots.append(c)
        r += 1
        c += 1
    return A[:r], pivots


def rank(M: FpMatrix) -> int:
    M = _as_matrix(M)
    if M.cols > M.rows:
        M = FpMatrix(M.data.T, M.p)
    return len(rref(M)[1])


def wedge(M: FpMatrix) -> FpMatrix:
    """Second exterior power: row (i,j), column (k,l) is the 2x2 minor of M."""
    M = _as_matrix(M)
    if M.rows < 2 or M.cols < 2:
        raise DimensionError(f"wedge needs at least 2 rows and 2 columns, got {M.shape}")
    rp = index_pairs(M.rows)
    cp = index_pairs(M.cols)
    ri = np.array([a for a, _ in rp])
    rj = np.array([b for _, b in rp])
    ck = np.array([a for a, _ in cp])
    cl = np.array([b for _, b in cp])
    A = M.data
    out = A[ri][:, ck] * A[rj][:, cl] - A[ri][:, cl] * A[rj][:, ck]
    return FpMatrix(out, M.p, row_labels=rp, col_labels=cp)


def column_space_equal(A: FpMatrix, B: FpMatrix) -> bool:
    A, B = _as_matrix(A), _as_matrix(B)
    if A.rows != B.rows:
        raise DimensionError(f"row counts differ: {A.rows} vs {B.rows}")
    if A.p != B.p:
        raise DimensionError("matrices live over different fields")
    ra, rb = rank(A), rank(B)
    if ra != rb:
        return False
    joint = FpMatrix(np.hstack([A.data, B.data]), A.p)
    return rank(joint) == ra


def row_kernel(M: FpMatrix) -> FpMatrix:
    """Left null space {x : x M = 0}, as a basis in reduced row echelon form."""
    M = _as_matrix(M)
    p = M.p
    n = M.rows
    if n == 0:
        return FpMatrix(np.zeros((0, 0), dtype=np.int64), p)
    R, pivots = rref(FpMatrix(M.data.T, p))
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for r, pc in enumerate(pivots):
            basis[t, pc] = (-R[r, f]) % p
    if basis.shape[0] == 0:
        return FpMatrix(basis.reshape(0, n), p)
    red, _ = rref(FpMatrix(basis, p))
    return FpMatrix(red, p)
