"""Compressed sparse row storage, SpMV, Matrix Market I/O, and the
deterministic generators for the benchmark matrices.

Everything is real double precision.  A :class:`CsrMatrix` validates the
CSR invariants eagerly and is immutable afterwards, so instances can be
shared freely across threads.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    MatrixMarketParseError,
    ParameterError,
    UnsupportedFormatError,
)

__all__ = [
    "CsrMatrix",
    "spmv",
    "read_matrix_market",
    "write_matrix_market",
    "gen_bidiag",
    "bidiag1",
    "bidiag2",
    "gen_laplacian2d",
    "gen_laplacian_rhs",
    "gen_convdiff2d",
]


# ---------------------------------------------------------------------------
# storage
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """Sparse matrix in compressed sparse row form.

    ``row_ptr`` has length ``nrows + 1`` with ``row_ptr[0] == 0`` and
    ``row_ptr[nrows] == nnz``; column indices are strictly increasing
    within each row (hence no duplicate entries) and all below ``ncols``.
    Violations raise :class:`ParameterError` at construction.
    """

    nrows: int
    ncols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    # row index of every stored entry, precomputed for the SpMV kernel
    _entry_row: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)

        if self.nrows < 0 or self.ncols < 0:
            raise ParameterError("matrix dimensions must be non-negative")
        if row_ptr.shape != (self.nrows + 1,):
            raise ParameterError("row_ptr must have length nrows + 1")
        if row_ptr[0] != 0:
            raise ParameterError("row_ptr[0] must be 0")
        if col_idx.shape != values.shape or col_idx.ndim != 1:
            raise ParameterError("col_idx and values must be 1-d and equal length")
        if row_ptr[-1] != len(values):
            raise ParameterError("row_ptr[nrows] must equal the entry count")
        counts = np.diff(row_ptr)
        if np.any(counts < 0):
            raise ParameterError("row_ptr must be non-decreasing")
        if len(col_idx) and (col_idx.min() < 0 or col_idx.max() >= self.ncols):
            raise ParameterError("column indices out of range")

        entry_row = np.repeat(np.arange(self.nrows, dtype=np.int64), counts)
        object.__setattr__(self, "_entry_row", entry_row)

        if len(col_idx) > 1:
            same_row = entry_row[1:] == entry_row[:-1]
            if np.any(same_row & (np.diff(col_idx) <= 0)):
                raise ParameterError(
                    "column indices must be strictly increasing within each row"
                )

    @property
    def nnz(self):
        return len(self.values)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def to_dense(self):
        """Dense mirror, for small-matrix oracles and diagnostics."""
        dense = np.zeros((self.nrows, self.ncols))
        dense[self._entry_row, self.col_idx] = self.values
        return dense

    def diagonal(self):
        """Main-diagonal entries as a dense vector (zeros where absent)."""
        d = np.zeros(min(self.nrows, self.ncols))
        on_diag = self._entry_row == self.col_idx
        d[self.col_idx[on_diag]] = self.values[on_diag]
        return d

    @classmethod
    def from_coo(cls, nrows, ncols, rows, cols, values):
        """Assemble from coordinate triplets; sorts rows and sums duplicates."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape):
            raise ParameterError("triplet arrays must have equal length")
        if len(rows) and (
            rows.min() < 0 or rows.max() >= nrows
            or cols.min() < 0 or cols.max() >= ncols
        ):
            raise ParameterError("triplet indices out of range")

        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if len(rows):
            fresh = np.empty(len(rows), dtype=bool)
            fresh[0] = True
            fresh[1:] = (np.diff(rows) != 0) | (np.diff(cols) != 0)
            slot = np.cumsum(fresh) - 1
            summed = np.zeros(int(slot[-1]) + 1)
            np.add.at(summed, slot, values)
            rows, cols, values = rows[fresh], cols[fresh], summed

        row_ptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        row_ptr = np.cumsum(row_ptr)
        return cls(nrows, ncols, row_ptr, cols, values)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))


def spmv(matrix: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Dense product ``matrix @ x``.

    Accumulation is per row (``bincount``), so the rounding behavior
    matches a dense row-by-row dot product.  The bare function does not
    count; counting happens in the operator wrappers.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != matrix.ncols:
        raise DimensionMismatchError(
            f"operand of length {x.shape[-1] if x.ndim else 0} does not match "
            f"{matrix.nrows}x{matrix.ncols} matrix"
        )
    return np.bincount(
        matrix._entry_row,
        weights=matrix.values * x[matrix.col_idx],
        minlength=matrix.nrows,
    )


# ---------------------------------------------------------------------------
# Matrix Market coordinate format
# ---------------------------------------------------------------------------

def _open_lines(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("latin-1").splitlines()
    if isinstance(source, bytes):
        return source.decode("latin-1").splitlines()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("latin-1")
    return data.splitlines()


def read_matrix_market(source) -> CsrMatrix:
    """Parse Matrix Market coordinate data into a :class:`CsrMatrix`.

    Accepts a path, raw bytes, or a file-like object.  Field must be
    ``real`` or ``integer`` and symmetry ``general`` or ``symmetric``;
    anything else (complex, pattern, array, ...) raises
    :class:`UnsupportedFormatError`.  Symmetric storage is expanded to the
    full matrix, indices are rebased to 0, entries are sorted within rows,
    and duplicates are summed.  Malformed lines raise
    :class:`MatrixMarketParseError` carrying the 1-based line number.
    """
    lines = _open_lines(source)
    if not lines:
        raise MatrixMarketParseError(1, "empty input")

    banner = lines[0].split()
    if len(banner) != 5 or not banner[0].lower().startswith("%%matrixmarket"):
        raise MatrixMarketParseError(1, "malformed MatrixMarket banner")
    obj, fmt, fld, sym = (tok.lower() for tok in banner[1:])
    if obj != "matrix":
        raise UnsupportedFormatError(f"unsupported object {obj!r}")
    if fmt != "coordinate":
        raise UnsupportedFormatError(f"unsupported format {fmt!r}")
    if fld not in ("real", "integer"):
        raise UnsupportedFormatError(f"unsupported field {fld!r}")
    if sym not in ("general", "symmetric"):
        raise UnsupportedFormatError(f"unsupported symmetry {sym!r}")

    nrows = ncols = declared = -1
    rows, cols, vals = [], [], []
    seen = 0
    for line_no, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        tokens = text.split()
        if declared < 0:
            if len(tokens) != 3:
                raise MatrixMarketParseError(line_no, "size line needs 3 integers")
            try:
                nrows, ncols, declared = (int(t) for t in tokens)
            except ValueError:
                raise MatrixMarketParseError(line_no, "size line needs 3 integers")
            if nrows < 0 or ncols < 0 or declared < 0:
                raise MatrixMarketParseError(line_no, "negative size entry")
            continue
        if seen >= declared:
            raise MatrixMarketParseError(
                line_no, f"more than the declared {declared} entries"
            )
        if len(tokens) != 3:
            raise MatrixMarketParseError(line_no, "entry needs 'row col value'")
        try:
            i, j = int(tokens[0]), int(tokens[1])
            v = float(tokens[2])
        except ValueError:
            raise MatrixMarketParseError(line_no, f"cannot parse entry {text!r}")
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketParseError(line_no, f"index ({i}, {j}) out of range")
        seen += 1
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
        if sym == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            vals.append(v)

    if declared < 0:
        raise MatrixMarketParseError(len(lines), "missing size line")
    if seen != declared:
        raise MatrixMarketParseError(
            len(lines), f"expected {declared} entries, found {seen}"
        )
    return CsrMatrix.from_coo(nrows, ncols, rows, cols, vals)


def write_matrix_market(matrix: CsrMatrix, target) -> None:
    """Write ``matrix`` as 1-based real general coordinate data.

    Values are written with shortest round-trip precision, so reading the
    output reproduces the entry multiset exactly.
    """
    buf = io.StringIO()
    buf.write("%%MatrixMarket matrix coordinate real general\n")
    buf.write(f"{matrix.nrows} {matrix.ncols} {matrix.nnz}\n")
    for r, c, v in zip(matrix._entry_row, matrix.col_idx, matrix.values):
        buf.write(f"{r + 1} {c + 1} {float(v)!r}\n")
    data = buf.getvalue()
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", newline="\n") as fh:
            fh.write(data)
    else:
        target.write(data)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_bidiag(n: int, diag_values, superdiag: float) -> CsrMatrix:
    """Upper-bidiagonal matrix with the given diagonal and a constant
    superdiagonal.  A zero superdiagonal stores the diagonal only."""
    if n == 0:
        raise ParameterError("empty matrix: n must be at least 1")
    diag = np.asarray(diag_values, dtype=np.float64)
    if diag.shape != (n,):
        raise ParameterError("diag_values must have length n")
    if superdiag == 0.0 or n == 1:
        idx = np.arange(n, dtype=np.int64)
        return CsrMatrix(n, n, np.arange(n + 1, dtype=np.int64), idx, diag.copy())

    nnz = 2 * n - 1
    values = np.empty(nnz)
    col_idx = np.empty(nnz, dtype=np.int64)
    values[0 : 2 * (n - 1) : 2] = diag[:-1]
    values[1 : 2 * (n - 1) : 2] = superdiag
    values[-1] = diag[-1]
    col_idx[0 : 2 * (n - 1) : 2] = np.arange(n - 1)
    col_idx[1 : 2 * (n - 1) : 2] = np.arange(1, n)
    col_idx[-1] = n - 1
    row_ptr = np.concatenate(
        ([0], np.cumsum(np.concatenate((np.full(n - 1, 2, dtype=np.int64), [1]))))
    )
    return CsrMatrix(n, n, row_ptr, col_idx, values)


def bidiag1() -> CsrMatrix:
    """The n=2000 test matrix: diagonal 1..2000, superdiagonal 0.05."""
    return gen_bidiag(2000, np.arange(1, 2001, dtype=np.float64), 0.05)


def bidiag2() -> CsrMatrix:
    """The n=5000 test matrix: diagonal 0.1, ..., 0.9, 1, 2, ..., 4991,
    superdiagonal 0.2."""
    diag = np.concatenate(
        (np.arange(1, 10, dtype=np.float64) * 0.1,
         np.arange(1, 4992, dtype=np.float64))
    )
    return gen_bidiag(5000, diag, 0.2)


def gen_laplacian2d(grid_n: int) -> CsrMatrix:
    """Five-point Laplacian stencil (4 on the diagonal, -1 to each grid
    neighbor) on a ``grid_n x grid_n`` interior grid with zero Dirichlet
    boundary.

    Left unscaled by the mesh width, so the spectrum lies in (0, 8)
    regardless of grid size.  Points are numbered row-major.
    """
    if grid_n == 0:
        raise ParameterError("empty matrix: grid_n must be at least 1")
    g = grid_n
    n = g * g
    idx = np.arange(n, dtype=np.int64)
    i = idx % g
    j = idx // g

    rows = [idx]
    cols = [idx]
    vals = [np.full(n, 4.0)]
    for mask, offset in (
        (i > 0, -1),
        (i < g - 1, +1),
        (j > 0, -g),
        (j < g - 1, +g),
    ):
        rows.append(idx[mask])
        cols.append(idx[mask] + offset)
        vals.append(np.full(int(mask.sum()), -1.0))
    return CsrMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def gen_laplacian_rhs(grid_n: int) -> np.ndarray:
    """Right-hand side for the unit-source Poisson problem on the unscaled
    stencil: all entries equal h^2 with h = 1/(grid_n + 1).

    Tiny relative to the operator scale on purpose; using it as the
    polynomial seed vector reproduces the structured-seed failure mode.
    """
    if grid_n == 0:
        raise ParameterError("empty matrix: grid_n must be at least 1")
    h = 1.0 / (grid_n + 1)
    return np.full(grid_n * grid_n, h * h)


def gen_convdiff2d(grid_n: int, epsilon: float):
    """Centered-difference convection-diffusion operator on [-1, 1]^2.

    Discretizes ``-epsilon * lap(u) + w . grad(u) = 0`` with the
    recirculating wind ``w = (2y(1 - x^2), -2x(1 - y^2))`` and Dirichlet
    data u = 1 on the boundary x = 1, u = 0 elsewhere, folded into the
    returned right-hand side.  Entries carry the h^2 scaling, so row r at
    grid point (x, y) holds::

        diag   4*eps
        east   -eps + w1*h/2      west   -eps - w1*h/2
        north  -eps + w2*h/2      south  -eps - w2*h/2

    with h = 2/(grid_n + 1).  Centered differences keep the matrix
    genuinely non-symmetric; this is a finite-difference substitute for a
    finite-element discretization of the same PDE, not a reproduction.

    Returns ``(matrix, rhs)``; the rhs is nonzero only at points adjacent
    to the x = 1 boundary.
    """
    if epsilon <= 0.0:
        raise ParameterError("epsilon must be positive")
    if grid_n < 2:
        raise ParameterError("grid_n must be at least 2")
    g = grid_n
    n = g * g
    h = 2.0 / (g + 1)
    idx = np.arange(n, dtype=np.int64)
    i = idx % g
    j = idx // g
    x = -1.0 + (i + 1) * h
    y = -1.0 + (j + 1) * h
    w1 = 2.0 * y * (1.0 - x * x)
    w2 = -2.0 * x * (1.0 - y * y)

    east = -epsilon + w1 * h / 2.0
    west = -epsilon - w1 * h / 2.0
    north = -epsilon + w2 * h / 2.0
    south = -epsilon - w2 * h / 2.0

    rows = [idx]
    cols = [idx]
    vals = [np.full(n, 4.0 * epsilon)]
    for coeff, mask, offset in (
        (west, i > 0, -1),
        (east, i < g - 1, +1),
        (south, j > 0, -g),
        (north, j < g - 1, +g),
    ):
        rows.append(idx[mask])
        cols.append(idx[mask] + offset)
        vals.append(coeff[mask])

    rhs = np.zeros(n)
    at_east_wall = i == g - 1
    rhs[at_east_wall] = -east[at_east_wall]  # u = 1 on x = 1
    matrix = CsrMatrix.from_coo(
        n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )
    return matrix, rhs
