"""ILU(0): incomplete LU factorization restricted to the matrix's own
sparsity pattern, applied as a left preconditioner.

Serial semantics: one global block, no overlap.  L carries an implicit
unit diagonal; U's diagonal is stored.  Both factors live in a single CSR
array with exactly the pattern of the input matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ParameterError, PivotError
from .sparse import CsrMatrix


@dataclass(frozen=True)
class Ilu0Factors:
    """Combined L\\U storage on the factored matrix's pattern.

    Entries left of the diagonal are L (unit diagonal implied), the rest
    are U.  ``diag_ptr[i]`` locates U's diagonal entry inside row i.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    diag_ptr: np.ndarray

    @property
    def nnz(self):
        return len(self.values)


def ilu0_factor(matrix: CsrMatrix, diag_shift: float = 0.0) -> Ilu0Factors:
    """Factor ``matrix`` by IKJ elimination with fill restricted to its
    pattern.

    Requires a square matrix whose pattern contains every diagonal entry.
    A pivot with magnitude at or below ``eps * max|diag|`` raises
    :class:`PivotError` naming the 0-based row; there is no silent
    shifting, but ``diag_shift`` is added to the diagonal up front for
    callers that want it.
    """
    if matrix.nrows != matrix.ncols:
        raise ParameterError("ILU(0) requires a square matrix")
    n = matrix.nrows
    row_ptr = matrix.row_ptr
    col_idx = matrix.col_idx
    values = matrix.values.copy()

    diag_ptr = np.full(n, -1, dtype=np.int64)
    on_diag = matrix._entry_row == col_idx
    diag_ptr[col_idx[on_diag]] = np.nonzero(on_diag)[0]
    missing = np.nonzero(diag_ptr < 0)[0]
    if len(missing):
        row = int(missing[0])
        raise PivotError(row, f"row {row} has no structural diagonal entry")
    if diag_shift != 0.0:
        values[diag_ptr] += diag_shift

    pivot_floor = np.finfo(np.float64).eps * float(
        np.max(np.abs(values[diag_ptr]))
    )

    rp = row_ptr.tolist()
    ci = col_idx.tolist()
    dp = diag_ptr.tolist()
    for i in range(n):
        lo, hi = rp[i], rp[i + 1]
        pos_of_col = {ci[p]: p for p in range(lo, hi)}
        for p in range(lo, hi):
            k = ci[p]
            if k >= i:
                break
            ukk = values[dp[k]]
            if abs(ukk) <= pivot_floor:
                raise PivotError(k)
            lik = values[p] / ukk
            values[p] = lik
            # eliminate within the row pattern only: A[i, j] -= L[i, k] U[k, j]
            for q in range(dp[k] + 1, rp[k + 1]):
                tgt = pos_of_col.get(ci[q])
                if tgt is not None:
                    values[tgt] -= lik * values[q]
        if abs(values[dp[i]]) <= pivot_floor:
            raise PivotError(i)

    return Ilu0Factors(n, row_ptr, col_idx, values, diag_ptr)


def ilu0_apply(factors: Ilu0Factors, v: np.ndarray) -> np.ndarray:
    """Apply ``M^{-1} v``: forward solve with unit L, back solve with U."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (factors.n,):
        raise DimensionMismatchError("vector length does not match the factors")
    n = factors.n
    rp = factors.row_ptr
    ci = factors.col_idx
    vals = factors.values
    dp = factors.diag_ptr

    y = np.empty(n)
    for i in range(n):
        lo, d = rp[i], dp[i]
        y[i] = v[i] - vals[lo:d] @ y[ci[lo:d]]
    z = np.empty(n)
    for i in range(n - 1, -1, -1):
        d, hi = dp[i], rp[i + 1]
        z[i] = (y[i] - vals[d + 1 : hi] @ z[ci[d + 1 : hi]]) / vals[d]
    return z
