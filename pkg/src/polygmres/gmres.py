"""Restarted GMRES(m) with optional left ILU and right polynomial
preconditioning, Givens-rotation least squares, and full cost accounting.

The Arnoldi loop orthogonalizes with two-pass classical Gram-Schmidt and
tracks an implicit residual estimate from the rotated least-squares
right-hand side.  Convergence is only ever declared from an explicit
residual of the original (unwrapped) system, recomputed at every cycle
end; the implicit estimate merely decides when a cycle may stop early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .counters import CostCounters
from .errors import (
    DimensionMismatchError,
    NumericalBreakdownError,
    ParameterError,
    SingularHessenbergError,
)
from .ilu import Ilu0Factors, ilu0_apply
from .ortho import icgs
from .polyprec import PolyCoefficients, apply_poly
from .sparse import CsrMatrix, spmv

__all__ = [
    "MatrixOperator",
    "IluPreconditionedOperator",
    "PolynomialWrappedOperator",
    "GmresConfig",
    "GmresResult",
    "hessenberg_lsq",
    "solve",
    "cost_report",
]


# ---------------------------------------------------------------------------
# counting operators
# ---------------------------------------------------------------------------

class MatrixOperator:
    """Counting wrapper over a square :class:`CsrMatrix`: apply = A @ v."""

    kind = "plain-matrix"

    def __init__(self, matrix: CsrMatrix, counters: CostCounters | None = None):
        if matrix.nrows != matrix.ncols:
            raise ParameterError("operator matrix must be square")
        self.matrix = matrix
        self.dimension = matrix.nrows
        self.counters = counters if counters is not None else CostCounters()

    def apply(self, v):
        self.counters.spmvs += 1
        return spmv(self.matrix, v)


class IluPreconditionedOperator:
    """Left-preconditioned operator ``v -> M^{-1} (A v)``.

    Each application costs one SpMV plus one preconditioner application;
    the triangular solves are tallied in ``prec_applies``, never as SpMVs.
    """

    kind = "left-preconditioned"

    def __init__(
        self,
        matrix: CsrMatrix,
        factors: Ilu0Factors,
        counters: CostCounters | None = None,
    ):
        if matrix.nrows != matrix.ncols:
            raise ParameterError("operator matrix must be square")
        if factors.n != matrix.nrows:
            raise DimensionMismatchError("factors do not match the matrix")
        self.matrix = matrix
        self.factors = factors
        self.dimension = matrix.nrows
        self.counters = counters if counters is not None else CostCounters()

    def apply(self, v):
        self.counters.spmvs += 1
        self.counters.prec_applies += 1
        return ilu0_apply(self.factors, spmv(self.matrix, v))

    def precondition(self, v):
        """``M^{-1} v`` for preparing the right-hand side."""
        self.counters.prec_applies += 1
        return ilu0_apply(self.factors, v)


class PolynomialWrappedOperator:
    """Right-preconditioned composite ``v -> op(p(op) v)``.

    Costs ``degree + 1`` applications of the wrapped operator per call.
    """

    kind = "polynomial-wrapped"

    def __init__(self, inner, poly: PolyCoefficients):
        self.inner = inner
        self.poly = poly
        self.dimension = inner.dimension
        self.counters = inner.counters

    def apply(self, v):
        return self.inner.apply(apply_poly(self.poly, self.inner, v, self.counters))


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GmresConfig:
    """Solver knobs: restart length, relative-residual tolerance, total
    inner-iteration budget, and whether to record per-iteration history."""

    restart_m: int = 50
    tol: float = 1e-8
    max_iters: int = 200000
    record_history: bool = True

    def __post_init__(self):
        if self.restart_m < 1:
            raise ParameterError("restart_m must be at least 1")
        if not (0.0 < self.tol < 1.0):
            raise ParameterError("tol must lie in (0, 1)")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be at least 1")


@dataclass
class GmresResult:
    """Solve outcome.

    ``history`` rows are ``(iteration, implicit_relres, spmvs, dots,
    scalar_dots)`` with cumulative counter snapshots; the row closing a
    restart cycle is recorded after that cycle's solution recovery and
    explicit residual check, so the final row matches the counter totals
    exactly.  ``final_relres`` is always the explicitly computed relative
    residual at exit.  ``cycles`` counts completed restart cycles, i.e.
    solution recoveries and explicit residual checks.
    """

    x: np.ndarray
    converged: bool
    iterations: int
    final_relres: float
    history: list = field(default_factory=list)
    counters: CostCounters = field(default_factory=CostCounters)
    cycles: int = 0


# ---------------------------------------------------------------------------
# Hessenberg least squares
# ---------------------------------------------------------------------------

def _givens(a, b):
    r = math.hypot(a, b)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return a / r, b / r, r


def hessenberg_lsq(H, beta: float):
    """Solve ``min || beta e1 - H y ||`` for upper-Hessenberg H of shape
    (j+1, j) by incrementally applied Givens rotations.

    Returns ``(y, residual_norm)`` where the residual norm is the
    magnitude of the last rotated right-hand-side entry.  A zero diagonal
    after rotation raises :class:`SingularHessenbergError` (that can only
    happen after a breakdown was already signalled).
    """
    H = np.array(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1] + 1:
        raise DimensionMismatchError("H must have shape (j+1, j)")
    j = H.shape[1]
    cs = np.zeros(j)
    sn = np.zeros(j)
    g = np.zeros(j + 1)
    g[0] = beta
    for col in range(j):
        for i in range(col):
            t = cs[i] * H[i, col] + sn[i] * H[i + 1, col]
            H[i + 1, col] = -sn[i] * H[i, col] + cs[i] * H[i + 1, col]
            H[i, col] = t
        c, s, r = _givens(H[col, col], H[col + 1, col])
        cs[col], sn[col] = c, s
        H[col, col] = r
        H[col + 1, col] = 0.0
        g[col + 1] = -s * g[col]
        g[col] = c * g[col]

    y = np.zeros(j)
    for i in range(j - 1, -1, -1):
        if H[i, i] == 0.0:
            raise SingularHessenbergError(f"zero rotated diagonal at column {i}")
        y[i] = (g[i] - H[i, i + 1 : j] @ y[i + 1 :]) / H[i, i]
    return y, abs(g[j])


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------

def solve(
    op,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    right_prec: PolyCoefficients | None = None,
    config: GmresConfig | None = None,
) -> GmresResult:
    """Restarted GMRES over ``op``, optionally right-preconditioned by a
    minimum-residual polynomial.

    Per inner iteration the (possibly polynomial-wrapped) operator is
    applied once and the new vector orthogonalized by two-pass classical
    Gram-Schmidt.  At each cycle end the iterate is recovered, unwrapping
    the right preconditioner via ``x += p(op)(V y)``, and the explicit
    residual of the original system decides convergence; its norm seeds
    the next cycle, so the check costs one extra operator application per
    restart.  Exhausting ``max_iters`` returns ``converged=False`` rather
    than raising; non-finite Krylov data raises
    :class:`NumericalBreakdownError` naming the iteration.
    """
    if config is None:
        config = GmresConfig()
    counters = op.counters
    n = op.dimension
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (n,):
        raise DimensionMismatchError("right-hand side length does not match")

    norm_b = float(np.linalg.norm(b))
    counters.scalar_dots += 1
    if norm_b == 0.0:
        return GmresResult(np.zeros(n), True, 0, 0.0, [], counters, 0)

    if x0 is None:
        x = np.zeros(n)
        r = b.copy()
        beta = norm_b
    else:
        x = np.array(x0, dtype=np.float64)
        if x.shape != (n,):
            raise DimensionMismatchError("x0 length does not match")
        if np.any(x != 0.0):
            r = b - op.apply(x)
        else:
            r = b.copy()
        beta = float(np.linalg.norm(r))
        counters.scalar_dots += 1

    wrapped = PolynomialWrappedOperator(op, right_prec) if right_prec else op
    m = config.restart_m
    tol = config.tol
    history: list = []
    total_iters = 0
    cycles = 0
    converged = beta / norm_b < tol
    true_relres = beta / norm_b

    V = np.empty((n, m + 1), order="F")
    Hrot = np.empty((m + 1, m))
    cs = np.empty(m)
    sn = np.empty(m)
    g = np.empty(m + 1)

    while not converged and total_iters < config.max_iters:
        V[:, 0] = r / beta
        g[0] = beta
        j = 0
        breakdown = False
        pending_row = None
        while j < m and total_iters < config.max_iters:
            w = wrapped.apply(V[:, j])
            step = icgs(V[:, : j + 1], w, counters)
            if not (
                math.isfinite(step.new_norm) and np.all(np.isfinite(step.coeffs))
            ):
                raise NumericalBreakdownError(total_iters + 1)

            hcol = np.empty(j + 2)
            hcol[: j + 1] = step.coeffs
            hcol[j + 1] = step.new_norm
            for i in range(j):
                t = cs[i] * hcol[i] + sn[i] * hcol[i + 1]
                hcol[i + 1] = -sn[i] * hcol[i] + cs[i] * hcol[i + 1]
                hcol[i] = t
            c, s, rot = _givens(hcol[j], hcol[j + 1])
            cs[j], sn[j] = c, s
            hcol[j] = rot
            Hrot[: j + 1, j] = hcol[: j + 1]
            g[j + 1] = -s * g[j]
            g[j] = c * g[j]

            total_iters += 1
            j += 1
            implicit = abs(g[j]) / norm_b
            pending_row = (total_iters, implicit)
            if step.breakdown:
                breakdown = True
                break
            V[:, j] = step.vector
            if implicit < tol:
                break
            if j < m and total_iters < config.max_iters and config.record_history:
                history.append((total_iters, implicit) + counters.snapshot()[:3])
                pending_row = None

        # cycle end: solve the small triangular system and recover x
        y = np.empty(j)
        for i in range(j - 1, -1, -1):
            if Hrot[i, i] == 0.0:
                raise SingularHessenbergError(
                    f"zero rotated diagonal at column {i}"
                )
            y[i] = (g[i] - Hrot[i, i + 1 : j] @ y[i + 1 :]) / Hrot[i, i]
        update = V[:, :j] @ y
        counters.vector_updates += j
        if right_prec is not None:
            update = apply_poly(right_prec, op, update, counters)
        x = x + update
        counters.vector_updates += 1
        cycles += 1

        r = b - op.apply(x)
        beta = float(np.linalg.norm(r))
        counters.scalar_dots += 1
        true_relres = beta / norm_b
        if config.record_history and pending_row is not None:
            history.append(pending_row + counters.snapshot()[:3])
        if breakdown or true_relres < tol:
            converged = True

    return GmresResult(x, converged, total_iters, true_relres, history, counters, cycles)


# ---------------------------------------------------------------------------
# communication-proxy report
# ---------------------------------------------------------------------------

def cost_report(counters: CostCounters, deg: int, restart_m: int) -> dict:
    """Communication-proxy summary of a finished solve.

    Dot products stand in for global synchronizations, SpMVs for neighbor
    exchanges.  ``spmvs_per_iteration``/``dots_per_iteration`` are the
    structural per-inner-iteration rates (``deg + 1`` and 3), and
    ``ca_grouping_spmvs_per_sync`` is the hypothetical s-step grouping in
    which orthogonalization would be needed only once every
    ``deg * restart_m`` SpMVs.
    """
    dots = counters.dots
    spmvs = counters.spmvs
    return {
        "global_sync_proxy_dots": dots,
        "neighbor_exchange_proxy_spmvs": spmvs,
        "scalar_dots": counters.scalar_dots,
        "vector_updates": counters.vector_updates,
        "prec_applies": counters.prec_applies,
        "spmvs_per_global_sync": (spmvs / dots) if dots else 0.0,
        "spmvs_per_iteration": deg + 1,
        "dots_per_iteration": 3,
        "ca_grouping_spmvs_per_sync": deg * restart_m,
    }
