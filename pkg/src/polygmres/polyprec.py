"""Construction and application of the GMRES minimum-residual polynomial.

The degree-d polynomial p minimizing ``||v0 - A p(A) v0||`` is obtained
from a power basis ``V = [v0, A v0, ..., A^d v0]`` by solving the normal
equations ``(AV)^T (AV) y = (AV)^T v0`` with a dense Cholesky
factorization.  The power basis is numerically ill-conditioned by design;
a failed Cholesky pivot is the signal that the degree has outrun the
information in the basis, which drives automatic degree selection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .counters import CostCounters
from .errors import CholeskyFailure, DimensionMismatchError, ParameterError

DEFAULT_DEGREE_CAP = 20


@dataclass(frozen=True)
class PolyCoefficients:
    """Coefficients of ``p(A) = y[d] A^d + ... + y[1] A + y[0]``.

    ``seed_norm`` records the norm of the seed vector before the internal
    normalization and ``seed_mode`` how the seed was chosen (for example
    ``"random(seed=0)"`` or ``"rhs"``).
    """

    degree: int
    y: np.ndarray
    seed_norm: float
    seed_mode: str = "unspecified"

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))
        if self.y.shape != (self.degree + 1,):
            raise ParameterError("coefficient vector must have length degree + 1")
        if not np.all(np.isfinite(self.y)):
            raise ParameterError("polynomial coefficients must be finite")


@dataclass(frozen=True)
class GramSystem:
    """Normal-equations data ``G = (AV)^T (AV)`` and ``rhs = (AV)^T v0``."""

    G: np.ndarray
    rhs: np.ndarray


def random_seed_vector(dimension: int, seed: int = 0) -> np.ndarray:
    """Default polynomial seed: uniform entries in [-1, 1] from the
    deterministic SplitMix64 stream."""
    return rng.uniform(seed, dimension, -1.0, 1.0)


def dense_cholesky(system: GramSystem) -> np.ndarray:
    """Solve the Gram system by an unblocked lower Cholesky factorization.

    Pivot k failing ``pivot > order * eps * G[k, k]`` raises
    :class:`CholeskyFailure` with the 1-based pivot index.  The floor is
    relative to the row's own diagonal entry: a power-basis Gram matrix
    has diagonal entries spanning many orders of magnitude, so a pivot is
    judged against the entry it was eliminated from, not a global scale.
    This keeps the signal independent of the seed-vector scale while
    matching the onset of a LAPACK positive-definiteness warning.
    """
    G = np.asarray(system.G, dtype=np.float64)
    rhs = np.asarray(system.rhs, dtype=np.float64)
    m = G.shape[0]
    if G.shape != (m, m) or rhs.shape != (m,):
        raise DimensionMismatchError("Gram system shapes are inconsistent")

    eps = np.finfo(np.float64).eps
    L = np.zeros((m, m))
    for k in range(m):
        pivot = G[k, k] - L[k, :k] @ L[k, :k]
        if pivot <= m * eps * G[k, k]:
            raise CholeskyFailure(k + 1)
        L[k, k] = np.sqrt(pivot)
        if k + 1 < m:
            L[k + 1 :, k] = (G[k + 1 :, k] - L[k + 1 :, :k] @ L[k, :k]) / L[k, k]

    z = np.zeros(m)
    for k in range(m):
        z[k] = (rhs[k] - L[k, :k] @ z[:k]) / L[k, k]
    y = np.zeros(m)
    for k in range(m - 1, -1, -1):
        y[k] = (z[k] - L[k + 1 :, k] @ y[k + 1 :]) / L[k, k]
    return y


def _unit_seed(op, v0):
    v0 = np.asarray(v0, dtype=np.float64)
    if v0.shape != (op.dimension,):
        raise DimensionMismatchError("seed vector length does not match operator")
    seed_norm = float(np.linalg.norm(v0))
    if seed_norm == 0.0:
        raise ParameterError("seed vector v0 must be nonzero")
    return v0 / seed_norm, seed_norm


def _power_sequence(op, v_unit, top_power, counters):
    """Columns ``[v, op v, ..., op^top v]`` using ``top_power`` counted
    operator applications."""
    cols = [v_unit]
    for _ in range(top_power):
        cols.append(op.apply(cols[-1]))
    return np.column_stack(cols)


def _normal_equations(powers, deg, counters):
    # AV is the power sequence shifted by one column
    AV = powers[:, 1 : deg + 2]
    G = AV.T @ AV
    g_rhs = AV.T @ powers[:, 0]
    counters.dots += 2
    counters.scalar_dots += (deg + 1) * (deg + 1) + (deg + 1)
    return GramSystem(G, g_rhs)


def build_poly(
    op,
    v0: np.ndarray,
    deg: int,
    counters: CostCounters,
    seed_mode: str = "unspecified",
) -> PolyCoefficients:
    """Construct the degree-``deg`` minimum-residual polynomial for ``op``.

    The seed is normalized (the coefficients are invariant to its scale),
    the extended power sequence is built with exactly ``deg + 1`` operator
    applications, and the normal equations add two block inner products to
    ``dots``.  Raises :class:`CholeskyFailure` when the Gram matrix is
    numerically rank deficient.
    """
    if deg < 0:
        raise ParameterError("polynomial degree must be non-negative")
    v_unit, seed_norm = _unit_seed(op, v0)
    counters.scalar_dots += 1
    powers = _power_sequence(op, v_unit, deg + 1, counters)
    system = _normal_equations(powers, deg, counters)
    y = dense_cholesky(system)
    return PolyCoefficients(deg, y, seed_norm, seed_mode)


def auto_degree(
    op,
    v0: np.ndarray,
    cap: int = DEFAULT_DEGREE_CAP,
    counters: CostCounters | None = None,
    seed_mode: str = "unspecified",
) -> PolyCoefficients:
    """Select the largest degree (at most ``cap``) whose Gram system still
    admits a Cholesky factorization, and return its coefficients.

    One shared power sequence of ``cap + 1`` operator applications serves
    every candidate degree; the nested Gram submatrices are re-factored
    per degree.  If degree 1 already fails, the degree-0 coefficients are
    returned; no error escapes from degenerate inputs.
    """
    if cap < 1:
        raise ParameterError("degree cap must be at least 1")
    if counters is None:
        counters = CostCounters()
    v_unit, seed_norm = _unit_seed(op, v0)
    counters.scalar_dots += 1
    powers = _power_sequence(op, v_unit, cap + 1, counters)
    full = _normal_equations(powers, cap, counters)

    best = None
    for d in range(1, cap + 1):
        sub = GramSystem(full.G[: d + 1, : d + 1], full.rhs[: d + 1])
        try:
            y = dense_cholesky(sub)
        except CholeskyFailure:
            continue
        if np.all(np.isfinite(y)):
            best = (d, y)
    if best is None:
        try:
            y0 = dense_cholesky(GramSystem(full.G[:1, :1], full.rhs[:1]))
        except CholeskyFailure:
            y0 = np.zeros(1)  # op v0 vanished; p = 0 is the only safe answer
        return PolyCoefficients(0, y0, seed_norm, seed_mode)
    d, y = best
    return PolyCoefficients(d, y, seed_norm, seed_mode)


def apply_poly(
    p: PolyCoefficients, op, v: np.ndarray, counters: CostCounters
) -> np.ndarray:
    """Evaluate ``p(op) @ v`` by the running-power recurrence.

    Exactly ``degree`` operator applications and ``degree + 1`` scaled
    vector updates.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (op.dimension,):
        raise DimensionMismatchError("vector length does not match operator")
    y = p.y
    acc = y[0] * v
    counters.vector_updates += 1
    w = v
    for k in range(1, len(y)):
        w = op.apply(w)
        acc += y[k] * w
        counters.vector_updates += 1
    return acc


def lambda_p_lambda(p: PolyCoefficients, points) -> np.ndarray:
    """Evaluate ``alpha * p(alpha)`` at scalar sample points by Horner.

    For a diagonalizable operator these are exactly the eigenvalues of
    ``A p(A)`` at the sampled eigenvalues of A, which is what the spectrum
    diagnostics plot.
    """
    pts = np.asarray(points, dtype=np.float64)
    val = np.zeros_like(pts)
    for c in p.y[::-1]:
        val = val * pts + c
    return pts * val
