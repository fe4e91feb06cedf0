"""Small dense linear-algebra kernel used by the solvers.

Thin wrappers around numpy's SVD/LU routines that pin down the conventions
the rest of the package relies on: how numeric rank is decided, how a
least-squares solve reports rank deficiency, and how quadratic roots are
classified in the presence of degenerate leading coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient

#: Relative singular-value cutoff used for rank decisions package-wide.
DEFAULT_RANK_TOL = 1e-8

#: Largest matrix size accepted by :func:`determinant`.  Beyond this the
#: determinant is numerically meaningless for the matrices we deal with.
MAX_DET_SIZE = 8


def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def numeric_rank(a, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank of ``a``: singular values above ``rel_tol`` times the largest.

    The zero matrix has rank 0.  ``rel_tol`` must lie strictly between 0
    and 1; the default is shared by every rank decision in the package.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must be in (0, 1), got {rel_tol}")
    arr = _as_matrix(a)
    if arr.size == 0:
        return 0
    sigma = np.linalg.svd(arr, compute_uv=False)
    if sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > rel_tol * sigma[0]))


def least_squares_solve(a, b, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Least-squares solution of ``a @ x = b`` for full-column-rank ``a``.

    Raises :class:`RankDeficient` when the numeric rank of ``a`` (at
    ``rel_tol``) is below its column count, instead of silently returning
    one of infinitely many minimisers.
    """
    arr = _as_matrix(a)
    rhs = np.asarray(b, dtype=float)
    if rhs.ndim != 1 or rhs.shape[0] != arr.shape[0]:
        raise ValueError(f"rhs shape {rhs.shape} does not match matrix {arr.shape}")
    if not np.isfinite(rhs).all():
        raise ValueError("rhs contains NaN or Inf entries")
    if arr.shape[0] < arr.shape[1]:
        raise ValueError(f"need at least as many rows as columns, got {arr.shape}")
    rank = numeric_rank(arr, rel_tol)
    if rank < arr.shape[1]:
        raise RankDeficient(
            f"matrix has numeric rank {rank} < {arr.shape[1]} columns"
        )
    solution, *_ = np.linalg.lstsq(arr, rhs, rcond=None)
    return solution


def determinant(a) -> float:
    """Determinant of a small (at most 8x8) square matrix."""
    arr = _as_matrix(a)
    k, k2 = arr.shape
    if k != k2:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    if k > MAX_DET_SIZE:
        raise ValueError(f"matrix size {k} exceeds the supported maximum {MAX_DET_SIZE}")
    return float(np.linalg.det(arr))


def hadamard_ratio(a) -> float:
    """|det| of a square matrix divided by the product of its row norms.

    Hadamard's inequality bounds the ratio by 1, so the value is a
    scale-free measure of how far the matrix is from singular.  The all-zero
    matrix (0/0) maps to 0 by convention.
    """
    arr = _as_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    denom = float(np.prod(np.linalg.norm(arr, axis=1)))
    if denom == 0.0:
        return 0.0
    return abs(float(np.linalg.det(arr))) / denom


class RootKind(enum.Enum):
    """Classification returned by :func:`solve_quadratic`."""

    TWO_REAL = "two-real"
    ONE_REAL = "one-real"
    NO_REAL = "no-real"
    DEGENERATE_LINEAR = "degenerate-linear"
    DEGENERATE_ALL = "degenerate-all"


@dataclass(frozen=True)
class QuadraticRoots:
    kind: RootKind
    roots: tuple[float, ...]


def solve_quadratic(a: float, b: float, c: float, tol: float = 0.0) -> QuadraticRoots:
    """Real roots of ``a t^2 + b t + c = 0`` with degeneracy classification.

    Coefficients with ``|a| <= tol`` are treated as a linear equation
    (``DEGENERATE_LINEAR``); if ``|b| <= tol`` as well the equation carries
    no information (``DEGENERATE_ALL``, no roots).  Otherwise the usual
    two/one/zero real-root cases apply, with roots sorted ascending and
    computed in the sign-stable form q = -(b + sign(b) sqrt(disc)) / 2,
    roots q/a and c/q, which avoids cancellation for small ``c``.
    """
    if tol < 0.0:
        raise ValueError(f"tol must be non-negative, got {tol}")
    for name, value in (("a", a), ("b", b), ("c", c)):
        if not math.isfinite(value):
            raise ValueError(f"coefficient {name} is not finite: {value}")
    if abs(a) <= tol:
        if abs(b) <= tol:
            return QuadraticRoots(RootKind.DEGENERATE_ALL, ())
        return QuadraticRoots(RootKind.DEGENERATE_LINEAR, (-c / b + 0.0,))
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return QuadraticRoots(RootKind.NO_REAL, ())
    if disc == 0.0:
        return QuadraticRoots(RootKind.ONE_REAL, (-b / (2.0 * a) + 0.0,))
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    lo, hi = sorted((q / a + 0.0, c / q + 0.0))  # +0.0 scrubs negative zeros
    return QuadraticRoots(RootKind.TWO_REAL, (lo, hi))
