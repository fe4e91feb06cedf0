"""Slow-but-exact rational-arithmetic oracles, independent of numpy.

Used to derive the frozen expected values in the golden tests and to
cross-check float results: Gaussian elimination and determinants over
``fractions.Fraction``, plus the exact form of the reduced time-line
solution (u, alpha, v, beta) for a sensor/time dataset.
"""

from __future__ import annotations

from fractions import Fraction


def frac(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def frac_matrix(rows) -> list[list[Fraction]]:
    return [[frac(x) for x in row] for row in rows]


def frac_det(rows) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    a = frac_matrix(rows)
    k = len(a)
    det = Fraction(1)
    for col in range(k):
        pivot = next((r for r in range(col, k) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, k):
            factor = a[r][col] * inv
            if factor:
                for c in range(col, k):
                    a[r][c] -= factor * a[col][c]
    return det


def frac_solve(rows, rhs) -> list[Fraction]:
    """Solve a square exact system by elimination with back substitution."""
    a = frac_matrix(rows)
    b = [frac(x) for x in rhs]
    k = len(a)
    for col in range(k):
        pivot = next(r for r in range(col, k) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, k):
            factor = a[r][col] * inv
            if factor:
                for c in range(col, k):
                    a[r][c] -= factor * a[col][c]
                b[r] -= factor * b[col]
    x = [Fraction(0)] * k
    for row in reversed(range(k)):
        acc = b[row] - sum(a[row][c] * x[c] for c in range(row + 1, k))
        x[row] = acc / a[row][row]
    return x


def _transpose(rows):
    return [list(col) for col in zip(*rows)]


def _matmul(a, b):
    bt = _transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def _matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def reduced_time_line(sensors, times):
    """Exact (u, alpha, v, beta) of the geometry-reduced solution line.

    ``sensors`` is a list of rational position rows, ``times`` the matching
    reception times.  Solves the normal equations of the m x (n+1) system
    with rows (2 a_i, -1) against 2*times and against ||a_i||^2 - t_i^2.
    """
    pos = frac_matrix(sensors)
    t = [frac(x) for x in times]
    n = len(pos[0])
    g = [[2 * x for x in row] + [Fraction(-1)] for row in pos]
    gt = _transpose(g)
    gram = _matmul(gt, g)
    lhs_t = _matvec(gt, [2 * x for x in t])
    rhs = [sum(x * x for x in row) - ti * ti for row, ti in zip(pos, t)]
    lhs_c = _matvec(gt, rhs)
    yt = frac_solve(gram, lhs_t)
    yc = frac_solve(gram, lhs_c)
    return yt[:n], yt[n], yc[:n], yc[n]


def reduced_quadratic(sensors, times):
    """Exact coefficients (a, b, c) of the reduced emission-time quadratic."""
    u, alpha, v, beta = reduced_time_line(sensors, times)
    a = sum(x * x for x in u) - 1
    b = 2 * sum(x * y for x, y in zip(u, v)) - alpha
    c = sum(x * x for x in v) - beta
    return a, b, c
