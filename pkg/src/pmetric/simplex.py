"""Dense two-phase primal simplex for small equality-form LPs.

Solves  min c.x  subject to  A x = b, x >= 0.  Bland's rule (lowest-index
entering and leaving variable) keeps the pivoting deterministic and free of
cycling.  Problem sizes in this package are tiny (tens of variables), so a
full-tableau implementation is adequate.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-10


class InfeasibleError(ValueError):
    pass


def _pivot(tableau, basis, row, col):
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and abs(tableau[r, col]) > 1e-15:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _iterate(tableau, basis, ncols, max_pivots=20000):
    """Run Bland-rule pivots until the objective row has no negative entry."""
    for _ in range(max_pivots):
        col = -1
        for j in range(ncols):
            if tableau[-1, j] < -_EPS:
                col = j
                break
        if col < 0:
            return
        row = -1
        best = np.inf
        for r in range(tableau.shape[0] - 1):
            a = tableau[r, col]
            if a > _EPS:
                ratio = tableau[r, -1] / a
                if ratio < best - _EPS or (ratio < best + _EPS and (row < 0 or basis[r] < basis[row])):
                    best = ratio
                    row = r
        if row < 0:
            raise ValueError("LP is unbounded")
        _pivot(tableau, basis, row, col)
    raise RuntimeError("simplex failed to terminate")


def solve_lp(c, a_eq, b_eq):
    """Optimal (x, value) of min c.x s.t. a_eq x = b_eq, x >= 0."""
    c = np.asarray(c, dtype=float)
    a = np.asarray(a_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float).copy()
    m, n = a.shape
    a = a.copy()
    neg = b < 0
    a[neg] *= -1
    b[neg] *= -1

    # phase 1: artificial basis
    tableau = np.zeros((m + 1, n + m + 1))
    tableau[:m, :n] = a
    tableau[:m, n:n + m] = np.eye(m)
    tableau[:m, -1] = b
    basis = [n + i for i in range(m)]
    tableau[-1, :n] = -a.sum(axis=0)
    tableau[-1, -1] = -b.sum()
    _iterate(tableau, basis, n + m)
    if tableau[-1, -1] < -1e-7:
        raise InfeasibleError("LP has no feasible point")
    # drive remaining artificials out of the basis
    for r in range(m):
        if basis[r] >= n:
            for j in range(n):
                if abs(tableau[r, j]) > _EPS:
                    _pivot(tableau, basis, r, j)
                    break

    # phase 2 on the original columns
    rows = [r for r in range(m) if basis[r] < n]
    t2 = np.zeros((len(rows) + 1, n + 1))
    t2[:-1, :n] = tableau[rows][:, :n]
    t2[:-1, -1] = tableau[rows][:, -1]
    basis2 = [basis[r] for r in rows]
    t2[-1, :n] = c
    for r, bv in enumerate(basis2):
        t2[-1] -= t2[-1, bv] * t2[r]
    _iterate(t2, basis2, n)

    x = np.zeros(n)
    for r, bv in enumerate(basis2):
        x[bv] = max(t2[r, -1], 0.0)
    return x, float(c @ x)
