"""Small linear-algebra helpers: generic solves, nullspaces, subspace tests."""

from __future__ import annotations

import numpy as np
from scipy.linalg import subspace_angles

from . import autodiff
from .errors import SingularMatrixError


def solve_generic(a, b):
    """Solve A x = b by Gaussian elimination over generic scalars.

    Entries may be dual numbers; pivoting compares underlying float values.
    Used where numpy's solver cannot operate (differentiating through a
    solve).
    """
    n = len(b)
    a = [list(row) for row in a]
    b = list(b)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(autodiff.value(a[r][col])))
        if abs(autodiff.value(a[piv][col])) < 1e-300:
            raise SingularMatrixError("matrix is singular to working precision")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            b[col], b[piv] = b[piv], b[col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            for c in range(col + 1, n):
                a[r][c] = a[r][c] - factor * a[col][c]
            b[r] = b[r] - factor * b[col]
            a[r][col] = 0.0
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc = acc - a[r][c] * x[c]
        x[r] = acc / a[r][r]
    return x


def nullspace(a, tol=1e-9):
    """Orthonormal basis (columns) of the nullspace of a 2-d array."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
    return vh[rank:].T.copy()


def column_span(a, tol=1e-9):
    """Orthonormal basis for the span of the columns of ``a``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0:
        return a[:, :0]
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank].copy()


def subspace_distance(a, b):
    """Largest principal angle (radians) between two column spans.

    Returns inf when the spans have different dimension.
    """
    qa = column_span(a)
    qb = column_span(b)
    if qa.shape[1] != qb.shape[1]:
        return np.inf
    if qa.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(qa, qb)))


def contains_span(big, small, tol=1e-9):
    """True when every column of ``small`` lies in the span of ``big``."""
    qb = column_span(big)
    small = np.atleast_2d(np.asarray(small, dtype=float))
    resid = small - qb @ (qb.T @ small)
    return float(np.max(np.abs(resid), initial=0.0)) <= tol
