"""Numerical Lie brackets and Lie derivatives of the contact form."""

from __future__ import annotations

import numpy as np

from . import autodiff


def lie_bracket(x_field, y_field, p):
    """[X, Y](p) = J_Y(p) X(p) - J_X(p) Y(p)."""
    p = list(map(float, p))
    xv = np.asarray(x_field(p), dtype=float)
    yv = np.asarray(y_field(p), dtype=float)
    jx = np.asarray(x_field.jacobian(p), dtype=float)
    jy = np.asarray(y_field.jacobian(p), dtype=float)
    # jacobian rows are components, columns derivatives: J[i][j] = dX_i/dc_j
    return jy @ xv - jx @ yv


def eta_pairing(chart, x_field):
    """The scalar field p -> eta(X)(p), evaluable on duals."""
    n = chart.n

    def fn(c):
        vals = x_field(c)
        out = vals[2 * n]
        for i in range(n):
            out = out - c[n + i] * vals[i]
        return out

    return fn


def lie_derivative_form(chart, x_field, p):
    """(L_X eta)(p) via Cartan: iota_X d(eta) + d(eta(X))."""
    p = chart.point(p)
    ixdeta = chart.deta_matrix().T @ np.asarray(x_field(list(p)), dtype=float)
    g = autodiff.grad(eta_pairing(chart, x_field), list(p))
    return ixdeta + np.asarray(g, dtype=float)
