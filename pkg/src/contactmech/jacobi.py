"""Jacobi structures and brackets.

A Jacobi structure is a bivector Lambda plus a vector field E; the bracket
is {f, g} = Lambda(df, dg) + f E(g) - g E(f).  Three instantiations are
provided:

* :class:`ContactJacobi` -- induced by the Darboux contact form, with
  Lambda(a, b) = -d(eta)(sharp a, sharp b) and E = -R;
* :class:`CosymplecticJacobi` -- Omega = dx^i ^ dy_i, eta = dz, E = 0
  (a Poisson structure);
* :class:`LcsJacobi` -- a locally conformally symplectic pair (Omega,
  Lee form gamma), evaluation only.

All evaluation paths accept dual-number coordinates so brackets can be
composed and differentiated again.
"""

from __future__ import annotations

import numpy as np

from . import autodiff
from ._linalg import solve_generic
from .expressions import ScalarField


class ContactJacobi:
    """Jacobi structure of the Darboux chart: E = -R, im(sharp_Lambda) = H."""

    def __init__(self, chart):
        self.chart = chart
        self.dim = chart.dim

    def sharp_lambda(self, coords, alpha):
        """sharp_Lambda(alpha) = sharp(alpha) - alpha(R) R, in closed form.

        Closed form in Darboux coordinates: with alpha = a_i dx^i + b^i dy_i
        + c dz, the image is b^i d/dx^i - (a_i + y_i c) d/dy_i
        + (b^i y_i) d/dz.
        """
        n = self.chart.n
        a, b, c = alpha[:n], alpha[n:2 * n], alpha[2 * n]
        y = coords[n:2 * n]
        out = list(b)
        out.extend(-(a[i] + y[i] * c) for i in range(n))
        out.append(sum(b[i] * y[i] for i in range(n)))
        return out

    def lam(self, coords, alpha, beta):
        sh = self.sharp_lambda(coords, alpha)
        return sum(bi * vi for bi, vi in zip(beta, sh))

    def E(self, coords):
        return [0.0] * (self.dim - 1) + [-1.0]


class CosymplecticJacobi:
    """Poisson structure of (Omega = dx^i ^ dy_i, eta = dz): E = 0."""

    def __init__(self, chart):
        self.chart = chart
        self.dim = chart.dim

    def sharp_lambda(self, coords, alpha):
        n = self.chart.n
        a, b, c = alpha[:n], alpha[n:2 * n], alpha[2 * n]
        out = list(b)
        out.extend(-a[i] for i in range(n))
        out.append(0.0 * c)
        return out

    def lam(self, coords, alpha, beta):
        sh = self.sharp_lambda(coords, alpha)
        return sum(bi * vi for bi, vi in zip(beta, sh))

    def E(self, coords):
        return [0.0] * self.dim


class LcsJacobi:
    """Locally conformally symplectic structure on an even-dimensional space.

    ``omega`` is a callable returning the (antisymmetric) matrix of the
    2-form at given coordinates with convention Omega(u, v) = u^T W v;
    ``gamma`` a callable returning the Lee 1-form components.  E solves
    iota_E Omega = gamma; Lambda(a, b) = b(sharp_Lambda a) with
    sharp_Lambda a solving iota_(sharp a) Omega = -a, so that
    Lambda(a, .) is represented faithfully.
    """

    def __init__(self, dim, omega, gamma):
        if dim % 2 != 0:
            raise ValueError("LCS structure lives on even dimension")
        self.dim = dim
        self._omega = omega
        self._gamma = gamma

    def sharp_lambda(self, coords, alpha):
        w = self._omega(coords)
        # iota_v Omega has components (W^T v); solve W^T v = -alpha
        wt = [[w[r][c] for r in range(self.dim)] for c in range(self.dim)]
        return solve_generic(wt, [-a for a in alpha])

    def lam(self, coords, alpha, beta):
        sh = self.sharp_lambda(coords, alpha)
        return sum(bi * vi for bi, vi in zip(beta, sh))

    def E(self, coords):
        w = self._omega(coords)
        wt = [[w[r][c] for r in range(self.dim)] for c in range(self.dim)]
        return solve_generic(wt, list(self._gamma(coords)))


# ---------------------------------------------------------------------------
# Brackets


def _bracket_fn(structure, f, g):
    fn_f, fn_g = f._fn, g._fn

    def fn(coords):
        vf, df = autodiff.value_and_grad(fn_f, coords)
        vg, dg = autodiff.value_and_grad(fn_g, coords)
        e = structure.E(coords)
        ef = sum(ei * di for ei, di in zip(e, df))
        eg = sum(ei * di for ei, di in zip(e, dg))
        return structure.lam(coords, df, dg) + vf * eg - vg * ef

    return fn


def bracket_field(structure, f, g):
    """{f, g} as a scalar field, differentiable for nested brackets."""
    return ScalarField.native(_bracket_fn(structure, f, g), structure.dim)


def jacobi_bracket(structure, f, g, p):
    return float(autodiff.value(_bracket_fn(structure, f, g)(list(map(float, p)))))


def leibniz_defect(structure, f, g, h, p):
    """{fg, h} - f {g, h} - g {f, h}; identically -f g E(h)."""
    p = list(map(float, p))
    fn_f, fn_g = f._fn, g._fn
    fg = ScalarField.native(lambda c: fn_f(c) * fn_g(c), structure.dim)
    return (jacobi_bracket(structure, fg, h, p)
            - f(p) * jacobi_bracket(structure, g, h, p)
            - g(p) * jacobi_bracket(structure, f, h, p))


def jacobi_identity_residual(structure, f, g, h, p):
    """|{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| at p."""
    p = list(map(float, p))
    total = (jacobi_bracket(structure, f, bracket_field(structure, g, h), p)
             + jacobi_bracket(structure, g, bracket_field(structure, h, f), p)
             + jacobi_bracket(structure, h, bracket_field(structure, f, g), p))
    return abs(total)


def sharp_lambda_via_flat(chart, p, alpha):
    """Contact sharp_Lambda through the dense flat solve, as a cross-check."""
    p = chart.point(p)
    alpha = chart.check_components(alpha)
    return chart.sharp(p, alpha) - alpha[chart.z_slot] * chart.reeb()


def lambda_via_deta(chart, p, alpha, beta):
    """Lambda(alpha, beta) = -d(eta)(sharp alpha, sharp beta)."""
    sa = chart.sharp(p, alpha)
    sb = chart.sharp(p, beta)
    return float(-(sa @ chart.deta_matrix() @ sb))
