"""The extended contact manifold TM x R and Legendrian images.

Induced coordinates on the extension are (q, v, t): base point, tangent
components and one extra real slot, total dimension 4n + 3.  The
extended contact form is eta-bar = eta^c + t eta^v, built from the
complete and vertical lifts of eta.  A vector field X extends to
p -> (p, X(p), -R(eta(X))(p)); the image is Legendrian for eta-bar
exactly when X is a contact Hamiltonian vector field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff
from .calculus import eta_pairing


@dataclass(frozen=True)
class ExtendedPoint:
    """Point of TM x R in induced coordinates."""

    p: np.ndarray
    v: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.p.shape != self.v.shape or self.p.ndim != 1:
            raise ValueError("base and fiber components must match")

    @property
    def base_dim(self):
        return len(self.p)

    def coords(self):
        return np.concatenate([self.p, self.v, [self.t]])


def vertical_lift_form(alpha, ep):
    """Pullback of a 1-form by the bundle projection: (alpha | 0 | 0)."""
    a = np.asarray(alpha(list(ep.p)), dtype=float)
    out = np.zeros(2 * ep.base_dim + 1)
    out[:ep.base_dim] = a
    return out


def complete_lift_form(alpha, ep):
    """Complete lift: ((d alpha_a / d q^b) v^b | alpha | 0)."""
    dim = ep.base_dim
    jac = np.asarray(autodiff.jacobian(alpha, list(ep.p)), dtype=float)
    out = np.zeros(2 * dim + 1)
    out[:dim] = jac @ ep.v
    out[dim:2 * dim] = np.asarray(alpha(list(ep.p)), dtype=float)
    return out


def _etabar_components(chart, c):
    """eta-bar at extended coordinates c, evaluable on dual numbers.

    Closed form from eta = dz - y_i dx^i: base x-slots -(v_{y_i} + t y_i),
    base z-slot t, fiber slots eta(q), everything else zero.
    """
    dim = chart.dim
    n = chart.n
    q, v, t = c[:dim], c[dim:2 * dim], c[2 * dim]
    zero = 0.0 * t
    out = [zero] * (2 * dim + 1)
    for i in range(n):
        out[i] = -(v[n + i] + t * q[n + i])
        out[dim + i] = -q[n + i]
    out[dim - 1] = t
    out[2 * dim - 1] = zero + 1.0
    return out


def extended_contact_form(chart, ep):
    return np.asarray(_etabar_components(chart, list(ep.coords())),
                      dtype=float)


def extended_reeb(chart):
    """R-bar = the vertical lift of the Reeb field: fiber z direction."""
    out = np.zeros(2 * chart.dim + 1)
    out[2 * chart.dim - 1] = 1.0
    return out


def extended_deta_matrix(chart, ep):
    """Matrix of d(eta-bar) with convention d(eta-bar)(u, w) = u^T M w."""
    c = np.asarray(ep.coords(), dtype=float)
    jac = np.asarray(autodiff.jacobian(
        lambda cc: _etabar_components(chart, cc), list(c)), dtype=float)
    # jac[b][a] = d etabar_b / d c_a; M = C - C^T with C[a][b] = d_a etabar_b
    cmat = jac.T
    return cmat - cmat.T


def extended_flat_matrix(chart, ep):
    """Matrix of v -> iota_v d(eta-bar) + eta-bar(v) eta-bar."""
    eb = extended_contact_form(chart, ep)
    return extended_deta_matrix(chart, ep).T + np.outer(eb, eb)


def extend_field(chart, x_field):
    """The map p -> (p, X(p), -R(eta(X))(p)) as a coordinate function."""
    pairing = eta_pairing(chart, x_field)
    dim = chart.dim

    def fn(c):
        vals = x_field(c)
        _, g = autodiff.value_and_grad(pairing, c)
        out = list(c) + list(vals)
        out.append(-g[dim - 1])
        return out

    return fn


@dataclass(frozen=True)
class LegendrianImageReport:
    max_residual: float
    legendrian: bool
    image_dimension: int


def legendrian_image_residual(chart, x_field, samples, tol=1e-8):
    """Max |eta-bar(tangent)| over the image of the extended field.

    The image is a section over M, so its tangent space at an extended
    point is spanned by the columns of the Jacobian of the extension;
    its dimension 2n + 1 is the Legendrian dimension of TM x R.
    """
    ext = extend_field(chart, x_field)
    dim = chart.dim
    worst = 0.0
    for p in samples:
        p = list(map(float, p))
        jac = np.asarray(autodiff.jacobian(ext, p), dtype=float)
        coords = [autodiff.value(v) for v in ext(p)]
        ep = ExtendedPoint(coords[:dim], coords[dim:2 * dim], coords[2 * dim])
        eb = extended_contact_form(chart, ep)
        worst = max(worst, float(np.max(np.abs(eb @ jac))))
    return LegendrianImageReport(worst, worst <= tol, dim)
