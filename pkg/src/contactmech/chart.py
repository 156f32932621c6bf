"""The Darboux model contact manifold (R^(2n+1), eta = dz - y_i dx^i).

Coordinates are ordered (x^1..x^n, y_1..y_n, z).  Covector components are
always stored in the coordinate coframe (dx, dy, dz).  All operations are
pure; a chart is just the integer n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularMatrixError


@dataclass(frozen=True)
class DarbouxChart:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("chart needs n >= 1")

    @property
    def dim(self):
        return 2 * self.n + 1

    # index helpers
    def x_slot(self, i):
        return i

    def y_slot(self, i):
        return self.n + i

    @property
    def z_slot(self):
        return 2 * self.n

    def point(self, coords):
        p = np.asarray(coords, dtype=float)
        if p.shape != (self.dim,):
            raise DimensionMismatch(
                f"expected {self.dim} coordinates, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DimensionMismatch("point has non-finite coordinates")
        return p

    def check_components(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(
                f"expected {self.dim} components, got shape {v.shape}")
        return v

    # -- contact structure -------------------------------------------------

    def eta_at(self, p):
        """Components of eta = dz - y_i dx^i in the coordinate coframe."""
        p = self.point(p)
        eta = np.zeros(self.dim)
        eta[:self.n] = -p[self.n:2 * self.n]
        eta[self.z_slot] = 1.0
        return eta

    def deta_matrix(self):
        """Matrix M of d(eta) = dx^i ^ dy_i with convention deta(u, v) = u^T M v."""
        m = np.zeros((self.dim, self.dim))
        for i in range(self.n):
            m[i, self.n + i] = 1.0
            m[self.n + i, i] = -1.0
        return m

    def reeb(self):
        r = np.zeros(self.dim)
        r[self.z_slot] = 1.0
        return r

    def flat_matrix(self, p):
        """Matrix of v -> iota_v d(eta) + eta(v) eta acting on components."""
        eta = self.eta_at(p)
        return self.deta_matrix().T + np.outer(eta, eta)

    def flat(self, p, v):
        v = self.check_components(v)
        return self.flat_matrix(p) @ v

    def sharp(self, p, alpha):
        """Inverse of flat, by a dense linear solve."""
        alpha = self.check_components(alpha)
        try:
            return np.linalg.solve(self.flat_matrix(p), alpha)
        except np.linalg.LinAlgError as exc:  # cannot happen on a valid chart
            raise SingularMatrixError(str(exc)) from exc

    # -- canonical frame ---------------------------------------------------

    def frame(self, p):
        """Frame (A_1..A_n, B^1..B^n, R) as columns, with A_i = d/dx^i + y_i d/dz.

        The +y_i d/dz sign makes the A_i horizontal and the frame dual to
        the coframe (dx^i, dy_i, eta); with it, [A_i, B^i] = -R.
        """
        p = self.point(p)
        f = np.zeros((self.dim, self.dim))
        for i in range(self.n):
            f[i, i] = 1.0                       # A_i = d/dx^i + y_i d/dz
            f[self.z_slot, i] = p[self.n + i]
            f[self.n + i, self.n + i] = 1.0     # B^i = d/dy_i
        f[self.z_slot, self.z_slot] = 1.0       # R = d/dz
        return f

    def coframe(self, p):
        """Rows (dx^1..dx^n, dy_1..dy_n, eta), dual to :meth:`frame`."""
        p = self.point(p)
        c = np.eye(self.dim)
        c[self.z_slot] = self.eta_at(p)
        return c
