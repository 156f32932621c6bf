"""Submanifolds of the Darboux chart and their contact-geometric tests.

Covers contact complements of distributions, pointwise classification
against the horizontal bundle, isotropy/Legendrian and coisotropy tests,
characteristic distributions of coisotropic level sets, and verification
of reduction through a user-declared quotient projection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._linalg import column_span, nullspace, subspace_distance
from .calculus import lie_bracket
from .errors import IrregularSubmanifoldError, ProjectionError
from .expressions import VectorField
from .jacobi import ContactJacobi

_TOL = 1e-9


class PointClass(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    OBLIQUE = "oblique"


def _basis_matrix(vectors, dim):
    """Columns from an iterable of vectors, with an independence check."""
    b = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if b.shape[0] != dim:
        raise ValueError(f"basis vectors must have length {dim}")
    if np.linalg.matrix_rank(b, tol=_TOL) < b.shape[1]:
        raise ValueError("basis vectors are linearly dependent")
    return b


def contact_complement(chart, p, basis):
    """Orthonormal basis (columns) of the Lambda-complement of span(basis).

    The complement is the image under sharp_Lambda of the annihilator of
    the distribution.  Its dimension is 2n - k for a horizontal
    distribution of rank k, and 2n + 1 - k otherwise.
    """
    p = chart.point(p)
    b = _basis_matrix(basis, chart.dim)
    ann = nullspace(b.T)           # covectors vanishing on the span
    if ann.shape[1] == 0:
        return np.zeros((chart.dim, 0))
    jac = ContactJacobi(chart)
    images = [jac.sharp_lambda(list(p), list(ann[:, j]))
              for j in range(ann.shape[1])]
    return column_span(np.column_stack(images))


def classify_point(chart, p, basis, tol=_TOL):
    """Horizontal, vertical or oblique position of span(basis) at p."""
    p = chart.point(p)
    b = _basis_matrix(basis, chart.dim)
    eta = chart.eta_at(p)
    q = column_span(b)
    if float(np.max(np.abs(eta @ q))) <= tol:
        return PointClass.HORIZONTAL
    r = chart.reeb()
    if float(np.max(np.abs(r - q @ (q.T @ r)))) <= tol:
        return PointClass.VERTICAL
    return PointClass.OBLIQUE


# ---------------------------------------------------------------------------
# Level sets


@dataclass(frozen=True)
class LevelSetSubmanifold:
    """Zero set of constraint functions phi_a on the chart."""

    chart: object
    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for phi in self.constraints:
            if phi.nvars != self.chart.dim:
                raise ValueError("constraint arity does not match the chart")

    @property
    def codim(self):
        return len(self.constraints)

    def values(self, p):
        p = list(map(float, p))
        return np.array([phi(p) for phi in self.constraints])

    def constraint_jacobian(self, p):
        """Rows d(phi_a) at p."""
        p = list(map(float, p))
        return np.array([phi.grad(p) for phi in self.constraints])

    def tangent_basis(self, p):
        """Orthonormal columns spanning ker d(phi) at p."""
        jac = self.constraint_jacobian(p)
        if np.linalg.matrix_rank(jac, tol=_TOL) < self.codim:
            raise IrregularSubmanifoldError(
                "constraint Jacobian is rank deficient")
        return nullspace(jac)

    def project(self, p, tol=1e-12, max_iter=50):
        """Newton projection of an ambient point onto the zero set."""
        p = np.asarray(p, dtype=float).copy()
        for _ in range(max_iter):
            vals = self.values(p)
            if float(np.max(np.abs(vals))) <= tol:
                return p
            jac = self.constraint_jacobian(p)
            gram = jac @ jac.T
            try:
                lam = np.linalg.solve(gram, vals)
            except np.linalg.LinAlgError:
                raise ProjectionError(
                    "singular constraint Gram matrix during projection")
            p = p - jac.T @ lam
        raise ProjectionError(
            f"Newton projection did not converge within {max_iter} iterations")


def sample_on(level_set, rng, count, scale=1.0, max_tries=None):
    """Newton-projected samples on a level set; failed draws are skipped."""
    if max_tries is None:
        max_tries = 20 * count
    out = []
    for _ in range(max_tries):
        if len(out) == count:
            break
        draw = rng.normal(0.0, scale, size=level_set.chart.dim)
        try:
            out.append(level_set.project(draw))
        except ProjectionError:
            continue
    if len(out) < count:
        raise ProjectionError(
            f"could only project {len(out)} of {count} requested samples")
    return out


# ---------------------------------------------------------------------------
# Parametrized submanifolds


@dataclass(frozen=True)
class ParamSubmanifold:
    """Image of a map psi from a k-dimensional parameter space."""

    chart: object
    psi: VectorField

    def __post_init__(self):
        if self.psi.dim != self.chart.dim:
            raise ValueError("parametrization must land in the chart")

    @property
    def k(self):
        return self.psi.nvars

    def point(self, s):
        return np.asarray(self.psi(list(map(float, s))), dtype=float)

    def tangent_vectors(self, s):
        """Columns dpsi/ds_j at parameter s, with a rank check."""
        jac = np.asarray(self.psi.jacobian(list(map(float, s))), dtype=float)
        if np.linalg.matrix_rank(jac, tol=_TOL) < self.k:
            raise IrregularSubmanifoldError(
                "parametrization is rank deficient")
        return jac


@dataclass(frozen=True)
class IsotropyReport:
    max_residual: float
    isotropic: bool
    dimension: int
    legendrian: bool


def is_isotropic(submanifold, samples, tol=_TOL):
    """Max |eta(tangent)| over samples; isotropic iff the form vanishes."""
    chart = submanifold.chart
    worst = 0.0
    for s in samples:
        p = submanifold.point(s)
        eta = chart.eta_at(p)
        t = submanifold.tangent_vectors(s)
        worst = max(worst, float(np.max(np.abs(eta @ t))))
    isotropic = worst <= tol
    return IsotropyReport(worst, isotropic, submanifold.k,
                          isotropic and submanifold.k == chart.n)


def is_legendrian(submanifold, samples, tol=_TOL):
    return is_isotropic(submanifold, samples, tol)


@dataclass(frozen=True)
class CoisotropyReport:
    max_residual: float
    coisotropic: bool
    frame_residual: float


def is_coisotropic(submanifold, samples, tol=_TOL):
    """Max |Z_a(phi_b)| over projected samples, Z_a = sharp_Lambda(d phi_a).

    Cross-checked against the horizontal-frame expansion
    Z_a(phi_b) = sum_i B^i(phi_a) A_i(phi_b) - A_i(phi_a) B^i(phi_b)
    with A_i = d/dx^i + y_i d/dz and B^i = d/dy_i.
    """
    chart = submanifold.chart
    n = chart.n
    jac = ContactJacobi(chart)
    worst = 0.0
    frame_dev = 0.0
    for raw in samples:
        p = submanifold.project(np.asarray(raw, dtype=float))
        grads = submanifold.constraint_jacobian(p)
        for a in range(submanifold.codim):
            z = np.asarray(jac.sharp_lambda(list(p), list(grads[a])))
            for b in range(submanifold.codim):
                val = float(grads[b] @ z)
                frame = sum(
                    grads[a][n + i] * (grads[b][i] + p[n + i] * grads[b][2 * n])
                    - (grads[a][i] + p[n + i] * grads[a][2 * n]) * grads[b][n + i]
                    for i in range(n))
                frame_dev = max(frame_dev, abs(val - frame))
                worst = max(worst, abs(val))
    return CoisotropyReport(worst, worst <= tol, frame_dev)


def characteristic_distribution(submanifold, p):
    """Basis of ker(eta) and ker(d eta) inside T_pN, as columns."""
    chart = submanifold.chart
    p = chart.point(p)
    t = submanifold.tangent_basis(p)
    eta = chart.eta_at(p)
    m = chart.deta_matrix()
    # coefficient conditions for v = T c: eta(v) = 0 and d eta(v, T_j) = 0
    rows = np.vstack([eta @ t, (t.T @ m @ t).T])
    coeffs = nullspace(rows)
    if coeffs.shape[1] == 0:
        return np.zeros((chart.dim, 0))
    return column_span(t @ coeffs)


# ---------------------------------------------------------------------------
# Declared-quotient reduction checks


@dataclass(frozen=True)
class QuotientDeclaration:
    """A projection that deletes ambient coordinates.

    ``drop`` lists the ambient coordinate indices removed by the
    projection; the surviving coordinates, in order, form a Darboux chart
    ``chart`` of lower dimension.  Covers quotients whose characteristic
    leaves are coordinate translations.
    """

    drop: tuple
    chart: object

    def __post_init__(self):
        object.__setattr__(self, "drop", tuple(sorted(self.drop)))

    def kept(self, ambient_dim):
        return tuple(i for i in range(ambient_dim) if i not in self.drop)

    def project(self, p):
        p = np.asarray(p, dtype=float)
        return p[list(self.kept(len(p)))]

    def section(self, frozen):
        """Embedding of the quotient with dropped coordinates pinned."""
        frozen = np.asarray(frozen, dtype=float)
        ambient_dim = self.chart.dim + len(self.drop)
        kept = self.kept(ambient_dim)

        def sigma(q):
            p = np.empty(ambient_dim)
            p[list(kept)] = np.asarray(q, dtype=float)
            p[list(self.drop)] = frozen
            return p

        return sigma


@dataclass(frozen=True)
class ReductionReport:
    pullback_residual: float
    min_flat_det: float
    reeb_residual: float
    section_disagreement: float


def _pushed_form(chart_from, decl, sigma, q):
    """Components of eta pushed to the quotient through a section."""
    p = sigma(q)
    eta = chart_from.eta_at(p)
    return eta[list(decl.kept(chart_from.dim))]


def verify_coisotropic_reduction(submanifold, decl, samples, tol=_TOL):
    """Check the declared quotient carries the reduced contact form.

    Verifies, at Newton-projected samples, that the projection pulls the
    quotient form back to the restriction of eta, that the quotient form
    is contact (nonsingular flat matrix), and that the Reeb field projects
    to the quotient Reeb field.  Two sections with different pinned values
    must induce the same quotient form; disagreement means the projection
    is not constant on leaves.
    """
    chart = submanifold.chart
    qchart = decl.chart
    if qchart.dim + len(decl.drop) != chart.dim:
        raise ValueError("quotient chart dimension does not match the drops")
    points = [submanifold.project(np.asarray(s, dtype=float))
              for s in samples]
    if len(points) < 2:
        raise ValueError("need at least two samples")

    sig0 = decl.section(points[0][list(decl.drop)])
    sig1 = decl.section(points[1][list(decl.drop)])

    pullback = 0.0
    disagreement = 0.0
    min_det = np.inf
    reeb_res = 0.0
    kept = list(decl.kept(chart.dim))
    for p in points:
        q = decl.project(p)
        form0 = _pushed_form(chart, decl, sig0, q)
        form1 = _pushed_form(chart, decl, sig1, q)
        disagreement = max(disagreement,
                           float(np.max(np.abs(form0 - form1))))
        # (a) pullback: eta-tilde(d pi v) = eta(v) on T_pN
        eta = chart.eta_at(p)
        t = submanifold.tangent_basis(p)
        for j in range(t.shape[1]):
            v = t[:, j]
            pullback = max(pullback,
                           abs(float(form0 @ v[kept]) - float(eta @ v)))
        # (b) contact condition on the quotient
        flat = qchart.deta_matrix().T + np.outer(form0, form0)
        min_det = min(min_det, abs(float(np.linalg.det(flat))))
        # (c) the Reeb field projects to the quotient Reeb field
        rbar = np.linalg.solve(flat, form0)
        reeb_res = max(reeb_res, float(np.max(np.abs(
            rbar - chart.reeb()[kept]))))
    if disagreement > tol:
        raise ProjectionError(
            "declared projection is not constant on characteristic leaves "
            f"(quotient form disagreement {disagreement:.3e})")
    return ReductionReport(pullback, min_det, reeb_res, disagreement)


def project_parametrization(submanifold, decl):
    """Push a parametrized submanifold through a coordinate projection.

    Parameters that only moved the dropped coordinates become redundant
    and are eliminated, so the projected image keeps a regular
    parametrization.
    """
    kept = decl.kept(submanifold.chart.dim)
    comps = [submanifold.psi.components[i] for i in kept]
    used = sorted(set().union(*(c.used_variables() for c in comps)))
    if len(used) < submanifold.k:
        dropped = {i: 0.0 for i in range(submanifold.k) if i not in used}
        comps = [c.substitute(dropped, used) for c in comps]
    return ParamSubmanifold(decl.chart, VectorField(comps))


def involutivity_residual(submanifold, p):
    """Distance of [Z_a, Z_b](p) from the characteristic span."""
    chart = submanifold.chart
    p = chart.point(p)
    jac = ContactJacobi(chart)

    def z_field(a):
        phi = submanifold.constraints[a]

        def fn(c):
            _, g = phi.value_and_grad(c)
            return jac.sharp_lambda(c, g)

        return fn

    span = characteristic_distribution(submanifold, p)
    fields = [_CallableField(z_field(a), chart.dim)
              for a in range(submanifold.codim)]
    worst = 0.0
    for a in range(submanifold.codim):
        for b in range(a + 1, submanifold.codim):
            br = lie_bracket(fields[a], fields[b], list(p))
            resid = br - span @ (span.T @ br)
            worst = max(worst, float(np.max(np.abs(resid), initial=0.0)))
    return worst


class _CallableField:
    """Adapter giving a bare coordinate function the vector-field API."""

    def __init__(self, fn, dim):
        self._fn = fn
        self.dim = dim

    def __call__(self, coords):
        return self._fn(coords)

    def jacobian(self, coords):
        from . import autodiff
        return autodiff.jacobian(self._fn, coords)
