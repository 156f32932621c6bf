"""Moment maps, symmetry reduction and reconstruction for abelian actions.

A group action enters as a list of generator vector fields.  Each
generator must preserve the contact form; the moment map is
J_a(p) = -eta((xi_a)(p)).  Reduction is implemented for abelian actions
whose generators translate Darboux coordinates x^a, at moment value
mu = 0.  The zero level is forced by the geometry: orbit tangents are
horizontal exactly when eta(xi) = -mu vanishes, and only then does the
characteristic distribution of the level set match the orbit directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .calculus import eta_pairing, lie_bracket, lie_derivative_form
from .chart import DarbouxChart
from .dynamics import (ContactSystem, IntegratorSpec, Trajectory, _record,
                       hamiltonian_field, integrate)
from .errors import (IrregularSubmanifoldError, MuNonzeroError,
                     NonInvariantError, NotAdaptedError, ProjectionError)
from .expressions import ScalarField, darboux_varnames
from .submanifolds import (LevelSetSubmanifold, QuotientDeclaration,
                           contact_complement, sample_on, subspace_distance,
                           verify_coisotropic_reduction)

_TOL = 1e-9


@dataclass(frozen=True)
class GroupAction:
    """Infinitesimal action given by generator vector fields.

    ``translated`` optionally records, per generator, the index i such
    that the generator is the coordinate translation d/dx^{i+1}; it is
    required for reduction and reconstruction.
    """

    chart: object
    generators: tuple
    abelian: bool = True
    translated: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if self.translated is not None:
            object.__setattr__(self, "translated", tuple(self.translated))
            if len(self.translated) != len(self.generators):
                raise ValueError("one translated index per generator")

    @property
    def d(self):
        return len(self.generators)


@dataclass(frozen=True)
class ActionReport:
    max_form_defect: float
    max_commutator: float
    valid: bool


def validate_action(action, samples, tol=_TOL):
    """Check the generators preserve eta and, if declared abelian, commute."""
    chart = action.chart
    form_defect = 0.0
    comm = 0.0
    for p in samples:
        p = list(map(float, p))
        for xi in action.generators:
            lie = lie_derivative_form(chart, xi, p)
            form_defect = max(form_defect, float(np.max(np.abs(lie))))
        if action.abelian:
            for a in range(action.d):
                for b in range(a + 1, action.d):
                    br = lie_bracket(action.generators[a],
                                     action.generators[b], p)
                    comm = max(comm, float(np.max(np.abs(br), initial=0.0)))
    return ActionReport(form_defect, comm,
                        form_defect <= tol and comm <= tol)


# ---------------------------------------------------------------------------
# Moment map


def moment_component_field(action, a):
    """The scalar field J_a = -eta(xi_a), differentiable."""
    pairing = eta_pairing(action.chart, action.generators[a])
    return ScalarField.native(lambda c: -pairing(c), action.chart.dim)


def moment_map(action, p):
    p = list(map(float, p))
    return np.array([moment_component_field(action, a)(p)
                     for a in range(action.d)])


def moment_condition_residual(action, a, p):
    """Norm of d(J_a) - iota_{xi_a} d(eta) at p."""
    p = list(map(float, p))
    chart = action.chart
    _, g = moment_component_field(action, a).value_and_grad(p)
    xi = np.asarray(action.generators[a](p), dtype=float)
    iota = chart.deta_matrix().T @ xi
    return float(np.linalg.norm(np.asarray(g) - iota))


def generator_hamiltonian_defect(action, a, p):
    """|X_{J_a}(p) - xi_a(p)|: the moment components generate the action."""
    p = list(map(float, p))
    system = ContactSystem(action.chart, moment_component_field(action, a))
    xh = np.asarray(hamiltonian_field(system)(p), dtype=float)
    xi = np.asarray(action.generators[a](p), dtype=float)
    return float(np.max(np.abs(xh - xi)))


@dataclass(frozen=True)
class RegularityReport:
    regular: bool
    min_singular_value: float


def level_set(action, mu, samples=()):
    """The level set J = mu with a rank report for the moment Jacobian."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (action.d,):
        raise ValueError("mu must have one component per generator")
    constraints = []
    for a in range(action.d):
        pairing = eta_pairing(action.chart, action.generators[a])
        mu_a = float(mu[a])
        constraints.append(ScalarField.native(
            lambda c, _p=pairing, _m=mu_a: -_p(c) - _m, action.chart.dim))
    sub = LevelSetSubmanifold(action.chart, constraints)
    min_sv = np.inf
    sampled = False
    for raw in samples:
        sampled = True
        try:
            p = sub.project(np.asarray(raw, dtype=float))
        except ProjectionError:
            p = np.asarray(raw, dtype=float)
        jac = sub.constraint_jacobian(p)
        sv = np.linalg.svd(jac, compute_uv=False)
        min_sv = min(min_sv, float(sv[-1]) if sv.size else 0.0)
    regular = (min_sv > _TOL) if sampled else True
    return sub, RegularityReport(regular, min_sv)


@dataclass(frozen=True)
class OrthogonalityReport:
    kernel_angle: float
    complement_deviation: float
    complement_basis: np.ndarray


def verify_orbit_orthogonality(action, mu, p):
    """Level-set tangents against symplectic orthogonals of the orbit.

    (a) ker dJ(p) must equal {v : d(eta)(xi_a(p), v) = 0 for all a};
    (b) the Lambda-complement of the level-set tangent space is compared
    with the orbit tangent span.  At mu = 0 they agree; at mu != 0 the
    deviation is reported rather than hidden, since the orbit directions
    are no longer horizontal there.
    """
    chart = action.chart
    p = chart.point(p)
    sub, _ = level_set(action, mu)
    jac = sub.constraint_jacobian(p)
    from ._linalg import nullspace
    tangent = nullspace(jac)
    m = chart.deta_matrix()
    orbit = np.column_stack([
        np.asarray(xi(list(p)), dtype=float) for xi in action.generators])
    deta_rows = orbit.T @ m
    kernel_angle = subspace_distance(tangent, nullspace(deta_rows))
    comp = contact_complement(chart, p, tangent.T)
    deviation = subspace_distance(comp, orbit)
    return OrthogonalityReport(kernel_angle, deviation, comp)


# ---------------------------------------------------------------------------
# Reduction


@dataclass(frozen=True)
class Reduction:
    system: ContactSystem
    declaration: QuotientDeclaration
    kept: tuple
    drop: tuple
    pullback_residual: float
    invariance_defect: float

    def project(self, p):
        return self.declaration.project(p)


def _check_adapted(action, samples, tol=_TOL):
    if action.translated is None:
        raise NotAdaptedError(
            "reduction needs translation-adapted generators: set "
            "GroupAction.translated to the x-coordinate index of each")
    if not action.abelian:
        raise NotAdaptedError("reduction requires an abelian action")
    n = action.chart.n
    for a, idx in enumerate(action.translated):
        if not 0 <= idx < n:
            raise NotAdaptedError(f"translated index {idx} out of range")
        unit = np.zeros(action.chart.dim)
        unit[idx] = 1.0
        for p in samples:
            vals = np.asarray(action.generators[a](list(map(float, p))),
                              dtype=float)
            if float(np.max(np.abs(vals - unit))) > tol:
                raise NotAdaptedError(
                    f"generator {a} is not the x{idx + 1} translation")


def reduce(system, action, mu=None, samples=None, rng=None, tol=_TOL):
    """Reduce an invariant system at moment value zero.

    Drops the translated coordinates x^a and their momenta y_a, yielding
    a Darboux chart with n' = n - d and the Hamiltonian restricted to
    y_a = 0.  Verifies invariance of H and the pullback identity for the
    reduced contact form on sampled level-set points.
    """
    if action.d == 0:
        return Reduction(system, None, tuple(range(system.chart.dim)), (),
                         0.0, 0.0)
    if mu is None:
        mu = np.zeros(action.d)
    mu = np.asarray(mu, dtype=float)
    if float(np.max(np.abs(mu))) != 0.0:
        raise MuNonzeroError(
            "reduction is only defined at mu = 0: for mu != 0 the orbit "
            "tangents eta(xi) = -mu are not horizontal and the "
            "characteristic distribution of the level set differs from "
            "the orbit directions")
    chart = system.chart
    n = chart.n
    if rng is None:
        rng = np.random.default_rng(0)
    sub, _ = level_set(action, mu)
    if samples is None:
        samples = sample_on(sub, rng, 100)
    samples = [sub.project(np.asarray(s, dtype=float)) for s in samples]
    _check_adapted(action, samples, tol)

    defect = 0.0
    for p in samples:
        _, g = system.H.value_and_grad(list(p))
        for xi in action.generators:
            vals = np.asarray(xi(list(p)), dtype=float)
            defect = max(defect, abs(float(vals @ np.asarray(g))))
    if defect > tol:
        raise NonInvariantError(
            f"Hamiltonian is not invariant: max |xi(H)| = {defect:.3e}",
            defect=defect)

    xs = sorted(action.translated)
    drop = tuple(xs) + tuple(n + a for a in xs)
    kept = tuple(i for i in range(chart.dim) if i not in drop)
    n_red = n - action.d
    qchart = DarbouxChart(n_red)
    decl = QuotientDeclaration(drop=drop, chart=qchart)

    h_red = system.H.substitute({i: 0.0 for i in drop}, kept,
                                new_varnames=darboux_varnames(n_red))
    reduced = ContactSystem(qchart, h_red)
    report = verify_coisotropic_reduction(sub, decl, samples, tol)
    return Reduction(reduced, decl, kept, drop,
                     report.pullback_residual, defect)


@dataclass(frozen=True)
class ProjectedDynamicsReport:
    max_mismatch: float
    max_level_drift: float
    reduction: Reduction


def verify_projected_dynamics(system, action, x0, spec=None, reduction=None):
    """Compare projected full dynamics with the reduced dynamics.

    Integrates the full system from x0 and the reduced system from the
    projected start on the same time grid, and reports the largest state
    mismatch together with the drift of the moment map off its level.
    """
    if spec is None:
        spec = IntegratorSpec(method="rk4", step=1e-3, t_span=(0.0, 5.0))
    if reduction is None:
        reduction = reduce(system, action)
    full = integrate(system, x0, spec)
    red = integrate(reduction.system, reduction.project(np.asarray(x0)), spec)
    kept = list(reduction.kept)
    mismatch = float(np.max(np.abs(full.points[:, kept] - red.points)))
    drift = max(float(np.max(np.abs(moment_map(action, p))))
                for p in full.points)
    return ProjectedDynamicsReport(mismatch, drift, reduction)


def reconstruct(system, action, reduced_traj, x0, reduction=None,
                quadrature="simpson"):
    """Lift a reduced trajectory back to the full space.

    The lifted curve keeps the dropped momenta at zero and the dropped
    positions start from x0; for an abelian translation action the group
    part integrates by quadrature of xi^a(t) = dH/dy_a along the curve.
    """
    if reduction is None:
        reduction = reduce(system, action)
    if quadrature not in ("simpson", "trapezoid"):
        raise ValueError(f"unknown quadrature {quadrature!r}")
    if not action.abelian:
        raise NotAdaptedError("reconstruction requires an abelian action")
    x0 = system.chart.point(x0)
    start = reduction.project(x0)
    if float(np.max(np.abs(start - reduced_traj.points[0]))) > 1e-9:
        raise ValueError("x0 does not project to the reduced start point")

    n = system.chart.n
    kept = list(reduction.kept)
    times = np.asarray(reduced_traj.times)
    d_curve = np.zeros((len(times), system.chart.dim))
    d_curve[:, kept] = reduced_traj.points
    for a in sorted(action.translated):
        d_curve[:, a] = x0[a]           # y_a stays 0, x^a frozen on d(t)

    rates = np.empty((len(times), action.d))
    for i, p in enumerate(d_curve):
        _, g = system.H.value_and_grad(list(p))
        for j, a in enumerate(sorted(action.translated)):
            rates[i, j] = g[n + a]
    if quadrature == "simpson":
        lifted = cumulative_simpson(rates, x=times, axis=0, initial=0.0)
    else:
        lifted = cumulative_trapezoid(rates, x=times, axis=0, initial=0.0)

    points = d_curve.copy()
    for j, a in enumerate(sorted(action.translated)):
        points[:, a] = x0[a] + lifted[:, j]
    from .dynamics import Monitors
    monitors = Monitors()
    for p in points:
        _record(system, p, monitors)
    return Trajectory(times, points, monitors)
