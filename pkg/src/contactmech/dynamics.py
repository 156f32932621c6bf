"""Contact Hamiltonian vector fields, integrators and dissipation monitors.

The Hamiltonian vector field in Darboux coordinates is

    X_H = dH/dy_i d/dx^i - (dH/dx^i + y_i dH/dz) d/dy_i
          + (y_i dH/dy_i - H) d/dz

and the flow dissipates energy at the exact rate L_{X_H} H = -R(H) H and
volume at -(n+1) R(H).  Monitors record the pointwise defects of these
identities along trajectories.

The coordinate divergence stands in for the volume-form derivative:
eta ^ (d eta)^n is a constant multiple of dx ^ dy ^ dz in Darboux
coordinates, so the proportionality constant cancels in every defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import lie_derivative_form
from .errors import IntegrationError, UndefinedMeasureError
from .expressions import ScalarField, VectorField


@dataclass(frozen=True)
class ContactSystem:
    chart: object
    H: ScalarField


@dataclass(frozen=True)
class IntegratorSpec:
    method: str = "rk4"          # "rk4" or "rkf45"
    step: float = 1e-3
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    t_span: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.method not in ("rk4", "rkf45"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.step <= 0 or self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("step and tolerances must be positive")
        if not self.t_span[1] > self.t_span[0]:
            raise ValueError("t_span must be nondegenerate and increasing")


@dataclass
class Monitors:
    h: list = field(default_factory=list)
    rh: list = field(default_factory=list)
    energy_defect: list = field(default_factory=list)
    div_defect: list = field(default_factory=list)

    def as_arrays(self):
        return {k: np.asarray(getattr(self, k))
                for k in ("h", "rh", "energy_defect", "div_defect")}


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    monitors: Monitors

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise ValueError("times and points must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


class HamiltonianVectorField(VectorField):
    """X_H with a fused evaluation: one gradient pass per point."""

    def __init__(self, system):
        n = system.chart.n
        vg = system.H.value_and_grad
        natives = [ScalarField.native(self._component_fn(vg, n, i),
                                      2 * n + 1) for i in range(2 * n + 1)]
        super().__init__(natives)
        self._vg = vg
        self._n = n

    @staticmethod
    def _component_fn(vg, n, i):
        def fn(c):
            return _xh_components(vg, n, c)[i]
        return fn

    def __call__(self, coords):
        return _xh_components(self._vg, self._n, coords)


def _xh_components(vg, n, coords):
    val, g = vg(coords)
    y = coords[n:2 * n]
    out = list(g[n:2 * n])
    out.extend(-(g[i] + y[i] * g[2 * n]) for i in range(n))
    out.append(sum(y[i] * g[n + i] for i in range(n)) - val)
    return out


def hamiltonian_field(system):
    return HamiltonianVectorField(system)


# ---------------------------------------------------------------------------
# Pointwise monitors


def _divergence(system, p):
    """Coordinate divergence of X_H from the Hessian of H."""
    n = system.chart.n
    _, g, hess = system.H.value_grad_hessian(list(map(float, p)))
    y = p[n:2 * n]
    div = 0.0
    for i in range(n):
        div += hess[n + i][i]                       # d/dx^i of dH/dy_i
        div -= hess[i][n + i] + g[2 * n] + y[i] * hess[2 * n][n + i]
        div += y[i] * hess[n + i][2 * n]
    div -= g[2 * n]
    return div, g


def energy_rate_defect(system, p):
    """|dH(X_H) + R(H) H| at p."""
    p = list(map(float, p))
    n = system.chart.n
    val, g = system.H.value_and_grad(p)
    xh = _xh_from_grad(n, p, val, g)
    dh_xh = sum(gi * xi for gi, xi in zip(g, xh))
    return abs(dh_xh + g[2 * n] * val)


def _xh_from_grad(n, coords, val, g):
    y = coords[n:2 * n]
    out = list(g[n:2 * n])
    out.extend(-(g[i] + y[i] * g[2 * n]) for i in range(n))
    out.append(sum(y[i] * g[n + i] for i in range(n)) - val)
    return out


def divergence_defect(system, p):
    """|div(X_H) + (n+1) R(H)| at p."""
    n = system.chart.n
    div, g = _divergence(system, list(map(float, p)))
    return abs(div + (n + 1) * g[2 * n])


def invariant_measure_defect(system, p, exponent=None):
    """Defect of L_{X_H}((g o H) Omega) = 0 for g(h) = h^exponent.

    The default exponent -(n+1) is the invariant one; other exponents give
    a nonzero defect and serve as negative controls.
    """
    p = list(map(float, p))
    n = system.chart.n
    if exponent is None:
        exponent = -(n + 1)
    div, g = _divergence(system, p)
    val = system.H(p)
    if val == 0.0:
        raise UndefinedMeasureError("H vanishes at the requested point")
    xh = _xh_from_grad(n, p, val, g)
    dh_xh = sum(gi * xi for gi, xi in zip(g, xh))
    gh = val ** exponent
    gph = exponent * val ** (exponent - 1)
    return abs(gph * dh_xh + gh * div)


def conformal_factor(chart, x_field, p):
    """Least-squares fit L_X eta = g eta; returns (g, non-collinear residual)."""
    p = chart.point(p)
    lie = lie_derivative_form(chart, x_field, p)
    eta = chart.eta_at(p)
    g = float(lie @ eta) / float(eta @ eta)
    residual = float(np.linalg.norm(lie - g * eta))
    return g, residual


@dataclass
class HamiltonianReport:
    recovered_h: ScalarField
    max_defect: float
    is_hamiltonian: bool


def is_hamiltonian(chart, x_field, samples, tol=1e-9):
    """Set H := -eta(X) and measure max |X - X_H| over the samples."""
    n = chart.n

    def h_fn(c):
        vals = x_field(c)
        out = -vals[2 * n]
        for i in range(n):
            out = out + c[n + i] * vals[i]
        return out

    h = ScalarField.native(h_fn, chart.dim)
    system = ContactSystem(chart, h)
    xh = hamiltonian_field(system)
    worst = 0.0
    for p in samples:
        p = list(map(float, p))
        d = max(abs(a - b) for a, b in zip(x_field(p), xh(p)))
        worst = max(worst, d)
    return HamiltonianReport(h, worst, worst <= tol)


# ---------------------------------------------------------------------------
# Integration


_RKF45_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_RKF45_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_RKF45_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)


def integrate(system, x0, spec):
    """Integrate dx/dt = X_H(x), recording monitors at every accepted step."""
    x0 = system.chart.point(x0)
    rhs = hamiltonian_field(system)

    def safe_rhs(p):
        try:
            return rhs(p)
        except (OverflowError, ValueError, ZeroDivisionError) as exc:
            raise IntegrationError(f"right-hand side failed: {exc}")

    def f(p):
        # .tolist() hands plain floats to the dual arithmetic
        return np.asarray(safe_rhs(p.tolist()), dtype=float)

    def record(p):
        try:
            _record(system, p, monitors)
        except (OverflowError, ValueError, ZeroDivisionError) as exc:
            raise IntegrationError(f"monitor evaluation failed: {exc}")

    times = [spec.t_span[0]]
    points = [x0.copy()]
    monitors = Monitors()
    _record(system, x0, monitors)

    try:
        if spec.method == "rk4":
            _run_rk4(safe_rhs, spec, times, points, record)
        else:
            _run_rkf45(f, spec, times, points, record)
    except IntegrationError as exc:
        exc.trajectory = Trajectory(np.asarray(times), np.asarray(points),
                                    monitors)
        raise
    return Trajectory(np.asarray(times), np.asarray(points), monitors)


def _record(system, p, monitors):
    n = system.chart.n
    pl = p if type(p) is list else np.asarray(p, dtype=float).tolist()
    val, g, hess = system.H.value_grad_hessian(pl)
    y = pl[n:2 * n]
    xh = _xh_from_grad(n, pl, val, g)
    dh_xh = sum(gi * xi for gi, xi in zip(g, xh))
    div = -g[2 * n]
    for i in range(n):
        div += (hess[n + i][i] - hess[i][n + i] - g[2 * n]
                - y[i] * hess[2 * n][n + i] + y[i] * hess[n + i][2 * n])
    monitors.h.append(val)
    monitors.rh.append(g[2 * n])
    monitors.energy_defect.append(abs(dh_xh + g[2 * n] * val))
    monitors.div_defect.append(abs(div + (n + 1) * g[2 * n]))


def _check_finite(y, times, points):
    if not np.all(np.isfinite(y)):
        raise IntegrationError(
            f"non-finite state at t = {times[-1]!r}; last valid state "
            f"{points[-1].tolist()!r}")


def _run_rk4(f, spec, times, points, record):
    # fixed-step loop over plain lists; numpy overhead dominates at dim ~3
    t0, t1 = spec.t_span
    h = spec.step
    t = t0
    y = points[-1].tolist()
    cutoff = t1 - 1e-12 * (t1 - t0)
    while t < cutoff:
        step = min(h, t1 - t)
        half = 0.5 * step
        k1 = f(y)
        k2 = f([yi + half * ki for yi, ki in zip(y, k1)])
        k3 = f([yi + half * ki for yi, ki in zip(y, k2)])
        k4 = f([yi + step * ki for yi, ki in zip(y, k3)])
        s = step / 6.0
        y = [yi + s * (a + 2.0 * (b + c) + d)
             for yi, a, b, c, d in zip(y, k1, k2, k3, k4)]
        t += step
        if not all(map(math.isfinite, y)):
            _check_finite(np.asarray(y), times, points)
        times.append(t)
        points.append(np.asarray(y))
        record(y)


def _run_rkf45(f, spec, times, points, record):
    t0, t1 = spec.t_span
    t, y = t0, points[-1].copy()
    h = min(spec.step, t1 - t0)
    h_min = 1e-14 * (t1 - t0)
    while t < t1 - 1e-12 * (t1 - t0):
        h = min(h, t1 - t)
        if h < h_min:
            raise IntegrationError(f"step size underflow at t = {t!r}")
        ks = []
        for row in _RKF45_A:
            yi = y + h * sum((a * k for a, k in zip(row, ks)), np.zeros_like(y))
            ks.append(f(yi))
        y5 = y + h * sum(b * k for b, k in zip(_RKF45_B5, ks))
        y4 = y + h * sum(b * k for b, k in zip(_RKF45_B4, ks))
        err = float(np.max(np.abs(y5 - y4)))
        scale = spec.abs_tol + spec.rel_tol * float(np.max(np.abs(y5)))
        if err <= scale or h <= h_min:
            t += h
            y = y5
            _check_finite(y, times, points)
            times.append(t)
            points.append(y.copy())
            record(y)
        factor = 0.9 * (scale / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
