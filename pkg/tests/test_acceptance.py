"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line so the suite doubles as a report:
run with ``pytest tests/test_acceptance.py -s``.
"""

import json
import math
import time

import numpy as np

from contactmech._linalg import nullspace
from contactmech.calculus import lie_bracket
from contactmech.chart import DarbouxChart
from contactmech.cli import main as cli_main
from contactmech.dynamics import (ContactSystem, IntegratorSpec,
                                  divergence_defect, hamiltonian_field,
                                  integrate, invariant_measure_defect)
from contactmech.expressions import (darboux_varnames, parse_field,
                                     parse_vector_field)
from contactmech.jacobi import (ContactJacobi, bracket_field, jacobi_bracket,
                                jacobi_identity_residual, leibniz_defect)
from contactmech.lifts import legendrian_image_residual
from contactmech.submanifolds import (LevelSetSubmanifold, ParamSubmanifold,
                                      PointClass, QuotientDeclaration,
                                      classify_point, contact_complement,
                                      is_coisotropic, is_legendrian,
                                      project_parametrization,
                                      subspace_distance)
from contactmech.symmetry import (GroupAction, moment_map, reconstruct,
                                  reduce, verify_projected_dynamics)

CH1 = DarbouxChart(1)
CH2 = DarbouxChart(2)


def _verdict(label, ok):
    print(f"{label}: {'PASS' if ok else 'FAIL'}")
    assert ok, label


def _random_polynomial(rng, n):
    names = darboux_varnames(n)
    terms = []
    for _ in range(6):
        coeff = rng.uniform(-1.0, 1.0)
        exps = rng.integers(0, 3, size=len(names))
        factors = [f"{coeff:.6f}"]
        factors += [f"{v}^{e}" for v, e in zip(names, exps) if e > 0]
        terms.append("*".join(factors))
    return parse_field(" + ".join(terms), DarbouxChart(n))


def test_energy_dissipation_law():
    system = ContactSystem(CH1, parse_field("(x1^2 + y1^2)/2 + 0.1*z", CH1))
    spec = IntegratorSpec(method="rk4", step=1e-3, t_span=(0.0, 10.0))
    start = time.perf_counter()
    traj = integrate(system, [1.0, 0.0, 0.0], spec)
    elapsed = time.perf_counter() - start
    h = np.asarray(traj.monitors.h)
    worst = float(np.max(np.abs(h - h[0] * np.exp(-0.1 * traj.times))))
    _verdict("energy dissipation law (defect "
             f"{worst:.2e}, {elapsed:.2f} s)", worst <= 1e-6 and elapsed < 1.0)


def test_volume_contraction_law():
    rng = np.random.default_rng(10)
    worst = 0.0
    for i in range(10):
        n = 1 + i % 3
        system = ContactSystem(DarbouxChart(n), _random_polynomial(rng, n))
        for p in rng.normal(size=(100, 2 * n + 1)):
            worst = max(worst, divergence_defect(system, p))
    _verdict(f"volume contraction law (defect {worst:.2e})", worst <= 1e-9)


def test_invariant_measure():
    system = ContactSystem(CH1, parse_field(
        "2 + (x1^2 + y1^2)/4 + 0.1*z", CH1))
    rng = np.random.default_rng(11)
    worst, control = 0.0, math.inf
    for p in rng.normal(0.0, 0.5, size=(100, 3)):
        worst = max(worst, invariant_measure_defect(system, p))
        control = min(control,
                      invariant_measure_defect(system, p, exponent=-1.0))
    _verdict(f"invariant measure (defect {worst:.2e}, "
             f"control {control:.2e})", worst <= 1e-9 and control > 1e-3)


def test_bracket_algebra():
    structure = ContactJacobi(CH1)
    f = parse_field("x1*y1 + sin(z)", CH1)
    g = parse_field("y1^2 + z*cos(x1)", CH1)
    h = parse_field("x1^2 - y1*z", CH1)
    xc = parse_field("x1", CH1)
    yc = parse_field("y1", CH1)
    fg = bracket_field(structure, f, g)
    x_f = hamiltonian_field(ContactSystem(CH1, f))
    x_g = hamiltonian_field(ContactSystem(CH1, g))
    x_fg = hamiltonian_field(ContactSystem(CH1, fg))
    rng = np.random.default_rng(12)
    worst = 0.0
    for p in rng.normal(size=(120, 3)):
        p = list(p)
        worst = max(worst, abs(jacobi_bracket(structure, f, g, p)
                               + jacobi_bracket(structure, g, f, p)))
        worst = max(worst, abs(jacobi_bracket(structure, xc, yc, p) + 1.0))
        worst = max(worst, jacobi_identity_residual(structure, f, g, h, p))
        e_h = -h.grad(p)[2]
        worst = max(worst, abs(leibniz_defect(structure, f, g, h, p)
                               + f(p) * g(p) * e_h))
        br = lie_bracket(x_f, x_g, p)
        worst = max(worst, float(np.max(np.abs(
            br - np.asarray(x_fg(p), dtype=float)))))
    _verdict(f"bracket algebra (residual {worst:.2e})", worst <= 1e-8)


def test_legendrian_characterization_of_hamiltonian_fields():
    rng = np.random.default_rng(13)
    samples = rng.normal(size=(50, 3))
    worst_pos, worst_neg = 0.0, math.inf
    for expr in ("z", "y1^2/2", "x1*y1 + sin(z)",
                 "(x1^2 + y1^2)/2 + 0.1*z", "exp(x1/3) + y1*z"):
        field = hamiltonian_field(ContactSystem(CH1, parse_field(expr, CH1)))
        rep = legendrian_image_residual(CH1, field, samples)
        worst_pos = max(worst_pos, rep.max_residual)
    for comps in (["0", "1", "0"], ["0", "0", "x1"], ["y1", "0", "0"],
                  ["0", "z", "0"], ["x1", "x1", "x1"]):
        rep = legendrian_image_residual(
            CH1, parse_vector_field(comps, CH1), samples)
        worst_neg = min(worst_neg, rep.max_residual)
    _verdict(f"Legendrian image characterization (pos {worst_pos:.2e}, "
             f"neg {worst_neg:.2e})", worst_pos <= 1e-8 and worst_neg >= 1e-2)


def test_submanifold_suite():
    rng = np.random.default_rng(14)
    draws = rng.normal(size=(30, 5))
    good = is_coisotropic(LevelSetSubmanifold(
        CH2, (parse_field("y1", CH2), parse_field("y2", CH2))), draws)
    bad = is_coisotropic(LevelSetSubmanifold(
        CH2, (parse_field("x1", CH2), parse_field("y1", CH2))), draws)
    psi = parse_vector_field(["s", "0.8", "0.8*s"], variables=("s",))
    leg = is_legendrian(ParamSubmanifold(CH1, psi),
                        [[t] for t in np.linspace(-1, 1, 9)])
    complement_worst = 0.0
    dims_exact = True
    for _ in range(30):
        k = int(rng.integers(1, 4))
        p = rng.normal(size=5)
        horiz = CH2.frame(CH2.point(p))[:, :4] @ rng.normal(size=(4, k))
        if np.linalg.matrix_rank(horiz) < k:
            continue
        comp = contact_complement(CH2, p, horiz.T)
        rows = np.vstack([horiz.T @ CH2.deta_matrix(),
                          CH2.eta_at(CH2.point(p))[None, :]])
        complement_worst = max(complement_worst,
                               subspace_distance(comp, nullspace(rows)))
        dims_exact &= comp.shape[1] == 4 - k
    for _ in range(20):
        k = int(rng.integers(1, 5))
        basis = rng.normal(size=(k, 5))
        if np.linalg.matrix_rank(basis) < k:
            continue
        p = rng.normal(size=5)
        comp = contact_complement(CH2, p, basis)
        cls = classify_point(CH2, p, basis)
        want = 4 - k if cls is PointClass.HORIZONTAL else 5 - k
        dims_exact &= comp.shape[1] == want
    ok = (good.coisotropic and not bad.coisotropic and leg.legendrian
          and complement_worst <= 1e-8 and dims_exact)
    _verdict(f"submanifold suite (complement gap {complement_worst:.2e})", ok)


def _worked_reduction():
    h = parse_field("(y1^2 + y2^2)/2 + y1 + cos(x2) + 0.1*z", CH2)
    system = ContactSystem(CH2, h)
    gen = parse_vector_field(["1", "0", "0", "0", "0"], CH2)
    action = GroupAction(CH2, [gen], abelian=True, translated=(0,))
    return system, action


def test_reduction_pipeline():
    system, action = _worked_reduction()
    reduction = reduce(system, action)
    x0 = np.array([0.2, 0.4, 0.0, 0.3, 0.5])
    spec = IntegratorSpec(method="rk4", step=1e-3, t_span=(0.0, 5.0))
    report = verify_projected_dynamics(system, action, x0, spec=spec,
                                       reduction=reduction)
    red = integrate(reduction.system, reduction.project(x0), spec)
    lifted = reconstruct(system, action, red, x0, reduction=reduction)
    direct = integrate(system, x0, spec)
    rec_err = float(np.max(np.abs(lifted.points - direct.points)))
    psi = parse_vector_field(["s", "u", "0", "0", "0.7"],
                             variables=("s", "u"))
    full_leg = ParamSubmanifold(CH2, psi)
    decl = QuotientDeclaration(drop=(0, 2), chart=CH1)
    projected = project_parametrization(full_leg, decl)
    corollary = is_legendrian(projected,
                              [[u] for u in (-1.0, 0.0, 0.5, 2.0)])
    ok = (reduction.pullback_residual <= 1e-9
          and report.max_mismatch <= 1e-6
          and rec_err <= 1e-6
          and is_legendrian(full_leg, [[0.0, 0.0], [1.0, -1.0]]).legendrian
          and corollary.legendrian)
    _verdict(f"reduction pipeline (pullback "
             f"{reduction.pullback_residual:.2e}, mismatch "
             f"{report.max_mismatch:.2e}, reconstruction {rec_err:.2e})", ok)


def test_noether_conservation():
    system, action = _worked_reduction()
    x0 = np.array([0.2, 0.4, 0.0, 0.3, 0.5])
    spec = IntegratorSpec(method="rk4", step=1e-3, t_span=(0.0, 10.0))
    traj = integrate(system, x0, spec)
    j0 = moment_map(action, x0)[0]
    drift = max(abs(moment_map(action, p)[0] - j0) for p in traj.points)
    _verdict(f"Noether conservation (drift {drift:.2e})", drift <= 1e-8)


def test_determinism(tmp_path):
    cfg = tmp_path / "scenario.toml"
    cfg.write_text("""
seed = 42

[chart]
n = 1

[hamiltonian]
expression = "(x1^2 + y1^2)/2 + 0.1*z"
""")
    blobs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = cli_main(["check", "brackets", "--config", str(cfg),
                         "--out", str(out), "--quiet"])
        blobs.append((code, (out / "check_brackets.json").read_bytes()))
    ok = blobs[0] == blobs[1] and blobs[0][0] == 0
    payload = json.loads(blobs[0][1])
    ok &= payload["seed"] == 42
    _verdict("deterministic check artifacts", ok)
