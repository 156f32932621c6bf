"""Command-line front end: configured runs with CSV/JSON artifacts.

Subcommands: ``integrate``, ``check <what>``, ``reduce`` and
``lift-check`` (shorthand for ``check lift``).  Configuration is a TOML
file with a strict schema; unknown keys are rejected so experiment files
stay reproducible.  Every JSON report embeds the tool version, the
SHA-256 of the config file and the RNG seed, and all randomness flows
through one seeded generator, so identical invocations produce identical
bytes.

Exit codes: 0 pass, 1 checks failed, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:        # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .calculus import lie_bracket
from .chart import DarbouxChart
from .dynamics import (ContactSystem, IntegratorSpec, hamiltonian_field,
                       integrate, is_hamiltonian)
from .errors import (ContactmechError, ExprSyntaxError, IntegrationError,
                     MuNonzeroError, NonInvariantError, SingularMatrixError,
                     UnknownIdentifierError)
from .expressions import (ScalarField, VectorField, darboux_varnames,
                          parse_field, parse_vector_field)
from .jacobi import (ContactJacobi, bracket_field, jacobi_bracket,
                     jacobi_identity_residual, leibniz_defect)
from .lifts import legendrian_image_residual
from .submanifolds import (LevelSetSubmanifold, ParamSubmanifold,
                           is_coisotropic, is_legendrian)
from .symmetry import GroupAction, reduce as reduce_system
from .symmetry import reconstruct, verify_projected_dynamics


class ConfigError(Exception):
    pass


_SCHEMA = {
    "seed": None,
    "chart": {"n"},
    "hamiltonian": {"expression", "parameters"},
    "integrator": {"method", "step", "t_span", "abs_tol", "rel_tol"},
    "initial_conditions": None,
    "action": {"generators", "translated", "mu", "reconstruct"},
    "submanifold": {"constraints", "parametrization", "parameters"},
    "check": {"samples", "scale"},
    "lift": {"field"},
}


@dataclass
class Scenario:
    chart: DarbouxChart
    hamiltonian: ScalarField
    spec: IntegratorSpec
    initial_conditions: list
    action: GroupAction
    mu: np.ndarray
    reconstruct: bool
    constraints: list
    parametrization: ParamSubmanifold
    lift_field: VectorField
    samples: int
    scale: float
    seed: int


def _validate_keys(raw):
    for key, value in raw.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        allowed = _SCHEMA[key]
        if allowed is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be a table")
            for sub in value:
                if sub not in allowed:
                    raise ConfigError(f"unknown key {key}.{sub}")


def _coordinate_index(chart, name):
    names = darboux_varnames(chart.n)
    try:
        return names.index(name)
    except ValueError:
        raise ConfigError(f"{name!r} is not a coordinate of the chart")


def load_scenario(path):
    try:
        text = Path(path).read_bytes()
        raw = tomllib.loads(text.decode())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}")
    _validate_keys(raw)

    chart_tbl = raw.get("chart", {})
    if "n" not in chart_tbl:
        raise ConfigError("config needs [chart] with n")
    try:
        chart = DarbouxChart(int(chart_tbl["n"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad chart.n: {exc}")

    ham_tbl = raw.get("hamiltonian", {})
    params = ham_tbl.get("parameters", {})
    hamiltonian = None
    if "expression" in ham_tbl:
        try:
            hamiltonian = parse_field(ham_tbl["expression"], chart,
                                      params=params)
        except (ExprSyntaxError, UnknownIdentifierError,
                ContactmechError) as exc:
            raise ConfigError(f"bad hamiltonian expression: {exc}")

    integ = raw.get("integrator", {})
    try:
        spec = IntegratorSpec(
            method=integ.get("method", "rk4"),
            step=float(integ.get("step", 1e-3)),
            abs_tol=float(integ.get("abs_tol", 1e-9)),
            rel_tol=float(integ.get("rel_tol", 1e-9)),
            t_span=tuple(float(t) for t in integ.get("t_span", (0.0, 1.0))))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad integrator spec: {exc}")

    ics = []
    for ic in raw.get("initial_conditions", []):
        try:
            ics.append(chart.point(ic))
        except ContactmechError as exc:
            raise ConfigError(f"bad initial condition {ic!r}: {exc}")

    action = None
    mu = None
    want_reconstruct = False
    if "action" in raw:
        act_tbl = raw["action"]
        gens = act_tbl.get("generators")
        if not gens:
            raise ConfigError("[action] needs generators")
        try:
            fields = [parse_vector_field(g, chart, params=params)
                      for g in gens]
        except ContactmechError as exc:
            raise ConfigError(f"bad generator expression: {exc}")
        translated = None
        if "translated" in act_tbl:
            translated = tuple(_coordinate_index(chart, name)
                               for name in act_tbl["translated"])
            if any(i >= chart.n for i in translated):
                raise ConfigError("translated coordinates must be x's")
        action = GroupAction(chart, fields, abelian=True,
                             translated=translated)
        mu = np.asarray(act_tbl.get("mu", [0.0] * len(fields)), dtype=float)
        if mu.shape != (len(fields),):
            raise ConfigError("action.mu needs one entry per generator")
        want_reconstruct = bool(act_tbl.get("reconstruct", False))

    constraints = None
    parametrization = None
    if "submanifold" in raw:
        sub_tbl = raw["submanifold"]
        if "constraints" in sub_tbl:
            try:
                constraints = [parse_field(s, chart, params=params)
                               for s in sub_tbl["constraints"]]
            except ContactmechError as exc:
                raise ConfigError(f"bad constraint expression: {exc}")
        elif "parametrization" in sub_tbl:
            names = sub_tbl.get("parameters")
            if not names:
                raise ConfigError(
                    "submanifold.parametrization needs parameters")
            try:
                psi = parse_vector_field(sub_tbl["parametrization"],
                                         variables=names, params=params)
                parametrization = ParamSubmanifold(chart, psi)
            except (ContactmechError, ValueError) as exc:
                raise ConfigError(f"bad parametrization: {exc}")
        else:
            raise ConfigError(
                "[submanifold] needs constraints or parametrization")

    lift_field = None
    if "lift" in raw and "field" in raw["lift"]:
        try:
            lift_field = parse_vector_field(raw["lift"]["field"], chart,
                                            params=params)
        except ContactmechError as exc:
            raise ConfigError(f"bad lift field: {exc}")

    chk = raw.get("check", {})
    return Scenario(
        chart=chart, hamiltonian=hamiltonian, spec=spec,
        initial_conditions=ics, action=action, mu=mu,
        reconstruct=want_reconstruct, constraints=constraints,
        parametrization=parametrization, lift_field=lift_field,
        samples=int(chk.get("samples", 100)),
        scale=float(chk.get("scale", 1.0)),
        seed=int(raw.get("seed", 0)),
    ), hashlib.sha256(text).hexdigest()


# ---------------------------------------------------------------------------
# Output helpers


def _fmt(x):
    return f"{float(x):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, payload, quiet):
    text = json.dumps(payload, sort_keys=True, indent=2)
    with open(path, "w") as fh:
        fh.write(text + "\n")
    if not quiet:
        print(text)


def _report(scenario, sha, **fields):
    fields.update(version=__version__, config_sha256=sha, seed=scenario.seed)
    return fields


# ---------------------------------------------------------------------------
# Subcommands


def cmd_integrate(scenario, sha, out, quiet):
    if scenario.hamiltonian is None:
        raise ConfigError("integrate needs [hamiltonian] expression")
    if not scenario.initial_conditions:
        raise ConfigError("integrate needs initial_conditions")
    system = ContactSystem(scenario.chart, scenario.hamiltonian)
    names = darboux_varnames(scenario.chart.n)
    summaries = []
    for idx, x0 in enumerate(scenario.initial_conditions):
        traj = integrate(system, x0, scenario.spec)
        mon = traj.monitors
        header = ["t", *names, "H", "RH", "energy_defect", "div_defect"]
        rows = [
            [t, *p, mon.h[i], mon.rh[i], mon.energy_defect[i],
             mon.div_defect[i]]
            for i, (t, p) in enumerate(zip(traj.times, traj.points))]
        _write_csv(out / f"trajectory_{idx}.csv", header, rows)
        summaries.append({
            "initial_condition": [float(v) for v in x0],
            "steps": len(traj.times) - 1,
            "endpoint": [float(v) for v in traj.points[-1]],
            "final_h": float(mon.h[-1]),
            "max_energy_defect": max(mon.energy_defect),
            "max_div_defect": max(mon.div_defect),
        })
    payload = _report(scenario, sha, command="integrate",
                      trajectories=summaries)
    _write_json(out / "integrate.json", payload, quiet)
    return 0


def _frame_check(scenario, rng):
    chart = scenario.chart
    n = chart.n
    points = rng.normal(0.0, scenario.scale, size=(scenario.samples,
                                                   chart.dim))
    duality = 0.0
    horizontality = 0.0
    for p in points:
        frame = chart.frame(p)
        coframe = chart.coframe(p)
        duality = max(duality, float(np.max(np.abs(
            coframe @ frame - np.eye(chart.dim)))))
        eta = chart.eta_at(p)
        horizontality = max(horizontality, float(np.max(np.abs(
            eta @ frame[:, :2 * n]))))
    # sum_i [A_i, B^i] = -R, with the frame fields as coordinate functions
    zero = ScalarField.constant(0.0, chart.dim)
    one = ScalarField.constant(1.0, chart.dim)
    commutator = 0.0
    for p in points[:10]:
        total = np.zeros(chart.dim)
        for i in range(n):
            a_comps = [one if j == i else zero for j in range(chart.dim)]
            a_comps[2 * n] = ScalarField.coordinate(n + i, chart.dim)
            b_comps = [one if j == n + i else zero for j in range(chart.dim)]
            total += lie_bracket(VectorField(a_comps), VectorField(b_comps),
                                 list(p))
        commutator = max(commutator, float(np.max(np.abs(
            total + chart.reeb()))))
    return {
        "duality_residual": duality,
        "horizontality_residual": horizontality,
        "commutator_residual": commutator,
        "passed": max(duality, horizontality, commutator) <= 1e-9,
    }


def _bracket_check(scenario, rng):
    chart = scenario.chart
    structure = ContactJacobi(chart)
    f = parse_field("x1*y1 + sin(z)", chart)
    g = parse_field("y1^2 + z*cos(x1)", chart)
    h = parse_field("x1^2 - y1*z", chart)
    xf = parse_field("x1", chart)
    yf = parse_field("y1", chart)
    points = rng.normal(0.0, scenario.scale, size=(scenario.samples,
                                                   chart.dim))
    antisym = jacobi_res = leibniz = coord = commutator = 0.0
    fg = bracket_field(structure, f, g)
    x_f = hamiltonian_field(ContactSystem(chart, f))
    x_g = hamiltonian_field(ContactSystem(chart, g))
    x_fg = hamiltonian_field(ContactSystem(chart, fg))
    for p in points:
        p = list(p)
        antisym = max(antisym, abs(jacobi_bracket(structure, f, g, p)
                                   + jacobi_bracket(structure, g, f, p)))
        coord = max(coord, abs(jacobi_bracket(structure, xf, yf, p) + 1.0))
        jacobi_res = max(jacobi_res,
                         jacobi_identity_residual(structure, f, g, h, p))
        e_h = h.grad(p)[chart.z_slot] * structure.E(p)[chart.z_slot]
        leibniz = max(leibniz, abs(leibniz_defect(structure, f, g, h, p)
                                   - (-f(p) * g(p) * e_h)))
        br = lie_bracket(x_f, x_g, p)
        commutator = max(commutator, float(np.max(np.abs(
            br - np.asarray(x_fg(p), dtype=float)))))
    return {
        "antisymmetry_residual": antisym,
        "coordinate_bracket_residual": coord,
        "jacobi_identity_residual": jacobi_res,
        "leibniz_defect_residual": leibniz,
        "commutator_residual": commutator,
        "passed": max(antisym, coord, jacobi_res, leibniz,
                      commutator) <= 1e-8,
    }


def _submanifold_check(scenario, rng):
    chart = scenario.chart
    draws = rng.normal(0.0, scenario.scale, size=(scenario.samples,
                                                  chart.dim))
    if scenario.constraints is not None:
        sub = LevelSetSubmanifold(chart, scenario.constraints)
        rep = is_coisotropic(sub, draws)
        return {
            "kind": "coisotropic",
            "max_residual": rep.max_residual,
            "frame_residual": rep.frame_residual,
            "passed": rep.coisotropic,
        }
    if scenario.parametrization is not None:
        sub = scenario.parametrization
        params = rng.normal(0.0, scenario.scale, size=(scenario.samples,
                                                       sub.k))
        rep = is_legendrian(sub, params)
        return {
            "kind": "legendrian",
            "max_residual": rep.max_residual,
            "isotropic": rep.isotropic,
            "dimension": rep.dimension,
            "passed": rep.legendrian,
        }
    raise ConfigError("submanifold check needs a [submanifold] block")


def _lift_check(scenario, rng):
    chart = scenario.chart
    field = scenario.lift_field
    if field is None:
        if scenario.hamiltonian is None:
            raise ConfigError(
                "lift check needs [lift] field or [hamiltonian]")
        field = hamiltonian_field(
            ContactSystem(chart, scenario.hamiltonian))
    draws = rng.normal(0.0, scenario.scale, size=(min(scenario.samples, 50),
                                                  chart.dim))
    rep = legendrian_image_residual(chart, field, draws)
    classifier = is_hamiltonian(chart, field, draws[:20])
    return {
        "max_residual": rep.max_residual,
        "image_dimension": rep.image_dimension,
        "hamiltonian_defect": classifier.max_defect,
        "classifiers_agree": rep.legendrian == classifier.is_hamiltonian,
        "passed": rep.legendrian and classifier.is_hamiltonian,
    }


_CHECKS = {
    "frame": _frame_check,
    "brackets": _bracket_check,
    "submanifold": _submanifold_check,
    "lift": _lift_check,
}


def cmd_check(scenario, sha, out, quiet, what):
    rng = np.random.default_rng(scenario.seed)
    result = _CHECKS[what](scenario, rng)
    payload = _report(scenario, sha, command=f"check {what}", **result)
    _write_json(out / f"check_{what}.json", payload, quiet)
    return 0 if result["passed"] else 1


def cmd_reduce(scenario, sha, out, quiet):
    if scenario.hamiltonian is None or scenario.action is None:
        raise ConfigError("reduce needs [hamiltonian] and [action]")
    system = ContactSystem(scenario.chart, scenario.hamiltonian)
    rng = np.random.default_rng(scenario.seed)
    try:
        reduction = reduce_system(system, scenario.action, mu=scenario.mu,
                                  rng=rng)
    except MuNonzeroError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonInvariantError as exc:
        payload = _report(scenario, sha, command="reduce", passed=False,
                          invariance_defect=exc.defect, error=str(exc))
        _write_json(out / "reduce.json", payload, quiet)
        return 1

    payload = _report(
        scenario, sha, command="reduce", passed=True,
        reduced_n=reduction.system.chart.n,
        reduced_hamiltonian=str(reduction.system.H),
        pullback_residual=reduction.pullback_residual,
        invariance_defect=reduction.invariance_defect)

    if scenario.initial_conditions:
        x0 = scenario.initial_conditions[0]
        report = verify_projected_dynamics(system, scenario.action, x0,
                                           spec=scenario.spec,
                                           reduction=reduction)
        full = integrate(system, x0, scenario.spec)
        red = integrate(reduction.system, reduction.project(x0),
                        scenario.spec)
        kept = list(reduction.kept)
        rows = [
            [t, float(np.max(np.abs(full.points[i, kept] - red.points[i])))]
            for i, t in enumerate(full.times)]
        _write_csv(out / "reduce_comparison.csv", ["t", "mismatch"], rows)
        payload["max_mismatch"] = report.max_mismatch
        payload["max_level_drift"] = report.max_level_drift
        if scenario.reconstruct:
            lifted = reconstruct(system, scenario.action, red, x0,
                                 reduction=reduction)
            names = darboux_varnames(scenario.chart.n)
            rows = [[t, *p] for t, p in zip(lifted.times, lifted.points)]
            _write_csv(out / "reconstruction.csv", ["t", *names], rows)
            payload["reconstruction_error"] = float(np.max(np.abs(
                lifted.points - full.points)))
    _write_json(out / "reduce.json", payload, quiet)
    return 0


# ---------------------------------------------------------------------------
# Entry point


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="contactmech",
        description="Contact Hamiltonian mechanics: integrate, check, "
                    "reduce.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML scenario file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config RNG seed")
        p.add_argument("--quiet", action="store_true",
                       help="suppress report echo on stdout")

    common(sub.add_parser("integrate", help="integrate trajectories"))
    check = sub.add_parser("check", help="run an identity check suite")
    check.add_argument("what", choices=sorted(_CHECKS))
    common(check)
    common(sub.add_parser("reduce", help="symmetry reduction pipeline"))
    common(sub.add_parser("lift-check", help="alias for 'check lift'"))
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        scenario, sha = load_scenario(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        scenario.seed = args.seed
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create output dir: {exc}",
              file=sys.stderr)
        return 2
    try:
        if args.command == "integrate":
            return cmd_integrate(scenario, sha, out, args.quiet)
        if args.command == "check":
            return cmd_check(scenario, sha, out, args.quiet, args.what)
        if args.command == "lift-check":
            return cmd_check(scenario, sha, out, args.quiet, "lift")
        return cmd_reduce(scenario, sha, out, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (IntegrationError, SingularMatrixError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
