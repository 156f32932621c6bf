import numpy as np
import pytest

from contactmech import autodiff
from contactmech.chart import DarbouxChart
from contactmech.dynamics import ContactSystem, hamiltonian_field
from contactmech.calculus import lie_bracket
from contactmech.expressions import parse_field
from contactmech.jacobi import (ContactJacobi, CosymplecticJacobi, LcsJacobi,
                                bracket_field, jacobi_bracket,
                                jacobi_identity_residual, lambda_via_deta,
                                leibniz_defect, sharp_lambda_via_flat)

CHART = DarbouxChart(1)
CONTACT = ContactJacobi(CHART)


def rand_points(count, dim, seed=0):
    return np.random.default_rng(seed).normal(size=(count, dim))


def test_coordinate_brackets():
    x = parse_field("x1", CHART)
    y = parse_field("y1", CHART)
    z = parse_field("z", CHART)
    one = parse_field("1", CHART)
    p = [0.4, -1.2, 0.9]
    assert jacobi_bracket(CONTACT, x, y, p) == pytest.approx(-1.0)
    assert jacobi_bracket(CONTACT, one, z, p) == pytest.approx(-1.0)
    assert jacobi_bracket(CONTACT, x, z, p) == pytest.approx(-p[0])


def test_antisymmetry():
    f = parse_field("x1*y1 + sin(z)", CHART)
    g = parse_field("y1^2 + z*cos(x1)", CHART)
    for p in rand_points(30, 3):
        p = list(p)
        assert jacobi_bracket(CONTACT, f, g, p) == pytest.approx(
            -jacobi_bracket(CONTACT, g, f, p), abs=1e-12)


def test_jacobi_identity():
    f = parse_field("x1*y1 + sin(z)", CHART)
    g = parse_field("y1^2 + z*cos(x1)", CHART)
    h = parse_field("x1^2 - y1*z", CHART)
    for p in rand_points(30, 3, seed=1):
        assert jacobi_identity_residual(CONTACT, f, g, h, list(p)) <= 1e-8


def test_leibniz_defect_is_minus_fg_Eh():
    f = parse_field("x1 + y1", CHART)
    g = parse_field("z*y1", CHART)
    h = parse_field("x1*z", CHART)
    for p in rand_points(20, 3, seed=2):
        p = list(p)
        e_h = -h.grad(p)[2]          # E = -R differentiates along -z
        want = -f(p) * g(p) * e_h
        assert leibniz_defect(CONTACT, f, g, h, p) == pytest.approx(
            want, abs=1e-10)


def test_sharp_lambda_closed_form_vs_flat_solve():
    rng = np.random.default_rng(3)
    chart = DarbouxChart(2)
    jac = ContactJacobi(chart)
    for _ in range(20):
        p = rng.normal(size=5)
        alpha = rng.normal(size=5)
        closed = np.asarray(jac.sharp_lambda(list(p), list(alpha)))
        via_flat = sharp_lambda_via_flat(chart, p, alpha)
        assert np.allclose(closed, via_flat, atol=1e-9)


def test_lambda_via_deta_cross_check():
    rng = np.random.default_rng(4)
    for _ in range(20):
        p = rng.normal(size=3)
        a, b = rng.normal(size=3), rng.normal(size=3)
        assert CONTACT.lam(list(p), list(a), list(b)) == pytest.approx(
            lambda_via_deta(CHART, p, a, b), abs=1e-10)


def test_bracket_from_commutator():
    # {f, g} = -eta([X_f, X_g])
    f = parse_field("x1*y1 + sin(z)", CHART)
    g = parse_field("y1^2 + z*cos(x1)", CHART)
    x_f = hamiltonian_field(ContactSystem(CHART, f))
    x_g = hamiltonian_field(ContactSystem(CHART, g))
    for p in rand_points(20, 3, seed=5):
        p = list(p)
        br = lie_bracket(x_f, x_g, p)
        eta_val = CHART.eta_at(CHART.point(p)) @ br
        assert jacobi_bracket(CONTACT, f, g, p) == pytest.approx(
            -eta_val, abs=1e-8)


def test_hamiltonian_of_bracket():
    # [X_f, X_g] = X_{{f,g}}
    f = parse_field("x1*y1 + sin(z)", CHART)
    g = parse_field("y1^2 + z*cos(x1)", CHART)
    x_f = hamiltonian_field(ContactSystem(CHART, f))
    x_g = hamiltonian_field(ContactSystem(CHART, g))
    x_fg = hamiltonian_field(
        ContactSystem(CHART, bracket_field(CONTACT, f, g)))
    for p in rand_points(20, 3, seed=6):
        p = list(p)
        br = lie_bracket(x_f, x_g, p)
        assert np.allclose(br, np.asarray(x_fg(p), dtype=float), atol=1e-8)


def test_cosymplectic_bracket():
    chart = DarbouxChart(2)
    struct = CosymplecticJacobi(chart)
    f = parse_field("x1*y1 + sin(x2)", chart)
    g = parse_field("y2^2 + x1*z", chart)
    z = parse_field("z", chart)
    for p in rand_points(10, 5, seed=7):
        p = list(p)
        _, df = f.value_and_grad(p)
        _, dg = g.value_and_grad(p)
        want = sum(df[2 + i] * dg[i] - df[i] * dg[2 + i] for i in range(2))
        assert jacobi_bracket(struct, f, g, p) == pytest.approx(want,
                                                                abs=1e-12)
        # z is a Casimir: the structure has E = 0 and no z slots
        assert jacobi_bracket(struct, f, z, p) == pytest.approx(0.0,
                                                                abs=1e-14)


def _lcs_structure():
    # Omega = exp(-x1)(dx1^dy1 + dx2^dy2), Lee form gamma = -dx1 on R^4
    def omega(c):
        s = autodiff.exp(-c[0])
        z = 0.0 * s
        return [[z, z, s, z], [z, z, z, s], [-s, z, z, z], [z, -s, z, z]]

    def gamma(c):
        z = 0.0 * c[0]
        return [-1.0 + z, z, z, z]

    return LcsJacobi(4, omega, gamma)


def test_lcs_jacobi_identity_and_leibniz():
    struct = _lcs_structure()
    names = ("x1", "x2", "y1", "y2")
    f = parse_field("x1*y1 + x2^2", variables=names)
    g = parse_field("sin(x1) + y2*x2", variables=names)
    h = parse_field("exp(y1) + x1*y2", variables=names)
    rng = np.random.default_rng(8)
    for _ in range(10):
        p = list(rng.normal(size=4))
        assert jacobi_identity_residual(struct, f, g, h, p) <= 1e-8
        e = [autodiff.value(v) for v in struct.E(p)]
        _, dh = h.value_and_grad(p)
        want = -f(p) * g(p) * float(np.dot(e, dh))
        assert leibniz_defect(struct, f, g, h, p) == pytest.approx(
            want, abs=1e-9)


def test_lcs_rejects_odd_dimension():
    with pytest.raises(ValueError):
        LcsJacobi(3, lambda c: [], lambda c: [])


def test_contact_E_is_minus_reeb():
    assert CONTACT.E([0.0, 0.0, 0.0]) == [0.0, 0.0, -1.0]
