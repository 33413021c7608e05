import warnings

import numpy as np
import pytest
import sympy as sp
from scipy.integrate import quad

from holonomy_lab.algebra import dagger, is_algebra, left_basis, right_basis, So4Element
from holonomy_lab.errors import DivergenceWarning, UnknownNameError
from holonomy_lab.gauge import (
    AbelianConstantField,
    AxisGaugeTransform,
    BPSTField,
    NumericField,
    PerturbedField,
    ZeroField,
    action_density,
    bianchi_defect,
    bpst,
    builtin_field,
    covariant_derivative_F,
    curvature,
    gauge_transform,
    orientation_label,
    sd_split,
    self_dual_ratio,
    thooft_symbols,
    ym_action,
    ym_residual,
)
from holonomy_lab.geometry import FlatChart, S4StereographicChart, metric_hodge, metric_pairing

FLAT, S4 = FlatChart(), S4StereographicChart()


def fro(a, axes):
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=axes))


def field_zoo():
    c = So4Element.from_coefficients((0.3, -0.2, 0.5), (0.1, 0.4, -0.3))
    return {
        "bpst": bpst(),
        "bpst_dual": bpst(0.7, (0.2, 0, -0.1, 0.3), "dual"),
        "abelian": AbelianConstantField(c, N=2),
        "perturbed": PerturbedField(bpst(), 0.3, bump_width=1.2),
    }


def sympy_bpst_density_at_origin(bar):
    x = sp.symbols("x1:5", real=True)
    sig = [sp.Matrix([[0, 1], [1, 0]]), sp.Matrix([[0, -sp.I], [sp.I, 0]]), sp.Matrix([[1, 0], [0, -1]])]
    T = [-sp.I / 2 * s for s in sig]
    eta = thooft_symbols(bar=bar)
    r2 = sum(xi**2 for xi in x)
    A = [
        sum((2 * int(eta[a, m, n]) * x[n] / (r2 + 1) * T[a] for a in range(3) for n in range(4)), sp.zeros(2))
        for m in range(4)
    ]
    origin = {xi: 0 for xi in x}
    F = [[(A[n].diff(x[m]) - A[m].diff(x[n]) + A[m] * A[n] - A[n] * A[m]).subs(origin) for n in range(4)] for m in range(4)]
    dens = -sp.Rational(1, 2) * sum((F[m][n] * F[m][n]).trace() for m in range(4) for n in range(4))
    return complex(sp.nsimplify(sp.simplify(dens))), F


@pytest.mark.parametrize("name", ["bpst", "bpst_dual", "abelian", "perturbed"])
def test_jets_match_finite_differences(name, rng):
    A = field_zoo()[name]
    num = NumericField(A, A.N, richardson=True, traceless=A.traceless)
    x = rng.normal(size=(10, 4)) * 0.6
    a, da, d2a = A.jet(x)
    _, nda, nd2a = num.jet(x)
    assert np.max(np.abs(da - nda)) < 1e-6 * max(1.0, np.max(np.abs(da)))
    assert np.max(np.abs(d2a - nd2a)) < 1e-4 * max(1.0, np.max(np.abs(d2a)))


def test_connection_values_in_algebra(rng):
    x = rng.normal(size=(10, 4))
    for A in field_zoo().values():
        assert is_algebra(A(x), traceless=A.traceless)
        F = curvature(A, x)
        assert is_algebra(F, traceless=A.traceless)
        np.testing.assert_allclose(F, -np.swapaxes(F, -3, -4), atol=1e-14)


def test_zero_field():
    x = np.ones((3, 4))
    A = builtin_field("zero")
    assert np.all(curvature(A, x) == 0)
    assert np.all(ym_residual(A, S4, x) == 0)
    assert np.all(covariant_derivative_F(A, FLAT, x) == 0)
    fp, fm = sd_split(A, FLAT, x)
    assert np.all(fp == 0) and np.all(fm == 0)
    assert ym_action(A).value == 0.0


def test_abelian_curvature_constant(rng):
    c = So4Element.from_coefficients((0.3, 0.0, 0.1), (0.0, 0.2, 0.0))
    A = AbelianConstantField(c, N=1)
    x = rng.normal(size=(5, 4))
    F = curvature(A, x)
    np.testing.assert_allclose(F[..., 0, 0], np.broadcast_to(-2j * c.matrix, (5, 4, 4)), atol=1e-15)
    assert np.max(np.abs(covariant_derivative_F(A, FLAT, x))) < 1e-15
    assert np.max(np.abs(ym_residual(A, FLAT, x))) < 1e-15


def test_abelian_self_dual_generator_has_no_antiself_dual_part():
    A = builtin_field("abelian_constant", left=(1.0, 0.0, 0.0), N=2)
    _, fm = sd_split(A, FLAT, np.zeros(4))
    assert np.max(np.abs(fm)) < 1e-15


def test_bpst_density_symbolic_oracle():
    for variant in ("eta", "eta_bar"):
        dens, F_sym = sympy_bpst_density_at_origin(variant == "eta_bar")
        assert dens == pytest.approx(48.0)
        F = curvature(BPSTField(1.0, variant=variant), np.zeros(4))
        expected = np.array([[np.array(F_sym[m][n], dtype=complex) for n in range(4)] for m in range(4)])
        np.testing.assert_allclose(F, expected, atol=1e-14)
    assert action_density(bpst(), FLAT, np.zeros(4)) == pytest.approx(48.0, rel=1e-13)
    assert action_density(bpst(rho=0.5), FLAT, np.zeros(4)) == pytest.approx(48.0 / 0.5**4, rel=1e-13)


def test_orientation_detector():
    labels = {orientation_label("eta"), orientation_label("eta_bar")}
    assert labels == {"dual", "antidual"}
    assert orientation_label("eta_bar") == "antidual"


@pytest.mark.parametrize("chart, tol", [(FLAT, 1e-10), (S4, 1e-8)])
def test_bpst_antiself_duality(chart, tol, rng):
    x = rng.normal(size=(50, 4))
    plus, minus = self_dual_ratio(bpst(), chart, x)
    assert np.max(plus) < tol
    np.testing.assert_allclose(minus, 1.0, atol=1e-12)
    plus, _ = self_dual_ratio(bpst(orientation="dual"), chart, x)
    np.testing.assert_allclose(plus, 1.0, atol=1e-12)


def test_self_dual_ratio_conformally_stable(rng):
    x = rng.normal(size=(20, 4))
    A = field_zoo()["perturbed"]
    np.testing.assert_allclose(self_dual_ratio(A, FLAT, x)[0], self_dual_ratio(A, S4, x)[0], atol=1e-8)


def test_sd_split_properties(rng):
    x = rng.normal(size=(10, 4))
    for chart in (FLAT, S4):
        for A in field_zoo().values():
            fp, fm = sd_split(A, chart, x)
            np.testing.assert_allclose(fp + fm, curvature(A, x), atol=1e-13)
            np.testing.assert_allclose(metric_hodge(chart, x, fp), fp, atol=1e-12)
            np.testing.assert_allclose(metric_hodge(chart, x, fm), -fm, atol=1e-12)
            assert np.max(np.abs(metric_pairing(chart, x, fp, fm))) < 1e-10


@pytest.mark.parametrize("chart", [FLAT, S4])
def test_bpst_yang_mills(chart, rng):
    x = rng.normal(size=(20, 4))
    A = bpst()
    res = fro(ym_residual(A, chart, x), (-3, -2, -1))
    fmax = np.max(fro(curvature(A, x), (-4, -3, -2, -1)))
    assert np.max(res) < 1e-9 * fmax


def test_perturbed_field_is_not_yang_mills():
    res = ym_residual(PerturbedField(bpst(), 0.2), FLAT, np.array([0.3, 0.1, -0.2, 0.0]))
    assert np.max(np.abs(res)) > 1e-2


@pytest.mark.parametrize("chart", [FLAT, S4])
def test_bianchi(chart, rng):
    x = rng.normal(size=(10, 4)) * 0.7
    for A in field_zoo().values():
        assert np.max(bianchi_defect(A, chart, x)) < 1e-8


def test_gauge_covariance(rng):
    psi = AxisGaugeTransform.random(rng, N=2, factors=3, amplitude=0.8)
    x = rng.normal(size=(10, 4))
    P = psi(x)
    np.testing.assert_allclose(dagger(P) @ P, np.broadcast_to(np.eye(2), P.shape), atol=1e-13)
    for A in (bpst(), field_zoo()["perturbed"]):
        At = gauge_transform(A, psi)
        Pi = dagger(P)[..., None, None, :, :]
        np.testing.assert_allclose(curvature(At, x), Pi @ curvature(A, x) @ P[..., None, None, :, :], atol=1e-9)
        for chart in (FLAT, S4):
            lhs = ym_residual(At, chart, x)
            rhs = dagger(P)[..., None, :, :] @ ym_residual(A, chart, x) @ P[..., None, :, :]
            np.testing.assert_allclose(lhs, rhs, atol=1e-8)


def test_gauge_transform_identity_and_pure_gauge(rng):
    x = rng.normal(size=(6, 4))
    ident = AxisGaugeTransform.random(rng, amplitude=0.0)
    np.testing.assert_allclose(gauge_transform(bpst(), ident)(x), bpst()(x), atol=1e-15)
    psi = AxisGaugeTransform.random(rng, amplitude=1.0)
    pure = gauge_transform(ZeroField(2), psi)
    assert np.max(np.abs(pure(x))) > 0.1
    assert np.max(np.abs(curvature(pure, x))) < 1e-12


def test_gauge_transform_jet_matches_fd(rng):
    psi = AxisGaugeTransform.random(rng, factors=2)
    At = gauge_transform(bpst(), psi)
    num = NumericField(At, 2, richardson=True)
    x = rng.normal(size=(5, 4))
    np.testing.assert_allclose(At.jet(x)[1], num.jet(x)[1], atol=1e-7)
    np.testing.assert_allclose(At.jet(x)[2], num.jet(x)[2], atol=1e-4)


def test_action_oracle():
    R = 20.0
    exact, _ = quad(lambda r: 2 * np.pi**2 * r**3 * 48.0 / (r * r + 1.0) ** 4, 0, R, epsabs=1e-13, epsrel=1e-13)
    with warnings.catch_warnings():
        warnings.simplefilter("error", DivergenceWarning)
        res = ym_action(bpst(), radius=R)
    assert res.value == pytest.approx(exact, rel=1e-6)
    assert res.value == pytest.approx(8 * np.pi**2, rel=1e-2)
    assert res.tail_estimate == pytest.approx(8 * np.pi**2 - exact, rel=0.2)


def test_action_gauge_invariant(rng):
    psi = AxisGaugeTransform.random(rng, amplitude=0.7)
    a = ym_action(bpst(), radius=3.0, n_radial=6, n_angular=4, tol=1.0).value
    b = ym_action(gauge_transform(bpst(), psi), radius=3.0, n_radial=6, n_angular=4, tol=1.0).value
    assert b == pytest.approx(a, rel=1e-10)


def test_action_small_ball_warns():
    with pytest.warns(DivergenceWarning):
        ym_action(bpst(), radius=1.0, n_radial=4, n_angular=3)


def test_builtin_field_errors():
    with pytest.raises(UnknownNameError) as err:
        builtin_field("monopole")
    assert "bpst" in str(err.value)
    with pytest.raises(ValueError):
        bpst(orientation="sideways")


def test_abelian_generator_from_basis():
    A = AbelianConstantField(left_basis()[0] + right_basis()[2] * 0.5, N=2)
    assert A.traceless and A.N == 2
