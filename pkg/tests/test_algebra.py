import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from holonomy_lab.algebra import (
    RotationPath,
    So4Element,
    anti_self_dual_part,
    as_algebra,
    check_rotation_path,
    commutator,
    exp_so4,
    frobenius,
    index_hodge,
    is_algebra,
    left_basis,
    project_left,
    project_right,
    reunitarize,
    right_basis,
    self_dual_part,
    so4_pairing,
    su2_generators,
    unitarity_defect,
)
from holonomy_lab.constants import LEVI_CIVITA

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
matrices = arrays(np.float64, (4, 4), elements=finite)
coeffs = st.lists(finite, min_size=3, max_size=3)


def antisym(m):
    return m - m.T


def random_block(rng, N=2):
    """Random antisymmetric 4x4 block of N x N complex matrices."""
    b = rng.normal(size=(4, 4, N, N)) + 1j * rng.normal(size=(4, 4, N, N))
    return b - np.swapaxes(b, 0, 1)


def test_levi_civita_orientation():
    assert LEVI_CIVITA[0, 1, 2, 3] == 1
    assert LEVI_CIVITA[1, 0, 2, 3] == -1
    assert np.count_nonzero(LEVI_CIVITA) == 24


def test_so4_element_requires_antisymmetry():
    with pytest.raises(ValueError):
        So4Element(np.eye(4))
    a = So4Element(antisym(np.arange(16.0).reshape(4, 4)))
    assert np.array_equal(a.matrix, -a.matrix.T)


def test_hodge_of_12_is_34():
    a = np.zeros((4, 4))
    a[0, 1], a[1, 0] = 1, -1
    expected = np.zeros((4, 4))
    expected[2, 3], expected[3, 2] = 1, -1
    np.testing.assert_array_equal(index_hodge(a), expected)


@given(matrices)
def test_hodge_involution(m):
    a = antisym(m)
    np.testing.assert_allclose(index_hodge(index_hodge(a)), a, atol=1e-12)


def test_hodge_involution_on_blocks(rng):
    b = random_block(rng)
    np.testing.assert_allclose(index_hodge(index_hodge(b)), b, atol=1e-13)


def test_left_right_basis_matrices():
    e1, f1 = left_basis()[0].matrix, right_basis()[0].matrix
    E = np.zeros((4, 4))
    E[1, 0], E[0, 1], E[3, 2], E[2, 3] = 1, -1, 1, -1
    F = np.zeros((4, 4))
    F[1, 0], F[0, 1], F[3, 2], F[2, 3] = 1, -1, -1, 1
    np.testing.assert_array_equal(e1, E)
    np.testing.assert_array_equal(f1, F)


def test_basis_norms_and_orthogonality():
    L, R = left_basis(), right_basis()
    for i in range(3):
        assert np.linalg.norm(L[i].matrix) == pytest.approx(2.0)
        assert np.linalg.norm(R[i].matrix) == pytest.approx(2.0)
        for j in range(3):
            assert frobenius(L[i], R[j]) == 0.0
            if i != j:
                assert frobenius(L[i], L[j]) == 0.0
                assert frobenius(R[i], R[j]) == 0.0


def test_eigenspaces():
    for e in left_basis():
        np.testing.assert_allclose(index_hodge(e).matrix, e.matrix, atol=1e-14)
    for f in right_basis():
        np.testing.assert_allclose(index_hodge(f).matrix, -f.matrix, atol=1e-14)


def test_commutation_closure():
    L = [e.matrix for e in left_basis()]
    R = [f.matrix for f in right_basis()]
    for a in L:
        for b in R:
            np.testing.assert_allclose(commutator(a, b), 0.0, atol=1e-14)
    for basis, proj in ((L, project_left), (R, project_right)):
        for a in basis:
            for b in basis:
                c = commutator(a, b)
                np.testing.assert_allclose(proj(c).matrix, c, atol=1e-14)


def test_projection_examples():
    e2 = left_basis()[1]
    np.testing.assert_array_equal(project_left(e2).matrix, e2.matrix)
    np.testing.assert_allclose(project_right(e2).matrix, 0.0, atol=1e-15)
    np.testing.assert_array_equal(project_left(np.zeros((4, 4))).matrix, 0.0)


@settings(max_examples=100)
@given(matrices)
def test_projector_matches_hodge_formula(m):
    a = antisym(m)
    np.testing.assert_allclose(project_left(a).matrix, 0.5 * (a + index_hodge(a)), atol=1e-12)
    np.testing.assert_allclose(project_right(a).matrix, 0.5 * (a - index_hodge(a)), atol=1e-12)


@given(matrices)
def test_projector_algebra(m):
    a = antisym(m)
    pl, pr = project_left(a), project_right(a)
    np.testing.assert_allclose(pl.matrix + pr.matrix, a, atol=1e-12)
    np.testing.assert_allclose(project_left(pl).matrix, pl.matrix, atol=1e-12)
    np.testing.assert_allclose(project_right(pr).matrix, pr.matrix, atol=1e-12)
    np.testing.assert_allclose(project_left(pr).matrix, 0.0, atol=1e-12)
    np.testing.assert_allclose(project_right(pl).matrix, 0.0, atol=1e-12)


@given(coeffs, coeffs)
def test_coefficient_roundtrip(left, right):
    a = So4Element.from_coefficients(left, right)
    cl, cr = a.coefficients()
    np.testing.assert_allclose(cl, left, atol=1e-12)
    np.testing.assert_allclose(cr, right, atol=1e-12)


def test_pairing_examples():
    g = np.array([[0.3j, 1.0], [-1.0, -0.3j]])
    B = np.zeros((4, 4, 2, 2), dtype=complex)
    B[0, 1], B[1, 0], B[2, 3], B[3, 2] = g, -g, g, -g
    e1 = left_basis()[0]
    # (e1)_{21} B_{12} + (e1)_{12} B_{21} + (e1)_{43} B_{34} + (e1)_{34} B_{43} = 4g
    np.testing.assert_allclose(so4_pairing(e1, B), 4 * g, atol=1e-15)
    np.testing.assert_allclose(so4_pairing(np.zeros((4, 4)), B), 0.0)


def test_pairing_orthogonality(rng):
    for _ in range(20):
        B = anti_self_dual_part(random_block(rng))
        np.testing.assert_allclose(index_hodge(B), -B, atol=1e-14)
        for e in left_basis():
            assert np.max(np.abs(so4_pairing(e, B))) < 1e-12
        B = self_dual_part(random_block(rng))
        for f in right_basis():
            assert np.max(np.abs(so4_pairing(f, B))) < 1e-12


def test_pairing_split(rng):
    for _ in range(20):
        a = antisym(rng.normal(size=(4, 4)))
        B = random_block(rng)
        whole = so4_pairing(a, B)
        split = so4_pairing(project_left(a), self_dual_part(B)) + so4_pairing(project_right(a), anti_self_dual_part(B))
        np.testing.assert_allclose(whole, split, atol=1e-12)


@given(matrices, st.floats(-3, 3), st.floats(-3, 3))
def test_exp_so4_group(m, t, s):
    a = antisym(m) / 10
    w = exp_so4(a, t)
    np.testing.assert_allclose(w.T @ w, np.eye(4), atol=1e-12)
    assert np.linalg.det(w) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(exp_so4(a, t) @ exp_so4(a, s), exp_so4(a, t + s), atol=1e-11)


def test_exp_so4_at_zero():
    np.testing.assert_array_equal(exp_so4(left_basis()[0], 0.0), np.eye(4))


def test_rotation_path_properties():
    W = RotationPath.from_coefficients(left=(1.0, -0.5, 0.2), right=(0.0, 0.3, 0.0))
    ts = np.linspace(0, 1, 11)
    orth, det, drift = check_rotation_path(W, ts)
    assert orth < 1e-13 and det < 1e-13 and drift < 1e-8
    np.testing.assert_allclose(W(0.0), np.eye(4), atol=1e-15)
    np.testing.assert_allclose(RotationPath.identity().log_derivative(ts), 0.0)


def test_su2_structure():
    T = su2_generators()
    np.testing.assert_allclose(commutator(T[0], T[1]), T[2], atol=1e-15)
    assert all(is_algebra(t) for t in T)


def test_gauge_builders(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert is_algebra(as_algebra(m))
    assert unitarity_defect(reunitarize(m)) < 1e-13
