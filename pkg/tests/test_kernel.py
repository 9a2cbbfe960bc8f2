import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignerfriend import kernel as K

from .helpers import random_density, random_hermitian

UP = K.ket(1, 0)
DOWN = K.ket(0, 1)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)

finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)


def test_kron_basis_vectors():
    v = K.kron(UP, K.ket(1, 0))
    assert v.shape == (4,)
    np.testing.assert_array_equal(v, [1, 0, 0, 0])


def test_kron_identities():
    np.testing.assert_array_equal(K.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_superposition_ordering():
    v = K.kron((UP + DOWN) / math.sqrt(2), K.ket(1, 0))
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(v, [r, 0, r, 0], atol=1e-15)


def test_kron_rejects_mixed_kinds():
    with pytest.raises(K.ContractViolation):
        K.kron(UP, np.eye(2))


def test_kron_associative(rng):
    for _ in range(20):
        A, B, C = (random_hermitian(rng, d) for d in (2, 2, 3))
        lhs = K.kron(K.kron(A, B), C)
        rhs = K.kron(A, K.kron(B, C))
        assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_dagger_involution_and_product_rule(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_array_equal(K.dagger(K.dagger(A)), A)
    np.testing.assert_allclose(K.dagger(K.matmul(A, B)),
                               K.matmul(K.dagger(B), K.dagger(A)), atol=1e-14)


def test_commutator_examples():
    np.testing.assert_array_equal(K.commutator(Z, Z), np.zeros((2, 2)))
    # |up><up| X - X |up><up| = [[0,1],[0,0]] - [[0,0],[1,0]]
    np.testing.assert_array_equal(K.commutator(K.projector(UP), X), [[0, 1], [-1, 0]])


def test_trace_identity():
    assert K.trace(np.eye(4)) == 4


def test_trace_of_hermitian_is_real(rng):
    assert abs(K.trace(random_hermitian(rng, 5)).imag) <= 1e-12


def test_dimension_mismatch_raises():
    with pytest.raises(K.ContractViolation):
        K.matmul(np.eye(2), np.eye(3))
    with pytest.raises(K.ContractViolation):
        K.commutator(np.eye(2), np.eye(3))


@pytest.mark.parametrize("M, expected", [
    (np.eye(2), 1.0),
    (np.diag([1.0, 0.0]), 0.0),
    (np.array([[0.5, 0.25], [0.25, 0.5]]), 0.25),
])
def test_eig_min_examples(M, expected):
    assert K.eig_min_hermitian(M) == pytest.approx(expected, abs=1e-15)


def test_eig_min_rejects_non_hermitian():
    with pytest.raises(K.ContractViolation):
        K.eig_min_hermitian(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("dim", [3, 4, 8, 16])
def test_jacobi_matches_lapack(rng, dim):
    for _ in range(5):
        M = random_hermitian(rng, dim)
        np.testing.assert_allclose(K.jacobi_eigenvalues(M), np.linalg.eigvalsh(M), atol=1e-12)


def test_jacobi_on_degenerate_spectrum():
    M = np.zeros((8, 8), dtype=complex)
    M[:4, :4] = np.eye(4)
    assert K.eig_min_hermitian(M) == pytest.approx(0.0, abs=1e-14)


def _principal_minors_nonnegative(M, eps=1e-9):
    return M[0, 0].real >= -eps and M[1, 1].real >= -eps and np.linalg.det(M).real >= -eps


@settings(max_examples=300, deadline=None)
@given(finite, finite, finite, finite)
def test_psd_agrees_with_principal_minors(p, q, re, im):
    M = np.array([[p, re + 1j * im], [re - 1j * im, q]])
    lam = np.linalg.eigvalsh(M)
    if abs(lam[0]) < 1e-6:
        return
    assert K.is_psd(M) == _principal_minors_nonnegative(M)


def test_isometry_cyclicity(rng):
    for _ in range(20):
        Q, _ = np.linalg.qr(rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2)))
        assert K.is_isometry(Q)
        M = random_hermitian(rng, 8)
        rho = random_density(rng)
        lhs = K.trace(K.dagger(Q) @ M @ Q @ rho)
        rhs = K.trace(M @ Q @ rho @ K.dagger(Q))
        assert abs(lhs - rhs) <= 1e-12


def test_predicates():
    assert K.is_normalized(K.ket(0.6, 0.8j))
    assert not K.is_normalized(K.ket(1, 1))
    assert K.is_density(np.eye(2) / 2)
    assert not K.is_density(np.eye(2))
    assert not K.is_psd(np.diag([1.0, -1e-6]))
    assert K.is_psd(np.diag([1.0, -1e-10]))
    assert not K.is_isometry(np.ones((2, 3)))


def test_operator_norm_matches_svd(rng):
    for _ in range(20):
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert K.operator_norm_2x2(M) == pytest.approx(np.linalg.svd(M, compute_uv=False)[0],
                                                       rel=1e-12)


def test_bloch_round_trip(rng):
    M = random_hermitian(rng, 2)
    np.testing.assert_allclose(K.from_bloch(*K.to_bloch(M)), M, atol=1e-15)
