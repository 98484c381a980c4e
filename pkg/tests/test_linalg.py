import numpy as np
import pytest

from sptquench import linalg
from sptquench.errors import (DimensionMismatch, NotHermitian,
                              NotSkewSymmetric, OddDimension)

rng = np.random.default_rng(1)


def random_hermitian(n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def test_herm_eig_pauli_x():
    eig = linalg.herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(eig.values, [-1.0, 1.0])


def test_herm_eig_identity():
    eig = linalg.herm_eig(np.eye(3))
    assert np.allclose(eig.values, 1.0)


def test_herm_eig_ssh_dispersion():
    # closed form +-|J1 + J2 e^{ik}| at k = 0
    j1, j2 = 0.5, 1.0
    h = -(j1 + j2) * np.array([[0.0, 1.0], [1.0, 0.0]])
    eig = linalg.herm_eig(h)
    assert np.allclose(eig.values, [-1.5, 1.5])


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        linalg.herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_herm_eig_orthonormal_and_residual():
    a = random_hermitian(9)
    eig = linalg.herm_eig(a)
    assert np.max(np.abs(eig.vectors.conj().T @ eig.vectors - np.eye(9))) < 1e-12
    res = a @ eig.vectors - eig.vectors * eig.values
    assert np.max(np.abs(res)) < 1e-10 * np.linalg.norm(a, 2)
    assert np.all(np.diff(eig.values) >= 0)


def test_general_eig_diagonal():
    eig = linalg.general_eig(np.diag([2.0, 3.0j]))
    assert not eig.defective_flag
    assert set(np.round(eig.values, 12)) == {2.0 + 0j, 3.0j}


def test_general_eig_jordan_block_flagged():
    eig = linalg.general_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert eig.defective_flag


def test_general_eig_ssh_continuation():
    # analytic continuation of the SSH dispersion at k = 0 + 0.6i
    j1, j2, kappa = 1.0, 0.5, 0.6
    h = np.array([[0.0, -(j1 + j2 * np.exp(-kappa))],
                  [-(j1 + j2 * np.exp(kappa)), 0.0]], dtype=complex)
    eig = linalg.general_eig(h)
    expect = np.sqrt((j1 + j2 * np.exp(-kappa)) * (j1 + j2 * np.exp(kappa)))
    assert np.allclose(sorted(eig.values.real), [-expect, expect], atol=1e-12)


def test_general_eig_biorthonormal_completeness():
    for n in (3, 5, 8):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        eig = linalg.general_eig(a)
        assert not eig.defective_flag
        ident = eig.right_vectors @ eig.left_vectors.conj().T
        assert np.max(np.abs(ident - np.eye(n))) < 1e-10
        overlap = eig.left_vectors.conj().T @ eig.right_vectors
        assert np.max(np.abs(overlap - np.eye(n))) < 1e-10


def test_svd_diagonal_and_zero():
    s, _, _ = linalg.svd(np.diag([-2.0, 1.0]))
    assert np.allclose(s, [2.0, 1.0])
    s, _, _ = linalg.svd(np.zeros((3, 2)))
    assert np.allclose(s, 0.0)


def test_svd_reconstruction():
    a = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
    s, u, v = linalg.svd(a)
    assert np.max(np.abs(u @ np.diag(s) @ v.conj().T - a)) < 1e-10
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


def test_pfaffian_basics():
    assert linalg.pfaffian(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(1.0)
    b = np.zeros((4, 4))
    b[0, 1], b[1, 0], b[2, 3], b[3, 2] = 2.0, -2.0, 3.0, -3.0
    assert linalg.pfaffian(b) == pytest.approx(6.0)


def test_pfaffian_determinant_identity():
    for _ in range(30):
        n = 2 * rng.integers(1, 5)
        m = rng.normal(size=(n, n))
        r = m - m.T
        det = np.linalg.det(r)
        assert linalg.pfaffian(r) ** 2 == pytest.approx(det, rel=1e-8, abs=1e-10)


def test_pfaffian_congruence_identity():
    # Pf(B R B^T) = det(B) Pf(R)
    for _ in range(30):
        m = rng.normal(size=(6, 6))
        r = m - m.T
        b = rng.normal(size=(6, 6))
        lhs = linalg.pfaffian(b @ r @ b.T)
        rhs = np.linalg.det(b) * linalg.pfaffian(r)
        assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)


def test_pfaffian_rejects_bad_input():
    with pytest.raises(OddDimension):
        linalg.pfaffian(np.zeros((3, 3)))
    with pytest.raises(NotSkewSymmetric):
        linalg.pfaffian(np.eye(4))


def test_weyl_shift_trivial_cases():
    a = random_hermitian(5)
    assert linalg.weyl_shift(a, a) == (0.0, 0.0)
    shift, diff = linalg.weyl_shift(a, a + 0.3 * np.eye(5))
    assert shift == pytest.approx(0.3) and diff == pytest.approx(0.3)


def test_weyl_shift_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.weyl_shift(np.eye(2), np.eye(3))


def test_weyl_property_random_pairs():
    for _ in range(1000):
        n = rng.integers(2, 17)
        shift, diff = linalg.weyl_shift(random_hermitian(n), random_hermitian(n))
        assert shift <= diff + 1e-10


def test_minmax_principle_sampling():
    # lambda_j = max over j-dim subspaces of the min Rayleigh quotient;
    # random subspaces never exceed it and approach it under sampling.
    for n in (2, 3, 4):
        a = random_hermitian(n)
        values = np.sort(np.linalg.eigvalsh(a))[::-1]
        for j in range(1, n + 1):
            best = -np.inf
            for _ in range(2000):
                basis = np.linalg.qr(rng.normal(size=(n, j))
                                     + 1j * rng.normal(size=(n, j)))[0]
                sub = basis.conj().T @ a @ basis
                best = max(best, float(np.min(np.linalg.eigvalsh(sub))))
            assert best <= values[j - 1] + 1e-10
            assert values[j - 1] - best < 0.35 * (values[0] - values[-1] + 1e-12)


def test_cluster_degeneracies():
    clusters = linalg.cluster_degeneracies([1.0, 1.0 + 1e-10, 0.5, 0.2, 0.2])
    assert [c[1] for c in clusters] == [2, 1, 2]
