import numpy as np
import pytest

from sptquench import channelbounds as cb
from sptquench import models
from sptquench import mps as M
from sptquench.errors import PoleHit, ValidityViolated, VerificationFailure

rng = np.random.default_rng(9)


def haar(n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unital_channel(dim, n_kraus):
    weights = rng.dirichlet(np.ones(n_kraus))
    e_mat = np.zeros((dim * dim, dim * dim), dtype=complex)
    for w in weights:
        u = haar(dim)
        e_mat += w * np.kron(u, u.conj())
    e_inf = np.outer(np.eye(dim).reshape(-1), np.eye(dim).reshape(-1) / dim)
    return e_mat, e_inf


def test_minimal_polynomial_diagonalizable():
    poly = cb.minimal_polynomial(np.diag([1.0, 2.0, 3.0]))
    assert np.all(poly.jordan_sizes == 1)
    assert poly.degree == 3


def test_minimal_polynomial_jordan():
    poly = cb.minimal_polynomial(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert poly.degree == 2
    assert np.allclose(poly.roots, 0.0)
    m3 = np.diag([2.0, 2.0, 2.0]).astype(complex)
    m3[0, 1] = 1.0
    poly = cb.minimal_polynomial(m3)
    assert poly.degree == 2 and np.allclose(poly.roots, 2.0)


def test_minimal_polynomial_pauli_channel():
    ch = M.transfer_analysis(models.z2z2_mps(0.49, 0.49))
    poly = cb.minimal_polynomial(ch.matrix_rep - ch.matrix_rep_inf)
    mags = np.sort(np.abs(poly.roots))
    assert poly.degree <= 3
    assert np.allclose(mags, [0.0, 0.0004, 0.02], atol=1e-10)
    assert np.all(poly.jordan_sizes == 1)


def test_minimal_polynomial_verification_failure():
    with pytest.raises(VerificationFailure):
        cb.minimal_polynomial(np.diag([1.0, 1.0 + 5e-8]), cluster_tol=1e-7,
                              verify_tol=1e-16)


def test_blaschke_properties():
    poly = cb.MinimalPolynomial(roots=np.array([0.3, -0.2 + 0.1j]),
                                jordan_sizes=np.array([1, 2]))
    assert cb.blaschke(0.3, poly) == 0.0
    for phi in (0.0, 1.0, 2.5):
        assert abs(cb.blaschke(np.exp(1j * phi), poly)) == pytest.approx(1.0, abs=1e-10)
    expect = np.prod([(-0.3), (0.2 - 0.1j) ** 2])
    assert cb.blaschke(0.0, poly) == pytest.approx(expect)


def test_blaschke_pole_guard():
    poly = cb.MinimalPolynomial(roots=np.array([0.5]), jordan_sizes=np.array([1]))
    with pytest.raises(PoleHit):
        cb.blaschke(2.0, poly)


def test_convergence_bound_nilpotent():
    poly = cb.MinimalPolynomial(roots=np.array([0.0]), jordan_sizes=np.array([3]))
    assert cb.convergence_bound(3, poly, 1.0, "sharp") == 0.0
    assert cb.convergence_bound(5, poly, 1.0, "worst_case") == 0.0


def test_convergence_bound_validity_guards():
    poly = cb.MinimalPolynomial(roots=np.array([0.9]), jordan_sizes=np.array([1]))
    with pytest.raises(ValidityViolated):
        cb.convergence_bound(5, poly, 1.0, "sharp")   # needs l > 9
    with pytest.raises(ValidityViolated):
        cb.convergence_bound(18, poly, 1.0, "worst_case")  # needs l >= 19


def test_convergence_bound_dominates_direct():
    for _ in range(25):
        dim = int(rng.integers(2, 5))
        e_mat, e_inf = random_unital_channel(dim, int(rng.integers(2, 4)))
        poly = cb.minimal_polynomial(e_mat - e_inf)
        if poly.spectral_radius >= 0.999:
            continue
        c = np.sqrt(dim / 2.0)
        for l in (8, 20, 40):
            direct = np.linalg.norm(np.linalg.matrix_power(e_mat, l) - e_inf, 2)
            try:
                sharp = cb.convergence_bound(l, poly, c, "sharp")
                worst = cb.convergence_bound(l, poly, c, "worst_case")
            except ValidityViolated:
                continue
            assert direct <= sharp + 1e-12
            assert direct <= worst + 1e-12


def test_convergence_bound_monotone_in_l():
    poly = cb.MinimalPolynomial(roots=np.array([0.4, -0.25]),
                                jordan_sizes=np.array([1, 1]))
    prev = np.inf
    for l in range(4, 30):
        val = cb.convergence_bound(l, poly, 1.0, "worst_case")
        assert val <= prev
        prev = val


def test_channel_distance_normal_channel():
    ch = M.transfer_analysis(models.z2z2_mps(0.49, 0.49))
    for l in (0, 1, 4, 8):
        d = cb.channel_distance(ch, l)
        if l == 0:
            assert d == pytest.approx(
                np.linalg.norm(np.eye(4) - ch.matrix_rep_inf, 2))
        else:
            assert d == pytest.approx(0.02 ** l, abs=1e-10)


def test_thm2_bound_forms():
    inputs = cb.BoundInputs(bond_dim=2, mpu_bond_dim=4, mu=0.02, k0=1,
                            l=20, t=0)
    static = cb.thm2_bound(inputs)
    assert static == pytest.approx(cb.thm2_prefactor(2, 0.02) * 20 ** 3 * 0.02 ** 20)
    # validity threshold (1+mu)/(1-mu) ~ 1.04: l - 2 k0 t >= 2 in integers
    edge = cb.BoundInputs(bond_dim=2, mpu_bond_dim=4, mu=0.02, k0=1, l=8, t=3)
    assert cb.thm2_bound(edge) > 0
    with pytest.raises(ValidityViolated):
        cb.thm2_bound(cb.BoundInputs(bond_dim=2, mpu_bond_dim=4, mu=0.02,
                                     k0=1, l=6, t=3))


def test_thm2_bound_mu_zero():
    inputs = cb.BoundInputs(bond_dim=2, mpu_bond_dim=4, mu=0.0, k0=1, l=10, t=2)
    assert cb.thm2_bound(inputs) == 0.0
    with pytest.raises(ValidityViolated):
        cb.thm2_bound(cb.BoundInputs(bond_dim=2, mpu_bond_dim=4, mu=0.0,
                                     k0=1, l=9, t=3))


def test_finite_thm_bound_limits():
    ch = M.transfer_analysis(models.z2z2_mps(0.49, 0.49))
    base = dict(bond_dim=2, mpu_bond_dim=4, mu=0.02, k0=1, l=20, t=2)
    inf_like = cb.finite_thm_bound(cb.BoundInputs(**base, ring_length=10000,
                                                  spectrum=ch.spectrum))
    thm2 = cb.thm2_bound(cb.BoundInputs(**base))
    assert inf_like == pytest.approx(thm2, rel=1e-8)
    # symmetric ring: both min branches coincide
    sym = cb.BoundInputs(**base, ring_length=40, spectrum=ch.spectrum)
    b_seg = cb._b_alpha(0.5, 2, 4, 0.02, 1, 20, 2) + cb._b_alpha(0.75, 2, 4, 0.02, 1, 20, 2)
    trace = float(np.real(np.sum(ch.spectrum ** 40)))
    cross = 4 * cb._b_alpha(1.0, 2, 4, 0.02, 1, 20, 2) ** 2
    assert cb.finite_thm_bound(sym) == pytest.approx((b_seg + cross) / trace)


def test_thm2_dominates_convergence_chain():
    # theorem bound >= sqrt(2D) * worst-case convergence bound at the
    # shifted length >= measured gap, inside the validity window
    from sptquench import mpu as mpulib
    psi = models.z2z2_mps(0.49, 0.49)
    ch = M.transfer_analysis(psi)
    poly = cb.minimal_polynomial(ch.matrix_rep - ch.matrix_rep_inf)
    step = mpulib.ising_zz_mpu(0.4, np.array([1.0, 1.0, -1.0, -1.0]))
    mpulib.validate(step, (2,))
    k0, _ = mpulib.simpleness_k0(step, 2)
    state = psi
    for t in range(3):
        state = mpulib.apply(step, state)
    ch_t = M.transfer_analysis(state)
    c_t = np.sqrt(state.bond_dim / 2.0)
    for l in (12, 16, 20):
        window = l - 2 * k0 * 3
        middle = np.sqrt(2 * psi.bond_dim) * cb.convergence_bound(
            window, poly, c_t, "worst_case")
        top = cb.thm2_bound(cb.BoundInputs(bond_dim=psi.bond_dim,
                                           mpu_bond_dim=step.bond_dim,
                                           mu=ch.mu, k0=k0, l=l, t=3))
        gap = M.mb_gap(M.es_segment(state, l, ch_t), 2)
        assert gap <= middle + 1e-12
        assert middle <= top * (1 + 1e-12)


def test_finite_thm_bound_mu_zero_window():
    inputs = cb.BoundInputs(bond_dim=2, mpu_bond_dim=4, mu=0.0, k0=1, l=10,
                            t=1, ring_length=24)
    assert cb.finite_thm_bound(inputs) == 0.0


def test_channel_distance_decreasing_beyond_transients():
    e_mat, e_inf = random_unital_channel(3, 3)
    ch = type("C", (), {"matrix_rep": e_mat, "matrix_rep_inf": e_inf})()
    vals = [cb.channel_distance(ch, l) for l in range(3, 30)]
    floor = 1e-13
    assert all(b <= a + floor for a, b in zip(vals, vals[1:]))


def test_bound_chain_with_measurable_gaps():
    # at mu = 0.4 the measured gaps sit far above the eigensolver floor,
    # so domination is tested with teeth; the evolved Gram route is also
    # pinned against the brute-force dense reduced density matrix.
    from sptquench import mpu as mpulib
    psi = models.z2z2_mps(0.3, 0.3)
    ch0 = M.transfer_analysis(psi)
    assert ch0.mu == pytest.approx(0.4, abs=1e-12)
    zz = mpulib.ising_zz_mpu(0.4, np.array([1.0, 1.0, -1.0, -1.0]))
    mpulib.validate(zz, (2,))
    k0, _ = mpulib.simpleness_k0(zz, 2)
    state = psi
    for t in range(3):
        if t > 0:
            state = mpulib.apply(zz, state)
        ch = M.transfer_analysis(state)
        for l in (8, 12, 16):
            gap = M.mb_gap(M.es_segment(state, l, ch), 2)
            assert gap > 1e-8  # non-vacuous
            weyl = np.sqrt(2 * state.bond_dim) * cb.channel_distance(ch, l)
            assert gap <= weyl + 1e-12
            window = l - 2 * k0 * t
            if window >= (1 + ch0.mu) / (1 - ch0.mu):
                thm2 = cb.thm2_bound(cb.BoundInputs(
                    bond_dim=2, mpu_bond_dim=zz.bond_dim, mu=ch0.mu,
                    k0=k0, l=l, t=t))
                assert gap <= thm2
    ring = M.es_finite_ring(state, 4, 10, M.transfer_analysis(state))
    rho = M.dense_rdm_segment(state, 10, 4)
    vals = np.sort(np.linalg.eigvalsh(rho))[::-1]
    k = min(int(np.sum(vals > 1e-13)), len(ring.values))
    assert np.max(np.abs(vals[:k] - ring.values[:k])) < 1e-10


def test_finite_ring_bound_dominates_measured():
    from sptquench import mpu as mpulib
    psi = models.z2z2_mps(0.3, 0.3)
    ch0 = M.transfer_analysis(psi)
    zz = mpulib.ising_zz_mpu(0.4, np.array([1.0, 1.0, -1.0, -1.0]))
    mpulib.validate(zz, (2,))
    k0, _ = mpulib.simpleness_k0(zz, 2)
    state = psi
    for t in range(3):
        if t > 0:
            state = mpulib.apply(zz, state)
        ch = M.transfer_analysis(state)
        for l, ring in ((8, 20), (10, 20), (8, 24)):
            gap = M.mb_gap(M.es_finite_ring(state, l, ring, ch), 2)
            bound = cb.finite_thm_bound(cb.BoundInputs(
                bond_dim=2, mpu_bond_dim=zz.bond_dim, mu=ch0.mu, k0=k0,
                l=l, t=t, ring_length=ring, spectrum=ch0.spectrum))
            assert gap > 1e-8  # non-vacuous
            assert gap <= bound


def test_fixed_point_ring_degeneracy_exact_in_window():
    # mu = 0: the four-fold ring degeneracy is exact until the light cones
    # from both cut edges meet, t ~ l / (2 k0)
    from sptquench import mpu as mpulib
    psi = models.z2z2_mps(0.5, 0.5)
    zz = mpulib.ising_zz_mpu(0.4, np.array([1.0, 1.0, -1.0, -1.0]))
    state = psi
    for t in range(4):
        if t > 0:
            state = mpulib.apply(zz, state)
        ch = M.transfer_analysis(state)
        gap = M.mb_gap(M.es_finite_ring(state, 10, 24, ch), 2)
        assert gap < 1e-12
