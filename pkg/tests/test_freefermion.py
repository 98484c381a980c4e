import numpy as np
import pytest

from sptquench import freefermion as ff
from sptquench import models
from sptquench.errors import (CapTooLarge, GapClosure, GridTooCoarse,
                              NotParticleHole, StripExceeded)

rng = np.random.default_rng(2)

SSH_TOPO = models.ssh(0.5, 1.0)
SSH_TRIV = models.ssh(1.0, 0.5)


def test_bloch_at_ssh_values():
    h0 = ff.bloch_at(SSH_TOPO, 0.0)
    assert np.allclose(h0, [[0.0, -1.5], [-1.5, 0.0]])
    hpi = ff.bloch_at(SSH_TOPO, np.pi)
    assert abs(hpi[0, 1]) == pytest.approx(0.5)


def test_bloch_at_adjoint_relation_and_periodicity():
    k = 0.3 + 0.45j
    h = ff.bloch_at(SSH_TOPO, k)
    assert np.max(np.abs(h.conj().T - ff.bloch_at(SSH_TOPO, np.conj(k)))) < 1e-12
    assert np.max(np.abs(h - ff.bloch_at(SSH_TOPO, k + 2 * np.pi))) < 1e-12
    assert np.max(np.abs(ff.bloch_at(SSH_TOPO, 0.7)
                         - ff.bloch_at(SSH_TOPO, 0.7).conj().T)) < 1e-12


def test_bloch_at_strip_guard():
    decaying = ff.BlochModel({0: np.zeros((1, 1)), 1: [[0.5]]}, decay_kappa=0.3)
    with pytest.raises(StripExceeded):
        ff.bloch_at(decaying, 0.0 + 0.4j)


def test_bloch_projector_k0_closed_form():
    p = ff.bloch_projector(SSH_TOPO, 0.0)
    assert np.max(np.abs(p - 0.5 * np.ones((2, 2)))) < 1e-12


def test_bloch_projector_idempotent_and_adjoint():
    for k in (0.0, 1.1, 0.4 + 0.5j):
        p = ff.bloch_projector(SSH_TOPO, k)
        assert np.max(np.abs(p @ p - p)) < 1e-10
        padj = ff.bloch_projector(SSH_TOPO, np.conj(k)).conj().T
        assert np.max(np.abs(padj - p)) < 1e-9


def test_bloch_projector_matches_biorthogonal_sum():
    from sptquench.linalg import general_eig
    k = 0.3 + 0.4j
    p = ff.bloch_projector(SSH_TOPO, k)
    eig = general_eig(ff.bloch_at(SSH_TOPO, k))
    occ = [i for i in range(2) if eig.values[i].real < 0]
    psum = sum(np.outer(eig.right_vectors[:, i], eig.left_vectors[:, i].conj())
               for i in occ)
    assert np.max(np.abs(p - psum)) < 1e-8


def test_bloch_projector_gap_closure():
    gapless = models.ssh(1.0, 1.0)
    with pytest.raises(GapClosure):
        ff.bloch_projector(gapless, np.pi)


def test_fermi_projector_flat_band():
    sz = np.diag([1.0, -1.0])
    h = ff.RealSpaceHamiltonian(cells=4, bands=2,
                                matrix=np.kron(np.eye(4), -sz) + 0j)
    p = ff.fermi_projector(h)
    assert p.occupied_count == 4
    assert p.check()


def test_fermi_projector_dimerized_pattern():
    # J1 = 0: exact +-1/2 entries on the cross-cell dimers, open chain.
    # The two decoupled edge sites host exact zero modes, so the gap guard
    # is disabled; whichever zero combination lands below zero still only
    # contributes +-1/2 entries.
    model = models.ssh(1e-12, 1.0)
    h = ff.real_space_hamiltonian(model, 6, boundary="open")
    p = ff.fermi_projector(h, gap_tol=0.0)
    mat = p.matrix.real
    nonzero = np.abs(mat) > 1e-9
    assert np.allclose(np.abs(mat[nonzero]), 0.5, atol=1e-9)


def test_evolve_projector_fixed_points():
    h = ff.real_space_hamiltonian(SSH_TOPO, 8)
    p0 = ff.fermi_projector(h)
    p_same = ff.evolve_projector(p0, h, 7.3)
    assert np.max(np.abs(p_same.matrix - p0.matrix)) < 1e-10
    pt = ff.evolve_projector(p0, ff.real_space_hamiltonian(SSH_TRIV, 8), 7.3)
    assert pt.check()
    assert np.trace(pt.matrix).real == pytest.approx(p0.occupied_count)


def test_evolve_projector_k_resolved_idempotent():
    p0 = ff.bloch_projector_grid(SSH_TOPO, 512)
    pt = ff.evolve_projector(p0, SSH_TRIV, 10.0)
    assert pt.check()


def test_sp_es_dimerized_cut():
    # cut through cross-cell dimers: two exact 1/2 modes, rest in {0, 1}
    model = models.ssh(1e-12, 1.0)
    h = ff.real_space_hamiltonian(model, 8)
    p = ff.fermi_projector(h, gap_tol=1e-14)
    rep = ff.sp_es(p, 4)
    halves = np.sum(np.abs(rep.values - 0.5) < 1e-10)
    assert halves == 2
    rest = rep.values[np.abs(rep.values - 0.5) > 1e-10]
    assert np.all((rest < 1e-10) | (rest > 1 - 1e-10))


def test_sp_es_topological_ground_state():
    p = ff.bloch_projector_grid(SSH_TOPO, 1024)
    rep = ff.sp_es(p, 40)
    assert ff.sp_gap(rep) < 1e-9


def test_sp_es_grid_guard():
    p = ff.bloch_projector_grid(SSH_TOPO, 64)
    with pytest.raises(GridTooCoarse):
        ff.sp_es(p, 20)


def test_sp_gap_arithmetic():
    rep = ff.SpectrumReport(values=np.array([0.6, 0.4]))
    assert ff.sp_gap(rep) == pytest.approx(0.2)
    rep = ff.SpectrumReport(values=np.array([0.5, 0.5, 0.0, 1.0]))
    assert ff.sp_gap(rep) == pytest.approx(0.0)


def test_sp_es_particle_hole_pairing():
    p = ff.bloch_projector_grid(SSH_TOPO, 1024)
    pt = ff.evolve_projector(p, SSH_TRIV, 17.0)
    vals = np.sort(ff.sp_es(pt, 12).values)
    assert np.max(np.abs(vals + vals[::-1] - 1.0)) < 1e-9


def test_mb_es_from_sp_small_cases():
    rep = ff.SpectrumReport(values=np.array([0.5]))
    assert np.allclose(ff.mb_es_from_sp(rep).values, [0.5, 0.5])
    rep = ff.SpectrumReport(values=np.array([0.5, 0.5]))
    assert np.allclose(ff.mb_es_from_sp(rep).values, 0.25)


def test_mb_es_from_sp_cap_and_normalization():
    rep = ff.SpectrumReport(values=rng.uniform(0, 1, size=10))
    with pytest.raises(CapTooLarge):
        ff.mb_es_from_sp(rep, mode_cap=21)
    full = ff.mb_es_from_sp(rep)
    assert np.sum(full.values) == pytest.approx(1.0, abs=1e-8)


def test_entropy_bounds():
    p = ff.bloch_projector_grid(SSH_TOPO, 512)
    rep = ff.sp_es(p, 10)
    s = ff.entanglement_entropy(rep)
    assert 0.0 <= s <= 10 * 2 * np.log(2)


def test_z2_index_ssh_phases():
    for (j1, j2, expect) in ((0.5, 1.0, -1), (1.0, 0.5, 1)):
        h = ff.real_space_hamiltonian(models.ssh(j1, j2), 10)
        p = ff.fermi_projector(h)
        assert ff.z2_index(p) == expect


def test_z2_index_conserved_during_quench():
    h0 = ff.real_space_hamiltonian(SSH_TOPO, 10)
    p0 = ff.fermi_projector(h0)
    h1 = ff.real_space_hamiltonian(SSH_TRIV, 10)
    for t in (0.5, 4.0, 21.0):
        assert ff.z2_index(ff.evolve_projector(p0, h1, t)) == -1


def test_z2_index_squares_to_one():
    h = ff.real_space_hamiltonian(SSH_TOPO, 8)
    nu = ff.z2_index(ff.fermi_projector(h))
    assert nu ** 2 == 1


def test_halfchain_structure_identities():
    h0 = ff.real_space_hamiltonian(SSH_TOPO, 12)
    p0 = ff.fermi_projector(h0)
    h1 = ff.real_space_hamiltonian(SSH_TRIV, 12)
    for t in (0.0, 5.0):
        pt = ff.evolve_projector(p0, h1, t)
        rd, ro, checks = ff.halfchain_structure(pt)
        assert checks["anticommutator_norm"] < 1e-10
        assert checks["involution_residual"] < 1e-10
        assert checks["interior_pairwise_degenerate"]
        es = np.sort(np.linalg.eigvalsh((np.eye(rd.shape[0]) - 1j * rd) / 2))
        direct = np.sort(ff.sp_es(pt, 6).values)
        assert np.max(np.abs(es - direct)) < 1e-10


def test_halfchain_a_squared():
    # R_o is well conditioned only for small halves
    p = ff.fermi_projector(ff.real_space_hamiltonian(SSH_TRIV, 4))
    _, _, checks = ff.halfchain_structure(p)
    assert checks["a_squared_residual"] < 1e-10


def test_halfchain_rejects_asymmetric():
    h = ff.real_space_hamiltonian(SSH_TOPO, 8, boundary="open")
    p = ff.fermi_projector(h, gap_tol=1e-12)
    with pytest.raises(ff.NotSymmetricBipartition):
        ff.halfchain_structure(p)


def test_phs_real_form_rejects_broken_symmetry():
    h = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = 0.5 * (h + h.conj().T)
    with pytest.raises(NotParticleHole):
        ff.phs_real_form(h)


def test_finite_size_identity():
    res = ff.finite_size_identity_residual(SSH_TOPO, 24, 6)
    assert res < 1e-6
    res0 = ff.finite_size_identity_residual(SSH_TOPO, 12, 0)
    res_l = ff.finite_size_identity_residual(SSH_TOPO, 16, 0)
    assert res0 > res  # n_max = 0 keeps the full finite-size correction
    assert res_l < res0  # which decays with L


def test_symmetry_dynamical_stability_table():
    assert ff.symmetry_dynamical_stability(unitary=True, symmetric=True)
    assert not ff.symmetry_dynamical_stability(unitary=False, symmetric=True)
    assert not ff.symmetry_dynamical_stability(unitary=True, symmetric=False)
    assert ff.symmetry_dynamical_stability(unitary=False, symmetric=False)


def test_bloch_projector_contour_singular_beyond_strip():
    # beyond the admissible strip the continued band collides with the
    # contour and the resolvent blows up
    from sptquench.errors import ContourSingular
    with pytest.raises((ContourSingular, GapClosure)):
        ff.bloch_projector(SSH_TOPO, np.pi + 0.8j)


def test_fock_oracle_larger_systems():
    # product rule equals the dense reduced spectrum beyond the minimal size
    from sptquench.validate import fock_es_oracle, _projector_of
    gen = np.random.default_rng(31)
    for n, l in ((8, 4), (10, 5)):
        h = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
        h = 0.5 * (h + h.conj().T)
        h -= np.median(np.linalg.eigvalsh(h)) * np.eye(n)
        if np.min(np.abs(np.linalg.eigvalsh(h))) < 1e-3:
            continue
        p = ff.FermiProjector(matrix=_projector_of(h), bands=1)
        mb = ff.mb_es_from_sp(ff.sp_es(p, l))
        oracle = fock_es_oracle(h, l)
        k = min(mb.values.size, oracle.size)
        assert np.max(np.abs(mb.values[:k] - oracle[:k])) < 1e-10


def test_halfchain_det_rd_vanishes_only_when_topological():
    # unitary R with Pf R = -1 forces det R_d = 0 (exact zero modes)
    p_top = ff.fermi_projector(ff.real_space_hamiltonian(SSH_TOPO, 12))
    rd, _, _ = ff.halfchain_structure(p_top)
    assert np.min(np.abs(np.linalg.eigvalsh(1j * rd))) < 1e-12
    p_triv = ff.fermi_projector(ff.real_space_hamiltonian(SSH_TRIV, 12))
    rd, _, _ = ff.halfchain_structure(p_triv)
    assert np.min(np.abs(np.linalg.eigvalsh(1j * rd))) > 1e-3
