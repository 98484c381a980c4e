import numpy as np
import pytest

from sptquench import models
from sptquench import mps as M
from sptquench.errors import NonInjective, NotSymmetric, TooFewValues

rng = np.random.default_rng(4)


def random_injective(d, bond):
    return M.UniformMPS(rng.normal(size=(d, bond, bond))
                        + 1j * rng.normal(size=(d, bond, bond)))


def test_z2z2_tensor_is_unital():
    psi = models.z2z2_mps(0.49, 0.49)
    assert psi.unital_residual() < 1e-12


def test_canonicalize_product_state():
    tensors = np.zeros((2, 1, 1), dtype=complex)
    tensors[0] = 1.0
    out = M.canonicalize(M.UniformMPS(tensors))
    assert out.unital_residual() < 1e-14


def test_canonicalize_random_injective():
    psi = random_injective(3, 3)
    can = M.canonicalize(psi)
    assert can.unital_residual() < 1e-12
    # physical state unchanged: dense overlap of normalized ring states
    assert M.dense_overlap(psi, can, 5) == pytest.approx(1.0, abs=1e-10)


def test_canonicalize_rejects_cat_state():
    # block-diagonal tensors: two decoupled sectors, degenerate fixed point
    tensors = np.zeros((2, 2, 2), dtype=complex)
    tensors[0, 0, 0] = 1.0
    tensors[1, 1, 1] = 1.0
    with pytest.raises(NonInjective):
        M.canonicalize(M.UniformMPS(tensors))


def test_transfer_analysis_pauli_channel():
    psi = models.z2z2_mps(0.49, 0.49)
    ch = M.transfer_analysis(psi)
    assert np.max(np.abs(ch.Lambda - 0.5 * np.eye(2))) < 1e-12
    assert ch.mu == pytest.approx(0.02, abs=1e-12)
    mags = np.sort(np.abs(ch.spectrum))[::-1]
    assert np.allclose(mags, [1.0, 0.02, 0.02, 0.0004], atol=1e-12)


def test_transfer_analysis_product_state_mu_zero():
    tensors = np.zeros((2, 1, 1), dtype=complex)
    tensors[0] = 1.0
    ch = M.transfer_analysis(M.canonicalize(M.UniformMPS(tensors)))
    assert ch.mu == pytest.approx(0.0, abs=1e-12)


def test_es_infinite_products():
    psi = M.canonicalize(random_injective(3, 2))
    ch = M.transfer_analysis(psi)
    lam = np.linalg.eigvalsh(ch.Lambda)
    rep = M.es_infinite(psi, ch)
    expect = np.sort(np.outer(lam, lam).reshape(-1))[::-1]
    assert np.allclose(rep.values, expect)


def test_es_infinite_spt_fourfold():
    rep = M.es_infinite(models.z2z2_mps(0.3, 0.4))
    assert rep.values.size == 4
    assert np.max(np.abs(rep.values - 0.25)) < 1e-12


def test_es_segment_fixed_point():
    psi = models.z2z2_mps(0.5, 0.5)
    for l in (1, 4, 8):
        vals = M.es_segment(psi, l).values
        assert np.allclose(vals, 0.25, atol=1e-12)


def test_es_segment_cluster_width_bound():
    psi = models.z2z2_mps(0.49, 0.49)
    ch = M.transfer_analysis(psi)
    from sptquench.channelbounds import channel_distance
    for l in (2, 5, 8):
        rep = M.es_segment(psi, l, ch)
        gap = M.mb_gap(rep, 2)
        assert gap <= np.sqrt(2 * psi.bond_dim) * channel_distance(ch, l) + 1e-12


def test_es_segment_converges_to_infinite():
    from sptquench.channelbounds import channel_distance
    psi = M.canonicalize(random_injective(4, 2))
    ch = M.transfer_analysis(psi)
    inf_vals = M.es_infinite(psi, ch).values
    prev = np.inf
    for l in (4, 8, 16):
        vals = M.es_segment(psi, l, ch).values[:4]
        dev = np.max(np.abs(vals - inf_vals))
        assert dev <= np.sqrt(2 * psi.bond_dim) * channel_distance(ch, l) + 1e-12
        assert dev <= prev + 1e-12
        prev = dev


def test_es_segment_matches_dense_long_chain():
    psi = models.z2z2_mps(0.49, 0.49)
    seg = M.es_segment(psi, 4)
    dense = M.dense_es_ring(psi, 14, 4)
    k = min(len(seg.values), len(dense.values))
    assert np.max(np.abs(seg.values[:k] - dense.values[:k])) < 1e-8


def test_es_finite_ring_vs_dense():
    psi = models.z2z2_mps(0.49, 0.49)
    ring = M.es_finite_ring(psi, 4, 8)
    vec = M.dense_state(psi, 8)
    svals = np.sort(np.linalg.svd(vec.reshape(256, 256),
                                  compute_uv=False) ** 2)[::-1]
    k = int(np.sum(svals > 1e-13))
    assert np.max(np.abs(svals[:k] - ring.values[:k])) < 1e-10


def test_es_finite_ring_normalization_and_product_state():
    psi = models.z2z2_mps(0.37, 0.61)
    ring = M.es_finite_ring(psi, 3, 9)
    assert np.sum(ring.values) == pytest.approx(1.0, abs=1e-8)
    prod = np.zeros((2, 1, 1), dtype=complex)
    prod[0] = 1.0
    state = M.canonicalize(M.UniformMPS(prod))
    vals = M.es_finite_ring(state, 2, 5).values
    assert np.allclose(vals, [1.0])


def test_gram_route_both_orientations_agree():
    # swapping segment and complement gives the same nonzero spectrum
    psi = models.z2z2_mps(0.49, 0.49)
    a = M.es_finite_ring(psi, 3, 8).values
    b = M.es_finite_ring(psi, 5, 8).values
    k = min(a.size, b.size)
    assert np.max(np.abs(a[:k] - b[:k])) < 1e-10


def test_mb_gap():
    rep = M.SpectrumReport(values=np.array([0.25, 0.25, 0.25, 0.25]))
    assert M.mb_gap(rep, 2) == 0.0
    rep = M.SpectrumReport(values=np.array([0.3, 0.3, 0.2, 0.2]))
    assert M.mb_gap(rep, 2) == pytest.approx(0.1)
    with pytest.raises(TooFewValues):
        M.mb_gap(M.SpectrumReport(values=np.array([0.5, 0.5])), 2)


def test_compress_support_removes_padding():
    psi = models.z2z2_mps(0.49, 0.49)
    padded = np.zeros((4, 5, 5), dtype=complex)
    padded[:, :2, :2] = psi.tensors
    out = M.compress_support(M.UniformMPS(padded))
    assert out.bond_dim == 2
    assert M.dense_overlap(out, psi, 5) == pytest.approx(1.0, abs=1e-10)


def test_projective_rep_z2z2():
    psi = models.z2z2_mps(0.49, 0.49)
    pr = M.projective_rep(psi, models.z2z2_regular_rep(), order=2)
    assert pr.cocycle_class == 1
    # the virtual action is the Pauli family (up to phase)
    for g, pauli in (((1, 0), np.array([[0, 1], [1, 0]])),
                     ((0, 1), np.array([[0, -1j], [1j, 0]]))):
        v = pr.v[g]
        overlap = abs(np.trace(v.conj().T @ pauli)) / 2
        assert overlap == pytest.approx(1.0, abs=1e-8)


def test_projective_rep_trivial_product():
    # symmetric product state: trivial class
    tensors = np.zeros((4, 1, 1), dtype=complex)
    tensors[0] = 1.0
    psi = M.canonicalize(M.UniformMPS(tensors))
    pr = M.projective_rep(psi, models.z2z2_regular_rep(), order=2)
    assert pr.cocycle_class == 0


def test_projective_rep_cocycle_models():
    for n, nu in ((2, 1), (3, 1), (3, 2), (4, 1)):
        psi = M.canonicalize(models.cocycle_mps(n, nu))
        pr = M.projective_rep(psi, models.cocycle_regular_rep(n), order=n)
        assert pr.cocycle_class == nu


def test_projective_rep_rejects_asymmetric_state():
    psi = M.canonicalize(random_injective(4, 2))
    with pytest.raises(NotSymmetric):
        M.projective_rep(psi, models.z2z2_regular_rep(), order=2)


def test_nondegenerate_fixed_point_implies_trivial_class():
    # Lemma contrapositive: an injective symmetric MPS with nondegenerate
    # Lambda must carry a trivial cocycle.  Built with commuting virtual
    # signs V_a = diag(1,1,-1), V_b = diag(1,-1,1): each physical sector
    # populates the virtual entries of matching sign signature.
    patterns = {0: [(0, 0), (1, 1), (2, 2)],   # (+,+)
                1: [(0, 1), (1, 0)],           # (+,-)
                2: [(0, 2), (2, 0)],           # (-,+)
                3: [(1, 2), (2, 1)]}           # (-,-)
    tensors = np.zeros((4, 3, 3), dtype=complex)
    gen = np.random.default_rng(8)
    for j, cells in patterns.items():
        for r, s in cells:
            tensors[j, r, s] = gen.normal() + 1j * gen.normal()
    psi = M.canonicalize(M.UniformMPS(tensors))
    ch = M.transfer_analysis(psi)
    lam = np.sort(np.linalg.eigvalsh(ch.Lambda))
    assert np.min(np.diff(lam)) > 1e-3  # nondegenerate
    pr = M.projective_rep(psi, models.z2z2_regular_rep(), order=2)
    assert pr.cocycle_class == 0


def test_spectra_match_helper():
    a = np.array([1.0, 0.02, 0.02, 0.0004])
    b = np.concatenate([a + 1e-12, np.full(12, 1e-8)])
    assert M.spectra_match_up_to_zeros(a, b)
    assert not M.spectra_match_up_to_zeros(a, b + 1e-4)
