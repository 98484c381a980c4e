import numpy as np
import pytest

from sptquench import freefermion as ff
from sptquench import lrbounds, models
from sptquench.errors import InvalidGeometry, NoValidStrip

TOPO = models.ssh(0.5, 1.0)
TRIV = models.ssh(1.0, 0.5)


@pytest.fixture(scope="module")
def consts():
    return lrbounds.lr_constants(TOPO, TRIV, 0.6)


def test_continuation_strip_ssh():
    kappa = lrbounds.continuation_strip(TOPO, TRIV, np.log(2.0), n_kappa=16,
                                        n_k=64)
    assert 0.0 < kappa <= np.log(2.0)
    assert kappa > 0.5  # admissible almost up to ln 2


def test_continuation_strip_gapless_fails():
    with pytest.raises(NoValidStrip):
        lrbounds.continuation_strip(models.ssh(1.0, 1.0), TRIV, 0.5)


def test_lr_constants_prefactor(consts):
    assert consts.C == pytest.approx(12.225, abs=0.01)
    assert consts.strip_valid


def test_lr_constants_matches_closed_form(consts):
    closed = models.ssh_analytic_C(0.5, 1.0, 1.0, 0.5, 0.6)
    assert consts.C == pytest.approx(closed, abs=0.01)


def test_velocity_kappa_to_zero_reaches_relative_velocity():
    small = lrbounds.lr_constants(TOPO, TRIV, 0.01)
    report = lrbounds.group_velocities(TRIV)
    assert small.v == pytest.approx(report.v_mr, rel=0.02)
    assert small.v == pytest.approx(2 * report.v_max, rel=0.02)


def test_group_velocities_ssh():
    report = lrbounds.group_velocities(TRIV)
    assert report.v_max == pytest.approx(0.5, abs=1e-6)
    assert report.v_mr == pytest.approx(1.0, abs=1e-6)


def test_phs_term_shifts_vmax_not_vmr():
    plain = lrbounds.group_velocities(TRIV)
    tilted = lrbounds.group_velocities(models.ssh(1.0, 0.5, phs_j=0.5))
    assert abs(tilted.v_mr - plain.v_mr) < 1e-6
    assert tilted.v_max > plain.v_max + 0.1


def test_gap_bound_values(consts):
    assert lrbounds.gap_bound(consts, 40, 0.0) == pytest.approx(
        consts.C * np.exp(-0.6 * 40))
    t_edge = 40 / consts.v
    assert lrbounds.gap_bound(consts, 40, t_edge) == pytest.approx(consts.C)


def test_correlation_domination(consts):
    # C e^{-kappa(|j-j'| - v t)} >= ||<j|P(t)|j'>|| on sampled separations
    p0 = ff.bloch_projector_grid(TOPO, 1024)
    for t in (0.0, 5.0, 15.0):
        pt = ff.evolve_projector(p0, TRIV, t)
        for m in (1, 5, 10, 20):
            block = ff.toeplitz_block(pt, m)
            bound = consts.C * np.exp(-0.6 * (m - consts.v * t))
            assert np.linalg.norm(block, 2) <= bound + 1e-12


def test_finite_size_bounds_geometry(consts):
    _, fin = lrbounds.finite_size_bounds(consts, 20, 40, 3.0)
    assert fin == 0.0
    _, fin_inf = lrbounds.finite_size_bounds(consts, 20, 100000, 3.0)
    lim = (4 * consts.C * np.sinh(0.6 * 20) / np.sinh(0.6)
           * np.exp(0.6 * consts.v * 3.0) / (np.exp(0.6 * 40) - 1.0))
    assert fin_inf == pytest.approx(lim, rel=1e-9)
    _, fin_close = lrbounds.finite_size_bounds(consts, 20, 21, 0.0)
    assert fin_close > 1.0  # O(1) when L is close to l
    with pytest.raises(InvalidGeometry):
        lrbounds.finite_size_bounds(consts, 20, 20, 0.0)


def test_segment_correction_dominates(consts):
    # Lemma bound vs the directly computed norm difference at L = 30, l = 8
    p_fin = ff.fermi_projector(ff.real_space_hamiltonian(TOPO, 30))
    p_inf = ff.bloch_projector_grid(TOPO, 2048)
    c_fin = ff.correlation_matrix(p_fin, 8)
    c_inf = ff.correlation_matrix(p_inf, 8)
    direct = np.linalg.norm(c_fin - c_inf, 2)
    seg, _ = lrbounds.finite_size_bounds(consts, 8, 30, 0.0)
    assert direct <= seg


def test_velocity_monotonicity():
    grid = np.linspace(0.6 / 16, 0.6, 16)
    mono, table = lrbounds.velocity_monotonicity_scan(TRIV, grid)
    assert mono
    assert table.shape == (16, 2)
    single, _ = lrbounds.velocity_monotonicity_scan(TRIV, [0.3])
    assert single


def test_majorization_kernel_positive_and_normalized():
    ks = np.linspace(-np.pi, np.pi, 201)
    vals = np.array([lrbounds.majorization_kernel(k, 1.5, 0.0) for k in ks])
    assert np.all(vals > 0)
    mass = np.trapezoid(vals, ks)
    assert mass == pytest.approx(1.0, abs=1e-6)


def test_majorization_kernel_fourier_coefficients():
    ks = np.linspace(-np.pi, np.pi, 4097)[:-1]
    vals = np.array([lrbounds.majorization_kernel(k, 2.0, 0.7) for k in ks])
    for n in (1, 2, 5):
        numeric = np.real(np.mean(vals * np.exp(-1j * n * ks))) * 2 * np.pi
        closed = lrbounds.majorization_fourier_coefficient(n, 2.0, 0.7)
        assert numeric == pytest.approx(closed, abs=1e-6)


def test_majorization_kernel_k0_limit():
    # kappa2 = 0 closed form at k = 0
    val = lrbounds.majorization_kernel(0.0, 1.3, 0.0, image_terms=0)
    assert val == pytest.approx(np.pi / (4 * 1.3))


def test_discrete_harmonic_zero_and_random():
    mono, field = lrbounds.discrete_harmonic_check(np.zeros(40), 4)
    assert mono and np.max(np.abs(field)) == 0.0
    rng = np.random.default_rng(3)
    mono, _ = lrbounds.discrete_harmonic_check(rng.uniform(0, 1, 500), 9)
    assert mono


def test_discrete_harmonic_sinusoid():
    boundary = np.sin(2 * np.pi * np.arange(120) / 120)
    mono, field = lrbounds.discrete_harmonic_check(boundary, 5)
    assert mono
    # single harmonic: row maxima follow the discrete sinh profile, convex
    row_max = np.max(field, axis=1)
    diffs = np.diff(row_max)
    assert np.all(np.diff(diffs) >= -1e-12)


def test_group_velocities_rejects_band_contact():
    from sptquench.errors import BandTrackingFailure
    with pytest.raises(BandTrackingFailure):
        lrbounds.group_velocities(models.ssh(1.0, 1.0))
