"""Lieb-Robinson constants, velocities, gap-bound curves, and the
velocity-monotonicity machinery.

The central quantities for a quench (model0 -> model) at imaginary wave
number kappa:

* ``v``: kappa^-1 max_k,a,b Im(eps_a - eps_b) of the continued target bands;
* ``C``: the k-integral of the squared eigenvector-norm sum times the norm
  of the continued initial projector;
* the gap bound ``C exp(-kappa (l - v t))`` and its finite-size variants.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import freefermion as ff
from . import linalg
from .errors import (
    BandTrackingFailure,
    ContourSingular,
    DefectivePoint,
    GapClosure,
    InvalidGeometry,
    NoConvergence,
    NoValidStrip,
)


@dataclass
class LRConstants:
    kappa: float
    v: float
    C: float
    strip_valid: bool


@dataclass
class VelocityReport:
    v_max: float
    v_mr: float
    per_k_group_velocities: np.ndarray
    kgrid: np.ndarray


def _strip_point_ok(model0, model, k, kappa, contour):
    """Analyticity + diagonalizability probes at one complex wave number."""
    try:
        ff.bloch_projector(model0, k + 1j * kappa, contour=contour)
    except (ContourSingular, GapClosure):
        return False
    eig = linalg.general_eig(ff.bloch_at(model, k + 1j * kappa))
    return not eig.defective_flag


def continuation_strip(model0, model, kappa_max_scan, n_kappa=64, n_k=256):
    """Largest kappa on a scan grid valid for both Theorem-1 conditions.

    Scans kappa ascending; at each kappa every k on a uniform grid must
    keep the initial Bloch projector's contour nonsingular and the target
    Hamiltonian non-defective.
    """
    if model0.gap_at_zero() < ff.GAP_TOL:
        raise NoValidStrip("initial model is gapless")
    contour = ff.riesz_contour(model0)
    kappas = np.linspace(kappa_max_scan / n_kappa, kappa_max_scan, n_kappa)
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    best = None
    for kappa in kappas:
        if all(_strip_point_ok(model0, model, k, kappa, contour) for k in ks):
            best = float(kappa)
        else:
            break
    if best is None:
        raise NoValidStrip(f"even kappa = {kappas[0]:g} fails")
    return best


def _complex_band_data(model, kappa, n_k):
    """Eigen data of H(k + i kappa) on a uniform k-grid, with the kappa
    jitter fallback for isolated defective nodes."""
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    values = []
    norm_products = []
    for k in ks:
        eig = linalg.general_eig(ff.bloch_at(model, k + 1j * kappa))
        if eig.defective_flag:
            eig = linalg.general_eig(ff.bloch_at(model, k + 1j * (kappa + 1e-6)))
            if eig.defective_flag:
                raise DefectivePoint(k)
        # Gauge <u_L|u_R> = 1 with |u_R| = 1; || |R><L| || = |u_R| |u_L|.
        nr = np.linalg.norm(eig.right_vectors, axis=0)
        nl = np.linalg.norm(eig.left_vectors, axis=0)
        values.append(eig.values)
        norm_products.append(nr * nl)
    return ks, np.array(values), np.array(norm_products)


def lr_constants(model0, model, kappa, c_tol=1e-4, n_k_start=256):
    """Velocity and prefactor of the correlation/gap Lieb-Robinson bound.

    The k-quadratures (trapezoidal on the periodic grid, so exponentially
    convergent for analytic integrands) are refined by grid doubling until
    C changes by less than ``c_tol``.

    The projector factor is 2 ||P_{0<}(k + i kappa)||^2 - 1, which
    dominates the operator norm (any idempotent has norm >= 1) and is the
    quantity behind the closed-form SSH prefactor; with it the numeric and
    closed-form routes agree.
    """
    n_k = n_k_start
    prev_c = None
    while n_k <= 1 << 18:
        ks, values, norm_products = _complex_band_data(model, kappa, n_k)
        im_spread = np.max(values.imag, axis=1) - np.min(values.imag, axis=1)
        v = float(np.max(im_spread)) / kappa
        contour = ff.riesz_contour(model0)
        proj_factors = np.empty(n_k)
        for i, k in enumerate(ks):
            p = ff.bloch_projector(model0, k + 1j * kappa, contour=contour)
            proj_factors[i] = 2.0 * np.linalg.norm(p, 2) ** 2 - 1.0
        integrand = np.sum(norm_products, axis=1) ** 2 * proj_factors
        c = float(np.mean(integrand))
        if prev_c is not None and abs(c - prev_c) < c_tol:
            return LRConstants(kappa=float(kappa), v=v, C=c, strip_valid=True)
        prev_c = c
        n_k *= 2
    raise NoConvergence("C quadrature did not settle under grid doubling")


def group_velocities(model, n_k=4096):
    """Group velocities d eps/d k with band continuity tracking.

    Five-point central differences on a uniform grid.  Bands are tracked
    through the grid by nearest-value continuation; a near-degenerate
    crossing that makes the assignment ambiguous raises
    BandTrackingFailure with the offending k.
    """
    ks = np.linspace(-np.pi, np.pi, n_k, endpoint=False)
    d = model.bands
    energies = np.empty((n_k, d))
    for i in range(n_k):
        energies[i] = np.sort(np.linalg.eigvalsh(ff.bloch_at(model, ks[i])))
    if d > 1:
        # sorted-order continuation is only valid away from band contact
        gaps = np.min(np.diff(energies, axis=1), axis=1)
        if np.min(gaps) < 1e-12:
            raise BandTrackingFailure(ks[int(np.argmin(gaps))])
    h = ks[1] - ks[0]
    vel = np.empty_like(energies)
    for i in range(n_k):
        vel[i] = (-energies[(i + 2) % n_k] + 8 * energies[(i + 1) % n_k]
                  - 8 * energies[(i - 1) % n_k] + energies[(i - 2) % n_k]) / (12 * h)
    v_max = float(np.max(np.abs(vel)))
    v_mr = float(np.max(np.max(vel, axis=1) - np.min(vel, axis=1)))
    return VelocityReport(v_max=v_max, v_mr=v_mr, per_k_group_velocities=vel,
                          kgrid=ks)


def gap_bound(consts, l, t):
    """Entanglement-gap Lieb-Robinson bound C exp(-kappa (l - v t))."""
    return consts.C * math.exp(-consts.kappa * (l - consts.v * t))


def finite_size_bounds(consts, l, ring_length, t):
    """Finite-lattice corrections to the gap bound.

    Returns ``(segment_correction, finite_gap_bound)``: the former bounds
    the norm difference between the finite- and infinite-lattice segment
    correlation matrices, the latter the entanglement gap on a ring of
    ``ring_length`` cells.  The finite bound vanishes identically at
    ring_length = 2 l and recovers the infinite-lattice form as
    ring_length -> infinity.
    """
    l = int(l)
    L = int(ring_length)
    if not 1 <= l < L:
        raise InvalidGeometry(f"need 1 <= l < L, got l={l}, L={L}")
    kap, v, c = consts.kappa, consts.v, consts.C

    def inv_expm1(x):
        # 1/(e^x - 1) without overflow; underflows to 0 for huge x
        return math.exp(-x) if x > 700.0 else 1.0 / math.expm1(x)

    grow = math.exp(kap * v * t)
    seg = 2.0 * c * grow * math.sinh(kap * l) * inv_expm1(kap * L) / math.sinh(kap)
    lcm = math.lcm(L, 2 * l)
    fin = (4.0 * c * math.sinh(kap * l) / math.sinh(kap)) * grow * (
        inv_expm1(kap * L) + inv_expm1(2.0 * kap * l) - 2.0 * inv_expm1(kap * lcm))
    return seg, fin


def velocity_monotonicity_scan(model, kappa_grid, slack=1e-9, n_k=512):
    """Check v(kappa) is nondecreasing along an ascending kappa grid.

    The caller vouches that every kappa lies inside the valid strip.
    Returns ``(monotone, table)`` with table rows (kappa, v).
    """
    rows = []
    for kappa in kappa_grid:
        _, values, _ = _complex_band_data(model, kappa, n_k)
        spread = np.max(values.imag, axis=1) - np.min(values.imag, axis=1)
        rows.append((float(kappa), float(np.max(spread)) / kappa))
    table = np.array(rows)
    monotone = bool(np.all(np.diff(table[:, 1]) >= -slack))
    return monotone, table


def majorization_kernel(k, kappa1, kappa2, image_terms=64):
    """Periodized positive kernel relating Im-dispersion profiles at two
    imaginary wave numbers (kappa1 > kappa2 >= 0).

    Summing Y over 2 pi images yields a unit-mass kernel whose n-th
    Fourier coefficient is kappa1 sinh(n kappa2) / (kappa2 sinh(n kappa1)).
    """
    if not (kappa1 > kappa2 >= 0.0):
        raise ValueError("need kappa1 > kappa2 >= 0")

    def y(x):
        arg = np.pi * x / kappa1
        if abs(arg) > 700.0:  # cosh would overflow; the tail is 0
            return 0.0
        if kappa2 == 0.0:
            return np.pi / (2.0 * kappa1 * (np.cosh(arg) + 1.0))
        return np.sin(np.pi * kappa2 / kappa1) / (
            2.0 * kappa2 * (np.cosh(arg) + np.cos(np.pi * kappa2 / kappa1)))

    total = 0.0
    for n in range(-image_terms, image_terms + 1):
        total += y(k + 2.0 * np.pi * n)
    return float(total)


def majorization_fourier_coefficient(n, kappa1, kappa2):
    """Closed-form n-th Fourier coefficient of the majorization kernel."""
    if n == 0:
        return 1.0
    if kappa2 == 0.0:
        return n * kappa1 / math.sinh(n * kappa1)
    return kappa1 * math.sinh(n * kappa2) / (kappa2 * math.sinh(n * kappa1))


def discrete_harmonic_check(boundary, rows, max_iter=200000, residual_tol=1e-10):
    """Row-maximum convexity of a discrete harmonic array.

    Solves the discrete Laplace equation on a periodic strip of height
    2*rows with antisymmetric Dirichlet data (+boundary on top, -boundary
    on bottom) by Jacobi relaxation, then verifies that the row-maximum
    differences max_j f[j, r+1] - max_j f[j, r] are nondecreasing with r,
    which implies monotonicity of max_j f[j, r] / r.

    Returns ``(monotone, field)`` with field indexed [row 0..rows][j].
    """
    boundary = np.asarray(boundary, dtype=float)
    if rows < 3:
        raise ValueError("need rows >= 3")
    width = boundary.size
    # rows -rows..+rows; antisymmetry makes row 0 vanish identically.
    height = 2 * rows + 1
    f = np.zeros((height, width))
    f[-1] = boundary
    f[0] = -boundary
    for it in range(max_iter):
        interior = 0.25 * (np.roll(f, 1, axis=1)[1:-1]
                           + np.roll(f, -1, axis=1)[1:-1]
                           + f[2:] + f[:-2])
        residual = np.max(np.abs(interior - f[1:-1]))
        f[1:-1] = interior
        if residual < residual_tol:
            break
    else:
        raise NoConvergence(f"Jacobi stalled at residual {residual:g}")
    upper = f[rows:]
    row_max = np.max(upper, axis=1)
    diffs = np.diff(row_max)
    monotone = bool(np.all(np.diff(diffs) >= -1e-12))
    return monotone, upper
