"""Spectral/function-algebra bounds on channel convergence and many-body gaps.

Minimal polynomials, Blaschke products, the sharp and worst-case
Wiener-algebra convergence bounds for unital channels, and the interacting
entanglement-gap bounds (infinite and finite chains) they imply.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleHit, ValidityViolated, VerificationFailure

E2 = math.e ** 2


@dataclass
class MinimalPolynomial:
    """m(z) = prod_j (z - mu_j)^{s_j} with unit leading coefficient."""

    roots: np.ndarray
    jordan_sizes: np.ndarray

    @property
    def degree(self):
        return int(np.sum(self.jordan_sizes))

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(self.roots))) if self.roots.size else 0.0


@dataclass
class BoundInputs:
    """Parameters of the interacting gap bounds.

    ``mu`` is the spectral radius of E - E^inf for the initial MPS, ``k0``
    the Lieb-Robinson length of the MPU, ``t`` the number of steps.  For
    the finite-ring bound, ``ring_length`` and optionally the full channel
    ``spectrum`` (for Tr E^L) are also needed.
    """

    bond_dim: int
    mpu_bond_dim: int
    mu: float
    k0: int
    l: int
    t: int
    ring_length: int = None
    spectrum: np.ndarray = None


def minimal_polynomial(m, cluster_tol=1e-8, verify_tol=1e-6):
    """Minimal polynomial of a matrix via eigenvalue clustering and rank
    tests for the largest Jordan block per cluster.

    Verifies ||m(M)|| < verify_tol * ||M||^degree before returning.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    scale = max(np.linalg.norm(m, 2), 1e-300)
    values = np.linalg.eigvals(m)
    tol = cluster_tol * scale
    roots = []
    sizes = []
    unvisited = np.ones(n, dtype=bool)
    for i in range(n):
        if not unvisited[i]:
            continue
        cluster = np.abs(values - values[i]) < tol
        unvisited[cluster] = False
        mu = np.mean(values[cluster])
        alg = int(np.sum(cluster))
        # Largest Jordan block = first s where ker((M - mu)^s) stops growing.
        shifted = m - mu * np.eye(n)
        power = np.eye(n)
        prev_kernel = 0
        size = 1
        for s in range(1, alg + 1):
            power = power @ shifted
            kernel = n - np.linalg.matrix_rank(power, tol=tol)
            if kernel == prev_kernel:
                size = s - 1
                break
            prev_kernel = kernel
            size = s
            if kernel >= alg:
                break
        roots.append(mu)
        sizes.append(max(size, 1))
    poly = MinimalPolynomial(roots=np.array(roots), jordan_sizes=np.array(sizes))
    residual = np.linalg.norm(_poly_apply(poly, m), 2)
    budget = verify_tol * scale ** poly.degree
    if residual > budget:
        raise VerificationFailure(residual,
                                  f"||m(M)|| = {residual:g} > {budget:g}")
    return poly


def _poly_apply(poly, m):
    n = m.shape[0]
    acc = np.eye(n, dtype=complex)
    for mu, s in zip(poly.roots, poly.jordan_sizes):
        for _ in range(int(s)):
            acc = acc @ (m - mu * np.eye(n))
    return acc


def blaschke(z, poly):
    """Blaschke product prod ((z - mu_j)/(1 - conj(mu_j) z))^{s_j}."""
    if np.any(np.abs(poly.roots) >= 1.0):
        raise ValueError("Blaschke product needs all |mu_j| < 1")
    out = complex(1.0)
    for mu, s in zip(poly.roots, poly.jordan_sizes):
        den = 1.0 - np.conj(mu) * z
        if abs(den) < 1e-14:
            raise PoleHit(f"z = {z} hits the pole of root {mu}")
        out *= ((z - mu) / den) ** int(s)
    return out


def _sup_inverse_blaschke(radius, poly, n_scan=720):
    """sup over |z| = radius of 1/|B(z)| by dense scan plus golden-section
    refinement of the best bracket."""
    phis = np.linspace(0.0, 2.0 * np.pi, n_scan, endpoint=False)
    vals = np.array([1.0 / abs(blaschke(radius * np.exp(1j * p), poly))
                     for p in phis])
    i = int(np.argmax(vals))
    lo = phis[(i - 1) % n_scan]
    hi = phis[(i + 1) % n_scan]
    if hi < lo:
        hi += 2.0 * np.pi

    def f(p):
        return -1.0 / abs(blaschke(radius * np.exp(1j * p), poly))

    golden = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - golden * (b - a)
    d = a + golden * (b - a)
    for _ in range(60):
        if f(c) < f(d):
            b = d
        else:
            a = c
        c = b - golden * (b - a)
        d = a + golden * (b - a)
    best = -f(0.5 * (a + b))
    return max(best, float(np.max(vals)))


def convergence_bound(l, poly, c, mode="sharp"):
    """Upper bound on ||E^l - E^inf|| for a unital channel.

    ``poly`` is the minimal polynomial of E - E^inf and ``c`` bounds
    sup_n ||E^n|| (for a unital channel on a D-dimensional system,
    sqrt(D/2)).  ``sharp`` evaluates the Blaschke-product form, valid for
    l > mu/(1-mu); ``worst_case`` the explicit polynomial-times-exponential
    envelope, valid for l >= (1+mu)/(1-mu).
    """
    l = int(l)
    mu = poly.spectral_radius
    deg = poly.degree
    if mode == "sharp":
        if mu == 0.0:
            return 0.0 if l >= deg else float("inf")
        if l <= mu / (1.0 - mu):
            raise ValidityViolated(f"need l > mu/(1-mu) = {mu / (1 - mu):g}")
        radius = (1.0 + 1.0 / l) * mu
        if radius >= 1.0:
            raise ValidityViolated("scan circle leaves the unit disk")
        sup = _sup_inverse_blaschke(radius, poly)
        return (mu ** (l + 1) * 4.0 * E2 * c * math.sqrt(deg) * (deg + 1)
                / (l * (1.0 - radius) ** 1.5) * sup)
    if mode == "worst_case":
        if mu == 0.0:
            return 0.0 if l >= deg else float("inf")
        if l < (1.0 + mu) / (1.0 - mu):
            raise ValidityViolated(f"need l >= (1+mu)/(1-mu) = {(1 + mu) / (1 - mu):g}")
        return (4.0 * E2 * c * math.sqrt(deg) * (deg + 1)
                * ((1.0 + mu) / (1.0 - mu)) ** 1.5
                * ((1.0 - mu * mu) / mu * l) ** (deg - 1) * mu ** l)
    raise ValueError(f"unknown mode {mode!r}")


def thm2_prefactor(bond_dim, mu):
    """Gap-bound prefactor 4 e^2 D^2 (D^2+1) mu^{1-D^2} (1+mu)^{D^2+1/2}
    (1-mu)^{D^2-5/2} of the infinite-chain theorem."""
    d2 = bond_dim ** 2
    return (4.0 * E2 * d2 * (d2 + 1) * mu ** (1 - d2)
            * (1.0 + mu) ** (d2 + 0.5) * (1.0 - mu) ** (d2 - 2.5))


def thm2_bound(inputs):
    """Many-body entanglement gap bound C (l - 2 k0 t)^{D^2-1} e^{-kappa(l-vt)}
    with kappa = -ln mu and v = 2 k0 - ln D_U / ln mu.

    Valid for l - 2 k0 t >= (1+mu)/(1-mu); the mu = 0 fixed-point case is
    exactly zero once l - 2 k0 t >= D^2.
    """
    d, du = inputs.bond_dim, inputs.mpu_bond_dim
    mu, k0, l, t = inputs.mu, inputs.k0, inputs.l, inputs.t
    window = l - 2 * k0 * t
    if mu == 0.0:
        if window >= d ** 2:
            return 0.0
        raise ValidityViolated("mu = 0 bound needs l - 2 k0 t >= D^2")
    if window < (1.0 + mu) / (1.0 - mu):
        raise ValidityViolated(
            f"need l - 2 k0 t >= (1+mu)/(1-mu) = {(1 + mu) / (1 - mu):g}")
    c = thm2_prefactor(d, mu)
    return c * window ** (d ** 2 - 1) * mu ** window * du ** t


def _b_alpha(alpha, d, du, mu, k0, length, t):
    """Finite-ring building block b_alpha(l, t)."""
    window = length - 2 * k0 * t
    c_alpha = (E2 * 2.0 ** (2.5 - alpha) * d ** (1.5 + alpha) * (d ** 2 + 1)
               * mu ** (1 - d ** 2) * (1.0 + mu) ** (d ** 2 + 0.5)
               * (1.0 - mu) ** (d ** 2 - 2.5))
    # e^{-(l - v_alpha t)/xi} with xi = -1/ln mu and
    # v_alpha = 2 k0 - (alpha + 1/2) ln D_U / ln mu.
    return (c_alpha * window ** (d ** 2 - 1) * mu ** window
            * du ** ((alpha + 0.5) * t))


def finite_thm_bound(inputs):
    """Finite-ring many-body gap bound.

    (Tr E^L)^{-1} [min{b_{1/2}(l) + b_{3/4}(L-l), b_{1/2}(L-l) + b_{3/4}(l)}
    + 4 b_1(l) b_1(L-l)], valid for min(l, L-l) - 2 k0 t >= (1+mu)/(1-mu).
    Falls back to a rigorous lower bound on Tr E^L when the channel
    spectrum is not supplied.
    """
    d, du = inputs.bond_dim, inputs.mpu_bond_dim
    mu, k0, l, t = inputs.mu, inputs.k0, inputs.l, inputs.t
    big_l = inputs.ring_length
    if big_l is None or not 1 <= l < big_l:
        raise ValidityViolated("finite bound needs 1 <= l < ring_length")
    lc = big_l - l
    if mu == 0.0:
        if min(l, lc) - 2 * k0 * t >= d ** 2:
            return 0.0
        raise ValidityViolated("mu = 0 bound needs min(l, L-l) - 2 k0 t >= D^2")
    if min(l, lc) - 2 * k0 * t < (1.0 + mu) / (1.0 - mu):
        raise ValidityViolated("outside the validity window")
    if inputs.spectrum is not None:
        trace_el = float(np.real(np.sum(np.asarray(inputs.spectrum) ** big_l)))
    else:
        trace_el = max(1.0 - (d ** 2 - 1) * mu ** big_l, 1e-12)
    term = min(_b_alpha(0.5, d, du, mu, k0, l, t) + _b_alpha(0.75, d, du, mu, k0, lc, t),
               _b_alpha(0.5, d, du, mu, k0, lc, t) + _b_alpha(0.75, d, du, mu, k0, l, t))
    cross = 4.0 * _b_alpha(1.0, d, du, mu, k0, l, t) * _b_alpha(1.0, d, du, mu, k0, lc, t)
    return (term + cross) / trace_el


def channel_distance(channel, l):
    """||E^l - E^inf|| in the Hilbert-Schmidt superoperator norm."""
    diff = (np.linalg.matrix_power(channel.matrix_rep, int(l))
            - channel.matrix_rep_inf)
    return float(np.linalg.norm(diff, 2))
