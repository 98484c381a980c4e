"""Model zoo: SSH variants, flat-band N-chain, cocycle fixed points, Z2xZ2 MPS.

The stochastic experiment drivers that consume these live in
:mod:`sptquench.experiments`.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import freefermion as ff
from .errors import InvalidCocycle, StripExceeded
from .mps import UniformMPS

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_0 = np.eye(2, dtype=complex)


def ssh(j1, j2, phs_j=None):
    """SSH Bloch model ``H(k) = -(J1 + J2 cos k) sx - J2 sin k sy``.

    With ``phs_j`` set, adds the particle-hole symmetric next-cell hopping
    ``i J (c^dag_{j+1,a} c_{j,a} - h.c.)`` on both sublattices, which tilts
    the bands (H(k) += -2 J sin k * identity) without changing relative
    group velocities.
    """
    if j1 == 0 and j2 == 0:
        raise ValueError("(J1, J2) = (0, 0)")
    h0 = -j1 * SIGMA_X
    h1 = -j2 * np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
    comps = {0: h0, 1: h1}
    if phs_j is not None and phs_j != 0.0:
        comps[1] = comps[1] + 1j * phs_j * SIGMA_0
    return ff.BlochModel(comps)


def ssh_dispersion(j1, j2, k):
    """Closed-form band energies +-|J1 + J2 exp(ik)| at real k."""
    return abs(j1 + j2 * np.exp(1j * k))


def _ssh_F(k, kappa, j1, j2):
    """Closed-form building block of the analytic-continuation norms."""
    num = j1 ** 2 + j2 ** 2 * np.exp(2.0 * kappa) + 2.0 * j1 * j2 * np.exp(kappa) * np.cos(k)
    den = np.sqrt((j1 ** 2 + j2 ** 2) ** 2
                  + 4.0 * j1 * j2 * (j1 ** 2 + j2 ** 2) * np.cosh(kappa) * np.cos(k)
                  + 2.0 * j1 ** 2 * j2 ** 2 * (np.cos(2.0 * k) + np.cosh(2.0 * kappa)))
    return num / den


def ssh_analytic_C(j1, j2, j1p, j2p, kappa, tol=1e-4):
    """Closed-form Lieb-Robinson prefactor for an SSH -> SSH quench.

    Integrates the product of the analytically continued projector norm of
    the initial model and the eigenvector-norm factors of the target model
    by trapezoidal quadrature, doubling the grid until the change is below
    ``tol`` (the quadrature converges exponentially for these analytic
    integrands).
    """
    for js, jl in ((j1, j2), (j1p, j2p)):
        lo, hi = sorted((abs(js), abs(jl)))
        if lo == 0 or kappa >= abs(math.log(hi / lo)):
            raise StripExceeded(
                f"kappa = {kappa:g} outside the strip |ln({js}/{jl})|")

    def integrand(k):
        fp_plus = _ssh_F(k, kappa, j1p, j2p)
        fp_minus = _ssh_F(k, -kappa, j1p, j2p)
        f_plus = _ssh_F(k, kappa, j1, j2)
        f_minus = _ssh_F(k, -kappa, j1, j2)
        return (1.0 + fp_minus) * (1.0 + fp_plus) * (f_plus + f_minus)

    n = 256
    prev = None
    while n <= 1 << 20:
        ks = np.linspace(-np.pi, np.pi, n, endpoint=False)
        val = float(np.mean(integrand(ks)) / 2.0)
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    raise RuntimeError("quadrature failed to converge")


# --- flat-band N-chain model (class BDI -> class D reduction) ---

def flatband_correlation(n_chains, t):
    """Boundary-restricted correlation matrix E_S(t) of the N-chain quench.

    Dimerized chains are quenched to cross-chain dimers; the dynamics of
    the 2N sites adjacent to the cut closes on itself, so this N x N block
    is exact.  J = J0 = 1 throughout.
    """
    n = n_chains
    p0 = np.zeros((2 * n, 2 * n), dtype=complex)
    for a in range(n):
        p0[2 * a:2 * a + 2, 2 * a:2 * a + 2] = 0.5 * (SIGMA_0 + SIGMA_X)
    u = np.eye(2 * n, dtype=complex)
    rot = np.cos(t) * SIGMA_0 + 1j * np.sin(t) * SIGMA_X
    for a in range(n - 1):
        # pair (b_a, a_{a+1}) = interleaved indices (2a+1, 2a+2)
        idx = [2 * a + 1, 2 * a + 2]
        u[np.ix_(idx, idx)] = rot
    pt = u @ p0 @ u.conj().T
    left = np.arange(0, 2 * n, 2)  # the a-sites sit left of the cut
    return pt[np.ix_(left, left)]


def _poly_F(n, a):
    """Coefficient array (ascending) of F_n(x; a) from the two-term recursion."""
    if n == -1:
        return np.array([0.0])
    if n == 0:
        return np.array([1.0])
    fm2 = np.array([1.0])      # F_0
    fm1 = np.array([0.0, 1.0])  # F_1 = x
    if n == 1:
        return fm1
    for _ in range(2, n + 1):
        f = np.concatenate([[0.0], fm1]) - a ** 2 * np.pad(fm2, (0, 2))
        fm2, fm1 = fm1, f
    return fm1


def flatband_char_poly(n_chains, t):
    """Ascending coefficients in x = xi - 1/2 of the ES characteristic polynomial."""
    a = np.sin(2.0 * t) / 4.0
    fn = _poly_F(n_chains, a)
    fn2 = _poly_F(n_chains - 2, a)
    poly = fn.copy()
    corr = (np.sin(t) ** 4 / 4.0) * fn2
    poly[:corr.size] -= corr
    return poly


def flatband_es(n_chains, t):
    """Numeric and analytic ES of the flat-band quench at time t.

    Returns ``(report, analytic)`` where the report holds the eigenvalues
    of the boundary correlation block and ``analytic`` the roots of the
    characteristic polynomial, both ascending; they agree to 1e-10.
    """
    numeric = np.sort(np.linalg.eigvalsh(flatband_correlation(n_chains, t)))
    coeffs = flatband_char_poly(n_chains, t)
    roots = np.roots(coeffs[::-1])
    analytic = np.sort(roots.real + 0.5)
    report = ff.SpectrumReport.from_values(np.clip(numeric, 0.0, 1.0),
                                           kind="single-particle")
    return report, analytic


def flatband_closed_form(n_chains, t):
    """Closed-form ES for N <= 5, ascending."""
    s, c = np.sin(t), np.cos(t)
    if n_chains == 1:
        xs = [0.0]
    elif n_chains == 2:
        xs = [-s / 2.0, s / 2.0]
    elif n_chains == 3:
        r = s * np.sqrt(1.0 + c ** 2) / 2.0
        xs = [-r, 0.0, r]
    elif n_chains == 4:
        inner = np.sqrt(1.0 + 4.0 * c ** 4)
        r1 = s / 4.0 * np.sqrt(2.0 + 4.0 * c ** 2 + 2.0 * inner)
        r2 = s / 4.0 * np.sqrt(max(2.0 + 4.0 * c ** 2 - 2.0 * inner, 0.0))
        xs = [-r1, -r2, r2, r1]
    elif n_chains == 5:
        inner = np.sqrt(5.0 * c ** 4 - 2.0 * c ** 2 + 1.0)
        r1 = s / 4.0 * np.sqrt(2.0 + 6.0 * c ** 2 + 2.0 * inner)
        r2 = s / 4.0 * np.sqrt(max(2.0 + 6.0 * c ** 2 - 2.0 * inner, 0.0))
        xs = [-r1, -r2, 0.0, r2, r1]
    else:
        raise ValueError("closed forms tabulated for N <= 5 only")
    return np.sort(np.array(xs) + 0.5)


# --- Z2 x Z2 SPT matrix-product state ---

def z2z2_mps(p, q):
    """Injective D=2, d=4 SPT tensor family: Pauli matrices with weights.

    The associated channel is a Pauli channel with eigenvalues
    {1, 1-2p, 1-2q, (1-2p)(1-2q)}; p = q = 1/2 is the zero-correlation
    fixed point.
    """
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError("p, q must lie in (0, 1)")
    tensors = np.stack([
        np.sqrt((1.0 - p) * (1.0 - q)) * SIGMA_0,
        np.sqrt(q * (1.0 - p)) * SIGMA_X,
        1j * np.sqrt(p * (1.0 - q)) * SIGMA_Y,
        np.sqrt(p * q) * SIGMA_Z,
    ])
    return UniformMPS(tensors, canonical_flag=True)


def z2z2_regular_rep():
    """Physical on-site Z2 x Z2 action rho_(m,n) = Z^m (x) Z^n on two qubits.

    Returned as a dict keyed by group element (m, n), each a 4 x 4 unitary
    in the |00>,|01>,|10>,|11> ordering matching the z2z2_mps legs.
    """
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    reps = {}
    for m in (0, 1):
        for n in (0, 1):
            reps[(m, n)] = np.kron(np.linalg.matrix_power(z, m),
                                   np.linalg.matrix_power(z, n))
    return reps


# --- cocycle fixed-point models (partial symmetry breaking) ---

def canonical_cocycle(n_order, nu):
    """Phase table omega((a,b),(a',b')) = exp(2 pi i nu a' b / N).

    Elements of G = Z_N x Z_N are enumerated as g = a * N + b.
    """
    n = n_order
    omega = np.ones((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            for ap in range(n):
                for bp in range(n):
                    omega[a * n + b, ap * n + bp] = np.exp(
                        2j * np.pi * nu * ap * b / n)
    return omega


def _group_ops(n):
    def mul(g, h):
        return ((g[0] + h[0]) % n, (g[1] + h[1]) % n)

    def inv(g):
        return ((-g[0]) % n, (-g[1]) % n)

    return mul, inv


def check_cocycle(omega, n_order, tol=1e-12):
    """Verify omega(gh,k) omega(g,h) = omega(g,hk) omega(h,k) for all triples."""
    n = n_order
    mul, _ = _group_ops(n)
    elems = [(a, b) for a in range(n) for b in range(n)]

    def idx(g):
        return g[0] * n + g[1]

    for g in elems:
        for h in elems:
            gh = idx(mul(g, h))
            for k in elems:
                lhs = omega[gh, idx(k)] * omega[idx(g), idx(h)]
                rhs = omega[idx(g), idx(mul(h, k))] * omega[idx(h), idx(k)]
                if abs(lhs - rhs) > tol:
                    return False
    return True


@dataclass
class CocycleModel:
    """Fixed-point SPT state data plus a subgroup-symmetric quench coupling.

    ``h_table[g, g']`` is constant on orbits of the diagonal left action of
    the embedded subgroup Z_n x Z_n < Z_N x Z_N, (a,b) -> (a p, b p) with
    p = N / n.
    """

    n_order: int
    nu: int
    subgroup: int
    omega: np.ndarray
    h_table: np.ndarray

    def __post_init__(self):
        n = self.n_order
        if n % self.subgroup:
            raise InvalidCocycle(f"subgroup order {self.subgroup} does not divide {n}")
        if not check_cocycle(self.omega, n):
            raise InvalidCocycle("phase table violates the cocycle identity")
        p = n // self.subgroup
        mul, _ = _group_ops(n)
        elems = [(a, b) for a in range(n) for b in range(n)]
        for a in range(self.subgroup):
            for b in range(self.subgroup):
                gt = ((a * p) % n, (b * p) % n)
                for g in elems:
                    for gp in elems:
                        left = self.h_table[_gidx(n, g), _gidx(n, gp)]
                        right = self.h_table[_gidx(n, mul(gt, g)), _gidx(n, mul(gt, gp))]
                        if abs(left - right) > 1e-12:
                            raise InvalidCocycle("h table breaks the residual symmetry")


def _gidx(n, g):
    return g[0] * n + g[1]


def make_cocycle_model(n_order, nu, subgroup, rng):
    """Random subgroup-symmetric coupling table over the canonical cocycle.

    Couplings are sampled uniformly in [-1, 1] on orbit representatives of
    the diagonal subgroup action and copied across each orbit.
    """
    n = n_order
    if n % subgroup:
        raise InvalidCocycle("subgroup order must divide N")
    p = n // subgroup
    mul, _ = _group_ops(n)
    elems = [(a, b) for a in range(n) for b in range(n)]
    h = np.full((n * n, n * n), np.nan)
    for g in elems:
        for gp in elems:
            if not np.isnan(h[_gidx(n, g), _gidx(n, gp)]):
                continue
            val = rng.uniform(-1.0, 1.0)
            for a in range(subgroup):
                for b in range(subgroup):
                    gt = ((a * p) % n, (b * p) % n)
                    h[_gidx(n, mul(gt, g)), _gidx(n, mul(gt, gp))] = val
    return CocycleModel(n_order=n, nu=nu, subgroup=subgroup,
                        omega=canonical_cocycle(n, nu), h_table=h)


def cocycle_boundary_state(model, t):
    """Two-site matrix M(t)_{gg'} = exp(-i h(g,g') t) / omega(g^-1 g', g'^-1).

    The open-boundary ES of the quenched fixed-point state is the set of
    squared singular values of this matrix (normalized to unit sum).
    """
    n = model.n_order
    mul, inv = _group_ops(n)
    elems = [(a, b) for a in range(n) for b in range(n)]
    m = np.zeros((n * n, n * n), dtype=complex)
    for g in elems:
        for gp in elems:
            w = model.omega[_gidx(n, mul(inv(g), gp)), _gidx(n, inv(gp))]
            m[_gidx(n, g), _gidx(n, gp)] = np.exp(
                -1j * model.h_table[_gidx(n, g), _gidx(n, gp)] * t) / w
    return m


def cocycle_es(model, t):
    """Normalized squared singular values of the boundary matrix, descending."""
    m = cocycle_boundary_state(model, t)
    s = np.linalg.svd(m, compute_uv=False)
    vals = s ** 2
    return vals / vals.sum()


def cocycle_mps(n_order, nu):
    """Injective uniform MPS for the canonical fixed-point state.

    The rank of the boundary matrix is r = N/gcd(nu, N); the virtual space
    is truncated to that support, giving bond dimension r.
    """
    n = n_order
    m0 = cocycle_boundary_state(
        CocycleModel(n_order=n, nu=nu, subgroup=n,
                     omega=canonical_cocycle(n, nu),
                     h_table=np.zeros((n * n, n * n))), 0.0)
    u, s, vh = np.linalg.svd(m0)
    r = int(np.sum(s > s[0] * 1e-12))
    s_half = np.sqrt(s[:r])
    tensors = np.zeros((n * n, r, r), dtype=complex)
    for g in range(n * n):
        tensors[g] = np.outer(s_half * vh[:r, g], u[g, :r] * s_half)
    return UniformMPS(tensors, canonical_flag=False)


def cocycle_regular_rep(n_order):
    """Regular representation rho_g on the |G|-dimensional physical space."""
    n = n_order
    mul, _ = _group_ops(n)
    elems = [(a, b) for a in range(n) for b in range(n)]
    reps = {}
    for g in elems:
        mat = np.zeros((n * n, n * n))
        for h in elems:
            mat[_gidx(n, mul(g, h)), _gidx(n, h)] = 1.0
        reps[g] = mat
    return reps


def initial_degeneracy(n_order, nu):
    """Minimal open-boundary ES degeneracy N / gcd(nu, N) of class nu."""
    if not 0 <= nu < n_order:
        raise ValueError("need 0 <= nu < N")
    return n_order // math.gcd(nu, n_order)


def reduced_class(n_order, subgroup, nu):
    """Image of nu under restriction Z_N x Z_N -> Z_n x Z_n: p nu mod n."""
    p = n_order // subgroup
    return (p * nu) % subgroup
