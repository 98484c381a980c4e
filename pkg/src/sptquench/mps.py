"""Uniform matrix-product states: canonical form, transfer channel, spectra.

Tensor layout: ``tensors[j]`` is the D x D virtual matrix of physical index
j.  The transfer channel acts as ``E(X) = sum_j A_j X A_j^dag``; its matrix
representation uses row-major vectorization, vec(A X B) = (A (x) B^T) vec(X),
so the Hilbert-Schmidt (Schatten-2) superoperator norm is the plain spectral
norm of the matrix representation.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionMismatch,
    InvalidGeometry,
    NonInjective,
    NonUnitaryV,
    NotSymmetric,
    TooFewValues,
)
from .freefermion import SpectrumReport

INJECTIVITY_TOL = 1e-8
ZERO_DROP_REL = 1e-12


class UniformMPS:
    """Translation-invariant MPS with site tensors A_j (j = 1..d)."""

    def __init__(self, tensors, canonical_flag=False, injective=None):
        tensors = np.asarray(tensors, dtype=complex)
        if tensors.ndim != 3 or tensors.shape[1] != tensors.shape[2]:
            raise DimensionMismatch(f"tensor array shape {tensors.shape}")
        self.tensors = tensors
        self.phys_dim = tensors.shape[0]
        self.bond_dim = tensors.shape[1]
        self.canonical_flag = canonical_flag
        self.injective = injective

    def unital_residual(self):
        acc = np.einsum("jab,jcb->ac", self.tensors, self.tensors.conj())
        return float(np.max(np.abs(acc - np.eye(self.bond_dim))))


@dataclass
class TransferChannel:
    """Diagnostics of E = sum_j A_j . A_j^dag for a canonical injective MPS."""

    matrix_rep: np.ndarray
    spectrum: np.ndarray
    mu: float
    Lambda: np.ndarray
    matrix_rep_inf: np.ndarray = None


@dataclass
class ProjectiveRep:
    """Virtual symmetry action V_g for the two generators of Z_r x Z_r."""

    order: int
    generators: tuple
    v: dict
    omega: dict = field(default_factory=dict)
    cocycle_class: int = 0


def transfer_matrix(tensors):
    """Matrix representation of E(X) = sum_j A_j X A_j^dag."""
    return np.einsum("jab,jcd->acbd", tensors, tensors.conj()).reshape(
        tensors.shape[1] ** 2, tensors.shape[1] ** 2)


def _leading_positive(mat_vec, dim):
    """Hermitize, positivize and trace-normalize a reshaped fixed point."""
    rho = mat_vec.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    if np.real(np.trace(rho)) < 0:
        rho = -rho
    vals, vecs = np.linalg.eigh(rho)
    if np.min(vals) < -1e-12 * max(np.max(vals), 1e-30):
        warnings.warn(f"fixed point has negative weight {np.min(vals):g}; clipping")
    vals = np.clip(vals, 0.0, None)
    rho = (vecs * vals) @ vecs.conj().T
    return rho / np.real(np.trace(rho))


def _refine_eigvec(mat, vec, lead, iters=10):
    """Polish a leading eigenvector by normalized power iterations.

    Each sweep damps the error components by |lambda_i / lead|, tightening
    the eig output toward the true fixed point.
    """
    for _ in range(iters):
        nxt = mat @ vec / lead
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            return vec
        nxt /= norm
        if np.linalg.norm(nxt - vec) < 1e-15:
            return nxt
        vec = nxt
    return vec


def canonicalize(mps):
    """Gauge an injective MPS so that sum_j A_j A_j^dag = 1.

    The right fixed point rho of the transfer channel gives the gauge
    X = rho^{-1/2}; the physical state is untouched.  Raises NonInjective
    when the leading transfer eigenvalue is degenerate (cat states).
    """
    e_mat = transfer_matrix(mps.tensors)
    vals, vecs = np.linalg.eig(e_mat)
    order = np.argsort(-np.abs(vals))
    lead = vals[order[0]]
    if len(order) > 1 and abs(vals[order[1]]) > abs(lead) * (1.0 - INJECTIVITY_TOL):
        raise NonInjective("degenerate leading transfer eigenvalue")
    tensors = mps.tensors / np.sqrt(np.abs(lead))
    vec = _refine_eigvec(e_mat, vecs[:, order[0]], lead)
    rho = _leading_positive(vec, mps.bond_dim)
    vals_r, vecs_r = np.linalg.eigh(rho)
    if np.min(vals_r) <= 0:
        raise NonInjective("singular right fixed point")
    x = (vecs_r / np.sqrt(vals_r)) @ vecs_r.conj().T        # rho^{-1/2}
    x_inv = (vecs_r * np.sqrt(vals_r)) @ vecs_r.conj().T    # rho^{+1/2}
    gauged = np.einsum("ab,jbc,cd->jad", x, tensors, x_inv)
    out = UniformMPS(gauged, canonical_flag=True, injective=True)
    res = out.unital_residual()
    if res > 1e-10:
        warnings.warn(f"unital residual {res:g} after canonicalization")
    return out


def compress_support(mps, tol=1e-12, max_passes=4):
    """Project the virtual space onto the support of the transfer fixed
    points (right, then left), dropping numerically-zero directions.

    Exact up to the cut tolerance: the discarded directions carry no
    weight in the state.  Repeats until stable.
    """
    tensors = mps.tensors
    for _ in range(max_passes):
        reduced = False
        for side in ("right", "left"):
            dim = tensors.shape[1]
            e_mat = transfer_matrix(tensors)
            mat = e_mat if side == "right" else e_mat.conj().T
            vals, vecs = np.linalg.eig(mat)
            lead = np.argmax(np.abs(vals))
            rho = _leading_positive(vecs[:, lead], dim)
            w, u = np.linalg.eigh(rho)
            keep = w > tol * np.max(w)
            if np.sum(keep) < dim:
                basis = u[:, keep]
                tensors = np.einsum("ab,jbc,cd->jad",
                                    basis.conj().T, tensors, basis)
                reduced = True
        if not reduced:
            break
    return UniformMPS(tensors, canonical_flag=False)


def transfer_analysis(mps):
    """Full channel spectrum, fixed point Lambda, and mu = rho(E - E^inf)."""
    if not mps.canonical_flag:
        raise NonInjective("canonicalize first")
    d2 = mps.bond_dim ** 2
    e_mat = transfer_matrix(mps.tensors)
    vals = np.linalg.eigvals(e_mat)
    order = np.argsort(-np.abs(vals))
    spectrum = vals[order]
    # Left fixed point: E^dag(Lambda) = Lambda.
    vals_l, vecs_l = np.linalg.eig(e_mat.conj().T)
    lead = np.argmax(np.abs(vals_l))
    if abs(vals_l[lead] - 1.0) > 1e-8:
        raise NonInjective("leading eigenvalue is not 1; not canonical/injective")
    vec_l = _refine_eigvec(e_mat.conj().T, vecs_l[:, lead], vals_l[lead])
    lam = _leading_positive(vec_l, mps.bond_dim)
    e_inf = np.outer(np.eye(mps.bond_dim).reshape(-1), lam.conj().reshape(-1))
    mu = float(np.max(np.abs(np.linalg.eigvals(e_mat - e_inf))))
    return TransferChannel(matrix_rep=e_mat, spectrum=spectrum, mu=mu,
                           Lambda=lam, matrix_rep_inf=e_inf)


def es_infinite(mps, channel=None):
    """ES in the thermodynamic limit of the subsystem: all products
    lambda_alpha lambda_beta of the fixed-point spectrum."""
    channel = channel or transfer_analysis(mps)
    lam = np.linalg.eigvalsh(channel.Lambda)
    return SpectrumReport.from_values(np.outer(lam, lam).reshape(-1),
                                      kind="many-body")


def _gram_from_power(power_mat, d):
    """Gram matrix G[(ab),(a'b')] = <a'| M(|b'><b|) |a> from a superoperator.

    With row-major vectorization the entry sits at
    power_mat[a' d + a, b' d + b].
    """
    g = np.transpose(power_mat.reshape(d, d, d, d), (1, 3, 0, 2))
    return g.reshape(d * d, d * d)


def es_segment(mps, l, channel=None):
    """ES of a length-l segment in an infinite chain via the Gram matrix
    Lambda (x) Lambda + P, with P the E^l - E^inf correction."""
    if l < 1:
        raise InvalidGeometry("need l >= 1")
    channel = channel or transfer_analysis(mps)
    d = mps.bond_dim
    lam_vals, w = np.linalg.eigh(channel.Lambda)
    # Rotate everything into the Lambda eigenbasis.
    a_rot = np.einsum("ab,jbc,cd->jad", w.conj().T, mps.tensors, w)
    e_mat = transfer_matrix(a_rot)
    e_inf = np.outer(np.eye(d).reshape(-1), np.diag(lam_vals).conj().reshape(-1))
    diff = np.linalg.matrix_power(e_mat, l) - e_inf
    p = _gram_from_power(diff, d)
    scale = np.sqrt(np.outer(lam_vals, np.ones(d))).reshape(-1)  # sqrt(lam_a) per (ab)
    p = p * np.outer(scale, scale)
    m = np.diag(np.outer(lam_vals, lam_vals).reshape(-1)) + p
    m = 0.5 * (m + m.conj().T)
    vals = np.linalg.eigvalsh(m)
    vals = vals[vals > ZERO_DROP_REL * max(vals.max(initial=0.0), 1e-300)]
    return SpectrumReport.from_values(vals, kind="many-body")


def es_finite_ring(mps, l, ring_length, channel=None):
    """ES of an l-site segment of a closed ring of given length.

    Works from the two Gram matrices of the segment and its complement;
    the spectrum of conj(M')^{1/2} M conj(M')^{1/2}, normalized by Tr E^L,
    equals the ES (zeros dropped).
    """
    if not 1 <= l < ring_length:
        raise InvalidGeometry("need 1 <= l < L")
    channel = channel or transfer_analysis(mps)
    d = mps.bond_dim
    e_mat = channel.matrix_rep
    m_seg = _gram_from_power(np.linalg.matrix_power(e_mat, l), d)
    pow_env = np.linalg.matrix_power(e_mat, ring_length - l)
    # M'[(ab),(a'b')] = <b'| E^{L-l}(|a'><a|) |b>  (segment/environment swap).
    g = np.transpose(pow_env.reshape(d, d, d, d), (3, 1, 2, 0))
    m_env = g.reshape(d * d, d * d)
    m_seg = 0.5 * (m_seg + m_seg.conj().T)
    m_env = 0.5 * (m_env + m_env.conj().T)
    env_half = _psd_sqrt(np.conj(m_env))
    core = env_half @ m_seg @ env_half
    core = 0.5 * (core + core.conj().T)
    vals = np.linalg.eigvalsh(core) / np.real(np.trace(np.linalg.matrix_power(e_mat, ring_length)))
    vals = vals[vals > ZERO_DROP_REL * max(vals.max(initial=0.0), 1e-300)]
    return SpectrumReport.from_values(vals, kind="many-body")


def _psd_sqrt(m):
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def mb_gap(report, r):
    """Many-body entanglement gap |zeta_1 - zeta_{r^2}| for symmetry rank r."""
    vals = np.asarray(report.values, dtype=float)
    if vals.size < r * r:
        raise TooFewValues(f"need at least r^2 = {r * r} values, have {vals.size}")
    return float(abs(vals[0] - vals[r * r - 1]))


def spectra_match_up_to_zeros(spec_in, spec_out, floor=1e-6, tol=1e-9):
    """Compare two channel spectra as multisets up to padding zeros.

    Every eigenvalue of magnitude above ``floor`` must find a partner
    within ``tol``; the remainder must sit below ``floor``.  The floor
    absorbs the eigensolver's eps^(1/s) smearing of defective exact zeros
    in non-normal transfer matrices.
    """
    big_in = sorted((z for z in spec_in if abs(z) > floor), key=abs, reverse=True)
    big_out = sorted((z for z in spec_out if abs(z) > floor), key=abs, reverse=True)
    if len(big_in) != len(big_out):
        return False
    remaining = list(big_out)
    for z in big_in:
        best = min(range(len(remaining)), key=lambda i: abs(remaining[i] - z))
        if abs(remaining[best] - z) > tol:
            return False
        remaining.pop(best)
    return True


def channel_norm_distance(channel, l):
    """Hilbert-Schmidt superoperator norm ||E^l - E^inf||."""
    diff = np.linalg.matrix_power(channel.matrix_rep, l) - channel.matrix_rep_inf
    return float(np.linalg.norm(diff, 2))


# --- dense-state oracles -------------------------------------------------

def dense_state(mps, length):
    """Exact ring wave function: amplitudes Tr[A_{j_1} ... A_{j_L}], normalized."""
    t = mps.tensors
    acc = t
    for _ in range(length - 1):
        acc = np.einsum("xab,jbc->xjac", acc, t).reshape(
            -1, mps.bond_dim, mps.bond_dim)
    psi = np.trace(acc, axis1=1, axis2=2)
    return psi / np.linalg.norm(psi)


def dense_rdm_segment(mps, length, l):
    """Reduced density matrix of sites 1..l on a closed ring, by brute-force
    enumeration of every environment configuration.

    Amplitude products are accumulated chunk-free but without building the
    d^L state vector; this stays a dense oracle (no channel powers).
    """
    t = mps.tensors
    d_bond = mps.bond_dim

    def partial_products(n_sites):
        acc = t
        for _ in range(n_sites - 1):
            acc = np.einsum("xab,jbc->xjac", acc, t).reshape(-1, d_bond, d_bond)
        return acc

    g = partial_products(l)                      # (d^l, D, D)
    env = partial_products(length - l)           # (d^{L-l}, D, D)
    env4 = env.reshape(env.shape[0], -1)
    k = env4.T @ env4.conj()                     # K[(bc),(b'c')] over flattened pairs
    k = k.reshape(d_bond, d_bond, d_bond, d_bond)
    rho = np.einsum("sab,tcd,badc->st", g, g.conj(), k)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.real(np.trace(rho))


def dense_es_ring(mps, length, l):
    """ES of sites 1..l of a ring from the dense reduced density matrix."""
    rho = dense_rdm_segment(mps, length, l)
    vals = np.linalg.eigvalsh(rho)
    vals = vals[vals > ZERO_DROP_REL]
    return SpectrumReport.from_values(vals, kind="many-body")


def dense_overlap(mps_a, mps_b, length):
    """|<psi_a|psi_b>| of the normalized dense ring states."""
    pa = dense_state(mps_a, length)
    pb = dense_state(mps_b, length)
    return float(abs(np.vdot(pa, pb)))


# --- projective representations ------------------------------------------

def mixed_transfer(mps, rho_g):
    """Matrix of T_g(X) = sum_j (rho_g A)_j X A_j^dag."""
    rotated = np.einsum("jk,kab->jab", rho_g, mps.tensors)
    return np.einsum("jab,jcd->acbd", rotated, mps.tensors.conj()).reshape(
        mps.bond_dim ** 2, mps.bond_dim ** 2)


def _extract_v(mps, rho_g):
    t_mat = mixed_transfer(mps, rho_g)
    vals, vecs = np.linalg.eig(t_mat)
    lead = np.argmax(np.abs(vals))
    if abs(abs(vals[lead]) - 1.0) > 1e-8:
        raise NotSymmetric(
            f"mixed transfer leading magnitude {abs(vals[lead]):.3g} != 1")
    y = vecs[:, lead].reshape(mps.bond_dim, mps.bond_dim)
    u, _ = sla.polar(y)
    scale = np.linalg.norm(y, 2)
    if np.linalg.norm(y @ y.conj().T - scale ** 2 * np.eye(mps.bond_dim), 2) \
            > 1e-6 * scale ** 2:
        raise NonUnitaryV("extracted eigenvector matrix is far from unitary")
    # T_g's unit eigenvector is V_g^dag (it satisfies T_g(V^dag) = V^dag).
    return u.conj().T


def _scalar_phase(mat):
    d = mat.shape[0]
    tr = np.trace(mat) / d
    if abs(abs(tr) - 1.0) > 1e-6 or np.linalg.norm(mat - tr * np.eye(d), 2) > 1e-6:
        raise NonUnitaryV("matrix is not proportional to the identity")
    return tr / abs(tr)


def projective_rep(mps, group_reps, order, generators=((1, 0), (0, 1))):
    """Extract the virtual projective representation and its cohomology class.

    ``group_reps`` maps Z_r x Z_r elements (tuples) to physical unitaries;
    only the two generators and their product are consulted.  The class is
    read off the gauge-invariant commutator V_a V_b V_a^-1 V_b^-1 =
    exp(2 pi i nu / r).  Raw cocycle phases are reported but carry gauge
    freedom.
    """
    if not mps.canonical_flag:
        raise NonInjective("canonicalize first")
    a, b = generators
    ab = tuple((np.array(a) + np.array(b)) % order)
    v = {g: _extract_v(mps, group_reps[g]) for g in (a, b, ab)}
    comm = v[a] @ v[b] @ v[a].conj().T @ v[b].conj().T
    phase = _scalar_phase(comm)
    # Orientation fixed so the canonical-gauge fixed-point state of class nu
    # detects nu (the commutator itself only pins the class up to sign).
    nu = int(round(-np.angle(phase) * order / (2.0 * np.pi))) % order
    omega = {
        (a, b): _scalar_phase(v[a] @ v[b] @ v[ab].conj().T),
        (b, a): _scalar_phase(v[b] @ v[a] @ v[ab].conj().T),
    }
    return ProjectiveRep(order=order, generators=(a, b), v=v, omega=omega,
                         cocycle_class=nu)
