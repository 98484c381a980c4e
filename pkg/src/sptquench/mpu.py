"""Matrix-product unitaries: validation, blocking, simpleness, application.

Tensor layout: ``tensors[j, j']`` is the D_U x D_U virtual matrix with
physical output j and input j'.  The defining property is that the
sandwich channel ``E_U(X) = d^-1 sum_{jj'} U_{jj'} X U_{jj'}^dag`` has
spectrum {1, 0, ..., 0}; the gauge is fixed so that E_U(rho) = rho and
``d^-1 sum U^dag U = 1``.
"""

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NotSimpleWithin, NotUnitary, SizeOverflow
from .mps import UniformMPS, _leading_positive, canonicalize, compress_support

CHANNEL_SPECTRUM_TOL = 1e-8
SIMPLE_TOL = 1e-10
DENSE_DIM_CAP = 4096
DEFAULT_BLOCK_BUDGET = 1 << 26


class MPUTensor:
    """Building block of a matrix-product unitary in the standard gauge."""

    def __init__(self, tensors, fix_gauge=True):
        tensors = np.asarray(tensors, dtype=complex)
        if tensors.ndim != 4 or tensors.shape[0] != tensors.shape[1] \
                or tensors.shape[2] != tensors.shape[3]:
            raise DimensionMismatch(f"tensor array shape {tensors.shape}")
        self.phys_dim = tensors.shape[0]
        self.bond_dim = tensors.shape[2]
        self.tensors = tensors
        self.rho = None
        self.validated_flag = False
        if fix_gauge:
            self._fix_gauge()

    def _channel_matrix(self, tensors=None):
        t = self.tensors if tensors is None else tensors
        d = t.shape[0]
        flat = t.reshape(d * d, self.bond_dim, self.bond_dim)
        return np.einsum("xab,xcd->acbd", flat, flat.conj()).reshape(
            self.bond_dim ** 2, self.bond_dim ** 2) / d

    def _dual_channel_matrix(self):
        d = self.phys_dim
        flat = self.tensors.reshape(d * d, self.bond_dim, self.bond_dim)
        return np.einsum("xba,xdc->acbd", flat.conj(), flat).reshape(
            self.bond_dim ** 2, self.bond_dim ** 2) / d

    def _power_fixed_point(self, mat):
        """Fixed point of a channel with spectrum {lambda, 0, ..., 0}.

        Every non-leading eigenvalue is exactly zero (possibly in Jordan
        blocks), so iterating on a positive seed converges exactly after
        at most D_U^2 steps; we iterate to the numerical floor and return
        the Hermitized, trace-normalized limit together with the leading
        eigenvalue.
        """
        x = np.eye(self.bond_dim).reshape(-1) / self.bond_dim
        lam = 1.0
        for _ in range(self.bond_dim ** 2 + 4):
            y = mat @ x
            lam = np.linalg.norm(y)
            if lam < 1e-300:
                raise NotUnitary("channel annihilates positive operators")
            y = y / lam
            if np.linalg.norm(y - x) < 1e-15:
                x = y
                break
            x = y
        return _leading_positive(x, self.bond_dim), float(lam)

    def _fix_gauge(self):
        """Move to the gauge with E_U(rho) = rho and dual unitality.

        The dual channel's fixed point sigma > 0 supplies the similarity
        transformation U -> sigma^{1/2} U sigma^{-1/2}.
        """
        sigma, _ = self._power_fixed_point(self._dual_channel_matrix())
        w, u = np.linalg.eigh(sigma)
        if np.min(w) <= 1e-14:
            raise NotUnitary("dual fixed point is singular; not a normal tensor")
        s_half = (u * np.sqrt(w)) @ u.conj().T
        s_ihalf = (u / np.sqrt(w)) @ u.conj().T
        self.tensors = np.einsum("ab,ijbc,cd->ijad", s_half, self.tensors, s_ihalf)
        rho, lam = self._power_fixed_point(self._channel_matrix())
        self.tensors /= np.sqrt(lam)
        self.rho = rho

    def channel_spectrum(self):
        return np.sort(np.abs(np.linalg.eigvals(self._channel_matrix())))[::-1]

    def dual_unitality_residual(self):
        d = self.phys_dim
        acc = np.einsum("ijba,ijbc->ac", self.tensors.conj(), self.tensors) / d
        return float(np.max(np.abs(acc - np.eye(self.bond_dim))))


def dense_operator(mpu, length):
    """Contract the MPU on a ring of ``length`` sites into a dense matrix."""
    d = mpu.phys_dim
    if d ** length > DENSE_DIM_CAP:
        raise SizeOverflow(f"d^L = {d ** length} exceeds {DENSE_DIM_CAP}")
    t = mpu.tensors  # (d, d, D, D)
    cur = t
    for _ in range(length - 1):
        cur = np.einsum("...ab,ijbc->...ijac", cur, t)
    # indices: (j1, j1', ..., jL, jL', a, a) -> trace bond, group outs/ins
    op = np.trace(cur, axis1=-2, axis2=-1)
    perm_out = tuple(range(0, 2 * length, 2))
    perm_in = tuple(range(1, 2 * length, 2))
    op = np.transpose(op, perm_out + perm_in)
    return op.reshape(d ** length, d ** length)


def validate(mpu, dense_lengths=(2, 3), tol=1e-10):
    """Channel-spectrum test plus dense unitarity on the requested lengths.

    Raises NotUnitary identifying the failing test; returns True otherwise
    and marks the tensor validated.
    """
    spec = mpu.channel_spectrum()
    if abs(spec[0] - 1.0) > CHANNEL_SPECTRUM_TOL or (
            spec.size > 1 and spec[1] > CHANNEL_SPECTRUM_TOL):
        raise NotUnitary(f"sandwich-channel spectrum {spec[:4]} is not (1,0,...)")
    for length in dense_lengths:
        op = dense_operator(mpu, length)
        residual = np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0])))
        if residual > tol:
            raise NotUnitary(f"dense U^dag U at L={length}: residual {residual:g}")
    mpu.validated_flag = True
    return True


def block(mpu, k, budget=DEFAULT_BLOCK_BUDGET):
    """Group k adjacent sites into one: physical dimension d^k, same bond."""
    if k < 1:
        raise ValueError("k >= 1")
    d, du = mpu.phys_dim, mpu.bond_dim
    if (d ** (2 * k)) * du ** 2 > budget:
        raise SizeOverflow(f"blocked tensor would hold {(d ** (2 * k)) * du ** 2} entries")
    cur = mpu.tensors
    for _ in range(k - 1):
        cur = np.einsum("ijab,klbc->ikjlac", cur, mpu.tensors).reshape(
            cur.shape[0] * d, cur.shape[1] * d, du, du)
    out = MPUTensor(cur, fix_gauge=False)
    out.rho = mpu.rho
    out.validated_flag = mpu.validated_flag
    return out


def _simpleness_residual(tensors, rho):
    """Frobenius residual of the two-site factorization identity.

    With the doubled column C[p,q] = sum_j U_{j p} (x) conj(U_{j q}) (open
    input legs p below, q above), simpleness means that for all input
    pairs (p, q) at site 1 and (r, s) at site 2

        [C1(p,q) C2(r,s)]_{(a b),(a' b')} =
            [sum_j U_{jp} rho U_{jq}^dag]_{a b} .
            [sum_m U_{ms}^dag U_{mr}]_{b' a'} ,

    i.e. the two columns disconnect through a rho cap on the left block
    and an identity cap on the right block.
    """
    d = tensors.shape[0]
    du = tensors.shape[2]
    # paired column: col[p, q, a, b, g, h] = sum_j U[j,p][a,g] conj(U[j,q])[b,h]
    col = np.einsum("jpag,jqbh->pqabgh", tensors, tensors.conj())
    lcap = np.einsum("jpag,gh,jqbh->pqab", tensors, rho, tensors.conj())
    rcap = np.einsum("jqbg,jpbh->pqgh", tensors.conj(), tensors)  # sum_m U^dag U
    num = 0.0
    den = 0.0
    for p in range(d):
        for q in range(d):
            lhs = np.einsum("abgh,rsghcd->rsabcd", col[p, q], col)
            rhs = np.einsum("ab,rscd->rsabcd", lcap[p, q],
                            np.transpose(rcap, (0, 1, 3, 2)))
            num += float(np.sum(np.abs(lhs - rhs) ** 2))
            den += float(np.sum(np.abs(lhs) ** 2))
    return np.sqrt(num / den) if den > 0 else 0.0


def _reversed(mpu):
    """Mirror-image tensor (virtual legs swapped), re-gauged."""
    return MPUTensor(np.transpose(mpu.tensors, (0, 1, 3, 2)), fix_gauge=True)


def simpleness_k0(mpu, k_max=None, tol=SIMPLE_TOL, budget=DEFAULT_BLOCK_BUDGET):
    """Smallest blocking k at which the tensor factorizes into a bilayer.

    Both the stated orientation and its mirror must satisfy the
    factorization identity (unitarity implies both).  Returns
    ``(k0, certificates)`` where certificates maps k to the pair of
    residuals; raises NotSimpleWithin past k_max (default D_U^4, the
    theoretical sufficiency bound for chiral-free MPUs).
    """
    if not mpu.validated_flag:
        validate(mpu)
    if k_max is None:
        k_max = mpu.bond_dim ** 4
    certificates = {}
    for k in range(1, k_max + 1):
        try:
            blk = block(mpu, k, budget=budget)
        except SizeOverflow:
            raise NotSimpleWithin(k_max, certificates)
        fwd = _simpleness_residual(blk.tensors, blk.rho)
        rev_blk = _reversed(blk)
        rev = _simpleness_residual(rev_blk.tensors, rev_blk.rho)
        certificates[k] = (fwd, rev)
        if fwd < tol and rev < tol:
            return k, certificates
    raise NotSimpleWithin(k_max, certificates)


def apply(mpu, mps):
    """One stroboscopic step: new tensor A'_j = sum_j' U_{jj'} (x) A_{j'}.

    Virtual ordering is (MPU bond (x) MPS bond); the result is
    re-canonicalized.  The nonzero transfer spectrum is preserved.
    """
    if mpu.phys_dim != mps.phys_dim:
        raise DimensionMismatch(
            f"physical dims differ: {mpu.phys_dim} vs {mps.phys_dim}")
    d = mps.phys_dim
    new_bond = mpu.bond_dim * mps.bond_dim
    out = np.zeros((d, new_bond, new_bond), dtype=complex)
    for j in range(d):
        acc = np.zeros((new_bond, new_bond), dtype=complex)
        for jp in range(d):
            acc += np.kron(mpu.tensors[j, jp], mps.tensors[jp])
        out[j] = acc
    return canonicalize(compress_support(UniformMPS(out)))


def reduced_density_stability_check(u, u_prime, psi0, cut_dim, tol=1e-10):
    """Verify ||rho_S - rho'_S|| <= ||U - U'|| on dense data.

    ``cut_dim`` is the Hilbert dimension of subsystem S (the leading
    tensor factor).
    """
    dim = psi0.size
    if dim > DENSE_DIM_CAP:
        raise SizeOverflow(f"state dimension {dim} exceeds {DENSE_DIM_CAP}")
    env_dim = dim // cut_dim
    psi = u @ psi0
    psi_p = u_prime @ psi0

    def rho_s(vec):
        m = vec.reshape(cut_dim, env_dim)
        return m @ m.conj().T

    lhs = np.linalg.norm(rho_s(psi) - rho_s(psi_p), 2)
    rhs = np.linalg.norm(u - u_prime, 2)
    return bool(lhs <= rhs + tol)


# --- constructors ---------------------------------------------------------

def from_bilayer_circuit(u_gate, v_gate):
    """MPU of the two-layer circuit: u on cell-internal pairs, then v across
    neighboring cells.

    ``u_gate`` and ``v_gate`` are d^2 x d^2 unitaries acting on two d-level
    sites; the unit cell comprises the two sites of a u gate, so the MPU
    has physical dimension d^2 and bond dimension d^2.
    """
    d2 = u_gate.shape[0]
    d = int(round(np.sqrt(d2)))
    if d * d != d2 or u_gate.shape != (d2, d2) or v_gate.shape != (d2, d2):
        raise DimensionMismatch("gates must act on two d-level sites")
    u4 = u_gate.reshape(d, d, d, d)   # [m, n, a', b']
    v4 = v_gate.reshape(d, d, d, d)   # [b, a_next, n, m_next]
    # W[(alpha mu), (a b), (a' b'), (alpha' mu')] =
    #   delta(a, alpha) sum_n u[mu n, a' b'] v[b alpha', n mu']
    w = np.einsum("mnab,cdne->mabcde", u4, v4)   # [mu, a', b', b, alpha', mu']
    # target order: out=(a b), in=(a' b'), left=(alpha mu), right=(alpha' mu')
    tensors = np.zeros((d2, d2, d2, d2), dtype=complex)
    for a in range(d):
        for b in range(d):
            for ap in range(d):
                for bp in range(d):
                    for mu in range(d):
                        for alp in range(d):
                            for mup in range(d):
                                tensors[a * d + b, ap * d + bp,
                                        a * d + mu, alp * d + mup] = \
                                    w[mu, ap, bp, b, alp, mup]
    return MPUTensor(tensors)


def dense_bilayer_circuit(u_gate, v_gate, cells):
    """Dense matrix of the same two-layer circuit on a ring of ``cells``
    unit cells (2*cells sites), for construct-then-verify round trips."""
    d2 = u_gate.shape[0]
    d = int(round(np.sqrt(d2)))
    n_sites = 2 * cells
    dim = d ** n_sites
    if dim > DENSE_DIM_CAP:
        raise SizeOverflow(f"dense circuit dimension {dim}")

    def two_site(gate, s1, s2):
        g4 = gate.reshape(d, d, d, d)
        idx = np.arange(dim)
        digits = np.empty((n_sites, dim), dtype=int)
        rem = idx.copy()
        for s in reversed(range(n_sites)):
            digits[s] = rem % d
            rem //= d
        out = np.zeros((dim, dim), dtype=complex)
        for a in range(d):
            for b in range(d):
                for ap in range(d):
                    for bp in range(d):
                        if g4[a, b, ap, bp] == 0:
                            continue
                        sel = (digits[s1] == ap) & (digits[s2] == bp)
                        src = idx[sel]
                        dst = src + (a - ap) * d ** (n_sites - 1 - s1) \
                                  + (b - bp) * d ** (n_sites - 1 - s2)
                        out[dst, src] += g4[a, b, ap, bp]
        return out

    layer_u = np.eye(dim, dtype=complex)
    for c in range(cells):
        layer_u = two_site(u_gate, 2 * c, 2 * c + 1) @ layer_u
    layer_v = np.eye(dim, dtype=complex)
    for c in range(cells):
        layer_v = two_site(v_gate, 2 * c + 1, (2 * c + 2) % n_sites) @ layer_v
    return layer_v @ layer_u


def cz_layer_mpu(phase=np.pi):
    """Qubit MPU of the commuting layer prod_j exp(i phase |11><11|_{j,j+1}).

    phase = pi is the CZ layer.  d = 2, D_U = 2.
    """
    w = np.exp(1j * phase)
    t = np.zeros((2, 2, 2, 2), dtype=complex)
    for m in range(2):
        for j in range(2):
            t[j, j, m, j] = w ** (m * j)
    return MPUTensor(t)


def kicked_ising_mpu(theta, phase=np.pi):
    """CZ-type layer followed by a uniform transversal rotation exp(-i theta X)."""
    base = cz_layer_mpu(phase)
    rx = sla.expm(-1j * theta * np.array([[0.0, 1.0], [1.0, 0.0]]))
    t = np.einsum("jm,mkab->jkab", rx, base.tensors)
    return MPUTensor(t)


def identity_mpu(d):
    """Trivial MPU with bond dimension 1."""
    t = np.zeros((d, d, 1, 1), dtype=complex)
    for j in range(d):
        t[j, j, 0, 0] = 1.0
    return MPUTensor(t)


def ising_zz_mpu(theta, labels):
    """MPU of U = prod_j exp(-i theta s(g_j) s(g_{j+1})) for diagonal labels.

    ``labels`` assigns a real number s(g) to each physical basis state; the
    bond carries the previous site's label index.  Diagonal circuits
    commute with every diagonal symmetry representation and belong to the
    trivial cohomology class.
    """
    labels = np.asarray(labels, dtype=float)
    uniq = np.unique(labels)
    d = labels.size
    du = uniq.size
    t = np.zeros((d, d, du, du), dtype=complex)
    for g in range(d):
        col = int(np.searchsorted(uniq, labels[g]))
        for m in range(du):
            t[g, g, m, col] = np.exp(-1j * theta * uniq[m] * labels[g])
    return MPUTensor(t)


def operator_spreading_support(mpu, site_operator, length, window, tol=1e-9):
    """Check a conjugated on-site operator acts as identity off a window.

    Places ``site_operator`` on the central site of a ring of ``length``
    sites, conjugates by the dense MPU, and tests whether the result equals
    (operator on the window) (x) identity, where the window is the
    ``window`` sites centered on the operator.  Returns the defect norm.
    """
    d = mpu.phys_dim
    dim = d ** length
    if dim > DENSE_DIM_CAP:
        raise SizeOverflow(f"dense dimension {dim}")
    u = dense_operator(mpu, length)
    center = length // 2
    op = np.eye(1, dtype=complex)
    for s in range(length):
        op = np.kron(op, site_operator if s == center else np.eye(d))
    evolved = u @ op @ u.conj().T
    half = window // 2
    w_sites = [(center + off) % length for off in range(-half, half + 1)]
    out_sites = [s for s in range(length) if s not in w_sites]
    # Partial trace over the window complement, then re-embed and compare.
    perm = w_sites + out_sites
    dims = [d] * length
    t = evolved.reshape(dims + dims)
    t = np.transpose(t, perm + [length + p for p in perm])
    dw = d ** len(w_sites)
    de = d ** len(out_sites)
    t = t.reshape(dw, de, dw, de)
    core = np.trace(t, axis1=1, axis2=3) / de
    rebuilt = np.kron(core, np.eye(de))
    # Undo the permutation on the rebuilt operator for comparison.
    rb = rebuilt.reshape([d] * (2 * length))
    inv = np.argsort(perm)
    rb = np.transpose(rb, list(inv) + [length + p for p in inv])
    rb = rb.reshape(dim, dim)
    return float(np.max(np.abs(rb - evolved)))
