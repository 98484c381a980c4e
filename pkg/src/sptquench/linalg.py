"""Dense complex linear-algebra kernels and spectral-perturbation helpers.

Everything here is a pure function of its arguments operating on plain
numpy arrays at desk scale (dimensions up to a few hundred), backed by
LAPACK through numpy/scipy.  The Pfaffian is computed in-repo via
Householder skew tridiagonalization since LAPACK has no such routine.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotHermitian,
    NotSkewSymmetric,
    OddDimension,
)

HERMITICITY_TOL = 1e-10
BIORTH_TOL = 1e-10
DEFECT_RANK_TOL = 1e-8


def _as_square(a):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix contains non-finite entries")
    return a


@dataclass
class HermEig:
    """Full Hermitian eigensystem, values ascending, vectors as columns."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass
class BiorthEig:
    """General (non-Hermitian) eigensystem with biorthonormal vector pairs.

    ``right_vectors[:, i]`` and ``left_vectors[:, i]`` satisfy
    ``left^dag right = delta`` unless ``defective_flag`` is set, in which
    case the matrix has a nontrivial Jordan structure and no complete
    biorthonormal family exists.
    """

    values: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    defective_flag: bool


def herm_eig(a):
    """Eigen-decomposition of a Hermitian matrix.

    Raises NotHermitian if ``max|a - a^dag|`` exceeds 1e-10 and
    ConvergenceFailure if LAPACK does not converge.
    """
    a = _as_square(a)
    if np.max(np.abs(a - a.conj().T)) >= HERMITICITY_TOL:
        raise NotHermitian(f"deviation {np.max(np.abs(a - a.conj().T)):g}")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return HermEig(values=values, vectors=vectors)


def general_eig(a, rank_tol=DEFECT_RANK_TOL):
    """Eigen-decomposition of a general square matrix with left/right vectors.

    Defectiveness (geometric multiplicity below algebraic for some
    eigenvalue cluster) is detected by a rank test at tolerance
    ``rank_tol`` scaled by the matrix norm and reported through
    ``defective_flag`` rather than an exception: whether a defective
    point is fatal is the caller's decision (strip scans retry with a
    perturbed wave number).
    """
    a = _as_square(a)
    n = a.shape[0]
    values, vl, vr = sla.eig(a, left=True, right=True)
    scale = max(np.linalg.norm(a, 2), 1.0)

    # Cluster eigenvalues and compare geometric vs algebraic multiplicity.
    defective = False
    tol = rank_tol * scale
    unvisited = np.ones(n, dtype=bool)
    for i in range(n):
        if not unvisited[i]:
            continue
        cluster = np.abs(values - values[i]) < tol
        unvisited[cluster] = False
        alg = int(np.sum(cluster))
        if alg > 1:
            geo = alg - np.linalg.matrix_rank(a - values[i] * np.eye(n), tol=tol)
            if geo < alg:
                defective = True

    if not defective:
        # Biorthonormalize: M = VL^dag VR is invertible for diagonalizable a;
        # absorbing M^-1 into the left family gives <l_i|r_j> = delta_ij.
        m = vl.conj().T @ vr
        try:
            vl = vl @ np.linalg.inv(m).conj().T
        except np.linalg.LinAlgError:
            defective = True
    if defective:
        vl = np.full_like(vl, np.nan)
    return BiorthEig(values=values, right_vectors=vr, left_vectors=vl,
                     defective_flag=defective)


def svd(a):
    """Singular value decomposition ``a = U diag(s) V^dag``, s descending."""
    a = np.asarray(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return s, u, vh.conj().T


def pfaffian(r):
    """Pfaffian of a real skew-symmetric matrix.

    Householder reduction to skew tridiagonal form T = Q R Q^T; then
    Pf(R) = det(Q) * prod of superdiagonal entries of T.  Each reflector
    contributes det = -1, tracked exactly, so the sign is exact up to
    floating-point cancellation in the entries themselves.
    """
    r = np.asarray(r, dtype=float)
    r = _as_square(r)
    n = r.shape[0]
    if n % 2:
        raise OddDimension(f"dimension {n} is odd")
    if np.max(np.abs(r + r.T)) >= HERMITICITY_TOL * max(1.0, np.max(np.abs(r))):
        raise NotSkewSymmetric("max|R + R^T| too large")
    if n == 0:
        return 1.0

    a = r.copy()
    det_q = 1.0
    for k in range(n - 2):
        x = a[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        # Householder vector sending x to -sign(x_0)*alpha*e_1.
        v = x.copy()
        v[0] += np.sign(x[0]) * alpha if x[0] != 0 else alpha
        vn = np.linalg.norm(v)
        if vn == 0.0:
            continue
        v /= vn
        # Apply P = 1 - 2 v v^T from both sides to the trailing block:
        # B -> B - 2(Bv)v^T - 2v(v^T B) + 4(v^T B v) vv^T.
        block = a[k + 1:, k + 1:]
        bv = block @ v
        btv = block.T @ v
        vbv = float(v @ bv)
        block -= 2.0 * np.outer(bv, v)
        block -= 2.0 * np.outer(v, btv)
        block += 4.0 * vbv * np.outer(v, v)
        a[k + 1:, k] -= 2.0 * v * (v @ a[k + 1:, k])
        a[k, k + 1:] = -a[k + 1:, k]
        det_q *= -1.0
    # Skew symmetrize against round-off before reading the superdiagonal.
    a = 0.5 * (a - a.T)
    pf = det_q
    for k in range(0, n, 2):
        pf *= a[k, k + 1]
    return float(pf)


def weyl_shift(o, o_prime):
    """Maximal sorted-eigenvalue shift and the operator-norm difference.

    Returns ``(max_shift, norm_diff)`` with both spectra sorted descending;
    Weyl's perturbation theorem guarantees ``max_shift <= norm_diff``.
    """
    o = _as_square(o)
    o_prime = _as_square(o_prime)
    if o.shape != o_prime.shape:
        raise DimensionMismatch(f"{o.shape} vs {o_prime.shape}")
    ev = np.sort(herm_eig(o).values)[::-1]
    ev_p = np.sort(herm_eig(o_prime).values)[::-1]
    max_shift = float(np.max(np.abs(ev - ev_p)))
    norm_diff = float(np.linalg.norm(o - o_prime, 2))
    return max_shift, norm_diff


def cluster_degeneracies(values, tol=1e-8):
    """Agglomerate sorted values into clusters separated by gaps > tol.

    Returns a list of ``(mean value, multiplicity, width)`` tuples in the
    order of the input sort.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    clusters = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size or abs(values[i] - values[i - 1]) > tol:
            chunk = values[start:i]
            clusters.append((float(np.mean(chunk)), int(chunk.size),
                             float(np.max(chunk) - np.min(chunk))))
            start = i
    return clusters
