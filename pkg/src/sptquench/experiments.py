"""Experiment drivers: deterministic, seeded, emitting plain row dicts.

Every stochastic experiment draws from a counter-based Philox stream keyed
by (master seed, experiment tag, realization index), so results are
bit-identical for a given seed regardless of execution order or thread
count.  Aggregation uses fixed-order summation over the realization index.
"""

import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import channelbounds as cb
from . import freefermion as ff
from . import lrbounds
from . import models
from . import mps as mpslib
from . import mpu as mpulib
from .errors import GapClosure, InvalidGeometry, SizeOverflow
from .linalg import cluster_degeneracies


def substream(seed, tag, realization=0):
    """Deterministic Philox generator for (seed, tag, realization)."""
    tag_word = zlib.crc32(tag.encode()) & 0xFFFFFFFF
    bg = np.random.Philox(key=np.uint64(seed),
                          counter=[np.uint64(realization), np.uint64(tag_word),
                                   np.uint64(0), np.uint64(0)])
    return np.random.Generator(bg)


def _map_ordered(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- free fermions --------------------------------------------------------

def default_k_grid(l):
    """Default momentum-grid size for an l-cell segment on the infinite
    lattice: max(1024, 16 l)."""
    return max(1024, 16 * l)


def quench_ssh(j1, j2, j1_post, j2_post, l, times, n_k=None, threads=1):
    """SSH quench on the infinite lattice: full single-particle ES vs time.

    Returns rows with t, the ld segment ES values descending, and the gap.
    """
    model0 = models.ssh(j1, j2)
    model1 = models.ssh(j1_post, j2_post)
    p0 = ff.bloch_projector_grid(model0, n_k or default_k_grid(l))

    def one(t):
        pt = ff.evolve_projector(p0, model1, t)
        rep = ff.sp_es(pt, l)
        return {"t": float(t), "xi": rep.values, "gap": rep.gap}

    return _map_ordered(one, list(times), threads)


def gap_crossing_time(rows, threshold=1e-3):
    """First time the single-particle gap exceeds the threshold, by linear
    interpolation in log-gap between bracketing samples; None if never."""
    for prev, cur in zip(rows, rows[1:]):
        if prev["gap"] < threshold <= cur["gap"]:
            g0, g1 = np.log(max(prev["gap"], 1e-300)), np.log(cur["gap"])
            t0, t1 = prev["t"], cur["t"]
            return t0 + (np.log(threshold) - g0) * (t1 - t0) / (g1 - g0)
    return None


def lr_velocity_scan(j1, j2, j1_post, j2_post, kappas, threads=1):
    """Rows (kappa, v, C) for the quench, one per kappa."""
    model0 = models.ssh(j1, j2)
    model1 = models.ssh(j1_post, j2_post)

    def one(kappa):
        consts = lrbounds.lr_constants(model0, model1, kappa)
        return {"kappa": float(kappa), "v": consts.v, "C": consts.C}

    return _map_ordered(one, list(kappas), threads)


def flatband(n_chains, times):
    """Rows (t, numeric ES ascending, analytic ES ascending)."""
    rows = []
    for t in times:
        rep, analytic = models.flatband_es(n_chains, t)
        rows.append({"t": float(t),
                     "xi_numeric": np.sort(rep.values),
                     "xi_analytic": analytic})
    return rows


def disordered_ssh(l, pre, post, times, realizations, seed, threads=1,
                   gap_tol=1e-8):
    """Disorder-averaged SSH quench, asymmetric bipartition L = 2l + 1.

    ``pre`` and ``post`` are (Jbar, Jbar_prime, f) triples; the initial
    state is the Fermi sea of the pre-quench disordered Hamiltonian (f = 0
    reproduces the clean model).  Returns per-time aggregate rows; gapless
    realizations are skipped and counted.
    """
    cells = 2 * l + 1
    times = np.asarray(list(times), dtype=float)

    def build_h(jbar, jpbar, f, rng):
        j_intra = rng.uniform((1 - f) * jbar, (1 + f) * jbar, size=cells)
        j_inter = rng.uniform((1 - f) * jpbar, (1 + f) * jpbar, size=cells)
        h = np.zeros((2 * cells, 2 * cells))
        for c in range(cells):
            a, b = 2 * c, 2 * c + 1
            a_next = 2 * ((c + 1) % cells)
            h[b, a] = h[a, b] = -j_intra[c]
            h[a_next, b] = h[b, a_next] = -j_inter[c]
        return ff.RealSpaceHamiltonian(cells=cells, bands=2, matrix=h + 0j)

    def one(r):
        rng = substream(seed, "disorder-ssh", r)
        try:
            h0 = build_h(*pre, rng)
            p0 = ff.fermi_projector(h0, gap_tol=gap_tol)
            h1 = build_h(*post, rng)
        except GapClosure:
            return None
        eig = np.linalg.eigh(h1.matrix)
        gaps = np.empty(times.size)
        ents = np.empty(times.size)
        for i, t in enumerate(times):
            phase = np.exp(-1j * eig.eigenvalues * t)
            u = (eig.eigenvectors * phase) @ eig.eigenvectors.conj().T
            pt = ff.FermiProjector(matrix=u @ p0.matrix @ u.conj().T, bands=2,
                                   occupied_count=p0.occupied_count)
            rep = ff.sp_es(pt, l)
            gaps[i] = rep.gap
            ents[i] = ff.entanglement_entropy(rep)
        return gaps, ents

    results = _map_ordered(one, range(realizations), threads)
    kept = [res for res in results if res is not None]
    skipped = realizations - len(kept)
    gaps = np.array([g for g, _ in kept])
    ents = np.array([e for _, e in kept])
    rows = []
    n = max(len(kept), 1)
    for i, t in enumerate(times):
        rows.append({
            "t": float(t),
            "n_ok": len(kept),
            "n_skipped": skipped,
            "gap_mean": float(np.mean(gaps[:, i])) if kept else np.nan,
            "gap_stderr": float(np.std(gaps[:, i]) / np.sqrt(n)) if kept else np.nan,
            "gap_median": float(np.median(gaps[:, i])) if kept else np.nan,
            "entropy_mean": float(np.mean(ents[:, i])) if kept else np.nan,
            "entropy_stderr": float(np.std(ents[:, i]) / np.sqrt(n)) if kept else np.nan,
        })
    return rows


# --- interacting ----------------------------------------------------------

def mps_quench(p, q, theta, l_values, t_values, labels=(1.0, 1.0, -1.0, -1.0)):
    """Stroboscopic quench of the Z2xZ2 MPS by a diagonal symmetric MPU.

    Measures the many-body gap (r = 2) of each segment length after each
    number of steps and tabulates it against the infinite-chain theorem
    bound and the direct channel-distance bound sqrt(2 D) ||E^l - E^inf||.
    """
    psi0 = models.z2z2_mps(p, q)
    ch0 = mpslib.transfer_analysis(psi0)
    step = mpulib.ising_zz_mpu(theta, np.asarray(labels))
    mpulib.validate(step, (2, 3))
    k0, _ = mpulib.simpleness_k0(step, 4)
    rows = []
    state = psi0
    for t in range(max(t_values) + 1):
        if t > 0:
            state = mpulib.apply(step, state)
        if t not in t_values:
            continue
        ch = mpslib.transfer_analysis(state)
        for l in l_values:
            rep = mpslib.es_segment(state, l, ch)
            gap = mpslib.mb_gap(rep, 2)
            direct = np.sqrt(2 * state.bond_dim) * cb.channel_distance(ch, l)
            inputs = cb.BoundInputs(bond_dim=psi0.bond_dim,
                                    mpu_bond_dim=step.bond_dim,
                                    mu=ch0.mu, k0=k0, l=l, t=t)
            try:
                bound = cb.thm2_bound(inputs)
            except Exception:
                bound = np.nan
            rows.append({"t": t, "l": l, "mb_gap": gap,
                         "thm2_bound": bound, "channel_bound": float(direct)})
    return rows


def cocycle(n_order, nu, subgroup, times, seed, draw=0):
    """ES trace of one random-coupling cocycle quench.

    Rows carry the normalized ES (descending), the top-cluster degeneracy,
    and the splitting count s = r(0) / r(t).
    """
    rng = substream(seed, "cocycle", draw)
    model = models.make_cocycle_model(n_order, nu, subgroup, rng)
    es0 = models.cocycle_es(model, 0.0)
    r0 = cluster_degeneracies(es0, tol=1e-8)[0][1]
    rows = []
    for t in times:
        es = models.cocycle_es(model, t)
        top = cluster_degeneracies(es, tol=1e-8)[0][1]
        split = r0 // top if top and r0 % top == 0 else -1
        rows.append({"t": float(t), "top_degeneracy": int(top),
                     "split_count": int(split), "zeta": es})
    return rows


def mbl(length, p, q, j0, kappa_decay, times, realizations, seed, cut=None,
        threads=1):
    """Phenomenological localized-interaction quench of the Z2xZ2 state.

    The dense ring state on ``length`` sites (2*length qubits) evolves
    under random diagonal ZZ couplings decaying exponentially with qubit
    separation; rows carry disorder-averaged half-cut entropy and
    many-body gap (r = 2).
    """
    if 4 ** length > 4 ** 8:
        raise SizeOverflow("dense-state budget is 4^8")
    cut = cut if cut is not None else length // 2
    if not 1 <= cut < length:
        raise InvalidGeometry(f"need 1 <= cut < length, got cut={cut}, "
                              f"length={length}")
    psi0 = mpslib.dense_state(models.z2z2_mps(p, q), length)
    n_qubits = 2 * length
    dim = psi0.size
    # z values of every qubit in every basis state
    idx = np.arange(dim)
    zvals = np.empty((dim, n_qubits))
    rem = idx.copy()
    for s in reversed(range(n_qubits)):
        zvals[:, s] = 1.0 - 2.0 * (rem % 2)
        rem //= 2
    times = np.asarray(list(times), dtype=float)
    d_cut = 4 ** cut

    def one(r):
        rng = substream(seed, "mbl", r)
        jmat = np.zeros((n_qubits, n_qubits))
        for j in range(n_qubits):
            for jp in range(j + 1, n_qubits):
                w = j0 * np.exp(-kappa_decay * (jp - j))
                jmat[j, jp] = rng.uniform(-w, w)
        energies = np.einsum("sj,jk,sk->s", zvals, jmat, zvals)
        ents = np.empty(times.size)
        gaps = np.empty(times.size)
        for i, t in enumerate(times):
            psi = psi0 * np.exp(-1j * energies * t)
            s = np.linalg.svd(psi.reshape(d_cut, dim // d_cut),
                              compute_uv=False)
            probs = s ** 2
            probs = probs[probs > 1e-16]
            ents[i] = float(-np.sum(probs * np.log(probs)))
            vals = np.sort(s ** 2)[::-1]
            gaps[i] = float(abs(vals[0] - vals[3]))
        return ents, gaps

    results = _map_ordered(one, range(realizations), threads)
    ents = np.array([e for e, _ in results])
    gaps = np.array([g for _, g in results])
    rows = []
    n = realizations
    for i, t in enumerate(times):
        rows.append({
            "t": float(t),
            "entropy_mean": float(np.mean(ents[:, i])),
            "entropy_stderr": float(np.std(ents[:, i]) / np.sqrt(n)),
            "gap_mean": float(np.mean(gaps[:, i])),
            "gap_stderr": float(np.std(gaps[:, i]) / np.sqrt(n)),
        })
    return rows
