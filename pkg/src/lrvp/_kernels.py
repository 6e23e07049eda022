"""Hot numeric kernels with a numba backend and a pure-NumPy fallback.

Every kernel is written as plain Python over NumPy arrays so the same source
runs jitted (default) or interpreted. Set the environment variable
``LRVP_NO_NUMBA=1`` before import to force the interpreted fallback; the
``benchmarks/`` script compares both. Kernels are compiled with
``fastmath=False`` so both backends produce bit-identical results.

Randomness inside kernels comes from a splitmix64 counter stream seeded per
(seed, read) pair, which keeps solver output independent of thread scheduling.
"""

import math
import os

import numpy as np

_DISABLE = os.environ.get("LRVP_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

NUMBA_ENABLED = False
if not _DISABLE:
    try:
        from numba import njit

        _jit = njit(cache=True, nogil=True, fastmath=False)
        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if not NUMBA_ENABLED:
    def _jit(fn):
        return fn


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# splitmix64 constants; uint64 arithmetic wraps mod 2^64 in both backends
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_INV_2_64 = float(2.0 ** -64)


@_jit
def _mix64(z):
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    return z ^ (z >> _U31)


@_jit
def _next_uniform(state):
    """Advance one splitmix64 step; returns (new_state, uniform in [0, 1))."""
    state = state + _GOLDEN
    return state, _mix64(state) * _INV_2_64


@_jit
def _stream_state(seed, index):
    # distinct, well-mixed starting state per (seed, stream index)
    return _mix64(seed + _GOLDEN * (np.uint64(index) + np.uint64(1)))


@_jit
def _anneal_kernel(h, indptr, indices, data, betas, num_reads, seed, samples_out):
    """Metropolis annealing over an Ising problem in CSR adjacency form.

    Each read runs an independent chain: random initial spins, one fixed spin
    visitation order (re-randomized between reads), and one accept test per
    spin per sweep. The final state of each read lands in ``samples_out``.
    One uniform is consumed per flip attempt regardless of outcome so the
    stream position never depends on the trajectory.
    """
    n = h.shape[0]
    num_sweeps = betas.shape[0]
    phi = np.empty(n, np.float64)
    s = np.empty(n, np.int8)
    perm = np.empty(n, np.int64)
    for r in range(num_reads):
        state = _stream_state(seed, r)
        for i in range(n):
            state, u = _next_uniform(state)
            if u >= 0.5:
                s[i] = 1
            else:
                s[i] = -1
        for i in range(n):
            perm[i] = i
        for i in range(n - 1, 0, -1):
            state, u = _next_uniform(state)
            j = int(u * (i + 1))
            t = perm[i]
            perm[i] = perm[j]
            perm[j] = t
        # local fields phi_i = h_i + sum_j J_ij s_j, ascending j (CSR sorted)
        for i in range(n):
            acc = h[i]
            for ptr in range(indptr[i], indptr[i + 1]):
                acc += data[ptr] * s[indices[ptr]]
            phi[i] = acc
        for sw in range(num_sweeps):
            beta = betas[sw]
            for k in range(n):
                i = perm[k]
                d_e = -2.0 * s[i] * phi[i]
                state, u = _next_uniform(state)
                if d_e <= 0.0 or u < math.exp(-beta * d_e):
                    s[i] = -s[i]
                    si = 2.0 * s[i]
                    for ptr in range(indptr[i], indptr[i + 1]):
                        phi[indices[ptr]] += data[ptr] * si
        for i in range(n):
            samples_out[r, i] = s[i]


@_jit
def _sphere_kernel(rmat, z, l_out):
    """Schnorr-Euchner search: min over integer l of ||z - R l||^2.

    ``rmat`` must be upper triangular with positive diagonal. Candidates at
    each level are taken in zig-zag order around the Babai point, so the
    per-level cost is monotone and a level can be abandoned at the first
    candidate that cannot beat the incumbent. Returns (best_dist, nodes).
    """
    n = rmat.shape[0]
    targets = np.empty((n, n), np.float64)
    for j in range(n):
        targets[n - 1, j] = z[j]
    u = np.zeros(n, np.int64)
    step = np.zeros(n, np.int64)
    dist = np.zeros(n, np.float64)
    k = n - 1
    c = targets[k, k] / rmat[k, k]
    u[k] = np.int64(math.floor(c + 0.5))
    step[k] = 1 if c >= u[k] else -1
    best = np.inf
    nodes = 0
    while True:
        nodes += 1
        e = targets[k, k] - rmat[k, k] * u[k]
        newdist = dist[k] + e * e
        if newdist < best:
            if k > 0:
                for j in range(k):
                    targets[k - 1, j] = targets[k, j] - rmat[j, k] * u[k]
                k -= 1
                dist[k] = newdist
                c = targets[k, k] / rmat[k, k]
                u[k] = np.int64(math.floor(c + 0.5))
                step[k] = 1 if c >= u[k] else -1
                continue
            best = newdist
            for j in range(n):
                l_out[j] = u[j]
            if k == n - 1:
                break
            k += 1
        else:
            if k == n - 1:
                break
            k += 1
        u[k] += step[k]
        step[k] = -step[k] - (1 if step[k] > 0 else -1)
    return best, nodes


@_jit
def _restricted_kernel(rmat, z, l_out):
    """Exhaustive min of ||z - R l||^2 over l in {0,1,2}^n, lex-first on ties.

    Depth-first with digits tried in ascending order; a subtree is pruned when
    its partial cost already reaches the incumbent (completions only add
    squares). Strict-improvement updates keep the lexicographically first
    minimizer. Returns (best_dist, nodes).
    """
    n = rmat.shape[0]
    targets = np.empty((n, n), np.float64)
    for j in range(n):
        targets[n - 1, j] = z[j]
    u = np.zeros(n, np.int64)
    dist = np.zeros(n, np.float64)
    best = np.inf
    nodes = 0
    k = n - 1
    u[k] = 0
    while True:
        nodes += 1
        e = targets[k, k] - rmat[k, k] * u[k]
        newdist = dist[k] + e * e
        descend = False
        if newdist < best:
            if k > 0:
                descend = True
            else:
                best = newdist
                for j in range(n):
                    l_out[j] = u[j]
        if descend:
            for j in range(k):
                targets[k - 1, j] = targets[k, j] - rmat[j, k] * u[k]
            k -= 1
            dist[k] = newdist
            u[k] = 0
            continue
        while u[k] == 2:
            if k == n - 1:
                return best, nodes
            k += 1
        u[k] += 1


@_jit
def _gs_resync(fmat, mu, bsq):
    # recompute Gram-Schmidt data from scratch: B*_j norms and mu from QR
    n = fmat.shape[1]
    _, r = np.linalg.qr(fmat)
    for i in range(n):
        bsq[i] = r[i, i] * r[i, i]
        for j in range(i):
            mu[i, j] = r[j, i] / r[j, j]


@_jit
def _size_reduce(fmat, zmat, zinv, mu, k, j):
    # enforce |mu_kj| <= 1/2, mirroring the column op on Z and its inverse
    mukj = mu[k, j]
    if abs(mukj) > 0.5:
        q = math.floor(mukj + 0.5)
        qi = np.int64(q)
        fmat[:, k] -= q * fmat[:, j]
        zmat[:, k] -= qi * zmat[:, j]
        zinv[j, :] += qi * zinv[k, :]
        for i in range(j):
            mu[k, i] -= q * mu[j, i]
        mu[k, j] -= q


@_jit
def _lll_swap(fmat, zmat, zinv, mu, bsq, k):
    # swap basis vectors k-1, k and patch Gram-Schmidt data in place
    for r in range(fmat.shape[0]):
        t = fmat[r, k]
        fmat[r, k] = fmat[r, k - 1]
        fmat[r, k - 1] = t
    n = zmat.shape[0]
    for r in range(n):
        ti = zmat[r, k]
        zmat[r, k] = zmat[r, k - 1]
        zmat[r, k - 1] = ti
    for c in range(n):
        ti = zinv[k, c]
        zinv[k, c] = zinv[k - 1, c]
        zinv[k - 1, c] = ti
    for j in range(k - 1):
        t = mu[k, j]
        mu[k, j] = mu[k - 1, j]
        mu[k - 1, j] = t
    m = mu[k, k - 1]
    b_new = bsq[k] + m * m * bsq[k - 1]
    mu[k, k - 1] = m * bsq[k - 1] / b_new
    bsq[k] = bsq[k - 1] * bsq[k] / b_new
    bsq[k - 1] = b_new
    for i in range(k + 1, n):
        t = mu[i, k]
        mu[i, k] = mu[i, k - 1] - m * t
        mu[i, k - 1] = t + mu[k, k - 1] * mu[i, k]


@_jit
def _lll_kernel(gmat, delta, max_swaps, resync_every):
    """LLL reduction of the columns of ``gmat`` with exact unimodular tracking.

    Returns (F, Z, Zinv, swaps, ok). Z and Zinv are int64 and updated per
    elementary operation, so F = G @ Z and Z @ Zinv = I hold exactly whenever
    ``ok`` is true. Gram-Schmidt data is updated incrementally and resynced
    from a fresh QR every ``resync_every`` swaps to bound float drift.
    """
    rows = gmat.shape[0]
    n = gmat.shape[1]
    fmat = gmat.copy()
    zmat = np.eye(n, dtype=np.int64)
    zinv = np.eye(n, dtype=np.int64)
    mu = np.zeros((n, n), np.float64)
    bsq = np.zeros(n, np.float64)
    _gs_resync(fmat, mu, bsq)
    swaps = 0
    since = 0
    ok = True
    k = 1
    while k < n:
        _size_reduce(fmat, zmat, zinv, mu, k, k - 1)
        if bsq[k] < (delta - mu[k, k - 1] * mu[k, k - 1]) * bsq[k - 1]:
            _lll_swap(fmat, zmat, zinv, mu, bsq, k)
            swaps += 1
            since += 1
            if swaps > max_swaps:
                ok = False
                break
            if since >= resync_every:
                _gs_resync(fmat, mu, bsq)
                since = 0
            k = max(k - 1, 1)
        else:
            for j in range(k - 2, -1, -1):
                _size_reduce(fmat, zmat, zinv, mu, k, j)
            k += 1
    return fmat, zmat, zinv, swaps, ok


# ---------------------------------------------------------------------------
# dispatch wrappers: normalize arguments and silence the uint64 wraparound
# warnings NumPy emits for scalar arithmetic on the fallback path


def anneal_ising(h, indptr, indices, data, betas, num_reads, seed):
    """Run ``num_reads`` annealing chains; returns int8 samples (reads, n)."""
    samples = np.empty((num_reads, h.shape[0]), np.int8)
    with np.errstate(over="ignore"):
        _anneal_kernel(
            np.ascontiguousarray(h, np.float64),
            np.ascontiguousarray(indptr, np.int64),
            np.ascontiguousarray(indices, np.int64),
            np.ascontiguousarray(data, np.float64),
            np.ascontiguousarray(betas, np.float64),
            int(num_reads),
            np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF),
            samples,
        )
    return samples


def sphere_search(rmat, z):
    """Closest integer vector for upper-triangular ``rmat``; returns (l, dist, nodes)."""
    n = rmat.shape[0]
    l_out = np.zeros(n, np.int64)
    best, nodes = _sphere_kernel(
        np.ascontiguousarray(rmat, np.float64),
        np.ascontiguousarray(z, np.float64),
        l_out,
    )
    return l_out, float(best), int(nodes)


def restricted_search(rmat, z):
    """Best l in {0,1,2}^n for upper-triangular ``rmat``; returns (l, dist, nodes)."""
    n = rmat.shape[0]
    l_out = np.zeros(n, np.int64)
    best, nodes = _restricted_kernel(
        np.ascontiguousarray(rmat, np.float64),
        np.ascontiguousarray(z, np.float64),
        l_out,
    )
    return l_out, float(best), int(nodes)


def lll_reduce_core(gmat, delta, max_swaps, resync_every=64):
    """Raw LLL pass; returns (F, Z, Zinv, swaps, ok) without integrity checks."""
    return _lll_kernel(
        np.ascontiguousarray(gmat, np.float64),
        float(delta),
        int(max_swaps),
        int(resync_every),
    )
