"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba and a
vectorised numpy version (or, for inherently sequential loops, the same loop
run as plain Python). ``PPIAUDIT_NO_NUMBA=1`` selects the fallback path at
import time. Both paths produce identical results on the same inputs; the
benchmark in ``benchmarks/bench_kernels.py`` compares their speed.

All graph kernels take CSR arrays of a symmetric adjacency with sorted
column indices per row.
"""

import numpy as np
import scipy.sparse as sp

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# MCL inflation + pruning on CSC columns


def _inflate_prune_loop(indptr, indices, data, power, eps):
    n = indptr.shape[0] - 1
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    out_idx = np.empty(indices.shape[0], dtype=np.int64)
    out_dat = np.empty(data.shape[0], dtype=np.float64)
    tmp = np.empty(data.shape[0], dtype=np.float64)
    k = 0
    for j in range(n):
        a = indptr[j]
        b = indptr[j + 1]
        s = 0.0
        for t in range(a, b):
            v = data[t] ** power
            tmp[t] = v
            s += v
        if s <= 0.0:
            out_ptr[j + 1] = k
            continue
        kept = 0.0
        best = a
        bestv = -1.0
        for t in range(a, b):
            v = tmp[t] / s
            tmp[t] = v
            if v > bestv:
                bestv = v
                best = t
            if v >= eps:
                kept += v
        if kept <= 0.0:
            out_idx[k] = indices[best]
            out_dat[k] = 1.0
            k += 1
        else:
            for t in range(a, b):
                v = tmp[t]
                if v >= eps:
                    out_idx[k] = indices[t]
                    out_dat[k] = v / kept
                    k += 1
        out_ptr[j + 1] = k
    return out_ptr, out_idx[:k].copy(), out_dat[:k].copy()


def _inflate_prune_numpy(indptr, indices, data, power, eps):
    n = indptr.shape[0] - 1
    counts = np.diff(indptr)
    col = np.repeat(np.arange(n), counts)
    pw = data**power
    s = np.bincount(col, weights=pw, minlength=n)
    nrm = pw / s[col]
    keep = nrm >= eps
    kept = np.bincount(col, weights=np.where(keep, nrm, 0.0), minlength=n)
    empty = (kept <= 0.0) & (counts > 0)
    if empty.any():
        # column fully pruned: keep its first maximal entry alone
        colmax = np.full(n, -1.0)
        np.maximum.at(colmax, col, nrm)
        first = np.zeros(nrm.shape[0], dtype=bool)
        seen = np.zeros(n, dtype=bool)
        for t in np.flatnonzero(empty[col] & (nrm == colmax[col])):
            c = col[t]
            if not seen[c]:
                seen[c] = True
                first[t] = True
        keep = keep | first
        kept = np.where(empty, 1.0, kept)
        nrm = np.where(first, 1.0, nrm)
    out_dat = nrm[keep] / kept[col[keep]]
    out_idx = indices[keep].astype(np.int64)
    out_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(col[keep], minlength=n), out=out_ptr[1:])
    return out_ptr, out_idx, out_dat


# ---------------------------------------------------------------------------
# k-core numbers


def _core_numbers_loop(indptr, indices):
    # Batagelj-Zaversnik bucket peeling, O(m)
    n = indptr.shape[0] - 1
    deg = np.empty(n, dtype=np.int64)
    md = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > md:
            md = deg[v]
    bins = np.zeros(md + 1, dtype=np.int64)
    for v in range(n):
        bins[deg[v]] += 1
    start = 0
    for d in range(md + 1):
        num = bins[d]
        bins[d] = start
        start += num
    pos = np.empty(n, dtype=np.int64)
    vert = np.empty(n, dtype=np.int64)
    for v in range(n):
        pos[v] = bins[deg[v]]
        vert[pos[v]] = v
        bins[deg[v]] += 1
    for d in range(md, 0, -1):
        bins[d] = bins[d - 1]
    if md >= 0:
        bins[0] = 0
    for i in range(n):
        v = vert[i]
        for t in range(indptr[v], indptr[v + 1]):
            u = indices[t]
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bins[du]
                w = vert[pw]
                if u != w:
                    pos[u] = pw
                    vert[pu] = w
                    pos[w] = pu
                    vert[pw] = u
                bins[du] += 1
                deg[u] -= 1
    return deg


def _core_numbers_numpy(indptr, indices):
    n = indptr.shape[0] - 1
    deg = np.diff(indptr).astype(np.int64)
    row = np.repeat(np.arange(n), np.diff(indptr))
    core = np.zeros(n, dtype=np.int64)
    alive = np.ones(n, dtype=bool)
    k = 0
    while alive.any():
        k = max(k, int(deg[alive].min()))
        while True:
            peel = alive & (deg <= k)
            if not peel.any():
                break
            alive[peel] = False
            core[peel] = k
            hit = peel[row]
            deg -= np.bincount(indices[hit], minlength=n)
    return core


# ---------------------------------------------------------------------------
# triangles per node (unweighted)


def _triangles_loop(indptr, indices):
    n = indptr.shape[0] - 1
    tri = np.zeros(n, dtype=np.int64)
    for u in range(n):
        for t in range(indptr[u], indptr[u + 1]):
            v = indices[t]
            if v <= u:
                continue
            # common neighbours w > v of u and v
            i = indptr[u]
            j = indptr[v]
            ie = indptr[u + 1]
            je = indptr[v + 1]
            while i < ie and j < je:
                a = indices[i]
                b = indices[j]
                if a == b:
                    if a > v:
                        tri[u] += 1
                        tri[v] += 1
                        tri[a] += 1
                    i += 1
                    j += 1
                elif a < b:
                    i += 1
                else:
                    j += 1
    return tri


def _triangles_numpy(indptr, indices):
    n = indptr.shape[0] - 1
    a = sp.csr_matrix(
        (np.ones(indices.shape[0], dtype=np.int64), indices, indptr), shape=(n, n)
    )
    paths = (a @ a).multiply(a)
    return (np.asarray(paths.sum(axis=1)).ravel() // 2).astype(np.int64)


# ---------------------------------------------------------------------------
# SLPA speaker/listener propagation


def _slpa_loop(indptr, indices, weights, orders, uniforms, use_weights):
    n = indptr.shape[0] - 1
    steps = orders.shape[0]
    mem = np.empty((n, steps + 1), dtype=np.int64)
    length = np.ones(n, dtype=np.int64)
    maxdeg = 1
    for v in range(n):
        mem[v, 0] = v
        d = indptr[v + 1] - indptr[v]
        if d > maxdeg:
            maxdeg = d
    labs = np.empty(maxdeg, dtype=np.int64)
    votes = np.empty(maxdeg, dtype=np.float64)
    for s in range(steps):
        for r in range(n):
            i = orders[s, r]
            a = indptr[i]
            b = indptr[i + 1]
            if a == b:
                mem[i, length[i]] = mem[i, 0]
                length[i] += 1
                continue
            m = 0
            for e in range(a, b):
                j = indices[e]
                size = length[j]
                k = int(uniforms[s, e] * size)
                if k >= size:
                    k = size - 1
                lab = mem[j, k]
                wt = weights[e] if use_weights else 1.0
                found = False
                for q in range(m):
                    if labs[q] == lab:
                        votes[q] += wt
                        found = True
                        break
                if not found:
                    labs[m] = lab
                    votes[m] = wt
                    m += 1
            best = labs[0]
            bestv = votes[0]
            for q in range(1, m):
                if votes[q] > bestv or (votes[q] == bestv and labs[q] < best):
                    best = labs[q]
                    bestv = votes[q]
            mem[i, length[i]] = best
            length[i] += 1
    return mem


# ---------------------------------------------------------------------------
# dispatch

_inflate_prune_jit = njit(cache=True)(_inflate_prune_loop)
_core_numbers_jit = njit(cache=True)(_core_numbers_loop)
_triangles_jit = njit(cache=True)(_triangles_loop)
_slpa_jit = njit(cache=True)(_slpa_loop)

IMPLS = {
    "numba": {
        "inflate_prune": _inflate_prune_jit,
        "core_numbers": _core_numbers_jit,
        "triangles": _triangles_jit,
        "slpa": _slpa_jit,
    },
    "numpy": {
        "inflate_prune": _inflate_prune_numpy,
        "core_numbers": _core_numbers_numpy,
        "triangles": _triangles_numpy,
        "slpa": _slpa_loop,
    },
}

_active = IMPLS["numba" if USE_NUMBA else "numpy"]


def inflate_prune(indptr, indices, data, power: float, eps: float):
    """Raise each CSC column to ``power``, normalise, prune below ``eps``, renormalise.

    A column whose entries all fall below ``eps`` keeps its largest entry
    (first one on ties) with value 1.
    """
    return _active["inflate_prune"](
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(data, dtype=np.float64),
        float(power),
        float(eps),
    )


def core_numbers(indptr, indices) -> np.ndarray:
    return _active["core_numbers"](
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
    )


def triangles(indptr, indices) -> np.ndarray:
    return _active["triangles"](
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
    )


def slpa_memory(indptr, indices, weights, orders, uniforms, use_weights: bool = True) -> np.ndarray:
    """Run the asynchronous SLPA loop on pre-drawn randomness.

    ``orders[s]`` is the listener order of step ``s`` and ``uniforms[s, e]``
    picks the memory slot spoken over CSR slot ``e``. Returns the
    ``n x (steps + 1)`` label memory, column 0 holding each node's own label.
    """
    return _active["slpa"](
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(orders, dtype=np.int64),
        np.ascontiguousarray(uniforms, dtype=np.float64),
        bool(use_weights),
    )
