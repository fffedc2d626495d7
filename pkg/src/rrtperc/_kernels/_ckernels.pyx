# cython: language_level=3
"""Compiled hot loops.

Every routine here has a line-for-line twin in ``_fallback.py``. Random
numbers are taken exclusively as ``next_double`` draws from the numpy
bit generator behind the supplied ``Generator``, in the same order as the
fallback, so both backends return identical results for identical seeds.

Vertices are 0-based; ``parent[0] == -1``.
"""
import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, floor, log, log1p
from libc.stdlib cimport free, malloc
from libc.string cimport memset
from numpy.random cimport bitgen_t

cnp.import_array()

ctypedef cnp.int64_t i64


cdef bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng must be a numpy Generator")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


def site_labels(const i64[::1] parent, const cnp.uint8_t[::1] marks):
    cdef Py_ssize_t n = parent.shape[0], v
    cdef i64 u
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] lab = out
    if n == 0:
        return out
    lab[0] = 0
    for v in range(1, n):
        u = parent[v]
        if marks[v] and marks[u]:
            lab[v] = lab[u]
        else:
            lab[v] = v
    return out


def bond_labels(const i64[::1] parent, const cnp.uint8_t[::1] marks):
    cdef Py_ssize_t n = parent.shape[0], v
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] lab = out
    if n == 0:
        return out
    lab[0] = 0
    for v in range(1, n):
        if marks[v]:
            lab[v] = lab[parent[v]]
        else:
            lab[v] = v
    return out


def piece_labels(const i64[::1] parent, const i64[::1] bond):
    cdef Py_ssize_t n = parent.shape[0], v
    cdef i64 u
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] lab = out
    if n == 0:
        return out
    lab[0] = 0
    for v in range(1, n):
        if bond[v] == v:
            lab[v] = v
        else:
            u = parent[v]
            if bond[u] == u:
                lab[v] = v
            else:
                lab[v] = lab[u]
    return out


def census_chain(Py_ssize_t n, double p, Py_ssize_t reps, object rng):
    cdef bitgen_t *bg = _bitgen(rng)
    out = np.zeros((reps, n + 1), dtype=np.int64)
    cdef i64[:, ::1] X = out
    cdef Py_ssize_t r, m, k
    cdef i64 idx
    cdef double u
    with rng.bit_generator.lock, nogil:
        for r in range(reps):
            if bg.next_double(bg.state) < p:
                X[r, 1] = 1
            else:
                X[r, 0] = 1
            for m in range(1, n):
                u = bg.next_double(bg.state)
                if u >= p:
                    X[r, 0] += 1
                    continue
                idx = <i64> (bg.next_double(bg.state) * m)
                if idx < X[r, 0]:
                    X[r, 1] += 1
                    continue
                idx -= X[r, 0]
                k = 1
                while idx >= k * X[r, k]:
                    idx -= k * X[r, k]
                    k += 1
                X[r, k] -= 1
                X[r, k + 1] += 1
    return out


cdef struct Fenwick:
    i64 *tree
    i64 *weight
    Py_ssize_t cap
    Py_ssize_t top


cdef int fw_init(Fenwick *fw, Py_ssize_t cap) nogil:
    fw.cap = cap
    fw.tree = <i64 *> malloc((cap + 1) * sizeof(i64))
    fw.weight = <i64 *> malloc(cap * sizeof(i64))
    if fw.tree == NULL or fw.weight == NULL:
        return -1
    memset(fw.tree, 0, (cap + 1) * sizeof(i64))
    memset(fw.weight, 0, cap * sizeof(i64))
    fw.top = 1
    while fw.top * 2 <= cap:
        fw.top *= 2
    return 0


cdef void fw_free(Fenwick *fw) nogil:
    free(fw.tree)
    free(fw.weight)


cdef void fw_add(Fenwick *fw, Py_ssize_t k, i64 delta) nogil:
    cdef Py_ssize_t i = k + 1
    fw.weight[k] += delta
    while i <= fw.cap:
        fw.tree[i] += delta
        i += i & (-i)


cdef Py_ssize_t fw_find(Fenwick *fw, i64 idx) nogil:
    # smallest class whose cumulative weight exceeds idx
    cdef Py_ssize_t pos = 0, step = fw.top
    while step > 0:
        if pos + step <= fw.cap and fw.tree[pos + step] <= idx:
            pos += step
            idx -= fw.tree[pos]
        step >>= 1
    return pos


cdef int fw_grow(Fenwick *fw, Py_ssize_t new_cap) nogil:
    cdef Fenwick nf
    cdef Py_ssize_t k
    if fw_init(&nf, new_cap) != 0:
        return -1
    for k in range(fw.cap):
        if fw.weight[k] != 0:
            fw_add(&nf, k, fw.weight[k])
    fw_free(fw)
    fw[0] = nf
    return 0


def gillespie(double p, Py_ssize_t h, double t_end, i64 n_end,
              const double[::1] record_times, Py_ssize_t class_cap, object rng):
    """Event-driven simulation of the cluster-type branching process.

    ``h < 0`` runs the untruncated process; otherwise types above ``h`` are
    pooled into the over-weighted vertex count.
    """
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Fenwick fw
    cdef Py_ssize_t cap, k, nrec = record_times.shape[0], ri = 0, kmax = 0
    cdef i64 N = 1, over = 0, idx
    cdef double t = 0.0, t_new, u
    cdef bint is_open, truncated = h >= 0, overflow = False
    rec_counts = []
    rec_over = np.zeros(nrec, dtype=np.int64)
    rec_N = np.zeros(nrec, dtype=np.int64)
    cdef i64[::1] ro = rec_over, rN = rec_N

    if truncated:
        cap = h + 1
    else:
        cap = 64 if class_cap > 64 else class_cap
    if fw_init(&fw, cap) != 0:
        fw_free(&fw)
        raise MemoryError()
    try:
        with rng.bit_generator.lock:
            if bg.next_double(bg.state) < p:
                if truncated and h == 0:
                    over = 1
                else:
                    fw_add(&fw, 1, 1)
                    kmax = 1
            else:
                fw_add(&fw, 0, 1)
            while True:
                if n_end > 0 and N >= n_end:
                    break
                u = bg.next_double(bg.state)
                t_new = t - log(1.0 - u) / N
                while ri < nrec and record_times[ri] < t_new and record_times[ri] <= t_end:
                    rec_counts.append(_snapshot(&fw, kmax))
                    ro[ri] = over
                    rN[ri] = N
                    ri += 1
                if t_new > t_end:
                    t = t_end
                    break
                t = t_new
                idx = <i64> (bg.next_double(bg.state) * N)
                is_open = bg.next_double(bg.state) < p
                if idx >= N - over:
                    if is_open:
                        over += 1
                    else:
                        fw_add(&fw, 0, 1)
                else:
                    k = fw_find(&fw, idx)
                    if not is_open:
                        fw_add(&fw, 0, 1)
                    elif k == 0:
                        if truncated and h == 0:
                            over += 1
                        else:
                            fw_add(&fw, 1, 1)
                            if kmax < 1:
                                kmax = 1
                    else:
                        fw_add(&fw, k, -k)
                        if truncated and k == h:
                            over += h + 1
                        else:
                            if k + 1 >= fw.cap:
                                if k + 1 >= class_cap:
                                    overflow = True
                                    break
                                if fw_grow(&fw, min(2 * fw.cap, class_cap)) != 0:
                                    raise MemoryError()
                            fw_add(&fw, k + 1, k + 1)
                            if kmax < k + 1:
                                kmax = k + 1
                N += 1
        if overflow:
            raise OverflowError(f"cluster size class exceeded cap {class_cap}")
        counts = _snapshot(&fw, kmax)
    finally:
        fw_free(&fw)
    return counts, over, t, N, rec_counts, rec_over[:ri], rec_N[:ri]


cdef object _snapshot(Fenwick *fw, Py_ssize_t kmax):
    out = np.zeros(kmax + 1, dtype=np.int64)
    cdef i64[::1] c = out
    cdef Py_ssize_t k
    c[0] = fw.weight[0]
    for k in range(1, kmax + 1):
        c[k] = fw.weight[k] // k
    return out


def yule_pair(double p, double t, Py_ssize_t size, object rng):
    """Sizes at time ``t`` of a root cluster (rate-p Yule) and its whole tree.

    Children leaving the cluster start rate-1 Yule subtrees whose size at
    ``t`` is drawn directly as Geometric(exp(-(t - birth))).
    """
    cdef bitgen_t *bg = _bitgen(rng)
    G = np.empty(size, dtype=np.int64)
    N = np.empty(size, dtype=np.int64)
    cdef i64[::1] g_out = G, n_out = N
    cdef Py_ssize_t i
    cdef i64 g, extra
    cdef double s, q, u
    with rng.bit_generator.lock, nogil:
        for i in range(size):
            g = 1
            extra = 0
            s = 0.0
            while True:
                u = bg.next_double(bg.state)
                s = s - log(1.0 - u) / g
                if s > t:
                    break
                if bg.next_double(bg.state) < p:
                    g += 1
                else:
                    q = exp(-(t - s))
                    u = bg.next_double(bg.state)
                    if q >= 1.0:
                        extra += 1
                    else:
                        extra += 1 + <i64> floor(log1p(-u) / log1p(-q))
            g_out[i] = g
            n_out[i] = g + extra
    return G, N


def grow_parents(Py_ssize_t n, object rng):
    """Uniform attachment: vertex v picks floor(u * v) among 0..v-1."""
    cdef bitgen_t *bg = _bitgen(rng)
    out = np.empty(n, dtype=np.int64)
    cdef i64[::1] par = out
    cdef Py_ssize_t v
    if n == 0:
        return out
    par[0] = -1
    with rng.bit_generator.lock, nogil:
        for v in range(1, n):
            par[v] = <i64> (bg.next_double(bg.state) * v)
    return out


def bernoulli_marks(Py_ssize_t n, double p, object rng):
    cdef bitgen_t *bg = _bitgen(rng)
    out = np.empty(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] m = out
    cdef Py_ssize_t v
    with rng.bit_generator.lock, nogil:
        for v in range(n):
            m[v] = bg.next_double(bg.state) < p
    return out


def leading_pieces(const i64[::1] parent, const cnp.uint8_t[::1] marks,
                   Py_ssize_t n_clusters, Py_ssize_t n_pieces):
    """Piece sizes of the first ``n_clusters`` bond clusters.

    Row i-1 holds cluster i: column j is the piece with the j-th smallest
    sub-root (column 0 is the cluster root alone), the last column pools
    pieces beyond ``n_pieces``.
    """
    cdef Py_ssize_t n = parent.shape[0], v, width = n_pieces + 2
    cdef Py_ssize_t n_codes = n_clusters * width
    if n_codes >= 65535:
        raise ValueError("too many tracked pieces")
    out = np.zeros((n_clusters, width), dtype=np.int64)
    cdef i64[:, ::1] sizes = out
    cdef cnp.uint16_t[::1] code = np.empty(n, dtype=np.uint16)
    cdef i64[::1] next_piece = np.ones(n_clusters, dtype=np.int64)
    cdef cnp.uint16_t untracked = 65535, pc
    cdef Py_ssize_t roots = 0, i, j
    if n == 0:
        return out
    with nogil:
        for v in range(n):
            if v == 0 or not marks[v]:
                roots += 1
                if roots <= n_clusters:
                    code[v] = <cnp.uint16_t> ((roots - 1) * width)
                else:
                    code[v] = untracked
                continue
            pc = code[parent[v]]
            if pc == untracked:
                code[v] = untracked
            elif pc % width == 0:
                i = pc // width
                j = next_piece[i]
                next_piece[i] += 1
                if j > n_pieces:
                    j = n_pieces + 1
                code[v] = <cnp.uint16_t> (i * width + j)
            else:
                code[v] = pc
        for v in range(n):
            pc = code[v]
            if pc != untracked:
                sizes[pc // width, pc % width] += 1
    return out
