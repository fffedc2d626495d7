"""Pure-Python twins of the compiled kernels.

Each function consumes ``rng.random()`` draws in exactly the order of its
compiled counterpart, so results are bit-identical between backends. The
label passes are vectorised with numpy where the recursion allows it.
"""
from __future__ import annotations

import math

import numpy as np


def site_labels(parent: np.ndarray, marks: np.ndarray) -> np.ndarray:
    n = parent.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    par = parent.copy()
    par[0] = 0
    linked = (marks.astype(bool) & marks[par].astype(bool))
    linked[0] = False
    return _resolve(np.where(linked, par, np.arange(n)))


def bond_labels(parent: np.ndarray, marks: np.ndarray) -> np.ndarray:
    n = parent.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    linked = marks.astype(bool)
    linked[0] = False
    return _resolve(np.where(linked, parent, np.arange(n)))


def piece_labels(parent: np.ndarray, bond: np.ndarray) -> np.ndarray:
    n = parent.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    idx = np.arange(n)
    par = parent.copy()
    par[0] = 0
    is_root = bond == idx
    cut = is_root | is_root[par]
    return _resolve(np.where(cut, idx, par))


def _resolve(up: np.ndarray) -> np.ndarray:
    # pointer jumping on a forest whose pointers never increase the label
    lab = up.astype(np.int64, copy=True)
    while True:
        nxt = lab[lab]
        if np.array_equal(nxt, lab):
            return lab
        lab = nxt


def census_chain(n: int, p: float, reps: int, rng: np.random.Generator) -> np.ndarray:
    out = np.zeros((reps, n + 1), dtype=np.int64)
    for r in range(reps):
        X = [0] * (n + 1)
        if rng.random() < p:
            X[1] = 1
        else:
            X[0] = 1
        for m in range(1, n):
            step_census(X, m, p, rng)
        out[r] = X
    return out


def step_census(X: list, m: int, p: float, rng: np.random.Generator) -> None:
    """One transition of the census chain, in place; ``m`` is the current mass."""
    if rng.random() >= p:
        X[0] += 1
        return
    idx = int(rng.random() * m)
    if idx < X[0]:
        X[1] += 1
        return
    idx -= X[0]
    k = 1
    while idx >= k * X[k]:
        idx -= k * X[k]
        k += 1
    X[k] -= 1
    X[k + 1] += 1


def _find_class(weights: list, idx: int) -> int:
    k = 0
    while idx >= weights[k]:
        idx -= weights[k]
        k += 1
    return k


def gillespie(p, h, t_end, n_end, record_times, class_cap, rng):
    truncated = h >= 0
    weights = [0] * ((h + 1) if truncated else 2)
    N, over, t = 1, 0, 0.0
    rec_counts, rec_over, rec_N = [], [], []
    nrec, ri = len(record_times), 0

    def snapshot():
        kmax = max((k for k, w in enumerate(weights) if w), default=0)
        c = np.zeros(kmax + 1, dtype=np.int64)
        c[0] = weights[0]
        for k in range(1, kmax + 1):
            c[k] = weights[k] // k
        return c

    def bump(k, delta):
        while k >= len(weights):
            weights.append(0)
        weights[k] += delta

    if rng.random() < p:
        if truncated and h == 0:
            over = 1
        else:
            bump(1, 1)
    else:
        bump(0, 1)
    while True:
        if n_end > 0 and N >= n_end:
            break
        u = rng.random()
        t_new = t - math.log(1.0 - u) / N
        while ri < nrec and record_times[ri] < t_new and record_times[ri] <= t_end:
            rec_counts.append(snapshot())
            rec_over.append(over)
            rec_N.append(N)
            ri += 1
        if t_new > t_end:
            t = t_end
            break
        t = t_new
        idx = int(rng.random() * N)
        is_open = rng.random() < p
        if idx >= N - over:
            if is_open:
                over += 1
            else:
                bump(0, 1)
        else:
            k = _find_class(weights, idx)
            if not is_open:
                bump(0, 1)
            elif k == 0:
                if truncated and h == 0:
                    over += 1
                else:
                    bump(1, 1)
            else:
                bump(k, -k)
                if truncated and k == h:
                    over += h + 1
                else:
                    if k + 1 >= class_cap:
                        raise OverflowError(f"cluster size class exceeded cap {class_cap}")
                    bump(k + 1, k + 1)
        N += 1
    return (
        snapshot(),
        over,
        t,
        N,
        rec_counts,
        np.asarray(rec_over, dtype=np.int64),
        np.asarray(rec_N, dtype=np.int64),
    )


def yule_pair(p: float, t: float, size: int, rng: np.random.Generator):
    G = np.empty(size, dtype=np.int64)
    N = np.empty(size, dtype=np.int64)
    for i in range(size):
        g, extra, s = 1, 0, 0.0
        while True:
            u = rng.random()
            s = s - math.log(1.0 - u) / g
            if s > t:
                break
            if rng.random() < p:
                g += 1
            else:
                q = math.exp(-(t - s))
                u = rng.random()
                if q >= 1.0:
                    extra += 1
                else:
                    extra += 1 + math.floor(math.log1p(-u) / math.log1p(-q))
        G[i] = g
        N[i] = g + extra
    return G, N


def grow_parents(n: int, rng: np.random.Generator) -> np.ndarray:
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    out[0] = -1
    out[1:] = (rng.random(n - 1) * np.arange(1, n)).astype(np.int64)
    return out


def bernoulli_marks(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(n) < p).astype(np.uint8)


def leading_pieces(parent: np.ndarray, marks: np.ndarray, n_clusters: int, n_pieces: int) -> np.ndarray:
    width = n_pieces + 2
    out = np.zeros((n_clusters, width), dtype=np.int64)
    n = parent.shape[0]
    if n == 0:
        return out
    bond = bond_labels(parent, marks)
    pieces = piece_labels(parent, bond)
    roots = np.flatnonzero(bond == np.arange(n))[:n_clusters]
    for i, r in enumerate(roots):
        members = pieces[bond == r]
        sub_roots, sizes = np.unique(members, return_counts=True)
        # sub_roots are sorted, the cluster root itself comes first
        for j, s in enumerate(sizes):
            out[i, min(j, n_pieces + 1)] += s
    return out
