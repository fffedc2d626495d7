"""Exact laws at small sizes by brute-force enumeration.

Every recursive tree on n vertices is equally likely and each of the 2^n
mark patterns has weight ``p^open (1-p)^closed``. Enumeration streams the
trees and vectorises over mark patterns, so memory stays at O(2^n n).
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .limits import ewens_pmf
from .percolation import isolated_labels
from .tree import ENUMERATION_CAP, enumerate_recursive_trees

RATIONAL_MAX_N = 7


def as_fraction(p) -> Fraction:
    """Exact rational for ``p``; floats go through their shortest repr."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, int):
        return Fraction(p)
    return Fraction(repr(float(p)))


@dataclass
class ExactDistribution:
    """A finite law: support points mapped to probabilities.

    ``rational`` masses are :class:`fractions.Fraction`, otherwise floats.
    """

    mass: dict = field(default_factory=dict)
    rational: bool = True

    @property
    def support(self) -> list:
        return sorted(self.mass)

    def total(self):
        return sum(self.mass.values(), Fraction(0) if self.rational else 0.0)

    def prob(self, x):
        return self.mass.get(x, Fraction(0) if self.rational else 0.0)

    def expect(self, f):
        return sum((w * f(x) for x, w in self.mass.items()), Fraction(0) if self.rational else 0.0)

    def tv_distance(self, other: "ExactDistribution") -> float:
        keys = set(self.mass) | set(other.mass)
        return 0.5 * sum(abs(float(self.prob(x)) - float(other.prob(x))) for x in keys)

    def equals(self, other: "ExactDistribution") -> bool:
        keys = set(self.mass) | set(other.mass)
        return all(self.prob(x) == other.prob(x) for x in keys)

    def to_double(self) -> "ExactDistribution":
        return ExactDistribution({x: float(w) for x, w in self.mass.items()}, rational=False)

    def to_csv(self) -> str:
        rows = ["observable_encoding,probability"]
        for x in self.support:
            enc = " ".join(map(str, x)) if isinstance(x, tuple) else str(x)
            w = self.mass[x]
            rows.append(f"{enc},{w}" if self.rational else f"{enc},{w:.17g}")
        return "\n".join(rows) + "\n"


def _check_cap(n: int, cap: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > cap:
        raise ValueError(f"exact enumeration at size {n} exceeds the cap {cap}")


def _all_marks(n: int) -> np.ndarray:
    """All 2^n patterns, row r has vertex v open iff bit v of r is set."""
    r = np.arange(2**n, dtype=np.int64)
    return ((r[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _site_label_matrix(parent: np.ndarray, M: np.ndarray) -> np.ndarray:
    n = parent.shape[0]
    L = np.empty(M.shape, dtype=np.int64)
    L[:, 0] = 0
    for v in range(1, n):
        u = parent[v]
        L[:, v] = np.where(M[:, v] & M[:, u], L[:, u], v)
    return L


def _census_matrix(L: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Row-wise site census, columns 0..n."""
    rows, n = L.shape
    sizes = np.zeros((rows, n), dtype=np.int64)
    np.add.at(sizes, (np.repeat(np.arange(rows), n), L.ravel()), 1)
    open_root = (L == np.arange(n)) & M.astype(bool)
    C = np.zeros((rows, n + 1), dtype=np.int64)
    r_idx, v_idx = np.nonzero(open_root)
    np.add.at(C, (r_idx, sizes[r_idx, v_idx]), 1)
    C[:, 0] = n - M.sum(axis=1, dtype=np.int64)
    return C


def _key(row) -> tuple:
    row = list(row)
    while len(row) > 1 and row[-1] == 0:
        row.pop()
    return tuple(row)


def _weigh(counts: dict, n: int, p, rational: bool, n_trees: int) -> ExactDistribution:
    """Turn counts keyed by (observable, #open) into probabilities."""
    if rational:
        p = as_fraction(p)
        q = 1 - p
        norm = Fraction(1, n_trees)
    else:
        p = float(p)
        q = 1.0 - p
        norm = 1.0 / n_trees
    out = defaultdict(lambda: Fraction(0) if rational else 0.0)
    for (obs, n_open), c in counts.items():
        out[obs] += c * p**n_open * q ** (n - n_open) * norm
    return ExactDistribution(dict(out), rational)


def exact_census_distribution(n: int, p, rational: bool | None = None, cap: int = ENUMERATION_CAP) -> ExactDistribution:
    """Exact law of the site census at size n over all trees and marks.

    Supports are census tuples ``(X(0), X(1), ...)`` with trailing zeros
    removed. Rational mode is the default for ``n <= 7``.
    """
    _check_cap(n, cap)
    rational = n <= RATIONAL_MAX_N if rational is None else rational
    M = _all_marks(n)
    n_open = M.sum(axis=1, dtype=np.int64)
    counts: dict = defaultdict(int)
    n_trees = 0
    for tree in enumerate_recursive_trees(n, cap):
        n_trees += 1
        C = _census_matrix(_site_label_matrix(tree.parent, M), M)
        keyed = np.column_stack([C, n_open])
        uniq, mult = np.unique(keyed, axis=0, return_counts=True)
        for row, c in zip(uniq.tolist(), mult.tolist()):
            counts[(_key(row[:-1]), row[-1])] += c
    return _weigh(counts, n, p, rational, n_trees)


def exact_chain_distribution(n: int, p, rational: bool = True) -> ExactDistribution:
    """Exact law of the census chain after it reaches mass n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p = as_fraction(p) if rational else float(p)
    q = 1 - p
    law = {(1,): q, (0, 1): p}
    for m in range(1, n):
        nxt = defaultdict(lambda: Fraction(0) if rational else 0.0)
        for x, w in law.items():
            X = list(x) + [0, 0]
            closed = X.copy()
            closed[0] += 1
            nxt[_key(closed)] += w * q
            if X[0]:
                y = X.copy()
                y[1] += 1
                nxt[_key(y)] += w * p * Fraction(X[0], m) if rational else w * p * X[0] / m
            for k in range(1, len(X) - 1):
                if X[k]:
                    y = X.copy()
                    y[k] -= 1
                    y[k + 1] += 1
                    nxt[_key(y)] += w * p * Fraction(k * X[k], m) if rational else w * p * k * X[k] / m
        law = dict(nxt)
    return ExactDistribution(law, rational)


def _subtree_sizes(parent: np.ndarray) -> np.ndarray:
    size = np.ones(parent.shape[0], dtype=np.int64)
    for v in range(parent.shape[0] - 1, 0, -1):
        size[parent[v]] += size[v]
    return size


def exact_ewens_distribution(k: int, cap: int = ENUMERATION_CAP) -> ExactDistribution:
    """Exact law of the root-removal multiplicities ``(C_k(1), ..., C_k(k))``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    _check_cap(k + 1, cap)
    counts: dict = defaultdict(int)
    for tree in enumerate_recursive_trees(k + 1, cap):
        size = _subtree_sizes(tree.parent)
        kids = np.flatnonzero(tree.parent == 0)
        a = np.bincount(size[kids], minlength=k + 1)[1:]
        counts[tuple(a.tolist())] += 1
    total = math.factorial(k)
    return ExactDistribution({a: Fraction(c, total) for a, c in counts.items()}, True)


def ewens_agreement(k: int) -> tuple[bool, ExactDistribution]:
    """Compare the enumeration law with the Ewens formula point by point."""
    law = exact_ewens_distribution(k)
    ok = all(law.prob(a) == ewens_pmf(k, a, exact=True) for a in law.mass)
    ok = ok and law.total() == 1
    return ok, law


@dataclass
class CouplingReport:
    ok: bool
    instances: dict
    counterexample: tuple | None = None


def exact_coupling_check(n_max: int, cap: int = ENUMERATION_CAP) -> CouplingReport:
    """Check that isolating bond-cluster roots gives the site clusters.

    Runs every tree and mark pattern for sizes 1..n_max and stops at the
    first counterexample, reported as (parent labels, marks).
    """
    _check_cap(n_max, cap)
    instances = {}
    for n in range(1, n_max + 1):
        M = _all_marks(n)
        done = 0
        for tree in enumerate_recursive_trees(n, cap):
            par = tree.parent
            for m in M:
                site = _kernels.site_labels(par, m)
                iso = isolated_labels(par, m, _kernels.bond_labels(par, m))
                done += 1
                if not np.array_equal(site, iso):
                    instances[n] = done
                    return CouplingReport(False, instances, (tree.parent_labels(), m.tolist()))
        instances[n] = done
    return CouplingReport(True, instances)
