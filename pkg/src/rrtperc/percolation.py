"""Site and bond cluster partitions, root isolation and cluster censuses."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from ._kernels._fallback import step_census
from .rng import Generator
from .tree import RecursiveTree, SiteMarks, _check_p

SITE = "site"
BOND = "bond"


class ClusterPartition:
    """Partition of the vertices of a tree into clusters.

    Stored as one label per vertex: the 0-based index of the smallest vertex
    of its cluster (the cluster root). Cluster indices, when needed, order
    clusters by increasing root, so cluster 1 always contains vertex 1.

    Parameters
    ----------
    labels : ndarray of int64
        Root label per vertex (0-based).
    kind : {"site", "bond"}
    marks : ndarray of uint8, optional
        Site marks the partition was derived from; used by the census to
        route closed singletons to class 0.
    """

    def __init__(self, labels: np.ndarray, kind: str, marks: np.ndarray | None = None):
        if kind not in (SITE, BOND):
            raise ValueError(f"unknown partition kind {kind!r}")
        self.labels = np.asarray(labels, dtype=np.int64)
        self.labels.setflags(write=False)
        self.kind = kind
        self.marks = None if marks is None else np.asarray(marks, dtype=np.uint8)

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @cached_property
    def roots(self) -> np.ndarray:
        """Cluster roots as 1-based labels, ascending."""
        return np.flatnonzero(self.labels == np.arange(self.n)) + 1

    @cached_property
    def sizes(self) -> np.ndarray:
        """Cluster sizes in cluster-index order."""
        counts = np.bincount(self.labels, minlength=self.n)
        return counts[self.roots - 1]

    @cached_property
    def cluster_of(self) -> np.ndarray:
        """1-based cluster index of every vertex (0-based vertex storage)."""
        return np.searchsorted(self.roots - 1, self.labels) + 1

    @property
    def n_clusters(self) -> int:
        return int(self.roots.shape[0])

    def clusters(self) -> list[frozenset]:
        """Clusters as sets of 1-based vertex labels, by increasing root."""
        order = np.argsort(self.labels, kind="stable")
        bounds = np.cumsum(self.sizes)[:-1]
        return [frozenset((grp + 1).tolist()) for grp in np.split(order, bounds)]

    def same_as(self, other: "ClusterPartition") -> bool:
        # roots are canonical, so label equality is set equality of clusters
        return self.n == other.n and np.array_equal(self.labels, other.labels)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "cluster_of": self.cluster_of.tolist(),
            "roots": self.roots.tolist(),
            "sizes": self.sizes.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __repr__(self):
        return f"ClusterPartition(kind={self.kind!r}, n={self.n}, clusters={self.n_clusters})"


@dataclass(frozen=True, eq=False)
class ClusterCensus:
    """Number of clusters per size class.

    ``counts[k]`` for k >= 1 counts open clusters of size k; ``counts[0]``
    counts closed vertices (always 0 for bond censuses).
    """

    counts: np.ndarray
    kind: str = SITE

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.counts, dtype=np.int64), "b")
        if c.size == 0:
            c = np.zeros(1, dtype=np.int64)
        if np.any(c < 0):
            raise ValueError("census counts must be nonnegative")
        if self.kind == BOND and c[0] != 0:
            raise ValueError("a bond census has no class 0")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        """Total mass, closed vertices plus the sizes of open clusters."""
        return int(self.counts[0] + np.dot(np.arange(self.counts.size), self.counts))

    def __getitem__(self, k: int) -> int:
        return int(self.counts[k]) if 0 <= k < self.counts.size else 0

    def as_tuple(self) -> tuple:
        return tuple(self.counts.tolist())

    def __eq__(self, other):
        return isinstance(other, ClusterCensus) and self.kind == other.kind and self.as_tuple() == other.as_tuple()

    def __hash__(self):
        return hash((self.kind, self.as_tuple()))

    def to_csv(self) -> str:
        rows = ["k,count"] + [f"{k},{c}" for k, c in enumerate(self.counts.tolist())]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str, kind: str = SITE) -> "ClusterCensus":
        rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
        kmax = max((int(k) for k, _ in rows), default=0)
        c = np.zeros(kmax + 1, dtype=np.int64)
        for k, v in rows:
            c[int(k)] = int(v)
        return cls(c, kind)


def _marks_array(tree: RecursiveTree, marks) -> np.ndarray:
    m = marks.marks if isinstance(marks, SiteMarks) else np.asarray(marks, dtype=np.uint8)
    if m.shape != (tree.n,):
        raise ValueError("marks must cover every vertex of the tree")
    return np.ascontiguousarray(m, dtype=np.uint8)


def site_partition(tree: RecursiveTree, marks) -> ClusterPartition:
    """Clusters of the open-open edges; closed vertices are singletons."""
    m = _marks_array(tree, marks)
    return ClusterPartition(_kernels.site_labels(tree.parent, m), SITE, m)


def bond_partition(tree: RecursiveTree, marks) -> ClusterPartition:
    """Keep the edge from v to its parent iff v is open."""
    m = _marks_array(tree, marks)
    return ClusterPartition(_kernels.bond_labels(tree.parent, m), BOND, m)


def _check_bond(tree: RecursiveTree, m: np.ndarray, bond: ClusterPartition) -> None:
    if bond.kind != BOND or bond.n != tree.n:
        raise ValueError("expected a bond partition of the given tree")
    if not np.array_equal(bond.labels, _kernels.bond_labels(tree.parent, m)):
        raise ValueError("bond partition was not derived from these tree and marks")


def root_isolation(tree: RecursiveTree, marks, bond: ClusterPartition) -> ClusterPartition:
    """Detach every bond-cluster root from its children.

    The cluster of vertex 1 is left whole when vertex 1 is open. The result
    is a site-kind partition.
    """
    m = _marks_array(tree, marks)
    _check_bond(tree, m, bond)
    return ClusterPartition(isolated_labels(tree.parent, m, bond.labels), SITE, m)


def isolated_labels(parent: np.ndarray, marks: np.ndarray, bond_labels: np.ndarray) -> np.ndarray:
    """Label-level root isolation on raw arrays (no validation)."""
    labels = _kernels.piece_labels(parent, bond_labels)
    if marks[0]:
        labels = np.where(bond_labels == 0, 0, labels)
    return labels


def isolation_pieces(tree: RecursiveTree, marks, bond: ClusterPartition) -> np.ndarray:
    """Piece index (i, j) of every vertex after isolating all roots.

    Returns an (n, 2) array: i is the 1-based bond cluster index, j = 0 for
    the cluster root itself and j >= 1 numbers the remaining pieces of
    cluster i by increasing sub-root.
    """
    m = _marks_array(tree, marks)
    _check_bond(tree, m, bond)
    pieces = _kernels.piece_labels(tree.parent, bond.labels)
    sub_roots = np.flatnonzero(pieces == np.arange(tree.n))
    cl = bond.cluster_of[sub_roots]
    # sub_roots ascend, so a stable sort by cluster keeps them ordered within each
    order = np.argsort(cl, kind="stable")
    first = np.searchsorted(cl[order], cl[order])
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size) - first
    j_of_piece = np.empty(tree.n, dtype=np.int64)
    j_of_piece[sub_roots] = rank
    return np.stack([bond.cluster_of, j_of_piece[pieces]], axis=1)


def census(partition: ClusterPartition) -> ClusterCensus:
    """Count clusters by size; closed singletons go to class 0 in the site case."""
    sizes = partition.sizes
    if partition.kind == BOND:
        return ClusterCensus(np.bincount(sizes, minlength=1), BOND)
    if partition.marks is None:
        raise ValueError("a site census needs the marks of the partition")
    is_open = partition.marks[partition.roots - 1].astype(bool)
    counts = np.bincount(sizes[is_open], minlength=1)
    counts[0] = int(np.count_nonzero(~is_open))
    return ClusterCensus(counts, SITE)


def census_step(c: ClusterCensus, p: float, rng: Generator) -> ClusterCensus:
    """One transition of the census chain from mass n to n + 1.

    A closed vertex arrives with probability 1 - p. Otherwise the new open
    vertex attaches to a uniform existing vertex: a closed one starts a
    new singleton, a vertex of an open k-cluster grows that cluster.
    """
    p = _check_p(p)
    if c.kind != SITE:
        raise ValueError("the census chain runs on site censuses")
    m = c.n
    if m < 1:
        raise ValueError("census must have positive mass")
    X = c.counts.tolist() + [0, 0]
    step_census(X, m, p, rng)
    return ClusterCensus(np.asarray(X, dtype=np.int64), SITE)


def census_chain(n: int, p: float, reps: int, rng: Generator) -> np.ndarray:
    """Run the census chain from one vertex up to mass ``n``.

    Returns a (reps, n + 1) array of final censuses.
    """
    p = _check_p(p)
    if n < 1 or reps < 0:
        raise ValueError("need n >= 1 and reps >= 0")
    return _kernels.census_chain(int(n), p, int(reps), rng)


def ranked_sizes(partition: ClusterPartition, scale: float = 1.0) -> np.ndarray:
    """Cluster sizes in decreasing order times ``scale``.

    For site partitions only open clusters are ranked (closed vertices are
    not part of any open cluster).
    """
    sizes = partition.sizes
    if partition.kind == SITE and partition.marks is not None:
        sizes = sizes[partition.marks[partition.roots - 1].astype(bool)]
    return np.sort(sizes)[::-1] * float(scale)


def bond_tail_mass(c: ClusterCensus, M: int) -> int:
    """Number of bond clusters larger than M (at most n / M)."""
    return int(c.counts[M + 1:].sum())
