"""Recursive trees: growth, site marks, enumeration and export.

Vertex labels are 1..n in the public API (root = 1). Internally a tree is a
0-based parent array with ``parent[0] == -1``, which is what the kernels
consume.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .rng import Generator

ENUMERATION_CAP = 9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RecursiveTree:
    """Labelled tree whose labels increase along every root-to-leaf path.

    Parameters
    ----------
    parent : ndarray of int64, shape (n,)
        0-based parent index per vertex, ``parent[0] == -1``.
    birth : ndarray of float64, shape (n,), optional
        Birth times in the rate-1 Yule embedding; ``birth[0] == 0``.
    """

    parent: np.ndarray
    birth: np.ndarray | None = field(default=None)

    def __post_init__(self):
        par = _frozen(np.asarray(self.parent, dtype=np.int64))
        n = par.shape[0]
        if n < 1:
            raise ValueError("a tree has at least one vertex")
        if par[0] != -1:
            raise ValueError("parent[0] must be -1 (the root has no parent)")
        if n > 1 and not (np.all(par[1:] >= 0) and np.all(par[1:] < np.arange(1, n))):
            raise ValueError("recursive tree requires parent(v) < v")
        object.__setattr__(self, "parent", par)
        if self.birth is not None:
            b = _frozen(np.asarray(self.birth, dtype=np.float64))
            if b.shape != (n,):
                raise ValueError("birth must have one entry per vertex")
            if b[0] != 0.0 or np.any(np.diff(b) <= 0):
                raise ValueError("birth times must start at 0 and increase strictly")
            object.__setattr__(self, "birth", b)

    @property
    def n(self) -> int:
        return int(self.parent.shape[0])

    def parent_of(self, v: int) -> int:
        """Parent label of vertex ``v`` (1-based), 0 for the root."""
        if not 1 <= v <= self.n:
            raise IndexError(v)
        return int(self.parent[v - 1]) + 1

    def parent_labels(self) -> list[int]:
        """Parents of vertices 2..n as 1-based labels."""
        return (self.parent[1:] + 1).tolist()

    @property
    def tau(self) -> float:
        """Birth time of the last vertex (the hitting time of size n)."""
        if self.birth is None:
            raise ValueError("tree has no birth times")
        return float(self.birth[-1])

    def restrict(self, m: int) -> "RecursiveTree":
        """The subtree on the first ``m`` labels."""
        if not 1 <= m <= self.n:
            raise ValueError("m must lie in 1..n")
        birth = None if self.birth is None else self.birth[:m]
        return RecursiveTree(self.parent[:m], birth)

    @classmethod
    def from_parent_labels(cls, parents) -> "RecursiveTree":
        """Build from 1-based parents of vertices 2..n."""
        par = np.concatenate([[-1], np.asarray(list(parents), dtype=np.int64) - 1])
        return cls(par)


@dataclass(frozen=True, eq=False)
class SiteMarks:
    """Open (1) / closed (0) state per vertex, 0-based storage."""

    marks: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.marks)
        if m.ndim != 1 or (m.size and not np.isin(m, (0, 1)).all()):
            raise ValueError("marks must be a 0/1 vector")
        object.__setattr__(self, "marks", _frozen(m.astype(np.uint8)))

    @property
    def n(self) -> int:
        return int(self.marks.shape[0])

    def is_open(self, v: int) -> bool:
        return bool(self.marks[v - 1])

    @property
    def n_open(self) -> int:
        return int(self.marks.sum())


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p}")
    return p


def grow_uniform(n: int, rng: Generator) -> RecursiveTree:
    """Random recursive tree of size ``n`` by uniform attachment."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return RecursiveTree(_kernels.grow_parents(int(n), rng))


def grow_yule(n: int, rng: Generator) -> RecursiveTree:
    """Random recursive tree with birth times of the rate-1 Yule process.

    The attachment draws come first, so for equal seeds the shape coincides
    with :func:`grow_uniform`. With k vertices alive the next birth waits an
    Exp(k) time.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    parent = _kernels.grow_parents(int(n), rng)
    gaps = rng.standard_exponential(n - 1) / np.arange(1, n)
    birth = np.concatenate([[0.0], np.cumsum(gaps)])
    return RecursiveTree(parent, birth)


def mark_sites(tree: RecursiveTree | int, p: float, rng: Generator) -> SiteMarks:
    """I.i.d. Bernoulli(p) open/closed marks, one per vertex."""
    p = _check_p(p)
    n = tree if isinstance(tree, int) else tree.n
    return SiteMarks(_kernels.bernoulli_marks(int(n), p, rng))


def enumerate_recursive_trees(n: int, cap: int = ENUMERATION_CAP) -> Iterator[RecursiveTree]:
    """All (n-1)! recursive trees on n vertices, lexicographic in the parent sequence."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > cap:
        raise ValueError(f"enumeration of size {n} exceeds the cap {cap}")
    for seq in itertools.product(*(range(v) for v in range(1, n))):
        yield RecursiveTree(np.array((-1,) + seq, dtype=np.int64))


def count_recursive_trees(n: int) -> int:
    return math.factorial(n - 1)


def export_dot(tree: RecursiveTree, marks: SiteMarks | None = None) -> str:
    lines = ["graph rrt {", "  node [shape=circle, style=filled, fillcolor=white];"]
    for v in range(1, tree.n + 1):
        if marks is None:
            lines.append(f"  {v};")
        else:
            colour = "green" if marks.is_open(v) else "red"
            lines.append(f"  {v} [fillcolor={colour}];")
    for v in range(2, tree.n + 1):
        lines.append(f"  {tree.parent_of(v)} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_dict(tree: RecursiveTree, marks: SiteMarks | None = None) -> dict:
    d = {"n": tree.n, "parent": tree.parent_labels()}
    if tree.birth is not None:
        d["birth"] = tree.birth.tolist()
    if marks is not None:
        if marks.n != tree.n:
            raise ValueError("marks do not match the tree")
        d["marks"] = marks.marks.astype(int).tolist()
    return d


def tree_to_json(tree: RecursiveTree, marks: SiteMarks | None = None) -> str:
    return json.dumps(tree_to_dict(tree, marks))


def tree_from_json(text: str | dict) -> tuple[RecursiveTree, SiteMarks | None]:
    d = json.loads(text) if isinstance(text, str) else text
    n = int(d["n"])
    if len(d["parent"]) != n - 1:
        raise ValueError("parent array must have length n-1")
    par = np.concatenate([[-1], np.asarray(d["parent"], dtype=np.int64) - 1])
    tree = RecursiveTree(par, d.get("birth"))
    marks = SiteMarks(np.asarray(d["marks"])) if d.get("marks") is not None else None
    if marks is not None and marks.n != n:
        raise ValueError("marks array must have length n")
    return tree, marks
