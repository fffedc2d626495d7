import math
from collections import Counter, deque
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrtperc import _kernels
from rrtperc.oracle import exact_chain_distribution, exact_census_distribution
from rrtperc.percolation import (
    ClusterCensus,
    bond_partition,
    bond_tail_mass,
    census,
    census_chain,
    census_step,
    isolation_pieces,
    ranked_sizes,
    root_isolation,
    site_partition,
)
from rrtperc.rng import make_rng
from rrtperc.stats import chi2_gof
from rrtperc.tree import RecursiveTree, SiteMarks, enumerate_recursive_trees, grow_uniform, mark_sites

EXAMPLE = RecursiveTree.from_parent_labels([1, 1, 2])
EXAMPLE_MARKS = SiteMarks(np.array([1, 0, 1, 1]))


def bfs_clusters(tree, marks):
    adj = {v: [] for v in range(1, tree.n + 1)}
    for v in range(2, tree.n + 1):
        u = tree.parent_of(v)
        if marks.is_open(u) and marks.is_open(v):
            adj[u].append(v)
            adj[v].append(u)
    seen, out = set(), set()
    for s in adj:
        if s in seen:
            continue
        comp, todo = {s}, deque([s])
        seen.add(s)
        while todo:
            for w in adj[todo.popleft()]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    todo.append(w)
        out.add(frozenset(comp))
    return out


def test_site_example():
    part = site_partition(EXAMPLE, EXAMPLE_MARKS)
    assert part.clusters() == [{1, 3}, {2}, {4}]
    assert census(part).as_tuple() == (1, 1, 1)
    assert part.roots.tolist() == [1, 2, 4] and part.sizes.tolist() == [2, 1, 1]


def test_bond_example():
    part = bond_partition(EXAMPLE, EXAMPLE_MARKS)
    assert part.clusters() == [{1, 3}, {2, 4}]
    assert census(part).as_tuple() == (0, 0, 2)


def test_root_isolation_example():
    bond = bond_partition(EXAMPLE, EXAMPLE_MARKS)
    iso = root_isolation(EXAMPLE, EXAMPLE_MARKS, bond)
    assert iso.same_as(site_partition(EXAMPLE, EXAMPLE_MARKS))
    assert isolation_pieces(EXAMPLE, EXAMPLE_MARKS, bond).tolist() == [[1, 0], [2, 0], [1, 1], [2, 1]]


@pytest.mark.parametrize("bit", [0, 1])
def test_uniform_marks(bit, rng):
    t = grow_uniform(40, rng)
    m = SiteMarks(np.full(40, bit))
    site = site_partition(t, m)
    if bit:
        assert site.n_clusters == 1 and census(site)[40] == 1
        assert root_isolation(t, m, bond_partition(t, m)).same_as(site)
    else:
        assert site.n_clusters == 40 and census(site).as_tuple() == (40,)


@given(st.integers(1, 60), st.floats(0.05, 0.95), st.integers(0, 2**31))
@settings(max_examples=80, deadline=None)
def test_site_partition_matches_bfs(n, p, seed):
    rng = make_rng(seed)
    t = grow_uniform(n, rng)
    m = mark_sites(t, p, rng)
    part = site_partition(t, m)
    assert set(part.clusters()) == bfs_clusters(t, m)
    assert census(part).n == n


@given(st.integers(1, 200), st.floats(0.05, 0.95), st.integers(0, 2**31))
@settings(max_examples=80, deadline=None)
def test_bond_rule_and_conservation(n, p, seed):
    rng = make_rng(seed)
    t = grow_uniform(n, rng)
    m = mark_sites(t, p, rng)
    bond = bond_partition(t, m)
    for v in range(2, n + 1):
        same = bond.cluster_of[v - 1] == bond.cluster_of[t.parent_of(v) - 1]
        assert same == m.is_open(v)
    c = census(bond)
    assert c.n == n and c[0] == 0
    for M in (1, 2, 5, 17):
        assert bond_tail_mass(c, M) <= n / M


def test_bond_edge_marginal():
    rng = make_rng(11)
    t = grow_uniform(50000, rng)
    m = mark_sites(t, 0.35, rng)
    bond = bond_partition(t, m)
    kept = np.mean(bond.labels[1:] == bond.labels[t.parent[1:]])
    assert abs(kept - 0.35) < 3 * math.sqrt(0.35 * 0.65 / 49999)


def test_coupling_exhaustive_small():
    for n in range(1, 7):
        for t in enumerate_recursive_trees(n):
            for bits in range(2**n):
                m = SiteMarks(np.array([(bits >> v) & 1 for v in range(n)]))
                assert root_isolation(t, m, bond_partition(t, m)).same_as(site_partition(t, m))


@pytest.mark.slow
def test_coupling_random_large():
    rng = make_rng(2024)
    for _ in range(10**4):
        par = _kernels.grow_parents(1000, rng)
        m = _kernels.bernoulli_marks(1000, float(rng.uniform(0.05, 0.95)), rng)
        t = RecursiveTree(par)
        assert root_isolation(t, m, bond_partition(t, m)).same_as(site_partition(t, m))


def test_root_isolation_rejects_foreign_partition(rng):
    t = grow_uniform(30, rng)
    m = mark_sites(t, 0.5, rng)
    other = SiteMarks(1 - m.marks)
    with pytest.raises(ValueError):
        root_isolation(t, m, bond_partition(t, other))
    with pytest.raises(ValueError):
        root_isolation(t, m, site_partition(t, m))


def test_isolation_pieces_against_kernel(rng):
    t = grow_uniform(3000, rng)
    m = mark_sites(t, 0.6, rng)
    P = isolation_pieces(t, m, bond_partition(t, m))
    L = _kernels.leading_pieces(t.parent, m.marks, 3, 3)
    for i in range(3):
        head = [int(np.sum((P[:, 0] == i + 1) & (P[:, 1] == j))) for j in range(4)]
        rest = int(np.sum((P[:, 0] == i + 1) & (P[:, 1] >= 4)))
        assert head + [rest] == L[i].tolist()


def test_census_step_from_closed_root():
    start = ClusterCensus(np.array([1]))
    draws = Counter(census_step(start, 0.3, make_rng(s)).as_tuple() for s in range(4000))
    assert set(draws) == {(2,), (1, 1)}
    assert abs(draws[(1, 1)] / 4000 - 0.3) < 3 * math.sqrt(0.21 / 4000)


def test_census_step_mass_and_kind():
    c = ClusterCensus(np.array([2, 1, 0, 1]))
    assert census_step(c, 0.5, make_rng(0)).n == c.n + 1
    with pytest.raises(ValueError):
        census_step(ClusterCensus(np.array([0, 2]), "bond"), 0.5, make_rng(0))


def test_transition_probabilities_sum_to_one():
    p = Fraction(3, 7)
    for x in [(1,), (2, 1), (0, 0, 1, 1), (3, 2, 0, 1)]:
        n = x[0] + sum(k * c for k, c in enumerate(x))
        total = (1 - p) + p * Fraction(x[0], n) + sum(p * Fraction(k * c, n) for k, c in enumerate(x) if k)
        assert total == 1


def test_chain_matches_site_partition_n4():
    p = 0.6
    law = exact_census_distribution(4, p, rational=False)
    draws = census_chain(4, p, 10**6, make_rng(99))
    rows, counts = np.unique(draws, axis=0, return_counts=True)
    seen = {tuple(np.trim_zeros(r, "b").tolist()): c for r, c in zip(rows, counts.tolist())}
    _, _, pv = chi2_gof(seen, law.mass)
    assert pv > 0.001


def test_exact_chain_equals_enumeration_n4():
    assert exact_chain_distribution(4, Fraction(3, 5)).equals(exact_census_distribution(4, Fraction(3, 5)))


def test_ranked_sizes():
    t = RecursiveTree.from_parent_labels([1, 1, 2, 2, 3])
    m = SiteMarks(np.array([1, 1, 1, 0, 1, 1]))
    part = site_partition(t, m)
    assert ranked_sizes(part).tolist() == [5.0]
    assert ranked_sizes(bond_partition(t, m)).tolist() == [5.0, 1.0]


@given(st.integers(1, 300), st.floats(0.05, 0.95), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_ranked_open_mass(n, p, seed):
    rng = make_rng(seed)
    t = grow_uniform(n, rng)
    m = mark_sites(t, p, rng)
    r = ranked_sizes(site_partition(t, m), 1.0 / n)
    assert np.all(np.diff(r) <= 0)
    assert math.isclose(r.sum(), m.n_open / n) and r.sum() <= 1


def test_cluster_shape_is_uniform():
    # site clusters of size 4, relabelled in increasing order, are uniform over the 6 shapes
    rng = make_rng(404)
    shapes = Counter()
    for _ in range(40):
        t = grow_uniform(20000, rng)
        m = mark_sites(t, 0.5, rng)
        part = site_partition(t, m)
        lab = part.labels
        open_roots = np.flatnonzero((lab == np.arange(t.n)) & (m.marks == 1))
        sizes = np.bincount(lab, minlength=t.n)
        for r in open_roots[sizes[open_roots] == 4]:
            members = np.flatnonzero(lab == r)
            rank = {v: i for i, v in enumerate(members)}
            shapes[tuple(rank[t.parent[v]] for v in members[1:])] += 1
    assert len(shapes) == 6
    _, _, pv = chi2_gof(shapes, {s: 1 / 6 for s in shapes})
    assert pv > 0.001


def test_serialisation(rng):
    t = grow_uniform(50, rng)
    part = site_partition(t, mark_sites(t, 0.5, rng))
    d = part.to_dict()
    assert sum(d["sizes"]) == 50 and d["roots"][0] == 1
    c = census(part)
    assert ClusterCensus.from_csv(c.to_csv()) == c
    assert c.to_csv().startswith("k,count\n")
