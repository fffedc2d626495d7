import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rrtperc.rng import make_rng
from rrtperc.tree import (
    RecursiveTree,
    SiteMarks,
    enumerate_recursive_trees,
    export_dot,
    grow_uniform,
    grow_yule,
    mark_sites,
    tree_from_json,
    tree_to_json,
)


def test_single_vertex():
    t = grow_uniform(1, make_rng(0))
    assert t.n == 1 and t.parent.tolist() == [-1]


def test_second_vertex_attaches_to_root(rng):
    t = grow_uniform(2, rng)
    assert t.parent_of(2) == 1


@given(st.integers(1, 300), st.integers(0, 2**32))
@settings(max_examples=50, deadline=None)
def test_parents_precede_children(n, seed):
    t = grow_uniform(n, make_rng(seed))
    assert all(t.parent_of(v) < v for v in range(2, n + 1))


def test_attachment_is_uniform():
    # vertex 4 picks each of 1, 2, 3 with probability 1/3
    picks = np.array([grow_uniform(4, make_rng(s)).parent_of(4) for s in range(6000)])
    freq = np.bincount(picks, minlength=4)[1:] / picks.size
    assert np.all(np.abs(freq - 1 / 3) < 3 * math.sqrt(2 / 9 / picks.size) + 1e-3)


def test_yule_shares_shape_with_uniform():
    a = grow_uniform(100, make_rng(5))
    b = grow_yule(100, make_rng(5))
    assert np.array_equal(a.parent, b.parent)
    assert b.birth[0] == 0 and np.all(np.diff(b.birth) > 0)
    assert b.tau == b.birth[-1]


def test_yule_hitting_time_mean():
    # E[tau_n] = H_{n-1}
    n = 50
    taus = np.array([grow_yule(n, make_rng(s)).tau for s in range(3000)])
    target = sum(1 / k for k in range(1, n))
    sd = math.sqrt(sum(1 / k**2 for k in range(1, n)))
    assert abs(taus.mean() - target) < 4 * sd / math.sqrt(taus.size)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 1), (3, 2), (4, 6), (5, 24), (6, 120)])
def test_enumeration_counts(n, count):
    trees = list(enumerate_recursive_trees(n))
    assert len(trees) == count
    assert len({tuple(t.parent.tolist()) for t in trees}) == count


def test_enumeration_order_and_cap():
    first = next(enumerate_recursive_trees(4))
    assert first.parent_labels() == [1, 1, 1]
    with pytest.raises(ValueError):
        next(enumerate_recursive_trees(10))


def test_marks_frequency(rng):
    m = mark_sites(100000, 0.3, rng)
    assert abs(m.n_open / 1e5 - 0.3) < 3 * math.sqrt(0.21 / 1e5)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_degenerate_p_rejected(p, rng):
    with pytest.raises(ValueError):
        mark_sites(5, p, rng)


def test_invalid_trees_rejected():
    with pytest.raises(ValueError):
        RecursiveTree(np.array([-1, 0, 2]))
    with pytest.raises(ValueError):
        RecursiveTree(np.array([0, 0]))
    with pytest.raises(ValueError):
        SiteMarks(np.array([0, 2]))


def test_json_round_trip(rng):
    t = grow_yule(30, rng)
    m = mark_sites(t, 0.5, rng)
    d = json.loads(tree_to_json(t, m))
    assert len(d["parent"]) == 29 and min(d["parent"]) == 1
    t2, m2 = tree_from_json(tree_to_json(t, m))
    assert np.array_equal(t.parent, t2.parent) and np.allclose(t.birth, t2.birth)
    assert np.array_equal(m.marks, m2.marks)


def test_json_rejects_bad_length():
    with pytest.raises(ValueError):
        tree_from_json('{"n": 3, "parent": [1]}')


def test_export_dot():
    t = RecursiveTree.from_parent_labels([1, 1, 2])
    dot = export_dot(t, SiteMarks(np.array([1, 0, 1, 1])))
    assert "2 [fillcolor=red]" in dot and "1 -- 2;" in dot and "2 -- 4;" in dot
