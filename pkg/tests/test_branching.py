import math
from collections import Counter

import numpy as np
import pytest
from scipy.special import beta

from rrtperc.branching import (
    BranchingState,
    eigenvector_consistency,
    eigenvector_csv,
    estimate_malthusian,
    pair_census,
    simulate_Z,
    simulate_Z_truncated,
    solve_truncated_eigenvector,
)
from rrtperc.limits import site_mass, site_open_mass
from rrtperc.oracle import exact_census_distribution
from rrtperc.percolation import ClusterCensus
from rrtperc.rng import make_rng
from rrtperc.stats import chi2_gof


def test_start_state():
    p = 0.3
    first = Counter(simulate_Z(p, make_rng(s), t_end=0.0).final.counts.tolist().index(1) for s in range(4000))
    assert set(first) == {0, 1}
    assert abs(first[1] / 4000 - p) < 3 * math.sqrt(p * (1 - p) / 4000)


def test_mean_population():
    t = 5.0
    N = np.array([simulate_Z(0.6, make_rng(s), t_end=t).final.N for s in range(10**4)], dtype=float)
    sd = math.sqrt(math.exp(2 * t) - math.exp(t))
    assert abs(N.mean() - math.exp(t)) < 3 * sd / math.sqrt(N.size)


def test_stops_at_size():
    tr = simulate_Z(0.6, make_rng(1), n_end=500)
    assert tr.final.N == 500
    with pytest.raises(ValueError):
        simulate_Z(0.6, make_rng(1))


def test_types_at_size_match_enumeration():
    p, n = 0.6, 6
    law = exact_census_distribution(n, p, rational=False)
    seen = Counter(tuple(simulate_Z(p, make_rng(s), n_end=n).final.counts.tolist()) for s in range(10**4))
    _, _, pv = chi2_gof(seen, law.mass)
    assert pv > 0.001


def test_truncation_agrees_pathwise():
    rec = np.linspace(0, 6, 13)
    for seed in range(20):
        full = simulate_Z(0.6, make_rng(seed), t_end=6.0, record_times=rec)
        trunc = simulate_Z_truncated(0.6, 5, make_rng(seed), t_end=6.0, record_times=rec)
        for a, b in zip(full.states, trunc.states):
            assert [a[k] for k in range(6)] == [b[k] for k in range(6)]
            assert a.N == b.N


def test_truncated_accounting():
    for h in (0, 1, 4):
        tr = simulate_Z_truncated(0.6, h, make_rng(h), n_end=300, record_times=np.linspace(0, 20, 200))
        assert tr.final.N == 300
        assert np.all(np.diff(tr.sizes) >= 0)
        assert all(len(s.counts) <= h + 1 for s in tr.states)


def test_level_zero_fractions():
    p = 0.6
    fin = [simulate_Z_truncated(p, 0, make_rng(s), t_end=9.0).final for s in range(200)]
    closed = sum(s[0] for s in fin) / sum(s.N for s in fin)
    assert abs(closed - (1 - p)) < 0.01
    assert all(s.overweight + s[0] == s.N for s in fin)


def test_eigenvector_level_zero():
    for p in (0.1, 0.5, 0.9):
        assert np.allclose(solve_truncated_eigenvector(p, 0), [1 - p, p], rtol=1e-14)


def test_eigenvector_half():
    nu = solve_truncated_eigenvector(0.5, 1)
    assert np.allclose(nu, [0.5, 1 / 6, 1 / 3], rtol=1e-14)
    for h in (1, 2, 10):
        assert math.isclose(solve_truncated_eigenvector(0.5, h)[1], 1 / 6, rel_tol=1e-13)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("h", [1, 7, 60, 200])
def test_eigenvector_closed_form(p, h):
    nu = solve_truncated_eigenvector(p, h)
    k = np.arange(1, h + 1)
    assert np.allclose(nu[1 : h + 1], (1 - p) * beta(1 + 1 / p, k), rtol=1e-12, atol=0)
    assert eigenvector_consistency(p, nu) < 1e-14


def test_eigenvector_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_truncated_eigenvector(0.5, -1)
    with pytest.raises(ValueError):
        solve_truncated_eigenvector(1.0, 3)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_limit_normalisation(p):
    assert abs(site_mass(p) - 1) < 1e-10
    assert abs(site_open_mass(p) - p) < 1e-10


def test_malthusian_slope():
    rec = np.linspace(0, 12, 49)
    res = [estimate_malthusian(simulate_Z(0.6, make_rng(s), t_end=12.0, record_times=rec)) for s in range(100)]
    slope = np.mean([r[0] for r in res])
    assert abs(slope - 1.0) < 0.05


def test_malthusian_degenerate_and_short():
    t = np.linspace(0, 10, 21)
    assert abs(estimate_malthusian((t, np.full(21, 5.0)))[0]) < 1e-12
    with pytest.raises(ValueError):
        estimate_malthusian((np.linspace(0, 1, 5), np.ones(5)))
    with pytest.raises(ValueError):
        estimate_malthusian((np.array([0.0, 10.0]), np.array([1.0, 2.0])))


def test_pair_census():
    c = ClusterCensus(np.array([3, 2, 0, 1]))
    assert pair_census(c, lambda k: max(k, 1)) == c.n == 8
    assert pair_census(c, lambda k: k == 0) == 3
    bond = ClusterCensus(np.array([0, 2, 1, 1]), "bond")
    assert pair_census(bond, lambda k: k) == 7


def test_state_and_csv():
    s = BranchingState(np.array([2, 1, 0, 0]), 3, 1.5, 2)
    assert s.N == 6 and s.counts.tolist() == [2, 1]
    with pytest.raises(ValueError):
        s.census()
    tr = simulate_Z_truncated(0.6, 2, make_rng(0), t_end=2.0, record_times=[1.0])
    assert tr.to_csv().startswith("t,k,count\n")
    assert eigenvector_csv(solve_truncated_eigenvector(0.5, 1)).splitlines()[0] == "k,nu"
