import numpy as np

from rrtperc.rng import make_rng, replicate_rng
from rrtperc.stats import bonferroni, chi2_gof, ks_exp1, loglog_fit, mean_se


def test_mean_se():
    m, s = mean_se([1.0, 2.0, 3.0])
    assert m == 2.0 and np.isclose(s, 1 / np.sqrt(3))


def test_chi2_pools_small_cells():
    obs = {"a": 50, "b": 48, "c": 2}
    exp = {"a": 0.5, "b": 0.49, "c": 0.01}
    stat, dof, pv = chi2_gof(obs, exp)
    assert dof == 1 and pv > 0.5
    assert chi2_gof({"x": 3}, {"y": 1.0})[2] == 0.0


def test_ks_exp1_and_bonferroni():
    assert ks_exp1(make_rng(0).standard_exponential(2000))[1] > 0.01
    assert bonferroni(0.01, 4) == 0.0025


def test_loglog_fit():
    x = np.array([1.0, 2, 4, 8])
    slope, _, se = loglog_fit(x, 3 * x**0.5)
    assert np.isclose(slope, 0.5) and se < 1e-12


def test_replicate_streams_are_stable():
    a = replicate_rng(7, "exp", 3).random(4)
    assert np.array_equal(a, replicate_rng(7, "exp", 3).random(4))
    assert not np.array_equal(a, replicate_rng(7, "exp", 4).random(4))
    assert not np.array_equal(a, replicate_rng(7, "other", 3).random(4))
