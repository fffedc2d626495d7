"""Small statistical helpers on top of scipy.stats."""
from __future__ import annotations

import numpy as np
from scipy import stats


def mean_se(x, axis=0):
    """Sample mean and its standard error along ``axis``."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[axis]
    m = x.mean(axis=axis)
    se = x.std(axis=axis, ddof=1) / np.sqrt(n) if n > 1 else np.full_like(m, np.nan)
    return m, se


def z_scores(mean, se, target):
    se = np.asarray(se, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, (np.asarray(mean) - target) / se, np.where(np.asarray(mean) == target, 0.0, np.inf))


def chi2_gof(observed: dict, expected: dict, min_expected: float = 5.0):
    """Chi-square goodness of fit of counts against exact probabilities.

    Cells whose expected count falls below ``min_expected`` are pooled into
    one cell, which joins the smallest other cell if it is still too thin.
    Returns ``(statistic, dof, p_value)``.
    """
    total = sum(observed.values())
    keys = set(expected) | set(observed)
    if any(c > 0 and float(expected.get(k, 0.0)) == 0.0 for k, c in observed.items()):
        # an outcome of probability zero was observed
        return float("inf"), len(keys) - 1, 0.0
    obs, exp = [], []
    pool_o = pool_e = 0.0
    for key in keys:
        e = float(expected.get(key, 0.0)) * total
        o = observed.get(key, 0)
        if e < min_expected:
            pool_o += o
            pool_e += e
        else:
            obs.append(o)
            exp.append(e)
    if pool_e >= min_expected or (exp == [] and (pool_e > 0 or pool_o > 0)):
        obs.append(pool_o)
        exp.append(pool_e)
    elif pool_e > 0 or pool_o > 0:
        # still too thin on its own, merge into the smallest remaining cell
        i = int(np.argmin(exp))
        obs[i] += pool_o
        exp[i] += pool_e
    obs = np.asarray(obs, dtype=np.float64)
    exp = np.asarray(exp, dtype=np.float64)
    if np.any((exp == 0) & (obs > 0)):
        return float("inf"), len(obs) - 1, 0.0
    keep = exp > 0
    stat = float(np.sum((obs[keep] - exp[keep]) ** 2 / exp[keep]))
    dof = int(keep.sum()) - 1
    return stat, dof, float(stats.chi2.sf(stat, dof)) if dof > 0 else 1.0


def ks_2samp(x, y):
    """Two-sample KS statistic and p-value."""
    r = stats.ks_2samp(np.asarray(x), np.asarray(y))
    return float(r.statistic), float(r.pvalue)


def ks_exp1(x):
    """KS test of a sample against the standard exponential law."""
    r = stats.kstest(np.asarray(x), "expon")
    return float(r.statistic), float(r.pvalue)


def bonferroni(level: float, m: int) -> float:
    return level / max(int(m), 1)


def loglog_fit(x, y):
    """Slope and intercept of log y on log x with the slope's standard error."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    r = stats.linregress(lx, ly)
    return float(r.slope), float(r.intercept), float(r.stderr)
