"""Acceptance suite: ten exit criteria at their stated sizes and tolerances.

Every criterion prints one ``criterion N: PASS|FAIL ...`` line. All Monte
Carlo criteria use the harness default seed, fixed before any run. The
module also runs standalone: ``python tests/test_acceptance.py``.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from rrtperc.branching import eigenvector_residual, solve_truncated_eigenvector
from rrtperc.experiments import (
    DEFAULT_SEED,
    ExperimentConfig,
    beta_identity_table,
    cmd_branching,
    cmd_largest,
    cmd_limit_laws,
    cmd_proportions,
    lq_facts,
)
from rrtperc.oracle import ewens_agreement, exact_census_distribution, exact_chain_distribution, exact_coupling_check
from rrtperc.percolation import census_chain
from rrtperc.rng import replicate_rng
from rrtperc.stats import chi2_gof

pytestmark = pytest.mark.acceptance

CFG = ExperimentConfig(seed=DEFAULT_SEED)


def report(capsys, number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return passed


def criterion_1(capsys=None):
    start = time.perf_counter()
    rep = exact_coupling_check(8)
    elapsed = time.perf_counter() - start
    expected = {n: math.factorial(n - 1) * 2**n for n in range(1, 9)}
    ok = rep.ok and rep.instances == expected and elapsed < 120
    return report(capsys, 1, ok, f"coupling exact on {sum(rep.instances.values())} instances, n<=8, {elapsed:.1f}s")


def criterion_2(capsys=None):
    ok = True
    for k in range(1, 8):
        same, law = ewens_agreement(k)
        means = all(law.expect(lambda a, j=j: a[j - 1]) == Fraction(1, j) for j in range(1, k + 1))
        ok &= same and means
    return report(capsys, 2, ok, "Ewens enumeration law and means exact for k<=7")


def criterion_3(capsys=None):
    worst = 0.0
    for p in (0.2, 0.5, 0.8):
        solve_truncated_eigenvector(p, 200)
        worst = max(worst, eigenvector_residual(p, 200))
    return report(capsys, 3, worst < 1e-12, f"eigenvector max relative gap {worst:.3g} (< 1e-12), h=200")


def criterion_4(capsys=None):
    c = beta_identity_table().checks[0]
    return report(capsys, 4, c.passed, f"Beta series max residual {c.value:.3g} (< 1e-10), j<=50")


def criterion_5(capsys=None):
    t = cmd_proportions(CFG)
    z, slope = t.checks
    detail = f"p=0.6 n=1e6 reps=20: max |z| for k<=10 = {z.value:.3g}, slope {slope.value:.4g} vs {slope.threshold:.4g}"
    return report(capsys, 5, t.passed, detail)


def criterion_6(capsys=None):
    t = cmd_largest(CFG)
    c = t.checks[0]
    return report(capsys, 6, c.passed, f"p=0.5 n=2^10..2^20 reps=200: slope {c.value:.4f} vs 0.5 (tol 0.05)")


def criterion_7(capsys=None):
    t = cmd_limit_laws(CFG)
    needed = [c for c in t.checks if c.required and "mean" not in c.name]
    ok = all(c.passed for c in needed)
    detail = "; ".join(f"{c.name.split(' (')[0]} p={c.value:.3g}" for c in needed)
    return report(capsys, 7, ok, f"n=2^20 reps=1e4: {detail}")


def criterion_8(capsys=None):
    t = cmd_branching(CFG)
    slope = t.check("mean Malthusian slope")
    ks = next(c for c in t.checks if c.name.startswith("e^-t N_t"))
    ok = slope.passed and ks.passed
    return report(capsys, 8, ok, f"t=12 reps=1e4: Exp(1) KS p={ks.value:.3g}, slope {slope.value:.4f}")


def criterion_9(capsys=None):
    p = 0.6
    tv = exact_census_distribution(4, p).tv_distance(exact_chain_distribution(4, p))
    law = exact_census_distribution(6, p, rational=False)
    draws = census_chain(6, p, 10**5, replicate_rng(DEFAULT_SEED, "acceptance/chain", 0))
    rows, counts = np.unique(draws, axis=0, return_counts=True)
    seen = {tuple(np.trim_zeros(r, "b").tolist()): c for r, c in zip(rows, counts.tolist())}
    _, dof, pv = chi2_gof(seen, law.mass)
    ok = tv < 1e-12 and pv > 0.01
    return report(capsys, 9, ok, f"TV at n=4 = {tv:.3g}; chi2 at n=6 p={pv:.3g} (dof {dof}, 1e5 runs)")


def criterion_10(capsys=None):
    r = lq_facts(replicate_rng(DEFAULT_SEED, "acceptance/lq", 0), 10**4)
    bad = r["monotonicity_violations"] + r["nonexpansivity_violations"]
    return report(capsys, 10, bad == 0, f"{r['pairs']} pairs, q in {{1,2,inf}}: {bad} violations")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_criterion(criterion, capsys):
    assert criterion(capsys)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
