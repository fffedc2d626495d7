"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from rrtperc import _kernels
from rrtperc._kernels import _fallback
from rrtperc.rng import make_rng


def cases(n):
    rng = make_rng(0)
    parent = _fallback.grow_parents(n, rng)
    marks = _fallback.bernoulli_marks(n, 0.6, rng)
    bond = _fallback.bond_labels(parent, marks)
    none = np.empty(0)
    return [
        ("grow_parents", lambda m: m.grow_parents(n, make_rng(1))),
        ("bernoulli_marks", lambda m: m.bernoulli_marks(n, 0.6, make_rng(1))),
        ("site_labels", lambda m: m.site_labels(parent, marks)),
        ("bond_labels", lambda m: m.bond_labels(parent, marks)),
        ("piece_labels", lambda m: m.piece_labels(parent, bond)),
        ("leading_pieces", lambda m: m.leading_pieces(parent, marks, 3, 2)),
        ("census_chain", lambda m: m.census_chain(1000, 0.6, 20, make_rng(1))),
        ("gillespie t=7", lambda m: m.gillespie(0.6, -1, 7.0, 0, none, 1 << 20, make_rng(1))),
        ("yule_pair t=8", lambda m: m.yule_pair(0.6, 8.0, 20, make_rng(1))),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2**18, help="tree size for the tree kernels")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.BACKEND != "compiled":
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    compiled = _kernels._impl
    print(f"{'kernel':<18}{'compiled [ms]':>15}{'python [ms]':>15}{'speedup':>10}")
    for name, f in cases(args.n):
        tc = min(timeit.repeat(lambda: f(compiled), number=1, repeat=args.repeat)) * 1e3
        tp = min(timeit.repeat(lambda: f(_fallback), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<18}{tc:>15.2f}{tp:>15.2f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
