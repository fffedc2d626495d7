"""Command-line entry point: ``rrtperc <command> [options]``.

Exit status is 0 when every check passes, 1 when a check fails and 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import sys

from . import experiments as ex
from .rng import make_rng
from .tree import export_dot, grow_yule, mark_sites, tree_from_json, tree_to_json

COMMANDS = {
    "proportions": ex.cmd_proportions,
    "largest": ex.cmd_largest,
    "limit-laws": ex.cmd_limit_laws,
    "branching": ex.cmd_branching,
    "oracle": ex.cmd_oracle,
}


def _grid(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad n-grid {text!r}") from None


def _size(text: str) -> int:
    # accepts 1000000, 1e6 and 2^20
    try:
        if "^" in text:
            b, e = text.split("^")
            return int(b) ** int(e)
        return int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrtperc", description="Site percolation on random recursive trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, help="probability that a vertex is open")
    common.add_argument("--n", type=_size, help="tree size (accepts 1e6 or 2^20)")
    common.add_argument("--seed", type=int, default=ex.DEFAULT_SEED, help="master seed")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write the table here instead of stdout")

    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--reps", type=int, help="number of replicates")
        sp.add_argument("--workers", type=int, default=1, help="worker processes")
        if name == "largest":
            sp.add_argument("--n-grid", type=_grid, help="comma separated sizes")
            sp.add_argument("--q", type=float, help="l^q exponent, must exceed 1/p")
        if name == "branching":
            sp.add_argument("--h", type=int, help="truncation level")
            sp.add_argument("--t", type=float, help="simulation horizon")

    for name in ("grow", "export-dot"):
        sp = sub.add_parser(name, parents=[common])
        if name == "export-dot":
            sp.add_argument("--tree", help="tree JSON from 'grow' (default: grow a new one)")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _small_tree(args):
    n = args.n if args.n is not None else 20
    p = args.p if args.p is not None else 0.6
    if n < 1 or not 0 < p < 1:
        raise ex.ConfigError("need n >= 1 and 0 < p < 1")
    rng = make_rng(args.seed)
    tree = grow_yule(n, rng)
    return tree, mark_sites(tree, p, rng)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "grow":
            tree, marks = _small_tree(args)
            _emit(tree_to_json(tree, marks) + "\n", args.out)
            return 0
        if args.command == "export-dot":
            if args.tree:
                with open(args.tree) as fh:
                    tree, marks = tree_from_json(fh.read())
            else:
                tree, marks = _small_tree(args)
            _emit(export_dot(tree, marks), args.out)
            return 0
        cfg = ex.ExperimentConfig(
            p=args.p, n=args.n, n_grid=getattr(args, "n_grid", None), reps=args.reps, seed=args.seed,
            h=getattr(args, "h", None), q=getattr(args, "q", None), t=getattr(args, "t", None),
            fmt=args.fmt, workers=args.workers,
        )
        cfg.validate()
        table = COMMANDS[args.command](cfg)
    except (ex.ConfigError, ValueError, OSError) as err:
        print(f"rrtperc: error: {err}", file=sys.stderr)
        return 2
    _emit(table.render(cfg.fmt), args.out)
    for c in table.checks:
        print(c.line(), file=sys.stderr)
    return 0 if table.passed else 1


if __name__ == "__main__":
    sys.exit(main())
