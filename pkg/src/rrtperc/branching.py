"""The cluster-type branching process behind the census and its truncation.

Every vertex rings at rate 1 and spawns a child. A child is closed with
probability 1 - p (a new type-0 individual); an open child either starts a
new open singleton (parent closed) or grows its parent's open cluster by
one. An individual of type k >= 1 is an open cluster of size k.

In the truncated process clusters that would exceed size h are dissolved
into "over-weighted" vertices, which keep spawning at rate 1 each.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betaln

from . import _kernels
from .percolation import ClusterCensus
from .rng import Generator
from .tree import _check_p

DEFAULT_CLASS_CAP = 2**20
MIN_MALTHUS_T = 2.0


@dataclass(frozen=True, eq=False)
class BranchingState:
    """Snapshot of the process.

    Parameters
    ----------
    counts : ndarray of int64
        ``counts[k]`` individuals of type k.
    overweight : int
        Over-weighted vertices (always 0 without truncation).
    t : float
    h : int or None
        Truncation level, None for the full process.
    """

    counts: np.ndarray
    overweight: int
    t: float
    h: int | None = None

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.counts, dtype=np.int64), "b")
        object.__setattr__(self, "counts", c if c.size else np.zeros(1, dtype=np.int64))

    @property
    def N(self) -> int:
        """Number of vertices, ``Z(0) + sum_k k Z(k) + overweight``."""
        c = self.counts
        return int(c[0] + np.dot(np.arange(c.size), c) + self.overweight)

    def __getitem__(self, k: int) -> int:
        return int(self.counts[k]) if 0 <= k < self.counts.size else 0

    def census(self) -> ClusterCensus:
        if self.overweight:
            raise ValueError("a truncated state with over-weighted vertices is not a census")
        return ClusterCensus(self.counts)


@dataclass
class Trajectory:
    """States at the requested record times followed by the final state."""

    p: float
    h: int | None
    states: list = field(default_factory=list)

    @property
    def final(self) -> BranchingState:
        return self.states[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.N for s in self.states], dtype=np.int64)

    def to_csv(self) -> str:
        rows = ["t,k,count"]
        for s in self.states:
            for k, c in enumerate(s.counts.tolist()):
                if c:
                    rows.append(f"{s.t:.17g},{k},{c}")
            if s.h is not None:
                rows.append(f"{s.t:.17g},over,{s.overweight}")
        return "\n".join(rows) + "\n"


def _run(p, h, t_end, n_end, rng, record_times, class_cap) -> Trajectory:
    p = _check_p(p)
    if t_end is None and n_end is None:
        raise ValueError("give t_end or n_end")
    t_stop = math.inf if t_end is None else float(t_end)
    if t_stop < 0:
        raise ValueError("t_end must be nonnegative")
    n_stop = 0 if n_end is None else int(n_end)
    if n_end is not None and n_stop < 1:
        raise ValueError("n_end must be at least 1")
    rec = np.ascontiguousarray(np.sort(np.asarray([] if record_times is None else record_times, dtype=np.float64)))
    counts, over, t, _, rec_counts, rec_over, _ = _kernels.gillespie(
        p, -1 if h is None else int(h), t_stop, n_stop, rec, int(class_cap), rng
    )
    hh = None if h is None else int(h)
    traj = Trajectory(p, hh)
    for tr, c, o in zip(rec[: len(rec_counts)].tolist(), rec_counts, np.asarray(rec_over).tolist()):
        traj.states.append(BranchingState(c, int(o), tr, hh))
    traj.states.append(BranchingState(counts, int(over), float(t), hh))
    return traj


def simulate_Z(p: float, rng: Generator, t_end: float | None = None, n_end: int | None = None,
               record_times=None, class_cap: int = DEFAULT_CLASS_CAP) -> Trajectory:
    """Exact event-driven simulation of the full process.

    Starts from one individual (type 0 with probability 1 - p, else type 1)
    and runs until ``t_end`` or until the population reaches ``n_end``.
    Raises OverflowError if a type above ``class_cap`` appears.
    """
    return _run(p, None, t_end, n_end, rng, record_times, class_cap)


def simulate_Z_truncated(p: float, h: int, rng: Generator, t_end: float | None = None,
                         n_end: int | None = None, record_times=None) -> Trajectory:
    """Same engine with types above ``h`` pooled into over-weighted vertices."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    return _run(p, h, t_end, n_end, rng, record_times, max(h + 2, 2))


def _eigen_matrix(p: float, h: int) -> tuple[np.ndarray, np.ndarray]:
    # rows 1..h+1 of the fixed-point system, row 0 replaced by nu(0) = 1 - p
    d = h + 2
    A = np.zeros((d, d))
    b = np.zeros(d)
    A[0, 0] = 1.0
    b[0] = 1.0 - p
    if h == 0:
        A[1, 1] = 1.0 - p
        A[1, 0] = -p
        return A, b
    A[1, 1] = 1.0 + p
    A[1, 0] = -p
    for k in range(2, h + 1):
        A[k, k] = 1.0 + p * k
        A[k, k - 1] = -p * (k - 1)
    A[h + 1, h + 1] = 1.0 - p
    A[h + 1, h] = -p * h * (h + 1)
    return A, b


def _eigen_forward(p: float, h: int) -> np.ndarray:
    nu = np.empty(h + 2)
    nu[0] = 1.0 - p
    if h == 0:
        nu[1] = p
        return nu
    nu[1] = p * nu[0] / (1.0 + p)
    for k in range(1, h):
        nu[k + 1] = k / (k + 1 + 1.0 / p) * nu[k]
    nu[h + 1] = p * h * (h + 1) * nu[h] / (1.0 - p)
    return nu


def _eigen_closed(p: float, h: int) -> np.ndarray:
    nu = np.empty(h + 2)
    nu[0] = 1.0 - p
    if h == 0:
        nu[1] = p
        return nu
    k = np.arange(1, h + 1, dtype=np.float64)
    nu[1 : h + 1] = (1.0 - p) * np.exp(betaln(1.0 + 1.0 / p, k))
    nu[h + 1] = p * h * (h + 1) * nu[h] / (1.0 - p)
    return nu


def eigenvector_consistency(p: float, nu: np.ndarray) -> float:
    """Residual of the type-0 balance ``nu(0) = (1-p)(nu(0) + sum_k k nu(k) + nu(h+1))``."""
    h = nu.size - 2
    mass = nu[0] + np.dot(np.arange(1, h + 1), nu[1 : h + 1]) + nu[h + 1]
    return abs((1.0 - p) * mass - nu[0])


def solve_truncated_eigenvector(p: float, h: int, rtol: float = 1e-12) -> np.ndarray:
    """Stationary type proportions ``nu(0..h+1)`` of the truncated process.

    Entry h + 1 is the over-weighted vertex share. The system is solved with
    a dense linear solve and cross-checked against forward substitution and
    the closed form ``nu(k) = (1-p) B(1 + 1/p, k)``; disagreement beyond
    ``rtol`` raises AssertionError.
    """
    p = _check_p(p)
    if h < 0:
        raise ValueError("h must be nonnegative")
    A, b = _eigen_matrix(p, h)
    nu = np.linalg.solve(A, b)
    resid = np.max(np.abs(A @ nu - b) / np.maximum(np.abs(b) + np.abs(A) @ np.abs(nu), 1e-300))
    if resid > rtol:
        raise AssertionError(f"linear solve residual {resid:.3g}")
    for other, name in ((_eigen_forward(p, h), "forward substitution"), (_eigen_closed(p, h), "closed form")):
        err = np.max(np.abs(nu - other) / np.abs(other))
        if err > rtol:
            raise AssertionError(f"{name} disagrees with the linear solve by {err:.3g}")
    if eigenvector_consistency(p, nu) > rtol:
        raise AssertionError("type-0 balance violated")
    return nu


def eigenvector_residual(p: float, h: int) -> float:
    """Max relative gap between the linear solve and the closed form, k <= h."""
    A, b = _eigen_matrix(p, h)
    nu = np.linalg.solve(A, b)
    ref = _eigen_closed(p, h)
    return float(np.max(np.abs(nu[: h + 1] - ref[: h + 1]) / ref[: h + 1]))


def eigenvector_csv(nu: np.ndarray) -> str:
    rows = ["k,nu"] + [f"{k},{v:.17g}" for k, v in enumerate(nu.tolist())]
    return "\n".join(rows) + "\n"


def estimate_malthusian(traj: Trajectory | tuple, min_t: float = MIN_MALTHUS_T) -> tuple[float, float]:
    """Growth rate and the martingale limit sample ``e^-t N_t``.

    The rate is the least-squares slope of log N over the tail
    ``[t_end / 2, t_end]`` of the recorded states. ``traj`` may also be a
    pair of arrays ``(times, sizes)``.
    """
    if isinstance(traj, Trajectory):
        t, N = traj.times, traj.sizes
    else:
        t, N = (np.asarray(x, dtype=np.float64) for x in traj)
    if t.size == 0 or t[-1] < min_t:
        raise ValueError(f"trajectory shorter than the minimum time {min_t}")
    tail = t >= t[-1] / 2
    if tail.sum() < 3:
        raise ValueError("need at least three recorded states in the tail")
    slope = float(np.polyfit(t[tail], np.log(N[tail]), 1)[0])
    return slope, float(math.exp(-t[-1]) * N[-1])


def pair_census(census, f) -> float:
    """``sum_k census(k) f(k)`` over occupied classes."""
    counts = census.counts if hasattr(census, "counts") else np.asarray(census)
    ks = np.flatnonzero(counts)
    return float(sum(counts[k] * f(int(k)) for k in ks))
