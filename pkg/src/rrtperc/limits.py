"""Limit laws: Yule-Simon proportions, Ewens partitions and limit samplers.

Notation: ``a = 1 + 1/p``, ``c_p = 1 - p`` and ``c~_p = 1/p - 1``. The site
proportions are ``nu_p(0) = 1 - p`` and ``nu_p(k) = c_p B(a, k)`` for
``k >= 1``; bond clusters of size k have density ``c~_p B(a, k)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import mpmath as mp
import numpy as np
from scipy.special import betaln

from . import _kernels
from .rng import Generator
from .tree import _check_p


@dataclass(frozen=True)
class LimitLaw:
    p: float

    def __post_init__(self):
        _check_p(self.p)

    @property
    def a(self) -> float:
        return 1.0 + 1.0 / self.p

    @property
    def c_site(self) -> float:
        return 1.0 - self.p

    @property
    def c_bond(self) -> float:
        return 1.0 / self.p - 1.0

    def site_pmf(self, k):
        return yule_simon_pmf(self.p, k)

    def bond_pmf(self, k):
        return bond_yule_simon_pmf(self.p, k)


def _log_beta_tail(p: float, k: np.ndarray) -> np.ndarray:
    return betaln(1.0 + 1.0 / p, k)


def yule_simon_pmf(p: float, k):
    """Site limit proportion ``nu_p(k)``; works elementwise on arrays."""
    p = _check_p(p)
    k = np.asarray(k)
    if np.any(k < 0):
        raise ValueError("k must be nonnegative")
    kk = np.maximum(k, 1).astype(np.float64)
    out = np.where(k == 0, 1.0 - p, (1.0 - p) * np.exp(_log_beta_tail(p, kk)))
    return float(out) if out.ndim == 0 else out


def bond_yule_simon_pmf(p: float, k):
    """Bond cluster density ``c~_p B(1 + 1/p, k)`` for ``k >= 1``."""
    p = _check_p(p)
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError("k must be at least 1")
    out = (1.0 / p - 1.0) * np.exp(_log_beta_tail(p, k.astype(np.float64)))
    return float(out) if out.ndim == 0 else out


# -- infinite series -------------------------------------------------------

def _mp_beta(a, x):
    """B(a, x) for real x >= 1, stable for huge x."""
    if x > 10**12:
        # Gamma ratio expansion x^-a (1 - a(a-1)/(2x) + ...) suffices here
        return mp.gamma(a) * x ** (-a) * (1 - a * (a - 1) / (2 * x))
    return mp.exp(mp.loggamma(a) + mp.loggamma(x) - mp.loggamma(a + x))


def series_sum(f: Callable, start: int, alpha: float, head: int = 64, dps: int = 40) -> tuple[float, float]:
    """Sum ``f(k)`` over ``k >= start`` for a smooth ``f`` decaying like ``k^-alpha``.

    Terms below ``head`` are added exactly; the remainder is
    ``int_K^inf f + f(K)/2`` plus Euler-Maclaurin corrections up to the
    fifth derivative. The integral is taken after the change of variables
    ``x = K u^(-1/(alpha-1))``, which maps the slowly decaying tail onto
    [0, 1]. Returns the sum and the size of the last correction term as an
    error scale.
    """
    if alpha <= 1:
        raise ValueError("series diverges unless alpha > 1")
    with mp.workdps(dps):
        K = max(int(head), int(start))
        total = mp.fsum(f(mp.mpf(k)) for k in range(start, K))
        s = 1 / (mp.mpf(alpha) - 1)

        def integrand(u):
            if u == 0:
                return mp.mpf(0)
            x = K * u ** (-s)
            return f(x) * K * s * u ** (-s - 1)

        integral = mp.quad(integrand, [0, mp.mpf(1) / 2**20, mp.mpf(1) / 2**10, 1])
        fK = f(mp.mpf(K))
        d1 = mp.diff(f, K, 1)
        d3 = mp.diff(f, K, 3)
        d5 = mp.diff(f, K, 5)
        corr = fK / 2 - d1 / 12 + d3 / 720 - d5 / 30240
        total += integral + corr
        return float(total), float(abs(d5 / 30240))


def beta_tail_bound(p: float, K: int, power: int = 0) -> float:
    """Analytic bound on ``sum_{k >= K} k^power B(1 + 1/p, k)``.

    Uses ``B(a, k) <= Gamma(a) k^-a`` and an integral comparison; finite only
    when ``a - power > 1``.
    """
    a = 1.0 + 1.0 / p
    e = a - power
    if e <= 1:
        return math.inf
    return math.gamma(a) * (K ** (-e) + K ** (1 - e) / (e - 1))


def site_mass(p: float) -> float:
    """``<nu_p, x v 1>`` evaluated as a numeric series (should be 1)."""
    p = _check_p(p)
    a = mp.mpf(1) + 1 / mp.mpf(p)
    s, _ = series_sum(lambda x: x * _mp_beta(a, x), 1, float(a - 1))
    return (1.0 - p) + (1.0 - p) * s


def site_open_mass(p: float) -> float:
    """``sum_k k nu_p(k)`` as a numeric series (should be p)."""
    return site_mass(p) - (1.0 - p)


def bond_mass(p: float) -> float:
    """``sum_k k c~_p B(a, k)`` as a numeric series (should be 1)."""
    p = _check_p(p)
    a = mp.mpf(1) + 1 / mp.mpf(p)
    s, _ = series_sum(lambda x: x * _mp_beta(a, x), 1, float(a - 1))
    return (1.0 / p - 1.0) * s


class BetaTail:
    """Tails ``sum_{k >= m} B(1 + 1/p, k)`` for many m from one series evaluation."""

    def __init__(self, p: float, head: int = 64):
        self.p = _check_p(p)
        self.head = head
        with mp.workdps(40):
            self._a = mp.mpf(1) + 1 / mp.mpf(p)
            self._far, self.err = series_sum(lambda x: _mp_beta(self._a, x), head, float(self._a), head=head)

    def __call__(self, m: int) -> float:
        if m >= self.head:
            s, _ = series_sum(lambda x: _mp_beta(self._a, x), m, float(self._a), head=m)
            return s
        with mp.workdps(40):
            return float(mp.fsum(_mp_beta(self._a, mp.mpf(k)) for k in range(m, self.head)) + self._far)


def beta_series_identity_check(p: float, j: int, tail: BetaTail | None = None) -> float:
    """Residual of ``c~_p / j * sum_{k >= j} B(a, k + 1) = c_p B(a, j)``."""
    p = _check_p(p)
    if j < 1:
        raise ValueError("j must be at least 1")
    tail = tail if tail is not None and tail.p == p else BetaTail(p)
    lhs = (1.0 / p - 1.0) * tail(j + 1) / j
    rhs = (1.0 - p) * math.exp(betaln(1.0 + 1.0 / p, j))
    return abs(lhs - rhs)


def gamma_identity_residual(p: float, j: int) -> float:
    """Log-space residual of ``Gamma(1/p) Gamma(j+1) = p j Gamma(1+1/p) Gamma(j)``."""
    lhs = math.lgamma(1.0 / p) + math.lgamma(j + 1.0)
    rhs = math.log(p * j) + math.lgamma(1.0 + 1.0 / p) + math.lgamma(float(j))
    return abs(lhs - rhs)


# -- Ewens partitions -------------------------------------------------------

def integer_partitions(k: int) -> Iterator[tuple[int, ...]]:
    """Multiplicity vectors ``(a_1, ..., a_k)`` of all partitions of k."""
    def parts(rest, largest):
        if rest == 0:
            yield []
            return
        for m in range(min(rest, largest), 0, -1):
            for tail in parts(rest - m, m):
                yield [m] + tail

    for ps in parts(k, k):
        a = [0] * k
        for m in ps:
            a[m - 1] += 1
        yield tuple(a)


def ewens_pmf(k: int, a, exact: bool = False):
    """Probability of the multiplicity vector ``a`` (``a[j-1]`` blocks of size j).

    Returns 0 when ``sum j a_j != k``. With ``exact=True`` the value is a
    :class:`fractions.Fraction`.
    """
    a = [int(x) for x in a]
    if any(x < 0 for x in a) or sum((j + 1) * x for j, x in enumerate(a)) != k:
        return Fraction(0) if exact else 0.0
    den = 1
    for j, x in enumerate(a, start=1):
        den *= j**x * math.factorial(x)
    return Fraction(1, den) if exact else 1.0 / den


def ewens_moments(k: int, j: int) -> tuple[float, float]:
    """First two moments of the number of blocks of size j."""
    if not 1 <= j <= k:
        raise ValueError("need 1 <= j <= k")
    return 1.0 / j, 1.0 / j + 1.0 / j**2


# -- samplers -----------------------------------------------------------------

def sample_mittag_leffler(p: float, rng: Generator, size=None):
    """Mittag-Leffler(p) draws as ``S^-p`` with S positive p-stable.

    S is generated by Kanter's two-uniform method; the resulting law has
    mean ``1 / Gamma(1 + p)``.
    """
    p = _check_p(p)
    u = np.pi * (1.0 - rng.random(size))
    e = rng.standard_exponential(size)
    return np.sin(u) / np.sin(p * u) ** p * (e / np.sin((1.0 - p) * u)) ** (1.0 - p)


def sample_sigma(p: float, i: int, rng: Generator, size=None):
    """``sigma_i``: 1 plus i - 1 geometric(1 - p) increments on {1, 2, ...}."""
    p = _check_p(p)
    if i < 1:
        raise ValueError("i must be at least 1")
    shape = () if size is None else np.atleast_1d(size).tolist()
    if i == 1:
        return np.ones(shape, dtype=np.int64) if size is not None else 1
    steps = rng.geometric(1.0 - p, size=tuple(shape) + (i - 1,))
    return 1 + steps.sum(axis=-1)


def sample_limit_bond(p: float, i: int, rng: Generator, size=None):
    """Marginal limit of the scaled size of the i-th bond cluster.

    ``W~_i = M * beta^p`` with M Mittag-Leffler(p), ``beta ~ Beta(1, sigma_i - 1)``
    and the convention Beta(1, 0) = 1.
    """
    sigma = np.asarray(sample_sigma(p, i, rng, size))
    b = np.ones(sigma.shape)
    more = sigma > 1
    if np.any(more):
        b[more] = rng.beta(1.0, sigma[more] - 1.0)
    w = sample_mittag_leffler(p, rng, size) * b**p
    return float(w) if size is None else w


def sample_stick_breaking(rng: Generator, j_max: int, size=None) -> np.ndarray:
    """Uniform stick-breaking weights ``V_1..V_jmax`` (last axis)."""
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    shape = (() if size is None else tuple(np.atleast_1d(size).tolist())) + (j_max,)
    u = rng.random(shape)
    left = np.cumprod(1.0 - u, axis=-1)
    left = np.concatenate([np.ones(shape[:-1] + (1,)), left[..., :-1]], axis=-1)
    return left * u


def sample_limit_site(p: float, i: int, j: int, rng: Generator, size=None):
    """Marginal limit of the scaled size of piece j of bond cluster i.

    ``W~_i V_j`` with independent streams for the two factors; j = 0 (the
    isolated root itself) gives 0.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    if j == 0:
        return 0.0 if size is None else np.zeros(size)
    r_w, r_v = rng.spawn(2)
    w = sample_limit_bond(p, i, r_w, size)
    v = sample_stick_breaking(r_v, j, size)[..., j - 1]
    return float(w * v) if size is None else w * v


def yule_ratio_oracle(p: float, t: float, size: int, rng: Generator) -> np.ndarray:
    """Reference draws of ``G_t / N_t^p`` from the embedded Yule processes.

    G is the root cluster, growing at rate p; N is the whole rate-1 tree.
    The ratio is the scaled root cluster at the random size ``N_t`` and
    converges to the Mittag-Leffler(p) law as t grows.
    """
    p = _check_p(p)
    G, N = _kernels.yule_pair(p, float(t), int(size), rng)
    return G / N.astype(np.float64) ** p


# -- l^q utilities ------------------------------------------------------------

def lq_norm(v, q: float) -> float:
    v = np.abs(np.asarray(v, dtype=np.float64))
    if q < 1:
        raise ValueError("q must be at least 1")
    if v.size == 0:
        return 0.0
    if math.isinf(q):
        return float(v.max())
    m = v.max()
    if m == 0:
        return 0.0
    # rescale so large q does not overflow
    return float(m * np.sum((v / m) ** q) ** (1.0 / q))


def rank_descending(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if np.any(v < 0):
        raise ValueError("ranking expects nonnegative entries")
    return np.sort(v)[::-1]


def log_log_slope(k, y) -> float:
    """Least-squares slope of log y against log k."""
    k = np.asarray(k, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (k > 0) & (y > 0)
    if keep.sum() < 2:
        raise ValueError("need two positive points for a slope")
    return float(np.polyfit(np.log(k[keep]), np.log(y[keep]), 1)[0])


def pmf_table_csv(p: float, k_max: int, bond: bool = False) -> str:
    ks = np.arange(1 if bond else 0, k_max + 1)
    vals = bond_yule_simon_pmf(p, ks) if bond else yule_simon_pmf(p, ks)
    rows = ["k,pmf"] + [f"{k},{v:.17g}" for k, v in zip(ks.tolist(), np.atleast_1d(vals).tolist())]
    return "\n".join(rows) + "\n"
