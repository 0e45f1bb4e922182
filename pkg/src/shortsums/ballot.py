"""Gaussian random walks under a logarithmically growing barrier.

Each walk is simulated once and the first time it exceeds
a + 2 log j + c is recorded for every a of a grid, so events for all
(a, n) pairs share the same draws and are nested pathwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from . import rng
from .errors import CapacityError, ContractError
from .stats import MomentEstimate, run_blocks

MAX_STEP_DRAWS = 10**10
VARIANCE_RANGE = (1.0 / 20.0, 20.0)


@dataclass(frozen=True)
class WalkSpec:
    n: int
    a: float
    c: float = 0.0
    variances: tuple | None = None
    slope: float = 0.0
    trials: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.trials < 2:
            raise ContractError("need n >= 1 and trials >= 2")
        if self.a < 1:
            raise ContractError("need a >= 1")
        _check_variances(self.variances, self.n)
        if self.n * self.trials > MAX_STEP_DRAWS:
            raise CapacityError(f"n * trials = {self.n * self.trials} above {MAX_STEP_DRAWS}")


def _check_variances(variances, n):
    if variances is None:
        return
    v = np.asarray(variances, dtype=float)
    if v.size < n:
        raise ContractError(f"variance profile has {v.size} entries, need {n}")
    lo, hi = VARIANCE_RANGE
    if np.any(v < lo) or np.any(v > hi):
        raise ContractError("variances must lie in [1/20, 20]")


def _std_profile(variances, n):
    if variances is None:
        return np.ones(n)
    return np.sqrt(np.asarray(variances, dtype=float)[:n])


@nb.njit(nogil=True, cache=True)
def _exit_times(seed, t0, t1, std, slope, a_sorted, c, lower_slope, lower_c, tau, tau_low):
    """First j with S_j > a + 2 log j + c per a, and first j with S_j < -lower_slope j - lower_c.

    n + 1 means "never within n steps".  A walk stops once every upper barrier
    has been crossed; tau_low is then only meaningful up to that step.
    """
    n = std.shape[0]
    na = a_sorted.shape[0]
    for t in range(t0, t1):
        key = rng.trial_key(seed, np.uint64(t))
        row = t - t0
        for i in range(na):
            tau[row, i] = n + 1
        tau_low[row] = n + 1
        s = 0.0
        idx = 0
        for j in range(1, n + 1):
            s += std[j - 1] * rng.gaussian(key, np.uint64(j)) + slope
            ceiling = 2.0 * math.log(j) + c
            while idx < na and s > a_sorted[idx] + ceiling:
                tau[row, idx] = j
                idx += 1
            if tau_low[row] > n and s < -lower_slope * j - lower_c:
                tau_low[row] = j
            if idx == na:
                break


def exit_times(a_values, n: int, trials: int, seed: int, c: float = 0.0, variances=None,
               slope: float = 0.0, lower_slope: float = math.inf, threads: int = 1):
    """(a_sorted, tau[trials, len(a)], tau_low[trials]) for walks of n steps."""
    a_sorted = np.sort(np.asarray(a_values, dtype=float))
    _check_variances(variances, n)
    if n * trials > MAX_STEP_DRAWS:
        raise CapacityError(f"n * trials = {n * trials} above {MAX_STEP_DRAWS}")
    std = _std_profile(variances, n)
    seed64 = np.uint64(seed & rng.MASK64)
    low = float(lower_slope)

    def block(t0, t1):
        tau = np.empty((t1 - t0, a_sorted.size), dtype=np.int64)
        tl = np.empty(t1 - t0, dtype=np.int64)
        _exit_times(seed64, t0, t1, std, float(slope), a_sorted, float(c), low, float(c), tau, tl)
        return np.column_stack([tau, tl])

    out = run_blocks(block, trials, threads)
    return a_sorted, out[:, :-1], out[:, -1]


def binomial_estimate(hits, normalization=math.nan) -> MomentEstimate:
    h = np.asarray(hits, dtype=bool)
    p = float(h.mean())
    return MomentEstimate(math.nan, h.size, p, math.sqrt(p * (1 - p) / h.size), normalization)


def mc_barrier_prob(spec: WalkSpec, threads: int = 1) -> MomentEstimate:
    """P[S_j <= a + 2 log j + c for all j <= n]."""
    _, tau, _ = exit_times([spec.a], spec.n, spec.trials, spec.seed, spec.c, spec.variances,
                           spec.slope, threads=threads)
    return binomial_estimate(tau[:, 0] > spec.n, min(1.0, spec.a / math.sqrt(spec.n)))


def mc_two_sided_prob(spec: WalkSpec, lower_slope: float, threads: int = 1) -> MomentEstimate:
    """P[-lower_slope j - c <= S_j <= a + 2 log j + c for all j <= n]; inf disables the floor."""
    _, tau, tau_low = exit_times([spec.a], spec.n, spec.trials, spec.seed, spec.c,
                                 spec.variances, spec.slope, lower_slope, threads)
    return binomial_estimate((tau[:, 0] > spec.n) & (tau_low > spec.n))


@dataclass(frozen=True)
class ScalingRow:
    a: float
    n: int
    p_hat: float
    stderr: float
    normalized: float


@dataclass
class ScalingTable:
    rows: list = field(default_factory=list)
    tau: np.ndarray | None = None
    a_sorted: np.ndarray | None = None

    def cell(self, a, n) -> ScalingRow:
        for row in self.rows:
            if row.a == a and row.n == n:
                return row
        raise KeyError((a, n))


def scaling_table(a_values, n_values, trials: int, seed: int, c: float = 0.0,
                  variances=None, threads: int = 1) -> ScalingTable:
    """Rows (a, n, p_hat, stderr, p_hat sqrt(n)/a) from one set of coupled walks."""
    if len(a_values) == 0 or len(n_values) == 0:
        raise ContractError("grids must be nonempty")
    if min(a_values) < 1 or min(n_values) < 1:
        raise ContractError("need a >= 1 and n >= 1")
    n_max = int(max(n_values))
    a_sorted, tau, _ = exit_times(a_values, n_max, trials, seed, c, variances, threads=threads)
    rows = []
    for a in a_values:
        col = tau[:, int(np.searchsorted(a_sorted, a))]
        for n in n_values:
            est = binomial_estimate(col > n)
            rows.append(ScalingRow(float(a), int(n), est.mean, est.stderr,
                                   est.mean * math.sqrt(n) / a))
    return ScalingTable(rows, tau, a_sorted)
