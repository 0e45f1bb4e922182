"""Short interval sums M(x, y; f), their smooth/rough pieces, and moment scans."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import model as mdl
from .errors import ContractError
from .model import ModelKind, PrimeValueStream
from .sieve import factor_interval, squarefree_count
from .stats import MomentEstimate, abs_power, estimate_from_samples, run_blocks

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalSpec:
    """The integers n with x < n <= x + y."""

    x: int
    y: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ContractError(f"need x, y >= 0, got ({self.x}, {self.y})")

    @property
    def delta(self) -> float:
        return self.x / self.y

    @property
    def theta(self) -> float:
        """theta with x / y = (log x)**theta; nan where log log x <= 0."""
        if self.x <= math.e or self.y == 0:
            return math.nan
        return math.log(self.x / self.y) / math.log(math.log(self.x))

    @classmethod
    def from_theta(cls, x: int, theta: float) -> "IntervalSpec":
        return cls(x, round(x / math.log(x) ** theta))


@dataclass(frozen=True)
class DecompositionSpec:
    """Cut points x_k = x**exp(-(k+1)), 0 <= k <= K, with K = floor(log log log x) >= 0."""

    x: float

    @property
    def K(self) -> int:
        if self.x <= math.e**math.e:
            return 0
        return max(0, math.floor(math.log(math.log(math.log(self.x)))))

    def cut(self, k: int) -> float:
        """x_k; x_{-1} = x."""
        return self.x ** math.exp(-(k + 1))

    @property
    def cuts(self) -> list[float]:
        return [self.cut(k) for k in range(self.K + 1)]


def threshold_G(x: float, theta: float, q: float) -> float:
    """min{theta sqrt(log log x) + 1/((1-q) sqrt(log log x)), 1}."""
    ll = math.log(math.log(x)) if x > math.e else 0.0
    if ll <= 0 or q >= 1:
        return 1.0
    return min(theta * math.sqrt(ll) + 1.0 / ((1.0 - q) * math.sqrt(ll)), 1.0)


@lru_cache(maxsize=8)
def _plan(x: int, y: int) -> mdl.IntervalPlan:
    return mdl.make_plan(factor_interval(x, y))


def f_values(spec: IntervalSpec, stream: PrimeValueStream) -> np.ndarray:
    """f(n) for every n in the interval, as a complex array."""
    if spec.y == 0:
        return np.zeros(0, dtype=complex)
    plan = _plan(spec.x, spec.y)
    re = np.empty(spec.y)
    im = np.empty(spec.y)
    mdl.interval_values_kernel(np.uint64(stream.master_seed & (2**64 - 1)),
                               np.uint64(stream.trial_index), stream.model is mdl.STEINHAUS,
                               plan.uprimes, plan.offsets, plan.pidx, plan.exps,
                               plan.squarefree, re, im)
    return re + 1j * im


def _lpf(spec: IntervalSpec) -> np.ndarray:
    if spec.y == 0:
        return np.zeros(0, dtype=np.int64)
    return _plan(spec.x, spec.y).lpf


def sum_M(spec: IntervalSpec, stream: PrimeValueStream) -> complex:
    return complex(np.sum(f_values(spec, stream)))


def sum_M_plus(spec: IntervalSpec, z: float, stream: PrimeValueStream) -> complex:
    """Sum over n with P(n) <= z."""
    if z < 1:
        raise ContractError("z must be >= 1")
    f = f_values(spec, stream)
    return complex(np.sum(f[_lpf(spec) <= z]))


def sum_M_minus(spec: IntervalSpec, z: float, stream: PrimeValueStream) -> complex:
    """Sum over n with P(n) > z."""
    if z < 1:
        raise ContractError("z must be >= 1")
    f = f_values(spec, stream)
    return complex(np.sum(f[_lpf(spec) > z]))


def _check_k(spec: IntervalSpec, k: int) -> DecompositionSpec:
    dec = DecompositionSpec(spec.x)
    if not 0 <= k <= dec.K:
        raise ContractError(f"k={k} outside [0, {dec.K}]")
    return dec


def sum_M_k(spec: IntervalSpec, k: int, stream: PrimeValueStream) -> complex:
    """Sum over n with x_k < P(n) <= x_{k-1}."""
    dec = _check_k(spec, k)
    lpf = _lpf(spec)
    mask = (lpf > dec.cut(k)) & (lpf <= dec.cut(k - 1))
    return complex(np.sum(f_values(spec, stream)[mask]))


def sum_N_k(spec: IntervalSpec, k: int, stream: PrimeValueStream) -> complex:
    """Sum over n with P(n) <= x_k."""
    dec = _check_k(spec, k)
    return complex(np.sum(f_values(spec, stream)[_lpf(spec) <= dec.cut(k)]))


def sum_S_k(x: float, z: float, k: int, stream: PrimeValueStream, base: float | None = None) -> complex:
    """Sum over x < n <= z with P(n) <= x_k, cut points taken from ``base`` (default x)."""
    dec = DecompositionSpec(x if base is None else base)
    if not 0 <= k <= dec.K:
        raise ContractError(f"k={k} outside [0, {dec.K}]")
    lo, hi = math.floor(x), math.floor(z)
    if hi <= lo:
        return 0j
    spec = IntervalSpec(lo, hi - lo)
    return complex(np.sum(f_values(spec, stream)[_lpf(spec) <= dec.cut(k)]))


def decomposition(spec: IntervalSpec, stream: PrimeValueStream) -> dict:
    """All pieces of M = N_K + sum_k M_k + M^-(x, y, x) from one evaluation of f."""
    dec = DecompositionSpec(spec.x)
    f = f_values(spec, stream)
    lpf = _lpf(spec)
    pieces = {
        "M": complex(np.sum(f)),
        "N_K": complex(np.sum(f[lpf <= dec.cut(dec.K)])),
        "M_minus": complex(np.sum(f[lpf > spec.x])),
        "M_k": [complex(np.sum(f[(lpf > dec.cut(k)) & (lpf <= dec.cut(k - 1))]))
                for k in range(dec.K + 1)],
        "scale": float(np.sum(np.abs(f))),
    }
    return pieces


def A_exact(spec: IntervalSpec, model) -> float:
    """E|M|^2: the integer count (Steinhaus) or the squarefree count (Rademacher)."""
    model = ModelKind.parse(model)
    if model is mdl.STEINHAUS:
        return float(spec.y)
    return float(squarefree_count(spec.x, spec.y))


def trial_sums(spec: IntervalSpec, model, trials: int, master_seed: int,
               include=None, threads: int = 1, stops=None) -> np.ndarray:
    """M (or the sum over the ``include`` mask) for trial indices 0..trials-1.

    With ``stops`` the result has one column per stop: the sum over the
    sub-interval (x, x + stop].
    """
    model = ModelKind.parse(model)
    cols = np.array([spec.y] if stops is None else stops, dtype=np.int64)
    if np.any(np.diff(cols) < 0) or cols.size == 0 or cols[-1] > spec.y or cols[0] < 0:
        raise ContractError("stops must be ascending within [0, y]")
    if spec.y == 0:
        out = np.zeros((trials, cols.size), dtype=complex)
        return out[:, 0] if stops is None else out
    plan = _plan(spec.x, spec.y)
    inc = np.ones(spec.y, dtype=bool) if include is None else np.asarray(include, dtype=bool)
    seed = np.uint64(master_seed & (2**64 - 1))
    steinhaus = model is mdl.STEINHAUS

    def block(t0, t1):
        out = np.empty((t1 - t0, cols.size), dtype=complex)
        mdl.interval_sums_kernel(seed, t0, t1, steinhaus, plan.uprimes, plan.offsets,
                                 plan.pidx, plan.exps, plan.squarefree, inc, cols, out)
        return out

    out = run_blocks(block, trials, threads)
    return out[:, 0] if stops is None else out


def estimate_moment(spec: IntervalSpec, q: float, model, trials: int, master_seed: int,
                    threads: int = 1) -> MomentEstimate:
    """Monte Carlo E|M(x, y; f)|^(2q) over streams 0..trials-1."""
    if not 0 <= q <= 1:
        raise ContractError("q must lie in [0, 1]")
    if trials < 2:
        raise ContractError("need at least two trials")
    sums = trial_sums(spec, model, trials, master_seed, threads=threads)
    return estimate_from_samples(abs_power(sums, q), q, A_exact(spec, model))


@dataclass(frozen=True)
class ThetaRow:
    theta: float
    y: int
    estimate: MomentEstimate
    ratio: float
    ratio_stderr: float
    G: float

    def as_dict(self, seed: int | None = None) -> dict:
        e = self.estimate
        return {"theta": self.theta, "y": self.y, "q": e.q, "trials": e.trials,
                "mean": e.mean, "stderr": e.stderr, "A": e.normalization,
                "ratio": self.ratio, "G": self.G, "seed": seed}


def theta_scan(x: int, theta_grid, q: float, model, trials: int, master_seed: int,
               threads: int = 1) -> list[ThetaRow]:
    """One row per theta: E|M|^(2q), the ratio to A^q, and G(x, theta, q).

    All intervals share the left end x, so every row comes from prefix sums
    of a single pass over the widest interval.
    """
    if not 0 <= q <= 1:
        raise ContractError("q must lie in [0, 1]")
    if trials < 2:
        raise ContractError("need at least two trials")
    specs = []
    for theta in theta_grid:
        if theta < 0:
            raise ContractError("theta grid values must be >= 0")
        spec = IntervalSpec.from_theta(x, theta)
        if spec.y < 1:
            log.warning("theta=%g gives y < 1 at x=%d; row skipped", theta, x)
            continue
        specs.append((float(theta), spec))
    if not specs:
        return []
    ys = sorted({s.y for _, s in specs})
    sums = trial_sums(IntervalSpec(x, ys[-1]), model, trials, master_seed, threads=threads,
                      stops=ys)
    rows = []
    for theta, spec in specs:
        col = sums[:, ys.index(spec.y)]
        est = estimate_from_samples(abs_power(col, q), q, A_exact(spec, model))
        norm = est.normalization ** q if est.normalization > 0 else math.nan
        rows.append(ThetaRow(theta, spec.y, est, est.mean / norm, est.stderr / norm,
                             threshold_G(x, theta, q)))
    return rows
