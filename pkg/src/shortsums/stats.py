"""Monte Carlo estimates and deterministic trial-parallel execution."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

# Trials are always cut into blocks of this size, whatever the thread count,
# so per-trial results never depend on scheduling.
BLOCK = 256


@dataclass(frozen=True)
class MomentEstimate:
    q: float
    trials: int
    mean: float
    stderr: float
    normalization: float = float("nan")

    def z_score(self, target: float) -> float:
        if self.stderr == 0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.stderr

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr

    def as_dict(self) -> dict:
        return asdict(self)


def estimate_from_samples(samples, q=float("nan"), normalization=float("nan")) -> MomentEstimate:
    """Plug-in mean and standard error (sample std / sqrt(n))."""
    s = np.asarray(samples, dtype=float)
    n = s.size
    if n < 2:
        raise ValueError("need at least two samples")
    mean = float(np.mean(s))
    stderr = float(np.std(s, ddof=1) / math.sqrt(n))
    return MomentEstimate(q, n, mean, stderr, normalization)


def abs_power(values, q: float) -> np.ndarray:
    """|v|**(2q) with |0|**0 := 0."""
    mag = np.abs(np.asarray(values))
    if q == 0:
        return (mag != 0).astype(float)
    return mag ** (2.0 * q)


def run_blocks(fn, trials: int, threads: int = 1, block: int = BLOCK) -> np.ndarray:
    """Evaluate ``fn(t0, t1) -> array`` on fixed trial blocks and concatenate in order."""
    bounds = [(t, min(t + block, trials)) for t in range(0, trials, block)]
    if threads <= 1 or len(bounds) == 1:
        parts = [fn(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: fn(*ab), bounds))
    return np.concatenate(parts) if parts else np.zeros(0)
