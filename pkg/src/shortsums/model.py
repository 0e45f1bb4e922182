"""Rademacher and Steinhaus random multiplicative functions.

A sample of f is a :class:`PrimeValueStream`; the value at a prime is
derived on demand from ``(master_seed, trial_index, p)`` so nothing is
materialized for primes that never occur.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import rng
from .errors import ContractError

TWO_PI = 2.0 * math.pi


class ModelKind(enum.Enum):
    RADEMACHER = "rademacher"
    STEINHAUS = "steinhaus"

    @property
    def a_f(self) -> int:
        """+1 for Rademacher, -1 for Steinhaus."""
        return 1 if self is ModelKind.RADEMACHER else -1

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ContractError(f"unknown model {value!r}") from None


RADEMACHER = ModelKind.RADEMACHER
STEINHAUS = ModelKind.STEINHAUS


@dataclass(frozen=True)
class PrimeValueStream:
    model: ModelKind
    master_seed: int
    trial_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", ModelKind.parse(self.model))
        if self.trial_index < 0:
            raise ContractError("trial_index must be >= 0")

    @property
    def key(self) -> np.uint64:
        return np.uint64(rng.trial_key(np.uint64(self.master_seed & rng.MASK64),
                                       np.uint64(self.trial_index)))

    def angles(self, primes) -> np.ndarray:
        """U_p in [0, 1) with f(p) = exp(2 pi i U_p) (Steinhaus)."""
        return rng.uniform_block(self.master_seed, self.trial_index, primes)[0]

    def signs(self, primes) -> np.ndarray:
        """f(p) in {-1, +1} (Rademacher)."""
        return rng.sign_block(self.master_seed, self.trial_index, primes)[0]

    def values(self, primes) -> np.ndarray:
        """f(p) for an array of primes, as complex."""
        if self.model is STEINHAUS:
            return unit_from_angle(self.angles(primes))
        return self.signs(primes).astype(complex)

    def __call__(self, p: int) -> complex:
        return sample_f_prime(self, p)


def unit_from_angle(u) -> np.ndarray:
    a = TWO_PI * np.asarray(u)
    return np.cos(a) + 1j * np.sin(a)


def sample_f_prime(stream: PrimeValueStream, p: int) -> complex:
    """f(p) for one prime."""
    key = stream.key
    if stream.model is STEINHAUS:
        a = TWO_PI * rng.uniform53(key, np.uint64(p))
        return complex(math.cos(a), math.sin(a))
    return complex(rng.sign_bit(key, np.uint64(p)))


def prime_value_block(model, master_seed, trials, primes) -> np.ndarray:
    """``out[i, j] = f_i(primes[j])`` for trial indices ``trials``."""
    model = ModelKind.parse(model)
    if model is STEINHAUS:
        return unit_from_angle(rng.uniform_block(master_seed, trials, primes))
    return rng.sign_block(master_seed, trials, primes).astype(complex)


def evaluate_f(n: int, factorization, stream: PrimeValueStream) -> complex:
    """f(n) from the factorization ``[(p, a), ...]`` of n."""
    if math.prod(p**a for p, a in factorization) != n:
        raise ContractError(f"factorization {factorization} does not multiply to {n}")
    if stream.model is RADEMACHER:
        if any(a > 1 for _, a in factorization):
            return 0j
        v = 1.0
        key = stream.key
        for p, _ in factorization:
            v *= rng.sign_bit(key, np.uint64(p))
        return complex(v)
    if not factorization:
        return 1 + 0j
    v = 1 + 0j
    for p, a in factorization:
        fp = sample_f_prime(stream, p)
        for _ in range(a):
            v *= fp
    return v


# ---------------------------------------------------------------------------
# Compiled per-trial kernels over a factorized interval.
#
# A plan maps each n in the interval to indices into ``uprimes`` (the
# distinct primes occurring), so each trial hashes every relevant prime once.


@dataclass(frozen=True, eq=False)
class IntervalPlan:
    numbers: np.ndarray
    uprimes: np.ndarray
    offsets: np.ndarray
    pidx: np.ndarray
    exps: np.ndarray
    squarefree: np.ndarray
    lpf: np.ndarray


def make_plan(fac) -> IntervalPlan:
    uprimes, inv = np.unique(fac.primes, return_inverse=True)
    return IntervalPlan(fac.numbers, uprimes.astype(np.uint64), np.asarray(fac.offsets),
                        inv.astype(np.int64), np.asarray(fac.exps, dtype=np.float64),
                        np.asarray(fac.squarefree), np.asarray(fac.largest_prime_factor))


@nb.njit(nogil=True, cache=True)
def _fill_prime_values(key, steinhaus, uprimes, bre, bim):
    for j in range(uprimes.shape[0]):
        if steinhaus:
            a = 2.0 * np.pi * rng.uniform53(key, uprimes[j])
            bre[j] = np.cos(a)
            bim[j] = np.sin(a)
        else:
            bre[j] = rng.sign_bit(key, uprimes[j])
            bim[j] = 0.0


@nb.njit(nogil=True, cache=True)
def _f_steinhaus(i, offsets, pidx, exps, bre, bim):
    re = 1.0
    im = 0.0
    for k in range(offsets[i], offsets[i + 1]):
        pr = bre[pidx[k]]
        pi = bim[pidx[k]]
        for _ in range(int(exps[k])):
            re, im = re * pr - im * pi, re * pi + im * pr
    return re, im


@nb.njit(nogil=True, cache=True)
def _f_rademacher(i, offsets, pidx, sqf, bre):
    if not sqf[i]:
        return 0.0
    v = 1.0
    for k in range(offsets[i], offsets[i + 1]):
        v *= bre[pidx[k]]
    return v


@nb.njit(nogil=True, cache=True)
def _run_sum(i, end, steinhaus, offsets, pidx, exps, sqf, include, bre, bim, pr, pi):
    # The model branch sits outside the loop; inside it costs 3x.
    if steinhaus:
        for j in range(i, end):
            if include[j]:
                re, im = _f_steinhaus(j, offsets, pidx, exps, bre, bim)
                pr += re
                pi += im
    else:
        for j in range(i, end):
            if include[j]:
                pr += _f_rademacher(j, offsets, pidx, sqf, bre)
    return pr, pi


@nb.njit(nogil=True, cache=True)
def interval_values_kernel(seed, trial, steinhaus, uprimes, offsets, pidx, exps, sqf,
                           out_re, out_im):
    """f(n) for every n of the plan, one trial."""
    key = rng.trial_key(seed, trial)
    bre = np.empty(uprimes.shape[0])
    bim = np.empty(uprimes.shape[0])
    _fill_prime_values(key, steinhaus, uprimes, bre, bim)
    for i in range(out_re.shape[0]):
        if steinhaus:
            out_re[i], out_im[i] = _f_steinhaus(i, offsets, pidx, exps, bre, bim)
        else:
            out_re[i] = _f_rademacher(i, offsets, pidx, sqf, bre)
            out_im[i] = 0.0


@nb.njit(nogil=True, cache=True)
def _neumaier(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@nb.njit(nogil=True, cache=True)
def interval_sums_kernel(seed, t0, t1, steinhaus, uprimes, offsets, pidx, exps, sqf,
                         include, stops, out):
    """Prefix sums of f(n) over included n, for trials t0..t1-1.

    ``out[t - t0, s]`` is the sum over the first ``stops[s]`` numbers of the
    plan; ``stops`` must be ascending.  Terms are summed plainly within
    aligned runs of 256 and the run totals are combined with Neumaier
    compensation, so a prefix equals the full sum of a shorter plan bit for bit.
    """
    bre = np.empty(uprimes.shape[0])
    bim = np.empty(uprimes.shape[0])
    ns = stops.shape[0]
    last = stops[ns - 1]
    for t in range(t0, t1):
        key = rng.trial_key(seed, np.uint64(t))
        _fill_prime_values(key, steinhaus, uprimes, bre, bim)
        sr = 0.0
        cr = 0.0
        si = 0.0
        ci = 0.0
        pr = 0.0
        pi = 0.0
        i = 0
        s = 0
        while True:
            while s < ns and stops[s] == i:
                r, c = _neumaier(sr, cr, pr)
                m, d = _neumaier(si, ci, pi)
                out[t - t0, s] = complex(r + c, m + d)
                s += 1
            if i >= last:
                break
            end = min((i // 256 + 1) * 256, stops[s])
            pr, pi = _run_sum(i, end, steinhaus, offsets, pidx, exps, sqf, include, bre, bim,
                              pr, pi)
            i = end
            if i % 256 == 0:
                sr, cr = _neumaier(sr, cr, pr)
                si, ci = _neumaier(si, ci, pi)
                pr = 0.0
                pi = 0.0
