"""Dirichlet character sums modulo a prime, for every character at once.

With a primitive root g mod r and ind(n) the discrete log, the characters are
chi_j(n) = w**(j ind n), w = exp(2 pi i/(r-1)).  A sum over n of chi_j(n) is
then the DFT at frequency j of the histogram of ind(n), which one
arbitrary-length FFT gives for all j together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import chirpz
from .errors import CapacityError, ContractError
from .interval_sums import IntervalSpec, trial_sums
from .model import STEINHAUS
from .sieve import is_prime, primes_upto
from .stats import MomentEstimate, abs_power, estimate_from_samples

MAX_MODULUS = 10**6


@dataclass(frozen=True, eq=False)
class CharacterTable:
    r: int
    g: int
    ind: np.ndarray  # ind[0] = -1 marks the non-unit

    @property
    def order(self) -> int:
        return self.r - 1

    @property
    def omega(self) -> complex:
        return complex(np.exp(2j * np.pi / self.order))


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(r: int) -> int:
    """Smallest generator of (Z/rZ)^*."""
    qs = _prime_factors(r - 1)
    for g in range(2, r):
        if all(pow(g, (r - 1) // q, r) != 1 for q in qs):
            return g
    raise ContractError(f"no primitive root mod {r}")


def build_character_table(r: int) -> CharacterTable:
    r = int(r)
    if r > MAX_MODULUS:
        raise CapacityError(f"modulus {r} above {MAX_MODULUS}")
    if r < 3 or not is_prime(r):
        raise ContractError(f"modulus must be a prime >= 3, got {r}")
    g = primitive_root(r)
    ind = np.full(r, -1, dtype=np.int64)
    v = 1
    for k in range(r - 1):
        ind[v] = k
        v = v * g % r
    ind.setflags(write=False)
    return CharacterTable(r, g, ind)


def index_histogram(table: CharacterTable, x: int, y: int) -> np.ndarray:
    """h[d] = #{x < n <= x + y : ind(n mod r) = d}."""
    if x < 0 or y < 0:
        raise ContractError("need x, y >= 0")
    r = table.r
    counts = np.full(r, y // r, dtype=np.int64)
    start = (x + 1 + (y // r) * r) % r
    rest = np.arange(start, start + y % r) % r
    np.add.at(counts, rest, 1)
    h = np.zeros(table.order, dtype=np.int64)
    h[table.ind[1:]] = counts[1:]
    return h


def char_sum_all(table: CharacterTable, x: int, y: int, method: str = "fft") -> np.ndarray:
    """Entry j: sum over x < n <= x + y of chi_j(n)."""
    if method == "fft":
        return chirpz.dft(index_histogram(table, x, y), sign=+1)
    if method == "naive":
        return _char_sum_naive(table, x, y)
    raise ContractError(f"unknown method {method!r}")


def _char_sum_naive(table: CharacterTable, x: int, y: int) -> np.ndarray:
    n = np.arange(x + 1, x + y + 1, dtype=np.int64)
    d = table.ind[n % table.r]
    d = d[d >= 0]
    roots = np.exp(2j * np.pi * np.arange(table.order) / table.order)
    out = np.zeros(table.order, dtype=complex)
    for j in range(table.order):
        out[j] = roots[(j * d) % table.order].sum()
    return out


@dataclass(frozen=True)
class CharAvgResult:
    r: int
    x: int
    y: int
    q: float
    average: float
    L: float
    bound: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def character_average_bound(x: int, y: int, r: int, q: float) -> float:
    """(y min{1, theta sqrt(loglog x) + 1/((1-q) sqrt(loglog L))})**q, constant 1.

    nan where theta = log(x/y)/loglog x is not a positive real.
    """
    L = min(x + y, r / (x + y)) + 3 if x + y > 0 else math.nan
    if y <= 0 or x <= math.e or x <= y:
        return math.nan
    ll = math.log(math.log(x))
    theta = math.log(x / y) / ll
    second = math.inf if q == 1 else 1.0 / ((1.0 - q) * math.sqrt(math.log(math.log(L))))
    return (y * min(1.0, theta * math.sqrt(ll) + second)) ** q


def char_avg_abs_power(table: CharacterTable, x: int, y: int, q: float,
                       method: str = "fft") -> CharAvgResult:
    """(1/(r-1)) sum_chi |sum_{x<n<=x+y} chi(n)|**(2q)."""
    if not 0 <= q <= 1:
        raise ContractError("q must lie in [0, 1]")
    sums = char_sum_all(table, x, y, method)
    avg = math.fsum(abs_power(sums, q).tolist()) / table.order
    L = min(x + y, table.r / (x + y)) + 3 if x + y > 0 else math.nan
    return CharAvgResult(table.r, x, y, q, avg, L, character_average_bound(x, y, table.r, q))


def compare_to_steinhaus(table: CharacterTable, x: int, y: int, q: float, trials: int,
                         master_seed: int, threads: int = 1):
    """(character average, Steinhaus estimate of the same functional, difference).

    The model sum skips multiples of r, as the characters do, so at q = 1 both
    sides equal the number of units in the interval.
    """
    if x + y > table.r:
        raise ContractError("comparison needs x + y <= r")
    if y == 0:
        return 0.0, MomentEstimate(q, trials, 0.0, 0.0, 0.0), 0.0
    char = char_avg_abs_power(table, x, y, q).average
    spec = IntervalSpec(x, y)
    units = (np.arange(x + 1, x + y + 1) % table.r) != 0
    sums = trial_sums(spec, STEINHAUS, trials, master_seed, include=units, threads=threads)
    est = estimate_from_samples(abs_power(sums, q), q, float(units.sum()))
    return char, est, char - est.mean


def s_k_chi(table: CharacterTable, P: float, k: int) -> np.ndarray:
    """Re sum_{p<=P} chi(p) p**(-1/2 - i tau) + chi(p^2) p**(-1 - 2 i tau), tau = k/(log P)**1.01."""
    if P < 2:
        return np.zeros(table.order)
    if abs(k) > math.floor(math.log(P) ** 1.02):
        raise ContractError("|k| must be <= floor((log P)**1.02)")
    p = primes_upto(P)
    p = p[p != table.r]
    d = table.ind[p % table.r]
    tau = k / math.log(P) ** 1.01
    lp = np.log(p.astype(float))
    h = np.zeros(table.order, dtype=complex)
    np.add.at(h, d, np.exp(-(0.5 + 1j * tau) * lp))
    np.add.at(h, (2 * d) % table.order, np.exp(-(1.0 + 2j * tau) * lp))
    return chirpz.dft(h, sign=+1).real
