"""Primes, interval factorization, smooth and squarefree counts."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, ContractError

MAX_PRIME_LIMIT = 1 << 40
MAX_INTERVAL_END = 1 << 48
MAX_INTERVAL_LENGTH = 10**8
MAX_PSI_X = 10**8
# Bytes we allow a single prime table to occupy.
PRIME_TABLE_BUDGET = 2 << 30

_SEGMENT = 1 << 21
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        v = pow(a, d, n)
        if v in (1, n - 1):
            continue
        for _ in range(s - 1):
            v = v * v % n
            if v == n - 1:
                break
        else:
            return False
    return True


def _small_sieve(limit: int) -> np.ndarray:
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def _segmented_primes(limit: int) -> np.ndarray:
    """Odd-only segmented sieve of Eratosthenes."""
    root = math.isqrt(limit)
    if limit < 1 << 16:
        return _small_sieve(limit)
    base = _small_sieve(root)[1:]  # odd base primes
    chunks = [np.array([2], dtype=np.int64)]
    low = 3
    while low <= limit:
        high = min(low + 2 * _SEGMENT, limit + 1)  # exclusive
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= high:
                break
            start = max(p * p, (low + p - 1) // p * p)
            if start % 2 == 0:
                start += p
            if start >= high:
                continue
            mask[(start - low) // 2 :: p] = False
        chunks.append(low + 2 * np.flatnonzero(mask).astype(np.int64))
        low = high if high % 2 == 1 else high + 1
    out = np.concatenate(chunks)
    return out[out <= limit]


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return self.primes.size

    def pi(self, x) -> int:
        """Number of primes <= x (x must not exceed ``limit``)."""
        if x > self.limit:
            raise ContractError(f"pi({x}) beyond table limit {self.limit}")
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def between(self, lo, hi) -> np.ndarray:
        """Primes p with lo < p <= hi."""
        if hi > self.limit:
            raise ContractError(f"range end {hi} beyond table limit {self.limit}")
        i = np.searchsorted(self.primes, math.floor(lo), side="right")
        j = np.searchsorted(self.primes, math.floor(hi), side="right")
        return self.primes[i:j]


def generate_primes(limit: int) -> PrimeTable:
    """All primes <= limit, ascending."""
    limit = int(limit)
    if not 2 <= limit <= MAX_PRIME_LIMIT:
        raise CapacityError(f"prime limit {limit} outside [2, 2**40]")
    # pi(x) < 1.26 x / log x
    if 1.26 * limit / math.log(limit) * 8 > PRIME_TABLE_BUDGET:
        raise CapacityError(f"prime table up to {limit} exceeds memory budget")
    primes = _primes_upto(limit)
    primes.setflags(write=False)
    return PrimeTable(limit, primes)


_cache: dict = {"limit": 1, "primes": np.zeros(0, dtype=np.int64)}


def _primes_upto(limit: int) -> np.ndarray:
    """Cached prime list; the cache only ever grows."""
    if limit > _cache["limit"]:
        grown = max(limit, min(2 * _cache["limit"], MAX_PRIME_LIMIT))
        if 1.26 * grown / math.log(grown) * 8 > PRIME_TABLE_BUDGET:
            grown = limit
        _cache["primes"] = _segmented_primes(grown)
        _cache["limit"] = grown
    p = _cache["primes"]
    return p[: np.searchsorted(p, limit, side="right")].copy()


def primes_upto(limit) -> np.ndarray:
    """Primes <= limit as an int64 array (empty below 2)."""
    limit = math.floor(limit)
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    return generate_primes(limit).primes


def primes_between(lo, hi) -> np.ndarray:
    """Primes p with lo < p <= hi."""
    p = primes_upto(hi)
    return p[np.searchsorted(p, math.floor(lo), side="right") :]


@dataclass(frozen=True, eq=False)
class IntervalFactorization:
    """Factorizations of every n in (x, x + y], stored CSR style.

    The factors of ``n = x + 1 + i`` are ``primes[offsets[i]:offsets[i+1]]``
    with matching ``exps``; both ascending in the prime.
    """

    x: int
    y: int
    offsets: np.ndarray
    primes: np.ndarray
    exps: np.ndarray
    largest_prime_factor: np.ndarray
    squarefree: np.ndarray

    def __len__(self) -> int:
        return self.y

    @property
    def numbers(self) -> np.ndarray:
        return np.arange(self.x + 1, self.x + self.y + 1, dtype=np.int64)

    def entry(self, n: int) -> list[tuple[int, int]]:
        i = int(n) - self.x - 1
        if not 0 <= i < self.y:
            raise ContractError(f"{n} not in ({self.x}, {self.x + self.y}]")
        a, b = self.offsets[i], self.offsets[i + 1]
        return [(int(p), int(e)) for p, e in zip(self.primes[a:b], self.exps[a:b])]

    def as_dict(self) -> dict[int, list[tuple[int, int]]]:
        return {self.x + 1 + i: self.entry(self.x + 1 + i) for i in range(self.y)}

    def to_csv(self, path) -> None:
        """Debug dump, one ``n,prime,exponent`` row per prime power."""
        counts = np.diff(self.offsets)
        ns = np.repeat(self.numbers, counts)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "prime", "exponent"])
            w.writerows(zip(ns.tolist(), self.primes.tolist(), self.exps.tolist()))


def _valuation(values: np.ndarray, p) -> np.ndarray:
    """Exponent of p in each value (p may be an array)."""
    e = np.zeros(values.shape, dtype=np.int64)
    cur = values.copy()
    div = cur % p == 0
    while div.any():
        e += div
        cur = np.where(div, cur // p, cur)
        div = cur % p == 0
    return e


def factor_interval(x: int, y: int, check: bool = False) -> IntervalFactorization:
    """Factor every integer in (x, x + y] with a segmented sieve.

    Every prime up to sqrt(x + y) is divided out; what is left above 1 is a
    prime cofactor.  ``check=True`` re-verifies each cofactor with
    Miller-Rabin.
    """
    x, y = int(x), int(y)
    if x < 0 or y < 1:
        raise ContractError(f"need x >= 0 and y >= 1, got ({x}, {y})")
    if x + y > MAX_INTERVAL_END or y > MAX_INTERVAL_LENGTH:
        raise CapacityError(f"interval ({x}, {x + y}] exceeds capacity")
    lo, hi = x + 1, x + y
    n = np.arange(lo, hi + 1, dtype=np.int64)
    rem = n.copy()
    base = primes_upto(math.isqrt(hi))

    rec_i, rec_p, rec_e = [], [], []
    # Primes hitting many slots: one strided pass each.
    dense = base[base <= y // 32]
    for p in dense.tolist():
        idx = np.arange((-lo) % p, y, p)
        e = _valuation(n[idx], p)
        rem[idx] //= p**e
        rec_i.append(idx)
        rec_p.append(np.full(idx.size, p, dtype=np.int64))
        rec_e.append(e)
    # Remaining primes hit at most 32 slots each: handle all at once.
    sparse = base[base > y // 32]
    if sparse.size:
        first = (-lo) % sparse
        hits = (y - 1 - first) // sparse + 1
        hits = np.maximum(hits, 0)
        pp = np.repeat(sparse, hits)
        start = np.repeat(first, hits)
        step = np.arange(pp.size) - np.repeat(np.cumsum(hits) - hits, hits)
        idx = start + step * pp
        e = _valuation(n[idx], pp)
        np.floor_divide.at(rem, idx, pp**e)
        rec_i.append(idx)
        rec_p.append(pp)
        rec_e.append(e)
    big = np.flatnonzero(rem > 1)
    if check:
        for v in rem[big].tolist():
            if not is_prime(v):
                raise AssertionError(f"cofactor {v} is not prime")
    rec_i.append(big)
    rec_p.append(rem[big])
    rec_e.append(np.ones(big.size, dtype=np.int64))

    idx = np.concatenate(rec_i)
    ps = np.concatenate(rec_p)
    es = np.concatenate(rec_e)
    order = np.lexsort((ps, idx))
    idx, ps, es = idx[order], ps[order], es[order]
    offsets = np.zeros(y + 1, dtype=np.int64)
    np.cumsum(np.bincount(idx, minlength=y), out=offsets[1:])
    lpf = np.ones(y, dtype=np.int64)
    np.maximum.at(lpf, idx, ps)
    maxe = np.zeros(y, dtype=np.int64)
    np.maximum.at(maxe, idx, es)
    for arr in (offsets, ps, es, lpf):
        arr.setflags(write=False)
    sqf = maxe <= 1
    sqf.setflags(write=False)
    return IntervalFactorization(x, y, offsets, ps, es, lpf, sqf)


@lru_cache(maxsize=16)
def cached_factorization(x: int, y: int) -> IntervalFactorization:
    return factor_interval(x, y)


def psi_smooth_count(x: int, z: int) -> int:
    """Psi(x, z): number of n <= x with every prime factor <= z (1 counts)."""
    x, z = int(x), int(z)
    if x < 1 or z < 1:
        raise ContractError(f"need x >= 1 and z >= 1, got ({x}, {z})")
    if x > MAX_PSI_X:
        raise CapacityError(f"Psi({x}, .) exceeds streaming capacity {MAX_PSI_X}")
    if z >= x:
        return x
    total = 0
    for lo in range(0, x, _SEGMENT):
        fac = factor_interval(lo, min(_SEGMENT, x - lo))
        total += int(np.count_nonzero(fac.largest_prime_factor <= z))
    return total


def squarefree_count(x: int, y: int) -> int:
    """Number of squarefree n in (x, x + y], via a sieve by prime squares."""
    x, y = int(x), int(y)
    if x < 0 or y < 0:
        raise ContractError(f"need x, y >= 0, got ({x}, {y})")
    if x + y > MAX_INTERVAL_END:
        raise CapacityError(f"interval ({x}, {x + y}] exceeds capacity")
    if y == 0:
        return 0
    hi = x + y
    base = primes_upto(math.isqrt(hi))
    total = 0
    for lo in range(x + 1, hi + 1, _SEGMENT):
        seg_hi = min(lo + _SEGMENT - 1, hi)
        free = np.ones(seg_hi - lo + 1, dtype=bool)
        for p in base.tolist():
            sq = p * p
            if sq > seg_hi:
                break
            free[(-lo) % sq :: sq] = False
        total += int(np.count_nonzero(free))
    return total


def mertens_sum(x) -> float:
    """Sum of 1/p over primes p <= x, correctly rounded."""
    if x < 2:
        raise ContractError(f"need x >= 2, got {x}")
    return math.fsum((1.0 / primes_upto(x)).tolist())
