"""Keyed counter-mode random numbers.

Every random quantity in the package is a pure function of
``(master_seed, trial_index, counter)``: the trial key is derived from the
seed and trial index, and a 64-bit word is produced by mixing the key with
the counter (a prime ``p`` for multiplicative functions, a step index for
random walks).  No generator state is carried between draws, so results do
not depend on evaluation order, batching or thread count.

The mixer is the SplitMix64 finaliser applied twice, which passes the usual
avalanche and uniformity batteries and costs a handful of integer ops.
"""

from __future__ import annotations

import hashlib

import numba as nb
import numpy as np

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SEED_SALT = np.uint64(0x5851F42D4C957F2D)
_CTR_SALT = np.uint64(0x2545F4914F6CDD1D)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S63 = np.uint64(63)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

MASK64 = (1 << 64) - 1


@nb.njit(nogil=True, cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nogil=True, cache=True)
def trial_key(master_seed, trial_index):
    """64-bit key of one trial (one sample of f, one random walk)."""
    k = mix64(np.uint64(master_seed) ^ _SEED_SALT)
    return mix64(k + (np.uint64(trial_index) + np.uint64(1)) * _GOLDEN)


@nb.njit(nogil=True, cache=True)
def keyed_bits(key, counter):
    return mix64(key ^ mix64(np.uint64(counter) * _GOLDEN + _CTR_SALT))


@nb.njit(nogil=True, cache=True)
def uniform53(key, counter):
    """Uniform on [0, 1) from the top 53 bits."""
    return float(keyed_bits(key, counter) >> _S11) * _INV53


@nb.njit(nogil=True, cache=True)
def sign_bit(key, counter):
    """+1 or -1 from the top bit."""
    if (keyed_bits(key, counter) >> _S63) == np.uint64(0):
        return 1.0
    return -1.0


@nb.njit(nogil=True, cache=True)
def normal_ppf(p):
    """Inverse standard normal CDF (Wichura, AS241 PPND16), p in (0, 1)."""
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


@nb.njit(nogil=True, cache=True)
def gaussian(key, counter):
    """Standard normal by inverse CDF on the open-interval uniform (k + 1/2) / 2**53."""
    u = (float(keyed_bits(key, counter) >> _S11) + 0.5) * _INV53
    return normal_ppf(u)


@nb.njit(nogil=True, cache=True)
def _uniform_block(master_seed, trials, counters, out):
    for i in range(trials.shape[0]):
        key = trial_key(master_seed, trials[i])
        for j in range(counters.shape[0]):
            out[i, j] = uniform53(key, counters[j])


@nb.njit(nogil=True, cache=True)
def _sign_block(master_seed, trials, counters, out):
    for i in range(trials.shape[0]):
        key = trial_key(master_seed, trials[i])
        for j in range(counters.shape[0]):
            out[i, j] = sign_bit(key, counters[j])


@nb.njit(nogil=True, cache=True)
def _gaussian_block(master_seed, trials, counters, out):
    for i in range(trials.shape[0]):
        key = trial_key(master_seed, trials[i])
        for j in range(counters.shape[0]):
            out[i, j] = gaussian(key, counters[j])


def _prep(master_seed, trials, counters):
    seed = np.uint64(int(master_seed) & MASK64)
    trials = np.atleast_1d(np.asarray(trials, dtype=np.uint64))
    counters = np.atleast_1d(np.asarray(counters, dtype=np.uint64))
    return seed, trials, counters


def uniform_block(master_seed, trials, counters) -> np.ndarray:
    """Array ``out[i, j] = U(master_seed, trials[i], counters[j])``."""
    seed, trials, counters = _prep(master_seed, trials, counters)
    out = np.empty((trials.size, counters.size))
    _uniform_block(seed, trials, counters, out)
    return out


def sign_block(master_seed, trials, counters) -> np.ndarray:
    seed, trials, counters = _prep(master_seed, trials, counters)
    out = np.empty((trials.size, counters.size))
    _sign_block(seed, trials, counters, out)
    return out


def gaussian_block(master_seed, trials, counters) -> np.ndarray:
    seed, trials, counters = _prep(master_seed, trials, counters)
    out = np.empty((trials.size, counters.size))
    _gaussian_block(seed, trials, counters, out)
    return out


def derive_seed(master_seed: int, tag: str) -> int:
    """Sub-seed for a named experiment, ``hash(master_seed, tag)``."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master_seed & MASK64).to_bytes(8, "little"))
    h.update(tag.encode())
    return int.from_bytes(h.digest(), "little")
