"""Independent reference computations shared by several test files."""

import math

import numpy as np

from shortsums.sieve import primes_between


def two_point_exact(lo, hi, sigma, t, nodes=64):
    """E prod |1 - f/p^(1/2+sigma)|^-2 |1 - f/p^(1/2+sigma+it)|^-2 for Steinhaus f.

    Each prime is an independent uniform angle, so the expectation factorises
    into one periodic integral per prime; the trapezoid rule on a periodic
    analytic integrand converges geometrically (here like p^(-nodes/2)).
    """
    p = primes_between(lo, hi).astype(float)[:, None]
    phase = np.exp(2j * np.pi * (np.arange(nodes) + 0.5) / nodes)[None, :]
    r = p ** (-0.5 - sigma)
    v = np.abs(1 - phase * r) ** -2 * np.abs(1 - phase * r * p ** (-1j * t)) ** -2
    return math.exp(np.log(v.mean(axis=1)).sum())


def sum_two_over_p(lo, hi, sigma):
    p = primes_between(lo, hi).astype(float)
    return math.fsum((2 * p ** (-1 - 2 * sigma)).tolist())
