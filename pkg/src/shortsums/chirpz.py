"""Arbitrary-length DFT by Bluestein's chirp-z convolution."""

from __future__ import annotations

import numpy as np


def _chirp(n: int, sign: int) -> np.ndarray:
    """exp(sign * i pi k^2 / n), with k^2 reduced mod 2n in exact integers."""
    k = np.arange(n, dtype=np.int64)
    k2 = (k * k) % (2 * n)
    return np.exp(sign * 1j * np.pi * k2 / n)


def dft(x, sign: int = -1) -> np.ndarray:
    """X[j] = sum_d x[d] exp(sign * 2 pi i j d / n) for any length n."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    if n <= 1:
        return x.copy()
    # jd = (j^2 + d^2 - (j-d)^2) / 2
    w = _chirp(n, sign)
    m = 1 << int(2 * n - 1).bit_length()
    a = np.zeros(m, dtype=complex)
    a[:n] = x * w
    b = np.zeros(m, dtype=complex)
    wc = np.conj(w)
    b[:n] = wc
    b[m - n + 1:] = wc[1:][::-1]
    conv = np.fft.ifft(np.fft.fft(a) * np.fft.fft(b))
    return w * conv[:n]
