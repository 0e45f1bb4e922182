"""Both sides of the Mellin-Parseval identity for a finite Dirichlet polynomial.

    int_0^inf |sum_{n<=x} a_n|^2 x^(-1-2 sigma) dx
        = (1/2 pi) int_R |A(sigma+it)|^2 / (sigma^2+t^2) dt,   A(s) = sum a_n n^-s.

The left side is a finite sum of closed-form pieces of a step function.  The
right side is Gauss-Legendre quadrature on [-T, T] plus the two tails
|t| > T, evaluated pair by pair through the exponential integral E1.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import exp1

from .errors import ContractError, WindowError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
#: Quadrature panels allowed on [-T, T].
PANEL_BUDGET = 200_000
DEFAULT_WINDOW = 40.0


def parseval_lhs(coeffs, sigma: float) -> float:
    a = np.asarray(coeffs, dtype=complex)
    if sigma <= 0:
        raise ContractError("need sigma > 0")
    N = a.size
    if N == 0:
        return 0.0
    S2 = np.abs(np.cumsum(a)) ** 2  # |S(x)|^2 on [m, m+1), m = 1..N
    m = np.arange(1, N + 1, dtype=float)
    # int_m^{m+1} x^(-1-2 sigma) dx, written to avoid cancellation
    piece = -np.exp(-2 * sigma * np.log(m)) * np.expm1(-2 * sigma * np.log1p(1.0 / m)) / (2 * sigma)
    piece[-1] = N ** (-2 * sigma) / (2 * sigma)  # last step runs to infinity
    return math.fsum((S2 * piece).tolist())


def _dirichlet_abs_sq(a, logn, sigma, t):
    w = a * np.exp(-sigma * logn)
    A = np.exp(-1j * np.outer(t, logn)) @ w
    return A.real ** 2 + A.imag ** 2


def _quad_window(a, logn, sigma, T, panel):
    edges = np.linspace(-T, T, int(math.ceil(2 * T / panel)) + 1)
    if edges.size - 1 > PANEL_BUDGET:
        raise WindowError(f"window {T} needs more than {PANEL_BUDGET} panels")
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    total = 0.0
    # chunked so the (nodes x terms) matrix stays small
    for i in range(0, mid.size, 512):
        t = (mid[i:i + 512, None] + half[i:i + 512, None] * _GL_NODES[None, :]).ravel()
        w = (half[i:i + 512, None] * _GL_WEIGHTS[None, :]).ravel()
        total += float(np.dot(w, _dirichlet_abs_sq(a, logn, sigma, t) / (sigma**2 + t**2)))
    return total


def cos_tail(omega, sigma: float, T: float):
    """int_T^inf cos(omega t) / (sigma^2 + t^2) dt, elementwise in omega."""
    w = np.abs(np.atleast_1d(np.asarray(omega, dtype=float)))
    out = np.empty(w.shape)
    zero = w == 0
    out[zero] = (math.pi / 2 - math.atan(T / sigma)) / sigma
    wz = w[~zero]
    # 1/(t^2+s^2) = (1/2is)(1/(t-is) - 1/(t+is)) and
    # int_T^inf e^{iwt}/(t-c) dt = e^{iwc} E1(-iw(T-c)) for w > 0
    plus = np.exp(1j * wz * (1j * sigma)) * exp1(-1j * wz * (T - 1j * sigma))
    minus = np.exp(1j * wz * (-1j * sigma)) * exp1(-1j * wz * (T + 1j * sigma))
    out[~zero] = ((plus - minus) / (2j * sigma)).real
    return out


def _tail(a, logn, sigma, T):
    w = a * np.exp(-sigma * logn)
    c = np.outer(w, np.conj(w))
    omega = logn[:, None] - logn[None, :]
    # each pair contributes Re(c) * 2 int_T^inf cos(omega t)/(sigma^2+t^2)
    return float(np.sum(c.real * 2.0 * cos_tail(omega.ravel(), sigma, T).reshape(omega.shape)))


def parseval_rhs(coeffs, sigma: float, window: float | None = None) -> float:
    a = np.asarray(coeffs, dtype=complex)
    if sigma <= 0:
        raise ContractError("need sigma > 0")
    T = DEFAULT_WINDOW if window is None else float(window)
    if not T > 0:
        raise ContractError("window must be positive")
    nz = np.flatnonzero(a)
    if nz.size == 0:
        return 0.0
    a = a[nz]
    logn = np.log(nz + 1.0)
    # panels of width sigma/2 (capped at 1/2) keep the Lorentzian poles far
    # from every panel relative to its length
    panel = min(sigma, 1.0) / 2
    inner = _quad_window(a, logn, sigma, T, panel)
    return (inner + _tail(a, logn, sigma, T)) / (2 * math.pi)


def parseval_check(coeffs, sigma: float, window: float | None = None) -> tuple[float, float, float]:
    """(lhs, rhs, |lhs - rhs|) for coefficients a_1, a_2, ..."""
    lhs = parseval_lhs(coeffs, sigma)
    rhs = parseval_rhs(coeffs, sigma, window)
    return lhs, rhs, abs(lhs - rhs)
