"""Random Euler products and their second moments.

The products here all have the shape

    F(s) = prod_{p in (p_lo, p_hi]} (1 + a_f f(p) / p**(1/2 + s)) ** a_f

with a_f = +1 (Rademacher) or -1 (Steinhaus).  Every evaluation runs in
log-space: principal logs of the factors are summed and exponentiated once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import model as mdl
from .errors import ContractError, SingularityError
from .model import ModelKind, PrimeValueStream
from .sieve import primes_between
from .stats import MomentEstimate, estimate_from_samples, run_blocks

#: Exponent applied to each Euler factor; the product is always taken with a_f.
EXPONENT_CONVENTION = "a_f"


@dataclass(frozen=True)
class EulerProductSpec:
    p_lo: float
    p_hi: float
    s: complex
    model: ModelKind
    convention: str = EXPONENT_CONVENTION

    def __post_init__(self):
        object.__setattr__(self, "model", ModelKind.parse(self.model))
        object.__setattr__(self, "s", complex(self.s))
        if not self.p_lo < self.p_hi:
            raise ContractError(f"need p_lo < p_hi, got ({self.p_lo}, {self.p_hi}]")
        if self.convention != EXPONENT_CONVENTION:
            raise ContractError(f"unsupported exponent convention {self.convention!r}")

    @property
    def primes(self) -> np.ndarray:
        return primes_between(self.p_lo, self.p_hi)

    @property
    def a_f(self) -> int:
        return self.model.a_f


def log_euler_factors(primes, fvals, s: complex, a_f: int) -> np.ndarray:
    """a_f * Log(1 + a_f f(p) p**(-1/2 - s)), principal branch, per prime."""
    p = np.asarray(primes, dtype=float)
    z = a_f * np.asarray(fvals, dtype=complex) * np.exp(-(0.5 + s) * np.log(p))
    w = 1.0 + z
    if np.any(w == 0):
        raise SingularityError(f"an Euler factor vanishes at s={s}")
    # log|1+z| through log1p keeps precision when |z| is tiny
    mod = 0.5 * np.log1p(2.0 * z.real + (z * z.conjugate()).real)
    return a_f * (mod + 1j * np.angle(w))


def euler_from_values(primes, fvals, s: complex, a_f: int) -> complex:
    """The product for explicit values f(p); empty input gives 1."""
    if len(primes) == 0:
        return 1 + 0j
    logs = log_euler_factors(primes, fvals, s, a_f)
    total = complex(math.fsum(logs.real.tolist()), math.fsum(logs.imag.tolist()))
    return complex(np.exp(total))


def eval_euler_product(spec: EulerProductSpec, stream: PrimeValueStream) -> complex:
    if stream.model is not spec.model:
        raise ContractError("stream model differs from the product's model")
    primes = spec.primes
    return euler_from_values(primes, stream.values(primes), spec.s, spec.a_f)


# ---------------------------------------------------------------------------
# Closed forms


def expected_cross_moment(primes, s1: complex, s2: complex, model) -> complex:
    """E[F(s1) conj F(s2)] = prod (1 + a_f p**(-1 - s1 - conj s2))**a_f.

    Only the diagonal terms of the factor expansions survive the expectation.
    """
    a_f = ModelKind.parse(model).a_f
    p = np.asarray(primes, dtype=float)
    if p.size == 0:
        return 1 + 0j
    w = np.exp(-(1.0 + s1 + np.conj(s2)) * np.log(p))
    logs = a_f * np.log(1.0 + a_f * w)
    return complex(np.exp(complex(math.fsum(logs.real.tolist()),
                                  math.fsum(logs.imag.tolist()))))


def two_point_error_budget(p_lo: float) -> float:
    """1 / (sqrt(x) log x): size of the dropped term in the two-point form."""
    return 1.0 / (math.sqrt(p_lo) * math.log(p_lo))


def expected_sq_closed_form(p_lo, p_hi, sigma: float, t: float, model,
                            form: str = "euler") -> float:
    """Closed form of the second moment of the product over (p_lo, p_hi].

    form="euler": E prod |1 + a_f f(p)/p**(1/2+sigma+it)|**(2 a_f)
                  = prod (1 + a_f p**(-1-2 sigma))**a_f, exact and free of t.
    form="two_point" (Steinhaus only): main term
                  exp(sum (2 + 2 cos(t log p)) / p**(1+2 sigma)) of
                  E prod |1 - f(p)/p**(1/2+sigma)|**-2 |1 - f(p)/p**(1/2+sigma+it)|**-2.
    """
    model = ModelKind.parse(model)
    primes = primes_between(p_lo, p_hi)
    if form == "euler":
        return expected_cross_moment(primes, sigma, sigma, model).real
    if form == "two_point":
        if model is not mdl.STEINHAUS:
            raise ContractError("the two-point form is stated for Steinhaus only")
        if p_lo < 1 or sigma <= -1.0 / math.log(p_hi):
            raise ContractError("two-point form needs p_lo >= 1 and sigma > -1/log p_hi")
        p = primes.astype(float)
        terms = (2.0 + 2.0 * np.cos(t * np.log(p))) * np.exp(-(1.0 + 2.0 * sigma) * np.log(p))
        return math.exp(math.fsum(terms.tolist()))
    raise ContractError(f"unknown form {form!r}")


def _log_sq_block(model, seed, t0, t1, primes, sigma, t, form) -> np.ndarray:
    a_f = model.a_f
    vals = mdl.prime_value_block(model, seed, np.arange(t0, t1), primes)
    logp = np.log(primes.astype(float))
    z = a_f * vals * np.exp(-(0.5 + sigma + 1j * t) * logp)
    out = a_f * np.log1p(2.0 * z.real + np.abs(z) ** 2).sum(axis=1)
    if form == "two_point":
        z0 = -vals * np.exp(-(0.5 + sigma) * logp)
        out -= np.log1p(2.0 * z0.real + np.abs(z0) ** 2).sum(axis=1)
    return out


def mc_expected_sq(p_lo, p_hi, sigma: float, t: float, model, trials: int, master_seed: int,
                   form: str = "euler", threads: int = 1) -> MomentEstimate:
    """Monte Carlo of the product that ``expected_sq_closed_form`` evaluates."""
    model = ModelKind.parse(model)
    if trials < 2:
        raise ContractError("need at least two trials")
    if form == "two_point" and model is not mdl.STEINHAUS:
        raise ContractError("the two-point form is stated for Steinhaus only")
    if form not in ("euler", "two_point"):
        raise ContractError(f"unknown form {form!r}")
    closed = expected_sq_closed_form(p_lo, p_hi, sigma, t, model, form)
    primes = primes_between(p_lo, p_hi)
    if primes.size == 0:
        return MomentEstimate(1.0, trials, 1.0, 0.0, closed)
    logs = run_blocks(lambda a, b: _log_sq_block(model, master_seed, a, b, primes, sigma, t, form),
                      trials, threads)
    return estimate_from_samples(np.exp(logs), 1.0, closed)


# ---------------------------------------------------------------------------
# Discretised integral averages


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid k / K_P, |k| <= delta K_P, with K_P = (log P)**1.01."""

    P: float
    delta: float

    def __post_init__(self):
        if self.P <= 1:
            raise ContractError("need P > 1 so that K_P > 0")
        if self.delta <= 0:
            raise ContractError("need delta > 0")

    @property
    def K_P(self) -> float:
        return math.log(self.P) ** 1.01

    @property
    def m(self) -> int:
        return math.floor(self.delta * self.K_P)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1) / self.K_P

    @property
    def primes(self) -> np.ndarray:
        return primes_between(1, self.P)


@nb.njit(nogil=True, cache=True)
def _log_F_uniform(logp, fvals, a_f, sigma, t0, h, n, out):
    """out[j] += sum_p a_f Log(1 + a_f f(p) p**(-1/2 - sigma - i(t0 + j h)))."""
    for k in range(logp.shape[0]):
        lp = logp[k]
        c = a_f * fvals[k] * np.exp(-(0.5 + sigma) * lp)
        step = np.exp(-1j * h * lp)
        for j in range(n):
            # exact phase every 64 points, rotation in between
            if j % 64 == 0:
                ph = np.exp(-1j * (t0 + j * h) * lp)
            out[j] += a_f * np.log(1.0 + c * ph)
            ph *= step


def log_F_grid(qspec: QuadratureSpec, stream: PrimeValueStream, sigma: float,
               t0: float, h: float, n: int) -> np.ndarray:
    """log F_P(sigma + i(t0 + j h)) for j < n."""
    primes = qspec.primes
    out = np.zeros(n, dtype=complex)
    if primes.size:
        fvals = stream.values(primes)
        _log_F_uniform(np.log(primes.astype(float)), fvals, float(stream.model.a_f),
                       float(sigma), float(t0), float(h), n, out)
    if not np.all(np.isfinite(out)):
        raise SingularityError("an Euler factor vanishes on the grid")
    return out


def integral_avg_sq(qspec: QuadratureSpec, k_shift: float, stream: PrimeValueStream) -> float:
    """(1/delta)(1/K_P) sum_k |F_P(k_shift + i k/K_P)|**2 over the grid."""
    m = qspec.m
    logs = log_F_grid(qspec, stream, k_shift, -m / qspec.K_P, 1.0 / qspec.K_P, 2 * m + 1)
    sq = np.exp(2.0 * logs.real)
    return math.fsum(sq.tolist()) / (qspec.delta * qspec.K_P)


def integral_avg_sq_expected(qspec: QuadratureSpec, k_shift: float, model) -> float:
    """Exact expectation of ``integral_avg_sq``: every grid point has the same mean."""
    e = expected_cross_moment(qspec.primes, k_shift, k_shift, model).real
    return (2 * qspec.m + 1) * e / (qspec.delta * qspec.K_P)


MIDPOINTS = 9


def perturbation_defect(qspec: QuadratureSpec, stream: PrimeValueStream) -> float:
    """sum_k (1/delta) int_{|u| <= 1/(2K_P)} |F_P(i(k/K_P + u)) - F_P(i k/K_P)|**2 du.

    The inner integral is a 9-point midpoint rule; its nodes, together with the
    grid points themselves, form one uniform grid of spacing 1/(9 K_P).
    """
    m, K = qspec.m, qspec.K_P
    h = 1.0 / (MIDPOINTS * K)
    half = MIDPOINTS // 2
    n = MIDPOINTS * (2 * m + 1)
    F = np.exp(log_F_grid(qspec, stream, 0.0, -m / K - half * h, h, n)).reshape(2 * m + 1, MIDPOINTS)
    diff = np.abs(F - F[:, half:half + 1]) ** 2
    return float(diff.sum()) * h / qspec.delta


def perturbation_defect_expected(qspec: QuadratureSpec, model) -> float:
    """Exact expectation of ``perturbation_defect``.

    E|F(a) - F(b)|^2 = E|F(a)|^2 + E|F(b)|^2 - 2 Re E[F(a) conj F(b)] and all
    three terms are closed-form products.
    """
    primes = qspec.primes
    m, K = qspec.m, qspec.K_P
    h = 1.0 / (MIDPOINTS * K)
    half = MIDPOINTS // 2
    e0 = expected_cross_moment(primes, 0j, 0j, model).real
    per_k = 0.0
    for i in range(MIDPOINTS):
        u = (i - half) * h
        # depends only on the offset u, not on k
        cross = expected_cross_moment(primes, 1j * u, 0j, model).real
        per_k += 2.0 * e0 - 2.0 * cross
    return (2 * m + 1) * per_k * h / qspec.delta
