"""Barrier parameters, barrier events on Euler product increments, tilted measure.

Throughout, ``log2 x`` is the iterated logarithm log log x and the cut points
are x_r = x**exp(-(r+1)), so the increment I_r covers the primes in
(x_{r+1}, x_r] and the bands for r = 0, 1, ... tile (1, x**(1/e)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, SingularityError
from .euler import log_euler_factors
from .model import ModelKind, PrimeValueStream
from .sieve import primes_between, primes_upto
from .stats import MomentEstimate


def loglog(x: float) -> float:
    return math.log(math.log(x))


def cut_point(x: float, r: int) -> float:
    """x_r = x**exp(-(r+1))."""
    return x ** math.exp(-(r + 1))


@dataclass(frozen=True)
class BarrierParams:
    x: float
    q: float
    theta: float
    B: int = 2
    C: float = 10.0

    def __post_init__(self):
        if self.x <= math.e:
            raise ContractError("need x > e so that log log x > 0")
        if self.B < 0 or not self.C > self.B:
            raise ContractError(f"need C > B >= 0, got B={self.B}, C={self.C}")
        if not 0 <= self.q <= 1 or self.theta < 0:
            raise ContractError("need 0 <= q <= 1 and theta >= 0")

    @property
    def L(self) -> float:
        return loglog(self.x)

    @property
    def delta(self) -> float:
        return math.log(self.x) ** self.theta

    @property
    def t_range(self) -> tuple[float, float]:
        """(lo, hi]: admissible |t|."""
        return 1.0 / math.sqrt(self.L), self.delta**5

    def check_t(self, t: float) -> None:
        lo, hi = self.t_range
        if not lo < abs(t) <= hi:
            raise ContractError(f"|t|={abs(t)} outside ({lo}, {hi}]")

    def D(self, t: float) -> int:
        self.check_t(t)
        if abs(t) <= 0.5:
            return math.ceil(math.log(1.0 / abs(t))) + self.B + 1
        return self.B + 1

    def a(self, t: float) -> float:
        d = self.D(t)
        base = math.inf if self.q == 1 else self.C / (1.0 - self.q)
        return base + 5.0 * self.theta * self.L + d + math.log(d + 1)

    def a_j(self, j: int, t: float) -> float:
        return j + self.a(t) + 2.0 * math.log(j)

    def R(self, t: float) -> int:
        return math.floor(self.L) - self.D(t)

    @property
    def S(self) -> int:
        return math.floor(self.L) - self.B

    def u(self, m: int, t: float) -> int:
        return math.floor(self.L) - self.D(t) - m

    def w(self, r: int, t: float) -> float:
        """w(-1) = t; w(r) rounds w(r-1) down to the grid 1/(log x_r log log x_r)."""
        val = t
        for i in range(0, r + 1):
            lx = math.log(self.x) * math.exp(-(i + 1))
            scale = lx * math.log(lx)
            if scale <= 0:
                raise ContractError(f"w({r}) needs log log x_{i} > 0")
            val = math.floor(val * scale) / scale
        return val

    def v(self, m: int, t: float) -> float:
        return self.w(self.u(m, t), t)

    # lower-bound event
    @property
    def a_lower(self) -> float:
        """a(q, x) = min(sqrt(log log x), 1/(1-q) + theta log log x / 4)."""
        second = math.inf if self.q == 1 else 1.0 / (1.0 - self.q) + self.theta * self.L / 4
        return min(math.sqrt(self.L), second)

    def a_lower_k(self, k: int) -> float:
        return k + self.a_lower + 2.0 * math.log(k)


def log_increment(x: float, r: int, u: float, v: float, stream: PrimeValueStream) -> float:
    """log |I_r(u, v)|, the increment over primes in (x_{r+1}, x_r]."""
    primes = primes_between(cut_point(x, r + 1), cut_point(x, r))
    if primes.size == 0:
        return 0.0
    logs = log_euler_factors(primes, stream.values(primes), complex(u, v), stream.model.a_f)
    return math.fsum(logs.real.tolist())


def barrier_event_holds(params: BarrierParams, k: int, t: float, stream: PrimeValueStream) -> bool:
    """-a_j <= sum_{m<=j} log|I_{u_m}(k/log x, v_m)| <= a_j for max(k,1) <= j <= R(t)."""
    R = params.R(t)
    if k > max(R, 0) or k < 0:
        raise ContractError(f"need 0 <= k <= R(t) = {R}")
    shift = k / math.log(params.x)
    total = 0.0
    for j in range(1, R + 1):
        total += log_increment(params.x, params.u(j, t), shift, params.v(j, t), stream)
        if j >= max(k, 1) and abs(total) > params.a_j(j, t):
            return False
    return True


def lower_event_holds(params: BarrierParams, t: float, stream: PrimeValueStream,
                      V: float = 1.0) -> bool:
    """-B a_k(q,x) <= sum_{m<=k} log|I_{u_m}(4V/log x, t)| <= a_k(q,x)
    for B+2 <= k <= log log x - floor(log V) - 3, with u_m = floor(log log x) - m."""
    if V < 1:
        raise ContractError("need V >= 1")
    top = math.floor(params.L - math.floor(math.log(V)) - 3)
    shift = 4.0 * V / math.log(params.x)
    total = 0.0
    for k in range(1, top + 1):
        total += log_increment(params.x, math.floor(params.L) - k, shift, t, stream)
        if k >= params.B + 2:
            ak = params.a_lower_k(k)
            if not -params.B * ak <= total <= ak:
                return False
    return True


def tilt_log_weight(t: float, x: float, stream: PrimeValueStream) -> float:
    """log prod_{p <= x**(1/e)} |1 + a_f f(p)/p**(1/2+it)|**(2 a_f)."""
    primes = primes_upto(x ** math.exp(-1))
    if primes.size == 0:
        return 0.0
    logs = log_euler_factors(primes, stream.values(primes), complex(0, t), stream.model.a_f)
    return 2.0 * math.fsum(logs.real.tolist())


def tilted_prob_estimate(predicate, t: float, x: float, model, trials: int,
                         master_seed: int) -> MomentEstimate:
    """Self-normalised estimate of the tilted probability of ``predicate(stream)``.

    Weights are the squared Euler product over p <= x**(1/e) at 1/2 + it; the
    standard error is the delta-method one for a ratio estimator.
    """
    model = ModelKind.parse(model)
    if trials < 2:
        raise ContractError("need at least two trials")
    logw = np.empty(trials)
    hit = np.empty(trials)
    for i in range(trials):
        stream = PrimeValueStream(model, master_seed, i)
        logw[i] = tilt_log_weight(t, x, stream)
        hit[i] = 1.0 if predicate(stream) else 0.0
    if not np.any(np.isfinite(logw)):
        raise SingularityError("no finite tilt weight")
    w = np.exp(logw - np.max(logw[np.isfinite(logw)]))
    w[~np.isfinite(w)] = 0.0
    total = w.sum()
    if total == 0:
        raise SingularityError("all tilt weights vanish")
    p = float(np.dot(w, hit) / total)
    stderr = float(math.sqrt(np.sum(w**2 * (hit - p) ** 2)) / total)
    return MomentEstimate(1.0, trials, p, stderr)
