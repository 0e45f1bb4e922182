import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from shortsums.barrier import (BarrierParams, barrier_event_holds, cut_point, log_increment,
                               lower_event_holds, tilted_prob_estimate)
from shortsums.errors import ContractError
from shortsums.model import PrimeValueStream

BIG = BarrierParams(1e100, 0.5, 1.0, B=2, C=10.0)


def test_params_contract():
    with pytest.raises(ContractError):
        BarrierParams(2.0, 0.5, 0)
    with pytest.raises(ContractError):
        BarrierParams(1e9, 0.5, 0, B=3, C=3)
    with pytest.raises(ContractError):
        BarrierParams(1e9, 1.5, 0)
    with pytest.raises(ContractError):
        BarrierParams(1e9, 0.5, -1)


def test_t_outside_range():
    lo, hi = BIG.t_range
    for t in (0.0, lo * 0.99, hi * 1.01):
        with pytest.raises(ContractError):
            BIG.D(t)
    BIG.D(hi)


def test_D_piecewise():
    assert BIG.D(0.6) == BIG.B + 1
    assert BIG.D(-3.0) == BIG.B + 1
    assert BIG.D(0.45) == math.ceil(math.log(1 / 0.45)) + BIG.B + 1


@given(st.floats(0.44, 50), st.floats(0.44, 50))
def test_R_nondecreasing_in_abs_t(t1, t2):
    lo, hi = sorted((t1, t2))
    assert BIG.R(lo) <= BIG.R(hi) and BIG.R(-hi) == BIG.R(hi)
    assert BIG.R(hi) < BIG.S


@given(st.integers(1, 30), st.floats(0.44, 50))
def test_a_j_increasing(j, t):
    assert BIG.a_j(j + 1, t) > BIG.a_j(j, t)


def test_a_infinite_at_q_one():
    assert BarrierParams(1e9, 1.0, 0).a(1.0) == math.inf
    assert BarrierParams(1e9, 1.0, 0).a_lower == math.sqrt(math.log(math.log(1e9)))


def test_w_rounds_down():
    x = 1e300
    p = BarrierParams(x, 0.5, 1.0)
    prev = 1.7
    for r in range(4):
        cur = p.w(r, 1.7)
        lx = math.log(x) * math.exp(-(r + 1))
        assert cur <= prev
        assert prev - cur < 1 / (lx * math.log(lx))
        assert abs(cur * lx * math.log(lx) - round(cur * lx * math.log(lx))) < 1e-6
        prev = cur
    assert p.v(1, 1.7) == p.w(p.u(1, 1.7), 1.7)


def test_cut_points_tile():
    x = 1e12
    assert cut_point(x, -1) == pytest.approx(x)
    assert cut_point(x, 0) == pytest.approx(x ** math.exp(-1))
    assert cut_point(x, 1) < cut_point(x, 0)


def test_increment_empty_band():
    assert log_increment(1e3, 5, 0.0, 1.0, PrimeValueStream("steinhaus", 1)) == 0.0


def test_small_x_is_vacuous():
    p = BarrierParams(1e9, 0.0, 0.0, B=2, C=3.0)
    assert p.R(1.0) <= 0
    assert barrier_event_holds(p, 0, 1.0, PrimeValueStream("steinhaus", 1))


def test_k_contract():
    p = BarrierParams(1e9, 0.0, 0.0, B=0, C=3.0)
    with pytest.raises(ContractError):
        barrier_event_holds(p, p.R(1.0) + 1, 1.0, PrimeValueStream("steinhaus", 1))
    with pytest.raises(ContractError):
        barrier_event_holds(p, -1, 1.0, PrimeValueStream("steinhaus", 1))


def test_infinite_C_always_holds():
    p = BarrierParams(1e9, 0.0, 0.0, B=0, C=math.inf)
    for i in range(50):
        assert barrier_event_holds(p, 0, 1.0, PrimeValueStream("rademacher", 2, i))


def test_event_monotone_in_C_pathwise():
    Cs = [0.01, 0.5, 1.0, 2.0, 4.0]
    fails = np.zeros(len(Cs), dtype=int)
    for i in range(300):
        s = PrimeValueStream("steinhaus", 9, i)
        held = [barrier_event_holds(BarrierParams(1e9, 0.0, 0.0, B=0, C=C), 0, 1.0, s) for C in Cs]
        assert all(not a or b for a, b in zip(held, held[1:]))
        fails += np.logical_not(held)
    assert np.all(np.diff(fails) <= 0)


def test_lower_event():
    with pytest.raises(ContractError):
        lower_event_holds(BIG, 1.0, PrimeValueStream("steinhaus", 1), V=0.5)
    # no k in range: vacuous
    assert lower_event_holds(BarrierParams(1e9, 0.5, 0.0, B=2, C=3), 1.0,
                             PrimeValueStream("steinhaus", 1))
    p = BarrierParams(1e100, 0.5, 0.0, B=0, C=3)
    got = [lower_event_holds(p, 1.0, PrimeValueStream("steinhaus", 3, i)) for i in range(200)]
    assert 0 < sum(got) < 200


def test_tilted_whole_and_empty_events():
    assert tilted_prob_estimate(lambda s: True, 1.0, 1e4, "steinhaus", 100, 1).mean == 1.0
    assert tilted_prob_estimate(lambda s: False, 1.0, 1e4, "steinhaus", 100, 1).mean == 0.0


def test_tilted_steinhaus_single_prime_event():
    """Tilted chance that Re(f(2) 2^-it) > 0, against the one-dimensional integral."""
    t = 0.8
    r2 = 0.5
    dens = lambda phi: (1 - r2) / (2 * math.pi) / (1 + r2 - 2 * math.sqrt(r2) * math.cos(phi))
    exact = quad(dens, -math.pi / 2, math.pi / 2)[0]
    pred = lambda s: (s(2) * 2 ** (-1j * t)).real > 0
    est = tilted_prob_estimate(pred, t, 1e4, "steinhaus", 20000, 12)
    assert exact > 0.6
    assert abs(est.mean - exact) <= 3.5 * est.stderr


def test_tilted_rademacher_single_prime_event():
    t = 0.3
    z = 2 ** complex(-0.5, -t)
    exact = abs(1 + z) ** 2 / (2 + 2 * abs(z) ** 2)
    est = tilted_prob_estimate(lambda s: s(2).real > 0, t, 1e4, "rademacher", 20000, 13)
    assert abs(est.mean - exact) <= 3.5 * est.stderr


def test_tilted_median_event_against_weighted_brute_force():
    from shortsums.model import prime_value_block
    from shortsums.sieve import primes_upto

    x, t = 1e4, 1.1
    p = primes_upto(x ** math.exp(-1))
    phase = p.astype(float) ** complex(-0.5, -t)

    def log_abs_F(values):
        return -np.log(np.abs(1 - values * phase)).sum(axis=-1)

    brute = prime_value_block("steinhaus", 777, np.arange(10**5), p)
    lf = log_abs_F(brute)
    median = float(np.median(lf))
    w = np.exp(2 * (lf - lf.max()))
    target = float(np.dot(w, lf > median) / w.sum())

    pred = lambda s: log_abs_F(s.values(p)) > median
    est = tilted_prob_estimate(pred, t, x, "steinhaus", 4000, 778)
    assert target > 0.5
    assert abs(est.mean - target) <= 3 * est.stderr
