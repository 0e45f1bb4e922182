import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from shortsums.errors import CapacityError, ContractError
from shortsums.sieve import (MAX_INTERVAL_END, factor_interval, generate_primes, is_prime,
                             mertens_sum, primes_between, primes_upto, psi_smooth_count,
                             squarefree_count)


def test_small_primes():
    assert generate_primes(30).primes.tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert generate_primes(2).primes.tolist() == [2]


def test_prime_counts():
    assert generate_primes(10**6).pi(10**6) == 78498
    assert len(generate_primes(10**7)) == 664579


def test_segmented_matches_sympy_across_boundary():
    lim = (1 << 22) + 12345  # spans several segments
    got = primes_upto(lim)
    assert got.size == sympy.primepi(lim)
    assert got[-5:].tolist() == list(sympy.primerange(lim - 200, lim + 1))[-5:]


def test_table_between():
    t = generate_primes(100)
    assert t.between(10, 20).tolist() == [11, 13, 17, 19]
    with pytest.raises(ContractError):
        t.pi(101)


@pytest.mark.parametrize("limit", [1, 0, -5, 2**40 + 1])
def test_generate_primes_capacity(limit):
    with pytest.raises(CapacityError):
        generate_primes(limit)


def test_prime_table_memory_budget():
    # 2**40 is in range but its table would not fit the budget
    with pytest.raises(CapacityError):
        generate_primes(2**40)


@given(st.integers(0, 10**12), st.integers(1, 300))
def test_factorization_against_sympy(x, y):
    fac = factor_interval(x, y, check=True)
    for n in (x + 1, x + y, x + 1 + y // 2):
        assert dict(fac.entry(n)) == sympy.factorint(n)
        ent = fac.entry(n)
        assert math.prod(p**e for p, e in ent) == n
        i = n - x - 1
        assert fac.largest_prime_factor[i] == (max(p for p, _ in ent) if ent else 1)
        assert bool(fac.squarefree[i]) == all(e == 1 for _, e in ent)


def test_factor_examples():
    fac = factor_interval(10, 4)
    assert fac.as_dict() == {11: [(11, 1)], 12: [(2, 2), (3, 1)], 13: [(13, 1)], 14: [(2, 1), (7, 1)]}
    assert factor_interval(0, 1).entry(1) == []
    assert factor_interval(2**48 - 1, 1).entry(2**48) == [(2, 48)]


def test_factor_interval_contract():
    with pytest.raises(ContractError):
        factor_interval(-1, 5)
    with pytest.raises(ContractError):
        factor_interval(5, 0)
    with pytest.raises(CapacityError):
        factor_interval(MAX_INTERVAL_END, 1)


def test_factorization_csv(tmp_path):
    path = tmp_path / "f.csv"
    factor_interval(10, 4).to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,prime,exponent"
    assert "12,2,2" in lines and "14,7,1" in lines


def _psi_brute(x, z):
    return sum(1 for n in range(1, x + 1) if n == 1 or max(sympy.factorint(n)) <= z)


@given(st.integers(1, 400), st.integers(1, 60))
def test_psi_against_brute(x, z):
    assert psi_smooth_count(x, z) == _psi_brute(x, z)


def test_psi_examples():
    assert psi_smooth_count(100, 5) == 34
    assert psi_smooth_count(10, 1) == 1
    assert psi_smooth_count(50, 50) == 50


def test_psi_multi_segment():
    # crosses the 2**21 segment boundary; 2-smooth numbers are powers of two
    assert psi_smooth_count(3 * 2**20, 2) == 22


@given(st.integers(0, 10**6), st.integers(0, 500))
def test_squarefree_against_brute(x, y):
    brute = sum(1 for n in range(x + 1, x + y + 1) if sympy.ntheory.factor_.core(n) == n)
    assert squarefree_count(x, y) == brute


def test_squarefree_examples():
    assert squarefree_count(10, 10) == 6
    assert squarefree_count(0, 3) == 3
    # 49 = 7^2 and 50 = 2 * 5^2 are both non-squarefree
    assert squarefree_count(48, 2) == 0


def test_squarefree_density():
    assert squarefree_count(0, 10**6) / 10**6 == pytest.approx(6 / math.pi**2, abs=1e-3)


def test_mertens():
    assert mertens_sum(2) == 0.5
    assert mertens_sum(10) == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7, rel=1e-15)
    # sum 1/p - log log x tends to the Meissel-Mertens constant 0.2615
    assert mertens_sum(10**6) - math.log(math.log(10**6)) == pytest.approx(0.2615, abs=2e-3)
    with pytest.raises(ContractError):
        mertens_sum(1)


@given(st.integers(2, 10**6))
def test_is_prime_matches_table(n):
    assert is_prime(n) == bool(sympy.isprime(n))


def test_is_prime_large():
    assert is_prime(2**61 - 1)
    assert not is_prime((2**31 - 1) * (2**61 - 1))


def test_primes_between_edges():
    assert primes_between(1.5, 2).tolist() == [2]
    assert primes_between(7, 7).size == 0
    assert primes_upto(1.9).size == 0
    assert isinstance(primes_upto(10), np.ndarray)
