import math

import pytest
from hypothesis import given, settings, strategies as st

from lvlab._arith import is_prime, primes_upto
from lvlab.arithmetic_apps import (
    ap_result,
    exponent_table,
    goldbach_split,
    least_goldbach,
    least_prime_ap,
    least_primes_all,
    segmented_primes,
)
from lvlab.errors import InvalidInputError


def test_ap_examples():
    assert least_prime_ap(4, 3) == 3
    assert least_prime_ap(9, 1) == 19
    with pytest.raises(InvalidInputError):
        least_prime_ap(6, 3)


def test_segmented_matches_plain_sieve():
    got = [int(p) for block in segmented_primes(0, 5000, block=777) for p in block]
    assert got == primes_upto(4999).tolist()


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 2000), st.data())
def test_least_prime_minimal(D, data):
    k = data.draw(st.integers(0, D - 1).filter(lambda k: math.gcd(k, D) == 1))
    p = least_prime_ap(D, k)
    assert is_prime(p) and p % D == k
    assert not any(is_prime(m) for m in range(k, p, D))


def test_all_residues_agree():
    table = least_primes_all(27)
    assert set(table) == {k for k in range(27) if k % 3}
    for k, p in table.items():
        assert p == least_prime_ap(27, k)


def test_goldbach_examples():
    assert least_goldbach(3, 1)[0] == 4
    assert least_goldbach(3, 2)[0] == 5
    with pytest.raises(InvalidInputError):
        least_goldbach(9, 1)
    with pytest.raises(InvalidInputError):
        least_goldbach(7, 0)


def _sum_of_two_primes(n):
    return any(is_prime(a) and is_prime(n - a) for a in range(2, n - 1))


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 31, 101])
def test_goldbach_minimal_exhaustive(p):
    for k in range(1, p):
        n, (a, b) = least_goldbach(p, k)
        assert n >= 4 and n % p == k
        assert a + b == n and is_prime(a) and is_prime(b)
        assert not any(_sum_of_two_primes(m) for m in range(k, n, p))


def test_goldbach_split():
    assert goldbach_split(3) is None
    assert goldbach_split(11) is None
    assert goldbach_split(100) == (3, 97)


def test_exponent_tables():
    rows = exponent_table("ap", [3, 9, 27, 81, 243])
    assert all(r["exponent"] < 7 / 3 for r in rows)
    g = exponent_table("goldbach", [3])
    assert g[0]["exponent"] == pytest.approx(math.log(5) / math.log(3))
    assert g[0]["below_asymptotic_regime"]
    assert exponent_table("ap", []) == []
    with pytest.raises(InvalidInputError):
        exponent_table("twin", [3])


def test_max_monotone_in_residue_set():
    vals = ap_result(81).values
    keys = sorted(vals)
    running = [max(vals[k] for k in keys[: i + 1]) for i in range(len(keys))]
    assert running == sorted(running)
