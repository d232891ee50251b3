"""Small exact integer helpers shared across the package."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=4096)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``n >= 1`` as sorted ``(p, e)`` pairs."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    m = n
    for p in (2, 3):
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
    f = 5
    while f * f <= m:
        for p in (f, f + 2):
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                out.append((p, e))
        f += 6
    if m > 1:
        out.append((m, 1))
    return tuple(out)


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n):
        r -= r // p
    return r


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def mobius_sieve(n: int) -> np.ndarray:
    """Array ``mu[0..n]`` (``mu[0]`` is 0)."""
    mu = np.ones(n + 1, dtype=np.int64)
    mu[0] = 0
    is_comp = np.zeros(n + 1, dtype=bool)
    for p in range(2, n + 1):
        if is_comp[p]:
            continue
        is_comp[2 * p :: p] = True
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def prime_sieve(n: int) -> np.ndarray:
    """Boolean array ``is_prime[0..n]``."""
    flags = np.ones(max(n + 1, 2), dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags[: n + 1]


def primes_upto(n: int) -> np.ndarray:
    return np.flatnonzero(prime_sieve(n))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for ``n < 3.3e24``."""
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
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def mod_inverse(n: int, q: int) -> int:
    """Inverse of ``n`` modulo ``q`` by extended Euclid."""
    old_r, r = n % q, q
    old_s, s = 1, 0
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
    if old_r != 1:
        raise ValueError(f"{n} is not invertible modulo {q}")
    return old_s % q


def multiplicative_order(g: int, m: int, group_order: int) -> int:
    order = group_order
    for p, _ in factorize(group_order):
        while order % p == 0 and pow(g, order // p, m) == 1:
            order //= p
    return order


def smallest_primitive_root(pe: int, p: int) -> int:
    """Smallest generator of the cyclic group (Z/p^e)^*, p odd."""
    phi = pe - pe // p
    for g in range(2, pe):
        if g % p and multiplicative_order(g, pe, phi) == phi:
            return g
    if pe == 2:
        return 1
    raise ValueError(f"no primitive root modulo {pe}")


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))
