"""Least primes in progressions and least Goldbach numbers in progressions, with exponent tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from ._arith import is_prime, prime_sieve, primes_upto
from .errors import BudgetExceededError, InvalidInputError

BLOCK = 1 << 20
DEFAULT_CEILING = 10**9
AP_EXPONENT = 7 / 3
GOLDBACH_EXPONENT = 7 / 6
EXPONENT_SLACK = 0.2
ASYMPTOTIC_FLOOR = 100


def segmented_primes(lo: int, hi: int, block: int = BLOCK) -> Iterator[np.ndarray]:
    """Primes in ``[lo, hi)`` yielded block by block in increasing order."""
    lo = max(lo, 2)
    if hi <= lo:
        return
    base = primes_upto(math.isqrt(hi - 1) + 1)
    for start in range(lo, hi, block):
        stop = min(start + block, hi)
        flags = np.ones(stop - start, dtype=bool)
        for p in base.tolist():
            if p * p >= stop:
                break
            first = max(p * p, (start + p - 1) // p * p)
            flags[first - start :: p] = False
        yield start + np.flatnonzero(flags)


def least_prime_ap(D: int, k: int, ceiling: int = DEFAULT_CEILING) -> int:
    """Smallest prime ``p = k (mod D)``."""
    if D < 1:
        raise InvalidInputError("modulus must be positive")
    if math.gcd(k, D) != 1:
        raise InvalidInputError(f"residue {k} is not coprime to {D}")
    k %= D
    for primes in segmented_primes(2, ceiling + 1):
        hit = primes[primes % D == k]
        if hit.size:
            return int(hit[0])
    raise BudgetExceededError(f"no prime = {k} mod {D} below {ceiling}")


def least_primes_all(D: int, ceiling: int = DEFAULT_CEILING) -> dict[int, int]:
    """``p(D, k)`` for every reduced residue ``k``, from one pass of the sieve."""
    if D < 1:
        raise InvalidInputError("modulus must be positive")
    want = {k for k in range(D) if math.gcd(k, D) == 1}
    out: dict[int, int] = {}
    for primes in segmented_primes(2, ceiling + 1):
        res = primes % D
        _, first = np.unique(res, return_index=True)
        for i in first.tolist():
            r = int(res[i])
            if r in want and r not in out:
                out[r] = int(primes[i])
        if len(out) == len(want):
            return dict(sorted(out.items()))
    raise BudgetExceededError(f"some residue mod {D} has no prime below {ceiling}")


def goldbach_split(n: int, flags: np.ndarray | None = None) -> tuple[int, int] | None:
    """A pair of primes summing to ``n`` with the smaller one minimal, or ``None``."""
    if n < 4:
        return None
    flags = prime_sieve(n) if flags is None else flags
    for p in range(2, n // 2 + 1):
        if flags[p] and flags[n - p]:
            return p, n - p
    return None


def least_goldbach(p: int, k: int, ceiling: int = 10**7) -> tuple[int, tuple[int, int]]:
    """Smallest ``n = k (mod p)`` that is a sum of two primes, with a decomposition."""
    if p < 3 or not is_prime(p):
        raise InvalidInputError(f"{p} is not an odd prime")
    if not 1 <= k < p:
        raise InvalidInputError("need 1 <= k < p")
    limit = 64 * p + 64
    while True:
        if limit > ceiling:
            raise BudgetExceededError(f"no Goldbach number = {k} mod {p} below {ceiling}")
        flags = prime_sieve(limit)
        n = k
        while n < 4:
            n += p
        while n <= limit:
            split = goldbach_split(n, flags)
            if split:
                return n, split
            n += p
        limit *= 4


@dataclass(frozen=True)
class ApResult:
    D: int
    values: dict[int, int] = field(repr=False)

    @property
    def max_value(self) -> int:
        return max(self.values.values())

    @property
    def exponent(self) -> float:
        return math.log(self.max_value) / math.log(self.D)


@dataclass(frozen=True)
class GoldbachResult:
    p: int
    values: dict[int, int] = field(repr=False)
    splits: dict[int, tuple[int, int]] = field(repr=False)

    @property
    def max_value(self) -> int:
        return max(self.values.values())

    @property
    def exponent(self) -> float:
        return math.log(self.max_value) / math.log(self.p)


def ap_result(D: int, ceiling: int = DEFAULT_CEILING) -> ApResult:
    if D < 2:
        raise InvalidInputError("need D >= 2 for an exponent")
    return ApResult(D, least_primes_all(D, ceiling))


def goldbach_result(p: int, ceiling: int = 10**7) -> GoldbachResult:
    values, splits = {}, {}
    for k in range(1, p):
        n, s = least_goldbach(p, k, ceiling)
        values[k], splits[k] = n, s
    return GoldbachResult(p, values, splits)


def exponent_table(kind: str, moduli: Sequence[int], ceiling: int | None = None) -> list[dict]:
    """Per modulus: the max over residues, its exponent and the regime flags."""
    if kind not in ("ap", "goldbach"):
        raise InvalidInputError(f"unknown table kind {kind!r}")
    target = AP_EXPONENT if kind == "ap" else GOLDBACH_EXPONENT
    rows = []
    for m in moduli:
        if kind == "ap":
            r = ap_result(m, ceiling or DEFAULT_CEILING)
        else:
            r = goldbach_result(m, ceiling or 10**7)
        rows.append(
            {
                "modulus": m,
                "max": r.max_value,
                "exponent": r.exponent,
                "target": target,
                "exceeds": r.exponent > target + EXPONENT_SLACK,
                "below_asymptotic_regime": m < ASYMPTOTIC_FLOOR,
                "values": r.values,
            }
        )
    return rows
