"""Dirichlet characters modulo q.

A character is stored as an exponent vector over fixed generators of the unit
group ``(Z/qZ)^*``.  Values are exact rational angles ``num / L`` (``L`` is the
group exponent) and only become complex doubles when looked up in a table of
L-th roots of unity.

Generators: the smallest primitive root for every odd prime power, ``3`` for
``4`` and the pair ``(-1, 5)`` for ``2^e`` with ``e >= 3``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import InvalidInputError
from ._arith import (
    euler_phi,
    factorize,
    mobius,
    mod_inverse,
    smallest_primitive_root,
)

CONSTRUCTION_CAP = 10**6
ENUMERATION_CAP = 10**4
DENSE_TABLE_CAP = 10**6


class InvalidModulusError(InvalidInputError):
    pass


@dataclass(frozen=True, eq=False)
class PrimePowerComponent:
    p: int
    e: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]

    @property
    def pe(self) -> int:
        return self.p**self.e

    @cached_property
    def dlog_table(self) -> np.ndarray | None:
        """``table[r]`` is the exponent vector of ``r``; ``-1`` rows for non-units."""
        pe = self.pe
        if pe > DENSE_TABLE_CAP:
            return None
        table = np.full((pe, len(self.generators)), -1, dtype=np.int64)
        if not self.generators:
            table[1 % pe] = []
            return table
        if len(self.generators) == 1:
            (g,), (order,) = self.generators, self.orders
            x = 1
            for k in range(order):
                table[x, 0] = k
                x = x * g % pe
            return table
        # 2^e with e >= 3: r = (-1)^a 5^b
        half = self.orders[1]
        x = 1
        for b in range(half):
            table[x] = (0, b)
            table[(pe - x) % pe] = (1, b)
            x = x * 5 % pe
        return table

    def dlog(self, r: int) -> tuple[int, ...] | None:
        r %= self.pe
        if r % self.p == 0 and self.pe > 1:
            return None
        table = self.dlog_table
        if table is not None:
            return tuple(int(v) for v in table[r])
        return self._dlog_bsgs(r)

    def _dlog_bsgs(self, r: int) -> tuple[int, ...]:
        pe = self.pe
        if len(self.generators) == 2:
            a = 0
            if r % 4 == 3:
                a, r = 1, (pe - r) % pe
            return (a, _bsgs(5, r, pe, self.orders[1]))
        return (_bsgs(self.generators[0], r, pe, self.orders[0]),)


def _bsgs(g: int, h: int, m: int, order: int) -> int:
    step = math.isqrt(order) + 1
    baby = {}
    x = 1
    for j in range(step):
        baby.setdefault(x, j)
        x = x * g % m
    giant = pow(g, -step, m)
    y = h
    for i in range(step + 1):
        if y in baby:
            return (i * step + baby[y]) % order
        y = y * giant % m
    raise ValueError(f"{h} is not a power of {g} modulo {m}")


def _component(p: int, e: int) -> PrimePowerComponent:
    pe = p**e
    if p == 2:
        if e == 1:
            return PrimePowerComponent(2, 1, (), ())
        if e == 2:
            return PrimePowerComponent(2, 2, (3,), (2,))
        return PrimePowerComponent(2, e, (pe - 1, 5), (2, pe // 4))
    return PrimePowerComponent(p, e, (smallest_primitive_root(pe, p),), (pe - pe // p,))


@dataclass(frozen=True, eq=False)
class Modulus:
    q: int
    factorization: tuple[tuple[int, int], ...]
    components: tuple[PrimePowerComponent, ...]

    @classmethod
    def build(cls, q: int, cap: int = CONSTRUCTION_CAP) -> "Modulus":
        if not isinstance(q, (int, np.integer)) or q < 1:
            raise InvalidModulusError(f"modulus must be a positive integer, got {q!r}")
        if q > cap:
            raise InvalidModulusError(f"modulus {q} exceeds construction cap {cap}")
        q = int(q)
        fac = factorize(q) if q > 1 else ()
        comps = tuple(_component(p, e) for p, e in fac)
        return cls(q, fac, comps)

    @cached_property
    def orders(self) -> tuple[int, ...]:
        return tuple(o for c in self.components for o in c.orders)

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    @property
    def phi(self) -> int:
        return math.prod(self.orders)

    @cached_property
    def roots(self) -> np.ndarray:
        """The ``exponent``-th roots of unity, exact at multiples of 1/4."""
        L = self.exponent
        k = np.arange(L)
        r = np.exp(2j * np.pi * k / L)
        for quarter, val in enumerate((1, 1j, -1, -1j)):
            if (quarter * L) % 4 == 0:
                r[quarter * L // 4] = val
        return r

    @cached_property
    def weights(self) -> np.ndarray:
        """Factor turning generator exponents into numerators over ``exponent``."""
        return np.array([self.exponent // o for o in self.orders], dtype=np.int64)

    def dlog(self, n: int) -> tuple[int, ...] | None:
        out: list[int] = []
        for c in self.components:
            v = c.dlog(n)
            if v is None:
                return None
            out.extend(v)
        return tuple(out)

    @cached_property
    def residue_logs(self) -> np.ndarray:
        """``(q, ngens)`` array of generator exponents, ``-1`` rows for non-units."""
        q = self.q
        r = np.arange(q)
        cols = []
        unit = np.ones(q, dtype=bool)
        for c in self.components:
            table = c.dlog_table
            if table is None:
                table = np.array([c.dlog(x) or (-1,) * len(c.orders) for x in range(c.pe)])
            sub = table[r % c.pe]
            unit &= sub[:, 0] >= 0 if sub.shape[1] else True
            cols.append(sub)
        if not cols:
            return np.zeros((q, 0), dtype=np.int64)
        logs = np.concatenate(cols, axis=1)
        logs[~unit] = -1
        return logs

    @cached_property
    def unit_mask(self) -> np.ndarray:
        return np.gcd(np.arange(self.q), self.q) == 1

    @cached_property
    def units(self) -> np.ndarray:
        return np.flatnonzero(self.unit_mask)

    def exps_of(self, index: int) -> tuple[int, ...]:
        out = []
        for o in self.orders:
            out.append(index % o)
            index //= o
        return tuple(out)

    def index_of(self, exps) -> int:
        idx, base = 0, 1
        for k, o in zip(exps, self.orders):
            idx += (k % o) * base
            base *= o
        return idx

    def mul_index(self, i: int, j: int) -> int:
        return self.index_of([a + b for a, b in zip(self.exps_of(i), self.exps_of(j))])

    def conj_index(self, i: int) -> int:
        return self.index_of([-a for a in self.exps_of(i)])

    def character(self, index: int) -> "DirichletCharacter":
        if not 0 <= index < self.phi:
            raise IndexError(f"character index {index} out of range for q={self.q}")
        return DirichletCharacter(self, self.exps_of(index))

    def characters(self, cap: int = ENUMERATION_CAP) -> list["DirichletCharacter"]:
        if self.q > cap:
            raise InvalidModulusError(f"full enumeration capped at q <= {cap}")
        return [self.character(i) for i in range(self.phi)]

    def value_matrix(self, indices=None) -> np.ndarray:
        """Rows are characters, columns residues ``0..q-1``."""
        idx = range(self.phi) if indices is None else indices
        return np.array([self.character(i).values for i in idx])


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    modulus: Modulus
    exponents: tuple[int, ...]

    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and self.modulus.q == other.modulus.q
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.modulus.q, self.exponents))

    def __repr__(self):
        return f"DirichletCharacter(q={self.q}, index={self.index}, exponents={self.exponents})"

    @property
    def q(self) -> int:
        return self.modulus.q

    @cached_property
    def index(self) -> int:
        return self.modulus.index_of(self.exponents)

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @cached_property
    def numerators(self) -> np.ndarray:
        """Angle numerators over ``modulus.exponent`` per residue, ``-1`` off units."""
        mod = self.modulus
        if mod.q == 1:
            return np.zeros(1, dtype=np.int64)
        logs = mod.residue_logs
        num = (logs @ (np.array(self.exponents, dtype=np.int64) * mod.weights)) % mod.exponent
        num[~mod.unit_mask] = -1
        return num

    @cached_property
    def values(self) -> np.ndarray:
        num = self.numerators
        out = np.zeros(self.q, dtype=complex)
        ok = num >= 0
        out[ok] = self.modulus.roots[num[ok]]
        return out

    def angle(self, n: int) -> Fraction | None:
        """Exact angle of ``chi(n)`` in turns, or None when gcd(n, q) > 1."""
        logs = self.modulus.dlog(n % self.q) if self.q > 1 else ()
        if logs is None:
            return None
        return Fraction(sum(k * l * w for k, l, w in zip(self.exponents, logs, self.modulus.weights)), self.modulus.exponent) % 1

    def __call__(self, n: int) -> complex:
        return eval_char(self, n)

    def at(self, n) -> np.ndarray:
        """Vectorized evaluation at an integer array."""
        return self.values[np.asarray(n) % self.q]

    @cached_property
    def conductor_info(self) -> tuple[int, tuple[tuple[int, int], ...]]:
        return _conductor_exponents(self)

    @property
    def conductor(self) -> int:
        return self.conductor_info[0]

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.q

    @cached_property
    def parity(self) -> int:
        return 1 if self.q <= 2 else int(round(self.values[self.q - 1].real))

    @cached_property
    def order(self) -> int:
        return self.modulus.exponent // math.gcd(self.modulus.exponent, *(int(k * w) for k, w in zip(self.exponents, self.modulus.weights)))


def build_group(q: int, cap: int = ENUMERATION_CAP) -> tuple[Modulus, list[DirichletCharacter]]:
    """The modulus data and all ``phi(q)`` characters, principal first."""
    mod = Modulus.build(q)
    return mod, mod.characters(cap)


def eval_char(chi: DirichletCharacter, n: int) -> complex:
    return complex(chi.values[n % chi.q])


def _v(p: int, n: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _conductor_exponents(chi: DirichletCharacter):
    parts = []
    pos = 0
    for c in chi.modulus.components:
        exps = chi.exponents[pos : pos + len(c.orders)]
        pos += len(c.orders)
        if c.p == 2 and c.e >= 3:
            a, b = exps
            if b == 0:
                f = 2 if a else 0
            else:
                f = _v(2, c.orders[1] // math.gcd(b, c.orders[1])) + 2
        elif c.p == 2:
            f = 2 if exps and exps[0] else 0
        else:
            (k,) = exps
            f = 0 if k == 0 else _v(c.p, c.orders[0] // math.gcd(k, c.orders[0])) + 1
        parts.append((c.p, f))
    return math.prod(p**f for p, f in parts), tuple(parts)


def conductor(chi: DirichletCharacter) -> tuple[int, DirichletCharacter]:
    """Conductor ``q*`` and the primitive character mod ``q*`` inducing ``chi``."""
    qstar, parts = chi.conductor_info
    star_mod = Modulus.build(qstar)
    exps: list[int] = []
    for comp in star_mod.components:
        for g, o in zip(comp.generators, comp.orders):
            # the component character of chi at this generator, read through CRT
            n = _crt_lift(g, comp.pe, chi.q)
            ang = chi.angle(n)
            k = ang * o
            if k.denominator != 1:
                raise AssertionError("character does not factor through its conductor")
            exps.append(int(k) % o)
    return qstar, DirichletCharacter(star_mod, tuple(exps))


def _crt_lift(r: int, m: int, q: int) -> int:
    """An integer ``n`` with ``n = r (mod m)`` and ``n = 1`` modulo the rest of q."""
    rest = q
    while math.gcd(rest, m) > 1:
        rest //= math.gcd(rest, m)
    if rest == 1:
        return r % m
    # n = r + m*k, n = 1 mod rest
    k = ((1 - r) * mod_inverse(m % rest, rest)) % rest
    return r + m * k


def ramanujan_sum(q: int, m: int) -> int:
    """``C_q(m) = mu(q/(m,q)) phi(q) / phi(q/(m,q))``."""
    if q < 1:
        raise ValueError("q must be positive")
    g = math.gcd(m, q)
    d = q // g
    return mobius(d) * euler_phi(q) // euler_phi(d)


def gauss_sum(chi: DirichletCharacter) -> complex:
    q = chi.q
    a = np.arange(1, q + 1)
    return complex(np.sum(chi.at(a) * np.exp(2j * np.pi * a / q)))


def e(x: float) -> complex:
    return cmath.exp(2j * math.pi * x)
