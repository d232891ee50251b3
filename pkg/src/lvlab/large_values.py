"""Large-value sets ``W``, predicted bounds, the functions ``R`` and ``R~``, moments and energy.

A ``PointSet`` is a collection of pairs ``(t, chi)`` with ``chi`` a character of
one fixed modulus, stored by its index.  Everything downstream (moments, energy,
the Gram matrix) only needs the ordinates and the table of character values.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .characters import DirichletCharacter, Modulus
from .dirichlet_poly import PlateauBump, PolySpec, eval_grid
from .errors import BudgetExceededError, InvalidInputError, NonConvergenceError

SEPARATION_SLACK = 1e-9
V_RANGE = (0.5, 2.0)


@dataclass(frozen=True, eq=False)
class PointSet:
    modulus: Modulus
    entries: tuple[tuple[float, int], ...]
    separation: float
    T: float
    V: float = 0.0
    sigma: float | None = None
    N: float | None = None
    provenance: str = ""

    def __len__(self):
        return len(self.entries)

    @property
    def q(self) -> int:
        return self.modulus.q

    @cached_property
    def t(self) -> np.ndarray:
        return np.array([e[0] for e in self.entries], dtype=float)

    @cached_property
    def chi_index(self) -> np.ndarray:
        return np.array([e[1] for e in self.entries], dtype=np.int64)

    @cached_property
    def characters(self) -> list[DirichletCharacter]:
        return [self.modulus.character(int(i)) for i in self.chi_index]

    @cached_property
    def char_table(self) -> np.ndarray:
        """``(|W|, q)`` array of ``chi_w(a)``."""
        if not self.entries:
            return np.zeros((0, self.q), dtype=complex)
        cache = {}
        rows = []
        for i in self.chi_index.tolist():
            if i not in cache:
                cache[i] = self.modulus.character(i).values
            rows.append(cache[i])
        return np.array(rows)

    def check_separation(self) -> bool:
        by_chi: dict[int, list[float]] = {}
        for t, i in self.entries:
            by_chi.setdefault(i, []).append(t)
        for ts in by_chi.values():
            ts.sort()
            if any(b - a < self.separation * (1 - SEPARATION_SLACK) for a, b in zip(ts, ts[1:])):
                return False
        return all(abs(t) <= self.T * (1 + 1e-12) for t, _ in self.entries)

    def chi_at(self, n) -> np.ndarray:
        """``(|W|, len(n))`` array of ``chi_w(n)``."""
        return self.char_table[:, np.asarray(n) % self.q]


def make_pointset(q_or_mod, entries, separation, T, **kw) -> PointSet:
    mod = q_or_mod if isinstance(q_or_mod, Modulus) else Modulus.build(q_or_mod)
    entries = tuple((float(t), int(i)) for t, i in entries)
    return PointSet(mod, entries, float(separation), float(T), **kw)


def random_pointset(q: int, size: int, T: float, separation: float, rng: np.random.Generator) -> PointSet:
    """``size`` points with uniformly random characters and ordinates, separated per character."""
    mod = Modulus.build(q)
    chosen: dict[int, list[float]] = {}
    entries = []
    attempts = 0
    while len(entries) < size:
        attempts += 1
        if attempts > 1000 * size:
            raise InvalidInputError("could not place points with the requested separation")
        i = int(rng.integers(mod.phi))
        t = float(rng.uniform(-T, T))
        if all(abs(t - s) >= separation for s in chosen.get(i, [])):
            chosen.setdefault(i, []).append(t)
            entries.append((t, i))
    return PointSet(mod, tuple(entries), separation, T, provenance=f"random(q={q}, size={size})")


# ---------------------------------------------------------------------------
# Extraction


def extract_W(
    spec: PolySpec,
    characters: Sequence[DirichletCharacter],
    T: float,
    V: float,
    delta: float,
    step: float | None = None,
) -> PointSet:
    """Greedy well-spaced set of grid points where ``|D(t, chi)| >= V``.

    Candidates are visited in decreasing ``|D|`` (ties by smaller ``t``, then
    character order) and kept unless a kept point with the same character lies
    closer than ``delta``.
    """
    if not delta > 0:
        raise InvalidInputError("separation must be positive")
    if V < 0:
        raise InvalidInputError("threshold V must be nonnegative")
    if not characters:
        raise InvalidInputError("need at least one character")
    mod = characters[0].modulus
    step = delta / 4 if step is None else step
    n_steps = int(math.floor(2 * T / step + 1e-9))
    grid = -T + step * np.arange(n_steps + 1)
    vals = np.abs(eval_grid(spec, characters, grid))
    ci, ti = np.nonzero(vals >= V)
    mags = vals[ci, ti]
    order = np.lexsort((ci, grid[ti], -mags))
    kept: dict[int, list[float]] = {}
    entries = []
    tol = delta * (1 - SEPARATION_SLACK)
    for k in order.tolist():
        c, t = int(ci[k]), float(grid[ti[k]])
        ts = kept.setdefault(c, [])
        j = bisect.bisect_left(ts, t)
        if (j > 0 and t - ts[j - 1] < tol) or (j < len(ts) and ts[j] - t < tol):
            continue
        ts.insert(j, t)
        entries.append((t, characters[c].index))
    sigma = math.log(V) / math.log(spec.N) if V > 0 and spec.N > 1 else None
    W = PointSet(mod, tuple(entries), delta, T, V, sigma, spec.N, provenance=repr(spec))
    assert W.check_separation()
    return W


# ---------------------------------------------------------------------------
# Predicted bounds


def predicted_bounds(N: float, V: float, q: float, T: float, eps: float = 0.05) -> dict:
    """Right-hand sides of the classical and new large-value estimates, with no hidden constants."""
    if min(N, V, q, T) <= 0:
        raise InvalidInputError("N, V, q, T must be positive")
    qT = q * T
    base = N**2 / V**2
    out = {
        "mvt": base + qT * N / V**2,
        "hmh": base + qT * N**4 / V**6,
        "thm1_low": base + qT ** (4 / 3) * N**2 / V**4,
        "thm1_high": base + N**5 / V**6 + qT**0.5 * N**3 / V**4 + qT ** (2 / 19) * N ** (80 / 19) / V ** (96 / 19),
        "eps_factor": qT**eps,
    }
    if qT**0.75 <= N <= qT ** (5 / 6):
        out["regime"] = "low"
        out["thm1"] = out["thm1_low"]
    elif N >= qT ** (5 / 6):
        out["regime"] = "high"
        out["thm1"] = out["thm1_high"]
    else:
        out["regime"] = "outside"
        out["thm1"] = None
    return out


# ---------------------------------------------------------------------------
# R and R~


def r_eval(W: PointSet, v, a: int):
    """``R(v, a) = sum_{(t, chi) in W} v^{it} chi(a)``; vectorized over ``v``."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise InvalidInputError("R(v, a) needs v > 0")
    chi_a = W.char_table[:, int(a) % W.q]
    out = np.exp(1j * np.multiply.outer(np.log(v), W.t)) @ chi_a
    return complex(out) if out.ndim == 0 else out


class RFunction:
    """``R`` bound to a point set, memoized on ``(v, a mod q)``."""

    def __init__(self, W: PointSet):
        self.source = W
        self._cache: dict[tuple[float, int], complex] = {}

    def __call__(self, v: float, a: int) -> complex:
        key = (float(v), int(a) % self.source.q)
        if key not in self._cache:
            self._cache[key] = r_eval(self.source, key[0], key[1])
        return self._cache[key]


def _r_matrix(W: PointSet, v: np.ndarray, residues: np.ndarray) -> np.ndarray:
    """``R(v_i, a_j)`` for all nodes and residues."""
    return np.exp(1j * np.outer(np.log(v), W.t)) @ W.char_table[:, residues]


def _composite_gl(a: float, b: float, pieces: int, order: int = 32):
    x, w = leggauss(order)
    edges = np.linspace(a, b, pieces + 1)
    lo, hi = edges[:-1], edges[1:]
    nodes = (0.5 * (hi - lo)[:, None] * x + 0.5 * (hi + lo)[:, None]).ravel()
    weights = (0.5 * (hi - lo)[:, None] * w).ravel()
    return nodes, weights


def psi_tilde_0(bump_sharpness: float | None = None) -> PlateauBump:
    kw = {} if bump_sharpness is None else {"sharpness": bump_sharpness}
    return PlateauBump(-2.0, -1.0, 1.0, 2.0, **kw)


PSI0 = psi_tilde_0()


def r_tilde(W: PointSet, u: float, a: int, M2: float, N: float, eps: float = 0.05, q: int | None = None) -> float:
    """``R~_{M2}(u, a)``: square root of a ``psi~``-weighted average of ``|R|^2`` over ``[1/2, 2]``."""
    if not M2 > 0:
        raise InvalidInputError("M2 must be positive")
    q = W.q if q is None else q
    scale = N * M2 / q
    dil = 2.0 * (q * W.T) ** eps
    half = 2.0 * dil / scale
    lo, hi = max(V_RANGE[0], u - half), min(V_RANGE[1], u + half)
    if lo >= hi:
        return 0.0
    pieces = max(4, math.ceil((hi - lo) * (2 * W.T + 4 * scale / dil + 10)))
    v, wts = _composite_gl(lo, hi, pieces)
    R = r_eval(W, v, a)
    weight = scale * PSI0(scale * (u - v) / dil)
    val = float(np.dot(wts, weight * np.abs(R) ** 2))
    return math.sqrt(max(val, 0.0))


# ---------------------------------------------------------------------------
# Moments and energy


@dataclass(frozen=True)
class MomentReport:
    kind: str
    raw: float
    normalizer: float
    params: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.raw / self.normalizer if self.normalizer else math.inf

    def as_dict(self) -> dict:
        return {"kind": self.kind, "raw": self.raw, "normalizer": self.normalizer, "ratio": self.ratio, **self.params}


def continuous_moment(W: PointSet, k: int, tol: float = 1e-9, max_doublings: int = 6) -> float:
    """``int_{1/2}^{2} sum_{(a,q)=1} |R(v, a)|^k dv`` by composite Gauss-Legendre."""
    units = W.modulus.units

    def run(pieces):
        v, wts = _composite_gl(*V_RANGE, pieces)
        R = _r_matrix(W, v, units)
        return float(np.dot(wts, (np.abs(R) ** k).sum(axis=1)))

    span = float(np.ptp(W.t)) if len(W) else 0.0
    pieces = max(8, math.ceil(k * (span + 1) * math.log(4) / (2 * math.pi) / 4))
    prev = run(pieces)
    for _ in range(max_doublings):
        pieces *= 2
        cur = run(pieces)
        if abs(cur - prev) <= tol * max(abs(cur), 1.0):
            return cur
        prev = cur
    raise NonConvergenceError(f"moment k={k} did not converge")


def continuous_moments(W: PointSet, E: int | None = None, M2: float | None = None) -> tuple[MomentReport, MomentReport]:
    """Second and fourth moments of ``R`` over ``v in [1/2, 2]`` and coprime residues."""
    if len(W) == 0:
        raise InvalidInputError("W must be nonempty")
    phi = W.modulus.phi
    E = energy(W) if E is None else E
    m2 = continuous_moment(W, 2)
    m4 = continuous_moment(W, 4)
    p = {"M2": M2} if M2 is not None else {}
    return (
        MomentReport("second", m2, phi * len(W), p),
        MomentReport("fourth", m4, phi * E, p),
    )


def energy(W: PointSet, cap: int = 10_000) -> int:
    """``#{(p1..p4) in W^4 : |t1+t2-t3-t4| <= 1, chi1 chi2 = chi3 chi4}``.

    Ordered pairs are bucketed by product character; within a bucket the pair
    sums are sorted and each sum counts the partners inside ``[s-1, s+1]``.
    Entries within rounding distance of the window edge are rechecked with the
    literal predicate ``abs(s - s') <= 1`` so the count matches a brute-force loop
    exactly.
    """
    n = len(W)
    if n > cap:
        raise BudgetExceededError(f"energy capped at |W| <= {cap}")
    if n == 0:
        return 0
    mod = W.modulus
    t = W.t
    idx = W.chi_index
    exps = np.array([mod.exps_of(int(i)) for i in idx], dtype=np.int64).reshape(n, -1)
    orders = np.array(mod.orders, dtype=np.int64)
    prod_exps = (exps[:, None, :] + exps[None, :, :]) % orders if orders.size else np.zeros((n, n, 0), dtype=np.int64)
    radix = np.cumprod(np.concatenate(([1], orders[:-1]))) if orders.size else np.zeros(0, dtype=np.int64)
    prod_idx = (prod_exps * radix).sum(axis=2).ravel()
    sums = (t[:, None] + t[None, :]).ravel()
    order = np.lexsort((sums, prod_idx))
    prod_idx, sums = prod_idx[order], sums[order]
    bounds = np.flatnonzero(np.diff(prod_idx)) + 1
    total = 0
    for s in np.split(sums, bounds):
        margin = 1e-9 * (1.0 + float(np.abs(s).max()))
        lo_in = np.searchsorted(s, s - 1.0 + margin, "left")
        hi_in = np.searchsorted(s, s + 1.0 - margin, "right")
        total += int((hi_in - lo_in).sum())
        lo_edge = np.searchsorted(s, s - 1.0 - margin, "left")
        hi_edge = np.searchsorted(s, s + 1.0 + margin, "right")
        for i in np.flatnonzero((lo_edge < lo_in) | (hi_edge > hi_in)).tolist():
            x = s[i]
            for j in list(range(lo_edge[i], lo_in[i])) + list(range(hi_in[i], hi_edge[i])):
                if abs(x - s[j]) <= 1.0:
                    total += 1
    return total


def _window(M: float, q: int) -> np.ndarray:
    n = np.arange(math.floor(M) + 1, math.floor(2 * M) + 1)
    return n[np.gcd(n, q) == 1]


def _p_matrix(W: PointSet, n: np.ndarray) -> np.ndarray:
    """``P[w, n] = chi_w(n) n^{i t_w}``."""
    return W.chi_at(n) * np.exp(1j * np.outer(W.t, np.log(n)))


def discrete_moments(
    W: PointSet,
    M: float,
    ks: Sequence[int] = (2, 3, 4),
    D: float | None = None,
    budget: int = 10**7,
) -> dict[int, dict]:
    """``sum_{n1, n2 ~ M} |R(n1/n2, n1 n2^{-1})|^k``, split at ``gcd(n1, n2) <= D``.

    The total is defined as ``small + large`` so the split reconciles exactly.
    """
    if M < 1:
        raise InvalidInputError("M must be >= 1")
    n = _window(M, W.q)
    if n.size**2 > budget:
        raise BudgetExceededError(f"discrete moment needs {n.size**2} pairs (budget {budget})")
    D = math.inf if D is None else D
    P = _p_matrix(W, n)
    Q = np.abs(P.T @ P.conj())
    small_mask = np.gcd.outer(n, n) <= D
    out = {}
    for k in ks:
        A = Q**k
        small = float(A[small_mask].sum())
        large = float(A[~small_mask].sum())
        out[k] = {"small": small, "large": large, "total": small + large, "M": M, "D": D, "pairs": int(n.size**2)}
    return out


def discrete_moment_reports(W: PointSet, M: float, E: int, D: float | None = None, sigma: float | None = None) -> list[MomentReport]:
    """Measured discrete moments against their predicted right-hand sides."""
    qT = W.q * W.T
    size = len(W)
    D = M**2 / qT if D is None else D
    mom = discrete_moments(W, M, (2, 3, 4), D)
    reps = [
        MomentReport("secmR", mom[2]["total"], size * M**2 + size**2 * M + size**1.25 * qT**0.5 * M, {"M": M}),
        MomentReport("fourmR", mom[4]["total"], E * M**2 + size**4 * M + E**0.75 * size * qT**0.5 * M, {"M": M}),
        MomentReport("sgcd", mom[3]["small"], (D * qT + M**2) * size**0.5 * E**0.5, {"M": M, "D": D}),
        MomentReport(
            "lgcd",
            mom[3]["large"],
            M * size**3 + M * qT**0.25 * size ** (21 / 8) + E**0.5 * size**0.5 * M**2,
            {"M": M, "D": D},
        ),
    ]
    if sigma is not None:
        # econ3: E(W) against N^{-2 sigma} times the third moment
        reps.append(MomentReport("econ3", float(E), M ** (-2 * sigma) * mom[3]["total"], {"M": M, "sigma": sigma}))
    return reps


@dataclass(frozen=True)
class HeathBrownReport:
    lhs: float
    rhs: float
    nonprimitive: tuple[int, ...]

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf


def heath_brown_lhs(W: PointSet, M: float, coeffs=None) -> HeathBrownReport:
    """``sum_{pairs} |sum_{n ~ M} c_n chi1 conj(chi2)(n) n^{-1/2 + i(t1 - t2)}|^2``.

    ``coeffs`` is indexed like ``n = floor(M)+1 .. floor(2M)``; default all ones.
    """
    n = np.arange(math.floor(M) + 1, math.floor(2 * M) + 1)
    c = np.ones(n.size) if coeffs is None else np.asarray(coeffs)
    if c.shape != n.shape:
        raise InvalidInputError(f"need {n.size} coefficients, got {c.size}")
    if np.any(np.abs(c) > 1 + 1e-12):
        raise InvalidInputError("coefficients must satisfy |c_n| <= 1")
    P = _p_matrix(W, n)
    B = (P * (c / np.sqrt(n))) @ P.conj().T
    lhs = float((np.abs(B) ** 2).sum())
    size = len(W)
    cmax = float(np.abs(c).max()) if c.size else 0.0
    rhs = (size * M + size**2 + size**1.25 * (W.q * W.T) ** 0.5) * cmax**2
    bad = tuple(sorted({int(i) for i, chi in zip(W.chi_index, W.characters) if not chi.is_primitive}))
    return HeathBrownReport(lhs, rhs, bad)


def rbaver_constant(W: PointSet, a: int, rng: np.random.Generator, probes: int = 100, eps: float = 0.05) -> float:
    """Smallest ``C`` with ``|R(v,a)| <= C T int_{|v'-v| <= T^eps/T} |R(v',a)| dv' + 1`` on random probes."""
    T = W.T
    half = T**eps / T
    x, w = leggauss(64)
    worst = 0.0
    for v in rng.uniform(*V_RANGE, probes):
        lo, hi = v - half, v + half
        nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        avg = 0.5 * (hi - lo) * np.dot(w, np.abs(r_eval(W, nodes, a)))
        excess = abs(r_eval(W, v, a)) - 1.0
        if excess > 0:
            worst = max(worst, excess / (T * avg) if avg > 0 else math.inf)
    return worst
