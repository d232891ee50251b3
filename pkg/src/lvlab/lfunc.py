"""Dirichlet L-functions: evaluation, zero counting, density scans and zero classification.

``L(s, chi)`` is computed from Hurwitz zeta values of the primitive character
inducing ``chi``, then multiplied by the missing Euler factors.  Zeros in a
rectangle are counted by tracking ``arg L`` around its boundary; zeros are
located by splitting into horizontal strips and reading off the first moment
``(1/2 pi i) oint z L'/L dz`` of each one-zero strip, then polished by Newton.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gamma as complex_gamma

from ._arith import euler_phi, factorize, mobius_sieve
from .characters import DirichletCharacter, build_group, conductor
from .dirichlet_poly import mollifier_coefficients
from .errors import BoundaryZeroError, BudgetExceededError, InvalidInputError, NonConvergenceError

RIGHT_EDGE = 1.6
ARG_STEP = 0.5
BOUNDARY_TOL = 1e-8
MAX_RETRIES = 5
CRITICAL_SHIFT = 1e-2
IM_LIMIT = 1e4
IM_ACCURATE = 1e3

# B_2, B_4, ..., B_20
_BERNOULLI = (
    1 / 6,
    -1 / 30,
    1 / 42,
    -1 / 30,
    5 / 66,
    -691 / 2730,
    7 / 6,
    -3617 / 510,
    43867 / 798,
    -174611 / 330,
)
_EM_COEFFS = tuple(b / math.factorial(2 * k + 2) for k, b in enumerate(_BERNOULLI))


class PoleError(InvalidInputError):
    """Evaluation requested at the pole ``s = 1``."""


def _check_s(s: np.ndarray, regular: bool = False):
    big = np.abs(s.imag).max(initial=0.0)
    if big > IM_LIMIT:
        raise InvalidInputError(f"|Im s| = {big:g} exceeds {IM_LIMIT:g}")
    if big > IM_ACCURATE:
        warnings.warn(f"accuracy degraded for |Im s| = {big:g} > {IM_ACCURATE:g}", RuntimeWarning, stacklevel=3)
    if not regular and np.any(s == 1):
        raise PoleError("zeta(s, a) has a pole at s = 1")


def hurwitz_zeta_grid(s, a, regular: bool = False) -> np.ndarray:
    """``zeta(s_i, a_j)`` for arrays ``s`` (complex) and ``a`` in ``(0, 1]``; shape ``(len(s), len(a))``.

    Euler-Maclaurin: ``M`` direct terms, the integral and half-term corrections,
    then Bernoulli terms through ``B_20``.  ``M`` is chosen so that
    ``|s| + 20 <= 2 pi (M + a) / 4``, which makes every correction ratio at
    most 1/4.

    With ``regular=True`` the polar term ``x^{1-s}/(s-1)`` is replaced by
    ``(x^{1-s} - 1)/(s-1)``; combinations with zero total weight (``sum_a chi(a)``
    for nonprincipal ``chi``) are then unchanged and finite at ``s = 1``.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any((a <= 0) | (a > 1)):
        raise InvalidInputError("Hurwitz parameter a must lie in (0, 1]")
    _check_s(s, regular)
    M = max(1, math.ceil(4 * (float(np.abs(s).max()) + 20) / (2 * math.pi)))
    logbase = np.log(np.arange(M, dtype=float)[:, None] + a[None, :])  # (M, A)
    direct = np.empty((s.size, a.size), dtype=complex)
    step = max(1, int(2e6 // logbase.size))
    for i in range(0, s.size, step):
        direct[i : i + step] = np.exp(-s[i : i + step, None, None] * logbase[None]).sum(axis=1)
    x = (M + a)[None, :]
    logx = np.log(x)
    if regular:
        u = (1 - s[:, None]) * logx
        safe = np.where(u == 0, 1.0, u)
        polar = -logx * np.where(u == 0, 1.0, np.expm1(u) / safe)
    else:
        polar = np.exp((1 - s[:, None]) * logx) / (s[:, None] - 1)
    out = direct + polar + 0.5 * np.exp(-s[:, None] * logx)
    # rising factorial s (s+1) ... (s+2k) times x^{-s-2k-1}
    rising = s[:, None] * np.ones_like(x)
    power = np.exp(-(s[:, None] + 1) * logx)
    for k, c in enumerate(_EM_COEFFS):
        out = out + c * rising * power
        rising = rising * (s[:, None] + 2 * k + 1) * (s[:, None] + 2 * k + 2)
        power = power / x**2
    return out


def hurwitz_zeta(s: complex, a: float = 1.0) -> complex:
    return complex(hurwitz_zeta_grid([s], [a])[0, 0])


@lru_cache(maxsize=4096)
def _l_data(q: int, exponents: tuple) -> tuple:
    from .characters import Modulus

    chi = DirichletCharacter(Modulus.build(q), exponents)
    qs, star = conductor(chi)
    a = np.arange(1, qs + 1)
    coeff = star.at(a)
    keep = coeff != 0
    missing = tuple(p for p, _ in factorize(q) if qs % p) if q > 1 else ()
    euler = tuple((p, complex(star(p))) for p in missing)
    return qs, a[keep] / qs, coeff[keep], euler, chi.is_principal


def l_values(s, chi: DirichletCharacter) -> np.ndarray:
    """``L(s, chi)`` for an array of ``s``."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    qs, a, coeff, euler, _ = _l_data(chi.q, chi.exponents)
    val = hurwitz_zeta_grid(s, a, regular=qs > 1) @ coeff * np.exp(-s * math.log(qs))
    for p, c in euler:
        val = val * (1 - c * np.exp(-s * math.log(p)))
    return val


def l_value(s: complex, chi: DirichletCharacter) -> complex:
    return complex(l_values([s], chi)[0])


# ---------------------------------------------------------------------------
# Zero counting


@dataclass(frozen=True)
class Zero:
    beta: float
    t: float
    residual: float

    @property
    def rho(self) -> complex:
        return complex(self.beta, self.t)


class _Tracker:
    """Adaptive sampling of ``L`` along polygonal paths."""

    def __init__(self, chi: DirichletCharacter, max_points: int = 2_000_000):
        self.chi = chi
        self.evals = 0
        self.max_points = max_points

    def _eval(self, z: np.ndarray) -> np.ndarray:
        self.evals += z.size
        if self.evals > self.max_points:
            raise BudgetExceededError("argument tracking exceeded its evaluation budget")
        v = l_values(z, self.chi)
        if np.any(np.abs(v) < BOUNDARY_TOL):
            raise BoundaryZeroError("L vanishes (numerically) on the contour")
        return v

    def segment(self, z0: complex, z1: complex, h: float = 0.25):
        """Points and values along ``[z0, z1]`` with every ``|delta arg| < ARG_STEP``."""
        n = max(2, math.ceil(abs(z1 - z0) / h) + 1)
        z = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n)
        v = self._eval(z)
        for _ in range(60):
            d = np.abs(np.angle(v[1:] / v[:-1]))
            bad = np.flatnonzero(d >= ARG_STEP)
            if bad.size == 0:
                return z, v
            mid = 0.5 * (z[bad] + z[bad + 1])
            if np.min(np.abs(z[bad + 1] - z[bad])) < 1e-12:
                raise BoundaryZeroError("argument jump does not resolve; zero on or near the contour")
            vm = self._eval(mid)
            z = np.insert(z, bad + 1, mid)
            v = np.insert(v, bad + 1, vm)
        raise NonConvergenceError("edge subdivision did not converge")

    def rectangle(self, x0: float, x1: float, y0: float, y1: float):
        corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]
        zs, vs = [], []
        for c0, c1 in zip(corners, corners[1:]):
            z, v = self.segment(c0, c1)
            zs.append(z[:-1])
            vs.append(v[:-1])
        zs.append(np.array([corners[0]]))
        vs.append(vs[0][:1])
        return np.concatenate(zs), np.concatenate(vs)


def _winding_and_moment(z: np.ndarray, v: np.ndarray) -> tuple[int, complex]:
    dlog = np.log(np.abs(v[1:] / v[:-1])) + 1j * np.angle(v[1:] / v[:-1])
    total = dlog.sum() / (2j * math.pi)
    wind = int(round(total.real))
    moment = complex(((z[1:] + z[:-1]) / 2 * dlog).sum() / (2j * math.pi))
    return wind, moment


def _left_edge(sigma: float) -> float:
    # zeros on the critical line sit exactly on the edge when sigma = 1/2
    return sigma - CRITICAL_SHIFT if sigma <= 0.5 else sigma


def _poles_inside(chi, x0, y0, y1) -> int:
    return int(chi.is_principal and x0 < 1 < RIGHT_EDGE and y0 < 0 < y1)


def _newton(chi, z: complex, tol: float = 1e-13, max_iter: int = 40) -> tuple[complex, float]:
    h = 1e-6
    for _ in range(max_iter):
        f, fp, fm = l_values([z, z + h, z - h], chi)
        d = (fp - fm) / (2 * h)
        if d == 0:
            break
        step = f / d
        z = z - step
        if abs(step) < tol * max(1.0, abs(z)):
            break
    return z, abs(l_value(z, chi))


def _locate(tr: _Tracker, chi, x0, x1, y0, y1, count: int, out: list, depth: int = 0):
    if count <= 0:
        return
    if count == 1:
        z, v = tr.rectangle(x0, x1, y0, y1)
        _, mom = _winding_and_moment(z, v)
        guess = mom + _poles_inside(chi, x0, y0, y1)
        root, res = _newton(chi, guess)
        if not (x0 - 1e-6 <= root.real <= x1 and y0 - 1e-6 <= root.imag <= y1 + 1e-6):
            root, res = guess, abs(l_value(guess, chi))
        out.append(Zero(float(root.real), float(root.imag), float(res)))
        return
    if depth > 60:
        raise NonConvergenceError("could not separate zeros")
    ym = 0.5 * (y0 + y1)
    for attempt in range(MAX_RETRIES):
        try:
            z, v = tr.rectangle(x0, x1, y0, ym)
            break
        except BoundaryZeroError:
            ym += 1e-3 * (y1 - y0) * (attempt + 1) / 7
    else:
        raise BoundaryZeroError("could not place a strip cut away from zeros")
    lower = _winding_and_moment(z, v)[0] + _poles_inside(chi, x0, y0, ym)
    _locate(tr, chi, x0, x1, y0, ym, lower, out, depth + 1)
    _locate(tr, chi, x0, x1, ym, y1, count - lower, out, depth + 1)


def count_zeros(sigma: float, T: float, chi: DirichletCharacter, locate: bool = True, right: float = RIGHT_EDGE, max_T: float = 1e3):
    """``N(sigma, T, chi)`` and (optionally) the located zeros, sorted by ordinate."""
    # the counting contour stays inside Re s > 0, clear of Euler-factor zeros
    if not 0 < sigma < 1:
        raise InvalidInputError("sigma must lie in (0, 1)")
    if not 0 < T <= max_T:
        raise BudgetExceededError(f"T must lie in (0, {max_T:g}]")
    x0 = _left_edge(sigma)
    for attempt in range(MAX_RETRIES + 1):
        TT = T + 1e-3 * attempt
        tr = _Tracker(chi)
        try:
            z, v = tr.rectangle(x0, right, -TT, TT)
            wind, _ = _winding_and_moment(z, v)
            count = wind + _poles_inside(chi, x0, -TT, TT)
            zeros: list[Zero] = []
            if locate and count:
                _locate(tr, chi, x0, right, -TT, TT, count, zeros)
            zeros.sort(key=lambda r: r.t)
            return count, zeros
        except BoundaryZeroError:
            if attempt == MAX_RETRIES:
                raise
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Density scans


@dataclass
class ZeroReport:
    q: int
    T: float
    sigma_grid: list[float]
    counts: dict = field(default_factory=dict)
    zero_list: dict = field(default_factory=dict)

    @property
    def totals(self) -> list[int]:
        return [sum(v for (s, _), v in self.counts.items() if s == sig) for sig in self.sigma_grid]

    def predictions(self) -> dict:
        qT = self.q * self.T
        return {
            "corollary": [qT ** (7 * (1 - s) / 3) for s in self.sigma_grid],
            "theorem": [qT ** (4 * (1 - s) / (1 + s)) for s in self.sigma_grid],
        }

    @property
    def exponents(self) -> list[float | None]:
        lq = math.log(self.q * self.T)
        return [math.log(t) / lq if t > 0 else None for t in self.totals]

    def as_dict(self) -> dict:
        pred = self.predictions()
        return {
            "q": self.q,
            "T": self.T,
            "sigma": list(self.sigma_grid),
            "totals": self.totals,
            "exponents": self.exponents,
            "prediction_corollary": pred["corollary"],
            "prediction_theorem": pred["theorem"],
            "ratio_theorem": [t / p for t, p in zip(self.totals, pred["theorem"])],
            "counts": [[s, i, c] for (s, i), c in sorted(self.counts.items())],
        }


def density_scan(q: int, T: float, sigma_grid, max_q: int = 20, max_T: float = 200, locate: bool = False) -> ZeroReport:
    if q > max_q or T > max_T:
        raise BudgetExceededError(f"density scan budget is q <= {max_q}, T <= {max_T}")
    grid = sorted(float(s) for s in sigma_grid)
    _, chars = build_group(q)
    rep = ZeroReport(q, float(T), grid)
    for sig in grid:
        for chi in chars:
            c, zs = count_zeros(sig, T, chi, locate=locate)
            rep.counts[(sig, chi.index)] = c
            if zs:
                rep.zero_list[(sig, chi.index)] = zs
    return rep


# ---------------------------------------------------------------------------
# Mollifier and zero classification


@dataclass(frozen=True)
class MollifierSpec:
    X: float
    Y: float

    @property
    def n_max(self) -> int:
        return int(math.floor(self.Y * math.log(self.Y) ** 2))

    def coefficients(self, n_max: int | None = None) -> np.ndarray:
        return mollifier_coefficients(self.X, self.n_max if n_max is None else n_max)


def mollifier_value(s, chi: DirichletCharacter, X: float) -> np.ndarray:
    """``M_X(s, chi) = sum_{d <= X} mu(d) chi(d) d^{-s}``."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    d = np.arange(1, int(math.floor(X)) + 1)
    mu = mobius_sieve(int(d[-1]))[d]
    c = mu * chi.at(d)
    return np.exp(-np.outer(s, np.log(d))) @ c


def mollifier_tail(X: float, Y: float) -> float:
    """``sum_{n > Y log^2 Y} |c_n| n^{-1/2} e^{-n/Y}``, summed until the weight is negligible."""
    start = int(math.floor(Y * math.log(Y) ** 2))
    stop = int(start + 60 * Y)
    c = mollifier_coefficients(X, stop)
    n = np.arange(start + 1, stop + 1)
    return float((np.abs(c[n]) * n**-0.5 * np.exp(-n / Y)).sum())


def classify_zero(
    rho: complex,
    chi: DirichletCharacter,
    X: float,
    Y: float,
    T: float,
    threshold: float = 0.5,
    step: float = 0.05,
    low_height: float = 1.0,
) -> dict:
    """Class-I partial sum and class-II critical-line integral at a zero ``rho``.

    The class-II integrand has ``Gamma(1/2 - beta + iu)``, which for
    critical-line zeros has a pole at ``u = 0`` cancelled by the zero of
    ``L``; a midpoint rule never samples ``u = 0``.  Zeros with
    ``|t| < low_height * log(qT)``, or where the principal-character residue
    term reaches 1/6, are flagged as outside the dichotomy.
    """
    if X < 2 or Y < 2 or T < 2:
        raise InvalidInputError("X, Y, T must be at least 2")
    beta, t = rho.real, rho.imag
    spec = MollifierSpec(X, Y)
    c = spec.coefficients()
    n = np.arange(math.floor(X) + 1, spec.n_max + 1)
    terms = c[n] * chi.at(n) * np.exp(-rho * np.log(n) - n / Y)
    class1 = complex(terms.sum())
    L2 = math.log(T) ** 2
    k = math.ceil(2 * L2 / step)
    u = -L2 + (np.arange(k) + 0.5) * (2 * L2 / k)
    s = 0.5 + 1j * (t + u)
    z = 0.5 - beta + 1j * u
    integrand = l_values(s, chi) * mollifier_value(s, chi, X) * np.exp(z * math.log(Y)) * complex_gamma(z)
    class2 = complex(integrand.sum() * (2 * L2 / k))
    principal_term = 0.0
    if chi.is_principal:
        m1 = complex(mollifier_value([1.0], chi, X)[0])
        qv = chi.q
        principal_term = abs(euler_phi(qv) / qv * m1 * Y ** (1 - rho) * complex_gamma(1 - rho))
    return {
        "rho": rho,
        "class1_magnitude": abs(class1),
        "class2_magnitude": abs(class2),
        "classI": bool(abs(class1) >= threshold),
        "classII": bool(abs(class2) >= threshold),
        "principal_term": principal_term,
        "outside_dichotomy": bool(principal_term >= 1 / 6 or abs(t) < low_height * math.log(chi.q * T)),
    }
