"""The bump ``w``, the kernel transforms ``h_t^`` and Dirichlet polynomial evaluation.

``h_t^(xi) = int w(u)^2 u^{it} e(-xi u) du`` is computed in one of two ways.

* Real line: composite Gauss-Legendre with panel breaks at the plateau edges,
  doubling the node count until two refinements agree.
* Contour: when ``xi`` is large compared to ``t`` the transform is smaller than
  double precision can resolve on the real line.  We integrate by parts against
  an antiderivative ``Psi`` of ``u^{it} e(-xi u)`` (a Laplace integral, done by
  Gauss-Laguerre), then push each transition interval of ``w`` into the lower
  half plane along ``u0 + a*tau - i*a*tau*(1 - tau)``.  This path leaves the real
  axis at angle -pi/4, which is where the saddle of ``exp(-1/x - i c x)`` sits.
  Everything is accumulated in the log domain so ``log|h^|`` survives underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss
from scipy.special import expit

from ._arith import mobius_sieve
from .characters import DirichletCharacter
from .errors import BudgetExceededError, InvalidInputError, NonConvergenceError

TWO_PI = 2.0 * math.pi


DEFAULT_SHARPNESS = 1.6


def glue(x, c: float = 1.0):
    """C-infinity step ``phi(x) / (phi(x) + phi(1-x))`` with ``phi(x) = exp(-c/x)``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 1.0, 1.0, 0.0)
    inside = (x > 0.0) & (x < 1.0)
    xi = x[inside]
    out[inside] = expit(-c * (1.0 / xi - 1.0 / (1.0 - xi)))
    return out


@dataclass(frozen=True)
class PlateauBump:
    """Smooth bump supported on ``[lo, hi]`` and equal to one on ``[flat_lo, flat_hi]``.

    ``sharpness`` is the constant ``c`` in the glue ``exp(-c/x)``.  The default
    1.6 was picked by scanning ``max_{t >= 500} |h_t^(0)|``; with ``c = 1`` that
    maximum is about 2.7e-6, with ``c = 1.6`` it is about 3.9e-7.
    """

    lo: float = 1.0
    flat_lo: float = 1.2
    flat_hi: float = 1.8
    hi: float = 2.0
    sharpness: float = DEFAULT_SHARPNESS

    def __post_init__(self):
        if not self.lo < self.flat_lo <= self.flat_hi < self.hi:
            raise InvalidInputError("bump breakpoints must satisfy lo < flat_lo <= flat_hi < hi")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        left = glue((u - self.lo) / (self.flat_lo - self.lo), self.sharpness)
        right = glue((self.hi - u) / (self.hi - self.flat_hi), self.sharpness)
        out = np.minimum(left, right)
        return out if out.ndim else float(out)

    @property
    def panels(self) -> tuple[tuple[float, float], ...]:
        return ((self.lo, self.flat_lo), (self.flat_lo, self.flat_hi), (self.flat_hi, self.hi))

    def integrate(self, f, order: int = 64, pieces: int = 8) -> float:
        """``int f(u) du`` over the support, ``f`` vectorized."""
        x, wts = leggauss(order)
        total = 0.0
        for a, b in self.panels:
            edges = np.linspace(a, b, pieces + 1)
            for lo, hi in zip(edges[:-1], edges[1:]):
                u = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
                total += 0.5 * (hi - lo) * np.dot(wts, f(u))
        return float(total)

    @cached_property
    def norm2(self) -> float:
        """``||w||^2 = int w^2``."""
        return self.integrate(lambda u: self(u) ** 2)


BumpW = PlateauBump
W_BUMP = PlateauBump()


def bump_w(u):
    return W_BUMP(u)


@dataclass(frozen=True)
class KernelEval:
    t: float
    xi: float
    value: complex
    quadrature_error_estimate: float
    log_abs: float
    method: str


def _softplus(z):
    """Complex ``log(1 + e^z)`` on some branch; only its exponential matters."""
    z = np.asarray(z, dtype=complex)
    big = z.real > 0
    return np.where(big, z + np.log1p(np.exp(-np.where(big, z, 0))), np.log1p(np.exp(np.where(big, 0, z))))


def _log_g_prime(x, a, c):
    """log of ``d/du w(u)^2`` on a left transition, with ``x = (u - lo)/a`` complex."""
    E = c * (1.0 / x - 1.0 / (1.0 - x))
    sp = _softplus(E)
    log_s = -sp
    log_1ms = E - sp
    log_mEp = np.log(c * (1.0 / x**2 + 1.0 / (1.0 - x) ** 2))
    return math.log(2.0 / a) + 2.0 * log_s + log_1ms + log_mEp


@lru_cache(maxsize=None)
def _laguerre(n):
    x, w = laggauss(n)
    return x, np.log(w)


@lru_cache(maxsize=None)
def _path_rule(per_panel: int, tau_min: float = 1e-5, ratio: float = 1.1):
    """Nodes and weights on ``[0, 1]`` with panels graded geometrically toward both ends."""
    n_half = int(math.ceil(math.log(0.5 / tau_min) / math.log(ratio)))
    half = np.concatenate(([0.0], tau_min * ratio ** np.arange(n_half)))
    half[-1] = 0.5
    edges = np.concatenate((half, 1.0 - half[-2::-1]))
    x, w = leggauss(per_panel)
    lo, hi = edges[:-1], edges[1:]
    nodes = (0.5 * (hi - lo)[:, None] * x + 0.5 * (hi + lo)[:, None]).ravel()
    weights = (0.5 * (hi - lo)[:, None] * w).ravel()
    return nodes, weights


def _log_psi(u, t, xi, n_lag):
    """log of the antiderivative ``Psi`` of ``u^{it} e(-xi u)`` that decays as ``Im u -> -inf``."""
    c = TWO_PI * xi
    base = np.log(1j / c) - 1j * c * u
    if t == 0:
        return base
    x, logw = _laguerre(n_lag)
    z = u[:, None] - 1j * x[None, :] / c
    terms = logw[None, :] + 1j * t * np.log(z)
    m = terms.real.max(axis=1, keepdims=True)
    return base + m[:, 0] + np.log(np.exp(terms - m).sum(axis=1))


def _contour_sum(bump: PlateauBump, t, xi, per_panel, n_lag, kappa=1.0):
    """Returns ``(shift, S)`` with ``h^ = -S * exp(shift)``."""
    tau, wts = _path_rule(per_panel)
    logs = []
    for side in ("left", "right"):
        if side == "left":
            a = bump.flat_lo - bump.lo
            u = bump.lo + a * tau - 1j * a * kappa * tau * (1 - tau)
            x = (u - bump.lo) / a
            sign = 1.0
        else:
            a = bump.hi - bump.flat_hi
            u = bump.flat_hi + a * tau - 1j * a * kappa * tau * (1 - tau)
            x = (bump.hi - u) / a
            sign = -1.0
        du = a - 1j * a * kappa * (1 - 2 * tau)
        L = _log_g_prime(x, a, bump.sharpness) + _log_psi(u, t, xi, n_lag) + np.log(sign * du) + np.log(wts)
        logs.append(L)
    L = np.concatenate(logs)
    shift = float(L.real.max())
    return shift, complex(np.exp(L - shift).sum())


def _use_contour(t, xi) -> bool:
    return xi > 0 and TWO_PI * xi >= 2.0 * max(t, 0.0) + 20.0


def _h_hat_contour(bump, t, xi) -> KernelEval:
    shift, S = _contour_sum(bump, t, xi, 16, 48)
    shift2, S2 = _contour_sum(bump, t, xi, 8, 32)
    S2 *= math.exp(shift2 - shift)
    abs_s = abs(S)
    log_abs = shift + math.log(abs_s) if abs_s > 0 else -math.inf
    rel = abs(S - S2) / abs_s if abs_s > 0 else 0.0
    value = -S * math.exp(shift)
    err = rel * math.exp(log_abs)
    if err > 1e-8:
        raise NonConvergenceError(f"contour quadrature for h^({t}, {xi}) unstable (error {err:.3g})")
    return KernelEval(t, xi, complex(value), err, log_abs, "contour")


@lru_cache(maxsize=64)
def _legendre(order):
    return leggauss(order)


def _real_line_nodes(bump: PlateauBump, total: int, order: int = 32):
    x, w = _legendre(order)
    width = bump.hi - bump.lo
    us, ws = [], []
    for a, b in bump.panels:
        pieces = max(1, math.ceil(total * (b - a) / width / order))
        edges = np.linspace(a, b, pieces + 1)
        lo, hi = edges[:-1], edges[1:]
        us.append((0.5 * (hi - lo)[:, None] * x + 0.5 * (hi + lo)[:, None]).ravel())
        ws.append((0.5 * (hi - lo)[:, None] * w).ravel())
    u = np.concatenate(us)
    return u, np.concatenate(ws) * bump(u) ** 2


def _h_hat_real(bump, t, xi, tol=1e-9, fail=1e-8, max_doublings=8) -> KernelEval:
    n = max(32, 8 * math.ceil(abs(t) + abs(xi)))
    u, gw = _real_line_nodes(bump, n)
    prev = complex(np.dot(gw, np.exp(1j * (t * np.log(u) - TWO_PI * xi * u))))
    for _ in range(max_doublings):
        n *= 2
        u, gw = _real_line_nodes(bump, n)
        cur = complex(np.dot(gw, np.exp(1j * (t * np.log(u) - TWO_PI * xi * u))))
        err = abs(cur - prev)
        if err <= tol:
            break
        prev = cur
    if err > fail:
        raise NonConvergenceError(f"h^({t}, {xi}): refinements disagree by {err:.3g}")
    la = math.log(abs(cur)) if cur != 0 else -math.inf
    return KernelEval(t, xi, cur, err, la, "real-line")


def h_hat(t: float, xi: float, bump: PlateauBump = W_BUMP) -> KernelEval:
    """``int w(u)^2 u^{it} e(-xi u) du`` with an error estimate and ``log|value|``."""
    t, xi = float(t), float(xi)
    if abs(t) > 1e6 or abs(xi) > 1e8:
        raise InvalidInputError("h_hat requires |t| <= 1e6 and |xi| <= 1e8")
    return _h_hat_cached(t, xi, bump)


@lru_cache(maxsize=1 << 16)
def _h_hat_cached(t, xi, bump) -> KernelEval:
    if _use_contour(t, xi):
        return _h_hat_contour(bump, t, xi)
    if _use_contour(-t, -xi):
        r = _h_hat_contour(bump, -t, -xi)
        return KernelEval(t, xi, r.value.conjugate(), r.quadrature_error_estimate, r.log_abs, r.method)
    return _h_hat_real(bump, t, xi)


def h_hat_value(t: float, xi: float, bump: PlateauBump = W_BUMP) -> complex:
    return h_hat(t, xi, bump).value


# ---------------------------------------------------------------------------
# Dirichlet polynomials


def mollifier_coefficients(X: float, n_max: int) -> np.ndarray:
    """``c[n] = sum_{d | n, d <= X} mu(d)`` for ``0 <= n <= n_max`` (``c[0] = 0``)."""
    n_max = int(n_max)
    c = np.zeros(n_max + 1, dtype=np.int64)
    D = min(int(math.floor(X)), n_max)
    if D < 1:
        return c
    mu = mobius_sieve(D)
    for d in range(1, D + 1):
        if mu[d]:
            c[d::d] += mu[d]
    return c


@dataclass(frozen=True)
class PolySpec:
    """A Dirichlet polynomial of length scale ``N``.

    ``coeff_source`` is one of ``"one"``, ``"random"`` (unimodular, seeded),
    ``"explicit"`` (``coeffs[k]`` is ``a_{k+1}``) or ``"mollifier"`` (``c_n`` with
    cutoff ``X``).  Raw polynomials run over ``N < n <= 2N``; smoothed ones weight
    by ``w(n/N)`` over ``N <= n <= 2N``.
    """

    N: float
    coeff_source: str = "one"
    smoothed: bool = False
    seed: int = 0
    coeffs: tuple = ()
    X: float = 1.0
    bump: PlateauBump = field(default=W_BUMP, repr=False)

    def __post_init__(self):
        if not self.N >= 1:
            raise InvalidInputError(f"N must be >= 1, got {self.N}")
        if self.coeff_source not in ("one", "random", "explicit", "mollifier"):
            raise InvalidInputError(f"unknown coefficient source {self.coeff_source!r}")
        if self.coeff_source == "explicit" and any(abs(c) > 1 + 1e-12 for c in self.coeffs):
            raise InvalidInputError("explicit coefficients must satisfy |a_n| <= 1")

    @cached_property
    def n(self) -> np.ndarray:
        N = self.N
        if self.smoothed:
            return np.arange(math.ceil(N), math.floor(2 * N) + 1)
        return np.arange(math.floor(N) + 1, math.floor(2 * N) + 1)

    @cached_property
    def log_n(self) -> np.ndarray:
        return np.log(self.n)

    def coefficients(self, n) -> np.ndarray:
        n = np.asarray(n)
        src = self.coeff_source
        if src == "one":
            return np.ones(n.shape, dtype=complex)
        if src == "random":
            top = int(math.floor(2 * self.N))
            phases = np.random.default_rng(self.seed).random(top + 1)
            return np.exp(TWO_PI * 1j * phases[n])
        if src == "explicit":
            arr = np.zeros(int(n.max(initial=0)) + 1, dtype=complex)
            k = min(len(self.coeffs), len(arr) - 1)
            arr[1 : k + 1] = np.asarray(self.coeffs[:k], dtype=complex)
            return arr[n]
        c = mollifier_coefficients(self.X, int(n.max(initial=1)))
        return c[n].astype(complex)

    @cached_property
    def weights(self) -> np.ndarray:
        """Coefficient times smoothing weight at each ``n`` of the window."""
        c = self.coefficients(self.n)
        if self.smoothed:
            c = c * self.bump(self.n / self.N)
        return c


def eval_poly(spec: PolySpec, chi: DirichletCharacter, t: float) -> complex:
    """``sum_n a_n [w(n/N)] chi(n) n^{it}`` over the window, one term at a time."""
    total = 0j
    vals = chi.values
    for n, c, ln in zip(spec.n.tolist(), spec.weights.tolist(), spec.log_n.tolist()):
        x = vals[n % chi.q]
        if x != 0 and c != 0:
            total += c * x * complex(math.cos(t * ln), math.sin(t * ln))
    return total


def eval_grid(
    spec: PolySpec,
    characters: Sequence[DirichletCharacter],
    t_grid,
    memory_budget: float = 2e9,
    chunk: int = 256,
) -> np.ndarray:
    """Values at every (character, t) pair; rows follow ``characters``, columns ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1:
        raise InvalidInputError("t_grid must be one-dimensional")
    if t.size > 1 and np.any(np.diff(t) < 0):
        raise InvalidInputError("t_grid must be sorted ascending")
    nn = spec.n.size
    need = 16.0 * (len(characters) * (t.size + nn) + min(chunk, max(t.size, 1)) * nn)
    if need > memory_budget:
        raise BudgetExceededError(f"eval_grid needs about {need:.3g} bytes (budget {memory_budget:.3g})")
    C = np.array([chi.at(spec.n) for chi in characters]) * spec.weights if characters else np.zeros((0, nn))
    out = np.empty((len(characters), t.size), dtype=complex)
    for s in range(0, t.size, chunk):
        tc = t[s : s + chunk]
        out[:, s : s + chunk] = C @ np.exp(1j * np.outer(spec.log_n, tc))
    return out
