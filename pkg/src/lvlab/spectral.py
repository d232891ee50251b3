"""The matrix ``M_W``, its Gram matrix, trace identities, the lattice sums ``I_m`` and ``J(f)``.

``M`` has rows indexed by ``(t, chi) in W`` and columns by integers ``n`` with
entries ``w(n/N) chi(n) n^{it}``.  Poisson summation in ``n`` turns every entry
of ``G = M M*`` into a lattice sum of kernel values, so ``tr(G^3)`` splits as a
sum of terms ``I_m`` over integer triples ``m``; this module computes both
sides and reports how they reconcile.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._arith import euler_phi
from .dirichlet_poly import W_BUMP, PlateauBump, h_hat_value
from .errors import BudgetExceededError, InvalidInputError, NonConvergenceError
from .large_values import PointSet

MAX_W = 64
MAX_N = 10**4


# ---------------------------------------------------------------------------
# Gram matrix and singular value


@dataclass(frozen=True)
class SingularValue:
    value: float
    iterations: int
    converged: bool
    residual: float


def largest_singular_value(G, tol: float = 1e-10, max_iter: int = 10_000) -> SingularValue:
    """``sqrt(lambda_max(G))`` by power iteration from the normalized all-ones vector.

    A second, deterministic start vector is always run as well and the larger
    Rayleigh quotient kept: all-ones can be an eigenvector for a smaller
    eigenvalue, in which case the first run stagnates there.  A final
    Rayleigh-Ritz step on the last Krylov vectors of both runs resolves nearly
    degenerate top eigenvalues, where the Rayleigh quotient stalls between them.
    """
    G = np.asarray(G, dtype=complex)
    k = G.shape[0]
    if G.shape != (k, k):
        raise InvalidInputError("G must be square")
    if k == 0:
        return SingularValue(0.0, 0, True, 0.0)
    scale = float(np.abs(np.diag(G)).max()) or 1.0

    def run(x):
        x = x / np.linalg.norm(x)
        lam = float(np.vdot(x, G @ x).real)
        for it in range(1, max_iter + 1):
            y = G @ x
            ny = np.linalg.norm(y)
            if ny == 0:
                return 0.0, x, it, True
            x = y / ny
            new = float(np.vdot(x, G @ x).real)
            if abs(new - lam) <= tol * max(abs(new), 1e-300):
                return new, x, it, True
            lam = new
        return lam, x, max_iter, False

    lam, x, its, ok = run(np.ones(k, dtype=complex))
    alt = np.exp(1j * np.arange(k) * 0.7) + np.arange(1, k + 1) / k
    lam2, x2, its2, ok2 = run(alt)
    its += its2
    if lam2 > lam * (1 + 1e-12):
        lam, x, ok = lam2, x2, ok2
    basis = np.column_stack([x, x2, G @ x, G @ x2, G @ (G @ x)])
    basis = basis / np.linalg.norm(basis, axis=0).clip(1e-300)
    U, sv, _ = np.linalg.svd(basis, full_matrices=False)
    Q = U[:, sv > 1e-10 * sv[0]]
    vals, vecs = np.linalg.eigh(Q.conj().T @ G @ Q)
    if vals[-1] > lam:
        lam, x = float(vals[-1]), Q @ vecs[:, -1]
    res = float(np.linalg.norm(G @ x - lam * x)) / scale
    return SingularValue(math.sqrt(max(lam, 0.0)), its, ok, res)


@dataclass(frozen=True, eq=False)
class GramData:
    W: PointSet
    N: float
    G: np.ndarray
    bump: PlateauBump = field(default=W_BUMP, repr=False)

    @property
    def size(self) -> int:
        return self.G.shape[0]

    @property
    def tr_G(self) -> float:
        return float(np.trace(self.G).real)

    @property
    def tr_G3(self) -> float:
        G2 = self.G @ self.G
        return float(np.einsum("ij,ji->", G2, self.G).real)

    @property
    def s1(self) -> SingularValue:
        return largest_singular_value(self.G)

    def min_eig(self) -> float:
        return float(np.linalg.eigvalsh(self.G).min())


def gram_columns(N: float) -> np.ndarray:
    return np.arange(math.ceil(N), math.floor(2 * N) + 1)


def build_gram(W: PointSet, N: float, bump: PlateauBump = W_BUMP, chunk: int = 4096, max_w: int = MAX_W, max_n: float = MAX_N) -> GramData:
    """``G = M M*`` accumulated over column blocks, so ``M`` is never held whole."""
    if len(W) > max_w or N > max_n:
        raise BudgetExceededError(f"Gram budget is |W| <= {max_w}, N <= {max_n}")
    n = gram_columns(N)
    k = len(W)
    G = np.zeros((k, k), dtype=complex)
    for s in range(0, n.size, chunk):
        nc = n[s : s + chunk]
        Mc = W.chi_at(nc) * bump(nc / N) * np.exp(1j * np.outer(W.t, np.log(nc)))
        G += Mc @ Mc.conj().T
    G = 0.5 * (G + G.conj().T)
    return GramData(W, float(N), G, bump)


# ---------------------------------------------------------------------------
# Lattice sums


def lattice_cutoff(q: int, T: float, N: float, eps: float) -> int:
    return math.ceil((q * T) ** eps * q * T / N)


def char_sum_matrix(W: PointSet, m: int) -> np.ndarray:
    """``K_ij(m) = sum_a chi_i conj(chi_j)(a) e(am/q)``."""
    q = W.q
    C = W.char_table
    return (C * np.exp(2j * np.pi * np.arange(q) * m / q)) @ C.conj().T


def kernel_matrix(W: PointSet, N: float, m: int, bump: PlateauBump = W_BUMP) -> np.ndarray:
    """``h^_{t_i - t_j}(N m / q)`` for every ordered pair."""
    t = W.t
    xi = N * m / W.q
    k = len(W)
    H = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            H[i, j] = h_hat_value(float(t[i] - t[j]), xi, bump)
    return H


@dataclass(frozen=True)
class LatticeTermIm:
    m: tuple[int, int, int]
    value: complex
    kernels: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    char_sums: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)
    scale: float = 1.0

    def recompute(self) -> complex:
        A = [K * H for K, H in zip(self.char_sums, self.kernels)]
        return self.scale * complex(np.trace(A[0] @ A[1] @ A[2]))


def _check_im_budget(W: PointSet, max_q: int, max_w: int):
    if W.q > max_q or len(W) > max_w:
        raise BudgetExceededError(f"I_m budget is q <= {max_q}, |W| <= {max_w}")


def compute_Im(W: PointSet, N: float, m: Sequence[int], bump: PlateauBump = W_BUMP, max_q: int = 30, max_w: int = 20) -> LatticeTermIm:
    """One lattice term ``I_m``.

    The sum over ``(a1, a2, a3)`` factors as ``K_12(m1) K_23(m2) K_31(m3)``, so
    ``I_m = (N/q)^3 tr(A(m1) A(m2) A(m3))`` with ``A = K * h^`` entrywise.
    """
    _check_im_budget(W, max_q, max_w)
    m = tuple(int(x) for x in m)
    if len(m) != 3:
        raise InvalidInputError("m must be a triple")
    K = tuple(char_sum_matrix(W, x) for x in m)
    H = tuple(kernel_matrix(W, N, x, bump) for x in m)
    term = LatticeTermIm(m, 0j, H, K, (N / W.q) ** 3)
    return LatticeTermIm(m, term.recompute(), H, K, term.scale)


@dataclass(frozen=True)
class Decomposition:
    I0: complex
    S1: complex
    S2: complex
    S3: complex
    tr_G3: float
    cutoff: int
    counts: dict
    ratios: dict

    @property
    def residual(self) -> float:
        return self.tr_G3 - (self.I0 + self.S1 + self.S2 + self.S3).real

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / abs(self.tr_G3) if self.tr_G3 else abs(self.residual)


def lattice_terms(W: PointSet, N: float, L: int, bump: PlateauBump = W_BUMP, max_q: int = 30, max_w: int = 20, max_terms: int = 10**6) -> np.ndarray:
    """``I_m`` for all ``m in [-L, L]^3`` as an array indexed ``[m1+L, m2+L, m3+L]``."""
    _check_im_budget(W, max_q, max_w)
    side = 2 * L + 1
    if side**3 > max_terms:
        raise BudgetExceededError(f"lattice has {side**3} terms (budget {max_terms})")
    ms = range(-L, L + 1)
    A = np.array([char_sum_matrix(W, m) * kernel_matrix(W, N, m, bump) for m in ms])
    P = np.einsum("xij,yjk->xyik", A, A)
    return (N / W.q) ** 3 * np.einsum("xyik,zki->xyz", P, A)


def bucket_bounds(q: float, T: float, N: float, size: int, sigma: float, k: int = 4) -> dict:
    qT = q * T
    return {
        "S1B": q * N * size,
        "S2B": q**2 * size / N + qT * N * size ** (2 - 1 / k) + N**2 * size**2 + N**2 * size**2 * (qT**0.5 / size**0.75) ** (1 / k),
        "S3bound": qT**2 * size**1.5
        + qT * size * N ** (3 - 2 * sigma)
        + qT * size**2 * N ** (1.5 - sigma)
        + qT ** (9 / 8)
        + size ** (29 / 16) * N ** (1.5 - sigma),
    }


def decompose_S(gram: GramData, eps: float = 0.05, sigma: float | None = None, cutoff: int | None = None, **budget) -> Decomposition:
    """Split ``tr(G^3)`` into ``I_0`` and buckets by the number of nonzero ``m_i``."""
    W, N = gram.W, gram.N
    L = lattice_cutoff(W.q, W.T, N, eps) if cutoff is None else cutoff
    I = lattice_terms(W, N, L, gram.bump, **budget)
    r = np.arange(-L, L + 1)
    nz = (r[:, None, None] != 0).astype(int) + (r[None, :, None] != 0) + (r[None, None, :] != 0)
    buckets = [complex(I[nz == j].sum()) for j in range(4)]
    counts = {f"S{j}" if j else "I0": int((nz == j).sum()) for j in range(4)}
    sigma = W.sigma if sigma is None else sigma
    sigma = 0.75 if sigma is None else sigma
    bounds = bucket_bounds(W.q, W.T, N, len(W), sigma)
    ratios = {
        "S1": abs(buckets[1]) / bounds["S1B"],
        "S2": abs(buckets[2]) / bounds["S2B"],
        "S3": abs(buckets[3]) / bounds["S3bound"],
    }
    return Decomposition(*buckets, gram.tr_G3, L, counts, ratios)


# ---------------------------------------------------------------------------
# Trace identities


def trace_identities(gram: GramData, eps: float = 0.05, decomposition: Decomposition | None = None) -> dict:
    W, N = gram.W, gram.N
    q, size = W.q, len(W)
    phi = euler_phi(q)
    w2 = gram.bump.norm2
    tr, tr3 = gram.tr_G, gram.tr_G3
    main1 = phi * N * size * w2 / q
    main3 = phi**3 * N**3 * size * w2**3 / q**3
    s1 = gram.s1
    spread = max(tr3 - tr**3 / size**2, 0.0) if size else 0.0
    lsvt_minus = 2 * spread ** (1 / 6) - 2 * (tr / size) ** 0.5 if size else 0.0
    lsvt_plus = 2 * spread ** (1 / 6) + 2 * (tr / size) ** 0.5 if size else 0.0
    out = {
        "tr_G": tr,
        "est1_main": main1,
        "est1_residual": tr - main1,
        "est1_budget": q * size / N ** (1 - eps),
        "tr_G3": tr3,
        "est3_main": main3,
        "jensen_ok": tr3 * size**2 >= tr**3 * (1 - 1e-12),
        "s1": s1.value,
        "s1_converged": s1.converged,
        "lsvt_minus_rhs": lsvt_minus,
        "lsvt_plus_rhs": lsvt_plus,
        "lsvt_plus_ok": s1.value <= lsvt_plus * (1 + 1e-9),
    }
    if decomposition is not None:
        d = decomposition
        out.update(
            {
                "I0": d.I0,
                "S1": d.S1,
                "S2": d.S2,
                "S3": d.S3,
                "lattice_residual": d.residual,
                "lattice_relative_residual": d.relative_residual,
                "cutoff": d.cutoff,
            }
        )
    return out


def rtls_check(W: PointSet, N: float, sigma: float, s1: float, slack: float = 2.0) -> dict:
    """``|W| <= 36 N^{1-2 sigma} s1^2`` with the given slack factor."""
    bound = 36 * slack * N ** (1 - 2 * sigma) * s1**2
    return {"size": len(W), "bound": bound, "ok": len(W) <= bound}


# ---------------------------------------------------------------------------
# Affine sums with gcd twists


@dataclass(frozen=True, eq=False)
class AffineSumSpec:
    """``f_b`` for each coprime residue ``b`` (in increasing order), all supported in ``[-support, support]``.

    ``feature`` is the shortest length scale on which the profiles vary; it
    sets the quadrature panel width after the affine change of variable.
    """

    q: int
    M: float
    profiles: tuple[Callable, ...]
    support: float = 1.0
    feature: float = 0.25
    max_work: float = 3e8

    def __post_init__(self):
        if self.q < 1 or self.M <= 1:
            raise InvalidInputError("need q >= 1 and M > 1")
        if len(self.profiles) != euler_phi(self.q):
            raise InvalidInputError(f"need one profile per coprime residue ({euler_phi(self.q)})")

    @property
    def residues(self) -> np.ndarray:
        return np.array([b for b in range(1, self.q + 1) if math.gcd(b, self.q) == 1])


def dyadic_scales(M: float) -> list[int]:
    out, s = [], 1
    while s < M:
        out.append(s)
        s *= 2
    return out


def affine_terms(M1: int, M2: int, M3: int) -> np.ndarray:
    m1 = np.array([m for m in range(-2 * M1, 2 * M1 + 1) if M1 < abs(m) <= 2 * M1])
    m2 = np.arange(M2 + 1, 2 * M2 + 1)
    m3 = np.arange(-M3, M3 + 1)
    return np.array(list(itertools.product(m1, m2, m3)), dtype=np.int64)


def _j_cell(spec: AffineSumSpec, terms: np.ndarray, tol: float = 1e-9) -> float:
    q, s = spec.q, spec.support
    a = spec.residues
    b = spec.residues
    m1, m2, m3 = terms.T.astype(float)
    # gcd weights [a, b, term]
    G = np.gcd(
        (a[:, None, None] * terms[None, None, :, 0] + b[None, :, None] * terms[None, None, :, 1] + terms[None, None, :, 2]),
        q,
    ).astype(float)
    lo = ((-s * m2 - m3) / m1).min()
    hi = ((s * m2 - m3) / m1).max()
    lo, hi = min(lo, ((s * m2 - m3) / m1).min()), max(hi, ((-s * m2 - m3) / m1).max())
    width = spec.feature * float((m2 / np.abs(m1)).min())
    x, w = leggauss(16)

    def run(panels):
        if panels * 16 * terms.shape[0] * b.size > spec.max_work:
            raise BudgetExceededError("j_affine quadrature exceeds work budget")
        edges = np.linspace(lo, hi, panels + 1)
        u = (0.5 * np.diff(edges)[:, None] * x + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
        wt = (0.5 * np.diff(edges)[:, None] * w).ravel()
        total = 0.0
        for c in range(0, u.size, 512):
            uc = u[c : c + 512]
            X = (np.outer(uc, m1) + m3) / m2  # [node, term]
            F = np.stack([np.asarray(f(X), dtype=float) for f in spec.profiles])  # [b, node, term]
            g = np.einsum("bnk,abk->an", F, G)
            total += float(np.dot((g**2).sum(axis=0), wt[c : c + 512]))
        return total

    panels = max(8, math.ceil((hi - lo) / width))
    prev = run(panels)
    for _ in range(5):
        panels *= 2
        cur = run(panels)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise NonConvergenceError("j_affine quadrature did not converge")


def j_affine(spec: AffineSumSpec, detail: bool = False):
    """``J(f)``: the supremum over dyadic ``(M1, M2, M3)`` below ``M`` of the gcd-twisted square integral."""
    best, arg = 0.0, None
    cells = {}
    scales = dyadic_scales(spec.M)
    for M1, M2, M3 in itertools.product(scales, repeat=3):
        val = _j_cell(spec, affine_terms(M1, M2, M3))
        cells[(M1, M2, M3)] = val
        if val > best or arg is None:
            best, arg = val, (M1, M2, M3)
    return (best, arg, cells) if detail else best


def profile_integrals(spec: AffineSumSpec, pieces: int = 64) -> tuple[float, float]:
    """``int sum_b f_b`` and ``int sum_b f_b^2`` over the support."""
    x, w = leggauss(32)
    edges = np.linspace(-spec.support, spec.support, pieces + 1)
    u = (0.5 * np.diff(edges)[:, None] * x + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
    wt = (0.5 * np.diff(edges)[:, None] * w).ravel()
    F = np.array([np.asarray(f(u), dtype=float) for f in spec.profiles])
    return float(wt @ F.sum(axis=0)), float(wt @ (F**2).sum(axis=0))


def bsoat_check(spec: AffineSumSpec) -> dict:
    J = j_affine(spec)
    l1, l2 = profile_integrals(spec)
    phi = euler_phi(spec.q)
    rhs = phi * spec.M**6 * l1**2 + phi**2 * spec.M**4 * l2
    return {"J": J, "rhs": rhs, "ratio": J / rhs if rhs else (0.0 if J == 0 else math.inf)}


def bump_profiles(q: int, amplitudes: Sequence[float] | None = None) -> tuple[Callable, ...]:
    """Scaled copies of the glue bump on ``[-1, 1]`` with plateau ``[-1/2, 1/2]``."""
    base = PlateauBump(-1.0, -0.5, 0.5, 1.0)
    phi = euler_phi(q)
    amps = [1.0] * phi if amplitudes is None else list(amplitudes)
    return tuple((lambda u, c=c: c * base(u)) for c in amps)


def rtilde_profiles(W: PointSet, M2: float, N: float, eps: float = 0.05, grid: int = 241) -> tuple[tuple[Callable, ...], float]:
    """``f_b(v) = psi(v) R~_{M2}(v, -b)^2`` tabulated on ``[1/2, 2]`` and splined.

    Returns the profiles together with a feature length for the quadrature.
    """
    from scipy.interpolate import CubicSpline

    from .large_values import r_tilde

    psi = PlateauBump(0.5, 0.75, 1.75, 2.0)
    v = np.linspace(0.5, 2.0, grid)
    out = []
    for b in range(1, W.q + 1):
        if math.gcd(b, W.q) != 1:
            continue
        vals = np.array([r_tilde(W, float(x), -b, M2, N, eps) ** 2 for x in v]) * psi(v)
        spl = CubicSpline(v, vals)

        def f(u, spl=spl):
            u = np.asarray(u, dtype=float)
            inside = (u > 0.5) & (u < 2.0)
            return np.where(inside, np.maximum(spl(np.clip(u, 0.5, 2.0)), 0.0), 0.0)

        out.append(f)
    return tuple(out), 4 * (v[1] - v[0])
