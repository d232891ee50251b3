import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from lvlab.characters import build_group
from lvlab.dirichlet_poly import W_BUMP, PolySpec, h_hat_value
from lvlab.errors import BudgetExceededError, InvalidInputError
from lvlab.large_values import extract_W, make_pointset, random_pointset
from lvlab.spectral import (
    AffineSumSpec,
    affine_terms,
    bsoat_check,
    build_gram,
    bump_profiles,
    compute_Im,
    decompose_S,
    dyadic_scales,
    j_affine,
    largest_singular_value,
    lattice_cutoff,
    rtilde_profiles,
    rtls_check,
    trace_identities,
)
from oracles import gram_naive, im_naive


def _psd(seed, k=8):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    return A @ A.conj().T


def test_singular_value_examples():
    assert largest_singular_value(np.eye(5)).value == pytest.approx(1.0)
    assert largest_singular_value(np.diag([4.0, 1.0])).value == pytest.approx(2.0)
    # all-ones is orthogonal to the top eigenvector here
    H = np.array([[5.0, -4.0], [-4.0, 5.0]])
    assert largest_singular_value(H).value == pytest.approx(3.0, rel=1e-8)


def test_power_iteration_near_degenerate():
    G = np.array([[70.6128, 1e-4j], [-1e-4j, 70.6128]])
    assert largest_singular_value(G).value ** 2 == pytest.approx(70.6129, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_power_iteration_vs_eigh(seed):
    G = _psd(seed)
    sv = largest_singular_value(G)
    ref = math.sqrt(np.linalg.eigvalsh(G).max())
    assert sv.converged
    assert sv.value == pytest.approx(ref, rel=1e-8)


def test_gram_single_point():
    W = make_pointset(5, [(3.0, 1)], 1.0, 10.0)
    g = build_gram(W, 40)
    ref = sum(float(W_BUMP(n / 40)) ** 2 for n in range(40, 81) if n % 5)
    assert g.G.shape == (1, 1)
    assert g.G[0, 0].real == pytest.approx(ref, rel=1e-12)


def test_gram_matches_naive():
    W = random_pointset(5, 6, 100.0, 1.0, np.random.default_rng(3))
    g = build_gram(W, 500, chunk=97)
    assert np.abs(g.G - gram_naive(W, 500, W_BUMP)).max() < 1e-9


def test_gram_budget():
    W = random_pointset(3, 4, 10.0, 1.0, np.random.default_rng(0))
    with pytest.raises(BudgetExceededError):
        build_gram(W, 2e4)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([1, 3, 4, 5, 8]), st.integers(1, 10), st.integers(0, 10**6), st.integers(20, 300))
def test_gram_invariants(q, size, seed, N):
    W = random_pointset(q, size, 50.0, 1.0, np.random.default_rng(seed))
    g = build_gram(W, N)
    G = g.G
    assert np.allclose(G, G.conj().T, atol=1e-9)
    d = np.sqrt(np.diag(G).real)
    assert np.all(np.abs(G) <= np.outer(d, d) * (1 + 1e-9) + 1e-9)
    assert g.min_eig() >= -1e-9 * g.tr_G
    s1 = g.s1.value
    assert s1**2 <= g.tr_G * (1 + 1e-9)
    assert s1**2 >= g.tr_G / size * (1 - 1e-9)
    assert g.tr_G3 * size**2 >= g.tr_G**3 * (1 - 1e-9)
    assert s1 <= trace_identities(g)["lsvt_plus_rhs"] * (1 + 1e-9)


def test_trace_q1_single():
    W = make_pointset(1, [(0.0, 0)], 1.0, 10.0)
    g = build_gram(W, 300)
    rep = trace_identities(g)
    assert abs(rep["est1_residual"]) < 1e-8 * rep["tr_G"]


def test_trace_est1_budget():
    W = random_pointset(5, 8, 100.0, 1.0, np.random.default_rng(0))
    g = build_gram(W, 2000)
    rep = trace_identities(g)
    assert abs(rep["tr_G"] - rep["est1_main"]) <= 2 * 5 * 8 / 2000**0.95
    assert rep["jensen_ok"]


def test_lsvt_reports_both_signs():
    W = random_pointset(5, 8, 100.0, 1.0, np.random.default_rng(1))
    rep = trace_identities(build_gram(W, 400))
    assert rep["lsvt_minus_rhs"] < rep["lsvt_plus_rhs"]
    assert rep["lsvt_plus_ok"]


@pytest.mark.parametrize("m", [(0, 0, 0), (1, -1, 0), (2, 0, -1), (1, 1, 1), (-2, 3, 1)])
def test_compute_im_matches_naive(m):
    W = random_pointset(5, 3, 5.0, 1.0, np.random.default_rng(7))
    N = 6.0
    got = compute_Im(W, N, m)
    ref = im_naive(W, N, m, h_hat_value)
    assert abs(got.value - ref) <= 1e-9 * max(abs(ref), 1e-12 * (N / 5) ** 3)
    assert got.value == pytest.approx(got.recompute(), rel=1e-14)


@pytest.mark.parametrize("m", [(1, 2, -3), (1, -1, 0), (0, 2, 2)])
def test_compute_im_naive_q8(m):
    W = random_pointset(8, 3, 4.0, 1.0, np.random.default_rng(2))
    got = compute_Im(W, 10.0, m).value
    ref = im_naive(W, 10.0, m, h_hat_value)
    # K(m) can vanish identically, leaving roundoff of the size of the summands
    assert abs(got - ref) <= 1e-9 * abs(ref) + 1e-12 * (10 / 8) ** 3 * 4**3 * 3**3


def test_im_origin_single_point():
    W = make_pointset(7, [(2.0, 3)], 1.0, 10.0)
    N = 100.0
    got = compute_Im(W, N, (0, 0, 0)).value
    assert got == pytest.approx(6**3 * (N / 7) ** 3 * h_hat_value(0, 0) ** 3, rel=1e-12)


def test_im_symmetry():
    W = random_pointset(5, 4, 20.0, 1.0, np.random.default_rng(5))
    for m in [(1, 2, 0), (-1, 1, 1), (2, -1, -1)]:
        a = compute_Im(W, 30.0, m).value
        b = compute_Im(W, 30.0, (-m[1], -m[0], -m[2])).value
        assert abs(a - np.conj(b)) <= 1e-10 * max(abs(a), 1e-12)


@pytest.mark.parametrize("q,T,N", [(5, 20, 200), (5, 50, 300), (7, 30, 400)])
def test_im_beyond_cutoff_small(q, T, N):
    size = 4
    W = random_pointset(q, size, T, 1.0, np.random.default_rng(0))
    m1 = math.floor(2 * (q * T) ** 1.05 / N) + 1
    phi = len(W.modulus.units)
    for m in [(m1, 0, 0), (0, m1, -m1), (-m1, 0, 1)]:
        assert abs(compute_Im(W, N, m).value) < 1e-8 * (N / q) ** 3 * phi**3 * size**3


def test_compute_im_budget():
    W = random_pointset(31, 2, 5.0, 1.0, np.random.default_rng(0))
    with pytest.raises(BudgetExceededError):
        compute_Im(W, 10.0, (0, 0, 0))


def test_decompose_empty_lattice():
    W = make_pointset(1, [(0.0, 0), (3.0, 0)], 1.0, 5.0)
    g = build_gram(W, 200)
    d = decompose_S(g, cutoff=0)
    assert d.S1 == d.S2 == d.S3 == 0
    assert d.I0.real + d.residual == pytest.approx(g.tr_G3)


def test_decompose_partition_and_residual():
    W = random_pointset(5, 6, 60.0, 1.0, np.random.default_rng(1))
    g = build_gram(W, 1500)
    d = decompose_S(g, sigma=0.75)
    side = 2 * d.cutoff + 1
    assert sum(d.counts.values()) == side**3
    assert d.counts["S1"] + d.counts["S2"] + d.counts["S3"] == side**3 - 1
    assert d.relative_residual <= 1e-2
    assert lattice_cutoff(5, 60, 1500, 0.05) == d.cutoff


def test_rtls_on_extracted_sets():
    N, sigma = 40, 0.8
    spec = PolySpec(N, "random", smoothed=True, seed=5)
    _, chars = build_group(5)
    W = extract_W(spec, chars, 40, N**sigma / 6, 1.0)
    assert len(W) > 0
    g = build_gram(W, N, max_w=400)
    assert rtls_check(W, N, sigma, g.s1.value)["ok"]


def test_dyadic_and_terms():
    assert dyadic_scales(3) == [1, 2]
    assert dyadic_scales(16) == [1, 2, 4, 8]
    t = affine_terms(1, 1, 1)
    assert sorted(set(t[:, 0].tolist())) == [-2, 2]
    assert t[:, 1].tolist() == [2] * len(t)


def _j_oracle(q, M, profiles, support=1.0):
    coprime = [b for b in range(1, q + 1) if math.gcd(b, q) == 1]
    best = 0.0
    for M1 in dyadic_scales(M):
        for M2 in dyadic_scales(M):
            for M3 in dyadic_scales(M):
                terms = []
                for m1 in range(-2 * M1, 2 * M1 + 1):
                    if not M1 < abs(m1) <= 2 * M1:
                        continue
                    for m2 in range(M2 + 1, 2 * M2 + 1):
                        for m3 in range(-M3, M3 + 1):
                            terms.append((m1, m2, m3))
                knots = sorted({(s * k * m2 - m3) / m1 for m1, m2, m3 in terms for k in (-1, -0.5, 0.5, 1) for s in (support,)})
                total = 0.0
                for a in coprime:

                    def g2(u):
                        s = 0.0
                        for bi, b in enumerate(coprime):
                            for m1, m2, m3 in terms:
                                x = (m1 * u + m3) / m2
                                if abs(x) < support:
                                    s += float(profiles[bi](x)) * math.gcd(a * m1 + b * m2 + m3, q)
                        return s * s

                    for lo, hi in zip(knots[:-1], knots[1:]):
                        total += quad(g2, lo, hi, epsabs=0, epsrel=1e-11, limit=200)[0]
                best = max(best, total)
    return best


def test_j_affine_matches_oracle():
    profiles = bump_profiles(3)
    spec = AffineSumSpec(3, 3, profiles)
    assert j_affine(spec) == pytest.approx(_j_oracle(3, 3, profiles), rel=1e-6)


def test_j_affine_unequal_profiles():
    profiles = bump_profiles(4, [0.3, 1.0])
    spec = AffineSumSpec(4, 3, profiles)
    assert j_affine(spec) == pytest.approx(_j_oracle(4, 3, profiles), rel=1e-6)


def test_j_affine_trivial():
    spec = AffineSumSpec(5, 4, bump_profiles(5, [0.0] * 4))
    assert j_affine(spec) == 0
    rep = bsoat_check(AffineSumSpec(5, 4, bump_profiles(5)))
    assert rep["J"] >= 0 and rep["ratio"] < 50
    with pytest.raises(InvalidInputError):
        AffineSumSpec(5, 4, bump_profiles(3))


def test_bsoat_rtilde_profiles():
    W = random_pointset(3, 6, 50.0, 1.0, np.random.default_rng(8))
    profiles, feature = rtilde_profiles(W, 2.0, 20.0)
    spec = AffineSumSpec(3, 4, profiles, support=2.0, feature=feature)
    rep = bsoat_check(spec)
    assert rep["J"] > 0
    assert rep["ratio"] < 50
