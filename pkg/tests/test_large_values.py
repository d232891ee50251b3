import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lvlab.characters import build_group
from lvlab.dirichlet_poly import PolySpec, eval_grid
from lvlab.errors import BudgetExceededError, InvalidInputError
from lvlab.large_values import (
    PSI0,
    RFunction,
    continuous_moment,
    continuous_moments,
    discrete_moment_reports,
    discrete_moments,
    energy,
    extract_W,
    heath_brown_lhs,
    make_pointset,
    predicted_bounds,
    r_eval,
    r_tilde,
    random_pointset,
    rbaver_constant,
)
from oracles import discrete_moment_naive, energy_brute, heath_brown_naive, r_naive


def test_extract_empty_above_trivial_bound():
    _, chars = build_group(5)
    W = extract_W(PolySpec(30), chars, 50, 31, 1.0)
    assert len(W) == 0


def test_extract_v_zero_takes_every_grid_point():
    _, chars = build_group(1)
    W = extract_W(PolySpec(10), chars, 5, 0.0, 1.0, step=1.0)
    assert sorted(W.t.tolist()) == [float(k) for k in range(-5, 6)]


def _scan_oracle(spec, chars, T, V, delta):
    step = delta / 4
    grid = [-T + step * k for k in range(int(math.floor(2 * T / step + 1e-9)) + 1)]
    vals = np.abs(eval_grid(spec, chars, grid))
    cands = sorted(
        ((vals[c, j], grid[j], c) for c in range(len(chars)) for j in range(len(grid)) if vals[c, j] >= V),
        key=lambda x: (-x[0], x[1], x[2]),
    )
    kept = []
    for _, t, c in cands:
        if all(not (c2 == c and abs(t - t2) < delta * (1 - 1e-9)) for t2, c2 in kept):
            kept.append((t, c))
    return kept


def test_extract_matches_scan_oracle():
    _, chars = build_group(5)
    N = 12
    spec = PolySpec(N, "random", seed=1)
    V = N**0.75
    W = extract_W(spec, chars, 200, V, 1.0)
    ref = _scan_oracle(spec, chars, 200, V, 1.0)
    assert len(W) == len(ref) > 0
    assert sorted(zip(W.t.tolist(), W.chi_index.tolist())) == sorted((t, chars[c].index) for t, c in ref)
    assert W.check_separation()


def test_extract_rejects_bad_params():
    _, chars = build_group(3)
    with pytest.raises(InvalidInputError):
        extract_W(PolySpec(10), chars, 10, 1, 0.0)
    with pytest.raises(InvalidInputError):
        extract_W(PolySpec(10), chars, 10, -1, 1.0)


def test_predicted_bounds_crossover():
    qT = 1e10
    N = qT**0.8
    V = N**0.75
    b = predicted_bounds(N, V, 1, qT)
    # the two classical bounds agree here: both are (qT)^{2/5} + (qT)^{3/5}
    assert b["mvt"] == pytest.approx(qT**0.4 + qT**0.6, rel=1e-12)
    assert b["hmh"] == pytest.approx(b["mvt"], rel=1e-12)
    assert b["thm1_low"] == pytest.approx(qT ** (8 / 15) + qT**0.4, rel=1e-12)
    assert b["regime"] == "low"
    assert b["thm1_low"] < b["mvt"]


def test_predicted_bounds_hand_values():
    T = 1e4
    N = T ** (5 / 6)
    V = N**0.75
    b = predicted_bounds(N, V, 1, T, eps=0.05)
    assert b["mvt"] == pytest.approx(N**2 / V**2 + T * N / V**2)
    assert b["hmh"] == pytest.approx(N**2 / V**2 + T * N**4 / V**6)
    assert b["thm1_high"] == pytest.approx(
        N**2 / V**2 + N**5 / V**6 + T**0.5 * N**3 / V**4 + T ** (2 / 19) * N ** (80 / 19) / V ** (96 / 19)
    )
    assert b["eps_factor"] == pytest.approx(T**0.05)
    assert predicted_bounds(100, 100, 3, 10)["mvt"] - 3 * 10 * 100 / 100**2 == pytest.approx(1.0)
    assert predicted_bounds(10, 1, 1, 1e6)["regime"] == "outside"
    with pytest.raises(InvalidInputError):
        predicted_bounds(0, 1, 1, 1)


@pytest.fixture(scope="module")
def W12():
    return random_pointset(5, 12, 100.0, 1.0, np.random.default_rng(4))


def test_r_basic(W12):
    assert r_eval(W12, 1.0, 1) == pytest.approx(12)
    assert abs(r_eval(W12, 1.3, 2)) <= 12 + 1e-12
    assert r_eval(W12, 1.7, 10) == 0
    assert abs(r_eval(W12, 1.37, 3) - r_naive(W12, 1.37, 3)) < 1e-10
    R = RFunction(W12)
    assert R(1.5, 7) == R(1.5, 2)
    with pytest.raises(InvalidInputError):
        r_eval(W12, -1.0, 1)


def test_r_conjugation_probes(W12):
    rng = np.random.default_rng(0)
    for _ in range(1000):
        v = rng.uniform(0.5, 2)
        a = int(rng.choice([1, 2, 3, 4]))
        lhs = r_eval(W12, 1 / v, pow(a, -1, 5))
        assert abs(lhs - np.conj(r_eval(W12, v, a))) < 1e-10


def test_r_tilde_wide_window(W12):
    # a tiny N*M2/q makes psi~ identically one on [1/2, 2]
    N, M2 = 1.0, 0.1
    scale = N * M2 / 5
    got = r_tilde(W12, 1.2, 2, M2, N)
    x, w = np.polynomial.legendre.leggauss(200)
    edges = np.linspace(0.5, 2, 41)
    ref = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        ref += 0.5 * (hi - lo) * np.dot(w, np.abs([r_naive(W12, vv, 2) for vv in v]) ** 2)
    assert got == pytest.approx(math.sqrt(scale * ref), rel=1e-6)
    assert r_tilde(W12, 1.2, 2, 50.0, 200.0) >= 0
    with pytest.raises(InvalidInputError):
        r_tilde(W12, 1.0, 1, 0.0, 10)


def test_psi_tilde_shape():
    assert PSI0(0.0) == 1 and PSI0(-1.0) == 1 and PSI0(2.5) == 0
    assert 0 < PSI0(1.5) < 1


def test_moments_single_point():
    W = make_pointset(7, [(3.0, 2)], 1.0, 10.0)
    m2, m4 = continuous_moments(W)
    assert m2.raw == pytest.approx(6 * 1.5, rel=1e-12)
    assert m2.ratio == pytest.approx(1.5)
    assert m4.raw == pytest.approx(6 * 1.5, rel=1e-12)
    assert m4.normalizer == 6 and energy(W) == 1


def test_second_moment_closed_form(W12):
    # |R|^2 integrated term by term: pairs with equal characters survive the a-sum
    phi = 4
    t, c = W12.t, W12.chi_index
    total = 0.0
    for i in range(12):
        for j in range(12):
            if c[i] == c[j]:
                s = t[i] - t[j]
                total += ((2 ** (1 + 1j * s) - 2 ** (-1 - 1j * s)) / (1 + 1j * s)).real
    assert continuous_moment(W12, 2) == pytest.approx(phi * total, rel=1e-9)
    m2, _ = continuous_moments(W12)
    assert m2.ratio < 10


@pytest.mark.parametrize("seed", range(6))
def test_energy_matches_brute(seed):
    rng = np.random.default_rng(seed)
    q = [1, 3, 5, 8, 12, 7][seed]
    size = [6, 10, 14, 20, 25, 30][seed]
    W = random_pointset(q, size, 6.0, 0.5, rng)
    e = energy(W)
    assert e == energy_brute(W)
    assert e >= size**2


def test_energy_boundary_closed():
    # sums differing by exactly 1 count
    W = make_pointset(1, [(0.0, 0), (0.5, 0), (1.5, 0)], 0.1, 10)
    assert energy(W) == energy_brute(W)
    W2 = make_pointset(3, [(0.25, 0), (1.25, 1), (0.75, 1)], 0.1, 10)
    assert energy(W2) == energy_brute(W2)


def test_energy_cap():
    W = make_pointset(1, [(float(k), 0) for k in range(5)], 1, 10)
    with pytest.raises(BudgetExceededError):
        energy(W, cap=4)


def test_discrete_single_pair():
    W = random_pointset(5, 7, 50.0, 1.0, np.random.default_rng(2))
    mom = discrete_moments(W, 1, (2, 3, 4))
    for k in (2, 3, 4):
        assert mom[k]["total"] == pytest.approx(7**k)


def test_discrete_matches_naive(W12):
    mom = discrete_moments(W12, 40, (2,), D=6)
    small, large = discrete_moment_naive(W12, 40, 2, D=6)
    assert mom[2]["small"] == pytest.approx(small, rel=1e-8)
    assert mom[2]["large"] == pytest.approx(large, rel=1e-8)
    assert mom[2]["total"] == mom[2]["small"] + mom[2]["large"]


def test_discrete_split_and_budget(W12):
    mom = discrete_moments(W12, 20, (3,), D=40)
    assert mom[3]["large"] == 0
    with pytest.raises(BudgetExceededError):
        discrete_moments(W12, 5000)
    reps = discrete_moment_reports(W12, 20, energy(W12), sigma=0.7)
    assert {r.kind for r in reps} == {"secmR", "fourmR", "sgcd", "lgcd", "econ3"}
    assert all(r.raw >= 0 and r.ratio == r.raw / r.normalizer for r in reps)


def test_heath_brown_examples():
    W1 = make_pointset(5, [(2.0, 1)], 1.0, 10.0)
    M = 16
    rep = heath_brown_lhs(W1, M)
    ref = sum(n**-0.5 for n in range(17, 33) if n % 5) ** 2
    assert rep.lhs == pytest.approx(ref)
    assert heath_brown_lhs(W1, M, np.zeros(16)).lhs == 0
    with pytest.raises(InvalidInputError):
        heath_brown_lhs(W1, M, np.full(16, 2.0))


def test_heath_brown_matches_naive():
    rng = np.random.default_rng(9)
    W = random_pointset(5, 10, 100.0, 1.0, rng)
    c = np.exp(2j * np.pi * rng.random(64))
    rep = heath_brown_lhs(W, 64, c)
    assert rep.lhs == pytest.approx(heath_brown_naive(W, 64, c), rel=1e-8)
    assert 0 not in rep.nonprimitive or W.modulus.character(0).is_principal


def test_rbaver_local_constancy():
    rng = np.random.default_rng(5)
    W = random_pointset(5, 15, 200.0, 1.0, rng)
    for a in (1, 2):
        assert rbaver_constant(W, a, rng) <= 10


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([1, 3, 4, 5, 8]), st.integers(1, 12), st.integers(0, 10**6))
def test_pointset_invariants(q, size, seed):
    W = random_pointset(q, size, 20.0, 1.0, np.random.default_rng(seed))
    assert W.check_separation()
    assert len(W) == size
    assert energy(W) >= size**2
    assert abs(r_eval(W, 1.0, 1) - size) < 1e-12
