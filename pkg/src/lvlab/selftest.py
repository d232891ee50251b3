"""Fast deterministic cross-module checks backing ``lvlab selftest``."""

from __future__ import annotations

import math

import numpy as np

from .arithmetic_apps import goldbach_result, least_primes_all
from .characters import build_group
from .dirichlet_poly import W_BUMP, h_hat_value
from .large_values import continuous_moments, energy, random_pointset
from .lfunc import count_zeros, l_value
from .spectral import build_gram, decompose_S, trace_identities


def _characters() -> dict:
    mod, chars = build_group(12)
    V = mod.value_matrix()
    ortho = float(np.abs(V @ V.conj().T - mod.phi * np.eye(mod.phi)).max())
    primitive_9 = sum(c.is_primitive for c in build_group(9)[1])
    return {"orthogonality_error_12": ortho, "primitive_count_9": primitive_9}


def _kernel() -> dict:
    h0 = h_hat_value(0.0, 0.0)
    return {"bump_norm2": W_BUMP.norm2, "h_hat_00": h0, "h_hat_sample": h_hat_value(3.0, 0.5)}


def _large_values(seed: int) -> dict:
    W = random_pointset(5, 8, 100.0, 1.0, np.random.default_rng(seed))
    E = energy(W)
    m2, m4 = continuous_moments(W, E)
    return {"size": len(W), "energy": E, "second_ratio": m2.ratio, "fourth_ratio": m4.ratio}


def _spectral(seed: int, eps: float) -> dict:
    W = random_pointset(5, 6, 100.0, 1.0, np.random.default_rng(seed))
    g = build_gram(W, 2000.0)
    d = decompose_S(g, eps, sigma=0.75)
    tr = trace_identities(g, eps, d)
    return {
        "tr_G": g.tr_G,
        "tr_G3": g.tr_G3,
        "s1": tr["s1"],
        "est1_residual": tr["est1_residual"],
        "est1_budget": tr["est1_budget"],
        "lattice_relative_residual": d.relative_residual,
    }


def _lfunc() -> dict:
    zeta = build_group(1)[1][0]
    chi4 = build_group(4)[1][1]
    count, zeros = count_zeros(0.4, 30.0, zeta)
    first = min(z.t for z in zeros if z.t > 0)
    return {"zeta_zeros_30": count, "first_zero": first, "L1_chi4_error": abs(l_value(1, chi4) - math.pi / 4)}


def _apps() -> dict:
    return {"p_max_9": max(least_primes_all(9).values()), "goldbach_max_7": goldbach_result(7).max_value}


def run_selftest(seed: int = 0, eps: float = 0.05) -> tuple[dict, dict]:
    """Return ``(results, checks)`` where each check maps to ``(value, ok)``."""
    res = {
        "characters": _characters(),
        "kernel": _kernel(),
        "large_values": _large_values(seed),
        "spectral": _spectral(seed, eps),
        "lfunc": _lfunc(),
        "apps": _apps(),
    }
    sp, lf = res["spectral"], res["lfunc"]
    checks = {
        "character_orthogonality": (res["characters"]["orthogonality_error_12"], res["characters"]["orthogonality_error_12"] < 1e-10),
        "primitive_count": (res["characters"]["primitive_count_9"], res["characters"]["primitive_count_9"] == 4),
        "h_hat_zero_is_mass": (
            abs(res["kernel"]["h_hat_00"] - W_BUMP.norm2),
            abs(res["kernel"]["h_hat_00"] - W_BUMP.norm2) < 1e-10,
        ),
        "second_moment_ratio": (res["large_values"]["second_ratio"], res["large_values"]["second_ratio"] < 50),
        "est1_residual": (abs(sp["est1_residual"]), abs(sp["est1_residual"]) <= sp["est1_budget"]),
        "lattice_identity": (sp["lattice_relative_residual"], sp["lattice_relative_residual"] < 1e-8),
        "zeta_zero_count": (lf["zeta_zeros_30"], lf["zeta_zeros_30"] == 6),
        "first_zeta_zero": (lf["first_zero"], abs(lf["first_zero"] - 14.134725141734693) < 1e-8),
        "L1_chi4": (lf["L1_chi4_error"], lf["L1_chi4_error"] < 1e-12),
        "least_prime_mod_9": (res["apps"]["p_max_9"], res["apps"]["p_max_9"] == 19),
        "goldbach_mod_7": (res["apps"]["goldbach_max_7"], res["apps"]["goldbach_max_7"] == 10),
    }
    return res, checks
