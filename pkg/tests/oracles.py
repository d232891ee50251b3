"""Slow, literal reimplementations used only to check the fast code paths."""

import cmath
import math

import numpy as np


def energy_brute(W):
    mod = W.modulus
    pts = list(zip(W.t.tolist(), W.chi_index.tolist()))
    count = 0
    for t1, c1 in pts:
        for t2, c2 in pts:
            p12 = mod.mul_index(c1, c2)
            for t3, c3 in pts:
                for t4, c4 in pts:
                    if abs(t1 + t2 - t3 - t4) <= 1 and p12 == mod.mul_index(c3, c4):
                        count += 1
    return count


def r_naive(W, v, a):
    return sum(v ** (1j * t) * chi(a) for t, chi in zip(W.t.tolist(), W.characters))


def discrete_moment_naive(W, M, k, D=math.inf):
    q = W.q
    ns = [n for n in range(math.floor(M) + 1, math.floor(2 * M) + 1) if math.gcd(n, q) == 1]
    small = large = 0.0
    for n1 in ns:
        for n2 in ns:
            a = n1 * pow(n2, -1, q) % q if q > 1 else 0
            val = abs(r_naive(W, n1 / n2, a)) ** k
            if math.gcd(n1, n2) <= D:
                small += val
            else:
                large += val
    return small, large


def heath_brown_naive(W, M, c=None):
    ns = list(range(math.floor(M) + 1, math.floor(2 * M) + 1))
    c = [1.0] * len(ns) if c is None else list(c)
    total = 0.0
    for t1, x1 in zip(W.t.tolist(), W.characters):
        for t2, x2 in zip(W.t.tolist(), W.characters):
            s = sum(cn * x1(n) * x2(n).conjugate() * n ** (-0.5 + 1j * (t1 - t2)) for cn, n in zip(c, ns))
            total += abs(s) ** 2
    return total


def gram_naive(W, N, bump):
    ns = range(math.ceil(N), math.floor(2 * N) + 1)
    k = len(W)
    G = np.zeros((k, k), dtype=complex)
    pts = list(zip(W.t.tolist(), W.characters))
    for i, (ti, xi) in enumerate(pts):
        for j, (tj, xj) in enumerate(pts):
            s = 0j
            for n in ns:
                w = float(bump(n / N))
                s += w * w * xi(n) * xj(n).conjugate() * cmath.exp(1j * (ti - tj) * math.log(n))
            G[i, j] = s
    return G


def im_naive(W, N, m, h):
    """Literal triple sum over ``a1, a2, a3`` mod q; ``h(t, xi)`` is the kernel."""
    q = W.q
    pts = list(zip(W.t.tolist(), W.characters))
    total = 0j
    for t1, x1 in pts:
        for t2, x2 in pts:
            for t3, x3 in pts:
                s = 0j
                for a1 in range(q):
                    c1 = x1(a1) * x2(a1).conjugate()
                    if c1 == 0:
                        continue
                    for a2 in range(q):
                        c2 = x2(a2) * x3(a2).conjugate()
                        if c2 == 0:
                            continue
                        for a3 in range(q):
                            c3 = x3(a3) * x1(a3).conjugate()
                            if c3 == 0:
                                continue
                            s += c1 * c2 * c3 * cmath.exp(2j * math.pi * (a1 * m[0] + a2 * m[1] + a3 * m[2]) / q)
                if s == 0:
                    continue
                total += s * h(t1 - t2, N * m[0] / q) * h(t2 - t3, N * m[1] / q) * h(t3 - t1, N * m[2] / q)
    return (N / q) ** 3 * total
