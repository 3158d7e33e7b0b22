"""Independent oracles used across the test suite.

Everything here is deliberately implemented from scratch (or delegated to
mpmath/scipy), so no code path under test can confirm itself.
"""

import itertools
import math
from functools import lru_cache

import mpmath
import numpy as np


def exhaustive_rho_variation(samples, rho):
    """Max over all subsequences of (sum |diff|^rho)^(1/rho), by enumeration."""
    g = list(samples)
    M = len(g)
    best = 0.0
    for L in range(2, M + 1):
        for comb in itertools.combinations(range(M), L):
            s = sum(abs(g[comb[i + 1]] - g[comb[i]]) ** rho
                    for i in range(L - 1))
            best = max(best, s)
    return best ** (1.0 / rho)


def brute_force_jump_count(samples, lam):
    """Max number of disjoint ordered pairs with |difference| > lam."""
    g = tuple(samples)
    M = len(g)

    @lru_cache(maxsize=None)
    def from_index(i):
        if i >= M - 1:
            return 0
        best = from_index(i + 1)        # skip i as a pair start
        for t in range(i + 1, M):
            if abs(g[t] - g[i]) > lam:
                best = max(best, 1 + from_index(t))
        return best

    return from_index(0)


def mp_bessel_zero(nu, n, dps=30):
    """n-th positive zero of J_nu: scan for the n-th sign change, then bisect."""
    with mpmath.workdps(dps):
        f = lambda x: mpmath.besselj(nu, x)
        hi_limit = math.pi * (n + nu / 2.0 + 1.0)
        step = 0.05
        x_prev, f_prev = 1e-8, f(1e-8)
        found = 0
        x = x_prev + step
        while x <= hi_limit + step:
            fx = f(x)
            if mpmath.sign(fx) != mpmath.sign(f_prev):
                found += 1
                if found == n:
                    lo, hi = mpmath.mpf(x_prev), mpmath.mpf(x)
                    for _ in range(200):
                        mid = (lo + hi) / 2
                        if mpmath.sign(f(mid)) == mpmath.sign(f(lo)):
                            lo = mid
                        else:
                            hi = mid
                    return float((lo + hi) / 2)
            x_prev, f_prev = x, fx
            x += step
        raise RuntimeError(f"oracle found only {found} zeros below {hi_limit}")


def sine_series_heat_kernel(t, x, y, terms=200):
    """Dirichlet heat kernel oracle at nu = 1/2 via direct sine summation."""
    total = 0.0
    for n in range(1, terms + 1):
        total += 2.0 * math.exp(-t * (n * math.pi) ** 2) \
            * math.sin(n * math.pi * x) * math.sin(n * math.pi * y)
    return total / (x * y)


def images_free_kernel(t, x, y):
    """Method-of-images closed form of the free kernel at nu = 1/2."""
    return (math.exp(-(x - y) ** 2 / (4.0 * t))
            - math.exp(-(x + y) ** 2 / (4.0 * t))) \
        / (x * y * math.sqrt(4.0 * math.pi * t))


def decreasing_times(rng, size, lo=1e-3, hi=10.0):
    ts = np.sort(rng.uniform(lo, hi, size=size))[::-1]
    return ts
