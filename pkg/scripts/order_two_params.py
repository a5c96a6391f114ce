"""Grid search for (alpha, gamma) in f(z) = alpha + beta z - z^3 + z^5 + gamma z^6.

Requirements checked on a dense grid:
  f(x)  >= 0 for x in [-50, 50]   (1e5 points; gamma > 0 gives tail dominance)
  f'(x) >= 0 for x in [0, 50]

Prints the smallest grid values meeting both and the frozen values
(rounded up with a safety margin) used by the test corpus.
"""
import math

import numpy as np

BETA = 0.3


def f(x, alpha, gamma, beta=BETA):
    return alpha + beta * x - x**3 + x**5 + gamma * x**6


def fprime(x, gamma, beta=BETA):
    return beta - 3 * x**2 + 5 * x**4 + 6 * gamma * x**5


def search(beta=BETA, points=100_000):
    xs_pos = np.linspace(0.0, 50.0, points)
    xs_all = np.linspace(-50.0, 50.0, points)
    gamma = None
    for g in np.arange(0.01, 5.0, 0.01):
        if fprime(xs_pos, g, beta).min() >= 0.0:
            gamma = float(g)
            break
    if gamma is None:
        raise RuntimeError("no gamma on the grid")
    alpha = None
    for a in np.arange(0.0, 5.0, 0.01):
        if f(xs_all, a, gamma, beta).min() >= 0.0:
            alpha = float(a)
            break
    if alpha is None:
        raise RuntimeError("no alpha on the grid")
    return alpha, gamma


if __name__ == "__main__":
    alpha, gamma = search()
    print(f"minimal grid values: alpha={alpha:.2f} gamma={gamma:.2f}")
    frozen_alpha = math.ceil(2 * alpha * 10) / 10
    frozen_gamma = math.ceil(2 * gamma * 10) / 10
    xs_pos = np.linspace(0.0, 50.0, 100_000)
    xs_all = np.linspace(-50.0, 50.0, 100_000)
    assert f(xs_all, frozen_alpha, frozen_gamma).min() >= 0.0
    assert fprime(xs_pos, frozen_gamma).min() >= 0.0
    print(f"frozen: alpha={frozen_alpha} gamma={frozen_gamma}")
    print(f"min f on [-50,50]: {f(xs_all, frozen_alpha, frozen_gamma).min():.6g}")
    print(f"min f' on [0,50]: {fprime(xs_pos, frozen_gamma).min():.6g}")
