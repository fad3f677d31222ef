"""Independent reference computations used by the tests.

Nothing here calls the assembly code: near-neighbour cell averages come from
mpmath double quadrature, exterior integrals from scipy quad, and the energy
is a literal double loop.
"""

import math

import mpmath
import numpy as np
from scipy import integrate


def near_factor_mp(beta: float) -> float:
    """Average of |x - y|^beta over two adjacent unit cells, divided by 1^beta."""
    mpmath.mp.dps = 30
    val = mpmath.quad(lambda x, y: abs(y - x) ** beta, [0, 1], [1, 2])
    return float(val)


def exterior_quad_1d(kernel_1d, x: float, a: float, b: float) -> float:
    left, _ = integrate.quad(lambda y: kernel_1d(x - y), -np.inf, a, epsabs=0, epsrel=1e-13, limit=400)
    right, _ = integrate.quad(lambda y: kernel_1d(x - y), b, np.inf, epsabs=0, epsrel=1e-13, limit=400)
    return 2.0 * (left + right)


def energy_loop_1d(u, nodes, measures, a, b, p, alpha):
    """Double Riemann sum with graded nearest-neighbour pairs plus exterior term."""
    K = lambda z: abs(z) ** -(1.0 + p * alpha)
    kappa = near_factor_mp(p - 1.0 - p * alpha)
    N = len(u)
    total = 0.0
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            w = measures[i] * measures[j] * K(nodes[i] - nodes[j])
            if abs(i - j) == 1:
                w *= kappa
            total += w * abs(u[i] - u[j]) ** p
    for i in range(N):
        total += measures[i] * exterior_quad_1d(K, nodes[i], a, b) * abs(u[i]) ** p
    return total


def central_difference(f, x, v, h=1e-6):
    scale = h * max(1.0, float(np.linalg.norm(x))) / max(float(np.linalg.norm(v)), 1e-300)
    return (f(x + scale * v) - f(x - scale * v)) / (2 * scale)


def sampled_roots(g, lo, hi, count=20001):
    """Sign changes of g on a dense log grid refined by scalar bisection."""
    ts = np.geomspace(lo, hi, count)
    vals = np.array([g(t) for t in ts])
    out = []
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        out.append(float(_plain_bisect(g, ts[k], ts[k + 1])))
    return out


def _plain_bisect(g, a, b):
    ga = g(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        gm = g(m)
        if math.copysign(1, gm) == math.copysign(1, ga):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)
