"""Nodal discretization of the domain and the discrete X0 energy.

Fields are nodal values on the interior nodes of a uniform grid and are
implicitly zero outside the domain. The energy

    ||u||^p = int_Q |u(x) - u(y)|^p K(x - y) dx dy,   Q = (Om x Om) u 2 (Om x COm)

is approximated by a double Riemann sum over node pairs plus an exterior
term ``sum_i omega_i |u_i|^p`` that carries the interaction with the zero
exterior.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .kernel import KernelSpec


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform grid of interior nodes on an interval or axis-aligned rectangle.

    With ``N`` nodes per axis on ``[a, b]`` the nodes sit at ``a + k h``,
    ``k = 1..N``, ``h = (b - a)/(N + 1)``. Each node owns the cell of width
    ``h`` around it; the two half cells next to the boundary are absorbed
    into the outermost nodes so the measures tile the domain exactly.
    """

    bounds: tuple[tuple[float, float], ...]
    shape: tuple[int, ...]
    nodes: np.ndarray
    spacing: np.ndarray
    cell_measures: np.ndarray

    @property
    def n(self) -> int:
        return len(self.bounds)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.bounds]))

    def zeros(self) -> Field:
        return Field(self, np.zeros(self.size))

    def field(self, values) -> Field:
        return Field(self, values)


def _normalize_domain(domain) -> tuple[tuple[float, float], ...]:
    arr = np.asarray(domain, dtype=float)
    if arr.shape == (2,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] not in (1, 2):
        raise MeshError(f"domain must be [a, b] or [[a, b], [c, d]], got {domain!r}")
    return tuple((float(a), float(b)) for a, b in arr)


def build_mesh(domain, N) -> Mesh:
    """Build a uniform mesh.

    Args:
        domain: ``[a, b]`` for an interval or ``[[a, b], [c, d]]`` for a rectangle.
        N: node count per axis (an int, or one int per axis).
    """
    bounds = _normalize_domain(domain)
    counts = (N,) * len(bounds) if np.ndim(N) == 0 else tuple(N)
    if len(counts) != len(bounds):
        raise MeshError("one node count per axis is required")
    counts = tuple(int(c) for c in counts)
    if any(c < 2 for c in counts):
        raise MeshError(f"node count N >= 2 required, got {counts}")
    if any(not b > a for a, b in bounds):
        raise MeshError(f"zero-measure domain {bounds}")

    axes, widths, spacing = [], [], []
    for (a, b), c in zip(bounds, counts):
        h = (b - a) / (c + 1)
        axes.append(a + h * np.arange(1, c + 1))
        w = np.full(c, h)
        w[0] += h / 2
        w[-1] += h / 2
        widths.append(w)
        spacing.append(h)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    measures = widths[0]
    for w in widths[1:]:
        measures = np.multiply.outer(measures, w)
    for arr in (nodes, measures):
        arr.setflags(write=False)
    return Mesh(bounds, counts, nodes, np.array(spacing), np.ravel(measures))


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values of ``u`` on a mesh; zero outside the domain by construction."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.shape[0] != self.mesh.size:
            raise MeshError(f"field has {vals.shape[0]} values, mesh has {self.mesh.size} nodes")
        object.__setattr__(self, "values", vals)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __mul__(self, t):
        return Field(self.mesh, t * self.values)

    __rmul__ = __mul__

    def positive_part(self) -> Field:
        return Field(self.mesh, np.maximum(self.values, 0.0))

    def negative_part(self) -> Field:
        return Field(self.mesh, np.maximum(-self.values, 0.0))


@dataclass(frozen=True, eq=False)
class EnergyWeights:
    """Pair weights ``W`` (dense symmetric, zero diagonal) and exterior weights ``omega``.

    The discrete energy is ``sum_{i != j} W_ij |u_i - u_j|^p + sum_i omega_i |u_i|^p``,
    i.e. ``2 sum_{i<j}`` over unordered pairs.
    """

    mesh: Mesh
    kernel: KernelSpec
    pair: np.ndarray
    exterior: np.ndarray

    @property
    def p(self) -> float:
        return self.kernel.p


def _near_factor_closed_form(beta: float) -> float:
    # cell-averaged |x-y|^(beta) over adjacent 1D cells, relative to its midpoint value h^beta
    return (2.0 ** (beta + 2) - 2.0) / ((beta + 1.0) * (beta + 2.0))


def _near_factor_richardson(kernel: KernelSpec, offset: np.ndarray, spacing: np.ndarray) -> float:
    """Correction for a neighbouring cell pair by one-level Richardson refinement.

    The integrand ``|z|^p K(z)`` over the cell pair is integrated by the
    midpoint rule on the pair itself and on its 2^n x 2^n sub-cell pairs;
    the two are combined to cancel the leading O(h^2) error.
    """
    n, p = kernel.n, kernel.p
    subs = np.array(list(itertools.product((-0.25, 0.25), repeat=n))) * spacing
    diffs = offset + (subs[None, :, :] - subs[:, None, :])

    def g(z):
        return np.linalg.norm(z, axis=-1) ** p * kernel(z)

    coarse = float(g(offset))
    fine = float(np.mean(g(diffs.reshape(-1, n))))
    return (4.0 * fine - coarse) / 3.0 / coarse


def _near_factors(mesh: Mesh, kernel: KernelSpec) -> dict[tuple[int, ...], float]:
    steps = [d for d in itertools.product((-1, 0, 1), repeat=mesh.n) if any(d)]
    if mesh.n == 1 and kernel.is_radial:
        kappa = _near_factor_closed_form(kernel.p - 1.0 - kernel.s)
        return {d: kappa for d in steps}
    spacing = np.asarray(mesh.spacing, dtype=float)
    return {d: _near_factor_richardson(kernel, np.asarray(d) * spacing, spacing) for d in steps}


def _exterior_1d(mesh: Mesh, kernel: KernelSpec) -> np.ndarray:
    (a, b), = mesh.bounds
    x = mesh.nodes[:, 0]
    dl, dr = x - a, b - x
    if kernel.is_radial:
        s = kernel.s
        return 2.0 * kernel.power_multiplier / s * (dl**-s + dr**-s)
    out = np.empty_like(x)
    for i, (l, r) in enumerate(zip(dl, dr)):
        left, _ = integrate.quad(lambda t: float(kernel(np.array([-t]))), l, np.inf, limit=200)
        right, _ = integrate.quad(lambda t: float(kernel(np.array([t]))), r, np.inf, limit=200)
        out[i] = 2.0 * (left + right)
    return out


def _ray_exit(point, bounds, angle) -> float:
    c = (math.cos(angle), math.sin(angle))
    dist = math.inf
    for k, (lo, hi) in enumerate(bounds):
        if c[k] > 1e-300:
            dist = min(dist, (hi - point[k]) / c[k])
        elif c[k] < -1e-300:
            dist = min(dist, (lo - point[k]) / c[k])
    return dist


def _exterior_2d(mesh: Mesh, kernel: KernelSpec) -> np.ndarray:
    """``2 int_{COm} K(x_i - y) dy`` in polar coordinates around each node."""
    bounds = mesh.bounds
    s = kernel.s
    out = np.empty(mesh.size)
    for i, pt in enumerate(mesh.nodes):
        corners = sorted(
            math.atan2(cy - pt[1], cx - pt[0]) % (2 * math.pi)
            for cx in bounds[0] for cy in bounds[1]
        )
        if kernel.is_radial:
            mu = kernel.power_multiplier
            inner = lambda th: mu * _ray_exit(pt, bounds, th) ** -s / s
        else:
            def inner(th):
                e = np.array([math.cos(th), math.sin(th)])
                val, _ = integrate.quad(
                    lambda r: float(kernel(r * e)) * r, _ray_exit(pt, bounds, th), np.inf, limit=200
                )
                return val
        total = 0.0
        edges = [0.0, *corners, 2 * math.pi]
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi > lo:
                val, _ = integrate.quad(inner, lo, hi, limit=200, epsabs=0.0, epsrel=1e-12)
                total += val
        out[i] = 2.0 * total
    return out


def assemble_energy_weights(mesh: Mesh, kernel: KernelSpec) -> EnergyWeights:
    """Assemble pair and exterior weights for ``kernel`` on ``mesh``.

    Pair weights are ``c_i c_j K(x_i - x_j)``; nearest-neighbour pairs
    (including diagonal neighbours in 2D) are multiplied by a correction
    that accounts for the kernel singularity over the cell pair. Exterior
    weights are ``c_i * 2 int_{COm} K(x_i - y) dy``.
    """
    if kernel.n != mesh.n:
        raise MeshError(f"kernel dimension {kernel.n} does not match mesh dimension {mesh.n}")
    if not kernel.alpha < 1:
        raise MeshError("assembly requires alpha < 1")
    nodes, c = mesh.nodes, mesh.cell_measures
    N = mesh.size
    diff = nodes[:, None, :] - nodes[None, :, :]
    off = ~np.eye(N, dtype=bool)
    K = np.zeros((N, N))
    K[off] = kernel(diff[off])
    W = c[:, None] * c[None, :] * K

    steps = np.rint(diff / mesh.spacing).astype(int)
    near = off & (np.abs(steps).max(axis=-1) == 1)
    factors = _near_factors(mesh, kernel)
    idx = np.nonzero(near)
    W[idx] *= np.array([factors[tuple(steps[i, j])] for i, j in zip(*idx)])
    W = 0.5 * (W + W.T)

    omega = c * (_exterior_1d(mesh, kernel) if mesh.n == 1 else _exterior_2d(mesh, kernel))
    if not (np.all(np.isfinite(W)) and np.all(W >= 0) and np.all(np.isfinite(omega)) and np.all(omega >= 0)):
        raise MeshError("assembled weights are not finite and nonnegative; check the kernel")
    W.setflags(write=False)
    omega.setflags(write=False)
    return EnergyWeights(mesh, kernel, W, omega)


def _values(u, weights: EnergyWeights | None = None, mesh: Mesh | None = None) -> np.ndarray:
    target = weights.mesh if weights is not None else mesh
    if isinstance(u, Field):
        if target is not None and u.mesh is not target and not (
            u.mesh.nodes.shape == target.nodes.shape and np.array_equal(u.mesh.nodes, target.nodes)
        ):
            raise MeshError("field and weights live on different meshes")
        return u.values
    vals = np.asarray(u, dtype=float)
    if target is not None and vals.shape != (target.size,):
        raise MeshError(f"expected {target.size} nodal values, got shape {vals.shape}")
    return vals


def _signed_power(x, e):
    """``|x|^(e-1) x``, extended by 0 at ``x = 0``."""
    if e >= 1:
        return np.abs(x) ** (e - 1.0) * x
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0
    out[nz] = np.abs(x[nz]) ** (e - 1.0) * x[nz]
    return out


def seminorm_p(u, weights: EnergyWeights, p: float | None = None) -> float:
    """Discrete ``||u||_{X0}^p``."""
    p = weights.p if p is None else p
    v = _values(u, weights)
    d = np.abs(v[:, None] - v[None, :])
    return float(np.sum(weights.pair * d**p) + weights.exterior @ np.abs(v) ** p)


def lp_norm(u, m: float, mesh: Mesh | None = None) -> float:
    """Cell-weighted ``L^m`` norm."""
    if not m >= 1:
        raise ValueError(f"lp_norm needs m >= 1, got {m}")
    if mesh is None:
        if not isinstance(u, Field):
            raise TypeError("lp_norm of a raw array needs the mesh")
        mesh = u.mesh
    v = _values(u, mesh=mesh)
    return float(mesh.cell_measures @ np.abs(v) ** m) ** (1.0 / m)


def operator_functional(u, weights: EnergyWeights, p: float | None = None) -> np.ndarray:
    """Vector ``l`` with ``l . v`` the discrete ``<-L_K u, v>`` (no cell scaling)."""
    p = weights.p if p is None else p
    v = _values(u, weights)
    d = v[:, None] - v[None, :]
    return 2.0 * np.sum(weights.pair * np.abs(d) ** (p - 2.0) * d, axis=1) + weights.exterior * _signed_power(v, p - 1.0)


def apply_operator(u, weights: EnergyWeights, p: float | None = None) -> Field:
    """Discrete ``-L_K u`` as a nodal field (the L^2 Riesz representative)."""
    p = weights.p if p is None else p
    if p < 2:
        raise ValueError("apply_operator requires p >= 2")
    return Field(weights.mesh, operator_functional(u, weights, p) / weights.mesh.cell_measures)


def hilbert_matrix(weights: EnergyWeights) -> np.ndarray:
    """Matrix ``S`` with ``v^T S v`` the quadratic (p = 2) energy built from the same weights."""
    W = weights.pair
    return 2.0 * (np.diag(W.sum(axis=1)) - W) + np.diag(weights.exterior)
