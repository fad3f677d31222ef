"""Interaction kernels K(z) and numerical checks of their admissibility.

A kernel must satisfy three conditions to define the nonlocal operator:

* ``m K`` is integrable on R^n, with ``m(z) = min(1, |z|^p)``;
* ``K(z) >= theta |z|^-(n + p alpha)`` (lower power-law bound);
* ``K(z) = K(-z)`` (symmetry).

These are continuum properties; :func:`check_admissible` certifies them at
sample resolution only.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

FRACTIONAL = "fractional"
SCALED_FRACTIONAL = "scaled_fractional"
CUSTOM = "custom"
FAMILIES = (FRACTIONAL, SCALED_FRACTIONAL, CUSTOM)


class KernelError(ValueError):
    """Raised for invalid kernel parameters or evaluation at the singularity."""


def _as_points(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if n == 1 and (z.ndim == 0 or z.shape[-1] != 1):
        z = z[..., None]
    if z.shape[-1] != n:
        raise KernelError(f"expected points with last axis of length {n}, got shape {z.shape}")
    return z


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of an interaction kernel.

    Args:
        n: spatial dimension, 1 or 2.
        p: integrability exponent, ``p >= 2``.
        alpha: fractional order in (0, 1).
        theta: constant of the lower bound ``K >= theta |z|^-(n + p alpha)``.
        family: one of ``"fractional"``, ``"scaled_fractional"``, ``"custom"``.
        multiplier: scale for the scaled fractional family.
        evaluator: for custom kernels, a vectorized callable mapping points of
            shape ``(..., n)`` to kernel values of shape ``(...)``.
        singularity_exponent: local blow-up rate of a custom kernel at the
            origin; defaults to ``n + p alpha``.
    """

    n: int
    p: float
    alpha: float
    theta: float = 1.0
    family: str = FRACTIONAL
    multiplier: float = 1.0
    evaluator: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    singularity_exponent: float | None = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise KernelError(f"dimension n must be 1 or 2, got {self.n}")
        if not self.p >= 2:
            raise KernelError(f"p >= 2 violated (p = {self.p})")
        if not 0.0 < self.alpha < 1.0:
            raise KernelError(f"0 < alpha < 1 violated (alpha = {self.alpha})")
        # equality n = p*alpha is admitted: the critical exponent is then infinite
        if self.n < self.p * self.alpha:
            raise KernelError(f"n >= p*alpha violated (n = {self.n}, p*alpha = {self.p * self.alpha})")
        if not self.theta > 0:
            raise KernelError(f"theta > 0 violated (theta = {self.theta})")
        if self.family not in FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}")
        if self.family == SCALED_FRACTIONAL and not self.multiplier >= self.theta:
            raise KernelError(f"multiplier >= theta violated ({self.multiplier} < {self.theta})")
        if self.family == CUSTOM and self.evaluator is None:
            raise KernelError("custom kernel requires an evaluator")

    @property
    def order(self) -> float:
        """The exponent ``n + p alpha`` of the reference fractional kernel."""
        return self.n + self.p * self.alpha

    @property
    def s(self) -> float:
        """``p alpha``, the effective smoothness exponent of the energy."""
        return self.p * self.alpha

    @property
    def sigma(self) -> float:
        """Singularity exponent used for quadrature grading."""
        if self.family == CUSTOM and self.singularity_exponent is not None:
            return float(self.singularity_exponent)
        return self.order

    @property
    def is_radial(self) -> bool:
        return self.family != CUSTOM

    @property
    def power_multiplier(self) -> float:
        """Coefficient ``mu`` for kernels of the form ``mu |z|^-(n + p alpha)``."""
        if self.family == FRACTIONAL:
            return 1.0
        if self.family == SCALED_FRACTIONAL:
            return float(self.multiplier)
        raise KernelError("custom kernels have no power-law multiplier")

    @property
    def critical_exponent(self) -> float:
        """``p* = n p / (n - p alpha)``; infinite when ``n = p alpha``."""
        gap = self.n - self.p * self.alpha
        return math.inf if gap <= 0 else self.n * self.p / gap

    def radial(self, r) -> np.ndarray:
        """Kernel as a function of ``|z|`` (radial families only)."""
        r = np.asarray(r, dtype=float)
        return self.power_multiplier * r ** (-self.order)

    def __call__(self, z) -> np.ndarray:
        """Vectorized evaluation on points of shape ``(..., n)``.

        No check for ``z = 0`` is done here; use :func:`eval_kernel` for a
        guarded single-point evaluation.
        """
        pts = _as_points(z, self.n)
        if self.family == CUSTOM:
            return np.asarray(self.evaluator(pts), dtype=float)
        return self.radial(np.linalg.norm(pts, axis=-1))

    def fractional(self) -> KernelSpec:
        """The pure fractional kernel with the same ``(n, p, alpha)``."""
        return KernelSpec(self.n, self.p, self.alpha, theta=1.0)


def eval_kernel(spec: KernelSpec, z) -> float:
    """Evaluate ``K(z)`` at a single nonzero point."""
    pts = _as_points(z, spec.n)
    if pts.ndim != 1:
        raise KernelError("eval_kernel expects a single point")
    if not np.linalg.norm(pts) > 0:
        raise KernelError("kernel singularity: K is undefined at z = 0")
    return float(spec(pts))


@dataclass(frozen=True)
class Sampling:
    """Resolution of the admissibility checks.

    ``radius`` is where the power-law tail fit starts, ``n_radial`` the
    number of sample shells and ``n_angles`` the angular resolution (n = 2).
    """

    radius: float = 10.0
    n_radial: int = 64
    n_angles: int = 64

    def __post_init__(self):
        if not (self.radius >= 1.0 and self.n_radial > 0 and self.n_angles > 0):
            raise KernelError("sampling resolution must be positive (radius >= 1)")


@dataclass(frozen=True)
class KernelCheckReport:
    mk_integral: float
    ball_integral: float
    tail_estimate: float
    integrable: bool
    lower_bound_ok: bool
    worst_lower_ratio: float
    symmetry_ok: bool
    max_asymmetry: float

    @property
    def admissible(self) -> bool:
        return self.integrable and self.lower_bound_ok and self.symmetry_ok

    def as_dict(self) -> dict:
        return {
            "mk_integral": self.mk_integral,
            "ball_integral": self.ball_integral,
            "tail_estimate": self.tail_estimate,
            "integrable": self.integrable,
            "lower_bound_ok": self.lower_bound_ok,
            "worst_lower_ratio": self.worst_lower_ratio,
            "symmetry_ok": self.symmetry_ok,
            "max_asymmetry": self.max_asymmetry,
            "admissible": self.admissible,
        }


def _directions(n: int, n_angles: int) -> tuple[np.ndarray, float]:
    """Unit directions and the quadrature weight of each on the unit sphere."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), 1.0
    ang = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1), 2 * np.pi / n_angles


def _shell(spec: KernelSpec, dirs: np.ndarray, dw: float, r) -> float:
    """Angular integral of ``K(r e)`` over the unit sphere."""
    return float(np.sum(spec(r * dirs)) * dw)


def check_admissible(spec: KernelSpec, sampling: Sampling | None = None) -> KernelCheckReport:
    """Numerically check integrability, lower bound and symmetry of ``K``.

    The integral of ``m K`` is split into the unit ball, the shell
    ``1 <= |z| <= radius`` and a tail beyond ``radius`` estimated from a
    power law fitted between ``radius`` and ``2 radius``. A tail decaying no
    faster than ``|z|^-n`` is reported as non-integrable.
    """
    sampling = sampling or Sampling()
    n, p, sigma = spec.n, spec.p, spec.sigma
    dirs, dw = _directions(n, sampling.n_angles)
    R = sampling.radius

    # r^p K(r) r^(n-1) ~ r^(p+n-1-sigma) near 0: absorb the power into an algebraic weight
    a = p + n - 1 - sigma
    with np.errstate(all="ignore"):
        if a <= -1:
            ball = math.inf
        else:
            ball, _ = integrate.quad(
                lambda r: _shell(spec, dirs, dw, max(r, 1e-12)) * max(r, 1e-12) ** sigma, 0.0, 1.0,
                weight="alg", wvar=(a, 0.0), limit=200, epsabs=1e-14, epsrel=1e-10,
            )
        mid, _ = integrate.quad(
            lambda r: _shell(spec, dirs, dw, r) * r ** (n - 1), 1.0, R,
            limit=200, epsabs=0.0, epsrel=1e-12,
        )
        k1 = _shell(spec, dirs, dw, R)
        k2 = _shell(spec, dirs, dw, 2 * R)
    if k1 > 0 and k2 > 0:
        decay = math.log(k1 / k2) / math.log(2.0)
        tail = k1 * R**n / (decay - n) if decay > n else math.inf
    elif k1 == 0 and k2 == 0:
        tail = 0.0
    else:
        tail = math.inf
    total = ball + mid + tail
    integrable = bool(np.isfinite(total) and total > 0)

    radii = R * (np.arange(1, sampling.n_radial + 1) / sampling.n_radial) ** 2
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    vals = spec(pts)
    ratio = vals * np.linalg.norm(pts, axis=-1) ** spec.order / spec.theta
    worst = float(np.min(ratio))
    mirror = spec(-pts)
    # pointwise relative gap, so the singularity does not dominate
    asym = float(np.max(np.abs(vals - mirror) / np.maximum(np.abs(vals), np.abs(mirror))))
    return KernelCheckReport(
        mk_integral=float(total),
        ball_integral=float(ball),
        tail_estimate=float(tail),
        integrable=integrable,
        lower_bound_ok=bool(worst >= 1.0 - 1e-12),
        worst_lower_ratio=worst,
        symmetry_ok=bool(asym <= 1e-12),
        max_asymmetry=asym,
    )
