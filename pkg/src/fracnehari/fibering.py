"""Fibering maps t -> J(t u) and the lambda_0 threshold.

Everything here is scalar and exact given the reduced integrals (A, B, D):

    phi(t)   = t^p A/p - lam t^{q+1} B/(q+1) - t^{r+1} D/(r+1)
    phi'(t)  = t^q (m(t) - lam B),   m(t) = t^{p-1-q} A - t^{r-q} D

Critical points are the solutions of ``m(t) = lam B``. When ``D > 0``, ``m``
rises to a single maximum at ``t_hat`` and then decreases to -inf; when
``D <= 0`` it is strictly increasing. Roots are located by bisection on
brackets read off this shape, never by Newton steps (phi'' blows up at 0
for q < 1).
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from .discretization import EnergyWeights, _signed_power, assemble_energy_weights, lp_norm, operator_functional, seminorm_p
from .functional import FiberingCase, FiberParams, ProblemSpec, ReducedIntegrals, classify, energy_from_integrals

log = logging.getLogger(__name__)

ROOT_TOL = 1e-12


class FiberingError(ValueError):
    pass


class ProjectionError(FiberingError):
    pass


class Lambda0Error(RuntimeError):
    pass


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


class RootKind(str, Enum):
    MIN = "min"
    MAX = "max"
    INFLECTION = "inflection"


def _params(spec) -> FiberParams:
    return spec.params if isinstance(spec, ProblemSpec) else spec


def _check_t(t, strict=False):
    if t < 0 or (strict and t == 0):
        raise FiberingError(f"fibering maps need t {'>' if strict else '>='} 0, got {t}")


def phi(ri: ReducedIntegrals, spec, t: float) -> float:
    _check_t(t)
    return energy_from_integrals(ri.scaled(t, _params(spec)), _params(spec))


def phi_prime(ri: ReducedIntegrals, spec, t: float) -> float:
    _check_t(t)
    P = _params(spec)
    return t ** (P.p - 1) * ri.A - P.lam * t**P.q * ri.B - t**P.r * ri.D


def phi_second(ri: ReducedIntegrals, spec, t: float) -> float:
    P = _params(spec)
    _check_t(t, strict=P.q < 1)
    return (
        (P.p - 1) * t ** (P.p - 2) * ri.A
        - P.q * P.lam * t ** (P.q - 1) * ri.B
        - P.r * t ** (P.r - 1) * ri.D
    )


def m_u(ri: ReducedIntegrals, spec, t: float) -> float:
    _check_t(t, strict=True)
    P = _params(spec)
    return t ** (P.p - 1 - P.q) * ri.A - t ** (P.r - P.q) * ri.D


def m_u_argmax(ri: ReducedIntegrals, spec) -> float | None:
    """Maximizer ``t_hat`` of ``m_u`` when ``D > 0``, else ``None``."""
    if ri.D <= 0:
        return None
    P = _params(spec)
    ratio = (P.p - 1 - P.q) * ri.A / ((P.r - P.q) * ri.D)
    return ratio ** (1.0 / (P.r - P.p + 1))


def root_residual(ri: ReducedIntegrals, spec, t: float) -> float:
    """``|phi'(t)|`` relative to the largest of its three terms."""
    P = _params(spec)
    terms = (t ** (P.p - 1) * ri.A, P.lam * t**P.q * abs(ri.B), t**P.r * abs(ri.D))
    scale = max(terms)
    return abs(phi_prime(ri, spec, t)) / scale if scale > 0 else 0.0


@dataclass(frozen=True)
class Root:
    t: float
    kind: RootKind
    phi: float
    phi_second: float
    residual: float


@dataclass(frozen=True)
class FiberingReport:
    case: FiberingCase
    A: float
    B: float
    D: float
    roots: tuple[Root, ...]
    status: str
    t_hat: float | None = None
    m_max: float | None = None
    t_star: float | None = None
    F_at_t_star: float | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def phi_at_roots(self) -> tuple[float, ...]:
        return tuple(rt.phi for rt in self.roots)

    @property
    def kinds(self) -> tuple[RootKind, ...]:
        return tuple(rt.kind for rt in self.roots)

    def root(self, branch: Branch) -> Root | None:
        want = RootKind.MIN if Branch(branch) is Branch.PLUS else RootKind.MAX
        found = [rt for rt in self.roots if rt.kind is want]
        return found[-1] if found else None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["case"] = self.case.label
        d["roots"] = [{**asdict(rt), "kind": rt.kind.value} for rt in self.roots]
        d["notes"] = list(self.notes)
        return d


def _bisect(g, lo: float, hi: float) -> float:
    """Geometric bisection of a sign change of ``g`` on ``[lo, hi]`` to float resolution."""
    glo = g(lo)
    for _ in range(400):
        mid = lo * math.sqrt(hi / lo)
        if not lo < mid < hi:
            break
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return lo if abs(g(lo)) <= abs(g(hi)) else hi


def _t_max(ri: ReducedIntegrals, P: FiberParams) -> float:
    scales = [1.0]
    if ri.D != 0:
        scales.append((ri.A / abs(ri.D)) ** (1.0 / (P.r - P.p + 1)))
    if ri.B != 0:
        scales.append((P.lam * abs(ri.B) / ri.A) ** (1.0 / (P.p - 1 - P.q)))
    return 10.0 * max(scales)


def critical_points(ri: ReducedIntegrals, spec, tol_sign: float = 1e-12) -> FiberingReport:
    """All critical points of the fibering map, with their kinds.

    The outcome follows the sign classes: H-B- has none; H-B+ one maximum;
    H+B- one minimum; H+B+ a minimum and a maximum ``t1 < t_hat < t2`` if
    ``lam B < max m_u``, a single inflection point at equality and none above.
    """
    if not ri.A > 0:
        raise FiberingError("zero field: A = 0")
    P = _params(spec)
    case = classify(ri, tol_sign)
    lamB = P.lam * ri.B

    def g(t):
        return m_u(ri, P, t) - lamB

    t_hat = m_u_argmax(ri, P)
    m_max = m_u(ri, P, t_hat) if t_hat is not None else None
    hi = _t_max(ri, P)
    brackets: list[tuple[float, float]] = []
    inflection = None
    status = "ok"

    def lower(limit):
        lo = min(0.5 * (lamB / ri.A) ** (1.0 / (P.p - 1 - P.q)), 0.5 * limit)
        while g(lo) >= 0:
            lo *= 0.5
        return lo

    def upper(start, sign):
        top = max(hi, 2 * start)
        while (g(top) > 0) != (sign > 0):
            top *= 2
        return top

    if t_hat is not None:
        if lamB > 0:
            gap = m_max - lamB
            if gap > ROOT_TOL * max(abs(m_max), lamB):
                brackets = [(lower(t_hat), t_hat), (t_hat, upper(t_hat, -1))]
            elif gap >= -ROOT_TOL * max(abs(m_max), lamB):
                inflection = t_hat
                status = "inflection"
            else:
                status = "above_threshold"
        else:
            brackets = [(t_hat, upper(t_hat, -1))]
    elif lamB > 0:
        lo = lower(hi)
        brackets = [(lo, upper(lo, +1))]
    else:
        status = "no_roots"

    ts = [_bisect(g, a, b) for a, b in brackets]
    if inflection is not None:
        ts = [inflection]
    roots = []
    for t in ts:
        s2 = phi_second(ri, P, t)
        if inflection is not None or s2 == 0:
            kind = RootKind.INFLECTION
        else:
            kind = RootKind.MIN if s2 > 0 else RootKind.MAX
        roots.append(Root(t, kind, phi(ri, P, t), s2, root_residual(ri, P, t)))

    notes = []
    if case is FiberingCase.H_PLUS_B_MINUS and roots:
        notes.append("H+∩B- root is a global minimum of the fibering map (phi'' > 0): assigned to N+")
    t_star = F_star = None
    if ri.D > 0:
        t_star, F_star = t_star_and_delta(ri, P)
    return FiberingReport(case, ri.A, ri.B, ri.D, tuple(roots), status, t_hat, m_max, t_star, F_star, tuple(notes))


def t_star_and_delta(ri: ReducedIntegrals, spec) -> tuple[float, float]:
    """Maximizer ``t*`` of ``F(t) = t^p A/p - t^{r+1} D/(r+1)`` and ``F(t*)``."""
    if not ri.D > 0:
        raise FiberingError("t* exists only for D > 0 (u in B+)")
    P = _params(spec)
    k = P.r - P.p + 1
    t_star = (ri.A / ri.D) ** (1.0 / k)
    F = (1.0 / P.p - 1.0 / (P.r + 1)) * math.exp(((P.r + 1) * math.log(ri.A) - P.p * math.log(ri.D)) / k)
    F2 = (P.p - P.r - 1) * math.exp(((P.r - 1) * math.log(ri.A) - (P.p - 2) * math.log(ri.D)) / k)
    assert F2 < 0
    return t_star, F


def project(ri: ReducedIntegrals, spec, branch: Branch) -> float:
    """Scale ``t`` putting ``t u`` on the requested Nehari branch.

    Plus returns the fibering minimum, Minus the fibering maximum.
    """
    report = critical_points(ri, spec)
    root = report.root(branch)
    if root is None:
        raise ProjectionError(
            f"no {Branch(branch).value} branch point on this ray "
            f"(case {report.case.label}, status {report.status})"
        )
    return root.t


# --- lambda_0 --------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    """Randomized search for discrete embedding constants."""

    starts: int = 64
    steps: int = 200
    seed: int = 42

    def __post_init__(self):
        if self.starts < 1 or self.steps < 1:
            raise ValueError("sampler needs at least one start and one step")


@dataclass(frozen=True)
class Lambda0Estimate:
    """Discrete constants and the resulting conservative threshold.

    ``S_q1``, ``S_r1`` bound ``||u||_{L^m} / ||u||_{W^{alpha,p}}``; ``M`` bounds
    ``||u||_{W^{alpha,p}} / ||u||_{X0}``. All are sampled suprema (lower
    bounds on the true discrete ones), so ``lambda0`` is a desk-scale estimate.
    """

    S_q1: float
    S_r1: float
    S_p: float
    C_equiv: float
    c_theta: float
    M: float
    delta: float
    c_const: float
    lambda0: float
    h_sup: float
    b_plus_sup: float
    p: float
    q: float
    starts: int
    steps: int
    seed: int
    conservative_estimate: bool = True

    def delta1(self, lam: float) -> float:
        """Lower bound ``delta^{(q+1)/p} (delta^{(p-1-q)/p} - lam c)`` on J over N-."""
        p, q = self.p, self.q
        return self.delta ** ((q + 1) / p) * (self.delta ** ((p - 1 - q) / p) - lam * self.c_const)

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio_objective(num_m, num_c, den_weights, den_c, p, den_lp):
    """``-log(||u||_m / (||u||_p [if den_lp] + ||u||_E))`` and its gradient."""

    def f(v):
        a = np.abs(v)
        num = num_c @ a**num_m
        A = seminorm_p(v, den_weights, p)
        if num <= 0 or A <= 0:
            return 0.0, np.zeros_like(v)
        L = (den_c @ a**p) ** (1 / p) if den_lp else 0.0
        den = L + A ** (1 / p)
        val = -(math.log(num) / num_m - math.log(den))
        dnum = num_c * _signed_power(v, num_m - 1) / num
        dden = A ** (1 / p - 1) * operator_functional(v, den_weights, p)
        if den_lp:
            dden = dden + den_c * _signed_power(v, p - 1) / L ** (p - 1)
        return val, -(dnum - dden / den)

    return f


def _sup_ratio(objective, N, rng, starts, steps) -> float:
    best = 0.0
    grid = np.linspace(0, 1, N)
    for k in range(starts):
        if k % 2 == 0:
            v0 = rng.random(N) + 0.1
        else:
            c, w = rng.random(), 0.05 + 0.5 * rng.random()
            v0 = np.exp(-(((grid - c) / w) ** 2)) + 0.01 * rng.random(N)
        res = optimize.minimize(objective, v0, jac=True, method="L-BFGS-B", options={"maxiter": steps})
        val = math.exp(-min(res.fun, objective(v0)[0]))
        best = max(best, val)
    return best


def estimate_lambda0(spec: ProblemSpec, sampler: SamplerConfig | None = None) -> Lambda0Estimate:
    """Estimate ``lambda_0 = delta^{(p-1-q)/p} / c`` from sampled discrete constants.

    The fibering threshold needs two embedding constants (for exponents q+1
    and r+1) into the fractional Sobolev norm and the constant ``M``
    comparing that norm with the X0 norm, ``M = c(theta) (1 + S_p)`` with
    ``c(theta) = max(1, theta^{-1/p})`` and ``S_p = sup ||u||_p / ||u||_X0``.
    Each supremum is searched by local ascent from seeded random starts.
    """
    sampler = sampler or SamplerConfig()
    p, q, r = spec.p, spec.q, spec.r
    mesh = spec.mesh
    c = mesh.cell_measures
    h_sup, b_sup = spec.h_sup, spec.b_plus_sup
    if not (h_sup > 0 and b_sup > 0):
        raise Lambda0Error("estimation failure: lambda_0 needs ||h||_inf > 0 and ||b+||_inf > 0")

    x0_weights = spec.weights
    if spec.kernel.family == "fractional":
        w_weights = x0_weights
    else:
        w_weights = assemble_energy_weights(mesh, spec.kernel.fractional())

    rng = np.random.default_rng(sampler.seed)
    N = mesh.size
    S_p = _sup_ratio(_ratio_objective(p, c, x0_weights, c, p, False), N, rng, sampler.starts, sampler.steps)
    S_q1 = _sup_ratio(_ratio_objective(q + 1, c, w_weights, c, p, True), N, rng, sampler.starts, sampler.steps)
    S_r1 = _sup_ratio(_ratio_objective(r + 1, c, w_weights, c, p, True), N, rng, sampler.starts, sampler.steps)
    consts = (S_p, S_q1, S_r1)
    if not all(np.isfinite(consts)) or min(consts) <= 1e-300:
        raise Lambda0Error(f"estimation failure: degenerate embedding constants {consts}")

    C_equiv = (1.0 + S_p) ** p
    c_theta = max(1.0, spec.kernel.theta ** (-1.0 / p))
    M = c_theta * (1.0 + S_p)
    k = r - p + 1
    delta = k / (p * (r + 1)) * (1.0 / (b_sup**p * (M * S_r1) ** (p * (r + 1)))) ** (1.0 / k)
    c_const = h_sup * (M * S_q1) ** (q + 1) * (p * (r + 1) / k) ** ((q + 1) / p) / (q + 1)
    lambda0 = delta ** ((p - 1 - q) / p) / c_const
    if not (np.isfinite(lambda0) and lambda0 > 0 and delta > 0):
        raise Lambda0Error(f"estimation failure: delta = {delta}, lambda0 = {lambda0}")
    log.info("lambda0 estimate %.6g (delta %.6g, c %.6g)", lambda0, delta, c_const)
    return Lambda0Estimate(
        S_q1, S_r1, S_p, C_equiv, c_theta, M, delta, c_const, lambda0, h_sup, b_sup, p, q,
        sampler.starts, sampler.steps, sampler.seed,
    )


def lp_ratio(u, spec: ProblemSpec, m: float) -> float:
    """``||u||_{L^m} / ||u||_{X0}`` for a field on ``spec.mesh``."""
    return lp_norm(u, m, spec.mesh) / seminorm_p(u, spec.weights) ** (1.0 / spec.p)
