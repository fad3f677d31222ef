"""Two non-negative solutions by descent on the Nehari branches.

Each branch is handled through the reduced functional ``w -> J(t(w) w)``
where ``t(w)`` is the branch root of the fibering map (minimum for N+,
maximum for N-). Because ``phi'(t) = 0`` at that root, the derivative of the
reduced functional at a Nehari point is ``J'(w)`` itself, so one iteration is

    w <- max(w - eta S^{-1} J'(w), 0)      (descent + truncation)
    w <- t(w) w                            (back onto the branch)

with ``S`` the quadratic (p = 2) energy matrix built from the same weights
(a Sobolev-gradient preconditioner) and ``eta`` chosen by Armijo
backtracking on the reduced energy.
"""

from __future__ import annotations

import json
import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .discretization import Field, hilbert_matrix, lp_norm, seminorm_p
from .fibering import Branch, FiberingError, Lambda0Estimate, RootKind, critical_points, phi_second
from .functional import ProblemSpec, derivative, energy_from_integrals, reduced_integrals

log = logging.getLogger(__name__)


class BranchError(RuntimeError):
    """The starting field has no point on the requested Nehari branch."""


@dataclass(frozen=True)
class SolverConfig:
    max_outer_iters: int = 3000
    initial_step: float = 1.0
    shrink: float = 0.5
    c_dec: float = 1e-4
    min_step: float = 1e-16
    tol_residual: float = 1e-10
    tol_step: float = 1e-15
    multistart: int = 4
    seed: int = 42
    truncate_negative: bool = True

    def __post_init__(self):
        if not (self.tol_residual > 0 and self.tol_step > 0 and self.initial_step > 0):
            raise ValueError("solver tolerances and the initial step must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if self.multistart < 1 or self.max_outer_iters < 1:
            raise ValueError("multistart and max_outer_iters must be >= 1")


@dataclass(frozen=True)
class Certificate:
    energy: float
    nehari_residual: float
    dual_residual: float
    phi_second_1: float
    branch: str
    negative_part: float
    A: float

    def holds(self, tol: float = 1e-8, p: float = 2.0) -> bool:
        margin = 1e-10 * (p - 1) * self.A
        return (
            self.nehari_residual <= tol
            and self.dual_residual <= tol
            and abs(self.phi_second_1) > margin
        )

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class BranchRun:
    branch: Branch
    field: Field
    energy: float
    residual: float
    iterations: int
    status: str
    energies: list[float]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


class _Preconditioner:
    def __init__(self, spec: ProblemSpec):
        self.factor = linalg.cho_factor(hilbert_matrix(spec.weights))

    def __call__(self, ell):
        return linalg.cho_solve(self.factor, ell)


def _dual_residual(ell, d, A, p) -> float:
    return math.sqrt(max(float(ell @ d), 0.0)) / A ** ((p - 1) / p)


def _energy_scale(spec: ProblemSpec, w: np.ndarray, A: float) -> float:
    ri = reduced_integrals(spec, w)
    P = spec.params
    return A / P.p + P.lam * abs(ri.B) / (P.q + 1) + abs(ri.D) / (P.r + 1)


def _branch_point(spec: ProblemSpec, w: np.ndarray, branch: Branch):
    """``(t, energy at t w, A of w)`` or ``None`` if the ray misses the branch."""
    ri = reduced_integrals(spec, w)
    if not ri.A > 0:
        return None
    report = critical_points(ri, spec.params)
    root = report.root(branch)
    if root is None:
        return None
    return root.t, root.phi, ri


def hessian(spec: ProblemSpec, u) -> np.ndarray:
    """Matrix of the second derivative ``J''(u)`` acting on nodal directions."""
    v = np.asarray(u.values if isinstance(u, Field) else u, dtype=float)
    p, q, r = spec.p, spec.q, spec.r
    W = spec.weights.pair
    T = 2.0 * (p - 1) * W * np.abs(v[:, None] - v[None, :]) ** (p - 2)
    H = np.diag(T.sum(axis=1)) - T
    a = np.abs(v)
    loc = spec.weights.exterior * (p - 1) * a ** (p - 2)
    nz = a > 0
    conc = np.zeros_like(v)
    conc[nz] = spec.lam * spec.h_values[nz] * q * a[nz] ** (q - 1)
    loc = loc - spec.mesh.cell_measures * (conc + spec.b_values * r * a ** (r - 1))
    return H + np.diag(loc)


def _newton_candidate(spec, w, ell, E, floor, residual, branch, precond, config):
    """Newton step on ``J'(w) = 0`` followed by truncation and re-projection.

    Used once energy decreases drop below the rounding floor; accepted only
    if the dual residual decreases and the energy does not rise above the floor.
    """
    try:
        step = linalg.solve(hessian(spec, w), ell, assume_a="sym")
    except (linalg.LinAlgError, ValueError):
        return None
    trial = w - step
    if config.truncate_negative:
        trial = np.maximum(trial, 0.0)
    if not (np.all(np.isfinite(trial)) and np.any(trial)):
        return None
    point = _branch_point(spec, trial, branch)
    if point is None:
        return None
    tt, Et, rt = point
    cand = tt * trial
    A = rt.A * tt**spec.p
    if Et > E + floor:
        return None
    ell_t = derivative(spec, cand)
    if _dual_residual(ell_t, precond(ell_t), A, spec.p) >= residual:
        return None
    return cand, Et, A


def minimize_branch(
    spec: ProblemSpec,
    config: SolverConfig,
    branch: Branch,
    init,
    trace=None,
    precond: _Preconditioner | None = None,
) -> BranchRun:
    """Minimize ``J`` over one Nehari branch starting from ``init``.

    Args:
        trace: optional callable receiving one dict per accepted iteration.

    Raises:
        BranchError: if the ray through ``init`` has no point on the branch.
    """
    branch = Branch(branch)
    p = spec.p
    w = np.array(init.values if isinstance(init, Field) else init, dtype=float)
    if config.truncate_negative:
        w = np.maximum(w, 0.0)
    start = _branch_point(spec, w, branch)
    if start is None:
        raise BranchError(f"initial field has no point on the {branch.value} branch")
    precond = precond or _Preconditioner(spec)
    t, E, ri = start
    w = t * w
    A = ri.A * t**p
    energies = [E]
    eta = config.initial_step
    eta_cap = 1e3 * config.initial_step
    status = "max_iters"
    residual = math.inf
    it = 0
    for it in range(config.max_outer_iters + 1):
        ell = derivative(spec, w)
        d = precond(ell)
        slope = float(ell @ d)
        residual = _dual_residual(ell, d, A, p)
        if residual <= config.tol_residual:
            status = "converged"
            break
        if it == config.max_outer_iters:
            break
        floor = 64 * np.finfo(float).eps * _energy_scale(spec, w, A)
        accepted = None
        if config.c_dec * eta * slope <= floor:
            accepted = _newton_candidate(spec, w, ell, E, floor, residual, branch, precond, config)
        while accepted is None and eta >= config.min_step:
            trial = w - eta * d
            if config.truncate_negative:
                trial = np.maximum(trial, 0.0)
            point = _branch_point(spec, trial, branch) if np.any(trial) else None
            if point is not None:
                tt, Et, rt = point
                cand = (tt * trial, Et, rt.A * tt**p)
                if Et <= E - config.c_dec * eta * slope:
                    accepted = cand
                    break
                # below the rounding floor of J the Armijo test is blind: require a
                # smaller residual and no energy increase beyond that floor instead
                if config.c_dec * eta * slope <= floor and Et <= E + floor:
                    ell_t = derivative(spec, cand[0])
                    if _dual_residual(ell_t, precond(ell_t), cand[2], p) < residual:
                        accepted = cand
                        break
            eta *= config.shrink
        if accepted is None:
            status = "stagnation"
            break
        new_w, E_new, A = accepted
        step = np.linalg.norm(new_w - w) / np.linalg.norm(w)
        w, E = new_w, E_new
        energies.append(E)
        if trace is not None:
            trace({"branch": branch.value, "iter": it + 1, "energy": E, "residual": residual, "step": eta})
        if step <= config.tol_step:
            status = "step_tolerance"
            ell = derivative(spec, w)
            residual = _dual_residual(ell, precond(ell), A, p)
            if residual <= config.tol_residual:
                status = "converged"
            break
        eta = min(2.0 * eta, eta_cap)
    return BranchRun(branch, Field(spec.mesh, w), E, residual, it, status, energies)


def verify_solution(spec: ProblemSpec, u) -> Certificate:
    """Criticality certificate for a candidate solution.

    A minimizer on N+ or N- with ``phi''(1) != 0`` is a free critical point
    (the Lagrange multiplier of the Nehari constraint vanishes), so small
    Nehari and dual residuals together with a nonzero ``phi''(1)`` certify a
    solution.
    """
    v = np.asarray(u.values if isinstance(u, Field) else u, dtype=float)
    ri = reduced_integrals(spec, v)
    p = spec.p
    if not ri.A > 0:
        return Certificate(0.0, math.inf, math.inf, 0.0, "degenerate", 0.0, 0.0)
    ell = derivative(spec, v)
    d = _Preconditioner(spec)(ell)
    s2 = phi_second(ri, spec.params, 1.0)
    neg = seminorm_p(np.maximum(-v, 0.0), spec.weights) ** (1 / p) / ri.A ** (1 / p)
    nehari = abs(ri.A - spec.lam * ri.B - ri.D) / ri.A
    branch = "plus" if s2 > 0 else "minus" if s2 < 0 else "degenerate"
    return Certificate(
        energy_from_integrals(ri, spec.params), nehari, _dual_residual(ell, d, ri.A, p), s2, branch, neg, ri.A
    )


def initial_fields(spec: ProblemSpec, count: int, seed: int) -> list[np.ndarray]:
    """First start: principal eigenvector of the quadratic energy; the rest random bumps."""
    mesh = spec.mesh
    S = hilbert_matrix(spec.weights)
    _, vec = linalg.eigh(S, np.diag(mesh.cell_measures), subset_by_index=[0, 0])
    first = np.abs(vec[:, 0])
    inits = [first / np.max(first)]
    rng = np.random.default_rng(seed)
    lo = np.array([a for a, _ in mesh.bounds])
    span = np.array([b - a for a, b in mesh.bounds])
    for _ in range(count - 1):
        center = lo + span * rng.uniform(0.15, 0.85, size=mesh.n)
        width = span * rng.uniform(0.1, 0.4)
        z = np.sum(((mesh.nodes - center) / width) ** 2, axis=1)
        inits.append(np.exp(-z) + 1e-3)
    return inits


@dataclass
class SolverResult:
    status: str
    u_plus: BranchRun | None
    u_minus: BranchRun | None
    certificates: dict[str, Certificate]
    negative_part_norms: dict[str, float]
    distinctness: float | None
    lambda0: Lambda0Estimate | None
    delta1: float | None
    wall_time: float
    branch_status: dict[str, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        """JSON-ready record; wall time is left out so repeated runs compare equal."""
        out = {"status": self.status, "branch_status": self.branch_status, "notes": self.notes}
        for name, run in (("plus", self.u_plus), ("minus", self.u_minus)):
            out[name] = None if run is None else {
                "energy": run.energy,
                "dual_residual": run.residual,
                "iterations": run.iterations,
                "status": run.status,
                "certificate": self.certificates[name].as_dict(),
                "negative_part_norm": self.negative_part_norms[name],
            }
        out["distinctness"] = self.distinctness
        out["delta1"] = self.delta1
        out["lambda0"] = None if self.lambda0 is None else self.lambda0.as_dict()
        return out


def solve_both(
    spec: ProblemSpec,
    config: SolverConfig | None = None,
    lambda0: Lambda0Estimate | None = None,
    verbose: bool = False,
) -> SolverResult:
    """Run the multistart descent on both branches and keep the best run of each."""
    config = config or SolverConfig()
    tic = time.perf_counter()
    notes = []
    if lambda0 is not None and spec.lam >= lambda0.lambda0:
        msg = f"lambda = {spec.lam:g} is not below the lambda0 estimate {lambda0.lambda0:g}"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    trace = (lambda rec: print(json.dumps(rec))) if verbose else None
    precond = _Preconditioner(spec)
    best: dict[Branch, BranchRun | None] = {Branch.PLUS: None, Branch.MINUS: None}
    reached = {Branch.PLUS: False, Branch.MINUS: False}
    for init in initial_fields(spec, config.multistart, config.seed):
        for branch in Branch:
            try:
                run = minimize_branch(spec, config, branch, init, trace, precond)
            except (BranchError, FiberingError):
                continue
            reached[branch] = True
            cur = best[branch]
            if cur is None or (run.converged, -run.energy) > (cur.converged, -cur.energy):
                best[branch] = run

    runs = {"plus": best[Branch.PLUS], "minus": best[Branch.MINUS]}
    branch_status = {}
    for name, br in (("plus", Branch.PLUS), ("minus", Branch.MINUS)):
        run = runs[name]
        branch_status[name] = "no_branch_point" if not reached[br] else run.status
    certs, negs = {}, {}
    for name, run in runs.items():
        if run is not None:
            certs[name] = verify_solution(spec, run.field)
            negs[name] = certs[name].negative_part

    distinct = None
    if runs["plus"] is not None and runs["minus"] is not None:
        p = spec.p
        a, b = runs["plus"].field.values, runs["minus"].field.values
        scale = max(lp_norm(a, p, spec.mesh), lp_norm(b, p, spec.mesh))
        distinct = lp_norm(a - b, p, spec.mesh) / scale if scale > 0 else 0.0

    both = all(run is not None and run.converged for run in runs.values())
    if not any(reached.values()):
        status = "NoNehariPoints"
    elif both and distinct is not None and distinct > 1e-3:
        status = "converged"
    else:
        status = "partial"
        if both:
            notes.append(f"branches converged to nearly the same field (distinctness {distinct:.3g})")
    delta1 = None if lambda0 is None else lambda0.delta1(spec.lam)
    return SolverResult(
        status, runs["plus"], runs["minus"], certs, negs, distinct, lambda0, delta1,
        time.perf_counter() - tic, branch_status, notes,
    )
