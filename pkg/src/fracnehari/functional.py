"""The Euler functional J_lambda, its gradient and the reduced integrals.

    J(u) = A/p - lambda B/(q+1) - D/(r+1)
    A = ||u||_{X0}^p,  B = int h |u|^{q+1},  D = int b |u|^{r+1}

The triple (A, B, D) fully determines the fibering map t -> J(t u).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property

import numpy as np

from .discretization import (
    EnergyWeights,
    Field,
    Mesh,
    _signed_power,
    _values,
    assemble_energy_weights,
    operator_functional,
    seminorm_p,
)
from .expressions import sample_on_nodes
from .kernel import KernelSpec


class ProblemError(ValueError):
    """A standing assumption on the exponents or weights is violated."""


@dataclass(frozen=True)
class FiberParams:
    """Exponents and lambda; all the fibering analysis needs besides (A, B, D)."""

    p: float
    q: float
    r: float
    lam: float


@dataclass
class ProblemSpec:
    """The discrete problem ``-L_K u = lambda h |u|^{q-1} u + b |u|^{r-1} u``.

    ``h_values`` and ``b_values`` are the weights sampled at the mesh nodes.
    The energy weights are assembled on first use and shared by copies made
    with :meth:`with_lambda`.
    """

    kernel: KernelSpec
    mesh: Mesh
    q: float
    r: float
    lam: float
    h_values: np.ndarray
    b_values: np.ndarray
    h_expr: str | None = field(default=None, compare=False)
    b_expr: str | None = field(default=None, compare=False)

    def __post_init__(self):
        p, q, r = self.kernel.p, self.q, self.r
        pstar = self.kernel.critical_exponent
        if not q > 0:
            raise ProblemError(f"0 < q violated (q = {q})")
        if not q < p - 1:
            raise ProblemError(f"q < p-1 violated (q = {q}, p-1 = {p - 1})")
        if not p - 1 < r:
            raise ProblemError(f"p-1 < r violated (r = {r}, p-1 = {p - 1})")
        if not r < pstar - 1:
            raise ProblemError(f"r < p*-1 violated (r = {r}, p*-1 = {pstar - 1})")
        if not self.lam > 0:
            raise ProblemError(f"lambda > 0 violated (lambda = {self.lam})")
        if self.kernel.n != self.mesh.n:
            raise ProblemError("kernel and mesh dimensions differ")
        self.h_values = np.asarray(self.h_values, dtype=float).ravel()
        self.b_values = np.asarray(self.b_values, dtype=float).ravel()
        for name, vals in (("h", self.h_values), ("b", self.b_values)):
            if vals.shape != (self.mesh.size,):
                raise ProblemError(f"{name} must have one value per node")
            if not np.all(np.isfinite(vals)):
                raise ProblemError(f"{name} must be bounded")

    @classmethod
    def from_expressions(cls, kernel, mesh, q, r, lam, h="1", b="1") -> ProblemSpec:
        return cls(
            kernel, mesh, q, r, lam,
            sample_on_nodes(h, mesh.nodes), sample_on_nodes(b, mesh.nodes),
            h_expr=str(h), b_expr=str(b),
        )

    @property
    def p(self) -> float:
        return self.kernel.p

    @property
    def params(self) -> FiberParams:
        return FiberParams(self.p, self.q, self.r, self.lam)

    @property
    def h_sup(self) -> float:
        return float(np.max(np.abs(self.h_values)))

    @property
    def b_plus_sup(self) -> float:
        return float(np.max(np.maximum(self.b_values, 0.0)))

    @cached_property
    def weights(self) -> EnergyWeights:
        return assemble_energy_weights(self.mesh, self.kernel)

    def with_lambda(self, lam: float) -> ProblemSpec:
        new = replace(self, lam=lam)
        if "weights" in self.__dict__:
            new.__dict__["weights"] = self.weights
        return new

    def field(self, values) -> Field:
        return Field(self.mesh, values)


@dataclass(frozen=True)
class ReducedIntegrals:
    A: float
    B: float
    D: float

    def scaled(self, t: float, params: FiberParams) -> ReducedIntegrals:
        """Integrals of ``t u`` from those of ``u``."""
        return ReducedIntegrals(
            t**params.p * self.A, t ** (params.q + 1) * self.B, t ** (params.r + 1) * self.D
        )


def reduced_integrals(spec: ProblemSpec, u) -> ReducedIntegrals:
    v = _values(u, spec.weights)
    c = spec.mesh.cell_measures
    A = seminorm_p(v, spec.weights)
    B = float(c @ (spec.h_values * np.abs(v) ** (spec.q + 1)))
    D = float(c @ (spec.b_values * np.abs(v) ** (spec.r + 1)))
    return ReducedIntegrals(A, B, D)


def energy_from_integrals(ri: ReducedIntegrals, params: FiberParams) -> float:
    p, q, r, lam = params.p, params.q, params.r, params.lam
    return ri.A / p - lam * ri.B / (q + 1) - ri.D / (r + 1)


def energy(spec: ProblemSpec, u) -> float:
    """``J_lambda(u)``."""
    return energy_from_integrals(reduced_integrals(spec, u), spec.params)


def derivative(spec: ProblemSpec, u) -> np.ndarray:
    """Vector ``l`` with ``l . v = J'(u) v`` for nodal directions ``v``."""
    v = _values(u, spec.weights)
    c = spec.mesh.cell_measures
    forcing = spec.lam * spec.h_values * _signed_power(v, spec.q) + spec.b_values * _signed_power(v, spec.r)
    return operator_functional(v, spec.weights) - c * forcing


def gradient(spec: ProblemSpec, u) -> Field:
    """Field ``g`` with ``sum_i c_i g_i v_i = J'(u) v`` for every ``v``.

    ``|u|^{q-1} u`` is extended by 0 at ``u = 0`` (continuous for ``q > 0``).
    """
    return Field(spec.mesh, derivative(spec, u) / spec.mesh.cell_measures)


class FiberingCase(str, Enum):
    H_MINUS_B_MINUS = "H-B-"
    H_MINUS_B_PLUS = "H-B+"
    H_PLUS_B_MINUS = "H+B-"
    H_PLUS_B_PLUS = "H+B+"
    BOUNDARY_H0 = "H0"
    BOUNDARY_B0 = "B0"

    @property
    def label(self) -> str:
        return {
            "H-B-": "H-∩B-", "H-B+": "H-∩B+", "H+B-": "H+∩B-", "H+B+": "H+∩B+",
            "H0": "Boundary(H0)", "B0": "Boundary(B0)",
        }[self.value]


DEFAULT_TOL_SIGN = 1e-12


def classify(ri: ReducedIntegrals, tol_sign: float = DEFAULT_TOL_SIGN) -> FiberingCase:
    """Sign class of ``u`` from ``B`` and ``D`` with a dead band ``tol_sign * A``."""
    if tol_sign < 0:
        raise ValueError("tol_sign must be nonnegative")
    band = tol_sign * ri.A
    if abs(ri.B) <= band:
        return FiberingCase.BOUNDARY_H0
    if abs(ri.D) <= band:
        return FiberingCase.BOUNDARY_B0
    if ri.B > 0:
        return FiberingCase.H_PLUS_B_PLUS if ri.D > 0 else FiberingCase.H_PLUS_B_MINUS
    return FiberingCase.H_MINUS_B_PLUS if ri.D > 0 else FiberingCase.H_MINUS_B_MINUS

