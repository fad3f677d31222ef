"""Two non-negative solutions of a concave-convex nonlocal p-Laplacian problem
by constrained minimization on the Nehari manifold."""

from .discretization import (
    EnergyWeights,
    Field,
    Mesh,
    MeshError,
    apply_operator,
    assemble_energy_weights,
    build_mesh,
    hilbert_matrix,
    lp_norm,
    operator_functional,
    seminorm_p,
)
from .expressions import Expression, ExpressionError
from .fibering import (
    Branch,
    FiberingError,
    FiberingReport,
    Lambda0Error,
    Lambda0Estimate,
    ProjectionError,
    RootKind,
    SamplerConfig,
    critical_points,
    estimate_lambda0,
    phi,
    phi_prime,
    phi_second,
    project,
    t_star_and_delta,
)
from .functional import (
    FiberingCase,
    FiberParams,
    ProblemError,
    ProblemSpec,
    ReducedIntegrals,
    classify,
    derivative,
    energy,
    gradient,
    reduced_integrals,
)
from .kernel import KernelCheckReport, KernelError, KernelSpec, check_admissible, eval_kernel
from .solver import (
    Certificate,
    SolverConfig,
    SolverResult,
    minimize_branch,
    solve_both,
    verify_solution,
)

__version__ = "0.1.0"
