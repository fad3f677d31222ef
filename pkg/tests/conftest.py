import warnings

import numpy as np
import pytest

from fracnehari import KernelSpec, ProblemSpec, SolverConfig, build_mesh, estimate_lambda0, solve_both

# acceptance lines collected by test_acceptance.py, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_spec(N=64, p=2.0, alpha=0.5, q=0.5, r=3.0, lam=1.0, h="1", b="1", domain=(0.0, 1.0)):
    dom = np.atleast_2d(np.asarray(domain, dtype=float))
    kernel = KernelSpec(dom.shape[0], p, alpha)
    return ProblemSpec.from_expressions(kernel, build_mesh(dom, N), q, r, lam, h, b)


@pytest.fixture(scope="session")
def reference():
    """Reference problem at half the lambda0 estimate, with its estimate."""
    spec = make_spec()
    est = estimate_lambda0(spec)
    return spec.with_lambda(est.lambda0 / 2), est


@pytest.fixture(scope="session")
def reference_solution(reference):
    spec, est = reference
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return solve_both(spec, SolverConfig(), est)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
