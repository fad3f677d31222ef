import warnings

import numpy as np
import pytest

from fracnehari import (
    Branch,
    SolverConfig,
    energy,
    estimate_lambda0,
    minimize_branch,
    solve_both,
    verify_solution,
)
from fracnehari.solver import BranchError, initial_fields

from conftest import make_spec


def test_reference_two_solutions(reference_solution, reference):
    spec, est = reference
    res = reference_solution
    assert res.status == "converged"
    assert res.u_plus.energy < 0 < res.delta1 <= res.u_minus.energy
    assert res.distinctness > 1e-3
    for name in ("plus", "minus"):
        cert = res.certificates[name]
        assert cert.holds(1e-8, spec.p)
        assert cert.branch == name
        assert res.negative_part_norms[name] <= 1e-8
    assert np.all(res.u_plus.field.values >= 0) and np.all(res.u_minus.field.values >= 0)


def test_monotone_descent(reference):
    spec, _ = reference
    init = initial_fields(spec, 2, 7)[1]
    for br in Branch:
        run = minimize_branch(spec, SolverConfig(), br, init)
        E = np.array(run.energies)
        # accepted steps never raise J beyond a few ulps of its scale
        floor = 64 * np.finfo(float).eps * np.maximum(np.abs(E[:-1]), 1.0) * 10
        assert np.all(np.diff(E) <= floor)
        assert run.converged


def test_idempotence(reference_solution, reference):
    spec, _ = reference
    for br, run in ((Branch.PLUS, reference_solution.u_plus), (Branch.MINUS, reference_solution.u_minus)):
        again = minimize_branch(spec, SolverConfig(), br, run.field)
        assert again.converged and again.iterations <= 2
        assert again.energy == pytest.approx(run.energy, rel=1e-10)


def test_truncation_from_sign_changing_start(reference):
    spec, _ = reference
    x = spec.mesh.nodes[:, 0]
    init = np.sin(3 * np.pi * x) + 0.3
    run = minimize_branch(spec, SolverConfig(), Branch.PLUS, init)
    cert = verify_solution(spec, run.field)
    assert run.converged and cert.negative_part <= 1e-8


def test_branch_error_when_no_branch_point():
    spec = make_spec(N=16, h="-1", b="-1")
    with pytest.raises(BranchError):
        minimize_branch(spec, SolverConfig(), Branch.PLUS, np.ones(16))


def test_no_nehari_points():
    res = solve_both(make_spec(N=16, h="-1", b="-1"))
    assert res.status == "NoNehariPoints"
    assert res.u_plus is None and res.u_minus is None


def test_huge_lambda_is_partial_not_crash():
    spec = make_spec(N=16, lam=1e4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = solve_both(spec, SolverConfig(max_outer_iters=300, multistart=2))
    assert res.status in ("partial", "NoNehariPoints")
    assert res.u_minus is None


def test_lambda_above_estimate_warns():
    spec = make_spec(N=16)
    est = estimate_lambda0(spec)
    with pytest.warns(UserWarning, match="lambda0"):
        res = solve_both(spec.with_lambda(2 * est.lambda0), SolverConfig(multistart=1), est)
    assert res.notes


def test_verify_detects_off_manifold(reference_solution, reference):
    spec, _ = reference
    u = reference_solution.u_plus.field.values
    assert verify_solution(spec, u).nehari_residual < 1e-10
    assert verify_solution(spec, 2 * u).nehari_residual > 1e-3
    rough = verify_solution(spec, np.random.default_rng(0).random(spec.mesh.size))
    assert rough.dual_residual > 1e-3


def test_mesh_stability():
    energies = {}
    for N in (64, 128):
        spec = make_spec(N=N)
        est = estimate_lambda0(spec)
        res = solve_both(spec.with_lambda(est.lambda0 / 2), SolverConfig(multistart=2), est)
        energies[N] = (res.u_plus.energy, res.u_minus.energy)
    for k in range(2):
        a, b = energies[64][k], energies[128][k]
        assert abs(a - b) <= 0.05 * abs(b)


def test_p3_and_two_dimensional_problems():
    for spec in (make_spec(N=32, p=3.0, alpha=0.3, q=1.0, r=4.0), make_spec(N=8, r=2.5, domain=[[0, 1], [0, 1]])):
        est = estimate_lambda0(spec)
        res = solve_both(spec.with_lambda(est.lambda0 / 2), SolverConfig(multistart=2), est)
        assert res.status == "converged"
        assert res.u_plus.energy < 0 < res.u_minus.energy


def test_energy_consistency(reference_solution, reference):
    spec, _ = reference
    assert reference_solution.u_plus.energy == pytest.approx(energy(spec, reference_solution.u_plus.field), rel=1e-12)


def test_summary_is_json_ready(reference_solution):
    import json

    text = json.dumps(reference_solution.summary(), sort_keys=True)
    assert "wall_time" not in text
