import numpy as np
import pytest

from fracnehari import (
    FiberingCase,
    ProblemError,
    ReducedIntegrals,
    classify,
    derivative,
    energy,
    gradient,
    lp_norm,
    phi,
    reduced_integrals,
)
from fracnehari.functional import energy_from_integrals

from conftest import make_spec
from oracles import central_difference, energy_loop_1d


def test_zero_field():
    spec = make_spec(N=8)
    z = np.zeros(8)
    assert energy(spec, z) == 0.0
    assert reduced_integrals(spec, z) == ReducedIntegrals(0.0, 0.0, 0.0)
    assert np.all(gradient(spec, z).values == 0)


@pytest.mark.parametrize(
    "kw,msg",
    [
        (dict(q=1.0), "q < p-1 violated"),
        (dict(q=0.0), "0 < q"),
        (dict(r=0.9), "p-1 < r"),
        (dict(r=5.0, domain=[[0, 1], [0, 1]], N=4), "r < p\\*-1"),
        (dict(lam=0.0), "lambda > 0"),
    ],
)
def test_standing_assumptions(kw, msg):
    with pytest.raises(ProblemError, match=msg):
        make_spec(**kw)


def test_energy_against_oracle(rng):
    spec = make_spec(N=8, lam=0.7)
    u = rng.standard_normal(8)
    c = spec.mesh.cell_measures
    A = energy_loop_1d(u, spec.mesh.nodes[:, 0], c, 0.0, 1.0, 2.0, 0.5)
    B = sum(ci * abs(ui) ** 1.5 for ci, ui in zip(c, u))
    D = sum(ci * abs(ui) ** 4 for ci, ui in zip(c, u))
    assert energy(spec, u) == pytest.approx(A / 2 - 0.7 * B / 1.5 - D / 4, rel=1e-10)


def test_B_is_lp_power_for_unit_h(rng):
    spec = make_spec(N=16)
    u = rng.standard_normal(16)
    assert reduced_integrals(spec, u).B == pytest.approx(lp_norm(u, 1.5, spec.mesh) ** 1.5, rel=1e-13)


def test_B_negative_where_h_negative():
    spec = make_spec(N=32, h="sin(2*pi*x)")
    x = spec.mesh.nodes[:, 0]
    u = np.where(x > 0.5, np.sin(2 * np.pi * x) ** 2, 0.0)
    ri = reduced_integrals(spec, u)
    assert ri.B < 0 and classify(ri) is FiberingCase.H_MINUS_B_PLUS


@pytest.mark.parametrize(
    "ri,case",
    [
        ((1, 1, 1), FiberingCase.H_PLUS_B_PLUS),
        ((1, -1, -1), FiberingCase.H_MINUS_B_MINUS),
        ((1, 0, 1), FiberingCase.BOUNDARY_H0),
        ((1, 1, 0), FiberingCase.BOUNDARY_B0),
        ((1, 1, -1), FiberingCase.H_PLUS_B_MINUS),
        ((1, -1, 1), FiberingCase.H_MINUS_B_PLUS),
    ],
)
def test_classify(ri, case):
    assert classify(ReducedIntegrals(*map(float, ri))) is case


def test_classify_dead_band():
    assert classify(ReducedIntegrals(1.0, 1e-13, 1.0)) is FiberingCase.BOUNDARY_H0
    assert classify(ReducedIntegrals(1.0, 1e-13, 1.0), tol_sign=0.0) is FiberingCase.H_PLUS_B_PLUS
    with pytest.raises(ValueError):
        classify(ReducedIntegrals(1.0, 1.0, 1.0), tol_sign=-1)


@pytest.mark.parametrize("p,alpha,q,r", [(2.0, 0.5, 0.5, 3.0), (3.0, 0.3, 1.2, 4.0), (2.0, 0.5, 0.3, 2.0)])
def test_gradient_finite_differences(p, alpha, q, r, rng):
    spec = make_spec(N=16, p=p, alpha=alpha, q=q, r=r, lam=0.8, h="1 + 0.5*sin(5*x)", b="cos(3*x)")
    u = rng.uniform(0.2, 1.5, 16) * rng.choice([-1, 1], 16)
    ell = derivative(spec, u)
    g = gradient(spec, u).values
    for _ in range(10):
        v = rng.standard_normal(16)
        fd = central_difference(lambda w: energy(spec, w), u, v)
        assert ell @ v == pytest.approx(fd, rel=1e-6)
        assert np.sum(spec.mesh.cell_measures * g * v) == pytest.approx(ell @ v, rel=1e-12)


def test_homogeneity_ledger(rng):
    spec = make_spec(N=16, lam=1.3, h="cos(4*x)")
    u = rng.standard_normal(16)
    ri = reduced_integrals(spec, u)
    for t in (0.5, 1.0, 2.0, 5.0):
        poly = t**2 * ri.A / 2 - 1.3 * t**1.5 * ri.B / 1.5 - t**4 * ri.D / 4
        assert energy(spec, t * u) == pytest.approx(poly, rel=1e-12)
        assert energy(spec, t * u) == pytest.approx(phi(ri, spec, t), rel=1e-12)


def test_euler_identity(rng):
    spec = make_spec(N=16, lam=0.4, b="1 - 2*x")
    u = rng.standard_normal(16)
    ri = reduced_integrals(spec, u)
    assert derivative(spec, u) @ u == pytest.approx(ri.A - 0.4 * ri.B - ri.D, rel=1e-12)


def test_coercivity_on_nehari_points(reference, rng):
    from fracnehari import Branch, project

    spec, est = reference
    c1 = 1 / spec.p - 1 / (spec.r + 1)
    # |B| <= ||h|| (M S_{q+1})^{q+1} A^{(q+1)/p} bounds the concave term
    c2 = spec.lam * (1 / (spec.q + 1) - 1 / (spec.r + 1)) * est.h_sup * (est.M * est.S_q1) ** (spec.q + 1)
    for _ in range(40):
        u = np.abs(rng.standard_normal(spec.mesh.size))
        ri = reduced_integrals(spec, u)
        for br in Branch:
            t = project(ri, spec, br)
            A = t**spec.p * ri.A
            assert energy(spec, t * u) >= c1 * A - c2 * A ** ((spec.q + 1) / spec.p) - 1e-12 * A


def test_energy_from_integrals_matches():
    spec = make_spec(N=8, lam=2.0)
    ri = ReducedIntegrals(3.0, 0.5, 0.25)
    assert energy_from_integrals(ri, spec.params) == pytest.approx(1.5 - 2 * 0.5 / 1.5 - 0.25 / 4)
