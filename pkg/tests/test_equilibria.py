import math

import numpy as np
import pytest

from clickdyn.equilibria import (CENTER, SADDLE, bifurcation_set,
                                 classify_region, eigenvalues_at,
                                 eigenvectors_at, equilibria_in_period,
                                 interior_angle, interior_angle_closed_form,
                                 equilibria_in_period as _eq,
                                 stiffness_at_poles, zero_stiffness_set)
from clickdyn.model import Params, moment, stiffness


def _random_double_well(rng):
    # |alpha - beta| < 1 < alpha + beta
    while True:
        a, b = rng.uniform(0.1, 3.0, 2)
        if abs(a - b) < 1.0 - 1e-3 and a + b > 1.0 + 1e-3 \
                and abs(a - b) > 1e-3:
            return a, b


def test_double_well_structure_and_closed_form():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a, b = _random_double_well(rng)
        p = Params(alpha=a, beta=b)
        eqs = equilibria_in_period(p)
        assert len(eqs) == 4
        kinds = sorted(e.kind for e in eqs)
        assert kinds == [CENTER, CENTER, SADDLE, SADDLE]
        theta3 = next(e.theta for e in eqs if e.branch_id == "theta3")
        closed = interior_angle_closed_form(p)
        assert abs(math.cos(theta3) - math.cos(closed)) <= 1e-10
        assert abs(theta3 - closed) <= 1e-10


def test_interior_root_is_moment_zero():
    p = Params(alpha=1.5, beta=1.0, gamma=0.1)
    th = interior_angle(p)
    assert th is not None
    assert abs(float(moment(p, th))) <= 1e-12


def test_interior_angle_alpha_beta_symmetry():
    pa = Params(alpha=1.4, beta=0.9)
    pb = Params(alpha=0.9, beta=1.4)
    assert interior_angle(pa) == pytest.approx(interior_angle(pb), abs=1e-12)


def test_eigenvalues_match_jacobian():
    rng = np.random.default_rng(12)
    for _ in range(50):
        a, b = _random_double_well(rng)
        kappa = rng.uniform(0.5, 3.0)
        p = Params(alpha=a, beta=b, kappa=kappa)
        for e in equilibria_in_period(p):
            jac = np.array([[0.0, 1.0], [-e.k_local / kappa, 0.0]])
            expect = sorted(np.linalg.eigvals(jac), key=lambda z: (z.real,
                                                                   z.imag))
            got = sorted(eigenvalues_at(e, p), key=lambda z: (z.real, z.imag))
            np.testing.assert_allclose(got, expect, atol=1e-12)
            vecs = eigenvectors_at(e, p)
            lams = eigenvalues_at(e, p)
            for i, lam in enumerate(lams):
                resid = jac @ vecs[:, i] - lam * vecs[:, i]
                assert np.max(np.abs(resid)) <= 1e-12


def test_saddle_center_pattern_region_iv():
    p = Params(alpha=1.5, beta=1.0)
    by_branch = {e.branch_id: e for e in equilibria_in_period(p)}
    assert by_branch["theta1"].kind == SADDLE
    assert by_branch["theta2"].kind == SADDLE
    assert by_branch["theta3"].kind == CENTER
    assert by_branch["theta4"].kind == CENTER
    assert by_branch["theta3"].theta == -by_branch["theta4"].theta


def test_stiffness_at_poles_closed_forms():
    p = Params(alpha=1.5, beta=1.0, gamma=0.1)
    k1, k2 = stiffness_at_poles(p)
    ab = 1.5
    assert k1 == pytest.approx(ab + 0.1 - ab / 0.5, rel=1e-14)
    assert k2 == pytest.approx(-(ab + 0.1 - ab / 2.5), rel=1e-14)
    # consistent with the pointwise stiffness
    assert k1 == pytest.approx(float(stiffness(p, 0.0)), rel=1e-12)
    assert k2 == pytest.approx(float(stiffness(p, math.pi)), rel=1e-12)


def test_stiffness_at_poles_degenerate():
    k1, k2 = stiffness_at_poles(Params(alpha=1.0, beta=1.0))
    assert k1 == -math.inf
    assert math.isfinite(k2)


def test_classify_region():
    assert classify_region(Params(alpha=1.5, beta=1.0)) == "double_well"
    assert classify_region(Params(alpha=0.5, beta=1.0)) == "double_well"
    assert classify_region(Params(alpha=2.5, beta=1.0)) == "single_well_hard"
    assert classify_region(Params(alpha=0.3, beta=0.4)) == "single_well_soft"
    assert classify_region(Params(alpha=0.4, beta=0.6)) == "boundary"
    assert classify_region(Params(alpha=1.0, beta=1.0)) == "degenerate"


def test_bifurcation_set_residual_zero():
    a_grid = np.linspace(0.1, 3.0, 300)
    b_grid = np.linspace(0.2, 2.0, 10)
    for variant in ("B1", "B2"):
        curve = bifurcation_set(variant, 0.1, a_grid, b_grid)
        assert curve.samples.shape[0] > 0
        for a, b, g in curve.samples:
            if variant == "B1":
                resid = a * b + g - a * b / abs(a - b)
            else:
                resid = a * b - a * b / (a + b) - g
            assert abs(resid) <= 1e-10


def test_bifurcation_b2_gamma_zero_is_alpha_plus_beta_one():
    a_grid = np.linspace(0.05, 1.5, 400)
    b_grid = np.linspace(0.1, 0.9, 9)
    curve = bifurcation_set("B2", 0.0, a_grid, b_grid)
    for a, b, _g in curve.samples:
        assert a + b == pytest.approx(1.0, abs=1e-10)


def test_zero_stiffness_set():
    curve = zero_stiffness_set(1.0, 0.0, np.linspace(1.1, 2.0, 10))
    assert curve.samples.shape[0] > 0
    for th, a, b, g in curve.samples:
        p = Params(alpha=a, beta=b, gamma=g)
        assert abs(float(stiffness(p, th))) <= 1e-10
