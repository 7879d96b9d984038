import math

import numpy as np
import pytest

from clickdyn.melnikov import (DUFFING, PENDULUM, SOFT_CUBIC, ReducedSystem,
                               SeparatrixOrbit, melnikov_numeric,
                               reduce_system, separatrix,
                               threshold_closed_form, threshold_grid,
                               threshold_numeric)
from clickdyn.model import Params


P_IV = Params(alpha=1.5, beta=1.0, xi=0.1)


def _unit_pendulum():
    # kappa = 1, |K1| = 1 reference pendulum
    return ReducedSystem(PENDULUM, kappa=1.0, xi0=0.1, m_big0=0.0,
                         omega_big0=1.0, k1=-1.0, char_angle=math.pi,
                         saddles=(-math.pi, math.pi), decay_rate=1.0)


def test_reduce_duffing_roots():
    r = reduce_system(P_IV, DUFFING)
    assert r.theta3 == pytest.approx(0.7227342478, abs=1e-9)
    # reduced moment vanishes at 0 and +-theta3
    for th in (0.0, r.theta3, -r.theta3):
        assert abs(float(r.moment(th))) <= 1e-14


def test_reduce_pendulum_coefficient():
    r = reduce_system(P_IV, PENDULUM)
    from clickdyn.equilibria import stiffness_at_poles
    k1, _ = stiffness_at_poles(P_IV)
    assert r.k1 == pytest.approx(k1, rel=1e-14)
    assert k1 < 0.0


def test_reduce_soft_cubic_roots():
    r = reduce_system(P_IV, SOFT_CUBIC)
    for th in (0.0, math.pi, -math.pi):
        assert abs(float(r.moment(th))) <= 1e-12
    # linear stiffness at the origin matches the interior-center stiffness
    h = 1e-6
    k0 = (float(r.moment(h)) - float(r.moment(-h))) / (2.0 * h)
    assert k0 == pytest.approx(r.k_center, rel=1e-9)


def test_reduce_rejects_single_well():
    p = Params(alpha=2.5, beta=1.0)
    for variant in (DUFFING, PENDULUM, SOFT_CUBIC):
        with pytest.raises(ValueError):
            reduce_system(p, variant)
    with pytest.raises(ValueError):
        reduce_system(P_IV, "quintic")


def test_pendulum_closed_form_orbit_exact():
    # theta = 2*arctan(sinh T), omega = 2*sech T solves the unit pendulum
    r = _unit_pendulum()
    orbit = separatrix(r, "closed_form")
    ts = np.linspace(-5.0, 5.0, 101)
    np.testing.assert_allclose(orbit.theta_fn(ts),
                               2.0 * np.arctan(np.sinh(ts)), atol=1e-14)
    np.testing.assert_allclose(orbit.omega_fn(ts), 2.0 / np.cosh(ts),
                               atol=1e-14)
    # residuals of the reduced ODE at the closed form
    dom = orbit.domega_fn(ts)
    np.testing.assert_allclose(dom, -np.sin(orbit.theta_fn(ts)), atol=1e-8)


def test_closed_form_orbits_satisfy_ode_and_hamiltonian():
    for variant in (DUFFING, PENDULUM, SOFT_CUBIC):
        r = reduce_system(P_IV, variant)
        orbit = separatrix(r, "closed_form")
        ts = orbit.times
        resid = r.kappa * orbit.domega_fn(ts) + np.asarray(
            [float(r.moment(th)) for th in orbit.theta_fn(ts)])
        assert np.max(np.abs(resid)) <= 1e-8
        # omega is the time derivative of theta
        h = 1e-6
        mid = ts[np.abs(ts) < 10.0]
        fd = (orbit.theta_fn(mid + h) - orbit.theta_fn(mid - h)) / (2.0 * h)
        np.testing.assert_allclose(fd, orbit.omega_fn(mid), atol=1e-7)
        # constant reduced Hamiltonian along the orbit
        ham = 0.5 * r.kappa * orbit.omegas**2 + np.asarray(
            r.potential(orbit.thetas))
        assert np.max(ham) - np.min(ham) <= 1e-9
        # endpoints approach saddles
        assert abs(orbit.omegas[0]) <= 1e-9
        assert abs(orbit.omegas[-1]) <= 1e-9


def test_duffing_apex_velocity_energy_matching():
    r = reduce_system(P_IV, DUFFING)
    orbit = separatrix(r, "closed_form")
    # at the apex the Hamiltonian equals the saddle level (0 here)
    apex = math.sqrt(2.0) * r.theta3
    v_apex = -2.0 * float(r.potential(apex)) / r.kappa
    assert float(r.potential(apex)) == pytest.approx(0.0, abs=1e-14)
    assert np.max(orbit.thetas) == pytest.approx(apex, rel=1e-12)


def test_continued_matches_closed_form():
    for variant in (DUFFING, PENDULUM, SOFT_CUBIC):
        r = reduce_system(P_IV, variant)
        cf = separatrix(r, "closed_form")
        co = separatrix(r, "continued")
        assert np.max(np.abs(cf.thetas - co.thetas)) <= 1e-6
        assert np.max(np.abs(cf.omegas - co.omegas)) <= 1e-6


def test_pendulum_forcing_kernel_quadrature():
    # |FT of 2 sech T at 1| = 2*pi*sech(pi/2)
    r = _unit_pendulum()
    orbit = separatrix(r, "closed_form")
    _damping, forcing = melnikov_numeric(r, orbit, 1.0)
    assert forcing == pytest.approx(2.0 * math.pi / math.cosh(math.pi / 2.0),
                                    rel=1e-12)


def test_pendulum_damping_integral():
    # 2 * int (2 sech T)^2 dT = 16
    r = _unit_pendulum()
    orbit = separatrix(r, "closed_form")
    damping, _ = melnikov_numeric(r, orbit, 1.0)
    assert damping == pytest.approx(16.0, rel=1e-12)


def test_pendulum_threshold_closed_form_oracle():
    # xi0 * 16*w0 / (2*pi*sech(pi*W/(2*w0))) for general |K1|, kappa
    r = reduce_system(P_IV, PENDULUM)
    w0 = math.sqrt(-r.k1 / r.kappa)
    for omega0 in (0.2, 0.5, 1.0, 2.0, 3.0):
        for xi0 in (0.1, 0.4):
            expect = (8.0 * w0 * xi0 / math.pi) * math.cosh(
                math.pi * omega0 / (2.0 * w0))
            got = threshold_numeric(r, xi0, omega0)
            assert got == pytest.approx(expect, rel=1e-10)


def test_time_shift_invariance():
    r = _unit_pendulum()
    orbit = separatrix(r, "closed_form")
    base = melnikov_numeric(r, orbit, 1.3)
    for shift in (-5.0, -1.7, 2.4, 5.0):
        ts = orbit.times
        shifted = SeparatrixOrbit(orbit.kind, "closed_form", ts,
                                  orbit.theta_fn(ts - shift),
                                  orbit.omega_fn(ts - shift))
        got = melnikov_numeric(r, shifted, 1.3)
        assert got[0] == pytest.approx(base[0], abs=1e-10)
        assert got[1] == pytest.approx(base[1], abs=1e-10)


def test_threshold_linear_in_xi0():
    r = reduce_system(P_IV, DUFFING)
    t1 = threshold_numeric(r, 0.1, 1.0)
    t2 = threshold_numeric(r, 0.2, 1.0)
    assert t2 == pytest.approx(2.0 * t1, rel=1e-12)
    assert threshold_numeric(r, 0.0, 1.0) == 0.0


def test_threshold_grows_with_frequency():
    for variant in (DUFFING, PENDULUM, SOFT_CUBIC):
        r = reduce_system(P_IV, variant)
        assert threshold_numeric(r, 0.1, 10.0) > \
            10.0 * threshold_numeric(r, 0.1, 1.0)


def test_non_decaying_orbit_rejected():
    r = _unit_pendulum()
    ts = np.linspace(-40.0, 40.0, 1001)
    rotating = SeparatrixOrbit("heteroclinic", "closed_form", ts,
                               ts.copy(), np.ones_like(ts))
    with pytest.raises(ValueError):
        melnikov_numeric(r, rotating, 1.0)


def test_printed_reference_forms():
    for variant, label in ((DUFFING, "cosh"), (PENDULUM, "coth"),
                           (SOFT_CUBIC, "csch")):
        r = reduce_system(P_IV, variant)
        printed = threshold_closed_form(r, 0.1, 1.0)
        assert printed.label == label
        assert printed.value >= 0.0
        # linear in xi0
        doubled = threshold_closed_form(r, 0.2, 1.0)
        assert doubled.value == pytest.approx(2.0 * printed.value, rel=1e-12)
        assert threshold_closed_form(r, 0.0, 1.0).value == 0.0
        assert printed.rel_deviation >= 0.0


def test_threshold_grid():
    r = reduce_system(P_IV, DUFFING)
    omega_grid = np.linspace(0.5, 2.0, 5)
    xi_grid = np.asarray([0.1, 0.2, 0.4])
    grid = threshold_grid(r, omega_grid, xi_grid, "numeric")
    assert grid.m0_crit.shape == (3, 5)
    assert np.all(grid.m0_crit >= 0.0)
    # rows scale linearly in xi0
    np.testing.assert_allclose(grid.m0_crit[1], 2.0 * grid.m0_crit[0],
                               rtol=1e-12)
    np.testing.assert_allclose(grid.m0_crit[2], 4.0 * grid.m0_crit[0],
                               rtol=1e-12)
    printed = threshold_grid(r, omega_grid, xi_grid, "printed")
    assert printed.m0_crit.shape == (3, 5)
    with pytest.raises(ValueError):
        threshold_grid(r, [], xi_grid, "numeric")
    with pytest.raises(ValueError):
        threshold_grid(r, omega_grid, xi_grid, "exact")
