"""Time integration, event detection, Poincare sections, Lyapunov estimates.

A self-contained Dormand-Prince 5(4) adaptive integrator specialized to the
planar systems of this package, plus a fixed-step RK4 for convergence
checks.  Events (zero crossings of the angular velocity, stroboscopic
samples) are located on the accepted steps by cubic Hermite interpolation
refined with a secant iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Params, hamiltonian

__all__ = [
    "IntegratorSpec",
    "StepStats",
    "Trajectory",
    "PoincareMap",
    "FreeOscillation",
    "LyapunovEstimate",
    "integrate",
    "integrate_rhs",
    "measure_free_oscillation",
    "poincare_section",
    "largest_lyapunov",
]


@dataclass(frozen=True)
class IntegratorSpec:
    method: str = "rk45"          # "rk45" adaptive or "rk4" fixed step
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    t_end: float = 100.0

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if not self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need h_min <= h_init <= h_max")
        if self.method not in ("rk45", "rk4"):
            raise ValueError("method must be 'rk45' or 'rk4'")


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0
    h_min_used: float = math.inf
    h_max_used: float = 0.0


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray            # shape (n, 2): columns theta, omega
    step_stats: StepStats
    energy_drift: float | None = None   # max |H(t) - H(0)|, conservative runs
    complete: bool = True         # False after step-size underflow


@dataclass
class PoincareMap:
    omega_big0: float
    points: np.ndarray            # shape (n, 2)
    discard: int


@dataclass
class FreeOscillation:
    amplitude: float
    period: float
    rotating: bool = False


@dataclass
class LyapunovEstimate:
    exponent: float               # mean over the whole horizon
    tail_exponent: float          # mean over the last quartile of segments
    segment_rates: np.ndarray = field(default_factory=lambda: np.empty(0))


class StepUnderflow(RuntimeError):
    """Adaptive step fell below h_min; a partial trajectory is attached."""

    def __init__(self, trajectory):
        super().__init__("step-size underflow")
        self.trajectory = trajectory


# Dormand-Prince 5(4) coefficients.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656,
)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    35 / 384 - 5179 / 57600,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)


def _dp45(f, t0, y0, spec, step_cb=None):
    """Adaptive DP5(4) from t0 to spec.t_end.

    ``step_cb(ta, ya, fa, tb, yb, fb) -> bool`` runs on every accepted step;
    returning True stops the integration.  Returns (times, states, stats,
    complete).
    """
    t = t0
    th, om = y0
    f1 = f(t, th, om)
    h = spec.h_init
    stats = StepStats()
    times = [t]
    thetas = [th]
    omegas = [om]
    t_end = spec.t_end
    while t < t_end:
        h = min(h, t_end - t)
        k1t, k1o = f1
        y2 = (th + h * _A21 * k1t, om + h * _A21 * k1o)
        k2t, k2o = f(t + _C2 * h, *y2)
        y3 = (th + h * (_A31 * k1t + _A32 * k2t),
              om + h * (_A31 * k1o + _A32 * k2o))
        k3t, k3o = f(t + _C3 * h, *y3)
        y4 = (th + h * (_A41 * k1t + _A42 * k2t + _A43 * k3t),
              om + h * (_A41 * k1o + _A42 * k2o + _A43 * k3o))
        k4t, k4o = f(t + _C4 * h, *y4)
        y5 = (th + h * (_A51 * k1t + _A52 * k2t + _A53 * k3t + _A54 * k4t),
              om + h * (_A51 * k1o + _A52 * k2o + _A53 * k3o + _A54 * k4o))
        k5t, k5o = f(t + _C5 * h, *y5)
        y6 = (th + h * (_A61 * k1t + _A62 * k2t + _A63 * k3t + _A64 * k4t
                        + _A65 * k5t),
              om + h * (_A61 * k1o + _A62 * k2o + _A63 * k3o + _A64 * k4o
                        + _A65 * k5o))
        k6t, k6o = f(t + h, *y6)
        th_new = th + h * (_B1 * k1t + _B3 * k3t + _B4 * k4t + _B5 * k5t
                           + _B6 * k6t)
        om_new = om + h * (_B1 * k1o + _B3 * k3o + _B4 * k4o + _B5 * k5o
                           + _B6 * k6o)
        k7t, k7o = f(t + h, th_new, om_new)
        et = h * (_E1 * k1t + _E3 * k3t + _E4 * k4t + _E5 * k5t + _E6 * k6t
                  + _E7 * k7t)
        eo = h * (_E1 * k1o + _E3 * k3o + _E4 * k4o + _E5 * k5o + _E6 * k6o
                  + _E7 * k7o)
        sc_t = spec.abs_tol + spec.rel_tol * max(abs(th), abs(th_new))
        sc_o = spec.abs_tol + spec.rel_tol * max(abs(om), abs(om_new))
        err = math.sqrt(0.5 * ((et / sc_t) ** 2 + (eo / sc_o) ** 2))
        if err <= 1.0 or h <= spec.h_min:
            stats.accepted += 1
            stats.h_min_used = min(stats.h_min_used, h)
            stats.h_max_used = max(stats.h_max_used, h)
            stop = False
            if step_cb is not None:
                stop = bool(step_cb(t, (th, om), f1, t + h, (th_new, om_new),
                                    (k7t, k7o)))
            t += h
            th, om = th_new, om_new
            f1 = (k7t, k7o)
            times.append(t)
            thetas.append(th)
            omegas.append(om)
            if stop:
                break
        else:
            stats.rejected += 1
        factor = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        h_next = h * min(5.0, max(0.2, factor))
        if h_next < spec.h_min and t < t_end and err > 1.0:
            traj = _pack(times, thetas, omegas, stats, complete=False)
            raise StepUnderflow(traj)
        h = max(h_next, spec.h_min)
    return times, thetas, omegas, stats, True


def _rk4_fixed(f, t0, y0, spec, step_cb=None):
    t = t0
    th, om = y0
    h = spec.h_init
    stats = StepStats(h_min_used=h, h_max_used=h)
    times = [t]
    thetas = [th]
    omegas = [om]
    while t < spec.t_end - 1e-15:
        step = min(h, spec.t_end - t)
        f1 = f(t, th, om)
        k1t, k1o = f1
        k2t, k2o = f(t + 0.5 * step, th + 0.5 * step * k1t, om + 0.5 * step * k1o)
        k3t, k3o = f(t + 0.5 * step, th + 0.5 * step * k2t, om + 0.5 * step * k2o)
        k4t, k4o = f(t + step, th + step * k3t, om + step * k3o)
        th_new = th + step / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
        om_new = om + step / 6.0 * (k1o + 2 * k2o + 2 * k3o + k4o)
        stats.accepted += 1
        stop = False
        if step_cb is not None:
            fb = f(t + step, th_new, om_new)
            stop = bool(step_cb(t, (th, om), f1, t + step, (th_new, om_new), fb))
        t += step
        th, om = th_new, om_new
        times.append(t)
        thetas.append(th)
        omegas.append(om)
        if stop:
            break
    return times, thetas, omegas, stats, True


def _pack(times, thetas, omegas, stats, complete=True):
    return Trajectory(
        times=np.asarray(times),
        states=np.column_stack([thetas, omegas]),
        step_stats=stats,
        complete=complete,
    )


def _hermite(ya, fa, yb, fb, h, s):
    """Cubic Hermite value at fraction s of a step of width h."""
    d = yb - ya
    return (
        (1.0 - s) * ya + s * yb
        + s * (1.0 - s) * ((1.0 - s) * (h * fa - d) + s * (d - h * fb))
    )


def _refine_crossing(ta, ya, fa, tb, yb, fb, comp, target=0.0, tol=1e-10):
    """Time of g(t) = y[comp](t) - target = 0 inside an accepted step."""
    h = tb - ta

    def g(s):
        return _hermite(ya[comp], fa[comp], yb[comp], fb[comp], h, s) - target

    s0, s1 = 0.0, 1.0
    g0, g1 = g(s0), g(s1)
    for _ in range(80):
        if g1 == g0:
            break
        s2 = s1 - g1 * (s1 - s0) / (g1 - g0)
        s2 = min(1.0, max(0.0, s2))
        if abs(s2 - s1) * h < tol:
            s1 = s2
            break
        s0, g0 = s1, g1
        s1, g1 = s2, g(s2)
    t_cross = ta + s1 * h
    theta = _hermite(ya[0], fa[0], yb[0], fb[0], h, s1)
    omega = _hermite(ya[1], fa[1], yb[1], fb[1], h, s1)
    return t_cross, theta, omega


def _scalar_rhs(p: Params):
    """Fast scalar right-hand side closure for the full system."""
    a, b, g = p.alpha, p.beta, p.gamma
    kap, xi = p.kappa, p.xi
    m0, om0, phi = p.m_big0, p.omega_big0, p.phi
    ab = a * b
    sq = a * a + b * b
    equal = a == b

    def f(t, theta, omega):
        ct = math.cos(theta)
        st = math.sin(theta)
        if equal:
            half = 0.5 * theta
            sh = math.sin(half)
            ch = math.cos(half)
            mom = (ab + g) * st - a * math.copysign(1.0, sh) * ch if sh != 0.0 \
                else (ab + g) * st
            damp = ab * ch * ch
        else:
            d2 = sq - 2.0 * ab * ct
            d = math.sqrt(d2)
            mom = (ab * (1.0 - 1.0 / d) + g) * st
            damp = (ab * st) ** 2 / d2
        torque = -2.0 * xi * damp * omega - mom
        if m0:
            torque += m0 * math.sin(om0 * t + phi)
        return omega, torque / kap

    return f


def integrate_rhs(f, state0, spec: IntegratorSpec, t0: float = 0.0,
                  step_cb=None) -> Trajectory:
    """Integrate a generic planar rhs ``f(t, theta, omega) -> (dth, dom)``."""
    runner = _rk4_fixed if spec.method == "rk4" else _dp45
    times, thetas, omegas, stats, complete = runner(f, t0, tuple(state0), spec,
                                                    step_cb)
    return _pack(times, thetas, omegas, stats, complete)


def integrate(p: Params, state0, spec: IntegratorSpec | None = None) -> Trajectory:
    """Integrate the full system; reports energy drift on conservative runs."""
    spec = spec or IntegratorSpec()
    traj = integrate_rhs(_scalar_rhs(p), state0, spec)
    if p.xi == 0.0 and p.m_big0 == 0.0:
        h0 = hamiltonian(p, traj.states[0])
        energies = (0.5 * p.kappa * traj.states[:, 1] ** 2
                    + _potential_array(p, traj.states[:, 0]))
        traj.energy_drift = float(np.max(np.abs(energies - h0)))
    return traj


def _potential_array(p: Params, thetas):
    from .model import potential

    return np.asarray(potential(p, thetas))


def measure_free_oscillation(p: Params, state0, t_max: float = 500.0,
                             spec: IntegratorSpec | None = None) -> FreeOscillation:
    """Amplitude and period of a conservative free oscillation.

    The period is taken between successive same-direction zero crossings of
    the angular velocity; the amplitude is half the spread of the turning
    angles.  A non-closed (rotating) orbit is measured by the time for the
    angle to advance by 2*pi and flagged.
    """
    if p.xi != 0.0 or p.m_big0 != 0.0:
        raise ValueError("free oscillation requires xi = 0 and M0 = 0")
    spec = spec or IntegratorSpec(rel_tol=1e-11, abs_tol=1e-13)
    spec = IntegratorSpec(method=spec.method, rel_tol=spec.rel_tol,
                          abs_tol=spec.abs_tol, h_init=spec.h_init,
                          h_min=spec.h_min, h_max=spec.h_max, t_end=t_max)
    f = _scalar_rhs(p)
    crossings: list[tuple[float, float, int]] = []   # (time, theta, direction)
    theta0 = state0[0]
    wrap: list[tuple[float, float]] = []             # rotation: 2*pi advance

    def cb(ta, ya, fa, tb, yb, fb):
        if ya[1] == 0.0 and ta == 0.0:
            crossings.append((0.0, ya[0], 1 if fb[1] > 0 else -1))
        if ya[1] * yb[1] < 0.0:
            t_c, th_c, _ = _refine_crossing(ta, ya, fa, tb, yb, fb, comp=1)
            crossings.append((t_c, th_c, 1 if yb[1] > ya[1] else -1))
            if len(crossings) >= 4:
                return True
        for sign in (1.0, -1.0):
            target = theta0 + sign * 2.0 * math.pi
            if (ya[0] - target) * (yb[0] - target) < 0.0:
                t_c, _, om_c = _refine_crossing(ta, ya, fa, tb, yb, fb,
                                                comp=0, target=target)
                wrap.append((t_c, om_c))
                return True
        return False

    integrate_rhs(f, state0, spec, step_cb=cb)
    if len(crossings) >= 3:
        # same-direction crossings are two apart
        t1, th1, _ = crossings[0]
        t2, th2, _ = crossings[1]
        t3, _, _ = crossings[2]
        period = t3 - t1
        amplitude = 0.5 * abs(th2 - th1)
        return FreeOscillation(amplitude, period, rotating=False)
    if wrap:
        return FreeOscillation(math.pi, wrap[0][0], rotating=True)
    raise ValueError("no oscillation detected within t_max")


def poincare_section(p: Params, state0, n_points: int,
                     discard: int = 200,
                     spec: IntegratorSpec | None = None) -> PoincareMap:
    """Stroboscopic samples at the drive period, after a transient discard."""
    if p.m_big0 <= 0.0 or p.omega_big0 <= 0.0:
        raise ValueError("Poincare section requires M0 > 0 and Omega0 > 0")
    if discard < 0:
        raise ValueError("discard must be nonnegative")
    base = spec or IntegratorSpec(rel_tol=1e-9, abs_tol=1e-11)
    f = _scalar_rhs(p)
    t_drive = 2.0 * math.pi / p.omega_big0
    state = tuple(state0)
    t = 0.0
    points = []
    for n in range(discard + n_points):
        seg = IntegratorSpec(method=base.method, rel_tol=base.rel_tol,
                             abs_tol=base.abs_tol, h_init=base.h_init,
                             h_min=base.h_min, h_max=base.h_max,
                             t_end=t + t_drive)
        traj = integrate_rhs(f, state, seg, t0=t)
        state = tuple(traj.states[-1])
        t = float(traj.times[-1])
        if n >= discard:
            points.append(state)
    return PoincareMap(p.omega_big0, np.asarray(points), discard)


def largest_lyapunov(p: Params, state0, horizon: float = 2000.0,
                     renorm_interval: float = 5.0,
                     separation: float = 1e-8,
                     spec: IntegratorSpec | None = None) -> LyapunovEstimate:
    """Benettin two-trajectory estimate of the largest Lyapunov exponent.

    On divergence overflow the renormalization interval is halved and the
    run restarted, at most three times.
    """
    base = spec or IntegratorSpec(rel_tol=1e-9, abs_tol=1e-11)
    f = _scalar_rhs(p)
    interval = renorm_interval
    for attempt in range(4):
        try:
            return _benettin(f, state0, horizon, interval, separation, base)
        except OverflowError:
            interval *= 0.5
    raise RuntimeError("Lyapunov estimate failed after 3 retries")


def _benettin(f, state0, horizon, interval, d0, base):
    n_seg = max(4, int(round(horizon / interval)))
    ya = tuple(state0)
    yb = (state0[0] + d0, state0[1])
    t = 0.0
    rates = []
    for _ in range(n_seg):
        seg = IntegratorSpec(method=base.method, rel_tol=base.rel_tol,
                             abs_tol=base.abs_tol, h_init=base.h_init,
                             h_min=base.h_min, h_max=base.h_max,
                             t_end=t + interval)
        ya = tuple(integrate_rhs(f, ya, seg, t0=t).states[-1])
        yb = tuple(integrate_rhs(f, yb, seg, t0=t).states[-1])
        t += interval
        dth = yb[0] - ya[0]
        dom = yb[1] - ya[1]
        dist = math.hypot(dth, dom)
        if not math.isfinite(dist) or dist == 0.0:
            raise OverflowError("separation overflow or collapse")
        rates.append(math.log(dist / d0) / interval)
        scale = d0 / dist
        yb = (ya[0] + dth * scale, ya[1] + dom * scale)
    rates = np.asarray(rates)
    n_tail = max(1, len(rates) // 4)
    return LyapunovEstimate(
        exponent=float(rates.mean()),
        tail_exponent=float(rates[-n_tail:].mean()),
        segment_rates=rates,
    )
