"""Chaos thresholds by the Melnikov method on three reduced systems.

The bistable system is mapped onto one of three topologically equivalent
reductions with known separatrix structure:

* ``duffing``: double-well cubic, homoclinic loop through the saddle at 0,
  interior roots at +-theta3;
* ``pendulum``: constant-coefficient pendulum with stiffness |K1| taken
  from the nonsmooth saddle; the saddle is moved to +-pi in the reduced
  frame so the heteroclinic pair has the textbook form;
* ``soft_cubic``: softening cubic with center at 0 and saddles pinned at
  +-pi, linear stiffness matched to the interior center.

The normative chaos threshold is the numerical Melnikov quadrature
(trapezoid on a uniform grid, spectrally accurate for the exponentially
decaying kernels here):

    m0_crit = xi0 * (2 * integral of omega(T)^2 dT) / |FT of omega at Omega0|

The damping coefficient along the reduced orbits is the constant 2*xi0, not
the angle-dependent factor of the full system.  Commonly quoted closed-form
thresholds (cosh / coth / csch shapes) are evaluated verbatim as references
with an agreement report; they are not used as the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import interior_angle, stiffness_at_poles
from .integrate import IntegratorSpec, integrate_rhs
from .model import Params, stiffness

__all__ = [
    "DUFFING",
    "PENDULUM",
    "SOFT_CUBIC",
    "ReducedSystem",
    "SeparatrixOrbit",
    "PrintedThreshold",
    "ThresholdGrid",
    "reduce_system",
    "separatrix",
    "melnikov_numeric",
    "threshold_numeric",
    "threshold_closed_form",
    "threshold_grid",
]

DUFFING = "duffing"
PENDULUM = "pendulum"
SOFT_CUBIC = "soft_cubic"

_VARIANTS = (DUFFING, PENDULUM, SOFT_CUBIC)
_TAIL_TOL = 1e-12
_CONNECT_TOL = 1e-6
_CONNECT_TMAX = 50.0


@dataclass(frozen=True)
class ReducedSystem:
    variant: str
    kappa: float
    xi0: float
    m_big0: float
    omega_big0: float
    theta3: float = 0.0      # duffing interior root magnitude
    k1: float = 0.0          # pendulum stiffness (negative in the source)
    k_center: float = 0.0    # soft_cubic linear stiffness at the center
    char_angle: float = 0.0  # angle used by the printed reference forms
    saddles: tuple[float, ...] = ()
    decay_rate: float = 0.0  # exponential decay rate of the separatrix velocity

    def moment(self, theta):
        """Reduced restoring moment (reduced eq.: kappa*theta'' = -moment)."""
        if self.variant == DUFFING:
            return theta * (theta * theta - self.theta3**2)
        if self.variant == PENDULUM:
            return abs(self.k1) * np.sin(theta)
        c = self.k_center / math.pi**2
        return c * theta * (math.pi**2 - theta * theta)

    def potential(self, theta):
        th = np.asarray(theta, dtype=float)
        if self.variant == DUFFING:
            return 0.25 * th**4 - 0.5 * self.theta3**2 * th**2
        if self.variant == PENDULUM:
            return abs(self.k1) * (1.0 - np.cos(th))
        c = self.k_center / math.pi**2
        return c * (0.5 * math.pi**2 * th**2 - 0.25 * th**4)

    def rhs(self):
        kap = self.kappa
        mom = self.moment

        def f(t, theta, omega):
            return omega, -float(mom(theta)) / kap

        return f


@dataclass
class SeparatrixOrbit:
    kind: str                     # "homoclinic" or "heteroclinic"
    source: str                   # "closed_form" or "continued"
    times: np.ndarray
    thetas: np.ndarray
    omegas: np.ndarray
    theta_fn: object = None       # closed-form callables, when available
    omega_fn: object = None
    domega_fn: object = None


@dataclass(frozen=True)
class PrintedThreshold:
    label: str
    value: float
    numeric_value: float
    rel_deviation: float
    agrees: bool


@dataclass
class ThresholdGrid:
    variant: str
    method: str                   # "numeric" or "printed"
    omega_grid: np.ndarray
    xi_grid: np.ndarray
    m0_crit: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    # rows follow xi_grid, columns follow omega_grid


def reduce_system(p: Params, variant: str) -> ReducedSystem:
    """Map the full system onto one of the three reduced vector fields.

    Raises when the parameter point lacks the structure the reduction
    needs: all three require the double-well regime (negative stiffness at
    theta = 0 plus an interior center pair).
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown reduction variant {variant!r}")
    k1, _ = stiffness_at_poles(p)
    theta3 = interior_angle(p)
    if variant == PENDULUM:
        if not k1 < 0.0:
            raise ValueError(
                "pendulum reduction requires negative stiffness at theta = 0"
            )
    elif theta3 is None or not k1 < 0.0:
        raise ValueError(
            f"{variant} reduction requires the double-well structure "
            "(interior center pair and a saddle at theta = 0)"
        )
    common = dict(kappa=p.kappa, xi0=p.xi, m_big0=p.m_big0,
                  omega_big0=p.omega_big0)
    if variant == DUFFING:
        rate = theta3 / math.sqrt(p.kappa)
        return ReducedSystem(DUFFING, theta3=theta3, char_angle=theta3,
                             saddles=(0.0,), decay_rate=rate, **common)
    if variant == PENDULUM:
        rate = math.sqrt(-k1 / p.kappa)
        char = theta3 if theta3 is not None else math.pi
        return ReducedSystem(PENDULUM, k1=k1, char_angle=char,
                             saddles=(-math.pi, math.pi), decay_rate=rate,
                             **common)
    k_center = float(stiffness(p, theta3))
    if k_center <= 0.0:
        raise ValueError("soft_cubic reduction requires a center at theta3")
    rate = 2.0 * math.sqrt(k_center / (2.0 * p.kappa))
    return ReducedSystem(SOFT_CUBIC, k_center=k_center, char_angle=math.pi,
                         saddles=(-math.pi, math.pi), decay_rate=rate,
                         **common)


def _closed_form(r: ReducedSystem):
    """(kind, theta(T), omega(T), domega(T)) of the separatrix."""
    kap = r.kappa
    if r.variant == DUFFING:
        w = r.theta3 / math.sqrt(kap)
        amp = math.sqrt(2.0) * r.theta3

        def theta(t):
            return amp / np.cosh(w * t)

        def omega(t):
            return -amp * w * np.tanh(w * t) / np.cosh(w * t)

        def domega(t):
            s = 1.0 / np.cosh(w * t)
            return amp * w * w * (s - 2.0 * s**3)

        return "homoclinic", theta, omega, domega
    if r.variant == PENDULUM:
        w = math.sqrt(-r.k1 / kap)

        def theta(t):
            return 2.0 * np.arctan(np.sinh(w * t))

        def omega(t):
            return 2.0 * w / np.cosh(w * t)

        def domega(t):
            return -2.0 * w * w * np.tanh(w * t) / np.cosh(w * t)

        return "heteroclinic", theta, omega, domega
    w = math.sqrt(r.k_center / (2.0 * kap))

    def theta(t):
        return math.pi * np.tanh(w * t)

    def omega(t):
        return math.pi * w / np.cosh(w * t) ** 2

    def domega(t):
        return -2.0 * math.pi * w * w * np.tanh(w * t) / np.cosh(w * t) ** 2

    return "heteroclinic", theta, omega, domega


def _default_span(r: ReducedSystem, t_max: float | None) -> float:
    # e^{-rate*T} must reach ~1e-14 at the truncation boundary.
    if t_max is not None:
        return t_max
    return max(40.0, 33.0 / r.decay_rate)


def separatrix(r: ReducedSystem, source: str = "closed_form",
               t_max: float | None = None,
               n_samples: int | None = None) -> SeparatrixOrbit:
    """Separatrix orbit of a reduced system on a symmetric time grid.

    ``closed_form`` evaluates the analytic orbit, with amplitudes fixed by
    energy matching to the reduced Hamiltonian.  ``continued`` shoots from
    the saddle along the unstable eigenvector (offset 1e-8) and errors out
    if the orbit misses the target saddle by more than 1e-6.
    """
    if source not in ("closed_form", "continued"):
        raise ValueError("source must be 'closed_form' or 'continued'")
    span = _default_span(r, t_max)
    if n_samples is None:
        n_samples = 2 * int(math.ceil(span / 0.005)) + 1
    times = np.linspace(-span, span, n_samples)
    kind, theta_fn, omega_fn, domega_fn = _closed_form(r)
    if source == "closed_form":
        return SeparatrixOrbit(kind, source, times, theta_fn(times),
                               omega_fn(times), theta_fn, omega_fn, domega_fn)
    return _continued(r, kind, times)


def _continued(r: ReducedSystem, kind: str, times: np.ndarray) -> SeparatrixOrbit:
    from scipy.interpolate import CubicHermiteSpline
    from scipy.optimize import brentq

    if kind == "homoclinic":
        saddle = 0.0
        target = 0.0
    else:
        saddle = -math.pi
        target = math.pi
    # unstable eigenvector of the saddle is (1, +lambda)
    lam = r.decay_rate if r.variant != SOFT_CUBIC else \
        math.sqrt(2.0 * r.k_center / r.kappa)
    offset = 1e-8
    state = (saddle + offset, offset * lam)
    f = r.rhs()
    spec = IntegratorSpec(rel_tol=1e-13, abs_tol=1e-15, h_max=0.05,
                          t_end=_CONNECT_TMAX)
    traj = integrate_rhs(f, state, spec)
    th = traj.states[:, 0]
    om = traj.states[:, 1]
    dom = np.asarray([-float(r.moment(x)) / r.kappa for x in th])
    th_s = CubicHermiteSpline(traj.times, th, om)
    om_s = CubicHermiteSpline(traj.times, om, dom)
    if kind == "homoclinic":
        # follow the loop out and back to the saddle it left
        apex_i = int(np.argmax(np.abs(th)))
        resid = np.min(np.abs(th[apex_i:] - target))
        if resid > _CONNECT_TOL:
            raise ValueError(
                "continued orbit failed to reconnect with the saddle "
                f"(residual {resid:.2e})"
            )
        # apex: the velocity zero at the orbit's widest point
        apex_t = brentq(om_s, traj.times[max(apex_i - 1, 0)],
                        traj.times[min(apex_i + 1, len(th) - 1)], xtol=1e-13)
        end_i = apex_i + int(np.argmin(np.abs(th[apex_i:] - target)))
    else:
        resid = np.min(np.abs(th - target))
        if resid > _CONNECT_TOL:
            raise ValueError(
                "continued orbit failed to connect to the target saddle "
                f"(residual {resid:.2e})"
            )
        # apex: crossing of the midpoint theta = 0 (maximal speed)
        cross = np.nonzero(th[:-1] * th[1:] <= 0.0)[0]
        i = int(cross[0])
        apex_t = brentq(th_s, traj.times[i], traj.times[i + 1], xtol=1e-13)
        end_i = int(np.argmin(np.abs(th - target)))
    # past the closest approach the shot peels off the saddle exponentially;
    # clamp the tail onto the saddle it has effectively reached
    end_t = traj.times[end_i]
    shifted = np.clip(times + apex_t, traj.times[0], end_t)
    thetas = th_s(shifted)
    omegas = om_s(shifted)
    before = times + apex_t < traj.times[0]
    after = times + apex_t > end_t
    thetas[before] = saddle
    omegas[before] = 0.0
    thetas[after] = target
    omegas[after] = 0.0
    return SeparatrixOrbit(kind, "continued", times, thetas, omegas)


def melnikov_numeric(r: ReducedSystem, orbit: SeparatrixOrbit,
                     omega0: float) -> tuple[float, float]:
    """Melnikov damping integral and forcing amplitude along an orbit.

    Returns ``(damping_integral, forcing_amplitude)`` with

        damping_integral  = 2 * integral of omega(T)^2 dT
        forcing_amplitude = |integral of omega(T) * exp(-i*omega0*T) dT|

    so the Melnikov function has a simple zero iff
    ``M0 * forcing_amplitude > xi0 * damping_integral``.
    """
    if omega0 <= 0.0:
        raise ValueError("drive frequency must be positive")
    t = orbit.times
    om = orbit.omegas
    peak = float(np.max(np.abs(om)))
    tail = max(abs(om[0]), abs(om[-1]))
    if peak == 0.0 or tail > _TAIL_TOL * max(1.0, peak):
        raise ValueError(
            "orbit velocity does not decay at the grid boundary; "
            "not a separatrix orbit"
        )
    damping = 2.0 * float(np.trapezoid(om * om, t))
    kernel = om * np.exp(-1j * omega0 * t)
    forcing = abs(np.trapezoid(kernel, t))
    return damping, float(forcing)


def threshold_numeric(r: ReducedSystem, xi0: float, omega0: float,
                      orbit: SeparatrixOrbit | None = None) -> float:
    """Critical forcing amplitude from the numerical Melnikov quadrature."""
    if xi0 < 0.0:
        raise ValueError("xi0 must be nonnegative")
    if orbit is None:
        orbit = separatrix(r, "closed_form")
    damping, forcing = melnikov_numeric(r, orbit, omega0)
    return xi0 * damping / forcing


def threshold_closed_form(r: ReducedSystem, xi0: float,
                          omega0: float) -> PrintedThreshold:
    """Commonly quoted closed-form threshold for the reduction's variant.

    These printed expressions are internally inconsistent reference shapes
    (cosh for duffing, coth for pendulum, csch for soft cubic); the numeric
    quadrature is normative.  The returned record carries the relative
    deviation from the numeric threshold and an agreement flag (<= 5%).
    """
    if xi0 < 0.0 or omega0 <= 0.0:
        raise ValueError("need xi0 >= 0 and omega0 > 0")
    a = r.char_angle
    if r.variant == DUFFING:
        label = "cosh"
        value = (4.0 * a**3 * xi0 / (3.0 * math.sqrt(2.0) * math.pi * omega0)) \
            * math.cosh(math.pi * omega0 / (2.0 * a))
    elif r.variant == PENDULUM:
        label = "coth"
        value = (2.0 * a * xi0 / (3.0 * math.pi)) \
            / math.tanh(math.pi * omega0 / 2.0)
    else:
        label = "csch"
        value = (2.0 * a**3 * xi0 / (3.0 * math.pi)) \
            / math.sinh(math.pi * omega0 / 2.0)
    numeric = threshold_numeric(r, xi0, omega0)
    if xi0 == 0.0:
        dev = 0.0
    else:
        dev = abs(value - numeric) / numeric
    return PrintedThreshold(label, value, numeric, dev, dev <= 0.05)


def threshold_grid(r: ReducedSystem, omega_grid, xi_grid,
                   method: str = "numeric") -> ThresholdGrid:
    """Critical-forcing matrix over (xi0, omega0) grids.

    Rows follow ``xi_grid``, columns follow ``omega_grid``.  The orbit is
    computed once and shared across the grid.
    """
    if method not in ("numeric", "printed"):
        raise ValueError("method must be 'numeric' or 'printed'")
    omega_grid = np.asarray(omega_grid, dtype=float)
    xi_grid = np.asarray(xi_grid, dtype=float)
    if omega_grid.size == 0 or xi_grid.size == 0:
        raise ValueError("grids must be nonempty")
    if np.any(omega_grid <= 0.0) or np.any(xi_grid < 0.0):
        raise ValueError("grids must be positive (xi0 may be zero)")
    m = np.empty((xi_grid.size, omega_grid.size))
    if method == "numeric":
        orbit = separatrix(r, "closed_form")
        for j, om in enumerate(omega_grid):
            damping, forcing = melnikov_numeric(r, orbit, float(om))
            m[:, j] = xi_grid * damping / forcing
    else:
        for j, om in enumerate(omega_grid):
            for i, xi in enumerate(xi_grid):
                m[i, j] = threshold_closed_form(r, float(xi), float(om)).value
    return ThresholdGrid(r.variant, method, omega_grid, xi_grid, m)
