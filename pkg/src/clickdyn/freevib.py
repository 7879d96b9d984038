"""Exact free-vibration analysis of the conservative system.

Turning angles, period quadrature and the amplitude-frequency branches
AF1..AF5.  The period follows from the Hamiltonian,

    T = sqrt(kappa/2) * closed-loop integral of d(theta)/sqrt(H - PEN(theta)),

which carries the inertia ratio kappa that the bare energy integral omits.
Square-root endpoint singularities at the turning angles are removed by the
substitution theta = turning_point -+ s**2 before quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .equilibria import CENTER, Equilibrium, equilibria_in_period
from .model import Params, potential

__all__ = [
    "FreeVibPoint",
    "natural_frequency",
    "turning_angles",
    "period_of_energy",
    "amplitude_frequency_curve",
    "energy_bands",
]

_BARRIER_TOL = 1e-12
_QUAD_ABS = 1e-10


@dataclass(frozen=True)
class FreeVibPoint:
    energy: float
    theta_ini: float | None
    theta_fin: float | None
    amplitude: float
    period: float
    frequency: float
    branch: str


def natural_frequency(p: Params, eq: Equilibrium) -> float:
    """Small-amplitude frequency sqrt(K/kappa) at a center equilibrium."""
    if eq.kind != CENTER:
        raise ValueError(f"natural frequency defined at centers only, got {eq.kind}")
    return math.sqrt(eq.k_local / p.kappa)


def turning_angles(p: Params, energy: float) -> tuple[float, float]:
    """Intra-well turning angles, roots of potential(theta) = H on (0, pi).

    Uses the gamma = 0 closed form
    ``arccos((alpha^2 + beta^2 - (sqrt(2H) -+ 1)^2) / (2*alpha*beta))``;
    for gamma > 0 the roots are bracketed numerically.  Raises when a root
    leaves the admissible range, which signals a barrier crossing.
    """
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    if p.gamma == 0.0:
        root = math.sqrt(2.0 * energy)
        angles = []
        for sgn in (-1.0, 1.0):
            arg = (p.alpha**2 + p.beta**2 - (root + sgn) ** 2) / (
                2.0 * p.alpha * p.beta
            )
            if not -1.0 <= arg <= 1.0:
                raise ValueError(
                    "no intra-well turning pair at this energy (barrier crossed)"
                )
            angles.append(math.acos(arg))
        lo, hi = sorted(angles)
        return lo, hi
    roots = _potential_roots(p, energy)
    if len(roots) != 2:
        raise ValueError(
            "no intra-well turning pair at this energy (barrier crossed)"
        )
    return roots[0], roots[1]


def _potential_roots(p: Params, energy: float, n_scan: int = 2000) -> list[float]:
    """Roots of potential(theta) - H on (0, pi), ascending.

    Close above a well bottom the level set is a tiny interval, so the scan
    is refined until it resolves a sign change (or provably cannot: H below
    the global minimum).
    """
    while n_scan <= 2_048_000:
        thetas = np.linspace(0.0, math.pi, n_scan + 1)
        vals = np.asarray(potential(p, thetas)) - energy
        idx = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
        if idx.size > 0:
            break
        if float(np.max(vals)) < 0.0:
            return []      # H above the potential everywhere on (0, pi)
        if float(np.min(vals)) > 0.0 and n_scan >= 128_000:
            return []      # H below the potential everywhere on (0, pi)
        n_scan *= 4
    else:
        return []
    roots = []
    for i in idx:
        roots.append(
            brentq(lambda th: float(potential(p, th)) - energy,
                   thetas[i], thetas[i + 1], xtol=1e-14)
        )
    return roots


def _quad_segment(p: Params, energy: float, a: float, b: float,
                  singular_a: bool, singular_b: bool) -> float:
    """integral of d(theta)/sqrt(H - PEN) over [a, b] with endpoint care."""

    def integrand(theta):
        return 1.0 / math.sqrt(max(energy - float(potential(p, theta)), 1e-300))

    total = 0.0
    if singular_a and singular_b:
        mid = 0.5 * (a + b)
        total += _quad_segment(p, energy, a, mid, True, False)
        total += _quad_segment(p, energy, mid, b, False, True)
        return total
    with warnings.catch_warnings():
        # near a barrier the period diverges logarithmically; the slow-
        # convergence warning is expected there and the value still usable
        warnings.simplefilter("ignore", IntegrationWarning)
        if singular_a:
            s_max = math.sqrt(b - a)
            val, _ = quad(lambda s: 2.0 * s * integrand(a + s * s), 0.0, s_max,
                          epsabs=_QUAD_ABS, epsrel=1e-11, limit=200)
        elif singular_b:
            s_max = math.sqrt(b - a)
            val, _ = quad(lambda s: 2.0 * s * integrand(b - s * s), 0.0, s_max,
                          epsabs=_QUAD_ABS, epsrel=1e-11, limit=200)
        else:
            val, _ = quad(integrand, a, b, epsabs=_QUAD_ABS, epsrel=1e-11,
                          limit=200)
    return val


def period_of_energy(p: Params, energy: float) -> float:
    """Exact period of the closed orbit at total energy H.

    Handles all orbit bands: intra-well libration, inter-well libration
    around the theta = 0 barrier, libration around theta = pi, and full
    rotation.  Raises for energies within 1e-12 of a barrier, where the
    period diverges.
    """
    if energy <= 0.0:
        raise ValueError("energy must be positive")
    h1 = float(potential(p, 0.0))
    h2 = float(potential(p, math.pi))
    for barrier in (h1, h2):
        if abs(energy - barrier) <= _BARRIER_TOL:
            raise ValueError("energy at a barrier: infinite period")
    scale = math.sqrt(0.5 * p.kappa)
    roots = _potential_roots(p, energy)
    if len(roots) == 2:
        # libration inside one well on (0, pi)
        return 2.0 * scale * _quad_segment(p, energy, roots[0], roots[1],
                                           True, True)
    if len(roots) == 1:
        r = roots[0]
        if energy > h1:
            # symmetric orbit across theta = 0: (-r, r)
            return 4.0 * scale * _quad_segment(p, energy, 0.0, r, False, True)
        # orbit around theta = pi: (r, 2*pi - r), symmetric about pi
        return 4.0 * scale * _quad_segment(p, energy, r, math.pi, True, False)
    if energy > max(h1, h2):
        # rotation: one full revolution
        return 2.0 * scale * _quad_segment(p, energy, 0.0, math.pi,
                                           False, False)
    raise ValueError("no closed orbit at this energy")


def energy_bands(p: Params) -> dict[str, tuple[float, float]]:
    """Energy bands of the AF branches for the current parameter region.

    Region IV (double well): AF3 intra-well (0, H1), AF4 inter-well
    (H1, H2), AF5 rotation (H2, inf).  Single-well parameters: AF1
    libration (well bottom, barrier), AF2 rotation (barrier, inf).
    """
    h1 = float(potential(p, 0.0))
    h2 = float(potential(p, math.pi))
    eqs = equilibria_in_period(p)
    centers = [e for e in eqs if e.kind == CENTER]
    interior = [e for e in centers if e.branch_id in ("theta3", "theta4")]
    if interior:
        v_min = float(potential(p, interior[0].theta))
        b_lo, b_hi = min(h1, h2), max(h1, h2)
        return {
            "AF3": (v_min, b_lo),
            "AF4": (b_lo, b_hi),
            "AF5": (b_hi, math.inf),
        }
    if not centers:
        raise ValueError("no center equilibrium: no free-vibration bands")
    v_min = min(float(potential(p, e.theta)) for e in centers)
    barrier = max(h1, h2)
    return {"AF1": (v_min, barrier), "AF2": (barrier, math.inf)}


def amplitude_frequency_curve(p: Params, branch: str,
                              n_samples: int = 30) -> list[FreeVibPoint]:
    """Sampled (amplitude, frequency) points of one AF branch.

    Energies are log-spaced toward the band edges, where the period
    diverges (separatrix) or the orbit shrinks onto the center.  An empty
    list is returned when the branch band does not exist for these
    parameters.
    """
    bands = energy_bands(p)
    if branch not in bands:
        return []
    lo, hi = bands[branch]
    if math.isinf(hi):
        fractions = np.geomspace(1e-3, 30.0, n_samples)
        energies = lo * (1.0 + fractions) if lo > 0 else fractions
    else:
        fractions = np.geomspace(1e-4, 0.999, n_samples)
        energies = lo + (hi - lo) * fractions
    points = []
    for h in energies:
        try:
            period = period_of_energy(p, float(h))
        except ValueError:
            continue
        roots = _potential_roots(p, float(h))
        if len(roots) == 2:
            t_ini, t_fin = roots
        elif len(roots) == 1:
            if h > float(potential(p, 0.0)):
                t_ini, t_fin = -roots[0], roots[0]
            else:
                t_ini, t_fin = roots[0], 2.0 * math.pi - roots[0]
        else:
            t_ini = t_fin = None
        if t_ini is not None:
            amplitude = 0.5 * abs(t_fin - t_ini)
        else:
            amplitude = math.pi
        points.append(
            FreeVibPoint(
                energy=float(h),
                theta_ini=t_ini,
                theta_fin=t_fin,
                amplitude=amplitude,
                period=period,
                frequency=2.0 * math.pi / period,
                branch=branch,
            )
        )
    return points
