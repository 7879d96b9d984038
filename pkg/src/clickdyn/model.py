"""Dimensionless click-mechanism oscillator model.

Scalar fields (potential, moment, stiffness, Hamiltonian) and the first-order
vector fields of the forced, damped rotational snap-through oscillator

    kappa * theta'' + 2*xi*c(theta)*theta' + M(theta) = M0*sin(Omega0*T + phi)

where c(theta) is the geometry-dependent damping factor and M(theta) the
irrational restoring moment.  All quantities are dimensionless; the
conversion from SI parameters is :func:`nondimensionalize`.

The radicand ``alpha**2 + beta**2 - 2*alpha*beta*cos(theta)`` is bounded
below by ``(alpha - beta)**2``, so the square root is always real.  For
``alpha == beta`` it vanishes at ``theta = 2*n*pi`` and the moment is
nonsmooth there; evaluation uses half-angle identities instead of dividing
near-zero quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "PhysicalParams",
    "Params",
    "State",
    "nondimensionalize",
    "potential",
    "barrier_energies",
    "moment",
    "stiffness",
    "damping_factor",
    "hamiltonian",
    "rhs_perturbed",
    "rhs_unperturbed",
    "is_smooth_at",
]

# Radicand values more negative than this are treated as floating noise.
_RADICAND_GUARD = -1e-15


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional parameters of the physical mechanism (SI units)."""

    m: float        # lumped mass of the wings, kg
    k: float        # linear spring stiffness, N/m
    c: float        # viscous damping, N*s/m
    a: float        # hinge offset OA, m
    b: float        # hinge offset OC, m
    l: float        # free spring length, m
    d: float        # radius of inertia, m
    m0: float = 0.0       # drive moment amplitude, N*m
    omega0: float = 0.0   # drive frequency, rad/s
    g: float = 9.81       # gravity, m/s^2

    def __post_init__(self):
        for name in ("m", "k", "a", "b", "l", "d"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("c", "m0", "omega0", "g"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class Params:
    """Dimensionless system parameters."""

    alpha: float          # a / l
    beta: float = 1.0     # b / l
    gamma: float = 0.0    # 2*m*g / (k*l^2)
    kappa: float = 1.0    # I / (m*l^2)
    xi: float = 0.0       # c / (2*sqrt(m*k))
    m_big0: float = 0.0   # m0 / (k*l^2)
    omega_big0: float = 0.0   # omega0 / omega_n
    phi: float = 0.0      # drive phase, rad

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")
        for name in ("gamma", "xi", "m_big0", "omega_big0"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def smooth(self) -> bool:
        """False when alpha == beta, where the moment has cusps at 2*n*pi."""
        return self.alpha != self.beta


class State(NamedTuple):
    theta: float
    omega: float


def nondimensionalize(p: PhysicalParams) -> tuple[Params, float]:
    """Convert SI parameters to the dimensionless set.

    Returns ``(params, omega_n)`` with ``omega_n = sqrt(k/m)`` the reference
    frequency used to scale time and the drive frequency.
    """
    omega_n = math.sqrt(p.k / p.m)
    inertia = 2.0 * p.m * p.d**2
    return (
        Params(
            alpha=p.a / p.l,
            beta=p.b / p.l,
            gamma=2.0 * p.m * p.g / (p.k * p.l**2),
            kappa=inertia / (p.m * p.l**2),
            xi=p.c / (2.0 * math.sqrt(p.m * p.k)),
            m_big0=p.m0 / (p.k * p.l**2),
            omega_big0=p.omega0 / omega_n,
        ),
        omega_n,
    )


def _radical(p: Params, theta):
    """sqrt(alpha^2 + beta^2 - 2*alpha*beta*cos(theta)), noise-guarded."""
    r = p.alpha**2 + p.beta**2 - 2.0 * p.alpha * p.beta * np.cos(theta)
    r = np.where(r < 0.0, np.where(r > _RADICAND_GUARD, 0.0, r), r)
    return np.sqrt(r)


def potential(p: Params, theta):
    """Dimensionless potential energy; even and 2*pi-periodic in theta."""
    d = _radical(p, theta)
    return 0.5 * (d - 1.0) ** 2 + p.gamma * (1.0 - np.cos(theta))


def barrier_energies(p: Params) -> tuple[float, float]:
    """Potential barriers at theta = 0 and theta = pi.

    For gamma = 0 these equal ``0.5*(1 - |alpha-beta|)**2`` and
    ``0.5*(1 - (alpha+beta))**2``; for gamma > 0 the potential is simply
    evaluated at the two poles.
    """
    return float(potential(p, 0.0)), float(potential(p, math.pi))


def is_smooth_at(p: Params, theta: float) -> bool:
    """Whether the moment is smooth at theta (False only on alpha==beta cusps)."""
    if p.smooth:
        return True
    return math.sin(0.5 * theta) != 0.0


def moment(p: Params, theta):
    """Restoring moment, the theta-gradient of :func:`potential`.

    Odd and 2*pi-periodic.  For ``alpha == beta`` the field is nonsmooth at
    ``theta = 2*n*pi``; there the one-sided limit consistent with
    ``sign(sin(theta/2))`` is returned (0 exactly on the cusp).  Check
    :func:`is_smooth_at` when that matters.
    """
    if p.smooth:
        d = _radical(p, theta)
        return (p.alpha * p.beta * (1.0 - 1.0 / d) + p.gamma) * np.sin(theta)
    # alpha == beta: D = 2*alpha*|sin(theta/2)|, and
    # alpha*beta*sin(theta)/D reduces to alpha*sign(sin(theta/2))*cos(theta/2).
    a = p.alpha
    half = 0.5 * np.asarray(theta, dtype=float)
    smooth_part = (a * a + p.gamma) * np.sin(theta)
    cusp_part = -a * np.sign(np.sin(half)) * np.cos(half)
    out = smooth_part + cusp_part
    if np.isscalar(theta):
        return float(out)
    return out


def stiffness(p: Params, theta):
    """Gradient of the moment, d(moment)/d(theta).

    Raises ValueError on the nonsmooth points ``theta = 2*n*pi`` when
    ``alpha == beta``; the stiffness is not defined there.
    """
    if not p.smooth:
        half_sin = np.sin(0.5 * np.asarray(theta, dtype=float))
        if np.any(half_sin == 0.0):
            raise ValueError(
                "stiffness undefined at theta = 2*n*pi for alpha == beta"
            )
    d = _radical(p, theta)
    ab = p.alpha * p.beta
    return (ab + p.gamma - ab / d) * np.cos(theta) + (ab * np.sin(theta)) ** 2 / d**3


def damping_factor(p: Params, theta):
    """Geometry factor (alpha*beta*sin(theta))^2 / D^2 of the damping term.

    For ``alpha == beta`` the half-angle form ``alpha^2 * cos(theta/2)^2`` is
    used, which is the continuous limit at the cusps.
    """
    if p.smooth:
        d2 = p.alpha**2 + p.beta**2 - 2.0 * p.alpha * p.beta * np.cos(theta)
        return (p.alpha * p.beta * np.sin(theta)) ** 2 / d2
    return p.alpha**2 * np.cos(0.5 * np.asarray(theta, dtype=float)) ** 2


def hamiltonian(p: Params, state) -> float:
    """Total energy 0.5*kappa*omega^2 + potential(theta)."""
    theta, omega = state
    return 0.5 * p.kappa * omega**2 + float(potential(p, theta))


def rhs_perturbed(p: Params, t: float, state) -> tuple[float, float]:
    """Right-hand side of the forced damped first-order system."""
    theta, omega = state
    forcing = p.m_big0 * math.sin(p.omega_big0 * t + p.phi) if p.m_big0 else 0.0
    domega = (
        -2.0 * p.xi * float(damping_factor(p, theta)) * omega
        - float(moment(p, theta))
        + forcing
    ) / p.kappa
    return omega, domega


def rhs_unperturbed(p: Params, state) -> tuple[float, float]:
    """Right-hand side of the conservative system (xi = 0, M0 = 0)."""
    theta, omega = state
    return omega, -float(moment(p, theta)) / p.kappa
