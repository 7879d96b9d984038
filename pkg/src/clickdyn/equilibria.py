"""Equilibria, linearized stability and bifurcation sets.

Equilibria are defined as roots of the restoring moment on (-pi, pi]: the
poles theta = 0 and theta = pi always qualify, and a symmetric pair of
interior roots appears when the radical can reach ``alpha*beta/(alpha*beta +
gamma)``.  Interior roots are located by bracketed root finding on the
moment itself; the closed form ``cos(theta3) = (alpha^2 + beta^2 - 1) /
(2*alpha*beta)`` is exact only for gamma = 0 and is used as a cross-check.

Only saddles and centers occur: the conservative Jacobian is trace-free, so
the generic node/focus classes of a full singular-point taxonomy have no
reachable instance here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import Params, moment, stiffness

__all__ = [
    "Equilibrium",
    "BifurcationCurve",
    "SADDLE",
    "CENTER",
    "DEGENERATE",
    "equilibria_in_period",
    "stiffness_at_poles",
    "eigenvalues_at",
    "classify_region",
    "bifurcation_set",
    "zero_stiffness_set",
    "REGION_DOUBLE_WELL",
    "REGION_SINGLE_WELL_SOFT",
    "REGION_SINGLE_WELL_HARD",
    "REGION_BOUNDARY",
    "REGION_DEGENERATE",
]

SADDLE = "saddle"
CENTER = "center"
DEGENERATE = "degenerate"

REGION_DOUBLE_WELL = "double_well"
REGION_SINGLE_WELL_SOFT = "single_well_soft"
REGION_SINGLE_WELL_HARD = "single_well_hard"
REGION_BOUNDARY = "boundary"
REGION_DEGENERATE = "degenerate"

# Stiffness below this magnitude counts as degenerate.
_KIND_TOL = 1e-9
# Residual tolerance that puts a parameter point on a bifurcation set.
_BOUNDARY_TOL = 1e-9
_ROOT_XTOL = 1e-14
_ROOT_MAXITER = 200


@dataclass(frozen=True)
class Equilibrium:
    theta: float
    k_local: float
    kind: str
    eigenvalues: tuple[complex, complex]
    branch_id: str  # "theta1".."theta4"


@dataclass
class BifurcationCurve:
    variant: str                 # "B0", "B1" or "B2"
    columns: tuple[str, ...]
    samples: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))


def _kind_of(k_local: float) -> str:
    if k_local < -_KIND_TOL:
        return SADDLE
    if k_local > _KIND_TOL:
        return CENTER
    return DEGENERATE


def _make_equilibrium(p: Params, theta: float, branch_id: str) -> Equilibrium:
    try:
        k_local = float(stiffness(p, theta))
    except ValueError:
        # alpha == beta cusp at theta = 0: not linearizable.
        return Equilibrium(theta, -math.inf, DEGENERATE, (complex("nan"),) * 2,
                           branch_id)
    kind = _kind_of(k_local)
    if kind == DEGENERATE:
        eig = (0j, 0j)
    else:
        eig = _eigenpair(k_local, p.kappa)
    return Equilibrium(theta, k_local, kind, eig, branch_id)


def _eigenpair(k_local: float, kappa: float) -> tuple[complex, complex]:
    if k_local < 0.0:
        lam = math.sqrt(-k_local / kappa)
        return complex(lam), complex(-lam)
    lam = math.sqrt(k_local / kappa)
    return complex(0.0, lam), complex(0.0, -lam)


def interior_angle(p: Params) -> float | None:
    """Positive interior root of the moment on (0, pi), or None.

    The root solves ``alpha*beta*(1 - 1/D(theta)) + gamma = 0`` and is found
    by bracketed root finding, not by the closed form.
    """
    a, b, g = p.alpha, p.beta, p.gamma

    def radial(theta):
        d = math.sqrt(a * a + b * b - 2.0 * a * b * math.cos(theta))
        return a * b * (1.0 - 1.0 / d) + g

    lo, hi = 1e-12, math.pi - 1e-12
    try:
        flo, fhi = radial(lo), radial(hi)
    except (ValueError, ZeroDivisionError):
        return None
    if flo == 0.0:
        return lo
    if flo * fhi > 0.0:
        return None
    return brentq(radial, lo, hi, xtol=_ROOT_XTOL, maxiter=_ROOT_MAXITER)


def interior_angle_closed_form(p: Params) -> float | None:
    """gamma = 0 closed form arccos((alpha^2+beta^2-1)/(2*alpha*beta))."""
    if p.gamma != 0.0:
        raise ValueError("closed form valid only for gamma = 0")
    c = (p.alpha**2 + p.beta**2 - 1.0) / (2.0 * p.alpha * p.beta)
    if not -1.0 < c < 1.0:
        return None
    return math.acos(c)


def equilibria_in_period(p: Params) -> list[Equilibrium]:
    """All equilibria on (-pi, pi], annotated with stiffness and kind."""
    out = [
        _make_equilibrium(p, 0.0, "theta1"),
        _make_equilibrium(p, math.pi, "theta2"),
    ]
    theta_star = interior_angle(p)
    if theta_star is not None:
        out.append(_make_equilibrium(p, theta_star, "theta3"))
        out.append(_make_equilibrium(p, -theta_star, "theta4"))
    return out


def stiffness_at_poles(p: Params) -> tuple[float, float]:
    """Closed-form stiffness (K1, K2) at theta = 0 and theta = pi.

    For alpha == beta the pole at 0 is a nonsmooth cusp and K1 is reported
    as -inf rather than a linearizable stiffness.
    """
    ab = p.alpha * p.beta
    k2 = -(ab + p.gamma - ab / (p.alpha + p.beta))
    if p.alpha == p.beta:
        return -math.inf, k2
    k1 = ab + p.gamma - ab / abs(p.alpha - p.beta)
    return k1, k2


def eigenvalues_at(eq: Equilibrium, p: Params) -> tuple[complex, complex]:
    """Jacobian eigenvalues +-sqrt(-K/kappa) at a nondegenerate equilibrium."""
    if eq.kind == DEGENERATE:
        raise ValueError("degenerate equilibrium has no defined eigenpair")
    return _eigenpair(eq.k_local, p.kappa)


def eigenvectors_at(eq: Equilibrium, p: Params) -> np.ndarray:
    """Columns are eigenvectors (1, lambda) matching :func:`eigenvalues_at`."""
    l1, l2 = eigenvalues_at(eq, p)
    return np.array([[1.0, 1.0], [l1, l2]])


def _b1_residual(alpha, beta, gamma):
    return alpha * beta + gamma - alpha * beta / abs(alpha - beta)


def _b2_residual(alpha, beta, gamma):
    return alpha * beta - alpha * beta / (alpha + beta) - gamma


def classify_region(p: Params) -> str:
    """Coarse parameter-plane label from pole stiffness and interior centers.

    The three soft single-well sub-regions of the parameter plane share one
    label; their mutual boundaries are not analytic and are published as the
    B1/B2 curves instead.
    """
    if p.alpha == p.beta:
        return REGION_DEGENERATE
    if (
        abs(_b1_residual(p.alpha, p.beta, p.gamma)) < _BOUNDARY_TOL
        or abs(_b2_residual(p.alpha, p.beta, p.gamma)) < _BOUNDARY_TOL
    ):
        return REGION_BOUNDARY
    k1, _ = stiffness_at_poles(p)
    if k1 < 0.0 and interior_angle(p) is not None:
        return REGION_DOUBLE_WELL
    if k1 > 0.0:
        return REGION_SINGLE_WELL_HARD
    return REGION_SINGLE_WELL_SOFT


def bifurcation_set(
    variant: str,
    gamma: float,
    alpha_grid,
    beta_grid,
) -> BifurcationCurve:
    """Sampled zero set of the B1 or B2 residual over an (alpha, beta) grid.

    For each beta the residual is sign-scanned over alpha_grid and every
    bracket is refined; a curve may contribute several alpha roots per beta.
    """
    if variant not in ("B1", "B2"):
        raise ValueError("variant must be 'B1' or 'B2'")
    residual = _b1_residual if variant == "B1" else _b2_residual
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    rows = []
    for beta in np.asarray(beta_grid, dtype=float):
        vals = []
        for a in alpha_grid:
            if variant == "B1" and a == beta:
                vals.append(math.nan)
            else:
                vals.append(residual(a, beta, gamma))
        vals = np.asarray(vals)
        for i in range(len(alpha_grid) - 1):
            v0, v1 = vals[i], vals[i + 1]
            if math.isnan(v0) or math.isnan(v1) or v0 * v1 > 0.0:
                continue
            if v0 == 0.0:
                rows.append((alpha_grid[i], beta, gamma))
                continue
            root = brentq(
                lambda a: residual(a, beta, gamma),
                alpha_grid[i],
                alpha_grid[i + 1],
                xtol=_ROOT_XTOL,
                maxiter=_ROOT_MAXITER,
            )
            rows.append((root, beta, gamma))
    samples = np.asarray(rows, dtype=float).reshape(-1, 3)
    return BifurcationCurve(variant, ("alpha", "beta", "gamma"), samples)


def zero_stiffness_set(
    beta: float,
    gamma: float,
    alpha_grid,
    n_theta: int = 400,
) -> BifurcationCurve:
    """Numerically continued zero set of the stiffness over (theta, alpha).

    No closed form exists; for each alpha the stiffness is sign-scanned on
    (0, pi) and each bracket refined.  The set is symmetric under
    theta -> -theta, so only the positive half is emitted.
    """
    rows = []
    thetas = np.linspace(1e-9, math.pi - 1e-9, n_theta)
    for a in np.asarray(alpha_grid, dtype=float):
        p = Params(alpha=a, beta=beta, gamma=gamma)
        vals = np.asarray(stiffness(p, thetas))
        sign_change = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
        for i in sign_change:
            root = brentq(
                lambda th: float(stiffness(p, th)),
                thetas[i],
                thetas[i + 1],
                xtol=_ROOT_XTOL,
                maxiter=_ROOT_MAXITER,
            )
            rows.append((root, a, beta, gamma))
    samples = np.asarray(rows, dtype=float).reshape(-1, 4)
    return BifurcationCurve("B0", ("theta", "alpha", "beta", "gamma"), samples)
