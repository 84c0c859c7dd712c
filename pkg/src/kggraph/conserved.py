"""Energy, charge, Lyapunov functional, and the slope condition.

The charge of the standing wave has the closed form
Q = -omega ||phi||^2 = Q_{k,1}(omega) Q_{k,2}(omega); the factor Q_{k,2}
is a pair of incomplete beta-type integrals evaluated here by adaptive
quadrature after the substitution t = sin(theta).  The analytic
omega-derivative comes
from the explicit formulas for Q_{k,1}' and Q_{k,2}'; a centered numeric
derivative of Q serves as its independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Grid, PhysParams, StateVector, _deriv_pair_complex, _l2_pair_complex
from .profiles import build_profile

__all__ = [
    "SlopeRegion",
    "SlopeReport",
    "energy",
    "charge",
    "lyapunov",
    "slope_closed_form",
    "charge_of_profile_direct",
]


class SlopeRegion(str, Enum):
    STABLE_SIDE = "StableSide"
    UNSTABLE_SIDE = "UnstableSide"
    BOUNDARY = "Boundary"
    OUT_OF_RANGE = "OutOfRange"


@dataclass(frozen=True)
class SlopeReport:
    Q_value: float
    dQ_analytic: float
    dQ_numeric: float
    region: SlopeRegion

    def to_json_dict(self) -> dict:
        return {
            "Q": self.Q_value,
            "dQ_analytic": self.dQ_analytic,
            "dQ_numeric": self.dQ_numeric,
            "region": self.region.value,
        }


def _lp_norm_pow(f, p_plus_1: float, grid: Grid, N: int) -> float:
    """int |f|^(p+1) with the lumped trapezoid weights."""
    from .core import _quad_weights

    wv, we = _quad_weights(N, grid)
    s = wv * abs(f.vertex) ** p_plus_1
    s += float(np.sum(we[None, :] * np.abs(f.edges) ** p_plus_1))
    return float(s)


def energy(U: StateVector, params: PhysParams, grid: Grid) -> float:
    """E = 1/2 ||u'||^2 + alpha/2 |u(0)|^2 + m^2/2 ||u||^2
    - 1/(p+1) ||u||_{p+1}^{p+1} + 1/2 ||v||^2."""
    U.u.check_grid(grid)
    du2 = _deriv_pair_complex(U.u, U.u, grid).real
    u2 = _l2_pair_complex(U.u, U.u, grid).real
    v2 = _l2_pair_complex(U.v, U.v, grid).real
    up = _lp_norm_pow(U.u, params.p + 1.0, grid, U.u.N)
    return (
        0.5 * du2
        + 0.5 * params.alpha * abs(U.u.vertex) ** 2
        + 0.5 * params.m ** 2 * u2
        - up / (params.p + 1.0)
        + 0.5 * v2
    )


def charge(U: StateVector, grid: Grid) -> float:
    """Q = Im int_Gamma u conj(v) dx."""
    U.u.check_grid(grid, U.v)
    return _l2_pair_complex(U.u, U.v, grid).imag


def lyapunov(U: StateVector, params: PhysParams, grid: Grid) -> float:
    """S_omega = E + omega Q."""
    return energy(U, params, grid) + params.omega * charge(U, grid)


# -- closed-form charge and slope -------------------------------------------

def _tail_integral(lower: float, p: float) -> float:
    """int_lower^1 (1 - t^2)^((3-p)/(p-1)) dt.

    Adaptive quadrature after t = sin(theta); the substitution removes the
    endpoint singularity for p < 3 and weakens it enough for quad's
    extrapolation above.
    """
    from scipy.integrate import quad as _quad

    if lower >= 1.0:
        return 0.0
    t0 = math.asin(max(-1.0, lower))
    q = (5.0 - p) / (p - 1.0)
    val, _ = _quad(lambda th: math.cos(th) ** q, t0, math.pi / 2.0,
                   epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _q1(params: PhysParams, omega: float) -> float:
    p = params.p
    msq = params.m ** 2 - omega ** 2
    return (
        -2.0 * omega * ((p + 1.0) / 2.0) ** (2.0 / (p - 1.0))
        * msq ** ((5.0 - p) / (2.0 * (p - 1.0))) / (p - 1.0)
    )


def _q2(params: PhysParams, omega: float) -> float:
    p, k, N = params.p, params.k, params.N
    msq = params.m ** 2 - omega ** 2
    a = params.alpha / ((2 * k - N) * math.sqrt(msq))
    return k * _tail_integral(-a, p) + (N - k) * _tail_integral(a, p)


def _dq1(params: PhysParams, omega: float) -> float:
    p = params.p
    msq = params.m ** 2 - omega ** 2
    return (
        2.0 / (p - 1.0) * ((p + 1.0) / 2.0) ** (2.0 / (p - 1.0))
        * msq ** ((7.0 - 3.0 * p) / (2.0 * (p - 1.0)))
        * (4.0 * omega ** 2 / (p - 1.0) - params.m ** 2)
    )


def _dq2(params: PhysParams, omega: float) -> float:
    p, k, N = params.p, params.k, params.N
    msq = params.m ** 2 - omega ** 2
    a2 = params.alpha ** 2 / ((2 * k - N) ** 2 * msq)
    return (1.0 - a2) ** ((3.0 - p) / (p - 1.0)) * params.alpha * omega / msq ** 1.5


def _classify_region(params: PhysParams) -> SlopeRegion:
    m, p, w, alpha = params.m, params.p, params.omega, params.alpha
    if p >= 5.0:
        return SlopeRegion.OUT_OF_RANGE
    wc = m * math.sqrt(p - 1.0) / 2.0
    aw = abs(w)
    if w == 0.0 or aw == wc:
        return SlopeRegion.BOUNDARY
    if alpha < 0.0 and wc < aw < m:
        return SlopeRegion.STABLE_SIDE
    if alpha > 0.0 and 0.0 < aw < wc:
        return SlopeRegion.UNSTABLE_SIDE
    return SlopeRegion.OUT_OF_RANGE


def slope_closed_form(params: PhysParams, domega: float = 1e-5) -> SlopeReport:
    """Closed-form Q, its analytic and numeric omega-derivatives, and the
    sign-region classification of the slope condition."""
    if abs(params.omega) >= params.m:
        raise ValueError("slope requires |omega| < m")
    if params.p < 5.0:
        params.require_profile()
    w = params.omega
    Q = _q1(params, w) * _q2(params, w)
    dQ_an = _dq1(params, w) * _q2(params, w) + _q1(params, w) * _dq2(params, w)
    qp = _q1(params, w + domega) * _q2(params, w + domega)
    qm = _q1(params, w - domega) * _q2(params, w - domega)
    dQ_num = (qp - qm) / (2.0 * domega)
    return SlopeReport(Q, dQ_an, dQ_num, _classify_region(params))


def charge_of_profile_direct(params: PhysParams, grid: Grid) -> float:
    """-omega ||phi||^2 evaluated on the grid; must match the closed form
    up to O(h^2) plus the truncation tail."""
    from .core import l2_inner

    phi = build_profile(params, grid)
    return -params.omega * l2_inner(phi, phi, grid)
