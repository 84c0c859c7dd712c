"""Stability verdicts and corroborating nonlinear experiments.

classify evaluates the spectral assumptions on the space the theorem actually
uses — the restricted symmetric space for k >= 1, the equivariant space for
k = 0 with attractive-side alpha handled on the full graph — and combines the
Morse index with the sign of d/domega Q:

    n = 1, slope > 0  ->  OrbitallyStable
    n = 1, slope < 0  ->  OrbitallyUnstable
    n = 2, slope > 0  ->  LinearlyUnstable
    anything else     ->  Inconclusive
"""

from __future__ import annotations

import concurrent.futures
import math
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .conserved import slope_closed_form
from .core import Grid, GraphFunction, PhysParams, StateVector, distance_to_orbit, x_norm
from .evolution import EvolveConfig, Trajectory, evolve
from .operators import (
    assemble_L12,
    band_edges,
    restrict_to_Lk,
    solve_flow_spectrum,
    solve_spectrum,
)
from .profiles import refine_profile

__all__ = [
    "Verdict",
    "Clause",
    "StabilityVerdict",
    "classify",
    "perturbation_experiment",
    "linear_growth_rate",
    "phase_diagram",
]


class Verdict(str, Enum):
    ORBITALLY_STABLE = "OrbitallyStable"
    ORBITALLY_UNSTABLE = "OrbitallyUnstable"
    LINEARLY_UNSTABLE = "LinearlyUnstable"
    INCONCLUSIVE = "Inconclusive"


class Clause(str, Enum):
    MAIN_I_A = "main_i_a"
    MAIN_I_B = "main_i_b"
    MAIN_II_A = "main_ii_a"
    MAIN_II_B = "main_ii_b"
    NONE = "none"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    clause: Clause
    morse_index: int
    nullity: int
    slope_sign: int
    band_gap_ok: bool
    sigma1: float
    sigma2: float
    diagnostic: str = ""

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "clause": self.clause.value,
            "evidence": {
                "morse_index": self.morse_index,
                "nullity": self.nullity,
                "slope_sign": self.slope_sign,
                "band_gap_ok": self.band_gap_ok,
            },
            "sigma1": self.sigma1,
            "sigma2": self.sigma2,
            "diagnostic": self.diagnostic,
        }

    def csv_row(self, params: PhysParams) -> str:
        return ",".join(
            str(x)
            for x in (
                params.N, params.k, params.alpha, params.m, params.omega,
                params.p, self.morse_index, self.nullity, self.slope_sign,
                self.sigma1, self.sigma2, self.verdict.value, self.clause.value,
            )
        )


CSV_HEADER = "N,k,alpha,m,omega,p,morse_index,nullity,slope_sign,sigma1,sigma2,verdict,clause"


def _clause_for(params: PhysParams, verdict: Verdict) -> Clause:
    if verdict is Verdict.INCONCLUSIVE:
        return Clause.NONE
    if params.k >= 1:
        if verdict is Verdict.ORBITALLY_UNSTABLE:
            return Clause.MAIN_I_A
        if verdict is Verdict.LINEARLY_UNSTABLE:
            return Clause.MAIN_I_B
        return Clause.NONE
    if verdict is Verdict.ORBITALLY_STABLE:
        return Clause.MAIN_II_B
    if verdict in (Verdict.ORBITALLY_UNSTABLE, Verdict.LINEARLY_UNSTABLE):
        return Clause.MAIN_II_A
    return Clause.NONE


def classify(params: PhysParams, grid: Grid) -> StabilityVerdict:
    """Evaluate the spectral/slope hypotheses and emit the verdict."""
    params.require_profile()
    if not 1.0 < params.p < 5.0:
        raise ValueError("classification requires 1 < p < 5")
    if params.alpha == 0.0:
        raise ValueError("alpha = 0 (Kirchhoff) is outside the verdict table")

    phi = refine_profile(params, grid)
    op1 = assemble_L12(params, grid, 1, phi=phi)
    # space selection: X_k restriction for k >= 1; for k = 0 the equivariant
    # space when alpha > 0, the full graph when alpha < 0
    if params.k >= 1 or params.alpha > 0.0:
        op1 = restrict_to_Lk(op1, params.k)
    rep1 = solve_spectrum(op1)

    op2 = assemble_L12(params, grid, 2, phi=phi)
    if params.k >= 1 or params.alpha > 0.0:
        op2 = restrict_to_Lk(op2, params.k)
    rep2 = solve_spectrum(op2)

    s1, s2 = band_edges(params)
    n = rep1.morse_index
    # kernel of the full linearization = ker(L2) (phase direction i*Phi);
    # L1 contributes no kernel away from the Kirchhoff point
    nullity = rep1.nullity + rep2.nullity
    pos1 = rep1.eigenvalues[rep1.eigenvalues > rep1.tol_zero]
    gap_floor = min(s1, float(pos1[0])) - rep1.tol_zero if pos1.size else 0.0
    band_gap_ok = gap_floor > 0.0

    slope = slope_closed_form(params)
    slope_sign = int(math.copysign(1.0, slope.dQ_analytic)) if slope.dQ_analytic != 0 else 0

    diagnostic = ""
    if nullity != 1:
        verdict = Verdict.INCONCLUSIVE
        diagnostic = f"degenerate kernel: nullity={nullity} (expected 1)"
    elif not band_gap_ok:
        verdict = Verdict.INCONCLUSIVE
        diagnostic = "band gap not bounded away from zero"
    elif n == 1 and slope_sign > 0:
        verdict = Verdict.ORBITALLY_STABLE
    elif n == 1 and slope_sign < 0:
        verdict = Verdict.ORBITALLY_UNSTABLE
    elif n == 2 and slope_sign > 0:
        verdict = Verdict.LINEARLY_UNSTABLE
    else:
        verdict = Verdict.INCONCLUSIVE
        diagnostic = f"index/slope pair (n={n}, sign={slope_sign}) outside the table"

    return StabilityVerdict(
        verdict, _clause_for(params, verdict), n, nullity, slope_sign,
        band_gap_ok, s1, s2, diagnostic,
    )


def perturbation_experiment(
    params: PhysParams,
    grid: Grid,
    eps: float,
    direction: str,
    cfg: EvolveConfig,
    seed: int = 0,
) -> tuple[float, Trajectory]:
    """Evolve Phi + eps*W (W of unit X-norm) and return the max orbit
    distance over the recorded instants together with the trajectory.

    direction = "RadialSymmetric" keeps W inside X_k; "Generic" does not.
    """
    if not 0.0 <= eps <= 0.1:
        raise ValueError("eps must lie in [0, 0.1]")
    if direction not in ("RadialSymmetric", "Generic"):
        raise ValueError(f"unknown direction {direction!r}")

    phi = refine_profile(params, grid)
    Phi = StateVector(phi, phi * (1j * params.omega))

    if eps > 0.0:
        rng = np.random.default_rng(seed)
        envelope = np.exp(-grid.nodes / 4.0)
        if direction == "RadialSymmetric":
            rows = 2 if params.k >= 1 else 1
            base = rng.standard_normal((rows, grid.M)) * envelope
            edges = np.empty((params.N, grid.M))
            if params.k >= 1:
                edges[: params.k] = base[0]
                edges[params.k :] = base[1]
            else:
                edges[:] = base[0]
        else:
            edges = rng.standard_normal((params.N, grid.M)) * envelope
        W = StateVector(
            GraphFunction(edges[0, 0], edges.astype(complex)),
            GraphFunction.zero(params.N, grid),
        )
        # shared vertex value: damp the first column toward it smoothly
        W.u.edges[:, 0] = W.u.vertex
        W = W * (1.0 / x_norm(W, grid))
        U0 = Phi + eps * W
    else:
        U0 = Phi

    traj = evolve(params, grid, U0, cfg)
    dmax = max(distance_to_orbit(U, Phi, grid)[0] for U in traj.states)
    return dmax, traj


def linear_growth_rate(params: PhysParams, grid: Grid) -> float:
    """Max real part of the discrete flow spectrum on the relevant space."""
    phi = refine_profile(params, grid)
    lam = solve_flow_spectrum(params, grid, phi=phi, restrict=params.k)
    return float(np.max(lam.real))


def _classify_point(args) -> tuple[PhysParams, StabilityVerdict | str]:
    params, grid = args
    try:
        return params, classify(params, grid)
    except (ValueError, RuntimeError) as exc:
        return params, str(exc)


def phase_diagram(
    sweep: list[PhysParams],
    grid: Grid,
    max_workers: int | None = None,
) -> list[tuple[PhysParams, StabilityVerdict | str]]:
    """Classify every sweep point; invalid points yield their reason string.

    Parallelism is capped by KGGRAPH_THREADS (default: serial).
    """
    if max_workers is None:
        max_workers = int(os.environ.get("KGGRAPH_THREADS", "1"))
    jobs = [(p, grid) for p in sweep]
    if max_workers <= 1 or len(jobs) <= 1:
        return [_classify_point(j) for j in jobs]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as ex:
        return list(ex.map(_classify_point, jobs))
