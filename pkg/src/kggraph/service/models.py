"""Pydantic request/response models for the HTTP interface.

The wire schemas mirror the JSON formats of the core types:
GraphFunction as {"N", "M", "L", "vertex": [re, im], "edges": [[[re, im], ...], ...]}
and SpectralReport as {"eigenvalues", "morse_index", "nullity", "band_edges"}.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from ..core import Grid, PhysParams
from ..evolution import EvolveConfig


class ParamsModel(BaseModel):
    N: int = 3
    k: int = 0
    alpha: float = 0.0
    m: float = 1.0
    omega: float = 0.0
    p: float = 2.0

    def to_domain(self) -> PhysParams:
        return PhysParams(N=self.N, alpha=self.alpha, m=self.m,
                          omega=self.omega, p=self.p, k=self.k)


class GridModel(BaseModel):
    L: float = 60.0
    M: int = Field(default=1000, le=20000)

    def to_domain(self) -> Grid:
        return Grid(L=self.L, M=self.M)


class ProfileRequest(BaseModel):
    params: ParamsModel
    grid: GridModel = GridModel()
    refine: bool = True


class ProfileResponse(BaseModel):
    function: dict
    residual: float
    vertex_flux_defect: float


class SpectrumRequest(BaseModel):
    params: ParamsModel
    grid: GridModel = GridModel()
    which: Literal["H", "L1", "L2", "block", "flow"] = "H"
    restrict: Optional[int] = None
    tol_zero: Optional[float] = None

    @field_validator("restrict")
    @classmethod
    def _restrict_nonneg(cls, v):
        if v is not None and v < 0:
            raise ValueError("restrict must be >= 0")
        return v


class SpectrumResponse(BaseModel):
    report: Optional[dict] = None
    # flow spectra are non-symmetric; eigenvalues come back as [re, im] pairs
    flow_eigenvalues: Optional[list[tuple[float, float]]] = None


class SlopeRequest(BaseModel):
    params: ParamsModel
    domega: float = 1e-5


class SlopeResponse(BaseModel):
    Q: float
    dQ_analytic: float
    dQ_numeric: float
    region: str


class ClassifyRequest(BaseModel):
    params: ParamsModel
    grid: GridModel = GridModel()


class ClassifyResponse(BaseModel):
    verdict: str
    clause: str
    evidence: dict
    sigma1: float
    sigma2: float
    diagnostic: str
    csv_row: str


class EvolveRequest(BaseModel):
    params: ParamsModel
    grid: GridModel = GridModel()
    dt: float = Field(default=1e-3, gt=0)
    T: float = Field(default=5.0, gt=0)
    eps: float = Field(default=0.0, ge=0.0, le=0.1)
    direction: Literal["RadialSymmetric", "Generic"] = "RadialSymmetric"
    record_every: int = Field(default=10, ge=1)
    seed: int = 0

    def to_config(self) -> EvolveConfig:
        return EvolveConfig(dt=self.dt, T=self.T, record_every=self.record_every)


class EvolveResponse(BaseModel):
    times: list[float]
    energies: list[float]
    charges: list[float]
    energy_drift: float
    charge_drift: float
    max_orbit_distance: float
    blew_up: bool
    final_state: dict


class PhaseDiagramRequest(BaseModel):
    sweep: list[ParamsModel]
    grid: GridModel = GridModel()


class PhaseDiagramResponse(BaseModel):
    header: str
    rows: list[str]
    skipped: list[dict]
