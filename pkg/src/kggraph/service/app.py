"""FastAPI application exposing the numerical laboratory.

Every endpoint is a thin translation layer: pydantic in, domain call, JSON
out.  Validation failures surface as 422 (domain ValueError included);
numeric failures (non-convergence, non-finite states) as 500 with a
structured body.
"""

from __future__ import annotations

from fastapi import FastAPI

from .. import __version__
from ..conserved import slope_closed_form
from ..evolution import NumericBlowupError
from ..operators import (
    assemble_block_L,
    assemble_H_alpha,
    assemble_L12,
    restrict_to_Lk,
    solve_flow_spectrum,
    solve_spectrum,
)
from ..profiles import build_profile, refine_profile, stationary_residual, vertex_flux_defect
from ..stability import CSV_HEADER, classify, perturbation_experiment
from .models import (
    ClassifyRequest,
    ClassifyResponse,
    EvolveRequest,
    EvolveResponse,
    PhaseDiagramRequest,
    PhaseDiagramResponse,
    ProfileRequest,
    ProfileResponse,
    SlopeRequest,
    SlopeResponse,
    SpectrumRequest,
    SpectrumResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="kggraph", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(NumericBlowupError)
    async def _numeric_error(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(
            status_code=500,
            content={"detail": str(exc), "kind": "numeric", "step": exc.step},
        )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/profile", response_model=ProfileResponse)
    def profile(req: ProfileRequest):
        params = req.params.to_domain()
        grid = req.grid.to_domain()
        phi = refine_profile(params, grid) if req.refine else build_profile(params, grid)
        return ProfileResponse(
            function=phi.to_json_dict(grid),
            residual=stationary_residual(phi, params, grid),
            vertex_flux_defect=vertex_flux_defect(phi, params, grid),
        )

    @app.post("/spectrum", response_model=SpectrumResponse)
    def spectrum(req: SpectrumRequest):
        params = req.params.to_domain()
        grid = req.grid.to_domain()
        if req.which == "flow":
            lam = solve_flow_spectrum(params, grid, restrict=req.restrict)
            return SpectrumResponse(
                flow_eigenvalues=[(float(z.real), float(z.imag)) for z in lam]
            )
        if req.which == "H":
            op = assemble_H_alpha(params, grid)
        elif req.which in ("L1", "L2"):
            op = assemble_L12(params, grid, int(req.which[1]))
        else:
            op = assemble_block_L(params, grid)
        if req.restrict is not None:
            op = restrict_to_Lk(op, req.restrict)
        rep = solve_spectrum(op, tol_zero=req.tol_zero)
        return SpectrumResponse(report=rep.to_json_dict())

    @app.post("/slope", response_model=SlopeResponse)
    def slope(req: SlopeRequest):
        rep = slope_closed_form(req.params.to_domain(), domega=req.domega)
        return SlopeResponse(**rep.to_json_dict())

    @app.post("/classify", response_model=ClassifyResponse)
    def classify_ep(req: ClassifyRequest):
        params = req.params.to_domain()
        verdict = classify(params, req.grid.to_domain())
        d = verdict.to_json_dict()
        return ClassifyResponse(csv_row=verdict.csv_row(params), **d)

    @app.post("/evolve", response_model=EvolveResponse)
    def evolve_ep(req: EvolveRequest):
        params = req.params.to_domain()
        grid = req.grid.to_domain()
        cfg = req.to_config()
        dmax, traj = perturbation_experiment(
            params, grid, req.eps, req.direction, cfg, seed=req.seed
        )
        return EvolveResponse(
            times=[float(t) for t in traj.times],
            energies=[float(e) for e in traj.energies],
            charges=[float(q) for q in traj.charges],
            energy_drift=traj.energy_drift(),
            charge_drift=traj.charge_drift(),
            max_orbit_distance=dmax,
            blew_up=traj.blew_up,
            final_state=traj.final.u.to_json_dict(grid),
        )

    @app.post("/phase-diagram", response_model=PhaseDiagramResponse)
    def phase_diagram_ep(req: PhaseDiagramRequest):
        from ..stability import phase_diagram

        grid = req.grid.to_domain()
        sweep, skipped_pre = [], []
        for pm in req.sweep:
            try:
                sweep.append(pm.to_domain())
            except ValueError as exc:
                skipped_pre.append({"params": pm.model_dump(), "reason": str(exc)})
        results = phase_diagram(sweep, grid)
        rows, skipped = [], skipped_pre
        for params, res in results:
            if isinstance(res, str):
                skipped.append({
                    "params": {
                        "N": params.N, "k": params.k, "alpha": params.alpha,
                        "m": params.m, "omega": params.omega, "p": params.p,
                    },
                    "reason": res,
                })
            else:
                rows.append(res.csv_row(params))
        return PhaseDiagramResponse(header=CSV_HEADER, rows=rows, skipped=skipped)

    return app
