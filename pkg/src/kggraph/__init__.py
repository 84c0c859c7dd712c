"""kggraph: standing-wave stability laboratory for the nonlinear
Klein-Gordon equation with a delta interaction on a star graph."""

from .core import (
    Grid,
    GraphFunction,
    PhysParams,
    StateVector,
    default_truncation_length,
    distance_to_orbit,
    l2_inner,
    project_Xk,
    x_inner,
)
from .profiles import build_profile, refine_profile, stationary_residual
from .operators import (
    SpectralReport,
    assemble_H_alpha,
    assemble_L12,
    assemble_block_L,
    band_edges,
    restrict_to_Lk,
    solve_flow_spectrum,
    solve_spectrum,
    spectral_map_mu,
)
from .conserved import SlopeReport, charge, energy, lyapunov, slope_closed_form
from .evolution import EvolveConfig, Trajectory, check_Xk_invariance, evolve
from .stability import (
    Clause,
    StabilityVerdict,
    Verdict,
    classify,
    linear_growth_rate,
    perturbation_experiment,
    phase_diagram,
)

__version__ = "1.0.0"
