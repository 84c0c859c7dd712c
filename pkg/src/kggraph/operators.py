"""Symmetric discretizations of the graph operators and their spectra.

Everything is assembled from the quadratic form
t_alpha(u) = sum_j int |u_j'|^2 + alpha |u(0)|^2 over piecewise-linear
functions that share the vertex value, with a lumped (diagonal) mass matrix.
The delta interaction is a single alpha contribution to the vertex diagonal,
so symmetry holds to the bit.  The generalized pencil K x = lambda M x then
discretizes the operator itself.

Unknown layout: index 0 is the shared vertex value, followed by the M-1
interior values of each edge in turn (the outer node carries a homogeneous
Dirichlet condition and is eliminated).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import Grid, GraphFunction, PhysParams

__all__ = [
    "OperatorAssembly",
    "SpectralReport",
    "assemble_H_alpha",
    "assemble_L12",
    "restrict_to_Lk",
    "assemble_block_L",
    "band_edges",
    "solve_spectrum",
    "solve_flow_spectrum",
    "eigenvalue_slope_at_alpha0",
    "restricted_second_eigenvalue",
    "default_tol_zero",
    "spectral_map_mu",
    "DENSE_CAP",
]

DENSE_CAP = 5000
_SMALLEST = 20  # iterative path: how many low eigenvalues to extract


class FlowSizeError(RuntimeError):
    """Dense flow eigensolve requested above the size cap."""


def default_tol_zero(params: PhysParams, grid: Grid) -> float:
    """Zero-classification tolerance 50 h^2 (1 + |alpha| + m^2); kernel
    eigenvalues converge at O(h^2), genuine negatives stay O(1) below."""
    return 50.0 * grid.h ** 2 * (1.0 + abs(params.alpha) + params.m ** 2)


@dataclass(frozen=True)
class OperatorAssembly:
    """Stiffness/mass pair for a quadratic form on the graph.

    `multiplicity` carries the edge-group weights after a symmetry
    reduction; it is (1,)*N on the full graph.
    """

    stiffness: sp.csr_matrix
    mass_diag: np.ndarray
    kind: str  # H_alpha | L1 | L2 | L_block | Flow
    grid: Grid
    params: PhysParams
    multiplicity: tuple = ()

    @property
    def dim(self) -> int:
        return self.stiffness.shape[0]

    @property
    def symmetric(self) -> bool:
        return self.kind != "Flow"


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray  # ascending
    morse_index: int
    nullity: int
    tol_zero: float
    band_edges: tuple | None = None
    eigenvectors: np.ndarray | None = field(default=None, repr=False)
    complete: bool = True  # False when only the lowest part was computed

    def to_json_dict(self) -> dict:
        d = {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "morse_index": int(self.morse_index),
            "nullity": int(self.nullity),
            "tol_zero": float(self.tol_zero),
        }
        if self.band_edges is not None:
            d["band_edges"] = [float(self.band_edges[0]), float(self.band_edges[1])]
        return d


# -- assembly ----------------------------------------------------------------

def _lumped_mass(N: int, grid: Grid, multiplicity=None) -> np.ndarray:
    h = grid.h
    M = grid.M
    if multiplicity is None:
        multiplicity = (1.0,) * N
    mdiag = np.empty(1 + len(multiplicity) * (M - 1))
    # vertex weight is N h / 2 regardless of any symmetry reduction
    mdiag[0] = N * h / 2.0
    for g, w in enumerate(multiplicity):
        mdiag[1 + g * (M - 1) : 1 + (g + 1) * (M - 1)] = w * h
    return mdiag


def assemble_H_alpha(params: PhysParams, grid: Grid) -> OperatorAssembly:
    """K = form matrix of t_alpha, M = lumped L^2 weights."""
    N, M, h = params.N, grid.M, grid.h
    n = 1 + N * (M - 1)
    rows, cols, vals = [], [], []

    def add(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    add(0, 0, N / h + params.alpha)
    for j in range(N):
        base = 1 + j * (M - 1)
        add(0, base, -1.0 / h)
        add(base, 0, -1.0 / h)
        for i in range(M - 1):
            add(base + i, base + i, 2.0 / h)
            if i + 1 < M - 1:
                add(base + i, base + i + 1, -1.0 / h)
                add(base + i + 1, base + i, -1.0 / h)
    K = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return OperatorAssembly(
        K, _lumped_mass(N, grid), "H_alpha", grid, params, (1,) * N
    )


def _potential_dofs(phi: GraphFunction, params: PhysParams, grid: Grid, which: int) -> np.ndarray:
    c = params.p if which == 1 else 1.0
    pw = np.abs(phi.to_dofs(grid).real) ** (params.p - 1.0)
    return params.msq - c * pw


def assemble_L12(
    params: PhysParams,
    grid: Grid,
    which: int,
    phi: GraphFunction | None = None,
) -> OperatorAssembly:
    """Linearizations around the profile: which=1 carries the potential
    (m^2-omega^2) - p phi^{p-1}, which=2 the potential (m^2-omega^2) - phi^{p-1},
    both sampled at the grid nodes and lumped onto the diagonal."""
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    params.require_profile()
    if phi is None:
        from .profiles import build_profile

        phi = build_profile(params, grid)
    base = assemble_H_alpha(params, grid)
    V = _potential_dofs(phi, params, grid, which)
    K = base.stiffness + sp.diags(base.mass_diag * V)
    return replace(base, stiffness=K.tocsr(), kind=f"L{which}")


def _restriction_matrix(N: int, M: int, k: int) -> tuple[sp.csr_matrix, tuple]:
    """Prolongation from the L^2_k-symmetric unknowns to the full graph."""
    if not 0 <= k <= N - 1:
        raise ValueError(f"k must be in [0, N-1], got {k}")
    groups = [list(range(N))] if k == 0 else [list(range(k)), list(range(k, N))]
    n_full = 1 + N * (M - 1)
    n_red = 1 + len(groups) * (M - 1)
    rows, cols, vals = [0], [0], [1.0]
    for g, edges in enumerate(groups):
        rbase = 1 + g * (M - 1)
        for j in edges:
            fbase = 1 + j * (M - 1)
            for i in range(M - 1):
                rows.append(fbase + i)
                cols.append(rbase + i)
                vals.append(1.0)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n_full, n_red))
    mult = tuple(len(e) for e in groups)
    return P, mult


def restrict_to_Lk(op: OperatorAssembly, k: int) -> OperatorAssembly:
    """Galerkin restriction onto the edge-symmetric subspace L^2_k: one
    unknown profile per edge group, mass/stiffness weighted by group size."""
    if op.multiplicity != (1,) * op.params.N:
        raise ValueError("operator is already restricted")
    if op.kind == "L_block":
        N, M = op.params.N, op.grid.M
        P1, mult = _restriction_matrix(N, M, k)
        P = sp.block_diag([P1] * 4).tocsr()
    else:
        P, mult = _restriction_matrix(op.params.N, op.grid.M, k)
    K = (P.T @ op.stiffness @ P).tocsr()
    mred = (P.T @ sp.diags(op.mass_diag) @ P).diagonal()
    return replace(op, stiffness=K, mass_diag=mred, multiplicity=mult)


def assemble_block_L(
    params: PhysParams,
    grid: Grid,
    phi: GraphFunction | None = None,
) -> OperatorAssembly:
    """Real 4x4 block operator on (u1, u2, v1, v2): diagonal blocks
    (L1 + w^2, L2 + w^2, I, I) with the +/- w mass couplings."""
    L1 = assemble_L12(params, grid, 1, phi)
    L2 = assemble_L12(params, grid, 2, phi)
    w = params.omega
    Mm = sp.diags(L1.mass_diag)
    K = sp.bmat(
        [
            [L1.stiffness + w * w * Mm, None, None, -w * Mm],
            [None, L2.stiffness + w * w * Mm, w * Mm, None],
            [None, w * Mm, Mm, None],
            [-w * Mm, None, None, Mm],
        ],
        format="csr",
    )
    mdiag = np.tile(L1.mass_diag, 4)
    return OperatorAssembly(K, mdiag, "L_block", grid, params, (1,) * params.N)


def band_edges(params: PhysParams) -> tuple[float, float]:
    """Essential-spectrum band edges of the block operator: the two roots of
    lambda^2 - (1 + m^2) lambda + (m^2 - omega^2) = 0."""
    if params.msq <= 0:
        raise ValueError("need m^2 - omega^2 > 0")
    b = 1.0 + params.m ** 2
    disc = (1.0 - params.m ** 2) ** 2 + 4.0 * params.omega ** 2
    s = math.sqrt(disc)
    return ((b - s) / 2.0, (b + s) / 2.0)


def spectral_map_mu(lam, omega: float):
    """mu(lambda) = lambda + lambda omega^2 / (1 - lambda)."""
    lam = np.asarray(lam, dtype=float)
    return lam + lam * omega ** 2 / (1.0 - lam)


# -- eigen solvers -----------------------------------------------------------

def _whiten(op: OperatorAssembly):
    d = 1.0 / np.sqrt(op.mass_diag)
    Kw = sp.diags(d) @ op.stiffness @ sp.diags(d)
    return Kw, d


def _canonical_sign(vecs: np.ndarray) -> np.ndarray:
    """First component of magnitude > 1e-12 made positive, per column."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.nonzero(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300))[0]
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def _lowest_eigs(op: OperatorAssembly, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Lowest `count` eigenpairs of the pencil via shift-invert below the
    spectrum (Gershgorin lower bound)."""
    Kw, d = _whiten(op)
    Kw = Kw.tocsr()
    diag = Kw.diagonal()
    offsum = np.abs(Kw).sum(axis=1).A1 - np.abs(diag)
    sigma = float((diag - offsum).min()) - 1.0
    vals, vecs = spla.eigsh(Kw.tocsc(), k=count, sigma=sigma, which="LM")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    return vals, d[:, None] * vecs


def solve_spectrum(
    op: OperatorAssembly,
    tol_zero: float | None = None,
    want_vectors: bool = False,
    dense_cap: int = DENSE_CAP,
) -> SpectralReport:
    """All eigenvalues of the symmetric pencil when the dimension allows a
    dense solve, otherwise the lowest few (enough for index counts)."""
    if not op.symmetric:
        raise ValueError("solve_spectrum needs a symmetric kind; "
                         "use solve_flow_spectrum for the flow generator")
    if tol_zero is None:
        tol_zero = default_tol_zero(op.params, op.grid)
    complete = op.dim <= dense_cap
    if complete:
        Kw, d = _whiten(op)
        vals, vecs = sla.eigh(Kw.toarray())
        vecs = d[:, None] * vecs
    else:
        vals, vecs = _lowest_eigs(op, min(_SMALLEST, op.dim - 2))
    vecs = _canonical_sign(vecs)
    morse = int(np.sum(vals < -tol_zero))
    nullity = int(np.sum(np.abs(vals) <= tol_zero))
    be = band_edges(op.params) if op.params.msq > 0 else None
    return SpectralReport(
        eigenvalues=vals,
        morse_index=morse,
        nullity=nullity,
        tol_zero=tol_zero,
        band_edges=be,
        eigenvectors=vecs if want_vectors else None,
        complete=complete,
    )


def _flow_generator(block: OperatorAssembly) -> sp.csr_matrix:
    """J^{-1} M^{-1} K for the block assembly: rows (v1, v2, -u1, -u2)."""
    A = sp.diags(1.0 / block.mass_diag) @ block.stiffness
    n = block.dim // 4
    A = A.tocsr()
    G = sp.vstack([A[2 * n : 3 * n], A[3 * n : 4 * n], -A[: n], -A[n : 2 * n]])
    return G.tocsr()


def solve_flow_spectrum(
    params: PhysParams,
    grid: Grid,
    phi: GraphFunction | None = None,
    restrict: int | None = None,
    dense_cap: int = 12000,
) -> np.ndarray:
    """Full complex spectrum of the linearized-flow generator J^{-1} L.

    `restrict` collapses onto the edge-symmetric subspace first (the flow
    preserves it, so its spectrum is a subset of the full one).
    """
    block = assemble_block_L(params, grid, phi)
    if restrict is not None:
        block = restrict_to_Lk(block, restrict)
    if block.dim > dense_cap:
        raise FlowSizeError(
            f"flow generator dimension {block.dim} exceeds cap {dense_cap}"
        )
    G = _flow_generator(block)
    return sla.eigvals(G.toarray())


def restricted_second_eigenvalue(params: PhysParams, grid: Grid) -> float:
    """Second-smallest eigenvalue of L1 restricted to L^2_k, linearized
    around the Newton-refined discrete profile."""
    from .profiles import refine_profile

    phi = refine_profile(params, grid)
    op = restrict_to_Lk(assemble_L12(params, grid, 1, phi), params.k)
    vals, _ = _lowest_eigs(op, 4)
    return float(vals[1])


def eigenvalue_slope_at_alpha0(
    params: PhysParams, grid: Grid, dalpha: float = 1e-3
) -> float:
    """Centered-difference slope at alpha = 0 of the second restricted
    eigenvalue of L1 (positive by the perturbation analysis for k >= 1)."""
    if params.k < 1:
        raise ValueError("the tracked eigenvalue exists for k >= 1")
    lp = restricted_second_eigenvalue(params.with_alpha(+dalpha), grid)
    lm = restricted_second_eigenvalue(params.with_alpha(-dalpha), grid)
    if not (lp > lm):
        raise RuntimeError(
            f"eigenvalue tracking ambiguity: lambda({dalpha})={lp:.3e} "
            f"<= lambda({-dalpha})={lm:.3e}"
        )
    return (lp - lm) / (2.0 * dalpha)
