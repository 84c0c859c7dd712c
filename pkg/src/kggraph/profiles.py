"""Closed-form standing-wave profiles and their validation.

The vector profile with bump index k carries a shifted sech^(2/(p-1)) bump on
every edge: edges 1..k use the shift -c_k, edges k+1..N the shift +c_k, with
c_k = artanh(alpha / ((2k - N) sqrt(m^2 - omega^2))).  The k = 0 member puts
the same +c_0 shift on all edges; its maximum sits at the interior point
b_0 = -2 c_0 / ((p-1) sqrt(m^2 - omega^2)) when alpha > 0 (c_0 < 0) and at
the vertex when alpha < 0.

alpha = 0 is admitted here (Kirchhoff limit): the profile degenerates to the
half-soliton on every edge and the explicit kernel vectors of the Kirchhoff
linearization become available.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import Grid, GraphFunction, PhysParams

__all__ = [
    "tail_shift",
    "bump_location",
    "half_soliton",
    "half_soliton_derivative",
    "build_profile",
    "refine_profile",
    "stationary_residual",
    "vertex_flux_defect",
    "kernel_vectors_kirchhoff",
    "symmetric_kernel_vector",
]


def tail_shift(params: PhysParams) -> float:
    """c_k = artanh(alpha / ((2k - N) sqrt(m^2 - omega^2)))."""
    params.require_profile()
    arg = params.alpha / ((2 * params.k - params.N) * math.sqrt(params.msq))
    # |arg| < 1 is exactly the profile validity condition
    return math.atanh(arg)


def bump_location(params: PhysParams) -> float:
    """b_0 = -2 c_0 / ((p-1) sqrt(m^2 - omega^2)); meaningful for k = 0."""
    return -2.0 * tail_shift(params) / ((params.p - 1.0) * math.sqrt(params.msq))


def _amplitude(params: PhysParams) -> float:
    return ((params.p + 1.0) * params.msq / 2.0) ** (1.0 / (params.p - 1.0))


def _rate(params: PhysParams) -> float:
    """Argument scale of the sech: (p-1) sqrt(m^2 - omega^2) / 2."""
    return (params.p - 1.0) * math.sqrt(params.msq) / 2.0


def half_soliton(x, params: PhysParams):
    """The alpha = 0 bump centred at the vertex."""
    if params.msq <= 0:
        raise ValueError("need m^2 - omega^2 > 0")
    sech = 1.0 / np.cosh(_rate(params) * np.asarray(x, dtype=float))
    return _amplitude(params) * sech ** (2.0 / (params.p - 1.0))


def half_soliton_derivative(x, params: PhysParams):
    x = np.asarray(x, dtype=float)
    beta = _rate(params)
    return -(2.0 * beta / (params.p - 1.0)) * np.tanh(beta * x) * half_soliton(x, params)


def _profile_edge(x: np.ndarray, shift: float, params: PhysParams) -> np.ndarray:
    sech = 1.0 / np.cosh(_rate(params) * x + shift)
    return _amplitude(params) * sech ** (2.0 / (params.p - 1.0))


def build_profile(params: PhysParams, grid: Grid) -> GraphFunction:
    """Sample the closed-form profile on the grid (real-valued)."""
    if params.alpha == 0.0:
        params.require_profile()
        c = 0.0
    else:
        c = tail_shift(params)
    x = grid.nodes
    edges = np.empty((params.N, grid.M), dtype=complex)
    for j in range(params.N):
        shift = -c if j < params.k else c
        edges[j] = _profile_edge(x, shift, params)
    vertex = _profile_edge(np.array([0.0]), c, params)[0]
    f = GraphFunction(vertex, edges)
    # both edge groups evaluate to the same vertex value by sech evenness
    if params.k >= 1:
        other = _profile_edge(np.array([0.0]), -c, params)[0]
        assert abs(other - vertex) <= 1e-12 * max(1.0, abs(vertex))
    return f


def refine_profile(
    params: PhysParams,
    grid: Grid,
    tol: float = 1e-12,
    max_iter: int = 30,
) -> GraphFunction:
    """Newton-refine the sampled profile to the exact stationary point of the
    lumped discretization: K_H u + M((m^2-omega^2) u - u^p) = 0.

    Spectral checks that rely on exact discrete kernels (gauge mode of the
    block operator, nullity of the second linearization) need this refined
    profile; the closed form alone leaves an O(h^2) defect.
    """
    from .operators import assemble_H_alpha  # local import breaks the cycle

    op = assemble_H_alpha(params, grid)
    K, mdiag = op.stiffness, op.mass_diag
    u = build_profile(params, grid).to_dofs(grid).real
    msq, p = params.msq, params.p
    scale = np.linalg.norm(mdiag * u)
    for _ in range(max_iter):
        F = K @ u + mdiag * (msq * u - np.abs(u) ** (p - 1.0) * u)
        if np.linalg.norm(F) <= tol * max(scale, 1.0):
            break
        J = K + sp.diags(mdiag * (msq - p * np.abs(u) ** (p - 1.0)))
        u = u - spla.spsolve(J.tocsc(), F)
    else:
        raise RuntimeError("profile Newton iteration did not converge")
    return GraphFunction.from_dofs(u.astype(complex), params.N, grid)


def _consistent_mass_apply(g: GraphFunction, grid: Grid) -> np.ndarray:
    """Apply the consistent P1 mass matrix to the dof vector of g.

    Used only by the residual functional: the lumped vertex row is O(h)
    inconsistent at the vertex, which would cap residual convergence at
    h^{3/2}; the consistent row restores clean O(h^2).
    """
    h = grid.h
    M = grid.M
    dofs = g.to_dofs(grid)
    N = g.N
    interior = dofs[1:].reshape(N, M - 1)
    ext = np.concatenate([np.full((N, 1), dofs[0]), interior,
                          np.zeros((N, 1))], axis=1)
    out_edges = (h / 6.0) * (ext[:, :-2] + 4.0 * ext[:, 1:-1] + ext[:, 2:])
    out = np.empty_like(dofs)
    out[0] = N * h / 3.0 * dofs[0] + h / 6.0 * np.sum(ext[:, 1])
    out[1:] = out_edges.ravel()
    return out


def stationary_residual(phi: GraphFunction, params: PhysParams, grid: Grid) -> float:
    """Discrete L^2 norm of H_alpha phi + (m^2-omega^2) phi - |phi|^{p-1} phi,
    outer Dirichlet row excluded."""
    from .operators import assemble_H_alpha

    op = assemble_H_alpha(params, grid)
    u = phi.to_dofs(grid).real
    g = params.msq * phi.edges.real - np.abs(phi.edges.real) ** (params.p - 1.0) * phi.edges.real
    gv = params.msq * phi.vertex.real - abs(phi.vertex.real) ** (params.p - 1.0) * phi.vertex.real
    gfun = GraphFunction(gv, g.astype(complex))
    rho = op.stiffness @ u + _consistent_mass_apply(gfun, grid).real
    return float(math.sqrt(np.sum(rho * rho / op.mass_diag)))


def vertex_flux_defect(phi: GraphFunction, params: PhysParams, grid: Grid) -> float:
    """sum_j phi_j'(0) - alpha phi(0), one-sided derivatives by the
    second-order stencil (-3 f(0) + 4 f(h) - f(2h)) / (2h)."""
    h = grid.h
    f0 = phi.vertex.real
    d = (-3.0 * f0 + 4.0 * phi.edges[:, 0].real - phi.edges[:, 1].real) / (2.0 * h)
    return float(np.sum(d) - params.alpha * f0)


def kernel_vectors_kirchhoff(params: PhysParams, grid: Grid, j: int) -> GraphFunction:
    """Kirchhoff (alpha = 0) kernel vector: half-soliton derivative on edge j,
    its negative on edge j+1, zero elsewhere (j counted from 1)."""
    if params.alpha != 0.0:
        raise ValueError("Kirchhoff kernel vectors require alpha = 0")
    if not 1 <= j <= params.N - 1:
        raise ValueError(f"edge index j={j} outside 1..{params.N - 1}")
    dphi = half_soliton_derivative(grid.nodes, params)
    edges = np.zeros((params.N, grid.M), dtype=complex)
    edges[j - 1] = dphi
    edges[j] = -dphi
    # phi_0'(0) = 0 by evenness, so the shared vertex value is 0
    return GraphFunction(0.0, edges)


def symmetric_kernel_vector(params: PhysParams, grid: Grid) -> GraphFunction:
    """The L^2_k-symmetric Kirchhoff kernel vector: weight (N-k)/k times the
    half-soliton derivative on edges 1..k and -1 times it on edges k+1..N."""
    if params.alpha != 0.0:
        raise ValueError("symmetric kernel vector requires alpha = 0")
    if params.k < 1:
        raise ValueError("symmetric kernel vector requires k >= 1")
    dphi = half_soliton_derivative(grid.nodes, params)
    edges = np.zeros((params.N, grid.M), dtype=complex)
    w = (params.N - params.k) / params.k
    edges[: params.k] = w * dphi
    edges[params.k :] = -dphi
    return GraphFunction(0.0, edges)
