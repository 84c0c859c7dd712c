"""Truncated star graph, grids, and functions living on them.

A star graph with N edges is truncated to [0, L] per edge with a homogeneous
Dirichlet condition at x = L.  Continuity at the central vertex is structural:
every function stores a single shared vertex value, so the coupling condition
v_1(0) = ... = v_N(0) can never be violated.

Quadrature is the trapezoid rule with a lumped vertex weight N*h/2 (the vertex
belongs to all N edges), interior weight h and outer-endpoint weight h/2.  The
same weights reappear as the lumped mass matrix in :mod:`kggraph.operators`,
which makes the discrete operators exactly symmetric with respect to the
discrete inner products defined here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "PhysParams",
    "Grid",
    "GraphFunction",
    "StateVector",
    "l2_inner",
    "x_inner",
    "project_Xk",
    "distance_to_orbit",
    "default_truncation_length",
]


class GridMismatchError(ValueError):
    """Two graph functions do not share the same grid shape."""


@dataclass(frozen=True)
class PhysParams:
    """Model parameters: edge count N, delta strength alpha, mass m,
    frequency omega, nonlinearity power p and bump index k."""

    N: int
    alpha: float
    m: float
    omega: float
    p: float
    k: int = 0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"need N >= 2 edges, got N={self.N}")
        if self.m <= 0:
            raise ValueError(f"need m > 0, got m={self.m}")
        if self.p <= 1:
            raise ValueError(f"need p > 1, got p={self.p}")
        if not 0 <= self.k <= (self.N - 1) // 2:
            raise ValueError(
                f"k exceeds floor((N-1)/2): k={self.k}, N={self.N}"
            )

    @property
    def msq(self) -> float:
        """m^2 - omega^2, the effective mass of the stationary equation."""
        return self.m * self.m - self.omega * self.omega

    def profile_margin(self) -> float:
        """m^2 - omega^2 - alpha^2/(N-2k)^2; positive iff a profile exists."""
        d = self.N - 2 * self.k
        return self.msq - (self.alpha / d) ** 2

    def require_profile(self):
        """Raise unless the profile validity condition holds."""
        if self.msq <= 0:
            raise ValueError(
                f"m^2 - omega^2 = {self.msq:.6g} <= 0 (need |omega| < m)"
            )
        if self.profile_margin() <= 0:
            d = self.N - 2 * self.k
            raise ValueError(
                "profile validity violated: "
                f"m^2 - omega^2 = {self.msq:.6g} <= "
                f"alpha^2/(N-2k)^2 = {(self.alpha / d) ** 2:.6g}"
            )

    def with_alpha(self, alpha: float) -> "PhysParams":
        return replace(self, alpha=alpha)

    def with_omega(self, omega: float) -> "PhysParams":
        return replace(self, omega=omega)


def default_truncation_length(params: PhysParams) -> float:
    """L = 40/sqrt(m^2 - omega^2); the profile tail is ~sech^(2/(p-1)) and
    drops below 1e-12 well inside this length for p not too close to 1."""
    if params.msq <= 0:
        raise ValueError("need m^2 - omega^2 > 0 to size the domain")
    return 40.0 / math.sqrt(params.msq)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [0, L] per edge: interior nodes x_i = i*h, i = 1..M."""

    L: float
    M: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"need L > 0, got L={self.L}")
        if self.M < 8:
            raise ValueError(f"need M >= 8 interior points, got M={self.M}")

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def nodes(self) -> np.ndarray:
        """Edge nodes x_1..x_M (the vertex x=0 is stored separately)."""
        return np.arange(1, self.M + 1) * self.h

    def refined(self) -> "Grid":
        return Grid(self.L, 2 * self.M)


@dataclass(frozen=True)
class GraphFunction:
    """Complex function on the star graph: one shared vertex value plus an
    (N, M) array of edge values at x_i = i*h.  The value at x = L (column
    M-1) is treated as zero by all operators (Dirichlet truncation)."""

    vertex: complex
    edges: np.ndarray  # shape (N, M), complex

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=complex)
        if e.ndim != 2:
            raise ValueError("edges must be a 2-d (N, M) array")
        object.__setattr__(self, "edges", e)

    @property
    def N(self) -> int:
        return self.edges.shape[0]

    @property
    def M(self) -> int:
        return self.edges.shape[1]

    def check_grid(self, grid: Grid, other: "GraphFunction" = None):
        if self.M != grid.M:
            raise GridMismatchError(
                f"function has M={self.M} but grid has M={grid.M}"
            )
        if other is not None and (other.M != self.M or other.N != self.N):
            raise GridMismatchError(
                f"shape mismatch: ({self.N},{self.M}) vs ({other.N},{other.M})"
            )

    @classmethod
    def zero(cls, N: int, grid: Grid) -> "GraphFunction":
        return cls(0.0, np.zeros((N, grid.M), dtype=complex))

    def copy(self) -> "GraphFunction":
        return GraphFunction(self.vertex, self.edges.copy())

    def __add__(self, other: "GraphFunction") -> "GraphFunction":
        return GraphFunction(self.vertex + other.vertex, self.edges + other.edges)

    def __sub__(self, other: "GraphFunction") -> "GraphFunction":
        return GraphFunction(self.vertex - other.vertex, self.edges - other.edges)

    def __mul__(self, z) -> "GraphFunction":
        return GraphFunction(self.vertex * z, self.edges * z)

    __rmul__ = __mul__

    def to_dofs(self, grid: Grid) -> np.ndarray:
        """Flatten to the operator unknown vector [vertex, edge interiors].

        The Dirichlet node at x = L is dropped; length is 1 + N*(M-1).
        """
        self.check_grid(grid)
        out = np.empty(1 + self.N * (self.M - 1), dtype=complex)
        out[0] = self.vertex
        out[1:] = self.edges[:, : self.M - 1].ravel()
        return out

    @classmethod
    def from_dofs(cls, dofs: np.ndarray, N: int, grid: Grid) -> "GraphFunction":
        dofs = np.asarray(dofs)
        M = grid.M
        if dofs.shape != (1 + N * (M - 1),):
            raise GridMismatchError(
                f"dof vector has length {dofs.shape}, expected {1 + N * (M - 1)}"
            )
        edges = np.zeros((N, M), dtype=complex)
        edges[:, : M - 1] = dofs[1:].reshape(N, M - 1)
        return cls(complex(dofs[0]), edges)

    def to_json_dict(self, grid: Grid) -> dict:
        self.check_grid(grid)
        return {
            "N": self.N,
            "M": self.M,
            "L": grid.L,
            "vertex": [self.vertex.real, self.vertex.imag],
            "edges": [
                [[z.real, z.imag] for z in row] for row in self.edges
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> tuple["GraphFunction", Grid]:
        grid = Grid(L=float(d["L"]), M=int(d["M"]))
        vertex = complex(d["vertex"][0], d["vertex"][1])
        edges = np.array(
            [[complex(re, im) for re, im in row] for row in d["edges"]],
            dtype=complex,
        )
        if edges.shape != (int(d["N"]), int(d["M"])):
            raise ValueError("edge array shape disagrees with N, M header")
        return cls(vertex, edges), grid


@dataclass(frozen=True)
class StateVector:
    """Phase-space point U = (u, v) with u in E(Gamma) and v in L^2(Gamma)."""

    u: GraphFunction
    v: GraphFunction

    def __post_init__(self):
        if self.u.edges.shape != self.v.edges.shape:
            raise GridMismatchError("u and v must live on the same grid")

    @classmethod
    def zero(cls, N: int, grid: Grid) -> "StateVector":
        return cls(GraphFunction.zero(N, grid), GraphFunction.zero(N, grid))

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.u - other.u, self.v - other.v)

    def __mul__(self, z) -> "StateVector":
        return StateVector(self.u * z, self.v * z)

    __rmul__ = __mul__


# -- quadrature and pairings -------------------------------------------------

def _quad_weights(N: int, grid: Grid) -> tuple[float, np.ndarray]:
    """(vertex weight, per-node edge weights of length M)."""
    h = grid.h
    w = np.full(grid.M, h)
    w[-1] = h / 2.0
    return N * h / 2.0, w


def _l2_pair_complex(f: GraphFunction, g: GraphFunction, grid: Grid) -> complex:
    """Hermitian pairing int f conj(g) with the lumped trapezoid weights."""
    wv, we = _quad_weights(f.N, grid)
    s = wv * f.vertex * np.conj(g.vertex)
    s += np.sum(we[None, :] * f.edges * np.conj(g.edges))
    return complex(s)


def _deriv_pair_complex(f: GraphFunction, g: GraphFunction, grid: Grid) -> complex:
    """Hermitian pairing of the piecewise-linear derivatives int f' conj(g')."""
    h = grid.h
    df = np.diff(np.concatenate(
        [np.full((f.N, 1), f.vertex), f.edges], axis=1), axis=1)
    dg = np.diff(np.concatenate(
        [np.full((g.N, 1), g.vertex), g.edges], axis=1), axis=1)
    return complex(np.sum(df * np.conj(dg)) / h)


def _x_pair_complex(A: StateVector, B: StateVector, grid: Grid) -> complex:
    return (
        _l2_pair_complex(A.u, B.u, grid)
        + _deriv_pair_complex(A.u, B.u, grid)
        + _l2_pair_complex(A.v, B.v, grid)
    )


def l2_inner(f: GraphFunction, g: GraphFunction, grid: Grid) -> float:
    """Re int_Gamma f conj(g) dx with the lumped trapezoid quadrature."""
    f.check_grid(grid, g)
    return _l2_pair_complex(f, g, grid).real


def l2_norm(f: GraphFunction, grid: Grid) -> float:
    return math.sqrt(max(l2_inner(f, f, grid), 0.0))


def x_inner(A: StateVector, B: StateVector, grid: Grid) -> float:
    """H^1 pairing of the u components plus L^2 pairing of the v components."""
    A.u.check_grid(grid, B.u)
    return _x_pair_complex(A, B, grid).real


def x_norm(A: StateVector, grid: Grid) -> float:
    return math.sqrt(max(x_inner(A, A, grid), 0.0))


def project_Xk(U: StateVector, k: int) -> StateVector:
    """Orthogonal projection onto X_k: average edges 1..k together and
    edges k+1..N together (k = 0 averages all edges)."""
    N = U.u.N
    if not 0 <= k <= N - 1:
        raise ValueError(f"k must be in [0, N-1], got k={k} for N={N}")

    def proj(f: GraphFunction) -> GraphFunction:
        e = f.edges.copy()
        if k == 0:
            e[:] = e.mean(axis=0, keepdims=True)
        else:
            e[:k] = e[:k].mean(axis=0, keepdims=True)
            e[k:] = e[k:].mean(axis=0, keepdims=True)
        return GraphFunction(f.vertex, e)

    return StateVector(proj(U.u), proj(U.v))


def distance_to_orbit(
    U: StateVector, Phi: StateVector, grid: Grid
) -> tuple[float, float]:
    """min over theta of ||U - e^{i theta} Phi||_X and the minimizing theta.

    Closed form: with the complex X-pairing c = <U, Phi>, the minimizer is
    theta* = arg(c) and d^2 = ||U||^2 + ||Phi||^2 - 2|c|.
    """
    U.u.check_grid(grid, Phi.u)
    nU2 = x_inner(U, U, grid)
    nP2 = x_inner(Phi, Phi, grid)
    if nP2 == 0.0:
        return math.sqrt(max(nU2, 0.0)), 0.0
    c = _x_pair_complex(U, Phi, grid)
    d2 = nU2 + nP2 - 2.0 * abs(c)
    return math.sqrt(max(d2, 0.0)), cmath.phase(c)
