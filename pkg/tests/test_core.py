import math

import numpy as np
import pytest

from kggraph.core import (
    Grid,
    GraphFunction,
    GridMismatchError,
    PhysParams,
    StateVector,
    default_truncation_length,
    distance_to_orbit,
    l2_inner,
    l2_norm,
    project_Xk,
    x_inner,
    x_norm,
)


class TestPhysParams:
    def test_valid(self):
        p = PhysParams(N=3, alpha=0.5, m=1.0, omega=0.3, p=2.0, k=1)
        assert p.msq == pytest.approx(1.0 - 0.09)

    @pytest.mark.parametrize("kwargs", [
        dict(N=1, alpha=0.0, m=1.0, omega=0.0, p=2.0),
        dict(N=3, alpha=0.0, m=0.0, omega=0.0, p=2.0),
        dict(N=3, alpha=0.0, m=1.0, omega=0.0, p=1.0),
        dict(N=3, alpha=0.0, m=1.0, omega=0.0, p=2.0, k=2),   # k > (N-1)/2
        dict(N=3, alpha=0.0, m=1.0, omega=0.0, p=2.0, k=-1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PhysParams(**kwargs)

    def test_profile_margin(self):
        # m^2 - w^2 = 0.19 vs alpha^2/(N-2k)^2 = 0.25/9
        p = PhysParams(N=3, alpha=-0.5, m=1.0, omega=0.9, p=2.0, k=0)
        assert p.profile_margin() == pytest.approx(0.19 - 0.25 / 9)
        p.require_profile()

    def test_require_profile_rejects_supersonic(self):
        p = PhysParams(N=3, alpha=0.0, m=1.0, omega=1.5, p=2.0)
        with pytest.raises(ValueError, match="omega"):
            p.require_profile()

    def test_require_profile_rejects_strong_delta(self):
        p = PhysParams(N=3, alpha=3.0, m=1.0, omega=0.0, p=2.0, k=0)
        with pytest.raises(ValueError, match="validity"):
            p.require_profile()

    def test_truncation_length(self):
        p = PhysParams(N=3, alpha=0.0, m=1.0, omega=0.0, p=2.0)
        assert default_truncation_length(p) == pytest.approx(40.0)


class TestGrid:
    def test_spacing(self):
        g = Grid(L=60.0, M=1200)
        assert g.h == pytest.approx(0.05)
        assert g.nodes[0] == pytest.approx(g.h)
        assert g.nodes[-1] == pytest.approx(60.0)

    def test_refined_halves_h(self):
        g = Grid(L=10.0, M=100)
        assert g.refined().h == pytest.approx(g.h / 2)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid(L=-1.0, M=100)
        with pytest.raises(ValueError):
            Grid(L=1.0, M=4)


class TestGraphFunction:
    def setup_method(self):
        self.grid = Grid(L=10.0, M=50)
        rng = np.random.default_rng(0)
        edges = rng.standard_normal((3, 50)) + 1j * rng.standard_normal((3, 50))
        edges[:, -1] = 0.0
        self.f = GraphFunction(1.0 + 2.0j, edges)

    def test_dof_roundtrip(self):
        dofs = self.f.to_dofs(self.grid)
        assert dofs.shape == (1 + 3 * 49,)
        g = GraphFunction.from_dofs(dofs, 3, self.grid)
        assert g.vertex == self.f.vertex
        np.testing.assert_allclose(g.edges, self.f.edges)

    def test_json_roundtrip(self):
        d = self.f.to_json_dict(self.grid)
        assert d["N"] == 3 and d["M"] == 50 and d["L"] == 10.0
        g, grid = GraphFunction.from_json_dict(d)
        assert grid == self.grid
        np.testing.assert_allclose(g.edges, self.f.edges)
        assert g.vertex == self.f.vertex

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            self.f.to_dofs(Grid(L=10.0, M=60))

    def test_arithmetic(self):
        s = self.f + self.f - self.f
        np.testing.assert_allclose(s.edges, self.f.edges)
        np.testing.assert_allclose((2.0 * self.f).edges, 2.0 * self.f.edges)


class TestQuadrature:
    def test_constant_integrates_to_area(self):
        # int over 3 edges of length L of 1 = 3L; trapezoid endpoint correction
        # costs h/2 per outer endpoint since f(L) counts half
        g = Grid(L=10.0, M=1000)
        f = GraphFunction(1.0, np.ones((3, 1000), dtype=complex))
        assert l2_inner(f, f, g) == pytest.approx(30.0, rel=1e-3)

    def test_decaying_exponential(self):
        # int_0^inf e^{-2x} dx = 1/2 per edge
        g = Grid(L=40.0, M=4000)
        f = GraphFunction(1.0, np.exp(-g.nodes)[None, :].repeat(3, axis=0).astype(complex))
        assert l2_inner(f, f, g) == pytest.approx(1.5, rel=1e-3)

    def test_x_inner_adds_derivative_term(self):
        # f = e^{-x}: ||f||^2 = ||f'||^2 per edge, so X-norm^2 of (f, 0) = 2 ||f||^2
        g = Grid(L=40.0, M=4000)
        f = GraphFunction(1.0, np.exp(-g.nodes)[None, :].repeat(3, axis=0).astype(complex))
        U = StateVector(f, GraphFunction.zero(3, g))
        assert x_inner(U, U, g) == pytest.approx(2 * l2_inner(f, f, g), rel=1e-3)


class TestProjection:
    def _random_state(self, grid, seed=3):
        rng = np.random.default_rng(seed)
        mk = lambda: GraphFunction(
            rng.standard_normal(),
            rng.standard_normal((4, grid.M)) + 1j * rng.standard_normal((4, grid.M)),
        )
        return StateVector(mk(), mk())

    def test_idempotent(self):
        g = Grid(L=5.0, M=20)
        U = self._random_state(g)
        P = project_Xk(U, 1)
        PP = project_Xk(P, 1)
        np.testing.assert_allclose(P.u.edges, PP.u.edges, atol=1e-14)

    def test_orthogonal(self):
        g = Grid(L=5.0, M=20)
        U = self._random_state(g)
        P = project_Xk(U, 1)
        D = U - P
        assert abs(x_inner(D, P, g)) <= 1e-10 * x_norm(U, g) ** 2

    def test_k0_makes_all_edges_equal(self):
        g = Grid(L=5.0, M=20)
        P = project_Xk(self._random_state(g), 0)
        for j in range(1, 4):
            np.testing.assert_allclose(P.u.edges[j], P.u.edges[0])

    def test_invalid_k(self):
        g = Grid(L=5.0, M=20)
        with pytest.raises(ValueError):
            project_Xk(self._random_state(g), 4)


class TestDistanceToOrbit:
    def test_phase_rotation_is_on_orbit(self):
        g = Grid(L=5.0, M=30)
        rng = np.random.default_rng(9)
        f = GraphFunction(1.0, rng.standard_normal((2, 30)) + 0j)
        Phi = StateVector(f, 0.5j * f)
        U = np.exp(0.7j) * Phi
        d, theta = distance_to_orbit(U, Phi, g)
        assert d <= 1e-12 * x_norm(Phi, g)
        assert theta == pytest.approx(0.7, abs=1e-10)

    def test_matches_brute_force(self):
        g = Grid(L=5.0, M=30)
        rng = np.random.default_rng(10)
        mk = lambda: GraphFunction(
            rng.standard_normal(),
            rng.standard_normal((2, 30)) + 1j * rng.standard_normal((2, 30)),
        )
        U = StateVector(mk(), mk())
        Phi = StateVector(mk(), mk())
        d, _ = distance_to_orbit(U, Phi, g)
        brute = min(
            x_norm(U - np.exp(1j * t) * Phi, g)
            for t in np.linspace(0, 2 * np.pi, 2000, endpoint=False)
        )
        assert d == pytest.approx(brute, rel=1e-5)

    def test_zero_reference(self):
        g = Grid(L=5.0, M=30)
        U = StateVector(
            GraphFunction(1.0, np.ones((2, 30), dtype=complex)),
            GraphFunction.zero(2, g),
        )
        d, theta = distance_to_orbit(U, StateVector.zero(2, g), g)
        assert d == pytest.approx(x_norm(U, g))
        assert theta == 0.0
