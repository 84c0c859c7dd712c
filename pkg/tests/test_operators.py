import math

import numpy as np
import pytest
import scipy.sparse as sp

from kggraph.core import Grid, PhysParams
from kggraph.operators import (
    FlowSizeError,
    assemble_block_L,
    assemble_H_alpha,
    assemble_L12,
    band_edges,
    default_tol_zero,
    restrict_to_Lk,
    solve_flow_spectrum,
    solve_spectrum,
    spectral_map_mu,
)
from kggraph.profiles import refine_profile

P = PhysParams(N=3, alpha=0.5, m=1.0, omega=0.3, p=2.0, k=1)
G = Grid(L=60.0, M=400)


class TestAssembly:
    def test_dimensions(self):
        op = assemble_H_alpha(P, G)
        n = 1 + 3 * 399
        assert op.stiffness.shape == (n, n)
        assert op.mass_diag.shape == (n,)
        assert op.symmetric

    def test_stiffness_symmetric(self):
        op = assemble_H_alpha(P, G)
        d = op.stiffness - op.stiffness.T
        assert abs(d).max() <= 1e-12

    def test_mass_positive(self):
        op = assemble_H_alpha(P, G)
        assert np.all(op.mass_diag > 0)
        # vertex weight N h / 2
        assert op.mass_diag[0] == pytest.approx(3 * G.h / 2)

    def test_vertex_row(self):
        op = assemble_H_alpha(P, G).stiffness.tocsr()
        h = G.h
        assert op[0, 0] == pytest.approx(3 / h + 0.5)

    def test_quadratic_form_matches_continuum(self):
        # t_alpha[u] for u = e^{-x} on all edges:
        # 3 int (u')^2 + alpha = 3/2 + 0.5
        g = Grid(L=40.0, M=4000)
        op = assemble_H_alpha(P, g)
        u = np.empty(1 + 3 * 3999)
        u[0] = 1.0
        u[1:] = np.tile(np.exp(-g.nodes[:-1]), 3)
        val = float(u @ (op.stiffness @ u))
        assert val == pytest.approx(1.5 + 0.5, rel=1e-3)


class TestSolveSpectrum:
    def test_identity_pencil(self):
        # K = M: every eigenvalue of the pencil is exactly 1
        op = assemble_H_alpha(P, Grid(L=10.0, M=50))
        from dataclasses import replace

        op = replace(op, stiffness=sp.diags(op.mass_diag).tocsr())
        rep = solve_spectrum(op)
        np.testing.assert_allclose(rep.eigenvalues, 1.0, atol=1e-10)

    @pytest.mark.parametrize("N", [2, 3])
    def test_ground_state_oracle(self, N):
        # single negative eigenvalue -alpha^2/N^2 for alpha < 0
        params = PhysParams(N=N, alpha=-1.0, m=1.0, omega=0.0, p=2.0, k=0)
        g = Grid(L=40.0, M=2000)
        rep = solve_spectrum(assemble_H_alpha(params, g))
        assert rep.eigenvalues[0] == pytest.approx(-1.0 / N ** 2, abs=1e-4)
        assert rep.morse_index == 1

    def test_no_bound_state_for_repulsive(self):
        params = PhysParams(N=3, alpha=1.0, m=1.0, omega=0.0, p=2.0, k=0)
        rep = solve_spectrum(assemble_H_alpha(params, Grid(L=40.0, M=1000)))
        assert rep.morse_index == 0

    def test_deterministic(self):
        op = assemble_L12(P, G, 1)
        r1 = solve_spectrum(op, want_vectors=True)
        r2 = solve_spectrum(op, want_vectors=True)
        np.testing.assert_array_equal(r1.eigenvalues, r2.eigenvalues)
        np.testing.assert_array_equal(r1.eigenvectors, r2.eigenvectors)

    def test_iterative_matches_dense(self):
        op = assemble_H_alpha(P, G)
        dense = solve_spectrum(op)
        it = solve_spectrum(op, dense_cap=10)  # force ARPACK path
        np.testing.assert_allclose(
            it.eigenvalues, dense.eigenvalues[: len(it.eigenvalues)], atol=1e-8
        )
        assert not it.complete

    def test_flow_kind_rejected(self):
        with pytest.raises(ValueError, match="flow"):
            from dataclasses import replace

            op = assemble_H_alpha(P, Grid(L=10.0, M=50))
            solve_spectrum(replace(op, kind="Flow"))

    def test_report_json(self):
        rep = solve_spectrum(assemble_H_alpha(P, Grid(L=10.0, M=50)))
        d = rep.to_json_dict()
        assert set(d) >= {"eigenvalues", "morse_index", "nullity", "band_edges"}


class TestL12:
    def test_which_validation(self):
        with pytest.raises(ValueError):
            assemble_L12(P, G, 3)

    def test_l2_nonnegative_with_kernel(self):
        g = Grid(L=60.0, M=1200)
        phi = refine_profile(P, g)
        rep = solve_spectrum(assemble_L12(P, g, 2, phi=phi))
        assert rep.morse_index == 0
        assert abs(rep.eigenvalues[0]) <= 1e-10
        # second-smallest eigenvalue bounded away from zero
        assert rep.eigenvalues[1] > 0.1

    def test_kirchhoff_full_nullity(self):
        params = PhysParams(N=3, alpha=0.0, m=1.0, omega=0.2, p=2.0, k=1)
        g = Grid(L=60.0, M=1500)
        phi = refine_profile(params, g)
        rep = solve_spectrum(assemble_L12(params, g, 1, phi=phi))
        assert rep.nullity == 2  # N - 1


class TestRestriction:
    def test_dimension_reduction(self):
        op = assemble_L12(P, G, 1)
        red = restrict_to_Lk(op, 1)
        assert red.dim == 1 + 2 * (G.M - 1)
        red0 = restrict_to_Lk(op, 0)
        assert red0.dim == 1 + (G.M - 1)

    def test_restricted_eigenvalues_are_a_subset(self):
        g = Grid(L=60.0, M=300)
        phi = refine_profile(P, g)
        op = assemble_L12(P, g, 1, phi=phi)
        full = solve_spectrum(op).eigenvalues
        restr = solve_spectrum(restrict_to_Lk(op, 1)).eigenvalues
        for lam in restr[:10]:
            assert np.min(np.abs(full - lam)) <= 1e-8


class TestBandEdges:
    def test_degenerate_at_omega_zero_m_one(self):
        p = PhysParams(N=3, alpha=0.0, m=1.0, omega=0.0, p=2.0)
        s1, s2 = band_edges(p)
        assert s1 == pytest.approx(1.0) and s2 == pytest.approx(1.0)

    def test_quadratic_oracle(self):
        p = PhysParams(N=3, alpha=0.0, m=2.0, omega=1.0, p=2.0)
        s1, s2 = band_edges(p)
        assert s1 == pytest.approx((5 - math.sqrt(13)) / 2)
        assert s2 == pytest.approx((5 + math.sqrt(13)) / 2)

    def test_factorized_at_omega_zero(self):
        p = PhysParams(N=3, alpha=0.0, m=1.5, omega=0.0, p=2.0)
        s1, s2 = band_edges(p)
        assert {round(s1, 12), round(s2, 12)} == {1.0, 2.25}

    def test_spectral_map_fixed_point_structure(self):
        # mu(0) = 0 and mu maps the pencil eigenvalue back to the scalar one
        assert spectral_map_mu(0.0, 0.3) == 0.0
        lam = 0.4
        mu = spectral_map_mu(lam, 0.3)
        assert mu == pytest.approx(lam + lam * 0.09 / (1 - lam))


class TestBlockAndFlow:
    def test_block_dim_and_symmetry(self):
        g = Grid(L=60.0, M=150)
        op = assemble_block_L(P, g)
        assert op.dim == 4 * (1 + 3 * 149)
        assert abs(op.stiffness - op.stiffness.T).max() <= 1e-12

    def test_flow_spectrum_symmetric_about_axes(self):
        g = Grid(L=60.0, M=150)
        phi = refine_profile(P, g)
        lam = solve_flow_spectrum(P, g, phi=phi, restrict=1)
        # spectrum of the Hamiltonian flow is symmetric under conjugation
        # and under negation
        for z in lam[np.abs(lam.real) > 1e-8][:5]:
            assert np.min(np.abs(lam - np.conj(z))) <= 1e-8
            assert np.min(np.abs(lam + z)) <= 1e-8

    def test_flow_size_guard(self):
        with pytest.raises(FlowSizeError):
            solve_flow_spectrum(P, Grid(L=60.0, M=6000), dense_cap=1000)

    def test_default_tol_zero_formula(self):
        assert default_tol_zero(P, G) == pytest.approx(50 * G.h ** 2 * (1 + 0.5 + 1.0))
