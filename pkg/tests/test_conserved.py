import math

import numpy as np
import pytest

from kggraph.conserved import (
    SlopeRegion,
    charge,
    charge_of_profile_direct,
    energy,
    lyapunov,
    slope_closed_form,
)
from kggraph.core import Grid, GraphFunction, PhysParams, StateVector, l2_inner
from kggraph.profiles import build_profile

P = PhysParams(N=3, alpha=0.5, m=1.0, omega=0.3, p=2.0, k=1)
G = Grid(L=60.0, M=1500)


def _standing_wave(params, grid):
    phi = build_profile(params, grid)
    return StateVector(phi, phi * (1j * params.omega))


class TestFunctionals:
    def test_zero_state(self):
        U = StateVector.zero(3, G)
        assert energy(U, P, G) == 0.0
        assert charge(U, G) == 0.0

    def test_charge_of_standing_wave(self):
        # Q = Im int u conj(v) = Im(-i w)||phi||^2 = -w ||phi||^2
        U = _standing_wave(P, G)
        phi = U.u
        assert charge(U, G) == pytest.approx(-0.3 * l2_inner(phi, phi, G), rel=1e-12)

    def test_charge_phase_invariant(self):
        U = _standing_wave(P, G)
        rotated = np.exp(0.9j) * U
        assert charge(rotated, G) == pytest.approx(charge(U, G), rel=1e-12)

    def test_energy_phase_invariant(self):
        U = _standing_wave(P, G)
        rotated = np.exp(0.9j) * U
        assert energy(rotated, P, G) == pytest.approx(energy(U, P, G), rel=1e-12)

    def test_lyapunov_combination(self):
        U = _standing_wave(P, G)
        assert lyapunov(U, P, G) == pytest.approx(
            energy(U, P, G) + P.omega * charge(U, G)
        )

    def test_quartic_term_sign(self):
        # doubling the amplitude must raise the quadratic part 4x but the
        # p+1 part 8x (p = 2), so E(2u) < 4 E(u) for the soliton
        U = _standing_wave(P, G)
        assert energy(2.0 * U, P, G) < 4.0 * energy(U, P, G)


class TestClosedFormCharge:
    def test_matches_grid_charge(self):
        rep = slope_closed_form(P)
        direct = charge_of_profile_direct(P, Grid(L=60.0, M=4000))
        assert rep.Q_value == pytest.approx(direct, rel=1e-5)

    def test_analytic_vs_numeric_derivative(self):
        rep = slope_closed_form(P)
        assert rep.dQ_analytic == pytest.approx(rep.dQ_numeric, rel=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_points_derivative(self, seed):
        rng = np.random.default_rng(seed)
        while True:
            params = PhysParams(
                N=3,
                alpha=float(rng.uniform(-1, 1)),
                m=1.0,
                omega=float(rng.uniform(-0.9, 0.9)),
                p=float(rng.uniform(1.5, 4.0)),
                k=int(rng.integers(0, 2)),
            )
            try:
                params.require_profile()
                break
            except ValueError:
                continue
        rep = slope_closed_form(params)
        assert rep.dQ_analytic == pytest.approx(rep.dQ_numeric, rel=1e-7)


class TestSlopeRegions:
    def test_unstable_side(self):
        # alpha > 0, 0 < |w| < m sqrt(p-1)/2 = 0.5
        rep = slope_closed_form(P)
        assert rep.region is SlopeRegion.UNSTABLE_SIDE
        assert rep.dQ_analytic < 0

    def test_stable_side(self):
        params = PhysParams(N=3, alpha=-0.5, m=1.0, omega=0.9, p=2.0, k=0)
        rep = slope_closed_form(params)
        assert rep.region is SlopeRegion.STABLE_SIDE
        assert rep.dQ_analytic > 0

    def test_boundary(self):
        params = PhysParams(N=3, alpha=-0.5, m=1.0, omega=0.5, p=2.0, k=0)
        assert slope_closed_form(params).region is SlopeRegion.BOUNDARY

    def test_out_of_range_sign_combination(self):
        # alpha < 0 with small omega is outside both sided regions
        params = PhysParams(N=3, alpha=-0.5, m=1.0, omega=0.2, p=2.0, k=0)
        assert slope_closed_form(params).region is SlopeRegion.OUT_OF_RANGE

    def test_p_at_least_five(self):
        params = PhysParams(N=3, alpha=-0.5, m=1.0, omega=0.9, p=5.0, k=0)
        assert slope_closed_form(params).region is SlopeRegion.OUT_OF_RANGE

    def test_supersonic_rejected(self):
        params = PhysParams(N=3, alpha=-0.5, m=1.0, omega=1.2, p=2.0, k=0)
        with pytest.raises(ValueError):
            slope_closed_form(params)

    def test_json_dict(self):
        d = slope_closed_form(P).to_json_dict()
        assert set(d) == {"Q", "dQ_analytic", "dQ_numeric", "region"}
        assert d["region"] == "UnstableSide"
