import numpy as np
import pytest

from kggraph.core import (
    Grid,
    GraphFunction,
    PhysParams,
    StateVector,
    distance_to_orbit,
    x_norm,
)
from kggraph.evolution import (
    EvolveConfig,
    LinearStepper,
    check_Xk_invariance,
    evolve,
    xk_defect,
)
from kggraph.profiles import refine_profile

P = PhysParams(N=3, alpha=-0.5, m=1.0, omega=0.9, p=2.0, k=0)
G = Grid(L=60.0, M=300)


def _standing_wave(params=P, grid=G):
    phi = refine_profile(params, grid)
    return StateVector(phi, phi * (1j * params.omega))


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            EvolveConfig(dt=-1e-3, T=1.0)
        with pytest.raises(ValueError):
            EvolveConfig(dt=1e-3, T=1.0, record_every=0)


class TestNonlinearKick:
    def test_constant_state(self):
        from kggraph.evolution import _nonlinear_kick

        u = np.full(10, 2.0 + 0j)
        v = np.zeros(10, dtype=complex)
        out = _nonlinear_kick(u, v, 2.0, 0.1)
        np.testing.assert_allclose(out, 0.1 * 2.0 * 2.0)

    def test_reversibility(self):
        from kggraph.evolution import _nonlinear_kick

        rng = np.random.default_rng(1)
        u = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        v = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        w = _nonlinear_kick(u, _nonlinear_kick(u, v, 3.0, 0.2), 3.0, -0.2)
        np.testing.assert_allclose(w, v, atol=1e-15)


class TestLinearStepper:
    def test_conserves_quadratic_energy(self):
        from kggraph.operators import assemble_H_alpha
        import scipy.sparse as sp

        stepper = LinearStepper(P, G, 1e-2)
        op = assemble_H_alpha(P, G)
        S = op.stiffness + P.m ** 2 * sp.diags(op.mass_diag)
        rng = np.random.default_rng(2)
        n = op.dim
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)

        def quad_energy(u, v):
            return (np.vdot(u, S @ u) + np.vdot(v, op.mass_diag * v)).real

        e0 = quad_energy(u, v)
        for _ in range(50):
            u, v = stepper.step(u, v)
        assert quad_energy(u, v) == pytest.approx(e0, rel=1e-11)


class TestEvolve:
    def test_standing_wave_stays_on_orbit(self):
        U0 = _standing_wave()
        cfg = EvolveConfig(dt=1e-2, T=2.0, record_every=20)
        traj = evolve(P, G, U0, cfg)
        d, _ = distance_to_orbit(traj.final, U0, G)
        assert d <= 1e-3 * x_norm(U0, G)  # O(dt^2 + h^2)

    def test_drift_machine_small_on_exact_wave(self):
        U0 = _standing_wave()
        traj = evolve(P, G, U0, EvolveConfig(dt=5e-3, T=2.0, record_every=40))
        assert traj.energy_drift() <= 1e-10
        assert traj.charge_drift() <= 1e-10

    def test_gauge_equivariance(self):
        U0 = _standing_wave()
        cfg = EvolveConfig(dt=5e-3, T=0.5, record_every=100)
        t1 = evolve(P, G, U0, cfg)
        t2 = evolve(P, G, np.exp(0.8j) * U0, cfg)
        diff = t2.final - np.exp(0.8j) * t1.final
        assert x_norm(diff, G) <= 1e-10 * x_norm(t1.final, G)

    def test_time_reversal(self):
        U0 = _standing_wave()
        cfg = EvolveConfig(dt=5e-3, T=1.0, record_every=1000)
        fwd = evolve(P, G, U0, cfg)
        # conjugation reverses time for the real wave equation
        back_in = StateVector(fwd.final.u, -1.0 * fwd.final.v)
        back = evolve(P, G, back_in, cfg)
        rec = StateVector(back.final.u, -1.0 * back.final.v)
        assert x_norm(rec - U0, G) <= 1e-8 * x_norm(U0, G)

    def test_nan_raises(self):
        from kggraph.evolution import NumericBlowupError

        bad = GraphFunction(np.nan, np.full((3, G.M), np.nan, dtype=complex))
        U0 = StateVector(bad, GraphFunction.zero(3, G))
        with pytest.raises(NumericBlowupError):
            evolve(P, G, U0, EvolveConfig(dt=1e-2, T=0.1))

    def test_blowup_flag(self):
        U0 = 50.0 * _standing_wave()  # grossly supercritical data
        cfg = EvolveConfig(dt=1e-3, T=2.0, record_every=10, blowup_norm=1e3)
        try:
            traj = evolve(P, G, U0, cfg)
            assert traj.blew_up
            assert traj.times[-1] < 2.0
        except Exception as exc:
            # overflow to non-finite before the norm check also counts
            from kggraph.evolution import NumericBlowupError

            assert isinstance(exc, NumericBlowupError)


class TestXkInvariance:
    def test_symmetric_data_stays_symmetric(self):
        U0 = _standing_wave()
        cfg = EvolveConfig(dt=5e-3, T=1.0, record_every=50)
        assert check_Xk_invariance(U0, cfg, P, G, 0) <= 1e-12

    def test_negative_control(self):
        # generic data has O(1) defect, so the check can detect violations
        rng = np.random.default_rng(4)
        f = GraphFunction(0.3, rng.standard_normal((3, G.M)) + 0j)
        U = StateVector(f, GraphFunction.zero(3, G))
        assert xk_defect(U, 0, G) > 0.1
