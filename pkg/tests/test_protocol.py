import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenopurify import hilbert
from zenopurify.errors import AsymptoticsUndefined, ProbabilityUnderflow
from zenopurify.model import CoherentState, ModelParams, NumberState, coherent_state, number_state, thermal_state
from zenopurify.protocol import (
    Trajectory,
    TrajectoryPoint,
    asymptotic_prediction,
    convergence_step,
    run_protocol,
    survival_from_powers,
)
from zenopurify.spectral import decompose
from zenopurify.veff import beta_fixed_point, v_coherent_analytic, v_number_analytic, v_numeric

FIG1 = ModelParams(1.0, 1.0, 0.2, 2 * math.pi / 1.2, 1.0, 48, 48)


@pytest.fixture(scope="module")
def fig1_op():
    return v_coherent_analytic(FIG1, 0.5)


@pytest.fixture(scope="module")
def fig1_decomp(fig1_op):
    return decompose(fig1_op.v)


def ground(dim):
    return hilbert.projector(number_state(0, dim))


class TestRunProtocol:
    def test_identity(self):
        rho0 = thermal_state(1.0, 1.0, 6)
        traj = run_protocol(np.eye(6), rho0, 5)
        assert len(traj) == 6
        for pt in traj.points:
            assert pt.survival == 1.0
            np.testing.assert_allclose(pt.state, rho0, atol=1e-15)
            assert pt.fid is None

    def test_decoupled_number_projection(self):
        p = ModelParams(1.3, 0.7, 0.0, 0.9, dimA=4, dimB=8)
        rho0 = thermal_state(0.7, 2.0, 8)
        traj = run_protocol(v_number_analytic(p, 2), rho0, 10)
        np.testing.assert_allclose(traj.survival, 1.0, atol=1e-12)
        for pt in traj.points:
            np.testing.assert_allclose(np.diag(pt.state).real, np.diag(rho0).real, atol=1e-12)

    def test_fig1_fidelity_rises(self, fig1_op, fig1_decomp):
        traj = run_protocol(fig1_op, thermal_state(1.0, 1.0, 48), 10, fig1_decomp)
        assert traj[0].survival == 1.0
        assert traj[0].fid < 0.6
        assert traj[2].fid > 0.95
        assert traj[10].fid > 0.999

    def test_initial_point(self, fig1_op, fig1_decomp):
        rho0 = thermal_state(1.0, 1.0, 48)
        traj = run_protocol(fig1_op, rho0, 1, fig1_decomp)
        np.testing.assert_allclose(traj[0].state, rho0, atol=1e-15)
        assert traj[0].fid == pytest.approx(hilbert.fidelity_pure(rho0, fig1_decomp.u(0)), abs=1e-15)

    def test_underflow_flagged(self):
        v = 1e-100 * np.diag([1.0, 0.5])
        traj = run_protocol(v, np.diag([0.5, 0.5]), 10)
        assert traj.underflow
        assert len(traj) == 2
        assert traj[1].survival == pytest.approx(0.625e-200, rel=1e-12)
        with pytest.raises(ProbabilityUnderflow):
            run_protocol(v, np.diag([0.5, 0.5]), 10, strict=True)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_survival_monotone_and_states_valid(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        v = x / np.linalg.norm(x, 2)
        y = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho0 = y @ y.conj().T
        rho0 /= np.trace(rho0).real
        traj = run_protocol(v, rho0, 15)
        surv = traj.survival
        assert np.all(np.diff(surv) <= 1e-12)
        for pt in traj.points:
            hilbert.check_density_matrix(pt.state)


class TestAsymptotics:
    def test_stationary_pure_state(self, fig1_decomp):
        rho0 = hilbert.projector(fig1_decomp.u(0))
        pred = asymptotic_prediction(fig1_decomp, rho0, 7)
        assert pred.survival_pred == pytest.approx(1, abs=1e-10)

    def test_scaling(self):
        d = decompose(np.diag([0.9, 0.3]))
        rho0 = np.diag([0.5, 0.5])
        p5 = asymptotic_prediction(d, rho0, 5).survival_pred
        p10 = asymptotic_prediction(d, rho0, 10).survival_pred
        assert p10 / p5 == pytest.approx(0.9**10, rel=1e-12)

    def test_state_is_pure(self, fig1_decomp):
        pred = asymptotic_prediction(fig1_decomp, thermal_state(1.0, 1.0, 48), 3)
        assert np.linalg.eigvalsh(pred.state_pred)[-1] == pytest.approx(1, abs=1e-10)

    def test_fig1_cross_check(self, fig1_op, fig1_decomp):
        rho0 = thermal_state(1.0, 1.0, 48)
        traj = run_protocol(fig1_op, rho0, 10, fig1_decomp)
        pred = asymptotic_prediction(fig1_decomp, rho0, 10)
        assert pred.survival_pred == pytest.approx(traj[10].survival, rel=0.01)

    def test_degenerate_refused(self):
        with pytest.raises(AsymptoticsUndefined):
            asymptotic_prediction(decompose(np.eye(3)), np.eye(3) / 3, 4)


class TestConvergenceStep:
    def test_synthetic(self):
        pts = tuple(TrajectoryPoint(n, 1.0, f, np.eye(1)) for n, f in enumerate([0.2, 0.95, 0.999]))
        assert convergence_step(Trajectory(pts), 0.01) == 2

    def test_identity_never(self):
        traj = run_protocol(np.eye(4), np.eye(4) / 4, 10)
        assert convergence_step(traj, 0.01) is None

    def test_fig1(self, fig1_op, fig1_decomp):
        traj = run_protocol(fig1_op, thermal_state(1.0, 1.0, 48), 20, fig1_decomp)
        assert convergence_step(traj, 0.05) == 2


class TestPurification:
    def test_initial_state_independence(self, fig1_op, fig1_decomp):
        t1 = run_protocol(fig1_op, thermal_state(1.0, 1.0, 48), 30, fig1_decomp)
        t2 = run_protocol(fig1_op, ground(48), 30, fig1_decomp)
        assert hilbert.trace_distance(t1[30].state, t2[30].state) < 1e-6

    @pytest.mark.parametrize("n_a", [0, 1, 2])
    def test_number_projection_gives_number_state(self, n_a):
        p = ModelParams(1.0, 1.0, 0.2, 2 * math.pi / 1.2, 1.0, 24, 24)
        v = v_number_analytic(p, n_a)
        traj = run_protocol(v, thermal_state(1.0, 1.0, 24), 60)
        final = traj[-1].state
        assert np.max(np.abs(final - np.diag(np.diag(final)))) < 1e-12
        assert np.max(np.diag(final).real) > 1 - 1e-8

    def test_coherent_projection_gives_coherent_state(self, fig1_op, fig1_decomp):
        traj = run_protocol(fig1_op, thermal_state(1.0, 1.0, 48), 40, fig1_decomp)
        beta = beta_fixed_point(FIG1, 0.5)
        assert hilbert.fidelity_pure(traj[-1].state, coherent_state(beta, 48)) > 1 - 1e-6

    def test_survival_matches_spectral_powers(self):
        p = ModelParams(1.3, 0.8, 0.3, 1.7, dimA=24, dimB=24)
        op = v_numeric(p, CoherentState(0.3 + 0.2j))
        d = decompose(op.v)
        rho0 = thermal_state(0.8, 1.5, 24)
        traj = run_protocol(op, rho0, 30, d)
        for n in range(31):
            assert abs(traj[n].survival - survival_from_powers(d, rho0, n)) < 1e-8
