import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from conftest import random_field, random_profile
from eddymean.dynamics import SolverParams, State
from eddymean.initdata import init_data
from eddymean.integrator import (
    ExponentialStepper,
    IntegratorConfig,
    Trajectory,
    eddy_semigroup,
    heat_semigroup,
    phi_functions,
    simulate,
    step,
)
from eddymean.spectral import GridSpec, ZonalSpectral1D, sobolev_norm


class TestPhiFunctions:
    def test_values_at_zero(self):
        p1, p2 = phi_functions(np.array([0.0]))
        assert p1[0] == 1.0 and p2[0] == 0.5

    @pytest.mark.parametrize("z", [-1e-6, -9.9e-5, -1.01e-4, -1e-3, -0.0999, -0.1001, -0.5, -3.0, -40.0, 2e-5, 0.7])
    def test_against_extended_precision(self, z):
        import mpmath

        mpmath.mp.dps = 40
        zm = mpmath.mpf(z)
        ref1 = float(mpmath.expm1(zm) / zm)
        ref2 = float((mpmath.expm1(zm) - zm) / zm**2)
        p1, p2 = phi_functions(np.array([z]))
        assert p1[0].real == pytest.approx(ref1, rel=1e-14)
        assert p2[0].real == pytest.approx(ref2, rel=1e-14)

    def test_imaginary_arguments(self):
        z = np.array([1e-5j, 0.3j, 2j])
        p1, _ = phi_functions(z)
        np.testing.assert_allclose(p1, (np.exp(z) - 1) / z, rtol=1e-10)


class TestSemigroups:
    def test_heat_decay_rate(self):
        g = GridSpec(16)
        c = np.zeros(16, complex)
        c[3] = c[-3] = 0.5
        out = heat_semigroup(ZonalSpectral1D(g, c), 2.0, 0.1)
        assert out.coeff(3) == pytest.approx(0.5 * math.exp(-0.1 * 9 * 2.0))

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0, 2), st.floats(0, 2))
    def test_eddy_semigroup_property(self, t, s):
        g = GridSpec(16)
        gamma = random_field(g, np.random.default_rng(5))
        ab = eddy_semigroup(eddy_semigroup(gamma, t, 0.05, 1.0), s, 0.05, 1.0)
        np.testing.assert_allclose(ab.coeffs, eddy_semigroup(gamma, t + s, 0.05, 1.0).coeffs, atol=1e-14)

    def test_inviscid_eddy_flow_is_unitary(self, rng):
        g = GridSpec(16)
        gamma = random_field(g, rng)
        out = eddy_semigroup(gamma, 3.7, 0.0, 2.0)
        assert sobolev_norm(out, 0) == pytest.approx(sobolev_norm(gamma, 0), rel=1e-14)

    def test_negative_time_rejected(self, rng):
        with pytest.raises(ValueError):
            heat_semigroup(random_profile(GridSpec(8), rng), -1.0, 0.1)


def _scalar_stepper(lam, dt, scheme):
    return ExponentialStepper([np.array([lam], complex)], lambda u: (u[0] ** 2,), dt, scheme)


class TestExponentialStepper:
    @pytest.mark.parametrize("scheme", ["etdrk2", "exp-euler"])
    def test_constant_forcing_exact(self, scheme):
        lam, c, dt = -3.0, 0.7, 0.25
        st_ = ExponentialStepper([np.array([lam], complex)], lambda u: (np.full(1, c, complex),), dt, scheme)
        u = (np.array([1.0 + 0j]),)
        for _ in range(8):
            u = st_(u)
        t = 8 * dt
        exact = math.exp(lam * t) + c * (math.exp(lam * t) - 1) / lam
        assert u[0][0].real == pytest.approx(exact, rel=1e-13)

    @pytest.mark.parametrize("scheme, order", [("etdrk2", 2), ("exp-euler", 1)])
    def test_convergence_order(self, scheme, order):
        lam, T, u0 = -2.0, 1.0, 0.5
        ref = solve_ivp(lambda t, u: lam * u + u**2, (0, T), [u0], rtol=1e-13, atol=1e-15).y[0, -1]
        errs = []
        for n in (20, 40, 80):
            st_ = _scalar_stepper(lam, T / n, scheme)
            u = (np.array([u0 + 0j]),)
            for _ in range(n):
                u = st_(u)
            errs.append(abs(u[0][0].real - ref))
        rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(np.abs(rates - order) < 0.15)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            ExponentialStepper([np.zeros(1)], lambda u: u, 0.1, "rk4")


class TestIntegratorConfig:
    def test_step_count(self):
        assert IntegratorConfig(dt=1e-3, T=0.5).n_steps == 500

    def test_non_multiple_rejected(self):
        with pytest.raises(ValueError):
            _ = IntegratorConfig(dt=0.3, T=1.0).n_steps

    @pytest.mark.parametrize("kwargs", [{"dt": 0}, {"T": -1}, {"scheme": "rk4"}, {"save_stride": 0}, {"dt": 2, "T": 1}])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            IntegratorConfig(**kwargs)


class TestSimulate:
    def _state(self, N=16, amplitude=0.1, seed=0):
        g = GridSpec(N)
        mu, gamma = init_data(g, amplitude=amplitude, seed=seed)
        return State(0.0, mu, gamma)

    def test_strides_and_clock(self):
        s0 = self._state()
        calls = []
        traj = simulate(s0, IntegratorConfig(dt=0.01, T=0.1, save_stride=3, diag_stride=5), SolverParams(), calls.append)
        np.testing.assert_allclose(traj.times, [0, 0.03, 0.06, 0.09, 0.1], atol=1e-15)
        assert [c.t for c in calls] == pytest.approx([0, 0.05, 0.1])
        assert traj.failure is None

    @pytest.mark.parametrize("model", ["model", "split", "full"])
    def test_single_step_agrees_with_simulate(self, model):
        s0 = self._state()
        cfg = IntegratorConfig(dt=0.01, T=0.01, model=model)
        a = step(s0, cfg, SolverParams())
        b = simulate(s0, cfg, SolverParams()).final
        np.testing.assert_array_equal(a.gamma.coeffs, b.gamma.coeffs)

    def test_deterministic(self):
        s0 = self._state()
        cfg = IntegratorConfig(dt=0.01, T=0.2)
        a = simulate(s0, cfg, SolverParams()).final
        b = simulate(s0, cfg, SolverParams()).final
        assert np.array_equal(a.gamma.coeffs, b.gamma.coeffs) and np.array_equal(a.mu.coeffs, b.mu.coeffs)

    def test_blow_up_returns_partial_trajectory(self):
        s0 = self._state(amplitude=1e150)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            traj = simulate(s0, IntegratorConfig(dt=1.0, T=50.0), SolverParams(nu=0.0))
        assert traj.failure is not None
        assert len(traj) < 51

    def test_trajectory_rejects_time_reversal(self):
        s0 = self._state()
        traj = Trajectory()
        traj.append(State(1.0, s0.mu, s0.gamma))
        with pytest.raises(ValueError):
            traj.append(State(0.5, s0.mu, s0.gamma))


class TestZeroModeDrift:
    def test_forced_mean_is_reported(self):
        from eddymean.dynamics import Formulation
        from eddymean.integrator import _FormulationStepper

        g = GridSpec(8)

        def forcing(u):
            out = np.zeros_like(u[1])
            out[0, 0] = 1.0
            return np.zeros_like(u[0]), out

        form = Formulation(
            "leaky", g, (np.zeros(8, complex), np.zeros((8, 8), complex)), forcing, lambda m, z: (m, z), lambda u: u
        )
        stepper = _FormulationStepper(form, 0.1, "etdrk2")
        mu, gamma = init_data(g, band=(1, 2))
        out = stepper.advance(State(0.0, mu, gamma))
        assert stepper.zero_mode_drift == pytest.approx(0.1)
        assert out.gamma.coeffs[0, 0] == 0.0

    def test_clean_run_reports_zero(self):
        g = GridSpec(16)
        mu, gamma = init_data(g, mu_amplitude=0.2)
        traj = simulate(State(0.0, mu, gamma), IntegratorConfig(dt=0.01, T=0.1, model="split"), SolverParams(c0=0.4))
        assert traj.zero_mode_drift < 1e-15
