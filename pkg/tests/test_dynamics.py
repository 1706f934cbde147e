"""Dynamics tests: g-term identities, scalar rates, stepping, short runs."""

import numpy as np
import pytest

from stokestring import diagnostics as diag
from stokestring import dynamics as dyn
from stokestring import geometry as geo
from stokestring import spectral as sp
from stokestring import velocity as vel
from stokestring.errors import SimulationAbort
from stokestring.geometry import ForceParams

N = 256
ALPHA = sp.grid_points(N)
S = sp.grid_points(N)


def make_state(eps=0.01, k=3, eps_y=0.01, ky=2, n=N):
    a = sp.grid_points(n)
    s = sp.grid_points(n)
    return geo.normalize_initial_data(a + eps * np.sin(k * a), eps_y * np.sin(ky * s))


def rhs_for(state, params=ForceParams()):
    return dyn.evaluate_rhs(state, params)


class TestGTheta:
    def test_equilibrium_zero(self):
        st = geo.equilibrium_state(N)
        fr, v, bundle = rhs_for(st)
        assert np.max(np.abs(bundle.g_theta)) < 1e-12
        assert np.max(np.abs(bundle.g_y)) < 1e-12

    def test_two_path_consistency(self):
        params = ForceParams()
        st = make_state()
        fr, v, bundle = rhs_for(st)
        lead, _ = vel.theta_rhs_terms(st, params, fr)
        path1 = lead / st.perim + bundle.g_theta
        du = np.stack([sp.derivative(v.u_alpha[:, 0]),
                       sp.derivative(v.u_alpha[:, 1])], -1)
        raw = (np.sum(du * fr.nor_a, -1)
               + (v.T - v.u_dot_t) * fr.ta) / st.perim
        path2 = raw - raw.mean()
        assert np.max(np.abs(path1 - path2)) < 1e-7

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_two_path_on_random_states(self, seed):
        # randomized band-limited admissible states, both identities
        rng = np.random.default_rng(seed)
        modes = np.arange(1, 5)
        a = ALPHA

        def band(x):
            amps = rng.standard_normal(modes.size)
            ph = rng.uniform(0, 2 * np.pi, modes.size)
            f = np.sum(amps[:, None] * np.sin(modes[:, None] * x + ph[:, None]), 0)
            return f / np.max(np.abs(f))

        eps = float(rng.uniform(0.005, 0.03))
        st = geo.normalize_initial_data(a + eps * band(a), eps * band(S))
        params = ForceParams(lam=float(rng.uniform(0, 0.5)))
        fr, v, bundle = dyn.evaluate_rhs(st, params)
        lead, _ = vel.theta_rhs_terms(st, params, fr)
        path1 = lead / st.perim + bundle.g_theta
        du = np.stack([sp.derivative(v.u_alpha[:, 0]),
                       sp.derivative(v.u_alpha[:, 1])], -1)
        raw = (np.sum(du * fr.nor_a, -1)
               + (v.T - v.u_dot_t) * fr.ta) / st.perim
        assert np.max(np.abs(path1 - (raw - raw.mean()))) < 1e-7
        path1y = -0.25 * sp.hilbert(fr.yss) + bundle.g_y
        ut_s = np.sum(v.u_s * fr.tan_s, -1)
        rawy = sp.derivative(ut_s - sp.eval_series(v.T, fr.alpha_at_s)) / st.perim
        assert np.max(np.abs(path1y - (rawy - rawy.mean()))) < 1e-7

    def test_linear_scaling_in_perturbation(self):
        norms = []
        for eps in (1e-2, 1e-3, 1e-4):
            st = make_state(eps, 3, 0.0)
            _, _, bundle = rhs_for(st)
            norms.append(sp.sobolev_seminorm(bundle.g_theta, 0.0) / eps)
        # g_theta contains terms linear in the perturbation: ratio stays bounded
        assert max(norms) < 3.0 * min(norms) + 1e-12

    def test_projected_means_are_small(self):
        _, _, bundle = rhs_for(make_state(0.02, 2, 0.02, 3))
        assert np.max(np.abs(bundle.projected_means)) < 1e-8


class TestGY:
    def test_two_path_consistency(self):
        st = make_state()
        fr, v, bundle = rhs_for(st)
        path1 = -0.25 * sp.hilbert(fr.yss) + bundle.g_y
        ut_s = np.sum(v.u_s * fr.tan_s, -1)
        raw = sp.derivative(ut_s - sp.eval_series(v.T, fr.alpha_at_s)) / st.perim
        path2 = raw - raw.mean()
        assert np.max(np.abs(path1 - path2)) < 1e-7

    def test_dilution_term(self):
        # with y_s = 0 the -(1 + y_s) s_t / s term is exactly -s_t / s
        st = make_state(0.02, 2, 0.0)
        fr, v, bundle = rhs_for(st)
        s_dot, _, _ = dyn.scalar_rates(st, v, fr)
        zero_rest = dyn.g_y(st, v, ForceParams(), 0.0, fr)[0]
        withs = dyn.g_y(st, v, ForceParams(), s_dot, fr)[0]
        assert np.max(np.abs((withs - zero_rest) - 0.0)) < 1e-14  # constant shift only
        # the shift itself is removed by projection, so compare raw means
        assert abs(s_dot) > 0  # nontrivial rate for the perturbed state


class TestScalarRates:
    def test_equilibrium_rates_vanish(self):
        st = geo.equilibrium_state(N)
        fr, v, bundle = rhs_for(st)
        assert abs(bundle.s_dot) < 1e-12
        assert abs(bundle.mean_angle_dot) < 1e-12
        assert np.max(np.abs(bundle.base_velocity)) < 1e-12

    def test_rotation_invariance_of_s_dot(self):
        st = make_state(0.02, 2, 0.01, 3)
        _, _, b0 = rhs_for(st)
        _, _, b1 = rhs_for(st.with_(theta_mean=st.theta_mean + 0.9))
        assert abs(b0.s_dot - b1.s_dot) < 1e-12
        assert abs(b0.mean_angle_dot - b1.mean_angle_dot) < 1e-12

    def test_perimeter_relaxes_toward_one(self):
        # bending + stretching with area pi: s > 1 decays toward 1
        st = make_state(0.05, 2, 0.0)
        assert st.perim > 1.0
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.2, output_every=50)
        res = dyn.run_simulation(st, cfg)
        assert res.final_state.perim < st.perim
        assert res.final_state.perim > 1.0 - 1e-6


class TestTimeStep:
    def test_single_mode_matches_implicit_step(self):
        # with g = 0 (no force: can't happen), instead compare the update
        # formula directly on a crafted bundle
        st = geo.equilibrium_state(N)
        cfg = dyn.SimConfig(n=N, dt=0.05)
        k = 4
        osc = 1e-6 * np.sin(k * ALPHA)
        st = geo.make_state(osc, np.zeros(N))
        fr, v, bundle = rhs_for(st)
        zero = np.zeros(N)
        crafted = dyn.RhsBundle(zero, zero, 0.0, 0.0, np.zeros(2), np.zeros(2))
        new, _ = dyn.time_step(st, cfg, rhs=(fr, v, crafted))
        factor = sp.implicit_factor(N, cfg.dt, "bending", st.perim)[k]
        expect = factor * osc
        assert np.max(np.abs(new.theta_osc.samples - expect)) < 1e-18

    def test_equilibrium_fixed_point_long_run(self):
        st = geo.equilibrium_state(N)
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.1, output_every=100)
        res = dyn.run_simulation(st, cfg)
        fs = res.final_state
        assert np.max(np.abs(fs.theta_osc.samples)) < 1e-10
        assert np.max(np.abs(fs.stretch.samples)) < 1e-10
        assert abs(fs.perim - 1.0) < 1e-10
        assert abs(fs.theta_mean) < 1e-10
        assert np.max(np.abs(fs.base_point)) < 1e-10

    def test_projection_order_variant_is_equivalent(self):
        # projecting g before the solve equals projecting the state after:
        # the zero mode has unit implicit factor
        st = make_state(0.02, 2, 0.02, 3)
        cfg = dyn.SimConfig(n=N, dt=1e-3)
        fr, v, bundle = rhs_for(st)
        new, _ = dyn.time_step(st, cfg, rhs=(fr, v, bundle))
        # variant: add the projected mean back, step, then project
        raw_gt = bundle.g_theta + 1e-9
        raw_gy = bundle.g_y - 1e-9
        var_bundle = dyn.RhsBundle(raw_gt, raw_gy, bundle.s_dot,
                                   bundle.mean_angle_dot, bundle.base_velocity,
                                   bundle.projected_means)
        var, _ = dyn.time_step(st, cfg, rhs=(fr, v, var_bundle))
        assert np.max(np.abs(var.theta_osc.samples
                             - new.theta_osc.samples)) < 1e-15
        assert np.max(np.abs(var.stretch.samples - new.stretch.samples)) < 1e-15

    def test_margin_abort(self):
        st = make_state(0.02, 2, 0.02, 3)
        cfg = dyn.SimConfig(n=N, dt=1e-3, beta2_min=0.999)
        with pytest.raises(SimulationAbort):
            dyn.time_step(st, cfg)

    def test_abort_collected_by_run(self):
        st = make_state(0.02, 2, 0.02, 3)
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.01, beta1_min=5.0)
        res = dyn.run_simulation(st, cfg)
        assert res.termination == "margin-abort"
        assert res.steps == 0


class TestRun:
    def test_determinism(self):
        st = make_state(0.01, 2, 0.01, 3)
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.02, output_every=5)
        r1 = dyn.run_simulation(st, cfg)
        r2 = dyn.run_simulation(st, cfg)
        rows1 = [rec.csv_row() for rec in r1.records]
        rows2 = [rec.csv_row() for rec in r2.records]
        assert rows1 == rows2

    def test_decay_run(self):
        st = make_state(0.01, 2, 0.01, 2)
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.3, output_every=30)
        res = dyn.run_simulation(st, cfg)
        assert res.termination == "completed"
        recs = res.records
        assert recs[-1].theta_h52 < recs[0].theta_h52
        energies = [r.energy for r in recs]
        assert all(b <= a + 1e-10 for a, b in zip(energies, energies[1:]))
        assert all(r.dissipation >= -1e-10 for r in recs)
        assert max(r.closure_defect for r in recs) <= 1e-8
        drift = abs(recs[-1].area - recs[0].area) / recs[0].area
        assert drift < 1e-5
        # standing margins of the near-equilibrium regime
        assert min(r.beta1 for r in recs) >= 1 / np.pi
        assert min(r.beta2 for r in recs) >= 0.75
        assert all(0.5 <= r.perim / recs[0].perim <= 1.5 for r in recs)

    def test_large_amplitude_run_stays_admissible(self):
        # nonlinear regime: eps = 0.1 still relaxes with margins intact
        st = make_state(0.1, 2, 0.05, 2)
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.25, output_every=25)
        res = dyn.run_simulation(st, cfg)
        assert res.termination == "completed"
        energies = [r.energy for r in res.records]
        assert all(b <= a + 1e-10 for a, b in zip(energies, energies[1:]))
        assert res.records[-1].theta_h52 < res.records[0].theta_h52
        assert min(r.beta2 for r in res.records) > 0.5

    def test_stretching_dominated_run(self):
        # y-mode preset: shape stays circular while the parametrization relaxes
        st = make_state(0.0, 2, 0.05, 3)
        cfg = dyn.SimConfig(n=N, dt=1e-3, t_final=0.2, output_every=20)
        res = dyn.run_simulation(st, cfg)
        assert res.termination == "completed"
        # k = 3 stretching decays at rate 3/4: e^{-0.15} = 0.861 over T = 0.2
        ratio = res.records[-1].ys_h32 / res.records[0].ys_h32
        assert 0.83 < ratio < 0.88
        # theta content stays at the coupling level, far below y content
        assert res.records[-1].theta_h52 < 0.1 * res.records[0].ys_h32

    def test_order_of_convergence(self):
        # self-convergence at T = 0.05 against a fine-dt reference
        st = make_state(0.01, 2, 0.01, 2)
        T = 0.05

        def final(scheme, dt):
            cfg = dyn.SimConfig(n=N, dt=dt, t_final=T, scheme=scheme,
                                output_every=10 ** 9)
            return dyn.run_simulation(st, cfg).final_state

        for scheme, expect_order in (("imex-euler", 1.0), ("imex-bdf2", 2.0)):
            ref = final(scheme, 6.25e-5)
            errs = []
            for dt in (1e-3, 5e-4):
                f = final(scheme, dt)
                errs.append(np.max(np.abs(f.theta_osc.samples
                                          - ref.theta_osc.samples))
                            + abs(f.perim - ref.perim))
            order = np.log2(errs[0] / errs[1])
            assert order > expect_order - 0.35, (scheme, order, errs)


class TestBdf2:
    def test_first_step_is_euler(self):
        st = make_state(0.01, 2, 0.0)
        cfg_e = dyn.SimConfig(n=N, dt=1e-3, scheme="imex-euler")
        cfg_b = dyn.SimConfig(n=N, dt=1e-3, scheme="imex-bdf2")
        se, _ = dyn.time_step(st, cfg_e)
        sb, mem = dyn.time_step(st, cfg_b)
        assert np.max(np.abs(se.theta_osc.samples - sb.theta_osc.samples)) < 1e-18
        assert mem is not None
