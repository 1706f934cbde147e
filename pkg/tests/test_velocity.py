"""Velocity tests: force density, the two independent velocity evaluators,
invariances, and the decomposed normal-derivative term."""

import numpy as np

from stokestring import geometry as geo
from stokestring import spectral as sp
from stokestring import velocity as vel
from stokestring.geometry import ForceParams

N = 256
ALPHA = sp.grid_points(N)
S = sp.grid_points(N)


def make_state(eps=0.03, k=2, eps_y=0.03, ky=3, n=N):
    a = sp.grid_points(n)
    s = sp.grid_points(n)
    return geo.normalize_initial_data(a + eps * np.sin(k * a), eps_y * np.sin(ky * s))


class TestForceDensity:
    def test_equilibrium_is_half_normal(self):
        st = geo.equilibrium_state(N)
        fr = geo.reconstruct_curve(st)
        fd = vel.force_density(st, ForceParams(), fr)
        expect = 0.5 * fr.nor_a
        assert np.max(np.abs(fd.F - expect)) < 1e-12

    def test_pure_tension(self):
        st = make_state(0.05, 2, 0.04, 3)
        fr = geo.reconstruct_curve(st)
        fd = vel.force_density(st, ForceParams(c1=0, c3=0, lam=1.0), fr)
        expect = ((1 + fr.ys) * fr.ta_at_s)[:, None] * fr.nor_s
        assert np.max(np.abs(fd.F - expect)) < 1e-12

    def test_net_force_vanishes(self):
        rng = np.random.default_rng(0)
        for params in (ForceParams(), ForceParams(lam=0.5),
                       ForceParams(c1=2.0, c3=0.5, lam=0.1, B=0.3, s_op=0.4)):
            eps = rng.uniform(0.01, 0.05)
            st = make_state(eps, 2, eps, 3)
            fd = vel.force_density(st, params)
            net = fd.F.mean(axis=0) * 2 * np.pi
            assert np.max(np.abs(net)) < 1e-10

    def test_split_matches_combined(self):
        st = make_state()
        fr = geo.reconstruct_curve(st)
        fd = vel.force_density(st, ForceParams(lam=0.2), fr)
        fa_at_s = sp.eval_series(fd.F_alpha.T, fr.alpha_at_s).T
        combined = (1 + fr.ys)[:, None] * fa_at_s + fd.F_s
        assert np.max(np.abs(combined - fd.F)) < 1e-10


class TestCurveVelocity:
    def test_equilibrium_velocity_vanishes(self):
        st = geo.equilibrium_state(N)
        v = vel.curve_velocity(st, ForceParams())
        assert np.max(np.abs(v.u_alpha)) < 1e-10
        assert np.max(np.abs(v.u_s)) < 1e-10
        assert abs(v.T_bar) < 1e-10
        # with tension too
        v = vel.curve_velocity(st, ForceParams(lam=1.0))
        assert np.max(np.abs(v.u_alpha)) < 1e-10

    def test_matches_direct_quadrature_oracle(self):
        for params in (ForceParams(), ForceParams(lam=0.4),
                       ForceParams(c1=1.5, c3=0.7, lam=0.2, B=0.2, s_op=0.3)):
            st = make_state(0.04, 2, 0.03, 3)
            fr = geo.reconstruct_curve(st)
            v = vel.curve_velocity(st, params, fr)
            ud = vel.direct_velocity(st, params, fr)
            assert np.max(np.abs(v.u_alpha - ud)) < 1e-10

    def test_grids_agree_after_composition(self):
        st = make_state(0.05, 2, 0.04, 3)
        fr = geo.reconstruct_curve(st)
        v = vel.curve_velocity(st, ForceParams(), fr)
        interp = sp.eval_series(v.u_alpha.T, fr.alpha_at_s).T
        assert np.max(np.abs(interp - v.u_s)) < 1e-10

    def test_rotation_and_translation(self):
        st = make_state()
        params = ForceParams(lam=0.1)
        v = vel.curve_velocity(st, params)
        c = 1.1
        v_rot = vel.curve_velocity(st.with_(theta_mean=st.theta_mean + c), params)
        assert np.max(np.abs(v.u_dot_n - v_rot.u_dot_n)) < 1e-10
        assert np.max(np.abs(v.u_dot_t - v_rot.u_dot_t)) < 1e-10
        rot = np.array([[np.cos(c), -np.sin(c)], [np.sin(c), np.cos(c)]])
        assert np.max(np.abs(v_rot.u_alpha - v.u_alpha @ rot.T)) < 1e-10
        v_tr = vel.curve_velocity(st.with_(base_point=np.array([7.0, 3.0])), params)
        assert np.max(np.abs(v_tr.u_alpha - v.u_alpha)) < 1e-12

    def test_refinement_consistency(self):
        # band-limited state represented exactly at n and 2n
        params = ForceParams(lam=0.2)
        us = {}
        for n in (128, 256):
            st = make_state(0.1, 2, 0.05, 3, n=n)
            us[n] = vel.curve_velocity(st, params).u_alpha
        assert np.max(np.abs(us[256][::2] - us[128])) < 1e-8

    def test_single_layer_of_normal_field_vanishes(self):
        # int G(z - z') z_a^perp(a') da' = 0 on the closed curve: the
        # normative path encodes it through the underline-t subtraction,
        # so tension-only velocity of the circle is exactly zero
        st = geo.equilibrium_state(N, perim=1.3)
        v = vel.curve_velocity(st, ForceParams(c1=0, c3=0, lam=2.0))
        assert np.max(np.abs(v.u_alpha)) < 1e-12

    def test_reparametrization_velocity_anchor(self):
        st = make_state(0.04, 3, 0.02, 2)
        v = vel.curve_velocity(st, ForceParams())
        fr = geo.reconstruct_curve(st)
        # T(-pi) = T_bar and dT/da = th_a U - mean(th_a U)
        assert abs(v.T[0] - v.T_bar) < 1e-13
        f = fr.ta * v.u_dot_n
        dT = sp.derivative(v.T)
        assert np.max(np.abs(dT - (f - f.mean()))) < 1e-10


class TestNormalDerivative:
    def test_equilibrium_zero(self):
        st = geo.equilibrium_state(N)
        out = vel.normal_derivative_term(st, ForceParams())
        assert np.max(np.abs(out)) < 1e-10

    def test_matches_spectral_derivative_path(self):
        st = make_state(0.03, 2, 0.03, 3)
        fr = geo.reconstruct_curve(st)
        for params in (ForceParams(), ForceParams(lam=0.3)):
            v = vel.curve_velocity(st, params, fr)
            du = np.stack([sp.derivative(v.u_alpha[:, 0]),
                           sp.derivative(v.u_alpha[:, 1])], -1)
            direct = np.sum(du * fr.nor_a, -1)
            got = vel.normal_derivative_term(st, params, fr)
            assert np.max(np.abs(got - direct)) < 1e-8

    def test_leading_multiplier_on_pure_mode(self):
        eps, k = 1e-4, 3
        st = geo.make_state(eps * np.sin(k * ALPHA), np.zeros(N))
        lead, _ = vel.theta_rhs_terms(st, ForceParams())
        expect = -(eps * k ** 3 / 4.0) * np.sin(k * ALPHA)
        assert np.max(np.abs(lead - expect)) < 1e-12
