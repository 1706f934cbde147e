"""Boundary velocity of the string and derived tangential quantities.

The normative evaluator splits the single-layer velocity into Fourier-side
Hilbert parts plus smooth remainder quadratures:

    u = c1/(4 s^2) [ H(th_aa) n + [H, n](th_aa) ]
        - c3 s/4   [ h(y_s) t + [h, t](y_s) ]          (material side)
        - c1/s^2   sum_W(alpha)  (th_aa n)
        + c3 s     sum_W(s)      (y_s t)
        + sum_dQ( -c1/(2 s^2) (th_a^2 - 1) t + (C_P + C_S)(t - t_under) )

where sum_W is the pair sum over the smooth part of -dG/d(source),
sum_dQ applies the full -dG/d(source) to differences f(src) - f(tgt)
(exact for constants, so only mean-free content matters), t_under is the
drift-free antiderivative of the normal (whose derivative differs from
th_a n by the curve's incompressible normal field, against which the
Stokeslet integrates to zero), and

    C_P = lam + c1 (B - B^2/2) - c1/(2 s^2),   C_S = c3 (s - s_op).

A second, independent evaluator (`direct_velocity`) applies -dG/d(source)
directly to the integrated force brackets of the derivative form of the
force; it shares no Hilbert-transform code with the normative path and is
used as a cross-check oracle.

Both evaluators work for arbitrary target points given by their arc-length
coordinates, so the velocity on the material grid is computed natively at
a(s_j) rather than interpolated.
"""

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .backend import apply_delta_q, apply_w
from .errors import SelfIntersectionError, WellStretchedViolation
from .geometry import CurveFrame, CurveState, ForceParams, reconstruct_curve


@dataclass
class ForceDensity:
    """Elastic force split by coordinate: F_alpha is a density against da
    (bending + tension), F_s against ds (stretching), F the combined ds
    density."""

    F_alpha: np.ndarray
    F_s: np.ndarray
    F: np.ndarray


@dataclass
class VelocityFields:
    """Velocity samples on both grids plus tangential bookkeeping."""

    u_alpha: np.ndarray    # (n, 2) at the alpha grid points
    u_s: np.ndarray        # (n, 2) at the material grid points
    u_dot_n: np.ndarray    # U = u . n on the alpha grid
    u_dot_t: np.ndarray    # u . t on the alpha grid
    T: np.ndarray          # tangential reparametrization velocity on alpha
    T_bar: float           # anchor value, velocity of the s = -pi marker


def _vh(field):
    """Componentwise Hilbert transform of an (n, 2) field."""
    return sp.hilbert(field.T).T


def _vcomm(vec, f, dealias=True):
    """[H, vec] f for an (n, 2) vector field and scalar samples f."""
    return sp.hilbert_commutator(vec.T, f, dealias).T


def _vderiv(field, order=1):
    return sp.derivative(field.T, order).T


def _veval(evaluator, field):
    return evaluator(field.T).T


def underline_tangent(frame: CurveFrame) -> np.ndarray:
    """Drift-free antiderivative of the normal on the alpha grid."""
    nbar = frame.nor_a.mean(axis=0)
    rel = sp.cumulative_from_start((frame.nor_a - nbar).T).T
    return rel + np.pi * nbar


def _cubed(ta, dealias):
    return sp.dealiased_product(sp.dealiased_product(ta, ta, dealias), ta, dealias)


def force_density(state: CurveState, params: ForceParams,
                  frame: CurveFrame = None, dealias: bool = True) -> ForceDensity:
    """Elastic force of the bending + stretching + tension energy."""
    fr = frame or reconstruct_curve(state)
    s = state.perim
    ta3 = _cubed(fr.ta, dealias)
    coef_a = (params.tension_like * fr.ta
              - params.c1 * (fr.taaa + 0.5 * ta3) / s ** 2)
    F_alpha = coef_a[:, None] * fr.nor_a
    one_ys = 1.0 + fr.ys
    F_s = params.c3 * (s * fr.yss[:, None] * fr.tan_s
                       + ((s * one_ys - params.s_op) * one_ys
                          * fr.ta_at_s)[:, None] * fr.nor_s)
    F_alpha_at_s = (params.tension_like * fr.ta_at_s
                    - params.c1 * (fr.taaa_at_s + 0.5 * fr.ta_at_s ** 3) / s ** 2)
    F = one_ys[:, None] * F_alpha_at_s[:, None] * fr.nor_s + F_s
    return ForceDensity(F_alpha, F_s, F)


class _TargetSet:
    """Target-point data for the pair sums, in both coordinates."""

    def __init__(self, coord_alpha, z_derivs, coord_s, X_derivs):
        self.coord_alpha = coord_alpha
        self.z, self.z1, self.z2, self.z3, self.z4 = z_derivs
        self.coord_s = coord_s
        self.X, self.X1, self.X2, self.X3, self.X4 = X_derivs


def _alpha_targets(fr: CurveFrame) -> _TargetSet:
    one = (1.0 + fr.ys_at_a)[:, None]
    X1 = one * fr.z1
    X2 = fr.yss_at_a[:, None] * fr.z1 + one ** 2 * fr.z2
    X3 = (fr.ysss_at_a[:, None] * fr.z1
          + 3.0 * one * fr.yss_at_a[:, None] * fr.z2 + one ** 3 * fr.z3)
    return _TargetSet(fr.alpha, (fr.z, fr.z1, fr.z2, fr.z3, fr.z4),
                      fr.s_at_alpha, (fr.z, X1, X2, X3, fr.X4_at_a))


def _s_targets(fr: CurveFrame) -> _TargetSet:
    return _TargetSet(fr.alpha_at_s,
                      (fr.X, fr.z1_at_s, fr.z2_at_s, fr.z3_at_s, fr.z4_at_s),
                      fr.alpha, (fr.X, fr.X1, fr.X2, fr.X3, fr.X4))


def _check_margins(fr: CurveFrame):
    if fr.beta2 <= 0.0:
        raise WellStretchedViolation(fr.beta2)
    if fr.beta1 <= 0.0:
        raise SelfIntersectionError(fr.beta1)


def curve_velocity(state: CurveState, params: ForceParams,
                   frame: CurveFrame = None, dealias: bool = True) -> VelocityFields:
    """Velocity of the string on both grids via the Hilbert-extraction path."""
    fr = frame or reconstruct_curve(state)
    _check_margins(fr)
    s = state.perim
    h = fr.h
    c1, c3 = params.c1, params.c3

    # Fourier-side Hilbert parts on their native grids
    P_a = (c1 / (4 * s ** 2)) * (sp.hilbert(fr.taa)[:, None] * fr.nor_a
                                 + _vcomm(fr.nor_a, fr.taa, dealias))
    P_b = -(c3 * s / 4) * (sp.hilbert(fr.ys)[:, None] * fr.tan_s
                           + _vcomm(fr.tan_s, fr.ys, dealias))

    # pair-sum densities
    dens_a = fr.taa[:, None] * fr.nor_a          # feeds -c1/s^2 * sum_W(alpha)
    dens_s = fr.ys[:, None] * fr.tan_s           # feeds +c3 s  * sum_W(s)

    ta2m1 = sp.dealiased_product(fr.ta, fr.ta, dealias) - 1.0
    cps = (params.tension_like - c1 / (2 * s ** 2)) + c3 * (s - params.s_op)
    f_dq = (-(c1 / (2 * s ** 2)) * sp.dealiased_product(ta2m1.T, fr.tan_a.T, dealias).T
            + cps * (fr.tan_a - underline_tangent(fr)))
    fp_dq = _vderiv(f_dq, 1)
    fpp_dq = _vderiv(f_dq, 2)
    fppp_dq = _vderiv(f_dq, 3)

    def evaluate(tgt: _TargetSet, eval_a, P_a_t, P_b_t):
        u = P_a_t + P_b_t
        u -= (c1 / s ** 2) * apply_w(tgt.coord_alpha, tgt.z, tgt.z1, tgt.z2,
                                     tgt.z3, tgt.z4, fr.alpha, fr.z, fr.z1,
                                     dens_a, h)
        u += (c3 * s) * apply_w(tgt.coord_s, tgt.X, tgt.X1, tgt.X2, tgt.X3,
                                tgt.X4, fr.alpha, fr.X, fr.X1, dens_s, h)
        if eval_a is None:
            f_t, fp_t, fpp_t, fppp_t = f_dq, fp_dq, fpp_dq, fppp_dq
        else:
            f_t, fp_t, fpp_t, fppp_t = (_veval(eval_a, g) for g in
                                        (f_dq, fp_dq, fpp_dq, fppp_dq))
        u += apply_delta_q(tgt.coord_alpha, tgt.z, tgt.z1, tgt.z2, tgt.z3,
                           fr.alpha, fr.z, fr.z1, f_dq, f_t, fp_t, fpp_t,
                           fppp_t, h)
        return u

    u_alpha = evaluate(_alpha_targets(fr), None, P_a, _veval(fr.eval_s, P_b))
    u_s = evaluate(_s_targets(fr), fr.eval_a, _veval(fr.eval_a, P_a), P_b)

    u_dot_n = np.sum(u_alpha * fr.nor_a, axis=-1)
    u_dot_t = np.sum(u_alpha * fr.tan_a, axis=-1)
    T_bar = float(u_s[0] @ fr.tan_s[0])
    T = sp.cumulative_from_start(fr.ta * u_dot_n) + T_bar
    return VelocityFields(u_alpha, u_s, u_dot_n, u_dot_t, T, T_bar)


def direct_velocity(state: CurveState, params: ForceParams,
                    frame: CurveFrame = None, dealias: bool = True) -> np.ndarray:
    """Cross-check evaluator on the alpha grid: -dG/d(source) applied to the
    integrated force brackets, desingularized by target-value subtraction."""
    fr = frame or reconstruct_curve(state)
    _check_margins(fr)
    s = state.perim
    c1, c3 = params.c1, params.c3
    ta2 = sp.dealiased_product(fr.ta, fr.ta, dealias)
    f1 = (params.tension_like * fr.tan_a
          - (c1 / s ** 2) * fr.taa[:, None] * fr.nor_a
          - (c1 / (2 * s ** 2)) * sp.dealiased_product(ta2.T, fr.tan_a.T, dealias).T)
    f2 = c3 * (s * (1.0 + fr.ys) - params.s_op)[:, None] * fr.tan_s
    h = fr.h
    tgt = _alpha_targets(fr)
    u = apply_delta_q(tgt.coord_alpha, tgt.z, tgt.z1, tgt.z2, tgt.z3,
                      fr.alpha, fr.z, fr.z1, f1, f1,
                      _vderiv(f1, 1), _vderiv(f1, 2), _vderiv(f1, 3), h)
    f2p = _vderiv(f2, 1)
    f2pp = _vderiv(f2, 2)
    f2ppp = _vderiv(f2, 3)
    u += apply_delta_q(tgt.coord_s, tgt.X, tgt.X1, tgt.X2, tgt.X3,
                       fr.alpha, fr.X, fr.X1, f2, _veval(fr.eval_s, f2),
                       _veval(fr.eval_s, f2p), _veval(fr.eval_s, f2pp),
                       _veval(fr.eval_s, f2ppp), h)
    return u


def theta_rhs_terms(state: CurveState, params: ForceParams,
                    frame: CurveFrame = None, dealias: bool = True):
    """(leading, rest): du/da . n = leading + rest on the alpha grid.

    leading = c1/(4 s^2) H(th_aaa) is s times the stiff linear operator;
    rest carries the commutators, lower-order Hilbert terms, and the
    desingularized remainder integral against the full force bracket.
    """
    fr = frame or reconstruct_curve(state)
    _check_margins(fr)
    s = state.perim
    c1, c3 = params.c1, params.c3
    nor, tan = fr.nor_a, fr.tan_a
    one_ys = 1.0 + fr.ys_at_a
    ta3 = _cubed(fr.ta, dealias)

    leading = (c1 / (4 * s ** 2)) * sp.hilbert(fr.taaa)
    rest = (c1 / (4 * s ** 2)) * np.sum(nor * _vcomm(nor, fr.taaa, dealias), -1)
    rest -= (c3 * s / 4) * np.sum(
        nor * _vcomm(tan, fr.yss_at_a / one_ys, dealias), -1)
    stretch_n = (s * one_ys - params.s_op) * fr.ta
    rest -= (c3 / 4) * np.sum(nor * _vh(
        sp.dealiased_product(stretch_n.T, nor.T, dealias).T), -1)
    rest -= (params.tension_like / 4) * np.sum(nor * _vh(
        sp.dealiased_product(fr.ta.T, nor.T, dealias).T), -1)
    rest += (c1 / (8 * s ** 2)) * np.sum(nor * _vh(
        sp.dealiased_product(ta3.T, nor.T, dealias).T), -1)

    bracket = ((params.tension_like * fr.ta
                + c3 * (s * one_ys - params.s_op) * fr.ta
                - (c1 / s ** 2) * (fr.taaa + 0.5 * ta3))[:, None] * nor
               + (c3 * s * fr.yss_at_a / one_ys)[:, None] * tan)
    rest += np.sum(nor * apply_r(fr, bracket), -1)
    return leading, rest


def apply_r(fr: CurveFrame, dens: np.ndarray, coordinate: str = "alpha") -> np.ndarray:
    """Grid-to-grid pair sum of the dG/d(target) remainder kernel."""
    from .backend import apply_r as _apply_r
    if coordinate == "alpha":
        return _apply_r(fr.alpha, fr.z, fr.z1, fr.z2, fr.z3, fr.z4,
                        fr.alpha, fr.z, fr.z1, dens, fr.h)
    return _apply_r(fr.alpha, fr.X, fr.X1, fr.X2, fr.X3, fr.X4,
                    fr.alpha, fr.X, fr.X1, dens, fr.h)


def normal_derivative_term(state: CurveState, params: ForceParams,
                           frame: CurveFrame = None, dealias: bool = True) -> np.ndarray:
    """du/da . n on the alpha grid, assembled from the decomposed form."""
    leading, rest = theta_rhs_terms(state, params, frame, dealias)
    return leading + rest
