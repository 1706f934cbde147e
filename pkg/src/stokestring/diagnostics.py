"""Checkable identities: energy/dissipation, linearized velocity, Fourier
observables, isoperimetric inequalities, decay fitting, limit circle.

Conventions: a_k(f) = int cos(k a) f da and b_k(f) = int sin(k a) f da
(unnormalized); Sobolev norms follow `spectral.sobolev_seminorm`, and the
non-homogeneous h^g norm used for the limit-circle residual is
sqrt(L2^2 + seminorm^2).
"""

from dataclasses import dataclass

import numpy as np

from . import spectral as sp
from .geometry import (CurveFrame, CurveState, ForceParams, enclosed_area,
                       reconstruct_curve)
from .velocity import VelocityFields, _cubed, curve_velocity

TWO_PI = 2.0 * np.pi


def fourier_ab(f: np.ndarray, k: int):
    """(a_k, b_k) = (int cos(ka) f da, int sin(ka) f da); k may be negative."""
    if k == 0:
        return TWO_PI * float(np.mean(f)), 0.0
    c = sp.to_modes(f)
    kk = abs(k)
    a = TWO_PI * float(np.real(c[kk]))
    b = -TWO_PI * float(np.imag(c[kk]))
    return (a, b) if k > 0 else (a, -b)


# ----------------------------------------------------------------------
# energy and dissipation
# ----------------------------------------------------------------------

def energy(state: CurveState, params: ForceParams, frame: CurveFrame = None) -> float:
    """Bending + stretching + tension energy of the state."""
    fr = frame or reconstruct_curve(state)
    s = state.perim
    bend = (params.c1 / (2 * s)) * fr.h * float(np.sum((fr.ta - params.B * s) ** 2))
    stretch = (params.c3 / 2) * fr.h * float(
        np.sum((s * (1.0 + fr.ys) - params.s_op) ** 2))
    return bend + stretch + TWO_PI * params.lam * s


def dissipation_rate(state: CurveState, velocity: VelocityFields,
                     params: ForceParams, frame: CurveFrame = None,
                     dealias: bool = True) -> float:
    """Viscous dissipation via the boundary pairing int u . F.

    Equals the bulk integral of |grad u|^2 for the true solution; the
    discrete value may dip to -1e-10 by quadrature rounding.
    """
    fr = frame or reconstruct_curve(state)
    s = state.perim
    ta3 = _cubed(fr.ta, dealias)
    dens_a = (params.tension_like * fr.ta
              - params.c1 * (fr.taaa + 0.5 * ta3) / s ** 2)[:, None] * fr.nor_a
    part_a = fr.h * float(np.sum(velocity.u_alpha * dens_a))
    dtan_s = ((1.0 + fr.ys) * fr.ta_at_s)[:, None] * fr.nor_s
    dens_s = params.c3 * (fr.X2 - params.s_op * dtan_s)
    part_s = fr.h * float(np.sum(velocity.u_s * dens_s))
    return part_a + part_s


# ----------------------------------------------------------------------
# linearized velocity around the unit circle
# ----------------------------------------------------------------------

def _drift_free_antiderivative(g: np.ndarray) -> np.ndarray:
    """int_{-pi}^a g - (a / 2 pi) int_T g, componentwise on (n, 2)."""
    gbar = g.mean(axis=0)
    rel = sp.cumulative_from_start((g - gbar).T).T
    return rel + np.pi * gbar


def linearized_velocity(dev: np.ndarray, y_alpha: np.ndarray, perim: float,
                        lam: float) -> np.ndarray:
    """First variation of the velocity around the evenly parametrized circle.

    dev is theta - a on the alpha grid, y_alpha the stretching samples
    relabeled to alpha.  Closed form: -(1/4) H applied to

        (lam + s - 1/(2 s^2)) (dev n* - underline(dev n*))
        - (dev_aa n* + dev_a t*) / s^2 + s y_alpha t*

    where underline(dev n*) is the drift-free antiderivative of the first
    variation of the normal, -dev t*.
    """
    n = dev.shape[-1]
    alpha = sp.grid_points(n)
    t_star = np.stack([np.cos(alpha), np.sin(alpha)], -1)
    n_star = np.stack([-np.sin(alpha), np.cos(alpha)], -1)
    coef = lam + perim - 1.0 / (2.0 * perim ** 2)
    dn = dev[:, None] * n_star
    under = _drift_free_antiderivative(-dev[:, None] * t_star)
    dev_a = sp.derivative(dev, 1)
    dev_aa = sp.derivative(dev, 2)
    payload = (coef * (dn - under)
               - (dev_aa[:, None] * n_star + dev_a[:, None] * t_star) / perim ** 2
               + perim * y_alpha[:, None] * t_star)
    return -0.25 * sp.hilbert(payload.T).T


def linearized_velocity_modesum(dev: np.ndarray, y_alpha: np.ndarray,
                                perim: float, lam: float) -> np.ndarray:
    """Same first variation assembled from the printed mode-sum coefficients."""
    n = dev.shape[-1]
    alpha = sp.grid_points(n)
    s = perim
    coef = lam + s - 1.0 / (2.0 * s ** 2)

    def ab(f, k):
        return fourier_ab(f, k)

    out = np.zeros((n, 2), dtype=complex)
    for k in [k for k in range(-(n // 2 - 1), n // 2) if k != 0]:
        sgn = k / abs(k)
        akm, bkm = ab(dev, k - 1)
        akp, bkp = ab(dev, k + 1)
        ykm_a, ykm_b = ab(y_alpha, k - 1)
        ykp_a, ykp_b = ab(y_alpha, k + 1)
        cm = coef * (k - 1) / abs(k)
        cp = coef * (k + 1) / abs(k)
        qm2 = k * (k - 1) ** 2 / (s ** 2 * abs(k))
        qm1 = k * (k - 1) / (s ** 2 * abs(k))
        qp2 = k * (k + 1) ** 2 / (s ** 2 * abs(k))
        qp1 = k * (k + 1) / (s ** 2 * abs(k))
        n_k = ((-cm - qm2 + qm1) * akm + s * sgn * ykm_b
               + (cp + qp2 + qp1) * akp + s * sgn * ykp_b
               + 1j * ((cm + qm2 - qm1) * bkm + s * sgn * ykm_a)
               + 1j * ((-cp - qp2 - qp1) * bkp + s * sgn * ykp_a))
        m_k = ((cm + qm2 - qm1) * bkm + s * sgn * ykm_a
               + (cp + qp2 + qp1) * bkp - s * sgn * ykp_a
               + 1j * ((cm + qm2 - qm1) * akm - s * sgn * ykm_b)
               + 1j * ((cp + qp2 + qp1) * akp + s * sgn * ykp_b))
        phase = np.exp(1j * k * alpha)
        out[:, 0] += n_k * phase
        out[:, 1] += m_k * phase
    out /= 16.0 * np.pi
    return np.real(out)


def linearization_error(state: CurveState, params: ForceParams,
                        frame: CurveFrame = None) -> float:
    """L2 distance between the full velocity and its first variation."""
    fr = frame or reconstruct_curve(state)
    u = curve_velocity(state, params, fr).u_alpha
    dev = state.theta_osc.samples + state.theta_mean
    v = linearized_velocity(dev, state.stretch.samples, state.perim, params.lam)
    return float(np.sqrt(fr.h * np.sum((u - v) ** 2)))


# ----------------------------------------------------------------------
# isoperimetric checks
# ----------------------------------------------------------------------

@dataclass
class IsoperimetricReport:
    gage_value: float          # (1/2s) int th_a^2 da, >= pi for convex area-pi
    gage_applicable: bool      # min th_a > 0 (convexity)
    fuglede_ratio: float       # ||th - mean - a||_L2^2 / (s - 1); inf if s = 1
    first_mode_ratio: float    # |(a1, b1)| / (||D - mean||_L2 ||D||_H1)
    perimeter_gap: float       # s - 1
    perimeter_gap_bound: float # (1/4 pi) ||th_a - 1||_L2^2


def isoperimetric_checks(state: CurveState, frame: CurveFrame = None) -> IsoperimetricReport:
    fr = frame or reconstruct_curve(state)
    s = state.perim
    gage = fr.h * float(np.sum(fr.ta ** 2)) / (2 * s)
    osc = state.theta_osc.samples
    osc_l2_sq = fr.h * float(np.sum(osc ** 2))
    gap = s - 1.0
    fuglede = np.inf if gap < 1e-14 else osc_l2_sq / gap
    a1, b1 = fourier_ab(osc, 1)
    denom = np.sqrt(osc_l2_sq) * sp.sobolev_seminorm(osc, 1.0)
    first_mode = 0.0 if denom < 1e-30 else float(np.hypot(a1, b1)) / denom
    bound = fr.h * float(np.sum((fr.ta - 1.0) ** 2)) / (4 * np.pi)
    return IsoperimetricReport(gage, bool(np.min(fr.ta) > 0.0), fuglede,
                               first_mode, gap, bound)


# ----------------------------------------------------------------------
# decay fitting and the limit circle
# ----------------------------------------------------------------------

def decay_fit(times, values, window=None):
    """Least-squares fit of log(values) ~ -gamma t; returns (gamma, r2)."""
    t = np.asarray(times, float)
    v = np.asarray(values, float)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
        t, v = t[mask], v[mask]
    if t.size < 2:
        raise ValueError("need at least two samples to fit a rate")
    if np.any(v <= 0.0):
        raise ValueError("decay_fit requires positive values")
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    resid = logv - (slope * t + intercept)
    ss_tot = float(np.sum((logv - logv.mean()) ** 2))
    r2 = 1.0 if ss_tot < 1e-300 else 1.0 - float(np.sum(resid ** 2)) / ss_tot
    return -float(slope), r2


@dataclass
class LimitCircleFit:
    center: np.ndarray
    phase: float
    radius: float
    residual: float    # h^{5/2} distance between X and the fitted circle


def limit_circle(state: CurveState, frame: CurveFrame = None) -> LimitCircleFit:
    """Fit the evenly parametrized circle closest to X in phase."""
    fr = frame or reconstruct_curve(state)
    area = enclosed_area(state, fr)
    radius = float(np.sqrt(area / np.pi))
    center = fr.X.mean(axis=0)
    w = fr.X - center
    n = state.n
    sgrid = sp.grid_points(n)
    e1 = np.stack([np.sin(sgrid), -np.cos(sgrid)], -1)
    e2 = np.stack([np.cos(sgrid), np.sin(sgrid)], -1)
    phase = float(np.arctan2(np.sum(w * e2), np.sum(w * e1)))
    fit = radius * np.stack([np.sin(sgrid + phase), -np.cos(sgrid + phase)], -1)
    diff = (w - fit).T
    resid = np.sqrt(sum(fr.h * np.sum(d ** 2) + sp.sobolev_seminorm(d, 2.5) ** 2
                        for d in diff))
    return LimitCircleFit(center, phase, radius, float(resid))


# ----------------------------------------------------------------------
# per-step record
# ----------------------------------------------------------------------

CSV_HEADER = ("t,E,D_rate,area,s,closure_defect,beta1,beta2,"
              "H1,H2,H2_5,h0,h1_5,a1,b1,a2,b2,fuglede,gage")


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    dissipation: float
    area: float
    perim: float
    closure_defect: float
    beta1: float
    beta2: float
    theta_h1: float
    theta_h2: float
    theta_h52: float
    ys_h0: float
    ys_h32: float
    modes_a: tuple     # a_k of theta - a, k = 1..4
    modes_b: tuple
    fuglede: float
    gage: float

    def csv_row(self) -> str:
        vals = [self.t, self.energy, self.dissipation, self.area, self.perim,
                self.closure_defect, self.beta1, self.beta2, self.theta_h1,
                self.theta_h2, self.theta_h52, self.ys_h0, self.ys_h32,
                self.modes_a[0], self.modes_b[0], self.modes_a[1],
                self.modes_b[1], self.fuglede, self.gage]
        return ",".join(f"{v:.17e}" for v in vals)


def build_record(state: CurveState, params: ForceParams, frame: CurveFrame = None,
                 velocity: VelocityFields = None, dealias: bool = True) -> DiagnosticsRecord:
    fr = frame or reconstruct_curve(state)
    vel = velocity or curve_velocity(state, params, fr, dealias)
    osc = state.theta_osc.samples
    iso = isoperimetric_checks(state, fr)
    ab = [fourier_ab(osc, k) for k in (1, 2, 3, 4)]
    return DiagnosticsRecord(
        t=state.time,
        energy=energy(state, params, fr),
        dissipation=dissipation_rate(state, vel, params, fr, dealias),
        area=enclosed_area(state, fr),
        perim=state.perim,
        closure_defect=fr.defect,
        beta1=fr.beta1,
        beta2=fr.beta2,
        theta_h1=sp.sobolev_seminorm(osc, 1.0),
        theta_h2=sp.sobolev_seminorm(osc, 2.0),
        theta_h52=sp.sobolev_seminorm(osc, 2.5),
        ys_h0=sp.sobolev_seminorm(state.stretch.samples, 0.0),
        ys_h32=sp.sobolev_seminorm(state.stretch.samples, 1.5),
        modes_a=tuple(x[0] for x in ab),
        modes_b=tuple(x[1] for x in ab),
        fuglede=iso.fuglede_ratio,
        gage=iso.gage_value if iso.gage_applicable else float("nan"),
    )
