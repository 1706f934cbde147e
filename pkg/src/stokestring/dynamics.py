"""Right-hand sides of the contour dynamic system and the time integrator.

The evolution splits into stiff linear parts treated implicitly,

    th_t  = c1/(4 s^3) H(th_aaa) + g_theta,
    y_st  = -c3/4 h(y_ss)        + g_y,

scalar rates

    s_t      = -(1/2 pi) int th_a (u - n) da,
    mean th  = (1/2 pi s) int T th_a da,
    base_t   = u at the s = -pi marker,

and smooth explicit remainders g_theta, g_y.  g_theta collects the
commutators and lower-order Hilbert terms of du/da . n, the desingularized
remainder integral against the full force bracket, and the transport term
(T - u.t) th_a / s; g_y collects the material-side analogues plus the
-(1 + y_s) s_t / s dilution term.  Both are reduced by their analytic means
(the mean-angle rate for g_theta, zero for g_y) and then projected to exact
zero mean; the projected residue measures quadrature consistency and is
logged in the bundle.

The integrator freezes the perimeter inside the implicit factors over each
step, applies backward Euler (or the two-step BDF2 variant with explicit
extrapolation of g) per Fourier mode, advances the scalars explicitly, and
re-projects the means.
"""

import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .errors import SimulationAbort
from .geometry import CurveFrame, CurveState, ForceParams, reconstruct_curve
from .velocity import (VelocityFields, _cubed, _vcomm, _vh, apply_r,
                       curve_velocity, theta_rhs_terms)


@dataclass(frozen=True)
class SimConfig:
    """Run settings; abort margins are fixed policy, not file-settable."""

    n: int = 256
    dt: float = 1e-3
    t_final: float = 1.0
    scheme: str = "imex-euler"
    dealias: bool = True
    output_every: int = 10
    preset: str = "equilibrium"
    params: ForceParams = field(default_factory=ForceParams)
    epsilon: float = 0.01
    mode_k: int = 2
    seed: int = 0
    out_dir: str = "out"
    beta1_min: float = 0.05
    beta2_min: float = 0.05
    defect_max: float = 1e-6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n % 2 or self.n < 2:
            raise ValueError(f"n must be even and positive, got {self.n}")
        if self.scheme not in ("imex-euler", "imex-bdf2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.output_every < 1:
            raise ValueError("output_every must be >= 1")
        if min(self.beta1_min, self.beta2_min, self.defect_max) <= 0:
            raise ValueError("abort margins must be positive")


@dataclass
class RhsBundle:
    """Explicit right-hand-side data for one step."""

    g_theta: np.ndarray          # zero-mean, alpha grid
    g_y: np.ndarray              # zero-mean, material grid
    s_dot: float
    mean_angle_dot: float
    base_velocity: np.ndarray
    projected_means: np.ndarray  # residues removed from (g_theta, g_y)


def scalar_rates(state: CurveState, velocity: VelocityFields, frame: CurveFrame = None):
    """(s_dot, mean_angle_dot, base_velocity) from the velocity fields."""
    fr = frame or reconstruct_curve(state)
    s_dot = -float(np.mean(fr.ta * velocity.u_dot_n))
    mean_angle_dot = float(np.mean(velocity.T * fr.ta)) / state.perim
    return s_dot, mean_angle_dot, velocity.u_s[0].copy()


def g_theta(state: CurveState, velocity: VelocityFields, params: ForceParams,
            frame: CurveFrame = None, dealias: bool = True):
    """Explicit tangent-angle remainder, exactly mean free; returns
    (samples, projected_mean)."""
    fr = frame or reconstruct_curve(state)
    _, rest = theta_rhs_terms(state, params, fr, dealias)
    transport = (velocity.T - velocity.u_dot_t) * fr.ta / state.perim
    raw = rest / state.perim + transport
    raw -= float(np.mean(velocity.T * fr.ta)) / state.perim
    projected = float(np.mean(raw))
    return raw - projected, projected


def g_y(state: CurveState, velocity: VelocityFields, params: ForceParams,
        s_dot: float, frame: CurveFrame = None, dealias: bool = True):
    """Explicit stretching remainder, exactly mean free; returns
    (samples, projected_mean)."""
    fr = frame or reconstruct_curve(state)
    s = state.perim
    c1, c3 = params.c1, params.c3
    tan, nor = fr.tan_s, fr.nor_s
    one_ys = 1.0 + fr.ys

    def hp(scalar):
        """t . h(scalar * n) with a dealiased product."""
        prod = sp.dealiased_product(scalar.T, nor.T, dealias).T
        return np.sum(tan * _vh(prod), -1)

    raw = -one_ys * (s_dot / s)
    raw -= (c3 / 4.0) * np.sum(tan * _vcomm(tan, fr.yss, dealias), -1)
    raw -= (c3 / 4.0) * hp(((s * one_ys - params.s_op) / s) * one_ys * fr.ta_at_s)
    ds_taa = one_ys * fr.taaa_at_s
    raw += (c1 / (4 * s ** 3)) * np.sum(tan * _vcomm(nor, ds_taa, dealias), -1)
    raw -= (params.tension_like / (4 * s)) * hp(one_ys * fr.ta_at_s)
    ta3_s = _cubed(fr.ta_at_s, dealias)
    raw += (c1 / (8 * s ** 3)) * hp(one_ys * ta3_s)

    bracket = ((c3 * fr.yss)[:, None] * tan
               + (c3 * ((s * one_ys - params.s_op) / s) * one_ys
                  * fr.ta_at_s)[:, None] * nor
               + (one_ys * (params.tension_like * fr.ta_at_s / s
                            - c1 * (fr.taaa_at_s + 0.5 * ta3_s) / s ** 3))[:, None] * nor)
    raw += np.sum(tan * apply_r(fr, bracket, "s"), -1)

    projected = float(np.mean(raw))
    return raw - projected, projected


def evaluate_rhs(state: CurveState, params: ForceParams, dealias: bool = True,
                 frame: CurveFrame = None):
    """One full right-hand-side evaluation: frame, velocity, and bundle."""
    fr = frame or reconstruct_curve(state)
    vel = curve_velocity(state, params, fr, dealias)
    s_dot, mean_dot, base_vel = scalar_rates(state, vel, fr)
    gt, pt = g_theta(state, vel, params, fr, dealias)
    gy, py = g_y(state, vel, params, s_dot, fr, dealias)
    bundle = RhsBundle(gt, gy, s_dot, mean_dot, base_vel, np.array([pt, py]))
    return fr, vel, bundle


@dataclass
class StepperMemory:
    """Previous-step data for the two-step scheme."""

    state: CurveState
    bundle: RhsBundle


def _check_margins_abort(frame: CurveFrame, config: SimConfig, record=None):
    if frame.beta2 < config.beta2_min:
        raise SimulationAbort("margin-abort",
                              f"beta2 = {frame.beta2:.3e} < {config.beta2_min}", record)
    if frame.beta1 < config.beta1_min:
        raise SimulationAbort("margin-abort",
                              f"beta1 = {frame.beta1:.3e} < {config.beta1_min}", record)
    if frame.defect > config.defect_max:
        raise SimulationAbort("margin-abort",
                              f"closure defect = {frame.defect:.3e} "
                              f"> {config.defect_max}", record)


def _advance_modes(modes, g_modes, dt, operator, perim, coeff,
                   prev_modes=None, prev_g=None):
    if prev_modes is None:
        return sp.implicit_linear_step(modes + dt * g_modes, dt, operator,
                                       perim, coeff)
    n = 2 * (modes.shape[-1] - 1)
    k = sp.wavenumbers(n)
    sym = coeff * k ** 3 / (4.0 * perim ** 3) if operator == "bending" \
        else coeff * k / 4.0
    rhs = 4.0 * modes - prev_modes + 2.0 * dt * (2.0 * g_modes - prev_g)
    return rhs / (3.0 + 2.0 * dt * sym)


def time_step(state: CurveState, config: SimConfig, memory: StepperMemory = None,
              rhs=None):
    """One IMEX step; returns (new_state, new_memory).

    memory is None for single-step schemes and for the Euler startup step
    of imex-bdf2.  rhs may carry a precomputed (frame, velocity, bundle)
    triple for the current state.
    """
    fr, vel, bundle = rhs or evaluate_rhs(state, config.params, config.dealias)
    _check_margins_abort(fr, config)
    dt = config.dt
    params = config.params
    perim = state.perim     # frozen inside the implicit factors

    use_bdf2 = config.scheme == "imex-bdf2" and memory is not None
    d_modes = sp.to_modes(state.theta_osc.samples)
    y_modes = sp.to_modes(state.stretch.samples)
    gt_modes = sp.to_modes(bundle.g_theta)
    gy_modes = sp.to_modes(bundle.g_y)

    if use_bdf2:
        prev, pb = memory.state, memory.bundle
        d_new = _advance_modes(d_modes, gt_modes, dt, "bending", perim, params.c1,
                               sp.to_modes(prev.theta_osc.samples),
                               sp.to_modes(pb.g_theta))
        y_new = _advance_modes(y_modes, gy_modes, dt, "stretching", perim, params.c3,
                               sp.to_modes(prev.stretch.samples),
                               sp.to_modes(pb.g_y))
        s_new = (4.0 * state.perim - prev.perim
                 + 2.0 * dt * (2.0 * bundle.s_dot - pb.s_dot)) / 3.0
        th_new = (4.0 * state.theta_mean - prev.theta_mean
                  + 2.0 * dt * (2.0 * bundle.mean_angle_dot
                                - pb.mean_angle_dot)) / 3.0
        base_new = (4.0 * state.base_point - prev.base_point
                    + 2.0 * dt * (2.0 * bundle.base_velocity
                                  - pb.base_velocity)) / 3.0
    else:
        d_new = _advance_modes(d_modes, gt_modes, dt, "bending", perim, params.c1)
        y_new = _advance_modes(y_modes, gy_modes, dt, "stretching", perim, params.c3)
        s_new = state.perim + dt * bundle.s_dot
        th_new = state.theta_mean + dt * bundle.mean_angle_dot
        base_new = state.base_point + dt * bundle.base_velocity

    d_samples = sp.project_zero_mean(sp.from_modes(d_new, state.n))
    y_samples = sp.project_zero_mean(sp.from_modes(y_new, state.n))
    if not (np.isfinite(s_new) and np.isfinite(th_new)
            and np.all(np.isfinite(base_new))
            and np.all(np.isfinite(d_samples)) and np.all(np.isfinite(y_samples))):
        raise SimulationAbort("nan-abort", f"non-finite state at t = {state.time}")
    if s_new <= 0:
        raise SimulationAbort("margin-abort", f"perimeter collapsed: {s_new:.3e}")
    if np.min(1.0 + y_samples) <= 0:
        raise SimulationAbort("margin-abort", "well-stretched margin collapsed")

    new_state = CurveState(
        state.theta_osc.with_samples(d_samples), float(th_new),
        state.stretch.with_samples(y_samples), float(s_new),
        base_new, state.time + dt)
    memory_out = None
    if config.scheme == "imex-bdf2":
        memory_out = StepperMemory(state, bundle)
    return new_state, memory_out


@dataclass
class SimResult:
    final_state: CurveState
    records: list
    snapshots: list            # (step, CurveState) pairs
    termination: str           # completed | margin-abort | nan-abort
    steps: int
    message: str = ""
    wall_seconds: float = 0.0


def run_simulation(initial: CurveState, config: SimConfig,
                   record_fn=None) -> SimResult:
    """March to t_final or abort, collecting diagnostics.

    record_fn(state, frame, velocity, bundle) -> record is called every
    output_every steps (and on the final step); by default it builds the
    standard DiagnosticsRecord.
    """
    if record_fn is None:
        from .diagnostics import build_record

        def record_fn(st, fr, vl, bd):
            return build_record(st, config.params, frame=fr, velocity=vl,
                                dealias=config.dealias)

    t0 = _time.perf_counter()
    steps_total = max(1, round(config.t_final / config.dt))
    state = initial
    memory = None
    records, snapshots = [], [(0, initial)]
    termination, message = "completed", ""
    step = 0
    try:
        while step < steps_total:
            rhs = evaluate_rhs(state, config.params, config.dealias)
            if step % config.output_every == 0:
                records.append(record_fn(state, *rhs))
            state, memory = time_step(state, config, memory, rhs)
            step += 1
        rhs = evaluate_rhs(state, config.params, config.dealias)
        records.append(record_fn(state, *rhs))
    except SimulationAbort as abort:
        termination, message = abort.reason, str(abort)
    snapshots.append((step, state))
    return SimResult(state, records, snapshots, termination, step, message,
                     _time.perf_counter() - t0)
