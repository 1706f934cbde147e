"""Curve state and geometry: reconstruction, coordinate transfer, margins.

The simulation state is (theta_osc, theta_mean, stretch, perim, base_point):
the tangent angle is theta(a) = a + theta_osc(a) + theta_mean with
theta_osc mean free on the arc-length grid, stretch = y_s is mean free on
the material grid, and perim is 1/(2 pi) of the curve length.

Reconstruction always uses the drift-subtracted form

    z(a) = perim * int_{-pi}^a (cos th, sin th) da'
           - perim * a/(2 pi) * int_T (cos th, sin th) da' + base_point

which is periodic even when the closed-string condition only holds to
rounding; the closure defect |int_T (cos th, sin th) da| is monitored by
the dynamics loop.  Orientation is counterclockwise: t = (cos th, sin th),
n = (-sin th, cos th) points into the enclosed region for theta = a.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import spectral as sp
from .errors import NonClosableInputError, WellStretchedViolation
from .spectral import SpectralField, TrigEvaluator, TWO_PI

_MEAN_TOL = 1e-10


@lru_cache(maxsize=8)
def _inv_gap_sq(n: int) -> np.ndarray:
    """1 / torus-distance^2 between grid points (diagonal left at 1)."""
    alpha = sp.grid_points(n)
    gap = alpha[None, :] - alpha[:, None]
    gap = np.abs((gap + np.pi) % TWO_PI - np.pi)
    np.fill_diagonal(gap, 1.0)
    return 1.0 / gap ** 2


@dataclass(frozen=True)
class ForceParams:
    """Elastic coefficients: bending c1, stretching c3, surface tension lam,
    spontaneous curvature B, optimal perimeter s_op (per 2 pi)."""

    c1: float = 1.0
    c3: float = 1.0
    lam: float = 0.0
    B: float = 0.0
    s_op: float = 0.0

    def __post_init__(self):
        if self.c1 < 0 or self.c3 < 0 or self.lam < 0 or self.s_op < 0:
            raise ValueError("elastic coefficients must be nonnegative")
        if self.c1 == 0 and self.c3 == 0 and self.lam == 0:
            raise ValueError("at least one of c1, c3, lam must be positive")

    @property
    def tension_like(self) -> float:
        """Coefficient of the theta_a n force term that acts like tension."""
        return self.lam + self.c1 * (self.B - 0.5 * self.B ** 2)


@dataclass(frozen=True)
class CurveState:
    """Simulation state of the closed string."""

    theta_osc: SpectralField     # zero-mean oscillation of theta - a (alpha grid)
    theta_mean: float            # mean tangent angle (radians)
    stretch: SpectralField       # zero-mean y_s (material grid)
    perim: float                 # curve length / (2 pi)
    base_point: np.ndarray       # lab-frame position of z(-pi)
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "base_point", np.asarray(self.base_point, float))
        if self.perim <= 0.0:
            raise ValueError(f"perimeter must be positive, got {self.perim}")
        if abs(self.theta_osc.mean) > _MEAN_TOL or abs(self.stretch.mean) > _MEAN_TOL:
            raise ValueError("oscillation and stretch fields must be mean free")
        if np.min(1.0 + self.stretch.samples) <= 0.0:
            raise WellStretchedViolation(float(np.min(1.0 + self.stretch.samples)))

    @property
    def n(self) -> int:
        return self.theta_osc.grid.n

    @property
    def theta(self) -> np.ndarray:
        """Tangent angle samples on the alpha grid (continuous branch)."""
        return sp.grid_points(self.n) + self.theta_osc.samples + self.theta_mean

    def with_(self, **kw) -> "CurveState":
        return replace(self, **kw)


def make_state(theta_osc, stretch, perim=1.0, theta_mean=0.0,
               base_point=(0.0, 0.0), time=0.0) -> CurveState:
    """Build a state from raw sample arrays, projecting means exactly."""
    osc = sp.project_zero_mean(np.asarray(theta_osc, float))
    ys = sp.project_zero_mean(np.asarray(stretch, float))
    return CurveState(
        SpectralField.from_samples(osc, "alpha"), float(theta_mean),
        SpectralField.from_samples(ys, "s"), float(perim),
        np.asarray(base_point, float), float(time))


def equilibrium_state(n: int, perim: float = 1.0) -> CurveState:
    z = np.zeros(n)
    return make_state(z, z, perim=perim)


# ----------------------------------------------------------------------
# coordinate transfer
# ----------------------------------------------------------------------

def build_transfer_map(stretch: np.ndarray):
    """y(s) = int_{-pi}^s y_s ds' with y(-pi) = 0, and a(s) = s + y(s)."""
    y = sp.cumulative_from_start(np.asarray(stretch, float))
    return y, sp.grid_points(stretch.shape[-1]) + y


def invert_transfer(stretch: np.ndarray, targets: np.ndarray,
                    tol: float = 1e-13, max_newton: int = 40) -> np.ndarray:
    """Solve a(s) = target for each target: Newton on the trigonometric
    interpolant of y with a bisection fallback (a is strictly increasing)."""
    ys = np.asarray(stretch, float)
    beta2 = float(np.min(1.0 + ys))
    if beta2 <= 0.0:
        raise WellStretchedViolation(beta2)
    y, _ = build_transfer_map(ys)
    targets = np.asarray(targets, float)

    def y_at(s):
        return sp.eval_series(y, s)

    s = targets - y_at(targets)   # first guess: invert to first order
    for _ in range(max_newton):
        res = s + y_at(s) - targets
        if np.max(np.abs(res)) <= tol:
            return s
        s = s - res / (1.0 + sp.eval_series(ys, s))
    # bisection fallback for any stragglers
    res = s + y_at(s) - targets
    bad = np.abs(res) > tol
    if np.any(bad):
        ymax = np.max(np.abs(y))
        lo = targets[bad] - ymax - 1e-9
        hi = targets[bad] + ymax + 1e-9
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            val = mid + y_at(mid) - targets[bad]
            lo = np.where(val < 0.0, mid, lo)
            hi = np.where(val < 0.0, hi, mid)
            if np.max(hi - lo) < 1e-15:
                break
        s[bad] = 0.5 * (lo + hi)
    return s


# ----------------------------------------------------------------------
# reconstruction
# ----------------------------------------------------------------------

class CurveFrame:
    """All geometric fields derived from a state.

    Computed once per right-hand-side evaluation and shared by the kernel,
    velocity, and dynamics assembly.  Everything is a plain array; suffix
    _at_s marks alpha-grid quantities composed with a(s), suffix _at_a
    marks material quantities composed with s(a).
    """

    def __init__(self, state: CurveState):
        self.state = state
        n = state.n
        self.n = n
        self.h = TWO_PI / n
        self.alpha = sp.grid_points(n)
        perim = state.perim

        # tangent-angle side (alpha grid)
        self.theta = state.theta
        osc = state.theta_osc.samples
        self.ta = 1.0 + sp.derivative(osc, 1)
        self.taa = sp.derivative(osc, 2)
        self.taaa = sp.derivative(osc, 3)
        ct, st = np.cos(self.theta), np.sin(self.theta)
        self.tan_a = np.stack([ct, st], axis=-1)
        self.nor_a = np.stack([-st, ct], axis=-1)
        self.kappa = self.ta / perim

        # drift-subtracted reconstruction
        self.drift = self.tan_a.mean(axis=0)            # (1/2pi) int t da
        self.defect = TWO_PI * float(np.hypot(*self.drift))
        rel = sp.cumulative_from_start((self.tan_a - self.drift).T).T
        self.prefix = rel + self.drift * (self.alpha[:, None] + np.pi)
        self.z = perim * (rel + np.pi * self.drift) + state.base_point
        self.z1 = perim * (self.tan_a - self.drift)
        self.z2 = perim * self.ta[:, None] * self.nor_a
        self.z3 = perim * (self.taa[:, None] * self.nor_a
                           - (self.ta ** 2)[:, None] * self.tan_a)
        self.z4 = perim * ((self.taaa - self.ta ** 3)[:, None] * self.nor_a
                           - (3.0 * self.ta * self.taa)[:, None] * self.tan_a)

        # material side (s grid)
        self.ys = state.stretch.samples
        self.yss = sp.derivative(self.ys, 1)
        self.ysss = sp.derivative(self.ys, 2)
        self.y, self.alpha_at_s = build_transfer_map(self.ys)
        self.s_at_alpha = invert_transfer(self.ys, self.alpha)

        # evaluators: alpha-grid fields at a(s), material fields at s(a)
        self.eval_a = TrigEvaluator(n, self.alpha_at_s)
        self.eval_s = TrigEvaluator(n, self.s_at_alpha)

        osc_at_s = self.eval_a(osc)
        self.theta_at_s = self.alpha_at_s + osc_at_s + state.theta_mean
        self.ta_at_s = 1.0 + self.eval_a(sp.derivative(osc, 1))
        self.taa_at_s = self.eval_a(self.taa)
        self.taaa_at_s = self.eval_a(self.taaa)
        ct, st = np.cos(self.theta_at_s), np.sin(self.theta_at_s)
        self.tan_s = np.stack([ct, st], axis=-1)
        self.nor_s = np.stack([-st, ct], axis=-1)
        self.z1_at_s = perim * (self.tan_s - self.drift)
        self.z2_at_s = perim * self.ta_at_s[:, None] * self.nor_s
        self.z3_at_s = perim * (self.taa_at_s[:, None] * self.nor_s
                                - (self.ta_at_s ** 2)[:, None] * self.tan_s)
        self.z4_at_s = perim * ((self.taaa_at_s - self.ta_at_s ** 3)[:, None] * self.nor_s
                                - (3.0 * self.ta_at_s * self.taa_at_s)[:, None] * self.tan_s)

        self.X = self.eval_a(self.z.T).T
        one_ys = (1.0 + self.ys)[:, None]
        self.X1 = one_ys * self.z1_at_s
        self.X2 = self.yss[:, None] * self.z1_at_s + one_ys ** 2 * self.z2_at_s
        self.X3 = (self.ysss[:, None] * self.z1_at_s
                   + 3.0 * one_ys * self.yss[:, None] * self.z2_at_s
                   + one_ys ** 3 * self.z3_at_s)
        self.X4 = sp.derivative(self.X3.T, 1).T

        self.ys_at_a = self.eval_s(self.ys)
        self.yss_at_a = self.eval_s(self.yss)
        self.ysss_at_a = self.eval_s(self.ysss)
        self.X4_at_a = self.eval_s(self.X4.T).T

        self.beta2 = float(np.min(1.0 + self.ys))
        self._beta1 = None

    @property
    def beta1(self) -> float:
        """Modified chord/arc margin, O(n^2) scan over grid pairs."""
        if self._beta1 is None:
            P = self.prefix
            dx = P[None, :, 0] - P[:, None, 0]
            dy = P[None, :, 1] - P[:, None, 1]
            ratio_sq = (dx * dx + dy * dy) * _inv_gap_sq(self.n)
            np.fill_diagonal(ratio_sq, np.inf)
            self._beta1 = float(np.sqrt(ratio_sq.min()) - np.hypot(*self.drift))
        return self._beta1


def reconstruct_curve(state: CurveState) -> CurveFrame:
    """Reconstruct z, X and the full moving frame from (theta, y_s, perim)."""
    return CurveFrame(state)


# ----------------------------------------------------------------------
# scalar functionals
# ----------------------------------------------------------------------

def closure_defect(state_or_theta) -> float:
    """|int_T (cos th, sin th) da| by the (spectrally accurate) trapezoid rule."""
    theta = state_or_theta.theta if isinstance(state_or_theta, CurveState) \
        else np.asarray(state_or_theta, float)
    return TWO_PI * float(np.hypot(np.mean(np.cos(theta)), np.mean(np.sin(theta))))


def wellposedness_margins(state: CurveState, frame: CurveFrame = None):
    """(beta1, beta2): chord/arc margin minus closure penalty, min(1 + y_s)."""
    frame = frame or CurveFrame(state)
    return frame.beta1, frame.beta2


def enclosed_area(state: CurveState, frame: CurveFrame = None) -> float:
    """A = -(1/2) int z . z_a^perp da; positive for this orientation."""
    frame = frame or CurveFrame(state)
    zp = np.stack([-frame.z1[:, 1], frame.z1[:, 0]], axis=-1)
    return -0.5 * frame.h * float(np.sum(frame.z * zp))


# ----------------------------------------------------------------------
# initial-data normalization
# ----------------------------------------------------------------------

def normalize_initial_data(theta_raw, stretch_raw, target_area=np.pi,
                           base_point=(0.0, 0.0), max_newton=50) -> CurveState:
    """Project raw fields onto an admissible state.

    Zero-means y_s, closes the string by adjusting only the k = +-1 modes
    of theta - a (Newton on the closure integral), splits off the mean
    angle, and rescales the perimeter so the enclosed area hits target_area.
    """
    theta_raw = np.asarray(theta_raw, float)
    n = theta_raw.shape[-1]
    alpha = sp.grid_points(n)
    dev = theta_raw - alpha
    ys = sp.project_zero_mean(np.asarray(stretch_raw, float))

    ca, sa = np.cos(alpha), np.sin(alpha)
    coeff = np.zeros(2)
    for _ in range(max_newton):
        theta = alpha + dev + coeff[0] * ca + coeff[1] * sa
        ct, st = np.cos(theta), np.sin(theta)
        defect = TWO_PI * np.array([np.mean(ct), np.mean(st)])
        if np.hypot(*defect) <= 1e-13:
            break
        # d defect / d coeff: columns int n cos(a) da, int n sin(a) da
        jac = TWO_PI * np.array([
            [np.mean(-st * ca), np.mean(-st * sa)],
            [np.mean(ct * ca), np.mean(ct * sa)],
        ])
        coeff = coeff - np.linalg.solve(jac, defect)
    else:
        raise NonClosableInputError(
            f"closure Newton did not converge below 1e-13 in {max_newton} steps "
            f"(defect {np.hypot(*defect):.3e})")

    dev = dev + coeff[0] * ca + coeff[1] * sa
    state = make_state(dev - np.mean(dev), ys, perim=1.0,
                       theta_mean=float(np.mean(dev)), base_point=base_point)
    area_unit = enclosed_area(state)
    if area_unit <= 0:
        raise NonClosableInputError(f"non-positive enclosed area {area_unit:.3e}")
    return state.with_(perim=float(np.sqrt(target_area / area_unit)))
