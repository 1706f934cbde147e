"""Stokes fundamental solutions, divided differences, remainder kernels.

The 2-D Stokeslet G and its pressure counterpart Q are

    G(x) = (1/4 pi) (-ln|x| Id + x (x) x / |x|^2),     Q(x) = x / (2 pi |x|^2).

Boundary integrals against dG become smooth once the cotangent singularity
is split off.  Writing tau for the signed torus difference and

    L = (z' - z)/tau,   M = (z'_a - z_a)/tau,   N = (L - z_a)/tau

(with the continuous diagonal values L = z_a, M = z_aa, N = z_aa/2), the
identity z_a(a') = L + tau (M - N) turns the target-derivative kernel into

    dG/da + Id/(8 pi tan((a - a')/2)) =
      (1/4 pi) [ A(tau) Id - (L.N/|L|^2) Id - 2 (L.N)/|L|^4 L(x)L
                 + (N(x)L + L(x)N)/|L|^2 ],
    A(tau) = 1/tau - 1/(2 tan(tau/2)) = tau/12 + tau^3/720 + ...

which is smooth across the diagonal; the material-coordinate kernel has the
same shape with (X, iota, l, m, n).  This module materializes these fields
as O(n^2) tables; the time-stepping hot path applies them without
materializing through `backend`.
"""

from dataclasses import dataclass

import numpy as np

from ._pairsum_py import FOUR_PI, _a_smooth, _wrap
from .errors import SelfIntersectionError, SingularKernelError
from .geometry import CurveFrame

# the arc-length counterterm 1/(8 pi tan) and the material one
# (1/4) * 1/(2 pi tan) are the same constant; keep both spellings honest
assert 1.0 / (8.0 * np.pi) == 0.25 / (2.0 * np.pi)


def fundamental_solution(x):
    """Stokeslet G (2x2) and pressure kernel Q (2-vector) at x != 0.

    x may be a single 2-vector or a stack (..., 2).
    """
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0.0):
        raise SingularKernelError("fundamental solution evaluated at x = 0")
    outer = x[..., :, None] * x[..., None, :]
    eye = np.eye(2).reshape((1,) * (x.ndim - 1) + (2, 2))
    G = (-0.5 * np.log(r2)[..., None, None] * eye
         + outer / r2[..., None, None]) / FOUR_PI
    Q = x / (2.0 * np.pi * r2[..., None])
    return G, Q


@dataclass
class DividedDifferences:
    """Pairwise divided-difference fields over a grid, target index first."""

    tau: np.ndarray    # (n, n) signed torus difference in [-pi, pi)
    L: np.ndarray      # (n, n, 2) chord slope
    M: np.ndarray      # (n, n, 2) slope of the first derivative
    N: np.ndarray      # (n, n, 2) (L - z_a(target)) / tau


def _points(frame: CurveFrame, coordinate: str):
    if coordinate == "alpha":
        return frame.alpha, frame.z, frame.z1, frame.z2
    if coordinate == "s":
        return frame.alpha, frame.X, frame.X1, frame.X2
    raise ValueError(f"unknown coordinate {coordinate!r}")


def divided_differences(frame: CurveFrame, coordinate: str = "alpha") -> DividedDifferences:
    """Materialize tau, L, M, N over all grid pairs with continuous diagonals."""
    pts, z, z1, z2 = _points(frame, coordinate)
    tau = _wrap(pts[None, :] - pts[:, None])
    safe = tau.copy()
    np.fill_diagonal(safe, 1.0)
    ts = safe[:, :, None]
    L = (z[None, :, :] - z[:, None, :]) / ts
    M = (z1[None, :, :] - z1[:, None, :]) / ts
    N = (L - z1[:, None, :]) / ts
    idx = np.arange(frame.n)
    L[idx, idx] = z1
    M[idx, idx] = z2
    N[idx, idx] = 0.5 * z2
    return DividedDifferences(tau, L, M, N)


def _template_table(a, L, V):
    """(1/4 pi)[a Id + (L.V/|L|^2) Id + 2(L.V)/|L|^4 LxL - (VxL + LxV)/|L|^2]."""
    L2 = np.sum(L * L, axis=-1)
    LV = np.sum(L * V, axis=-1)
    eye = np.eye(2)[None, None]
    LL = L[..., :, None] * L[..., None, :]
    VL = V[..., :, None] * L[..., None, :]
    out = (a + LV / L2)[..., None, None] * eye
    out += (2.0 * LV / L2 ** 2)[..., None, None] * LL
    out -= (VL + np.swapaxes(VL, -1, -2)) / L2[..., None, None]
    return out / FOUR_PI


def remainder_kernel(frame: CurveFrame, coordinate: str = "alpha") -> np.ndarray:
    """Smooth remainder dG/d(target) + Id/(8 pi tan(.../2)) as an (n,n,2,2) table.

    The diagonal is the analytic limit (series in tau), evaluated from the
    first two curve derivatives at the target point.
    """
    if frame.beta1 <= 0.0:
        raise SelfIntersectionError(frame.beta1)
    dd = divided_differences(frame, coordinate)
    _, _, z1, z2 = _points(frame, coordinate)
    a = _a_smooth(dd.tau)
    np.fill_diagonal(a, 0.0)
    table = _template_table(a, dd.L, -dd.N)
    # diagonal: L -> z1, N -> z2/2, A -> 0
    idx = np.arange(frame.n)
    table[idx, idx] = _template_table(np.zeros(frame.n), z1, -0.5 * z2)
    return table


def velocity_remainder_kernel(frame: CurveFrame, coordinate: str = "alpha") -> np.ndarray:
    """Smooth remainder -dG/d(source) - Id/(8 pi tan(.../2)) as a table.

    Same template with V = M - N = (z_a(source) - L)/tau; diagonal V -> z2/2.
    """
    if frame.beta1 <= 0.0:
        raise SelfIntersectionError(frame.beta1)
    dd = divided_differences(frame, coordinate)
    _, _, z1, z2 = _points(frame, coordinate)
    a = _a_smooth(dd.tau)
    np.fill_diagonal(a, 0.0)
    table = _template_table(a, dd.L, dd.M - dd.N)
    idx = np.arange(frame.n)
    table[idx, idx] = _template_table(np.zeros(frame.n), z1, 0.5 * z2)
    return table
