"""Numpy implementation of the O(n^2) desingularized pair sums.

All boundary integrals reduce to sums over (target, source) pairs of a
2x2 kernel applied to a 2-vector.  The kernel is one template

    T(L, V; a) . d = (1/4pi) [ a d + (L.V/|L|^2) d + 2 (L.V)/|L|^4 (L.d) L
                               - ((L.d) V + (V.d) L) / |L|^2 ]

with pair-dependent ingredients built from the signed torus difference
tau = wrap(src - tgt) in [-pi, pi) and the chord slope L = (z_src - z_tgt)/tau:

    apply_w:       V = (z1_src - L)/tau,  a = A(tau),  d = dens_src
    apply_r:       V = -(L - z1_tgt)/tau, a = A(tau),  d = dens_src
    apply_delta_q: V = z1_src,            a = 0,       d = (f_src - f_tgt)/tau

where A(tau) = 1/tau - 1/(2 tan(tau/2)) is smooth and odd.  Below
|tau| = 1e-3 (including exact target/source hits) the divided differences
are replaced by their Taylor expansions in tau built from target-point
derivatives; the second divided difference V loses |z| eps / tau^2 digits
when formed directly, so the threshold is generous and the series carry
the fourth derivative.

The compiled extension `_pairsum` implements the same three functions with
identical semantics; `backend` selects between them at import time.
"""

import numpy as np

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi
_SERIES_TOL = 1e-3   # switch divided differences to Taylor forms below this
_A_TOL = 1e-2        # switch A(tau) to its series below this


def _wrap(d):
    return (d + np.pi) % TWO_PI - np.pi


def _a_smooth(tau):
    out = np.empty_like(tau)
    small = np.abs(tau) < _A_TOL
    t = tau[~small]
    out[~small] = 1.0 / t - 1.0 / (2.0 * np.tan(0.5 * t))
    t = tau[small]
    out[small] = t / 12.0 + t ** 3 / 720.0 + t ** 5 / 30240.0
    return out


def _pair_geometry(ta, tz, tz1, tz2, tz3, tz4, sa, sz):
    """tau, safe divisor, small-pair mask, and the chord slope L."""
    tau = _wrap(sa[None, :] - ta[:, None])
    small = np.abs(tau) < _SERIES_TOL
    tau_safe = np.where(small, 1.0, tau)
    L = (sz[None, :, :] - tz[:, None, :]) / tau_safe[:, :, None]
    t_ = tau[:, :, None]
    L_series = (tz1[:, None, :] + 0.5 * t_ * tz2[:, None, :]
                + (t_ ** 2 / 6.0) * tz3[:, None, :]
                + (t_ ** 3 / 24.0) * tz4[:, None, :])
    L = np.where(small[:, :, None], L_series, L)
    return tau, tau_safe, small, L


def _contract(a, L, V, d):
    """Apply the kernel template to the pair field d; returns (m, n, 2)."""
    L2 = np.sum(L * L, axis=-1)
    LV = np.sum(L * V, axis=-1)
    Ld = np.sum(L * d, axis=-1)
    Vd = np.sum(V * d, axis=-1)
    out = (a + LV / L2)[:, :, None] * d
    out += (2.0 * LV * Ld / L2 ** 2)[:, :, None] * L
    out -= (Ld[:, :, None] * V + Vd[:, :, None] * L) / L2[:, :, None]
    return out / FOUR_PI


def apply_w(ta, tz, tz1, tz2, tz3, tz4, sa, sz, sz1, dens, weight):
    """Velocity remainder sum: the -d/d(src) G kernel minus its Hilbert part."""
    tau, tau_safe, small, L = _pair_geometry(ta, tz, tz1, tz2, tz3, tz4, sa, sz)
    t_ = tau[:, :, None]
    V = (sz1[None, :, :] - L) / tau_safe[:, :, None]
    V_series = (0.5 * tz2[:, None, :] + (t_ / 3.0) * tz3[:, None, :]
                + (t_ ** 2 / 8.0) * tz4[:, None, :])
    V = np.where(small[:, :, None], V_series, V)
    a = _a_smooth(tau)
    d = np.broadcast_to(dens[None, :, :], L.shape)
    return weight * _contract(a, L, V, d).sum(axis=1)


def apply_r(ta, tz, tz1, tz2, tz3, tz4, sa, sz, sz1, dens, weight):
    """g-term remainder sum: the d/d(tgt) G kernel plus its cotangent part."""
    tau, tau_safe, small, L = _pair_geometry(ta, tz, tz1, tz2, tz3, tz4, sa, sz)
    t_ = tau[:, :, None]
    V = -(L - tz1[:, None, :]) / tau_safe[:, :, None]
    V_series = -(0.5 * tz2[:, None, :] + (t_ / 6.0) * tz3[:, None, :]
                 + (t_ ** 2 / 24.0) * tz4[:, None, :])
    V = np.where(small[:, :, None], V_series, V)
    a = _a_smooth(tau)
    d = np.broadcast_to(dens[None, :, :], L.shape)
    return weight * _contract(a, L, V, d).sum(axis=1)


def apply_delta_q(ta, tz, tz1, tz2, tz3, sa, sz, sz1,
                  f_s, f_t, fp_t, fpp_t, fppp_t, weight):
    """Difference-kernel sum: -d/d(src) G applied to f(src) - f(tgt)."""
    z4 = np.zeros_like(tz1)
    tau, tau_safe, small, L = _pair_geometry(ta, tz, tz1, tz2, tz3, z4, sa, sz)
    t_ = tau[:, :, None]
    V = np.broadcast_to(sz1[None, :, :], L.shape)
    d = (f_s[None, :, :] - f_t[:, None, :]) / tau_safe[:, :, None]
    d_series = (fp_t[:, None, :] + 0.5 * t_ * fpp_t[:, None, :]
                + (t_ ** 2 / 6.0) * fppp_t[:, None, :])
    d = np.where(small[:, :, None], d_series, d)
    a = np.zeros_like(tau)
    return weight * _contract(a, L, V, d).sum(axis=1)
