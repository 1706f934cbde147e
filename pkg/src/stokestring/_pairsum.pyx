# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pair-sum kernels.

Same semantics as `_pairsum_py` (the import-time fallback): one 2x2 kernel
template applied across all (target, source) pairs, with Taylor series for
the divided differences below |tau| = 1e-3.  Loops are fused so no O(n^2)
temporaries are allocated; summation order over sources is fixed, so the
output is deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, tan

cnp.import_array()

cdef double PI = 3.141592653589793238462643383279502884
cdef double FOUR_PI = 4.0 * PI
cdef double SERIES_TOL = 1e-3
cdef double A_TOL = 1e-2


cdef inline double _wrap(double d) noexcept nogil:
    while d >= PI:
        d -= 2.0 * PI
    while d < -PI:
        d += 2.0 * PI
    return d


cdef inline double _a_smooth(double tau) noexcept nogil:
    cdef double t2
    if fabs(tau) < A_TOL:
        t2 = tau * tau
        return tau * (1.0 / 12.0 + t2 * (1.0 / 720.0 + t2 / 30240.0))
    return 1.0 / tau - 1.0 / (2.0 * tan(0.5 * tau))


def apply_w(double[::1] ta, double[:, ::1] tz, double[:, ::1] tz1,
            double[:, ::1] tz2, double[:, ::1] tz3, double[:, ::1] tz4,
            double[::1] sa, double[:, ::1] sz, double[:, ::1] sz1,
            double[:, ::1] dens, double weight):
    """Velocity remainder sum: -d/d(src) G minus its Hilbert part."""
    cdef Py_ssize_t m = ta.shape[0], n = sa.shape[0], i, j
    out_arr = np.zeros((m, 2))
    cdef double[:, ::1] out = out_arr
    cdef double tau, a, lx, ly, vx, vy, l2, lv, ld, vd, dx, dy, c0, c1
    cdef double ox, oy, scale = weight / FOUR_PI
    with nogil:
        for i in range(m):
            ox = 0.0
            oy = 0.0
            for j in range(n):
                tau = _wrap(sa[j] - ta[i])
                if fabs(tau) < SERIES_TOL:
                    lx = tz1[i, 0] + tau * (0.5 * tz2[i, 0] + tau * (
                        tz3[i, 0] / 6.0 + tau * tz4[i, 0] / 24.0))
                    ly = tz1[i, 1] + tau * (0.5 * tz2[i, 1] + tau * (
                        tz3[i, 1] / 6.0 + tau * tz4[i, 1] / 24.0))
                    vx = 0.5 * tz2[i, 0] + tau * (tz3[i, 0] / 3.0
                                                  + tau * tz4[i, 0] / 8.0)
                    vy = 0.5 * tz2[i, 1] + tau * (tz3[i, 1] / 3.0
                                                  + tau * tz4[i, 1] / 8.0)
                else:
                    lx = (sz[j, 0] - tz[i, 0]) / tau
                    ly = (sz[j, 1] - tz[i, 1]) / tau
                    vx = (sz1[j, 0] - lx) / tau
                    vy = (sz1[j, 1] - ly) / tau
                a = _a_smooth(tau)
                dx = dens[j, 0]
                dy = dens[j, 1]
                l2 = lx * lx + ly * ly
                lv = lx * vx + ly * vy
                ld = lx * dx + ly * dy
                vd = vx * dx + vy * dy
                c0 = a + lv / l2
                c1 = 2.0 * lv * ld / (l2 * l2)
                ox += c0 * dx + c1 * lx - (ld * vx + vd * lx) / l2
                oy += c0 * dy + c1 * ly - (ld * vy + vd * ly) / l2
            out[i, 0] = scale * ox
            out[i, 1] = scale * oy
    return out_arr


def apply_r(double[::1] ta, double[:, ::1] tz, double[:, ::1] tz1,
            double[:, ::1] tz2, double[:, ::1] tz3, double[:, ::1] tz4,
            double[::1] sa, double[:, ::1] sz, double[:, ::1] sz1,
            double[:, ::1] dens, double weight):
    """g-term remainder sum: d/d(tgt) G plus its cotangent part."""
    cdef Py_ssize_t m = ta.shape[0], n = sa.shape[0], i, j
    out_arr = np.zeros((m, 2))
    cdef double[:, ::1] out = out_arr
    cdef double tau, a, lx, ly, vx, vy, l2, lv, ld, vd, dx, dy, c0, c1
    cdef double ox, oy, scale = weight / FOUR_PI
    with nogil:
        for i in range(m):
            ox = 0.0
            oy = 0.0
            for j in range(n):
                tau = _wrap(sa[j] - ta[i])
                if fabs(tau) < SERIES_TOL:
                    lx = tz1[i, 0] + tau * (0.5 * tz2[i, 0] + tau * (
                        tz3[i, 0] / 6.0 + tau * tz4[i, 0] / 24.0))
                    ly = tz1[i, 1] + tau * (0.5 * tz2[i, 1] + tau * (
                        tz3[i, 1] / 6.0 + tau * tz4[i, 1] / 24.0))
                    vx = -(0.5 * tz2[i, 0] + tau * (tz3[i, 0] / 6.0
                                                    + tau * tz4[i, 0] / 24.0))
                    vy = -(0.5 * tz2[i, 1] + tau * (tz3[i, 1] / 6.0
                                                    + tau * tz4[i, 1] / 24.0))
                else:
                    lx = (sz[j, 0] - tz[i, 0]) / tau
                    ly = (sz[j, 1] - tz[i, 1]) / tau
                    vx = -(lx - tz1[i, 0]) / tau
                    vy = -(ly - tz1[i, 1]) / tau
                a = _a_smooth(tau)
                dx = dens[j, 0]
                dy = dens[j, 1]
                l2 = lx * lx + ly * ly
                lv = lx * vx + ly * vy
                ld = lx * dx + ly * dy
                vd = vx * dx + vy * dy
                c0 = a + lv / l2
                c1 = 2.0 * lv * ld / (l2 * l2)
                ox += c0 * dx + c1 * lx - (ld * vx + vd * lx) / l2
                oy += c0 * dy + c1 * ly - (ld * vy + vd * ly) / l2
            out[i, 0] = scale * ox
            out[i, 1] = scale * oy
    return out_arr


def apply_delta_q(double[::1] ta, double[:, ::1] tz, double[:, ::1] tz1,
                  double[:, ::1] tz2, double[:, ::1] tz3,
                  double[::1] sa, double[:, ::1] sz, double[:, ::1] sz1,
                  double[:, ::1] f_s, double[:, ::1] f_t,
                  double[:, ::1] fp_t, double[:, ::1] fpp_t,
                  double[:, ::1] fppp_t, double weight):
    """Difference-kernel sum: -d/d(src) G applied to f(src) - f(tgt)."""
    cdef Py_ssize_t m = ta.shape[0], n = sa.shape[0], i, j
    out_arr = np.zeros((m, 2))
    cdef double[:, ::1] out = out_arr
    cdef double tau, lx, ly, vx, vy, l2, lv, ld, vd, dx, dy, c0, c1
    cdef double ox, oy, scale = weight / FOUR_PI
    with nogil:
        for i in range(m):
            ox = 0.0
            oy = 0.0
            for j in range(n):
                tau = _wrap(sa[j] - ta[i])
                if fabs(tau) < SERIES_TOL:
                    lx = tz1[i, 0] + tau * (0.5 * tz2[i, 0] + tau * tz3[i, 0] / 6.0)
                    ly = tz1[i, 1] + tau * (0.5 * tz2[i, 1] + tau * tz3[i, 1] / 6.0)
                    dx = fp_t[i, 0] + tau * (0.5 * fpp_t[i, 0]
                                             + tau * fppp_t[i, 0] / 6.0)
                    dy = fp_t[i, 1] + tau * (0.5 * fpp_t[i, 1]
                                             + tau * fppp_t[i, 1] / 6.0)
                else:
                    lx = (sz[j, 0] - tz[i, 0]) / tau
                    ly = (sz[j, 1] - tz[i, 1]) / tau
                    dx = (f_s[j, 0] - f_t[i, 0]) / tau
                    dy = (f_s[j, 1] - f_t[i, 1]) / tau
                vx = sz1[j, 0]
                vy = sz1[j, 1]
                l2 = lx * lx + ly * ly
                lv = lx * vx + ly * vy
                ld = lx * dx + ly * dy
                vd = vx * dx + vy * dy
                c0 = lv / l2
                c1 = 2.0 * lv * ld / (l2 * l2)
                ox += c0 * dx + c1 * lx - (ld * vx + vd * lx) / l2
                oy += c0 * dy + c1 * ly - (ld * vy + vd * ly) / l2
            out[i, 0] = scale * ox
            out[i, 1] = scale * oy
    return out_arr
