# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics match ``_pykernels`` exactly."""

import numpy as np
from libc.math cimport exp, fabs, M_PI


def heterodyne_masses(const double[::1] r, const double[::1] wr,
                      const double[::1] cos_t, const double[::1] sin_t,
                      const double[::1] wt, double rho_vac, double rho_b,
                      double rho_a, double c_re, double c_im):
    cdef Py_ssize_t nr = r.shape[0], nt = cos_t.shape[0]
    cdef Py_ssize_t i, j, k, idx = 0
    cdef double ra, rb, base, wab, amp, norm = 1.0 / (M_PI * M_PI)
    out = np.empty(nr * nr * nt, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(nr):
        ra = r[i]
        for j in range(nr):
            rb = r[j]
            amp = exp(-ra * ra - rb * rb) * norm
            base = rho_vac + rho_b * rb * rb + rho_a * ra * ra
            wab = wr[i] * wr[j] * amp
            for k in range(nt):
                o[idx] = wab * wt[k] * (
                    base + 2.0 * ra * rb * (c_re * cos_t[k] - c_im * sin_t[k]))
                idx += 1
    return out


def fisher_stencil(const double[::1] p0, const double[::1] p1p,
                   const double[::1] p1m, const double[::1] p2p,
                   const double[::1] p2m, double h, double p_floor,
                   double d_floor):
    cdef Py_ssize_t n = p0.shape[0], i
    cdef double f11 = 0.0, f12 = 0.0, f22 = 0.0, d1, d2, inv
    cdef double half_inv_h = 0.5 / h
    cdef long n_dropped = 0, n_singular = 0, n_negative = 0
    for i in range(n):
        if (p0[i] < -p_floor or p1p[i] < -p_floor or p1m[i] < -p_floor
                or p2p[i] < -p_floor or p2m[i] < -p_floor):
            n_negative += 1
        d1 = (p1p[i] - p1m[i]) * half_inv_h
        d2 = (p2p[i] - p2m[i]) * half_inv_h
        if p0[i] < p_floor:
            if fabs(d1) >= d_floor or fabs(d2) >= d_floor:
                n_singular += 1
            else:
                n_dropped += 1
            continue
        inv = 1.0 / p0[i]
        f11 += d1 * d1 * inv
        f12 += d1 * d2 * inv
        f22 += d2 * d2 * inv
    return f11, f12, f22, n_dropped, n_singular, n_negative
