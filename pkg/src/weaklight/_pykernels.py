"""NumPy implementations of the hot kernels (fallback for ``_kernels``)."""

import numpy as np


def heterodyne_masses(r, wr, cos_t, sin_t, wt, rho_vac, rho_b, rho_a, c_re, c_im):
    """Outcome masses of heterodyne detection on the reduced (r_a, r_b, theta)
    grid, flattened in C order.

    ``wr`` and ``wt`` are the full measure weights of the radial and angular
    axes (radial Jacobian and the factor from the integrated common phase
    already folded in). ``c = c_re + i c_im`` is ``<1,0|rho|0,1>``.
    """
    ra = r[:, None, None]
    rb = r[None, :, None]
    gauss = np.exp(-ra * ra - rb * rb) / np.pi ** 2
    cross = 2.0 * ra * rb * (c_re * cos_t - c_im * sin_t)
    dens = gauss * (rho_vac + rho_b * rb * rb + rho_a * ra * ra + cross)
    w = wr[:, None, None] * wr[None, :, None] * wt[None, None, :]
    return (dens * w).ravel()


def fisher_stencil(p0, p1p, p1m, p2p, p2m, h, p_floor, d_floor):
    """Accumulate the 2x2 Fisher sum from a central-difference stencil.

    Returns ``(f11, f12, f22, n_dropped, n_singular, n_negative)``.
    """
    d1 = (p1p - p1m) / (2.0 * h)
    d2 = (p2p - p2m) / (2.0 * h)
    small = p0 < p_floor
    steep = (np.abs(d1) >= d_floor) | (np.abs(d2) >= d_floor)
    n_singular = int(np.count_nonzero(small & steep))
    n_dropped = int(np.count_nonzero(small & ~steep))
    n_negative = int(
        np.count_nonzero(
            (p0 < -p_floor) | (p1p < -p_floor) | (p1m < -p_floor)
            | (p2p < -p_floor) | (p2m < -p_floor)
        )
    )
    keep = ~small
    inv = 1.0 / p0[keep]
    a, b = d1[keep], d2[keep]
    return (
        float(np.sum(a * a * inv)),
        float(np.sum(a * b * inv)),
        float(np.sum(b * b * inv)),
        n_dropped,
        n_singular,
        n_negative,
    )
