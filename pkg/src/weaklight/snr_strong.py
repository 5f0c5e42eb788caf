"""
Closed-form moments and signal-to-noise ratios of direct and heterodyne
detection for thermal light of arbitrary strength.

The SNR is meaningful for weak light only after averaging many
measurements; averaging M shots multiplies every ratio here by M.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _check(epsilon, g):
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    if abs(g) > 1.0 + 1e-12:
        raise DomainError(f"|g| must be <= 1, got {abs(g)}")


@dataclass(frozen=True)
class MomentReport:
    """First and second moments of the direct-detection photon counts."""

    mean_n: float
    mean_m: float
    var_n: float
    var_m: float
    cov_nm: float


@dataclass(frozen=True)
class SnrReport:
    scheme: str
    signal: float
    noise: float
    ratio: float
    protocol: str = "single"


@dataclass(frozen=True)
class HeterodyneMoments:
    """``fourth`` is ``<|mu nu*|^2>``; signal and noise refer to the
    statistic ``mu nu*``."""

    fourth: float
    signal: float
    noise: float


def heterodyne_moments(epsilon, g):
    g = complex(g)
    _check(epsilon, g)
    signal = epsilon ** 2 * abs(g) ** 2 / 4.0
    noise = (1.0 + epsilon / 2.0) ** 2
    return HeterodyneMoments(noise + signal, signal, noise)


def heterodyne_snr(epsilon, g_abs):
    """``S/N = epsilon^2 |g|^2 / (2 + epsilon)^2`` for the statistic ``mu nu*``."""
    m = heterodyne_moments(epsilon, abs(g_abs))
    return SnrReport("heterodyne", m.signal, m.noise, m.signal / m.noise)


def direct_moments(epsilon, g, delta=0.0):
    g = complex(g)
    _check(epsilon, g)
    z = g * np.exp(-1j * delta)
    mean_n = 0.5 * epsilon * (1.0 + z.real)
    mean_m = 0.5 * epsilon * (1.0 - z.real)
    return MomentReport(
        mean_n=mean_n,
        mean_m=mean_m,
        var_n=mean_n + mean_n ** 2,
        var_m=mean_m + mean_m ** 2,
        cov_nm=0.25 * epsilon ** 2 * z.imag ** 2,
    )


def direct_snr(epsilon, g, delta=0.0):
    """SNR of the count difference ``n - m`` at a single phase setting."""
    mom = direct_moments(epsilon, g, delta)
    signal = (mom.mean_n - mom.mean_m) ** 2
    noise = mom.var_n + mom.var_m - 2.0 * mom.cov_nm
    return SnrReport("direct", signal, noise, signal / noise if noise > 0 else 0.0)


def direct_snr_avg(epsilon, g_abs):
    """Per-measurement SNR averaged over phases ``delta`` and ``delta + pi/2``."""
    g_abs = abs(g_abs)
    _check(epsilon, g_abs)
    signal = epsilon ** 2 * g_abs ** 2 / 2.0
    noise = epsilon + epsilon ** 2 / 2.0
    ratio = signal / noise if noise > 0 else 0.0
    return SnrReport("direct", signal, noise, ratio, protocol="two-phase average")


def regime_compare(epsilons, g_abs):
    """Rows ``(epsilon, direct SNR, heterodyne SNR, direct/heterodyne)``.

    The ratio column is ``nan`` where the heterodyne SNR vanishes.
    """
    rows = []
    for eps in epsilons:
        d = direct_snr_avg(eps, g_abs).ratio
        h = heterodyne_snr(eps, g_abs).ratio
        rows.append((float(eps), d, h, d / h if h > 0 else float("nan")))
    return rows
