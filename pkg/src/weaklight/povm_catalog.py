"""
Measurement schemes as POVMs on the shared two-mode Fock basis.

Discrete schemes (direct detection, shared-entanglement interferometry) are
stored as 4x4 operator matrices. Continuous schemes (heterodyne, homodyne)
are stored as closed-form matrix-element kernels together with an explicit
quadrature grid over the outcome space.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.stats import poisson

from . import kernels
from .errors import NormalizationError
from .thermal_model import A1, AB, B1, PSD_TOL, VAC, FockDensityOperator

DIRECT_LABELS = ((0, 0), (1, 0), (0, 1))
GJC_LABELS = ("y0", "y1", "y2", "y3", "y4")
CONTINUOUS_SCHEMES = ("heterodyne", "homodyne")


def _ket(c_a1=0.0, c_b1=0.0):
    v = np.zeros(4, dtype=complex)
    v[A1], v[B1] = c_a1, c_b1
    return v


def _proj(v, scale=1.0):
    return scale * np.outer(v, v.conj())


@dataclass(frozen=True)
class DiscretePovm:
    """Finite POVM: ``elements[k]`` is the 4x4 operator for ``labels[k]``.

    Completeness is asserted on the first ``subspace_dim`` basis states.
    """

    scheme: str
    labels: tuple
    elements: np.ndarray
    delta: float = 0.0
    subspace_dim: int = 3

    def __post_init__(self):
        e = self.elements
        if e.shape != (len(self.labels), 4, 4):
            raise ValueError(f"elements shape {e.shape} does not match labels")
        if not np.allclose(e, np.conj(np.swapaxes(e, 1, 2)), atol=PSD_TOL, rtol=0):
            raise ValueError("POVM elements must be Hermitian")
        if np.linalg.eigvalsh(e).min() < -PSD_TOL:
            raise ValueError("POVM elements must be positive semidefinite")
        d = self.subspace_dim
        total = e.sum(axis=0)[:d, :d]
        if not np.allclose(total, np.eye(d), atol=PSD_TOL, rtol=0):
            raise ValueError("POVM is not complete on its declared subspace")
        e.setflags(write=False)

    def element(self, label):
        return self.elements[self.labels.index(label)]


def direct_detection_povm(delta=0.0):
    """Beam-splitter interference followed by photon counting.

    ``delta`` is the phase shift applied to mode b; it enters as
    ``exp(-i delta)`` on the ``|0,1>`` component of the kets.
    """
    ph = np.exp(-1j * delta)
    vac = np.zeros(4, dtype=complex)
    vac[VAC] = 1.0
    elements = np.array([
        _proj(vac),
        _proj(_ket(1.0, ph), 0.5),
        _proj(_ket(1.0, -ph), 0.5),
    ])
    return DiscretePovm("direct", DIRECT_LABELS, elements, float(delta))


def gjc_entangled_povm(delta=0.0):
    """Shared-entanglement interferometry with a single-photon ancilla.

    Outcomes ``y3``/``y4`` carry half the direct-detection interference
    operators; ``y1``/``y2`` are which-site clicks with no phase information.
    """
    direct = direct_detection_povm(delta)
    b1 = np.zeros(4, dtype=complex)
    b1[B1] = 1.0
    a1 = np.zeros(4, dtype=complex)
    a1[A1] = 1.0
    elements = np.array([
        direct.elements[0],
        _proj(b1, 0.5),
        _proj(a1, 0.5),
        0.5 * direct.elements[1],
        0.5 * direct.elements[2],
    ])
    return DiscretePovm("gjc", GJC_LABELS, elements, float(delta))


class KernelElements(NamedTuple):
    """Matrix elements ``<n,m|E(y)|n',m'>`` of a continuous POVM.

    Field names: ``e00`` = E_{00,00}, ``e01`` = E_{01,01}, ``e10`` = E_{10,10},
    ``e11`` = E_{11,11}, ``e10_01`` = E_{10,01}, ``e01_10`` = E_{01,10}.
    """

    e00: np.ndarray
    e01: np.ndarray
    e10: np.ndarray
    e11: np.ndarray
    e10_01: np.ndarray
    e01_10: np.ndarray


def heterodyne_matrix_elements(mu, nu):
    """Kernels of ``E(mu, nu) = |mu, nu><mu, nu| / pi^2``."""
    mu = np.asarray(mu, dtype=complex)
    nu = np.asarray(nu, dtype=complex)
    am2, an2 = np.abs(mu) ** 2, np.abs(nu) ** 2
    g = np.exp(-am2 - an2) / np.pi ** 2
    cross = g * np.conj(mu) * nu
    return KernelElements(g, g * an2, g * am2, g * am2 * an2, np.conj(cross), cross)


def homodyne_matrix_elements(x, y, delta_a=0.0, delta_b=0.0):
    """Kernels of the quadrature-eigenstate POVM ``E(x, y) = |x, y><x, y|``.

    Only the phase difference ``delta_a - delta_b`` appears.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = np.exp(-x * x - y * y) / np.pi
    xy = x * y
    cross = 2.0 * g * xy * np.exp(1j * (delta_a - delta_b))
    return KernelElements(
        g, 2.0 * g * y * y, 2.0 * g * x * x, 4.0 * g * xy * xy, cross, np.conj(cross)
    )


@dataclass(frozen=True)
class HeterodyneGrid:
    """Reduced quadrature over heterodyne outcomes ``(mu, nu)``.

    Every weak-light heterodyne integrand depends only on ``|mu|``, ``|nu|``
    and ``arg(mu* nu)``, so the common phase is integrated analytically and
    the grid runs over ``mu = r_a``, ``nu = r_b exp(i theta)``. Radial axes
    use Gauss-Legendre nodes on ``[0, extent]``; the angle uses the
    periodic rectangle rule.
    """

    extent: float = 6.0
    n_radial: int = 201
    n_angle: int = 64

    def axes(self):
        x, w = np.polynomial.legendre.leggauss(self.n_radial)
        r = 0.5 * self.extent * (x + 1.0)
        wr = 0.5 * self.extent * w * r
        theta = 2.0 * np.pi * np.arange(self.n_angle) / self.n_angle
        wt = np.full(self.n_angle, (2.0 * np.pi) ** 2 / self.n_angle)
        return r, wr, theta, wt

    def nodes(self):
        """Flattened ``(mu, nu, weight)`` arrays in C order over (r_a, r_b, theta)."""
        r, wr, theta, wt = self.axes()
        ra, rb, th = np.meshgrid(r, r, theta, indexing="ij")
        w = wr[:, None, None] * wr[None, :, None] * wt[None, None, :]
        return ra.ravel().astype(complex), (rb * np.exp(1j * th)).ravel(), w.ravel()

    @property
    def size(self):
        return self.n_radial ** 2 * self.n_angle


@dataclass(frozen=True)
class HomodyneGrid:
    """Trapezoidal grid on ``[-extent, extent]^2`` over quadratures ``(x, y)``."""

    extent: float = 6.0
    n: int = 201

    def nodes(self):
        ax = np.linspace(-self.extent, self.extent, self.n)
        w1 = np.full(self.n, ax[1] - ax[0])
        w1[[0, -1]] *= 0.5
        x, y = np.meshgrid(ax, ax, indexing="ij")
        return x.ravel(), y.ravel(), np.outer(w1, w1).ravel()

    @property
    def size(self):
        return self.n ** 2


def _rho_entries(rho):
    """Entries of a density matrix that the continuous kernels can see."""
    m = rho.matrix if isinstance(rho, FockDensityOperator) else np.asarray(rho)
    mask = np.ones((4, 4), dtype=bool)
    for i, j in ((VAC, VAC), (B1, B1), (A1, A1), (AB, AB), (A1, B1), (B1, A1)):
        mask[i, j] = False
    if np.abs(m[mask]).max() > PSD_TOL:
        raise ValueError("density matrix has coherences outside the kernel set")
    return m[VAC, VAC].real, m[B1, B1].real, m[A1, A1].real, m[AB, AB].real, m[A1, B1]


@dataclass(frozen=True)
class ContinuousPovmKernel:
    """Continuous-outcome POVM given by closed-form kernels plus a grid."""

    scheme: str
    grid: object
    delta_a: float = 0.0
    delta_b: float = 0.0

    @property
    def delta(self):
        return self.delta_a - self.delta_b

    def elements_on_grid(self):
        """Kernels evaluated at every grid node, with the node weights."""
        if self.scheme == "heterodyne":
            mu, nu, w = self.grid.nodes()
            return heterodyne_matrix_elements(mu, nu), w
        x, y, w = self.grid.nodes()
        return homodyne_matrix_elements(x, y, self.delta_a, self.delta_b), w

    def masses(self, rho):
        """Born probability times quadrature weight at every grid node."""
        vac, pb, pa, p11, c = _rho_entries(rho)
        if self.scheme == "heterodyne" and p11 == 0.0:
            r, wr, theta, wt = self.grid.axes()
            return kernels.heterodyne_masses(
                r, wr, np.cos(theta), np.sin(theta), wt, vac, pb, pa, c.real, c.imag
            )
        k, w = self.elements_on_grid()
        dens = vac * k.e00 + pb * k.e01 + pa * k.e10 + p11 * k.e11
        dens = dens + 2.0 * np.real(c * k.e01_10)
        return dens * w


def heterodyne_povm(grid=None):
    return ContinuousPovmKernel("heterodyne", grid or HeterodyneGrid())


def homodyne_povm(delta_a=0.0, delta_b=0.0, grid=None):
    return ContinuousPovmKernel("homodyne", grid or HomodyneGrid(), float(delta_a), float(delta_b))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Outcome probabilities of one measurement.

    For discrete schemes ``support`` holds the outcome labels and
    ``probabilities`` the exact Born probabilities. For continuous schemes
    ``support`` is the grid and ``probabilities`` are node masses
    (density times quadrature weight), so they sum to one on the grid.
    """

    scheme: str
    support: object
    probabilities: np.ndarray
    weights: np.ndarray = field(default=None, repr=False)

    def total(self):
        return float(np.sum(self.probabilities))

    def prob(self, label):
        return float(self.probabilities[self.support.index(label)])


DISCRETE_TOL = 1e-9
GRID_TOL = 1e-6


def born_distribution(rho, povm, check=True):
    """Outcome distribution ``P(y) = tr[E(y) rho]``.

    Raises
    ------
    NormalizationError
        If the total probability is off by more than 1e-9 (discrete) or
        1e-6 (continuous grid).
    """
    if isinstance(povm, DiscretePovm):
        m = rho.matrix if isinstance(rho, FockDensityOperator) else np.asarray(rho)
        p = np.real(np.einsum("kij,ji->k", povm.elements, m))
        dist = OutcomeDistribution(povm.scheme, povm.labels, p)
        tol = DISCRETE_TOL
    else:
        p = povm.masses(rho)
        dist = OutcomeDistribution(povm.scheme, povm.grid, p)
        tol = GRID_TOL
    if check and abs(dist.total() - 1.0) > tol:
        raise NormalizationError(
            f"{povm.scheme} probabilities sum to {dist.total():.12g}, not 1"
        )
    return dist


@dataclass(frozen=True)
class PptReport:
    """Terms of ``|E_{10,01}|^2 <= E_{00,00} E_{11,11}``; ``slack = rhs - lhs``."""

    lhs: np.ndarray
    rhs: np.ndarray
    slack: np.ndarray

    @property
    def min_slack(self):
        return float(np.min(self.slack))

    def holds(self, tol=PSD_TOL):
        return self.min_slack >= -tol


def check_ppt_cauchy_schwarz(element):
    """Evaluate the Cauchy-Schwarz inequality that every PPT element obeys.

    ``element`` is either a 4x4 operator matrix or a :class:`KernelElements`
    (scalar or array valued). A negative slack certifies that the element is
    not PPT, hence not implementable by local operations and classical
    communication.
    """
    if isinstance(element, KernelElements):
        lhs = np.abs(element.e10_01) ** 2
        rhs = np.real(element.e00) * np.real(element.e11)
    else:
        e = np.asarray(element)
        lhs = np.abs(e[A1, B1]) ** 2
        rhs = np.real(e[VAC, VAC]) * np.real(e[AB, AB])
    return PptReport(lhs, rhs, rhs - lhs)


def partial_transpose_a(op):
    """Partial transpose of a 4x4 two-qubit-truncated operator on mode a."""
    t = np.asarray(op).reshape(2, 2, 2, 2)
    return t.transpose(2, 1, 0, 3).reshape(4, 4)


def husimi_kernel(scheme, outcome, alpha, beta, delta=0.0, delta_a=0.0, delta_b=0.0):
    """Coherent-state expectation ``<alpha, beta|E(y)|alpha, beta>``.

    This is the semiclassical likelihood of outcome ``y`` given classical
    fields. ``outcome`` is ``(mu, nu)`` for heterodyne, ``(x, y)`` for
    homodyne and photon counts ``(n, m)`` for direct detection.
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    if scheme == "heterodyne":
        mu, nu = outcome
        return np.exp(-np.abs(mu - alpha) ** 2 - np.abs(nu - beta) ** 2) / np.pi ** 2
    if scheme == "homodyne":
        x, y = outcome
        xa = np.sqrt(2.0) * np.real(alpha * np.exp(-1j * delta_a))
        yb = np.sqrt(2.0) * np.real(beta * np.exp(-1j * delta_b))
        return np.exp(-(x - xa) ** 2 - (y - yb) ** 2) / np.pi
    if scheme == "direct":
        n, m = outcome
        u, v = beam_splitter_fields(alpha, beta, delta)
        return poisson.pmf(n, np.abs(u) ** 2) * poisson.pmf(m, np.abs(v) ** 2)
    raise ValueError(f"unknown scheme {scheme!r}")


def beam_splitter_fields(alpha, beta, delta=0.0):
    """Output fields ``(u, v) = V (alpha, beta)`` of the 50-50 combiner."""
    eb = np.exp(1j * delta) * np.asarray(beta)
    s = 1.0 / np.sqrt(2.0)
    return s * (np.asarray(alpha) + eb), s * (np.asarray(alpha) - eb)
