"""
Bipartite thermal light: Gaussian description and weak-light Fock truncation.

The two optical modes are labelled ``a`` and ``b``. All Fock-space matrices
use the ordered basis ``|0,0>, |0,1>, |1,0>, |1,1>`` where ``|n,m>`` holds
``n`` photons in mode ``a`` and ``m`` photons in mode ``b``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PSD_TOL = 1e-12

# Fock basis indices
VAC = 0      # |0,0>
B1 = 1       # |0,1>
A1 = 2       # |1,0>
AB = 3       # |1,1>
BASIS_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class CoherenceParams:
    """Mean photon number per mode pair and complex degree of coherence.

    Parameters
    ----------
    epsilon : float
        Mean photon number summed over both modes (``epsilon/2`` per mode).
    g1, g2 : float
        Real and imaginary parts of the degree of coherence ``g``.
    """

    epsilon: float
    g1: float = 0.0
    g2: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.g1 ** 2 + self.g2 ** 2 > 1.0 + PSD_TOL:
            raise DomainError(f"|g| must be <= 1, got |g| = {abs(self.g)}")

    @property
    def g(self) -> complex:
        return complex(self.g1, self.g2)

    @classmethod
    def from_complex(cls, epsilon, g):
        g = complex(g)
        return cls(float(epsilon), g.real, g.imag)


@dataclass(frozen=True)
class FockDensityOperator:
    """Two-mode density matrix restricted to at most one photon per mode.

    ``truncated`` records that terms of order ``epsilon**2`` were dropped.
    """

    matrix: np.ndarray
    truncated: bool = True

    def __post_init__(self):
        self.matrix.setflags(write=False)


def _as_params(params):
    if isinstance(params, CoherenceParams):
        return params
    epsilon, g = params
    return CoherenceParams.from_complex(epsilon, g)


def coherence_matrix(epsilon, g):
    """Unchecked 2x2 mutual coherence matrix; used by perturbation code."""
    g = complex(g)
    return 0.5 * epsilon * np.array([[1.0, g], [g.conjugate(), 1.0]], dtype=complex)


def build_coherence_matrix(params):
    """Mutual coherence matrix ``[[e/2, e g/2], [e g*/2, e/2]]``.

    Rows and columns are indexed by modes ``(a, b)``; the off-diagonal entry
    ``Gamma_ab`` is the field correlation ``<alpha beta*>``.
    """
    params = _as_params(params)
    return coherence_matrix(params.epsilon, params.g)


def evaluate_p_function(gamma, alpha, beta):
    """Sudarshan-Glauber density of thermal light at field amplitudes.

    Parameters
    ----------
    gamma : (2, 2) complex array
        Strictly positive-definite mutual coherence matrix.
    alpha, beta : complex or array_like
        Field amplitudes of modes a and b (broadcast together).

    Returns
    -------
    ndarray or float
        ``exp(-v^H Gamma^-1 v) / (pi^2 det Gamma)`` with ``v = (alpha, beta)``.
    """
    gamma = np.asarray(gamma, dtype=complex)
    det = float(np.real(np.linalg.det(gamma)))
    if det <= PSD_TOL * max(1.0, float(np.real(np.trace(gamma))) ** 2):
        raise DomainError(
            "P function requires det(Gamma) > 0; for |g| = 1 or epsilon = 0 "
            "draw fields with sample_fields instead"
        )
    ginv = np.linalg.inv(gamma)
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    quad = (
        ginv[0, 0].real * np.abs(alpha) ** 2
        + ginv[1, 1].real * np.abs(beta) ** 2
        + 2.0 * np.real(np.conj(alpha) * ginv[0, 1] * beta)
    )
    out = np.exp(-quad) / (np.pi ** 2 * det)
    return out if out.ndim else float(out)


def weak_density_matrix(epsilon, g):
    """Unchecked weak-light density matrix (no domain validation)."""
    g = complex(g)
    rho = np.zeros((4, 4), dtype=complex)
    rho[VAC, VAC] = 1.0 - epsilon
    rho[B1, B1] = rho[A1, A1] = 0.5 * epsilon
    rho[A1, B1] = 0.5 * epsilon * g
    rho[B1, A1] = 0.5 * epsilon * g.conjugate()
    return rho


def weak_density_operator(params):
    """Weak-light density operator with the ``O(epsilon^2)`` term set to zero.

    The ``|1,1>`` row and column are identically zero and the trace is
    exactly one, so no renormalisation is applied.
    """
    params = _as_params(params)
    if params.epsilon > 1.0:
        raise DomainError(
            f"weak-light truncation needs epsilon <= 1, got {params.epsilon}"
        )
    return FockDensityOperator(weak_density_matrix(params.epsilon, params.g))


def _factor(gamma):
    """Return ``L`` with ``L L^H = gamma`` built on the nonzero eigenspace."""
    gamma = np.asarray(gamma, dtype=complex)
    gamma = 0.5 * (gamma + gamma.conj().T)
    w, u = np.linalg.eigh(gamma)
    if w.min() < -PSD_TOL * max(1.0, abs(w).max()):
        raise DomainError(f"covariance is not PSD (eigenvalues {w})")
    keep = w > PSD_TOL * max(1.0, abs(w).max())
    return u[:, keep] * np.sqrt(w[keep])


def sample_fields(gamma, rng, size=None):
    """Draw circular complex Gaussian amplitudes ``(alpha, beta)`` with
    ``E[v v^H] = gamma``.

    Rank-deficient ``gamma`` (``|g| = 1``) is factorised through its
    nonzero eigenspace so the moments stay exact. ``gamma = 0`` returns
    zeros.
    """
    lf = _factor(gamma)
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    k = lf.shape[1]
    z = (rng.standard_normal(shape + (k, 2)) @ np.array([1.0, 1j])) / np.sqrt(2.0)
    v = z @ lf.T
    alpha, beta = v[..., 0], v[..., 1]
    if size is None:
        return complex(alpha), complex(beta)
    return alpha, beta


def heterodyne_output_covariance(gamma):
    """Covariance of heterodyne outcomes: ``Gamma + I`` (unit detection noise)."""
    return np.asarray(gamma, dtype=complex) + np.eye(2)


def stream(seed, index=0):
    """Independent generator for split ``index`` of master ``seed``.

    The same ``(seed, index)`` always yields the same sequence.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))
