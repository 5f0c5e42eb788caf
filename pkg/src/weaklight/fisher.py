"""
Fisher information about ``g = g1 + i g2`` for the measurement schemes,
Cramer-Rao bounds, and the local-measurement (LOCC) upper bounds.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, FisherDivergenceError, ModelError, SingularSupportError
from .povm_catalog import (
    ContinuousPovmKernel,
    DiscretePovm,
    HeterodyneGrid,
    HomodyneGrid,
    born_distribution,
    check_ppt_cauchy_schwarz,
    direct_detection_povm,
    gjc_entangled_povm,
    heterodyne_povm,
    homodyne_povm,
)
from .thermal_model import CoherenceParams, weak_density_matrix

SCHEMES = ("direct", "gjc", "heterodyne", "homodyne")
LOCAL_SCHEMES = ("heterodyne", "homodyne")

FD_STEP = 1e-5
P_FLOOR = 1e-15
D_FLOOR = 1e-12
PSD_TOL = 1e-10
PINV_RTOL = 1e-12


def _g(g):
    return g.g if isinstance(g, CoherenceParams) else complex(g)


def _probs(out):
    p = getattr(out, "probabilities", out)
    return np.asarray(p, dtype=float).ravel()


def fisher_numeric(prob_model, g, step=FD_STEP, backend=None):
    """Fisher matrix from central differences of an outcome distribution.

    Parameters
    ----------
    prob_model : callable
        Maps a complex ``g`` to an :class:`OutcomeDistribution` or an array
        of outcome probabilities (grid masses for continuous schemes).
    g : complex or CoherenceParams
        Point at which the information is evaluated.
    step : float
        Central-difference step on ``g1`` and ``g2``.

    Outcomes with probability below 1e-15 are skipped when both derivatives
    are below 1e-12; otherwise :class:`SingularSupportError` is raised.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    g = _g(g)
    stencil = [
        _probs(prob_model(g + d)) for d in (0.0, step, -step, 1j * step, -1j * step)
    ]
    f11, f12, f22, _, n_sing, n_neg = kernels.fisher_stencil(
        *stencil, step, P_FLOOR, D_FLOOR, backend=backend
    )
    if n_neg:
        raise ModelError(f"probability model returned {n_neg} negative entries")
    if n_sing:
        raise SingularSupportError(
            f"{n_sing} outcomes have P < {P_FLOOR:g} but nonzero derivative"
        )
    return np.array([[f11, f12], [f12, f22]])


def scheme_povm(scheme, delta=0.0, grid=None):
    """POVM for ``scheme``; for homodyne ``delta`` is the LO phase difference."""
    if scheme == "direct":
        return direct_detection_povm(delta)
    if scheme == "gjc":
        return gjc_entangled_povm(delta)
    if scheme == "heterodyne":
        return heterodyne_povm(grid)
    if scheme == "homodyne":
        return homodyne_povm(delta, 0.0, grid)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def scheme_model(scheme, epsilon, delta=0.0, grid=None):
    """``g -> OutcomeDistribution`` for the weak-light state and ``scheme``."""
    povm = scheme_povm(scheme, delta, grid)

    def model(g):
        return born_distribution(weak_density_matrix(epsilon, g), povm, check=False)

    model.povm = povm
    return model


def numeric_fisher(scheme, epsilon, g=0.0, delta=0.0, grid=None, backend=None):
    return fisher_numeric(scheme_model(scheme, epsilon, delta, grid), g, backend=backend)


def _quadrature_projector(delta):
    c, s = np.cos(delta), np.sin(delta)
    return np.array([[c * c, s * c], [s * c, s * s]])


def fisher_direct_analytic(epsilon, g, delta=0.0):
    """Closed-form direct-detection Fisher matrix.

    Rank one: the only nonzero eigenvalue is
    ``epsilon / (1 - Re(g exp(-i delta))^2)`` along ``(cos delta, sin delta)``.
    """
    q = (complex(g) * np.exp(-1j * delta)).real
    if abs(q) >= 1.0:
        raise FisherDivergenceError(
            f"Re(g exp(-i delta)) = {q:g}: one outcome has zero probability"
        )
    return epsilon / (1.0 - q * q) * _quadrature_projector(delta)


def fisher_gjc_analytic(epsilon, g, delta=0.0):
    return 0.5 * fisher_direct_analytic(epsilon, g, delta)


def fisher_heterodyne_analytic(epsilon):
    """Leading-order heterodyne Fisher matrix ``(epsilon^2 / 2) I``."""
    return 0.5 * epsilon ** 2 * np.eye(2)


def fisher_homodyne_analytic(epsilon, delta=0.0):
    """Leading-order homodyne Fisher matrix, one quadrature per LO phase."""
    return epsilon ** 2 * _quadrature_projector(delta)


def fisher_analytic(scheme, epsilon, g=0.0, delta=0.0):
    if scheme == "direct":
        return fisher_direct_analytic(epsilon, g, delta)
    if scheme == "gjc":
        return fisher_gjc_analytic(epsilon, g, delta)
    if scheme == "heterodyne":
        return fisher_heterodyne_analytic(epsilon)
    if scheme == "homodyne":
        return fisher_homodyne_analytic(epsilon, delta)
    raise ValueError(f"unknown scheme {scheme!r}")


def gaussian_outcome_covariance(scheme, epsilon, g, delta=0.0):
    """Exact outcome covariance of a local scheme on the full thermal state.

    Heterodyne: complex ``(mu, nu)`` with covariance ``Gamma + I``.
    Homodyne: real ``(x, y)`` with variances ``(1 + epsilon)/2`` and
    covariance ``(epsilon/2) Re(g exp(-i delta))``.
    """
    g = complex(g)
    if scheme == "heterodyne":
        c = 1.0 + 0.5 * epsilon
        return np.array([[c, 0.5 * epsilon * g], [0.5 * epsilon * g.conjugate(), c]])
    if scheme == "homodyne":
        v = 0.5 * (1.0 + epsilon)
        r = 0.5 * epsilon * (g * np.exp(-1j * delta)).real
        return np.array([[v, r], [r, v]])
    raise ValueError(f"no Gaussian outcome law for scheme {scheme!r}")


def fisher_gaussian(scheme, epsilon, g, delta=0.0):
    """Fisher matrix of the exact Gaussian outcome law (any epsilon).

    Agrees with the weak-light truncation to leading order in epsilon.
    """
    cov = gaussian_outcome_covariance(scheme, epsilon, g, delta)
    if scheme == "heterodyne":
        d1 = 0.5 * epsilon * np.array([[0, 1], [1, 0]], dtype=complex)
        d2 = 0.5 * epsilon * np.array([[0, 1j], [-1j, 0]])
        scale = 1.0
    else:
        d1 = 0.5 * epsilon * np.cos(delta) * np.array([[0.0, 1.0], [1.0, 0.0]])
        d2 = 0.5 * epsilon * np.sin(delta) * np.array([[0.0, 1.0], [1.0, 0.0]])
        scale = 0.5
    inv = np.linalg.inv(cov)
    a = [inv @ d1, inv @ d2]
    f = np.array([[np.trace(a[i] @ a[j]).real for j in range(2)] for i in range(2)])
    return scale * f


def trace_norm(f):
    """Sum of absolute eigenvalues (equals the trace for PSD input)."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(f, dtype=float)))))


def is_psd(f, tol=PSD_TOL):
    return bool(np.linalg.eigvalsh(np.asarray(f, dtype=float)).min() >= -tol)


@dataclass(frozen=True)
class CramerRaoBound:
    """Lower bound on the covariance of unbiased estimates of ``(g1, g2)``.

    ``covariance`` is the pseudo-inverse of ``M F``; ``variances`` is its
    diagonal with ``inf`` wherever a direction carrying no information has
    a component along that parameter axis.
    """

    covariance: np.ndarray
    variances: np.ndarray
    null_directions: np.ndarray


def cramer_rao(f, m=1):
    if m < 1:
        raise ValueError("measurement count must be >= 1")
    total = m * np.asarray(f, dtype=float)
    w, v = np.linalg.eigh(0.5 * (total + total.T))
    top = max(abs(w).max(), 0.0)
    keep = w > PINV_RTOL * top if top > 0 else np.zeros_like(w, dtype=bool)
    cov = (v[:, keep] / w[keep]) @ v[:, keep].T
    null = v[:, ~keep].T
    var = np.diag(cov).copy()
    for d in null:
        var[np.abs(d) > 1e-8] = np.inf
    return CramerRaoBound(cov, var, null)


def locc_bound(epsilon):
    """Upper bound ``epsilon^2 / (1 - epsilon)`` on ``||F||`` for any
    local measurement of the weak-light state."""
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"LOCC bound needs 0 <= epsilon < 1, got {epsilon}")
    return epsilon ** 2 / (1.0 - epsilon)


@dataclass(frozen=True)
class BoundReport:
    scheme: str
    epsilon: float
    fisher_trace_norm: float
    locc_bound_value: float
    povm_specific_bound: float
    applicable: bool
    satisfied: bool
    margin: float


def _cs_ratio_sum(povm):
    """``sum_y |E_{10,01}(y)|^2 / E_{00,00}(y)`` and whether every element is PPT-compatible."""
    if isinstance(povm, DiscretePovm):
        total, ppt = 0.0, True
        for e in povm.elements:
            rep = check_ppt_cauchy_schwarz(e)
            ppt &= rep.holds()
            lhs, e00 = float(rep.lhs), float(e[0, 0].real)
            if lhs == 0.0:
                continue
            total = np.inf if e00 == 0.0 else total + lhs / e00
        return total, ppt
    k, w = povm.elements_on_grid()
    ppt = check_ppt_cauchy_schwarz(k).holds()
    lhs = np.abs(k.e10_01) ** 2
    ratio = np.divide(lhs, k.e00, out=np.zeros_like(lhs), where=k.e00 > 0)
    return float(np.sum(ratio * w)), ppt


def locc_bound_from_povm(povm, epsilon, g=0.0, fisher=None):
    """Compare a scheme's Fisher trace norm with the LOCC bounds.

    ``povm_specific_bound`` is ``epsilon^2/(1-epsilon)`` times the
    Cauchy-Schwarz ratio sum over outcomes; it is infinite for schemes whose
    elements have off-diagonal weight without vacuum support (direct
    detection). ``applicable`` is false when some element violates the
    PPT inequality, i.e. the scheme is not local.
    """
    bound = locc_bound(epsilon)
    ratio, ppt = _cs_ratio_sum(povm)
    specific = bound * ratio if np.isfinite(ratio) else np.inf
    if fisher is None:
        fisher = fisher_numeric(
            lambda gg: born_distribution(weak_density_matrix(epsilon, gg), povm, check=False),
            g,
        )
    tn = trace_norm(fisher)
    slack = 1e-9 * max(bound, 1e-300) + 1e-18
    return BoundReport(
        scheme=povm.scheme,
        epsilon=float(epsilon),
        fisher_trace_norm=tn,
        locc_bound_value=bound,
        povm_specific_bound=float(specific),
        applicable=bool(ppt),
        satisfied=bool(tn <= bound + slack and tn <= specific + slack),
        margin=float(bound - tn),
    )


def adaptive_fisher_bound(conditional_fishers):
    """Sum over steps of the largest conditional Fisher trace norm.

    Each item is either one Fisher matrix or an iterable of them (one per
    measurement history leading to that step).
    """
    total = 0.0
    for step in conditional_fishers:
        arr = np.asarray(step, dtype=float)
        mats = arr.reshape(-1, 2, 2)
        total += max(trace_norm(f) for f in mats) if len(mats) else 0.0
    return total


@dataclass(frozen=True)
class AdaptiveTree:
    joint_fisher: np.ndarray
    step_fishers: tuple
    bound: float

    @property
    def joint_trace_norm(self):
        return trace_norm(self.joint_fisher)


DEFAULT_POLICY = {(0, 0): 0.0, (1, 0): np.pi / 2, (0, 1): np.pi / 4}


def adaptive_direct_tree(epsilon, g, first_delta=0.0, policy=None, backend=None):
    """Two-step direct detection whose second phase depends on the first outcome.

    The joint outcome distribution over all nine ``(y1, y2)`` pairs is
    enumerated and its Fisher matrix computed numerically; the per-step
    conditional Fisher matrices give the adaptive bound.
    """
    policy = dict(DEFAULT_POLICY if policy is None else policy)
    first = scheme_model("direct", epsilon, first_delta)
    labels = first.povm.labels
    second = [scheme_model("direct", epsilon, policy[y]) for y in labels]

    def joint(gg):
        p1 = first(gg).probabilities
        return np.concatenate([p * m(gg).probabilities for p, m in zip(p1, second)])

    f_joint = fisher_numeric(joint, g, backend=backend)
    f1 = fisher_numeric(first, g, backend=backend)
    f2 = [fisher_numeric(m, g, backend=backend) for m in second]
    steps = ((f1,), tuple(f2))
    return AdaptiveTree(f_joint, steps, adaptive_fisher_bound(steps))


def default_grid(scheme):
    return HeterodyneGrid() if scheme == "heterodyne" else HomodyneGrid()


__all__ = [
    "AdaptiveTree", "BoundReport", "ContinuousPovmKernel", "CramerRaoBound",
    "adaptive_direct_tree", "adaptive_fisher_bound", "cramer_rao",
    "fisher_analytic", "fisher_direct_analytic", "fisher_gjc_analytic",
    "fisher_heterodyne_analytic", "fisher_homodyne_analytic", "fisher_numeric",
    "is_psd", "locc_bound", "locc_bound_from_povm", "numeric_fisher",
    "scheme_model", "scheme_povm", "trace_norm",
]
