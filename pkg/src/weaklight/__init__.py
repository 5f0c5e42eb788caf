"""Local versus nonlocal measurement of weak bipartite thermal light.

Fisher information for direct, shared-entanglement, heterodyne and homodyne
detection; the LOCC upper bound; Monte Carlo maximum-likelihood studies;
and strong-light SNR formulas.
"""

from .errors import (
    DomainError,
    FisherDivergenceError,
    ModelError,
    NormalizationError,
    SingularSupportError,
)
from .fisher import (
    cramer_rao,
    fisher_analytic,
    fisher_numeric,
    locc_bound,
    locc_bound_from_povm,
    numeric_fisher,
    trace_norm,
)
from .kernels import BACKEND
from .povm_catalog import (
    born_distribution,
    check_ppt_cauchy_schwarz,
    direct_detection_povm,
    gjc_entangled_povm,
    heterodyne_povm,
    homodyne_povm,
)
from .thermal_model import CoherenceParams, build_coherence_matrix, weak_density_operator

__version__ = "0.1.0"
