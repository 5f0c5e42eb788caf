import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from weaklight.errors import DomainError, FisherDivergenceError, ModelError, SingularSupportError
from weaklight.fisher import (
    DEFAULT_POLICY,
    adaptive_direct_tree,
    adaptive_fisher_bound,
    cramer_rao,
    fisher_analytic,
    fisher_direct_analytic,
    fisher_gaussian,
    fisher_gjc_analytic,
    fisher_heterodyne_analytic,
    fisher_homodyne_analytic,
    fisher_numeric,
    is_psd,
    locc_bound,
    locc_bound_from_povm,
    numeric_fisher,
    scheme_povm,
    trace_norm,
)
from weaklight.povm_catalog import HeterodyneGrid, HomodyneGrid
from weaklight.thermal_model import CoherenceParams

SLOW = settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def test_direct_analytic_examples():
    np.testing.assert_allclose(fisher_direct_analytic(0.1, 0.6, 0.0), [[0.15625, 0], [0, 0]], atol=1e-15)
    np.testing.assert_allclose(fisher_direct_analytic(0.1, 0.6, np.pi / 2), [[0, 0], [0, 0.1]], atol=1e-15)
    assert np.linalg.eigvalsh(fisher_direct_analytic(0.37, 0.0, 1.1)).max() == pytest.approx(0.37)


def test_direct_analytic_divergence():
    with pytest.raises(FisherDivergenceError):
        fisher_direct_analytic(0.1, 1.0, 0.0)
    with pytest.raises(FisherDivergenceError):
        fisher_direct_analytic(0.1, -1j, np.pi / 2)


def test_gjc_and_local_analytic_examples():
    np.testing.assert_allclose(fisher_gjc_analytic(0.1, 0.6), [[0.078125, 0], [0, 0]], atol=1e-15)
    np.testing.assert_allclose(fisher_heterodyne_analytic(0.01), 5e-5 * np.eye(2), rtol=1e-14)
    np.testing.assert_allclose(fisher_homodyne_analytic(0.01, 0.0), [[1e-4, 0], [0, 0]], atol=1e-18)
    assert not fisher_heterodyne_analytic(0.0).any()
    assert trace_norm(fisher_homodyne_analytic(0.02, 0.7)) == pytest.approx(4e-4)
    with pytest.raises(ValueError):
        fisher_analytic("bogus", 0.1)


def test_numeric_direct_oracle():
    f = numeric_fisher("direct", 0.1, 0.6, 0.0)
    assert f[0, 0] == pytest.approx(0.15625, abs=1e-6)
    assert abs(f[0, 1]) < 1e-6 and abs(f[1, 1]) < 1e-6


@pytest.mark.parametrize("scheme", ["direct", "gjc", "heterodyne", "homodyne"])
def test_numeric_zero_eps(scheme):
    assert np.abs(numeric_fisher(scheme, 0.0, 0.3)).max() < 1e-12


def test_numeric_heterodyne_leading_order():
    f = numeric_fisher("heterodyne", 0.01, 0.0)
    np.testing.assert_allclose(np.diag(f), [5e-5, 5e-5], rtol=0.01)
    assert abs(f[0, 1]) < 1e-2 * 5e-5


@pytest.mark.parametrize("scheme", ["direct", "gjc"])
@SLOW
@given(
    eps=st.floats(1e-4, 0.05),
    r=st.floats(0, 0.95),
    phi=st.floats(0, 2 * np.pi),
    delta=st.floats(0, 2 * np.pi),
)
def test_numeric_matches_analytic_discrete(scheme, eps, r, phi, delta):
    g = r * np.exp(1j * phi)
    if abs((g * np.exp(-1j * delta)).real) > 0.95:
        return
    f_num = numeric_fisher(scheme, eps, g, delta)
    f_an = fisher_analytic(scheme, eps, g, delta)
    tol = np.maximum(1e-6, 0.02 * np.abs(f_an))
    assert np.all(np.abs(f_num - f_an) <= tol)


@pytest.mark.parametrize("scheme", ["heterodyne", "homodyne"])
@SLOW
@given(
    eps=st.floats(1e-4, 0.05),
    r=st.floats(0, 0.95),
    phi=st.floats(0, 2 * np.pi),
    delta=st.floats(0, 2 * np.pi),
)
def test_numeric_matches_leading_order_local(scheme, eps, r, phi, delta):
    f_num = numeric_fisher(scheme, eps, r * np.exp(1j * phi), delta)
    f_an = fisher_analytic(scheme, eps, 0.0, delta)
    assert np.abs(f_num - f_an).max() <= 10 * eps ** 3 + 1e-12


@pytest.mark.parametrize("scheme", ["heterodyne", "homodyne"])
def test_local_residual_decays_cubically(scheme):
    eps = np.array([0.001, 0.002, 0.005, 0.01, 0.02, 0.05])
    res = [abs(trace_norm(numeric_fisher(scheme, e, 0.0)) - e ** 2) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(res), 1)[0]
    assert slope >= 2.9


@pytest.mark.parametrize("scheme", ["heterodyne", "homodyne"])
def test_gaussian_fisher_agrees_with_weak_truncation(scheme):
    for eps in (1e-3, 1e-2):
        fg = fisher_gaussian(scheme, eps, 0.3 + 0.2j, 0.4)
        fn = numeric_fisher(scheme, eps, 0.3 + 0.2j, 0.4)
        assert np.abs(fg - fn).max() <= 10 * eps ** 3


def test_gaussian_fisher_heterodyne_closed_form_at_zero_coherence():
    # with g = 0 the outcome covariance is c I, c = 1 + eps/2
    eps = 0.1
    c = 1 + eps / 2
    np.testing.assert_allclose(fisher_gaussian("heterodyne", eps, 0.0), (eps ** 2 / (2 * c ** 2)) * np.eye(2), rtol=1e-13)


@given(eps=st.floats(0, 0.1), r=st.floats(0, 0.95), phi=st.floats(0, 2 * np.pi), delta=st.floats(0, 2 * np.pi))
@settings(max_examples=40, deadline=None)
def test_direct_trace_norm_at_least_eps(eps, r, phi, delta):
    g = r * np.exp(1j * phi)
    f = numeric_fisher("direct", eps, g, delta)
    assert is_psd(f)
    assert trace_norm(f) >= eps * (1 - 1e-6) - 1e-12


@pytest.mark.parametrize("eps", [0.001, 0.01, 0.05, 0.1])
def test_separation_gap(eps):
    f_het = trace_norm(numeric_fisher("heterodyne", eps, 0.2))
    f_hom = trace_norm(numeric_fisher("homodyne", eps, 0.2))
    f_dir = trace_norm(numeric_fisher("direct", eps, 0.2))
    bound = locc_bound(eps)
    assert f_het <= bound + 10 * eps ** 3
    assert f_hom <= bound + 10 * eps ** 3
    assert f_dir / max(f_het, f_hom) >= (1 - eps) / eps


def test_fisher_numeric_error_paths():
    with pytest.raises(ValueError):
        fisher_numeric(lambda g: np.array([1.0]), 0.0, step=0)
    with pytest.raises(ModelError):
        fisher_numeric(lambda g: np.array([1.1, -0.1]), 0.0)
    with pytest.raises(SingularSupportError):
        fisher_numeric(lambda g: np.array([1 - max(g.real, 0), max(g.real, 0)]), 0.0)
    # zero-probability outcome with zero derivative is dropped silently
    f = fisher_numeric(lambda g: np.array([0.5 + 0.1 * g.real, 0.5 - 0.1 * g.real, 0.0]), 0.0)
    assert f[0, 0] == pytest.approx(0.04, rel=1e-8)


def test_fisher_numeric_accepts_params():
    f = fisher_numeric(lambda g: np.array([0.5 + 0.1 * g.imag, 0.5 - 0.1 * g.imag]), CoherenceParams(0.1, 0.2, 0.0))
    assert f[1, 1] == pytest.approx(0.04, rel=1e-8)


def test_trace_norm_and_psd():
    assert trace_norm(np.zeros((2, 2))) == 0.0
    assert trace_norm([[1, 0], [0, -2]]) == 3.0
    assert is_psd(np.eye(2)) and not is_psd([[1, 0], [0, -1e-6]])


def test_cramer_rao_examples():
    crb = cramer_rao(fisher_direct_analytic(0.1, 0.6), 10_000)
    assert crb.variances[0] == pytest.approx(6.4e-4, rel=1e-12)
    assert np.isinf(crb.variances[1])
    assert crb.null_directions.shape == (1, 2)
    np.testing.assert_allclose(cramer_rao(np.eye(2)).covariance, np.eye(2))
    np.testing.assert_allclose(cramer_rao(fisher_heterodyne_analytic(0.01), 10 ** 6).variances, [0.02, 0.02], rtol=1e-12)
    assert np.all(np.isinf(cramer_rao(np.zeros((2, 2))).variances))
    with pytest.raises(ValueError):
        cramer_rao(np.eye(2), 0)


def test_locc_bound_values():
    assert locc_bound(0.1) == pytest.approx(0.1 ** 2 / 0.9)
    assert locc_bound(0.0) == 0.0
    for bad in (1.0, 1.2, -0.1):
        with pytest.raises(DomainError):
            locc_bound(bad)


def test_locc_bound_heterodyne_report():
    rep = locc_bound_from_povm(scheme_povm("heterodyne"), 0.1)
    assert rep.applicable and rep.satisfied
    assert rep.povm_specific_bound == pytest.approx(locc_bound(0.1), rel=5e-3)
    assert rep.fisher_trace_norm <= rep.locc_bound_value
    assert rep.margin > 0


def test_locc_bound_homodyne_and_direct_reports():
    rep = locc_bound_from_povm(scheme_povm("homodyne", 0.3), 0.05, g=0.4)
    assert rep.applicable and rep.satisfied
    d = locc_bound_from_povm(scheme_povm("direct"), 0.1, g=0.0)
    assert not d.applicable
    assert np.isinf(d.povm_specific_bound)
    assert d.fisher_trace_norm >= 0.1 - 1e-9
    z = locc_bound_from_povm(scheme_povm("heterodyne"), 0.0)
    assert z.fisher_trace_norm == pytest.approx(0.0, abs=1e-12) and z.satisfied


def test_adaptive_bound_examples():
    assert adaptive_fisher_bound([]) == 0.0
    f = fisher_heterodyne_analytic(0.01)
    assert adaptive_fisher_bound([f] * 7) == pytest.approx(7e-4)
    assert adaptive_fisher_bound([[np.eye(2), 3 * np.eye(2)], [np.eye(2)]]) == pytest.approx(8.0)


def test_adaptive_tree_default():
    tree = adaptive_direct_tree(0.1, 0.6 + 0.3j)
    assert tree.joint_trace_norm <= tree.bound + 1e-9
    assert len(tree.step_fishers[1]) == 3
    assert is_psd(tree.joint_fisher)


@given(
    eps=st.floats(1e-3, 0.3),
    r=st.floats(0, 0.9),
    phi=st.floats(0, 2 * np.pi),
    deltas=st.lists(st.floats(0, 2 * np.pi), min_size=4, max_size=4),
)
@settings(max_examples=40, deadline=None)
def test_adaptive_subadditivity(eps, r, phi, deltas):
    g = r * np.exp(1j * phi)
    if any(abs((g * np.exp(-1j * d)).real) > 0.9 for d in deltas):
        return
    policy = dict(zip(DEFAULT_POLICY, deltas[1:]))
    tree = adaptive_direct_tree(eps, g, deltas[0], policy)
    assert tree.joint_trace_norm <= tree.bound + 1e-9


def test_backends_agree(backend):
    f = numeric_fisher("heterodyne", 0.05, 0.3 - 0.1j, backend=backend)
    ref = numeric_fisher("heterodyne", 0.05, 0.3 - 0.1j, backend="python")
    np.testing.assert_allclose(f, ref, rtol=1e-9, atol=1e-15)


def test_coarse_grids_are_accepted():
    f = numeric_fisher("heterodyne", 0.01, 0.0, grid=HeterodyneGrid(n_radial=101, n_angle=32))
    assert trace_norm(f) == pytest.approx(1e-4, rel=0.02)
    f = numeric_fisher("homodyne", 0.01, 0.0, grid=HomodyneGrid(n=101))
    assert trace_norm(f) == pytest.approx(1e-4, rel=0.02)


@pytest.mark.parametrize("scheme,coef", [("heterodyne", -1.0), ("homodyne", -2.0)])
def test_next_order_coefficient(scheme, coef):
    # independent series expansion of the truncated model at g = 0:
    # ||F|| = eps^2 + coef eps^3 + O(eps^4)
    eps = 1e-3
    resid = (trace_norm(numeric_fisher(scheme, eps, 0.0)) - eps ** 2) / eps ** 3
    assert resid == pytest.approx(coef, rel=0.01)
