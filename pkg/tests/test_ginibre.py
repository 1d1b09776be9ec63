import math
import warnings

import numpy as np
import pytest
from scipy import integrate, special, stats

from dppkit import (ExistenceError, GinibreModel, beta_max, default_radius,
                    ginibre_spectral_basis, sample_ginibre_eigen,
                    sample_ginibre_spectral, truncation_order)


def _model(rho=20.0, frac=1.0):
    return GinibreModel(rho, frac * beta_max(rho))


def test_model_parameter_rules():
    assert default_radius() == pytest.approx(1.0 / math.sqrt(math.pi))
    m = _model(50.0)
    assert m.gamma == pytest.approx(1.0)
    assert _model(50.0, 0.5).gamma == pytest.approx(0.5)
    with pytest.raises(ExistenceError):
        GinibreModel(50.0, 1.05 * beta_max(50.0))
    with pytest.raises(ValueError):
        GinibreModel(-1.0, 0.1)
    with pytest.raises(ValueError):
        GinibreModel(1.0, 0.1, radius=0.0)


def test_truncation_order_is_minimal():
    from dppkit.ginibre import _log_error_bound
    for beta, eps in ((0.01, 1e-8), (0.002, 1e-10), (0.05, 1e-4)):
        R = default_radius()
        n = truncation_order(R, beta, eps)
        t = R * R / beta
        assert n > t
        assert _log_error_bound(t, n) <= math.log(eps)
        if n - 1 > t:
            assert _log_error_bound(t, n - 1) > math.log(eps)
    with pytest.raises(ValueError):
        truncation_order(1.0, 0.01, 0.0)


def test_eigenvalues_match_quadrature():
    # lambda_k = gamma * P(k+1, t): check the regularized incomplete gamma
    # against direct integration of u^k e^{-u} / k!
    model = _model(30.0)
    basis = ginibre_spectral_basis(model)
    t = model.radius ** 2 / model.beta
    for k in (0, 1, 5, 17):
        want, _ = integrate.quad(
            lambda u: math.exp(k * math.log(u) - u - special.gammaln(k + 1))
            if u > 0 else 0.0, 0.0, t, limit=200)
        assert basis.eigenvalues[k] == pytest.approx(model.gamma * want, rel=1e-10)


def test_spectral_trace_equals_expected_count():
    for rho, frac in ((20.0, 1.0), (100.0, 0.5)):
        model = _model(rho, frac)
        basis = ginibre_spectral_basis(model)
        want = rho * math.pi * model.radius ** 2
        assert basis.trace() == pytest.approx(want, abs=1e-6)


def test_eigenfunctions_are_orthonormal():
    # angular part is exact by symmetry; the radial norm must integrate to one
    model = _model(25.0)
    basis = ginibre_spectral_basis(model)

    def radial_mass(k):
        ln = basis.meta["lognorms"][k]
        val, _ = integrate.quad(
            lambda r: 2 * math.pi * r * math.exp(
                2 * k * math.log(r) - ln - r * r / model.beta)
            if r > 0 else 0.0, 0.0, model.radius, limit=200)
        return val

    for k in (0, 1, 4, 12):
        assert radial_mass(k) == pytest.approx(1.0, rel=1e-9)


def test_features_finite_at_origin():
    basis = ginibre_spectral_basis(_model(15.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        F = basis.features(np.array([[0.0, 0.0], [1e-200, 0.0]]))
    assert np.all(np.isfinite(F))
    assert F[0, 0] != 0.0
    assert np.all(np.abs(F[0, 1:]) < 1e-250)


def test_select_is_index_aware():
    basis = ginibre_spectral_basis(_model(15.0))
    idx = np.array([0, 3, 7])
    sub = basis.select(idx)
    assert sub.is_projection and len(sub) == 3
    pts = np.random.default_rng(0).random((20, 2)) * 0.3
    assert np.allclose(sub.features(pts), basis.features(pts)[:, idx], atol=1e-14)
    assert list(sub.meta["selected"]) == [0, 3, 7]


def test_kernel_reconstruction_on_disc():
    model = _model(10.0)
    basis = ginibre_spectral_basis(model)
    kernel = model.kernel()
    rng = np.random.default_rng(1)
    X = basis.domain.sample_uniform(rng, 40)
    K_full = kernel.matrix(X, X)
    lam_unthinned = basis.eigenvalues / model.gamma  # drop the thinning factor
    F = basis.features(X)
    K_trunc = (F * lam_unthinned) @ F.conj().T * model.rho * math.pi * model.beta
    assert np.max(np.abs(K_full - K_trunc)) < 1e-6 * model.rho


def test_eigen_route_counts_and_deletions():
    model = _model(20.0)
    rng = np.random.default_rng(2)
    counts = []
    for _ in range(100):
        pat = sample_ginibre_eigen(model, rng)
        assert np.all(pat.domain.contains(pat.points))
        prov = pat.provenance
        assert prov["matrix_size"] == truncation_order(model.radius, model.beta,
                                                       model.eps)
        assert prov["deleted"].shape[0] + len(pat) == prov["matrix_size"]
        counts.append(len(pat))
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - 20.0) < 3 * se
    lean = sample_ginibre_eigen(model, rng, keep_deleted=False)
    assert "deleted" not in lean.provenance


def test_spectral_route_counts():
    model = _model(20.0)
    rng = np.random.default_rng(3)
    counts = []
    basis = ginibre_spectral_basis(model)
    for _ in range(200):
        pat = sample_ginibre_spectral(model, rng, basis=basis)
        assert np.all(pat.domain.contains(pat.points))
        counts.append(len(pat))
    mean = np.mean(counts)
    se = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - 20.0) < 3 * se


def test_spectral_route_empty_draw():
    model = _model(0.1)
    rng = np.random.default_rng(4)
    sizes = [len(sample_ginibre_spectral(model, rng)) for _ in range(40)]
    assert 0 in sizes


def test_prebuilt_basis_changes_nothing():
    model = _model(15.0, 0.5)
    a = sample_ginibre_spectral(model, np.random.default_rng(9))
    b = sample_ginibre_spectral(model, np.random.default_rng(9),
                                basis=ginibre_spectral_basis(model))
    assert np.array_equal(a.points, b.points)


def test_routes_share_one_law():
    # pooled radial marginals of the two routes must agree
    model = _model(15.0)
    rng = np.random.default_rng(5)
    r_eigen = np.concatenate([
        np.linalg.norm(sample_ginibre_eigen(model, rng).points, axis=1)
        for _ in range(120)])
    r_spec = np.concatenate([
        np.linalg.norm(sample_ginibre_spectral(model, rng).points, axis=1)
        for _ in range(120)])
    assert stats.ks_2samp(r_eigen, r_spec).pvalue > 0.01
