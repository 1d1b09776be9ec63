import math

import numpy as np
import pytest
from scipy import integrate, stats

from dppkit import (FourierBasis, InvalidSpectrumError, PiecewiseProposal,
                    SpectralSamplerState, build_piecewise_proposal,
                    fourier_spectral_approx, gaussian_spectral_density,
                    matern_thin, sample_fourier)
from dppkit.fourier import (BoundPolynomial, most_repulsive_indices,
                            smallest_norm_indices)


# ------------------------------------------------------------- frequency sets

def test_most_repulsive_indices_block():
    J = most_repulsive_indices(2, 2)
    assert J.shape == (25, 2)
    assert len(np.unique(J, axis=0)) == 25
    assert np.any(np.all(J == 0, axis=1))
    # symmetric: J = -J as a set
    assert set(map(tuple, J)) == set(map(tuple, -J))


def test_smallest_norm_indices_properties():
    J5 = smallest_norm_indices(5, 2)
    assert set(map(tuple, J5)) == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    norms = (smallest_norm_indices(40, 2) ** 2).sum(axis=1)
    assert np.all(np.diff(norms) >= 0)
    # prefix property and agreement with the full block at n = (2l+1)^d
    J9 = smallest_norm_indices(9, 2)
    assert set(map(tuple, J9)) == set(map(tuple, most_repulsive_indices(1, 2)))
    assert [tuple(v) for v in smallest_norm_indices(7, 2)] == \
        [tuple(v) for v in J9[:7]]
    assert len(np.unique(smallest_norm_indices(100, 3), axis=0)) == 100


def test_fourier_basis_projection_flags():
    basis = FourierBasis.most_repulsive(2, 2)
    assert len(basis) == 25 and basis.is_projection
    assert basis.diag(np.array([[0.2, 0.7]]))[0] == pytest.approx(25.0)
    with pytest.raises(ValueError):
        FourierBasis([[0], [0]])


# ----------------------------------------------------------- quadratic bound

def test_bound_polynomial_hand_case():
    # J = {-1, 0, 1}: P(t) = 4 pi^2 (2 t^2 - 0) = 8 pi^2 t^2
    poly = BoundPolynomial(np.array([[-1], [0], [1]]))
    t = np.array([[0.25]])
    assert poly(t)[0] == pytest.approx(8 * math.pi ** 2 * 0.0625, rel=1e-12)
    assert poly(np.array([[0.0]]))[0] == 0.0
    assert poly.min_eig > 0


def test_bound_polynomial_matches_quadratic_form():
    rng = np.random.default_rng(0)
    for freqs in (most_repulsive_indices(2, 2), np.array([[0, 0], [1, 0], [2, 1]])):
        poly = BoundPolynomial(freqs)
        d = rng.standard_normal((40, 2)) * 0.3
        want = np.einsum("bi,ij,bj->b", d, poly.coeff, d)
        assert np.allclose(poly(d), want, rtol=1e-10, atol=1e-12)


def test_bound_dominates_conditional_density():
    # i p_i(x)/n <= min_k min(1, P(x - X_k)/n) on random states (spot check)
    rng = np.random.default_rng(8)
    basis = FourierBasis.most_repulsive(1, 2)
    poly = basis.bound_polynomial()
    n = len(basis)
    for _ in range(20):
        state = SpectralSamplerState(basis)
        for x in rng.random((int(rng.integers(1, 8)), 2)):
            state.add(x)
        probes = rng.random((50, 2))
        p, _ = state.pi(probes)
        lhs = state.i * p / n
        acc = np.asarray(state.accepted)
        diffs = probes[:, None, :] - acc[None, :, :]
        rhs = np.minimum(poly(diffs) / n, 1.0).min(axis=1)
        assert np.all(lhs <= rhs + 1e-10)


def test_envelope_scale_formula():
    # full blocks satisfy a^2 = pi^2 n (n^2 - 1) / 3
    for ell in (1, 3, 10):
        basis = FourierBasis.most_repulsive(ell, 1)
        n = 2 * ell + 1
        assert basis.envelope_scale() == pytest.approx(
            math.pi ** 2 * n * (n * n - 1) / 3, rel=1e-12)
    with pytest.raises(ValueError):
        FourierBasis.most_repulsive(1, 2).envelope_scale()


# ------------------------------------------------------------ d=1 proposal

def test_matern_thin_rules():
    rng = np.random.default_rng(1)
    assert matern_thin(np.empty(0), 0.1, 0.05, rng).size == 0
    # two conflicting points: exactly one survives
    kept = matern_thin(np.array([0.50, 0.53]), 0.1, 0.05, rng)
    assert kept.size == 1
    # border points dropped outright
    assert matern_thin(np.array([0.01, 0.99]), 0.1, 0.05, rng).size == 0
    pts = np.random.default_rng(2).random(80)
    kept = matern_thin(pts, 0.07, 0.03, rng)
    assert np.all(kept >= 0.03) and np.all(kept <= 0.97)
    if kept.size > 1:
        assert np.min(np.diff(np.sort(kept))) >= 0.07


def test_piecewise_proposal_validation():
    with pytest.raises(ValueError):
        PiecewiseProposal([0.01], a=50.0, n=25.0)  # center inside border margin
    with pytest.raises(ValueError):
        PiecewiseProposal([0.5, 0.5 + 0.1], a=50.0, n=25.0)  # wells overlap


def test_piecewise_total_matches_quadrature():
    basis = FourierBasis.most_repulsive(3, 1)  # n = 7
    a = math.sqrt(basis.envelope_scale())
    prop = PiecewiseProposal([0.3, 0.7], a=a, n=7.0)
    quad, err = integrate.quad(lambda x: float(prop.density(np.array([x]))[0]),
                               0.0, 1.0, limit=200,
                               points=[0.3 - prop.h, 0.3, 0.3 + prop.h,
                                       0.7 - prop.h, 0.7, 0.7 + prop.h])
    assert abs(prop.total - quad) <= 1e-8 * quad
    assert prop.cdf(np.array([1.0]))[0] == pytest.approx(prop.total, rel=1e-12)


def test_piecewise_cdf_ppf_roundtrip():
    basis = FourierBasis.most_repulsive(5, 1)  # n = 11
    a = math.sqrt(basis.envelope_scale())
    prop = PiecewiseProposal([0.2, 0.5, 0.8], a=a, n=11.0)
    rng = np.random.default_rng(3)
    x = rng.random(500)
    back = prop.ppf(prop.cdf(x))
    assert np.max(np.abs(back - x)) <= 1e-10
    # empty-center degenerate case: uniform scaled by n
    flat = PiecewiseProposal([], a=a, n=11.0)
    assert flat.total == pytest.approx(11.0)
    assert np.allclose(flat.ppf(np.array([5.5])), 0.5)
    assert np.allclose(flat.density(np.array([0.1, 0.9])), 11.0)


def test_piecewise_sampling_follows_cdf():
    basis = FourierBasis.most_repulsive(4, 1)
    a = math.sqrt(basis.envelope_scale())
    prop = PiecewiseProposal([0.35, 0.65], a=a, n=9.0)
    rng = np.random.default_rng(4)
    draws = prop.sample(rng, 20000)
    assert np.all((draws >= 0) & (draws <= 1))
    # exact CDF transform of the draws must look uniform
    u = prop.cdf(draws) / prop.total
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_build_piecewise_proposal_carves_wells():
    rng = np.random.default_rng(5)
    basis = FourierBasis.most_repulsive(10, 1)  # n = 21
    pts = np.sort(rng.random(20))
    prop = build_piecewise_proposal(pts, basis, rng)
    n = float(len(basis))
    assert prop.total < n  # mass removed around retained centers
    assert prop.density(np.array([prop.centers[0]]))[0] == 0.0


# ------------------------------------------------------------- exact sampling

def test_sample_fourier_counts_every_route():
    for method in ("plain", "refined", "inversion"):
        for fast in (True, False):
            basis = FourierBasis.most_repulsive(2, 1)
            rng = np.random.default_rng(17)
            pat = sample_fourier(basis, rng, method=method, fast=fast)
            assert len(pat) == 5
            assert np.all((pat.points >= 0) & (pat.points <= 1))
            assert pat.provenance["algorithm"] == f"fourier-{method}"


def test_sample_fourier_validates_inputs():
    rng = np.random.default_rng(0)
    ramp = fourier_spectral_approx(gaussian_spectral_density(10.0, 0.05, 2), 2, 2)
    with pytest.raises(ValueError):
        sample_fourier(ramp, rng)  # not a projection
    basis = FourierBasis.most_repulsive(1, 2)
    with pytest.raises(ValueError):
        sample_fourier(basis, rng, method="inversion")  # d=2 has no inversion route
    with pytest.raises(ValueError):
        sample_fourier(basis, rng, method="warp")


def test_refined_counters_split_rejections():
    basis = FourierBasis.most_repulsive(3, 2)
    pat = sample_fourier(basis, np.random.default_rng(23), method="refined")
    c = pat.provenance["counters"]
    assert c["bound_rejections"] > 0
    assert c["bound_rejections"] + c["density_rejections"] == c["rejections"]
    assert c["proposals"] >= len(pat)


def test_methods_share_one_law():
    # pooled coordinates of a stationary model are uniform; all routes must agree
    rng = np.random.default_rng(29)
    basis = FourierBasis.most_repulsive(1, 2)
    pools = {}
    for method in ("plain", "refined"):
        xs = [sample_fourier(basis, rng, method=method).points[:, 0]
              for _ in range(400)]
        pools[method] = np.concatenate(xs)
    assert stats.kstest(pools["plain"], "uniform").pvalue > 0.01
    assert stats.kstest(pools["refined"], "uniform").pvalue > 0.01
    assert stats.ks_2samp(pools["plain"], pools["refined"]).pvalue > 0.01


def test_gaussian_spectral_density_values():
    phi = gaussian_spectral_density(rho=10.0, alpha=0.05, dim=2)
    amp = 10.0 * 0.05 ** 2 * math.pi
    assert phi(np.array([[0, 0]]))[0] == pytest.approx(amp, rel=1e-12)
    assert phi(np.array([[1, 1]]))[0] == pytest.approx(
        amp * math.exp(-math.pi ** 2 * 0.05 ** 2 * 2), rel=1e-12)


def test_fourier_spectral_approx_thinning_path():
    rho = 60.0
    alpha = 1.0 / math.sqrt(rho * math.pi)  # existence boundary
    basis = fourier_spectral_approx(gaussian_spectral_density(rho, alpha, 2), 4, 2)
    assert not basis.is_projection
    assert basis.eigenvalues.max() <= 1.0
    rng = np.random.default_rng(31)
    sub = basis.bernoulli_sample(rng)
    assert isinstance(sub, FourierBasis) and sub.is_projection
    pat = sample_fourier(sub, rng, method="refined")
    assert len(pat) == len(sub)
    bad = gaussian_spectral_density(rho * 2, alpha, 2)  # exceeds 1 at k = 0
    with pytest.raises(InvalidSpectrumError):
        fourier_spectral_approx(bad, 4, 2)
