"""Gaussian-type DPPs: Hermite spectral machinery, inhomogeneous sampling, and a
thinning route to the homogeneous model on the unit ball.

The inhomogeneous kernel rho exp(-|y-x|^2/alpha^2) sqrt(p_sigma(x) p_sigma(y))
diagonalizes in products of Hermite functions with geometric eigenvalues
lambda_j = rho (2a/A)^{d/2} B^{j_1+...+j_d}, where a = 1/(4 sigma^2), b = 1/alpha^2,
c = sqrt(a^2 + 2ab), A = a + b + c, B = b/A.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .domains import PointPattern, unit_ball
from .errors import ExistenceError
from .kernels import GaussianKernel, InhomGaussianKernel
from .sampler import DEFAULT_CAP, SpectralSamplerState, UniformStrategy, run_chain
from .spectral import SpectralBasis, estimate_diag_bound


def hermite_functions(u, k_max):
    """Orthonormal Hermite functions h_0..h_{k_max} on the real line.

    Stable two-term recurrence h_{k+1} = u sqrt(2/(k+1)) h_k - sqrt(k/(k+1)) h_{k-1},
    starting from h_0 = pi^{-1/4} e^{-u^2/2}.
    """
    u = np.asarray(u, dtype=float)
    H = np.empty(u.shape + (k_max + 1,))
    H[..., 0] = math.pi ** -0.25 * np.exp(-u * u / 2.0)
    if k_max >= 1:
        H[..., 1] = math.sqrt(2.0) * u * H[..., 0]
    for k in range(1, k_max):
        H[..., k + 1] = (u * math.sqrt(2.0 / (k + 1)) * H[..., k]
                         - math.sqrt(k / (k + 1.0)) * H[..., k - 1])
    return H


class InhomGaussianModel:
    def __init__(self, rho, alpha, sigma, dim=2):
        self.kernel_spec = InhomGaussianKernel(rho, alpha, sigma, dim)
        self.rho = float(rho)
        self.alpha = float(alpha)
        self.sigma = float(sigma)
        self.dim = int(dim)
        self.a = 1.0 / (4.0 * sigma ** 2)
        self.b = 1.0 / alpha ** 2
        self.c = math.sqrt(self.a ** 2 + 2 * self.a * self.b)
        self.A = self.a + self.b + self.c
        self.B = self.b / self.A
        self.lambda_max = rho * (2 * self.a / self.A) ** (dim / 2.0)

    def existence(self):
        return self.kernel_spec.existence()

    def require_existence(self):
        rep = self.existence()
        if not rep.exists:
            raise ExistenceError(
                f"inhomogeneous Gaussian model does not exist "
                f"(lambda_0 = {self.lambda_max:.6g} > 1)")
        return rep

    def eigenvalue_1d(self, k):
        """Operator eigenvalue rho sqrt(2a/A) B^k of the d=1 kernel."""
        return self.rho * math.sqrt(2 * self.a / self.A) * self.B ** np.asarray(k)

    def eigenfunction_1d(self, k, x):
        """phi_k(x) = (2c)^{1/4} h_k(sqrt(2c) x)."""
        u = math.sqrt(2 * self.c) * np.asarray(x, dtype=float)
        return (2 * self.c) ** 0.25 * hermite_functions(u, int(k))[..., int(k)]

    def truncation_level(self, mass_tol):
        """Smallest ell with sum_{|j|_inf <= ell} lambda_j >= (1 - mass_tol) rho.

        Uses the closed-form truncated mass rho (1 - B^{ell+1})^d.
        """
        target = 1.0 - (1.0 - mass_tol) ** (1.0 / self.dim)
        return max(0, int(math.ceil(math.log(target) / math.log(self.B))) - 1)


class HermiteTensorBasis(SpectralBasis):
    """Tensor-product Hermite eigenbasis with index-aware selection.

    Selection rebuilds the evaluator over the kept multi-indices only, so a
    Bernoulli draw from a large truncated spectrum never materializes the full
    feature matrix.
    """

    def __init__(self, model, indices, eigenvalues=None):
        self.model = model
        self.indices = np.atleast_2d(np.asarray(indices, dtype=int))
        d = model.dim
        scale = math.sqrt(2 * model.c)
        amp = (2 * model.c) ** (d / 4.0)
        k_max = int(self.indices.max())
        idx = self.indices

        def feats(pts):
            F = None
            for t in range(d):
                H = hermite_functions(scale * pts[:, t], k_max)
                cols = H[:, idx[:, t]]
                F = cols if F is None else F * cols
            return (amp * F).astype(complex)

        if eigenvalues is None:
            eigenvalues = model.lambda_max * model.B ** idx.sum(axis=1)
        dom = unit_ball(d, radius=6 * model.sigma + 6 / scale)
        super().__init__(eigenvalues, feats, dom,
                         meta={"model": "gaussian-inhom"})

    def select(self, keep):
        keep = np.asarray(keep)
        idx = np.flatnonzero(keep) if keep.dtype == bool else keep.astype(int)
        if len(idx) == 0:
            raise ValueError("empty selection")
        sub = HermiteTensorBasis(self.model, self.indices[idx],
                                 eigenvalues=np.ones(len(idx)))
        sub.meta = dict(self.meta, selected=idx)
        return sub


def inhom_gaussian_basis(model, *, ell=None, mass_tol=1e-4):
    """Spectral basis of the inhomogeneous Gaussian kernel truncated at |j|_inf <= ell."""
    if ell is None:
        ell = model.truncation_level(mass_tol)
    d = model.dim
    ranges = [np.arange(ell + 1)] * d
    grids = np.meshgrid(*ranges, indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    basis = HermiteTensorBasis(model, idx)
    basis.meta["ell"] = int(ell)
    return basis


def sample_inhom_gaussian(model, rng, *, eps=1e-4, cap=DEFAULT_CAP,
                          probes=20_000, safety=1.1):
    """Bernoulli spectrum selection plus the sequential chain on a chi-square window.

    The window is the centered ball of radius sigma sqrt(chi2_d(1-eps)), which holds
    all but an eps fraction of the intensity mass.
    """
    model.require_existence()
    basis = inhom_gaussian_basis(model, mass_tol=eps)
    radius = model.sigma * math.sqrt(stats.chi2.ppf(1.0 - eps, df=model.dim))
    window = unit_ball(model.dim, radius)
    selected = basis.bernoulli_sample(rng)
    if selected is None:
        return PointPattern(np.empty((0, model.dim)), window,
                            {"algorithm": "gaussian-inhom", "n": 0})
    M = estimate_diag_bound(selected.diag, window, probes=probes, safety=safety,
                            rng=rng)
    strategy = UniformStrategy(M, window)
    state = SpectralSamplerState(selected)
    run_chain(state, strategy, rng, cap=cap)
    pts = np.asarray(state.accepted, dtype=float).reshape(state.n, -1)
    prov = {"algorithm": "gaussian-inhom", "n": state.n, "envelope": M,
            "window_radius": radius, "counters": dict(state.counters)}
    return PointPattern(pts, window, prov)


def scaled_intensity(rho, sigma, dim):
    """rho~_sigma = rho sigma^d (2 pi)^{d/2} e^{1/(2 sigma^2)}: the inhomogeneous
    intensity parameter whose thinned restriction to the unit ball is homogeneous rho."""
    return rho * sigma ** dim * (2 * math.pi) ** (dim / 2) * math.exp(
        1.0 / (2 * sigma ** 2))


def _feasible(rho, alpha, sigma, dim):
    rt = scaled_intensity(rho, sigma, dim)
    u = rt ** (1.0 / dim)
    return 2 * sigma ** 2 / alpha ** 2 - (u * u - u) >= 0


def optimize_sigma0(rho, alpha, dim):
    """Profile width minimizing rho~_sigma subject to existence of the scaled model.

    The unconstrained minimizer is sigma^2 = 1/d; when the scaled model fails to
    exist there, the smallest feasible sigma above it is located by bisection
    (rho~ is increasing past the minimizer, so that boundary is the constrained
    optimum; below the minimizer rho~ only grows and feasibility only worsens).
    """
    rep = GaussianKernel(rho, alpha, dim).existence()
    if not rep.exists:
        raise ExistenceError(
            f"homogeneous Gaussian target does not exist "
            f"(rho alpha^d pi^(d/2) = {rep.value:.6g} > 1)")
    sigma_star = 1.0 / math.sqrt(dim)
    if _feasible(rho, alpha, sigma_star, dim):
        return sigma_star
    lo, hi = sigma_star, 2 * sigma_star
    while not _feasible(rho, alpha, hi, dim):
        hi *= 2.0
        if hi > 1e6:
            raise ExistenceError("no feasible profile width found")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _feasible(rho, alpha, mid, dim):
            hi = mid
        else:
            lo = mid
    return hi


def thinning_profile(points, sigma0):
    """Retention probability q(x) = exp((|x|^2 - 1)/(2 sigma0^2)) on the unit ball."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r2 = (pts ** 2).sum(axis=1)
    q = np.exp((r2 - 1.0) / (2 * sigma0 ** 2))
    q[r2 > 1.0] = 0.0
    return q


def sample_hom_gaussian_ball(rho, alpha, dim, rng, *, eps=1e-4, cap=DEFAULT_CAP):
    """Homogeneous Gaussian DPP on the unit ball by inhomogeneous simulation + thinning.

    Three steps: choose the cheapest feasible profile width sigma_0; simulate the
    inhomogeneous model with intensity parameter rho~_{sigma_0}; thin with
    q(x) = exp((|x|^2-1)/(2 sigma_0^2)) 1_{|x| <= 1}, which restores the constant
    intensity rho on the ball.
    """
    sigma0 = optimize_sigma0(rho, alpha, dim)
    rho_t = scaled_intensity(rho, sigma0, dim)
    model = InhomGaussianModel(rho_t, alpha, sigma0, dim)
    pat = sample_inhom_gaussian(model, rng, eps=eps, cap=cap)
    q = thinning_profile(pat.points, sigma0) if len(pat) else np.zeros(0)
    keep = rng.random(len(pat)) < q
    pts = pat.points[keep]
    prov = {"algorithm": "gaussian-ball", "sigma0": sigma0,
            "rho_scaled": rho_t, "n_inhom": len(pat), "n_kept": int(keep.sum())}
    prov.update({k: v for k, v in pat.provenance.items() if k == "counters"})
    return PointPattern(pts, unit_ball(dim), prov)
