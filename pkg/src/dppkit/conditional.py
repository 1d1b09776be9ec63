"""Conditional simulation: Palm kernels, subset conditioning, in-painting.

Conditioning a projection DPP on m observed points leaves a projection DPP of
cardinality n - m whose kernel is the Schur complement
K_y(x, x') = K(x, x') - k_m*(x) K_m^{-1} k_m(x'); restricting that kernel to a
sub-window A (with the observed points outside A) gives the in-painting law.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cholesky, solve_triangular

from .domains import PointPattern, _as_points
from .errors import (ConditioningError, DegeneratePointError,
                     InfeasibleSpectrumError, InvalidConditioningError)
from .fourier import FourierBasis
from .sampler import (DEFAULT_CAP, KernelSamplerState, SpectralSamplerState,
                      UniformStrategy, run_chain)
from .spectral import SpectralBasis, estimate_diag_bound


class PalmKernel:
    """Schur-complement kernel of a base kernel conditioned on fixed points."""

    def __init__(self, base, points):
        pts = _as_points(points, base.dim)
        if len(np.unique(pts, axis=0)) != len(pts):
            raise InvalidConditioningError("conditioning points contain duplicates")
        self.base = base
        self.points = pts
        Km = base.matrix(pts, pts)
        try:
            self._L = cholesky(Km, lower=True)
        except LinAlgError as exc:
            raise ConditioningError(
                "conditioning kernel matrix is not positive definite") from exc
        d = np.abs(np.diag(self._L))
        cond = float((d.max() / d.min()) ** 2)
        if cond > 1e12:
            raise ConditioningError(
                f"conditioning matrix condition estimate {cond:.3e}", cond=cond)

    @property
    def dim(self):
        return self.base.dim

    @property
    def m(self):
        return len(self.points)

    def _solve(self, X):
        return solve_triangular(self._L, self.base.matrix(self.points, X), lower=True)

    def matrix(self, X, Y):
        return self.base.matrix(X, Y) - self._solve(X).conj().T @ self._solve(Y)

    def diag(self, X):
        base = np.asarray(self.base.diag(X), dtype=float)
        return base - (np.abs(self._solve(X)) ** 2).sum(axis=0).real


def palm_kernel(base, points):
    """Palm (conditional) kernel; with no points this is the base kernel itself."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return base
    return PalmKernel(base, pts)


class RestrictedKernel:
    """Kernel multiplied by indicator functions of a sub-window."""

    def __init__(self, base, region):
        self.base = base
        self.region = region

    @property
    def dim(self):
        return self.base.dim

    def matrix(self, X, Y):
        X = _as_points(X, self.dim)
        Y = _as_points(Y, self.dim)
        ind_x = self.region.contains(X).astype(float)
        ind_y = self.region.contains(Y).astype(float)
        return self.base.matrix(X, Y) * np.outer(ind_x, ind_y)

    def diag(self, X):
        X = _as_points(X, self.dim)
        return np.asarray(self.base.diag(X), dtype=float) * self.region.contains(X)


def simulate_given_subset(basis, observed, rng, *, strategy=None, cap=DEFAULT_CAP):
    """Sample the remaining n - m points of a projection DPP given m observed ones.

    Runs the last n - m steps of the sequential chain after folding the observed
    points into the state. Returns only the newly drawn points.
    """
    if not isinstance(basis, SpectralBasis) or not basis.is_projection:
        raise ValueError("subset conditioning needs a projection basis")
    obs = _as_points(observed, basis.dim) if np.size(observed) else \
        np.empty((0, basis.dim))
    if len(obs) > len(basis):
        raise InvalidConditioningError("more observed points than the cardinality")
    state = SpectralSamplerState(basis)
    for y in obs:
        try:
            state.add(y)
        except DegeneratePointError as exc:
            raise InvalidConditioningError(
                "observed configuration has zero conditional density") from exc
    if strategy is None:
        if isinstance(basis, FourierBasis):
            strategy = UniformStrategy(float(len(basis)), basis.domain)
        else:
            strategy = UniformStrategy.from_diagonal(basis.diag, basis.domain)
    new_start = state.m
    run_chain(state, strategy, rng, cap=cap)
    pts = np.asarray(state.accepted[new_start:], dtype=float).reshape(
        state.n - new_start, basis.dim)
    prov = {"algorithm": "conditional-spectral", "m_observed": len(obs),
            "counters": dict(state.counters), "n": state.n}
    return PointPattern(pts, basis.domain, prov)


class InpaintRegion:
    """In-painting problem: window A to fill, observed points outside A, total n."""

    def __init__(self, region, outside_points, n):
        self.region = region
        pts = np.asarray(outside_points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, region.dim)
        self.outside = _as_points(pts, region.dim) if len(pts) else pts
        self.n = int(n)
        if len(self.outside) > self.n:
            raise InvalidConditioningError("more observed points than n")
        if len(self.outside) and np.any(region.contains(self.outside)):
            raise InvalidConditioningError("observed points must lie outside A")


def inpaint(base, problem, rng, *, probes=100_000, safety=1.05, cap=DEFAULT_CAP):
    """Fill the window A of an in-painting problem with the conditional DPP.

    The conditional law on A is a projection DPP with n - m points and kernel
    equal to the Palm kernel of the observed points restricted to A; it is run
    through the kernel-only chain with uniform proposals on A.
    """
    m = len(problem.outside)
    remaining = problem.n - m
    region = problem.region
    if remaining == 0:
        return PointPattern(np.empty((0, region.dim)), region,
                            {"algorithm": "inpaint", "m_observed": m, "n": problem.n})
    cond = palm_kernel(base, problem.outside)
    restricted = RestrictedKernel(cond, region)
    M = estimate_diag_bound(cond.diag, region, probes=probes, safety=safety)
    strategy = UniformStrategy(M, region)
    state = KernelSamplerState(restricted, remaining)
    run_chain(state, strategy, rng, cap=cap)
    pts = np.asarray(state.accepted, dtype=float).reshape(remaining, -1)
    prov = {"algorithm": "inpaint", "m_observed": m, "n": problem.n,
            "envelope": M, "counters": dict(state.counters)}
    return PointPattern(pts, region, prov)


def _retention_integral(q, dim):
    """Integral of the retention probability q over the unit box.

    q may be a constant or a vectorized evaluator; evaluators are integrated by a
    midpoint tensor grid (exact enough for the smooth retentions used here).
    """
    if not callable(q):
        return float(q)
    per_axis = {1: 4096, 2: 64, 3: 16}.get(dim, 8)
    g = (np.arange(per_axis) + 0.5) / per_axis
    grids = np.meshgrid(*([g] * dim), indexing="ij")
    pts = np.stack([a.ravel() for a in grids], axis=1)
    return float(np.mean(np.asarray(q(pts), dtype=float)))


def select_projection_kernel(m, q, spectrum, rng, *, dim=2,
                             max_redraws=10_000, shell_tol=1e-3):
    """Draw a Fourier frequency set from Bernoulli(phi) given at least m successes.

    spectrum maps integer frequency rows to retention-scaled rates in [0, 1]; q is
    the retention probability over the unit box (constant or evaluator), so the
    implied intensity estimate is m / integral(q) (recorded in the result).  The
    candidate set is the smallest symmetric frequency box whose rate mass covers m
    and whose outer shell contributes < shell_tol of the running mass.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    q_integral = _retention_integral(q, dim)
    if q_integral <= 0:
        raise ValueError("retention integral must be positive")
    ell = 0
    freqs = np.zeros((1, dim), dtype=int)
    rates = np.clip(np.asarray(spectrum(freqs), dtype=float), 0.0, 1.0)
    total = rates.sum()
    while True:
        ell += 1
        r = np.arange(-ell, ell + 1)
        grids = np.meshgrid(*([r] * dim), indexing="ij")
        cand = np.stack([g.ravel() for g in grids], axis=1)
        shell = cand[np.abs(cand).max(axis=1) == ell]
        shell_rates = np.clip(np.asarray(spectrum(shell), dtype=float), 0.0, 1.0)
        freqs = np.vstack([freqs, shell])
        rates = np.concatenate([rates, shell_rates])
        new_total = rates.sum()
        if new_total >= m and (new_total - total) <= shell_tol * max(new_total, 1e-300):
            total = new_total
            break
        total = new_total
        if ell > 10_000:
            raise InfeasibleSpectrumError(
                f"spectrum mass {total:.3g} cannot reach m={m}")
    if len(freqs) < m:
        raise InfeasibleSpectrumError(
            f"only {len(freqs)} candidate frequencies for m={m}")
    for _ in range(int(max_redraws)):
        mask = rng.random(len(rates)) < rates
        if int(mask.sum()) >= m:
            basis = FourierBasis(freqs[mask])
            basis.meta["intensity_estimate"] = m / q_integral
            basis.meta["candidate_mass"] = float(total)
            return basis
    raise InfeasibleSpectrumError(
        f"no draw with >= {m} active frequencies in {max_redraws} attempts")
