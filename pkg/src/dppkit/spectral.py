"""Truncated spectral (Mercer) representations of DPP kernels.

A SpectralBasis bundles eigenvalues with a vectorized eigenfunction evaluator and
doubles as an evaluable kernel (matrix/diag) through the reconstruction
K(x, y) = sum_k lambda_k phi_k(x) conj(phi_k(y)).
"""
from __future__ import annotations

import numpy as np

from .domains import _as_points
from .errors import InvalidSpectrumError


class SpectralBasis:
    def __init__(self, eigenvalues, feature_fn, domain, meta=None):
        lam = np.atleast_1d(np.asarray(eigenvalues, dtype=float))
        if lam.ndim != 1 or len(lam) == 0:
            raise InvalidSpectrumError("eigenvalues must be a non-empty 1-D array")
        if np.any(~np.isfinite(lam)) or np.any(lam < -1e-12):
            raise InvalidSpectrumError("eigenvalues must be finite and non-negative")
        self.eigenvalues = np.clip(lam, 0.0, None)
        self._feature_fn = feature_fn
        self.domain = domain
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def is_projection(self):
        return bool(np.all(np.abs(self.eigenvalues - 1.0) <= 1e-9))

    def features(self, points):
        """(len(points), len(self)) array of eigenfunction values."""
        pts = _as_points(points, self.dim)
        F = self._feature_fn(pts)
        if F.shape != (pts.shape[0], len(self)):
            raise ValueError(f"feature evaluator returned shape {F.shape}")
        return F

    def trace(self):
        return float(self.eigenvalues.sum())

    def matrix(self, X, Y):
        FX = self.features(X)
        FY = self.features(Y)
        return (FX * self.eigenvalues) @ FY.conj().T

    def diag(self, X):
        F = self.features(X)
        return ((np.abs(F) ** 2) * self.eigenvalues).sum(axis=1).real

    def select(self, keep):
        """Sub-basis of the kept eigenfunctions, as a projection (unit eigenvalues)."""
        keep = np.asarray(keep)
        idx = np.flatnonzero(keep) if keep.dtype == bool else keep.astype(int)
        if len(idx) == 0:
            raise ValueError("empty selection")
        fn = self._feature_fn
        meta = dict(self.meta, selected=idx)
        return SpectralBasis(np.ones(len(idx)), lambda pts: fn(pts)[:, idx],
                             self.domain, meta)

    def bernoulli_sample(self, rng):
        """Draw the independent-thinning of the spectrum; None for the empty draw.

        Each eigenfunction survives independently with probability lambda_k, which
        requires every rate to lie in [0, 1].
        """
        lam = self.eigenvalues
        if np.any(lam > 1.0 + 1e-9):
            raise InvalidSpectrumError("Bernoulli selection needs rates in [0, 1]")
        mask = rng.random(len(lam)) < np.clip(lam, 0.0, 1.0)
        if not mask.any():
            return None
        return self.select(mask)


def spectral_trace(basis):
    """Sum of retained eigenvalues = expected cardinality of the truncated model."""
    return basis.trace()


def estimate_diag_bound(diag_fn, domain, probes=100_000, safety=1.05, rng=None):
    """Randomized upper envelope for sup_x K(x, x) over the domain."""
    rng = np.random.default_rng(0) if rng is None else rng
    best = 0.0
    remaining = int(probes)
    while remaining > 0:
        block = min(remaining, 4096)
        pts = domain.sample_uniform(rng, block)
        vals = np.asarray(diag_fn(pts), dtype=float)
        best = max(best, float(vals.max()))
        remaining -= block
    if best <= 0:
        raise ValueError("diagonal appears to vanish on the domain")
    return safety * best
