"""Sequential exact sampling of projection DPPs.

Two interchangeable state representations drive the same chain rule
p_i(x) = (1/i) [K(x,x) - k_i*(x) K_i^{-1} k_i(x)]:

* SpectralSamplerState works from an orthonormal eigenfunction basis and updates a
  Gram-Schmidt frame (one orthonormal vector per accepted point).
* KernelSamplerState works from kernel evaluations only and grows a Cholesky
  factor of the accepted-point kernel matrix by rank-1 extensions.

Rejection strategies:

* UniformStrategy: uniform proposals with a diagonal envelope M >= sup K(x,x),
  acceptance probability i / (M |S|) at step i.
* DiagonalStrategy: proposals from the density K(x,x)/n, acceptance i/n.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import solve_triangular

from .domains import PointPattern, _as_points
from .errors import (ConditioningError, DegeneratePointError,
                     NumericalIntegrityError, StallError)
from .spectral import SpectralBasis, estimate_diag_bound

DEFAULT_CAP = 10_000_000

_WNORM_DEGENERATE = 1e-12
_WNORM_WARN = 1e-8
_NEGATIVE_SLACK = 1e-6
_COND_LIMIT = 1e12


class SpectralSamplerState:
    """Gram-Schmidt state for sampling from an orthonormal projection basis."""

    def __init__(self, basis):
        if not isinstance(basis, SpectralBasis):
            raise TypeError("SpectralSamplerState needs a SpectralBasis")
        if not basis.is_projection:
            raise ValueError("spectral sampling requires a projection basis "
                             "(all eigenvalues equal to 1)")
        self.basis = basis
        self.n = len(basis)
        self._E = np.zeros((self.n, self.n), dtype=complex)
        # conjugate frame maintained alongside to keep the hot products
        # conjugation-free (E rows and E^H columns grow together)
        self._EH = np.zeros((self.n, self.n), dtype=complex)
        self.m = 0
        self.accepted = []
        self.counters = {"proposals": 0, "rejections": 0}

    @property
    def i(self):
        """Number of points still to draw."""
        return self.n - self.m

    def _q(self, points):
        """Unnormalized conditional intensity i * p_i(x) and the kernel diagonal."""
        q, diag, _ = self._q_aux(points)
        return q, diag

    def _q_aux(self, points):
        F = self.basis.features(points)
        diag = (np.abs(F) ** 2).sum(axis=1)
        if self.m:
            C = F @ self._EH[:, :self.m]
            q = diag - (np.abs(C) ** 2).sum(axis=1)
        else:
            q = diag.copy()
        return q, diag, F

    def pi(self, points):
        """Conditional density p_i and kernel diagonal at the given points."""
        p, diag, _ = self.pi_aux(points)
        return p, diag

    def pi_aux(self, points):
        """pi() plus per-point payload rows that add() can reuse."""
        points = _as_points(points, self.basis.dim)
        q, diag, aux = self._q_aux(points)
        bad = q < -_NEGATIVE_SLACK * np.maximum(diag, 1e-300)
        if np.any(bad):
            raise NumericalIntegrityError(
                f"conditional density {q[bad].min():.3e} below roundoff tolerance")
        return np.clip(q, 0.0, None) / self.i, diag, aux

    def add(self, point, feature_row=None):
        """Accept a point: orthonormalize its feature vector into the frame."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        v = self.basis.features(point[None, :])[0] if feature_row is None \
            else feature_row
        if self.m:
            c = v @ self._EH[:, :self.m]
            w = v - self._E[:self.m].T @ c
        else:
            w = v
        norm = float(np.linalg.norm(w))
        if norm <= _WNORM_DEGENERATE:
            raise DegeneratePointError(
                f"residual feature norm {norm:.3e} at step i={self.i}")
        if norm <= _WNORM_WARN:
            warnings.warn(f"near-degenerate accepted point (|w| = {norm:.3e}); "
                          "renormalizing", RuntimeWarning)
        e = w / norm
        self._E[self.m] = e
        self._EH[:, self.m] = e.conj()
        self.m += 1
        self.accepted.append(point)


class KernelSamplerState:
    """Kernel-only state (no spectral form needed); Cholesky grows with each point."""

    def __init__(self, kernel, n):
        self.kernel = kernel
        self.n = int(n)
        if self.n < 1:
            raise ValueError("cardinality must be >= 1")
        self._L = np.zeros((self.n, self.n), dtype=complex)
        self.m = 0
        self.accepted = []
        self.counters = {"proposals": 0, "rejections": 0}

    @property
    def i(self):
        return self.n - self.m

    def _q(self, points):
        diag = np.asarray(self.kernel.diag(points), dtype=float)
        if self.m:
            A = np.asarray(self.accepted)
            Km = self.kernel.matrix(A, points)
            Y = solve_triangular(self._L[:self.m, :self.m], Km, lower=True)
            q = diag - (np.abs(Y) ** 2).sum(axis=0)
        else:
            q = diag.copy()
        return q, diag

    def pi(self, points):
        points = _as_points(points, self.kernel.dim)
        q, diag = self._q(points)
        bad = q < -_NEGATIVE_SLACK * np.maximum(diag, 1e-300)
        if np.any(bad):
            raise NumericalIntegrityError(
                f"conditional density {q[bad].min():.3e} below roundoff tolerance")
        return np.clip(q, 0.0, None) / self.i, diag

    def pi_aux(self, points):
        p, diag = self.pi(points)
        return p, diag, None

    def condition_estimate(self):
        if self.m == 0:
            return 1.0
        d = np.abs(np.diag(self._L[:self.m, :self.m]))
        return float((d.max() / d.min()) ** 2)

    def add(self, point, feature_row=None):
        point = np.atleast_1d(np.asarray(point, dtype=float))
        kxx = float(self.kernel.diag(point[None, :])[0])
        if self.m:
            A = np.asarray(self.accepted)
            kx = self.kernel.matrix(A, point[None, :])[:, 0]
            b = solve_triangular(self._L[:self.m, :self.m], kx, lower=True)
            dsq = kxx - float((np.abs(b) ** 2).sum())
        else:
            b = np.zeros(0, dtype=complex)
            dsq = kxx
        if dsq <= 0.0:
            raise ConditioningError(
                "conditioning matrix numerically singular while adding a point",
                cond=self.condition_estimate())
        self._L[self.m, :self.m] = b.conj()
        self._L[self.m, self.m] = np.sqrt(dsq)
        self.m += 1
        self.accepted.append(point)
        cond = self.condition_estimate()
        if cond > _COND_LIMIT:
            raise ConditioningError(
                f"conditioning matrix condition estimate {cond:.3e} exceeds "
                f"{_COND_LIMIT:.1e}", cond=cond)


def eval_pi(state, points):
    """Conditional density p_i at the given points for the current state."""
    return state.pi(points)[0]


def update_state(state, point):
    """Fold an accepted/conditioning point into the state."""
    state.add(point)
    return state


class UniformStrategy:
    """Strategy 2: uniform proposals against a diagonal envelope M."""

    name = "uniform"

    def __init__(self, M, domain, diag_fn=None, probes=100_000):
        self.M = float(M)
        self.domain = domain
        if self.M <= 0:
            raise ValueError("envelope M must be positive")
        if diag_fn is not None:
            # randomized validation of M >= sup K(x,x)
            probe_rng = np.random.default_rng(0)
            vals = np.asarray(diag_fn(domain.sample_uniform(probe_rng, int(probes))))
            worst = float(vals.max())
            if worst > self.M * (1 + 1e-9):
                raise ValueError(f"envelope M={self.M:.6g} below observed diagonal "
                                 f"value {worst:.6g}")

    @classmethod
    def from_diagonal(cls, diag_fn, domain, probes=100_000, safety=1.05, rng=None):
        M = estimate_diag_bound(diag_fn, domain, probes=probes, safety=safety, rng=rng)
        return cls(M, domain)

    def propose(self, rng, size):
        return self.domain.sample_uniform(rng, size)

    def accept_prob(self, i, p, diag):
        return i * p / self.M


class DiagonalStrategy:
    """Strategy 1: proposals from K(x,x)/n via a caller-supplied sampler."""

    name = "diagonal"

    def __init__(self, sampler_fn, n):
        self.sampler_fn = sampler_fn
        self.n = int(n)

    def propose(self, rng, size):
        return self.sampler_fn(rng, size)

    def accept_prob(self, i, p, diag):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(diag > 0, i * p / np.where(diag > 0, diag, 1.0), 0.0)
        return r


def _draw_next(state, strategy, rng, cap):
    """One batched rejection loop: (accepted point, reusable payload row)."""
    i = state.i
    if i <= 0:
        raise ValueError("state already holds n points")
    n = state.n
    used = 0
    batch = int(min(max(16, 3 * n // max(i, 1)), 8192))
    while used < cap:
        Z = strategy.propose(rng, batch)
        U = rng.random(batch)
        p, diag, aux = state.pi_aux(Z)
        acc = np.flatnonzero(strategy.accept_prob(i, p, diag) > U)
        if acc.size:
            j = int(acc[0])
            state.counters["proposals"] += j + 1
            state.counters["rejections"] += j
            return Z[j], (aux[j] if aux is not None else None)
        used += batch
        state.counters["proposals"] += batch
        state.counters["rejections"] += batch
        batch = int(min(batch * 2, 65536))
    raise StallError(f"rejection cap {cap} exceeded at step i={i}",
                     step=i, counters=state.counters)


def draw_next_point(state, strategy, rng, cap=DEFAULT_CAP):
    """One batched rejection loop: returns the next accepted point (not yet added)."""
    return _draw_next(state, strategy, rng, cap)[0]


def run_chain(state, strategy, rng, cap=DEFAULT_CAP):
    """Draw the remaining i points of the chain into the state."""
    while state.i > 0:
        point, row = _draw_next(state, strategy, rng, cap)
        state.add(point, feature_row=row)
    return state


def sample_projection(source, rng, *, n=None, domain=None, strategy=None,
                      cap=DEFAULT_CAP):
    """Draw an exact sample of a projection DPP.

    source is either a projection SpectralBasis (spectral chain) or an evaluable
    kernel, in which case the cardinality n and proposal domain must be given.
    """
    if isinstance(source, SpectralBasis):
        state = SpectralSamplerState(source)
        dom = source.domain
        if strategy is None:
            strategy = UniformStrategy.from_diagonal(source.diag, dom)
        algorithm = "spectral"
    else:
        if n is None or domain is None:
            raise ValueError("kernel-path sampling needs n and domain")
        state = KernelSamplerState(source, n)
        dom = domain
        if strategy is None:
            strategy = UniformStrategy.from_diagonal(source.diag, dom)
        algorithm = "kernel"
    run_chain(state, strategy, rng, cap=cap)
    pts = np.asarray(state.accepted, dtype=float).reshape(state.n, -1)
    prov = {"algorithm": algorithm, "strategy": strategy.name,
            "counters": dict(state.counters), "n": state.n}
    return PointPattern(pts, dom, prov)
