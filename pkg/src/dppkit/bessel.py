"""Bessel-type DPP on the unit disk via generalized prolate spectral blocks.

The planar kernel rho alpha J_1(2|x-y|/alpha)/|x-y| restricted to the unit disk
diagonalizes over angular orders N.  For each N the radial eigenfunctions expand
in the orthonormal Zernike-type basis T_{N,k}(r) = sqrt(2(2k+N+1)) r^{N+1/2}
P_k^{(N,0)}(1-2r^2), in which a commuting differential operator is symmetric
tridiagonal; its eigenvectors d^{N,n} give both the radial profiles R_{N,n} and,
through a small-r matching, the finite Hankel transform eigenvalues
lambda_{N,n}(c).  The DPP eigenvalues are mu_{N,n} = 2 pi rho alpha lambda^2
with c = 2/alpha, each N >= 1 level carrying multiplicity two (cosine and sine
angular factors).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .domains import PointPattern, unit_ball
from .errors import NumericalIntegrityError, TruncationError
from .kernels import BesselKernel, require_existence
from .sampler import DEFAULT_CAP, SpectralSamplerState, UniformStrategy, run_chain
from .spectral import SpectralBasis, estimate_diag_bound


def jacobi_p0_table(N, k_max, x):
    """P_k^{(N,0)}(x) for k = 0..k_max, shape (len(x), k_max+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    P = np.empty((x.shape[0], k_max + 1))
    P[:, 0] = 1.0
    if k_max >= 1:
        P[:, 1] = 0.5 * (N + 2) * x + 0.5 * N
    for k in range(2, k_max + 1):
        c1 = 2 * k * (k + N) * (2 * k + N - 2)
        c2 = (2 * k + N - 1) * (2 * k + N) * (2 * k + N - 2)
        c3 = (2 * k + N - 1) * N * N
        c4 = 2 * (k + N - 1) * (k - 1) * (2 * k + N)
        P[:, k] = ((c2 * x + c3) * P[:, k - 1] - c4 * P[:, k - 2]) / c1
    return P


def zernike_eval(N, k, r):
    """T_{N,k}(r) = sqrt(2(2k+N+1)) r^{N+1/2} P_k^{(N,0)}(1-2r^2), orthonormal on [0,1]."""
    r = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r).ravel()
    P = jacobi_p0_table(N, k, 1.0 - 2.0 * flat * flat)[:, k]
    out = math.sqrt(2 * (2 * k + N + 1)) * flat ** (N + 0.5) * P
    return out.reshape(r.shape) if r.ndim else float(out[0])


@dataclass
class ProlateOperator:
    """Symmetric tridiagonal operator block at angular order N and bandwidth c."""

    N: int
    c: float
    k_max: int
    diagonal: np.ndarray = field(repr=False)
    offdiagonal: np.ndarray = field(repr=False)


def prolate_operator(N, c, k_max=None):
    """Tridiagonal entries b_{k,k} and b_{k,k+1} of the order-N prolate block.

    The N = 0, k = 0 diagonal ratio N^2/((2k+N)(2k+N+2)) is a 0/0 form defined
    as 0 by continuity.
    """
    if k_max is None:
        k_max = int(math.ceil(2 * c + 30))
    k = np.arange(k_max + 1, dtype=float)
    den = (2 * k + N) * (2 * k + N + 2)
    frac = np.divide(float(N * N), den, out=np.zeros_like(den), where=den > 0)
    diag = -(c * c / 2.0) * (1.0 + frac) - (2 * k + N + 0.5) * (2 * k + N + 1.5)
    ko = k[:-1]
    off = (c * c * (ko + 1) * (ko + N + 1)
           / ((2 * ko + N + 2) * np.sqrt((2 * ko + N + 1) * (2 * ko + N + 3))))
    return ProlateOperator(int(N), float(c), int(k_max), diag, off)


def _signed_log_lambda(N, c, V):
    """(sign, log|lambda_{N,n}|) for each eigenvector column d of V.

    lambda = c^{N+1/2} d_0 / (2^{N+1} sqrt(N+1) sum_k d_k sqrt(2k+N+1) (N+k)!/k!),
    with the binomial growth absorbed in log space.
    """
    k = np.arange(V.shape[0], dtype=float)
    lk = (np.log(np.abs(V) + 1e-300)
          + 0.5 * np.log(2 * k + N + 1)[:, None]
          + (gammaln(N + k + 1) - gammaln(k + 1))[:, None])
    m = lk.max(axis=0)
    S = (np.sign(V) * np.exp(lk - m)).sum(axis=0)
    log_sum = m + np.log(np.abs(S) + 1e-300)
    log_lam = ((N + 0.5) * math.log(c) + np.log(np.abs(V[0]) + 1e-300)
               - (N + 1) * math.log(2.0) - 0.5 * math.log(N + 1.0) - log_sum)
    sign = np.where(S < 0, -1.0, 1.0)
    return sign, log_lam


class ProlateFunction:
    """One radial prolate mode: coefficients, Hankel eigenvalue, and evaluator."""

    def __init__(self, N, n, c, coeffs, sign, log_abs_eigenvalue):
        self.N = int(N)
        self.n = int(n)
        self.c = float(c)
        self.coeffs = coeffs
        self.eigenvalue = float(sign * math.exp(log_abs_eigenvalue))
        self.log_abs_eigenvalue = float(log_abs_eigenvalue)

    def radial(self, r):
        """R_{N,n}(r): sqrt(r) R_{N,n}(r) = sum_k d_k T_{N,k}(r)."""
        r = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r).ravel()
        k = np.arange(len(self.coeffs), dtype=float)
        w = self.coeffs * np.sqrt(2 * (2 * k + self.N + 1))
        P = jacobi_p0_table(self.N, len(self.coeffs) - 1, 1.0 - 2.0 * flat * flat)
        out = (P @ w) * flat ** self.N
        return out.reshape(r.shape) if r.ndim else float(out[0])


def prolate_functions(op):
    """Eigenmodes of a ProlateOperator, ordered by decreasing concentration.

    Eigenvectors are unit-norm with the d_0 > 0 sign convention; eigenvalues
    lambda_{N,n}(op.c) are signed reals evaluated in log space.
    """
    w, V = eigh_tridiagonal(op.diagonal, op.offdiagonal)
    V = V[:, ::-1]
    flip = np.where(V[0] < 0, -1.0, 1.0)
    V = V * flip
    sign, log_lam = _signed_log_lambda(op.N, op.c, V)
    return [ProlateFunction(op.N, n, op.c, V[:, n], sign[n], log_lam[n])
            for n in range(V.shape[1])]


def _radial_block(N, c, k_max=None):
    """(log_lambda_sq, W) for order N: log squared Hankel eigenvalues (descending
    concentration) and the Jacobi-series weights W[k, n] = d_k sqrt(2(2k+N+1))."""
    op = prolate_operator(N, c, k_max)
    w, V = eigh_tridiagonal(op.diagonal, op.offdiagonal)
    V = V[:, ::-1]
    flip = np.where(V[0] < 0, -1.0, 1.0)
    V = V * flip
    _, log_lam = _signed_log_lambda(N, c, V)
    k = np.arange(V.shape[0], dtype=float)
    nu = np.sqrt(2 * (2 * k + N + 1))
    return 2.0 * log_lam, V * nu[:, None]


class BesselDiskBasis(SpectralBasis):
    """Spectral basis whose features are grouped by angular order.

    blocks[N] = (mu_array, W_matrix); layout rows are (N, column, kind) with kind
    0 for the radial N = 0 modes and 1/2 for cosine/sine factors at N >= 1.
    """

    def __init__(self, eigenvalues, blocks, layout, domain, meta=None):
        self.blocks = blocks
        self.layout = np.asarray(layout, dtype=int)
        super().__init__(eigenvalues, self._eval, domain, meta)

    def _eval(self, pts):
        r = np.sqrt((pts ** 2).sum(axis=1))
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        x = 1.0 - 2.0 * r * r
        out = np.empty((pts.shape[0], len(self.layout)), dtype=complex)
        for N in np.unique(self.layout[:, 0]):
            rows = np.flatnonzero(self.layout[:, 0] == N)
            cols = self.layout[rows, 1]
            W = self.blocks[int(N)][1]
            P = jacobi_p0_table(N, W.shape[0] - 1, x)
            radial = (P @ W[:, cols]) * (r ** N)[:, None]
            if N == 0:
                out[:, rows] = radial / math.sqrt(2 * math.pi)
            else:
                ang = np.where(self.layout[rows, 2] == 1,
                               np.cos(N * theta)[:, None],
                               np.sin(N * theta)[:, None])
                out[:, rows] = radial * ang / math.sqrt(math.pi)
        return out

    def select(self, keep):
        keep = np.asarray(keep)
        idx = np.flatnonzero(keep) if keep.dtype == bool else keep.astype(int)
        if len(idx) == 0:
            raise ValueError("empty selection")
        meta = dict(self.meta, selected=idx)
        return BesselDiskBasis(np.ones(len(idx)), self.blocks, self.layout[idx],
                               self.domain, meta)


def bessel_spectral_basis(rho, alpha, *, N_max=None, n_max=None, k_max=None,
                          trace_frac=0.999, mode_tol=1e-12):
    """Truncated eigendecomposition of the disk-restricted Bessel kernel.

    With no explicit truncation, angular orders are added until the captured
    trace reaches trace_frac of the full trace rho pi.  Explicit (N_max, n_max,
    k_max) truncations are honored but must still capture 99% of the trace.
    """
    require_existence(BesselKernel(rho, alpha, dim=2))
    c = 2.0 / alpha
    log_scale = math.log(2 * math.pi * rho * alpha)
    explicit = N_max is not None
    floor = 0.99 * rho * math.pi
    target = floor if explicit else trace_frac * rho * math.pi
    last_order = N_max if explicit else int(math.ceil(3 * c + 80))
    blocks = {}
    layout = []
    eigvals = []
    total = 0.0
    done = False
    for N in range(last_order + 1):
        lg2, W = _radial_block(N, c, k_max)
        mu = np.exp(log_scale + lg2)
        if np.any(mu > 1.0 + 1e-9):
            raise NumericalIntegrityError(
                f"eigenvalue {mu.max():.6g} exceeds 1 at angular order {N}")
        mu = np.minimum(mu, 1.0)
        keep = np.flatnonzero(mu > mode_tol)
        if n_max is not None:
            keep = keep[keep < n_max + 1]
        if len(keep) == 0:
            done = total >= target
            break
        mult = 1 if N == 0 else 2
        blocks[N] = (mu[keep], W[:, keep])
        for j, col in enumerate(keep):
            if N == 0:
                layout.append((0, j, 0))
                eigvals.append(mu[col])
            else:
                layout.append((N, j, 1))
                layout.append((N, j, 2))
                eigvals.extend([mu[col], mu[col]])
        total += mult * float(mu[keep].sum())
        if not explicit and total >= target:
            done = True
            break
    else:
        done = total >= target
    if not done:
        raise TruncationError(
            f"captured trace {total:.6g} below target {target:.6g}; "
            "increase the truncation orders")
    meta = {"model": "bessel-disk", "rho": rho, "alpha": alpha, "c": c,
            "trace_captured": total, "n_orders": (max(blocks) + 1 if blocks else 0)}
    return BesselDiskBasis(np.asarray(eigvals), blocks, layout, unit_ball(2), meta)


def sample_bessel_d2(rho, alpha, rng, *, trace_frac=0.999, cap=DEFAULT_CAP,
                     probes=20_000, safety=1.05):
    """Exact-truncation Bessel sampler: Bernoulli spectrum draw then the chain."""
    basis = bessel_spectral_basis(rho, alpha, trace_frac=trace_frac)
    selected = basis.bernoulli_sample(rng)
    dom = unit_ball(2)
    if selected is None:
        return PointPattern(np.empty((0, 2)), dom,
                            {"algorithm": "bessel-disk", "n": 0})
    M = estimate_diag_bound(selected.diag, dom, probes=probes, safety=safety,
                            rng=rng)
    strategy = UniformStrategy(M, dom)
    state = SpectralSamplerState(selected)
    run_chain(state, strategy, rng, cap=cap)
    pts = np.asarray(state.accepted, dtype=float).reshape(state.n, -1)
    prov = {"algorithm": "bessel-disk", "n": state.n, "envelope": M,
            "n_eigenfunctions": len(basis),
            "trace_captured": basis.meta["trace_captured"],
            "counters": dict(state.counters)}
    return PointPattern(pts, dom, prov)
