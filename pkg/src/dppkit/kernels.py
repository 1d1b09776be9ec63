"""Closed-form DPP kernels: evaluation, existence checks, pair correlation.

Every kernel object exposes the same small surface:
    dim            ambient dimension
    matrix(X, Y)   complex kernel matrix [K(x_i, y_j)]
    diag(X)        real vector [K(x_i, x_i)]
    existence()    ExistenceReport
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .domains import _as_points
from .errors import ExistenceError, UndefinedPcfError


@dataclass(frozen=True)
class ExistenceReport:
    """Outcome of a spectral existence check: the process exists iff value <= bound."""

    exists: bool
    value: float
    bound: float


def _pair_matrix(kernel, X, Y):
    X = _as_points(X, kernel.dim)
    Y = _as_points(Y, kernel.dim)
    return X, Y


class FourierProjectionKernel:
    """Projection kernel sum_{j in J} exp(2 i pi j.(x-y)) on the unit box."""

    def __init__(self, freqs):
        J = np.atleast_2d(np.asarray(freqs, dtype=int))
        if len(np.unique(J, axis=0)) != len(J):
            raise ValueError("frequency set contains duplicates")
        self.freqs = J
        self.n = J.shape[0]

    @property
    def dim(self):
        return self.freqs.shape[1]

    def matrix(self, X, Y):
        X, Y = _pair_matrix(self, X, Y)
        # K(x,y) = sum_j e^{2 i pi j.(x-y)}
        fx = np.exp(2j * math.pi * (X @ self.freqs.T))
        fy = np.exp(2j * math.pi * (Y @ self.freqs.T))
        return fx @ fy.conj().T

    def diag(self, X):
        X = _as_points(X, self.dim)
        return np.full(X.shape[0], float(self.n))

    def existence(self):
        return ExistenceReport(True, 1.0, 1.0)


class GinibreKernel:
    """Ginibre-type kernel rho exp(x conj(y)/beta - (|x|^2+|y|^2)/(2 beta)) on the plane."""

    dim = 2

    def __init__(self, rho, beta):
        if rho <= 0 or beta <= 0:
            raise ValueError("rho and beta must be positive")
        self.rho = float(rho)
        self.beta = float(beta)

    def _z(self, X):
        return X[:, 0] + 1j * X[:, 1]

    def matrix(self, X, Y):
        X, Y = _pair_matrix(self, X, Y)
        zx, zy = self._z(X), self._z(Y)
        expo = (np.outer(zx, zy.conj()) / self.beta
                - (np.abs(zx) ** 2)[:, None] / (2 * self.beta)
                - (np.abs(zy) ** 2)[None, :] / (2 * self.beta))
        return self.rho * np.exp(expo)

    def diag(self, X):
        X = _as_points(X, self.dim)
        return np.full(X.shape[0], self.rho)

    def existence(self):
        value = self.rho * self.beta * math.pi
        return ExistenceReport(value <= 1.0 + 1e-12, value, 1.0)


class GaussianKernel:
    """Homogeneous Gaussian kernel rho exp(-|x-y|^2/alpha^2)."""

    def __init__(self, rho, alpha, dim=2):
        if rho <= 0 or alpha <= 0:
            raise ValueError("rho and alpha must be positive")
        self.rho = float(rho)
        self.alpha = float(alpha)
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    def matrix(self, X, Y):
        X, Y = _pair_matrix(self, X, Y)
        d2 = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)
        return self.rho * np.exp(-d2 / self.alpha ** 2) + 0j

    def diag(self, X):
        X = _as_points(X, self.dim)
        return np.full(X.shape[0], self.rho)

    def existence(self):
        value = self.rho * self.alpha ** self.dim * math.pi ** (self.dim / 2)
        return ExistenceReport(value <= 1.0 + 1e-12, value, 1.0)


class InhomGaussianKernel:
    """Gaussian kernel modulated by a N(0, sigma^2 I) intensity profile.

    K(x, y) = rho exp(-|y-x|^2/alpha^2) sqrt(p_sigma(x) p_sigma(y)) with p_sigma the
    isotropic normal density, so the intensity is rho p_sigma(x).
    """

    def __init__(self, rho, alpha, sigma, dim=2):
        if rho <= 0 or alpha <= 0 or sigma <= 0:
            raise ValueError("rho, alpha, sigma must be positive")
        self.rho = float(rho)
        self.alpha = float(alpha)
        self.sigma = float(sigma)
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    def density(self, X):
        X = _as_points(X, self.dim)
        norm = (self.sigma * math.sqrt(2 * math.pi)) ** self.dim
        return np.exp(-(X ** 2).sum(axis=1) / (2 * self.sigma ** 2)) / norm

    def matrix(self, X, Y):
        X, Y = _pair_matrix(self, X, Y)
        d2 = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)
        amp = np.sqrt(np.outer(self.density(X), self.density(Y)))
        return self.rho * np.exp(-d2 / self.alpha ** 2) * amp + 0j

    def diag(self, X):
        return self.rho * self.density(X)

    def existence(self):
        # 2 rho^{1/d} <= 1 + sqrt(1 + 8 sigma^2/alpha^2)
        value = 2 * self.rho ** (1.0 / self.dim)
        bound = 1.0 + math.sqrt(1.0 + 8.0 * self.sigma ** 2 / self.alpha ** 2)
        return ExistenceReport(value <= bound + 1e-12, value, bound)


class BesselKernel:
    """Bessel-type kernel rho Gamma(1+d/2) J_{d/2}(2|x-y|/alpha) / (|x-y|/alpha)^{d/2}."""

    def __init__(self, rho, alpha, dim=2):
        if rho <= 0 or alpha <= 0:
            raise ValueError("rho and alpha must be positive")
        self.rho = float(rho)
        self.alpha = float(alpha)
        self._dim = int(dim)

    @property
    def dim(self):
        return self._dim

    def _profile(self, s):
        """K(x,y)/rho as a function of the scaled distance s = |x-y|/alpha."""
        s = np.asarray(s, dtype=float)
        nu = self._dim / 2.0
        out = np.ones_like(s)
        big = s > 1e-8
        sb = s[big]
        out[big] = math.gamma(1 + nu) * special.jv(nu, 2 * sb) / sb ** nu
        return out

    def matrix(self, X, Y):
        X, Y = _pair_matrix(self, X, Y)
        dist = np.sqrt(((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2))
        return self.rho * self._profile(dist / self.alpha) + 0j

    def diag(self, X):
        X = _as_points(X, self.dim)
        return np.full(X.shape[0], self.rho)

    def existence(self):
        d = self.dim
        value = self.rho * self.alpha ** d * math.pi ** (d / 2) * math.gamma(1 + d / 2)
        return ExistenceReport(value <= 1.0 + 1e-12, value, 1.0)


def eval_kernel(kernel, x, y):
    """K(x, y) for a single pair of points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.shape[0] != kernel.dim:
        raise ValueError(f"x and y must both have dimension {kernel.dim}")
    return complex(kernel.matrix(x[None, :], y[None, :])[0, 0])


def check_existence(kernel):
    """ExistenceReport for the kernel's parameters."""
    return kernel.existence()


def require_existence(kernel):
    rep = kernel.existence()
    if not rep.exists:
        raise ExistenceError(
            f"{type(kernel).__name__} does not define a DPP: "
            f"spectral bound value {rep.value:.6g} exceeds {rep.bound:.6g}")
    return rep


def pair_correlation(kernel, x, y):
    """g(x, y) = 1 - |K(x,y)|^2 / (K(x,x) K(y,y)); <= 1 for any DPP kernel."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    kxx = float(kernel.diag(x[None, :])[0])
    kyy = float(kernel.diag(y[None, :])[0])
    if kxx <= 0.0 or kyy <= 0.0:
        raise UndefinedPcfError("pair correlation undefined where the intensity vanishes")
    kxy = eval_kernel(kernel, x, y)
    return 1.0 - abs(kxy) ** 2 / (kxx * kyy)
