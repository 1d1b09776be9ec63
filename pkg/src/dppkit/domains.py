"""Simulation windows (boxes and balls) and the point pattern container."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _as_points(x, dim=None):
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise ValueError(f"points must be (n, d), got shape {pts.shape}")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected d={dim}, got d={pts.shape[1]}")
    return pts


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by a (d, 2) array of [low, high] bounds."""

    bounds: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bounds, dtype=float))
        if b.shape[1] != 2 or np.any(b[:, 1] <= b[:, 0]):
            raise ValueError("bounds must be (d, 2) with low < high")
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self):
        return self.bounds.shape[0]

    @property
    def volume(self):
        return float(np.prod(self.bounds[:, 1] - self.bounds[:, 0]))

    def contains(self, points, tol=1e-9):
        pts = _as_points(points, self.dim)
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return np.all((pts >= lo - tol) & (pts <= hi + tol), axis=1)

    def sample_uniform(self, rng, size):
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return lo + (hi - lo) * rng.random((size, self.dim))

    def boundary_distance(self, points):
        pts = _as_points(points, self.dim)
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return np.minimum(pts - lo, hi - pts).min(axis=1)

    def set_covariance(self, diffs):
        """Volume of the window intersected with itself shifted by each diff vector."""
        d = np.atleast_2d(np.asarray(diffs, dtype=float))
        side = (self.bounds[:, 1] - self.bounds[:, 0]) - np.abs(d)
        return np.prod(np.clip(side, 0.0, None), axis=1)

    def iso_set_covariance(self, r):
        # isotropic version only used for pcf on boxes; average over a fine angle grid
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if self.dim == 1:
            return self.set_covariance(r[:, None])
        if self.dim != 2:
            raise NotImplementedError("isotropic set covariance for boxes needs d <= 2")
        ang = np.linspace(0.0, 2 * math.pi, 256, endpoint=False)
        u = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return np.array([self.set_covariance(ri * u).mean() for ri in r])


@dataclass(frozen=True)
class Ball:
    """Euclidean ball with given center and radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def volume(self):
        d = self.dim
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * self.radius ** d

    def contains(self, points, tol=1e-9):
        pts = _as_points(points, self.dim)
        return np.linalg.norm(pts - self.center, axis=1) <= self.radius + tol

    def sample_uniform(self, rng, size):
        d = self.dim
        u = rng.normal(size=(size, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radius * rng.random(size) ** (1.0 / d)
        return self.center + r[:, None] * u

    def boundary_distance(self, points):
        pts = _as_points(points, self.dim)
        return self.radius - np.linalg.norm(pts - self.center, axis=1)

    def iso_set_covariance(self, r):
        """Intersection volume of two balls of this radius at distance r."""
        t = np.clip(np.atleast_1d(np.asarray(r, dtype=float)), 0.0, None)
        R = self.radius
        out = np.zeros_like(t)
        inside = t < 2 * R
        ti = t[inside]
        if self.dim == 1:
            out[inside] = 2 * R - ti
        elif self.dim == 2:
            out[inside] = 2 * R * R * np.arccos(ti / (2 * R)) - 0.5 * ti * np.sqrt(
                np.clip(4 * R * R - ti * ti, 0.0, None))
        elif self.dim == 3:
            out[inside] = math.pi * (4 * R + ti) * (2 * R - ti) ** 2 / 12.0
        else:
            raise NotImplementedError("ball set covariance implemented for d <= 3")
        return out


def unit_box(dim):
    return Box(np.tile([0.0, 1.0], (dim, 1)))


def unit_ball(dim=2, radius=1.0):
    return Ball(np.zeros(dim), radius)


@dataclass
class PointPattern:
    """A finite point configuration with the window it lives in."""

    points: np.ndarray
    domain: object
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, self.domain.dim)
        pts = _as_points(pts, self.domain.dim)
        if len(pts) and not np.all(self.domain.contains(pts, tol=1e-9)):
            raise ValueError("points fall outside the stated domain")
        self.points = pts

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.domain.dim
