"""Validation estimators and the benchmark harness.

Second-order summaries (pair correlation, Ripley K) over replicate patterns with
bootstrap standard errors, Poisson/binomial reference generators, timing tables
for the refined Fourier sampler and the two Ginibre routes, and the quick check
suites behind the command-line `validate` entry point.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .domains import Box, PointPattern, unit_ball
from .errors import InsufficientDataError
from .fourier import (FourierBasis, fourier_spectral_approx,
                      gaussian_spectral_density, sample_fourier)
from .ginibre import (GinibreModel, ginibre_spectral_basis,
                      sample_ginibre_eigen, sample_ginibre_spectral)

_BOOTSTRAP = 200


@dataclass
class Curve:
    """Radial summary curve: per-radius mean over patterns plus bootstrap SE."""

    radii: np.ndarray
    values: np.ndarray
    se: np.ndarray
    n_patterns: int


@dataclass
class SummaryReport:
    scenario: str
    replicates: int
    rows: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    mean_count: float | None = None
    se_count: float | None = None
    intensity_map: np.ndarray | None = None
    pcf: Curve | None = None
    ripley: Curve | None = None


def _check_patterns(patterns, radii, min_patterns):
    if len(patterns) < min_patterns:
        raise InsufficientDataError(
            f"need at least {min_patterns} patterns, got {len(patterns)}")
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if len(radii) == 0 or np.any(np.diff(radii) <= 0):
        raise InsufficientDataError("radii must be a strictly increasing grid")
    if sum(len(p) for p in patterns) == 0:
        raise InsufficientDataError("all patterns are empty")
    return radii


def _sphere_surface(dim, r):
    if dim == 1:
        return np.full_like(np.asarray(r, dtype=float), 2.0)
    if dim == 2:
        return 2 * math.pi * r
    return 4 * math.pi * r ** 2


def _pair_geometry(pattern):
    """(distances, set-covariance weights) over unordered point pairs."""
    pts = pattern.points
    iu = np.triu_indices(len(pts), k=1)
    diffs = pts[iu[0]] - pts[iu[1]]
    dist = np.sqrt((diffs ** 2).sum(axis=1))
    dom = pattern.domain
    if isinstance(dom, Box):
        gamma = dom.set_covariance(diffs)
    else:
        gamma = dom.iso_set_covariance(dist)
    return dist, gamma


def _bootstrap_se(per_pattern, rng):
    """Columnwise SE of the mean by resampling pattern indices."""
    B = len(per_pattern)
    draws = rng.integers(0, B, size=(_BOOTSTRAP, B))
    means = np.nanmean(per_pattern[draws], axis=1)
    return np.nanstd(means, axis=0, ddof=1)


def estimate_pcf(patterns, radii, bandwidth=None, *, min_patterns=50):
    """Translation-corrected kernel estimate of the pair correlation function.

    Per-pattern Epanechnikov-smoothed pair counts are normalized by the window
    set covariance and the unbiased intensity-square estimate n(n-1)/|W|^2, then
    averaged across patterns; SEs are bootstrap over patterns.
    """
    radii = _check_patterns(patterns, radii, min_patterns)
    if np.any(radii <= 0):
        raise InsufficientDataError("pcf radii must be positive")
    dim = patterns[0].dim
    vol = patterns[0].domain.volume
    if bandwidth is None:
        pooled = np.mean([len(p) for p in patterns]) / vol
        if pooled <= 0:
            raise InsufficientDataError("pooled intensity is zero")
        bandwidth = 0.15 / math.sqrt(pooled)
    h = float(bandwidth)
    surf = _sphere_surface(dim, radii)
    rows = []
    for pat in patterns:
        n = len(pat)
        if n < 2:
            rows.append(np.full(len(radii), np.nan))
            continue
        dist, gamma = _pair_geometry(pat)
        ok = gamma > 0
        dist, gamma = dist[ok], gamma[ok]
        rho_sq = n * (n - 1) / vol ** 2
        u = (dist[:, None] - radii[None, :]) / h
        ker = np.where(np.abs(u) < 1.0, 0.75 * (1.0 - u * u) / h, 0.0)
        # factor 2: ker/gamma summed over unordered pairs, estimator over ordered
        rows.append(2.0 * (ker / gamma[:, None]).sum(axis=0) / (surf * rho_sq))
    per_pattern = np.asarray(rows)
    used = int(np.sum(~np.isnan(per_pattern[:, 0])))
    if used == 0:
        raise InsufficientDataError("no pattern has two or more points")
    values = np.nanmean(per_pattern, axis=0)
    se = _bootstrap_se(per_pattern, np.random.default_rng(0))
    return Curve(radii, values, se, used)


def estimate_K(patterns, radii, *, min_patterns=50):
    """Border-corrected Ripley K: averages of close-pair counts around points
    whose boundary distance exceeds the query radius; Poisson baseline pi r^2."""
    radii = _check_patterns(patterns, radii, min_patterns)
    vol = patterns[0].domain.volume
    rows = []
    for pat in patterns:
        n = len(pat)
        if n < 2:
            rows.append(np.full(len(radii), np.nan))
            continue
        pts = pat.points
        dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        border = pat.domain.boundary_distance(pts)
        lam = (n - 1) / vol
        vals = np.empty(len(radii))
        for j, r in enumerate(radii):
            interior = border >= r
            m = int(interior.sum())
            if m == 0:
                vals[j] = np.nan
                continue
            vals[j] = (dist[interior] <= r).sum() / (m * lam)
        rows.append(vals)
    per_pattern = np.asarray(rows)
    if np.all(np.isnan(per_pattern)):
        raise InsufficientDataError("no pattern has two or more points")
    values = np.nanmean(per_pattern, axis=0)
    se = _bootstrap_se(per_pattern, np.random.default_rng(0))
    used = int(np.sum(~np.isnan(per_pattern[:, 0])))
    return Curve(radii, values, se, used)


def sample_poisson(domain, rho, rng):
    n = rng.poisson(rho * domain.volume)
    pts = domain.sample_uniform(rng, int(n))
    return PointPattern(pts, domain, {"algorithm": "poisson", "n": int(n)})


def sample_binomial(domain, n, rng):
    pts = domain.sample_uniform(rng, int(n))
    return PointPattern(pts, domain, {"algorithm": "binomial", "n": int(n)})


def intensity_map(patterns, bins=10):
    """Pooled per-cell point counts over the window's bounding box."""
    dom = patterns[0].domain
    if isinstance(dom, Box):
        edges = [np.linspace(lo, hi, bins + 1) for lo, hi in dom.bounds]
    else:
        edges = [np.linspace(c - dom.radius, c + dom.radius, bins + 1)
                 for c in dom.center]
    pooled = np.vstack([p.points for p in patterns if len(p)])
    H, _ = np.histogramdd(pooled, bins=edges)
    return H


def _median_iqr(samples):
    q1, med, q3 = np.percentile(samples, [25, 50, 75])
    return float(med), float(q3 - q1)


def _timed(fn, reps, rng):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn(rng)
        times.append(time.perf_counter() - t0)
    return _median_iqr(times)


def _gauss_projection_draw(rho, alpha, rng):
    """One Bernoulli draw of the truncated Gaussian spectrum as a Fourier projection."""
    ell = int(math.ceil(4.6 / (math.pi * alpha)))
    approx = fourier_spectral_approx(
        gaussian_spectral_density(rho, alpha, 2), ell, 2)
    return approx.bernoulli_sample(rng)


def _table1_sampler(model, intensity):
    """Returns draw(rng, method) -> pattern-or-None for one Table-1 row."""
    if model == "most-repulsive":
        ell = (math.isqrt(int(intensity)) - 1) // 2
        if (2 * ell + 1) ** 2 != int(intensity):
            raise ValueError(f"intensity {intensity} is not an odd square")
        basis = FourierBasis.most_repulsive(ell, 2)

        def draw(rng, method="refined", fast=True):
            return sample_fourier(basis, rng, method=method, fast=fast)

        return draw
    factor = {"gauss-alpha-max": 1.0, "gauss-alpha-max/2": 0.5}[model]
    alpha = factor / math.sqrt(intensity * math.pi)

    def draw(rng, method="refined", fast=True):
        sel = _gauss_projection_draw(intensity, alpha, rng)
        if sel is None:
            return None
        return sample_fourier(sel, rng, method=method, fast=fast)

    return draw


def _bound_rate(provenance):
    c = provenance.get("counters", {})
    rej = c.get("bound_rejections", 0) + c.get("density_rejections", 0)
    return (c.get("bound_rejections", 0) / rej) if rej else np.nan


def run_benchmark(scenario, replicates=100, rng=None, *, timing_replicates=None,
                  models=None, intensities=None, rhos=None, beta_fracs=None,
                  time_all=False, sampler=None):
    """Timing/rate tables: 'table1' (refined-bound rates and on/off timing for
    Fourier projection models), 'table2' (Ginibre eigen vs spectral timing), or
    'custom' (summary statistics of a caller-supplied sampler)."""
    rng = np.random.default_rng(0) if rng is None else rng
    if timing_replicates is None:
        timing_replicates = min(int(replicates), 10)
    report = SummaryReport(scenario=scenario, replicates=int(replicates))

    if scenario == "table1":
        models = models or ("most-repulsive", "gauss-alpha-max", "gauss-alpha-max/2")
        intensities = intensities or (25, 81, 289, 625, 1089)
        for model in models:
            for n in intensities:
                draw = _table1_sampler(model, n)
                rates = []
                for _ in range(int(replicates)):
                    pat = draw(rng)
                    if pat is not None:
                        rates.append(_bound_rate(pat.provenance))
                row = {"model": model, "intensity": int(n),
                       "bound_rate": float(np.nanmean(rates)) if rates else np.nan}
                if time_all or model == "most-repulsive":
                    # ratios are about the regime where conditional-density
                    # evaluation dominates, so time the direct evaluator
                    on = _timed(lambda r: draw(r, "refined", False),
                                timing_replicates, rng)
                    off = _timed(lambda r: draw(r, "plain", False),
                                 timing_replicates, rng)
                    row.update(time_on=on[0], time_off=off[0],
                               time_ratio=on[0] / off[0] if off[0] > 0 else np.nan)
                    report.timings[f"{model}@{n}"] = {"on": on, "off": off}
                report.rows.append(row)
        return report

    if scenario == "table2":
        rhos = rhos or (100, 200, 400, 800)
        beta_fracs = beta_fracs or (1.0, 0.5, 1.0 / 3.0)
        for rho in rhos:
            for frac in beta_fracs:
                model = GinibreModel(rho, frac / (rho * math.pi))
                # basis construction is deterministic in the model and shared
                # across draws, so it stays outside the timed region
                basis = ginibre_spectral_basis(model)
                t_eigen = _timed(lambda r: sample_ginibre_eigen(model, r),
                                 timing_replicates, rng)
                t_spectral = _timed(
                    lambda r: sample_ginibre_spectral(model, r, basis=basis),
                    timing_replicates, rng)
                row = {"rho": float(rho), "beta_frac": float(frac),
                       "time_eigen": t_eigen[0], "time_spectral": t_spectral[0],
                       "fastest": "eigen" if t_eigen[0] <= t_spectral[0]
                       else "spectral"}
                report.rows.append(row)
                report.timings[f"rho={rho},beta={frac:g}bmax"] = {
                    "eigen": t_eigen, "spectral": t_spectral}
        return report

    if scenario == "custom":
        if sampler is None:
            raise ValueError("custom scenario needs a sampler(rng) callable")
        patterns = [sampler(rng) for _ in range(int(replicates))]
        counts = np.array([len(p) for p in patterns], dtype=float)
        report.mean_count = float(counts.mean())
        report.se_count = float(counts.std(ddof=1) / math.sqrt(len(counts))) \
            if len(counts) > 1 else 0.0
        report.intensity_map = intensity_map(patterns)
        span = (patterns[0].domain.volume) ** (1.0 / patterns[0].dim)
        radii = np.linspace(0.05, 0.35, 7) * span
        if len(patterns) >= 50 and counts.sum() > 0:
            report.pcf = estimate_pcf(patterns, radii)
            report.ripley = estimate_K(patterns, radii)
        report.rows.append({"mean_count": report.mean_count,
                            "se_count": report.se_count})
        return report

    raise ValueError(f"unknown scenario {scenario!r}")


# ---------------------------------------------------------------------------
# quick validation suites (deterministic, seconds each) for the CLI


def _suite_kernels(rng):
    from . import kernels
    checks = []
    specs = [kernels.GinibreKernel(100, 1 / (100 * math.pi)),
             kernels.GaussianKernel(50, 1 / math.sqrt(50 * math.pi), 2),
             kernels.BesselKernel(50, 1 / math.sqrt(50 * math.pi), 2)]
    ok = True
    for spec in specs:
        X = rng.random((40, 2))
        M = spec.matrix(X, X)
        ok &= bool(np.allclose(M, M.conj().T, atol=1e-12))
    checks.append(("hermitian-symmetry", ok))
    ok = True
    for spec in specs:
        for _ in range(50):
            x, y = rng.random(2), rng.random(2)
            ok &= kernels.pair_correlation(spec, x, y) <= 1 + 1e-12
    checks.append(("pcf-at-most-one", ok))
    checks.append(("existence-boundary",
                   kernels.GinibreKernel(100, 1 / (100 * math.pi)).existence().exists
                   and not kernels.GaussianKernel(2, 1, 2).existence().exists))
    return checks


def _suite_fourier(rng):
    from .fourier import BoundPolynomial, most_repulsive_indices
    from .sampler import SpectralSamplerState, update_state
    checks = []
    basis = FourierBasis.most_repulsive(2, 2)
    counts = [len(sample_fourier(basis, rng)) for _ in range(40)]
    checks.append(("cardinality-25", all(c == 25 for c in counts)))
    pat = sample_fourier(basis, rng)
    state = SpectralSamplerState(basis)
    for pt in pat.points[:20]:
        update_state(state, pt)
    i = len(basis) - 20
    probes = rng.random((200, 2))
    p, _ = state.pi(probes)
    poly = BoundPolynomial(most_repulsive_indices(2, 2))
    diffs = (probes[:, None, :] - pat.points[None, :20, :]).reshape(-1, 2)
    bound = np.minimum(1.0, poly(diffs).reshape(len(probes), 20)
                       / len(basis)).min(axis=1)
    checks.append(("bound-dominates",
                   bool(np.all(i * p / len(basis) <= bound + 1e-10))))
    return checks


def _suite_ginibre(rng):
    from .ginibre import ginibre_spectral_basis, truncation_order
    checks = []
    model = GinibreModel(100, 1 / (100 * math.pi))
    basis = ginibre_spectral_basis(model)
    trace = basis.trace()
    target = model.rho * math.pi * model.radius ** 2
    checks.append(("trace-identity", abs(trace - target) <= 1e-6))
    lam0 = basis.eigenvalues[0]
    t = model.radius ** 2 / model.beta
    closed = model.gamma * (1 - math.exp(-t))
    checks.append(("lambda0-closed-form", abs(lam0 - closed) <= 1e-12))
    n = truncation_order(model.radius, model.beta, 1e-10)
    checks.append(("truncation-exceeds-t", n > t))
    pat = sample_ginibre_eigen(model, rng)
    checks.append(("points-in-ball", bool(pat.domain.contains(pat.points).all())))
    return checks


def _suite_gaussian(rng):
    from .gaussian import (InhomGaussianModel, inhom_gaussian_basis,
                           optimize_sigma0, scaled_intensity, thinning_profile)
    checks = []
    model = InhomGaussianModel(1.0, 1.0, 1.0, dim=1)
    lam = inhom_gaussian_basis(model, ell=10).eigenvalues
    checks.append(("hand-eigenvalues",
                   bool(np.allclose(lam, 0.5 ** (np.arange(11) + 1), atol=1e-14))))
    rho, alpha, d = 50.0, 0.5 / math.sqrt(50 * math.pi), 2
    s0 = optimize_sigma0(rho, alpha, d)
    rt = scaled_intensity(rho, s0, d)
    scaled = InhomGaussianModel(rt, alpha, s0, d)
    checks.append(("sigma0-feasible", scaled.existence().exists))
    pts = unit_ball(2).sample_uniform(rng, 100)
    q = thinning_profile(pts, s0)
    r2 = (pts ** 2).sum(axis=1)
    ident = rt * np.exp(-r2 / (2 * s0 ** 2)) / (s0 * math.sqrt(2 * math.pi)) ** d * q
    checks.append(("thinning-restores-intensity",
                   bool(np.allclose(ident, rho, rtol=1e-12))))
    return checks


def _suite_bessel(rng):
    from .bessel import bessel_spectral_basis, prolate_operator, zernike_eval
    checks = []
    op1 = prolate_operator(1, 1.0, 8)
    op0 = prolate_operator(0, 1.0, 8)
    checks.append(("hand-diagonal",
                   abs(op1.diagonal[0] + 53 / 12) <= 1e-12
                   and abs(op0.diagonal[0] + 5 / 4) <= 1e-12))
    r = rng.random(50)
    t30 = zernike_eval(3, 0, r)
    checks.append(("zernike-closed-form",
                   bool(np.allclose(t30, math.sqrt(8) * r ** 3.5, atol=1e-12))))
    rho, alpha = 20.0, 1 / math.sqrt(20 * math.pi)
    basis = bessel_spectral_basis(rho, alpha)
    checks.append(("trace-captured",
                   basis.meta["trace_captured"] >= 0.999 * rho * math.pi))
    checks.append(("eigenvalues-at-most-one",
                   bool(np.all(basis.eigenvalues <= 1 + 1e-9))))
    return checks


def _suite_conditional(rng):
    from .conditional import PalmKernel, simulate_given_subset
    from .kernels import GinibreKernel
    checks = []
    spec = GinibreKernel(100, 1 / (100 * math.pi))
    y = rng.random((1, 2)) * 0.1
    palm = PalmKernel(spec, y)
    checks.append(("palm-zero-at-condition",
                   abs(palm.diag(y)[0]) <= 1e-9 * spec.rho))
    pts = rng.random((200, 2)) * 0.5
    checks.append(("palm-diagonal-nonnegative",
                   bool((palm.diag(pts) >= -1e-9 * spec.rho).all())))
    basis = FourierBasis.most_repulsive(1, 1)
    obs = np.array([[0.3]])
    pat = simulate_given_subset(basis, obs, rng)
    checks.append(("conditional-count", len(pat) == len(basis) - 1))
    return checks


_SUITES = {"kernels": _suite_kernels, "fourier": _suite_fourier,
           "ginibre": _suite_ginibre, "gaussian": _suite_gaussian,
           "bessel": _suite_bessel, "conditional": _suite_conditional}


def validate_suite(name, rng=None):
    """Run one named quick-check suite ('all' runs every suite); returns
    a list of (check_name, passed) pairs."""
    rng = np.random.default_rng(0) if rng is None else rng
    if name == "all":
        out = []
        for key in _SUITES:
            out.extend((f"{key}:{c}", ok) for c, ok in _SUITES[key](rng))
        return out
    if name not in _SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         f"{sorted(_SUITES)} or 'all'")
    return [(f"{name}:{c}", ok) for c, ok in _SUITES[name](rng)]
