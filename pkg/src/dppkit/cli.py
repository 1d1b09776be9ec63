"""Command-line surface: simulate, condition, bench, validate.

Emits one CSV per replicate plus a JSON manifest (written last), optional SVG
scatters, and benchmark/validation reports.  A key=value config file can supply
any long flag; explicit command-line flags win.  Replicates run on a thread
pool sized by DPPSIM_THREADS with one spawned RNG stream each, so outputs are
byte-identical for a given (config, seed) regardless of scheduling.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .conditional import InpaintRegion, inpaint, simulate_given_subset
from .domains import Ball, Box, PointPattern, unit_box
from .errors import DppError
from .fourier import FourierBasis, sample_fourier, smallest_norm_indices
from .gaussian import InhomGaussianModel, sample_hom_gaussian_ball, \
    sample_inhom_gaussian
from .ginibre import GinibreModel, default_radius, sample_ginibre_eigen, \
    sample_ginibre_spectral
from .bessel import sample_bessel_d2
from .kernels import FourierProjectionKernel
from .stats import run_benchmark, validate_suite

_HEADERS = {1: ["x"], 2: ["x", "y"], 3: ["x", "y", "z"]}


# ---------------------------------------------------------------------------
# serialization helpers

def write_pattern_csv(pattern, path):
    """One row per point, header per dimension, shortest round-trip floats."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_HEADERS[pattern.dim])
        for row in pattern.points:
            w.writerow([repr(float(v)) for v in row])


def read_pattern_csv(path, domain=None):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    dim = len(rows[0])
    pts = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    pts = pts.reshape(-1, dim)
    if domain is None:
        domain = unit_box(dim)
    return PointPattern(pts, domain, {"source": str(path)})


def _svg_scatter(pattern, path, deleted=None):
    """Static SVG scatter: window outline, points, optional gray deleted points."""
    size, margin = 480.0, 20.0
    dom = pattern.domain
    if isinstance(dom, Box):
        lo = dom.bounds[:2, 0]
        hi = dom.bounds[:2, 1]
    else:
        lo = dom.center[:2] - dom.radius
        hi = dom.center[:2] + dom.radius
    span = float(max(hi - lo))

    def tx(p):
        q = (np.asarray(p, dtype=float)[:2] - lo) / span
        return (margin + q[0] * (size - 2 * margin),
                size - margin - q[1] * (size - 2 * margin))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'width="{size:.0f}" height="{size:.0f}">']
    if isinstance(dom, Box):
        x0, y1 = tx(lo)
        x1, y0 = tx(hi)
        parts.append(f'<rect x="{x0:.2f}" y="{y0:.2f}" width="{x1 - x0:.2f}" '
                     f'height="{y1 - y0:.2f}" fill="none" stroke="black"/>')
    else:
        cx, cy = tx(dom.center)
        r = dom.radius / span * (size - 2 * margin)
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
                     f'fill="none" stroke="black"/>')
    if deleted is not None and len(deleted):
        for p in np.atleast_2d(deleted):
            x, y = tx(p)
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" '
                         f'fill="gray"/>')
    for p in pattern.points:
        x, y = tx(p)
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="black"/>')
    parts.append("</svg>\n")
    Path(path).write_text("\n".join(parts))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def _write_manifest(outdir, manifest):
    path = Path(outdir) / "manifest.json"
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True)
                    + "\n")
    return path


# ---------------------------------------------------------------------------
# model resolution

def _alpha_max(rho, dim):
    return 1.0 / (rho ** (1.0 / dim) * math.sqrt(math.pi))


def _resolve_scale(value, rho, dim, kind):
    """'max' keywords resolve to the existence-boundary parameter values."""
    if isinstance(value, str) and value.strip().lower() == "max":
        return 1.0 / (rho * math.pi) if kind == "beta" else _alpha_max(rho, dim)
    return float(value)


def _build_draw(args):
    """(draw(rng) -> PointPattern, params dict, algorithm label) for simulate."""
    model = args.model
    if model == "fourier-proj":
        basis = FourierBasis.most_repulsive(args.ell, args.dim)
        algo = args.algo or "refined"

        def draw(rng):
            return sample_fourier(basis, rng, method=algo)

        return draw, {"ell": args.ell, "dim": args.dim, "n": len(basis)}, \
            f"fourier-{algo}"
    if model == "ginibre":
        beta = _resolve_scale(args.beta, args.rho, 2, "beta")
        radius = default_radius() if str(args.R).lower() == "auto" else float(args.R)
        gin = GinibreModel(args.rho, beta, radius)
        algo = args.algo or "spectral"
        fn = sample_ginibre_eigen if algo == "eigen" else sample_ginibre_spectral
        return (lambda rng: fn(gin, rng)), \
            {"rho": args.rho, "beta": beta, "R": radius}, f"ginibre-{algo}"
    if model == "gaussian":
        alpha = _resolve_scale(args.alpha, args.rho, args.dim, "alpha")
        return (lambda rng: sample_hom_gaussian_ball(args.rho, alpha, args.dim,
                                                     rng)), \
            {"rho": args.rho, "alpha": alpha, "dim": args.dim}, "gaussian-ball"
    if model == "gaussian-inhom":
        alpha = _resolve_scale(args.alpha, args.rho, args.dim, "alpha")
        gi = InhomGaussianModel(args.rho, alpha, args.sigma, args.dim)
        return (lambda rng: sample_inhom_gaussian(gi, rng)), \
            {"rho": args.rho, "alpha": alpha, "sigma": args.sigma,
             "dim": args.dim}, "gaussian-inhom"
    if model == "bessel":
        alpha = _resolve_scale(args.alpha, args.rho, 2, "alpha")
        return (lambda rng: sample_bessel_d2(args.rho, alpha, rng)), \
            {"rho": args.rho, "alpha": alpha}, "bessel-disk"
    raise ValueError(f"unknown model {model!r}")


def _pool_size(reps):
    env = os.environ.get("DPPSIM_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return max(1, min(int(reps), os.cpu_count() or 1))


def _resolve_seed(args):
    if args.seed is not None:
        return int(args.seed)
    return int(np.random.SeedSequence().entropy % (2 ** 32))


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args):
    draw, params, algo = _build_draw(args)
    seed = _resolve_seed(args)
    reps = int(args.reps)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    children = np.random.SeedSequence(seed).spawn(reps)

    def worker(k):
        rng = np.random.default_rng(children[k])
        t0 = time.perf_counter()
        pat = draw(rng)
        dt = time.perf_counter() - t0
        name = f"pattern_{k:04d}.csv"
        write_pattern_csv(pat, outdir / name)
        files = [name]
        if args.svg:
            sname = f"pattern_{k:04d}.svg"
            _svg_scatter(pat, outdir / sname,
                         deleted=pat.provenance.get("deleted"))
            files.append(sname)
        return {"replicate": k, "n": len(pat), "wall_time": dt,
                "counters": pat.provenance.get("counters", {}),
                "files": files}

    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=_pool_size(reps)) as pool:
        results = list(pool.map(worker, range(reps)))
    manifest = {"command": "simulate", "model": args.model, "params": params,
                "algorithm": algo, "seed": seed, "replicates": reps,
                "counts": [r["n"] for r in results], "results": results,
                "total_wall_time": time.perf_counter() - t0}
    _write_manifest(outdir, manifest)
    print(f"simulate: {reps} replicate(s) of {args.model} -> {outdir} "
          f"(seed {seed})")
    return 0


def _parse_region(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) % 2:
        raise ValueError("region needs an even number of lo,hi values")
    return Box(np.asarray(vals, dtype=float).reshape(-1, 2))


def cmd_condition(args):
    observed = read_pattern_csv(args.observed)
    m = len(observed)
    seed = _resolve_seed(args)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    reps = int(args.reps)
    children = np.random.SeedSequence(seed).spawn(reps)
    dim = observed.dim

    if args.mode == "palm":
        n = int(round(m / float(args.q))) if args.n is None else int(args.n)
        basis = FourierBasis(smallest_norm_indices(n, dim))

        def draw(rng):
            new = simulate_given_subset(basis, observed.points, rng)
            return new
    else:
        region = _parse_region(args.region)
        if args.n is None:
            full = unit_box(dim).volume
            rest = full - region.volume
            n = int(round(m * full / rest)) if rest > 0 else m
        else:
            n = int(args.n)
        base = FourierProjectionKernel(smallest_norm_indices(n, dim))
        problem = InpaintRegion(region, observed.points, n)

        def draw(rng):
            return inpaint(base, problem, rng)

    def worker(k):
        rng = np.random.default_rng(children[k])
        t0 = time.perf_counter()
        new = draw(rng)
        dt = time.perf_counter() - t0
        cname = f"complement_{k:04d}.csv"
        write_pattern_csv(new, outdir / cname)
        combined = PointPattern(
            np.vstack([observed.points, new.points]) if len(new)
            else observed.points,
            observed.domain, {"mode": args.mode})
        gname = f"combined_{k:04d}.csv"
        write_pattern_csv(combined, outdir / gname)
        return {"replicate": k, "n_new": len(new), "wall_time": dt,
                "files": [cname, gname]}

    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=_pool_size(reps)) as pool:
        results = list(pool.map(worker, range(reps)))
    manifest = {"command": "condition", "mode": args.mode, "m": m, "n": n,
                "seed": seed, "replicates": reps, "results": results,
                "observed": str(args.observed),
                "total_wall_time": time.perf_counter() - t0}
    _write_manifest(outdir, manifest)
    print(f"condition[{args.mode}]: m={m} n={n} -> {outdir} (seed {seed})")
    return 0


def _format_table(rows):
    if not rows:
        return "(empty)\n"
    cols = list(rows[0])
    widths = {c: max(len(c), *(len(_cell(r.get(c))) for r in rows))
              for c in cols}
    out = ["  ".join(c.ljust(widths[c]) for c in cols)]
    out.append("  ".join("-" * widths[c] for c in cols))
    for r in rows:
        out.append("  ".join(_cell(r.get(c)).ljust(widths[c]) for c in cols))
    return "\n".join(out) + "\n"


def _cell(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def cmd_bench(args):
    seed = _resolve_seed(args)
    rng = np.random.default_rng(seed)
    kwargs = {}
    if args.intensities:
        kwargs["intensities"] = tuple(int(v) for v in args.intensities.split(","))
    if args.models:
        kwargs["models"] = tuple(args.models.split(","))
    if args.rhos:
        kwargs["rhos"] = tuple(float(v) for v in args.rhos.split(","))
    report = run_benchmark(args.scenario, replicates=args.reps, rng=rng,
                           **kwargs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {"command": "bench", "scenario": args.scenario, "seed": seed,
               "replicates": report.replicates, "rows": report.rows,
               "timings": report.timings}
    (outdir / "report.json").write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    table = _format_table(report.rows)
    (outdir / "report.txt").write_text(table)
    print(table, end="")
    print(f"bench[{args.scenario}]: report -> {outdir} (seed {seed})")
    return 0


def cmd_validate(args):
    rng = np.random.default_rng(_resolve_seed(args))
    checks = validate_suite(args.suite, rng)
    failures = [name for name, ok in checks if not ok]
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if failures:
        print(f"{len(failures)} failing check(s): {', '.join(failures)}",
              file=sys.stderr)
        return 1
    print(f"validate[{args.suite}]: {len(checks)} checks passed")
    return 0


# ---------------------------------------------------------------------------
# parser / config plumbing

def _build_parser():
    p = argparse.ArgumentParser(prog="dppkit",
                                description="Simulation toolkit for "
                                            "determinantal point processes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (auto-drawn and echoed if absent)")
        sp.add_argument("--reps", type=int, default=1)
        sp.add_argument("--out", default="dppkit_output")
        sp.add_argument("--config", default=None,
                        help="key=value file supplying any long flag")

    sp = sub.add_parser("simulate", help="draw patterns from a model")
    common(sp)
    sp.add_argument("--model", required=True,
                    choices=["fourier-proj", "ginibre", "gaussian",
                             "gaussian-inhom", "bessel"])
    sp.add_argument("--ell", type=int, default=5)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--rho", type=float, default=100.0)
    sp.add_argument("--beta", default="max")
    sp.add_argument("--alpha", default="max")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--R", default="auto")
    sp.add_argument("--algo", default=None,
                    help="fourier: refined|plain|inversion; "
                         "ginibre: spectral|eigen")
    sp.add_argument("--svg", action="store_true")
    sp.add_argument("--format", choices=["csv"], default="csv")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("condition", help="conditional simulation")
    common(sp)
    sp.add_argument("--mode", required=True, choices=["palm", "inpaint"])
    sp.add_argument("--observed", required=True, help="CSV of observed points")
    sp.add_argument("--q", type=float, default=0.5,
                    help="palm: retention probability behind the observation")
    sp.add_argument("--n", type=int, default=None,
                    help="override the inferred total cardinality")
    sp.add_argument("--region", default="0.25,0.75,0.25,0.75",
                    help="inpaint region as lo,hi per axis")
    sp.set_defaults(fn=cmd_condition)

    sp = sub.add_parser("bench", help="benchmark tables")
    common(sp)
    sp.add_argument("--scenario", required=True, choices=["table1", "table2"])
    sp.add_argument("--models", default=None)
    sp.add_argument("--intensities", default=None)
    sp.add_argument("--rhos", default=None)
    sp.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("validate", help="quick acceptance suites")
    common(sp)
    sp.add_argument("--suite", default="all")
    sp.set_defaults(fn=cmd_validate)
    return p


def _expand_config(argv):
    """Prepend tokens from a key=value config file so explicit flags win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = argv[idx + 1]
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.extend([flag, value])
    # config tokens first so explicit flags override (argparse last-wins)
    return tokens + argv


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-"):
        argv = [argv[0]] + _expand_config(argv[1:])
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
