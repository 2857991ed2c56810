"""Acceptance criteria as callable checks, shared by the CLI and the test suite.

Each ``criterion_*`` function runs one check at a given size and returns a
:class:`CriterionResult`.  :func:`verify_suite` runs all of them at the
``quick`` or ``full`` scale and writes per-criterion trial tables.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import analytics, oracles
from .cech import build_complex, complex_from_simplices
from .delaunay import delaunay_faces
from .harness import _write_csv, lambda_cell, result_columns, run_cells
from .homology import AUDIT, betti_numbers
from .manifold import ManifoldModel, flat_torus, sphere_with_volume, uniform_sample
from .morse import enumerate_critical_points, filter_critical
from .sampler import fixed_cloud, make_rng, poisson_process, subtrial_seed


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    rows: list = field(default_factory=list, repr=False)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] C{self.number} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - start
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _small_instance(rng, index: int, max_points: int = 25):
    """A random small cloud on T² or the unit S² with a radius below the convexity radius."""
    kind = "torus" if index % 2 == 0 else "sphere"
    m = ManifoldModel(kind, 2, 1.0)
    n = int(rng.integers(3, max_points + 1))
    pts = uniform_sample(m, rng, n)
    lam = rng.uniform(0.5, 12.0)
    r = min(analytics.radius_of_lambda(n, lam, 2, m.volume), 0.95 * m.convexity_radius)
    return m, pts, float(r)


@_timed
def criterion_complex_oracle(n_clouds: int = 200, seed: int = 1) -> CriterionResult:
    """Exhaustive subset enumeration reproduces the Čech complex exactly."""
    rng = make_rng(subtrial_seed(seed, 1))
    mismatches, compared = 0, 0
    for i in range(n_clouds):
        m, pts, r = _small_instance(rng, i)
        cx = build_complex(fixed_cloud(m, pts), r, dim_cap=m.d + 1)
        ref = oracles.brute_force_complex(m.kind, m.scale, pts, r, m.d + 1)
        got = cx.all_simplices()
        compared += len(ref)
        if got != ref:
            mismatches += 1
    return CriterionResult(1, "complex oracle", mismatches == 0,
                           f"{n_clouds} clouds, {compared} simplices, {mismatches} mismatches")


def _random_closed_complex(rng, n_vertices: int, n_max: int, max_dim: int) -> set:
    out = {(v,) for v in range(n_vertices)}
    for _ in range(n_max):
        size = int(rng.integers(2, max_dim + 2))
        top = tuple(sorted(rng.choice(n_vertices, size=size, replace=False).tolist()))
        for k in range(1, size + 1):
            out.update(itertools.combinations(top, k))
    return out


@_timed
def criterion_homology_oracle(n_complexes: int = 200, seed: int = 2,
                              max_simplices: int = 500) -> CriterionResult:
    """Dense GF(2) elimination reproduces the production Betti numbers."""
    rng = make_rng(subtrial_seed(seed, 2))
    mismatches, done, tries = 0, 0, 0
    while done < n_complexes and tries < 20 * n_complexes:
        tries += 1
        if done % 2 == 0:
            m, pts, r = _small_instance(rng, done, max_points=18)
            cx = build_complex(fixed_cloud(m, pts), r, dim_cap=m.d + 1)
            simplices = cx.all_simplices()
            top = cx.dim_cap
        else:
            m = flat_torus(2)
            nv = int(rng.integers(4, 14))
            simplices = _random_closed_complex(rng, nv, int(rng.integers(1, 25)), 3)
            top = max(len(s) for s in simplices) - 1
            cx = complex_from_simplices(m, simplices, dim_cap=top)
        if len(simplices) > max_simplices:
            continue
        done += 1
        got = betti_numbers(cx).betti[: top + 1]
        ref = oracles.dense_betti(simplices, top)
        if tuple(got) != tuple(ref):
            mismatches += 1
    return CriterionResult(2, "homology oracle", mismatches == 0 and done == n_complexes,
                           f"{done} complexes, {mismatches} mismatches")


@_timed
def criterion_euler_audit(n_complexes: int = 100, seed: int = 3) -> CriterionResult:
    """Euler–Poincaré holds on every complex whose homology has been computed."""
    rng = make_rng(subtrial_seed(seed, 3))
    for i in range(n_complexes):
        m = flat_torus(2) if i % 2 == 0 else sphere_with_volume(2)
        n = float(rng.integers(50, 400))
        lam = rng.uniform(1.0, 20.0)
        r = min(analytics.radius_of_lambda(n, lam, 2, m.volume), 0.9 * m.convexity_radius)
        cloud = poisson_process(m, n, int(rng.integers(0, 2**63)))
        betti_numbers(build_complex(cloud, r, method="delaunay"))
    ok = AUDIT["failures"] == 0 and AUDIT["complexes"] > 0
    return CriterionResult(3, "Euler–Poincaré audit", ok,
                           f"{AUDIT['complexes']} complexes audited, {AUDIT['failures']} failures")


@_timed
def criterion_critical_oracle(n_clouds: int = 100, seed: int = 4) -> CriterionResult:
    """Exhaustive enumeration with an LP hull test matches the critical points."""
    rng = make_rng(subtrial_seed(seed, 4))
    mismatches, total = 0, 0
    worst = 0.0
    for i in range(n_clouds):
        m, pts, r = _small_instance(rng, i)
        cloud = fixed_cloud(m, pts)
        for k in range(1, m.d + 1):
            got = {cp.generators: cp.radius for cp in enumerate_critical_points(cloud, k, 0.0, r)}
            ref = {s: rho for s, rho, _ in oracles.brute_force_critical(m.kind, m.scale, pts, k, 0.0, r)}
            total += len(ref)
            if set(got) != set(ref):
                mismatches += 1
                continue
            for key, rho in ref.items():
                worst = max(worst, abs(got[key] - rho))
    ok = mismatches == 0 and worst <= 1e-9
    return CriterionResult(4, "critical-point oracle", ok,
                           f"{n_clouds} clouds, {total} critical points, {mismatches} mismatched "
                           f"sets, max radius gap {worst:.2e}")


def _status_counts(rows):
    bad = [r for r in rows if r["status"] != "pass"]
    return len(bad), (bad[0]["status"] if bad else "")


@_timed
def criterion_morse(trials: int = 200, n: float = 2000, lams=(8.0, 12.0, 16.0),
                    seed: int = 5) -> CriterionResult:
    """Weak and relative Morse inequalities on every trial."""
    m = flat_torus(2)
    cells = [lambda_cell(m, i, n, lam, seed, run_morse=True) for i, lam in enumerate(lams)]
    rows = run_cells(cells, trials)
    bad, first = _status_counts(rows)
    certified = sum(1 for r in rows if r["coverage_r0"])
    return CriterionResult(5, "Morse inequalities", bad == 0,
                           f"{len(rows)} trials, {certified} with coverage at r0, {bad} failures"
                           + (f": {first}" if first else ""),
                           rows=rows)


@_timed
def criterion_theta(trials: int = 100, n: float = 5000, seed: int = 6,
                    epsilon: float = 0.1, lam: float | None = None) -> CriterionResult:
    """β_1 is at least the Θ-cycle count on every trial."""
    m = flat_torus(2)
    if lam is None:
        lam = analytics.threshold_lambda(n, 1, 0.0)
    cell = lambda_cell(m, 0, n, lam, seed, run_theta=True, epsilon=epsilon)
    rows = run_cells([cell], trials)
    bad, first = _status_counts(rows)
    total = sum(r["theta1"] or 0 for r in rows)
    return CriterionResult(6, "Θ lower bound", bad == 0,
                           f"{len(rows)} trials at Λ={lam:.3f}, {total} Θ-cycles, {bad} failures"
                           + (f": {first}" if first else ""),
                           rows=rows)


_PHASE_CACHE: dict = {}


def phase_transition_rows(trials: int, n: float, seed: int, offset: float = 6.0):
    """Rows for the upper (Λ = log n + log log n + c) and lower (log n − log log n − c) cells."""
    key = (trials, n, seed, offset)
    if key not in _PHASE_CACHE:
        m = flat_torus(2)
        upper = analytics.threshold_lambda(n, 1, offset)
        lower = analytics.threshold_lambda(n, -1, -offset)
        cells = [lambda_cell(m, 0, n, upper, seed, run_coverage=True),
                 lambda_cell(m, 1, n, lower, seed, run_coverage=True)]
        _PHASE_CACHE[key] = run_cells(cells, trials)
    return _PHASE_CACHE[key]


@_timed
def criterion_upper_branch(trials: int = 100, n: float = 1e4, seed: int = 7,
                           threshold: float = 0.90, offset: float = 6.0) -> CriterionResult:
    rows = [r for r in phase_transition_rows(trials, n, seed, offset) if r["cell"] == 0]
    frac = sum(1 for r in rows if r["full_match"]) / len(rows)
    lo, hi = analytics.wilson_interval(round(frac * len(rows)), len(rows))
    bad, first = _status_counts(rows)
    ok = frac >= threshold and bad == 0
    return CriterionResult(7, "upper branch", ok,
                           f"full match fraction {frac:.3f} (Wilson 95% [{lo:.3f}, {hi:.3f}]) "
                           f"needs >= {threshold}; {bad} failed trials"
                           + (f": {first}" if first else ""), rows=rows)


@_timed
def criterion_lower_branch(trials: int = 100, n: float = 1e4, seed: int = 7,
                           offset: float = 6.0) -> CriterionResult:
    rows = phase_transition_rows(trials, n, seed, offset)
    up = [r for r in rows if r["cell"] == 0]
    low = [r for r in rows if r["cell"] == 1]
    up_frac = sum(1 for r in up if r["full_match"]) / len(up)
    low_frac = sum(1 for r in low if r["betti1"] == 2) / len(low)
    bad, first = _status_counts(low)
    ok = low_frac <= up_frac - 0.5 and bad == 0
    return CriterionResult(8, "lower branch", ok,
                           f"beta1 = 2 fraction {low_frac:.3f} vs upper {up_frac:.3f} "
                           f"(needs <= {up_frac - 0.5:.3f}); {bad} failed trials"
                           + (f": {first}" if first else ""), rows=low)


@_timed
def criterion_sphere(trials: int = 50, n: float = 1e4, seed: int = 9,
                     threshold: float = 0.95) -> CriterionResult:
    m = sphere_with_volume(2, 1.0)
    lam = 3 * math.log(n)
    cell = lambda_cell(m, 0, n, lam, seed, run_coverage=True)
    rows = run_cells([cell], trials)
    good = sum(1 for r in rows if r["coverage_r"] and r["full_match"])
    frac = good / len(rows)
    bad, first = _status_counts(rows)
    return CriterionResult(9, "sphere sanity", frac >= threshold and bad == 0,
                           f"covered and betti (1,0,1) in {good}/{len(rows)} = {frac:.3f} "
                           f"(needs >= {threshold}); {bad} failed trials"
                           + (f": {first}" if first else ""), rows=rows)


def trend_counts(n: float, lams, lam0: float, trials: int, seed: int) -> list:
    """C_1(r_Λ, r0] on shared clouds for each Λ in ``lams``; one row per trial."""
    m = flat_torus(2)
    radii = [analytics.radius_of_lambda(n, lam, 2, m.volume) for lam in lams]
    r0 = analytics.radius_of_lambda(n, lam0, 2, m.volume)
    rows = []
    for t in range(trials):
        tseed = subtrial_seed(seed, t)
        cloud = poisson_process(m, n, tseed)
        faces = delaunay_faces(cloud, 1)
        if faces is None:
            faces = build_complex(cloud, r0, dim_cap=1).simplices[1]
        crit = filter_critical(m, cloud.points, faces, min(radii), r0)
        row = {"trial": t, "seed": tseed, "N": len(cloud)}
        for lam, r in zip(lams, radii):
            row[f"C1_{lam:g}"] = int(np.count_nonzero(crit.radii > r))
        rows.append(row)
    return rows


@_timed
def criterion_trend(trials: int = 600, n: float = 1e4, lams=(8.0, 10.0, 12.0, 14.0),
                    seed: int = 10, factor: float = 5.0) -> CriterionResult:
    lam0 = 3 * math.log(n)
    rows = trend_counts(n, lams, lam0, trials, seed)
    means = [float(np.mean([r[f"C1_{lam:g}"] for r in rows])) for lam in lams]
    env = [analytics.crit_envelope(n, lam, lam0, 1) for lam in lams]
    const = means[0] / env[0] if env[0] > 0 else math.nan
    ratios = [mu / (const * e) if const > 0 else math.nan for mu, e in zip(means, env)]
    decreasing = all(a > b for a, b in zip(means, means[1:]))
    within = all(1 / factor <= q <= factor for q in ratios)
    detail = ("means " + ", ".join(f"{mu:.4g}" for mu in means)
              + f"; fitted constant {const:.3f}; ratios "
              + ", ".join(f"{q:.3f}" for q in ratios))
    return CriterionResult(10, "critical-count trend", decreasing and within, detail, rows=rows)


# ---------------------------------------------------------------------------
# suite

QUICK = {
    1: dict(n_clouds=30),
    2: dict(n_complexes=30),
    3: dict(n_complexes=20),
    4: dict(n_clouds=15),
    5: dict(trials=10, n=500),
    6: dict(trials=10, n=1000),
    7: dict(trials=20, n=2000, offset=4.0),
    8: dict(trials=20, n=2000, offset=4.0),
    9: dict(trials=10, n=2000, threshold=0.9),
    10: dict(trials=40, n=2000, lams=(4.0, 5.0, 6.0, 7.0)),
}

FULL: dict = {k: {} for k in range(1, 11)}

CRITERIA = {
    1: criterion_complex_oracle,
    2: criterion_homology_oracle,
    3: criterion_euler_audit,
    4: criterion_critical_oracle,
    5: criterion_morse,
    6: criterion_theta,
    7: criterion_upper_branch,
    8: criterion_lower_branch,
    9: criterion_sphere,
    10: criterion_trend,
}


def _write_rows(path: str, rows: list) -> None:
    if not rows:
        return
    if "cell" in rows[0] and "status" in rows[0]:
        cols = result_columns(int(rows[0]["d"]))
    else:
        cols = list(rows[0].keys())
    _write_csv(path, cols, rows, time.strftime("%Y-%m-%dT%H:%M:%S"))


def verify_suite(scale: str = "quick", out_dir: str | None = None, master_seed: int = 0,
                 echo=print) -> list:
    """Run criteria 1–10 at the given scale, printing one line per criterion."""
    if scale not in ("quick", "full"):
        raise ValueError("scale must be 'quick' or 'full'")
    params = QUICK if scale == "quick" else FULL
    _PHASE_CACHE.clear()
    results = []
    for number, fn in CRITERIA.items():
        kwargs = dict(params[number])
        # the lower branch is judged against the upper-branch run
        kwargs["seed"] = subtrial_seed(master_seed, 7 if number == 8 else number)
        res = fn(**kwargs)
        results.append(res)
        if echo:
            echo(res.line())
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
            _write_rows(os.path.join(out_dir, f"criterion_{number:02d}.csv"), res.rows)
    return results
