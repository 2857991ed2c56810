"""Monte Carlo sweeps over (n, Λ offset) cells with per-trial invariant checks.

Each cell fixes n and Λ = log n + k log log n + c; each trial samples one
Poisson cloud, builds the complex at the matching radius, computes Betti
numbers and, when enabled, critical-point counts, Θ-cycle counts and
coverage certificates, then asserts the invariants that must hold on every
instance.
"""

from __future__ import annotations

import datetime
import json
import math
import multiprocessing
import time
from dataclasses import dataclass, field

import numpy as np

from . import analytics
from .cech import build_complex
from .errors import CechLabError, InvalidConfigurationError, InvariantError
from .homology import betti_numbers, manifold_betti
from .manifold import ManifoldModel
from .morse import coverage_certificate, crit_counts, morse_inequality_check
from .sampler import poisson_process, subtrial_seed
from .theta import count_theta_cycles, theta_config

CONFIG_KEYS = ("manifold", "n_list", "offsets", "trials", "master_seed", "k_range",
               "epsilon", "dim_cap", "toggles", "out")
TOGGLES = ("run_morse", "run_theta", "run_coverage", "full_cech")


@dataclass
class SweepConfig:
    manifold: ManifoldModel
    n_list: list
    offsets: list
    trials: int
    master_seed: int
    k_range: list
    epsilon: float = 0.1
    dim_cap: int | None = None
    toggles: dict = field(default_factory=dict)
    out: str = "results.csv"

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        unknown = set(raw) - set(CONFIG_KEYS)
        if unknown:
            raise InvalidConfigurationError(f"unknown config keys: {sorted(unknown)}")
        missing = {"manifold", "n_list", "offsets", "trials", "master_seed"} - set(raw)
        if missing:
            raise InvalidConfigurationError(f"missing config keys: {sorted(missing)}")
        man = raw["manifold"]
        try:
            m = ManifoldModel(man["kind"], int(man["d"]), float(man["scale"]))
        except (KeyError, TypeError) as exc:
            raise InvalidConfigurationError(f"bad manifold entry: {man}") from exc
        offsets = [(float(o["k"]), float(o["c"])) for o in raw["offsets"]]
        toggles = dict(raw.get("toggles", {}))
        bad = set(toggles) - set(TOGGLES)
        if bad:
            raise InvalidConfigurationError(f"unknown toggles: {sorted(bad)}")
        cfg = cls(
            manifold=m,
            n_list=[float(n) for n in raw["n_list"]],
            offsets=offsets,
            trials=int(raw["trials"]),
            master_seed=int(raw["master_seed"]),
            k_range=[int(k) for k in raw.get("k_range", list(range(m.d + 1)))],
            epsilon=float(raw.get("epsilon", 0.1)),
            dim_cap=raw.get("dim_cap"),
            toggles={t: bool(toggles.get(t, False)) for t in TOGGLES},
            out=str(raw.get("out", "results.csv")),
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path: str) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def validate(self) -> None:
        if self.trials < 1:
            raise InvalidConfigurationError("trials must be >= 1")
        if not 0 < self.epsilon < 1:
            raise InvalidConfigurationError("epsilon must lie in (0, 1)")
        self.cells()

    def cells(self) -> list:
        out = []
        for n in self.n_list:
            for k_off, c in self.offsets:
                out.append(make_cell(self, len(out), n, k_off, c))
        return out


@dataclass(frozen=True)
class Cell:
    index: int
    manifold: ManifoldModel
    n: float
    k_off: float
    offset: float
    lam: float
    r: float
    lam0: float
    r0: float
    seed: int
    dim_cap: int
    epsilon: float
    k_range: tuple
    run_morse: bool
    run_theta: bool
    run_coverage: bool
    full_cech: bool


def reference_radius(m: ManifoldModel, n: float, lam: float) -> float:
    """Radius r0 used for coverage certificates and relative Morse counts.

    Λ0 = max(3 log n, 1.5 Λ), capped at the convexity radius.
    """
    lam0 = max(3 * math.log(n), 1.5 * lam)
    return min(analytics.radius_of_lambda(n, lam0, m.d, m.volume), m.convexity_radius)


def make_cell(cfg: SweepConfig, index: int, n: float, k_off: float, c: float,
              lam: float | None = None) -> Cell:
    m = cfg.manifold
    if lam is None:
        lam = analytics.threshold_lambda(n, k_off, c)
    r = analytics.radius_of_lambda(n, lam, m.d, m.volume)
    if r > m.convexity_radius:
        raise InvalidConfigurationError(
            f"cell n={n:g}, Λ={lam:g}: radius {r:g} exceeds {m.convexity_radius:g}"
        )
    r0 = max(reference_radius(m, n, lam), r)
    lam0 = analytics.lambda_of(n, r0, m.d, m.volume)
    dim_cap = m.d + 1 if cfg.dim_cap is None else int(cfg.dim_cap)
    t = cfg.toggles
    if t.get("run_theta"):
        theta_config(m, r, lam, cfg.epsilon)
    return Cell(index, m, float(n), float(k_off), float(c), lam, r, lam0, r0,
                subtrial_seed(cfg.master_seed, index), dim_cap, cfg.epsilon,
                tuple(cfg.k_range), bool(t.get("run_morse")), bool(t.get("run_theta")),
                bool(t.get("run_coverage")), bool(t.get("full_cech")))


def lambda_cell(m: ManifoldModel, index: int, n: float, lam: float, master_seed: int,
                **toggles) -> Cell:
    """A cell given Λ directly rather than through a threshold offset."""
    cfg = SweepConfig(m, [n], [], 1, master_seed, toggles.pop("k_range", list(range(m.d + 1))),
                      toggles.pop("epsilon", 0.1), toggles.pop("dim_cap", None),
                      {t: bool(toggles.get(t, False)) for t in TOGGLES})
    return make_cell(cfg, index, n, math.nan, math.nan, lam=lam)


def result_columns(d: int) -> list:
    cols = ["cell", "trial", "manifold", "d", "n", "k_offset", "offset", "seed", "N",
            "r", "lambda", "r0", "lambda0"]
    cols += [f"f{k}" for k in range(d + 2)]
    cols += [f"betti{k}" for k in range(d + 1)]
    cols += [f"mbetti{k}" for k in range(d + 1)]
    cols += [f"match{k}" for k in range(d + 1)]
    cols += ["full_match"]
    cols += [f"crit{k}" for k in range(d + 1)]
    cols += [f"crit_above{k}" for k in range(d + 1)]
    cols += [f"theta{k}" for k in range(1, d)]
    cols += ["coverage_r", "coverage_r0", "status"]
    return cols


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return "%.17g" % value
    text = str(value)
    if any(ch in text for ch in ",\n\""):
        text = '"' + text.replace('"', '""') + '"'
    return text


def run_trial(cell: Cell, trial_index: int) -> dict:
    """One sample of the cell, with every enabled statistic and invariant."""
    m = cell.manifold
    d = m.d
    seed = subtrial_seed(cell.seed, trial_index)
    row = {c: None for c in result_columns(d)}
    row.update(cell=cell.index, trial=trial_index, manifold=m.kind, d=d, n=cell.n,
               k_offset=cell.k_off, offset=cell.offset, seed=seed, r=cell.r,
               r0=cell.r0, status="pass")
    row["lambda"] = cell.lam
    row["lambda0"] = cell.lam0
    start = time.perf_counter()
    failures = []
    try:
        cloud = poisson_process(m, cell.n, seed)
        row["N"] = len(cloud)
        cx = build_complex(cloud, cell.r, cell.dim_cap,
                           method="cech" if cell.full_cech else "delaunay")
        fv = [len(b) for b in cx.simplices]
        for k in range(d + 2):
            row[f"f{k}"] = fv[k] if k < len(fv) else 0
        betti = betti_numbers(cx)
        mb = manifold_betti(m).betti
        full = True
        for k in range(d + 1):
            trusted = k <= betti.trusted_upto
            b = betti.betti[k] if trusted else None
            row[f"betti{k}"] = b
            row[f"mbetti{k}"] = mb[k]
            match = (b == mb[k]) if trusted else None
            row[f"match{k}"] = match
            full = full and bool(match)
            if trusted and b > fv[k]:
                failures.append(f"beta{k} > f{k}")
        row["full_match"] = full
        covered_r0 = None
        if cell.run_coverage:
            cov_r = coverage_certificate(cloud, cell.r)
            row["coverage_r"] = cov_r
            if cov_r and not full:
                failures.append("coverage certified at r but homology differs")
        if cell.run_coverage or cell.run_morse:
            covered_r0 = coverage_certificate(cloud, cell.r0)
            row["coverage_r0"] = covered_r0
        if cell.run_morse:
            counts = crit_counts(cloud, 0.0, cell.r0, d, method="delaunay")
            for k in range(d + 1):
                row[f"crit{k}"] = counts.count(k, 0.0, cell.r)
                row[f"crit_above{k}"] = counts.count(k, cell.r, cell.r0) if k else 0
            report = morse_inequality_check(cx, m, counts,
                                            cell.r0 if covered_r0 else None, betti)
            for bad in report.failures():
                failures.append(f"Morse inequality fails at k={bad['k']}: {bad}")
        if cell.run_theta:
            cfg = theta_config(m, cell.r, cell.lam, cell.epsilon)
            for k in range(1, d):
                if k not in cell.k_range:
                    continue
                count, _ = count_theta_cycles(cloud, k, cfg, method="delaunay")
                row[f"theta{k}"] = count
                if k <= betti.trusted_upto and betti.betti[k] < count:
                    failures.append(f"beta{k} = {betti.betti[k]} below Θ count {count}")
    except InvariantError as exc:
        failures.append(str(exc))
    except CechLabError as exc:
        row["status"] = f"error: {exc}"
    if failures:
        row["status"] = "fail: " + "; ".join(failures)
    row["_elapsed"] = time.perf_counter() - start
    return row


def _run_task(args):
    cell, trial = args
    return run_trial(cell, trial)


@dataclass
class SweepOutcome:
    rows: list
    summary: list
    cells: list
    elapsed: float

    @property
    def failed(self) -> list:
        return [r for r in self.rows if r["status"] != "pass"]

    @property
    def exit_code(self) -> int:
        statuses = [r["status"] for r in self.rows]
        if any(s.startswith("fail") for s in statuses):
            return 1
        if any(s.startswith("error") for s in statuses):
            return 2
        return 0


def run_cells(cells: list, trials: int, threads: int = 1) -> list:
    tasks = [(cell, t) for cell in cells for t in range(trials)]
    if threads > 1 and len(tasks) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(threads) as pool:
            rows = pool.map(_run_task, tasks, chunksize=1)
    else:
        rows = [_run_task(t) for t in tasks]
    rows.sort(key=lambda r: (r["cell"], r["trial"]))
    return rows


def _mean_var(values) -> tuple:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    arr = np.array(vals, dtype=float)
    var = float(arr.var(ddof=1)) if len(arr) > 1 else 0.0
    return float(arr.mean()), var


def summary_columns(d: int) -> list:
    cols = ["cell", "manifold", "d", "n", "k_offset", "offset", "r", "lambda", "trials",
            "full_match_fraction", "wilson_lo", "wilson_hi"]
    cols += [f"match{k}_fraction" for k in range(d + 1)]
    for k in range(d + 1):
        cols += [f"betti{k}_mean", f"betti{k}_var"]
    cols += [f"crit{k}_mean" for k in range(d + 1)]
    cols += [f"crit_above{k}_mean" for k in range(d + 1)]
    cols += [f"theta{k}_mean" for k in range(1, d)]
    cols += ["coverage_r_fraction", "coverage_r0_fraction", "failed"]
    return cols


def summarize(cells: list, rows: list) -> list:
    out = []
    for cell in cells:
        d = cell.manifold.d
        cr = [r for r in rows if r["cell"] == cell.index]
        t = len(cr)
        s = {c: None for c in summary_columns(d)}
        s.update(cell=cell.index, manifold=cell.manifold.kind, d=d, n=cell.n,
                 k_offset=cell.k_off, offset=cell.offset, r=cell.r, trials=t)
        s["lambda"] = cell.lam
        hits = sum(1 for r in cr if r["full_match"])
        s["full_match_fraction"] = hits / t if t else None
        s["wilson_lo"], s["wilson_hi"] = analytics.wilson_interval(hits, t)
        for k in range(d + 1):
            flags = [r[f"match{k}"] for r in cr if r[f"match{k}"] is not None]
            s[f"match{k}_fraction"] = sum(flags) / len(flags) if flags else None
            s[f"betti{k}_mean"], s[f"betti{k}_var"] = _mean_var(r[f"betti{k}"] for r in cr)
            s[f"crit{k}_mean"] = _mean_var(r[f"crit{k}"] for r in cr)[0]
            s[f"crit_above{k}_mean"] = _mean_var(r[f"crit_above{k}"] for r in cr)[0]
        for k in range(1, d):
            s[f"theta{k}_mean"] = _mean_var(r[f"theta{k}"] for r in cr)[0]
        for key in ("coverage_r", "coverage_r0"):
            flags = [r[key] for r in cr if r[key] is not None]
            s[f"{key}_fraction"] = sum(flags) / len(flags) if flags else None
        s["failed"] = sum(1 for r in cr if r["status"] != "pass")
        out.append(s)
    return out


def _write_csv(path: str, columns: list, rows: list, stamp: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# generated {stamp}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")


def sidecar_paths(out: str) -> tuple:
    base = out[:-4] if out.endswith(".csv") else out
    return base + "_summary.csv", base + "_timing.csv"


def write_outputs(out: str, d: int, rows: list, summary: list) -> None:
    """Results and summary CSVs plus a timing sidecar (kept apart for determinism)."""
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    _write_csv(out, result_columns(d), rows, stamp)
    summary_path, timing_path = sidecar_paths(out)
    _write_csv(summary_path, summary_columns(d), summary, stamp)
    with open(timing_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("cell,trial,seconds\n")
        for r in rows:
            fh.write(f"{r['cell']},{r['trial']},{r['_elapsed']:.6f}\n")


def run_sweep(cfg: SweepConfig, threads: int = 1, out: str | None = None) -> SweepOutcome:
    """Run every cell x trial and write results; output is scheduling-independent."""
    start = time.perf_counter()
    cells = cfg.cells()
    rows = run_cells(cells, cfg.trials, threads)
    summary = summarize(cells, rows)
    path = out or cfg.out
    if path:
        write_outputs(path, cfg.manifold.d, rows, summary)
    return SweepOutcome(rows, summary, cells, time.perf_counter() - start)


def read_result_rows(path: str) -> list:
    """Result CSV lines without the timestamp comment."""
    with open(path, encoding="utf-8") as fh:
        return [line for line in fh if not line.startswith("#")]


def config_to_dict(cfg: SweepConfig) -> dict:
    return {
        "manifold": {"kind": cfg.manifold.kind, "d": cfg.manifold.d, "scale": cfg.manifold.scale},
        "n_list": cfg.n_list,
        "offsets": [{"k": k, "c": c} for k, c in cfg.offsets],
        "trials": cfg.trials,
        "master_seed": cfg.master_seed,
        "k_range": cfg.k_range,
        "epsilon": cfg.epsilon,
        "dim_cap": cfg.dim_cap,
        "toggles": {k: v for k, v in cfg.toggles.items()},
        "out": cfg.out,
    }
