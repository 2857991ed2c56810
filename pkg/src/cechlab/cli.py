"""Command-line entry point: ``cechlab <subcommand> [options]``.

Exit codes: 0 success, 1 invariant or acceptance failure, 2 invalid input or
out-of-regime parameters.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import analytics
from .cech import build_complex
from .errors import CechLabError, InvariantError
from .harness import SweepConfig, run_sweep
from .homology import betti_numbers
from .manifold import ManifoldModel
from .morse import coverage_certificate, enumerate_critical_points, write_critical_csv
from .sampler import poisson_process, read_cloud_csv
from .theta import count_theta_cycles, theta_config


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON sweep configuration")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                        help="master seed (64-bit)")
    parser.add_argument("--out", default=default, help="output path (stdout if omitted)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker processes")


def _cloud_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kind", choices=("torus", "sphere"), default="torus")
    parser.add_argument("--d", type=int, default=2, help="intrinsic dimension")
    parser.add_argument("--scale", type=float, default=None,
                        help="side length L or radius R (default: volume 1)")
    parser.add_argument("--n", type=float, default=1000.0, help="Poisson intensity")
    parser.add_argument("--points", default=None, help="read the cloud from a CSV file")


def _radius_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--r", type=float, help="radius")
    group.add_argument("--lambda", dest="lam", type=float, help="density parameter Λ")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cechlab", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a Poisson cloud to CSV")
    _cloud_args(p)

    for name, text in (("build", "write the complex, one simplex per line"),
                       ("betti", "print Betti numbers of the complex")):
        p = sub.add_parser(name, help=text)
        _cloud_args(p)
        _radius_args(p)
        p.add_argument("--dim-cap", type=int, default=None)
        p.add_argument("--method", choices=("cech", "delaunay"), default="cech")

    p = sub.add_parser("critical", help="list critical points as CSV")
    _cloud_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r-lo", type=float, default=0.0)
    p.add_argument("--r-hi", type=float, required=True)

    p = sub.add_parser("theta", help="count Θ-cycles")
    _cloud_args(p)
    _radius_args(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=0.1)

    p = sub.add_parser("coverage", help="coverage certificate at radius r0")
    _cloud_args(p)
    p.add_argument("--r0", type=float, required=True)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--scale", choices=("quick", "full"), default="quick")

    for sp in sub.choices.values():
        _common(sp, suppress=True)
    return parser


def _manifold(args) -> ManifoldModel:
    from .manifold import sphere_with_volume

    if args.scale is None:
        if args.kind == "torus":
            return ManifoldModel("torus", args.d, 1.0)
        return sphere_with_volume(args.d, 1.0)
    return ManifoldModel(args.kind, args.d, args.scale)


def _cloud(args):
    m = _manifold(args)
    if args.points:
        with open(args.points, encoding="utf-8") as fh:
            return read_cloud_csv(m, fh)
    return poisson_process(m, args.n, args.seed)


def _radius(args, cloud) -> tuple:
    m = cloud.manifold
    if args.r is not None:
        r = args.r
        return r, analytics.lambda_of(cloud.intensity_n, r, m.d, m.volume)
    if args.lam is not None:
        return analytics.radius_of_lambda(cloud.intensity_n, args.lam, m.d, m.volume), args.lam
    raise CechLabError("give --r or --lambda")


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    cmd = args.command
    if cmd == "sample":
        cloud = _cloud(args)
        _emit(args, cloud.to_csv())
        return 0
    if cmd in ("build", "betti"):
        cloud = _cloud(args)
        r, _ = _radius(args, cloud)
        cx = build_complex(cloud, r, args.dim_cap, method=args.method)
        if cmd == "build":
            _emit(args, cx.to_text())
        else:
            b = betti_numbers(cx)
            trusted = " ".join(str(v) for v in b.trusted())
            _emit(args, f"betti {trusted}\neuler {b.euler}\nf_vector {' '.join(map(str, cx.f_vector()))}\n")
        return 0
    if cmd == "critical":
        cloud = _cloud(args)
        pts = enumerate_critical_points(cloud, args.k, args.r_lo, args.r_hi)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                write_critical_csv(pts, fh)
        else:
            write_critical_csv(pts, sys.stdout)
        return 0
    if cmd == "theta":
        cloud = _cloud(args)
        r, lam = _radius(args, cloud)
        cfg = theta_config(cloud.manifold, r, lam, args.epsilon)
        count, cycles = count_theta_cycles(cloud, args.k, cfg)
        cx = build_complex(cloud, r, method="delaunay")
        beta = betti_numbers(cx).betti[args.k]
        lines = [f"theta_count {count}", f"betti{args.k} {beta}",
                 f"r1 {cfg.r1:.17g}", f"r2 {cfg.r2:.17g}"]
        lines += [f"cycle {' '.join(map(str, c.generators))} radius {c.radius:.17g} phi {c.phi:.17g}"
                  for c in cycles]
        _emit(args, "\n".join(lines) + "\n")
        if beta < count:
            raise InvariantError(f"beta{args.k} = {beta} below Θ count {count}")
        return 0
    if cmd == "coverage":
        cloud = _cloud(args)
        ok = coverage_certificate(cloud, args.r0)
        _emit(args, f"covered {str(ok).lower()}\n")
        return 0
    if cmd == "sweep":
        if not args.config:
            raise CechLabError("sweep needs --config")
        cfg = SweepConfig.from_json(args.config)
        outcome = run_sweep(cfg, threads=args.threads, out=args.out or cfg.out)
        for s in outcome.summary:
            print(json.dumps({k: (None if isinstance(v, float) and math.isnan(v) else v)
                              for k, v in s.items()}))
        for row in outcome.failed:
            print(f"cell {row['cell']} trial {row['trial']}: {row['status']}", file=sys.stderr)
        return outcome.exit_code
    if cmd == "verify":
        from .verify import verify_suite

        results = verify_suite(args.scale, out_dir=args.out, master_seed=args.seed)
        return 0 if all(r.passed for r in results) else 1
    raise CechLabError(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1
    except CechLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
