"""Command-line interface: ``anchorlab <subcommand> ...``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import formats
from .experiments import ExperimentSpec, RgapSpec, noise_sweep, rgap_study, run_traversal
from .field import GeoTransform, geo_to_local, replay, write_replay_csv
from .gdop import lvt_grid, osap_map, region_score, trajectory_score
from .geometry import Region, default_trajectory, hilbert_trajectory
from .localizers import METHODS, GdmConfig
from .noise import KINDS, NoiseModel

SEED_ENV = "ANCHORLAB_SEED"


class CliError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _region(text: str) -> Region:
    try:
        return Region.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _methods(text: str) -> tuple:
    methods = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {','.join(METHODS)}")
    return methods


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _load_anchors(args, path=None):
    transform = GeoTransform.load(args.geo) if getattr(args, "geo", None) else None
    return formats.read_anchors(path or args.anchors, transform)


def _trajectory(args):
    if getattr(args, "trajectory", None):
        return formats.read_trajectory(args.trajectory)
    return default_trajectory()


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _gdm(args) -> GdmConfig:
    return GdmConfig(args.gdm_step, args.gdm_tol, args.gdm_iters)


def cmd_hilbert(args):
    t = hilbert_trajectory(args.order, args.region, args.points)
    if args.out:
        formats.write_trajectory(args.out, t)
    else:
        formats.write_trajectory(sys.stdout, t)


def cmd_lvt(args):
    grid = lvt_grid(_load_anchors(args), args.region, *args.grid)
    if args.pgm:
        if not args.out:
            raise CliError("--pgm writes a binary image and needs --out FILE")
        formats.write_pgm(args.out, grid.values)
        return
    comments = [f"region {args.region}", "values[ix][iy], x rows, y columns"]
    formats.write_grid_csv(args.out or sys.stdout, grid.values, comments)


def cmd_score(args):
    anchors = _load_anchors(args)
    if args.region is not None:
        score = region_score(anchors, args.region)
    else:
        score = trajectory_score(anchors, formats.read_trajectory(args.trajectory))
        if score.skipped:
            print(f"warning: {score.skipped} samples on anchors skipped", file=sys.stderr)
    print(formats.fmt(score.value))


def cmd_osap(args):
    anchors = _load_anchors(args)
    noise = None
    if args.noise_level is not None:
        noise = NoiseModel(args.model, args.noise_level, _seed(args))
    result = osap_map(anchors, args.region, *args.grid, noise=noise)
    comments = [f"region {args.region}"]
    comments += [f"pair {k} = anchors {a},{b}" for k, (a, b) in enumerate(result.pairs)]
    formats.write_grid_csv(args.out or sys.stdout, result.labels, comments)


def cmd_bench(args):
    anchors = _load_anchors(args)
    trajectory = _trajectory(args)
    noise = NoiseModel(args.model, args.noise_level, _seed(args))
    spec = ExperimentSpec(anchors, trajectory, noise, args.reps, args.methods, _gdm(args))
    result = run_traversal(spec, keep_restored=args.restored)
    label = Path(args.anchors).stem
    rows = [(label, args.model, args.noise_level, result[m]) for m in spec.methods]
    formats.write_stats_csv(sys.stdout, rows)
    if args.out:
        out = _out_dir(args)
        formats.write_stats_csv(out / "stats.csv", rows)
        if args.restored:
            formats.write_restored_csv(out / "restored.csv", trajectory.points, result.restored)


def cmd_sweep(args):
    placements = {Path(p).stem: _load_anchors(args, p) for p in args.anchors}
    first = next(iter(placements.values()))
    template = ExperimentSpec(first, _trajectory(args), NoiseModel(seed=_seed(args)),
                              args.reps, args.methods, _gdm(args))
    rows = noise_sweep(template, args.levels, args.models, placements)
    table = [(r.ap, r.model, r.level, r.stats) for r in rows]
    formats.write_stats_csv(sys.stdout, table)
    if args.out:
        formats.write_stats_csv(_out_dir(args) / "stats.csv", table)


def cmd_rgap(args):
    spec = RgapSpec(m=args.m, placements=args.placements, half_area=args.half,
                    level=args.noise_level, kind=args.model, seed=_seed(args),
                    repetitions=args.reps, methods=args.methods, gdm=_gdm(args))
    result = rgap_study(spec, _trajectory(args))
    if args.out:
        formats.write_rgap_csv(_out_dir(args) / "rgap.csv", result)
    else:
        formats.write_rgap_csv(sys.stdout, result)
    summary = [f"mean_score={formats.fmt(result.mean_score())}"]
    summary += [f"{m}_ave={formats.fmt(result.mean_error(m))}" for m in spec.methods]
    summary.append(f"redraws={result.redraws}")
    print(" ".join(summary), file=sys.stderr)


def cmd_replay(args):
    log = formats.read_range_log(args.log)
    anchors = _load_anchors(args)
    if log.skipped:
        print(f"warning: {log.skipped} malformed rows skipped", file=sys.stderr)
    result = replay(log, anchors, args.methods, _gdm(args))
    if args.out:
        out = _out_dir(args)
        for m in args.methods:
            write_replay_csv(out / f"restored_{m}.csv", result, m)
    else:
        for m in args.methods:
            print(f"# {m}")
            write_replay_csv(sys.stdout, result, m)
    print(f"epochs={log.n} gaps={int(log.gaps.sum())} skipped={log.skipped}", file=sys.stderr)


def cmd_geo(args):
    p = geo_to_local(GeoTransform.load(args.transform), args.lon, args.lat)
    print(f"{formats.fmt(p.x)},{formats.fmt(p.y)}")


def _add_noise(p, required=True):
    p.add_argument("--noise-level", type=float, required=required, metavar="L")
    p.add_argument("--model", choices=KINDS, default="gaussian")
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: ${SEED_ENV} or 0)")


def _add_gdm(p):
    p.add_argument("--gdm-step", type=float, default=GdmConfig.step)
    p.add_argument("--gdm-tol", type=float, default=GdmConfig.tolerance)
    p.add_argument("--gdm-iters", type=int, default=GdmConfig.max_iters)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anchorlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hilbert", help="write a Hilbert traversal as x,y CSV")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--region", type=_region, default=Region.square())
    p.add_argument("--points", type=int, default=None, help="resample to N points")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hilbert)

    p = sub.add_parser("lvt", help="GDOP raster over a region")
    p.add_argument("--anchors", required=True)
    p.add_argument("--geo", help="transform JSON for id,lon,lat anchor files")
    p.add_argument("--region", type=_region, required=True)
    p.add_argument("--grid", type=int, nargs=2, default=(101, 101), metavar=("NX", "NY"))
    p.add_argument("--pgm", action="store_true", help="write an 8-bit PGM heightmap")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lvt)

    p = sub.add_parser("score", help="placement score over a region or trajectory")
    p.add_argument("--anchors", required=True)
    p.add_argument("--geo")
    where = p.add_mutually_exclusive_group(required=True)
    where.add_argument("--region", type=_region)
    where.add_argument("--trajectory")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("osap", help="winning anchor pair per grid node")
    p.add_argument("--anchors", required=True)
    p.add_argument("--geo")
    p.add_argument("--region", type=_region, required=True)
    p.add_argument("--grid", type=int, nargs=2, default=(101, 101), metavar=("NX", "NY"))
    _add_noise(p, required=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_osap)

    p = sub.add_parser("bench", help="benchmark localizers along a trajectory")
    p.add_argument("--anchors", required=True)
    p.add_argument("--geo")
    p.add_argument("--trajectory", help="x,y CSV (default: 8190-point Hilbert traversal)")
    _add_noise(p)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--methods", type=_methods, default=METHODS)
    p.add_argument("--restored", action="store_true", help="also write restored.csv")
    p.add_argument("--out", help="output directory")
    _add_gdm(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="error versus noise level for several placements")
    p.add_argument("--anchors", required=True, nargs="+")
    p.add_argument("--geo")
    p.add_argument("--trajectory")
    p.add_argument("--levels", type=_floats, required=True)
    p.add_argument("--models", type=lambda s: tuple(s.split(",")), default=KINDS)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--methods", type=_methods, default=("gdm", "tplm"))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output directory")
    _add_gdm(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rgap", help="random anchor placement study")
    p.add_argument("--m", type=int, required=True, help="anchors per placement")
    p.add_argument("--half", action="store_true", help="place anchors in the upper half only")
    p.add_argument("--placements", type=int, default=100)
    p.add_argument("--trajectory")
    p.add_argument("--noise-level", type=float, default=0.3)
    p.add_argument("--model", choices=KINDS, default="gaussian")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--methods", type=_methods, default=METHODS)
    p.add_argument("--out", help="output directory")
    _add_gdm(p)
    p.set_defaults(func=cmd_rgap)

    p = sub.add_parser("replay", help="localize every epoch of a range log")
    p.add_argument("--log", required=True)
    p.add_argument("--anchors", required=True)
    p.add_argument("--geo")
    p.add_argument("--methods", type=_methods, default=METHODS)
    p.add_argument("--out", help="output directory")
    _add_gdm(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("geo", help="convert lon/lat to local meters")
    p.add_argument("--transform", required=True)
    p.add_argument("--lon", type=float, required=True)
    p.add_argument("--lat", type=float, required=True)
    p.set_defaults(func=cmd_geo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "models", None):
        bad = [m for m in args.models if m not in KINDS]
        if bad:
            parser.error(f"unknown noise models {bad}; expected {KINDS}")
    try:
        args.func(args)
    except (CliError, ValueError, OSError, KeyError) as exc:
        print(f"anchorlab {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
