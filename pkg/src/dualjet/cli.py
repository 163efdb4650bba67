"""Command-line front end.

    dualjet compute --config cfg.json --point "t=0.5,x=0.7:0.9,p=1:0:0:0" --out report.json
    dualjet verify  --config cfg.json --samples 100 --seed 7 [--tol zero=1e-12]

Point syntax: comma-separated groups t=, x=, p=, values inside a group
separated by ':'. Momenta are listed in variable order (p1_1 .. pn_1,
p1_2 .. pn_2, ...). --config also accepts "bundled:flat", "bundled:sphere",
"bundled:rheonomic".

Exit codes: 0 success, 1 a verification suite failed, 2 configuration or
usage error, 3 math domain error (degenerate metric at a point).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .chart import Point
from .config import DEFAULT_TOLERANCES, ConfigError, SpaceConfig, bundled_config
from .expr import EvalDomainError
from .report import canonical_json, compute_report, verify_report
from .sampling import sample_points
from .torsion_curvature import build_geometry
from .verify import (
    builtin_chart_maps, fd_pipeline_suite, metric_condition_suite,
    nlc_transformation_check, reduction_equivalence_check, table_zero_suite,
)

EXIT_OK = 0
EXIT_SUITE_FAILED = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3


def _load_config(spec: str) -> SpaceConfig:
    if spec.startswith("bundled:"):
        return bundled_config(spec.split(":", 1)[1])
    return SpaceConfig.from_file(spec)


def _parse_point(text: str, m: int, n: int) -> Point:
    groups = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"point group {part!r} is not name=values")
        name, _, values = part.partition("=")
        name = name.strip()
        if name not in ("t", "x", "p"):
            raise ConfigError(f"unknown point group {name!r} (want t, x, p)")
        if name in groups:
            raise ConfigError(f"duplicate point group {name!r}")
        try:
            groups[name] = [float(v) for v in values.split(":") if v.strip()]
        except ValueError as err:
            raise ConfigError(f"bad number in point group {name!r}: {err}") from err
    for name, count in (("t", m), ("x", n), ("p", m * n)):
        got = groups.get(name)
        if got is None:
            raise ConfigError(f"point is missing the {name}= group")
        if len(got) != count:
            raise ConfigError(f"point group {name}= needs {count} values, "
                              f"got {len(got)}")
    p = [groups["p"][a * n:(a + 1) * n] for a in range(m)]
    return Point.of(groups["t"], groups["x"], p)


def _parse_tolerances(pairs, config: SpaceConfig) -> dict:
    tolerances = dict(config.tolerances)
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--tol wants key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance key {key!r}; "
                              f"known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
        try:
            tolerances[key] = float(value)
        except ValueError as err:
            raise ConfigError(f"--tol {key}: {err}") from err
    return tolerances


def cmd_compute(args) -> int:
    config = _load_config(args.config)
    space = config.build_space()
    boxes = config.build_boxes(space.chart)
    points = []
    for text in args.point or ():
        pt = _parse_point(text, space.m, space.n)
        if not boxes.contains(pt):
            raise ConfigError(f"point {text!r} lies outside the sample boxes")
        points.append(pt)
    if args.grid:
        points.extend(sample_points(space.chart, args.grid, config.seed, boxes))
    if not points:
        raise ConfigError("no evaluation points: give --point and/or --grid N")
    for pt in points:
        space.check_point(pt)
    geometry = build_geometry(space)
    report = compute_report(__version__, config.config_hash(), geometry, points)
    text = canonical_json(report)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.out} ({len(points)} point(s))")
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _load_config(args.config)
    space = config.build_space()
    boxes = config.build_boxes(space.chart)
    tolerances = _parse_tolerances(args.tol, config)
    samples = args.samples
    seed = args.seed if args.seed is not None else config.seed
    geometry = build_geometry(space)
    N = geometry.connection
    coeffs = geometry.coefficients

    reports = []
    reports += metric_condition_suite(space, N, coeffs, samples=samples,
                                      tol=tolerances["identity"],
                                      seed=seed, boxes=boxes)
    reports += reduction_equivalence_check(space, samples=samples,
                                           tol_exact=tolerances["zero"],
                                           tol_rel=tolerances["identity"],
                                           seed=seed + 1, boxes=boxes)
    for cmap in builtin_chart_maps(space.m, space.n):
        reports.append(nlc_transformation_check(space, cmap, samples=samples,
                                                tol=tolerances["identity"],
                                                seed=seed + 2, boxes=boxes))
    reports += table_zero_suite(space, samples=samples,
                                tol=tolerances["zero"], seed=seed + 3,
                                boxes=boxes, geometry=geometry)
    reports.append(fd_pipeline_suite(space, samples=args.fd_samples,
                                     seed=seed + 4, eps=args.fd_eps,
                                     tol=tolerances["fd"], boxes=boxes,
                                     geometry=geometry))

    width = max(len(r.name) for r in reports)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  max={r.max_residual:.3e}  "
              f"tol={r.tolerance:g}  n={r.samples}")
    all_passed = all(r.passed for r in reports)
    print(f"{'PASS' if all_passed else 'FAIL'}  overall "
          f"({sum(r.passed for r in reports)}/{len(reports)} suites)")

    if args.out:
        report = verify_report(__version__, config.config_hash(), space,
                               reports, samples, seed, tolerances)
        Path(args.out).write_text(canonical_json(report), encoding="utf-8")
        print(f"wrote {args.out}")
    return EXIT_OK if all_passed else EXIT_SUITE_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dualjet",
                                 description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compute", help="evaluate the geometry at points")
    comp.add_argument("--config", required=True,
                      help="config path or bundled:<name>")
    comp.add_argument("--point", action="append",
                      help="t=..,x=..:..,p=..:.. (repeatable)")
    comp.add_argument("--grid", type=int, default=0, metavar="N",
                      help="additionally evaluate at N seeded sample points")
    comp.add_argument("--out", required=True, help="output report path")
    comp.set_defaults(func=cmd_compute)

    ver = sub.add_parser("verify", help="run the verification suites")
    ver.add_argument("--config", required=True,
                     help="config path or bundled:<name>")
    ver.add_argument("--samples", type=int, default=100)
    ver.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    ver.add_argument("--tol", action="append", metavar="KEY=VAL",
                     help="override a tolerance (identity, zero, fd)")
    ver.add_argument("--fd-samples", type=int, default=10,
                     help="points for the finite-difference suite")
    ver.add_argument("--fd-eps", type=float, default=1e-6)
    ver.add_argument("--out", help="write the canonical JSON report here")
    ver.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except EvalDomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
