"""Command-line interface.

    ballmapper map      INPUT --axes a,b --eps 0.5 -o graph.json
    ballmapper sweep    INPUT --axes a,b --eps 0.25,0.7,1.2
    ballmapper color    GRAPH INPUT --by outcome:M --svg graph.svg
    ballmapper stats    GRAPH INPUT --meta year
    ballmapper prep     {rolling,normalize,filter} ...
    ballmapper synth    {correlated,outcome,cloud} ...

Exit codes: 0 success, 1 usage, 2 I/O, 3 data validation. Outputs are
written to a temp file and renamed, so a failed run leaves no partial file.
Relative or omitted output paths resolve against ``$BALLMAPPER_OUTPUT_DIR``
(default: the working directory).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys

import numpy as np

from . import __version__
from ._io import format_number, write_json, write_text
from .cloud import (
    SKEWNESS_ESTIMATOR,
    PointCloud,
    PrepReport,
    filter_range,
    load_csv,
    normalize_minmax,
    read_header,
    rolling_cloud,
    write_csv,
)
from .color import (
    ReferenceSpec,
    color_by_axis,
    color_by_distance,
    color_by_outcome,
    color_by_year,
)
from .errors import DataError
from .graph import BMGraph, ball_summary, build_graph, connected_components, list_outliers
from .net import Metric, NetPolicy, PickOrder, greedy_net
from .render import DEFAULT_ITERATIONS, export_dot, layout_graph, render_svg
from .synth import (
    GENERATOR,
    OutcomeSpec,
    SyntheticSpec,
    base_pair,
    gen_correlated,
    gen_grid,
    gen_normal_cloud,
    gen_outcome,
    pearson,
)

OUTPUT_DIR_ENV = "BALLMAPPER_OUTPUT_DIR"

EXIT_USAGE, EXIT_IO, EXIT_DATA = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _as_list(value) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return [str(v) for v in value]


def _as_floats(value) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    try:
        return [float(v) for v in _as_list(value)]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {value!r}") from exc


def _out_path(path, default_name):
    base = os.environ.get(OUTPUT_DIR_ENV, "")
    path = path or default_name
    return path if os.path.isabs(path) or not base else os.path.join(base, path)


def _safe_name(value) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", str(value)).strip("_") or "group"


def _load_toml(path):
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"bad config file {path}: {exc}") from exc


# ---------------------------------------------------------------- pipeline


def _policy(args) -> NetPolicy:
    order = PickOrder.RANDOM_WITH_SEED if args.order == "random" else PickOrder.FIRST_UNCOVERED_BY_ROW
    return NetPolicy(order, int(args.seed))


def _load_cloud(args, extra_meta=()):
    axes = _as_list(args.axes)
    if not axes:
        raise UsageError("at least one axis column is required (--axes)")
    meta = list(dict.fromkeys(_as_list(getattr(args, "meta", None)) + [m for m in extra_meta if m]))
    meta = [m for m in meta if m not in axes]
    return load_csv(args.input, axes, meta)


def _groups(cloud: PointCloud, column):
    if not column:
        yield None, cloud
        return
    key = cloud.column(column)
    seen = []
    for v in key:
        if not any(v == s for s in seen):
            seen.append(v)
    for value in seen:
        yield value, cloud.take(np.flatnonzero(key == value))


def _map_one(cloud: PointCloud, eps, args, group=None) -> BMGraph:
    # the hash names the input rows, so color/stats can check the raw CSV
    cloud_hash = cloud.fingerprint()
    if args.normalize:
        cloud = normalize_minmax(cloud)
    cover = greedy_net(cloud, eps, Metric(args.metric), _policy(args))
    extra = {
        "cloud_hash": cloud_hash,
        "n_points": cloud.n,
        "pick_order": cover.policy.pick_order.value,
        "seed": cover.policy.seed,
        "normalized": bool(args.normalize),
    }
    if group is not None:
        extra["group"] = {"column": args.group_by, "value": _jsonable(group)}
    return build_graph(cover, cloud.axis_names, **extra)


def _jsonable(v):
    return float(v) if isinstance(v, (float, np.floating)) else str(v)


def _write_renders(graph, coloring, args, svg_path, dot_path):
    if svg_path:
        layout = layout_graph(graph, seed=int(args.layout_seed), iterations=int(args.iterations))
        write_text(_out_path(svg_path, "graph.svg"), render_svg(graph, layout, coloring, legend=coloring is not None))
    if dot_path:
        write_text(_out_path(dot_path, "graph.dot"), export_dot(graph, coloring))


def cmd_map(args) -> int:
    eps = _as_floats(args.eps)
    if len(eps) != 1:
        raise UsageError("map takes exactly one --eps value; use sweep for several")
    cloud, _ = _load_cloud(args, [args.group_by])
    if args.group_by:
        outdir = _out_path(args.output, "graphs")
        for value, sub in _groups(cloud, args.group_by):
            graph = _map_one(sub, eps[0], args, group=value)
            sub_dir = os.path.join(outdir, _safe_name(value))
            write_text(os.path.join(sub_dir, "graph.json"), graph.to_json())
            _write_renders(
                graph, None, args,
                os.path.join(sub_dir, "graph.svg") if args.svg else None,
                os.path.join(sub_dir, "graph.dot") if args.dot else None,
            )
        return 0
    graph = _map_one(cloud, eps[0], args)
    write_text(_out_path(args.output, "graph.json"), graph.to_json())
    _write_renders(graph, None, args, args.svg, args.dot)
    return 0


SWEEP_HEADER = ["epsilon", "balls", "edges", "components", "outliers"]


def sweep_rows(cloud: PointCloud, eps_list, args) -> list[list]:
    rows = []
    for eps in eps_list:
        graph = _map_one(cloud, eps, args)
        rows.append([eps, graph.n_vertices, len(graph.edges),
                     len(connected_components(graph)), len(list_outliers(graph))])
    return rows


def cmd_sweep(args) -> int:
    eps_list = _as_floats(args.eps)
    if not eps_list:
        raise UsageError("sweep needs at least one --eps value")
    cloud, _ = _load_cloud(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in sweep_rows(cloud, eps_list, args):
        writer.writerow([format_number(row[0])] + row[1:])
    if args.output:
        write_text(_out_path(args.output, "sweep.csv"), buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _graph_and_cloud(args, extra_meta=()):
    with open(args.graph, encoding="utf-8") as fh:
        graph = BMGraph.from_json(fh.read())
    group = graph.extra_meta.get("group")
    needed = list(extra_meta) + ([group["column"]] if group else [])
    meta = list(dict.fromkeys(m for m in needed if m and m not in graph.axis_names))
    cloud, _ = load_csv(args.input, list(graph.axis_names), meta)
    if group:
        key = cloud.column(group["column"])
        value = group["value"]
        if key.dtype == np.float64:
            rows = np.flatnonzero(key == float(value))
        else:
            rows = np.flatnonzero(key.astype(str) == str(value))
        if len(rows) == 0:
            raise DataError(f"no rows with {group['column']} = {value!r}")
        cloud = cloud.take(rows)
    graph.check_cloud(cloud)
    return graph, cloud


def cmd_color(args) -> int:
    by, _, column = args.by.partition(":")
    if by not in ("outcome", "axis", "year", "distance"):
        raise UsageError(f"--by must be outcome:COL, axis:COL, year:COL or distance, got {args.by!r}")
    if by != "distance" and not column:
        raise UsageError(f"--by {by} needs a column, e.g. {by}:name")
    ref = None
    extra = [column] if by in ("outcome", "year") else []
    if by == "distance":
        if not args.ref:
            raise UsageError("--by distance needs --ref column:lo..hi or rows:i,j,...")
        ref = ReferenceSpec.parse(args.ref)
        if ref.column:
            extra.append(ref.column)
    graph, cloud = _graph_and_cloud(args, extra)
    if by == "outcome":
        coloring = color_by_outcome(graph, cloud, column)
    elif by == "axis":
        coloring = color_by_axis(graph, cloud, column)
    elif by == "year":
        coloring = color_by_year(graph, cloud, column)
    else:
        space = normalize_minmax(cloud) if graph.extra_meta.get("normalized") else cloud
        coloring = color_by_distance(graph, space, ref)
    write_text(_out_path(args.output, "coloring.csv"), coloring.to_csv())
    _write_renders(graph, coloring, args, args.svg, args.dot)
    return 0


def cmd_stats(args) -> int:
    meta = _as_list(args.meta)
    graph, cloud = _graph_and_cloud(args, meta)
    summary = ball_summary(graph, cloud, meta)
    text = summary.to_csv()
    if args.output == "-":
        sys.stdout.write(text)
    else:
        write_text(_out_path(args.output, "summary.csv"), text)
    return 0


def _write_report(args, report: PrepReport, **extra):
    if args.report:
        path = _out_path(args.report, args.report)
    else:
        path = _out_path(args.output, f"{args.prep_command}.csv") + ".report.json"
    write_json(path, {**report.to_dict(), **extra})


def _other_columns(path, exclude):
    return [c for c in read_header(path) if c not in exclude]


def cmd_prep(args) -> int:
    if args.prep_command == "rolling":
        keep = _as_list(args.keep)
        meta = [c for c in dict.fromkeys(keep + [args.group_by, args.order_by]) if c and c != args.col]
        cloud, loaded = load_csv(args.input, [args.col], meta)
        out, windows = rolling_cloud(cloud, args.col, int(args.window), args.group_by, args.order_by)
        write_csv(out, _out_path(args.output, "rolling.csv"))
        _write_report(args, windows, load=loaded.to_dict(), window=int(args.window),
                      alignment="last observation of each window",
                      skewness=SKEWNESS_ESTIMATOR, sd="sample (divisor n - 1)")
        return 0

    axes = _as_list(args.axes)
    if not axes:
        raise UsageError("--axes is required")
    meta = _as_list(args.meta) if args.meta is not None else _other_columns(args.input, axes)
    cloud, report = load_csv(args.input, axes, meta)
    extra = {}
    if args.prep_command == "filter":
        lo = float("-inf") if args.lo is None else float(args.lo)
        hi = float("inf") if args.hi is None else float(args.hi)
        cloud, step = filter_range(cloud, args.col, lo, hi)
        report = report.then(step)
        extra["filter"] = {"column": args.col, "lo": lo, "hi": hi, "inclusive": True}
    else:
        cloud, ranges = normalize_minmax(cloud, return_ranges=True)
        extra["ranges"] = {a: list(r) for a, r in ranges.items()}
    write_csv(cloud, _out_path(args.output, f"{args.prep_command}.csv"))
    _write_report(args, report, **extra)
    return 0


def _write_synth(args, cloud: PointCloud, params: dict):
    path = _out_path(args.output, "synth.csv")
    write_csv(cloud, path)
    sidecar = {"generator": GENERATOR, "command": args.synth_command, **params,
               "columns": cloud.columns}
    write_json(path + ".json", sidecar)


def cmd_synth(args) -> int:
    n, seed = int(args.n), int(args.seed)
    if args.synth_command == "correlated":
        r = float(args.r)
        x0, y0 = base_pair(n, seed)
        xr = gen_correlated(x0, y0, r)
        cloud = PointCloud(("x_0", "y_0", "x_r"), np.column_stack([x0, y0, xr]))
        _write_synth(args, cloud, {"n": n, "seed": seed, "r": r,
                                   "realized_correlation": pearson(xr, x0)})
    elif args.synth_command == "outcome":
        coef = tuple(_as_floats(args.coef))
        if len(coef) != 2:
            raise UsageError("--coef takes two numbers: x0 and y0 coefficients")
        spec = OutcomeSpec(coef, float(args.sd))
        x0, y0 = base_pair(n, seed)
        m = gen_outcome(x0, y0, spec, seed=seed + 1)
        cloud = PointCloud(("x_0", "y_0"), np.column_stack([x0, y0]), {"M": m})
        _write_synth(args, cloud, {"n": n, "seed": seed, "noise_seed": seed + 1,
                                   "coefficients": list(coef), "noise_sd": spec.noise_sd})
    else:
        if args.grid:
            cloud = gen_grid(SyntheticSpec(n=n, seed=seed))
            params = {"n": n, "seed": seed, "grid": "r = i/100 - 1, i = 1..198"}
        else:
            targets = _as_floats(args.targets) if args.targets is not None else []
            outcome = OutcomeSpec(noise_sd=float(args.sd)) if args.outcome else None
            cloud = gen_normal_cloud(n, len(targets) + 1, targets, seed, outcome)
            params = {"n": n, "seed": seed, "targets": targets, "outcome": bool(args.outcome),
                      "seed_scheme": "x_0 from default_rng(seed); others from SeedSequence(seed).spawn(d)"}
        _write_synth(args, cloud, params)
    return 0


# ---------------------------------------------------------------- parser


def _add_cloud_args(p, need_eps=True):
    p.add_argument("input", help="CSV file with a header row")
    p.add_argument("--axes", help="comma-separated axis columns")
    p.add_argument("--meta", help="comma-separated metadata columns to carry along")
    if need_eps:
        p.add_argument("--eps", help="ball radius (comma-separated list for sweep)")
    p.add_argument("--metric", choices=[m.value for m in Metric], default="euclidean")
    p.add_argument("--order", choices=["first", "random"], default="first",
                   help="center pick order (default: lowest uncovered row)")
    p.add_argument("--seed", type=int, default=0, help="seed for --order random")
    p.add_argument("--normalize", action="store_true", default=False,
                   help="min-max scale every axis to [0, 1] before covering")


def _add_render_args(p):
    p.add_argument("--svg", help="also write an SVG rendering here")
    p.add_argument("--dot", help="also write a DOT export here")
    p.add_argument("--layout-seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)


def build_parser():
    parser = _Parser(prog="ballmapper", description="Ball Mapper graphs for point clouds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="TOML file of option defaults; flags win")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    commands = {}

    p = commands["map"] = sub.add_parser("map", help="cover a cloud and write the graph JSON")
    _add_cloud_args(p)
    _add_render_args(p)
    p.add_argument("--group-by", help="run separately per value of this column into OUTPUT/<value>/")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_map)

    p = commands["sweep"] = sub.add_parser("sweep", help="ball/edge/component counts for several eps")
    _add_cloud_args(p)
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = commands["color"] = sub.add_parser("color", help="per-ball coloring of a built graph")
    p.add_argument("graph")
    p.add_argument("input")
    p.add_argument("--by", required=False, help="outcome:COL | axis:COL | year:COL | distance")
    p.add_argument("--ref", help="distance reference: column:lo..hi or rows:i,j,...")
    p.add_argument("-o", "--output")
    _add_render_args(p)
    p.set_defaults(func=cmd_color)

    p = commands["stats"] = sub.add_parser("stats", help="per-ball summary table")
    p.add_argument("graph")
    p.add_argument("input")
    p.add_argument("--meta", help="numeric metadata columns to report min/max for")
    p.add_argument("-o", "--output", help="CSV path, '-' for stdout")
    p.set_defaults(func=cmd_stats)

    p = commands["prep"] = sub.add_parser("prep", help="rolling moments, normalization, filtering")
    prep = p.add_subparsers(dest="prep_command", parser_class=_Parser, required=True)
    q = prep.add_parser("rolling", help="rolling mean/sd/skewness of one column")
    q.add_argument("input")
    q.add_argument("--col", required=True)
    q.add_argument("--window", type=int, default=10)
    q.add_argument("--group-by")
    q.add_argument("--order-by")
    q.add_argument("--keep", help="columns to carry from each window's last row")
    q = prep.add_parser("normalize", help="min-max scale axes to [0, 1]")
    q.add_argument("input")
    q.add_argument("--axes")
    q.add_argument("--meta", help="columns to keep (default: all non-axis columns)")
    q = prep.add_parser("filter", help="keep rows with lo <= column <= hi")
    q.add_argument("input")
    q.add_argument("--axes")
    q.add_argument("--meta", help="columns to keep (default: all non-axis columns)")
    q.add_argument("--col", required=True)
    q.add_argument("--lo", type=float)
    q.add_argument("--hi", type=float)
    for q in prep.choices.values():
        q.add_argument("-o", "--output")
        q.add_argument("--report", help="PrepReport JSON path (default: OUTPUT.report.json)")
    p.set_defaults(func=cmd_prep)

    p = commands["synth"] = sub.add_parser("synth", help="artificial data with exact correlations")
    synth = p.add_subparsers(dest="synth_command", parser_class=_Parser, required=True)
    q = synth.add_parser("correlated", help="x_0, y_0 and x_r with corr(x_r, x_0) = r")
    q.add_argument("--r", type=float, required=True)
    q = synth.add_parser("outcome", help="x_0, y_0 and M = a x_0 + b y_0 + noise")
    q.add_argument("--coef", default="0.3,0.6")
    q.add_argument("--sd", type=float, default=1.0)
    q = synth.add_parser("cloud", help="normal cloud with targets against x_0, or the full grid")
    q.add_argument("--grid", action="store_true", help="x_0 plus x_1..x_198 at r = i/100 - 1")
    q.add_argument("--targets", help="comma-separated correlations of x_1.. with x_0 (write --targets=-0.8,0.5 when the first is negative)")
    q.add_argument("--outcome", action="store_true", help="add M = 0.3 x_0 + 0.6 x_1 + noise")
    q.add_argument("--sd", type=float, default=1.0, help="outcome noise sd")
    for q in synth.choices.values():
        q.add_argument("--n", type=int, default=1000)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("-o", "--output")
    p.set_defaults(func=cmd_synth)
    return parser, commands


def _apply_config(argv, parser, commands):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    config = _load_toml(known.config)
    flat = {k.replace("-", "_"): v for k, v in config.items() if not isinstance(v, dict)}
    for name, p in commands.items():
        section = {k.replace("-", "_"): v for k, v in config.get(name, {}).items()}
        p.set_defaults(**{**flat, **section})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        _apply_config(argv, parser, commands)
        args = parser.parse_args(argv)
        if args.command == "color" and not args.by:
            raise UsageError("color needs --by")
        if args.command in ("map", "sweep") and args.eps is None:
            raise UsageError(f"{args.command} needs --eps")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
