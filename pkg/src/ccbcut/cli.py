"""Command-line interface.

Subcommands: ``partition`` (graph file to partition file), ``sweep``
(bifurcation diagrams of the toy instance as CSV), ``segment`` (image to
label map), ``eval`` (partition vs ground truths). Exit codes: 0 success,
1 I/O problems, 2 configuration problems, 3 solver failures.
"""

import argparse
import json
import sys
import time

from ccbcut import __version__
from ccbcut.errors import (
    ConstantVectorError,
    ConstraintViolationError,
    DegenerateWeightsError,
    DimensionMismatchError,
    DomainError,
    EigensolverError,
    EnumerationLimitError,
    FormatError,
    GraphError,
    PartitionError,
)

_DEFAULTS = {
    "tau_range": "(0, 2]",
    "eig_tol": 1e-8,
    "eig_maxiter": 5000,
    "dense_cutoff": 200,
    "rel_cost_tol": 0.01,
    "max_iters": 50,
    "kappa_tilde": 1e-4,
    "kmeans_restarts": 10,
    "weight_floor": 1e-12,
}

VERSION_LINE = f"ccbcut {__version__} defaults={json.dumps(_DEFAULTS)}"


def _parse_grid(text):
    """Grid syntax: 'lo:hi:count' (inclusive linspace) or comma values."""
    text = text.strip()
    if not text:
        raise DomainError("empty grid")
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            lo, hi, count = float(lo), float(hi), int(count)
            if count < 1:
                raise DomainError("grid count must be >= 1")
            if count == 1:
                return [lo]
            return [lo + (hi - lo) * i / (count - 1) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise DomainError(f"bad grid {text!r}") from exc


def _cost_kind(args):
    from ccbcut.costs import CostKind

    if args.cost == "cut":
        return CostKind.cut()
    if args.cost == "ccb":
        return CostKind.ccb(args.tau, args.mode)
    if args.cost == "bh":
        if args.p is None:
            raise DomainError("--cost bh requires --p")
        return CostKind.bh(args.p, args.mode)
    raise DomainError(f"unknown cost {args.cost!r}")


def cmd_partition(args):
    from ccbcut.costs import brute_force_min, write_partition
    from ccbcut.embedding import write_embedding
    from ccbcut.graph import balance_weights, read_edgelist
    from ccbcut.irrq import IrrqConfig, irrq_solve, write_trace
    from ccbcut.rounding import hierarchical_segment, kmeans, multiway_segment

    g = read_edgelist(args.graph)
    start = time.perf_counter()
    iterations = 0
    if args.method == "brute":
        kind = _cost_kind(args)
        part, cost = brute_force_min(g, kind, args.k)
    else:
        if args.cost != "ccb":
            raise DomainError(f"--method {args.method} minimizes the ccb cost; "
                              f"got --cost {args.cost}")
        weights = balance_weights(g, args.mode)
        cfg = IrrqConfig(tau=args.tau, k=args.k, kappa_tilde=args.kappa_tilde)
        if args.method == "multiway":
            result = irrq_solve(g, cfg, weights, seed=args.seed)
            iterations = result.iterations
            km = kmeans(result.embedding, cfg.k, seed=args.seed)
            from ccbcut.costs import PartitionK

            part = PartitionK(km.labels, cfg.k)
            if args.trace_out:
                write_trace(result.trace, args.trace_out)
            if args.embedding_out:
                write_embedding(result.embedding, args.embedding_out,
                                cfg.k, cfg.tau, args.mode)
        else:
            part = hierarchical_segment(g, cfg, weights, seed=args.seed)
            iterations = part.k - 1
        kind = _cost_kind(args)
        cost = kind.evaluate(g, part)
    wall = time.perf_counter() - start
    write_partition(part, args.out)
    print(json.dumps({"cost": cost, "iterations": iterations,
                      "wall_time_s": round(wall, 6)}))
    return 0


def cmd_sweep(args):
    from ccbcut.costs import bifurcation_sweep, write_sweep_csv

    alphas = _parse_grid(args.alpha_grid)
    if args.cost == "ccb":
        if args.tau_grid is None:
            raise DomainError("--cost ccb requires --tau-grid")
        params = _parse_grid(args.tau_grid)
    else:
        if args.p_grid is None:
            raise DomainError("--cost bh requires --p-grid")
        params = _parse_grid(args.p_grid)
    rows = bifurcation_sweep(alphas, params, args.cost, args.mode)
    write_sweep_csv(rows, args.out)
    classes = sorted({r.argmin_class for r in rows})
    print(json.dumps({"rows": len(rows), "classes": classes}))
    return 0


def cmd_segment(args):
    from ccbcut.costs import read_partition, write_partition
    from ccbcut.imaging import (
        AffinityParams,
        degree_spread,
        lab_affinity,
        read_image,
        segment_image,
        write_label_colorized,
        write_label_png,
    )
    from ccbcut.irrq import IrrqConfig, config_from_file
    from ccbcut.metrics import append_metrics_row, covering, pri, voi

    image = read_image(args.image)
    params = AffinityParams(radius=args.radius, sigma=args.sigma)
    if args.config:
        cfg = config_from_file(args.config, tau=args.tau, k=args.k,
                               kappa_tilde=args.kappa_tilde)
    else:
        cfg = IrrqConfig(tau=args.tau, k=args.k, kappa_tilde=args.kappa_tilde)
    start = time.perf_counter()
    label_map = segment_image(image, params, cfg, method=args.method,
                              mode=args.mode, seed=args.seed)
    runtime = time.perf_counter() - start
    write_label_png(label_map, args.out_prefix + ".png")
    write_partition(label_map.partition(), args.out_prefix + ".labels.txt")
    if args.colorize:
        write_label_colorized(label_map, args.out_prefix + ".color.png")
    print(json.dumps({"k": label_map.k, "runtime_s": round(runtime, 6)}))
    if args.gt:
        gt = read_partition(args.gt)
        seg = label_map.partition()
        g = lab_affinity(image, params)
        append_metrics_row(args.out_prefix + ".metrics.csv", {
            "image": args.image, "method": args.method, "tau": cfg.tau,
            "k": label_map.k, "covering": covering(seg, gt),
            "pri": pri(seg, [gt]), "voi": voi(seg, gt),
            "degree_spread": degree_spread(g, seg),
            "runtime_s": round(runtime, 6),
        })
    return 0


def cmd_eval(args):
    import csv

    from ccbcut.costs import read_partition
    from ccbcut.metrics import covering, pri, voi

    if not args.gt:
        raise DomainError("at least one ground-truth file is required")
    seg = read_partition(args.partition)
    gts = [read_partition(path) for path in args.gt]
    start = time.perf_counter()
    row = {
        "image": args.partition,
        "method": "",
        "tau": "",
        "k": seg.k,
        "covering": float(sum(covering(seg, gt) for gt in gts) / len(gts)),
        "pri": pri(seg, gts),
        "voi": float(sum(voi(seg, gt) for gt in gts) / len(gts)),
        "degree_spread": "",
        "runtime_s": round(time.perf_counter() - start, 6),
    }
    from ccbcut.metrics import METRICS_FIELDS, append_metrics_row

    if args.out:
        append_metrics_row(args.out, row)
    writer = csv.DictWriter(sys.stdout, fieldnames=METRICS_FIELDS)
    writer.writeheader()
    writer.writerow(row)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ccbcut",
        description="Balanced graph-cut partitioning and image segmentation.")
    parser.add_argument("--version", action="version", version=VERSION_LINE)
    parser.add_argument("--threads", type=int, default=0,
                        help="limit numeric thread pools (0 = leave as is)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="partition a graph from an edge-list file")
    p.add_argument("graph")
    p.add_argument("--cost", choices=["cut", "ccb", "bh"], default="ccb")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--mode", choices=["ratio", "normalized"], default="normalized")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--method", choices=["multiway", "hierarchical", "brute"],
                   default="multiway")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kappa-tilde", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.add_argument("--trace-out", default=None)
    p.add_argument("--embedding-out", default=None)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("sweep", help="bifurcation sweep of the toy instance")
    p.add_argument("--alpha-grid", required=True)
    p.add_argument("--tau-grid", default=None)
    p.add_argument("--p-grid", default=None)
    p.add_argument("--cost", choices=["ccb", "bh"], default="ccb")
    p.add_argument("--mode", choices=["ratio", "normalized"], default="ratio")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("segment", help="segment an image into a label map")
    p.add_argument("image")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--mode", choices=["ratio", "normalized"], default="normalized")
    p.add_argument("--method", choices=["multiway", "hierarchical"],
                   default="multiway")
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--kappa-tilde", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None,
                   help="key-value solver config file (flags still win)")
    p.add_argument("--gt", default=None,
                   help="ground-truth partition file; writes a metrics row")
    p.add_argument("--colorize", action="store_true")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="score a partition against ground truths")
    p.add_argument("partition")
    p.add_argument("gt", nargs="*")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads > 0:
            try:
                from threadpoolctl import threadpool_limits

                threadpool_limits(limits=args.threads)
            except ImportError:
                print("warning: threadpoolctl unavailable, --threads ignored",
                      file=sys.stderr)
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, GraphError, PartitionError, DimensionMismatchError,
            EnumerationLimitError, ConstantVectorError,
            ConstraintViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EigensolverError, DegenerateWeightsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
