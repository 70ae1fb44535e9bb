"""Command-line front end.

    layerscope cluster        --points FILE --metric M | --matrix FILE  [--kmax K]
    layerscope layer-points   ... [--global | --slice I | --branch] [--degree K]
    layerscope retract-check  ... --subsample 0,2 | --subsample-file F | --farthest N
                              [--k K --c C --eps E --delta D] [--corollary NAME]

Exit status: 0 verified or done, 1 conditions unmet, 2 input error,
3 soundness violation. Errors are written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Sequence

from . import __version__
from .clustering import ClusteringError, from_degree_rips, lesnick_clustering
from .exact import as_exact, format_value
from .gamma import build_gamma, gamma_to_dot
from .layer_points import (LayerPointSet, branch_points, global_branch_points, global_layer_points,
                           layer_points_to_dict, layer_points_to_dot, slice_branch_points)
from .metric import (METRICS, FiniteMetricSpace, MetricError, Subsample, density_radius,
                     directional_hausdorff, farthest_point_subsample, load_metric_space)
from .stability import (StabilityReport, check_k_positive_note, check_main_theorem,
                        check_smallparam, check_truncation_iso)

EXIT_OK, EXIT_UNMET, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2, 3


class UsageError(Exception):
    def __init__(self, message: str, kind: str = "usage", witness=None):
        super().__init__(message)
        self.kind = kind
        self.witness = witness


# --- input ----------------------------------------------------------------------------------

def _load(args) -> FiniteMetricSpace:
    if args.points is not None:
        return load_metric_space(args.points, args.metric)
    return load_metric_space(args.matrix)


def _parse_indices(text: str, Y: FiniteMetricSpace) -> tuple[int, ...]:
    """Comma or whitespace separated indices or point labels."""
    tokens = [t for t in text.replace(",", " ").split() if t]
    if not tokens:
        raise UsageError("subsample is empty", "subsample")
    by_name = {name: i for i, name in enumerate(Y.names)}
    out = []
    for t in tokens:
        if t in by_name and not t.lstrip("-").isdigit():
            out.append(by_name[t])
            continue
        try:
            out.append(int(t))
        except ValueError:
            raise UsageError(f"unknown subsample entry {t!r}", "subsample", [t]) from None
    if len(set(out)) != len(out):
        raise UsageError("subsample repeats a point", "subsample", out)
    bad = [i for i in out if not 0 <= i < Y.n]
    if bad:
        raise UsageError(f"subsample index out of range 0..{Y.n - 1}", "subsample", bad)
    return tuple(sorted(out))


def _subsample(args, Y: FiniteMetricSpace) -> Subsample:
    given = [x is not None for x in (args.subsample, args.subsample_file, args.farthest)]
    if sum(given) > 1:
        raise UsageError("give at most one of --subsample, --subsample-file, --farthest")
    if args.subsample is not None:
        return Subsample(Y, _parse_indices(args.subsample, Y))
    if args.subsample_file is not None:
        return Subsample(Y, _parse_indices(Path(args.subsample_file).read_text(), Y))
    if args.farthest is not None:
        return farthest_point_subsample(Y, args.farthest, args.seed)
    return Subsample(Y, tuple(range(Y.n)))


def _param(text):
    if text is None:
        return None
    try:
        return as_exact(text)
    except (TypeError, ValueError):
        raise UsageError(f"not a number: {text!r}", "parse", [text]) from None


# --- output ---------------------------------------------------------------------------------

def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _gamma_dict(g) -> dict:
    index = {e: i for i, e in enumerate(g.elements)}
    return {
        "elements": [
            {"cell": list(e[0]), "values": [format_value(x) for x in g.values(e)],
             "cluster": e[1], "members": sorted(g.cluster(e))}
            for e in g.elements
        ],
        "covers": [[index[a], index[b]] for a, b in g.covers()],
    }


# --- commands -------------------------------------------------------------------------------

def cmd_cluster(args) -> int:
    Z = _load(args)
    H = from_degree_rips(Z, args.kmax)
    g = build_gamma(H)
    if args.format == "dot":
        _emit(args, gamma_to_dot(g))
    else:
        _emit(args, _json({"schema": "layerscope.cluster/1", "clustering": H.to_dict(),
                           "gamma": _gamma_dict(g)}))
    return EXIT_OK


def cmd_layer_points(args) -> int:
    Z = _load(args)
    H = lesnick_clustering(Z, args.degree) if args.degree is not None else from_degree_rips(Z, args.kmax)
    g = build_gamma(H)
    if args.slice is not None and not 1 <= args.slice <= H.ndim:
        raise UsageError(f"--slice must lie in 1..{H.ndim}", "usage", [args.slice])
    if args.branch:
        if H.ndim == 1:
            lp = branch_points(g)
        else:
            slices = {i: slice_branch_points(g, i) for i in range(H.ndim)}
            lp = LayerPointSet(g, global_branch_points(g), slices, kind="branch")
    else:
        lp = global_layer_points(g)
    points = lp.slice_points[args.slice - 1] if args.slice is not None else lp.global_points
    if args.format == "dot":
        _emit(args, layer_points_to_dot(lp, points))
    else:
        d = layer_points_to_dict(lp, points)
        d["selection"] = f"slice-{args.slice}" if args.slice is not None else "global"
        _emit(args, _json(d))
    return EXIT_OK


def _defaults(Y, X, k, c, eps, delta):
    """eps = N_k, c = max(0, N_k - eps), delta = max(2h, N_k - eps, c)."""
    n_k = density_radius(X, Y, k)
    h = directional_hausdorff(Y, X)
    eps = n_k if eps is None else eps
    c = max(as_exact(0), n_k - eps) if c is None else c
    delta = max(2 * h, n_k - eps, c) if delta is None else delta
    return c, eps, delta


def cmd_retract_check(args) -> int:
    if args.format == "dot":
        raise UsageError("retract-check writes JSON only", "usage")
    Y = _load(args)
    c, eps, delta = _param(args.c), _param(args.eps), _param(args.delta)
    k = args.k
    report: StabilityReport
    if args.corollary == "truncation":
        report = check_truncation_iso(Y, c if c is not None else 0)
    elif args.corollary == "xy-note":
        X = tuple(range(Y.n))
        c, eps, delta = _defaults(Y, X, k, c, eps, delta)
        report = check_k_positive_note(Y, k, c, eps, delta)
    else:
        X = _subsample(args, Y)
        if args.corollary == "smallparam":
            report = check_smallparam(Y, X, k, force_full_merge=args.force_full_merge)
        else:
            c, eps, delta = _defaults(Y, X, k, c, eps, delta)
            report = check_main_theorem(Y, X, k, c, eps, delta,
                                        force_full_merge=args.force_full_merge)
    _emit(args, _json(report.to_dict()))
    return report.exit_code


# --- parser ---------------------------------------------------------------------------------

def _add_input(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="coordinate CSV (label, x1, ..., xd)")
    src.add_argument("--matrix", help="distance matrix CSV with a header of labels")
    p.add_argument("--metric", choices=METRICS, default=None,
                   help="metric for --points (default euclidean)")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--output", "-o", help="write here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized choices")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layerscope",
                                     description="Degree-Rips clustering layer points and retract checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="degree-Rips step clustering and its Gamma poset")
    _add_input(p)
    p.add_argument("--kmax", type=int, default=None, help="largest degree (default |Z|-1)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("layer-points", help="layer points or branch points")
    _add_input(p)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--degree", type=int, default=None,
                   help="analyse the single-parameter clustering at this degree")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--global", dest="glob", action="store_true", help="global layer points (default)")
    which.add_argument("--slice", type=int, default=None, help="layer points of slices along axis I (1-based)")
    p.add_argument("--branch", action="store_true", help="branch points instead of layer points")
    p.set_defaults(func=cmd_layer_points)

    p = sub.add_parser("retract-check", help="check the sample retract conditions and verify them")
    _add_input(p)
    p.add_argument("--subsample", help="indices or labels of the sample, e.g. 0,2")
    p.add_argument("--subsample-file", help="file listing the sample")
    p.add_argument("--farthest", type=int, default=None, help="farthest-point sample of this size")
    p.add_argument("--k", type=int, default=1, help="degree of the clustering of Y")
    p.add_argument("--c", default=None)
    p.add_argument("--eps", default=None)
    p.add_argument("--delta", default=None)
    p.add_argument("--corollary", choices=("smallparam", "truncation", "xy-note"), default=None)
    p.add_argument("--force-full-merge", action="store_true",
                   help="use every phase-change gap instead of those below the merge scale")
    p.set_defaults(func=cmd_retract_check)
    return parser


def _error(kind: str, message: str, witness=None) -> int:
    sys.stderr.write(json.dumps({"schema": "layerscope.error/1", "error": kind,
                                 "message": message, "witness": witness}) + "\n")
    return EXIT_ERROR


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_ERROR
    if getattr(args, "metric", None) is not None and args.points is None:
        return _error("usage", "--metric applies to --points input")
    if getattr(args, "points", None) is not None and args.metric is None:
        args.metric = "euclidean"
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return args.func(args)
    except MetricError as exc:
        return _error(exc.kind, str(exc), exc.witness)
    except UsageError as exc:
        return _error(exc.kind, str(exc), exc.witness)
    except ClusteringError as exc:
        return _error("clustering", str(exc), exc.witness)
    except (ValueError, OSError) as exc:
        return _error(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
