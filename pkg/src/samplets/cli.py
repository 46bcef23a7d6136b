"""Command-line front end: ``samplets {synth,analyze,transform,bench}``.

Exit codes
----------
0  success
1  unexpected failure (I/O and the like)
2  usage error
3  input could not be parsed or failed validation
4  tree structure error (e.g. ``--grid`` on non-grid input)
5  ``bench`` measured a per-doubling time ratio above the limit

``--degree`` is the polynomial degree q; samplets then carry q + 1
vanishing moments, so the ``q + 1 = 5`` setting corresponds to
``--degree 4``. The environment variable ``SAMPLET_THREADS`` caps the
number of BLAS threads.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys
import time

import numpy as np

from . import signals
from .basis import build_basis
from .pipeline import analyze as run_analysis
from .pipeline import dyadic_grid_level
from .pointset import PointSetError, load_points, save_points, write_pgm
from .smoothness import (EPS_DROP, RATIO_TOL, alpha_heatmap,
                         compute_exponents, save_chart, save_mask,
                         threshold_chart)
from .transform import forward, inverse, save_coefficients
from .tree import (StructureError, build_tree, build_tree_gridded,
                   default_leaf_capacity)

EXIT_OK, EXIT_OTHER, EXIT_USAGE = 0, 1, 2
EXIT_INPUT, EXIT_STRUCTURE, EXIT_BENCH = 3, 4, 5

BENCH_RATIO_LIMIT = 2.5
DEFAULT_LADDER = "100000,200000,400000,800000"


class UsageError(Exception):
    pass


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _ladder(text):
    try:
        ns = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected n1,n2,...") from None
    if len(ns) < 2 or min(ns) < 1:
        raise argparse.ArgumentTypeError("need at least two sizes >= 1")
    return ns


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--degree", type=_nonneg_int, default=2,
                        help="polynomial degree q (q + 1 vanishing moments)")
    common.add_argument("--leaf-capacity", type=_positive_int, default=None,
                        help="max points per leaf (default 2 * C(q+d, d))")
    common.add_argument("--grid", action="store_true",
                        help="force the bottom-up builder for image grids")
    common.add_argument("--output-prefix", default="samplets",
                        help="prefix of every output file")
    common.add_argument("--seed", type=int, default=0)

    inp = argparse.ArgumentParser(add_help=False)
    inp.add_argument("--input", required=True)
    inp.add_argument("--format", choices=("csv", "xyz", "pgm"), default=None,
                     help="input format (default: from the extension)")
    inp.add_argument("--dim", type=_positive_int, default=None,
                     help="coordinates per row for csv/xyz (default: "
                          "number of columns minus one)")

    fit = argparse.ArgumentParser(add_help=False)
    fit.add_argument("--threshold", type=_positive_float, default=None,
                     help="flag points whose slope is below this value")
    fit.add_argument("--ratio-tol", type=_positive_float, default=RATIO_TOL)
    fit.add_argument("--eps-drop", type=_positive_float, default=EPS_DROP)

    p = argparse.ArgumentParser(
        prog="samplets",
        description="Samplet transforms and local smoothness charts.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common],
                       help="sample a built-in test signal")
    s.add_argument("name", choices=signals.SIGNALS)
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--dim", type=_positive_int, default=2,
                   help="dimension of the 'poly' signal")
    s.add_argument("--format", choices=("csv", "xyz", "pgm"), default="csv")

    sub.add_parser("analyze", parents=[common, inp, fit],
                   help="smoothness chart of point values")
    sub.add_parser("transform", parents=[common, inp],
                   help="samplet coefficients of point values")

    b = sub.add_parser("bench", parents=[common, fit],
                       help="timings over a ladder of sizes")
    b.add_argument("--bench-ladder", type=_ladder,
                   default=_ladder(DEFAULT_LADDER))
    b.add_argument("--dim", type=_positive_int, default=1,
                   help="1 benchmarks f1, otherwise a random polynomial")
    b.add_argument("--repeats", type=_positive_int, default=3,
                   help="best-of repeats per size")
    return p


def _infer_dim(path, fmt):
    delim = "," if fmt == "csv" else None
    with open(path) as fh:
        for line in fh:
            s = line.strip()
            if s and not s.startswith("#"):
                return max(len(s.split(delim)) - 1, 1)
    return 1


def _load(args):
    fmt = args.format
    if fmt is None:
        fmt = os.path.splitext(args.input)[1].lstrip(".").lower()
        if fmt not in ("csv", "xyz", "pgm"):
            raise UsageError(f"cannot infer format of {args.input!r}; "
                             "pass --format")
    dim = args.dim
    if fmt != "pgm" and dim is None:
        dim = _infer_dim(args.input, fmt)
    return load_points(args.input, fmt, dim)


def _use_grid(args, ps):
    if args.grid:
        if dyadic_grid_level(ps) is None:
            raise StructureError("--grid needs a square 2^J x 2^J image")
        return True
    # image input takes the bottom-up path unless a capacity is requested
    return args.leaf_capacity is None and dyadic_grid_level(ps) is not None


def cmd_synth(args):
    ps = signals.synth(args.name, args.n, seed=args.seed, degree=args.degree,
                       dim=args.dim)
    path = f"{args.output_prefix}.{args.format}"
    if args.format == "pgm":
        if ps.image_shape is None:
            raise UsageError("pgm output needs a gridded 2D signal with "
                             "n = 4^k")
        v = ps.values
        if v.min() < 0 or v.max() > 1:
            raise UsageError("pgm output needs values in [0, 1]")
        write_pgm(path, np.rint(255 * v).astype(np.int64)
                  .reshape(ps.image_shape))
    else:
        save_points(ps, path, args.format)
    print(f"wrote {ps.count} points to {path}")
    return EXIT_OK


def cmd_analyze(args):
    ps = _load(args)
    res = run_analysis(ps, args.degree, leaf_capacity=args.leaf_capacity,
                       gridded=_use_grid(args, ps), ratio_tol=args.ratio_tol,
                       eps_drop=args.eps_drop)
    pre = args.output_prefix
    save_chart(f"{pre}_chart.csv", ps, res.chart)
    written = [f"{pre}_chart.csv"]
    if args.threshold is not None:
        mask = threshold_chart(res.chart, args.threshold)
        ext = "pgm" if ps.image_shape is not None else "csv"
        save_mask(f"{pre}_mask.{ext}", ps, mask)
        written.append(f"{pre}_mask.{ext}")
        print(f"flagged {int(mask.sum())} of {ps.count} points below slope "
              f"{args.threshold:g}")
    if ps.image_shape is not None:
        write_pgm(f"{pre}_alpha.pgm", alpha_heatmap(res.chart, ps.image_shape))
        written.append(f"{pre}_alpha.pgm")
    t = res.timings
    print(f"N={ps.count} d={ps.dim} q={args.degree} "
          f"leaves={res.tree.leaves().size} depth={res.tree.depth}")
    for k in ("tree/basis", "transform", "fit"):
        print(f"{k:>10s}: {t[k]:.3f} s")
    print("wrote " + ", ".join(written))
    return EXIT_OK


def cmd_transform(args):
    ps = _load(args)
    if _use_grid(args, ps):
        tree = build_tree_gridded(ps, dyadic_grid_level(ps))
    else:
        cap = args.leaf_capacity or default_leaf_capacity(args.degree, ps.dim)
        tree = build_tree(ps, cap)
    basis = build_basis(tree, ps, args.degree)
    c = forward(basis, ps.values)
    back = inverse(basis, c)
    path = f"{args.output_prefix}_coefficients.csv"
    save_coefficients(path, c.data)
    err = np.max(np.abs(back.data - ps.values))
    nf = np.linalg.norm(ps.values)
    rel = abs(np.linalg.norm(c.data) - nf) / nf if nf > 0 else 0.0
    print(f"N={ps.count} roundtrip max error {err:.3e}, "
          f"relative norm change {rel:.3e}")
    print(f"wrote {path}")
    return EXIT_OK


def _bench_points(n, dim, degree, seed):
    if dim == 1:
        return signals.synth("f1", n, seed=seed)
    return signals.synth("poly", n, seed=seed, degree=degree + 1, dim=dim)


def run_bench(ladder, dim=1, degree=4, leaf_capacity=None, repeats=3,
              seed=0, ratio_tol=RATIO_TOL, eps_drop=EPS_DROP):
    """Best-of-``repeats`` timings per size.

    Returns rows ``(n, build_seconds, fit_seconds)`` where build covers
    tree, basis and forward transform.
    """
    rows = []
    for n in ladder:
        ps = _bench_points(n, dim, degree, seed)
        cap = leaf_capacity or default_leaf_capacity(degree, ps.dim)
        best_build = best_fit = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            tree = build_tree(ps, cap)
            basis = build_basis(tree, ps, degree)
            c = forward(basis, ps.values)
            t1 = time.perf_counter()
            compute_exponents(basis, c, ratio_tol, eps_drop)
            t2 = time.perf_counter()
            best_build = min(best_build, t1 - t0)
            best_fit = min(best_fit, t2 - t1)
        rows.append((n, best_build, best_fit))
    return rows


def doubling_ratios(rows):
    """Time ratios normalized to one doubling of N between ladder rungs."""
    out = []
    for (n0, b0, f0), (n1, b1, f1) in zip(rows, rows[1:]):
        steps = np.log2(n1 / n0)
        out.append(((b1 / b0) ** (1 / steps), (f1 / f0) ** (1 / steps)))
    return out


def cmd_bench(args):
    rows = run_bench(args.bench_ladder, args.dim, args.degree,
                     args.leaf_capacity, args.repeats, args.seed,
                     args.ratio_tol, args.eps_drop)
    print(f"{'N':>10s} {'tree+basis+T (s)':>17s} {'fit (s)':>9s}")
    for n, b, f in rows:
        print(f"{n:>10d} {b:>17.4f} {f:>9.4f}")
    ok = True
    for (n0, *_), (n1, *_), (rb, rf) in zip(rows, rows[1:],
                                          doubling_ratios(rows)):
        bad = rb > BENCH_RATIO_LIMIT or rf > BENCH_RATIO_LIMIT
        ok &= not bad
        print(f"{n0}->{n1}: per-doubling ratio build {rb:.2f}, fit {rf:.2f}"
              + ("  EXCEEDS LIMIT" if bad else ""))
    return EXIT_OK if ok else EXIT_BENCH


COMMANDS = {"synth": cmd_synth, "analyze": cmd_analyze,
            "transform": cmd_transform, "bench": cmd_bench}


def _thread_limit():
    n = os.environ.get("SAMPLET_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=max(int(n), 1))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except PointSetError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StructureError as exc:
        print(f"structure error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
