"""Command-line front end: inference, certification, strength reports,
and the experiment harness.

Exit codes follow one contract everywhere: 0 when the requested thing
succeeded (a bound holds, inference converged, files written), 1 when it
ran but the answer is negative (no bound holds, not converged), 2 on any
error.  Experiment subcommands write a CSV plus a companion figure.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .certificate import certificates_to_csv
from .certify_general import certify_spectral_general, l1_condition_general
from .engine import run
from .factor_graph import FactorGraph, ModelError, load_model, save_model
from .ising import to_binary_pairwise
from .strength import (heskes_sigma, ihler_strength, potential_strength,
                       simon_strength)
from . import experiments as ex

ALL_BOUNDS = ("linfty", "l1", "spectral", "improved", "dobrushin", "simon",
              "heskes")
GENERAL_BOUNDS = ("l1", "spectral")


def _positive_int(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-9,
                   help="numeric tolerance (default 1e-9)")
    p.add_argument("--max-iters", type=int, default=10000,
                   help="iteration cap for message passing (default 10000)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker cap; results are identical for any value "
                        "(current implementation runs single-threaded)")


def _load(path):
    with open(path) as fh:
        return load_model(fh.read())


def _emit(text, out_path):
    if out_path:
        tmp = f"{out_path}.tmp.{os.getpid()}"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    else:
        sys.stdout.write(text)


def _binary_model_or_none(fg):
    if all(c == 2 for c in fg.cardinalities) and \
            all(len(f.scope) <= 2 for f in fg.factors) and \
            all(np.all(f.table > 0) for f in fg.factors):
        return to_binary_pairwise(fg)
    return None


def cmd_certify(args):
    fg = _load(args.model)
    model = _binary_model_or_none(fg)
    if args.bounds:
        names = tuple(args.bounds.split(","))
    else:
        names = ALL_BOUNDS if model is not None else GENERAL_BOUNDS
    certs = []
    for name in names:
        if name not in ALL_BOUNDS:
            raise ValueError(f"unknown bound {name!r}; choose from "
                             f"{','.join(ALL_BOUNDS)}")
        if model is not None:
            certs.append(ex.evaluate_bound(name, model, m=args.m,
                                           tol=args.tol))
        elif name == "l1":
            certs.append(l1_condition_general(fg))
        elif name == "spectral":
            certs.append(certify_spectral_general(fg, tol=args.tol))
        else:
            raise ValueError(
                f"bound {name!r} needs a strictly positive binary pairwise "
                "model; this model only supports l1,spectral")
    _emit(certificates_to_csv(certs), args.out)
    return 0 if any(c.holds for c in certs) else 1


def cmd_infer(args):
    fg = _load(args.model)
    result = run(fg, max_iters=args.max_iters, tol=args.tol,
                 init=args.init, seed=args.seed)
    _emit(result.to_json(indent=2) + "\n", args.out)
    return 0 if result.converged else 1


def cmd_strength(args):
    fg = _load(args.model)
    lines = ["factor_id,i,j,N,D,simon,sigma"]
    for f_idx, f in enumerate(fg.factors):
        sigma = heskes_sigma(f.table)
        if len(f.scope) == 1:
            lines.append(f"{f_idx},{f.scope[0]},,,,,{sigma:.12g}")
            continue
        positive = bool(np.all(f.table > 0))
        for a in range(len(f.scope)):
            for b in range(a + 1, len(f.scope)):
                i, j = f.scope[a], f.scope[b]
                n_val = potential_strength(f, i, j)
                if len(f.scope) == 2 and positive:
                    d_cell = f"{ihler_strength(f.table):.12g}"
                    s_cell = f"{simon_strength(f.table):.12g}"
                else:
                    d_cell = s_cell = ""
                lines.append(f"{f_idx},{i},{j},{n_val:.12g},{d_cell},"
                             f"{s_cell},{sigma:.12g}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_absorb(args):
    """Fold zero-containing single-variable factors into an incident
    multi-variable factor so the zero-support hypothesis can apply."""
    fg = _load(args.model)
    singles = {}
    keep = []
    for f_idx, f in enumerate(fg.factors):
        if len(f.scope) == 1 and np.any(f.table <= 0):
            singles.setdefault(f.scope[0], []).append(f_idx)
        else:
            keep.append(f_idx)
    if not singles:
        _emit(save_model(fg), args.out)
        return 0
    new_factors = []
    absorbed = set()
    for f_idx in keep:
        f = fg.factors[f_idx]
        table = f.table
        if len(f.scope) >= 2:
            for pos, v in enumerate(f.scope):
                if v in singles and v not in absorbed:
                    for s_idx in singles[v]:
                        shape = [1] * table.ndim
                        shape[pos] = table.shape[pos]
                        table = table * fg.factors[s_idx].table.reshape(shape)
                    absorbed.add(v)
        new_factors.append((f.scope, table))
    left_over = set(singles) - absorbed
    if left_over:
        raise ModelError(
            f"variables {sorted(left_over)} have zero-containing "
            "single-variable factors but no multi-variable factor to absorb "
            "them into")
    out_fg = FactorGraph(fg.cardinalities, new_factors)
    _emit(save_model(out_fg), args.out)
    return 0


def _figure_path(out_path):
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def cmd_experiment(args):
    if not args.out:
        raise ValueError("experiment needs --out PATH for the CSV")
    bounds = tuple(args.bounds.split(",")) if args.bounds else None
    if args.kind == "plane":
        bounds = bounds or ("linfty", "l1", "spectral", "improved",
                            "dobrushin", "simon", "heskes")
        j_lo, j_hi, j_n = args.j_grid
        t_lo, t_hi, t_n = args.theta_grid
        rows = ex.sweep_plane(args.n, np.linspace(j_lo, j_hi, int(j_n)),
                              np.linspace(t_lo, t_hi, int(t_n)), bounds,
                              m=args.m, tol=args.tol)
        ex.write_csv(args.out, ex.PLANE_HEADER, rows, master_seed=args.seed)
        if not args.no_figure:
            from .plots import plot_plane
            plot_plane(rows, _figure_path(args.out))
    elif args.kind == "polar":
        bounds = bounds or ("l1", "spectral", "empirical")
        empirical_opts = {"inits": args.inits, "seed": args.seed,
                          "tol": min(args.tol, 1e-9),
                          "max_iters": args.max_iters,
                          "stall_window": 3000,
                          "divergence_limit": 1e6}
        rows = ex.polar_sweep(args.width, args.height, args.angles,
                              args.instances, bounds,
                              master_seed=args.seed, tol=args.bisect_tol,
                              r_max=args.r_max, m=args.m,
                              empirical_opts=empirical_opts)
        ex.write_csv(args.out, ex.POLAR_HEADER, rows, master_seed=args.seed)
        if not args.no_figure:
            from .plots import plot_polar
            plot_polar(rows, _figure_path(args.out))
    elif args.kind == "wins":
        bounds = bounds or ("dobrushin", "spectral", "heskes", "improved")
        table = ex.win_table(args.trials, args.n, args.seed, bounds,
                             m=args.m, tol=args.tol, keep_records=False)
        ex.write_csv(args.out, ex.WINS_HEADER, ex.wins_rows(table),
                     master_seed=args.seed)
        if not args.no_figure:
            from .plots import plot_wins
            plot_wins(table, _figure_path(args.out))
    else:
        raise ValueError(f"unknown experiment kind {args.kind!r}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bpcert",
        description="Belief propagation with certified convergence bounds")
    parser.add_argument("--version", action="version",
                        version=f"bpcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="evaluate convergence bounds")
    p.add_argument("--model", required=True, help="model file path")
    p.add_argument("--bounds",
                   help=f"comma list from {','.join(ALL_BOUNDS)} "
                        "(default: all applicable)")
    p.add_argument("--m", type=int, default=1,
                   help="interval depth for the improved bound (default 1)")
    _add_common(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("infer", help="run message passing and print beliefs")
    p.add_argument("--model", required=True)
    p.add_argument("--init", choices=("uniform", "random"), default="uniform")
    _add_common(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("strength", help="per-factor strength measures as CSV")
    p.add_argument("--model", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_strength)

    p = sub.add_parser("absorb",
                       help="absorb zero-containing single-variable factors")
    p.add_argument("--model", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_absorb)

    p = sub.add_parser("experiment", help="run a sweep and write CSV + figure")
    p.add_argument("kind", choices=("plane", "polar", "wins"))
    p.add_argument("--bounds", help="comma list of bounds")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=4,
                   help="variables for plane/wins models (default 4)")
    p.add_argument("--trials", type=int, default=1000,
                   help="wins: number of random models (default 1000)")
    p.add_argument("--j-grid", type=float, nargs=3, default=(0.0, 1.5, 16),
                   metavar=("LO", "HI", "STEPS"), help="plane coupling grid")
    p.add_argument("--theta-grid", type=float, nargs=3, default=(0.0, 4.0, 16),
                   metavar=("LO", "HI", "STEPS"), help="plane field grid")
    p.add_argument("--width", type=int, default=6, help="polar torus width")
    p.add_argument("--height", type=int, default=6, help="polar torus height")
    p.add_argument("--angles", type=int, default=8,
                   help="polar: angles in [0, pi] (default 8)")
    p.add_argument("--instances", type=int, default=10,
                   help="polar: instances per angle (default 10)")
    p.add_argument("--r-max", type=float, default=2.0)
    p.add_argument("--bisect-tol", type=float, default=1e-3)
    p.add_argument("--inits", type=int, default=10,
                   help="random starts for the empirical verdict")
    p.add_argument("--no-figure", action="store_true",
                   help="skip the companion figure")
    _add_common(p)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 on --help; keep the contract
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
