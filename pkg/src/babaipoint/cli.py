"""Command-line front ends ``dbp`` (protocol) and ``perr`` (error probability).

Exit codes: 0 success, 2 precondition or condition failures, 3 parse errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import reports
from .bounds import BoundInputs, chebyshev_bound, combined_bound, exclusion_bound, gaussian_threshold
from .catalog import catalog_lookup
from .errorprob import (
    perr_2d_closed_form,
    perr_2d_from_basis,
    perr_3d_polyhedral,
    perr_mc_gaussian,
    perr_mc_uniform,
    random_superbase_scatter,
)
from .errors import (
    ConditionFailed,
    LatticeError,
    ParseError,
    PreconditionError,
    PreconditionViolation,
    UnknownLattice,
)
from .latfile import resolve_lattice
from .lattice import covering_radius
from .protocol import (
    decode,
    encode,
    parse_source,
    rate_exact_uniform,
    rate_monte_carlo,
    ratio_rows,
    reachable_sets,
    simulate,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_PARSE = 0, 2, 3


def _globals():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="random seed (required for stochastic commands)")
    g.add_argument("--out", default=None, help="write output to this file instead of stdout")
    g.add_argument("--format", choices=["json", "csv"], default=None, help="output format")
    g.add_argument("--tol-rational", type=float, default=1e-9, help="tolerance for recovering row ratios")
    g.add_argument("--max-den", type=int, default=10**6, help="largest denominator for row ratios")
    return p


def _emit(args, payload, columns=None, config=None):
    fmt = args.format or ("csv" if columns else "json")
    if fmt == "csv":
        rows = payload if isinstance(payload, list) else [_flatten(payload)]
        cols = columns or list(rows[0].keys())
        text = reports.to_csv(rows, cols, config or {"command": args.command})
    else:
        text = reports.to_json(payload)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def _need_seed(args):
    if args.seed is None:
        raise PreconditionViolation(f"{args.command} needs --seed")


def _config(args, **extra):
    keep = {k: v for k, v in vars(args).items() if k not in ("out", "func", "format")}
    keep.update(extra)
    return keep


def _run(parser, argv):
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help()
        return EXIT_PRECONDITION
    try:
        return args.func(args) or EXIT_OK
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except LatticeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


# ---------------------------------------------------------------- dbp


def _source_or_none(text):
    return None if text in (None, "none", "full") else parse_source(text)


def _dbp_simulate(args):
    _need_seed(args)
    B = resolve_lattice(args.lattice)
    rep = simulate(B, parse_source(args.source), args.trials, args.seed, transcript_limit=args.transcript)
    _emit(args, rep.to_json())
    return EXIT_OK if rep.mismatches == 0 else 1


def _dbp_rate(args):
    B = resolve_lattice(args.lattice)
    src = parse_source(args.source)
    if args.exact:
        if not hasattr(src, "A"):
            raise ValueError("--exact needs a uniform source")
        rep = rate_exact_uniform(B, src.A)
    else:
        _need_seed(args)
        rep = rate_monte_carlo(B, src, args.samples, args.seed)
    _emit(args, rep.to_json())


def _dbp_sets(args):
    B = resolve_lattice(args.lattice)
    rows = ratio_rows(B, args.max_den, args.tol_rational)
    sets = reachable_sets(B, _source_or_none(args.source), rows=rows, seed=args.seed or 0)
    out = {
        "source": args.source,
        "rows": [
            {"m": r.m + 1, "q": r.q, "ratios": {str(l + 1): str(v) for l, v in r.ratios.items()},
             "S": list(s.values), "provenance": s.provenance}
            for r, s in zip(rows, sets)
        ],
    }
    _emit(args, out)


def _dbp_encode(args):
    B = resolve_lattice(args.lattice)
    x = [float(v) for v in args.x.split(",")]
    if len(x) != B.n:
        raise ValueError(f"--x needs {B.n} comma-separated values")
    rows = ratio_rows(B, args.max_den, args.tol_rational)
    sets = reachable_sets(B, _source_or_none(args.source), rows=rows)
    xt = B.Q.T @ np.array(x)
    msgs = [encode(m, float(xt[m]), B, sets[m]) for m in range(B.n - 1, -1, -1)]
    u = decode(msgs, B, rows)
    _emit(args, {
        "x_triangular": [float(v) for v in xt],
        "messages": [{"m": m.m + 1, "u_tilde": m.u_tilde, "s": m.s} for m in msgs],
        "q": [r.q for r in rows],
        "u": [int(v) for v in u],
    })


def _dbp_fig3(args):
    rows = reports.run_fig3(args.m_max, args.m_min, args.A)
    _emit(args, rows, reports.FIG3_COLUMNS, _config(args))


def build_dbp_parser():
    g = _globals()
    p = argparse.ArgumentParser(prog="dbp", description="Distributed Babai protocol")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("simulate", parents=[g], help="run sensors and central node, compare with direct decoding")
    s.add_argument("--lattice", required=True, help="lattice file or catalog name")
    s.add_argument("--source", default="uniform:A=5")
    s.add_argument("--trials", type=int, default=100000)
    s.add_argument("--transcript", type=int, default=10, help="number of trials echoed in the transcript")
    s.set_defaults(func=_dbp_simulate)

    s = sub.add_parser("rate", parents=[g], help="per-sensor entropies and sum rate")
    s.add_argument("--lattice", required=True)
    s.add_argument("--source", default="uniform:A=5")
    s.add_argument("--exact", action="store_true", help="exact computation (uniform source)")
    s.add_argument("--samples", type=int, default=10**6)
    s.set_defaults(func=_dbp_rate)

    s = sub.add_parser("sets", parents=[g], help="row ratios, q_m and reachable sets")
    s.add_argument("--lattice", required=True)
    s.add_argument("--source", default="uniform:A=5", help="source description, or 'none' for full sets")
    s.set_defaults(func=_dbp_sets)

    s = sub.add_parser("encode", parents=[g], help="encode and decode a single observation")
    s.add_argument("--lattice", required=True)
    s.add_argument("--x", required=True, help="comma-separated observation")
    s.add_argument("--source", default="none", help="source description, or 'none' for full sets")
    s.set_defaults(func=_dbp_encode)

    s = sub.add_parser("sweep-fig3", parents=[g], help="exact rates for (1,0), (1/m, sqrt(1-1/m^2))")
    s.add_argument("--m-min", type=int, default=2)
    s.add_argument("--m-max", type=int, default=120)
    s.add_argument("--A", type=float, default=5.0)
    s.set_defaults(func=_dbp_fig3)
    return p


def dbp_main(argv=None):
    return _run(build_dbp_parser(), argv)


# ---------------------------------------------------------------- perr


def _perr_closed2d(args):
    _emit(args, perr_2d_closed_form(args.a, args.b).to_json())


def _perr_poly(args):
    B = resolve_lattice(args.lattice)
    if B.n == 2:
        rep = perr_2d_from_basis(B)
    else:
        rep = perr_3d_polyhedral(B, search_permutations=not args.no_perm_search)
    _emit(args, rep.to_json())


def _perr_mc(args):
    _need_seed(args)
    B = resolve_lattice(args.lattice)
    if args.dist == "uniform":
        rep = perr_mc_uniform(B, args.samples, args.seed, args.workers)
    else:
        src = parse_source(args.dist)
        if not hasattr(src, "sigma"):
            raise ValueError("--dist must be 'uniform' or 'gauss:sigma=S'")
        rep = perr_mc_gaussian(B, src.sigma, args.samples, args.seed, args.workers)
    _emit(args, rep.to_json())


def _bound_inputs(args):
    try:
        entry = catalog_lookup(args.lattice)
        sizes = tuple(entry.sizes())
        r = entry.covering_radius
        basis = entry.basis
    except UnknownLattice:
        basis = resolve_lattice(args.lattice)
        sizes, r = tuple(basis.babai_sizes), None
    if args.r_cov is not None:
        r = args.r_cov
    if r is None:
        r = covering_radius(basis)
    return BoundInputs(sizes, r)


def _perr_bounds(args):
    inp = _bound_inputs(args)
    out = {"sizes": list(inp.sizes), "r_cov": inp.r_cov, "n": inp.n, "delta": inp.delta, "m": inp.m}
    code = EXIT_OK
    for name, fn in (("chebyshev", chebyshev_bound), ("exclusion", exclusion_bound), ("combined", combined_bound)):
        try:
            out[name] = fn(inp).to_json()
        except ConditionFailed as e:
            out[name] = {"error": str(e), "condition": e.condition}
            code = EXIT_PRECONDITION
    _emit(args, out)
    return code


def _perr_threshold(args):
    B = resolve_lattice(args.lattice)
    _emit(args, gaussian_threshold(B, args.sigma).to_json())


def _perr_eq8(args):
    _emit(args, reports.run_eq8(args.steps), reports.EQ8_COLUMNS, _config(args))


def _perr_scatter(args):
    _need_seed(args)
    rows = random_superbase_scatter(args.count, args.seed)
    _emit(args, rows, reports.SCATTER_COLUMNS, _config(args))


def _perr_table1(args):
    _emit(args, reports.run_table1(), reports.TABLE1_COLUMNS, _config(args))


def _perr_fig5(args):
    _need_seed(args)
    _emit(args, reports.run_fig5(args.count, args.seed), reports.FIG5_COLUMNS, _config(args))


def _perr_fig7(args):
    _emit(args, reports.run_fig7(args.steps, args.density_min), reports.FIG7_COLUMNS, _config(args))


def _perr_fig8(args):
    _need_seed(args)
    rows = reports.run_fig8(args.samples, args.seed, workers=args.workers)
    _emit(args, rows, reports.FIG8_COLUMNS, _config(args))


def build_perr_parser():
    g = _globals()
    p = argparse.ArgumentParser(prog="perr", description="Babai-point error probability")
    sub = p.add_subparsers(dest="command")

    s = sub.add_parser("closed2d", parents=[g], help="closed form for the basis (1,0), (a,b)")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.set_defaults(func=_perr_closed2d)

    s = sub.add_parser("poly3d", parents=[g], help="exact polyhedral P_e (n = 3; n = 2 by polygons)")
    s.add_argument("--lattice", required=True)
    s.add_argument("--no-perm-search", action="store_true")
    s.set_defaults(func=_perr_poly)

    s = sub.add_parser("mc", parents=[g], help="Monte Carlo P_e")
    s.add_argument("--lattice", required=True)
    s.add_argument("--dist", default="uniform", help="'uniform' or 'gauss:sigma=S'")
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_perr_mc)

    s = sub.add_parser("bounds", parents=[g], help="Chebyshev, exclusion and combined bounds on P_c")
    s.add_argument("--lattice", required=True, help="catalog name or lattice file")
    s.add_argument("--r-cov", type=float, default=None, help="override the covering radius")
    s.set_defaults(func=_perr_bounds)

    s = sub.add_parser("threshold", parents=[g], help="Gaussian noise-variance thresholds")
    s.add_argument("--lattice", required=True)
    s.add_argument("--sigma", type=float, default=None)
    s.set_defaults(func=_perr_threshold)

    s = sub.add_parser("sweep-eq8", parents=[g], help="well-rounded family sweep")
    s.add_argument("--steps", type=int, default=31)
    s.set_defaults(func=_perr_eq8)

    s = sub.add_parser("scatter", parents=[g], help="random obtuse superbases: density vs P_e")
    s.add_argument("--count", type=int, default=200)
    s.set_defaults(func=_perr_scatter)

    s = sub.add_parser("table1", parents=[g], help="known 3-D lattices: density and minimum P_e")
    s.set_defaults(func=_perr_table1)

    s = sub.add_parser("fig5", parents=[g], help="scatter plus known-lattice overlay")
    s.add_argument("--count", type=int, default=200)
    s.set_defaults(func=_perr_fig5)

    s = sub.add_parser("fig7", parents=[g], help="minimum 2-D P_e against packing density")
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--density-min", type=float, default=0.5)
    s.set_defaults(func=_perr_fig7)

    s = sub.add_parser("fig8", parents=[g], help="Gaussian P_e over a sigma x density grid")
    s.add_argument("--samples", type=int, default=10**5)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_perr_fig8)
    return p


def perr_main(argv=None):
    return _run(build_perr_parser(), argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(perr_main())
