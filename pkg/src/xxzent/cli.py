"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical non-convergence (partial
output is still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from . import ed
from .bethe import NonConvergence, SolverOptions, solution_to_json, solve_ground_state
from .observables import concurrence_xxz, inverse_correlation_length
from .pipeline import (
    SweepTable,
    even_odd_csv,
    even_odd_study,
    figure_csv,
    figure_table,
    delta_grid,
    fit_quadratic_scaling,
    fit_xi_scaling,
    parse_range,
    run_sweep,
    write_text,
)

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _options(args) -> SolverOptions:
    opts = SolverOptions()
    if args.tol:
        opts = replace(opts, tol=args.tol)
    if args.max_iter:
        opts = replace(opts, max_iter=args.max_iter)
    return opts


def _grid(args) -> list[float]:
    if args.delta_range:
        return delta_grid(*parse_range(args.delta_range))
    if args.delta is not None:
        return [args.delta]
    raise UsageError("either --delta or --delta-range is required")


def _table(args) -> SweepTable:
    if getattr(args, "input", None):
        with open(args.input) as fh:
            return SweepTable.from_csv(fh.read())
    if not args.delta_range:
        raise UsageError("--delta-range (or --input) is required")
    lo, hi, step = parse_range(args.delta_range)
    return run_sweep(args.n, lo, hi, step, args.method, _options(args), args.threads)


def cmd_solve(args) -> int:
    if args.n is None or args.delta is None:
        raise UsageError("solve needs --n and --delta")
    sol = solve_ground_state(args.n, args.delta, _options(args))
    _emit(solution_to_json(sol), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    table = _table(args)
    _emit(table.to_csv(), args.out)
    return EXIT_NONCONVERGENCE if table.failures else EXIT_OK


def cmd_xi(args) -> int:
    lines = ["delta,inv_xi,xi"]
    for d in _grid(args):
        inv, _ = inverse_correlation_length(d, args.tol or 1e-12)
        xi = format(1.0 / inv, ".12g") if inv > 0 else "inf"
        lines.append(f"{d:.12g},{inv:.12g},{xi}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    table = _table(args)
    if args.model == "quadratic":
        window = parse_range(args.window)[:2] if args.window else (0.0, 1.3)
        fit = fit_quadratic_scaling(table, window)
    else:
        limit = None if args.window == "all" else float(args.window or 0.25)
        fit = fit_xi_scaling(table, limit)
    _emit(fit.to_json(), args.out)
    return EXIT_NONCONVERGENCE if table.failures else EXIT_OK


def cmd_ed(args) -> int:
    if args.n is None:
        raise UsageError("ed needs --n")
    if args.what == "evenodd":
        delta = 1.0 if args.delta is None else args.delta
        _emit(even_odd_csv(even_odd_study(args.n, delta)), args.out)
        return EXIT_OK
    if args.delta is None:
        raise UsageError("ed energy/concurrence need --delta")
    g = ed.ground_state_ed(args.n, args.delta)
    if args.what == "energy":
        payload = {"n": args.n, "delta": args.delta, "energy": g.energy,
                   "energy_per_site": g.energy / args.n, "degenerate": g.degeneracy_flag}
    else:
        rho = ed.two_site_rdm(g)
        gz = ed.gzz_direct(g)
        payload = {"n": args.n, "delta": args.delta,
                   "wootters": ed.wootters_concurrence(rho),
                   "x_state": ed.x_state_concurrence(rho),
                   "from_energy": concurrence_xxz(g.energy / args.n, gz, args.delta),
                   "gzz": gz, "degenerate": g.degeneracy_flag,
                   "rdm": [[[v.real, v.imag] for v in row] for row in rho.entries]}
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_figure(args) -> int:
    params = {"options": _options(args), "threads": args.threads}
    if args.n is not None:
        params["n_sites"] = args.n
    if args.delta_range:
        params["grid"] = delta_grid(*parse_range(args.delta_range))
    if args.sizes:
        params["sizes"] = [int(s) for s in args.sizes.split(",")]
    table = figure_table(args.figure_id, **params)
    _emit(figure_csv(args.figure_id, table), args.out)
    return EXIT_NONCONVERGENCE if table.failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of sites")
    common.add_argument("--delta", type=float, help="anisotropy")
    common.add_argument("--delta-range", help="lo:hi:step")
    common.add_argument("--method", choices=["bethe", "thermo", "ed"], default="bethe")
    common.add_argument("--tol", type=float, help="solver tolerance")
    common.add_argument("--max-iter", type=int, help="Newton iteration cap")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="xxzent", description="Concurrence of the XXZ ring from the Bethe ansatz.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="single Bethe solve, JSON out").set_defaults(func=cmd_solve)
    sub.add_parser("sweep", parents=[common], help="observables over a delta grid").set_defaults(func=cmd_sweep)
    sub.add_parser("xi", parents=[common], help="correlation length").set_defaults(func=cmd_xi)
    fit = sub.add_parser("fit", parents=[common], help="scaling-law fits")
    fit.add_argument("model", choices=["quadratic", "xi"])
    fit.add_argument("--input", help="sweep CSV to fit instead of running a sweep")
    fit.add_argument("--window", help="quadratic: lo:hi in delta; xi: max 1/xi or 'all'")
    fit.set_defaults(func=cmd_fit)
    edp = sub.add_parser("ed", parents=[common], help="exact diagonalization")
    edp.add_argument("what", choices=["energy", "concurrence", "evenodd"])
    edp.set_defaults(func=cmd_ed)
    fig = sub.add_parser("figure", parents=[common], help="figure data as CSV")
    fig.add_argument("figure_id", type=int, choices=[1, 2, 3])
    fig.add_argument("--sizes", help="comma-separated sizes for figure 3")
    fig.set_defaults(func=cmd_figure)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NonConvergence as exc:
        print(f"xxzent: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (UsageError, ValueError) as exc:
        print(f"xxzent: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"xxzent: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
