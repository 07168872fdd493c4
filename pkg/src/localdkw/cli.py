"""Command-line front end. Every subcommand writes CSV preceded by ``#`` header lines.

Exit codes: 0 on success, 2 on usage or domain errors (one-line
diagnostic on stderr), 1 on I/O errors.
"""
import argparse
import sys

import numpy as np

from . import __version__
from ._errors import LocalDkwError
from .exact_dkw import TailSide, UnitInterval, exceedance_probability
from .inversion import DEFAULT_TOL, RadiusQuery, confidence_band, invert_radius, massart_radius, tabulate
from .mc_oracle import RNG_NAME, McConfig, mc_exceedance, mc_report_rows
from .risk import cvar_loss_bounds, cvar_reward_bounds, make_ecdf, read_samples
from .time_uniform import SCHEMES, TimeUniformConfig, build_schedule, tu_band

FAMILIES = {
    "zero": [(0.0, 0.05), (0.0, 0.1), (0.0, 0.2), (0.0, 0.5), (0.0, 0.9), (0.0, 1.0)],
    "one": [(0.0, 1.0), (0.1, 1.0), (0.5, 1.0), (0.8, 1.0), (0.9, 1.0), (0.95, 1.0)],
}
FIGURE_EPS = np.linspace(1e-3, 1.0, 1000)
FIGURE_DELTA = np.linspace(0.001, 0.999, 1000)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    if isinstance(value, TailSide):
        return value.value
    return str(value)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _pair(text):
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected a,b, got {text!r}")
    return tuple(vals)


def _add_interval(p, tail=True):
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)
    if tail:
        p.add_argument("--tail", choices=[t.value for t in TailSide], default="above")


def _add_output(p):
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")


def build_parser():
    parser = _Parser(prog="localdkw", allow_abbrev=False,
                     description="Exact local DKW probabilities, radii, bands and risk bounds.")
    parser.add_argument("--version", action="version", version=f"localdkw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prob", allow_abbrev=False, help="exceedance probability")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    _add_interval(p)
    _add_output(p)

    p = sub.add_parser("invert", allow_abbrev=False, help="confidence radius")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    _add_interval(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_output(p)

    p = sub.add_parser("tabulate", allow_abbrev=False, help="radius tables and figure data")
    p.add_argument("--figure", choices=["delta0", "delta1", "epsilon0", "mcmc"], default=None)
    p.add_argument("--family", choices=sorted(FAMILIES), default="zero")
    p.add_argument("--n", type=_ints, required=True, help="n, or a comma list for tables")
    p.add_argument("--delta", type=_floats, default=None, help="comma list of levels")
    _add_interval(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=10_000)
    _add_output(p)

    p = sub.add_parser("band", allow_abbrev=False, help="confidence band from a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--delta", type=float, required=True)
    _add_interval(p, tail=False)
    p.add_argument("--support", type=_pair, default=None)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_output(p)

    p = sub.add_parser("cvar", allow_abbrev=False, help="CVaR point estimate and bounds")
    p.add_argument("--samples", required=True)
    p.add_argument("--side", choices=["reward", "loss"], default="reward")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--support", type=_pair, default=None)
    p.add_argument("--split", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_output(p)

    p = sub.add_parser("mc", allow_abbrev=False, help="Monte-Carlo check of the exact formula")
    p.add_argument("--n", type=int, required=True)
    _add_interval(p)
    p.add_argument("--eps", type=_floats, default=None, help="comma list (default: figure grid)")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("tu", allow_abbrev=False, help="time-uniform radii and schedules")
    p.add_argument("--schedule", choices=SCHEMES, default=None)
    p.add_argument("--T", type=int, default=100)
    p.add_argument("--xi", type=float, default=3.0)
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--g", default="TT1")
    p.add_argument("--eta-const", type=float, default=None)
    p.add_argument("--allow-uncertified", action="store_true")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=1.1)
    p.add_argument("--C", type=float, default=2.0)
    _add_interval(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_output(p)
    return parser


def _header(args, extra=()):
    # a replayable command line: unset options are dropped, switches are bare
    parts = [args.command]
    for k, v in sorted(vars(args).items()):
        if k in ("command", "output") or v is None or v is False:
            continue
        flag = "--" + k.replace("_", "-")
        parts.append(flag if v is True else f"{flag} {fmt_arg(v)}")
    lines = [f"# localdkw {__version__}", f"# argv: {' '.join(parts)}"]
    if getattr(args, "seed", None) is not None and args.command in ("mc", "tabulate"):
        lines.append(f"# seed={args.seed} rng={RNG_NAME}")
    lines.extend(extra)
    return lines


def fmt_arg(v):
    if isinstance(v, (list, tuple)):
        return ",".join(fmt(x) for x in v)
    if v is None:
        return "none"
    return fmt(v)


def _csv(columns, rows):
    out = [",".join(columns)]
    out.extend(",".join(fmt(v) for v in row) for row in rows)
    return out


def _single_n(args):
    if len(args.n) != 1:
        raise LocalDkwError("--figure takes a single --n")
    return args.n[0]


def _figure(args):
    n = _single_n(args)
    family = [UnitInterval(lo, hi) for lo, hi in FAMILIES[args.family]]
    names = [f"[{iv.lo:g};{iv.hi:g}]" for iv in family]
    if args.figure in ("delta0", "delta1"):
        tail = TailSide.ABOVE if args.figure == "delta0" else TailSide.BELOW
        rows = [[eps] + [exceedance_probability(n, eps, iv, tail) for iv in family]
                for eps in FIGURE_EPS.tolist()]
        return [f"# figure={args.figure} family={args.family} tail={tail.value} n={n}"], \
            _csv(["eps"] + names, rows)
    if args.figure == "epsilon0":
        grid = FIGURE_DELTA.tolist()
        cols = [tabulate([n], grid, iv, TailSide.ABOVE, args.tol).radii[0] for iv in family]
        rows = [[d] + [c[i] for c in cols] + [massart_radius(n, d)] for i, d in enumerate(grid)]
        return [f"# figure=epsilon0 family={args.family} tail=above n={n} tol={fmt(args.tol)}"], \
            _csv(["delta"] + names + ["DKW"], rows)
    eps = FIGURE_EPS.tolist()
    mc_cols, exact_cols = [], []
    for iv in family:
        cfg = McConfig(n, eps, iv, TailSide.ABOVE, args.reps, args.seed)
        mc_cols.append([e.frequency for e in mc_exceedance(cfg)])
        exact_cols.append([exceedance_probability(n, x, iv, TailSide.ABOVE) for x in eps])
    rows = [[x] + [c[i] for c in mc_cols] + [c[i] for c in exact_cols] for i, x in enumerate(eps)]
    cols = ["eps"] + [f"mc{nm}" for nm in names] + [f"exact{nm}" for nm in names]
    return [f"# figure=mcmc family={args.family} tail=above n={n} reps={args.reps}"], _csv(cols, rows)


def _load_ecdf(args):
    values, support = read_samples(args.samples)
    if args.support is not None:
        support = args.support
    return make_ecdf(values, support if support is not None else (-np.inf, np.inf))


def _run(args):
    cmd = args.command
    if cmd == "prob":
        iv = UnitInterval(args.lo, args.hi)
        p = exceedance_probability(args.n, args.eps, iv, args.tail)
        return [], _csv(["n", "eps", "lo", "hi", "tail", "probability"],
                        [[args.n, args.eps, args.lo, args.hi, args.tail, p]])
    if cmd == "invert":
        q = RadiusQuery(args.n, args.delta, (args.lo, args.hi), args.tail, args.tol)
        return [], _csv(["n", "delta", "lo", "hi", "tail", "epsilon"],
                        [[args.n, args.delta, args.lo, args.hi, args.tail, invert_radius(q)]])
    if cmd == "tabulate":
        if args.figure is not None:
            return _figure(args)
        if args.delta is None:
            raise LocalDkwError("tabulate needs --delta (or --figure)")
        table = tabulate(args.n, args.delta, (args.lo, args.hi), args.tail, args.tol)
        return [table.meta_line()], _csv(["n", "delta", "epsilon"], table.rows())
    if cmd == "band":
        band = confidence_band(_load_ecdf(args), args.delta, (args.lo, args.hi), args.split, args.tol)
        meta = [f"# radius_lower={fmt(band.radius_lower)} radius_upper={fmt(band.radius_upper)}"]
        return meta, _csv(["x", "lower", "upper"], band.knots)
    if cmd == "cvar":
        if args.side == "reward" and (args.alpha is None or args.kappa is not None):
            raise LocalDkwError("--side reward takes --alpha (and not --kappa)")
        if args.side == "loss" and (args.kappa is None or args.alpha is not None):
            raise LocalDkwError("--side loss takes --kappa (and not --alpha)")
        ecdf = _load_ecdf(args)
        if args.side == "reward":
            level, b = args.alpha, cvar_reward_bounds(ecdf, args.alpha, args.delta, args.split, args.tol)
        else:
            level, b = args.kappa, cvar_loss_bounds(ecdf, args.kappa, args.delta, args.split, args.tol)
        meta = [f"# side={args.side} radius_below={fmt(b.radius_below)} radius_above={fmt(b.radius_above)}"]
        return meta, _csv(["level", "delta", "lower", "point", "upper", "n"],
                          [[level, args.delta, b.lower, b.point, b.upper, ecdf.n]])
    if cmd == "mc":
        eps = args.eps if args.eps is not None else FIGURE_EPS.tolist()
        cfg = McConfig(args.n, eps, (args.lo, args.hi), args.tail, args.reps, args.seed)
        meta = [f"# seed={cfg.seed} reps={cfg.reps} n={cfg.n} "
                f"interval={fmt(cfg.interval.lo)},{fmt(cfg.interval.hi)} tail={cfg.tail.value}"]
        return meta, _csv(["eps", "frequency", "stderr", "exact", "abs_diff"], mc_report_rows(cfg))
    if cmd == "tu":
        if args.schedule is not None:
            params = {"xi": args.xi, "a": args.a, "g": args.g, "eta": args.eta_const,
                      "allow_uncertified": args.allow_uncertified}
            sched = build_schedule(args.schedule, args.T, **params)
            return [f"# scheme={sched.scheme} params={sched.params}"], \
                _csv(["t", "eta_t", "delta_t", "K_t"], sched.rows())
        if args.horizon is None:
            raise LocalDkwError("tu needs --horizon (band) or --schedule")
        cfg = TimeUniformConfig(args.horizon, args.delta, args.eta, args.C,
                                (args.lo, args.hi), args.tail, args.tol)
        return [f"# K={cfg.K} q={fmt(cfg.q)}"], _csv(["t", "radius"], tu_band(cfg))
    raise UsageError(f"unknown command {cmd!r}")  # pragma: no cover


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        meta, lines = _run(args)
    except UsageError as exc:
        print(f"localdkw: error: {exc}", file=sys.stderr)
        return 2
    except LocalDkwError as exc:
        print(f"localdkw: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"localdkw: I/O error: {exc}", file=sys.stderr)
        return 1
    text = "\n".join(_header(args, meta) + lines) + "\n"
    try:
        if args.output is None:
            sys.stdout.write(text)
        else:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"localdkw: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
