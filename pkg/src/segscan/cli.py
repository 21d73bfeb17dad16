"""Command-line front end.

``segscan scan`` runs one detector on a series file and prints a one-line JSON
record; it exits with status 3 when the detector rejects the null (0 otherwise).
The other subcommands read a ``key=value`` plan file and write CSV.
"""

import argparse
import json
import sys

from . import affinity as aff
from .config import float_list, fmt, int_list, read_kv
from .detectors import DETECTORS, ScanConfig, run_detector
from .errors import SegscanError
from .experiments import (
    ExperimentPlan,
    boundary_csv,
    boundary_grid,
    calibrate_null,
    exponent_fit,
    power_csv,
    power_curve,
    rate,
)
from .series import build_series, estimate_sigma_mad, read_series
from .statistics import TEMPLATES, get_template

EXIT_REJECT = 3


def _write(text: str, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def cmd_scan(args) -> int:
    values = read_series(args.series)
    sigma = estimate_sigma_mad(values) if args.mad else args.sigma
    series = build_series(values, sigma)
    cfg = ScanConfig(delta=args.delta, max_len=args.max_len, min_len=args.min_len, alpha=args.alpha, adaptive_L=args.L)
    template = get_template(args.template) if args.detector == "linear" else None
    out = run_detector(args.detector, series, cfg, template=template, workers=args.workers)
    record = {"detector": args.detector, "n": series.n, "sigma": sigma, **out.as_record()}
    print(json.dumps(record, separators=(",", ":")))
    return EXIT_REJECT if out.reject else 0


def _plan(args, **extra) -> ExperimentPlan:
    return ExperimentPlan.from_kv(read_kv(args.plan), master_seed=args.seed, **extra)


def cmd_calibrate(args) -> int:
    plan = _plan(args, signal="null")
    _write(calibrate_null(plan).csv(), args.out)
    return 0


def cmd_power(args) -> int:
    _write(power_csv(power_curve(_plan(args))), args.out)
    return 0


def cmd_boundary(args) -> int:
    _write(boundary_csv(boundary_grid(_plan(args))), args.out)
    return 0


def cmd_exponent(args) -> int:
    _write(exponent_fit(_plan(args)).csv(), args.out)
    return 0


def cmd_rate(args) -> int:
    kv = read_kv(args.plan)
    n = float(kv["n"])
    modes = [m.strip() for m in kv.get("mode", "known,arbitrary,smooth").split(",")]
    alpha = float(kv["alpha"]) if "alpha" in kv else None
    lines = ["n,d,mode,alpha,rate"]
    for d in int_list(kv["d_grid"]):
        for mode in modes:
            a = alpha if mode == "smooth" else None
            lines.append(",".join(fmt(v) for v in (int(n), d, mode, a, rate(n, d, mode, a))))
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_affinity(args) -> int:
    kv = read_kv(args.plan)
    construction = kv.get("construction", "arbitrary")
    lines = []
    if construction in ("known_shape", "arbitrary"):
        template = kv.get("template", "constant")
        lines.append("construction,n,d,gamma,exact,first_bound,second_bound,approx_overlap")
        for n in int_list(kv["n"]):
            for d in int_list(kv["d_grid"]):
                if d > n:
                    continue
                for g in float_list(kv["gamma_grid"]):
                    if construction == "known_shape":
                        r = aff.affinity_known_shape(n, d, g, template)
                    else:
                        r = aff.affinity_arbitrary_exact(n, d, g)
                    lines.append(",".join(fmt(v) for v in (construction, n, d, g, r.exact, r.first_bound,
                                                            r.second_bound, r.approx_overlap)))
    elif construction == "smooth":
        lines.append("construction,N,l,x,exact")
        N = int(kv["N"])
        for l in int_list(kv["l_grid"]):
            for x in float_list(kv["x_grid"]):
                lines.append(",".join(fmt(v) for v in ("smooth", N, l, x, aff.affinity_smooth_exact(N, l, x))))
    elif construction == "certificate":
        lines.append("n,d,alpha,c,gamma_sq,m,l,N,zeta_sq,x,exact,rhs,holds,degenerate")
        for alpha in float_list(kv["alpha"]):
            for c in float_list(kv["c_grid"]):
                r = aff.smooth_mixture_certificate(int(kv["n"]), int(kv["d"]), alpha, c)
                lines.append(",".join(fmt(v) for v in (r.n, r.d, r.alpha, r.c, r.gamma_sq, r.m, r.l, r.N, r.zeta_sq,
                                                        r.x, r.exact, r.rhs, r.holds, r.degenerate)))
    else:
        raise SegscanError(f"unknown construction {construction!r}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="segscan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scan", help="run one detector on a series file")
    s.add_argument("series", help="one value per line, or CSV with an index,value header")
    s.add_argument("--detector", choices=DETECTORS, default="quadratic")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sigma", type=float, help="known noise standard deviation")
    g.add_argument("--mad", action="store_true", help="estimate sigma by the median absolute deviation")
    s.add_argument("--delta", type=float, default=0.01)
    s.add_argument("--alpha", type=float, help="smoothness for the binned detector")
    s.add_argument("--max-len", type=int, dest="max_len")
    s.add_argument("--min-len", type=int, dest="min_len", default=1)
    s.add_argument("--L", type=int, dest="L", help="length cap of the adaptive detector")
    s.add_argument("--template", choices=sorted(TEMPLATES), default="constant")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_scan)

    for name, func, text in (
        ("calibrate", cmd_calibrate, "null rejection rate"),
        ("power", cmd_power, "power over a (d, c) grid"),
        ("boundary", cmd_boundary, "power grid in boundary coordinates with rate overlays"),
        ("exponent", cmd_exponent, "fit the slope of log A50 against log d"),
        ("affinity", cmd_affinity, "chi-square affinities of the lower-bound mixtures"),
        ("rate", cmd_rate, "optimal detection rates"),
    ):
        c = sub.add_parser(name, help=text)
        c.add_argument("plan", help="key=value plan file")
        c.add_argument("--seed", type=int, help="master seed; overrides the plan")
        c.add_argument("--out", help="CSV destination (default stdout)")
        c.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SegscanError as exc:
        print(f"segscan: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
