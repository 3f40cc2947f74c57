"""Command-line entry point ``sbm``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bernstein import parse_phi
from .errors import SbmError


def _floats(text):
    return [float(v) for v in text.strip("()[] ").split(",") if v.strip()]


def _print_rows(header, rows):
    print("\t".join(header))
    for row in rows:
        print("\t".join(f"{v:.12g}" for v in row))


def cmd_chi(args):
    from .fluctuation import chi_eval

    lam = np.array(args.lam, dtype=float)
    _print_rows(["lambda", "chi"], zip(lam, np.atleast_1d(chi_eval(args.phi, lam))))


def cmd_renewal(args):
    from .fluctuation import renewal_density, renewal_function

    t = np.array(args.t, dtype=float)
    _print_rows(["t", "V", "v"], zip(t, np.atleast_1d(renewal_function(args.phi, t)),
                                     np.atleast_1d(renewal_density(args.phi, t))))


def cmd_density(args):
    from .densities import levy_density_mu, potential_density_u

    t = np.array(args.t, dtype=float)
    _print_rows(["t", "u", "mu"], zip(t, np.atleast_1d(potential_density_u(args.phi, t)),
                                      np.atleast_1d(levy_density_mu(args.phi, t))))


def cmd_kernel(args):
    from .kernels import KernelEvaluator, free_green_G, levy_kernel_j

    ev = KernelEvaluator(args.phi, args.d)
    r = np.array(args.r, dtype=float)
    fn = levy_kernel_j if args.which == "j" else free_green_G
    val, err = fn(ev, r, return_error=True)
    _print_rows(["r", args.which, "err"], zip(r, np.atleast_1d(val), np.atleast_1d(err)))


def cmd_generator(args):
    from .fluctuation import renewal_function
    from .kernels import KernelEvaluator, apply_generator

    if args.profile != "V":
        raise SbmError(f"unknown profile {args.profile!r}")
    ev = KernelEvaluator(args.phi, args.d)
    res = apply_generator(ev, lambda y: renewal_function(args.phi, np.maximum(y, 0.0)), args.x)
    print(json.dumps({"x": args.x, "value": res.value, "taylor_bound": res.taylor_bound,
                      "trace": [[e, v] for e, v in res.trace]}, indent=2))


def cmd_green_mc(args):
    from .geometry import parse_domain
    from .montecarlo import PathParams, green_mc, target_radius

    dom = parse_domain(args.domain, d=len(args.x))
    rho = args.rho if args.rho else target_radius(dom, args.x, args.y)
    params = PathParams(args.dt, args.n_paths, args.seed, args.max_steps)
    est = green_mc(args.phi, dom, args.x, args.y, rho, params, extrapolate=args.extrapolate)
    doc = {k: getattr(est, k) for k in ("mean", "stderr", "n", "config_hash", "flags")}
    if args.out:
        est.write_json(args.out)
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_verify(args):
    from .geometry import parse_domain
    from .montecarlo import PathParams
    from .report import emit_report
    from .verify import SamplingPlan, verify_theorem

    dom = parse_domain(args.domain, d=args.d)
    plan = SamplingPlan(args.pairs, args.seed)
    params = PathParams(args.dt, args.n_paths, args.seed)
    reports = verify_theorem(args.claim, args.phi, dom, plan, params)
    for rep in reports:
        print(rep.summary())
    if args.out:
        json_path, csv_path = emit_report(reports, args.out, spec=str(args.phi), domain=str(dom))
        print(f"wrote {json_path} and {csv_path}")
    return 0 if all(r.passed for r in reports) else 1


def cmd_table(args):
    from .densities import build_density_table
    from .fluctuation import build_fluctuation_table

    build = build_fluctuation_table if args.kind == "fluctuation" else build_density_table
    table = build(args.phi, (args.t_min, args.t_max), args.nodes)
    path = table.to_csv(args.out)
    print(f"wrote {path}")


def build_parser():
    p = argparse.ArgumentParser(prog="sbm", description="Subordinate Brownian motion numerics.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--phi", type=parse_phi, required=True, help="e.g. stable:alpha=1 or stablesum:a=1.2,b=0.6")
        sp.set_defaults(func=fn)
        return sp

    sp = add("chi", cmd_chi, "ladder-height exponent chi(lambda)")
    sp.add_argument("--lam", type=float, nargs="+", required=True)
    sp = add("renewal", cmd_renewal, "renewal function V(t) and density v(t)")
    sp.add_argument("--t", type=float, nargs="+", required=True)
    sp = add("density", cmd_density, "potential density u(t) and Levy density mu(t)")
    sp.add_argument("--t", type=float, nargs="+", required=True)
    sp = add("kernel", cmd_kernel, "Levy kernel j(r) or free Green function G(r)")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--which", choices=["j", "G"], default="j")
    sp.add_argument("--r", type=float, nargs="+", required=True)
    sp = add("generator", cmd_generator, "generator applied to a boundary profile")
    sp.add_argument("--profile", default="V")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp = add("green-mc", cmd_green_mc, "Monte Carlo Green function of a domain")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--x", type=_floats, required=True)
    sp.add_argument("--y", type=_floats, required=True)
    sp.add_argument("--rho", type=float, default=None)
    sp.add_argument("--n-paths", type=int, default=10000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-steps", type=int, default=0)
    sp.add_argument("--extrapolate", action="store_true", help="combine dt and 10 dt runs to remove O(dt) bias")
    sp.add_argument("--out", default=None)
    sp = add("verify", cmd_verify, "empirical verification of an estimate; exit 0 iff all claims pass")
    sp.add_argument("--claim", choices=["gest21", "gest", "bhp", "interior", "ge"], required=True)
    sp.add_argument("--domain", required=True)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--pairs", type=int, default=50)
    sp.add_argument("--n-paths", type=int, default=20000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp = add("table", cmd_table, "write a V/v or u/mu table to CSV")
    sp.add_argument("--kind", choices=["fluctuation", "density"], default="fluctuation")
    sp.add_argument("--t-min", type=float, default=1e-4)
    sp.add_argument("--t-max", type=float, default=1e2)
    sp.add_argument("--nodes", type=int, default=200)
    sp.add_argument("--out", required=True)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except SbmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
