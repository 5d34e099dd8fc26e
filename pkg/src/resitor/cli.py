"""Command-line driver.

Exit codes: 0 success, 2 verification failed, 3 lattice sum not stabilized
or window budget exhausted, 4 invalid input.
"""

import argparse
import json
import sys

from .bott import (CISpec, CohomPoly, genus_ci, pairing, solve_string_system,
                   string_check, witten_theta_route)
from .configs import load_json, parse_ci, parse_degree, parse_fan, parse_tower
from .errors import ConfigError, NotStabilized, WindowUnderflow
from .qseries import COMPLEX, EXACT, QSeries, format_scalar
from .theta import FAMILIES, CharSeries
from .toric import (LatticePolicy, fan_bundle_over_cp, fan_cp, fan_from_tower,
                    fan_hirzebruch, toric_form_lattice, toric_form_theta)
from .verify import TARGETS, run_target

EXIT_OK, EXIT_VERIFY, EXIT_BUDGET, EXIT_INPUT = 0, 2, 3, 4


def _scalar_json(x):
    if isinstance(x, QSeries):
        return x.to_json()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _emit(args, text, payload):
    if args.json:
        out = json.dumps(payload, indent=2, sort_keys=True)
    else:
        out = text
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def _mode(args):
    return COMPLEX if args.mode == "numeric" else EXACT


def _tower_ci(args):
    tower = parse_tower(load_json(args.tower))
    ci = parse_ci(load_json(args.ci), tower) if getattr(args, "ci", None) else CISpec()
    return tower, ci


def cmd_pair(args):
    tower = parse_tower(load_json(args.tower))
    try:
        p = CohomPoly.parse(args.monomial, tower.n)
    except ValueError as exc:
        raise ConfigError(f"--monomial: {exc}") from None
    methods = ["residue", "normalform"] if args.method == "both" else [args.method]
    vals = {m: pairing(p, tower, m) for m in methods}
    text = "\n".join(f"{m}: {format_scalar(v)}" for m, v in vals.items())
    if len(vals) == 1:
        text = format_scalar(next(iter(vals.values())))
    _emit(args, text, {"monomial": args.monomial,
                       "pairing": {m: _scalar_json(v) for m, v in vals.items()}})
    if len(set(vals.values())) > 1:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_genus(args):
    tower, ci = _tower_ci(args)
    cs = CharSeries(args.series)
    if args.route == "theta":
        if args.series != "witten":
            raise ConfigError("--route theta is only available for --series witten")
        val = witten_theta_route(tower, ci, args.q_order, _mode(args))
    else:
        val = genus_ci(tower, ci, cs, args.q_order)
    text = str(val) if isinstance(val, QSeries) else format_scalar(val)
    _emit(args, text, {"series": args.series, "value": _scalar_json(val)})
    return EXIT_OK


def _builder_fan(spec):
    kind, _, params = spec.partition(":")
    try:
        nums = [int(x) for x in params.split(",")] if params else []
    except ValueError:
        raise ConfigError(f"--builder: bad parameters in {spec!r}") from None
    if kind == "cp" and len(nums) == 1 and nums[0] >= 1:
        return fan_cp(nums[0])
    if kind == "hirzebruch" and len(nums) == 1:
        return fan_hirzebruch(nums[0])
    if kind == "bundle" and len(nums) == 2:
        return fan_bundle_over_cp(2, tuple(nums))
    raise ConfigError(f"--builder: expected cp:N, hirzebruch:K or bundle:J,K, got {spec!r}")


def cmd_toric_form(args):
    deg = None
    if sum(x is not None for x in (args.fan, args.tower, args.builder)) != 1:
        raise ConfigError("give exactly one of --fan, --tower, --builder")
    if args.fan:
        fan, deg = parse_fan(load_json(args.fan))
    elif args.tower:
        fan = fan_from_tower(parse_tower(load_json(args.tower)))
    else:
        fan = _builder_fan(args.builder)
    if args.deg is not None:
        deg = parse_degree(args.deg.split(","), len(fan.rays), "--deg")
    if deg is None:
        raise ConfigError("deg: missing (use the fan's \"deg\" field or --deg)")
    if args.mode == "exact" and not deg.exact:
        raise ConfigError("deg: generic degree values need --mode numeric")
    if args.method == "lattice":
        val = toric_form_lattice(fan, deg, args.q_order, LatticePolicy(), jobs=args.jobs)
    else:
        if fan.divisor_map is None:
            raise ConfigError("--method theta needs a tower fan (divisor_map missing)")
        val = toric_form_theta(fan, deg, args.q_order, None if args.mode is None else _mode(args))
    _emit(args, str(val), {"method": args.method, "value": val.to_json()})
    return EXIT_OK


def cmd_string_check(args):
    tower, ci = _tower_ci(args)
    rep = string_check(tower, ci)
    lines = [f"c1 (normal form): {rep.c1}", f"p1 (normal form): {rep.p1}",
             f"p1 * classes (normal form): {rep.pushforward}",
             f"spin: {rep.spin}", f"p1 pushforward vanishes: {rep.p1_pushforward_zero}"]
    if rep.system_residuals is not None:
        lines.append(f"equation residuals: {rep.system_residuals}")
    lines.append(f"verdict: {rep.verdict}")
    _emit(args, "\n".join(lines), rep.to_json())
    return EXIT_OK


def cmd_solve_string(args):
    try:
        I = tuple(int(x) for x in args.I.split(",")) if args.I else ()
    except ValueError:
        raise ConfigError(f"--I: expected comma-separated integers, got {args.I!r}") from None
    if args.bound < 1:
        raise ConfigError("--bound: must be at least 1")
    sols = solve_string_system(args.n1, len(I), I, args.bound, args.classes)
    _emit(args, "\n".join(str(s) for s in sols) if sols else "no solutions",
          {"n1": args.n1, "I": list(I), "classes": args.classes, "solutions": [list(s) for s in sols]})
    return EXIT_OK


def cmd_verify(args):
    res = run_target(args.target, args.q_order, args.tol, args.jobs)
    _emit(args, "\n".join(res.lines()), res.to_json())
    return EXIT_OK if res.passed else EXIT_VERIFY


class _Parser(argparse.ArgumentParser):
    """Usage errors are invalid input (exit 4), not verification failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--output", "-o", help="write output to this file")
    common.add_argument("--mode", choices=["exact", "numeric"], default=None,
                        help="scalar mode (default: exact when degrees allow)")

    p = _Parser(prog="resitor", description="Residues, theta series and toric forms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("pair", parents=[common], help="pair a cohomology class with a tower")
    s.add_argument("--tower", required=True)
    s.add_argument("--monomial", required=True, help='e.g. "u1^2 u2"')
    s.add_argument("--method", choices=["residue", "normalform", "both"], default="residue")
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("genus", parents=[common], help="genus of a complete intersection")
    s.add_argument("--tower", required=True)
    s.add_argument("--ci")
    s.add_argument("--series", choices=[f for f in FAMILIES if f != "custom"], required=True)
    s.add_argument("--q-order", type=int, default=6)
    s.add_argument("--route", choices=["char", "theta"], default="char")
    s.set_defaults(func=cmd_genus)

    s = sub.add_parser("toric-form", parents=[common], help="toric q-series of a fan")
    s.add_argument("--fan")
    s.add_argument("--tower")
    s.add_argument("--builder", help="cp:N, hirzebruch:K or bundle:J,K")
    s.add_argument("--deg", help="comma-separated rational degree values, one per ray")
    s.add_argument("--method", choices=["lattice", "theta"], default="lattice")
    s.add_argument("--q-order", type=int, default=6)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_toric_form)

    s = sub.add_parser("string-check", parents=[common], help="string criteria for a complete intersection")
    s.add_argument("--tower", required=True)
    s.add_argument("--ci")
    s.set_defaults(func=cmd_string_check)

    s = sub.add_parser("solve-string", parents=[common], help="search degrees solving the string equations")
    s.add_argument("--n1", type=int, required=True)
    s.add_argument("--I", required=True, help="comma-separated twists, e.g. 1,2,3")
    s.add_argument("--bound", type=int, default=5)
    s.add_argument("--classes", type=int, choices=[1, 2], default=2)
    s.set_defaults(func=cmd_solve_string)

    s = sub.add_parser("verify", parents=[common], help="run a verification target")
    s.add_argument("target", choices=list(TARGETS))
    s.add_argument("--q-order", type=int, default=None)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "q_order", None) is not None and args.q_order < 0:
        print("error: --q-order must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except NotStabilized as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except WindowUnderflow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
