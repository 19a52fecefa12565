"""
Command-line front end: every pipeline of the library as a subcommand writing JSON or CSV.

Exit codes: 0 success, 1 acceptance threshold missed, 2 usage error or violated precondition,
3 I/O or cache error, 4 numerical failure.
"""
import argparse
import cmath
import json
import logging
import math
import sys

import numpy as np
import pandas as pd

from ..borel_analysis import borel_analysis
from ..resummation import resummation
from ..resurgent_pi import ResurgentPI
from ..stokes_geometry import stokes_geometry
from ..utils import utils

LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

COEFF_KINDS = ("c", "m", "a", "b", "q", "p", "f+", "f-")


def _pair(value):
    value = complex(value)
    return [value.real, value.imag]


def _complex_arg(text):
    try:
        return utils.parse_complex(text)
    except ValueError as error:
        raise argparse.ArgumentTypeError(str(error))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json", help="Output format (default: json).")
    common.add_argument("--output", "-o", default=None, help="Output file, written atomically (default: stdout).")
    common.add_argument("--cache", default=None,
                        help="Coefficient cache file (default: $RESURGENT_PI_CACHE, then the package data folder).")
    common.add_argument("--max-n", type=int, default=200, help="Depth of the coefficient table (default: 200).")
    common.add_argument("--seedless", action="store_true",
                        help="Deterministic run; nothing in the pipelines is random, so this only documents the intent.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging.")

    anchor = argparse.ArgumentParser(add_help=False)
    anchor.add_argument("--t", type=_complex_arg, default=None, help="Base point t, as an a+bi literal.")
    anchor.add_argument("--z", type=_complex_arg, default=None, help="Base point z (z⁴ = -24t), instead of --t.")
    anchor.add_argument("--branch", type=int, default=0, choices=range(4),
                        help="Quartic root of z⁴ = -24t, by increasing argument (default: 0).")

    parser = argparse.ArgumentParser(prog="resurgent-pi",
                                     description="Resurgence of the deformed Painlevé I equation ħ²q̈ = 6q² + t.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    coeffs = subparsers.add_parser("coeffs", parents=[common], help="Exact coefficients, extending the cache if needed.")
    coeffs.add_argument("--kind", choices=COEFF_KINDS, required=True)
    coeffs.add_argument("--n", type=int, required=True, help="Index of the coefficient (n ≥ 0).")
    coeffs.add_argument("--sign", choices=("+", "-"), default="+", help="Branch for a and b (default: +).")
    coeffs.add_argument("--upto", action="store_true", help="Print every index from 0 to n.")
    coeffs.set_defaults(handler=cmd_coeffs)

    borel = subparsers.add_parser("borel-sing", parents=[common, anchor],
                                  help="Predicted Borel singular values against Padé detections.")
    borel.add_argument("--order", type=int, default=40, help="Number of Taylor coefficients of ω̂ used (default: 40).")
    borel.add_argument("--radius-order", type=int, default=120, help="Order of the radius estimate (default: 120).")
    borel.set_defaults(handler=cmd_borel_sing)

    cont = subparsers.add_parser("continue", parents=[common, anchor], help="March the Borel transforms along a path.")
    cont.add_argument("--alpha", type=float, required=True, help="Direction of the ray, in radians.")
    cont.add_argument("--extent", type=float, default=0.5, help="Path reach in units of |ξ_0| (default: 0.5).")
    cont.add_argument("--steps", type=int, default=100, help="Number of march steps (default: 100).")
    cont.add_argument("--side", choices=("none", "L", "R"), default="none", help="Lateral side around ξ_0 on α.")
    cont.add_argument("--detour", type=float, default=0.1, help="Lateral detour radius in units of |ξ_0|.")
    cont.add_argument("--no-richardson", action="store_true", help="Skip the half-step refinement.")
    cont.add_argument("--detect-blowup", action="store_true", help="Report a blow-up instead of failing.")
    cont.set_defaults(handler=cmd_continue)

    var = subparsers.add_parser("variation", parents=[common, anchor], help="Variation of the Borel transforms at ξ_0.")
    var.add_argument("--alpha", type=float, default=None, help="Stokes direction (default: arg ξ_+).")
    var.add_argument("--detour", type=float, default=0.1, help="Detour radius in units of |ξ_0| (default: 0.1).")
    var.add_argument("--steps", type=int, default=240, help="March steps per |ξ_0| (default: 240).")
    var.add_argument("--n-ext", type=int, default=4, help="Rotated rays per side for the extrapolation (default: 4).")
    var.set_defaults(handler=cmd_variation)

    graph = subparsers.add_parser("stokes-graph", parents=[common], help="Stokes lines and sectors for a phase α.")
    graph.add_argument("--alpha", type=float, required=True)
    graph.set_defaults(handler=cmd_stokes_graph)

    fol = subparsers.add_parser("foliation", parents=[common], help="Geodesics of phase α in the z-plane.")
    fol.add_argument("--alpha", type=float, required=True)
    fol.add_argument("--start", type=_complex_arg, action="append", required=True, help="Starting z, repeatable.")
    fol.add_argument("--sign", choices=("+", "-"), default="+")
    fol.add_argument("--s-max", type=float, default=1.0)
    fol.add_argument("--samples", type=int, default=101)
    fol.set_defaults(handler=cmd_foliation)

    for name, handler, text in (("resum", cmd_resum, "Borel-Laplace sum along a regular direction."),
                                ("lateral", cmd_lateral, "Lateral sum along a Stokes direction."),
                                ("jump", cmd_jump, "Stokes jump by the lateral and the variation routes."),
                                ("verify", cmd_verify, "Residuals of the resummed solution in the ODE.")):
        sub = subparsers.add_parser(name, parents=[common, anchor], help=text)
        sub.add_argument("--alpha", type=float, required=name in ("resum", "verify"),
                         help="Direction in radians" + ("" if name in ("resum", "verify") else " (default: arg ξ_+)."))
        sub.add_argument("--hbar", type=_complex_arg, action="append", default=None, help="ħ value, repeatable.")
        if name in ("resum", "verify"):
            sub.add_argument("--continuation", choices=("pade", "march"), default="pade")
        if name == "lateral":
            sub.add_argument("--side", choices=("L", "R"), default="L")
        if name == "verify":
            sub.add_argument("--h", type=float, default=1e-3, help="Stencil width in t (default: 1e-3).")
            sub.add_argument("--threshold", type=float, default=1e-6, help="Largest accepted residual (default: 1e-6).")
        sub.set_defaults(handler=handler)
    return parser


def _processor(args):
    return ResurgentPI(max_n=args.max_n, cache=args.cache)


def _anchor(processor, args):
    if args.t is None and args.z is None:
        raise ValueError("give the base point with --t or --z")
    if args.t is not None and args.z is not None:
        raise ValueError("--t and --z are exclusive")
    return processor.anchor(t=args.t, z=args.z, branch=args.branch)


def _stokes_alpha(anchor, alpha):
    return utils.wrap_angle(cmath.phase(anchor.w)) if alpha is None else alpha


def cmd_coeffs(args):
    if args.n < 0:
        raise ValueError("--n must be non-negative")
    if args.kind in ("c", "m", "a", "b"):
        depth = 2 * args.n
    elif args.kind in ("q", "p"):
        depth = max(args.n - 1, 0)
    else:
        depth = args.n
    table = utils.load_dependency("coeff_table", depth, args.cache)
    rows = []
    for n in (range(args.n + 1) if args.upto else (args.n,)):
        if args.kind == "c":
            row = dict(value=str(table.c_seq[n]))
        elif args.kind == "m":
            row = dict(value=str(table.m_seq[n]))
        elif args.kind in ("a", "b"):
            value = (table.a_seq if args.kind == "a" else table.b_seq)[args.sign][n]
            row = dict(value=str(value.rat), kappa_power=value.kappa_pow)
        else:
            monos = dict(q=table.q_monos, p=table.p_monos)[args.kind] if args.kind in ("q", "p") \
                else table.f_monos(args.kind[1])
            row = dict(value=str(monos[n].coeff), z_exponent=monos[n].z_exponent)
        rows.append(dict(kind=args.kind, n=n, **row))
    report = rows[0] if len(rows) == 1 else dict(kind=args.kind, rows=rows)
    return report, pd.DataFrame(rows)


def cmd_borel_sing(args):
    processor = _processor(args)
    parsed = _anchor(processor, args)
    anchor = parsed.content
    degree = args.order // 2
    poles = parsed.pade_singularities(degree)
    predicted = anchor.singular_values
    errors = [float(np.min(np.abs(poles - value)) / abs(value)) if len(poles) else math.inf for value in predicted]
    radius = parsed.radius_estimate(args.radius_order)
    report = dict(anchor=anchor.as_dict(), predicted=[_pair(v) for v in predicted],
                  pade_detected=[_pair(p) for p in poles[:4]], relative_error=errors, error=max(errors),
                  radius_estimate=radius.radius, radius_uncertainty=radius.uncertainty,
                  radius_predicted=abs(anchor.w), pade_order=[degree, degree])
    frame = pd.DataFrame([dict(xi_re=v.real, xi_im=v.imag, relative_error=e) for v, e in zip(predicted, errors)])
    return report, frame


def cmd_continue(args):
    processor = _processor(args)
    anchor = _anchor(processor, args).content
    modulus = abs(anchor.w)
    length = args.extent * modulus
    if args.side == "none":
        path = borel_analysis.XiPath.ray(args.alpha, length)
    else:
        xi0 = borel_analysis.singular_value_on_ray(anchor, args.alpha, resummation.REGULAR_TOLERANCE)
        if xi0 is None:
            raise utils.StokesDirectionError("lateral paths need alpha on a Stokes direction")
        path = borel_analysis.XiPath.lateral(args.alpha, length, args.side, modulus, args.detour * modulus)
    result = borel_analysis.march_continue(anchor, path, length / args.steps, processor.table,
                                           richardson=not args.no_richardson, detect_blowup=args.detect_blowup)
    frame = result.to_dataframe()
    report = dict(anchor=anchor.as_dict(), path=[[direction, size] for direction, size in path.segments],
                  side=path.side, blowup_at=None if result.blowup_at is None else _pair(result.blowup_at),
                  bound=list(result.bound_report), z_clearance=result.z_clearance, refinement=result.refinement,
                  samples=frame.to_dict(orient="list"))
    return report, frame


def cmd_variation(args):
    processor = _processor(args)
    anchor = _anchor(processor, args).content
    alpha = _stokes_alpha(anchor, args.alpha)
    modulus = abs(anchor.w)
    result = borel_analysis.variation(anchor, alpha, args.detour * modulus, modulus / args.steps, processor.table,
                                      n_ext=args.n_ext)
    frame = result.to_dataframe()
    report = dict(anchor=anchor.as_dict(), alpha=alpha, stokes=result.stokes,
                  xi0=None if result.xi0 is None else _pair(result.xi0), fit_range=result.fit_range,
                  samples=frame.to_dict(orient="list"))
    return report, frame


def cmd_stokes_graph(args):
    graph = stokes_geometry.stokes_graph(args.alpha)
    rows = [dict(plane=plane, index=k, angle=angle)
            for plane, lines in (("tau", graph.tau_lines), ("t", graph.t_lines), ("z", graph.z_lines))
            for k, angle in enumerate(lines)]
    return json.loads(graph.to_json()), pd.DataFrame(rows)


def cmd_foliation(args):
    frame = stokes_geometry.foliation(args.alpha, args.start, args.sign, args.s_max, args.samples)
    report = dict(alpha=args.alpha, sign=args.sign, starts=[_pair(z) for z in args.start],
                  samples=frame.to_dict(orient="list"))
    return report, frame


def _hbars(alpha, given):
    if given:
        return tuple(given)
    return (0.05 * cmath.exp(1j * alpha),)


def cmd_resum(args):
    processor = _processor(args)
    anchor = _anchor(processor, args).content
    request = resummation.ResumRequest(anchor, args.alpha, _hbars(args.alpha, args.hbar), args.continuation)
    result = resummation.resum_q(request, processor.table)
    return result.to_json(), result.to_dataframe()


def cmd_lateral(args):
    processor = _processor(args)
    anchor = _anchor(processor, args).content
    alpha = _stokes_alpha(anchor, args.alpha)
    request = resummation.ResumRequest(anchor, alpha, _hbars(alpha, args.hbar), "march", args.side)
    result = resummation.lateral_resum(request, processor.table)
    return result.to_json(), result.to_dataframe()


def cmd_jump(args):
    processor = _processor(args)
    parsed = _anchor(processor, args)
    alpha = _stokes_alpha(parsed.content, args.alpha)
    report = parsed.stokes_jump(alpha, args.hbar)
    return report.to_json(), report.to_dataframe()


def cmd_verify(args):
    processor = _processor(args)
    anchor = _anchor(processor, args).content
    hbar = _hbars(args.alpha, args.hbar)[0]
    report = resummation.verify_ode(anchor, args.alpha, hbar, args.h, processor.table, args.continuation)
    payload = report.to_json()
    payload["threshold"] = args.threshold
    payload["passed"] = bool(report.max_residual < args.threshold)
    return payload, report.to_dataframe()


def _emit(args, report, frame):
    if args.format == "csv":
        text = frame.to_csv(index=False, float_format="%.17g")
    else:
        text = json.dumps(report, indent=2) + "\n"
    if args.output:
        utils.write_atomically(args.output, text)
        LOGGER.info("wrote %s", args.output)
    else:
        sys.stdout.write(text)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return exit_request.code if isinstance(exit_request.code, int) else EXIT_USAGE

    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("resurgent_pi").setLevel(level)

    try:
        report, frame = args.handler(args)
        _emit(args, report, frame)
    except (OSError, utils.CacheFormatError) as error:
        LOGGER.error("%s", error)
        return EXIT_IO
    except ValueError as error:
        LOGGER.error("%s", error)
        return EXIT_USAGE
    except utils.ResurgenceError as error:
        LOGGER.error("numerical failure: %s", error)
        return EXIT_NUMERICAL
    if isinstance(report, dict) and report.get("passed") is False:
        LOGGER.error("residual %.3e above the threshold %.1e", max(abs(complex(*report["residual"])),
                                                                  abs(complex(*report["momentum_residual"]))),
                     args.threshold)
        return EXIT_THRESHOLD
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
