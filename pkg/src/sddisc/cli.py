"""Command-line front end.

Exit status is 0 on success, 2 for invalid input (the offending field is
named) and 3 for numerical failures such as infeasible synthesis.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .classic import bilinear, bilinear_prewarp, step_invariant
from .errors import SdDiscError, UnstableSystemError, ValidationError
from .lifting import DesignSpec, recover_multirate_filter
from .lti import dumps_model, load_model
from .models import example_path

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
DEFAULT_GRID = "log:0.01:3.1:400"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message, field="arguments")


def parse_grid(text: str) -> np.ndarray:
    """``log:wmin:wmax:count`` or ``lin:wmin:wmax:count`` in rad/s."""
    parts = text.split(":")
    try:
        kind, lo, hi, count = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
    except (IndexError, ValueError) as exc:
        raise ValidationError(f"grid must look like log:wmin:wmax:count, got {text!r}",
                              field="grid") from exc
    if len(parts) != 4 or kind not in ("log", "lin") or count < 1 or not 0 < lo < hi:
        raise ValidationError(f"bad grid {text!r}", field="grid")
    return np.geomspace(lo, hi, count) if kind == "log" else np.linspace(lo, hi, count)


def parse_int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected a comma-separated integer list, got {text!r}",
                              field="L") from exc


def _load(path, field):
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{field}: no such file {path}", field=field)
    return load_model(p)


def _signal_model(args):
    return _load(args.F, "F") if args.F else load_model(example_path("F_lowpass3.json"))


def _spec(args, **override) -> DesignSpec:
    kw = {"h": args.h, "m": args.m, "N": args.N, "L": getattr(args, "L", 1),
          "eps_reg": args.eps_reg, "gamma_rel_tol": args.gamma_tol}
    kw.update(override)
    return DesignSpec(**kw)


def _emit(text: str, out, stream=None):
    if out:
        Path(out).write_text(text)
    else:
        (stream or sys.stdout).write(text)


def _report(lines, args):
    # the report goes to stderr when the filter itself is written to stdout
    stream = sys.stdout if args.out else sys.stderr
    for line in lines:
        print(line, file=stream)


def cmd_discretize(args) -> int:
    G = _load(args.model, "model")
    method = args.method
    if method == "step":
        K = step_invariant(G, args.h)
        _emit(dumps_model(K), args.out)
        return EXIT_OK
    if method == "bilinear":
        K = bilinear(G, args.h)
        _emit(dumps_model(K), args.out)
        return EXIT_OK
    if method == "prewarp":
        if args.omega0 is None:
            raise ValidationError("method prewarp needs --omega0", field="omega0")
        K = bilinear_prewarp(G, args.h, args.omega0)
        _emit(dumps_model(K), args.out)
        return EXIT_OK
    F = _signal_model(args)
    spec = _spec(args, L=1) if method == "hinf" else _spec(args)
    plant, res = analysis.design_filter(G, F, spec)
    n, m1, m2, p1, p2 = plant.dims
    lines = [f"plant_dimension: {n}",
             f"plant_io: w={m1} u={m2} e={p1} y={p2}",
             f"gamma_achieved: {analysis.format_float(res.gamma_achieved)}",
             f"gamma_certified: {analysis.format_float(res.gamma_certified)}",
             f"error_norm: {analysis.format_float(res.error_norm)}",
             f"gamma_lower_bound: {analysis.format_float(res.lower_bound)}",
             f"bisection_steps: {res.bisection_steps}"]
    if spec.L > 1 and not args.lifted:
        text = dumps_model(recover_multirate_filter(res.filter, spec.L))
    elif spec.L > 1:
        text = dumps_model(res.filter, blocking=spec.L)
    else:
        text = dumps_model(res.filter)
    _emit(text, args.out)
    _report(lines, args)
    return EXIT_OK


def cmd_compare(args) -> int:
    G = _load(args.model, "model")
    filters = {}
    for path in args.filters:
        name = Path(path).stem
        if name in filters:
            raise ValidationError(f"duplicate filter name {name!r}", field="filters")
        filters[name] = _load(path, "filters")
    table = analysis.compare_frequency_responses(G, filters, parse_grid(args.grid), h=args.h)
    _emit(table.to_csv(), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    G = _load(args.model, "model")
    F = _signal_model(args)
    Ls = parse_int_list(args.L)
    base = DesignSpec(eps_reg=args.eps_reg, gamma_rel_tol=args.gamma_tol)
    points = analysis.sweep_upsampling(G, F, args.h, args.m, args.N, Ls, base=base)
    _emit(analysis.sweep_to_csv(points), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    G = _load(args.model, "model")
    K = _load(args.filter, "filter")
    spec = _spec(args, L=1)
    u = None
    if args.input:
        p = Path(args.input)
        if not p.is_file():
            raise ValidationError(f"input: no such file {args.input}", field="input")
        u = analysis.PiecewiseConstantInput.from_csv(p.read_text())
    res = analysis.simulate_comparison(G, K, spec, u, duration=args.duration)
    _emit(res.to_csv(), args.out)
    print(f"error_energy: {analysis.format_float(res.error_energy)}",
          file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_certify(args) -> int:
    G = _load(args.model, "model")
    F = _load(args.F, "F")
    K = _load(args.filter, "filter")
    cert = analysis.small_gain_certificate(G, F, K, _spec(args, L=1))
    doc = cert.to_dict()
    if not np.isfinite(doc["norm_E"]):
        doc["norm_E"] = None
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def _common(p, design=True):
    p.add_argument("--h", type=float, default=1.0, help="sampling period [s]")
    p.add_argument("--m", type=int, default=4, help="delay in sampling periods")
    p.add_argument("--N", type=int, default=12, help="fast-sampling ratio")
    if design:
        p.add_argument("--eps-reg", type=float, default=1e-4, help="measurement-noise weight")
        p.add_argument("--gamma-tol", type=float, default=1e-3, help="relative bisection gap")
    p.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sddisc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("discretize", help="discretize an analog filter")
    p.add_argument("model", help="continuous model JSON")
    p.add_argument("--method", required=True,
                   choices=["step", "bilinear", "prewarp", "hinf", "hinf-multirate"])
    p.add_argument("--omega0", type=float, help="prewarp frequency [rad/s]")
    p.add_argument("--F", help="signal model JSON (default: bundled 1/(s+1)^3)")
    p.add_argument("--L", type=int, default=1, help="upsampling ratio")
    p.add_argument("--lifted", action="store_true",
                   help="write the L-output slow filter instead of the fast-rate one")
    _common(p)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("compare", help="frequency-response table in dB")
    p.add_argument("model")
    p.add_argument("filters", nargs="*")
    p.add_argument("--grid", default=DEFAULT_GRID, help="log:wmin:wmax:count")
    p.add_argument("--h", type=float, default=1.0, help="sampling period [s]")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-L", help="design error versus upsampling ratio")
    p.add_argument("model")
    p.add_argument("--F")
    p.add_argument("--L", default="1,2,4,8,16", help="comma-separated ratios")
    _common(p)
    p.set_defaults(func=cmd_sweep, N=16)

    p = sub.add_parser("simulate", help="time response against the delayed ideal")
    p.add_argument("model")
    p.add_argument("filter")
    p.add_argument("--input", help="schedule CSV with rows 't, value'")
    p.add_argument("--duration", type=float, default=30.0)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="small-gain stability certificate")
    p.add_argument("model", help="analog controller JSON")
    p.add_argument("F", help="plant JSON")
    p.add_argument("filter", help="digital controller JSON")
    _common(p)
    p.set_defaults(func=cmd_certify, m=0)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ValidationError, UnstableSystemError) as exc:
        field = getattr(exc, "field", None)
        where = f" [{field}]" if field else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SdDiscError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
