"""``sl-lab`` command-line front end.

Every subcommand takes a problem file (a JSON path or a built-in name
such as ``paper-sec5``) and writes tables to stdout or to ``--out``.

Exit codes: 0 success, 1 invalid or incomplete input, 2 numerical
failure, 3 singular Gelfand-Levitan system.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from . import catalog
from . import exprparse as ep
from .criteria import eigenvalue_classify, nonreal_roots, scan
from .glevitan import (GLSingularError, GLSolver, SeparableKernel, TabulatedPotential,
                       build_kernel, gl_potential)
from .herglotz import (HerglotzFunction, SpectralMeasure, complex_function,
                       stieltjes_invert)
from .krein import MassDistribution, density_of, string_shift
from .slode import HalfLineProblem, m_coefficient, ode_big_M

# --------------------------------------------------------------------------
# Problem-file schema
# --------------------------------------------------------------------------

_NUM_OR_NULL = {"type": ["number", "null"]}

_MEASURE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "atoms": {"type": "array", "items": {
            "type": "object", "additionalProperties": False,
            "required": ["s", "w"],
            "properties": {"s": {"type": "number"}, "w": {"type": "number"}}}},
        "density": {
            "type": "object", "additionalProperties": False,
            "required": ["expr", "interval"],
            "properties": {
                "expr": {"type": "string", "minLength": 1},
                "interval": {"type": "array", "items": _NUM_OR_NULL,
                             "minItems": 2, "maxItems": 2},
                "tail_exponent": _NUM_OR_NULL,
                "edge_exponent": {"anyOf": [
                    _NUM_OR_NULL,
                    {"type": "array", "items": _NUM_OR_NULL, "minItems": 2, "maxItems": 2}]},
            }},
        "regularized": {"type": "boolean"},
        "constant": {"type": "number"},
        "label": {"type": "string"},
    },
}

_PROBLEM = {
    "type": "object",
    "additionalProperties": False,
    "required": ["side", "weight_expr"],
    "properties": {
        "side": {"enum": ["+", "-"]},
        "weight_expr": {"type": "string", "minLength": 1},
        "potential_expr": {"type": "string", "minLength": 1},
        "potential_source": {"enum": ["expr", "gl"]},
        "bc": {"enum": ["neumann", "dirichlet"]},
    },
}

_PAIR = {
    "type": "object", "additionalProperties": False,
    "properties": {"plus": {"type": "string", "minLength": 1},
                   "minus": {"type": "string", "minLength": 1}},
}

PROBLEM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "problems": {"type": "array", "items": _PROBLEM, "maxItems": 2},
        "measures": {"type": "object", "additionalProperties": False,
                     "properties": {"plus": _MEASURE, "minus": _MEASURE}},
        "closed_form_m": _PAIR,
        "string": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "mass_expr": {"type": "string", "minLength": 1},
                "samples": {"type": "array", "items": {
                    "type": "array", "items": {"type": "number"},
                    "minItems": 2, "maxItems": 2}},
                "length": _NUM_OR_NULL,
                "density_expr": {"type": "string", "minLength": 1},
                "c": {"type": "number"},
            },
        },
        "gl": {
            "type": "object", "additionalProperties": False, "required": ["measure"],
            "properties": {
                "measure": _MEASURE,
                "reference": _MEASURE,
                "x_max": {"type": "number", "exclusiveMinimum": 0},
                "n_points": {"type": "integer", "minimum": 2},
            },
        },
        "run": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "lambdas": {"type": "array", "items": {"type": "string"}},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "eps_decades": {"type": "number", "minimum": 3},
                "rays": {"type": "array", "items": {"type": "string"}},
                "interval": {"type": "array", "items": {"type": "number"},
                             "minItems": 2, "maxItems": 2},
                "box": {"type": "array", "items": {"type": "number"},
                        "minItems": 4, "maxItems": 4},
                "grid_density": {"type": "integer", "minimum": 2},
                "lambda0": {"type": "number"},
            },
        },
    },
}


class InputError(Exception):
    """Problem file missing, malformed or lacking a needed section."""


def load_problem_file(ref: str) -> dict:
    """Read and validate a problem file or built-in problem name."""
    data = catalog.load_builtin(ref)
    if data is None:
        path = Path(ref)
        if not path.is_file():
            raise InputError(f"no problem file or built-in named {ref!r} "
                             f"(built-ins: {', '.join(catalog.builtin_names())})")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{ref}: invalid JSON: {exc}") from None
    try:
        jsonschema.validate(data, PROBLEM_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"schema error at {where}: {exc.message}") from None
    return data


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.12g}"


def parse_complex(text: str) -> complex:
    """Evaluate constant complex text such as ``0.1*i`` or ``1+i``."""
    try:
        return complex_function(text, "lam")(0j)
    except ep.ExprError as exc:
        raise InputError(f"bad complex value {text!r}: {exc}") from None


def parse_real(text: str) -> float:
    """Evaluate constant real text such as ``pi/2``."""
    try:
        node = ep.parse(text)
        if ep.free_variable(node) is not None:
            raise InputError(f"{text!r} must be a constant")
        return float(ep.evaluate(node, 0.0))
    except ep.ExprError as exc:
        raise InputError(f"bad number {text!r}: {exc}") from None


def _measure(data: dict, key: str) -> SpectralMeasure:
    try:
        return SpectralMeasure.from_dict(data["measures"][key])
    except KeyError:
        raise InputError(f"problem file has no measures.{key}") from None


def _gl_potential_table(data: dict, x_max: Optional[float] = None,
                        n_points: Optional[int] = None):
    gl = data.get("gl")
    if gl is None:
        raise InputError("problem file has no gl section")
    mu = SpectralMeasure.from_dict(gl["measure"])
    ref = SpectralMeasure.from_dict(gl["reference"]) if "reference" in gl else None
    kernel = build_kernel(mu) if ref is None else build_kernel(mu, ref)
    if not isinstance(kernel, SeparableKernel):
        raise InputError("only measures with a separable kernel can be reconstructed here")
    x_max = x_max if x_max is not None else gl.get("x_max", 20.0)
    n_points = n_points if n_points is not None else gl.get("n_points", 401)
    xs = np.linspace(0.0, x_max, n_points)
    return kernel, gl_potential(kernel, xs, solver=GLSolver(kernel), strict=False)


def _problems(data: dict) -> dict[str, HalfLineProblem]:
    out = {}
    tab = None
    for entry in data.get("problems", []):
        func = None
        if entry.get("potential_source") == "gl":
            if tab is None:
                _, table = _gl_potential_table(data)
                if table.singular:
                    raise GLSingularError(float(table.x[table.singular[0]]), math.inf)
                tab = TabulatedPotential(table.x, table.q)
            func = tab
        side = entry["side"]
        if side in out:
            raise InputError(f"two problems on side {side}")
        out[side] = HalfLineProblem(entry["weight_expr"], entry.get("potential_expr", "0"),
                                    side, entry.get("bc", "neumann"), func)
    return out


def _big_m(data: dict, tol: float, prefer: str = "closed"):
    """``(M_+, M_-, source)`` from closed forms or from the ODE problems."""
    cf = data.get("closed_form_m", {})
    probs = data.get("problems", [])
    has_cf = "plus" in cf and "minus" in cf
    if has_cf and (prefer == "closed" or len(probs) < 2):
        return (HerglotzFunction.from_text(cf["plus"], label="M+"),
                HerglotzFunction.from_text(cf["minus"], label="M-"), "closed")
    ps = _problems(data)
    if "+" in ps and "-" in ps:
        mp, mm = ode_big_M(ps["+"], ps["-"], tol)
        return mp, mm, "ode"
    raise InputError("need closed_form_m.plus/minus or problems on both sides")


def _emit(text: str, out: Optional[str], suffix: str = "") -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out + suffix) if suffix else Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _eps_grid(decades: float, finest_top: float = 1e-2) -> np.ndarray:
    n = int(round(4 * decades)) + 1
    return np.geomspace(finest_top * 10.0 ** (-decades), finest_top, n)


def _run(data: dict, key: str, default):
    return data.get("run", {}).get(key, default)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def cmd_mfun(args, data: dict) -> int:
    tol = args.tol if args.tol is not None else _run(data, "tol", 1e-9)
    lams = [parse_complex(t) for t in (args.lam or _run(data, "lambdas", ["i"]))]
    rows = []
    ps = _problems(data) if data.get("problems") else {}
    if ps:
        for side, p in sorted(ps.items()):
            for lam in lams:
                if side == "+":
                    r = m_coefficient(p, lam, tol)
                    rows.append(("M+", lam, r.value, r.error_bound))
                else:
                    r = m_coefficient(p, -lam, tol)
                    rows.append(("M-", lam, -r.value, r.error_bound))
    else:
        cf = data.get("closed_form_m")
        if not cf:
            raise InputError("need problems or closed_form_m")
        for key, name in (("plus", "M+"), ("minus", "M-")):
            if key in cf:
                f = HerglotzFunction.from_text(cf[key], label=name)
                rows += [(name, lam, f(lam), 0.0) for lam in lams]
    table = _csv(["function", "re_lambda", "im_lambda", "re_value", "im_value", "error_bound"],
                 [(n, lam.real, lam.imag, v.real, v.imag, float(e)) for n, lam, v, e in rows])
    _emit(table, args.out)
    return 0


def cmd_scan(args, data: dict) -> int:
    tol = args.tol if args.tol is not None else _run(data, "tol", 1e-9)
    decades = args.eps_decades if args.eps_decades is not None else _run(data, "eps_decades", 6)
    rays = [parse_real(t) for t in (args.rays or _run(data, "rays", ["pi/2"]))]
    Mp, Mm, _ = _big_m(data, tol, "ode" if args.ode else "closed")
    report = scan(Mp, Mm, _eps_grid(decades), rays)
    if args.out is None:
        sys.stdout.write(report.to_json() + "\n")
    else:
        _emit(report.to_json() + "\n", args.out, ".json")
        _emit(report.to_csv(), args.out, ".csv")
        print(report.verdict)
    return 0


def cmd_string_shift(args, data: dict) -> int:
    entry = dict(data.get("string") or {})
    if not entry:
        raise InputError("problem file has no string section")
    c = args.c if args.c is not None else entry.pop("c", None)
    entry.pop("c", None)
    if c is None:
        raise InputError("no shift constant: pass --c or set string.c")
    if "mass_expr" not in entry and "samples" not in entry:
        raise InputError("string needs mass_expr or samples")
    base = MassDistribution.from_dict(entry)
    shifted = string_shift(base, c)
    x_max = args.x_max if args.x_max is not None else 10.0
    n = args.n_points if args.n_points is not None else 101
    xs = np.linspace(0.0, min(x_max, shifted.length), n)
    dens = density_of(shifted, xs)
    table = _csv(["x", "M", "density"], [(float(x), float(shifted(x)), float(d))
                                         for x, d in zip(xs, dens)])
    if args.out is None:
        sys.stdout.write(table)
    else:
        _emit(table, args.out, ".csv")
        if shifted.mass is not None or shifted.samples is not None:
            _emit(json.dumps(shifted.to_dict()) + "\n", args.out, ".json")
        else:
            _emit(json.dumps({"length": None if math.isinf(shifted.length) else shifted.length,
                              "samples": [[float(x), float(shifted(x))] for x in xs]}) + "\n",
                  args.out, ".json")
    return 0


def cmd_gl(args, data: dict) -> int:
    _, table = _gl_potential_table(data, args.x_max, args.n_points)
    _emit(table.to_csv(), args.out)
    if table.singular:
        bad = ", ".join(_fmt(float(table.x[k])) for k in table.singular)
        print(f"singular Gelfand-Levitan system at x = {bad}", file=sys.stderr)
        return 3
    return 0


def cmd_eigtest(args, data: dict) -> int:
    lam0 = args.lambda0 if args.lambda0 is not None else _run(data, "lambda0", 0.0)
    verdict = eigenvalue_classify(_measure(data, "plus"), _measure(data, "minus"), lam0)
    _emit(f"{verdict.verdict}\n", args.out)
    if verdict.reason:
        print(verdict.reason, file=sys.stderr)
    return 0


def cmd_invert(args, data: dict) -> int:
    tol = args.tol if args.tol is not None else _run(data, "tol", 1e-9)
    interval = args.interval or _run(data, "interval", None)
    if interval is None:
        raise InputError("no interval: pass --interval or set run.interval")
    cf = data.get("closed_form_m", {})
    if "plus" in cf:
        M, method = HerglotzFunction.from_text(cf["plus"]), "adaptive"
    elif "measures" in data and "plus" in data["measures"]:
        M, method = HerglotzFunction.from_measure(_measure(data, "plus")), "adaptive"
    else:
        ps = _problems(data)
        if "+" not in ps:
            raise InputError("need closed_form_m.plus, measures.plus or a + problem")
        M, method = ode_big_M(ps["+"], ps.get("-", ps["+"].with_side("-")), tol)[0], "gauss"
    n = args.n_points if args.n_points is not None else 41
    tab = stieltjes_invert(M, interval, n_points=n, method=method)
    _emit(_csv(["s", "tau", "error_estimate"],
               [(float(s), float(v), float(e)) for s, v, e in zip(tab.s, tab.values, tab.error)]),
          args.out)
    return 0


def cmd_roots(args, data: dict) -> int:
    tol = args.tol if args.tol is not None else _run(data, "tol", 1e-9)
    box = args.box or _run(data, "box", None)
    if box is None:
        raise InputError("no box: pass --box or set run.box")
    density = args.grid_density or _run(data, "grid_density", 32)
    Mp, Mm, _ = _big_m(data, tol)
    roots = nonreal_roots(Mp, Mm, box, density)
    _emit(_csv(["re", "im"], [(float(z.real), float(z.imag)) for z in roots]), args.out)
    return 0


COMMANDS = {
    "mfun": cmd_mfun, "scan": cmd_scan, "string-shift": cmd_string_shift, "gl": cmd_gl,
    "eigtest": cmd_eigtest, "invert": cmd_invert, "roots": cmd_roots,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sl-lab",
        description="m-functions, similarity diagnostics, string shifts and "
                    "Gelfand-Levitan reconstruction for indefinite Sturm-Liouville problems.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("problem", help="problem JSON file or built-in name "
                                       f"({', '.join(catalog.builtin_names())})")
        p.add_argument("--tol", type=float, help="m-function tolerance")
        p.add_argument("--out", help="output file (or prefix for scan/string-shift)")
        return p

    p = common(sub.add_parser("mfun", help="m-coefficients at given lambdas"))
    p.add_argument("--lambda", dest="lam", action="append",
                   help="spectral parameter, e.g. 0.1*i or 1+i (repeatable)")
    p = common(sub.add_parser("scan", help="similarity-ratio scan near 0 and infinity"))
    p.add_argument("--eps-decades", type=float, help="decades of the eps grid below 1e-2")
    p.add_argument("--rays", nargs="+", help="ray arguments in (0, pi), e.g. pi/2 pi/4")
    p.add_argument("--ode", action="store_true",
                   help="use the ODE problems even when closed forms exist")
    p = common(sub.add_parser("string-shift", help="Krein string spectral shift"))
    p.add_argument("--c", type=float, help="shift constant")
    p.add_argument("--x-max", type=float)
    p.add_argument("--n-points", type=int)
    p = common(sub.add_parser("gl", help="Gelfand-Levitan potential table"))
    p.add_argument("--x-max", type=float)
    p.add_argument("--n-points", type=int)
    p = common(sub.add_parser("eigtest", help="eigenvalue test from spectral measures"))
    p.add_argument("--lambda0", type=float)
    p = common(sub.add_parser("invert", help="Stieltjes inversion of M+"))
    p.add_argument("--interval", type=float, nargs=2)
    p.add_argument("--n-points", type=int)
    p = common(sub.add_parser("roots", help="non-real zeros of M+ - M-"))
    p.add_argument("--box", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--grid-density", type=int)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = load_problem_file(args.problem)
        return COMMANDS[args.command](args, data)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GLSingularError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
