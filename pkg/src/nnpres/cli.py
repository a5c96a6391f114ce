"""Command-line front end.

Exit codes: 0 on a pass or a successful evaluation, 2 when a check fails
with a witness, 1 on usage or validation errors.
"""

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import checkers, niep
from .divdiff import divided_difference, opitz_matrix_check
from .errors import NNPresError, ParseError
from .funcspec import FunctionSpec, from_dict as function_from_dict
from .matfun import (Matrix, apply_block_triangular, apply_circulant, apply_companion,
                     apply_newton, apply_taylor, apply_triangular_explicit)
from .spectra import circ_spectrum, diagonal_spectrum, spectral_radius, sym_eigs
from .structmat import circulant_from_row

__all__ = ["main", "run", "load_inputs", "build_parser"]

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
METHODS = ("taylor", "newton", "triangular", "circulant", "block", "companion")
CHECKS = ("f1", "divdiff", "circulant", "f2", "sym-parity", "newnc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_json(source):
    text = source if source.lstrip().startswith(("{", "[")) else None
    if text is None:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON ({exc})") from exc


def _parse_object(d):
    if not isinstance(d, dict):
        raise ParseError("expected a JSON object")
    if "type" in d:
        return function_from_dict(d)
    if "rows" in d:
        return Matrix.from_dict(d)
    if "tuple" in d:
        return niep.SpectrumTuple.from_dict(d)
    raise ParseError("unrecognized object: expected a function, matrix or tuple")


def load_inputs(paths):
    """Parse each JSON file (or inline JSON text) into a domain object.

    Functions have a ``type`` key, matrices a ``rows`` key and spectrum
    tuples a ``tuple`` key.  Declared matrix structures are validated.
    """
    single = isinstance(paths, (str, os.PathLike))
    out = [_parse_object(_read_json(str(p))) for p in ([paths] if single else paths)]
    return out[0] if single else out


def _load(source, kind):
    obj = load_inputs(source)
    if not isinstance(obj, kind):
        raise ParseError(f"{source}: expected a {kind.__name__}")
    return obj


def _floats(text, what):
    try:
        return [float(Fraction(t.strip())) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"cannot parse {what} {text!r}") from exc


def _default_seed():
    env = os.environ.get("NNPRES_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"NNPRES_SEED must be an integer, got {env!r}") from exc


def build_parser():
    p = _Parser(prog="nnpres", description="Matrix functions and nonnegativity checks.")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--pretty", action="store_true",
                        help="human-readable output with 10 significant digits")

    def sampling(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--samples", type=int, default=2000, help="random samples")
        sp.add_argument("--grid-max", type=float, default=10.0)
        sp.add_argument("--grid-points", type=int, default=200)
        sp.add_argument("--tol", type=float, default=1e-9)

    a = sub.add_parser("apply", help="evaluate f(A)")
    a.add_argument("--func", required=True)
    a.add_argument("--matrix", required=True)
    a.add_argument("--method", choices=METHODS, default="taylor")
    a.add_argument("--spectrum", help="comma-separated eigenvalues for --method newton")
    a.add_argument("--minpoly", help="ascending monic coefficients for --method companion")
    a.add_argument("--blocks", help="block sizes n1,n2 for --method block")
    common(a)

    c = sub.add_parser("check", help="membership check")
    c.add_argument("--class", dest="cls", choices=CHECKS, required=True)
    c.add_argument("--func", required=True)
    c.add_argument("--n", type=int, default=2)
    sampling(c)
    common(c)

    f = sub.add_parser("falsify", help="random counterexample search")
    f.add_argument("--func", required=True)
    f.add_argument("--class", dest="cls", choices=checkers.CLASSES, default="general")
    f.add_argument("--n", type=int, default=2)
    f.add_argument("--budget", type=int, default=20_000)
    f.add_argument("--seed", type=int, default=None)
    f.add_argument("--tol", type=float, default=1e-9)
    common(f)

    s = sub.add_parser("niep", help="screen a spectrum")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--tuple", help='comma-separated reals, e.g. "2,-1,-1"')
    src.add_argument("--input", help='JSON file {"tuple": [...]}')
    src.add_argument("--matrix", help="nonnegative matrix whose spectrum is screened")
    s.add_argument("--checks", default="moments,jll")
    s.add_argument("--shift", type=float, help="r for the Newton inequalities")
    s.add_argument("--k-max", type=int, default=4)
    s.add_argument("--m-max", type=int, default=4)
    common(s)

    d = sub.add_parser("divdiff", help="divided difference")
    d.add_argument("--func", required=True)
    d.add_argument("--nodes", required=True, help="comma-separated nodes")
    d.add_argument("--opitz", action="store_true", help="also evaluate the matrix oracle")
    common(d)
    return p


# ---------------------------------------------------------------- verbs


def _apply(args):
    f = _load(args.func, FunctionSpec)
    m = _load(args.matrix, Matrix)
    method = args.method
    if method == "taylor":
        out = apply_taylor(f, m)
    elif method == "newton":
        if args.spectrum:
            spec = _floats(args.spectrum, "spectrum")
        elif m.structure in ("symmetric", "jacobi", "anti-bidiagonal"):
            spec = sym_eigs(m.entries)
        elif m.structure == "upper-triangular":
            spec = diagonal_spectrum(m.entries)
        else:
            raise UsageError("--spectrum is required unless the matrix is symmetric or triangular")
        out = apply_newton(f, m, spec)
    elif method == "triangular":
        out = apply_triangular_explicit(f, m)
    elif method == "circulant":
        row = apply_circulant(f, Matrix(m.entries, "circulant").entries[0])
        out = circulant_from_row(row)
    elif method == "block":
        blocks = tuple(int(v) for v in _floats(args.blocks, "blocks")) if args.blocks else m.blocks
        if blocks is None:
            raise UsageError("--blocks is required unless the matrix declares them")
        out = apply_block_triangular(f, Matrix(m.entries, "block-upper-triangular", blocks))
    else:
        if not args.minpoly:
            raise UsageError("--minpoly is required for --method companion")
        out = apply_companion(f, m, _floats(args.minpoly, "minpoly"))
    return EXIT_OK, out.to_dict()


def _config(args):
    seed = args.seed if args.seed is not None else _default_seed()
    return checkers.SamplerConfig(args.grid_max, args.grid_points, args.samples, seed, args.tol)


def _check(args):
    f = _load(args.func, FunctionSpec)
    cfg = _config(args)
    cls = args.cls
    if cls == "f1":
        rep = checkers.check_f1(f, cfg)
    elif cls == "divdiff":
        rep = checkers.check_divdiff_criterion(f, args.n, cfg)
    elif cls == "circulant":
        rep = checkers.check_circulant_preservation(f, args.n, cfg)
    elif cls == "f2":
        rep = checkers.check_f2(f, cfg)
    elif cls == "sym-parity":
        rep = checkers.check_sym_parity(f, args.n, cfg)
    else:
        rep = checkers.check_newnc(f, args.n, cfg)
    return (EXIT_FAIL if rep.verdict == "fail" else EXIT_OK), rep.to_dict()


def _falsify(args):
    f = _load(args.func, FunctionSpec)
    seed = args.seed if args.seed is not None else _default_seed()
    rep = checkers.falsify(f, args.cls, args.n, args.budget, seed, args.tol)
    return (EXIT_FAIL if rep.verdict == "fail" else EXIT_OK), rep.to_dict()


def _niep(args):
    wanted = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(wanted) - {"moments", "jll", "newton"}
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(sorted(unknown))}")
    radius = None
    if args.matrix:
        m = _load(args.matrix, Matrix)
        if m.structure in ("symmetric", "jacobi", "anti-bidiagonal"):
            vals = sym_eigs(m.entries).values
        elif m.structure == "upper-triangular":
            vals = diagonal_spectrum(m.entries).values
        elif m.structure == "circulant":
            vals = circ_spectrum(m.entries[0]).values
        else:
            raise UsageError("spectrum available for symmetric, triangular or circulant matrices")
        radius = spectral_radius(m.entries)
    elif args.input:
        vals = _load(args.input, niep.SpectrumTuple).values
    else:
        vals = niep.SpectrumTuple.parse(args.tuple).values
    complex_vals = any(isinstance(v, complex) and abs(v.imag) > 0 for v in vals)
    real_vals = None if complex_vals else tuple(complex(v).real for v in vals)
    reports = []
    for name in wanted:
        if name == "newton":
            r = args.shift if args.shift is not None else (
                radius if radius is not None else max(abs(v) for v in vals))
            reports.append(niep.check_newton_ineq(vals, r))
        elif real_vals is None:
            raise UsageError(f"check {name!r} needs a real spectrum")
        elif name == "moments":
            reports.append(niep.check_moments(real_vals, args.k_max * args.m_max))
        else:
            reports.append(niep.check_jll(real_vals, args.k_max, args.m_max))
    out = {"tuple": [_num(v) for v in vals],
           "reports": [r.to_dict() for r in reports]}
    if real_vals is not None:
        out["diagnostics"] = niep.diagnostics(real_vals)
    ok = all(r.passed for r in reports)
    return (EXIT_OK if ok else EXIT_FAIL), out


def _divdiff(args):
    f = _load(args.func, FunctionSpec)
    nodes = [Fraction(t.strip()) for t in args.nodes.split(",") if t.strip()]
    nodes = [int(x) if x.denominator == 1 else x for x in nodes]
    res = divided_difference(f, nodes)
    out = {"nodes": [float(x) for x in res.nodes], "order": res.order,
           "value": float(res.value)}
    if isinstance(res.value, Fraction):
        out["exact"] = str(res.value)
    if args.opitz:
        out["opitz"] = opitz_matrix_check(f, [float(x) for x in nodes])
    return EXIT_OK, out


VERBS = {"apply": _apply, "check": _check, "falsify": _falsify, "niep": _niep,
         "divdiff": _divdiff}


def _num(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return float(v)


# ---------------------------------------------------------------- output


def _fmt(v):
    return f"{v:.10g}"


def _pretty(obj, indent=0):
    pad = " " * indent
    lines = []
    for key, val in obj.items():
        if key in ("rows", "matrix") and isinstance(val, list) and val and isinstance(val[0], list):
            cells = [[_fmt(x) for x in row] for row in val]
            width = max(len(c) for row in cells for c in row)
            lines.append(f"{pad}{key}:")
            lines.extend(pad + "  " + "  ".join(c.rjust(width) for c in row) for row in cells)
        elif isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_pretty(val, indent + 2))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.extend(_pretty(item, indent + 2))
                lines.append("")
        elif isinstance(val, float):
            lines.append(f"{pad}{key}: {_fmt(val)}")
        elif isinstance(val, list):
            lines.append(f"{pad}{key}: " + ", ".join(
                _fmt(x) if isinstance(x, float) else str(x) for x in val))
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, Fraction)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def run(argv=None, stdout=None, stderr=None):
    """Run one command; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        code, report = VERBS[args.verb](args)
    except UsageError as exc:
        print(f"nnpres: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (NNPresError, ValueError) as exc:
        print(f"nnpres: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_USAGE
    report = _jsonable(report)
    if args.pretty:
        print("\n".join(_pretty(report)), file=stdout)
    else:
        print(json.dumps(report), file=stdout)
    return code


def main(argv=None):
    try:
        return run(argv)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
