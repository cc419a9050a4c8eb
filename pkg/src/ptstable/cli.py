"""Command-line front end for p-tempered alpha-stable laws.

Parameter files are JSON objects ``{"alpha", "p", "b", "measure": {"dim",
"rays": [{"direction", "profile": {"kind", ...}}]}}``; numbers may also be
given as decimal strings.  Exit codes: 0 success (or a valid measure), 1 an
invalid measure or a failed computation, 2 an unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import __version__, levy, moments, rv, sim, transforms
from .errors import InvalidMeasureError, ParseError, PTStableError
from .measure import TSParams, is_proper, validate
from .quadrature import QuadTol

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


# ---------------------------------------------------------------------------
# files


def _numbers(obj):
    """Turn numeric strings into floats, leaving the profile kind alone."""
    if isinstance(obj, dict):
        return {k: (v if k == "kind" else _numbers(v)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_numbers(v) for v in obj]
    if isinstance(obj, str):
        try:
            return float(obj)
        except ValueError:
            raise ParseError(f"expected a number, got {obj!r}") from None
    return obj


def load_params(path: str, check: bool = True) -> TSParams:
    """Read a parameter file.  Raises ParseError for unreadable or malformed
    files and InvalidMeasureError (when ``check``) for invalid measures."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, ValueError) as e:
        raise ParseError(f"cannot read {path}: {e}") from None
    try:
        return TSParams.from_dict(_numbers(raw), check=check)
    except InvalidMeasureError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError, IndexError) as e:
        raise ParseError(f"malformed parameter file {path}: {e!r}") from None


def save_params(params: TSParams, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(params.to_dict(), fh, indent=1)
        fh.write("\n")


def parse_grid(spec: str) -> np.ndarray:
    """``min:max:count`` with an optional ``:log`` (default) or ``:lin``."""
    parts = spec.split(":")
    if len(parts) not in (3, 4):
        raise ParseError(f"grid must be min:max:count[:log|lin], got {spec!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ParseError(f"bad grid {spec!r}") from None
    scale = parts[3] if len(parts) == 4 else "log"
    if scale not in ("log", "lin") or n < 1 or not lo > 0 or not hi >= lo:
        raise ParseError(f"bad grid {spec!r}")
    return np.geomspace(lo, hi, n) if scale == "log" else np.linspace(lo, hi, n)


def _fmt(x: float) -> str:
    return repr(float(x)) if not math.isfinite(x) else f"{x:.17g}"


def _write_csv(rows: List[list], header: List[str], path: Optional[str]) -> None:
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    finally:
        if path:
            fh.close()


def _emit_json(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=1, default=float)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _tol(args) -> QuadTol:
    return QuadTol(epsabs=0.0, epsrel=args.tol) if args.tol else QuadTol()


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    params = load_params(args.input, check=False)
    rep = validate(params.alpha, params.R)
    out = {"valid": rep.valid, "violations": list(rep.violations),
           "integrals": {k: float(v) for k, v in rep.integrals.items()}}
    if rep.valid:
        out["proper"] = is_proper(params.alpha, params.R)
        sd = levy.is_selfdecomposable(params)
        out["selfdecomposable"] = "unknown" if sd is None else sd
    _emit_json(out, args.output)
    return EXIT_OK if rep.valid else EXIT_FAIL


def cmd_cumulants(args) -> int:
    params = load_params(args.input)
    rows = []
    for i in range(params.dim):
        for q in range(1, args.max_order + 1):
            k = [0] * params.dim
            k[i] = q
            if moments.moment_finite(params, k=k):
                rows.append([i, q, "finite", moments.cumulant(params, k, _tol(args))])
            else:
                rows.append([i, q, "infinite", ""])
    _write_csv(rows, ["coordinate", "order", "status", "cumulant"], args.output)
    return EXIT_OK


def cmd_tail(args) -> int:
    params = load_params(args.input)
    r = parse_grid(args.grid)
    cone = [int(x) for x in args.cone.split(",")] if args.cone else None
    vals = levy.tail(params, r, cone, _tol(args))
    _write_csv([[float(a), float(b)] for a, b in zip(r, vals)], ["r", "tail"], args.output)
    return EXIT_OK


def cmd_transform(args) -> int:
    params = load_params(args.input)
    if args.op == "lower-alpha":
        if args.alpha is None:
            raise ParseError("lower-alpha needs --alpha")
        out = transforms.lower_alpha(params, args.alpha)
    else:
        if args.q is None:
            raise ParseError("raise-p needs --q")
        out = transforms.raise_p(params, args.q)
    save_params(out, args.output)
    rep = transforms.verify_membership(params, out, parse_grid(args.grid), args.check_tol)
    _emit_json({"passed": rep.passed, "max_rel_dev": rep.max_rel_dev, "tol": rep.tol,
                "output": args.output}, args.report)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_compare(args) -> int:
    a, b = load_params(args.input), load_params(args.other)
    rep = transforms.verify_membership(a, b, parse_grid(args.grid), args.check_tol)
    per = {",".join(_fmt(x) for x in d): v for d, v in rep.per_direction.items()}
    _emit_json({"passed": rep.passed, "max_rel_dev": rep.max_rel_dev, "tol": rep.tol,
                "per_direction": per}, args.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_simulate(args) -> int:
    params = load_params(args.input)
    cfg = sim.SimConfig(epsilon=args.epsilon, n=args.n, seed=args.seed,
                        small_jump=args.small_jump)
    batch = sim.sample(params, cfg)
    sim.write_batch(args.output, batch)
    d = batch.diagnostics
    print(json.dumps({"n": batch.n, "dim": batch.dim, "jump_rate": d.jump_rate,
                      "n_jumps": d.n_jumps, "output": args.output}), file=sys.stderr)
    return EXIT_OK


def cmd_doa(args) -> int:
    params = load_params(args.input)
    n_values = tuple(int(x) for x in args.n_values.split(","))
    rep = rv.doa_experiment(params, n_values, args.m, args.seed, args.epsilon)
    _emit_json({"gamma": rep.gamma, "n_values": list(rep.n_values),
                "distances": [float(x) for x in rep.distances],
                "decreasing": rep.decreasing}, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptstable", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, output=True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", "-i", required=True, help="parameter file (JSON)")
        if output:
            p.add_argument("--output", "-o", help="output file (stdout when omitted)")
        p.add_argument("--tol", type=float, help="relative quadrature tolerance")
        p.set_defaults(func=fn)
        return p

    add("validate", cmd_validate, "check the integrability conditions on R")
    p = add("cumulants", cmd_cumulants, "cumulants along each axis")
    p.add_argument("--max-order", type=int, default=4)
    p = add("tail", cmd_tail, "Levy tail M_D(r) on a grid")
    p.add_argument("--grid", default="0.01:100:20:log", help="min:max:count[:log|lin]")
    p.add_argument("--cone", help="comma-separated ray indices (default: all)")
    p = add("transform", cmd_transform, "rewrite as lower alpha or higher p", output=False)
    p.add_argument("--op", choices=("lower-alpha", "raise-p"), required=True)
    p.add_argument("--alpha", type=float, help="target alpha for lower-alpha")
    p.add_argument("--q", type=float, help="target p for raise-p")
    p.add_argument("--output", "-o", required=True, help="transformed parameter file")
    p.add_argument("--report", help="membership report (stdout when omitted)")
    p.add_argument("--grid", default="0.1:10:9:log")
    p.add_argument("--check-tol", type=float, default=1e-6)
    p = add("compare", cmd_compare, "compare the Levy tails of two parameter files")
    p.add_argument("--other", required=True, help="second parameter file")
    p.add_argument("--grid", default="0.1:10:9:log")
    p.add_argument("--check-tol", type=float, default=1e-6)
    p = add("simulate", cmd_simulate, "draw samples to a TSBATCH1 file", output=False)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--small-jump", choices=(sim.GAUSSIAN, sim.DRIFT_ONLY), default=sim.GAUSSIAN)
    p = add("doa", cmd_doa, "domain-of-attraction experiment")
    p.add_argument("--n-values", default="100,1000,10000")
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=1e-2)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidMeasureError as e:
        print(f"invalid measure: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (PTStableError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
