"""Command line interface: ``liedouble <command> ...``.

Exit codes: 0 when every check passes, 1 when some check fails or a point
cannot be factorized, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import algebra_core as ac
from .algebra_core import Report, algebra_from_json, algebra_to_json, check_jacobi, check_metric_invariance
from .bialgebra import (Bialgebra, RMatrix, check_bialgebra, check_weight_brackets, check_ybe,
                        rmatrix_condition_suite, weight_decomposition, YBE_MODES)
from .catalog import (axb_restricted_field, bracket_table, load_catalog)
from .constructions import (ManinDecomposition, cayley, diagonal_graph_witness, gauss_from_r, manin_double,
                            r_from_manin)
from .exterior import CochainMap, Multivector
from .groups import NotFactorizable
from .poisson import (GROUP_VARIANTS, CoordinateFunction, DeterminantFunction, characteristic_rank, flow,
                      lam_matrix, poisson_bracket)


class UsageError(Exception):
    pass


FLOW_FIELDS = {
    "axb-dressing-X1": axb_restricted_field,
}


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _algebra(d, exact: bool):
    A = algebra_from_json(d)
    L = A.algebra if isinstance(A, ac.MetricalLieAlgebra) else A
    if exact and not L.exact:
        raise UsageError("--exact needs string (p/q) scalars in the input")
    if not exact and L.exact:
        A = A.to_float()
    return A


def _metrical(d, exact: bool, validate: bool = True):
    if "metric" not in d:
        raise UsageError("input has no metric")
    A = _algebra(dict(d, metric=d["metric"]), exact) if validate else None
    if A is None:
        d2 = {k: v for k, v in d.items() if k != "metric"}
        L = _algebra(d2, exact)
        G = ac._matrix_from_json(d["metric"], L.exact)
        return ac.MetricalLieAlgebra(L, G, validate=False)
    return A


def _matrix(rows, exact: bool):
    M = ac._matrix_from_json(rows, exact or all(isinstance(v, str) for r in rows for v in r))
    return M if exact else ac.float_array(M)


def _rmatrix(d, M, exact: bool):
    if "rmatrix" in d:
        return _matrix(d["rmatrix"], exact)
    if "decomposition" in d:
        dec = ManinDecomposition.from_indices(M, d["decomposition"]["plus"], d["decomposition"]["minus"])
        return r_from_manin(dec).op
    raise UsageError("input needs an 'rmatrix' or a 'decomposition'")


def _bialgebra(d, exact: bool) -> Bialgebra:
    A = _algebra({k: v for k, v in d.items() if k != "metric"}, exact)
    if "cobracket" not in d:
        raise UsageError("input has no cobracket")
    imgs = [Multivector.from_json(m, A.dim) for m in d["cobracket"]["images"]]
    if not exact:
        imgs = [m.to_float() for m in imgs]
    return Bialgebra(A, CochainMap(imgs, 2), validate=False)


def parse_point(text):
    """A matrix as JSON: nested real lists, nested ``[re, im]`` pairs, or
    ``{"re": ..., "im": ...}``."""
    try:
        v = json.loads(text)
    except json.JSONDecodeError:
        v = _read_json(text)
    if isinstance(v, dict):
        return np.array(v["re"], dtype=float) + 1j * np.array(v.get("im", 0.0), dtype=float)
    a = np.array(v, dtype=float)
    if a.ndim == 3:
        return a[..., 0] + 1j * a[..., 1]
    return a


def parse_function(label: str):
    """``z3``, ``zbar3``, ``re3``, ``im3`` (entries numbered row by row),
    ``det`` or ``detbar``."""
    if label in ("det", "detbar"):
        return DeterminantFunction(conj=label == "detbar")
    for prefix, part in (("zbar", "zbar"), ("re", "re"), ("im", "im"), ("z", "z")):
        if label.startswith(prefix) and label[len(prefix):].isdigit():
            k = int(label[len(prefix):]) - 1
            return CoordinateFunction(k // 2, k % 2, part)
    raise UsageError(f"unknown function {label!r}")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(args):
    d = _read_json(args.file)
    if args.what == "jacobi":
        A = _algebra({k: v for k, v in d.items() if k != "metric"}, args.exact)
        return [check_jacobi(A, args.tol)]
    if args.what == "metric":
        M = _metrical(d, args.exact, validate=False)
        return [check_metric_invariance(M, args.tol)]
    if args.what == "bialgebra":
        return [check_bialgebra(_bialgebra(d, args.exact), args.tol)]
    M = _metrical(d, args.exact)
    R = _rmatrix(d, M, args.exact)
    kw = {}
    if args.mode == "c-mYBE":
        if args.c is None:
            raise UsageError("c-mYBE needs --c")
        kw["c"] = ac.parse_scalar(args.c) if args.exact else float(ac.parse_scalar(args.c))
    return [check_ybe(M, R, args.mode, args.tol, **kw)]


def cmd_double(args):
    d = _read_json(args.file)
    if args.what == "build":
        B = _bialgebra(d, args.exact)
        rep = check_bialgebra(B, args.tol)
        if not rep.passed:
            return [rep]
        M, dec = manin_double(B)
        out = algebra_to_json(M)
        out["decomposition"] = {"plus": dec.plus_idx, "minus": dec.minus_idx}
        return [rep], out
    M = _metrical(d, args.exact)
    R = _rmatrix(d, M, args.exact)
    return [diagonal_graph_witness(M, R, args.tol)]


def cmd_rmatrix(args):
    d = _read_json(args.file)
    M = _metrical(d, args.exact)
    if args.what == "cayley":
        if "automorphism" not in d:
            raise UsageError("cayley needs an 'automorphism' matrix")
        A = _matrix(d["automorphism"], args.exact)
        R = cayley(A)
        reps = [rmatrix_condition_suite(M, R, args.tol), diagonal_graph_witness(M, R, args.tol)]
        return reps, {"rmatrix": ac._jsonable(np.vectorize(ac.format_scalar, otypes=[object])(R))}
    R = _rmatrix(d, M, args.exact)
    if args.what == "weights":
        W = weight_decomposition(R)
        rep = check_weight_brackets(M, R, W, tol=max(args.tol, 1e-8))
        return [rep], {"weights": [complex(w) for w in W.weights], "dims": W.dims()}
    dec, A = gauss_from_r(RMatrix(M, R))
    return [dec.check(args.tol)], {"dims": {"plus": dec.plus.shape[0], "zero": dec.zero.shape[0],
                                           "minus": dec.minus.shape[0]}}


def _points(entry, args):
    if args.point:
        return [parse_point(args.point)]
    return entry.points(np.random.default_rng(args.seed), args.samples)


def cmd_poisson(args):
    entry = load_catalog(args.example)
    if args.what == "table":
        return [bracket_table(entry, args.samples, args.tol, args.seed)]
    ctx = entry.context
    pts = _points(entry, args)
    if args.what == "eval":
        mats = [lam_matrix(ctx, args.variant, a) for a in pts]
        skew = max(float(np.max(np.abs(m + m.T))) for m in mats)
        return [Report("eval", skew, skew <= args.tol)], {"coefficients": [m.round(15) for m in mats]}
    if args.what == "bracket":
        if not (args.f and args.g):
            raise UsageError("bracket needs --f and --g")
        f, g = parse_function(args.f), parse_function(args.g)
        vals = [complex(poisson_bracket(ctx, args.variant, f, g, a)) for a in pts]
        return [], {"values": vals}
    ranks = [characteristic_rank(ctx, args.variant, a) for a in pts]
    return [], {"ranks": ranks}


def cmd_flow(args):
    if args.field not in FLOW_FIELDS:
        raise UsageError(f"unknown field {args.field!r}; choose from {sorted(FLOW_FIELDS)}")
    try:
        x0 = [float(v) for v in args.x0.split(",")]
    except ValueError:
        raise UsageError("--x0 takes comma separated numbers")
    if args.dt == 0:
        raise UsageError("--dt must be nonzero")
    traj = flow(FLOW_FIELDS[args.field], x0, args.t0, args.t1, args.dt)
    if args.out:
        traj.to_csv(args.out)
    elif not args.json:
        traj.to_csv(sys.stdout)
    info = {"field": args.field, "steps": len(traj.t), "blowup": traj.blowup, "escape_time": traj.escape_time}
    return [], info


def cmd_factorize(args):
    entry = load_catalog(args.example)
    a = parse_point(args.point)
    D = entry.double
    if not entry.group.member(a, 1e-8):
        raise UsageError("point is not in the group")
    out = {}
    reps = []
    for name, fact in (("phi", D.factorize_phi), ("psi", D.factorize_psi)):
        try:
            p, q = fact(a, method=args.method)
            r = float(np.max(np.abs(p @ q - a)))
            reps.append(Report(f"factorize[{name}]", r, r <= args.tol))
            out[name] = [p, q]
        except NotFactorizable as exc:
            reps.append(Report(f"factorize[{name}]", float("inf"), False, {"reason": str(exc)}))
    return reps, out


# ---------------------------------------------------------------------------
# parser and main
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(defaults: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags without defaults, so a flag given
    # before the subcommand is not reset by the subparser
    kw = (lambda v: {"default": v}) if defaults else (lambda v: {"default": argparse.SUPPRESS})
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, help="tolerance for float checks", **kw(1e-9))
    common.add_argument("--exact", action="store_true", help="exact rational arithmetic", **kw(False))
    common.add_argument("--json", action="store_true", help="JSON report on stdout", **kw(False))
    common.add_argument("--seed", type=int, help="seed for sample points", **kw(0))
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    p = _Parser(prog="liedouble", description="Lie bialgebras, doubles and Poisson-Lie groups.",
                parents=[_common(True)])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="check an algebra JSON file")
    c.add_argument("what", choices=["jacobi", "metric", "bialgebra", "ybe"])
    c.add_argument("file")
    c.add_argument("--mode", choices=YBE_MODES, default="1-mYBE")
    c.add_argument("--c", default=None, help="constant for c-mYBE")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("double", parents=[common], help="build a double or check the graph witness")
    d.add_argument("what", choices=["build", "witness"])
    d.add_argument("file")
    d.set_defaults(func=cmd_double)

    r = sub.add_parser("rmatrix", parents=[common], help="weights, Gauss decomposition, Cayley transform")
    r.add_argument("what", choices=["weights", "gauss", "cayley"])
    r.add_argument("file")
    r.set_defaults(func=cmd_rmatrix)

    q = sub.add_parser("poisson", parents=[common], help="Poisson structures on catalog groups")
    q.add_argument("what", choices=["eval", "bracket", "table", "rank"])
    q.add_argument("--example", default="sl2c")
    q.add_argument("--variant", default="plus", choices=GROUP_VARIANTS)
    q.add_argument("--samples", type=int, default=10)
    q.add_argument("--point", default=None, help="matrix as JSON (or a JSON file)")
    q.add_argument("--f", default=None)
    q.add_argument("--g", default=None)
    q.set_defaults(func=cmd_poisson)

    f = sub.add_parser("flow", parents=[common], help="integrate a named vector field")
    f.add_argument("--field", required=True)
    f.add_argument("--x0", required=True)
    f.add_argument("--t0", type=float, default=0.0)
    f.add_argument("--t1", type=float, required=True)
    f.add_argument("--dt", type=float, default=0.01)
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_flow)

    z = sub.add_parser("factorize", parents=[common], help="factorize a point a = g u = v h")
    z.add_argument("--example", default="sl2c")
    z.add_argument("--point", required=True)
    z.add_argument("--method", choices=["auto", "closed", "newton"], default="auto")
    z.set_defaults(func=cmd_factorize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        result = args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, ac.ModeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    reports, extra = (result, None) if isinstance(result, list) else result
    ok = all(r.passed for r in reports)
    if args.json:
        payload = {"command": args.command, "pass": ok, "reports": [r.to_dict() for r in reports]}
        if extra is not None:
            payload["result"] = ac._jsonable(extra)
        print(json.dumps(payload, sort_keys=True))
    else:
        for r in reports:
            print(r.line())
            rows = r.details.get("rows") if isinstance(r.details.get("rows"), list) else None
            for row in rows or []:
                if isinstance(row, dict):
                    print(f"  {'PASS' if row['pass'] else 'FAIL'} {row['row']}: residual={row['residual']:.3e}")
        if extra is not None and not (args.command == "flow" and not args.out):
            print(json.dumps(ac._jsonable(extra), sort_keys=True))
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
