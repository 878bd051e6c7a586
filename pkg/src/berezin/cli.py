"""``berezin`` command-line tool.

Subcommands::

    berezin range      --op FILE [--grid-r N --grid-theta N --rmax X] [--format csv|json]
    berezin radius     --op FILE [--tol X]
    berezin convexity  --op FILE [--tol X --seed N --strict]
    berezin numrange   --matrix FILE [--grid-theta K]
    berezin verify     SUITE [--trials N --seed N --dims 2-8 --nu 0.25,0.5,0.75 --matrix FILE]

Exit codes: 0 ok, 2 malformed input, 3 domain error, 4 witness found under
``--strict``, 5 inequality violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .documents import load_matrix, load_operator
from .errors import BerezinError, DocumentError
from .inequalities import (OPERATOR_SUITES, SUITE_NAMES, TrialConfig, InequalityReport,
                           run_operator_suite, verify_scalar_suite)
from .matrices import berezin_quantities_finite, convex_hull, hausdorff_distance, numerical_range_boundary
from .ranges import (DiscGrid, find_nonconvexity_witness, locate_berezin_radius,
                     match_closed_form, sample_range)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_WITNESS = 4
EXIT_VIOLATION = 5


@dataclass
class RunManifest:
    command: str
    inputs: list
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    tool_version: str = __version__


def _num(x) -> str:
    """Shortest round-trip text for a float (ints stay ints)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _flatten(d, prefix=""):
    for k in sorted(d):
        v, key = d[k], f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list) and v and all(isinstance(e, float) for e in v):
            yield key, ";".join(_num(e) for e in v)
        elif isinstance(v, list):
            yield key, json.dumps(v, sort_keys=True)
        else:
            yield key, "" if v is None else _num(v)


def render(manifest: RunManifest, fmt: str, *, rows=None, columns=None, report=None) -> str:
    """Serialize a result.  CSV carries the manifest as a leading ``#`` JSON line."""
    man = _jsonable(asdict(manifest))
    if fmt == "json":
        doc = {"manifest": man}
        if report is not None:
            doc["report"] = _jsonable(report)
        if rows is not None:
            doc["columns"] = list(columns)
            doc["rows"] = _jsonable(rows)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps({"manifest": man}, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    if rows is not None:
        w.writerow(columns)
        for r in rows:
            w.writerow([_num(x) for x in r])
    else:
        w.writerow(["key", "value"])
        for k, v in _flatten(_jsonable(report)):
            w.writerow([k, v])
    return buf.getvalue()


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _int_list(text: str) -> list[int]:
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = (int(x) for x in part.split("-", 1))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc
    return out


def _grid(args) -> DiscGrid:
    return DiscGrid(n_radial=args.grid_r, n_angular=args.grid_theta, r_max=args.rmax)


def _need(args, name):
    if getattr(args, name) is None:
        raise DocumentError(f"--{name} FILE is required for {args.command}")


def _params(args, *names):
    return {n.replace("_", "-"): getattr(args, n) for n in names}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_range(args) -> int:
    _need(args, "op")
    op = load_operator(args.op, args.space)
    params = _params(args, "space")
    if op.space.is_disc:
        params.update(_params(args, "grid_r", "grid_theta", "rmax"))
        rec = sample_range(op, _grid(args)).records()
    else:
        diag = berezin_quantities_finite(op.to_matrix()).ber_set
        idx = np.arange(diag.size, dtype=float)
        rec = np.column_stack([idx, np.zeros_like(idx), diag.real, diag.imag])
    man = RunManifest("range", [args.op], params, None)
    _emit(args, render(man, args.format or "csv", rows=rec.tolist(),
                       columns=["lambda_re", "lambda_im", "value_re", "value_im"]))
    return EXIT_OK


def cmd_radius(args) -> int:
    _need(args, "op")
    op = load_operator(args.op, args.space)
    params = _params(args, "space", "tol")
    if op.space.is_disc:
        params.update(_params(args, "grid_r", "grid_theta", "rmax"))
        ber, arg = locate_berezin_radius(op, _grid(args), tol=args.tol)
    else:
        diag = berezin_quantities_finite(op.to_matrix()).ber_set
        k = int(np.argmax(np.abs(diag)))
        ber, arg = float(abs(diag[k])), complex(k)
    report = {"space": op.space.kind, "radius": ber, "argmax": arg,
              "family": None, "oracle": None, "difference": None}
    match = match_closed_form(op)
    if match is not None:
        report.update(family=match[0], oracle=match[1], difference=ber - match[1])
    man = RunManifest("radius", [args.op], params, None)
    _emit(args, render(man, args.format or "json", report=report))
    return EXIT_OK


def cmd_convexity(args) -> int:
    _need(args, "op")
    op = load_operator(args.op, args.space)
    attain = 1e-3 if args.tol is None else args.tol
    params = _params(args, "space", "grid_r", "grid_theta", "rmax", "strict")
    params["tol"] = attain
    wit = find_nonconvexity_witness(op, _grid(args), attain_tol=attain, seed=args.seed)
    if wit is None:
        report = {"witness": None, "message": "no witness found at tolerance"}
    else:
        report = {"witness": wit.to_dict(), "message": f"witness found, gap {wit.gap!r}"}
    man = RunManifest("convexity", [args.op], params, args.seed)
    _emit(args, render(man, args.format or "json", report=report))
    print(report["message"], file=sys.stderr)
    return EXIT_WITNESS if (wit is not None and args.strict) else EXIT_OK


def cmd_numrange(args) -> int:
    _need(args, "matrix")
    a = load_matrix(args.matrix)
    if a.shape[0] != a.shape[1]:
        raise DocumentError("numrange needs a square matrix")
    K = args.grid_theta
    w = numerical_range_boundary(a, K)
    ber_set = np.diagonal(a).copy()
    hull = convex_hull(ber_set)
    gap = hausdorff_distance(hull, w)
    man = RunManifest("numrange", [args.matrix], {"grid-theta": K}, None)
    rows = ([["numrange_vertex", i, z.real, z.imag] for i, z in enumerate(w.vertices)]
            + [["berezin_point", i, z.real, z.imag] for i, z in enumerate(ber_set)]
            + [["berezin_hull_vertex", i, z.real, z.imag] for i, z in enumerate(hull.vertices)]
            + [["gap", 0, gap, 0.0]])
    fmt = args.format or "json"
    if fmt == "csv":
        _emit(args, render(man, fmt, rows=rows, columns=["set", "index", "re", "im"]))
    else:
        report = {"numrange_vertices": w.vertices, "berezin_set": ber_set,
                  "berezin_hull_vertices": hull.vertices, "gap": gap,
                  "numerical_radius": w.max_modulus(), "berezin_radius": float(np.max(np.abs(ber_set)))}
        _emit(args, render(man, fmt, report=report))
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite
    names = list(OPERATOR_SUITES) if suite == "all" else ([] if suite == "scalar" else [suite])
    reports: list[InequalityReport] = []
    params = _params(args, "trials", "nu")
    inputs = []
    if suite in ("scalar", "all"):
        reports.extend(verify_scalar_suite(TrialConfig(trials=args.trials, seed=args.seed)))
    if args.matrix is not None:
        inputs.append(args.matrix)
        a = load_matrix(args.matrix)
        for name in names:
            reports.append(InequalityReport.merge(
                name, [OPERATOR_SUITES[name](a, nu) for nu in args.nu]))
    elif names:
        params["dims"] = args.dims
        if not args.dims or any(not 2 <= d <= 16 for d in args.dims):
            raise DocumentError("--dims entries must lie in [2, 16]")
        cfg = TrialConfig(dim=args.dims[0], trials=args.trials, seed=args.seed, nu_list=tuple(args.nu))
        for name in names:
            reports.append(run_operator_suite(name, cfg, dims=args.dims))
    man = RunManifest(f"verify {suite}", inputs, params, args.seed)
    fmt = args.format or "json"
    if fmt == "csv":
        cols = ["name", "trials", "violations", "worst_margin", "threshold"]
        rows = [[r.name, r.trials, r.violations, r.worst_margin, r.threshold] for r in reports]
        _emit(args, render(man, fmt, rows=rows, columns=cols))
    else:
        _emit(args, render(man, fmt, report={"reports": [r.to_dict() for r in reports]}))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VIOLATION


COMMANDS = {"range": cmd_range, "radius": cmd_radius, "convexity": cmd_convexity,
            "numrange": cmd_numrange, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", choices=["hardy", "bergman", "finite"],
                        help="override the space kind of the operator document")
    common.add_argument("--op", help="operator document (JSON)")
    common.add_argument("--matrix", help="matrix document (JSON)")
    common.add_argument("--grid-r", type=int, default=200, help="radial grid size")
    common.add_argument("--grid-theta", type=int, default=256,
                        help="angular grid size; for numrange the number K of support directions")
    common.add_argument("--rmax", type=float, default=0.999, help="outer grid radius")
    common.add_argument("--tol", type=float, default=None,
                        help="radius: refinement tolerance (1e-10); convexity: attainability tolerance (1e-3)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--dims", type=_int_list, default=list(range(2, 9)), help="e.g. 2-8 or 2,4,8")
    common.add_argument("--nu", type=_float_list, default=[0.25, 0.5, 0.75])
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--strict", action="store_true", help="convexity: exit 4 when a witness is found")

    parser = argparse.ArgumentParser(prog="berezin", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("range", parents=[common], help="sample the Berezin range on a polar grid")
    sub.add_parser("radius", parents=[common], help="estimate the Berezin radius")
    sub.add_parser("convexity", parents=[common], help="search for a nonconvexity witness")
    sub.add_parser("numrange", parents=[common], help="numerical range vs Berezin set of a matrix")
    v = sub.add_parser("verify", parents=[common], help="run an inequality suite")
    v.add_argument("suite", choices=SUITE_NAMES)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "radius" and args.tol is None:
        args.tol = 1e-10
    try:
        return COMMANDS[args.command](args)
    except DocumentError as exc:
        print(f"berezin: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BerezinError, ValueError) as exc:
        print(f"berezin: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
