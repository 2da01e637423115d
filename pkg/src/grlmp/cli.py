"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 validation error,
3 degenerate data, 4 numerical tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, specs
from .assoc_op import BUILTIN_IDS, builtin
from .bivariate import BIVARIATE_CATALOG, BivariateGrlmp, QuadratureConfig, decompose
from .errors import DegenerateError, DomainError, QuadratureError, RangeError
from .inference import fit_bivariate, fit_univariate
from .univariate import EXAMPLES, TruncatedGrlmp
from .verify import SUITES, run_suites

EXIT_OK, EXIT_VERIFY, EXIT_VALIDATION, EXIT_DEGENERATE, EXIT_NUMERIC = 0, 1, 2, 3, 4
SEED_ENV = "GRLMP_DEFAULT_SEED"
MASS_TOL = 1e-3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _seed(args) -> int:
    raw = args.seed if args.seed is not None else os.environ.get(SEED_ENV, "0")
    try:
        seed = int(raw)
    except ValueError:
        raise CliError(f"seed must be an integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise CliError("seed must be a 64-bit unsigned integer")
    return seed


def _check_n(n: int) -> int:
    if n < 1:
        raise CliError("n must be ≥ 1")
    return n


def _load_spec(path: str | None):
    if not path:
        raise CliError("--spec is required")
    try:
        return specs.load(path)
    except FileNotFoundError:
        raise CliError(f"spec file not found: {path}") from None


# catalog ---------------------------------------------------------------------------


def _catalog_rows() -> list[dict[str, Any]]:
    rows = []
    for i, ex in enumerate(EXAMPLES, 1):
        rows.append({
            "family": "univariate",
            "row": i,
            "name": ex.name,
            "operation": ex.operation,
            "identity": ex.identity,
            "generator": ex.generator,
            "cdf": ex.cdf,
            "constraints": ex.constraints,
            "spec": ex.build().to_json(),
        })
    for entry in BIVARIATE_CATALOG:
        rows.append({
            "family": "bivariate",
            "row": entry.row,
            "name": entry.name,
            "operation": _OP_SYMBOL[entry.op_id],
            "identity": entry.identity,
            "generator": entry.generator,
            "cdf": entry.cdf,
            "constraints": entry.constraints,
            "spec": entry.build(1.0, 1.0, 1.0).to_json(),
        })
    return rows


_OP_SYMBOL = {ex.op_id: ex.operation for ex in EXAMPLES}


def cmd_catalog(args) -> int:
    rows = _catalog_rows()
    if args.format == "json":
        _emit(_dump(rows), args.out)
        return EXIT_OK
    lines = []
    for r in rows:
        lines.append(f"[{r['family']} {r['row']}] {r['name']}")
        lines.append(f"    x * y = {r['operation']}    e = {r['identity']:g}    {r['generator']}")
        lines.append(f"    F = {r['cdf']}")
        lines.append(f"    {r['constraints']}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# sample ------------------------------------------------------------------------------


def cmd_sample(args) -> int:
    n = _check_n(args.n)
    seed = _seed(args)
    spec, dist = _load_spec(args.spec)
    if not args.out:
        raise CliError("--out is required")
    rng = np.random.default_rng(seed)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(dist, BivariateGrlmp):
        writer.writerow(["x1", "x2"])
        writer.writerows([repr(float(a)), repr(float(b))] for a, b in dist.sample_pairs(rng, n))
    else:
        writer.writerow(["x"])
        writer.writerows([repr(float(v))] for v in dist.sample(rng, n))
    Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    meta = {"seed": seed, "n": n, "spec": spec, "version": __version__}
    Path(_sidecar(args.out)).write_text(_dump(meta), encoding="utf-8")
    return EXIT_OK


def _sidecar(path: str) -> str:
    return f"{path}.meta.json"


# eval ------------------------------------------------------------------------------------


def _parse_points(raw: str) -> list[tuple[float, ...]]:
    path = Path(raw)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        chunks = [ln for ln in text.splitlines() if ln.strip()]
    else:
        chunks = [c for c in raw.split(";") if c.strip()]
    points = []
    for chunk in chunks:
        try:
            points.append(tuple(float(v) for v in chunk.split(",")))
        except ValueError:
            if points:
                raise CliError(f"cannot parse point {chunk!r}") from None
            # header line
    if not points:
        raise CliError("no points given")
    return points


def _evaluator(dist, fn: str):
    if isinstance(dist, BivariateGrlmp):
        table = {"cdf": dist.joint_cdf, "pdf": dist.ac_density}
        arity = 2
    elif isinstance(dist, TruncatedGrlmp):
        table = {"cdf": dist.cdf}
        arity = 1
    else:
        table = {
            "cdf": dist.cdf,
            "pdf": dist.pdf,
            "quantile": dist.quantile,
            "rhr": dist.reversed_hazard,
        }
        arity = 1
    if fn not in table:
        raise CliError(f"function {fn!r} not available for this family")
    return table[fn], arity


def cmd_eval(args) -> int:
    _, dist = _load_spec(args.spec)
    if not args.points:
        raise CliError("--points is required")
    func, arity = _evaluator(dist, args.fn)
    rows = []
    for pt in _parse_points(args.points):
        if len(pt) != arity:
            rows.append({"point": list(pt), "value": None, "error": f"expected {arity} coordinate(s)"})
            continue
        try:
            val = float(func(*pt))
            rows.append({"point": list(pt), "value": val, "error": ""})
        except (DomainError, RangeError) as exc:
            rows.append({"point": list(pt), "value": None, "error": str(exc)})
    if args.format == "json":
        _emit(_dump({"function": args.fn, "rows": rows}), args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["x"] if arity == 1 else ["x1", "x2"]
        writer.writerow([*cols, "value", "error"])
        for r in rows:
            coords = [repr(v) for v in r["point"]] + [""] * (arity - len(r["point"]))
            val = "" if r["value"] is None else repr(r["value"])
            writer.writerow([*coords[:arity], val, r["error"]])
        _emit(buf.getvalue(), args.out)
    ok = any(r["value"] is not None for r in rows)
    return EXIT_OK if ok else EXIT_VALIDATION


# fit ---------------------------------------------------------------------------------------


def _read_data(path: str) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise CliError(f"data file not found: {path}") from None
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            if rows:
                raise CliError(f"cannot parse data line {line!r}") from None
    if not rows:
        raise CliError("no data rows", EXIT_DEGENERATE)
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() not in (1, 2):
        raise CliError("data must have one or two columns on every row")
    return np.asarray(rows, dtype=float)


def cmd_fit(args) -> int:
    if not args.data:
        raise CliError("--data is required")
    data = _read_data(args.data)
    op = builtin(args.op)
    b: float | str = "estimate" if args.b == "estimate" else float(args.b)
    if data.shape[1] == 1:
        report = fit_univariate(data[:, 0], op, b).to_json()
    else:
        report = fit_bivariate(data, op, b, args.tie_tolerance).to_json()
    report["op"] = op.to_json()
    sidecar = Path(_sidecar(args.data))
    if sidecar.is_file():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        report["provenance"] = {k: meta.get(k) for k in ("seed", "n", "spec")}
    _emit(_dump(report), args.out)
    return EXIT_OK


# verify ------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    spec, dist = _load_spec(args.spec)
    seed = _seed(args)
    n = _check_n(args.n)
    suites = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(","))
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise CliError(f"unknown suite(s) {sorted(unknown)}; choose from {', '.join(SUITES)}")
    checks = run_suites(dist, suites, seed=seed, n=n, hook=spec.get("test_hook"))
    passed = all(c.passed for c in checks)
    report = {
        "spec": spec,
        "seed": seed,
        "n": n,
        "suites": list(suites),
        "checks": [c.to_json() for c in checks],
        "pass": passed,
    }
    _emit(_dump(report), args.out)
    if not passed:
        failed = ", ".join(c.name for c in checks if not c.passed)
        print(f"verification failed: {failed}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


# decompose ------------------------------------------------------------------------


def cmd_decompose(args) -> int:
    spec, dist = _load_spec(args.spec)
    if not isinstance(dist, BivariateGrlmp) or not spec.get("truncated"):
        raise CliError("decompose needs a bivariate spec with \"truncated\": true")
    if args.quad_nodes < 2:
        raise CliError("--quad-nodes must be at least 2")
    report = decompose(dist, QuadratureConfig(nodes=args.quad_nodes))
    out = report.to_json()
    out["spec"] = spec
    _emit(_dump(out), args.out)
    if not abs(report.total - 1.0) <= MASS_TOL:
        print(f"mass balance off by {report.total - 1.0:.3e}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# entry point ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grlmp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the built-in families")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("sample", help="draw a reproducible sample")
    p.add_argument("--spec")
    p.add_argument("--seed")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv",), default="csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate cdf/pdf/quantile/rhr at points")
    p.add_argument("--spec")
    p.add_argument("--points", help="file with one point per line, or inline 'x;x' / 'x1,x2;x1,x2'")
    p.add_argument("--fn", choices=("cdf", "pdf", "quantile", "rhr"), default="cdf")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fit", help="estimate parameters from a CSV sample")
    p.add_argument("--data")
    p.add_argument("--op", choices=BUILTIN_IDS, required=True)
    p.add_argument("--b", default="estimate", help="upper endpoint, or 'estimate'")
    p.add_argument("--tie-tolerance", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--spec")
    p.add_argument("--suite", default="all", help=f"'all' or comma list of {', '.join(SUITES)}")
    p.add_argument("--seed")
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decompose", help="atoms / singular / absolutely continuous masses")
    p.add_argument("--spec")
    p.add_argument("--quad-nodes", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DegenerateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, RangeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
