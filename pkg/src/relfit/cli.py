"""``relfit`` command line tool.

Exit status: 0 on success, 2 on invalid input, 3 when a fit does not converge.
Errors are written to stderr as a JSON object with a machine-readable code.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction

from . import io
from .exceptions import ConvergenceError, RelfitError, ValidationError
from .fit import FitConfig, extended_mle, mle_exists
from .geometry import DEFAULT_MAX_CELLS, enumerate_facial_sets
from .linalg import kernel_basis
from .model import bregman_divergence, dual_report, variety_member

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NONCONVERGENCE = 3

COMMANDS = ("fit", "exists", "faces", "kernel", "divergence", "check-variety")


def _schema(name):
    return f"relfit/{name}/{io.SCHEMA_VERSION}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relfit",
        description="Maximum likelihood and extended MLE under relational models.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--matrix", help="CSV model matrix (rows = generating subsets)")
    parser.add_argument("--data", help="CSV counts, or the first distribution for divergence/check-variety")
    parser.add_argument("--reference", help="second distribution for divergence")
    parser.add_argument("--basis", help="integer kernel basis CSV for check-variety's dual report")
    parser.add_argument("--sampling", choices=("poisson", "multinomial"))
    parser.add_argument("--tol", type=float, default=1e-10, help="IPF margin tolerance")
    parser.add_argument("--bisection-tol", type=float, default=1e-9)
    parser.add_argument("--max-iters", type=int, default=10**6, help="IPF single-row update cap")
    parser.add_argument("--max-bisection-steps", type=int, default=200)
    parser.add_argument("--variety-tol", type=float, default=1e-8,
                        help="log-scale tolerance for floating-point variety checks")
    parser.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS,
                        help="face enumeration guard")
    parser.add_argument("--output", choices=("json", "table"), default="json")
    return parser


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValidationError(f"{args.command} requires {flags}")


def _cmd_fit(args):
    _require(args, "matrix", "data", "sampling")
    A = io.parse_matrix_csv(args.matrix)
    table = io.parse_counts_csv(args.data, A, args.sampling)
    cfg = FitConfig(args.tol, args.bisection_tol, args.max_iters, args.max_bisection_steps)
    result = extended_mle(A, table, cfg)
    return io.fit_result_to_dict(result, A, list(table.counts))


def _cmd_exists(args):
    _require(args, "matrix", "data", "sampling")
    A = io.parse_matrix_csv(args.matrix)
    table = io.parse_counts_csv(args.data, A, args.sampling)
    report = mle_exists(A, table)
    face = io.face_to_dict(report.minimal_face)
    return {
        "schema": _schema("exists"),
        "exists": report.exists,
        "witness": None if report.witness is None else [io.frac_str(v) for v in report.witness],
        "minimal_face": None if face is None else face["cells"],
        "certificate": None if face is None else face["certificate"],
    }


def _cmd_faces(args):
    _require(args, "matrix")
    A = io.parse_matrix_csv(args.matrix)
    faces = enumerate_facial_sets(A, max_cells=args.max_cells)
    return {"schema": _schema("faces"), "facial_sets": [io.face_to_dict(f) for f in faces]}


def _cmd_kernel(args):
    _require(args, "matrix")
    A = io.parse_matrix_csv(args.matrix)
    D = kernel_basis(A)
    return {
        "schema": _schema("kernel"),
        "K": D.K,
        "rows": [[io.frac_str(v) for v in row] for row in D.rows],
    }


def _cmd_divergence(args):
    _require(args, "data", "reference")
    t = io.parse_vector_csv(args.data)
    u = io.parse_vector_csv(args.reference)
    return {"schema": _schema("divergence"), "divergence": bregman_divergence(
        [float(v) for v in t], [float(v) for v in u])}


def _exact_or_float(v):
    if v is None:
        return None
    if isinstance(v, (Fraction, int)):
        return io.frac_str(v)
    return float(v)


def _cmd_check_variety(args):
    _require(args, "matrix", "data")
    A = io.parse_matrix_csv(args.matrix)
    delta = io.parse_vector_csv(args.data)
    rows = io.parse_integer_matrix_csv(args.basis) if args.basis else kernel_basis(A).rows
    rep = dual_report(delta, rows)
    return {
        "schema": _schema("check-variety"),
        "member": variety_member(delta, A, tol=args.variety_tol),
        "support": [i + 1 for i, v in enumerate(delta) if v > 0],
        "dual_report": {
            "basis": [[int(v) for v in r] for r in rows],
            "plus": [_exact_or_float(v) for v in rep.plus],
            "minus": [_exact_or_float(v) for v in rep.minus],
            "ratios": [_exact_or_float(v) for v in rep.ratios],
            "differences": [_exact_or_float(v) for v in rep.differences],
        },
    }


_HANDLERS = {
    "fit": _cmd_fit,
    "exists": _cmd_exists,
    "faces": _cmd_faces,
    "kernel": _cmd_kernel,
    "divergence": _cmd_divergence,
    "check-variety": _cmd_check_variety,
}


def render_table(doc: dict) -> str:
    """Plain-text rendering of a result document."""
    kind = doc["schema"].split("/")[1]
    lines = []
    if kind == "fit":
        lines.append(f"{'cell':>10} {'observed':>10} {'fitted':>14}")
        for c in doc["cells"]:
            lines.append(f"{c['label']:>10} {c['observed']:>10} {c['fitted']:>14.6f}")
        total = sum(c["fitted"] for c in doc["cells"])
        lines.append(f"{'total':>10} {'':>10} {total:>14.6f}")
        lines.append(f"gamma = {doc['gamma']:.10g}  status = {doc['status']}  "
                     f"overall effect = {doc['overall_effect']}")
        if doc["minimal_face"]:
            lines.append(f"minimal facial set = {doc['minimal_face']['cells']}")
    elif kind == "exists":
        lines.append(f"MLE exists: {doc['exists']}")
        if doc["minimal_face"]:
            lines.append(f"minimal facial set: {doc['minimal_face']}")
    elif kind == "faces":
        for f in doc["facial_sets"]:
            lines.append(f"{f['cells']}  c = ({', '.join(f['certificate'])})")
    elif kind == "kernel":
        for row in doc["rows"]:
            lines.append(" ".join(f"{v:>6}" for v in row))
    elif kind == "divergence":
        lines.append(f"D(t||u) = {doc['divergence']:.12g}")
    else:
        lines.append(f"in variety: {doc['member']}")
        for k, d in enumerate(doc["dual_report"]["differences"]):
            lines.append(f"row {k + 1}: difference = {d}")
    return "\n".join(lines) + "\n"


def _configure_logging():
    level = os.environ.get("RELFIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        doc = _HANDLERS[args.command](args)
    except ValidationError as exc:
        stderr.write(io.dumps({"error": exc.to_dict()}))
        return EXIT_INVALID
    except ConvergenceError as exc:
        stderr.write(io.dumps({"error": exc.to_dict()}))
        return EXIT_NONCONVERGENCE
    except RelfitError as exc:  # pragma: no cover
        stderr.write(io.dumps({"error": exc.to_dict()}))
        return EXIT_INVALID
    stdout.write(io.dumps(doc) if args.output == "json" else render_table(doc))
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
