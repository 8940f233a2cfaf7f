"""Command-line entry point.

Exit codes: 0 when the checked property holds, 1 when it does not (a valid
answer, e.g. "not a magic contraction"), 2 on usage or input errors.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis, census, dilation, linalg, magic
from .fields import FieldDescriptor, FieldError, PADIC_FIELD, PRIME_FIELD, format_rational

EXIT_HOLDS, EXIT_FAILS, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("field and output")
    g.add_argument("--field", choices=[PRIME_FIELD, PADIC_FIELD], help="scalar field kind")
    g.add_argument("--p", type=int, help="the prime")
    g.add_argument("--precision", type=int, help="Qp relative precision")
    g.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    g.add_argument("--format", choices=["json", "csv", "plain"], default="json")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="padic-dilation", description="Exact checks for magic contractions and their unitary dilations over F_p and Q_p.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="decide whether T is a magic contraction")
    p.add_argument("--input", required=True, help="matrix JSON")
    p.add_argument("--witness", help="witness JSON; without it the witness is searched for")
    p.add_argument("--check", choices=["magic", "unitary"], default="magic")

    p = sub.add_parser("search", parents=[common], help="list all witnesses over F_p")
    p.add_argument("--input", required=True)
    p.add_argument("--limit", type=int)

    p = sub.add_parser("dilate", parents=[common], help="build a unitary dilation")
    p.add_argument("--kind", choices=["halmos", "egervary", "sznagy"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--witness", required=True)
    p.add_argument("--N", type=int, default=1, help="Egervary order / Sz.-Nagy trace length")
    p.add_argument("--window", type=int, help="Sz.-Nagy: also run the unitarity window audit")
    p.add_argument("--sequence", help="Sz.-Nagy: input sequence JSON {'support': {...}}")

    p = sub.add_parser("vn", parents=[common], help="check the von Neumann inequality")
    p.add_argument("--poly", required=True, help='coefficients "a0,a1,...,aN"')
    p.add_argument("--input", required=True)
    p.add_argument("--witness", required=True)
    p.add_argument("--N", type=int, required=True)

    p = sub.add_parser("ergodic", parents=[common], help="check the compressed Cesaro identity")
    p.add_argument("--input", required=True)
    p.add_argument("--witness", required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--vector", required=True, help="vector JSON")

    p = sub.add_parser("census", parents=[common], help="count magic contractions in M_n(F_p)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--full-witness-count", action="store_true")
    p.add_argument("--partitions", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV destination")

    p = sub.add_parser("axioms", parents=[common], help="audit the Hilbert-space axioms on K^d")
    p.add_argument("--input", help="JSON list of vectors; random samples otherwise")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--samples", type=int, default=20)
    return parser


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc


def _flag_field(args) -> FieldDescriptor | None:
    if args.p is None:
        if args.field or args.precision:
            raise UsageError("--field/--precision need --p")
        return None
    kind = args.field or (PADIC_FIELD if args.precision else PRIME_FIELD)
    return FieldDescriptor(kind, args.p, args.precision if kind == PADIC_FIELD else None)


def _load_matrix(path, args) -> linalg.Matrix:
    obj = _load_json(path)
    try:
        if isinstance(obj, dict) and "field" in obj:
            declared = linalg.descriptor_from_json(obj["field"])
            for flag, have in (("p", declared.p), ("field", declared.kind), ("precision", declared.precision)):
                given = getattr(args, flag)
                if given is not None and given != have:
                    raise UsageError(f"{path}: file declares {flag}={have}, flag says {given}")
            return linalg.matrix_from_json(obj)
        return linalg.matrix_from_json(obj, _flag_field(args))
    except (FieldError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _load_witness(path, field) -> magic.MagicWitness:
    try:
        return magic.MagicWitness.from_json(_load_json(path), field)
    except (FieldError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _emit(obj, fmt, out):
    if fmt == "plain":
        for k, v in obj.items():
            out.write(f"{k}: {json.dumps(v) if isinstance(v, (dict, list)) else v}\n")
    else:
        out.write(json.dumps(obj, sort_keys=True) + "\n")


def cmd_verify(args, out):
    t = _load_matrix(args.input, args)
    if args.check == "unitary":
        ok = linalg.is_unitary(t)
        _emit({"unitary": ok}, args.format, out)
        return EXIT_HOLDS if ok else EXIT_FAILS
    if args.witness:
        report = magic.verify_magic(t, _load_witness(args.witness, t.field))
        _emit(report.to_dict(), args.format, out)
        return EXIT_HOLDS if report.magic else EXIT_FAILS
    if t.field.is_padic:
        if t.shape != (1, 1):
            raise UsageError("Qp input without a witness is only decidable for 1x1 T")
        w = magic.witness_1x1(t[0, 0])
        found = [w] if w else []
    else:
        found = magic.search_witnesses(t, limit=1)
    result = {"magic": bool(found)}
    if found:
        result["witness"] = found[0].to_json()
    _emit(result, args.format, out)
    return EXIT_HOLDS if found else EXIT_FAILS


def cmd_search(args, out):
    t = _load_matrix(args.input, args)
    found = magic.search_witnesses(t, limit=args.limit)
    _emit({"count": len(found), "witnesses": [w.to_json() for w in found]}, args.format, out)
    return EXIT_HOLDS if found else EXIT_FAILS


def cmd_dilate(args, out):
    t = _load_matrix(args.input, args)
    w = _load_witness(args.witness, t.field)
    if args.kind == "halmos":
        _emit(linalg.matrix_to_json(dilation.halmos(t, w)), args.format, out)
        return EXIT_HOLDS
    if args.kind == "egervary":
        _emit(linalg.matrix_to_json(dilation.egervary(t, w, args.N)), args.format, out)
        return EXIT_HOLDS
    op = dilation.SzNagyOperator(t, w)
    result = {}
    if args.sequence:
        try:
            x = dilation.FinSuppSequence.from_json(_load_json(args.sequence), t.field, t.rows)
        except (FieldError, ValueError) as exc:
            raise UsageError(f"{args.sequence}: {exc}") from exc
        result["trace"] = [s.to_json() for s in dilation.sznagy_trace(op, x, args.N)]
    status = EXIT_HOLDS
    if args.window is not None:
        report = dilation.verify_unitary_window(op, args.window, seed=args.seed)
        result["window"] = report.to_dict()
        status = EXIT_HOLDS if report.passed else EXIT_FAILS
    if not result:
        raise UsageError("sznagy needs --sequence and/or --window")
    _emit(result, args.format, out)
    return status


def cmd_vn(args, out):
    t = _load_matrix(args.input, args)
    w = _load_witness(args.witness, t.field)
    try:
        f = analysis.Polynomial.parse(args.poly, t.field)
    except (FieldError, ValueError) as exc:
        raise UsageError(f"--poly: {exc}") from exc
    res = analysis.vn_check(f, t, w, args.N)
    _emit({"lhs": format_rational(res.lhs), "rhs": format_rational(res.rhs), "holds": res.holds}, args.format, out)
    return EXIT_HOLDS if res.holds else EXIT_FAILS


def cmd_ergodic(args, out):
    t = _load_matrix(args.input, args)
    w = _load_witness(args.witness, t.field)
    try:
        v = linalg.vector_from_json(_load_json(args.vector), t.field)
    except (FieldError, ValueError) as exc:
        raise UsageError(f"{args.vector}: {exc}") from exc
    res = analysis.ergodic_compression(t, w, args.N, v)
    _emit(
        {
            "lhs_vector": linalg.vector_to_json(res.lhs),
            "rhs_vector": linalg.vector_to_json(res.rhs),
            "equal": res.equal,
        },
        args.format,
        out,
    )
    return EXIT_HOLDS if res.equal else EXIT_FAILS


def cmd_census(args, out):
    if args.p is None:
        raise UsageError("census needs --p")
    if args.field == PADIC_FIELD:
        raise UsageError("census enumerates F_p only")
    res = census.count_magic(
        args.n,
        args.p,
        full_witness_count=args.full_witness_count,
        partitions=args.partitions,
        jobs=args.jobs,
    )
    summary = {"n": res.n, "p": res.p, "total_matrices": res.total_matrices, "magic_count": res.magic_count}
    if not args.count_only:
        if args.out:
            Path(args.out).write_text(census.census_csv(res))
            summary["out"] = args.out
        elif args.format == "csv":
            out.write(census.census_csv(res))
            return EXIT_HOLDS
    _emit(summary, args.format if args.format != "csv" else "json", out)
    return EXIT_HOLDS


def cmd_axioms(args, out):
    field = _flag_field(args)
    if args.input:
        data = _load_json(args.input)
        if isinstance(data, dict):
            if "field" in data:
                declared = linalg.descriptor_from_json(data["field"])
                if field is not None and declared != field:
                    raise UsageError("vector file field differs from flags")
                field = declared
            data = data.get("vectors")
        if field is None:
            raise UsageError("no field given (use --p or a 'field' object)")
        if not isinstance(data, list) or not data:
            raise UsageError("axioms input needs a nonempty list of vectors")
        try:
            samples = [linalg.vector_from_json(v, field) for v in data]
        except (FieldError, ValueError) as exc:
            raise UsageError(f"{args.input}: {exc}") from exc
    else:
        if field is None:
            raise UsageError("axioms needs --p")
        rng = random.Random(args.seed)
        samples = [_random_vector(field, args.dim, rng) for _ in range(args.samples)]
    scalars = [_random_scalar(field, random.Random(args.seed + 1)) for _ in range(3)]
    report = linalg.check_axioms(field, samples, scalars)
    _emit(report.to_dict(), args.format, out)
    return EXIT_HOLDS if report.passed else EXIT_FAILS


def _random_scalar(field, rng):
    if not field.is_padic:
        return field(rng.randrange(field.p))
    return field(rng.randint(-50, 50) * Fraction(field.p) ** rng.randint(-2, 2))


def _random_vector(field, d, rng):
    return linalg.Vector(field, [_random_scalar(field, rng) for _ in range(d)])


COMMANDS = {
    "verify": cmd_verify,
    "search": cmd_search,
    "dilate": cmd_dilate,
    "vn": cmd_vn,
    "ergodic": cmd_ergodic,
    "census": cmd_census,
    "axioms": cmd_axioms,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_HOLDS
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
    except (
        FieldError,
        linalg.ShapeError,
        magic.PreconditionError,
        magic.BudgetExceeded,
        analysis.PolynomialError,
        ValueError,
    ) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
    return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
