"""Command-line surface: gen, test, verify, expand.

Exit codes: 0 success, 1 usage error, 2 validation error, 3 suite failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import jsonschema

from .field import Field, FieldError, is_prime, smallest_prime_at_least
from .generators import (GridReducer, IdentityReducer, RandomReducer, commutative_generator,
                         gen_to_hitting_set, hplusfs_generator, required_prime_bound,
                         unknown_order_field_bound, unknown_order_generator)
from .models import MatrixRoabp, model_from_json
from .pit import SUITES, ParameterError, pit, verify_theorem
from .poly import BudgetExceeded
from .rank import lg_floor

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_SUITE = 0, 1, 2, 3
MAX_DEFAULT_ROWS = 100_000

_INTS = {"type": "array", "items": {"type": "integer"}}
_MATRIX_LAYERS = {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": _INTS}}}

CIRCUIT_SCHEMA = {
    "type": "object",
    "required": ["kind", "p", "n"],
    "properties": {
        "kind": {"enum": ["roabp", "matrix-roabp", "smabp", "diagonal"]},
        "p": {"type": "integer", "minimum": 2},
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "r": {"type": "integer", "minimum": 1},
        "order": _INTS,
        "layers": {"type": "array"},
        "left": _INTS,
        "right": _INTS,
        "terms": {"type": "array", "items": {
            "type": "object", "required": ["coeffs", "power"],
            "properties": {"coeffs": _INTS, "power": {"type": "integer", "minimum": 0}}}},
        "partition": {"type": "array", "items": _INTS},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "roabp"}}},
         "then": {"required": ["d", "r", "order", "layers", "left", "right"],
                  "properties": {"layers": _MATRIX_LAYERS}}},
        {"if": {"properties": {"kind": {"const": "matrix-roabp"}}},
         "then": {"required": ["d", "r", "order", "layers"], "properties": {"layers": _MATRIX_LAYERS}}},
        {"if": {"properties": {"kind": {"const": "smabp"}}},
         "then": {"required": ["d", "r", "layers", "partition"],
                  "properties": {"layers": _MATRIX_LAYERS}}},
        {"if": {"properties": {"kind": {"const": "diagonal"}}}, "then": {"required": ["terms"]}},
    ],
}


class ValidationError(Exception):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def load_circuit(path: str):
    """Parse, schema-check and build a circuit; every problem raises ValidationError."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ValidationError(f"{path}: {e.strerror}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
    errors = sorted(jsonschema.Draft7Validator(CIRCUIT_SCHEMA).iter_errors(doc),
                    key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = "/".join(str(x) for x in e.absolute_path) or "<root>"
            lines.append(f"{path}: field {where}: {e.message}")
        raise ValidationError("\n".join(lines))
    if not is_prime(doc["p"]):
        raise ValidationError(f"{path}: field p: {doc['p']} is not prime")
    try:
        return model_from_json(doc)
    except (ValueError, TypeError, IndexError, KeyError) as e:
        raise ValidationError(f"{path}: {e}") from e


def _parse_range(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise UsageError(f"--index-range expects A..B, got {text!r}")
    if lo < 0 or hi < lo:
        raise UsageError(f"bad index range {text!r}")
    return lo, hi


def _build_generator(args, field: Field):
    n, d, r = args.n, args.d, args.r
    if args.model == "unknown-order":
        return unknown_order_generator(field, n, d, r), [d - 1] * n
    if args.model == "commutative":
        return commutative_generator(field, n, d, r), [d - 1] * n
    if args.model == "diagonal":
        return hplusfs_generator(field, n, d + 1, r, max(1, lg_floor(r)), GridReducer()), [d] * n
    reducer = {"grid": GridReducer, "identity": IdentityReducer}.get(args.reducer)
    if args.reducer == "random":
        if args.seed is None:
            raise UsageError("--reducer random needs --seed")
        red = RandomReducer(args.seed)
    else:
        red = reducer()
    ell = args.ell if args.ell is not None else max(1, lg_floor(r))
    return hplusfs_generator(field, n, d, r, ell, red), [d - 1] * n


def _field_bound(args) -> int:
    """The enforced lower bound on p for the chosen model."""
    n, d, r = args.n, args.d, args.r
    if args.model == "unknown-order":
        return unknown_order_field_bound(n, d, r)
    # degree tables do not depend on p, so probe with a large prime
    probe = Field(smallest_prime_at_least(max(1_000_003, n * d + 2)))
    g, bounds = _build_generator(args, probe)
    need = required_prime_bound(g, bounds)
    if args.model == "commutative":
        need = max(need, n * d + 1)
    return max(need, n + 1)


def cmd_gen(args) -> int:
    for name in ("n", "d", "r"):
        if getattr(args, name) < 1:
            raise UsageError(f"--{name} must be >= 1")
    bound = _field_bound(args)
    if args.p == "auto":
        p = smallest_prime_at_least(bound)
        print(f"p = {p} (smallest prime >= enforced bound {bound})", file=sys.stderr)
    else:
        try:
            p = int(args.p)
        except ValueError:
            raise UsageError(f"--p expects an integer or 'auto', got {args.p!r}")
        if not is_prime(p):
            raise FieldError(f"{p} is not prime")
        if p < bound:
            raise FieldError(f"p = {p} is below the enforced bound {bound}")
    field = Field(p)
    g, bounds = _build_generator(args, field)
    H = gen_to_hitting_set(g, bounds)
    if args.index_range:
        lo, hi = _parse_range(args.index_range)
        if hi >= H.size:
            raise UsageError(f"index {hi} out of range for a set of size {H.size}")
    else:
        if H.size > MAX_DEFAULT_ROWS:
            raise UsageError(f"hitting set has {H.size} points; pass --index-range")
        lo, hi = 0, H.size - 1
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(args.n)])
        for row in H.points(lo, hi + 1):
            w.writerow(row)
    finally:
        if args.out:
            out.close()
    side = {"model": args.model, "n": args.n, "d": args.d, "r": args.r, "p": p,
            "field_bound": bound, "degree_bounds": bounds, "index_range": [lo, hi],
            "rows": hi - lo + 1, "certificate": getattr(g, "certificate", None), **H.accounting()}
    text = json.dumps(side, indent=2, default=str)
    if args.out:
        with open(args.out + ".json", "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text, file=sys.stderr)
    return EXIT_OK


def cmd_test(args) -> int:
    if args.mode == "random" and args.seed is None:
        raise UsageError("--mode random needs --seed")
    model = load_circuit(args.circuit)
    verdict = pit(model, args.mode, seed=args.seed, budget=args.budget)
    print(json.dumps(verdict.to_json()))
    return EXIT_OK


def _suite_overrides(suite: str, args) -> dict:
    defaults = SUITES[suite].defaults
    params = {}
    for flag, keys in (("max_n", ("max_n", "N")), ("max_r", ("max_r", "r")), ("max_d", ("max_d", "d"))):
        v = getattr(args, flag)
        if v is None:
            continue
        for k in keys:
            if k in defaults:
                params[k] = v
    for item in args.param or []:
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        if k not in defaults:
            raise UsageError(f"suite {suite} has no parameter {k!r}; known: {sorted(defaults)}")
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    return params


def cmd_verify(args) -> int:
    params = _suite_overrides(args.suite, args)
    try:
        report = verify_theorem(args.suite, params, args.trials, args.seed, args.override)
    except ParameterError as e:
        raise ValidationError(str(e)) from e
    print(json.dumps(report.to_json(), indent=2, default=str))
    return EXIT_OK if report.passed else EXIT_SUITE


def cmd_expand(args) -> int:
    model = load_circuit(args.circuit)
    f = model.expand()
    if isinstance(model, MatrixRoabp):
        doc = {"matrix": [[e.to_json() for e in row] for row in f]}
    else:
        doc = f.to_json()
    print(json.dumps(doc))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hitset", description="Deterministic hitting sets for ROABPs and related models.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="stream a hitting set as CSV")
    g.add_argument("--model", required=True, choices=["unknown-order", "commutative", "diagonal", "hplusfs"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--p", default="auto")
    g.add_argument("--out")
    g.add_argument("--index-range")
    g.add_argument("--ell", type=int, help="hash support bound (hplusfs only)")
    g.add_argument("--reducer", choices=["grid", "identity", "random"], default="grid")
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("test", help="identity-test a circuit file")
    t.add_argument("--circuit", required=True)
    t.add_argument("--mode", choices=["grid", "hitting", "random"], default="grid")
    t.add_argument("--seed", type=int)
    t.add_argument("--budget", type=int, help="stop after this many points")
    t.set_defaults(func=cmd_test)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-n", type=int, dest="max_n")
    v.add_argument("--max-r", type=int, dest="max_r")
    v.add_argument("--max-d", type=int, dest="max_d")
    v.add_argument("--param", action="append", help="suite parameter key=value (JSON value)")
    v.add_argument("--override", action="store_true", help="allow values above the desk-scale caps")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("expand", help="expand a circuit to a sparse polynomial")
    e.add_argument("--circuit", required=True)
    e.set_defaults(func=cmd_expand)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"hitset: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, FieldError, BudgetExceeded) as e:
        print(f"hitset: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
