"""Command-line front end.

Every operation of the package is reachable as a subcommand emitting JSON
(or flat CSV with --format csv).  Exit codes are stable: 0 success, 1
validation error (including malformed flags), 2 resource-guard violation,
3 I/O failure.  A JSON config file can predefine any flag; explicit flags
win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from . import circle, counting, model, verify
from .expsums import PhasePoint, eval_S, eval_f, eval_v, weyl_rhs
from .limits import GuardExceeded, QuadratureError, ValidationError

_EXIT_OK = 0
_EXIT_VALIDATION = 1
_EXIT_GUARD = 2
_EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract reserves 2 for
    # guard violations, so route flag errors through ValidationError instead
    def error(self, message):
        raise ValidationError(message)


def parse_alpha(text: str) -> PhasePoint:
    """Parse 'a/q', 'a/q+b', 'a/q-b', or a plain decimal."""
    text = text.strip()
    if "/" in text:
        frac_part = text
        beta = 0.0
        for i in range(1, len(text)):
            if text[i] in "+-" and "/" in text[:i]:
                frac_part = text[:i]
                beta = float(text[i:])
                break
        num_s, den_s = frac_part.split("/")
        a, q = int(num_s), int(den_s)
        if q < 1:
            raise ValidationError(f"bad denominator in alpha {text!r}")
        return PhasePoint.from_rational(a, q, beta)
    try:
        return PhasePoint.from_fraction(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse alpha {text!r}") from exc


def _parse_sides(text: str) -> tuple:
    try:
        return tuple(int(p.strip()) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ValidationError(f"bad side list {text!r}") from exc


def _build_parser() -> _Parser:
    p = _Parser(prog="waringbox",
                description="circle-method laboratory for counting solutions "
                            "of x_1^k + ... + x_s^k = N in boxes")
    p.add_argument("--config", help="JSON file of default flag values")
    sub = p.add_subparsers(dest="command", required=True)
    p._command_parsers = {}

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", help="write output to this path")
        sp.add_argument("--check-schema", action="store_true",
                        help="validate the emitted record against its schema")
        p._command_parsers[name] = sp
        return sp

    sp = add("thresholds", "exponent table for a pair (k, s)")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)

    sp = add("count", "exact solution count of a box")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--s", type=int)
    sp.add_argument("--sides", type=str, required=True)
    sp.add_argument("--N", type=str, required=True)
    sp.add_argument("--method", choices=("brute", "conv", "mitm", "all"),
                    default="all")

    sp = add("moments", "Hua / Vinogradov moments and the weighted tail sum")
    sp.add_argument("--kind", choices=("hua", "vinogradov", "tail"),
                    required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--X", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--s", type=int)

    sp = add("expsum", "evaluate f_Y(alpha), S(q,a) or v_Y(beta)")
    sp.add_argument("--which", choices=("f", "S", "v"), required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--Y", type=float)
    sp.add_argument("--alpha", type=str)
    sp.add_argument("--q", type=int)
    sp.add_argument("--a", type=int)
    sp.add_argument("--beta", type=float)

    sp = add("dissect", "major-arc dissection at level X")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)

    sp = add("classify", "major/minor classification of a frequency")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--alpha", type=str, required=True)

    sp = add("singular-series", "truncated singular series")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--s", type=int, required=True)
    sp.add_argument("--N", type=str, required=True)
    sp.add_argument("--Q", type=int, required=True)

    sp = add("singular-integral", "singular integral by one or both routes")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--sides", type=str, required=True)
    sp.add_argument("--N", type=str, required=True)
    sp.add_argument("--route", choices=("beta", "conv", "both"), default="both")
    sp.add_argument("--B", type=float)

    sp = add("circle-check", "full-circle quadrature against the exact count")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--sides", type=str, required=True)
    sp.add_argument("--N", type=str, required=True)

    sp = add("sweep", "seeded sweep of the main counting bound")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--s", type=int, default=5)
    sp.add_argument("--side-min", type=int, default=1)
    sp.add_argument("--side-max", type=int, default=20)
    sp.add_argument("--samples", type=int, default=1000,
                    help="number of instances")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--threads", type=int, default=1)

    sp = add("verify", "arc-law and unbalanced-case measurement harness")
    sp.add_argument("--check", choices=("major", "minor", "unbalanced", "all"),
                    default="all")
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--s", type=int, default=5)
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--X-max", type=int, default=1024)

    return p


_SCHEMAS = {
    "thresholds": {"k", "s", "H_k", "theta", "K", "lambda", "tau", "delta"},
    "count": {"k", "sides", "N", "count"},
    "moments": {"kind", "k", "value"},
    "expsum": {"which", "re", "im", "abs"},
    "dissect": {"X", "k", "q_max", "arc_count", "disjoint", "total_measure"},
    "classify": {"X", "k", "alpha", "major"},
    "singular-series": {"k", "s", "N", "Q", "value", "imag_max"},
    "singular-integral": {"k", "sides", "N"},
    "circle-check": {"k", "sides", "N", "integral"},
    "sweep": {"paths", "summary"},
    "verify": {"checks"},
}


def _check_schema(command: str, record: dict) -> None:
    missing = _SCHEMAS[command] - set(record)
    if missing:
        raise ValidationError(
            f"output of {command!r} is missing keys {sorted(missing)}")


def _flatten(prefix: str, obj, rows: list) -> None:
    if isinstance(obj, dict):
        for key in obj:
            _flatten(f"{prefix}.{key}" if prefix else str(key), obj[key], rows)
    elif isinstance(obj, (list, tuple)):
        rows.append((prefix, " ".join(str(v) for v in obj)))
    else:
        rows.append((prefix, obj))


def _emit(record: dict, args) -> None:
    if args.format == "csv":
        rows: list = []
        _flatten("", record, rows)
        text = "key,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n"
    else:
        text = json.dumps(record, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _box_from_args(args) -> model.BoxSpec:
    sides = _parse_sides(args.sides)
    s = getattr(args, "s", None)
    if s is not None and s != len(sides):
        raise ValidationError(f"--s {s} does not match {len(sides)} sides")
    return model.BoxSpec.make(k=args.k, sides=sides, N=int(args.N))


def _run_thresholds(args) -> dict:
    return model.compute_thresholds(args.k, args.s).to_dict()


def _run_count(args) -> dict:
    box = _box_from_args(args)
    record = {"k": box.k, "s": box.s, "sides": list(box.sides), "N": box.N}
    methods = {
        "brute": counting.root_count_bruteforce,
        "conv": counting.root_count_convolution,
        "mitm": counting.root_count_mitm,
    }
    chosen = list(methods) if args.method == "all" else [args.method]
    results = {name: methods[name](box) for name in chosen}
    counts = {name: r.count for name, r in results.items()}
    record["count"] = counts[chosen[0]]
    record["methods"] = {name: r.to_dict() for name, r in results.items()}
    record["methods_agree"] = len(set(counts.values())) == 1
    if not record["methods_agree"]:
        raise AssertionError(f"counting methods disagree: {counts}")
    return record


def _run_moments(args) -> dict:
    record = {"kind": args.kind, "k": args.k}
    if args.kind == "hua":
        if args.X is None or args.m is None:
            raise ValidationError("moments --kind hua needs --X and --m")
        record["X"], record["m"] = args.X, args.m
        record["value"] = counting.hua_moment_count(args.k, args.X, args.m)
    elif args.kind == "vinogradov":
        if args.X is None or args.s is None:
            raise ValidationError("moments --kind vinogradov needs --X and --s")
        record["X"], record["s"] = args.X, args.s
        record["value"] = counting.vinogradov_count(args.k, args.s, args.X)
    else:
        if args.m is None or args.s is None:
            raise ValidationError("moments --kind tail needs --m and --s")
        ws = counting.weighted_tail_sum(args.k, args.s, args.m)
        record.update(ws.to_dict())
    return record


def _run_expsum(args) -> dict:
    k = args.k
    if args.which == "f":
        if args.Y is None or args.alpha is None:
            raise ValidationError("expsum --which f needs --Y and --alpha")
        val = eval_f(int(args.Y), parse_alpha(args.alpha), k)
    elif args.which == "S":
        if args.q is None or args.a is None:
            raise ValidationError("expsum --which S needs --q and --a")
        val = eval_S(args.q, args.a, k)
    else:
        if args.Y is None or args.beta is None:
            raise ValidationError("expsum --which v needs --Y and --beta")
        val = eval_v(args.Y, args.beta, k)
    return {"which": args.which, "k": k,
            "re": val.real, "im": val.imag, "abs": abs(val)}


def _run_dissect(args) -> dict:
    return circle.dissect(args.X, args.k).to_dict()


def _run_classify(args) -> dict:
    d = circle.dissect(args.X, args.k)
    pt = parse_alpha(args.alpha)
    c = circle.classify_alpha(pt, d)
    rec = {"X": args.X, "k": args.k, "alpha": args.alpha}
    rec.update(c.to_dict())
    return rec


def _run_singular_series(args) -> dict:
    return circle.singular_series(args.k, args.s, int(args.N), args.Q).to_dict()


def _run_singular_integral(args) -> dict:
    box = _box_from_args(args)
    rec = {"k": box.k, "sides": list(box.sides), "N": box.N}
    if args.route in ("beta", "both"):
        rec["beta_route"] = circle.singular_integral_beta(box, B=args.B).to_dict()
    if args.route in ("conv", "both"):
        rec["conv_route"] = circle.singular_integral_conv(box).to_dict()
    closed = circle.dirichlet_closed_form(box)
    rec["closed_form_unclipped"] = closed
    return rec


def _run_circle_check(args) -> dict:
    box = _box_from_args(args)
    integral = circle.full_circle_integral(box)
    rec = {"k": box.k, "sides": list(box.sides), "N": box.N,
           "integral": integral}
    try:
        exact = counting.root_count_convolution(box).count
        rec["count"] = exact
        rec["delta"] = abs(integral - exact)
    except GuardExceeded as exc:
        rec["count"] = None
        rec["count_skipped"] = str(exc)
    return rec


def _run_sweep(args) -> dict:
    cfg = verify.SweepConfig(k=args.k, s=args.s, side_min=args.side_min,
                             side_max=args.side_max, n_instances=args.samples,
                             seed=args.seed, threads=args.threads)
    records, summary = verify.sweep_bound(cfg)
    prefix = args.out or "sweep_report"
    args.out = None  # the prefix consumes --out; the summary goes to stdout
    paths = verify.emit_report(records, summary, prefix)
    return {"paths": paths, "summary": summary}


def _run_verify(args) -> dict:
    grid = tuple(x for x in (64, 128, 256, 512, 1024, 2048, 4096)
                 if x <= args.X_max)
    cfg = verify.SweepConfig(k=args.k, s=args.s, samples=args.samples,
                             seed=args.seed, X_grid=grid,
                             n_instances=min(200, args.samples))
    checks = {}
    if args.check in ("major", "all"):
        checks["major"] = verify.check_major_approx(cfg)
    if args.check in ("minor", "all"):
        checks["minor"] = verify.check_minor_sup(cfg)
    if args.check in ("unbalanced", "all"):
        checks["unbalanced"] = verify.check_unbalanced(cfg)
    return {"checks": checks}


_RUNNERS = {
    "thresholds": _run_thresholds,
    "count": _run_count,
    "moments": _run_moments,
    "expsum": _run_expsum,
    "dissect": _run_dissect,
    "classify": _run_classify,
    "singular-series": _run_singular_series,
    "singular-integral": _run_singular_integral,
    "circle-check": _run_circle_check,
    "sweep": _run_sweep,
    "verify": _run_verify,
}


def _apply_config(parser: _Parser, argv: list) -> list:
    """Load --config JSON and fold it in as parser defaults (flags still win)."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return argv
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise RuntimeError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"config {path!r} must be a flat JSON object")
    defaults = {key.replace("-", "_"): val for key, val in data.items()}
    known = set()
    for sp in [parser] + list(parser._command_parsers.values()):
        for action in sp._actions:
            if action.dest in defaults:
                action.default = defaults[action.dest]
                action.required = False
                known.add(action.dest)
    unknown = set(defaults) - known
    if unknown:
        raise ValidationError(f"config {path!r} has unknown keys {sorted(unknown)}")
    return argv


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        record = _RUNNERS[args.command](args)
        if getattr(args, "check_schema", False):
            _check_schema(args.command, record)
        _emit(record, args)
        return _EXIT_OK
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION
    except GuardExceeded as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return _EXIT_GUARD
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return _EXIT_GUARD
    except (OSError, RuntimeError) as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return _EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
