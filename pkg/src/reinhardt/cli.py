"""Command-line entry point: construct, census, render, verify.

Exit codes: 0 ok, 1 usage error, 2 an ``--expect`` assertion failed,
3 refused because the estimated cost exceeds the budget.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, TextIO

from . import census as census_mod
from .classify import NotReinhardtError, ReinhardtPolynomial, canonicalize, coeffs_from_parts
from .construct import ConstructionSpec, enumerate_range
from .cyclo import decompose_two_term
from .geometry import InvalidComposition, SvgOptions, polygon_vertices, render_svg, svg_filename
from .seqcore import EvenComposition, TernarySeq

EXIT_OK, EXIT_USAGE, EXIT_EXPECT, EXIT_BUDGET = 0, 1, 2, 3
WORKERS_ENV = "REINHARDT_WORKERS"

log = logging.getLogger("reinhardt")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- records -------------------------------------------------------------------

@dataclass(frozen=True)
class PolyRecord:
    n: int
    p: int
    q: int
    c: str
    s: int
    index: int
    coeffs: str
    composition: str
    sporadic: bool
    period: Optional[int]
    reciprocal: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "PolyRecord":
        return cls(**json.loads(line))


def construct_records(spec: ConstructionSpec, signs=(1, -1), limit: Optional[int] = None,
                      start: int = 0) -> Iterable[PolyRecord]:
    """Records in choice-index order, each sign from index ``start`` on."""
    per_sign = spec.count_per_sign()
    left = limit
    for s in signs:
        stop = per_sign if left is None else min(per_sign, start + left)
        for k, F in enumerate(enumerate_range(spec, s, start, stop), start):
            yield PolyRecord(spec.n, spec.p, spec.q, str(spec.c), s, k,
                             str(F.coeffs), str(F.dihedral), F.sporadic, F.period, F.reciprocal)
        if left is not None:
            left -= max(0, stop - start)
            if left <= 0:
                return


# -- helpers ---------------------------------------------------------------------

def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'p,q', got {text!r}") from None
    return a, b


def _expect(text: str) -> tuple[str, int]:
    key, sep, val = text.partition("=")
    if not sep or key not in ("E1", "E0", "reciprocal", "reciprocal_sporadic"):
        raise argparse.ArgumentTypeError(f"expected E1=<k>, E0=<k> or reciprocal=<k>, got {text!r}")
    try:
        return key, int(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {val!r}") from None


def _open_out(path: Optional[str]) -> TextIO:
    return open(path, "w", encoding="utf-8") if path and path != "-" else sys.stdout


def _parse_input(text: str, n: Optional[int]) -> tuple[tuple[int, ...], int]:
    """Ternary string or composition -> (coefficients, n)."""
    t = text.strip()
    if t and set(t) <= set("+-0 |~_\t"):
        seq = TernarySeq.parse(t)
        return seq.values, n if n is not None else len(seq)
    try:
        parts = tuple(int(x) for x in t.strip("[]").replace(" ", "").split(",") if x)
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a ternary string or a composition") from None
    if not parts or min(parts) < 1:
        raise UsageError(f"composition parts must be positive: {text!r}")
    if n is not None and n != sum(parts):
        raise UsageError(f"composition sums to {sum(parts)}, not n={n}")
    return coeffs_from_parts(parts), sum(parts)


# -- subcommands -------------------------------------------------------------------

def cmd_construct(args) -> int:
    try:
        spec = ConstructionSpec(args.n, args.p, args.q, EvenComposition.parse(args.c))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 <= args.start < spec.count_per_sign():
        raise UsageError(f"--start must lie in [0, {spec.count_per_sign()})")
    if args.limit is not None and args.limit < 0:
        raise UsageError("--limit must be >= 0")
    signs = (args.s,) if args.s else (1, -1)
    out = _open_out(args.output)
    try:
        for rec in construct_records(spec, signs, args.limit, args.start):
            out.write(rec.to_json() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_census(args) -> int:
    budget = float("inf") if args.budget_override else args.budget
    want_classes = bool(args.classes)
    try:
        if args.mode == "construction":
            report = census_mod.construction_census(
                args.n, both_orders=args.both_orders, both_signs=args.both_signs,
                workers=args.workers, budget=budget, checkpoint_dir=args.checkpoint,
                keep_classes=want_classes)
        else:
            report = census_mod.brute_force_census(args.n, largest_part=args.m, budget=budget,
                                                   keep_classes=want_classes)
    except census_mod.BudgetExceeded as exc:
        print(f"refused: {exc}; pass --budget-override to run anyway", file=sys.stderr)
        return EXIT_BUDGET
    except census_mod.UnsupportedN as exc:
        raise UsageError(str(exc)) from None
    if args.m is not None and args.mode == "construction":
        report.largest_part = args.m
        report.E1 = report.E1_by_largest_part.get(args.m, 0)
    out = _open_out(args.output)
    try:
        out.write(report.to_json() + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    if want_classes:
        Path(args.classes).write_text("".join(line + "\n" for line in report.class_lines()))
    failed = 0
    for key, want in args.expect or []:
        got = getattr(report, key)
        if got != want:
            print(f"expectation failed: {key}={got}, expected {want}", file=sys.stderr)
            failed += 1
    return EXIT_EXPECT if failed else EXIT_OK


def _render_inputs(args) -> Iterable[str]:
    yield from args.compositions
    if args.input:
        stream = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
        with stream:
            for line in stream:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("{"):
                    yield json.loads(line)["composition"]
                else:
                    yield line


def cmd_render(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    opts = SvgOptions(size=args.size, skeleton=not args.no_skeleton, caption=not args.no_caption)
    errors = 0
    for text in _render_inputs(args):
        try:
            parts = tuple(int(x) for x in str(text).strip("[] ").split(","))
            geom = polygon_vertices(canonicalize(parts))
        except (ValueError, InvalidComposition) as exc:
            print(f"error: {text}: {exc}", file=sys.stderr)
            errors += 1
            continue
        path = outdir / svg_filename(parts)
        path.write_text(render_svg(geom, opts), encoding="utf-8")
        print(path)
    if errors:
        print(f"{errors} record(s) skipped", file=sys.stderr)
    return EXIT_OK


def _formula(args) -> int:
    kind = args.formula
    if kind == "2pq":
        if args.p is None or args.q is None:
            raise UsageError("--formula 2pq needs --p and --q")
        print(census_mod.e1_formula_2pq(args.p, args.q))
        return EXIT_OK
    if args.p is None or args.q is None or args.n is None or args.c is None:
        raise UsageError(f"--formula {kind} needs --n, --p, --q and --c")
    c = EvenComposition.parse(args.c)
    if kind == "u-bound":
        print(census_mod.u_bound(args.n, args.p, args.q, c))
    elif kind == "lower-bound":
        print(census_mod.e1_lower_bound(args.n, args.p, args.q, c))
    else:
        print(census_mod.sporadic_count_exact(args.p, args.q, c.total, c, args.n))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.formula:
        try:
            return _formula(args)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not args.input:
        raise UsageError("verify needs a ternary string or composition (or --formula)")
    values, n = _parse_input(args.input, args.n)
    try:
        F = ReinhardtPolynomial(values, n)
    except (NotReinhardtError, ValueError) as exc:
        print(f"not Reinhardt (n={n}): {exc}")
        return EXIT_OK
    comp = F.dihedral
    print(f"Reinhardt, n={n}, l={F.nonzero_count()}")
    print(f"periodic? {'yes' if not F.sporadic else 'no'}")
    print(f"period: {F.period if F.period is not None else '-'}")
    print(f"reciprocal? {'yes' if F.reciprocal else 'no'}")
    print(f"composition {comp}")
    print(f"power form {comp.power_str()}")
    m = polygon_vertices(comp).metrics
    print(f"metrics: diameter={m.diameter:.12f} perimeter={m.perimeter:.12f} width={m.width:.12f}")
    if args.decompose:
        p, q = args.decompose
        try:
            res = decompose_two_term(F.polynomial(), n, p, q)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if res is None:
            print("no decomposition")
        else:
            f1, f2 = res
            print(f"f1 = {f1}")
            print(f"f2 = {f2}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="reinhardt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", help="emit every polynomial of one construction spec as JSONL")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--c", required=True, help="even composition of n/(pq), e.g. 1,3,2,2")
    c.add_argument("--s", type=int, choices=(1, -1), help="only this sign (default both)")
    c.add_argument("--start", type=int, default=0, help="first choice index within each sign")
    c.add_argument("--limit", type=int, help="stop after this many records")
    c.add_argument("--output", "-o")
    c.set_defaults(func=cmd_construct)

    s = sub.add_parser("census", help="count sporadic/periodic Reinhardt polygons")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--mode", choices=("construction", "brute-force"), default="construction")
    s.add_argument("--m", type=int, help="restrict to largest part exactly m")
    s.add_argument("--expect", type=_expect, action="append", metavar="KEY=VALUE")
    s.add_argument("--workers", type=int, default=int(os.environ.get(WORKERS_ENV, "1")))
    s.add_argument("--budget", type=int, default=census_mod.DEFAULT_NODE_BUDGET)
    s.add_argument("--budget-override", action="store_true")
    s.add_argument("--checkpoint", help="directory for per-chunk partial class sets")
    s.add_argument("--both-orders", action="store_true", help="walk (q,p) as well as (p,q)")
    s.add_argument("--both-signs", action="store_true", help="walk s=-1 as well as s=+1")
    s.add_argument("--output", "-o", help="report JSON (default stdout)")
    s.add_argument("--classes", help="write sorted class lines to this file")
    s.set_defaults(func=cmd_census)

    r = sub.add_parser("render", help="draw compositions as SVG")
    r.add_argument("compositions", nargs="*")
    r.add_argument("--input", help="JSONL or line-per-composition file ('-' for stdin)")
    r.add_argument("--outdir", default=".")
    r.add_argument("--size", type=int, default=400)
    r.add_argument("--no-skeleton", action="store_true")
    r.add_argument("--no-caption", action="store_true")
    r.set_defaults(func=cmd_render)

    v = sub.add_parser("verify", help="classify one polynomial or composition; closed forms")
    v.add_argument("input", nargs="?", help="ternary string (+-0) or composition")
    v.add_argument("--n", type=int)
    v.add_argument("--decompose", type=_pair, metavar="P,Q")
    v.add_argument("--formula", choices=("2pq", "u-bound", "lower-bound", "sporadic-exact"))
    v.add_argument("--p", type=int)
    v.add_argument("--q", type=int)
    v.add_argument("--c")
    v.set_defaults(func=cmd_verify)
    return ap


def _check_config(args) -> None:
    if args.command == "census":
        if args.m is not None and args.m < 1:
            raise UsageError("--m must be positive")
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        if args.mode == "brute-force" and (args.both_orders or args.both_signs or args.checkpoint):
            raise UsageError("--both-orders/--both-signs/--checkpoint apply to construction mode only")
    if args.command == "verify" and args.c and args.formula is None:
        raise UsageError("--c is only used with --formula")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _check_config(args)
        return args.func(args)
    except UsageError as exc:
        print(f"reinhardt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
