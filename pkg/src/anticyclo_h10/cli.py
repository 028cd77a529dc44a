"""Command-line entry point: certify, congruence, decompose, localdata, fetch."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .anticyclo import BrinkParams, UnsupportedParameters, decompose, splits_at_level
from .certifier import INCONCLUSIVE, NEGATIVE, CertifyOptions, certify
from .congruence import auto_strip_sets, comparison_level, resolve_bound, sturm_data, verify_congruence
from .curves import minimal_model_Q
from .interface import (
    CertificateDocument,
    FormatError,
    LMFDBClient,
    NotFound,
    Unavailable,
    bundled_externals,
    load_externals,
    resolve_curve,
    write_atomic,
)
from .local_data import tate_algorithm
from .numberfield import QQ, CompositumField, ImagQuadField, NoPrimitiveSolution, UnsupportedField

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _bound(text: str) -> str | int:
    if text in ("formula", "conservative"):
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'formula', 'conservative' or an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("bound must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anticyclo-h10", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("certify", help="evaluate every hypothesis and write a certificate")
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--D", type=int, required=True)
    c.add_argument("--e1", required=True, help="Cremona label or fixture file")
    c.add_argument("--e2", required=True)
    c.add_argument("--externals", required=True, help="externals file, or 'bundled' for the packaged example")
    c.add_argument("--sturm-bound", type=_bound, default="conservative")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--offline", action="store_true")
    c.add_argument("--out", help="certificate output path (stdout when omitted)")

    g = sub.add_parser("congruence", help="mod-p coefficient sweep")
    g.add_argument("--e1", required=True)
    g.add_argument("--e2", required=True)
    g.add_argument("--p", type=int, required=True)
    g.add_argument("--bound", type=_bound, default="formula")
    g.add_argument("--strip", choices=("auto", "none"), default="auto")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--offline", action="store_true")

    d = sub.add_parser("decompose", help="split depth of the primes above ell")
    d.add_argument("--D", type=int, required=True)
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--ell", type=int, required=True)
    d.add_argument("--nu", type=int)
    d.add_argument("--depth", action="store_true", help="also print the per-level criterion")

    loc = sub.add_parser("localdata", help="Tate's algorithm at the primes above ell")
    loc.add_argument("--curve", required=True)
    loc.add_argument("--field", choices=("Q", "K", "Kprime"), default="Q")
    loc.add_argument("--ell", type=int, required=True)
    loc.add_argument("--D", type=int)
    loc.add_argument("--p", type=int, default=3)
    loc.add_argument("--offline", action="store_true")

    f = sub.add_parser("fetch", help="fetch a curve record into the cache")
    f.add_argument("--label", required=True)
    f.add_argument("--offline", action="store_true")
    f.add_argument("--cache-dir")
    f.add_argument("--base-url")
    return parser


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _cmd_certify(args) -> int:
    if args.externals == "bundled":
        externals, overrides = bundled_externals()
    else:
        if not Path(args.externals).is_file():
            raise UsageError(f"externals file {args.externals!r} not found")
        externals, overrides = load_externals(args.externals)
    f1 = resolve_curve(args.e1, offline=args.offline)
    f2 = resolve_curve(args.e2, offline=args.offline)
    options = CertifyOptions(sturm_bound=args.sturm_bound, workers=args.workers, local_overrides=overrides)
    cert = certify(f1.model, f2.model, ImagQuadField(args.D), args.p, externals, options, (f1.label, f2.label))
    text = CertificateDocument.from_certificate(cert).to_json()
    if args.out:
        write_atomic(args.out, text)
        print(f"conclusion: {cert.conclusion}")
    else:
        sys.stdout.write(text)
    if cert.conclusion == NEGATIVE:
        return EXIT_OK
    return EXIT_INCONCLUSIVE if cert.conclusion == INCONCLUSIVE else EXIT_FAIL


def _cmd_congruence(args) -> int:
    f1 = resolve_curve(args.e1, offline=args.offline)
    f2 = resolve_curve(args.e2, offline=args.offline)
    E1, E2 = minimal_model_Q(f1.model), minimal_model_Q(f2.model)
    sturm = sturm_data(comparison_level(E1, E2))
    bound = resolve_bound(args.bound, sturm)
    strips = auto_strip_sets(E1, E2) if args.strip == "auto" else (frozenset(), frozenset())
    report = verify_congruence(E1, E2, args.p, bound, strips, workers=args.workers)
    _dump({"sturm": sturm.__dict__, "report": report.summary()})
    return EXIT_OK if report.passed else EXIT_FAIL


def _cmd_decompose(args) -> int:
    K = ImagQuadField(args.D)
    params = BrinkParams.for_field(K, args.p, args.nu)
    print(f"h = {params.h}")
    print(f"mu = {params.mu}")
    print(f"nu = {params.nu}")
    for v in K.primes_above(args.ell):
        res = decompose(v, K, args.p, params)
        print(f"prime {res.prime}: finitely decomposed = {res.finitely_decomposed}")
        if res.finitely_decomposed:
            print(f"  (a, b) = ({res.a}, {res.b})")
            print(f"  (a*, b*) = ({res.a_star}, {res.b_star})")
            print(f"  b* = {res.b_star}")
            print(f"  t = {res.t}")
            print(f"  s = {res.s_v}")
            if args.depth:
                for n in range(res.t + 2):
                    print(f"  level {n}: splits completely = {splits_at_level(res.b_star, n, params)}")
    return EXIT_OK


def _cmd_localdata(args) -> int:
    fixture = resolve_curve(args.curve, offline=args.offline)
    E = minimal_model_Q(fixture.model)
    if args.field == "Q":
        L = QQ
    else:
        if args.D is None:
            raise UsageError("--D is required for --field K or Kprime")
        K = ImagQuadField(args.D)
        L = K if args.field == "K" else CompositumField(K, args.p)
    _dump([tate_algorithm(E, P, args.p).summary() | {"e": P.e, "f": P.f} for P in L.primes_above(args.ell)])
    return EXIT_OK


def _cmd_fetch(args) -> int:
    client = LMFDBClient(args.base_url, args.cache_dir, args.offline)
    _dump(client.fetch_curve(args.label).to_dict())
    return EXIT_OK


COMMANDS = {
    "certify": _cmd_certify,
    "congruence": _cmd_congruence,
    "decompose": _cmd_decompose,
    "localdata": _cmd_localdata,
    "fetch": _cmd_fetch,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"anticyclo-h10: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except (NotFound, Unavailable, FormatError, FileNotFoundError, UnsupportedField,
            UnsupportedParameters, NoPrimitiveSolution, ValueError) as exc:
        print(f"anticyclo-h10: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
