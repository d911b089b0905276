"""Command-line front end.

Exit codes: 0 success, 1 a mathematical negative (for example an atlas that is
not S(2), or a map outside ``Aut^Delta`` given to ``dual``), 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from .atlasfile import AtlasFormatError, fixture_text, format_map, list_fixtures, load_fixture, parse_atlas, parse_map
from .berezinian import ber_map, is_unit_one
from .curves import (
    Atlas,
    CurveError,
    NotAutDelta,
    NotAutDeltaS2,
    classify_atlas,
    determinant_rhs,
    dual,
    extract_lambda,
    is_aut_Delta,
    is_aut_omega,
    lift,
    lifted_omega,
)
from .derivations import VectorField, classify, contact_field, named_field, sdiv
from .expressions import ParseError, parse_expression, serialize
from .gaussian import GaussianRational
from .superalgebra import AlgebraError, AlgebraSignature, SuperElement, SuperMap

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _pair(text: str, what: str):
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"{what} must be two integers 'a,b', got {text!r}") from None
    return a, b


def _signature(args) -> AlgebraSignature:
    N, M = _pair(args.signature, "--signature")
    if N < 0 or M < 0:
        raise InputError("--signature needs non-negative odd counts")
    if args.exact_poly:
        return AlgebraSignature.make(N, M, (0, None), args.even, exact=True)
    lo, hi = _pair(args.window, "--window")
    if lo > 0 or hi < 1:
        raise InputError("--window must contain 0 and 1")
    return AlgebraSignature.make(N, M, (lo, hi), args.even)


def _constants(args) -> Dict[str, GaussianRational]:
    out: Dict[str, GaussianRational] = {}
    for item in args.const or []:
        if "=" not in item:
            raise InputError(f"--const expects NAME=VALUE, got {item!r}")
        name, value = (s.strip() for s in item.split("=", 1))
        val = parse_expression(value, AlgebraSignature.make(0, 0), out)
        if not val.is_scalar():
            raise InputError(f"constant {name} must be a number")
        out[name] = val.scalar()
    return out


def show(x: SuperElement, constants: Mapping[str, GaussianRational] = ()) -> str:
    """Serialize, writing a constant term by name when it matches a named constant."""
    c = x.coefficient(0, ())
    for name, val in sorted(dict(constants).items()):
        if c and c == val:
            rest = serialize(x - x.signature.const(c))
            if rest == "0":
                return name
            return f"{name} - {rest[1:]}" if rest.startswith("-") else f"{name} + {rest}"
    return serialize(x)


def show_map(m: SuperMap, constants=()) -> str:
    return f"({show(m.F, constants)} | " + ", ".join(show(p, constants) for p in m.phi) + ")"


def _emit(args, report: dict, lines: Sequence[str]):
    if args.json:
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


def _load_atlas(args) -> Atlas:
    if getattr(args, "fixture", None):
        try:
            return load_fixture(args.fixture)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
    path = getattr(args, "file", None)
    if not path:
        raise InputError("give an atlas file or --fixture NAME")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_atlas(text)


def _maps_from(args) -> List[tuple]:
    """``(label, map, constants)`` from a positional map or a fixture."""
    if getattr(args, "fixture", None):
        atlas = _load_atlas(args)
        maps = atlas.maps()
        if getattr(args, "generator", None):
            maps = [(n, m) for n, m in maps if n == args.generator]
            if not maps:
                raise InputError(f"fixture has no map named {args.generator!r}")
        return [(n, m, atlas.constants) for n, m in maps]
    if not args.map:
        raise InputError("give a map 'F | phi1, phi2' or --fixture NAME")
    consts = _constants(args)
    return [("map", parse_map(args.map, _signature(args), consts), consts)]


# ---------------------------------------------------------------------------
# commands


def cmd_classify_field(args) -> int:
    sig = _signature(args)
    consts = _constants(args)
    if args.named:
        X = named_field(args.named, sig)
    elif args.contact:
        X = contact_field(parse_expression(args.contact, sig, consts))
    else:
        terms = args.terms or []
        if not terms or len(terms) % 2:
            raise InputError("give pairs COEFF DIRECTION, e.g. \"th1*th2\" dz")
        a = sig.zero()
        b = [sig.zero() for _ in range(sig.N)]
        for coeff, direction in zip(terms[::2], terms[1::2]):
            c = parse_expression(coeff, sig, consts)
            if direction in ("dz", "dt"):
                a = a + c
            elif direction.startswith("dth") and direction[3:].isdigit() and 1 <= int(direction[3:]) <= sig.N:
                k = int(direction[3:]) - 1
                b[k] = b[k] + c
            else:
                raise InputError(f"unknown direction {direction!r}; use dz or dth1..dth{sig.N}")
        X = VectorField(a, b)
    if X.parity() is None:
        raise InputError("the field is not homogeneous")
    fc = classify(X)
    report = {"field": str(X), "parity": X.parity(), "sdiv": serialize(sdiv(X))}
    report.update(fc.as_dict())
    lines = [f"field      {X}", f"parity     {'even' if X.parity() == 0 else 'odd'}",
             f"sdiv       {report['sdiv']}", f"in_S1N     {str(fc.in_S1N).lower()}",
             f"in_S2      {str(fc.in_S2).lower() if sig.N == 2 else 'n/a'}",
             f"in_K1N     {str(fc.in_K1N).lower()}"]
    if fc.multiplier is not None:
        lines.append(f"multiplier {serialize(fc.multiplier)}")
    _emit(args, report, lines)
    return EXIT_OK


def _map_report(m: SuperMap, consts) -> dict:
    sig = m.signature
    ber = ber_map(m)
    mult = is_aut_omega(m) if sig.N else None
    rep = {"map": show_map(m, consts), "ber": serialize(ber), "aut_delta": is_unit_one(ber),
           "aut_omega": mult is not None, "omega_multiplier": None if mult is None else serialize(mult)}
    if sig.N == 2 and rep["aut_delta"]:
        rep["lambda"] = serialize(extract_lambda(m))
        rep["aut_Delta"] = is_aut_Delta(m)
    return rep


def cmd_classify_map(args) -> int:
    reports = {label: _map_report(m, c) for label, m, c in _maps_from(args)}
    lines = []
    for label, rep in sorted(reports.items()):
        lines.append(f"{label}: {rep['map']}")
        for key in ("ber", "aut_delta", "aut_Delta", "lambda", "aut_omega", "omega_multiplier"):
            if key in rep and rep[key] is not None:
                val = rep[key]
                lines.append(f"  {key:<16} {str(val).lower() if isinstance(val, bool) else val}")
    _emit(args, reports, lines)
    return EXIT_OK


def cmd_ber(args) -> int:
    out = {label: serialize(ber_map(m)) for label, m, _ in _maps_from(args)}
    _emit(args, out, [f"{k}: Ber = {v}" for k, v in sorted(out.items())])
    return EXIT_OK


def cmd_lift(args) -> int:
    report, lines = {}, []
    for label, m, c in _maps_from(args):
        L = lift(m)
        mult = is_aut_omega(L, lifted_omega(L.signature))
        report[label] = {"lift": show_map(L, c), "multiplier": None if mult is None else serialize(mult),
                         "determinant_rhs": serialize(determinant_rhs(m))}
        lines.append(f"{label}~ = {show_map(L, c)}")
        lines.append(f"  multiplier {report[label]['multiplier']}")
    _emit(args, report, lines)
    return EXIT_OK


def cmd_dual(args) -> int:
    report, lines = {}, []
    code = EXIT_OK
    for label, m, c in _maps_from(args):
        try:
            d = dual(m)
        except (NotAutDelta, NotAutDeltaS2) as exc:
            report[label] = {"error": str(exc)}
            lines.append(f"{label}: {exc}")
            code = EXIT_NEGATIVE
            continue
        report[label] = {"dual": show_map(d, c)}
        lines.append(f"{label}~ = {show_map(d, c)}")
    _emit(args, report, lines)
    return code


def cmd_check_atlas(args) -> int:
    atlas = _load_atlas(args)
    report = classify_atlas(atlas)
    lines = [f"atlas        {atlas.name or '(unnamed)'}",
             f"cocycle_ok   {str(report['cocycle_ok']).lower()}"]
    for f in report["failures"]:
        lines.append(f"  failing    {' '.join(f)}")
    for name, entry in sorted(report["per_transition_class"].items()):
        bits = [f"Ber={entry['ber']}", f"aut_delta={str(entry['aut_delta']).lower()}"]
        if "lambda" in entry:
            bits.append(f"lambda={entry['lambda']}")
        bits.append(f"aut_omega={str(entry['aut_omega']).lower()}")
        lines.append(f"  {name:<10} " + " ".join(bits))
    lines.append(f"s2_verdict   {report['s2_verdict']}")
    if report["witness"] is not None:
        lines.append("witness      " + ", ".join(f"{k}={v}" for k, v in sorted(report["witness"].items())))
    _emit(args, report, lines)
    ok = report["cocycle_ok"] and report["s2_verdict"] in ("S(2)", "n/a")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_fixtures(args) -> int:
    if args.name:
        text = fixture_text(args.name)
        if text is None:
            try:
                from .atlasfile import format_atlas
                text = format_atlas(load_fixture(args.name))
            except KeyError as exc:
                raise InputError(str(exc.args[0])) from None
        sys.stdout.write(text)
        return EXIT_OK
    names = list_fixtures()
    _emit(args, {"fixtures": names}, names)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser):
    p.add_argument("--signature", default="2,0", help="odd counts N,M (default 2,0)")
    p.add_argument("--window", default="-8,8", help="exponent window lo,hi; write --window=-8,8")
    p.add_argument("--exact-poly", action="store_true", help="exact polynomial mode (no truncation)")
    p.add_argument("--even", default="z", choices=("z", "t"), help="name of the even coordinate")
    p.add_argument("--const", action="append", metavar="NAME=VALUE", help="named constant, e.g. tau=i")
    p.add_argument("--json", action="store_true", help="emit a JSON report")


def _map_source(p: argparse.ArgumentParser):
    p.add_argument("map", nargs="?", help="map 'F | phi1, ..., phiN'")
    p.add_argument("--fixture", help="use the maps of a bundled fixture")
    p.add_argument("--generator", help="restrict to one generator or transition of the fixture")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supercurves", description="Super curves, S(2) and the duality involution.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify-field", help="sdiv, S(1|N), S(2) and K(1|N) membership of a vector field")
    _common(p)
    p.add_argument("terms", nargs="*", help="alternating COEFF DIRECTION with DIRECTION in dz, dth1, ...")
    p.add_argument("--named", help="named generator, e.g. L:1, J0:2, K, G1:0, H2:1")
    p.add_argument("--contact", help="contact field D^f for the given f")
    p.set_defaults(func=cmd_classify_field)

    for name, func, text in (("classify-map", cmd_classify_map, "Aut^delta, Aut^Delta, lambda and Aut^omega tests"),
                             ("ber", cmd_ber, "Berezinian of the Jacobian"),
                             ("lift", cmd_lift, "the SUSY_2n lift of a 1|n map"),
                             ("dual", cmd_dual, "the duality involution on Aut^Delta")):
        p = sub.add_parser(name, help=text)
        _common(p)
        _map_source(p)
        p.set_defaults(func=func)

    p = sub.add_parser("check-atlas", help="cocycle check and S(2) verdict for an atlas")
    p.add_argument("file", nargs="?", help="atlas document")
    p.add_argument("--fixture", help="bundled fixture name")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_atlas)

    p = sub.add_parser("fixtures", help="list bundled fixtures or print one")
    p.add_argument("name", nargs="?")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixtures)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ParseError, AtlasFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CurveError, AlgebraError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
