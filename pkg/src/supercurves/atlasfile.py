"""Plain-text atlas documents and the bundled fixtures.

A document is a list of ``key: value`` lines; ``#`` starts a comment::

    name: torus-s2
    signature: 2,1          # N,M
    even: t
    window: -8,8            # or "exact"
    kind: quotient          # or "cover"
    const tau = i
    generator B: t + tau + th1*eta1 | th1, th2

Cover atlases list ``charts: U0, U1`` and ``transition U0 -> U1: F | phi1, phi2``.
Header lines may appear in any order; maps are parsed once the signature is known.
"""

from __future__ import annotations

import re
from importlib import resources
from typing import Dict, List, Mapping, Optional, Tuple

from .curves import Atlas, SplitCurveData, split_curve
from .expressions import ParseError, parse_expression, serialize
from .gaussian import GaussianRational
from .superalgebra import AlgebraError, AlgebraSignature, SuperMap

__all__ = [
    "AtlasFormatError",
    "parse_map",
    "format_map",
    "parse_atlas",
    "format_atlas",
    "list_fixtures",
    "load_fixture",
    "fixture_text",
]

_FIXTURE_PKG = "supercurves.data.fixtures"
_P1 = re.compile(r"^p1-split-\((-?\d+),(-?\d+)\)(-shifted)?$")


class AtlasFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def parse_map(text: str, sig: AlgebraSignature, constants: Optional[Mapping[str, GaussianRational]] = None,
              line: Optional[int] = None, offset: int = 0) -> SuperMap:
    """``"F | phi1, ..., phiN"`` to a :class:`SuperMap`."""
    if text.count("|") != 1:
        raise AtlasFormatError("a map needs exactly one '|' between F and the odd images", line)
    head, tail = text.split("|")
    pieces = [head] + (tail.split(",") if tail.strip() else [])
    if len(pieces) != sig.N + 1:
        raise AtlasFormatError(f"expected {sig.N} odd images, got {len(pieces) - 1}", line)
    comps = []
    pos = offset
    for piece in pieces:
        try:
            comps.append(parse_expression(piece, sig, constants))
        except ParseError as exc:
            raise AtlasFormatError(exc.message, line, pos + exc.position + 1) from None
        pos += len(piece) + 1
    try:
        return SuperMap(comps[0], comps[1:])
    except AlgebraError as exc:
        raise AtlasFormatError(f"invalid map: {exc}", line) from None


def format_map(m: SuperMap) -> str:
    return f"{serialize(m.F)} | " + ", ".join(serialize(p) for p in m.phi)


def _strip(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_atlas(text: str) -> Atlas:
    header: Dict[str, Tuple[str, int]] = {}
    constants: Dict[str, GaussianRational] = {}
    maps: List[Tuple[str, str, str, int, int]] = []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("const "):
            m = re.fullmatch(r"const\s+([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.+)", line)
            if not m:
                raise AtlasFormatError("expected 'const NAME = VALUE'", n)
            name = m.group(1)
            if name in ("z", "t", "i") or re.fullmatch(r"(th|eta)\d+", name):
                raise AtlasFormatError(f"constant name {name!r} is reserved", n)
            try:
                val = parse_expression(m.group(2), AlgebraSignature.make(0, 0), constants)
            except ParseError as exc:
                raise AtlasFormatError(exc.message, n) from None
            if not val.is_constant() or not val.is_scalar():
                raise AtlasFormatError("constants must be numbers", n)
            constants[name] = val.scalar()
            continue
        m = re.fullmatch(r"transition\s+(\w+)\s*->\s*(\w+)\s*:(.*)", line)
        if m:
            maps.append(("transition", m.group(1), m.group(2), n, raw.index(":") + 1, m.group(3)))
            continue
        m = re.fullmatch(r"generator\s+(\w+)\s*:(.*)", line)
        if m:
            maps.append(("generator", m.group(1), "", n, raw.index(":") + 1, m.group(2)))
            continue
        m = re.fullmatch(r"([a-z]+)\s*:(.*)", line)
        if not m:
            raise AtlasFormatError(f"unrecognised line {line!r}", n)
        key = m.group(1)
        if key not in ("name", "signature", "even", "window", "kind", "charts"):
            raise AtlasFormatError(f"unknown key {key!r}", n)
        if key in header:
            raise AtlasFormatError(f"duplicate key {key!r}", n)
        header[key] = (m.group(2).strip(), n)

    def get(key, default=None):
        return header.get(key, (default, None))

    sig_text, sig_line = get("signature")
    if sig_text is None:
        raise AtlasFormatError("missing 'signature: N,M'")
    try:
        N, M = (int(x) for x in sig_text.split(","))
    except ValueError:
        raise AtlasFormatError("signature must be 'N,M'", sig_line) from None
    if N < 0 or M < 0:
        raise AtlasFormatError("odd counts must be non-negative", sig_line)
    even, even_line = get("even", "z")
    if even not in ("z", "t"):
        raise AtlasFormatError("even coordinate must be z or t", even_line)
    win, win_line = get("window", "-8,8")
    if win == "exact":
        sig = AlgebraSignature.make(N, M, (0, None), even, exact=True)
    else:
        try:
            lo, hi = (int(x) for x in win.split(","))
        except ValueError:
            raise AtlasFormatError("window must be 'lo,hi' or 'exact'", win_line) from None
        if lo > 0 or hi < 1:
            raise AtlasFormatError("window must contain 0 and 1", win_line)
        sig = AlgebraSignature.make(N, M, (lo, hi), even)
    kind, kind_line = get("kind", "cover")
    if kind not in ("cover", "quotient"):
        raise AtlasFormatError("kind must be 'cover' or 'quotient'", kind_line)
    charts_text, charts_line = get("charts", "")
    charts = tuple(c.strip() for c in charts_text.split(",") if c.strip())
    if len(set(charts)) != len(charts):
        raise AtlasFormatError("duplicate chart name", charts_line)
    transitions, generators = {}, {}
    for what, a, b, n, col, body in maps:
        m = parse_map(body, sig, constants, line=n, offset=col)
        if what == "transition":
            if kind != "cover":
                raise AtlasFormatError("transitions need kind: cover", n)
            if a not in charts or b not in charts:
                raise AtlasFormatError(f"transition {a} -> {b} uses an undeclared chart", n)
            if a == b:
                raise AtlasFormatError("a chart's self-transition is the identity and is not listed", n)
            if (a, b) in transitions:
                raise AtlasFormatError(f"duplicate transition {a} -> {b}", n)
            transitions[(a, b)] = m
        else:
            if kind != "quotient":
                raise AtlasFormatError("generators need kind: quotient", n)
            if a in generators:
                raise AtlasFormatError(f"duplicate generator {a}", n)
            generators[a] = m
    name, _ = get("name", "")
    return Atlas(sig, kind, charts, transitions, generators, constants, name=name)


def format_atlas(atlas: Atlas) -> str:
    sig = atlas.signature
    out = []
    if atlas.name:
        out.append(f"name: {atlas.name}")
    out.append(f"signature: {sig.N},{sig.M}")
    out.append(f"even: {sig.even_name}")
    out.append("window: exact" if sig.exact_polynomial_mode else f"window: {sig.e_min},{sig.e_max}")
    out.append(f"kind: {atlas.kind}")
    for k, v in sorted(atlas.constants.items()):
        out.append(f"const {k} = {v}")
    if atlas.kind == "cover":
        out.append("charts: " + ", ".join(atlas.charts))
        for (a, b), m in sorted(atlas.transitions.items()):
            out.append(f"transition {a} -> {b}: {format_map(m)}")
    else:
        for g, m in sorted(atlas.generators.items()):
            out.append(f"generator {g}: {format_map(m)}")
    return "\n".join(out) + "\n"


def list_fixtures() -> List[str]:
    root = resources.files(_FIXTURE_PKG)
    return sorted(p.name[:-6] for p in root.iterdir() if p.name.endswith(".atlas"))


def fixture_text(name: str) -> Optional[str]:
    res = resources.files(_FIXTURE_PKG) / f"{name}.atlas"
    if res.is_file():
        return res.read_text(encoding="utf-8")
    return None


def load_fixture(name: str, generate: bool = True) -> Atlas:
    """Bundled fixture by name; ``p1-split-(a,b)`` is generated when no file exists."""
    text = fixture_text(name)
    if text is not None:
        return parse_atlas(text)
    m = _P1.match(name)
    if generate and m:
        a, b = int(m.group(1)), int(m.group(2))
        shift = GaussianRational(1) if m.group(3) else GaussianRational(0)
        return split_curve(SplitCurveData("P1", (a, b), shift=shift))
    raise KeyError(f"unknown fixture {name!r}; available: {', '.join(list_fixtures())}")
