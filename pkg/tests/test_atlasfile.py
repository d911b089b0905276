import pytest

from supercurves import AlgebraSignature, GaussianRational
from supercurves.atlasfile import (
    AtlasFormatError,
    format_atlas,
    format_map,
    list_fixtures,
    load_fixture,
    parse_atlas,
    parse_map,
)
from supercurves.curves import SplitCurveData, split_curve

GOOD = """\
# a two-chart cover
name: demo
signature: 2,0
window: -6,6
kind: cover
charts: U0, U1
transition U0 -> U1: z^-1 | -z^-1*th1, z^-1*th2   # involution
transition U1 -> U0: z^-1 | -z^-1*th1, z^-1*th2
"""


def test_parse_good_document():
    atlas = parse_atlas(GOOD)
    assert atlas.name == "demo" and atlas.charts == ("U0", "U1")
    assert atlas.signature.window == (-6, 6)
    assert set(atlas.transitions) == {("U0", "U1"), ("U1", "U0")}


def test_constants_in_maps():
    atlas = parse_atlas("signature: 2,1\neven: t\nkind: quotient\nconst tau = i\ngenerator B: t + tau | th1, th2\n")
    sig = atlas.signature
    assert atlas.constants == {"tau": GaussianRational(0, 1)}
    assert atlas.generators["B"].F == sig.z() + sig.const(GaussianRational(0, 1))


@pytest.mark.parametrize("text, line", [
    ("signature: 2\n", 1),
    ("signature: 2,0\nkind: cover\ncharts: U0, U1\ntransition U0 -> U2: z | th1, th2\n", 4),
    ("signature: 2,0\nwindow: 3,8\n", 2),
    ("signature: 2,0\nbogus: 1\n", 2),
    ("signature: 2,0\nkind: quotient\ngenerator A: z + | th1, th2\n", 3),
    ("signature: 2,0\nkind: quotient\ngenerator A: z | th1\n", 3),
    ("signature: 2,0\nkind: quotient\ngenerator A: 2*z | th1, th1\n", 3),
    ("signature: 2,0\nconst z = 1\n", 2),
])
def test_errors_name_the_line(text, line):
    with pytest.raises(AtlasFormatError) as info:
        parse_atlas(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_signature():
    with pytest.raises(AtlasFormatError, match="signature"):
        parse_atlas("kind: cover\n")


def test_column_of_bad_token():
    text = "signature: 2,0\nkind: quotient\ngenerator A: z + 1 | th1, th2 $\n"
    with pytest.raises(AtlasFormatError) as info:
        parse_atlas(text)
    assert info.value.column is not None
    assert text.splitlines()[2][info.value.column - 1] == "$"


def test_map_round_trip():
    sig = AlgebraSignature.make(2, 1)
    m = parse_map("z + 1/2*th1*eta1 | th1 + z*th2, -th2", sig)
    assert parse_map(format_map(m), sig) == m


@pytest.mark.parametrize("name", list_fixtures())
def test_fixture_round_trip(name):
    atlas = load_fixture(name)
    again = parse_atlas(format_atlas(atlas))
    assert again.transitions == atlas.transitions
    assert again.generators == atlas.generators
    assert again.constants == atlas.constants


def test_bundled_split_fixture_matches_generator():
    for a in (-1, 0, -2, 1):
        name = f"p1-split-({a},{-2 - a})"
        assert name in list_fixtures()
        assert load_fixture(name).transitions == split_curve(SplitCurveData("P1", (a, -2 - a))).transitions


def test_generated_fixture_and_unknown_name():
    assert load_fixture("p1-split-(3,-5)").transitions
    with pytest.raises(KeyError):
        load_fixture("nope")
