import json

import pytest

from supercurves.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_field_k(capsys):
    code, out, _ = call(capsys, "classify-field", "--signature", "2,0", "--json", "th1*th2", "dz")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["in_S1N"] is True and rep["in_S2"] is False


def test_classify_named_and_contact(capsys):
    code, out, _ = call(capsys, "classify-field", "--named", "L:2", "--json")
    assert code == EXIT_OK and json.loads(out)["in_S2"] is True
    code, out, _ = call(capsys, "classify-field", "--contact", "z", "--json")
    assert json.loads(out)["multiplier"] == "1"


def test_dual_torus(capsys):
    code, out, _ = call(capsys, "dual", "--fixture", "torus-s2", "--generator", "B")
    assert code == EXIT_OK
    assert out.strip() == "B~ = (tau + t | th1 + eta1, th2)"


def test_dual_rejects_nonsplit(capsys):
    code, out, _ = call(capsys, "dual", "--fixture", "torus-not-s2", "--generator", "B")
    assert code == EXIT_NEGATIVE and "not Aut^Delta" in out
    code, out, _ = call(capsys, "dual", "2*z | th1, th2")
    assert code == EXIT_NEGATIVE and "not Aut^delta" in out


def test_empty_atlas(tmp_path, capsys):
    path = tmp_path / "empty.atlas"
    path.write_text("signature: 2,0\nkind: cover\ncharts: U0\n")
    code, out, _ = call(capsys, "check-atlas", str(path), "--json")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["cocycle_ok"] is True and rep["s2_verdict"] == "S(2)"


def test_check_atlas_exit_codes(capsys):
    assert call(capsys, "check-atlas", "--fixture", "p1-split-(-1,-1)")[0] == EXIT_OK
    assert call(capsys, "check-atlas", "--fixture", "torus-not-s2")[0] == EXIT_NEGATIVE
    assert call(capsys, "check-atlas", "--fixture", "no-such")[0] == EXIT_INPUT


def test_input_errors(tmp_path, capsys):
    assert call(capsys, "ber", "z + | th1, th2")[0] == EXIT_INPUT
    assert call(capsys, "ber", "--signature", "x", "z | th1, th2")[0] == EXIT_INPUT
    assert call(capsys, "frobnicate")[0] == EXIT_INPUT
    bad = tmp_path / "bad.atlas"
    bad.write_text("signature: 2,0\nkind: quotient\ngenerator A: z +* 1 | th1, th2\n")
    code, _, err = call(capsys, "check-atlas", str(bad))
    assert code == EXIT_INPUT and "line 3" in err
    assert call(capsys, "check-atlas", str(tmp_path / "missing.atlas"))[0] == EXIT_INPUT


def test_ber_and_lift(capsys):
    code, out, _ = call(capsys, "ber", "2*z | th1, th2")
    assert code == EXIT_OK and out.strip() == "map: Ber = 2"
    code, out, _ = call(capsys, "lift", "--json", "z | th2, th1")
    rep = json.loads(out)["map"]
    assert rep["multiplier"] == "1" and rep["determinant_rhs"] == "-1"


def test_fixtures_listing(capsys):
    code, out, _ = call(capsys, "fixtures")
    assert code == EXIT_OK and "torus-s2" in out.split()
    code, out, _ = call(capsys, "fixtures", "p1-split-(2,-4)")
    assert code == EXIT_OK and "transition U0 -> U1" in out


def test_window_flag(capsys):
    code, out, _ = call(capsys, "ber", "--window=-3,3", "z | th1, th2")
    assert code == EXIT_OK
    assert call(capsys, "ber", "--window=2,3", "z | th1, th2")[0] == EXIT_INPUT
