"""Acceptance criteria 1-7.

Each test prints ``criterion N: PASS`` or ``criterion N: FAIL`` with the failing
sub-checks, and the session summary repeats the lines.  Run directly with
``python tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from supercurves import AlgebraSignature, GaussianRational, SuperMap, parse_expression, serialize
from supercurves.atlasfile import fixture_text, load_fixture, parse_atlas
from supercurves.berezinian import (
    ber_map,
    berezinian,
    berezinian_schur,
    exp_element,
    is_aut_delta,
    matrix_exp,
    supertrace,
)
from supercurves.cli import show_map
from supercurves.curves import (
    NotAutDeltaS2,
    SplitCurveData,
    ad_alpha,
    classify_atlas,
    determinant_rhs,
    dual,
    dual_split,
    extract_lambda,
    is_aut_omega,
    lift,
    lift_closed_form,
    lifted_omega,
    project_lifted,
    _up,
)
from supercurves.derivations import (
    G,
    H,
    J0,
    J1,
    J2,
    K,
    L,
    VectorField,
    bracket,
    classify,
    exp_field,
    is_pronilpotent,
    log_map,
    sdiv,
)

from randdata import (
    SIG20,
    SIG21,
    rand_aut_Delta,
    rand_aut_delta,
    rand_coeff,
    rand_commuting_pair,
    rand_element,
    rand_map,
    rand_pronilpotent_field,
    rand_supermatrix,
)

TAU = GaussianRational(0, 1)
RESULTS: dict = {}


class Checks:
    def __init__(self):
        self.failed = []

    def check(self, name, ok):
        if not ok:
            self.failed.append(name)
        return ok


def _record(n, checks: Checks):
    ok = not checks.failed
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}"
    if not ok:
        line += "  (failed: " + "; ".join(checks.failed) + ")"
    RESULTS[n] = line
    print(line)
    return ok


def _fields_agree(X, Y):
    return all(u.agrees(v) for u, v in zip(X.components(), Y.components()))


# ---------------------------------------------------------------------------


def criterion_1() -> Checks:
    c = Checks()
    sig = SIG20
    ms = range(-3, 4)
    named = {}
    for m in ms:
        for f, tag in ((L, "L"), (J0, "J0"), (J1, "J1"), (J2, "J2")):
            named[f"{tag}_{m}"] = f(m, sig)
        for i in (1, 2):
            named[f"G{i}_{m}"] = G(i, m, sig)
            named[f"H{i}_{m}"] = H(i, m, sig)
    named["K"] = K(sig)
    for name, X in named.items():
        c.check(f"sdiv({name}) = 0", sdiv(X).is_zero() and not sdiv(X).truncated)
        expect = name != "K"
        c.check(f"S(2) test on {name}", classify(X).in_S2 == expect)

    evens = [X for X in named.values() if X.parity() == 0]
    odds = [X for X in named.values() if X.parity() == 1]
    rng = random.Random(1)

    def combo(pool):
        X = VectorField.zero(sig)
        for _ in range(3):
            X = X + rng.choice(pool).scale(rand_coeff(rng))
        return X

    for k in range(50):
        X = combo(rng.choice([evens, odds]))
        Y = combo(rng.choice([evens, odds]))
        if not (sdiv(X).is_zero() and sdiv(Y).is_zero()):
            c.check(f"pair {k}: inputs sdiv-free", False)
            continue
        c.check(f"pair {k}: bracket in S(2)", classify(bracket(X, Y)).in_S2)
    return c


def criterion_2() -> Checks:
    c = Checks()
    for shape in ((1, 2), (2, 2)):
        for k in range(100):
            rng = random.Random(10_000 * shape[0] + k)
            T = rand_supermatrix(rng, SIG21, *shape)
            S = rand_supermatrix(rng, SIG21, *shape)
            c.check(f"{shape} #{k}: Ber(TS) = Ber(T)Ber(S)", berezinian(T @ S) == berezinian(T) * berezinian(S))
            for tag, M in (("T", T), ("S", S)):
                c.check(f"{shape} #{k}: Schur form on {tag}", berezinian(M) == berezinian_schur(M))
    for k in range(50):
        T = rand_supermatrix(random.Random(k), SIG21, 1, 2, invertible=False, nilpotent=True)
        c.check(f"nilpotent #{k}: Ber(exp T) = exp(str T)",
                berezinian(matrix_exp(T)).agrees(exp_element(supertrace(T))))
    return c


def criterion_3() -> Checks:
    c = Checks()
    for k in range(50):
        X = rand_pronilpotent_field(random.Random(300 + k))
        if not c.check(f"field #{k} pro-nilpotent", is_pronilpotent(X)):
            continue
        Y = log_map(exp_field(X))
        c.check(f"field #{k}: log(exp X) = X", _fields_agree(X, Y))
        # derivatives cost one order, so the top window exponent may be unknown
        c.check(f"field #{k}: known through z^7", all(v.precision() is None or v.precision() >= 8
                                                     for v in Y.components()))
    for k in range(20):
        X, Y = rand_commuting_pair(random.Random(500 + k))
        c.check(f"pair #{k} commutes", bracket(X, Y).is_zero())
        c.check(f"pair #{k}: exp(X+Y) = exp(X)exp(Y)", exp_field(X + Y).agrees(exp_field(X).compose(exp_field(Y))))
    return c


def criterion_4() -> Checks:
    c = Checks()
    for k in range(30):
        rng = random.Random(700 + k)
        P = rand_aut_delta(rng)
        Lp = lift(P)
        mult = is_aut_omega(Lp, lifted_omega(Lp.signature))
        c.check(f"Aut^delta #{k}: lift in Aut^omega", mult is not None)
        c.check(f"Aut^delta #{k}: multiplier = det(D_k phi^j)", mult is not None and mult.agrees(determinant_rhs(P)))
        c.check(f"Aut^delta #{k}: closed form", lift_closed_form(P).agrees(Lp))
        # the same identity for an arbitrary map carries the factor Ber(J Phi)
        Q = rand_map(rng)
        Lq = lift(Q)
        mq = is_aut_omega(Lq, lifted_omega(Lq.signature))
        c.check(f"general #{k}: multiplier = Ber * det", mq is not None and
                mq.agrees(_up(ber_map(Q), Lq.signature) * determinant_rhs(Q)))
        c.check(f"general #{k}: closed form", lift_closed_form(Q).agrees(Lq))
    for k in range(20):
        rng = random.Random(900 + k)
        P, Q = rand_map(rng), rand_map(rng)
        c.check(f"pair #{k}: lift(PQ) = lift(P)lift(Q)", lift(P.compose(Q)).agrees(lift(P).compose(lift(Q))))
    return c


def _contact_maps(s):
    from fractions import Fraction
    from supercurves.derivations import contact_field
    zz, t1, t2 = s.z(), s.theta(1), s.theta(2)
    cs, sn = GaussianRational(Fraction(3, 5)), GaussianRational(Fraction(4, 5))
    return [
        exp_field(L(1, s)),
        exp_field(L(2, s).scale(3)),
        exp_field(contact_field(s.z(2))),
        exp_field(contact_field(zz * t1 * t2).scale(2)),
        SuperMap(zz, [t1.scale(cs) - t2.scale(sn), t1.scale(sn) + t2.scale(cs)]),
        SuperMap(zz + s.const(TAU), [t1, t2]),
    ]


def criterion_5() -> Checks:
    c = Checks()
    for k in range(30):
        P = rand_aut_Delta(random.Random(1100 + k))
        c.check(f"map #{k}: dual(dual P) = P", dual(dual(P)).agrees(P))
    for k, P in enumerate(_contact_maps(SIG21)):
        Lp = lift(P)
        c.check(f"contact map #{k} in Aut^omega", is_aut_omega(P) is not None)
        c.check(f"contact map #{k}: lift fixed by ad_alpha", ad_alpha(Lp).agrees(Lp))
        c.check(f"contact map #{k}: dual fixed", dual(P).agrees(P))

    s2 = load_fixture("torus-s2")
    B = s2.generators["B"]
    sig = B.signature
    t, th, rho, eta = sig.z(), sig.theta(1), sig.theta(2), sig.eta(1)
    reference = SuperMap(t + sig.const(TAU), [th - eta, rho])
    D = dual(B)
    c.check("torus-s2: dual(B) equals the reference form (t+tau | th-eta, rho)", D == reference)
    flip = SuperMap(t, [-th, -rho])
    c.check("torus-s2: dual(B) is Aut0-conjugate to the reference form", flip.compose(D).compose(flip) == reference)

    ns = load_fixture("torus-not-s2").generators["B"]
    try:
        dual(ns)
        c.check("torus-not-s2 rejected by dual", False)
    except NotAutDeltaS2 as exc:
        c.check("torus-not-s2 rejected with 'not Aut^Delta'", "not Aut^Delta" in str(exc))
    c.check("torus-not-s2: project_lifted(ad_alpha(lift(B))) absent", project_lifted(ad_alpha(lift(ns))) is None)
    return c


def criterion_6() -> Checks:
    c = Checks()
    susy4 = load_fixture("susy4-torus")
    for name, m in susy4.maps():
        c.check(f"susy4-torus {name} in Aut^omega", is_aut_omega(m) is not None)
    p1 = load_fixture("p1-split-(-1,-1)")
    rep = classify_atlas(p1)
    c.check("p1-split-(-1,-1) cocycle", rep["cocycle_ok"])
    c.check("p1-split-(-1,-1) transitions in Aut^delta", all(is_aut_delta(m) for _, m in p1.maps()))
    c.check("p1-split-(-1,-1) verdict S(2)", rep["s2_verdict"] == "S(2)")
    shifted = load_fixture("p1-split-(-1,-1)-shifted")
    rep = classify_atlas(shifted)
    c.check("shifted cocycle", rep["cocycle_ok"])
    c.check("shifted verdict S(2)", rep["s2_verdict"] == "S(2)")
    w = rep["witness"]
    c.check("shifted witness present", w is not None)
    if w:
        sig = shifted.signature
        mu = {k: parse_expression(v, sig) for k, v in w.items()}
        lam = {k: extract_lambda(m) for k, m in shifted.transitions.items()}
        c.check("shifted witness nontrivial", any(not v.is_zero() for v in mu.values()))
        c.check("witness solves lambda_ij = mu_j - mu_i",
                all(mu[j] - mu[i] == l for (i, j), l in lam.items()))
    for a in range(-5, 6):
        d = dual_split(SplitCurveData("P1", (a, -2 - a)))
        c.check(f"dual_split({a},{-2 - a}) sums to -2", sum(d.degrees) == -2)
        c.check(f"dual_split({a},{-2 - a}) = (-a-2, -b-2)", d.degrees == (-a - 2, a))
    return c


def _cli(*argv):
    env = dict(os.environ)
    src = str(Path(__file__).resolve().parent.parent / "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    proc = subprocess.run([sys.executable, "-m", "supercurves", *argv], capture_output=True, env=env)
    return proc.returncode, proc.stdout


def criterion_7() -> Checks:
    c = Checks()
    # library results computed from the bundled data files
    for name in ("p1-split-(-1,-1)", "p1-split-(-1,-1)-shifted", "susy4-torus", "torus-s2", "torus-not-s2"):
        text = fixture_text(name)
        c.check(f"{name} ships as a data file", text is not None)
        expect = classify_atlas(parse_atlas(text))
        code, out = _cli("check-atlas", "--fixture", name, "--json")
        got = json.loads(out)
        c.check(f"check-atlas {name} matches the library", got == json.loads(json.dumps(expect)))
        ok = expect["cocycle_ok"] and expect["s2_verdict"] in ("S(2)", "n/a")
        c.check(f"check-atlas {name} exit code", code == (0 if ok else 1))
    s2 = parse_atlas(fixture_text("torus-s2"))
    code, out = _cli("dual", "--fixture", "torus-s2", "--generator", "B", "--json")
    c.check("dual torus-s2 matches the library",
            code == 0 and json.loads(out)["B"]["dual"] == show_map(dual(s2.generators["B"]), s2.constants))
    code, out = _cli("dual", "--fixture", "torus-not-s2", "--generator", "B")
    c.check("dual torus-not-s2 exits 1 with 'not Aut^Delta'", code == 1 and b"not Aut^Delta" in out)
    code, out = _cli("classify-map", "--fixture", "susy4-torus", "--json")
    c.check("classify-map susy4-torus: all in Aut^omega",
            code == 0 and all(v["aut_omega"] for v in json.loads(out).values()))

    runs = [("check-atlas", "--fixture", "p1-split-(-1,-1)-shifted", "--json"),
            ("lift", "--fixture", "torus-s2", "--json"),
            ("classify-field", "--named", "H1:2", "--json")]
    for argv in runs:
        first, second = _cli(*argv), _cli(*argv)
        c.check(f"{' '.join(argv[:3])}: byte-identical JSON", first == second and first[1])

    sig = AlgebraSignature.make(2, 1)
    rng = random.Random(4242)
    for k in range(200):
        x = rand_element(rng, sig, terms=rng.randint(0, 6), min_e=-8, max_e=8, complex_ok=True)
        c.check(f"round trip #{k}", parse_expression(serialize(x), sig) == x)
    return c


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    checks = CRITERIA[n]()
    assert _record(n, checks), RESULTS[n]


if __name__ == "__main__":
    bad = 0
    for n in sorted(CRITERIA):
        bad += not _record(n, CRITERIA[n]())
    sys.exit(1 if bad else 0)
