import random

import pytest
from hypothesis import given, strategies as st

from supercurves import AlgebraSignature, GaussianRational, SuperMap
from supercurves.derivations import (
    G,
    H,
    J0,
    J1,
    J2,
    K,
    L,
    VectorField,
    apply,
    bracket,
    classify,
    contact_field,
    decompose,
    exp_field,
    is_pronilpotent,
    log_map,
    named_field,
    sdiv,
)

from randdata import SIG20, SIG21, rand_element, rand_s2_field

seeds = st.integers(0, 10**6)
sig = SIG20
z, th1, th2 = sig.z(), sig.theta(1), sig.theta(2)
TAU = GaussianRational(0, 1)


def rand_field(rng, parity, s=sig):
    a = rand_element(rng, s, parity, terms=2, min_e=-2, max_e=3)
    b = [rand_element(rng, s, 1 - parity, terms=2, min_e=-2, max_e=3) for _ in range(s.N)]
    return VectorField(a, b, parity)


def test_apply_examples():
    assert apply(VectorField.d_z(sig), sig.z(2)) == z.scale(2)
    assert apply(K(sig), z) == th1 * th2
    assert apply(L(0, sig), z * th1) == (z * th1).scale(GaussianRational(-3) / 2)


def test_bracket_examples():
    d1 = VectorField.d_theta(sig, 1)
    assert bracket(d1, d1).is_zero()
    # D+ = d_rho, D- = rho d_z + d_theta on the 1|2 disk with coordinates (z | theta, rho)
    d_plus = VectorField(sig.zero(), [sig.zero(), sig.one()])
    d_minus = VectorField(th2, [sig.one(), sig.zero()])
    assert bracket(d_plus, d_minus) == VectorField.d_z(sig)
    assert bracket(L(1, sig), L(-1, sig)) == L(0, sig).scale(2)


def test_sdiv_examples():
    assert sdiv(K(sig)).is_zero()
    assert sdiv(L(0, sig)).is_zero()
    assert sdiv(VectorField(z, [sig.zero(), sig.zero()])) == sig.one()


def test_classify_examples():
    k = classify(K(sig))
    assert k.in_S1N and not k.in_S2
    for m in range(-3, 4):
        for X in (L(m, sig), J0(m, sig), J1(m, sig), J2(m, sig)):
            assert classify(X).in_S2
    euler = classify(contact_field(z))
    assert euler.in_K1N and euler.multiplier == sig.one()


@given(seeds, st.integers(0, 1), st.integers(0, 1), st.integers(0, 1))
def test_bracket_antisymmetry_and_jacobi(seed, p, q, r):
    rng = random.Random(seed)
    X, Y, W = rand_field(rng, p), rand_field(rng, q), rand_field(rng, r)
    assert bracket(X, Y) == bracket(Y, X).scale(-((-1) ** (p * q)))
    lhs = bracket(X, bracket(Y, W))
    rhs = bracket(bracket(X, Y), W) + bracket(Y, bracket(X, W)).scale((-1) ** (p * q))
    assert all(u.agrees(v) for u, v in zip(lhs.components(), rhs.components()))


@given(seeds, st.integers(0, 1), st.integers(0, 1))
def test_divergence_cocycle(seed, p, q):
    rng = random.Random(seed)
    X, Y = rand_field(rng, p), rand_field(rng, q)
    lhs = sdiv(bracket(X, Y))
    rhs = apply(X, sdiv(Y)) - apply(Y, sdiv(X)).scale((-1) ** (p * q))
    assert lhs.agrees(rhs)


def test_named_fields():
    assert named_field("L:2", sig) == L(2, sig)
    assert named_field("K", sig) == K(sig)
    assert named_field("H1:-1", sig) == H(1, -1, sig)
    assert named_field("G2:0", sig) == G(2, 0, sig)
    with pytest.raises(ValueError):
        named_field("Q:1", sig)


def test_exp_examples():
    lam = GaussianRational(3)
    assert exp_field(K(sig).scale(lam)).F == z + (th1 * th2).scale(lam)
    assert exp_field(VectorField.zero(sig)) == SuperMap.identity(sig)
    s4 = AlgebraSignature.make(2, 0, (-8, 4))
    Phi = exp_field(VectorField(s4.z(2), [s4.zero(), s4.zero()]))
    assert Phi.F.agrees(s4.z() + s4.z(2) + s4.z(3) + s4.z(4))


def test_exp_rejects_non_pronilpotent():
    assert not is_pronilpotent(VectorField.d_z(sig))
    with pytest.raises(Exception):
        exp_field(VectorField.d_z(sig))


@given(seeds)
def test_exp_log_round_trip(seed):
    X = rand_s2_field(random.Random(seed), SIG21, with_k=True)
    Y = log_map(exp_field(X))
    assert all(u.agrees(v) for u, v in zip(X.components(), Y.components()))


def test_decompose_examples():
    ident = SuperMap.identity(sig)
    Phi0, X = decompose(ident)
    assert Phi0 == ident and X.is_zero()
    s = SIG21
    tau = s.const(TAU)
    B = SuperMap(s.z() + tau + s.theta(1) * s.eta(1), [s.theta(1), s.theta(2)])
    Phi0, X = decompose(B)
    assert Phi0 == SuperMap(s.z() + tau, [s.theta(1), s.theta(2)])
    assert X == VectorField(s.theta(1) * s.eta(1), [s.zero(), s.zero()])
    B2 = SuperMap(z + sig.const(TAU) + th1 * th2, [th1, th2])
    _, X2 = decompose(B2)
    assert X2 == K(sig) and not classify(X2).in_S2


@given(seeds)
def test_decompose_recomposes(seed):
    rng = random.Random(seed)
    from randdata import rand_aut_delta
    Phi = rand_aut_delta(rng)
    Phi0, X = decompose(Phi)
    assert Phi0.compose(exp_field(X)).agrees(Phi)
