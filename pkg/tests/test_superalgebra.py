import random

import pytest
from hypothesis import given, strategies as st

from supercurves import AlgebraSignature, GaussianRational, SuperElement, SuperMap, differentiate, substitute
from supercurves.superalgebra import AlgebraError, NotInvertible, reduce, transport

from randdata import rand_element

SIG = AlgebraSignature.make(2, 1)
z, th1, th2, eta = SIG.z(), SIG.theta(1), SIG.theta(2), SIG.eta(1)
seeds = st.integers(0, 10**6)


def test_koszul_sign():
    assert th1 * th2 == -(th2 * th1)
    assert (th1 * th1).is_zero()


def test_small_products():
    one = SIG.one()
    assert (one + th1 * th2) * (one - th1 * th2) == one
    x = z + th1 * eta
    assert x * x == SIG.z(2) + (z * th1 * eta).scale(2)


def test_derivatives():
    assert differentiate(SIG.z(3), "z") == SIG.z(2).scale(3)
    assert (th1 * th2).d_theta(1) == th2
    assert (th1 * th2).d_theta(2) == -th1
    # left derivative: d_th1 (eta th1) = -eta
    assert (z + eta * th1).d_theta(1) == -eta


@given(seeds)
def test_odd_derivative_anticommutes_with_multiplication(seed):
    # {d_th1, th1 .} = id
    f = rand_element(random.Random(seed), SIG, terms=4)
    assert (th1 * f).d_theta(1) + th1 * f.d_theta(1) == f


def test_substitution_examples():
    tau = GaussianRational(0, 1)
    m = SuperMap(z + SIG.const(tau) + th1 * th2, [th1, th2])
    assert substitute(z, m) == z + SIG.const(tau) + th1 * th2
    m2 = SuperMap(z + th1 * th2, [th1, th2])
    assert substitute(SIG.z(2), m2) == SIG.z(2) + (z * th1 * th2).scale(2)
    m3 = SuperMap(z * (SIG.one() + th1 * th2), [th1, th2])
    assert substitute(SIG.z(-1), m3).agrees(SIG.z(-1) * (SIG.one() - th1 * th2))


def test_reduce():
    tau = SIG.const(GaussianRational(0, 1))
    assert reduce(z + tau + th1 * th2) == z + tau
    assert reduce(th1 * eta).is_zero()
    assert reduce(SIG.const(5)) == SIG.const(5)


@given(seeds)
def test_ring_laws(seed):
    rng = random.Random(seed)
    a, b, c = (rand_element(rng, SIG, terms=3) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    for x in (a, b):
        for y in (b, c):
            xe, xo, ye, yo = x.even_part(), x.odd_part(), y.even_part(), y.odd_part()
            assert xe * ye == ye * xe
            assert xe * yo == yo * xe
            assert xo * yo == -(yo * xo)


@given(seeds)
def test_leibniz(seed):
    rng = random.Random(seed)
    a = rand_element(rng, SIG, parity=1, terms=3)
    b = rand_element(rng, SIG, terms=3)
    assert (a * b).d_z() == a.d_z() * b + a * b.d_z()
    for k in range(SIG.n_odd):
        assert (a * b).d_odd(k) == a.d_odd(k) * b - a * b.d_odd(k)


@given(seeds)
def test_substitute_is_a_ring_homomorphism(seed):
    rng = random.Random(seed)
    m = SuperMap(z + rand_element(rng, SIG, 0, terms=2, max_e=2, nilpotent=True),
                 [th1 + rand_element(rng, SIG, 1, terms=1, min_e=1, max_e=2), th2])
    a, b = rand_element(rng, SIG, terms=3), rand_element(rng, SIG, terms=3)
    assert substitute(a * b, m).agrees(substitute(a, m) * substitute(b, m))
    assert substitute(a + b, m).agrees(substitute(a, m) + substitute(b, m))


def test_inverse_of_unit_and_nonunit():
    u = SIG.const(2) + th1 * th2 + z
    assert (u * u.inverse()).agrees(SIG.one())
    with pytest.raises(NotInvertible):
        (th1 * th2).inverse()


def test_window_truncation_marks_precision():
    small = AlgebraSignature.make(2, 0, (-2, 3))
    x = small.z(2) * small.z(2)
    assert x.is_zero() and x.truncated


def test_transport_reorders_with_sign():
    big = AlgebraSignature.make(2, 2)
    x = th1 * eta
    y = transport(x, big, {0: 1, 2: 0})
    # th1 eta -> th2 th1 = -th1 th2
    assert y == -(big.theta(1) * big.theta(2))
    with pytest.raises(AlgebraError):
        transport(eta, AlgebraSignature.make(2, 0))


def test_map_validation():
    with pytest.raises(AlgebraError):
        SuperMap(z, [th1, th1])
    with pytest.raises(AlgebraError):
        SuperMap(th1, [th1, th2])
