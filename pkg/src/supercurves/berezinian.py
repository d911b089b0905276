"""Supermatrices, Berezinian, supertrace and Jacobians of coordinate changes.

Jacobian convention: rows are indexed by source coordinates ``(z | theta)``,
columns by the components ``(F | phi)`` of the map, and entries are left
derivatives ``d_{x_a} Phi_b``.  With this layout the left chain rule reads
``J(Phi o Psi) = J(Psi) * (J(Phi) o Psi)``, hence
``Ber J(Phi o Psi) = Ber J(Psi) * (Ber J(Phi) o Psi)``.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import List, Optional, Sequence

from . import linalg
from .gaussian import GaussianRational
from .superalgebra import AlgebraError, AlgebraSignature, NotInvertible, SuperElement, SuperMap, substitute

__all__ = [
    "SuperMatrix",
    "BerezinSection",
    "berezinian",
    "berezinian_schur",
    "supertrace",
    "matrix_exp",
    "exp_element",
    "jacobian",
    "ber_map",
    "pullback_berezin",
    "is_aut_delta",
    "is_unit_one",
]

Block = List[List[SuperElement]]


def _copy(block: Sequence[Sequence[SuperElement]]) -> Block:
    return [list(row) for row in block]


class SuperMatrix:
    """Even supermatrix ``[[A, B], [C, D]]`` of size p|q."""

    __slots__ = ("signature", "A", "B", "C", "D", "p", "q")

    def __init__(self, A, B, C, D, signature: Optional[AlgebraSignature] = None):
        A, B, C, D = _copy(A), _copy(B), _copy(C), _copy(D)
        p, q = len(A), len(D)
        if any(len(r) != p for r in A) or any(len(r) != q for r in D):
            raise ValueError("diagonal blocks must be square")
        if len(B) != p or any(len(r) != q for r in B) or len(C) != q or any(len(r) != p for r in C):
            raise ValueError("off-diagonal block dimensions are inconsistent")
        sig = signature
        for blk in (A, B, C, D):
            for row in blk:
                for x in row:
                    sig = sig or x.signature
                    if x.signature != sig:
                        raise AlgebraError("entries live in different signatures")
        if sig is None:
            raise ValueError("cannot infer the signature of an empty matrix")
        for blk, par, name in ((A, 0, "A"), (D, 0, "D"), (B, 1, "B"), (C, 1, "C")):
            for row in blk:
                for x in row:
                    if not x.is_zero() and x.parity() != par:
                        raise AlgebraError(f"block {name} must have {'even' if par == 0 else 'odd'} entries")
        self.signature = sig
        self.A, self.B, self.C, self.D = A, B, C, D
        self.p, self.q = p, q

    @classmethod
    def identity(cls, sig: AlgebraSignature, p: int, q: int) -> "SuperMatrix":
        return cls(linalg.identity(sig, p), linalg.zeros(sig, p, q), linalg.zeros(sig, q, p),
                   linalg.identity(sig, q), sig)

    @classmethod
    def from_full(cls, full: Sequence[Sequence[SuperElement]], p: int, sig=None) -> "SuperMatrix":
        A = [row[:p] for row in full[:p]]
        B = [row[p:] for row in full[:p]]
        C = [row[:p] for row in full[p:]]
        D = [row[p:] for row in full[p:]]
        return cls(A, B, C, D, sig)

    def full(self) -> Block:
        top = [ra + rb for ra, rb in zip(self.A, self.B)]
        bottom = [rc + rd for rc, rd in zip(self.C, self.D)]
        return top + bottom

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        if (self.p, self.q) != (other.p, other.q):
            raise ValueError("size mismatch")
        prod = linalg.matmul(self.full(), other.full(), self.signature)
        return SuperMatrix.from_full(prod, self.p, self.signature)

    def __add__(self, other: "SuperMatrix") -> "SuperMatrix":
        return SuperMatrix.from_full(linalg.matadd(self.full(), other.full()), self.p, self.signature)

    def scale(self, c) -> "SuperMatrix":
        return SuperMatrix.from_full(linalg.matscale(self.full(), c), self.p, self.signature)

    def is_zero(self) -> bool:
        return linalg.is_zero(self.full())

    def map_entries(self, fn) -> "SuperMatrix":
        return SuperMatrix.from_full([[fn(x) for x in row] for row in self.full()], self.p, self.signature)

    def agrees(self, other: "SuperMatrix") -> bool:
        return all(x.agrees(y) for rx, ry in zip(self.full(), other.full()) for x, y in zip(rx, ry))

    def __eq__(self, other):
        return isinstance(other, SuperMatrix) and self.full() == other.full()

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.full()))

    def to_json(self):
        return [[str(x) for x in row] for row in self.full()]

    def __repr__(self):
        return f"SuperMatrix({self.to_json()})"


def berezinian(T: SuperMatrix) -> SuperElement:
    """``det(A - B D^{-1} C) det(D)^{-1}``."""
    sig = T.signature
    if T.q == 0:
        return linalg.det(T.A, sig)
    try:
        Dinv = linalg.inverse(T.D, sig)
    except NotInvertible:
        raise NotInvertible("D block is not invertible") from None
    if T.p == 0:
        return linalg.det(Dinv, sig)
    schur = linalg.matsub(T.A, linalg.matmul(linalg.matmul(T.B, Dinv, sig), T.C, sig))
    return linalg.det(schur, sig) * linalg.det(Dinv, sig)


def berezinian_schur(T: SuperMatrix) -> SuperElement:
    """Complementary form ``det(A) det(D - C A^{-1} B)^{-1}`` (needs A invertible)."""
    sig = T.signature
    if T.p == 0:
        return linalg.det(T.D, sig).inverse()
    Ainv = linalg.inverse(T.A, sig)
    if T.q == 0:
        return linalg.det(T.A, sig)
    schur = linalg.matsub(T.D, linalg.matmul(linalg.matmul(T.C, Ainv, sig), T.B, sig))
    return linalg.det(T.A, sig) * linalg.det(schur, sig).inverse()


def supertrace(T: SuperMatrix) -> SuperElement:
    return linalg.trace(T.A, T.signature) - linalg.trace(T.D, T.signature)


def _cap(sig: AlgebraSignature, size: int) -> int:
    width = 64 if sig.e_max is None else sig.e_max - sig.e_min + 1
    return (sig.n_odd + 1) * (size + 1) * max(width, 1)


def matrix_exp(T: SuperMatrix) -> SuperMatrix:
    """``sum_k T^k / k!`` for a nilpotent supermatrix."""
    sig = T.signature
    n = T.p + T.q
    total = SuperMatrix.identity(sig, T.p, T.q)
    power = total
    for k in range(1, _cap(sig, n) + 1):
        power = power @ T
        if power.is_zero():
            rows = [[x.with_prec(y.prec) for x, y in zip(rt, rp)] for rt, rp in zip(total.full(), power.full())]
            return SuperMatrix.from_full(rows, T.p, sig)
        total = total + power.scale(GaussianRational(Fraction(1, factorial(k))))
    raise AlgebraError("matrix exponential series did not terminate (matrix is not nilpotent)")


def exp_element(x: SuperElement) -> SuperElement:
    """``exp(x)`` for ``x`` with vanishing reduced part, or with a z-adically small one."""
    sig = x.signature
    if not x.reduce().is_zero() and (x.reduce().min_exponent() or 0) <= 0:
        raise AlgebraError("exp needs an element with nilpotent or positive-order reduced part")
    total = sig.one()
    term = sig.one()
    for k in range(1, _cap(sig, 1) + 1):
        term = (term * x).scale(GaussianRational(Fraction(1, k)))
        if term.is_zero():
            return total.with_prec(term.prec)
        total = total + term
    raise AlgebraError("exponential series did not terminate")


def jacobian(Phi: SuperMap) -> SuperMatrix:
    sig = Phi.signature
    N = sig.N
    F, phi = Phi.F, Phi.phi
    A = [[F.d_z()]]
    B = [[p.d_z() for p in phi]]
    C = [[F.d_odd(a)] for a in range(N)]
    D = [[p.d_odd(a) for p in phi] for a in range(N)]
    return SuperMatrix(A, B, C, D, sig)


def ber_map(Phi: SuperMap) -> SuperElement:
    """``Ber(J Phi)``."""
    return berezinian(jacobian(Phi))


class BerezinSection:
    """The section ``f [dz | dtheta^1 ... dtheta^N]``."""

    __slots__ = ("f",)

    def __init__(self, f: SuperElement):
        if f.parity() != 0:
            raise AlgebraError("Berezinian density must be even")
        self.f = f

    @property
    def signature(self):
        return self.f.signature

    def is_unit(self) -> bool:
        return not self.f.reduce().is_zero()

    def __eq__(self, other):
        return isinstance(other, BerezinSection) and self.f == other.f

    def __hash__(self):
        return hash(self.f)

    def __repr__(self):
        return f"BerezinSection({self.f})"


def pullback_berezin(Phi: SuperMap, delta: BerezinSection) -> BerezinSection:
    """``Phi^*(f Delta_0) = Ber(J Phi) (f o Phi) Delta_0``."""
    return BerezinSection(ber_map(Phi) * substitute(delta.f, Phi))


def is_unit_one(b: SuperElement) -> bool:
    """``b = 1`` on every coefficient known exactly, with the constant term known."""
    if b.prec is not None and b.prec[0] <= 0:
        return False
    return b.agrees(b.signature.one())


def is_aut_delta(Phi: SuperMap) -> bool:
    return is_unit_one(ber_map(Phi))
