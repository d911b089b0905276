"""Vector fields on the formal 1|N superdisk.

A field is ``X = a d_z + sum_i b_i d_theta_i`` acting by
``X(f) = a * d_z f + sum_i b_i * d_theta_i f`` with left odd derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Optional, Sequence, Tuple

from . import linalg
from .forms import OneForm, pullback_form, standard_omega
from .gaussian import GaussianRational
from .superalgebra import AlgebraError, AlgebraSignature, SuperElement, SuperMap, substitute, transport

__all__ = [
    "VectorField",
    "FieldClass",
    "apply",
    "bracket",
    "sdiv",
    "sdiv_wrt",
    "classify",
    "s2_defect",
    "lie_derivative_multiplier",
    "exp_field",
    "log_map",
    "affine_jet",
    "affine_inverse",
    "decompose",
    "is_pronilpotent",
    "is_unipotent",
    "L",
    "J0",
    "J1",
    "J2",
    "K",
    "G",
    "H",
    "contact_field",
    "named_field",
    "NonTerminating",
]


class NonTerminating(AlgebraError):
    pass


class VectorField:
    __slots__ = ("signature", "a", "b", "declared_parity")

    def __init__(self, a: SuperElement, b: Sequence[SuperElement], declared_parity: Optional[int] = None):
        sig = a.signature
        b = tuple(b)
        if len(b) != sig.N:
            raise ValueError(f"expected {sig.N} odd-direction coefficients")
        self.signature = sig
        self.a = a
        self.b = b
        self.declared_parity = declared_parity
        if declared_parity is not None:
            if self.parity() not in (declared_parity, None) or not self._homogeneous_as(declared_parity):
                raise AlgebraError("coefficients do not match the declared parity")

    @classmethod
    def zero(cls, sig: AlgebraSignature) -> "VectorField":
        return cls(sig.zero(), [sig.zero()] * sig.N)

    @classmethod
    def d_z(cls, sig: AlgebraSignature) -> "VectorField":
        return cls(sig.one(), [sig.zero()] * sig.N)

    @classmethod
    def d_theta(cls, sig: AlgebraSignature, i: int) -> "VectorField":
        b = [sig.zero()] * sig.N
        b[i - 1] = sig.one()
        return cls(sig.zero(), b)

    def _homogeneous_as(self, p: int) -> bool:
        if not self.a.is_zero() and self.a.parity() != p:
            return False
        return all(c.is_zero() or c.parity() == 1 - p for c in self.b)

    def parity(self) -> Optional[int]:
        """0 or 1 when homogeneous (the zero field counts as even), else None."""
        for p in (0, 1):
            if self._homogeneous_as(p):
                return p
        return None

    def components(self) -> Tuple[SuperElement, ...]:
        return (self.a,) + self.b

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components())

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.a + other.a, [x + y for x, y in zip(self.b, other.b)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.a - other.a, [x - y for x, y in zip(self.b, other.b)])

    def __neg__(self):
        return VectorField(-self.a, [-x for x in self.b])

    def scale(self, c) -> "VectorField":
        return VectorField(self.a * c, [x * c for x in self.b])

    def left_mul(self, g: SuperElement) -> "VectorField":
        """The field ``g X``."""
        return VectorField(g * self.a, [g * x for x in self.b])

    def __call__(self, f: SuperElement) -> SuperElement:
        return apply(self, f)

    def __eq__(self, other):
        return isinstance(other, VectorField) and self.components() == other.components()

    def __hash__(self):
        return hash(self.components())

    def __str__(self):
        name = self.signature.even_name
        pairs = [(self.a, f"d_{name}")] + [(x, f"d_th{i + 1}") for i, x in enumerate(self.b)]
        parts = [f"({x}) {d}" for x, d in pairs if not x.is_zero()]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"VectorField({self})"


def apply(X: VectorField, f: SuperElement) -> SuperElement:
    if f.signature != X.signature:
        from .superalgebra import SignatureMismatch
        raise SignatureMismatch("field and element live in different signatures")
    out = X.a * f.d_z() if not X.a.is_zero() else f.signature.zero()
    for i, c in enumerate(X.b):
        if not c.is_zero():
            out = out + c * f.d_odd(i)
    return out


def _require_parity(X: VectorField) -> int:
    p = X.parity()
    if p is None:
        raise AlgebraError("vector field is not homogeneous")
    return p


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Graded commutator, read off on the coordinates."""
    p, q = _require_parity(X), _require_parity(Y)
    sig = X.signature
    sign = -1 if (p & q) else 1
    coords = [sig.z()] + [sig.theta(i + 1) for i in range(sig.N)]
    comps = []
    for x in coords:
        xy = apply(X, apply(Y, x))
        yx = apply(Y, apply(X, x))
        comps.append(xy - yx if sign > 0 else xy + yx)
    return VectorField(comps[0], comps[1:])


def sdiv(X: VectorField) -> SuperElement:
    """``d_z a + sum_i (-1)^{|b_i|} d_theta_i b_i`` (parity taken term by term)."""
    out = X.a.d_z()
    for i, c in enumerate(X.b):
        out = out + c.even_part().d_odd(i) - c.odd_part().d_odd(i)
    return out


def sdiv_wrt(X: VectorField, f: SuperElement) -> SuperElement:
    """Divergence with respect to the volume ``f Delta_0`` (``f`` a unit)."""
    if f.reduce().is_zero():
        raise AlgebraError("density is not a unit")
    return sdiv(X) + apply(X, f) * f.inverse()


@dataclass(frozen=True)
class FieldClass:
    in_S1N: bool
    in_S2: bool
    in_K1N: bool
    multiplier: Optional[SuperElement] = None

    def as_dict(self):
        return {
            "in_S1N": self.in_S1N,
            "in_S2": self.in_S2,
            "in_K1N": self.in_K1N,
            "multiplier": None if self.multiplier is None else str(self.multiplier),
        }


def s2_defect(X: VectorField) -> SuperElement:
    """The theta^1 theta^2 coefficient of ``X(z)`` (N = 2)."""
    sig = X.signature
    if sig.N != 2:
        raise ValueError("the S(2) condition needs N = 2")
    return apply(X, sig.z()).theta_coefficient((0, 1))


def _extend(sig: AlgebraSignature, extra: int) -> AlgebraSignature:
    return AlgebraSignature(sig.even_name, sig.N, sig.M + extra, sig.e_min, sig.e_max,
                            sig.exact_polynomial_mode)


def _embed(x: SuperElement, sig: AlgebraSignature) -> SuperElement:
    # new parameters are appended after the existing ones, so no reordering
    return transport(x, sig)


def _restrict(x: SuperElement, sig: AlgebraSignature) -> SuperElement:
    try:
        return transport(x, sig)
    except AlgebraError:
        raise AlgebraError("element depends on auxiliary parameters") from None


def lie_derivative_multiplier(X: VectorField, form: Optional[OneForm] = None) -> Optional[SuperElement]:
    """Return ``f`` with ``L_X form = f form``, or ``None``.

    The Lie derivative is the first-order part of the pullback along the
    infinitesimal flow ``(z + eps a | theta + eps b)`` with ``eps`` a product of
    fresh odd parameters of the parity of ``X``.
    """
    sig = X.signature
    p = _require_parity(X)
    form = form or standard_omega(sig)
    extra = 2 if p == 0 else 1
    big = _extend(sig, extra)
    first = sig.n_odd
    eps_idx = tuple(range(first, first + extra))
    eps = big.monomial(0, eps_idx)
    coords = [big.z()] + [big.theta(i + 1) for i in range(sig.N)]
    comps = [c + eps * _embed(v, big) for c, v in zip(coords, X.components())]
    flow = SuperMap(comps[0], comps[1:], check=False)
    big_form = OneForm(_embed(form.f0, big), [_embed(c, big) for c in form.f])
    pulled = pullback_form(flow, big_form)

    def first_order(c: SuperElement) -> SuperElement:
        for idx in eps_idx:
            c = c.d_odd(idx)
        return _restrict(c, sig)

    lie = OneForm(first_order(pulled.f0), [first_order(c) for c in pulled.f])
    from .forms import proportionality
    return proportionality(lie, form)


def classify(X: VectorField, form: Optional[OneForm] = None) -> FieldClass:
    sig = X.signature
    s1 = sdiv(X).vanishes()
    s2 = s1 and sig.N == 2 and s2_defect(X).vanishes()
    try:
        mult = lie_derivative_multiplier(X, form)
    except AlgebraError:
        mult = None
    return FieldClass(s1, s2, mult is not None, mult)


# ---------------------------------------------------------------------------
# named generators (N = 2 unless a signature says otherwise)


def _sig(sig):
    return sig if sig is not None else AlgebraSignature.make(2, 0)


def _euler(sig: AlgebraSignature, coeff: SuperElement):
    """``coeff * sum_i theta^i d_theta_i``."""
    return [coeff * sig.theta(i + 1) for i in range(sig.N)]


def L(m: int, sig: AlgebraSignature = None) -> VectorField:
    """``-z^{m+1} d_z - (m+1)/2 z^m sum theta^i d_theta_i``."""
    sig = _sig(sig)
    half = GaussianRational(Fraction(-(m + 1), 2))
    return VectorField(-sig.z(m + 1), _euler(sig, sig.z(m).scale(half)), 0)


def J0(m: int, sig: AlgebraSignature = None) -> VectorField:
    sig = _sig(sig)
    return VectorField(sig.zero(), [sig.z(m) * sig.theta(1), -(sig.z(m) * sig.theta(2))], 0)


def J1(m: int, sig: AlgebraSignature = None) -> VectorField:
    """``z^m theta^1 d_theta_2``."""
    sig = _sig(sig)
    return VectorField(sig.zero(), [sig.zero(), sig.z(m) * sig.theta(1)], 0)


def J2(m: int, sig: AlgebraSignature = None) -> VectorField:
    """``z^m theta^2 d_theta_1``."""
    sig = _sig(sig)
    return VectorField(sig.zero(), [sig.z(m) * sig.theta(2), sig.zero()], 0)


def K(sig: AlgebraSignature = None) -> VectorField:
    """``theta^1 theta^2 d_z``."""
    sig = _sig(sig)
    return VectorField(sig.theta(1) * sig.theta(2), [sig.zero()] * sig.N, 0)


def G(i: int, e: int, sig: AlgebraSignature = None) -> VectorField:
    """Odd field ``-z^e d_theta_i``; ``e`` stands for the half-integer label m + 1/2."""
    sig = _sig(sig)
    b = [sig.zero()] * sig.N
    b[i - 1] = -sig.z(e)
    return VectorField(sig.zero(), b, 1)


def H(i: int, e: int, sig: AlgebraSignature = None) -> VectorField:
    """Odd field ``z^e theta^i d_z + e z^{e-1} theta^i sum_j theta^j d_theta_j``.

    The coefficient of the Euler part is fixed by divergence-freeness for the
    left derivative.
    """
    sig = _sig(sig)
    th = sig.theta(i)
    return VectorField(sig.z(e) * th, _euler(sig, (sig.z(e - 1) * th).scale(e)), 1)


def contact_field(f: SuperElement) -> VectorField:
    """``D^f = f d_z + 1/2 (-1)^{|f|} sum_i (D^i f) D^i`` with ``D^i = theta^i d_z + d_theta_i``."""
    sig = f.signature
    p = f.parity()
    if p is None:
        raise AlgebraError("contact generator must be homogeneous")
    half = GaussianRational(Fraction(1, 2) if p == 0 else Fraction(-1, 2))
    a = f
    b = [sig.zero()] * sig.N
    for i in range(sig.N):
        th = sig.theta(i + 1)
        Dif = (th * f.d_z() + f.d_odd(i)).scale(half)
        a = a + Dif * th
        b[i] = b[i] + Dif
    return VectorField(a, b, p)


def named_field(name: str, sig: AlgebraSignature = None) -> VectorField:
    """Parse ``L:m``, ``J0:m``, ``J1:m``, ``J2:m``, ``K``, ``G1:e``, ``G2:e``, ``H1:e``, ``H2:e``."""
    sig = _sig(sig)
    head, _, arg = name.partition(":")
    try:
        if head == "K" and not arg:
            return K(sig)
        k = int(arg)
        if head == "L":
            return L(k, sig)
        if head in ("J0", "J1", "J2"):
            return {"J0": J0, "J1": J1, "J2": J2}[head](k, sig)
        if head[:1] in ("G", "H") and head[1:].isdigit():
            return (G if head[0] == "G" else H)(int(head[1:]), k, sig)
    except ValueError:
        pass
    raise ValueError(f"unknown generator {name!r}")


# ---------------------------------------------------------------------------
# exponential and logarithm


def _iteration_cap(sig: AlgebraSignature) -> int:
    width = 64 if sig.e_max is None else sig.e_max - sig.e_min + 1
    return (width + 2) * (sig.N + 1) + sig.M + 2


def is_pronilpotent(X: VectorField) -> bool:
    """Syntactic filtration test: every eta-free term must raise the order.

    Orders: ``z`` counts 1 and each theta counts more than any z-range, so a term
    of ``a`` needs ``e >= 2`` or some theta, and a term of ``b_i`` needs two
    thetas or one theta with ``e >= 1``.
    """
    N = X.signature.N
    for (e, S), _ in X.a.items():
        if any(s >= N for s in S):
            continue
        if not S and e < 2:
            return False
    for bi in X.b:
        for (e, S), _ in bi.items():
            if any(s >= N for s in S):
                continue
            nth = len(S)
            if nth == 0 or (nth == 1 and e < 1):
                return False
    return True


def _exp_on(X: VectorField, x: SuperElement, cap: int) -> SuperElement:
    total = x
    term = x
    for k in range(1, cap + 1):
        term = apply(X, term)
        if term.is_zero():
            # a vanishing but truncated term still caps the precision
            return total.with_prec(term.prec)
        total = total + term.scale(GaussianRational(Fraction(1, factorial(k))))
    raise NonTerminating("exponential series did not terminate within the degree bound")


def exp_field(X: VectorField) -> SuperMap:
    """The map ``(exp(X) z | exp(X) theta^1, ...)`` for even pro-nilpotent X."""
    if X.parity() != 0:
        raise AlgebraError("exp needs an even vector field")
    if not is_pronilpotent(X):
        raise NonTerminating("vector field is not pro-nilpotent")
    sig = X.signature
    cap = _iteration_cap(sig)
    F = _exp_on(X, sig.z(), cap)
    phi = [_exp_on(X, sig.theta(i + 1), cap) for i in range(sig.N)]
    return SuperMap(F, phi, check=False)


def affine_jet(Phi: SuperMap) -> SuperMap:
    """Part of ``Phi`` affine in z and linear in theta.

    ``F_0`` keeps the theta-free terms with ``e in {0, 1}``; ``phi_0^i`` keeps the
    ``e = 0`` terms of theta-degree at most one.
    """
    sig = Phi.signature
    N = sig.N

    def nth(S):
        return sum(1 for s in S if s < N)

    F0 = SuperElement(sig, {(e, S): c for (e, S), c in Phi.F.items() if e in (0, 1) and nth(S) == 0})
    phi0 = [SuperElement(sig, {(e, S): c for (e, S), c in p.items() if e == 0 and nth(S) <= 1})
            for p in Phi.phi]
    return SuperMap(F0, phi0, check=False)


def _affine_parts(Phi0: SuperMap):
    sig = Phi0.signature
    N = sig.N
    a = Phi0.F.d_z()
    c = Phi0.F - a * sig.z()
    Lm = [[p.theta_coefficient((j,)) for j in range(N)] for p in Phi0.phi]
    kappa = [p.theta_coefficient(()) for p in Phi0.phi]
    return a, c, Lm, kappa


def affine_inverse(Phi0: SuperMap) -> SuperMap:
    """Inverse of an affine-linear map ``(a z + c | L theta + kappa)``."""
    sig = Phi0.signature
    a, c, Lm, kappa = _affine_parts(Phi0)
    if a.reduce().is_zero():
        raise AlgebraError("linear part is not invertible (dz coefficient)")
    try:
        Linv = linalg.inverse(Lm, sig) if sig.N else []
    except AlgebraError:
        raise AlgebraError("linear part is not invertible (odd block)") from None
    F = (sig.z() - c) * a.inverse()
    shifted = [sig.theta(j + 1) - kappa[j] for j in range(sig.N)]
    phi = []
    for i in range(sig.N):
        acc = sig.zero()
        for j in range(sig.N):
            acc = acc + Linv[i][j] * shifted[j]
        phi.append(acc)
    return SuperMap(F, phi, check=False)


def is_unipotent(Phi: SuperMap) -> bool:
    """Tangent to the identity: reduced ``F = z + O(z^2)`` and reduced
    ``d phi^i / d theta^j = delta_ij + O(z)``."""
    sig = Phi.signature
    low = Phi.F.reduce().filter_terms(lambda e, S: e <= 1)
    if low != sig.z():
        return False
    for i, p in enumerate(Phi.phi):
        for j in range(sig.N):
            c = p.d_odd(j).reduce().filter_terms(lambda e, S: e <= 0)
            if c != (sig.one() if i == j else sig.zero()):
                return False
    return True


def log_map(Phi: SuperMap) -> VectorField:
    """Inverse of :func:`exp_field` on unipotent maps."""
    if not is_unipotent(Phi):
        raise AlgebraError("map is not unipotent")
    sig = Phi.signature
    cap = _iteration_cap(sig)
    comps = []
    for x in [sig.z()] + [sig.theta(i + 1) for i in range(sig.N)]:
        g = x
        total = sig.zero()
        for k in range(1, cap + 2):
            g = substitute(g, Phi) - g
            if g.is_zero():
                total = total.with_prec(g.prec)
                break
            coef = GaussianRational(Fraction((-1) ** (k + 1), k))
            total = total + g.scale(coef)
        else:
            raise NonTerminating("logarithm series did not terminate within the degree bound")
        comps.append(total)
    X = VectorField(comps[0], comps[1:])
    if not is_pronilpotent(X):
        raise NonTerminating("logarithm is not pro-nilpotent")
    return X


def decompose(Phi: SuperMap) -> Tuple[SuperMap, VectorField]:
    """Split ``Phi = Phi0 o exp(X)`` with ``Phi0`` the affine-linear jet.

    Read on functions this is ``Phi^* = exp(X) o Phi0^*``: the unipotent factor
    acts on the coordinate expressions of ``Phi0``.
    """
    Phi0 = affine_jet(Phi)
    inv = affine_inverse(Phi0)
    U = inv.compose(Phi)
    return Phi0, log_map(U)
