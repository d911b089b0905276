"""One-forms ``f0 dz + sum_i f_i dtheta^i`` and their pullbacks.

Sign convention: a coefficient always sits to the left of its differential and
the exterior derivative of a function ``G`` is

    dG = (d_z G) dz + sum_i (-1)^(|G|+1) (d_theta_i G) dtheta^i

with ``d_theta_i`` the left derivative.  Pulling back ``sum_k c_k dx^k`` along
``Phi`` gives ``sum_k (c_k o Phi) d(Phi^k)``.
"""

from __future__ import annotations

from typing import Optional, Sequence, Tuple

from .superalgebra import AlgebraSignature, SuperElement, SuperMap, substitute

__all__ = ["OneForm", "exterior_derivative", "pullback_form", "proportionality", "standard_omega"]


class OneForm:
    __slots__ = ("signature", "f0", "f")

    def __init__(self, f0: SuperElement, f: Sequence[SuperElement]):
        sig = f0.signature
        f = tuple(f)
        if len(f) != sig.N:
            raise ValueError(f"expected {sig.N} dtheta coefficients")
        self.signature = sig
        self.f0 = f0
        self.f = f

    def components(self) -> Tuple[SuperElement, ...]:
        return (self.f0,) + self.f

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(self.f0 + other.f0, [a + b for a, b in zip(self.f, other.f)])

    def left_mul(self, g: SuperElement) -> "OneForm":
        return OneForm(g * self.f0, [g * c for c in self.f])

    def __eq__(self, other):
        return isinstance(other, OneForm) and self.components() == other.components()

    def __hash__(self):
        return hash(self.components())

    def __str__(self):
        parts = [f"({self.f0}) d{self.signature.even_name}"]
        parts += [f"({c}) dth{i + 1}" for i, c in enumerate(self.f)]
        return " + ".join(parts)

    __repr__ = __str__


def standard_omega(sig: AlgebraSignature, pairs: Optional[Sequence[Tuple[int, int]]] = None) -> OneForm:
    """``dz + sum theta^a dtheta^b`` over ``pairs`` (1-based); default ``a = b``."""
    if pairs is None:
        pairs = [(i, i) for i in range(1, sig.N + 1)]
    f = [sig.zero() for _ in range(sig.N)]
    for a, b in pairs:
        f[b - 1] = f[b - 1] + sig.theta(a)
    return OneForm(sig.one(), f)


def exterior_derivative(G: SuperElement) -> OneForm:
    sig = G.signature
    ev, od = G.even_part(), G.odd_part()
    coeffs = [od.d_odd(i) - ev.d_odd(i) for i in range(sig.N)]
    return OneForm(G.d_z(), coeffs)


def pullback_form(phi: SuperMap, form: OneForm) -> OneForm:
    sig = phi.signature
    total = OneForm(sig.zero(), [sig.zero()] * sig.N)
    for coeff, image in zip(form.components(), phi.components()):
        if coeff.is_zero():
            continue
        total = total + exterior_derivative(image).left_mul(substitute(coeff, phi))
    return total


def proportionality(lhs: OneForm, form: OneForm) -> Optional[SuperElement]:
    """Return ``f`` with ``lhs = f * form`` checked coefficient-wise, else ``None``.

    ``f`` is read off from the ``dz`` coefficient, which must be a unit multiple
    of the ``dz`` coefficient of ``form``.
    """
    if form.f0.is_zero():
        raise ValueError("form must have an invertible dz coefficient")
    f = lhs.f0 * form.f0.inverse()
    for got, ref in zip(lhs.f, form.f):
        if not got.agrees(f * ref):
            return None
    return f
