"""Supercommutative coordinate ring k((z))[theta^1..theta^N, eta^1..eta^M].

Elements are finite sums of monomials ``c * z^e * g_{s1} ... g_{sk}`` where the
odd generators are indexed ``0..N-1`` (the coordinates theta) followed by
``N..N+M-1`` (the base parameters eta).  Monomials always store their odd
generators in increasing index order; the Koszul sign is paid when sorting.

Exponents live in a closed window ``[e_min, e_max]``.  Products that land
outside the window are dropped and the result records a precision: the
exponent, per Grassmann degree, below which every coefficient is exact
(``truncated`` is true as soon as anything was lost).  Identities between
truncated results are checked with :meth:`SuperElement.agrees`.
Series (inverses, compositions with negative powers) are expanded at ``z = 0``,
i.e. in increasing powers of ``z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from . import precision as pr
from .gaussian import GaussianRational, as_gaussian
from .precision import Prec

__all__ = [
    "transport",
    "AlgebraSignature",
    "GaussianRational",
    "Monomial",
    "SuperElement",
    "SuperMap",
    "AlgebraError",
    "SignatureMismatch",
    "ExponentOverflow",
    "CompositionError",
    "NotInvertible",
    "differentiate",
    "substitute",
    "reduce",
    "merge_sign",
]

Monomial = Tuple[int, Tuple[int, ...]]


class AlgebraError(ValueError):
    """Base class for algebraic failures."""


class SignatureMismatch(AlgebraError):
    pass


class ExponentOverflow(AlgebraError):
    pass


class CompositionError(AlgebraError):
    pass


class NotInvertible(AlgebraError):
    pass



@lru_cache(maxsize=1 << 16)
def merge_sign(s: Tuple[int, ...], t: Tuple[int, ...]):
    """Return ``(sign, u)`` with ``g_s * g_t = sign * g_u``, or ``None`` if zero."""
    if not s:
        return 1, t
    if not t:
        return 1, s
    inversions = 0
    merged = []
    i = j = 0
    ls, lt = len(s), len(t)
    while i < ls and j < lt:
        a, b = s[i], t[j]
        if a == b:
            return None
        if a < b:
            merged.append(a)
            i += 1
        else:
            # b jumps over the remaining ls - i generators of s
            inversions += ls - i
            merged.append(b)
            j += 1
    merged.extend(s[i:])
    merged.extend(t[j:])
    return (-1 if inversions & 1 else 1), tuple(merged)


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class AlgebraSignature:
    """Shape of the ring: even variable name, odd counts and exponent window."""

    even_name: str = "z"
    N: int = 2
    M: int = 0
    e_min: int = -8
    e_max: Optional[int] = 8
    exact_polynomial_mode: bool = False

    def __post_init__(self):
        if self.even_name not in ("z", "t"):
            raise ValueError("even variable must be named 'z' or 't'")
        if self.N < 0 or self.M < 0:
            raise ValueError("odd counts must be non-negative")
        if self.exact_polynomial_mode:
            object.__setattr__(self, "e_min", 0)
            object.__setattr__(self, "e_max", None)
        else:
            if self.e_max is None or not (self.e_min <= 0 <= self.e_max):
                raise ValueError("window must satisfy e_min <= 0 <= e_max")

    @classmethod
    def make(cls, N=2, M=0, window=(-8, 8), even_name="z", exact=False):
        lo, hi = window
        return cls(even_name, N, M, lo, hi, exact)

    @property
    def window(self):
        return (self.e_min, self.e_max)

    @property
    def n_odd(self) -> int:
        return self.N + self.M

    def with_odd(self, N: int, M: Optional[int] = None) -> "AlgebraSignature":
        return AlgebraSignature(self.even_name, N, self.M if M is None else M,
                                self.e_min, self.e_max, self.exact_polynomial_mode)

    def theta_indices(self) -> range:
        return range(self.N)

    def eta_indices(self) -> range:
        return range(self.N, self.N + self.M)

    def generator_name(self, idx: int) -> str:
        if idx < self.N:
            return f"th{idx + 1}"
        return f"eta{idx - self.N + 1}"

    # element constructors

    def zero(self) -> "SuperElement":
        return SuperElement(self, {})

    def one(self) -> "SuperElement":
        return self.const(1)

    def const(self, c) -> "SuperElement":
        return SuperElement(self, {(0, ()): as_gaussian(c)})

    def z(self, e: int = 1) -> "SuperElement":
        return self.monomial(e, ())

    def theta(self, i: int) -> "SuperElement":
        """The odd coordinate theta^i (1-based)."""
        if not 1 <= i <= self.N:
            raise ValueError(f"theta index {i} out of range 1..{self.N}")
        return self.monomial(0, (i - 1,))

    def eta(self, k: int) -> "SuperElement":
        """The odd base parameter eta^k (1-based)."""
        if not 1 <= k <= self.M:
            raise ValueError(f"eta index {k} out of range 1..{self.M}")
        return self.monomial(0, (self.N + k - 1,))

    def monomial(self, e: int, S: Iterable[int], c=1) -> "SuperElement":
        S = tuple(S)
        if len(set(S)) != len(S):
            return self.zero()
        sign = permutation_sign(S)
        return SuperElement(self, {(e, tuple(sorted(S))): as_gaussian(c) * sign})

    def allows(self, e: int) -> bool:
        if e < self.e_min:
            if self.exact_polynomial_mode:
                raise ExponentOverflow("exponent overflow: negative power in exact polynomial mode")
            return False
        return self.e_max is None or e <= self.e_max


class SuperElement:
    """An element of the supercommutative ring, exact below its precision.

    ``prec`` is ``None`` for exact elements and otherwise a tuple indexed by
    Grassmann degree (see :mod:`supercurves.precision`).
    """

    __slots__ = ("signature", "_terms", "prec")

    def __init__(self, signature: AlgebraSignature, terms: Mapping[Monomial, GaussianRational] = None,
                 prec: Prec = None):
        clean: Dict[Monomial, GaussianRational] = {}
        P = list(prec) if prec is not None else None
        for (e, S), c in (terms or {}).items():
            c = as_gaussian(c)
            if not c:
                continue
            if not signature.allows(e):
                P = _dropped(P, signature, e, len(S))
                continue
            clean[(e, S)] = c
        self.signature = signature
        self._terms = clean
        self.prec = pr.norm(P)

    @classmethod
    def _raw(cls, signature, terms, prec: Prec = None):
        obj = cls.__new__(cls)
        obj.signature = signature
        obj._terms = terms
        obj.prec = prec
        return obj

    # precision

    @property
    def truncated(self) -> bool:
        """True when some coefficient may have been lost to the window."""
        return self.prec is not None

    def precision(self) -> Optional[int]:
        """Lowest exponent at which some coefficient may be inexact."""
        return pr.scalar(self.prec)

    def valuations(self) -> list:
        """Per Grassmann degree, the lowest exponent that may be nonzero."""
        v = pr.exact(self.signature.n_odd + 1)
        for (e, S) in self._terms:
            d = len(S)
            if e < v[d]:
                v[d] = e
        if self.prec is not None:
            v = [min(a, b) for a, b in zip(v, self.prec)]
        return v

    def valuation(self) -> Optional[int]:
        v = min(self.valuations())
        return None if v >= pr.INF else v

    def agrees(self, other: "SuperElement") -> bool:
        """Equality of every coefficient that both operands know exactly."""
        self._check(other)
        P = pr.pmin(self.prec, other.prec)
        if P is None:
            return self._terms == other._terms
        keys = set(self._terms) | set(other._terms)
        zero = GaussianRational(0)
        for k in keys:
            if k[0] < P[len(k[1])] and self._terms.get(k, zero) != other._terms.get(k, zero):
                return False
        return True

    def vanishes(self) -> bool:
        """Zero on every coefficient that is known exactly."""
        return self.agrees(self.signature.zero())

    def known_part(self) -> "SuperElement":
        """Drop the coefficients at or above the precision (keeps ``prec``)."""
        if self.prec is None:
            return self
        P = self.prec
        kept = {k: c for k, c in self._terms.items() if k[0] < P[len(k[1])]}
        return SuperElement._raw(self.signature, kept, P)

    def with_prec(self, prec: Prec) -> "SuperElement":
        return SuperElement._raw(self.signature, self._terms, pr.pmin(self.prec, prec))

    # basic views

    @property
    def terms(self) -> Mapping[Monomial, GaussianRational]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    def coefficient(self, e: int, S: Iterable[int] = ()) -> GaussianRational:
        return self._terms.get((e, tuple(S)), GaussianRational(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def parity(self) -> Optional[int]:
        """0 or 1 for homogeneous elements (0 for zero), ``None`` otherwise."""
        ps = {len(S) & 1 for (_, S) in self._terms}
        if not ps:
            return 0
        if len(ps) == 1:
            return ps.pop()
        return None

    def is_even(self) -> bool:
        return self.parity() == 0

    def is_odd(self) -> bool:
        return self.parity() == 1 or not self._terms

    def _by_degree(self, keep) -> "SuperElement":
        terms = {k: c for k, c in self._terms.items() if keep(len(k[1]))}
        P = None
        if self.prec is not None:
            P = pr.norm([p if keep(d) else pr.INF for d, p in enumerate(self.prec)])
        return SuperElement._raw(self.signature, terms, P)

    def even_part(self) -> "SuperElement":
        return self._by_degree(lambda d: not d & 1)

    def odd_part(self) -> "SuperElement":
        return self._by_degree(lambda d: d & 1)

    def reduce(self) -> "SuperElement":
        """Set every odd generator to zero."""
        return self._by_degree(lambda d: d == 0)

    def nilpotent_part(self) -> "SuperElement":
        return self._by_degree(lambda d: d > 0)

    def filter_terms(self, pred) -> "SuperElement":
        """Keep the terms ``(e, S)`` accepted by ``pred`` (precision kept as is)."""
        return SuperElement._raw(self.signature, {k: c for k, c in self._terms.items() if pred(*k)}, self.prec)

    def min_exponent(self) -> Optional[int]:
        return min((e for e, _ in self._terms), default=None)

    def max_exponent(self) -> Optional[int]:
        return max((e for e, _ in self._terms), default=None)

    def is_scalar(self) -> bool:
        return all(k == (0, ()) for k in self._terms)

    def scalar(self) -> GaussianRational:
        if not self.is_scalar():
            raise AlgebraError("element is not a scalar")
        return self._terms.get((0, ()), GaussianRational(0))

    def is_constant(self) -> bool:
        """True when independent of z and of every theta (eta allowed)."""
        N = self.signature.N
        return all(e == 0 and all(s >= N for s in S) for (e, S) in self._terms)

    def theta_free(self) -> bool:
        N = self.signature.N
        return all(all(s >= N for s in S) for (_, S) in self._terms)

    def split_theta(self) -> Dict[Tuple[int, ...], "SuperElement"]:
        """Write ``f = sum_S theta^S * g_S`` with ``g_S`` free of theta."""
        N = self.signature.N
        out: Dict[Tuple[int, ...], Dict[Monomial, GaussianRational]] = {}
        for (e, S), c in self._terms.items():
            k = 0
            while k < len(S) and S[k] < N:
                k += 1
            out.setdefault(S[:k], {})[(e, S[k:])] = c
        return {S: SuperElement._raw(self.signature, t, self._stripped_prec(len(S))) for S, t in out.items()}

    def _stripped_prec(self, s: int) -> Prec:
        if self.prec is None:
            return None
        D = len(self.prec)
        return pr.norm([self.prec[d + s] if d + s < D else pr.INF for d in range(D)])

    def theta_coefficient(self, S: Iterable[int]) -> "SuperElement":
        """The theta-free ``g_S`` in the expansion of :meth:`split_theta` (0-based S)."""
        S = tuple(S)
        g = self.split_theta().get(S)
        if g is None:
            return SuperElement._raw(self.signature, {}, self._stripped_prec(len(S)))
        return g

    # arithmetic

    def _check(self, other: "SuperElement"):
        if other.signature != self.signature:
            raise SignatureMismatch("elements live in different signatures")

    def _lift(self, other) -> "SuperElement":
        if isinstance(other, SuperElement):
            self._check(other)
            return other
        return self.signature.const(other)

    def __add__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for k, c in o._terms.items():
            v = terms.get(k)
            v = c if v is None else v + c
            if v:
                terms[k] = v
            else:
                terms.pop(k, None)
        return SuperElement._raw(self.signature, terms, pr.pmin(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return SuperElement._raw(self.signature, {k: -c for k, c in self._terms.items()}, self.prec)

    def __sub__(self, other):
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "SuperElement":
        c = as_gaussian(c)
        if not c:
            return SuperElement._raw(self.signature, {}, self.prec)
        return SuperElement._raw(self.signature, {k: v * c for k, v in self._terms.items()}, self.prec)

    def __mul__(self, other):
        if not isinstance(other, SuperElement):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._check(other)
        sig = self.signature
        out: Dict[Monomial, GaussianRational] = {}
        P = _product_prec(self, other)
        for (e1, S1), c1 in self._terms.items():
            for (e2, S2), c2 in other._terms.items():
                m = merge_sign(S1, S2)
                if m is None:
                    continue
                sgn, S = m
                e = e1 + e2
                if not sig.allows(e):
                    P = _dropped(P, sig, e, len(S))
                    continue
                c = c1 * c2
                if sgn < 0:
                    c = -c
                key = (e, S)
                v = out.get(key)
                v = c if v is None else v + c
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return SuperElement._raw(sig, out, pr.norm(P))

    def __rmul__(self, other):
        # scalars are even, so they commute
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, SuperElement):
            return self * other.inverse()
        return self.scale(as_gaussian(other).inverse())

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = self.signature.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, SuperElement):
            return self.signature == other.signature and self._terms == other._terms
        try:
            return self == self.signature.const(other)
        except TypeError:
            return False

    def __hash__(self):
        return hash((self.signature, frozenset(self._terms.items())))

    # calculus

    def d_z(self) -> "SuperElement":
        out = {}
        P = pr.shift(self.prec, -1)
        P = list(P) if P is not None else None
        for (e, S), c in self._terms.items():
            if e == 0:
                continue
            if not self.signature.allows(e - 1):
                P = _dropped(P, self.signature, e - 1, len(S))
                continue
            out[(e - 1, S)] = c * e
        return SuperElement._raw(self.signature, out, pr.norm(P))

    def d_odd(self, idx: int) -> "SuperElement":
        """Left derivative along the odd generator with 0-based index ``idx``."""
        out = {}
        for (e, S), c in self._terms.items():
            if idx not in S:
                continue
            pos = S.index(idx)
            out[(e, S[:pos] + S[pos + 1:])] = -c if pos & 1 else c
        return SuperElement._raw(self.signature, out, self._stripped_prec(1))

    def d_theta(self, i: int) -> "SuperElement":
        """Left derivative along theta^i (1-based)."""
        if not 1 <= i <= self.signature.N:
            raise ValueError(f"theta index {i} out of range")
        return self.d_odd(i - 1)

    # inversion

    def inverse(self) -> "SuperElement":
        """Multiplicative inverse; the reduced part must be nonzero."""
        red = self.reduce()
        if red.is_zero():
            raise NotInvertible("element is not a unit (reduced part vanishes)")
        rinv = _reduced_power(red, -1)
        nil = self.nilpotent_part()
        if nil.is_zero() and nil.prec is None:
            return rinv
        # f^{-1} = r^{-1} * sum_j (-n r^{-1})^j
        x = -(nil * rinv)
        total = self.signature.one()
        power = self.signature.one()
        for _ in range(self.signature.n_odd):
            power = power * x
            if power.is_zero() and power.prec is None:
                break
            total = total + power
        return rinv * total

    # substitution

    def substitute(self, target: "SuperMap") -> "SuperElement":
        return substitute(self, target)

    def __call__(self, target: "SuperMap") -> "SuperElement":
        return substitute(self, target)

    # formatting

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    def __str__(self):
        from .expressions import serialize
        return serialize(self)

    def __repr__(self):
        p = self.precision()
        flag = "" if p is None else f", O(z^{p})"
        return f"SuperElement({str(self)!r}{flag})"


def _dropped(P, sig: AlgebraSignature, e: int, d: int):
    """Record that a term ``z^e`` of Grassmann degree ``d`` fell outside the window."""
    P = list(P) if P is not None else pr.exact(sig.n_odd + 1)
    bound = sig.e_max + 1 if e > sig.e_max else pr.LOST
    if bound < P[d]:
        P[d] = bound
    return P


def _product_prec(a: SuperElement, b: SuperElement):
    if a.prec is None and b.prec is None:
        return None
    D = a.signature.n_odd + 1
    out = pr.exact(D)
    if a.prec is not None:
        out = [min(x, y) for x, y in zip(out, pr.convolve(a.prec, b.valuations()))]
    if b.prec is not None:
        out = [min(x, y) for x, y in zip(out, pr.convolve(a.valuations(), b.prec))]
    return out


# ---------------------------------------------------------------------------
# reduced Laurent series helpers (dicts exponent -> coefficient)


def _series_mul(a: Dict[int, GaussianRational], b: Dict[int, GaussianRational], upper: Optional[int]):
    out: Dict[int, GaussianRational] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            if upper is not None and e > upper:
                continue
            v = out.get(e)
            v = ca * cb if v is None else v + ca * cb
            out[e] = v
    return {e: c for e, c in out.items() if c}


def _series_pow_unit(h: Dict[int, GaussianRational], power: int, upper: Optional[int]):
    """(1 + h)^power for h with positive exponents, as a series truncated above ``upper``.

    For negative ``power`` the binomial series is used, which requires a finite ``upper``.
    """
    if power >= 0:
        result = {0: GaussianRational(1)}
        base = {0: GaussianRational(1), **h}
        for _ in range(power):
            result = _series_mul(result, base, upper)
        return result
    if upper is None:
        raise ExponentOverflow("exponent overflow: inverse series does not terminate in exact polynomial mode")
    if not h:
        return {0: GaussianRational(1)}
    # (1+h)^p = sum_k binom(p, k) h^k ; h^k has order >= k
    result = {0: GaussianRational(1)}
    hk = {0: GaussianRational(1)}
    binom = GaussianRational(1)
    k = 0
    while True:
        k += 1
        hk = _series_mul(hk, h, upper)
        if not hk:
            break
        binom = binom * GaussianRational(power - k + 1) / k
        for e, c in hk.items():
            v = result.get(e, GaussianRational(0)) + binom * c
            result[e] = v
    return {e: c for e, c in result.items() if c}


def _normalize_reduced(red: "SuperElement"):
    """Return ``(c, k, h)`` with ``red = c z^k (1 + h)``, h of positive order."""
    terms = {e: c for (e, S), c in red.items()}
    k = min(terms)
    c = terms[k]
    cinv = c.inverse()
    h = {e - k: v * cinv for e, v in terms.items() if e != k}
    return c, k, h


def _reduced_power(red: SuperElement, power: int) -> SuperElement:
    """``red**power`` for a reduced element, negative powers expanded at z = 0."""
    sig = red.signature
    if power >= 0:
        return red ** power
    if red.is_zero():
        raise NotInvertible("zero has no inverse")
    c, k, h = _normalize_reduced(red)
    shift = k * power
    if h and sig.e_max is None:
        raise ExponentOverflow("exponent overflow: inverse series does not terminate in exact polynomial mode")
    upper = None if sig.e_max is None else sig.e_max - shift
    series = _series_pow_unit(h, power, upper)
    cp = c ** power
    out = {}
    P = pr.exact(sig.n_odd + 1)
    if h:
        # an infinite series is exact only through the top of the window
        P[0] = sig.e_max + 1
    if red.prec is not None:
        P[0] = min(P[0], pr.add(red.prec[0], k * (power - 1)))
    for e, v in series.items():
        ee = e + shift
        if not sig.allows(ee):
            P = _dropped(P, sig, ee, 0)
            continue
        out[(ee, ())] = v * cp
    return SuperElement._raw(sig, out, pr.norm(P))



def _reduced_inverse(red: SuperElement) -> SuperElement:
    return _reduced_power(red, -1)


# ---------------------------------------------------------------------------
# module-level operations


def transport(x: SuperElement, sig: AlgebraSignature, index_map: Optional[Mapping[int, int]] = None) -> SuperElement:
    """Re-express ``x`` in ``sig``, renaming odd generators by ``index_map``.

    Unmapped indices keep their value.  Koszul signs from reordering are
    applied, and the precision vector is resized to the new odd count.
    """
    index_map = index_map or {}
    limit = sig.n_odd
    terms = {}
    for (e, S), c in x.items():
        T = [index_map.get(s, s) for s in S]
        if any(t >= limit or t < 0 for t in T) or len(set(T)) != len(T):
            raise AlgebraError("odd generator has no image in the target signature")
        sign = permutation_sign(T)
        terms[(e, tuple(sorted(T)))] = c if sign > 0 else -c
    P = None
    if x.prec is not None:
        D = limit + 1
        P = list(x.prec[:D]) + [pr.INF] * max(0, D - len(x.prec))
    return SuperElement(sig, terms, pr.norm(P))


def reduce(f: SuperElement) -> SuperElement:
    return f.reduce()


def differentiate(f: SuperElement, wrt: str) -> SuperElement:
    """Differentiate along ``z``/``t`` or ``thK``; ``etaK`` is rejected."""
    sig = f.signature
    if wrt in ("z", "t"):
        if wrt != sig.even_name:
            raise ValueError(f"unknown even variable {wrt!r}")
        return f.d_z()
    if wrt.startswith("eta"):
        raise ValueError("not a coordinate direction: odd base parameters are constants")
    if wrt.startswith("th"):
        return f.d_theta(int(wrt[2:]))
    raise ValueError(f"unknown direction {wrt!r}")


class SuperMap:
    """A coordinate change ``(F | phi^1, ..., phi^N)``.

    Composition is composition of maps of points: ``(self @ other)`` has
    components ``F(other)``, ``phi(other)``, so that pulling back a function
    along ``self @ other`` first substitutes ``self`` and then ``other``.
    """

    __slots__ = ("signature", "F", "phi")

    def __init__(self, F: SuperElement, phi: Sequence[SuperElement], check: bool = True):
        sig = F.signature
        phi = tuple(phi)
        if len(phi) != sig.N:
            raise ValueError(f"expected {sig.N} odd images, got {len(phi)}")
        for p in phi:
            if p.signature != sig:
                raise SignatureMismatch("map components live in different signatures")
        self.signature = sig
        self.F = F
        self.phi = phi
        if check:
            self.validate()

    def validate(self):
        if self.F.parity() != 0:
            raise AlgebraError("even image F must be even")
        for p in self.phi:
            if p.parity() != 1 and not p.is_zero():
                raise AlgebraError("odd images must be odd")
        if self.F.reduce().is_zero():
            raise AlgebraError("reduced even image vanishes")
        if self.signature.N and _reduced_det(self.odd_linear_block()).is_zero():
            raise AlgebraError("reduced odd Jacobian block is singular")

    def odd_linear_block(self):
        """Reduced matrix ``[reduced d phi^i / d theta^j]``."""
        N = self.signature.N
        return [[self.phi[i].d_odd(j).reduce() for j in range(N)] for i in range(N)]

    @classmethod
    def identity(cls, sig: AlgebraSignature) -> "SuperMap":
        return cls(sig.z(), [sig.theta(i + 1) for i in range(sig.N)], check=False)

    def components(self):
        return (self.F,) + self.phi

    def compose(self, other: "SuperMap") -> "SuperMap":
        """``self o other`` as maps of points."""
        if other.signature != self.signature:
            raise SignatureMismatch("maps live in different signatures")
        return SuperMap(substitute(self.F, other), [substitute(p, other) for p in self.phi], check=False)

    __matmul__ = compose

    def pullback(self, f: SuperElement) -> SuperElement:
        return substitute(f, self)

    @property
    def truncated(self) -> bool:
        return any(c.truncated for c in self.components())

    @property
    def prec(self) -> Prec:
        return pr.pmin_all(c.prec for c in self.components())

    def agrees(self, other: "SuperMap") -> bool:
        """Component-wise :meth:`SuperElement.agrees`."""
        return all(a.agrees(b) for a, b in zip(self.components(), other.components()))

    def __eq__(self, other):
        return isinstance(other, SuperMap) and self.components() == other.components()

    def __hash__(self):
        return hash(self.components())

    def __str__(self):
        return f"({self.F} | {', '.join(str(p) for p in self.phi)})"

    def __repr__(self):
        return f"SuperMap{self}"


def _reduced_det(m) -> SuperElement:
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _reduced_det(minor)
        if j & 1:
            term = -term
        total = term if total is None else total + term
    return total


def _compose_reduced(h: Dict[int, GaussianRational], F_red: SuperElement, cache: Dict[int, SuperElement]):
    """Evaluate the reduced Laurent polynomial ``h`` at ``F_red``."""
    sig = F_red.signature
    total = sig.zero()
    for e, c in h.items():
        p = cache.get(e)
        if p is None:
            if e >= 0:
                p = F_red ** e
            else:
                if F_red.is_zero():
                    raise CompositionError("unsupported reduced composition shape: zero reduced image")
                p = _reduced_power(F_red, e)
            cache[e] = p
        total = total + p.scale(c)
    return total


def _composition_error(f: SuperElement, target: "SuperMap", F_red: SuperElement, nu_powers) -> Prec:
    """Precision lost because ``f`` itself is only known modulo its precision.

    An unknown term ``z^p g_S`` becomes ``sum_k (z^p)^(k)(F_red) nu^k phi^S / k!``,
    which is bounded with valuation vectors.
    """
    if f.prec is None:
        return None
    sig = f.signature
    D = sig.n_odd + 1
    N, M = sig.N, sig.M
    vF = F_red.valuation()
    out = pr.exact(D)
    # valuation vectors of theta-monomials in the images, grouped by size
    from itertools import combinations
    phi_vals = {0: [pr.exact(D)]}
    phi_vals[0][0][0] = 0
    for s in range(1, N + 1):
        phi_vals[s] = []
        for S in combinations(range(N), s):
            prod = sig.one()
            for i in S:
                prod = prod * target.phi[i]
            phi_vals[s].append(prod.valuations())
    nu_vals = [n.valuations() for n in nu_powers]
    for d, p in enumerate(f.prec):
        if p >= pr.INF:
            continue
        for s in range(0, min(d, N) + 1):
            t = d - s
            if t > M:
                continue
            for k, vn in enumerate(nu_vals):
                if p <= pr.LOST or vF is None or vF <= 0:
                    base = pr.LOST
                else:
                    base = pr.clamp((p - k) * vF)
                for vp in phi_vals[s]:
                    v = pr.convolve(vn, vp)
                    # eta^T only raises the degree by t
                    for dd in range(D - t):
                        if v[dd] < pr.INF:
                            out[dd + t] = min(out[dd + t], pr.add(base, v[dd]))
    return pr.norm(out)


def substitute(f: SuperElement, target: SuperMap) -> SuperElement:
    """Ring homomorphism ``z -> F``, ``theta^i -> phi^i``, eta fixed.

    ``f(F_red + nu)`` is expanded as the finite Taylor sum
    ``sum_k f^(k)(F_red) nu^k / k!`` with ``nu`` nilpotent.
    """
    sig = f.signature
    if target.signature != sig:
        raise SignatureMismatch("element and map live in different signatures")
    F = target.F
    F_red = F.reduce()
    nu = F.nilpotent_part()
    nu_powers = [sig.one()]
    while True:
        nxt = nu_powers[-1] * nu
        if nxt.is_zero() and nxt.prec is None:
            break
        nu_powers.append(nxt)
        if len(nu_powers) > sig.n_odd + 1:
            break
    power_cache: Dict[int, SuperElement] = {}

    def eval_even(g: Dict[int, GaussianRational]) -> SuperElement:
        out = sig.zero()
        deriv = dict(g)
        for k, nk in enumerate(nu_powers):
            if k:
                deriv = {e - 1: c * e for e, c in deriv.items() if e != 0}
            if not deriv:
                break
            val = _compose_reduced(deriv, F_red, power_cache)
            out = out + (val * nk).scale(GaussianRational(1) / factorial(k))
        return out

    N = sig.N
    result = sig.zero()
    groups: Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], Dict[int, GaussianRational]] = {}
    for (e, S), c in f.items():
        k = 0
        while k < len(S) and S[k] < N:
            k += 1
        groups.setdefault((S[:k], S[k:]), {})[e] = c
    phi_cache: Dict[Tuple[int, ...], SuperElement] = {(): sig.one()}

    def phi_prod(S):
        v = phi_cache.get(S)
        if v is None:
            v = phi_prod(S[:-1]) * target.phi[S[-1]]
            phi_cache[S] = v
        return v

    for (Sth, Seta), g in sorted(groups.items()):
        val = eval_even(g)
        if Seta:
            val = val * SuperElement._raw(sig, {(0, Seta): GaussianRational(1)})
        result = result + phi_prod(Sth) * val
    return result.with_prec(_composition_error(f, target, F_red, nu_powers))
