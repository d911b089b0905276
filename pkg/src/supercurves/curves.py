"""Coordinate changes of 1|N super curves and their atlases.

Maps compose as point maps: ``(Phi @ Psi)`` applies ``Psi`` first.  A cover
atlas stores ``Phi_ij``, the change from the coordinates of chart ``i`` to
those of chart ``j``, and the cocycle condition reads
``Phi_jk o Phi_ij = Phi_ik``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from . import precision as pr
from .berezinian import BerezinSection, ber_map, is_unit_one
from .derivations import (
    NonTerminating,
    VectorField,
    classify,
    decompose,
    exp_field,
    K as K_field,
    s2_defect,
)
from .forms import OneForm, proportionality, pullback_form, standard_omega
from .gaussian import GaussianRational
from .superalgebra import AlgebraError, AlgebraSignature, SuperElement, SuperMap, substitute, transport

__all__ = [
    "SuperMap",
    "OneForm",
    "Atlas",
    "SplitCurveData",
    "CurveError",
    "NotAutDelta",
    "NotAutDeltaS2",
    "CocycleError",
    "pullback_form",
    "is_aut_omega",
    "is_aut_Delta",
    "extract_lambda",
    "lifted_signature",
    "lift",
    "lift_closed_form",
    "lift_multiplier",
    "determinant_rhs",
    "lifted_omega",
    "alpha",
    "ad_alpha",
    "project_lifted",
    "dual",
    "verify_atlas",
    "classify_atlas",
    "split_curve",
    "dual_split",
    "compatible_coordinates",
    "kappa_shift",
]


class CurveError(AlgebraError):
    pass


class NotAutDelta(CurveError):
    """The Berezinian of the Jacobian is not 1."""


class NotAutDeltaS2(CurveError):
    """Berezinian-preserving, but not generated by S(2) fields."""


class CocycleError(CurveError):
    pass


# ---------------------------------------------------------------------------
# forms and automorphism classes


def is_aut_omega(Phi: SuperMap, form: Optional[OneForm] = None) -> Optional[SuperElement]:
    """The multiplier ``f`` with ``Phi^* form = f form``, or ``None``."""
    form = form or standard_omega(Phi.signature)
    return proportionality(pullback_form(Phi, form), form)


def _require_n2(Phi: SuperMap):
    if Phi.signature.N != 2:
        raise CurveError("the S(2) test needs N = 2")


def _require_aut_delta(Phi: SuperMap) -> None:
    b = ber_map(Phi)
    if not is_unit_one(b):
        raise NotAutDelta(f"not Aut^delta: Ber(J Phi) = {b}")


def extract_lambda(Phi: SuperMap) -> SuperElement:
    """``lambda`` with ``F = F_0 + theta^1 theta^2 lambda d_z F_0 + (odd in theta)``.

    Here ``F_0`` is the theta-free part of ``F``.  For Berezinian-preserving
    maps the ratio is independent of ``z`` and ``theta``.
    """
    _require_n2(Phi)
    _require_aut_delta(Phi)
    F = Phi.F
    G = F.theta_coefficient((0, 1))
    F0 = F.theta_coefficient(())
    lam = (G * F0.d_z().inverse()).known_part()
    N = Phi.signature.N
    if any(e != 0 or any(s < N for s in S) for (e, S) in lam):
        raise CurveError(f"lambda is not constant: {lam}")
    if lam.truncated and lam.precision() is not None and lam.precision() <= 0:
        raise CurveError("lambda is not determined within the window")
    return SuperElement(lam.signature, lam.terms)


def is_aut_Delta(Phi: SuperMap) -> bool:
    """Membership in the group generated by S(2) fields and ``Aut_0^delta``.

    Raises :class:`NotAutDelta` when ``Phi`` does not even preserve the
    Berezinian.  Maps with an affine-linear jet are decomposed as
    ``Phi_0 o exp(X)``; other shapes (inversions) use ``lambda(Phi) = 0``.
    """
    _require_n2(Phi)
    _require_aut_delta(Phi)
    try:
        Phi0, X = decompose(Phi)
    except (AlgebraError, NonTerminating):
        return extract_lambda(Phi).vanishes()
    if not is_unit_one(ber_map(Phi0)):
        return False
    return classify(X).in_S2


# ---------------------------------------------------------------------------
# the SUSY_2n lift


def lifted_signature(sig: AlgebraSignature) -> AlgebraSignature:
    return AlgebraSignature(sig.even_name, 2 * sig.N, sig.M, sig.e_min, sig.e_max, sig.exact_polynomial_mode)


def _up(x: SuperElement, big: AlgebraSignature) -> SuperElement:
    n = x.signature.N
    shift = {k: k + n for k in range(n, x.signature.n_odd)}
    return transport(x, big, shift)


def _down(x: SuperElement, small: AlgebraSignature) -> Optional[SuperElement]:
    """Inverse of :func:`_up`; ``None`` if a known coefficient involves rho."""
    n = small.N
    shift = {k + n: k for k in range(n, small.n_odd)}
    P = x.prec
    kept = {}
    for (e, S), c in x.items():
        known = P is None or e < P[len(S)]
        if any(n <= s < 2 * n for s in S):
            if known:
                return None
            continue
        kept[(e, S)] = c
    return transport(SuperElement(x.signature, kept, P), small, shift)


def lifted_omega(big: AlgebraSignature) -> OneForm:
    """``dz + rho^1 dtheta^1 + ... + rho^n dtheta^n`` on ``1|2n``."""
    n = big.N // 2
    return standard_omega(big, [(n + i, i) for i in range(1, n + 1)])


def _lift_system(Phi: SuperMap):
    sig = Phi.signature
    n = sig.N
    big = lifted_signature(sig)
    F = _up(Phi.F, big)
    phi = [_up(p, big) for p in Phi.phi]

    def D(k, f):
        return big.theta(n + k + 1) * f.d_z() + f.d_odd(k)

    Mx = [[D(k, p) for p in phi] for k in range(n)]
    r = [D(k, F) for k in range(n)]
    return big, F, phi, Mx, r


def lift(Phi: SuperMap) -> SuperMap:
    """``(F | phi, eta~)`` with ``D_k F = sum_j eta~^j D_k phi^j``, ``D_k = rho^k d_z + d_theta^k``."""
    big, F, phi, Mx, r = _lift_system(Phi)
    eta = linalg.solve(Mx, r, big) if phi else []
    return SuperMap(F, phi + list(eta), check=False)


def determinant_rhs(Phi: SuperMap) -> SuperElement:
    """``det(D_k phi^j)`` on the lifted chart."""
    big, _, _, Mx, _ = _lift_system(Phi)
    return linalg.det(Mx, big)


def lift_multiplier(Phi: SuperMap) -> SuperElement:
    """``d_z F + sum_j eta~^j d_z phi^j`` (the dz coefficient of the pulled-back form)."""
    L = lift(Phi)
    n = Phi.signature.N
    total = L.F.d_z()
    for j in range(n):
        total = total + L.phi[n + j] * L.phi[j].d_z()
    return total


def lift_closed_form(Phi: SuperMap) -> SuperMap:
    """The n = 2 lift written out explicitly.

    With ``A = (d_i phi^j)``, ``a = (d_i F)``, ``v = (d_z phi^j)`` and
    ``b = Ber(J Phi)``::

        eta~ = A^{-1} a + b (adj(A) rho + (v_2, -v_1) rho^1 rho^2)
    """
    sig = Phi.signature
    if sig.N != 2:
        raise CurveError("the closed form is for N = 2")
    big = lifted_signature(sig)
    F = _up(Phi.F, big)
    phi = [_up(p, big) for p in Phi.phi]
    A = [[phi[j].d_odd(i) for j in range(2)] for i in range(2)]
    a = [F.d_odd(i) for i in range(2)]
    v = [p.d_z() for p in phi]
    b = _up(ber_map(Phi), big)
    rho = [big.theta(3), big.theta(4)]
    Ainv = linalg.inverse(A, big)
    adj = [[A[1][1], -A[0][1]], [-A[1][0], A[0][0]]]
    rr = rho[0] * rho[1]
    tail = [v[1], -v[0]]
    eta = []
    for i in range(2):
        base = Ainv[i][0] * a[0] + Ainv[i][1] * a[1]
        lin = adj[i][0] * rho[0] + adj[i][1] * rho[1] + rr * tail[i]
        eta.append(base + b * lin)
    return SuperMap(F, phi + eta, check=False)


def alpha(sig: AlgebraSignature) -> SuperMap:
    """``(z - theta^1 rho^1 - theta^2 rho^2 | rho^1, rho^2, theta^1, theta^2)`` on 1|4."""
    if sig.N != 4:
        raise CurveError("alpha lives on 1|4")
    t1, t2, r1, r2 = (sig.theta(i) for i in range(1, 5))
    return SuperMap(sig.z() - t1 * r1 - t2 * r2, [r1, r2, t1, t2])


def ad_alpha(Psi: SuperMap) -> SuperMap:
    a = alpha(Psi.signature)
    return a.compose(Psi).compose(a)


def project_lifted(Psi: SuperMap, small: Optional[AlgebraSignature] = None) -> Optional[SuperMap]:
    """``Phi`` with ``lift(Phi) = Psi``, or ``None`` when ``Psi`` is not a lift."""
    big = Psi.signature
    if big.N % 2:
        return None
    n = big.N // 2
    small = small or AlgebraSignature(big.even_name, n, big.M, big.e_min, big.e_max, big.exact_polynomial_mode)
    comps = [Psi.F] + list(Psi.phi[:n])
    down = [_down(c, small) for c in comps]
    if any(d is None for d in down):
        return None
    try:
        Phi = SuperMap(down[0], down[1:])
    except AlgebraError:
        return None
    L = lift(Phi)
    if not all(x.agrees(y) for x, y in zip(L.phi[n:], Psi.phi[n:])):
        return None
    return Phi


def dual(Phi: SuperMap) -> SuperMap:
    """``project_lifted(ad_alpha(lift(Phi)))`` for ``Phi`` in ``Aut^Delta``."""
    if not is_aut_Delta(Phi):
        raise NotAutDeltaS2("not Aut^Delta: the map is not generated by S(2) fields")
    out = project_lifted(ad_alpha(lift(Phi)), Phi.signature)
    if out is None:
        raise CurveError("dual is not a lift; this contradicts membership in Aut^Delta")
    return out


# ---------------------------------------------------------------------------
# atlases


@dataclass
class Atlas:
    """Either a cover (``kind='cover'``) with transitions ``Phi_ij`` keyed by
    ``(i, j)``, or a quotient of the superplane by commuting generators."""

    signature: AlgebraSignature
    kind: str = "cover"
    charts: Tuple[str, ...] = ()
    transitions: Dict[Tuple[str, str], SuperMap] = field(default_factory=dict)
    generators: Dict[str, SuperMap] = field(default_factory=dict)
    constants: Dict[str, GaussianRational] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("cover", "quotient"):
            raise ValueError(f"unknown atlas kind {self.kind!r}")
        self.charts = tuple(self.charts)
        for (i, j), m in self.transitions.items():
            if i not in self.charts or j not in self.charts:
                raise ValueError(f"transition {i} -> {j} uses an undeclared chart")
            if i == j:
                raise ValueError(f"transition {i} -> {i} is implicit (identity)")
        for m in list(self.transitions.values()) + list(self.generators.values()):
            if m.signature != self.signature:
                raise ValueError("transition signature does not match the atlas")

    def maps(self) -> List[Tuple[str, SuperMap]]:
        if self.kind == "cover":
            return [(f"{i}->{j}", m) for (i, j), m in sorted(self.transitions.items())]
        return sorted(self.generators.items())


def _same(a: SuperMap, b: SuperMap) -> bool:
    return a.agrees(b)


def verify_atlas(atlas: Atlas) -> dict:
    """Cocycle check (cover) or commutation check (quotient)."""
    sig = atlas.signature
    ident = SuperMap.identity(sig)
    failures = []
    if atlas.kind == "cover":
        T = dict(atlas.transitions)

        def get(i, j):
            return ident if i == j else T.get((i, j))

        ch = sorted(atlas.charts)
        for i in ch:
            for j in ch:
                for k in ch:
                    if i == j or j == k:
                        continue
                    a, b, c = get(i, j), get(j, k), get(i, k)
                    if a is None or b is None or c is None:
                        continue
                    if not _same(b.compose(a), c):
                        failures.append([i, j, k])
    else:
        names = sorted(atlas.generators)
        for x in range(len(names)):
            for y in range(x + 1, len(names)):
                g, h = atlas.generators[names[x]], atlas.generators[names[y]]
                if not _same(g.compose(h), h.compose(g)):
                    failures.append([names[x], names[y]])
    return {"cocycle_ok": not failures, "failures": failures}


def _text(x: SuperElement) -> str:
    return str(x)


def _coboundary(atlas: Atlas, lam: Dict[Tuple[str, str], SuperElement]) -> Optional[Dict[str, SuperElement]]:
    """Solve ``lambda_ij = mu_j - mu_i`` with ``mu = 0`` at each component root."""
    sig = atlas.signature
    adj: Dict[str, List[Tuple[str, SuperElement]]] = {c: [] for c in atlas.charts}
    for (i, j), l in sorted(lam.items()):
        adj[i].append((j, l))
        adj[j].append((i, -l))
    mu: Dict[str, SuperElement] = {}
    for root in sorted(atlas.charts):
        if root in mu:
            continue
        mu[root] = sig.zero()
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, l in adj[u]:
                if v not in mu:
                    mu[v] = mu[u] + l
                    queue.append(v)
    for (i, j), l in lam.items():
        if mu[j] - mu[i] != l:
            return None
    return mu


def classify_atlas(atlas: Atlas) -> dict:
    """Full report: cocycle, per-map classes, lambda, S(2) verdict, witness."""
    sig = atlas.signature
    report = verify_atlas(atlas)
    per = {}
    lam: Dict[str, SuperElement] = {}
    all_delta = True
    for name, m in atlas.maps():
        ber = ber_map(m)
        entry = {"ber": _text(ber), "aut_delta": is_unit_one(ber)}
        mult = is_aut_omega(m) if sig.N else None
        entry["aut_omega"] = mult is not None
        entry["omega_multiplier"] = None if mult is None else _text(mult)
        all_delta = all_delta and entry["aut_delta"]
        if sig.N == 2 and entry["aut_delta"]:
            lam[name] = extract_lambda(m)
            entry["lambda"] = _text(lam[name])
            entry["aut_Delta"] = is_aut_Delta(m)
        per[name] = entry
    report["per_transition_class"] = per
    report["lambda"] = {k: _text(v) for k, v in sorted(lam.items())}
    report["witness"] = None
    if sig.N != 2:
        report["s2_verdict"] = "n/a"
        return report
    if not all_delta or not report["cocycle_ok"]:
        report["s2_verdict"] = "neither"
        return report
    if atlas.kind == "cover":
        mu = _coboundary(atlas, {k: extract_lambda(m) for k, m in atlas.transitions.items()})
        if mu is None:
            report["s2_verdict"] = "S(1|2)"
        else:
            report["s2_verdict"] = "S(2)"
            report["witness"] = {c: _text(v) for c, v in sorted(mu.items())}
    else:
        # an invariant trivialization over a translation quotient is constant
        if all(v.is_zero() for v in lam.values()):
            report["s2_verdict"] = "S(2)"
            report["witness"] = {g: "0" for g in sorted(lam)}
        else:
            report["s2_verdict"] = "S(1|2)"
    return report


def kappa_shift(Phi: SuperMap, lam) -> SuperMap:
    """``exp(lam K) o Phi``: adds ``lam phi^1 phi^2`` to ``F``."""
    sig = Phi.signature
    E = exp_field(K_field(sig).scale(lam))
    return E.compose(Phi)


# ---------------------------------------------------------------------------
# split curves


@dataclass(frozen=True)
class SplitCurveData:
    """Split 1|2 curve from ``E = O(a) + O(b)`` with ``det E = Omega``.

    ``base`` is ``"P1"`` (two charts, ``a + b = -2``) or ``"torus"`` (the
    trivial bundle on ``C / (Z + tau Z)``, ``a = b = 0``).
    """

    base: str = "P1"
    degrees: Tuple[int, int] = (-1, -1)
    tau: GaussianRational = GaussianRational(0, 1)
    shift: GaussianRational = GaussianRational(0)

    def __post_init__(self):
        a, b = self.degrees
        if self.base == "P1":
            if a + b != -2:
                raise CurveError(f"degree constraint violated: a + b = {a + b}, need -2")
        elif self.base == "torus":
            if (a, b) != (0, 0):
                raise CurveError("only the trivial bundle is supported on the torus")
        else:
            raise CurveError(f"unknown base curve {self.base!r}")


def _twists(sig: AlgebraSignature, a: int, b: int):
    # Ber = d_z(1/z) / (s s' z^(a+b)) = -1/(s s'); s carries the sign of -z^-2
    return GaussianRational(-1), GaussianRational(1)


def split_curve(data: SplitCurveData, sig: Optional[AlgebraSignature] = None) -> Atlas:
    sig = sig or AlgebraSignature.make(2, 0)
    if sig.N != 2:
        raise CurveError("split curves here have N = 2")
    a, b = data.degrees
    if data.base == "torus":
        gens = {"A": SuperMap(sig.z() + sig.one(), [sig.theta(1), sig.theta(2)]),
                "B": SuperMap(sig.z() + sig.const(data.tau), [sig.theta(1), sig.theta(2)])}
        return Atlas(sig, "quotient", (), {}, gens, {"tau": data.tau}, name="torus-split")
    s, s2 = _twists(sig, a, b)
    z = sig.z()
    Phi = SuperMap(z ** -1, [sig.z(a).scale(s) * sig.theta(1), sig.z(b).scale(s2) * sig.theta(2)])
    # with a + b = -2 the transition is an involution
    inv = Phi
    if data.shift:
        Phi = kappa_shift(Phi, data.shift)
        inv = inv.compose(exp_field(K_field(sig).scale(-data.shift)))
    trans = {("U0", "U1"): Phi, ("U1", "U0"): inv}
    name = f"p1-split-({a},{b})" + ("-shifted" if data.shift else "")
    return Atlas(sig, "cover", ("U0", "U1"), trans, {}, {}, name=name)


def dual_split(data: SplitCurveData) -> SplitCurveData:
    """``E -> E^* (x) Omega``: degrees ``(a, b) -> (-a - 2, -b - 2)`` on the projective line."""
    a, b = data.degrees
    if data.base == "torus":
        return data
    return SplitCurveData(data.base, (-a - 2, -b - 2), data.tau, data.shift)


# ---------------------------------------------------------------------------
# Berezinian-compatible coordinates


def compatible_coordinates(delta: BerezinSection) -> SuperMap:
    """``Psi = (F | theta)`` with ``d_z F = f`` and ``F(0) = 0``."""
    f = delta.f
    sig = f.signature
    if not delta.is_unit():
        raise CurveError("density is not a unit")
    terms = {}
    for (e, S), c in f.items():
        if e == -1:
            raise CurveError("no antiderivative: the density has a z^-1 term")
        terms[(e + 1, S)] = c / (e + 1)
    F = SuperElement(sig, terms, pr.shift(f.prec, 1))
    return SuperMap(F, [sig.theta(i + 1) for i in range(sig.N)])
