"""Precision bookkeeping for truncated elements.

A precision is either ``None`` (exact) or a tuple ``P`` indexed by Grassmann
degree ``d = |S|``: every coefficient of a monomial ``z^e g_S`` with
``e < P[|S|]`` is exact.  Tracking per degree matters because ``d/dz`` moves
errors down one power of ``z``, but in a Taylor expansion such shifts always
come with nilpotent factors, i.e. with a higher Grassmann degree.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Tuple

INF = 10 ** 9
LOST = -(10 ** 9)

Prec = Optional[Tuple[int, ...]]


def clamp(x: int) -> int:
    return INF if x >= INF else (LOST if x <= LOST else x)


def add(a: int, b: int) -> int:
    """Offset arithmetic that keeps the sentinels absorbing."""
    if a >= INF or b >= INF:
        return INF
    if a <= LOST or b <= LOST:
        return LOST
    return clamp(a + b)


def norm(P: Optional[Sequence[int]]) -> Prec:
    if P is None or all(p >= INF for p in P):
        return None
    return tuple(P)


def exact(D: int) -> list:
    return [INF] * D


def pmin(P: Prec, Q: Prec) -> Prec:
    if P is None:
        return Q
    if Q is None:
        return P
    return norm([min(a, b) for a, b in zip(P, Q)])


def pmin_all(ps: Iterable[Prec]) -> Prec:
    out = None
    for p in ps:
        out = pmin(out, p)
    return out


def shift(P: Prec, k: int) -> Prec:
    """Add ``k`` to every finite entry (e.g. ``k = -1`` for ``d/dz``)."""
    if P is None:
        return None
    return norm([p if p >= INF else add(p, k) for p in P])


def convolve(va: Sequence[int], vb: Sequence[int]) -> list:
    """Min-plus convolution over Grassmann degree."""
    D = len(va)
    out = exact(D)
    for d1 in range(D):
        if va[d1] >= INF:
            continue
        for d2 in range(D - d1):
            c = add(va[d1], vb[d2])
            if c < out[d1 + d2]:
                out[d1 + d2] = c
    return out


def scalar(P: Prec) -> Optional[int]:
    """Smallest finite entry, for display."""
    if P is None:
        return None
    return min(P)
