"""Small dense matrices with entries in the super ring.

Even matrices (all entries even) have commuting entries, so determinants are
the usual Leibniz sums.  Inverses: invert the reduced matrix by Gauss-Jordan
elimination over Laurent series, then correct with a terminating Neumann
series in the nilpotent part.
"""

from __future__ import annotations

from itertools import permutations
from typing import List, Sequence

from .superalgebra import AlgebraSignature, NotInvertible, SuperElement, permutation_sign

Matrix = List[List[SuperElement]]


def identity(sig: AlgebraSignature, n: int) -> Matrix:
    return [[sig.one() if i == j else sig.zero() for j in range(n)] for i in range(n)]


def zeros(sig: AlgebraSignature, rows: int, cols: int) -> Matrix:
    return [[sig.zero() for _ in range(cols)] for _ in range(rows)]


def matmul(a: Matrix, b: Matrix, sig: AlgebraSignature) -> Matrix:
    rows, inner = len(a), len(b)
    cols = len(b[0]) if b else 0
    if a and len(a[0]) != inner:
        raise ValueError("dimension mismatch")
    out = zeros(sig, rows, cols)
    for i in range(rows):
        for j in range(cols):
            acc = sig.zero()
            for k in range(inner):
                x, y = a[i][k], b[k][j]
                if x and y:
                    acc = acc + x * y
            out[i][j] = acc
    return out


def matadd(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matsub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matscale(a: Matrix, c) -> Matrix:
    return [[x * c for x in row] for row in a]


def is_zero(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def det(m: Sequence[Sequence[SuperElement]], sig: AlgebraSignature) -> SuperElement:
    """Determinant of a matrix with pairwise commuting (even) entries."""
    n = len(m)
    if n == 0:
        return sig.one()
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = sig.zero()
    for perm in permutations(range(n)):
        term = sig.one().scale(permutation_sign(perm))
        for i, j in enumerate(perm):
            term = term * m[i][j]
            if term.is_zero():
                break
        total = total + term
    return total


def trace(m: Matrix, sig: AlgebraSignature) -> SuperElement:
    acc = sig.zero()
    for i in range(len(m)):
        acc = acc + m[i][i]
    return acc


def _reduced_inverse(m: Matrix, sig: AlgebraSignature) -> Matrix:
    n = len(m)
    a = [[x.reduce() for x in row] + [sig.one() if i == j else sig.zero() for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if not a[r][col].is_zero():
                # prefer the entry of lowest z-order with a scalar leading term
                if pivot is None or _order(a[r][col]) < _order(a[pivot][col]):
                    pivot = r
        if pivot is None:
            raise NotInvertible("matrix is not invertible (reduced part singular)")
        a[col], a[pivot] = a[pivot], a[col]
        inv = a[col][col].inverse()
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _order(x: SuperElement) -> int:
    return x.min_exponent()


def inverse(m: Matrix, sig: AlgebraSignature) -> Matrix:
    """Inverse of an even square matrix whose reduced part is invertible."""
    n = len(m)
    rinv = _reduced_inverse(m, sig)
    nil = [[x.nilpotent_part() for x in row] for row in m]
    if is_zero(nil):
        return rinv
    # m = R (1 + R^{-1} n)  =>  m^{-1} = sum_k (-R^{-1} n)^k R^{-1}
    x = matscale(matmul(rinv, nil, sig), -1)
    total = identity(sig, n)
    power = identity(sig, n)
    for _ in range(sig.n_odd + 1):
        power = matmul(power, x, sig)
        if is_zero(power):
            break
        total = matadd(total, power)
    return matmul(total, rinv, sig)


def solve(m: Matrix, rhs: Sequence[SuperElement], sig: AlgebraSignature) -> List[SuperElement]:
    """Solve ``m x = rhs`` for an even invertible ``m``."""
    inv = inverse(m, sig)
    col = [[r] for r in rhs]
    return [row[0] for row in matmul(inv, col, sig)]
