"""Integer lattice helpers: primitive vectors, saturated kernels, quotient maps."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

from .linalg import Matrix, Row, Subspace, det, vec


def clear_denominators(v: Sequence) -> tuple[int, ...]:
    v = vec(v)
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    return tuple(int(x * den) for x in v)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Positive rescaling of a nonzero rational vector to a primitive integer one."""
    iv = clear_denominators(v)
    g = 0
    for x in iv:
        g = gcd(g, abs(x))
    if g == 0:
        raise ValueError("zero vector has no primitive generator")
    return tuple(x // g for x in iv)


def is_primitive_integer(v: Sequence) -> bool:
    v = vec(v)
    if any(x.denominator != 1 for x in v):
        return False
    g = 0
    for x in v:
        g = gcd(g, abs(int(x)))
    return g == 1


def as_fractions(v: Sequence[int]) -> Row:
    return tuple(Fraction(x) for x in v)


def integer_kernel(a: Sequence[Sequence], n: int) -> list[tuple[int, ...]]:
    """A Z-basis of {x in Z^n : a x = 0}; the resulting lattice is saturated.

    Row-reduces [a^T | I] with unimodular integer operations; rows whose left
    block vanishes carry the kernel in their right block.
    """
    rows_a = [clear_denominators(r) for r in a]
    m = len(rows_a)
    work = [[rows_a[j][i] for j in range(m)] + [int(i == k) for k in range(n)] for i in range(n)]
    top = 0
    for col in range(m):
        while True:
            nz = [i for i in range(top, n) if work[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(work[i][col]))
            work[top], work[piv] = work[piv], work[top]
            clean = True
            for i in range(top + 1, n):
                if work[i][col]:
                    q = work[i][col] // work[top][col]
                    work[i] = [x - q * y for x, y in zip(work[i], work[top])]
                    if work[i][col]:
                        clean = False
            if clean:
                top += 1
                break
        if top == n:
            break
    return [tuple(r[m:]) for r in work[top:]]


def quotient_map(sub: Subspace) -> Matrix:
    """Integer matrix of a surjection Z^n -> Z^k whose kernel is sub ∩ Z^n.

    The rows form a Z-basis of the saturated lattice of integer covectors
    vanishing on ``sub``.
    """
    n = sub.ambient_dim
    if sub.dim == 0:
        return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))
    rows = integer_kernel(sub.basis, n)
    return tuple(as_fractions(r) for r in rows)


def is_unimodular(m: Matrix) -> bool:
    if not m or len(m) != len(m[0]):
        return False
    if any(x.denominator != 1 for r in m for x in r):
        return False
    return abs(det(m)) == 1
