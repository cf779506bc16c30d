"""Independent reference computations used to check the package.

Nothing here imports the package's linear algebra: everything is plain dense
Gaussian elimination over Fraction written out again.
"""

from fractions import Fraction
from itertools import combinations


def dense_rref(rows, ncols):
    """Row echelon form by straightforward elimination; returns (rows, pivots)."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def dense_rank(rows, ncols):
    return len(dense_rref(rows, ncols)[1])


def dense_nullity(rows, ncols):
    return ncols - dense_rank(rows, ncols)


def null_basis(rows, ncols):
    red, piv = dense_rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        out.append(v)
    return out


def same_span(a, b, ncols):
    """Whether two lists of vectors span the same subspace."""
    ra, rb = dense_rank(a, ncols), dense_rank(b, ncols)
    return ra == rb == dense_rank(list(a) + list(b), ncols)


def commutant_dim(mats, r):
    """dim of {X : X A = A X for all A}, unknowns X[i][j] at i * r + j."""
    rows = []
    for a in mats:
        for i in range(r):
            for j in range(r):
                row = [Fraction(0)] * (r * r)
                for k in range(r):
                    row[i * r + k] += Fraction(a[k][j])
                    row[k * r + j] -= Fraction(a[i][k])
                rows.append(row)
    return dense_nullity(rows, r * r)


def matmul(a, b):
    return [[sum(Fraction(a[i][k]) * Fraction(b[k][j]) for k in range(len(b))) for j in range(len(b[0]))]
            for i in range(len(a))]


def reduced_char_poly(size, flats):
    """Coefficients |c_0|, |c_1|, ... of chi(t) / (t - 1), chi from the Moebius function of the flats."""
    flats = sorted({frozenset(f) for f in flats}, key=len)
    bottom = min(flats, key=len)
    top = frozenset(range(size))

    # rank = length of a longest chain from the bottom
    ranks = {bottom: 0}
    for g in flats:
        for h in flats:
            if h < g and h in ranks:
                ranks[g] = max(ranks.get(g, 0), ranks[h] + 1)
    r = ranks[top]
    mu = {}
    for f in flats:
        if f == bottom:
            mu[f] = 1
        else:
            mu[f] = -sum(mu[g] for g in flats if g < f)
    chi = [0] * (r + 1)  # chi[k] = coefficient of t^k
    for f in flats:
        chi[r - ranks[f]] += mu[f]
    # synthetic division by (t - 1), highest degree first
    q = []
    acc = 0
    for k in range(r, 0, -1):
        acc = chi[k] + acc
        q.append(acc)
    # q holds coefficients of t^(r-1), ..., t^0
    return [abs(x) for x in q]


def interleavings(u, v):
    """All shuffles of two words, by recursion on the first letters."""
    if not u:
        return [tuple(v)]
    if not v:
        return [tuple(u)]
    return [(u[0],) + w for w in interleavings(u[1:], v)] + [(v[0],) + w for w in interleavings(u, v[1:])]


def uniform_flats(r, n):
    """Flats of U_{r,n}: all subsets of size < r, and the ground set."""
    out = [set(c) for k in range(r) for c in combinations(range(n), k)]
    out.append(set(range(n)))
    return out
