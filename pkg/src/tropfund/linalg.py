"""Exact linear algebra over the rationals.

Matrices are tuples of row tuples of :class:`fractions.Fraction`.  Subspaces
are stored by the reduced row echelon form of a spanning set, so two equal
subspaces always compare equal.  Nothing here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

Row = tuple[Fraction, ...]
Matrix = tuple[Row, ...]


class DimensionError(ValueError):
    pass


def to_fraction(x) -> Fraction:
    """Parse an int, Fraction or a ``"p/q"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not an exact rational: {x!r}")


def fmt(x: Fraction) -> str:
    x = to_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vec(xs: Iterable) -> Row:
    return tuple(to_fraction(x) for x in xs)


def mat(rows: Iterable[Iterable]) -> Matrix:
    out = tuple(vec(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise DimensionError("ragged matrix")
    return out


def zeros(n: int, m: int) -> Matrix:
    return tuple(tuple(Fraction(0) for _ in range(m)) for _ in range(n))


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def unit(n: int, i: int) -> Row:
    return tuple(Fraction(int(j == i)) for j in range(n))


def elementary(n: int, i: int, j: int) -> Matrix:
    """The matrix unit E_ij."""
    return tuple(tuple(Fraction(int(a == i and b == j)) for b in range(n)) for a in range(n))


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), (len(m[0]) if m else 0)


def transpose(m: Matrix, ncols: int | None = None) -> Matrix:
    if not m:
        return tuple(() for _ in range(ncols or 0))
    return tuple(zip(*m))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise DimensionError(f"cannot multiply {shape(a)} by {shape(b)}")
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def matvec(a: Matrix, v: Sequence[Fraction]) -> Row:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def scale(c, a: Matrix) -> Matrix:
    c = to_fraction(c)
    return tuple(tuple(c * x for x in r) for r in a)


def commutator(a: Matrix, b: Matrix) -> Matrix:
    return sub(matmul(a, b), matmul(b, a))


def is_zero(a) -> bool:
    if a and isinstance(a[0], tuple):
        return all(x == 0 for r in a for x in r)
    return all(x == 0 for x in a)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product, row index (i, k) -> i * rows(b) + k."""
    return tuple(
        tuple(x * y for x in ra for y in rb)
        for ra in a for rb in b
    )


def flatten(m: Matrix) -> Row:
    return tuple(x for r in m for x in r)


def unflatten(v: Sequence[Fraction], nrows: int, ncols: int) -> Matrix:
    return tuple(tuple(v[i * ncols:(i + 1) * ncols]) for i in range(nrows))


def rref(rows: Iterable[Sequence], ncols: int) -> tuple[Matrix, tuple[int, ...]]:
    """Reduced row echelon form of the row space; zero rows dropped."""
    work = [list(vec(r)) for r in rows]
    for r in work:
        if len(r) != ncols:
            raise DimensionError(f"row of length {len(r)} in a {ncols}-column matrix")
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        piv = next((i for i in range(top, len(work)) if work[i][col] != 0), None)
        if piv is None:
            continue
        work[top], work[piv] = work[piv], work[top]
        prow = work[top]
        inv = 1 / prow[col]
        if inv != 1:
            prow[:] = [x * inv for x in prow]
        for i, r in enumerate(work):
            if i != top and r[col] != 0:
                f = r[col]
                r[:] = [x - f * y for x, y in zip(r, prow)]
        pivots.append(col)
        top += 1
        if top == len(work):
            break
    return tuple(tuple(r) for r in work[:top]), tuple(pivots)


def rank(m: Iterable[Sequence], ncols: int | None = None) -> int:
    m = list(m)
    if not m:
        return 0
    return len(rref(m, ncols if ncols is not None else len(m[0]))[0])


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    aug = [tuple(r) + identity(n)[i] for i, r in enumerate(m)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != tuple(range(n)) or len(red) < n:
        raise ZeroDivisionError("matrix is singular")
    return tuple(r[n:] for r in red)


def det(m: Matrix) -> Fraction:
    n = len(m)
    work = [list(r) for r in m]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if work[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            work[c], work[p] = work[p], work[c]
            d = -d
        d *= work[c][c]
        for i in range(c + 1, n):
            f = work[i][c] / work[c][c]
            if f:
                work[i] = [x - f * y for x, y in zip(work[i], work[c])]
    return d


@dataclass(frozen=True)
class Subspace:
    """A subspace of Q^n stored by its canonical RREF basis."""

    ambient_dim: int
    basis: Matrix
    pivots: tuple[int, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> "Subspace":
        red, piv = rref(vectors, ambient_dim)
        return cls(ambient_dim, red, piv)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, (), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, identity(n), tuple(range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence) -> Row:
        """Remainder of ``v`` after clearing this subspace's pivot columns."""
        v = list(vec(v))
        for row, p in zip(self.basis, self.pivots):
            c = v[p]
            if c:
                v = [x - c * y for x, y in zip(v, row)]
        return tuple(v)

    def contains(self, v: Sequence) -> bool:
        return is_zero(self.reduce(v))

    def coords(self, v: Sequence) -> Row:
        """Coordinates of ``v`` in the RREF basis; raises if ``v`` is outside."""
        v = vec(v)
        if not self.contains(v):
            raise ValueError("vector not in subspace")
        return tuple(v[p] for p in self.pivots)

    def __add__(self, other: "Subspace") -> "Subspace":
        _check(self, other)
        return Subspace.span(self.basis + other.basis, self.ambient_dim)

    def __le__(self, other: "Subspace") -> bool:
        _check(self, other)
        return all(other.contains(b) for b in self.basis)


def _check(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise DimensionError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def kernel(m: Matrix, ncols: int | None = None) -> Subspace:
    """Right kernel {x : m x = 0}."""
    n = ncols if ncols is not None else (len(m[0]) if m else 0)
    red, piv = rref(m, n)
    free = [c for c in range(n) if c not in piv]
    gens = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        gens.append(x)
    return Subspace.span(gens, n)


def annihilator(s: Subspace) -> Subspace:
    """Functionals (in dual coordinates) vanishing on ``s``."""
    return kernel(s.basis, s.ambient_dim)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    _check(a, b)
    return annihilator(annihilator(a) + annihilator(b))


def intersect_all(spaces: Iterable[Subspace], ambient_dim: int) -> Subspace:
    out = Subspace.full(ambient_dim)
    for s in spaces:
        out = intersect(out, s)
    return out


def image(m: Matrix, ncols_out: int) -> Subspace:
    """Column space of ``m``, as a subspace of Q^rows."""
    return Subspace.span(transpose(m), ncols_out)


def solve(a: Matrix, b: Sequence, ncols: int | None = None) -> Row | None:
    """One solution x of a x = b, or None."""
    n = ncols if ncols is not None else (len(a[0]) if a else 0)
    aug = [tuple(r) + (to_fraction(bi),) for r, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, p in zip(red, piv):
        x[p] = row[n]
    return tuple(x)


@dataclass(frozen=True)
class QuotientSpace:
    """``ambient / killed`` with a canonical complement of representatives."""

    ambient: Subspace
    killed: Subspace
    section: Subspace = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        _check(self.ambient, self.killed)
        if not self.killed <= self.ambient:
            raise ValueError("killed subspace is not contained in the ambient one")
        residues = [self.killed.reduce(b) for b in self.ambient.basis]
        object.__setattr__(self, "section", Subspace.span(residues, self.ambient.ambient_dim))

    @property
    def dim(self) -> int:
        return self.ambient.dim - self.killed.dim

    @property
    def basis(self) -> Matrix:
        """Representatives of a basis of the quotient."""
        return self.section.basis

    @property
    def size(self) -> int:
        return self.ambient.ambient_dim

    def coords(self, v: Sequence) -> Row:
        v = vec(v)
        if not self.ambient.contains(v):
            raise ValueError("vector is outside the numerator subspace")
        r = self.killed.reduce(v)
        return tuple(r[p] for p in self.section.pivots)

    def lift(self, c: Sequence) -> Row:
        out = [Fraction(0)] * self.size
        for ci, b in zip(vec(c), self.basis):
            if ci:
                out = [x + ci * y for x, y in zip(out, b)]
        return tuple(out)

    def is_zero_class(self, v: Sequence) -> bool:
        return self.killed.contains(v)


@dataclass(frozen=True)
class ExteriorPower:
    """The p-th exterior power of a based space of dimension ``n``.

    Basis vectors are increasing index tuples ``I`` standing for
    ``b_I[0] ^ ... ^ b_I[p-1]``.
    """

    n: int
    p: int

    @property
    def words(self) -> tuple[tuple[int, ...], ...]:
        return tuple(combinations(range(self.n), self.p))

    @property
    def dim(self) -> int:
        return comb(self.n, self.p) if 0 <= self.p else 0

    def index(self, word: tuple[int, ...]) -> int:
        return self.words.index(word)

    def space(self) -> QuotientSpace:
        return QuotientSpace(Subspace.full(self.dim), Subspace.zero(self.dim))

    def wedge(self, other: "ExteriorPower", x: Sequence, y: Sequence) -> Row:
        """Product of x in this power and y in ``other`` (same n)."""
        target = ExteriorPower(self.n, self.p + other.p)
        idx = {w: i for i, w in enumerate(target.words)}
        out = [Fraction(0)] * target.dim
        for I, a in zip(self.words, vec(x)):
            if not a:
                continue
            for J, b in zip(other.words, vec(y)):
                if not b:
                    continue
                s, K = wedge_words(I, J)
                if s:
                    out[idx[K]] += s * a * b
        return tuple(out)

    def induced(self, m: Matrix) -> Matrix:
        """Matrix of the p-th exterior power of a linear map given by ``m``.

        ``m`` is (k x n): column j holds the image of basis vector j.
        Rows of the result are indexed by p-subsets of range(k).
        """
        k = len(m)
        src = self.words
        dst = tuple(combinations(range(k), self.p))
        rows = []
        for K in dst:
            row = []
            for I in src:
                sub_ = tuple(tuple(m[a][b] for b in I) for a in K)
                row.append(det(sub_) if self.p else Fraction(1))
            rows.append(tuple(row))
        return tuple(rows)


def wedge_words(I: tuple[int, ...], J: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign and sorted index word of b_I ^ b_J (sign 0 if they overlap)."""
    if set(I) & set(J):
        return 0, ()
    seq = list(I) + list(J)
    inversions = sum(1 for a in range(len(seq)) for b in range(a + 1, len(seq)) if seq[a] > seq[b])
    return (-1 if inversions % 2 else 1), tuple(sorted(seq))


def wedge_power(q: QuotientSpace | int, p: int) -> ExteriorPower:
    if p < 0:
        raise ValueError("p must be non-negative")
    n = q if isinstance(q, int) else q.dim
    return ExteriorPower(n, p)


def block_diag_rows(blocks: Sequence[Matrix], widths: Sequence[int]) -> Matrix:
    """Stack row blocks side by side into one wide matrix (columns concatenated)."""
    total = sum(widths)
    rows = []
    off = 0
    for b, w in zip(blocks, widths):
        for r in b:
            rows.append(tuple([Fraction(0)] * off) + tuple(r) + tuple([Fraction(0)] * (total - off - w)))
        off += w
    return tuple(rows)
