"""Bar construction on the tropical de Rham algebra (zero differential).

Letters are pairs ``(deg, i)``: basis element ``i`` of the degree-``deg``
forms.  Elements of B are sparse dicts from words (tuples of letters) to
rationals.  Only the wedge structure constants enter, through ``BarSetup``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .linalg import Matrix, Row, Subspace, kernel

Letter = tuple[int, int]
Word = tuple[Letter, ...]
Element = dict


class LengthCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class BarSetup:
    """Form dimensions by degree and wedge structure constants.

    ``tables[(a, b)][i][j]`` holds the coordinates of ``basis_a[i] ^ basis_b[j]``
    in the degree ``a + b`` basis.  Only ``(1, 1)`` is required.
    """

    dims: Mapping[int, int]
    tables: Mapping[tuple[int, int], tuple[tuple[Row, ...], ...]] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.dims.get(1, 0)

    @property
    def wedge(self) -> tuple[tuple[Row, ...], ...]:
        return self.tables[(1, 1)]

    def __post_init__(self):
        if (1, 1) not in self.tables:
            m, d2 = self.m, self.dims.get(2, 0)
            zero = tuple(Fraction(0) for _ in range(d2))
            self.tables[(1, 1)] = tuple(tuple(zero for _ in range(m)) for _ in range(m))

    @classmethod
    def from_algebra(cls, alg, max_degree: int = 2) -> "BarSetup":
        """Tables from a ``FormAlgebra``; degree-3 products only if ``max_degree >= 3``."""
        from .linalg import unit

        dims = {p: alg.dim(p) for p in range(max_degree + 1)}
        tables: dict = {}
        for a in range(1, max_degree + 1):
            for b in range(1, max_degree + 1 - a):
                da, db = dims[a], dims[b]
                if a == 1 and b == 1:
                    tables[(a, b)] = alg.wedge_table
                    continue
                tables[(a, b)] = tuple(
                    tuple(alg.wedge(a, unit(da, i), b, unit(db, j)) for j in range(db)) for i in range(da)
                )
        return cls(dims, tables)

    @classmethod
    def free(cls, m: int) -> "BarSetup":
        return cls({0: 1, 1: m, 2: 0})

    def product(self, x: Letter, y: Letter) -> Row:
        a, i = x
        b, j = y
        if self.dims.get(a + b, 0) == 0:
            return ()
        t = self.tables.get((a, b))
        if t is None:
            raise KeyError(f"no wedge table for degrees {a} and {b}")
        return t[i][j]

    def is_antisymmetric(self) -> bool:
        w = self.wedge
        m = self.m
        return all(w[i][j] == tuple(-x for x in w[j][i]) for i in range(m) for j in range(m))


# ---------------------------------------------------------------------------
# words and elements


def words(m: int, s: int) -> list[tuple[int, ...]]:
    """Index words of length s over m letters in lexicographic order."""
    return list(product(range(m), repeat=s))


def word_index(w: Sequence[int], m: int) -> int:
    k = 0
    for x in w:
        k = k * m + x
    return k


def degree0(w: Iterable[int]) -> Word:
    return tuple((1, i) for i in w)


def from_vector(v: Sequence, m: int, s: int) -> Element:
    return {degree0(w): Fraction(c) for w, c in zip(words(m, s), v) if c}


def to_vector(x: Element, m: int, s: int) -> Row:
    out = [Fraction(0)] * (m ** s)
    for w, c in x.items():
        if len(w) != s or any(d != 1 for d, _ in w):
            raise ValueError("element is not homogeneous of degree 0 and length s")
        out[word_index([i for _, i in w], m)] += c
    return tuple(out)


def _add(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def add(*xs: Element) -> Element:
    out: dict = {}
    for x in xs:
        for k, c in x.items():
            _add(out, k, c)
    return out


def scale(c, x: Element) -> Element:
    c = Fraction(c)
    return {k: c * v for k, v in x.items()} if c else {}


def bar_degree(w: Word) -> int:
    return sum(d for d, _ in w) - len(w)


def unit_element() -> Element:
    return {(): Fraction(1)}


# ---------------------------------------------------------------------------
# Hopf operations


@lru_cache(maxsize=1 << 16)
def _shuffle_pair(u: Word, v: Word) -> tuple:
    return tuple(_shuffle_words(u, v))


def _shuffle_words(u: Word, v: Word):
    r, s = len(u), len(v)
    for pos in combinations(range(r + s), r):
        pset = set(pos)
        out = []
        iu = iv = 0
        sign = 1
        for k in range(r + s):
            if k in pset:
                # letters of v already placed pass over this letter of u
                if (u[iu][0] - 1) % 2:
                    odd_before = sum((v[t][0] - 1) % 2 for t in range(iv))
                    if odd_before % 2:
                        sign = -sign
                out.append(u[iu])
                iu += 1
            else:
                out.append(v[iv])
                iv += 1
        yield sign, tuple(out)


def shuffle(x: Element, y: Element) -> Element:
    """Signed shuffle product (letters weighted by degree minus one)."""
    out: dict = {}
    for u, a in x.items():
        for v, b in y.items():
            for sg, w in _shuffle_pair(u, v):
                _add(out, w, sg * a * b)
    return out


def coproduct(x: Element) -> dict:
    """Deconcatenation, as a dict from word pairs to coefficients."""
    out: dict = {}
    for w, c in x.items():
        for i in range(len(w) + 1):
            _add(out, (w[:i], w[i:]), c)
    return out


def tensor(x: Element, y: Element) -> dict:
    out: dict = {}
    for u, a in x.items():
        for v, b in y.items():
            _add(out, (u, v), a * b)
    return out


def shuffle_tensor(p: dict, q: dict) -> dict:
    """Product on B (x) B: (a (x) b)(c (x) d) = +-(a sh c) (x) (b sh d)."""
    out: dict = {}
    for (a, b), x in p.items():
        for (c, d), y in q.items():
            sg = -1 if (bar_degree(b) * bar_degree(c)) % 2 else 1
            xy = sg * x * y
            right = _shuffle_pair(b, d)
            for lc, l in _shuffle_pair(a, c):
                for rc, r in right:
                    _add(out, (l, r), xy * lc * rc)
    return out


def counit(x: Element) -> Fraction:
    return Fraction(x.get((), 0))


def antipode(x: Element) -> Element:
    """S[a1|...|as] = (-1)^s [as|...|a1] on degree-0 words."""
    out: dict = {}
    for w, c in x.items():
        if bar_degree(w) != 0:
            raise ValueError("antipode is implemented on degree-0 words only")
        _add(out, tuple(reversed(w)), (-1) ** len(w) * c)
    return out


def random_element(m: int, s: int, rng: random.Random, lo: int = -3, hi: int = 3) -> Element:
    return from_vector([rng.randint(lo, hi) for _ in range(m ** s)], m, s)


# ---------------------------------------------------------------------------
# differential and H^0


def differential(x: Element, setup: BarSetup) -> Element:
    """The combinatorial differential d[e1|...|es] = sum (-1)^(i+1) [Je1|...|Je_i ^ e_(i+1)|...]."""
    out: dict = {}
    for w, c in x.items():
        s = len(w)
        for i in range(s - 1):
            sign = (-1) ** i  # (-1)^(i+1) with 1-based i
            for d, _ in w[: i + 1]:
                if d % 2:
                    sign = -sign
            prod = setup.product(w[i], w[i + 1])
            deg = w[i][0] + w[i + 1][0]
            for k, v in enumerate(prod):
                if v:
                    nw = w[:i] + ((deg, k),) + w[i + 2:]
                    _add(out, nw, sign * c * v)
    return out


def differential_matrix(setup: BarSetup, s: int) -> Matrix:
    """Matrix of d on length-s degree-0 words; rows indexed by (i, prefix, c, suffix)."""
    m = setup.m
    d2 = setup.dims.get(2, 0)
    w = setup.wedge
    ncols = m ** s
    rows = []
    for i in range(s - 1):
        for pre in product(range(m), repeat=i):
            for suf in product(range(m), repeat=s - i - 2):
                for c in range(d2):
                    row = [Fraction(0)] * ncols
                    nz = False
                    for a in range(m):
                        for b in range(m):
                            v = w[a][b][c]
                            if v:
                                row[word_index(pre + (a, b) + suf, m)] = v
                                nz = True
                    if nz:
                        rows.append(tuple(row))
    return tuple(rows)


MAX_WORDS = 20000


def h0_kernel(setup: BarSetup, s: int) -> Subspace:
    """H^0(B) in length s as a subspace of (Omega^1)^{(x) s} (word-basis coordinates)."""
    m = setup.m
    if m ** s > MAX_WORDS:
        raise LengthCapExceeded(f"{m}^{s} words exceed the limit of {MAX_WORDS}")
    if s <= 1:
        return Subspace.full(m ** s)
    rows = differential_matrix(setup, s)
    if not rows:
        return Subspace.full(m ** s)
    return kernel(rows, m ** s)


def h0_dims(setup: BarSetup, max_len: int = 4, cap: int | None = None) -> list[tuple[int, Subspace]]:
    """(dimension, RREF basis) of H^0(B) for lengths 0..max_len."""
    if cap is not None and max_len > cap:
        raise LengthCapExceeded(f"length {max_len} exceeds the cap {cap}")
    out = []
    for s in range(max_len + 1):
        k = h0_kernel(setup, s)
        out.append((k.dim, k))
    return out


def free_rank_if_free(setup: BarSetup) -> int | None:
    """m when every product of 1-forms vanishes (H^0 is then a free shuffle algebra)."""
    if all(not any(v) for row in setup.wedge for v in row):
        return setup.m
    return None


def in_h0(x: Element, setup: BarSetup) -> bool:
    return not differential(x, setup)
