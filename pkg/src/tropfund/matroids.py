"""Matroids given by their lattice of flats, Bergman fans, balancing and smoothness certificates."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, permutations, product
from typing import Iterable

from .lattice import primitive, quotient_map
from .linalg import Matrix, det, inverse, matmul, matvec, rank, transpose, vec
from .polyhedra import (
    ComplexError,
    PolyComplex,
    build_complex,
    projection_image,
    same_support,
    simplicial_fan,
    star_quotient,
)


class MatroidError(ValueError):
    def __init__(self, message: str, **report):
        super().__init__(message)
        self.report = {"violation": type(self).__name__, "message": message, **report}


class NotLoopless(MatroidError):
    pass


class BadFlats(MatroidError):
    pass


class BadBases(MatroidError):
    pass


class NotPure(ComplexError):
    pass


class MissingWeights(ComplexError):
    pass


class BadBasis(ComplexError):
    pass


class DimensionMismatch(ComplexError):
    pass


@dataclass(frozen=True)
class Matroid:
    """A matroid on ``{0, ..., size-1}`` recorded by its flats."""

    size: int
    flats: frozenset[frozenset[int]]

    @classmethod
    def from_flats(cls, size: int, flats: Iterable[Iterable[int]], loopless: bool = True) -> "Matroid":
        fs = frozenset(frozenset(int(x) for x in f) for f in flats)
        ground = frozenset(range(size))
        for f in fs:
            if not f <= ground:
                raise BadFlats(f"flat {sorted(f)} is not a subset of the ground set", flat=sorted(f))
        if ground not in fs:
            raise BadFlats("the ground set must be a flat")
        for a, b in combinations(fs, 2):
            if a & b not in fs:
                raise BadFlats("flats are not closed under intersection", first=sorted(a), second=sorted(b))
        bottom = frozenset.intersection(*fs)
        for f in fs:
            covers = [g for g in fs if f < g and not any(f < h < g for h in fs)]
            seen: set[int] = set()
            for g in covers:
                extra = g - f
                if seen & extra:
                    raise BadFlats("covering flats do not partition the complement", flat=sorted(f))
                seen |= extra
            if seen != ground - f:
                raise BadFlats("covering flats do not partition the complement", flat=sorted(f))
        m = cls(size, fs)
        if loopless and bottom:
            raise NotLoopless(f"elements {sorted(bottom)} are loops", loops=sorted(bottom))
        return m

    @classmethod
    def from_bases(cls, size: int, bases: Iterable[Iterable[int]], loopless: bool = True) -> "Matroid":
        bs = [frozenset(int(x) for x in b) for b in bases]
        if not bs:
            raise BadBases("a matroid needs at least one basis")
        r = len(bs[0])
        if any(len(b) != r for b in bs):
            raise BadBases("bases have different sizes")
        bset = set(bs)
        for a in bs:
            for b in bs:
                for x in a - b:
                    if not any((a - {x}) | {y} in bset for y in b - a):
                        raise BadBases("basis exchange fails", first=sorted(a), second=sorted(b), element=x)

        def rk(s):
            return max(len(s & b) for b in bs)

        flats = []
        for k in range(size + 1):
            for s in combinations(range(size), k):
                s = frozenset(s)
                rs = rk(s)
                if all(rk(s | {e}) > rs for e in range(size) if e not in s):
                    flats.append(s)
        return cls.from_flats(size, flats, loopless=loopless)

    @classmethod
    def uniform(cls, r: int, size: int) -> "Matroid":
        flats = [frozenset(s) for k in range(r) for s in combinations(range(size), k)]
        flats.append(frozenset(range(size)))
        return cls.from_flats(size, flats)

    @classmethod
    def from_json(cls, data: dict) -> "Matroid":
        size = int(data["ground"])
        if "flats" in data:
            return cls.from_flats(size, data["flats"])
        if "bases" in data:
            return cls.from_bases(size, data["bases"])
        raise BadFlats("matroid needs 'flats' or 'bases'")

    def to_json(self) -> dict:
        return {"ground": self.size, "flats": [sorted(f) for f in self.sorted_flats]}

    @cached_property
    def sorted_flats(self) -> list[frozenset[int]]:
        return sorted(self.flats, key=lambda f: (self.rank_of(f), sorted(f)))

    def closure(self, s: Iterable[int]) -> frozenset[int]:
        s = frozenset(s)
        return frozenset.intersection(*[f for f in self.flats if s <= f])

    def rank_of(self, flat: frozenset[int]) -> int:
        return self._ranks[frozenset(flat)]

    @cached_property
    def _ranks(self) -> dict:
        out = {}
        for f in sorted(self.flats, key=len):
            below = [g for g in self.flats if g < f]
            out[f] = 1 + max((out[g] for g in below), default=-1)
        return out

    @property
    def rank(self) -> int:
        return self._ranks[frozenset(range(self.size))]

    @property
    def proper_flats(self) -> list[frozenset[int]]:
        ground = frozenset(range(self.size))
        return [f for f in self.sorted_flats if f and f != ground]

    def flags(self) -> list[tuple[frozenset[int], ...]]:
        """All chains of proper nonempty flats, including the empty chain."""
        pf = self.proper_flats
        out = [()]
        stack = [((), None)]
        while stack:
            chain, last = stack.pop()
            for f in pf:
                if last is None or last < f:
                    c = chain + (f,)
                    out.append(c)
                    stack.append((c, f))
        return out

    def contraction(self, s: Iterable[int]) -> "Matroid":
        """M / F for a flat F, relabelled on the complement in increasing order."""
        f = self.closure(s)
        rest = [x for x in range(self.size) if x not in f]
        relabel = {x: i for i, x in enumerate(rest)}
        flats = [frozenset(relabel[x] for x in g - f) for g in self.flats if f <= g]
        return Matroid.from_flats(len(rest), flats)

    def restriction(self, s: Iterable[int]) -> "Matroid":
        """M | F for a flat F, relabelled in increasing order."""
        f = self.closure(s)
        keep = sorted(f)
        relabel = {x: i for i, x in enumerate(keep)}
        flats = {frozenset(relabel[x] for x in g & f) for g in self.flats}
        return Matroid.from_flats(len(keep), flats)


def ray_of_flat(size: int, flat: Iterable[int]) -> tuple[int, ...]:
    """Image of e_I in Z^size / Z(1,...,1) using coordinates x_i - x_0, i >= 1."""
    flat = set(flat)
    shift = 1 if 0 in flat else 0
    return tuple((1 if i in flat else 0) - shift for i in range(1, size))


def bergman_fan(m: Matroid) -> PolyComplex:
    """Fan of flags of proper nonempty flats, top cones weighted 1."""
    proper = m.proper_flats
    where = {f: i for i, f in enumerate(proper)}
    flags = m.flags()
    longest = max(len(c) for c in flags)
    cells = [tuple(where[f] for f in c) for c in flags if len(c) == longest]
    rays = [ray_of_flat(m.size, f) for f in proper]
    return simplicial_fan(m.size - 1, rays, cells, {i: 1 for i in range(len(cells))})


def count_flags(m: Matroid) -> dict[int, int]:
    """Number of chains of proper nonempty flats of each length, with closed subsets found by brute force."""
    ground = frozenset(range(m.size))
    proper = []
    for k in range(1, m.size):
        for s in combinations(range(m.size), k):
            s = frozenset(s)
            if s != ground and m.closure(s) == s:
                proper.append(s)
    proper.sort(key=len)
    # ending[i][k]: chains of length k whose largest flat is proper[i]
    ending = []
    for i, f in enumerate(proper):
        row = {1: 1}
        for j in range(i):
            if proper[j] < f:
                for k, c in ending[j].items():
                    row[k + 1] = row.get(k + 1, 0) + c
        ending.append(row)
    out = {0: 1}
    for row in ending:
        for k, c in row.items():
            out[k] = out.get(k, 0) + c
    return out


# ---------------------------------------------------------------------------
# balancing


def check_balanced(cx: PolyComplex) -> dict:
    """Check the balancing condition at every codimension-one face."""
    if not cx.is_pure:
        raise NotPure("balancing needs a pure-dimensional complex",
                      dims=sorted({cx.faces[i].dim for i in cx.maximal}))
    missing = [i for i in cx.maximal if i not in cx.weights]
    if missing:
        raise MissingWeights(f"{len(missing)} top face(s) have no weight",
                             faces=[cx.faces[i].to_json() for i in missing])
    d = cx.dim
    violations = []
    for t in cx.faces_of_dim(d - 1):
        tau = cx.faces[t]
        q = quotient_map(tau.direction_space)
        k = len(q)
        base = tau.relint_point
        total = [0] * k
        for s in cx.up[t]:
            if s == t or s not in cx.weights:
                continue
            v = matvec(q, tuple(a - b for a, b in zip(cx.faces[s].relint_point, base)))
            u = primitive(v)
            total = [a + cx.weights[s] * b for a, b in zip(total, u)]
        if any(total):
            violations.append({"face": tau.to_json(), "sum": total})
    return {"balanced": not violations, "violations": violations}


# ---------------------------------------------------------------------------
# smoothness certificates


@dataclass(frozen=True)
class SmoothnessCertificate:
    face: object
    matroid: Matroid
    basis: Matrix

    @classmethod
    def from_json(cls, data: dict, cx: PolyComplex) -> "SmoothnessCertificate":
        from .polyhedra import parse_polyhedron

        face = data["face"]
        if isinstance(face, dict):
            face = cx.index(parse_polyhedron(cx.n, face).normalized())
        return cls(int(face) if not isinstance(face, int) else face,
                   Matroid.from_json(data["matroid"]),
                   tuple(vec(r) for r in data["basis"]))


def transform_fan(fan: PolyComplex, m: Matrix) -> PolyComplex:
    cones = [projection_image(fan.faces[i], m) for i in fan.maximal]
    return build_complex(len(m), cones, (), check_intersections=False)


def check_smooth_certificate(cx: PolyComplex, cert: SmoothnessCertificate) -> bool:
    """Whether the star-quotient at ``cert.face``, read through ``cert.basis``, has Bergman support.

    Dimension mismatches and star-quotients with lineality return False.
    """
    sq = star_quotient(cx, cert.face).fan
    k = sq.n
    b = cert.basis
    if cert.matroid.size - 1 != k or len(b) != k or any(len(r) != k for r in b):
        return False
    if k:
        if any(x.denominator != 1 for r in b for x in r) or abs(det(b)) != 1:
            raise BadBasis("certificate basis is not unimodular", basis=[[str(x) for x in r] for r in b])
    if any(sq.faces[i].lineality.dim for i in sq.maximal):
        return False
    berg = bergman_fan(cert.matroid)
    if sq.dim != berg.dim:
        return False
    img = transform_fan(sq, b) if k else sq
    return same_support(img, berg)


def candidate_bases(sq: PolyComplex, berg: PolyComplex) -> Iterable[Matrix]:
    """Unimodular matrices sending k rays of ``sq`` to k rays of ``berg``."""
    k = sq.n
    if k == 0:
        yield ()
        return
    rs = [sq.faces[i].rays[0] for i in sq.faces_of_dim(1)]
    rb = [berg.faces[i].rays[0] for i in berg.faces_of_dim(1)]
    for src in combinations(rs, k):
        a = tuple(vec(r) for r in src)
        if rank(a, k) < k or abs(det(a)) != 1:
            continue
        ainv = inverse(transpose(a, k))
        for tgt in permutations(rb, k):
            bt = transpose(tuple(vec(r) for r in tgt), k)
            m = matmul(bt, ainv)
            if any(x.denominator != 1 for r in m for x in r):
                continue
            yield m


def search_certificate(cx: PolyComplex, face, matroids: Iterable[Matroid] | None = None,
                       max_size: int = 5) -> SmoothnessCertificate | None:
    """Look for a certificate among ``matroids`` (default: all loopless matroids up to ``max_size`` elements)."""
    i = cx.find(face)
    sq = star_quotient(cx, i).fan
    k = sq.n
    if matroids is None:
        matroids = all_matroids(k + 1) if k + 1 <= max_size else []
    for m in matroids:
        if m.size - 1 != k:
            continue
        berg = bergman_fan(m)
        if berg.dim != sq.dim or len(berg.faces_of_dim(1)) != len(sq.faces_of_dim(1)):
            continue
        for b in candidate_bases(sq, berg):
            cert = SmoothnessCertificate(i, m, b)
            if check_smooth_certificate(cx, cert):
                return cert
    return None


def all_matroids(size: int) -> list[Matroid]:
    """Every loopless matroid on ``size`` elements, from all basis systems (small sizes only)."""
    out = {}
    ground = range(size)
    for r in range(1, size + 1):
        subsets = [frozenset(s) for s in combinations(ground, r)]
        for mask in product((0, 1), repeat=len(subsets)):
            bs = [s for s, keep in zip(subsets, mask) if keep]
            if not bs:
                continue
            try:
                m = Matroid.from_bases(size, bs)
            except (BadBases, NotLoopless):
                continue
            out[m.flats] = m
    return list(out.values())
