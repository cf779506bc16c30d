"""Rational polyhedra, polyhedral complexes, fans and their basic constructions.

Polyhedra are entered by generators (points and integer rays).  Their
inequality description is derived with the double description method applied
to the homogenized cone ``cone{(v, 1), (r, 0)}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from .lattice import as_fractions, clear_denominators, is_primitive_integer, primitive, quotient_map
from .linalg import (
    Matrix,
    Row,
    Subspace,
    det,
    dot,
    identity,
    inverse,
    kernel,
    matvec,
    rank,
    to_fraction,
    vec,
)


class ComplexError(ValueError):
    """Base class for structural violations; ``report`` is JSON-ready."""

    def __init__(self, message: str, **report):
        super().__init__(message)
        self.report = {"violation": type(self).__name__, "message": message, **report}


class NotFaceClosed(ComplexError):
    pass


class BadIntersection(ComplexError):
    pass


class NonRationalInput(ComplexError):
    pass


class NonPrimitiveRay(ComplexError):
    pass


class FanViolation(ComplexError):
    pass


class FaceNotInComplex(ComplexError):
    pass


class NotOpen(ComplexError):
    pass


# ---------------------------------------------------------------------------
# double description


def cone_dd(ineqs: Sequence[Sequence], eqs: Sequence[Sequence], n: int):
    """Generators of ``{x : eqs x = 0, ineqs x >= 0}`` in Q^n.

    Returns ``(lineality, rays)``: the lineality space and primitive integer
    extreme rays of the pointed part (which lies in the orthogonal complement
    of the lineality space).
    """
    ineqs = [vec(a) for a in ineqs]
    eqs = [vec(e) for e in eqs]
    lin = kernel(tuple(eqs + ineqs), n) if eqs or ineqs else Subspace.full(n)
    # complement of the lineality space inside the solutions of eqs
    w = kernel(tuple(eqs) + lin.basis, n).basis if eqs or lin.dim else Subspace.full(n).basis
    k = len(w)
    if k == 0:
        return lin, []
    B = [clear_denominators([dot(a, wj) for wj in w]) for a in ineqs]

    chosen: list[int] = []
    for i, b in enumerate(B):
        if rank([B[j] for j in chosen] + [b], k) > len(chosen):
            chosen.append(i)
        if len(chosen) == k:
            break
    inv = inverse(tuple(as_fractions(B[i]) for i in chosen))
    rays = [primitive([inv[r][c] for r in range(k)]) for c in range(k)]
    zsets = [frozenset(chosen[j] for j in range(k) if j != c) for c in range(k)]

    for i in range(len(B)):
        if i in chosen:
            continue
        b = B[i]
        vals = [sum(x * y for x, y in zip(b, r)) for r in rays]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        new = [(rays[j], zsets[j] | ({i} if v == 0 else set())) for j, v in enumerate(vals) if v >= 0]
        for p in pos:
            for q in neg:
                common = zsets[p] & zsets[q]
                if len(common) < k - 2:
                    continue
                # combinatorial adjacency: no third ray is tight on all of ``common``
                if any(common <= zsets[t] for t in range(len(rays)) if t != p and t != q):
                    continue
                vp, vq = vals[p], vals[q]
                r = primitive([vp * y - vq * x for x, y in zip(rays[p], rays[q])])
                new.append((r, common | {i}))
        rays = [r for r, _ in new]
        zsets = [z for _, z in new]

    out = []
    for c in map(as_fractions, rays):
        x = [Fraction(0)] * n
        for cj, wj in zip(c, w):
            if cj:
                x = [a + cj * b for a, b in zip(x, wj)]
        out.append(primitive(x))
    return lin, sorted(set(out))


# ---------------------------------------------------------------------------
# polyhedra


def parse_rational(x) -> Fraction:
    if isinstance(x, float):
        raise NonRationalInput(f"floating point value {x!r} is not allowed", value=repr(x))
    try:
        return to_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise NonRationalInput(f"cannot parse {x!r} as a rational", value=repr(x)) from None


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """``conv(vertices) + cone(rays)`` in Q^n."""

    n: int
    vertices: tuple[Row, ...]
    rays: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a polyhedron needs at least one point generator")
        object.__setattr__(self, "vertices", tuple(vec(v) for v in self.vertices))
        object.__setattr__(self, "rays", tuple(primitive(r) for r in self.rays if any(r)))
        for g in self.vertices + tuple(as_fractions(r) for r in self.rays):
            if len(g) != self.n:
                raise ValueError(f"generator {g} does not live in Q^{self.n}")

    @classmethod
    def cone(cls, rays: Iterable[Sequence], n: int) -> "Polyhedron":
        return cls(n, (tuple(Fraction(0) for _ in range(n)),), tuple(tuple(r) for r in rays))

    @classmethod
    def from_h(cls, n: int, eqs: Sequence[tuple], ineqs: Sequence[tuple]) -> "Polyhedron | None":
        """Polyhedron ``{x : <x,m> = a for (m,a) in eqs, <x,m> >= a for (m,a) in ineqs}``.

        Returns None for the empty set.
        """
        heq = [tuple(vec(m)) + (-to_fraction(a),) for m, a in eqs]
        hin = [tuple(vec(m)) + (-to_fraction(a),) for m, a in ineqs]
        hin.append(tuple(Fraction(0) for _ in range(n)) + (Fraction(1),))
        lin, rays = cone_dd(hin, heq, n + 1)
        verts = [tuple(Fraction(x, r[-1]) for x in r[:-1]) for r in rays if r[-1] > 0]
        if not verts:
            return None
        dirs = [r[:-1] for r in rays if r[-1] == 0]
        for b in lin.basis:
            dirs.append(primitive(b[:-1]))
            dirs.append(tuple(-x for x in primitive(b[:-1])))
        return cls(n, tuple(verts), tuple(dirs))

    @property
    def generators(self) -> list[Row]:
        """Homogenized generators (v, 1) and (r, 0)."""
        return [v + (Fraction(1),) for v in self.vertices] + [
            as_fractions(r) + (Fraction(0),) for r in self.rays
        ]

    @cached_property
    def _hrep(self):
        lin, facets = cone_dd(self.generators, [], self.n + 1)
        return lin, facets

    @property
    def equations(self) -> list[tuple[Row, Fraction]]:
        """Pairs (m, a) with <x, m> = a on the affine hull."""
        lin, _ = self._hrep
        return [(b[:-1], -b[-1]) for b in lin.basis]

    @property
    def inequalities(self) -> list[tuple[Row, Fraction]]:
        """Facet inequalities (m, a) meaning <x, m> >= a, with m integral and primitive."""
        _, facets = self._hrep
        return [(as_fractions(f[:-1]), Fraction(-f[-1])) for f in facets if any(f[:-1])]

    @cached_property
    def key(self):
        lin, facets = self._hrep
        return (self.n, lin.basis, frozenset(facets))

    def __eq__(self, other):
        return isinstance(other, Polyhedron) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @cached_property
    def dim(self) -> int:
        return rank(self.generators, self.n + 1) - 1

    @property
    def is_bounded(self) -> bool:
        return not self.rays

    @property
    def is_cone(self) -> bool:
        return all(x == 0 for v in self.vertices for x in v)

    @cached_property
    def relint_point(self) -> Row:
        k = len(self.vertices)
        pt = [sum((v[i] for v in self.vertices), Fraction(0)) / k for i in range(self.n)]
        for r in self.rays:
            pt = [a + b for a, b in zip(pt, r)]
        return tuple(pt)

    @cached_property
    def direction_space(self) -> Subspace:
        """Linear span of P - P (the tangent space N_P tensor Q)."""
        v0 = self.vertices[0]
        gens = [tuple(a - b for a, b in zip(v, v0)) for v in self.vertices[1:]]
        gens += [as_fractions(r) for r in self.rays]
        return Subspace.span(gens, self.n)

    def contains(self, x: Sequence) -> bool:
        x = vec(x)
        return all(dot(m, x) == a for m, a in self.equations) and all(
            dot(m, x) >= a for m, a in self.inequalities
        )

    def in_relint(self, x: Sequence) -> bool:
        x = vec(x)
        return all(dot(m, x) == a for m, a in self.equations) and all(
            dot(m, x) > a for m, a in self.inequalities
        )

    def contains_polyhedron(self, other: "Polyhedron") -> bool:
        if not all(self.contains(v) for v in other.vertices):
            return False
        rc = self.recession_hrep()
        return all(all(dot(m, r) == 0 for m in rc[0]) and all(dot(m, r) >= 0 for m in rc[1])
                   for r in (as_fractions(r) for r in other.rays))

    def recession_hrep(self):
        return [m for m, _ in self.equations], [m for m, _ in self.inequalities]

    @cached_property
    def lineality(self) -> Subspace:
        eqs, ineqs = self.recession_hrep()
        return kernel(tuple(eqs) + tuple(ineqs), self.n) if (eqs or ineqs) else Subspace.full(self.n)

    def _tight_sets(self):
        gens = self.generators
        _, facets = self._hrep
        return [frozenset(i for i, g in enumerate(gens) if dot(f, g) == 0) for f in facets]

    def face_sets(self) -> list[frozenset[int]]:
        """Generator index sets of all nonempty faces (including P itself)."""
        nv = len(self.vertices)
        full = frozenset(range(len(self.generators)))
        tight = self._tight_sets()
        found = {full}
        frontier = [full]
        while frontier:
            nxt = []
            for s in frontier:
                for t in tight:
                    u = s & t
                    if u != s and any(i < nv for i in u) and u not in found:
                        found.add(u)
                        nxt.append(u)
            frontier = nxt
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def face_from_set(self, s: frozenset[int]) -> "Polyhedron":
        nv = len(self.vertices)
        return Polyhedron(
            self.n,
            tuple(self.vertices[i] for i in sorted(s) if i < nv),
            tuple(self.rays[i - nv] for i in sorted(s) if i >= nv),
        )

    def faces(self) -> list["Polyhedron"]:
        return [self.face_from_set(s).normalized() for s in self.face_sets()]

    def normalized(self) -> "Polyhedron":
        """Irredundant generators (for pointed polyhedra).

        A generator is kept when the facets through it cut out a ray of the
        homogenized cone, i.e. have rank dim P.
        """
        if self.lineality.dim:
            return self
        _, facets = self._hrep
        d = self.dim
        verts, rays = set(), set()
        nv = len(self.vertices)
        for i, g in enumerate(self.generators):
            tight = [f for f in facets if dot(f, g) == 0]
            if rank(tight, self.n + 1) == d if tight else d == 0:
                if i < nv:
                    verts.add(self.vertices[i])
                else:
                    rays.add(self.rays[i - nv])
        out = Polyhedron(self.n, tuple(sorted(verts)), tuple(sorted(rays)))
        out.__dict__["_hrep"] = self._hrep
        return out

    def intersection(self, other: "Polyhedron") -> "Polyhedron | None":
        p = Polyhedron.from_h(
            self.n, self.equations + other.equations, self.inequalities + other.inequalities
        )
        return None if p is None else p.normalized()

    def to_json(self) -> dict:
        from .linalg import fmt

        return {
            "vertices": [[fmt(x) for x in v] for v in self.vertices],
            "rays": [list(r) for r in self.rays],
        }

    def __repr__(self):
        vs = ", ".join("(" + ",".join(str(x) for x in v) + ")" for v in self.vertices)
        rs = ", ".join(str(r) for r in self.rays)
        return f"Polyhedron(dim={self.dim}, vertices=[{vs}], rays=[{rs}])"


def recession_cone(p: Polyhedron) -> Polyhedron:
    """Recession cone, obtained by zeroing the offsets of the inequality description."""
    eqs = [(m, 0) for m, _ in p.equations]
    ineqs = [(m, 0) for m, _ in p.inequalities]
    out = Polyhedron.from_h(p.n, eqs, ineqs)
    assert out is not None
    return out.normalized()


def projection_image(p: Polyhedron, m: Matrix, shift: Sequence | None = None) -> Polyhedron:
    """Image of the cone generated by ``p - shift`` under the integer matrix ``m``."""
    k = len(m)
    shift = vec(shift) if shift is not None else tuple(Fraction(0) for _ in range(p.n))
    gens = [matvec(m, tuple(a - b for a, b in zip(v, shift))) for v in p.vertices]
    gens += [matvec(m, as_fractions(r)) for r in p.rays]
    rays = [primitive(g) for g in gens if any(g)]
    return Polyhedron.cone(rays, k).normalized()


# ---------------------------------------------------------------------------
# complexes


@dataclass(eq=False)
class PolyComplex:
    """A face-closed rational polyhedral complex with partial compactification R."""

    n: int
    faces: tuple[Polyhedron, ...]
    R: tuple[tuple[int, ...], ...] = ()
    weights: dict[int, int] = field(default_factory=dict)
    up: tuple[frozenset[int], ...] = ()

    @cached_property
    def _index(self) -> dict:
        return {f.key: i for i, f in enumerate(self.faces)}

    def index(self, p: Polyhedron) -> int:
        try:
            return self._index[p.key]
        except KeyError:
            raise FaceNotInComplex(f"{p!r} is not a face of the complex") from None

    def find(self, face) -> int:
        """Resolve a face given as an index or a Polyhedron."""
        if isinstance(face, Polyhedron):
            return self.index(face)
        if isinstance(face, int) and 0 <= face < len(self.faces):
            return face
        raise FaceNotInComplex(f"no face {face!r}")

    def __len__(self):
        return len(self.faces)

    @cached_property
    def dim(self) -> int:
        return max(f.dim for f in self.faces)

    @cached_property
    def maximal(self) -> tuple[int, ...]:
        return tuple(i for i in range(len(self.faces)) if self.up[i] == frozenset({i}))

    @property
    def is_pure(self) -> bool:
        return len({self.faces[i].dim for i in self.maximal}) == 1

    @property
    def is_fan(self) -> bool:
        return all(f.is_cone for f in self.faces)

    def down(self, i: int) -> frozenset[int]:
        return frozenset(j for j in range(len(self.faces)) if i in self.up[j])

    def faces_of_dim(self, d: int) -> list[int]:
        return [i for i, f in enumerate(self.faces) if f.dim == d]

    def vertex_ids(self) -> list[int]:
        return self.faces_of_dim(0)

    def bounded(self) -> list[int]:
        return [i for i, f in enumerate(self.faces) if f.is_bounded]

    def carrier(self, x: Sequence) -> int | None:
        """The face whose relative interior contains x."""
        for i, f in enumerate(self.faces):
            if f.in_relint(x):
                return i
        return None

    def is_open(self, members: Iterable[int]) -> bool:
        s = set(members)
        return all(self.up[i] <= s for i in s)

    def to_json(self) -> dict:
        out = {"rank": self.n, "rays_R": [list(r) for r in self.R], "faces": []}
        for i in self.maximal:
            d = self.faces[i].to_json()
            if i in self.weights:
                d["weight"] = self.weights[i]
            out["faces"].append(d)
        return out


def _sort_key(p: Polyhedron):
    return (p.dim, tuple(sorted(p.vertices)), tuple(sorted(p.rays)))


def build_complex(
    n: int,
    polys: Sequence[Polyhedron],
    R: Sequence[Sequence[int]] = (),
    weights: dict | None = None,
    check_intersections: bool = True,
    require_closed: bool = False,
) -> PolyComplex:
    """Close ``polys`` under faces, check the intersection axiom, index the lattice.

    ``weights`` maps input positions (indices into ``polys``) to integers.
    """
    for r in R:
        if len(r) != n or not any(r):
            raise NonPrimitiveRay(f"compactification ray {list(r)} is zero or of wrong length", ray=list(r))
        if not is_primitive_integer(r):
            raise NonPrimitiveRay(f"compactification ray {list(r)} is not a primitive integer vector", ray=[str(x) for x in r])
    polys = [p.normalized() for p in polys]
    allfaces: dict = {}
    contain: set[tuple] = set()
    facekeys: dict = {}
    for p in polys:
        sets = p.face_sets()
        fs = [p.face_from_set(s).normalized() for s in sets]
        facekeys.setdefault(p.key, set()).update(f.key for f in fs)
        for f in fs:
            allfaces.setdefault(f.key, f)
        for (sa, fa), (sb, fb) in combinations(zip(sets, fs), 2):
            if sa <= sb:
                contain.add((fa.key, fb.key))
            if sb <= sa:
                contain.add((fb.key, fa.key))
    if require_closed:
        listed = {p.key for p in polys}
        missing = [f for k, f in allfaces.items() if k not in listed]
        if missing:
            raise NotFaceClosed(
                f"{len(missing)} face(s) of listed polyhedra are not listed",
                missing=[f.to_json() for f in missing],
            )
    faces = sorted(allfaces.values(), key=_sort_key)
    idx = {f.key: i for i, f in enumerate(faces)}
    up = [{i} for i in range(len(faces))]
    for a, b in contain:
        up[idx[a]].add(idx[b])
    up_t = tuple(frozenset(s) for s in up)
    maximal = [i for i in range(len(faces)) if up_t[i] == frozenset({i})]
    if check_intersections:
        check_intersection_axiom([faces[i] for i in maximal], facekeys)
    w = {}
    for pos, val in (weights or {}).items():
        w[idx[polys[pos].key]] = int(val)
    return PolyComplex(n, tuple(faces), tuple(tuple(int(x) for x in r) for r in R), w, up_t)


def simplicial_fan(n: int, rays: Sequence[Sequence[int]], cells: Sequence[Sequence[int]],
                   weights: dict | None = None, R=()) -> PolyComplex:
    """Fan whose cones are generated by subsets of the given simplicial ``cells``.

    ``cells`` index into ``rays``; each cell must span a simplicial cone and the
    cells must already meet along common faces.  No polyhedral computation is
    done, so this is the fast path for fans known to be well formed.
    ``weights`` maps cell positions to integers.
    """
    rays = [tuple(int(x) for x in r) for r in rays]
    sets = set()
    for c in cells:
        c = tuple(sorted(c))
        for k in range(len(c) + 1):
            sets.update(combinations(c, k))
    order = sorted(sets, key=lambda t: (len(t), sorted(rays[i] for i in t)))
    pos = {t: i for i, t in enumerate(order)}
    up = [set() for _ in order]
    for t, i in pos.items():
        ts = set(t)
        for u, j in pos.items():
            if ts <= set(u):
                up[i].add(j)
    faces = tuple(Polyhedron.cone([rays[i] for i in t], n) for t in order)
    w = {pos[tuple(sorted(cells[k]))]: int(v) for k, v in (weights or {}).items()}
    return PolyComplex(n, faces, tuple(tuple(r) for r in R), w, tuple(frozenset(s) for s in up))


def check_intersection_axiom(maxfaces: Sequence[Polyhedron], facekeys: dict | None = None) -> None:
    """Every two maximal polyhedra meet in a common face (or not at all).

    ``facekeys`` maps a polyhedron key to the keys of its faces; it is computed
    when not supplied.
    """
    if facekeys is None:
        facekeys = {p.key: {f.key for f in p.faces()} for p in maxfaces}
    for a, b in combinations(maxfaces, 2):
        inter = a.intersection(b)
        if inter is None:
            continue
        ok = inter.key in facekeys[a.key] and inter.key in facekeys[b.key]
        if not ok:
            raise BadIntersection(
                "two polyhedra meet in a set that is not a common face",
                first=a.to_json(), second=b.to_json(), intersection=inter.to_json(),
            )


def parse_polyhedron(n: int, d: dict) -> Polyhedron:
    verts = d.get("vertices") or []
    if not verts:
        raise NonRationalInput("every face needs at least one vertex", face=d)
    vs = []
    for v in verts:
        if len(v) != n:
            raise NonRationalInput(f"vertex {v} has wrong length (rank {n})", vertex=v)
        vs.append(tuple(parse_rational(x) for x in v))
    rs = []
    for r in d.get("rays") or []:
        rr = tuple(parse_rational(x) for x in r)
        if len(rr) != n or not any(rr):
            raise NonPrimitiveRay(f"ray {r} is zero or has wrong length", ray=r)
        rs.append(primitive(rr))
    return Polyhedron(n, tuple(vs), tuple(rs))


def validate_complex(data: dict, check_intersections: bool = True) -> PolyComplex:
    """Parse and validate the JSON complex schema.

    ``{"rank": n, "rays_R": [[ints]], "faces": [{"vertices": [...], "rays": [...], "weight": w}]}``
    Listed faces are the maximal ones unless ``"closed": true`` is given, in which
    case the list must already be closed under taking faces.
    """
    try:
        n = int(data["rank"])
        faces_in = list(data["faces"])
    except (KeyError, TypeError, ValueError):
        raise NonRationalInput("complex needs an integer 'rank' and a 'faces' list") from None
    R = []
    for r in data.get("rays_R") or []:
        rr = tuple(parse_rational(x) for x in r)
        if any(x.denominator != 1 for x in rr):
            raise NonPrimitiveRay(f"compactification ray {r} is not integral", ray=[str(x) for x in rr])
        R.append(tuple(int(x) for x in rr))
    polys = [parse_polyhedron(n, f) for f in faces_in]
    weights = {i: f["weight"] for i, f in enumerate(faces_in) if f.get("weight") is not None}
    for i, w in weights.items():
        if isinstance(w, bool) or not isinstance(w, int):
            raise NonRationalInput(f"weight {w!r} is not an integer", weight=repr(w))
    return build_complex(
        n, polys, R, weights,
        check_intersections=check_intersections,
        require_closed=bool(data.get("closed")),
    )


def complex_from_cones(n: int, cones: Sequence[Sequence[Sequence[int]]], R=(), weights=None,
                       check_intersections: bool = False) -> PolyComplex:
    return build_complex(n, [Polyhedron.cone(c, n) for c in cones], R, weights,
                         check_intersections=check_intersections)


# ---------------------------------------------------------------------------
# fans, recession, cone over


@dataclass(eq=False)
class EnrichedFan:
    """A fan in N' together with a surjection pi: N -> N' and rays R in N."""

    fan: PolyComplex
    pi: Matrix
    R: tuple[tuple[int, ...], ...]
    source_rank: int

    @property
    def target_rank(self) -> int:
        return self.fan.n

    def __post_init__(self):
        if not self.fan.is_fan:
            raise FanViolation("the underlying complex of an enriched fan must consist of cones")
        if len(self.pi) != self.fan.n or any(len(r) != self.source_rank for r in self.pi):
            raise ValueError("projection matrix has the wrong shape")
        if self.fan.n and rank(self.pi, self.source_rank) != self.fan.n:
            raise ValueError("projection is not surjective over Q")

    def image(self, v: Sequence) -> Row:
        return matvec(self.pi, vec(v)) if self.pi else ()

    @classmethod
    def trivial(cls, fan: PolyComplex) -> "EnrichedFan":
        return cls(fan, identity(fan.n), fan.R, fan.n)


def point_fan(n: int) -> PolyComplex:
    return complex_from_cones(n, [[]])


def delta_S() -> EnrichedFan:
    """The base object ({0}, 0 -> 0, empty)."""
    return EnrichedFan(point_fan(0), (), (), 0)


def delta_S_dagger() -> EnrichedFan:
    """The base object ({0}, Z -> 0, empty)."""
    return EnrichedFan(point_fan(0), (), (), 1)


def recession_fan(cx: PolyComplex) -> PolyComplex:
    cones = {}
    for f in cx.faces:
        c = recession_cone(f)
        cones.setdefault(c.key, c)
    try:
        return build_complex(cx.n, list(cones.values()), cx.R, check_intersections=True)
    except BadIntersection as e:
        raise FanViolation("recession cones do not form a fan (complex is not completable)",
                           **{k: v for k, v in e.report.items() if k not in ("violation", "message")}) from None


def tilde(p: Polyhedron) -> Polyhedron:
    """Closure of {(x, a) : a > 0, x / a in P} in N x R."""
    rays = [primitive(v + (Fraction(1),)) for v in p.vertices]
    rays += [tuple(r) + (0,) for r in p.rays]
    return Polyhedron.cone(rays, p.n + 1).normalized()


def at_height_zero(p: Polyhedron) -> Polyhedron:
    """P_0: the recession cone placed at height zero."""
    rc = recession_cone(p)
    return Polyhedron.cone([tuple(r) + (0,) for r in rc.rays], p.n + 1).normalized()


@dataclass(eq=False)
class ConeOver:
    efan: EnrichedFan
    tilde: dict[int, int]
    zero: dict[int, int]

    def base_projection(self) -> Matrix:
        """Projection N x Z -> Z onto the last factor (the map to the standard log point)."""
        n = self.efan.source_rank
        return (tuple(Fraction(int(j == n - 1)) for j in range(n)),)


def cone_over(cx: PolyComplex, check: bool = True) -> ConeOver:
    """The fan of all cones P~ and P_0, trivially enriched on N x Z, with R x {0}."""
    n1 = cx.n + 1
    tl = [tilde(f) for f in cx.faces]
    zr = [at_height_zero(f) for f in cx.faces]
    try:
        fan = build_complex(n1, [tl[i] for i in cx.maximal] + zr,
                            [tuple(r) + (0,) for r in cx.R], check_intersections=check)
    except BadIntersection as e:
        raise FanViolation("the cone over the complex is not a fan",
                           **{k: v for k, v in e.report.items() if k not in ("violation", "message")}) from None
    ef = EnrichedFan(fan, identity(n1), fan.R, n1)
    return ConeOver(ef, {i: fan.index(t) for i, t in enumerate(tl)}, {i: fan.index(z) for i, z in enumerate(zr)})


@dataclass(frozen=True)
class OpenStar:
    host: PolyComplex
    face: int
    members: tuple[int, ...]


def open_star(cx: PolyComplex, face) -> OpenStar:
    i = cx.find(face)
    return OpenStar(cx, i, tuple(sorted(cx.up[i])))


def star_quotient(cx: PolyComplex, face) -> EnrichedFan:
    """Enriched star-quotient fan (Sigma_P, N -> N/N_P, R') over the trivial point.

    Cones are images of ``Q - p`` (p in relint P) for Q containing P; R' keeps
    the rays of R lying in the recession cone of such a Q.
    """
    i = cx.find(face)
    p = cx.faces[i]
    q = quotient_map(p.direction_space)
    k = len(q)
    cones = {}
    for j in cx.up[i]:
        c = projection_image(cx.faces[j], q, p.relint_point) if k else Polyhedron.cone([], 0)
        cones.setdefault(c.key, c)
    Rp = []
    for r in cx.R:
        if any(recession_cone(cx.faces[j]).contains(as_fractions(r)) for j in cx.up[i]):
            Rp.append(tuple(r))
    fan = build_complex(k, list(cones.values()), (), check_intersections=False)
    return EnrichedFan(fan, q if k else (), tuple(Rp), cx.n)


# ---------------------------------------------------------------------------
# refinement and support comparison


def _facet_keys(p: Polyhedron) -> list:
    d = p.dim
    out = []
    for s in p.face_sets():
        f = p.face_from_set(s)
        if f.dim == d - 1:
            out.append(f.normalized())
    return out


def covered_by(cell: Polyhedron, pieces: Sequence[Polyhedron]) -> bool:
    """Whether face-to-face full-dimensional ``pieces`` inside ``cell`` cover it.

    Every facet of a piece must lie on the boundary of ``cell`` or be shared
    with another piece.
    """
    d = cell.dim
    pieces = [p for p in pieces if p.dim == d]
    if d == 0:
        return bool(pieces)
    if not pieces:
        return False
    cell_facets = _facet_keys(cell)
    count: dict = {}
    rep = {}
    for p in pieces:
        for f in _facet_keys(p):
            count[f.key] = count.get(f.key, 0) + 1
            rep[f.key] = f
    for k, c in count.items():
        if c >= 2:
            continue
        f = rep[k]
        if not any(cf.contains_polyhedron(f) for cf in cell_facets):
            return False
    return True


def support_contained(a: PolyComplex, b: PolyComplex) -> bool:
    """|a| ⊆ |b| for complexes in the same ambient lattice."""
    for i in a.maximal:
        cell = a.faces[i]
        pieces = []
        for j in b.maximal:
            inter = cell.intersection(b.faces[j])
            if inter is not None and inter.dim == cell.dim:
                pieces.append(inter)
        if not covered_by(cell, pieces):
            return False
    return True


def same_support(a: PolyComplex, b: PolyComplex) -> bool:
    if a.n != b.n:
        return False
    return support_contained(a, b) and support_contained(b, a)


def is_refinement(fine: PolyComplex, coarse: PolyComplex) -> bool:
    if fine.n != coarse.n or set(fine.R) != set(coarse.R):
        return False
    for i in fine.maximal:
        f = fine.faces[i]
        if not any(coarse.faces[j].contains_polyhedron(f) for j in coarse.maximal):
            return False
    return support_contained(coarse, fine)


# ---------------------------------------------------------------------------
# predicates


def is_unimodular_cone(c: Polyhedron) -> bool:
    """Rays are part of a lattice basis (gcd of maximal minors is 1)."""
    rays = c.rays
    k = len(rays)
    if k != c.dim:
        return False
    if k == 0:
        return True
    g = 0
    for cols in combinations(range(c.n), k):
        m = tuple(tuple(Fraction(r[j]) for j in cols) for r in rays)
        g = gcd(g, abs(int(det(m))))
        if g == 1:
            return True
    return g == 1


def is_unimodular_fan(fan: PolyComplex) -> bool:
    return all(is_unimodular_cone(fan.faces[i]) for i in fan.maximal)


def has_lineality(p: Polyhedron) -> bool:
    return p.lineality.dim > 0
