"""Descent data over the 2-skeleton of the bounded faces.

Bundles on open stars are trivial, so an object is a connection per vertex
star together with an invertible gluing matrix per edge.  Edges are keyed
``"vi-vj"`` with ``i < j``; the matrix maps the fiber at ``vi`` to the fiber
at ``vj`` and the reverse edge carries the inverse.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .bar import BarSetup
from .connections import TropConnection, is_integrable
from .forms import ComplexSite, FormAlgebra, one_forms, restrict_forms
from .linalg import (
    Matrix,
    Subspace,
    add,
    det,
    fmt,
    identity,
    inverse,
    is_zero,
    kernel,
    mat,
    matmul,
    scale,
    sub,
    zeros,
)
from .polyhedra import ComplexError, PolyComplex


class NotSimplicial(ComplexError):
    pass


class ContainsLine(ComplexError):
    pass


class Disconnected(ComplexError):
    pass


class SkeletonMismatch(ComplexError):
    pass


class NotCycle(ComplexError):
    pass


class NotCommuting(ComplexError):
    pass


class BadObject(ComplexError):
    pass


@dataclass(eq=False)
class Skeleton:
    """Vertices, edges and triangles of the bounded part, with form data on stars."""

    cx: PolyComplex
    site: ComplexSite
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    edge_faces: dict
    triangle_faces: dict

    @property
    def labels(self) -> list[str]:
        return [f"v{i}" for i in range(len(self.vertices))]

    def edge_key(self, a: int, b: int) -> str:
        return f"v{min(a, b)}-v{max(a, b)}"

    @cached_property
    def setups(self) -> list[BarSetup]:
        return [BarSetup.from_algebra(FormAlgebra(self.site, self.site.open_star(f))) for f in self.vertices]

    def vertex_forms(self, a: int):
        return one_forms(self.site, self.site.open_star(self.vertices[a]))

    def edge_forms(self, e: tuple[int, int]):
        return one_forms(self.site, self.site.open_star(self.edge_faces[e]))

    @cached_property
    def restrictions(self) -> dict:
        """(vertex, edge) -> matrix Omega^1(Star v) -> Omega^1(Star e)."""
        out = {}
        for e in self.edges:
            ef = self.edge_forms(e)
            for a in e:
                out[(a, e)] = restrict_forms(self.vertex_forms(a), ef)
        return out

    def neighbors(self, a: int) -> list[int]:
        return sorted({b for e in self.edges for b in e if a in e and b != a})

    def spanning_tree(self, root: int = 0) -> tuple[dict, list[tuple[int, int]]]:
        """BFS parents and the list of tree edges as (parent, child)."""
        parent = {root: None}
        order = [root]
        tree = []
        k = 0
        while k < len(order):
            a = order[k]
            k += 1
            for b in self.neighbors(a):
                if b not in parent:
                    parent[b] = a
                    order.append(b)
                    tree.append((a, b))
        return parent, tree

    def to_json(self) -> dict:
        return {
            "vertices": {f"v{i}": [fmt(x) for x in self.cx.faces[f].vertices[0]] for i, f in enumerate(self.vertices)},
            "edges": [self.edge_key(*e) for e in self.edges],
            "triangles": [[f"v{a}", f"v{b}", f"v{c}"] for a, b, c in self.triangles],
            "star_one_form_dims": {f"v{i}": self.vertex_forms(i).dim for i in range(len(self.vertices))},
        }


def build_skeleton(cx: PolyComplex, reading: str = "open") -> Skeleton:
    for i, f in enumerate(cx.faces):
        if f.lineality.dim:
            raise ContainsLine("a face of the complex contains a line", face=f.to_json())
    verts = cx.vertex_ids()
    pos = {f: k for k, f in enumerate(verts)}
    bounded = set(cx.bounded())
    edges = []
    edge_faces = {}
    tris = []
    tri_faces = {}
    for i in sorted(bounded):
        f = cx.faces[i]
        if f.dim == 1:
            vs = tuple(sorted(pos[j] for j in cx.down(i) if j in pos))
            edges.append(vs)
            edge_faces[vs] = i
        elif f.dim == 2:
            vs = tuple(sorted(pos[j] for j in cx.down(i) if j in pos))
            if len(vs) != 3:
                raise NotSimplicial("a bounded 2-face is not a triangle", face=f.to_json())
            tris.append(vs)
            tri_faces[vs] = i
    edges.sort()
    tris.sort()
    sk = Skeleton(cx, ComplexSite(cx, reading), tuple(verts), tuple(edges), tuple(tris), edge_faces, tri_faces)
    if verts:
        parent, _ = sk.spanning_tree(0)
        if len(parent) != len(verts):
            raise Disconnected("the edge graph of the bounded faces is disconnected",
                               reached=len(parent), vertices=len(verts))
    return sk


# ---------------------------------------------------------------------------
# objects


@dataclass(eq=False)
class DescentObject:
    skeleton: Skeleton
    rank: int
    theta: tuple[TropConnection, ...]
    phi: dict  # (a, b) with a < b -> matrix from fiber a to fiber b

    def gluing(self, a: int, b: int) -> Matrix:
        if a < b:
            return self.phi[(a, b)]
        return inverse(self.phi[(b, a)])

    @classmethod
    def unit(cls, sk: Skeleton, rank: int = 1) -> "DescentObject":
        th = tuple(TropConnection.trivial(s, rank) for s in sk.setups)
        return cls(sk, rank, th, {e: identity(rank) for e in sk.edges})

    @classmethod
    def from_json(cls, data: dict, sk: Skeleton) -> "DescentObject":
        r = int(data["rank"])
        verts = data.get("vertices", {})
        theta = []
        for a, s in enumerate(sk.setups):
            entry = verts.get(f"v{a}", {})
            theta.append(TropConnection.from_json({"rank": r, "theta": entry.get("theta", [])}, s))
        phi = {}
        given = data.get("edges", {})
        for key in given:
            try:
                a, b = (int(t.lstrip("v")) for t in key.split("-"))
            except ValueError:
                raise BadObject(f"edge key {key!r} is not of the form vi-vj") from None
            e = (min(a, b), max(a, b))
            if e not in sk.edge_faces:
                raise BadObject(f"{key} is not an edge of the skeleton", edge=key)
        for e in sk.edges:
            fwd, bwd = f"v{e[0]}-v{e[1]}", f"v{e[1]}-v{e[0]}"
            if fwd in given:
                phi[e] = mat(given[fwd])
                if bwd in given and matmul(mat(given[bwd]), phi[e]) != identity(r):
                    raise BadObject(f"gluings on {fwd} and {bwd} are not inverse", edge=fwd)
            elif bwd in given:
                m = mat(given[bwd])
                if len(m) != r or det(m) == 0:
                    raise BadObject(f"gluing on {bwd} is not invertible", edge=bwd)
                phi[e] = inverse(m)
            else:
                phi[e] = identity(r)
        return cls(sk, r, tuple(theta), phi)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "vertices": {f"v{a}": {"theta": c.to_json()["theta"]} for a, c in enumerate(self.theta)},
            "edges": {f"v{a}-v{b}": [[fmt(x) for x in row] for row in m] for (a, b), m in self.phi.items()},
        }


def restricted(obj: DescentObject, a: int, e: tuple[int, int]) -> list[Matrix]:
    """Connection matrices of theta_a pulled to the star of edge e, one per edge form."""
    res = obj.skeleton.restrictions[(a, e)]
    r = obj.rank
    out = []
    for row in res:
        acc = zeros(r, r)
        for c, A in zip(row, obj.theta[a].theta):
            if c:
                acc = add(acc, scale(c, A))
        out.append(acc)
    return out


def validate_object(obj: DescentObject) -> dict:
    """Check ranks, integrability on stars, invertibility, intertwining and cocycles."""
    sk = obj.skeleton
    r = obj.rank
    violations = []
    for a, c in enumerate(obj.theta):
        if c.rank != r:
            violations.append({"kind": "rank", "vertex": f"v{a}"})
            continue
        ok, wit = is_integrable(c)
        if not ok:
            violations.append({"kind": "integrability", "vertex": f"v{a}",
                               "omega2_index": wit["omega2_index"]})
    if violations:
        return {"valid": False, "violations": violations}
    for e in sk.edges:
        m = obj.phi[e]
        key = sk.edge_key(*e)
        if len(m) != r or any(len(row) != r for row in m) or det(m) == 0:
            violations.append({"kind": "invertibility", "edge": key})
            continue
        a, b = e
        ra, rb = restricted(obj, a, e), restricted(obj, b, e)
        for j, (x, y) in enumerate(zip(ra, rb)):
            if matmul(m, x) != matmul(y, m):
                violations.append({"kind": "intertwining", "edge": key, "form_index": j})
                break
    if any(v["kind"] == "invertibility" for v in violations):
        return {"valid": False, "violations": violations}
    for u, v, w in sk.triangles:
        if obj.gluing(u, w) != matmul(obj.gluing(v, w), obj.gluing(u, v)):
            violations.append({"kind": "cocycle", "triangle": [f"v{u}", f"v{v}", f"v{w}"]})
    return {"valid": not violations, "violations": violations}


# ---------------------------------------------------------------------------
# morphisms


def _check_same(o1: DescentObject, o2: DescentObject) -> None:
    if o1.skeleton is not o2.skeleton:
        raise SkeletonMismatch("objects live over different skeleta")


def _vec_index(i: int, j: int, r1: int, r2: int) -> int:
    # psi is r2 x r1; entry (j, i) at i * r2 + j, as in connections.hom_direct
    return i * r2 + j


def _psi_rows_vertex(A1: Sequence[Matrix], A2: Sequence[Matrix], r1: int, r2: int, off: int, n: int):
    for a1, a2 in zip(A1, A2):
        for j in range(r2):
            for i in range(r1):
                row = [Fraction(0)] * n
                for l in range(r2):
                    row[off + _vec_index(i, l, r1, r2)] += a2[j][l]
                for l in range(r1):
                    row[off + _vec_index(l, j, r1, r2)] -= a1[l][i]
                if any(row):
                    yield tuple(row)


def _square_rows(p1: Matrix, p2: Matrix, r1: int, r2: int, off_a: int, off_b: int, n: int):
    """psi_b p1 - p2 psi_a = 0 for an edge a -> b."""
    for j in range(r2):
        for i in range(r1):
            row = [Fraction(0)] * n
            for l in range(r1):
                row[off_b + _vec_index(l, j, r1, r2)] += p1[l][i]
            for l in range(r2):
                row[off_a + _vec_index(i, l, r1, r2)] -= p2[j][l]
            if any(row):
                yield tuple(row)


def descent_hom(o1: DescentObject, o2: DescentObject) -> Subspace:
    """Morphisms as one global linear system in all psi_v (blocks in vertex order)."""
    _check_same(o1, o2)
    sk = o1.skeleton
    r1, r2 = o1.rank, o2.rank
    blk = r1 * r2
    nv = len(sk.vertices)
    n = nv * blk
    rows = []
    for a in range(nv):
        rows.extend(_psi_rows_vertex(o1.theta[a].theta, o2.theta[a].theta, r1, r2, a * blk, n))
    for a, b in sk.edges:
        rows.extend(_square_rows(o1.phi[(a, b)], o2.phi[(a, b)], r1, r2, a * blk, b * blk, n))
    return kernel(tuple(rows), n) if rows else Subspace.full(n)


def descent_hom_anchored(o1: DescentObject, o2: DescentObject, root: int = 0) -> Subspace:
    """Morphisms parametrised by psi at ``root``, transported along a spanning tree.

    psi_b = phi2_e psi_a phi1_e^{-1} along tree edges; the remaining equations are
    the vertex intertwining conditions and the non-tree squares.
    """
    _check_same(o1, o2)
    sk = o1.skeleton
    r1, r2 = o1.rank, o2.rank
    n = r1 * r2
    parent, tree = sk.spanning_tree(root)
    # transport[v] = (L, R) with psi_v = L psi_root R
    transport = {root: (identity(r2), identity(r1))}
    for a, b in tree:
        L, R = transport[a]
        transport[b] = (matmul(o2.gluing(a, b), L), matmul(R, inverse(o1.gluing(a, b))))

    def expand(L: Matrix, R: Matrix):
        # coefficient matrix of X -> L X R in the vec ordering, as n x n
        out = [[Fraction(0)] * n for _ in range(n)]
        for i in range(r1):
            for j in range(r2):
                for p in range(r1):
                    for q in range(r2):
                        c = L[j][q] * R[p][i]
                        if c:
                            out[_vec_index(i, j, r1, r2)][_vec_index(p, q, r1, r2)] += c
        return out

    rows = []
    for a in transport:
        L, R = transport[a]
        T = expand(L, R)
        for row in _psi_rows_vertex(o1.theta[a].theta, o2.theta[a].theta, r1, r2, 0, n):
            rows.append(tuple(sum((row[k] * T[k][t] for k in range(n)), Fraction(0)) for t in range(n)))
    tree_set = {tuple(sorted(e)) for e in tree}
    for a, b in sk.edges:
        if (a, b) in tree_set:
            continue
        Ta = expand(*transport[a])
        Tb = expand(*transport[b])
        for row in _square_rows(o1.phi[(a, b)], o2.phi[(a, b)], r1, r2, 0, n, 2 * n):
            full = [Fraction(0)] * n
            for t in range(n):
                full[t] = sum((row[k] * Ta[k][t] + row[n + k] * Tb[k][t] for k in range(n)), Fraction(0))
            if any(full):
                rows.append(tuple(full))
    rows = [r for r in rows if any(r)]
    return kernel(tuple(rows), n) if rows else Subspace.full(n)


def unit_object(sk: Skeleton, rank: int = 1) -> DescentObject:
    return DescentObject.unit(sk, rank)


# ---------------------------------------------------------------------------
# unipotence


def unipotent_filtration_object(obj: DescentObject) -> list[list[Subspace]] | None:
    """Increasing flag of sub-objects with trivial graded pieces, or None.

    Step j adjoins the global horizontal sections of obj / F_(j-1), found as
    families (s_v) with theta_v s_v in F_v and phi_e s_a - s_b in F_b; no
    complement needs to be chosen.
    """
    sk = obj.skeleton
    r = obj.rank
    nv = len(sk.vertices)
    flag = [[Subspace.zero(r) for _ in range(nv)]]
    while any(F.dim < r for F in flag[-1]):
        prev = flag[-1]
        ann = [kernel(F.basis, r).basis if F.dim else identity(r) for F in prev]
        n = nv * r
        rows = []
        for a in range(nv):
            for A in obj.theta[a].theta:
                for y in ann[a]:
                    row = [Fraction(0)] * n
                    for i in range(r):
                        row[a * r + i] = sum((y[k] * A[k][i] for k in range(r)), Fraction(0))
                    if any(row):
                        rows.append(tuple(row))
        for a, b in sk.edges:
            p = obj.phi[(a, b)]
            for y in ann[b]:
                row = [Fraction(0)] * n
                for i in range(r):
                    row[a * r + i] = sum((y[k] * p[k][i] for k in range(r)), Fraction(0))
                    row[b * r + i] -= y[i]
                if any(row):
                    rows.append(tuple(row))
        sol = kernel(tuple(rows), n) if rows else Subspace.full(n)
        nxt = []
        grew = False
        for a in range(nv):
            part = Subspace.span([x[a * r:(a + 1) * r] for x in sol.basis], r) + prev[a]
            grew = grew or part.dim > prev[a].dim
            nxt.append(part)
        if not grew:
            return None
        flag.append(nxt)
    return flag


def is_unipotent_object(obj: DescentObject) -> tuple[bool, list[list[Subspace]] | None]:
    f = unipotent_filtration_object(obj)
    return f is not None, f


# ---------------------------------------------------------------------------
# the elliptic normal form


def cycle_order(sk: Skeleton) -> list[int]:
    """Vertices of a cycle skeleton starting at v0 towards its smaller neighbour."""
    nv = len(sk.vertices)
    if nv < 3 or len(sk.edges) != nv or sk.triangles or any(len(sk.neighbors(a)) != 2 for a in range(nv)):
        raise NotCycle("the skeleton is not a single cycle", vertices=nv, edges=len(sk.edges))
    order = [0]
    prev = None
    while True:
        a = order[-1]
        nb = [b for b in sk.neighbors(a) if b != prev]
        b = min(nb)
        if b == 0:
            break
        if b in order:
            raise NotCycle("the skeleton is not a single cycle")
        prev = a
        order.append(b)
    if len(order) != nv:
        raise NotCycle("the skeleton is not a single cycle")
    return order


def _edge_direction(sk: Skeleton, a: int, b: int):
    pa = sk.cx.faces[sk.vertices[a]].vertices[0]
    pb = sk.cx.faces[sk.vertices[b]].vertices[0]
    from .lattice import primitive

    return primitive(tuple(y - x for x, y in zip(pa, pb)))


def _pairing(sk: Skeleton, a: int, b: int) -> Fraction:
    """Value of the basis 1-form at vertex a on the primitive direction a -> b (at height 0)."""
    fs = sk.vertex_forms(a)
    if fs.dim != 1:
        raise NotCycle("vertex stars must carry exactly one 1-form", vertex=f"v{a}", dim=fs.dim)
    rep = fs.basis[0]
    u = tuple(Fraction(x) for x in _edge_direction(sk, a, b)) + (Fraction(0),)
    return sum((x * y for x, y in zip(rep, u)), Fraction(0))


def global_form_coeffs(sk: Skeleton) -> list[Fraction]:
    """Coefficient c_v of eta|Star(v) in the vertex basis, where eta is the global
    1-form normalised to pair to 1 with the first cycle edge direction at v0."""
    order = cycle_order(sk)
    glob = one_forms(sk.site)
    if glob.dim != 1:
        raise NotCycle("the complex does not carry a unique global 1-form", dim=glob.dim)
    coeffs = []
    for a in range(len(sk.vertices)):
        res = restrict_forms(glob, sk.vertex_forms(a))
        coeffs.append(res[0][0])
    lam = coeffs[0] * _pairing(sk, 0, order[1])
    if lam == 0:
        raise NotCycle("the global 1-form vanishes along the first cycle edge")
    return [c / lam for c in coeffs]


def elliptic_build(sk: Skeleton, S: Sequence, T: Sequence) -> DescentObject:
    """theta_v = c_v S, gluings identity except on the closing edge, which carries T."""
    S, T = mat(S), mat(T)
    r = len(S)
    order = cycle_order(sk)
    coeffs = global_form_coeffs(sk)
    theta = []
    for a, s in enumerate(sk.setups):
        theta.append(TropConnection(s, r, (scale(coeffs[a], S),)))
    phi = {e: identity(r) for e in sk.edges}
    last, first = order[-1], order[0]
    e = (min(last, first), max(last, first))
    phi[e] = T if e == (last, first) else inverse(T)
    return DescentObject(sk, r, tuple(theta), phi)


def monodromy(obj: DescentObject) -> Matrix:
    order = cycle_order(obj.skeleton)
    r = obj.rank
    T = identity(r)
    loop = order + [order[0]]
    for a, b in zip(loop, loop[1:]):
        T = matmul(obj.gluing(a, b), T)
    return T


def elliptic_extract(obj: DescentObject) -> tuple[Matrix, Matrix]:
    """(S, T): residue of theta at v0 along the first cycle edge, and the cycle monodromy."""
    sk = obj.skeleton
    order = cycle_order(sk)
    T = monodromy(obj)
    lam = _pairing(sk, 0, order[1])
    S = scale(lam, obj.theta[0].theta[0])
    if matmul(S, T) != matmul(T, S):
        raise NotCommuting("S and T do not commute", S=[[fmt(x) for x in r] for r in S],
                           T=[[fmt(x) for x in r] for r in T])
    return S, T


def is_nilpotent(S: Matrix) -> bool:
    r = len(S)
    p = identity(r)
    for _ in range(r):
        p = matmul(p, S)
    return is_zero(p)


def is_unipotent_matrix(T: Matrix) -> bool:
    return is_nilpotent(sub(T, identity(len(T))))
