"""Bundled example inputs and random refinements."""

from __future__ import annotations

import random
from fractions import Fraction

from .linalg import fmt, vec
from .matroids import Matroid, bergman_fan
from .polyhedra import PolyComplex, Polyhedron, build_complex, validate_complex


def tropical_line() -> dict:
    return {
        "rank": 2,
        "rays_R": [],
        "faces": [
            {"vertices": [[0, 0]], "rays": [[1, 0]], "weight": 1},
            {"vertices": [[0, 0]], "rays": [[0, 1]], "weight": 1},
            {"vertices": [[0, 0]], "rays": [[-1, -1]], "weight": 1},
        ],
    }


def figure_one() -> dict:
    """Two vertices (-2,0) and (2,0), four 2-cells, compactified along e1."""
    return {
        "rank": 2,
        "rays_R": [[1, 0]],
        "faces": [
            {"vertices": [[-2, 0], [2, 0]], "rays": [[0, 1]]},
            {"vertices": [[2, 0]], "rays": [[0, 1], [1, -1]]},
            {"vertices": [[-2, 0]], "rays": [[0, 1], [-1, -1]]},
            {"vertices": [[-2, 0], [2, 0]], "rays": [[-1, -1], [1, -1]]},
        ],
    }


ELLIPTIC_CYCLE = [[-1, 1], [1, 1], [1, -1], [0, -1], [-1, 0]]
ELLIPTIC_RAYS = [[-1, 1], [1, 1], [1, -1], [0, -1], [-1, 0]]


def elliptic_curve() -> dict:
    """A pentagon with one unbounded ray at each vertex; R holds all ray directions."""
    k = len(ELLIPTIC_CYCLE)
    faces = [{"vertices": [ELLIPTIC_CYCLE[i], ELLIPTIC_CYCLE[(i + 1) % k]], "weight": 1} for i in range(k)]
    faces += [{"vertices": [v], "rays": [r], "weight": 1} for v, r in zip(ELLIPTIC_CYCLE, ELLIPTIC_RAYS)]
    return {"rank": 2, "rays_R": [list(r) for r in ELLIPTIC_RAYS], "faces": faces}


def triangle_complex() -> dict:
    """A unimodular triangle with its three edges extended by a fan of unbounded cells."""
    return {
        "rank": 2,
        "rays_R": [],
        "faces": [
            {"vertices": [[0, 0], [1, 0], [0, 1]], "weight": 1},
            {"vertices": [[0, 0], [1, 0]], "rays": [[0, -1]], "weight": 1},
            {"vertices": [[1, 0], [0, 1]], "rays": [[1, 1]], "weight": 1},
            {"vertices": [[0, 0], [0, 1]], "rays": [[-1, 0]], "weight": 1},
            {"vertices": [[0, 0]], "rays": [[-1, 0], [0, -1]], "weight": 1},
            {"vertices": [[1, 0]], "rays": [[0, -1], [1, 1]], "weight": 1},
            {"vertices": [[0, 1]], "rays": [[1, 1], [-1, 0]], "weight": 1},
        ],
    }


def uniform_json(r: int, n: int) -> dict:
    return Matroid.uniform(r, n).to_json()


MATROIDS = {"u23": (2, 3), "u24": (2, 4), "u34": (3, 4)}


def bergman_json(name: str) -> dict:
    r, n = MATROIDS[name]
    return bergman_fan(Matroid.uniform(r, n)).to_json()


COMPLEXES = {
    "line": tropical_line,
    "figure1": figure_one,
    "elliptic": elliptic_curve,
    "triangle": triangle_complex,
}


def load(name: str) -> PolyComplex:
    if name in COMPLEXES:
        return validate_complex(COMPLEXES[name]())
    if name in MATROIDS:
        r, n = MATROIDS[name]
        return bergman_fan(Matroid.uniform(r, n))
    raise KeyError(name)


def corpus_matroids(max_size: int = 6) -> list[Matroid]:
    """Uniform matroids, a few non-uniform ones and direct sums on at most ``max_size`` elements."""
    out = []
    for n in range(1, max_size + 1):
        for r in range(1, n + 1):
            out.append(Matroid.uniform(r, n))
    # the rank-3 braid matroid M(K4) by its lines
    k4_lines = [{0, 1, 3}, {0, 2, 4}, {1, 2, 5}, {3, 4, 5}]
    flats = [set()] + [{i} for i in range(6)]
    flats += [set(l) for l in k4_lines]
    pairs = [{a, b} for a in range(6) for b in range(a + 1, 6)]
    flats += [p for p in pairs if not any(p <= l for l in k4_lines)]
    flats.append(set(range(6)))
    out.append(Matroid.from_flats(6, flats))
    # a rank-2 matroid with a parallel class {0, 1}
    out.append(Matroid.from_flats(4, [set(), {0, 1}, {2}, {3}, {0, 1, 2, 3}]))
    # rank 3 on 5 elements with a single 3-point line
    out.append(Matroid.from_bases(5, [b for b in _triples(5) if set(b) != {0, 1, 2}]))
    return [m for m in out if m.size <= max_size]


def _triples(n: int):
    from itertools import combinations

    return [c for c in combinations(range(n), 3)]


# ---------------------------------------------------------------------------
# random stellar refinements


def random_relint_point(p: Polyhedron, rng: random.Random) -> tuple[Fraction, ...]:
    ws = [Fraction(rng.randint(1, 4)) for _ in p.vertices]
    tot = sum(ws)
    pt = [sum((w * v[i] for w, v in zip(ws, p.vertices)), Fraction(0)) / tot for i in range(p.n)]
    for r in p.rays:
        c = Fraction(rng.randint(1, 3), rng.randint(1, 2))
        pt = [a + c * b for a, b in zip(pt, r)]
    return tuple(pt)


def stellar_cells(p: Polyhedron, g: Polyhedron, x) -> list[Polyhedron]:
    """Cells of the stellar subdivision of P at x in relint(G), G a face of P.

    In the cone over P this is the subdivision at (x, 1): one cell per facet not
    containing G, plus x + recc(P) when the height-zero face is a facet.
    """
    x = vec(x)
    d = p.dim
    cells = []
    for s in p.face_sets():
        f = p.face_from_set(s).normalized()
        if f.dim != d - 1:
            continue
        if f.contains_polyhedron(g):
            continue
        cells.append(Polyhedron(p.n, (x,) + f.vertices, f.rays).normalized())
    from .polyhedra import recession_cone

    rc = recession_cone(p)
    if rc.dim == d:
        cells.append(Polyhedron(p.n, (x,), rc.rays).normalized())
    return cells


def stellar_subdivision(cx: PolyComplex, face: int, x) -> PolyComplex:
    g = cx.faces[face]
    polys = []
    weights = {}
    for i in cx.maximal:
        p = cx.faces[i]
        new = stellar_cells(p, g, x) if face in cx.down(i) else [p]
        for c in new:
            if i in cx.weights:
                weights[len(polys)] = cx.weights[i]
            polys.append(c)
    return build_complex(cx.n, polys, cx.R, weights, check_intersections=True)


def random_refinement(cx: PolyComplex, rng: random.Random, steps: int = 1) -> PolyComplex:
    """Repeated stellar subdivision at random points of random positive-dimensional faces."""
    out = cx
    for _ in range(steps):
        cand = [i for i, f in enumerate(out.faces) if f.dim >= 1]
        if not cand:
            return out
        i = rng.choice(cand)
        out = stellar_subdivision(out, i, random_relint_point(out.faces[i], rng))
    return out


def original_open(fine: PolyComplex, coarse: PolyComplex, face: int) -> tuple[int, ...]:
    """Faces of ``fine`` whose relative interior lies in the open star of ``face`` in ``coarse``."""
    up = coarse.up[face]
    out = []
    for j, f in enumerate(fine.faces):
        c = coarse.carrier(f.relint_point)
        if c is None:
            raise ValueError("refinement is not supported on the coarse complex")
        if c in up:
            out.append(j)
    return tuple(out)


# ---------------------------------------------------------------------------
# example bundle for the CLI


def _m(rows) -> list:
    return [[fmt(Fraction(x)) for x in r] for r in rows]


def bundle() -> dict[str, dict]:
    """File name -> JSON content for every bundled example input."""
    files = {
        "line.json": tropical_line(),
        "figure1.json": figure_one(),
        "elliptic.json": elliptic_curve(),
        "triangle.json": triangle_complex(),
    }
    for name, (r, n) in MATROIDS.items():
        files[f"{name}.json"] = uniform_json(r, n)
        files[f"{name}-bergman.json"] = bergman_json(name)
    files["line-certificate.json"] = {
        "face": {"vertices": [[0, 0]]},
        "matroid": uniform_json(2, 3),
        "basis": [[1, 0], [0, 1]],
    }
    files["line-connection.json"] = {
        "base": {"complex": "line.json", "open": "star:@0,0"},
        "rank": 2,
        "theta": [{"form": [1, 0], "matrix": _m([[0, 1], [0, 0]])}],
    }
    files["line-connection-2.json"] = {
        "base": {"complex": "line.json", "open": "star:@0,0"},
        "rank": 2,
        "theta": [{"form": [1, 1], "matrix": _m([[0, 1], [0, 0]])}],
    }
    from .descent import build_skeleton, elliptic_build

    sk = build_skeleton(validate_complex(files["elliptic.json"]))
    good = elliptic_build(sk, [[0, 1], [0, 0]], [[1, 1], [0, 1]]).to_json()
    bad = elliptic_build(sk, [[0, 1], [0, 0]], [[1, 0], [1, 1]]).to_json()
    files["elliptic-object.json"] = {"complex": "elliptic.json", **good}
    files["elliptic-noncommuting.json"] = {"complex": "elliptic.json", **bad}
    files["elliptic-unit.json"] = {"complex": "elliptic.json", "rank": 1}
    return files
