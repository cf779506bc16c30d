import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropfund.corpus import load
from tropfund.descent import (
    BadObject,
    ContainsLine,
    DescentObject,
    Disconnected,
    NotCommuting,
    NotCycle,
    NotSimplicial,
    SkeletonMismatch,
    build_skeleton,
    cycle_order,
    descent_hom,
    descent_hom_anchored,
    elliptic_build,
    elliptic_extract,
    is_nilpotent,
    is_unipotent_matrix,
    is_unipotent_object,
    monodromy,
    unit_object,
    validate_object,
)
from tropfund.linalg import add, identity, matmul, mat, scale, zeros
from tropfund.polyhedra import validate_complex

from oracles import commutant_dim

ELL = build_skeleton(load("elliptic"))
TRI = build_skeleton(load("triangle"))
E12 = [[0, 1], [0, 0]]


def test_elliptic_skeleton():
    assert len(ELL.vertices) == 5 and len(ELL.edges) == 5 and not ELL.triangles
    assert sorted(cycle_order(ELL)) == list(range(5))
    assert all(ELL.vertex_forms(a).dim == 1 for a in range(5))


def test_triangle_skeleton_and_cocycle():
    assert TRI.triangles == ((0, 1, 2),)
    with pytest.raises(NotCycle):
        cycle_order(TRI)
    glue = {"v0-v1": [[2]], "v1-v2": [[3]]}
    good = DescentObject.from_json({"rank": 1, "edges": {**glue, "v0-v2": [[6]]}}, TRI)
    assert validate_object(good)["valid"]
    bad = DescentObject.from_json({"rank": 1, "edges": {**glue, "v0-v2": [[5]]}}, TRI)
    rep = validate_object(bad)
    assert not rep["valid"]
    assert rep["violations"] == [{"kind": "cocycle", "triangle": ["v0", "v1", "v2"]}]


def test_commuting_object_validates():
    obj = elliptic_build(ELL, E12, [[1, 1], [0, 1]])
    assert validate_object(obj)["valid"]
    ok, flag = is_unipotent_object(obj)
    assert ok and [F.dim for F in flag[1]] == [1] * 5
    S, T = elliptic_extract(obj)
    assert S == mat(E12) and T == mat([[1, 1], [0, 1]])


def test_non_commuting_object_fails_on_an_edge():
    obj = elliptic_build(ELL, E12, [[1, 0], [1, 1]])
    rep = validate_object(obj)
    assert not rep["valid"]
    order = cycle_order(ELL)
    closing = ELL.edge_key(order[-1], order[0])
    assert [v["edge"] for v in rep["violations"]] == [closing]
    assert rep["violations"][0]["kind"] == "intertwining"
    with pytest.raises(NotCommuting):
        elliptic_extract(obj)


def test_hom_dimensions():
    obj = elliptic_build(ELL, E12, [[1, 1], [0, 1]])
    assert descent_hom(obj, obj).dim == descent_hom_anchored(obj, obj).dim == 2
    unit = unit_object(ELL)
    twisted = elliptic_build(ELL, [[0]], [[2]])
    assert descent_hom(unit, twisted).dim == descent_hom_anchored(unit, twisted).dim == 0
    assert descent_hom(unit, unit).dim == 1
    assert not is_unipotent_object(twisted)[0]
    with pytest.raises(SkeletonMismatch):
        descent_hom(unit, unit_object(TRI))


def test_rank_three_blocks():
    S = [[0, 1, 0], [0, 0, 0], [0, 0, 0]]
    T = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    obj = elliptic_build(ELL, S, T)
    assert validate_object(obj)["valid"]
    assert elliptic_extract(obj) == (mat(S), mat(T))
    assert descent_hom(obj, obj).dim == commutant_dim([mat(S), mat(T)], 3) == 5


def test_monodromy_of_unit_is_identity():
    assert monodromy(unit_object(ELL, 2)) == identity(2)


def test_skeleton_errors():
    with pytest.raises(ContainsLine):
        build_skeleton(validate_complex({"rank": 1, "faces": [{"vertices": [[0]], "rays": [[1], [-1]]}]}))
    square = {"rank": 2, "faces": [{"vertices": [[0, 0], [1, 0], [0, 1], [1, 1]]}]}
    with pytest.raises(NotSimplicial):
        build_skeleton(validate_complex(square))
    with pytest.raises(Disconnected):
        build_skeleton(validate_complex({"rank": 1, "faces": [{"vertices": [[0]]}, {"vertices": [[3]]}]}))


def test_object_errors():
    with pytest.raises(BadObject):
        DescentObject.from_json({"rank": 1, "edges": {"v0-v3": [[1]]}}, ELL)
    with pytest.raises(BadObject):
        DescentObject.from_json({"rank": 1, "edges": {"zero-one": [[1]]}}, ELL)
    with pytest.raises(BadObject):
        DescentObject.from_json({"rank": 1, "edges": {"v0-v1": [[2]], "v1-v0": [[2]]}}, ELL)
    singular = DescentObject.from_json({"rank": 1, "edges": {"v0-v1": [[0]]}}, ELL)
    assert validate_object(singular)["violations"][0]["kind"] == "invertibility"


def test_json_round_trip():
    obj = elliptic_build(ELL, E12, [[1, 3], [0, 1]])
    again = DescentObject.from_json(obj.to_json(), ELL)
    assert elliptic_extract(again) == elliptic_extract(obj)


def _poly(N, coeffs, r):
    out, p = zeros(r, r), identity(r)
    for c in coeffs:
        p = matmul(p, N)
        out = add(out, scale(c, p))
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_random_commuting_pairs(seed, r):
    rng = random.Random(seed)
    N = mat([[rng.randint(-2, 2) if j > i else 0 for j in range(r)] for i in range(r)])
    S = _poly(N, [rng.randint(-2, 2) for _ in range(r)], r)
    T = add(identity(r), _poly(N, [rng.randint(-2, 2) for _ in range(r)], r))
    assert is_nilpotent(S) and is_unipotent_matrix(T)
    obj = elliptic_build(ELL, S, T)
    assert validate_object(obj)["valid"]
    assert is_unipotent_object(obj)[0]
    assert elliptic_extract(obj) == (S, T)
    h1, h2 = descent_hom(obj, obj), descent_hom_anchored(obj, obj)
    assert h1.dim == h2.dim == commutant_dim([S, T], r)
