from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropfund.corpus import corpus_matroids, load
from tropfund.linalg import det, identity
from tropfund.matroids import (
    BadBases,
    BadBasis,
    BadFlats,
    Matroid,
    MissingWeights,
    NotLoopless,
    NotPure,
    SmoothnessCertificate,
    all_matroids,
    bergman_fan,
    check_balanced,
    check_smooth_certificate,
    count_flags,
    ray_of_flat,
    search_certificate,
)
from tropfund.polyhedra import Polyhedron, same_support, validate_complex

from oracles import uniform_flats


def chains_by_length(m):
    """Chains of proper nonempty flats, grouped by length, by brute force over subsets of flats."""
    proper = [f for f in m.flats if f and len(f) < m.size]
    out = {}
    for k in range(len(proper) + 1):
        found = 0
        for c in combinations(proper, k):
            if all(a < b or b < a for a, b in combinations(c, 2)):
                found += 1
        if k and not found:
            break
        out[k] = found
    return out


def test_flats_of_u23_and_the_line():
    m = Matroid.from_flats(3, uniform_flats(2, 3))
    fan = bergman_fan(m)
    assert same_support(fan, load("line"))
    assert sorted(fan.faces[i].rays[0] for i in fan.faces_of_dim(1)) == sorted(
        [(1, 0), (0, 1), (-1, -1)])


def test_rank_one_gives_a_point():
    for n in (1, 2, 4):
        fan = bergman_fan(Matroid.uniform(1, n))
        assert [f.dim for f in fan.faces] == [0]


def test_u34_counts():
    fan = bergman_fan(Matroid.uniform(3, 4))
    assert len(fan.faces_of_dim(1)) == 10
    assert len(fan.faces_of_dim(2)) == 12


@pytest.mark.parametrize("m", corpus_matroids(5), ids=lambda m: f"{m.size}-{len(m.flats)}")
def test_cone_counts_match_flag_chains(m):
    fan = bergman_fan(m)
    chains = chains_by_length(m)
    for k, c in chains.items():
        assert len(fan.faces_of_dim(k)) == c
    assert count_flags(m) == {k: c for k, c in chains.items() if c}


def test_bergman_output_validates():
    for m in corpus_matroids(5):
        fan = bergman_fan(m)
        again = validate_complex(fan.to_json())
        assert {f.key for f in again.faces} == {f.key for f in fan.faces}


def test_ray_coordinates():
    assert ray_of_flat(4, {0}) == (-1, -1, -1)
    assert ray_of_flat(4, {1, 2}) == (1, 1, 0)


def test_bad_matroids():
    with pytest.raises(NotLoopless):
        Matroid.from_flats(2, [{0}, {0, 1}])
    with pytest.raises(BadFlats):
        Matroid.from_flats(3, [set(), {0, 1}, {1, 2}, {0, 1, 2}])
    with pytest.raises(BadBases):
        Matroid.from_bases(4, [{0, 1}, {2, 3}])


def test_bases_and_flats_agree():
    assert Matroid.from_bases(4, combinations(range(4), 2)) == Matroid.uniform(2, 4)
    m = Matroid.from_json({"ground": 3, "bases": [[0, 1], [0, 2], [1, 2]]})
    assert Matroid.from_json(m.to_json()) == m


def test_balancing():
    assert check_balanced(bergman_fan(Matroid.uniform(2, 3)))["balanced"]
    assert check_balanced(load("elliptic"))["balanced"]
    data = load("line").to_json()
    data["faces"][-1]["weight"] = 2
    rep = check_balanced(validate_complex(data))
    assert not rep["balanced"]
    assert rep["violations"][0]["face"]["vertices"] == [["0", "0"]]
    with pytest.raises(MissingWeights):
        check_balanced(load("figure1"))
    mixed = {"rank": 2, "faces": [{"vertices": [[0, 0]], "rays": [[1, 0]], "weight": 1},
                                  {"vertices": [[5, 5]], "weight": 1}]}
    with pytest.raises(NotPure):
        check_balanced(validate_complex(mixed))


def test_line_certificate():
    line = load("line")
    o = line.index(Polyhedron(2, ((Fraction(0), Fraction(0)),)))
    assert check_smooth_certificate(line, SmoothnessCertificate(o, Matroid.uniform(2, 3), identity(2)))
    assert not check_smooth_certificate(line, SmoothnessCertificate(o, Matroid.uniform(1, 2), identity(1)))
    with pytest.raises(BadBasis):
        check_smooth_certificate(line, SmoothnessCertificate(
            o, Matroid.uniform(2, 3), ((Fraction(2), Fraction(0)), (Fraction(0), Fraction(1)))))


def test_certificate_invariant_under_ray_permuting_automorphisms():
    line = load("line")
    o = 0
    m = Matroid.uniform(2, 3)
    # unimodular maps permuting {e1, e2, -e1-e2}, given by the images of e1 and e2
    e1, e2, e3 = (1, 0), (0, 1), (-1, -1)
    for c1, c2 in [(e2, e1), (e2, e3), (e3, e1), (e3, e2), (e1, e3)]:
        b = tuple(tuple(Fraction(x) for x in r) for r in zip(c1, c2))
        assert abs(det(b)) == 1
        assert check_smooth_certificate(line, SmoothnessCertificate(o, m, b))


def test_u34_at_a_singleton_ray():
    fan = bergman_fan(Matroid.uniform(3, 4))
    ray = fan.index(Polyhedron.cone([(-1, -1, -1)], 3).normalized())
    # star of a singleton flat: U_{1,1} x U_{3,4}/{0} = U_{2,3}; find a basis by brute force
    target = Matroid.uniform(2, 3)
    found = None
    for a, b, c, d in product(range(-1, 2), repeat=4):
        basis = ((Fraction(a), Fraction(b)), (Fraction(c), Fraction(d)))
        if abs(det(basis)) != 1:
            continue
        if check_smooth_certificate(fan, SmoothnessCertificate(ray, target, basis)):
            found = basis
            break
    assert found is not None
    cert = search_certificate(fan, ray)
    assert cert is not None and cert.matroid.size == 3


def test_all_matroids_small():
    # loopless matroids on 3 labelled elements
    assert len(all_matroids(3)) == 6


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 5), st.data())
def test_uniform_bergman_balanced_and_counted(n, data):
    r = data.draw(st.integers(1, n))
    m = Matroid.uniform(r, n)
    fan = bergman_fan(m)
    assert check_balanced(fan)["balanced"]
    assert fan.dim == r - 1
