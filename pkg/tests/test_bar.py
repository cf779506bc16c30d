import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropfund.bar import (
    BarSetup,
    LengthCapExceeded,
    add,
    antipode,
    coproduct,
    counit,
    degree0,
    differential,
    free_rank_if_free,
    from_vector,
    h0_dims,
    h0_kernel,
    in_h0,
    random_element,
    scale,
    shuffle,
    shuffle_tensor,
    tensor,
    to_vector,
    unit_element,
)
from tropfund.corpus import corpus_matroids, load
from tropfund.forms import ComplexSite, FormAlgebra, fan_site_from_complex
from tropfund.linalg import unit
from tropfund.matroids import bergman_fan

from oracles import dense_nullity, interleavings


def fan_setup(name, max_degree=2):
    return BarSetup.from_algebra(FormAlgebra(fan_site_from_complex(load(name))), max_degree)


def complex_setup(name, max_degree=2):
    return BarSetup.from_algebra(FormAlgebra(ComplexSite(load(name))), max_degree)


X, Y, Z = (1, 0), (1, 1), (1, 2)


def w(*letters):
    return {tuple(letters): Fraction(1)}


def test_shuffle_of_letters():
    assert shuffle(w(X), w(Y)) == add(w(X, Y), w(Y, X))
    assert shuffle(w(X, Y), w(Z)) == add(w(X, Y, Z), w(X, Z, Y), w(Z, X, Y))
    assert shuffle(unit_element(), w(X, Y)) == w(X, Y)


def test_deconcatenation():
    cop = coproduct(w(X, Y))
    assert cop == {((), (X, Y)): 1, ((X,), (Y,)): 1, ((X, Y), ()): 1}


def test_line_dims_are_free():
    s = complex_setup("line")
    assert [d for d, _ in h0_dims(s, 4)] == [1, 2, 4, 8, 16]
    assert free_rank_if_free(s) == 2


@pytest.mark.parametrize("m", [m for m in corpus_matroids(5) if m.rank <= 2],
                         ids=lambda m: f"{m.size}-{len(m.flats)}")
def test_rank_two_bergman_fans_are_free(m):
    s = BarSetup.from_algebra(FormAlgebra(fan_site_from_complex(bergman_fan(m))))
    k = free_rank_if_free(s)
    assert k == s.m
    assert [d for d, _ in h0_dims(s, 3)] == [k ** i for i in range(4)]


def test_u34_length_two_against_wedge_matrix():
    alg = FormAlgebra(fan_site_from_complex(load("u34")))
    m, d2 = alg.dim(1), alg.dim(2)
    assert (m, d2) == (3, 3)
    rows = [alg.wedge(1, unit(m, a), 1, unit(m, b)) for a, b in product(range(m), repeat=2)]
    cols = [[r[c] for r in rows] for c in range(d2)]
    s = BarSetup.from_algebra(alg)
    assert h0_kernel(s, 2).dim == dense_nullity(cols, m * m) == 6


def test_cap():
    s = complex_setup("line")
    with pytest.raises(LengthCapExceeded):
        h0_dims(s, 5, cap=4)


@pytest.mark.parametrize("name,maker", [("line", complex_setup), ("u34", fan_setup), ("u24", fan_setup),
                                        ("elliptic", complex_setup)])
def test_h0_closed_under_shuffle_and_coproduct(name, maker):
    s = maker(name)
    m = s.m
    ks = [h0_kernel(s, k) for k in range(5)]
    elems = [[from_vector(b, m, k) for b in ks[k].basis] for k in range(5)]
    for i in range(1, 3):
        for j in range(i, 5 - i):
            for a in elems[i][:4]:
                for b in elems[j][:4]:
                    assert in_h0(shuffle(a, b), s)
    for k in range(2, 5):
        for x in elems[k]:
            for i in range(k + 1):
                part = {}
                for (left, right), c in coproduct(x).items():
                    if len(left) == i:
                        part[(left, right)] = c
                # every row and column of the component lies in the kernels
                rows = {}
                for (left, right), c in part.items():
                    rows.setdefault(left, {})[right] = c
                for left, r in rows.items():
                    assert ks[k - i].contains(to_vector(r, m, k - i))
                cols = {}
                for (left, right), c in part.items():
                    cols.setdefault(right, {})[left] = c
                for right, col in cols.items():
                    assert ks[i].contains(to_vector(col, m, i))


@pytest.mark.parametrize("name,maker", [("line", complex_setup), ("u34", fan_setup), ("u45", None)])
def test_d_squared_vanishes(name, maker):
    if maker is None:
        from tropfund.matroids import Matroid

        s = BarSetup.from_algebra(FormAlgebra(fan_site_from_complex(bergman_fan(Matroid.uniform(4, 5)))), 3)
    else:
        s = maker(name, 3)
    rng = random.Random(7)
    for length in (2, 3, 4):
        x = random_element(s.m, length, rng)
        assert differential(differential(x, s), s) == {}


def test_differential_matches_matrix_kernel():
    s = fan_setup("u34")
    k = h0_kernel(s, 3)
    for b in k.basis:
        assert in_h0(from_vector(b, s.m, 3), s)
    rng = random.Random(3)
    for _ in range(20):
        x = random_element(s.m, 3, rng, -1, 1)
        assert k.contains(to_vector(x, s.m, 3)) == in_h0(x, s)


def test_shuffle_oracle_on_words():
    u, v = (X, Y), (Z, X)
    expect = {}
    for word in interleavings(u, v):
        expect[word] = expect.get(word, 0) + 1
    assert shuffle(w(*u), w(*v)) == expect


letters = st.tuples(st.just(1), st.integers(0, 2))
degree0_words = st.lists(letters, max_size=3).map(tuple)
elements = st.dictionaries(degree0_words, st.integers(-3, 3).map(Fraction), max_size=4).map(
    lambda d: {k: v for k, v in d.items() if v})


@settings(max_examples=60, deadline=None)
@given(elements, elements)
def test_coproduct_is_multiplicative(a, b):
    assert coproduct(shuffle(a, b)) == shuffle_tensor(coproduct(a), coproduct(b))


@settings(max_examples=60, deadline=None)
@given(elements)
def test_coassociativity_and_counit(x):
    left, right = {}, {}
    for (a, b), c in coproduct(x).items():
        for (a1, a2), c2 in coproduct({a: Fraction(1)}).items():
            key = (a1, a2, b)
            left[key] = left.get(key, 0) + c * c2
        for (b1, b2), c2 in coproduct({b: Fraction(1)}).items():
            key = (a, b1, b2)
            right[key] = right.get(key, 0) + c * c2
    assert {k: v for k, v in left.items() if v} == {k: v for k, v in right.items() if v}
    # (counit x id) coproduct = id
    back = {}
    for (a, b), c in coproduct(x).items():
        if not a:
            back[b] = back.get(b, 0) + c
    assert {k: v for k, v in back.items() if v} == x


@settings(max_examples=60, deadline=None)
@given(elements, elements, elements)
def test_shuffle_is_commutative_associative(a, b, c):
    assert shuffle(a, b) == shuffle(b, a)
    assert shuffle(shuffle(a, b), c) == shuffle(a, shuffle(b, c))


@settings(max_examples=40, deadline=None)
@given(elements)
def test_antipode(x):
    total = {}
    for (a, b), c in coproduct(x).items():
        for word, v in shuffle(antipode({a: Fraction(1)}), {b: Fraction(1)}).items():
            total[word] = total.get(word, 0) + c * v
    total = {k: v for k, v in total.items() if v}
    assert total == scale(counit(x), unit_element())


def test_word_helpers():
    x = from_vector([1, 2, 3, 4], 2, 2)
    assert to_vector(x, 2, 2) == (1, 2, 3, 4)
    assert degree0([0, 1]) == ((1, 0), (1, 1))
    assert tensor(w(X), w(Y)) == {((X,), (Y,)): 1}
