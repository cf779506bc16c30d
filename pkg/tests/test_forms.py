import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropfund.corpus import COMPLEXES, corpus_matroids, load
from tropfund.forms import (
    ComplexSite,
    FanSite,
    FormAlgebra,
    NotNested,
    fan_site_from_complex,
    fan_vs_complex_forms,
    one_forms,
    p_forms,
    restrict_direct,
    restrict_forms,
    star_quotient_forms_iso,
)
from tropfund.linalg import identity, matmul, unit
from tropfund.matroids import Matroid, bergman_fan
from tropfund.polyhedra import EnrichedFan, NotOpen, Polyhedron

from oracles import dense_rank, reduced_char_poly, same_span


def F(*xs):
    return tuple(Fraction(x) for x in xs)


def vertex(cx, *xs):
    return cx.index(Polyhedron(cx.n, (F(*xs),)))


def bergman_form_dims(size, flats, maxp):
    """dim Omega^p of a Bergman fan, by evaluating p-covectors on p-subsets of rays of each top cone."""
    proper = sorted({frozenset(f) for f in flats} - {frozenset(), frozenset(range(size))}, key=sorted)

    def ray(flat):
        return [int(i in flat) - int(0 in flat) for i in range(1, size)]

    chains = [[]]
    tops = []
    while chains:
        c = chains.pop()
        ext = [f for f in proper if not c or c[-1] < f]
        if not ext:
            tops.append(c)
        for f in ext:
            chains.append(c + [f])
    n = size - 1
    out = []
    for p in range(maxp + 1):
        cols = list(combinations(range(n), p))
        rows = []
        for t in tops:
            rs = [ray(f) for f in t]
            for sub in combinations(rs, p):
                row = []
                for idx in cols:
                    # determinant of the p x p minor <e_idx_a, r_b>
                    m = [[Fraction(r[i]) for r in sub] for i in idx]
                    row.append(_det(m))
                rows.append(row)
        out.append(dense_rank(rows, len(cols)) if rows else (1 if p == 0 else 0))
    return out


def _det(m):
    if not m:
        return Fraction(1)
    m = [list(r) for r in m]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def test_figure_one_star_of_v():
    cx = load("figure1")
    site = ComplexSite(cx)
    star = site.open_star(vertex(cx, 2, 0))
    om = one_forms(site, star)
    assert om.dim == 1
    # e2* modulo the height coordinate
    assert same_span([om.basis[0]], [[0, 1, 0]], 3)
    assert [p_forms(site, star, p).dim for p in (2, 3)] == [0, 0]


def test_line_forms():
    cx = load("line")
    site = ComplexSite(cx)
    om = one_forms(site)
    assert om.dim == 2
    assert same_span(list(om.basis) + [[0, 0, 1]], [[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3)
    assert p_forms(site, None, 2).dim == 0
    alg = FormAlgebra(site)
    assert alg.wedge(1, unit(2, 0), 1, unit(2, 1)) == ()


def test_elliptic_global_forms():
    cx = load("elliptic")
    site = ComplexSite(cx)
    assert one_forms(site).dim == 1
    for i in cx.vertex_ids():
        assert one_forms(site, site.open_star(i)).dim == 1


def test_zero_forms_are_constants():
    for name in COMPLEXES:
        site = ComplexSite(load(name))
        assert p_forms(site, None, 0).dim == 1


def test_u34_two_forms_against_brute_force():
    m = Matroid.uniform(3, 4)
    site = fan_site_from_complex(bergman_fan(m))
    assert p_forms(site, None, 2).dim == 3
    assert bergman_form_dims(4, m.flats, 2)[2] == 3


@pytest.mark.parametrize("m", [m for m in corpus_matroids(5)], ids=lambda m: f"{m.size}-{len(m.flats)}")
def test_bergman_forms_match_independent_oracles(m):
    site = FanSite(EnrichedFan.trivial(bergman_fan(m)))
    r = m.rank
    dims = [p_forms(site, None, p).dim for p in range(r)]
    assert dims == bergman_form_dims(m.size, m.flats, r - 1)
    assert dims == reduced_char_poly(m.size, m.flats)


def test_not_open():
    cx = load("line")
    site = ComplexSite(cx)
    with pytest.raises(NotOpen):
        one_forms(site, [0])


def test_restrictions():
    cx = load("line")
    site = ComplexSite(cx)
    whole = one_forms(site)
    assert restrict_forms(whole, whole) == identity(2)
    ray = cx.index(Polyhedron(2, (F(0, 0),), ((0, 1),)))
    star = one_forms(site, site.open_star(ray))
    assert star.dim == 1
    r = restrict_forms(whole, star)
    assert len(r) == 1 and dense_rank(r, 2) == 1
    assert r == restrict_direct(whole, star)
    with pytest.raises(NotNested):
        restrict_forms(star, whole)


def test_restriction_on_figure_one_is_surjective():
    cx = load("figure1")
    site = ComplexSite(cx)
    v = vertex(cx, -2, 0)
    src = one_forms(site, site.open_star(v))
    for e in cx.up[v]:
        if cx.faces[e].dim == 1:
            dst = one_forms(site, site.open_star(e))
            m = restrict_forms(src, dst)
            assert dense_rank(m, src.dim) == dst.dim


@pytest.mark.parametrize("name", sorted(COMPLEXES))
def test_restriction_is_functorial(name):
    cx = load(name)
    site = ComplexSite(cx)
    for p in (1, 2):
        whole = p_forms(site, None, p)
        for i in range(len(cx.faces)):
            mid = p_forms(site, site.open_star(i), p)
            for j in cx.up[i]:
                low = p_forms(site, site.open_star(j), p)
                if whole.dim and mid.dim and low.dim:
                    composed = matmul(restrict_forms(mid, low), restrict_forms(whole, mid))
                    assert composed == restrict_forms(whole, low)


@pytest.mark.parametrize("name", sorted(COMPLEXES))
def test_star_quotient_comparison_is_iso(name):
    cx = load(name)
    for i in range(len(cx.faces)):
        assert star_quotient_forms_iso(cx, i).bijective


def test_figure_one_comparison_at_v():
    cx = load("figure1")
    cm = star_quotient_forms_iso(cx, vertex(cx, 2, 0))
    assert cm.source_dim == cm.target_dim == 1 and cm.bijective


def test_fan_and_complex_routes_agree():
    for fan in [load("line"), load("u34"), load("u24")]:
        for i in range(len(fan.faces)):
            assert fan_vs_complex_forms(fan, i).bijective


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_wedge_is_independent_of_representatives(seed):
    rng = random.Random(seed)
    cx = load("u34")
    site = fan_site_from_complex(cx)
    i = rng.choice(range(len(cx.faces)))
    star = site.open_star(i)
    om = one_forms(site, star)
    alg = FormAlgebra(site, star)
    if om.dim == 0:
        return
    q = om.space
    x = [Fraction(rng.randint(-3, 3)) for _ in range(om.dim)]
    y = [Fraction(rng.randint(-3, 3)) for _ in range(om.dim)]
    base = alg.wedge(1, x, 1, y)
    for _ in range(3):
        noise = [Fraction(0)] * q.size
        for k in q.killed.basis:
            c = rng.randint(-2, 2)
            noise = [a + c * b for a, b in zip(noise, k)]
        x2 = q.coords([a + b for a, b in zip(q.lift(x), noise)])
        assert alg.wedge(1, x2, 1, y) == base
    assert alg.wedge(1, y, 1, x) == tuple(-c for c in base)
