from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tropfund.lattice import integer_kernel, is_primitive_integer, primitive, quotient_map
from tropfund.linalg import (
    DimensionError,
    ExteriorPower,
    QuotientSpace,
    Subspace,
    annihilator,
    det,
    identity,
    intersect,
    inverse,
    kernel,
    matmul,
    matvec,
    rank,
    rref,
    solve,
    to_fraction,
    unit,
)

from oracles import dense_nullity, dense_rank, null_basis, same_span

small = st.integers(-4, 4)


def matrices(max_rows=4, max_cols=5):
    return st.integers(1, max_cols).flatmap(
        lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=0, max_size=max_rows).map(
            lambda rows: (rows, n)
        )
    )


def test_parse_rationals():
    assert to_fraction("3/4") == Fraction(3, 4)
    assert to_fraction(-2) == Fraction(-2)
    with pytest.raises((TypeError, ValueError)):
        to_fraction(True)


def test_kernel_of_all_ones_row():
    k = kernel(((Fraction(1), Fraction(1), Fraction(1)),), 3)
    assert k.dim == 2
    assert dense_nullity([[1, 1, 1]], 3) == 2
    assert same_span(k.basis, null_basis([[1, 1, 1]], 3), 3)


def test_intersect_coordinate_planes():
    a = Subspace.span([unit(3, 0), unit(3, 1)], 3)
    b = Subspace.span([unit(3, 1), unit(3, 2)], 3)
    assert intersect(a, b) == Subspace.span([unit(3, 1)], 3)


def test_annihilator_of_a_line():
    assert annihilator(Subspace.span([unit(2, 0)], 2)) == Subspace.span([unit(2, 1)], 2)


def test_mismatched_ambient_dimensions():
    with pytest.raises(DimensionError):
        Subspace.full(2) + Subspace.full(3)


def test_quotient_coordinates_and_lift():
    q = QuotientSpace(Subspace.full(3), Subspace.span([unit(3, 2)], 3))
    assert q.dim == 2
    v = (Fraction(2), Fraction(5), Fraction(7))
    assert q.coords(v) == q.coords((Fraction(2), Fraction(5), Fraction(0)))
    assert q.coords(q.lift(q.coords(v))) == q.coords(v)


def test_exterior_square_of_plane():
    e = ExteriorPower(2, 1)
    top = e.wedge(e, unit(2, 0), unit(2, 1))
    assert top == (Fraction(1),)
    assert e.wedge(e, unit(2, 1), unit(2, 0)) == (Fraction(-1),)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity_against_dense_oracle(mn):
    rows, n = mn
    k = kernel(tuple(tuple(Fraction(x) for x in r) for r in rows), n)
    assert rank(rows, n) == dense_rank(rows, n)
    assert k.dim == n - dense_rank(rows, n)
    for b in k.basis:
        assert all(sum(Fraction(a) * x for a, x in zip(r, b)) == 0 for r in rows)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rref_is_idempotent_and_canonical(mn):
    rows, n = mn
    red, piv = rref(rows, n)
    assert rref(red, n) == (red, piv)
    assert Subspace.span(rows[::-1], n) == Subspace.span(rows, n)


@settings(max_examples=50, deadline=None)
@given(matrices(3, 4), matrices(3, 4))
def test_intersection_dimension_formula(a, b):
    n = min(a[1], b[1])
    A = Subspace.span([r[:n] for r in a[0]], n)
    B = Subspace.span([r[:n] for r in b[0]], n)
    assert intersect(A, B).dim == A.dim + B.dim - (A + B).dim
    assert annihilator(A).dim == n - A.dim


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3))
def test_inverse_and_solve(rows):
    m = tuple(tuple(Fraction(x) for x in r) for r in rows)
    if det(m) == 0:
        assert dense_rank(rows, 3) < 3
        return
    assert matmul(m, inverse(m)) == identity(3)
    b = (Fraction(1), Fraction(-2), Fraction(3))
    assert matvec(m, solve(m, b)) == b


def test_primitive_vectors():
    assert primitive((Fraction(2), Fraction(-4))) == (1, -2)
    assert primitive((Fraction(1, 2), Fraction(1, 3))) == (3, 2)
    assert is_primitive_integer((Fraction(3), Fraction(2)))
    assert not is_primitive_integer((Fraction(2), Fraction(4)))


@settings(max_examples=40, deadline=None)
@given(matrices(2, 4))
def test_integer_kernel_is_saturated(mn):
    rows, n = mn
    ker = integer_kernel(rows, n)
    assert len(ker) == dense_nullity(rows, n)
    for v in ker:
        assert all(sum(a * x for a, x in zip(r, v)) == 0 for r in rows)
    if ker:
        # saturated: the maximal minors of the basis have gcd 1
        from itertools import combinations
        from math import gcd

        g = 0
        for cols in combinations(range(n), len(ker)):
            g = gcd(g, int(det(tuple(tuple(Fraction(v[c]) for c in cols) for v in ker))))
        assert g == 1


def test_quotient_map_by_a_ray():
    q = quotient_map(Subspace.span([unit(2, 1)], 2))
    assert len(q) == 1
    assert matvec(q, unit(2, 1)) == (0,)
    assert abs(matvec(q, unit(2, 0))[0]) == 1
