"""Tropical differential forms on poset-open subsets of complexes and enriched fans.

Two kinds of host ("sites") are supported:

* :class:`ComplexSite` -- a polyhedral complex with partial compactification;
  1-forms on an open star are computed on the cone over the complex, relative
  to the projection onto the height coordinate.
* :class:`FanSite` -- an enriched fan ``(Delta, pi: N -> N', R)``, optionally
  relative to a base given by a pulled-back subspace of covectors.

On an open star the 1-forms are a quotient of covectors.  Forms of higher
degree, and forms on arbitrary poset-open sets, are represented by their
restrictions to the maximal faces in the open set; that map is injective.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .lattice import as_fractions
from .linalg import (
    ExteriorPower,
    Matrix,
    QuotientSpace,
    Row,
    Subspace,
    annihilator,
    kernel,
    matvec,
    solve,
    transpose,
    unit,
    vec,
)
from .polyhedra import (
    EnrichedFan,
    NotOpen,
    PolyComplex,
    cone_over,
    recession_cone,
    star_quotient,
)


class NotNested(ValueError):
    pass


READINGS = ("open", "all")


class Site:
    """Common interface: a face poset with a 1-form space on each open star."""

    faces: tuple
    up: tuple
    maximal: tuple[int, ...]
    form_dim: int

    def star_one_forms(self, i: int) -> QuotientSpace:
        raise NotImplementedError

    def active_rays(self, members: Iterable[int]) -> list[tuple[int, ...]]:
        raise NotImplementedError

    def open_star(self, i: int) -> tuple[int, ...]:
        return tuple(sorted(self.up[i]))

    def check_open(self, members: Iterable[int]) -> tuple[int, ...]:
        s = set(members)
        if not s:
            raise NotOpen("empty open set")
        for i in s:
            if not self.up[i] <= s:
                raise NotOpen(f"set is not upward closed at face {i}", face=i)
        return tuple(sorted(s))

    def star_face(self, members: Sequence[int]) -> int | None:
        """The face whose open star equals ``members``, if any."""
        s = set(members)
        for i in s:
            if self.up[i] == s:
                return i
        return None

    def max_in(self, members: Iterable[int]) -> tuple[int, ...]:
        s = set(members)
        return tuple(i for i in self.maximal if i in s)


def _presheaf_quotient(n: int, S: Subspace, rays, base: Subspace, pullback: Matrix | None = None) -> QuotientSpace:
    """(A + pi^* S^perp) / (base + pi^* S^perp), A = annihilator of ``rays``.

    ``S`` is the span of the open set in N'; ``pullback`` is pi (identity if None).
    """
    sperp = annihilator(S)
    if pullback is not None:
        pit = transpose(pullback, n)
        sperp = Subspace.span([matvec(pit, y) for y in sperp.basis], n)
    A = annihilator(Subspace.span(rays, n)) if rays else Subspace.full(n)
    num = A + sperp
    killed = base + sperp
    if not killed <= num:
        raise ValueError("base forms are not contained in the numerator")
    return QuotientSpace(num, killed)


class ComplexSite(Site):
    """Polyhedral complex with partial compactification, via the cone over it.

    ``reading`` chooses which height-zero cones P_0 belong to the cone over an
    open set U: those with P in U ("open") or all P in the complex ("all").
    """

    def __init__(self, cx: PolyComplex, reading: str = "open"):
        if reading not in READINGS:
            raise ValueError(f"reading must be one of {READINGS}")
        self.cx = cx
        self.reading = reading
        self.faces = cx.faces
        self.up = cx.up
        self.maximal = cx.maximal
        self.form_dim = cx.n + 1
        self._cache: dict = {}
        self._recc = [recession_cone(f) for f in cx.faces]

    @property
    def base(self) -> Subspace:
        return Subspace.span([unit(self.form_dim, self.cx.n)], self.form_dim)

    def cone_span_gens(self, members: Iterable[int]) -> list[Row]:
        gens = []
        for i in members:
            gens.extend(self.faces[i].generators)
        return gens

    def active_rays(self, members: Iterable[int]) -> list[tuple[int, ...]]:
        pool = range(len(self.faces)) if self.reading == "all" else members
        pool = list(pool)
        out = []
        for r in self.cx.R:
            rr = as_fractions(r)
            if any(self._recc[j].in_relint(rr) for j in pool):
                out.append(tuple(r) + (0,))
        return out

    def presheaf_one_forms(self, members: Sequence[int]) -> QuotientSpace:
        S = Subspace.span(self.cone_span_gens(members), self.form_dim)
        return _presheaf_quotient(self.form_dim, S, self.active_rays(members), self.base)

    def star_one_forms(self, i: int) -> QuotientSpace:
        if i not in self._cache:
            self._cache[i] = self.presheaf_one_forms(self.open_star(i))
        return self._cache[i]


class FanSite(Site):
    """Enriched fan with partial compactification, relative to ``base`` covectors."""

    def __init__(self, efan: EnrichedFan, base: Subspace | None = None):
        self.efan = efan
        self.faces = efan.fan.faces
        self.up = efan.fan.up
        self.maximal = efan.fan.maximal
        self.form_dim = efan.source_rank
        self._base = base if base is not None else Subspace.zero(self.form_dim)
        self._cache: dict = {}

    @property
    def base(self) -> Subspace:
        return self._base

    def active_rays(self, members: Iterable[int]) -> list[tuple[int, ...]]:
        members = list(members)
        out = []
        for r in self.efan.R:
            img = self.efan.image(as_fractions(r))
            if any(self.faces[j].in_relint(img) for j in members):
                out.append(tuple(r))
        return out

    def presheaf_one_forms(self, members: Sequence[int]) -> QuotientSpace:
        k = self.efan.target_rank
        gens = [as_fractions(r) for j in members for r in self.faces[j].rays]
        S = Subspace.span(gens, k)
        return _presheaf_quotient(self.form_dim, S, self.active_rays(members), self.base,
                                  pullback=self.efan.pi)

    def star_one_forms(self, i: int) -> QuotientSpace:
        if i not in self._cache:
            self._cache[i] = self.presheaf_one_forms(self.open_star(i))
        return self._cache[i]


def fan_site_from_complex(cx: PolyComplex) -> FanSite:
    """A fan viewed as a trivially enriched fan (forms relative to the point)."""
    if not cx.is_fan:
        raise ValueError("complex is not a fan")
    return FanSite(EnrichedFan.trivial(cx))


def cone_over_site(cx: PolyComplex) -> tuple[FanSite, dict[int, int]]:
    """The cone over ``cx`` as a relative enriched fan; returns the face map P -> P~."""
    co = cone_over(cx, check=False)
    n1 = cx.n + 1
    base = Subspace.span([unit(n1, cx.n)], n1)
    return FanSite(co.efan, base), co.tilde


# ---------------------------------------------------------------------------
# form spaces


def restriction_one(site: Site, i: int, j: int) -> Matrix:
    """Matrix of Omega^1(Star_i) -> Omega^1(Star_j) for i ⊆ j (columns = source basis)."""
    if j not in site.up[i]:
        raise NotNested(f"face {i} is not contained in face {j}")
    src = site.star_one_forms(i)
    dst = site.star_one_forms(j)
    cols = [dst.coords(b) for b in src.basis]
    return transpose(tuple(cols), dst.dim) if cols else tuple(() for _ in range(dst.dim))


@dataclass(eq=False)
class FormSpace:
    """Degree-p forms on a poset-open set.

    ``space`` is the presentation (its ``basis`` are representatives).  For an
    open star in degree 1 these are covectors; in degree p >= 2 they are
    vectors in the p-th exterior power of the 1-form basis; on other opens they
    are vectors in the block coordinates of ``max_faces``.  ``to_max`` maps
    basis coordinates into the concatenated maximal-face coordinates.
    """

    site: Site
    members: tuple[int, ...]
    p: int
    space: QuotientSpace
    max_faces: tuple[int, ...]
    block_dims: tuple[int, ...]
    to_max: Matrix
    star: int | None = None

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> Matrix:
        return self.space.basis

    def max_coords(self, c: Sequence) -> Row:
        return matvec(self.to_max, vec(c)) if self.to_max else ()

    def from_max(self, x: Sequence) -> Row:
        if self.dim == 0:
            if any(vec(x)):
                raise ValueError("vector does not come from a form")
            return ()
        y = solve(self.to_max, vec(x), self.dim)
        if y is None:
            raise ValueError("vector does not come from a form on this open set")
        return y

    def block(self, x: Sequence, face: int) -> Row:
        off = 0
        for q, d in zip(self.max_faces, self.block_dims):
            if q == face:
                return tuple(x[off:off + d])
            off += d
        raise KeyError(face)

    def to_json(self) -> dict:
        from .linalg import fmt

        return {
            "open": f"star:{self.star}" if self.star is not None else "open:" + ",".join(map(str, self.members)),
            "p": self.p,
            "dim": self.dim,
            "basis": [[fmt(x) for x in b] for b in self.basis],
        }


def _max_block_dim(site: Site, q: int, p: int) -> int:
    return ExteriorPower(site.star_one_forms(q).dim, p).dim


def _star_forms(site: Site, i: int, p: int) -> FormSpace:
    members = site.open_star(i)
    maxf = site.max_in(members)
    m = site.star_one_forms(i).dim
    ext = ExteriorPower(m, p)
    rows: list[Row] = []
    dims = []
    for q in maxf:
        res = restriction_one(site, i, q)
        rows.extend(ext.induced(res))
        dims.append(ExteriorPower(len(res), p).dim)
    rows_t = tuple(rows)
    if p == 1:
        space = site.star_one_forms(i)
        reps = [unit(m, k) for k in range(m)]
    else:
        K = kernel(rows_t, ext.dim) if rows_t else Subspace.full(ext.dim)
        space = QuotientSpace(Subspace.full(ext.dim), K)
        reps = list(space.basis)
    cols = [matvec(rows_t, c) for c in reps]
    to_max = transpose(tuple(cols), sum(dims)) if cols else tuple(() for _ in range(sum(dims)))
    return FormSpace(site, members, p, space, maxf, tuple(dims), to_max, star=i)


def _glued_forms(site: Site, members: tuple[int, ...], p: int) -> FormSpace:
    maxf = site.max_in(members)
    dims = [_max_block_dim(site, q, p) for q in maxf]
    total = sum(dims)
    offs = {}
    o = 0
    for q, d in zip(maxf, dims):
        offs[q] = o
        o += d
    constraints = []
    for i in members:
        loc = form_space(site, site.open_star(i), p)
        # image of the local space inside the blocks of the maximal faces above i
        img_cols = [loc.max_coords(unit(loc.dim, k)) for k in range(loc.dim)]
        locdim = sum(loc.block_dims)
        img = Subspace.span(img_cols, locdim)
        for y in annihilator(img).basis:
            row = [Fraction(0)] * total
            off_local = 0
            for q, d in zip(loc.max_faces, loc.block_dims):
                for t in range(d):
                    row[offs[q] + t] = y[off_local + t]
                off_local += d
            constraints.append(tuple(row))
    sub = kernel(tuple(constraints), total) if constraints else Subspace.full(total)
    space = QuotientSpace(sub, Subspace.zero(total))
    cols = list(space.basis)
    to_max = transpose(tuple(cols), total) if cols else tuple(() for _ in range(total))
    return FormSpace(site, members, p, space, maxf, tuple(dims), to_max, star=None)


def form_space(site: Site, members: Sequence[int], p: int) -> FormSpace:
    if p < 0:
        raise ValueError("degree must be non-negative")
    members = site.check_open(members)
    key = ("forms", members, p)
    cache = getattr(site, "_fs_cache", None)
    if cache is None:
        cache = site._fs_cache = {}
    if key not in cache:
        i = site.star_face(members)
        cache[key] = _star_forms(site, i, p) if i is not None else _glued_forms(site, members, p)
    return cache[key]


def one_forms(site: Site, members: Sequence[int] | None = None) -> FormSpace:
    members = members if members is not None else tuple(range(len(site.faces)))
    return form_space(site, members, 1)


def p_forms(site: Site, members: Sequence[int] | None, p: int) -> FormSpace:
    members = members if members is not None else tuple(range(len(site.faces)))
    return form_space(site, members, p)


def restrict_forms(src: FormSpace, dst: FormSpace) -> Matrix:
    """Restriction Omega^p(U1) -> Omega^p(U2), columns indexed by the source basis."""
    if src.p != dst.p or src.site is not dst.site:
        raise NotNested("restriction needs the same site and degree")
    if not set(dst.members) <= set(src.members):
        raise NotNested("target open set is not contained in the source")
    cols = []
    for k in range(src.dim):
        x = src.max_coords(unit(src.dim, k))
        proj = []
        for q in dst.max_faces:
            proj.extend(src.block(x, q))
        cols.append(dst.from_max(proj))
    return transpose(tuple(cols), dst.dim) if cols else tuple(() for _ in range(dst.dim))


def restrict_direct(src: FormSpace, dst: FormSpace) -> Matrix:
    """Degree-1 restriction between open stars by taking the further quotient."""
    if src.p != 1 or dst.p != 1 or src.star is None or dst.star is None:
        raise ValueError("direct restriction is defined for 1-forms on open stars")
    if not set(dst.members) <= set(src.members):
        raise NotNested("target open set is not contained in the source")
    cols = [dst.space.coords(b) for b in src.basis]
    return transpose(tuple(cols), dst.dim) if cols else tuple(() for _ in range(dst.dim))


# ---------------------------------------------------------------------------
# algebra structure


class FormAlgebra:
    """Forms of all degrees on one open set with the wedge product in basis coordinates."""

    def __init__(self, site: Site, members: Sequence[int] | None = None):
        self.site = site
        self.members = site.check_open(members if members is not None else range(len(site.faces)))

    def space(self, p: int) -> FormSpace:
        return form_space(self.site, self.members, p)

    @property
    def omega1(self) -> FormSpace:
        return self.space(1)

    def dim(self, p: int) -> int:
        return self.space(p).dim

    def wedge(self, a: int, x: Sequence, b: int, y: Sequence) -> Row:
        sa, sb, sc = self.space(a), self.space(b), self.space(a + b)
        xa, yb = sa.max_coords(x), sb.max_coords(y)
        out = []
        for q in sc.max_faces:
            m = self.site.star_one_forms(q).dim
            ea, eb = ExteriorPower(m, a), ExteriorPower(m, b)
            out.extend(ea.wedge(eb, sa.block(xa, q), sb.block(yb, q)))
        return sc.from_max(out)

    @cached_property
    def wedge_table(self) -> tuple[tuple[Row, ...], ...]:
        """wedge_table[k][l] = coordinates of eta_k ^ eta_l in Omega^2."""
        m = self.dim(1)
        return tuple(
            tuple(self.wedge(1, unit(m, k), 1, unit(m, l)) for l in range(m)) for k in range(m)
        )


# ---------------------------------------------------------------------------
# comparison maps


@dataclass
class ComparisonMap:
    matrix: Matrix
    source_dim: int
    target_dim: int

    @property
    def bijective(self) -> bool:
        from .linalg import rank

        return self.source_dim == self.target_dim and (
            self.source_dim == 0 or rank(self.matrix, self.source_dim) == self.source_dim
        )


def _drop_last_map(src: QuotientSpace, dst: QuotientSpace) -> ComparisonMap:
    cols = [dst.coords(b[:-1]) for b in src.basis]
    m = transpose(tuple(cols), dst.dim) if cols else tuple(() for _ in range(dst.dim))
    return ComparisonMap(m, src.dim, dst.dim)


def star_quotient_forms_iso(cx: PolyComplex, face, reading: str = "open") -> ComparisonMap:
    """Natural map Omega^1_Sigma(Star_P) -> Omega^1_{Sigma_P}(Sigma_P), (a, c) -> a."""
    site = ComplexSite(cx, reading)
    i = cx.find(face)
    src = site.star_one_forms(i)
    sq = star_quotient(cx, i)
    fs = FanSite(sq)
    origin = fs.star_face(range(len(fs.faces)))
    dst = fs.star_one_forms(origin)
    return _drop_last_map(src, dst)


def fan_vs_complex_forms(cx: PolyComplex, face) -> ComparisonMap:
    """For a trivially enriched fan: complex-route forms -> fan-route forms on a star."""
    i = cx.find(face)
    src = ComplexSite(cx).star_one_forms(i)
    dst = fan_site_from_complex(cx).star_one_forms(i)
    return _drop_last_map(src, dst)
