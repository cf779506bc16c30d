"""Trivial tropical bundles with connection over a fixed open set.

A connection of rank r is a list of r x r matrices ``A_k``, one per basis
1-form, so that theta = sum eta_k (x) A_k.  Endomorphisms act on column
vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import bar
from .bar import BarSetup
from .linalg import (
    Matrix,
    Subspace,
    add,
    identity,
    is_zero,
    kernel,
    kron,
    mat,
    matmul,
    scale,
    sub,
    transpose,
    zeros,
)


class ConnectionError_(ValueError):
    def __init__(self, message: str, **report):
        super().__init__(message)
        self.report = {"violation": type(self).__name__.rstrip("_"), "message": message, **report}


class DimMismatch(ConnectionError_):
    pass


class NotIntegrable(ConnectionError_):
    pass


class BaseMismatch(ConnectionError_):
    pass


class NotUnipotent(ConnectionError_):
    pass


class NotComodule(ConnectionError_):
    pass


def same_base(a: BarSetup, b: BarSetup) -> bool:
    return a is b or (dict(a.dims).get(1) == dict(b.dims).get(1)
                      and dict(a.dims).get(2, 0) == dict(b.dims).get(2, 0) and a.wedge == b.wedge)


@dataclass(frozen=True)
class TropConnection:
    base: BarSetup
    rank: int
    theta: tuple[Matrix, ...]

    def __post_init__(self):
        theta = tuple(mat(a) if a else tuple() for a in self.theta)
        object.__setattr__(self, "theta", theta)
        if len(theta) != self.base.m:
            raise DimMismatch(f"expected {self.base.m} matrices, got {len(theta)}")
        for a in theta:
            if len(a) != self.rank or any(len(r) != self.rank for r in a):
                raise DimMismatch(f"theta matrices must be {self.rank} x {self.rank}")

    @classmethod
    def trivial(cls, base: BarSetup, rank: int = 1) -> "TropConnection":
        return cls(base, rank, tuple(zeros(rank, rank) for _ in range(base.m)))

    @classmethod
    def from_json(cls, data: dict, base: BarSetup) -> "TropConnection":
        r = int(data["rank"])
        acc = [zeros(r, r) for _ in range(base.m)]
        for term in data.get("theta", []):
            form = [Fraction(x) for x in term["form"]]
            if len(form) != base.m:
                raise DimMismatch(f"form has {len(form)} coordinates, expected {base.m}")
            m = mat(term["matrix"])
            if len(m) != r or any(len(row) != r for row in m):
                raise DimMismatch(f"theta matrices must be {r} x {r}")
            for k, c in enumerate(form):
                if c:
                    acc[k] = add(acc[k], scale(c, m))
        return cls(base, r, tuple(acc))

    def to_json(self) -> dict:
        from .linalg import fmt

        terms = []
        for k, a in enumerate(self.theta):
            if not is_zero(a):
                terms.append({"form": [fmt(Fraction(int(i == k))) for i in range(self.base.m)],
                              "matrix": [[fmt(x) for x in row] for row in a]})
        return {"rank": self.rank, "theta": terms}


def _check_base(c1: TropConnection, c2: TropConnection) -> None:
    if not same_base(c1.base, c2.base):
        raise BaseMismatch("connections live over different bases")


def curvature(c: TropConnection) -> list[Matrix]:
    """theta ^ theta as one r x r matrix per Omega^2 basis element."""
    w = c.base.wedge
    d2 = c.base.dims.get(2, 0)
    r = c.rank
    out = [zeros(r, r) for _ in range(d2)]
    m = c.base.m
    for k in range(m):
        for l in range(k + 1, m):
            coeffs = w[k][l]
            if not any(coeffs):
                continue
            comm = sub(matmul(c.theta[k], c.theta[l]), matmul(c.theta[l], c.theta[k]))
            for t, v in enumerate(coeffs):
                if v:
                    out[t] = add(out[t], scale(v, comm))
    return out


def is_integrable(c: TropConnection) -> tuple[bool, dict | None]:
    for t, m in enumerate(curvature(c)):
        if not is_zero(m):
            return False, {"omega2_index": t, "coefficient": m}
    return True, None


def _stack(mats: Sequence[Matrix], ncols: int) -> Matrix:
    return tuple(row for a in mats for row in a)


def joint_kernel(mats: Sequence[Matrix], n: int) -> Subspace:
    rows = _stack(mats, n)
    return kernel(rows, n) if rows else Subspace.full(n)


def horizontal_sections(c: TropConnection) -> Subspace:
    ok, wit = is_integrable(c)
    if not ok:
        raise NotIntegrable("connection is not integrable", witness=wit)
    return joint_kernel(c.theta, c.rank)


def dual(c: TropConnection) -> TropConnection:
    return TropConnection(c.base, c.rank, tuple(scale(-1, transpose(a, c.rank)) for a in c.theta))


def tensor(c1: TropConnection, c2: TropConnection) -> TropConnection:
    _check_base(c1, c2)
    i1, i2 = identity(c1.rank), identity(c2.rank)
    mats = tuple(add(kron(a, i2), kron(i1, b)) for a, b in zip(c1.theta, c2.theta))
    out = TropConnection(c1.base, c1.rank * c2.rank, mats)
    if is_integrable(c1)[0] and is_integrable(c2)[0]:
        assert is_integrable(out)[0], "tensor product lost integrability"
    return out


def vec_to_matrix(x: Sequence, r1: int, r2: int) -> Matrix:
    """x[i*r2 + j] is the (j, i) entry of an r2 x r1 matrix."""
    return tuple(tuple(Fraction(x[i * r2 + j]) for i in range(r1)) for j in range(r2))


def matrix_to_vec(t: Matrix, r1: int, r2: int) -> tuple:
    return tuple(t[j][i] for i in range(r1) for j in range(r2))


def hom_direct(c1: TropConnection, c2: TropConnection) -> Subspace:
    """Intertwiners T: E1 -> E2 with A2_k T = T A1_k, solved entrywise."""
    _check_base(c1, c2)
    r1, r2 = c1.rank, c2.rank
    n = r1 * r2
    rows = []
    for a1, a2 in zip(c1.theta, c2.theta):
        for j in range(r2):
            for i in range(r1):
                # (A2 T - T A1)[j][i]
                row = [Fraction(0)] * n
                for l in range(r2):
                    row[i * r2 + l] += a2[j][l]
                for l in range(r1):
                    row[l * r2 + j] -= a1[l][i]
                if any(row):
                    rows.append(tuple(row))
    return kernel(tuple(rows), n) if rows else Subspace.full(n)


def hom_via_tensor(c1: TropConnection, c2: TropConnection) -> Subspace:
    """Horizontal sections of dual(c1) (x) c2."""
    return horizontal_sections(tensor(dual(c1), c2))


def hom_space(c1: TropConnection, c2: TropConnection, check: bool = True) -> Subspace:
    h = hom_direct(c1, c2)
    if check:
        other = hom_via_tensor(c1, c2)
        if other.basis != h.basis:
            raise AssertionError("intertwiner system and internal Hom disagree")
    return h


# ---------------------------------------------------------------------------
# unipotence


def unipotent_filtration(c: TropConnection) -> list[Subspace] | None:
    """Increasing flag 0 = F_0 < F_1 < ... < F_t = E with A_k F_j inside F_(j-1).

    Each step adjoins the horizontal sections of the quotient by the previous
    step.  Returns None if the peel gets stuck.
    """
    r = c.rank
    flag = [Subspace.zero(r)]
    while flag[-1].dim < r:
        prev = flag[-1]
        if prev.dim:
            ann = kernel(prev.basis, r).basis  # covectors vanishing on prev
        else:
            ann = identity(r)
        mats = [matmul(ann, a) for a in c.theta] if ann else []
        nxt = joint_kernel(mats, r) if mats else Subspace.full(r)
        nxt = nxt + prev
        if nxt.dim == prev.dim:
            return None
        flag.append(nxt)
    return flag


def is_unipotent(c: TropConnection) -> tuple[bool, list[Subspace] | None]:
    f = unipotent_filtration(c)
    return f is not None, f


def words_vanish(c: TropConnection, length: int) -> bool:
    """All products A_i1 ... A_ik of the given length are zero."""
    return all(is_zero(p) for p in word_products(c, length))


def word_products(c: TropConnection, k: int) -> list[Matrix]:
    """A_i1 A_i2 ... A_ik for words in lexicographic order."""
    r = c.rank
    out = [identity(r)]
    for _ in range(k):
        out = [matmul(p, a) for p in out for a in c.theta]
    return out


# ---------------------------------------------------------------------------
# comodules


@dataclass(frozen=True)
class ComoduleData:
    """Components of v -> sum_w (v A_w) (x) [w], indexed by length then word."""

    rank: int
    m: int
    components: tuple[tuple[Matrix, ...], ...]

    def to_json(self) -> dict:
        from .linalg import fmt

        return {
            "rank": self.rank,
            "m": self.m,
            "components": [
                [[[fmt(x) for x in row] for row in a] for a in level] for level in self.components
            ],
        }


def _entry_vectors(level: Sequence[Matrix], r: int):
    for a in range(r):
        for b in range(r):
            yield (a, b), tuple(mt[a][b] for mt in level)


def connection_to_comodule(c: TropConnection, check: bool = True) -> ComoduleData:
    r = c.rank
    if not words_vanish(c, r):
        raise NotUnipotent(f"some word of length {r} in the connection matrices is nonzero")
    levels = []
    for k in range(r + 1):
        prods = word_products(c, k)
        if k and all(is_zero(p) for p in prods):
            break
        levels.append(tuple(prods))
    data = ComoduleData(r, c.base.m, tuple(levels))
    if check:
        _check_kernel(data, c.base)
    return data


def _check_kernel(d: ComoduleData, base: BarSetup) -> None:
    for k, level in enumerate(d.components):
        if k < 2:
            continue
        ker = bar.h0_kernel(base, k)
        for (a, b), v in _entry_vectors(level, d.rank):
            if not ker.contains(v):
                raise NotComodule(f"length-{k} component at entry ({a},{b}) is outside H^0(B)",
                                  length=k, entry=[a, b])


def comodule_to_connection(d: ComoduleData, base: BarSetup) -> TropConnection:
    r = d.rank
    if d.m != base.m:
        raise DimMismatch("comodule and base have different numbers of 1-forms")
    if not d.components or d.components[0] != (identity(r),):
        raise NotComodule("length-0 component must be the identity")
    _check_kernel(d, base)
    letters = d.components[1] if len(d.components) > 1 else tuple(zeros(r, r) for _ in range(base.m))
    c = TropConnection(base, r, letters)
    # coassociativity forces every component to be the product of its letters
    for k, level in enumerate(d.components):
        if tuple(word_products(c, k)) != tuple(level):
            raise NotComodule(f"length-{k} component is not the product of its letters", length=k)
    if not words_vanish(c, len(d.components)):
        raise NotComodule("components stop before the words vanish")
    return c


def random_unipotent(base: BarSetup, rank: int, rng, lo: int = -2, hi: int = 2,
                     tries: int = 200) -> TropConnection:
    """A random integrable connection with strictly upper triangular matrices, conjugated.

    Integrability is achieved by drawing A_k = sum_j L[k][j] N_j where N_j
    range over commuting nilpotents (polynomials in one shift) or, when the
    wedge table vanishes, arbitrary strictly upper triangular matrices.
    """
    r, m = rank, base.m
    free = bar.free_rank_if_free(base) is not None
    for _ in range(tries):
        if free:
            mats = [tuple(tuple(Fraction(rng.randint(lo, hi)) if j > i else Fraction(0) for j in range(r))
                          for i in range(r)) for _ in range(m)]
        else:
            shift = tuple(tuple(Fraction(int(j == i + 1)) for j in range(r)) for i in range(r))
            powers = []
            p = shift
            for _ in range(max(r - 1, 0)):
                powers.append(p)
                p = matmul(p, shift)
            mats = []
            for _ in range(m):
                acc = zeros(r, r)
                for q in powers:
                    acc = add(acc, scale(rng.randint(lo, hi), q))
                mats.append(acc)
        g = _random_unimodular(r, rng)
        gi = _inverse_int(g)
        mats = [matmul(matmul(g, a), gi) for a in mats]
        c = TropConnection(base, r, tuple(mats))
        if is_integrable(c)[0]:
            return c
    raise RuntimeError("could not draw an integrable connection")


def _random_unimodular(r: int, rng) -> Matrix:
    g = [list(row) for row in identity(r)]
    for _ in range(2 * r):
        i, j = rng.randrange(r), rng.randrange(r)
        if i != j:
            c = rng.choice((-1, 1))
            g[i] = [x + c * y for x, y in zip(g[i], g[j])]
    return tuple(tuple(Fraction(x) for x in row) for row in g)


def _inverse_int(g: Matrix) -> Matrix:
    from .linalg import inverse

    return inverse(g)
