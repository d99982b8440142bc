"""Row reduction, intersection and coset coordinates against independent oracles."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from zhualg.exactlin import (
    DimensionMismatch,
    SparseVec,
    Subspace,
    intersect,
    kernel_of_columns,
    lift_from_complement,
    quotient_coords,
    rref,
    solve_in_span,
    subspace_sum,
)
from zhualg.rational import Rat


# ---------------------------------------------------------------- oracles


def bareiss_rank(rows):
    """Fraction-free Gaussian elimination rank (independent of rref)."""
    m = [[int(c.numerator) * 1 for c in row] for row in rows]
    # scale away denominators per row first
    m = []
    for row in rows:
        den = 1
        for c in row:
            den = den * c.denominator // _gcd(den, c.denominator)
        m.append([int(c * den) for c in row])
    if not m:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    r = 0
    for col in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nrows):
            for j in range(col + 1, ncols):
                m[i][j] = (m[r][col] * m[i][j] - m[i][col] * m[r][j]) // prev
            m[i][col] = 0
        prev = m[r][col]
        r += 1
        rank += 1
        if r == nrows:
            break
    return rank


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a if a else 1


def random_vec(rng, dim, density=0.5):
    entries = {}
    for i in range(dim):
        if rng.random() < density:
            entries[i] = Rat(rng.randint(-9, 9), rng.randint(1, 9))
    return SparseVec(dim, entries)


def sympy_intersection_dim(avecs, bvecs, dim):
    import sympy

    A = sympy.Matrix([[sympy.Rational(str(v.get(i))) for i in range(dim)] for v in avecs])
    B = sympy.Matrix([[sympy.Rational(str(v.get(i))) for i in range(dim)] for v in bvecs])
    ra = A.rank() if avecs else 0
    rb = B.rank() if bvecs else 0
    if not avecs or not bvecs:
        return 0
    stacked = sympy.Matrix.vstack(A, B)
    return ra + rb - stacked.rank()


# ---------------------------------------------------------------- rref


def test_rref_empty_input_is_zero_subspace():
    sub = rref([], dim=5)
    assert sub.rank == 0
    assert sub.dim == 5


def test_rref_full_span_dim2():
    vecs = [
        SparseVec.from_dense([1, 0]),
        SparseVec.from_dense([0, 1]),
        SparseVec.from_dense([1, 1]),
    ]
    sub = rref(vecs)
    assert sub.rank == 2
    assert sub.rows == {0: {0: Rat(1)}, 1: {1: Rat(1)}}


def test_rref_rank_matches_bareiss_oracle():
    rng = random.Random(20240601)
    dim = 30
    vecs = [random_vec(rng, dim, density=0.3) for _ in range(50)]
    dense = [[Fraction(str(v.get(i))) for i in range(dim)] for v in vecs]
    assert rref(vecs).rank == bareiss_rank(dense)


def test_rref_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        rref([SparseVec.from_dense([1, 0]), SparseVec.from_dense([1, 0, 0])])


def test_rref_canonical_and_deterministic():
    rng = random.Random(7)
    vecs = [random_vec(rng, 8) for _ in range(6)]
    a = rref(vecs)
    b = rref(vecs)
    assert a.rows == b.rows
    # every pivot entry is 1 and pivots are cleared from other rows
    for p, row in a.rows.items():
        assert row[p] == 1
        for q in a.rows:
            if q != p:
                assert p not in a.rows[q]


def test_membership_after_rref():
    rng = random.Random(99)
    vecs = [random_vec(rng, 10) for _ in range(4)]
    sub = rref(vecs, dim=10)
    combo = SparseVec(10)
    for v in vecs:
        combo = combo + v.scale(Rat(rng.randint(-3, 3)))
    assert sub.contains(combo)
    probe = random_vec(rng, 10)
    if not sub.contains(probe):
        assert not sub.reduce(probe).is_zero()


# ---------------------------------------------------------------- intersect


def test_intersect_idempotent():
    rng = random.Random(3)
    a = rref([random_vec(rng, 6) for _ in range(3)], dim=6)
    assert intersect(a, a).rows == a.rows


def test_intersect_coordinate_planes():
    xy = rref([SparseVec.from_dense([1, 0, 0]), SparseVec.from_dense([0, 1, 0])])
    yz = rref([SparseVec.from_dense([0, 1, 0]), SparseVec.from_dense([0, 0, 1])])
    common = intersect(xy, yz)
    assert common.rank == 1
    assert common.contains(SparseVec.from_dense([0, 5, 0]))


def test_intersect_matches_sympy_oracle():
    rng = random.Random(20240602)
    for _ in range(10):
        dim = rng.randint(2, 12)
        avecs = [random_vec(rng, dim) for _ in range(rng.randint(1, dim))]
        bvecs = [random_vec(rng, dim) for _ in range(rng.randint(1, dim))]
        a, b = rref(avecs, dim=dim), rref(bvecs, dim=dim)
        got = intersect(a, b)
        assert got.rank == sympy_intersection_dim(avecs, bvecs, dim)
        for v in got.basis():
            assert a.contains(v) and b.contains(v)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_dimension_formula(data):
    dim = data.draw(st.integers(min_value=1, max_value=8))
    rng = random.Random(data.draw(st.integers(min_value=0, max_value=10**6)))
    a = rref([random_vec(rng, dim) for _ in range(rng.randint(0, dim))], dim=dim)
    b = rref([random_vec(rng, dim) for _ in range(rng.randint(0, dim))], dim=dim)
    total = subspace_sum(a, b)
    meet = intersect(a, b)
    assert total.rank + meet.rank == a.rank + b.rank


# ---------------------------------------------------------------- quotient


def test_quotient_trivial_relations():
    rng = random.Random(11)
    v = random_vec(rng, 7)
    out = quotient_coords(7, Subspace(7), v)
    assert out.dim == 7
    assert out.entries == v.entries


def test_quotient_kills_relations():
    rng = random.Random(12)
    vecs = [random_vec(rng, 9) for _ in range(4)]
    rel = rref(vecs, dim=9)
    member = SparseVec(9)
    for v in vecs:
        member = member + v.scale(Rat(rng.randint(-4, 4)))
    assert quotient_coords(9, rel, member).is_zero()


def test_quotient_round_trip_difference_in_relations():
    rng = random.Random(13)
    rel = rref([random_vec(rng, 10) for _ in range(3)], dim=10)
    for _ in range(12):
        v = random_vec(rng, 10)
        coords = quotient_coords(10, rel, v)
        assert coords.dim == 10 - rel.rank
        lifted = lift_from_complement(rel, coords)
        assert rel.contains(v - lifted)


def test_quotient_linear_and_separating():
    rng = random.Random(14)
    rel = rref([random_vec(rng, 8) for _ in range(3)], dim=8)
    u, v = random_vec(rng, 8), random_vec(rng, 8)
    cu = quotient_coords(8, rel, u)
    cv = quotient_coords(8, rel, v)
    csum = quotient_coords(8, rel, u + v)
    assert csum == cu + cv
    # equal output iff difference lies in relations
    assert (cu == cv) == rel.contains(u - v)


def test_quotient_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        quotient_coords(5, Subspace(4), SparseVec(5))


# ---------------------------------------------------------------- solving


def test_solve_in_span_round_trip():
    rng = random.Random(15)
    vecs = [random_vec(rng, 6) for _ in range(5)]
    target = SparseVec(6)
    for v in vecs[:3]:
        target = target + v.scale(Rat(rng.randint(-3, 3)))
    coeffs = solve_in_span(vecs, target)
    assert coeffs is not None
    recon = SparseVec(6)
    for c, v in zip(coeffs, vecs):
        recon = recon + v.scale(c)
    assert recon == target


def test_solve_in_span_outside():
    vecs = [SparseVec.from_dense([1, 0, 0])]
    assert solve_in_span(vecs, SparseVec.from_dense([0, 1, 0])) is None


def test_kernel_of_columns_gives_relations():
    rng = random.Random(16)
    vecs = [random_vec(rng, 5) for _ in range(8)]
    for combo in kernel_of_columns(vecs):
        acc = SparseVec(5)
        for i, c in combo.entries.items():
            acc = acc + vecs[i].scale(c)
        assert acc.is_zero()
    # rank-nullity
    assert len(kernel_of_columns(vecs)) == 8 - rref(vecs, dim=5).rank
