"""Zhu-algebra layer: certified O-truncations, filtration dims against the
closed forms of the three universal families, graded ring identities, the C2
quotient and the degreewise epimorphism onto gr."""

import math
import random

import pytest

from zhualg.exactlin import SparseVec
from zhualg.presets import (
    affine_sl2_presentation,
    heisenberg_presentation,
    virasoro_presentation,
)
from zhualg.rational import Rat, binomial
from zhualg.voa import Space, mode_act, translate
from zhualg.zhu import (
    C2Slice,
    EngineInvariantError,
    ZhuTruncation,
    c2_quotient,
    check_voa_strong_generation,
    circ,
    gr_finite_generation_witness,
    higher_o_element,
    o_space,
    phi_map,
    star,
    zhu_filtration_dims,
)


@pytest.fixture(scope="module")
def vira_zt():
    return ZhuTruncation(virasoro_presentation("1/2"), 6)


@pytest.fixture(scope="module")
def heis_zt():
    return ZhuTruncation(heisenberg_presentation(1, 1), 6)


@pytest.fixture(scope="module")
def sl2_zt():
    return ZhuTruncation(affine_sl2_presentation(1), 3)


def omega(space):
    return space.basis_state((((0, -2),), 0))


def alpha(space):
    return space.basis_state((((0, -1),), 0))


# ---------------------------------------------------------------- circ/star


def test_circ_vacuum_left_is_zero(heis_zt):
    sp = heis_zt.space
    one = sp.vacuum_like()
    for mono in sp.weight_basis(3):
        assert circ(one, sp.basis_state(mono)).is_zero()


def test_circ_with_vacuum_right(vira_zt):
    # a o 1 = L(-1)a + wt(a) a
    sp = vira_zt.space
    for w in range(2, 5):
        for mono in sp.weight_basis(w):
            a = sp.basis_state(mono)
            assert circ(a, sp.vacuum_like()) == translate(a) + a.scale(w)


def test_circ_omega_vacuum_hand_value(vira_zt):
    sp = vira_zt.space
    got = circ(omega(sp), sp.vacuum_like())
    want = sp.basis_state((((0, -3),), 0)) + sp.basis_state((((0, -2),), 0)).scale(2)
    assert got == want


def test_star_identity_element(vira_zt, heis_zt):
    for zt in (vira_zt, heis_zt):
        sp = zt.space
        one = sp.vacuum_like()
        for mono in sp.weight_basis(4):
            b = sp.basis_state(mono)
            assert star(one, b) == b
            assert star(b, one) == b


def test_star_omega_omega_hand_value(vira_zt):
    sp = vira_zt.space
    got = star(omega(sp), omega(sp))
    want = (
        sp.basis_state((((0, -2), (0, -2)), 0))
        + sp.basis_state((((0, -3),), 0)).scale(2)
        + sp.basis_state((((0, -2),), 0)).scale(2)
    )
    assert got == want


def pick_homogeneous(rng, sp, lo, hi):
    """Random (weight, basis state) with a nonempty weight space."""
    while True:
        w = rng.randint(lo, hi)
        basis = sp.weight_basis(w)
        if basis:
            return w, sp.basis_state(rng.choice(basis))


def test_star_associative_mod_relations(vira_zt, heis_zt):
    rng = random.Random(41)
    for zt in (vira_zt, heis_zt):
        sp = zt.space
        for _ in range(6):
            wa, a = pick_homogeneous(rng, sp, 1, 2)
            wb, b = pick_homogeneous(rng, sp, 1, 2)
            wc, c = pick_homogeneous(rng, sp, 1, 2)
            lvl = wa + wb + wc
            diff = star(star(a, b), c) - star(a, star(b, c))
            assert zt.coset(diff, lvl).is_zero()


def test_commutator_formula_mod_relations(vira_zt, heis_zt):
    # a*b - b*a == sum_j C(wt a - 1, j) a_j b   modulo the certified relations
    rng = random.Random(43)
    for zt in (vira_zt, heis_zt):
        sp = zt.space
        for _ in range(8):
            wa, a = pick_homogeneous(rng, sp, 1, 3)
            wb, b = pick_homogeneous(rng, sp, 1, 3)
            rhs = sp.zero()
            for j in range(0, wa + 1):
                cb = binomial(wa - 1, j)
                if cb:
                    rhs = rhs + mode_act(a, j, b).scale(cb)
            diff = star(a, b) - star(b, a) - rhs
            assert zt.coset(diff, wa + wb).is_zero()


def test_translation_relation_mod_o(vira_zt, heis_zt):
    # L(-1)a + (wt a) a lies in O(V)
    for zt in (vira_zt, heis_zt):
        sp = zt.space
        for w in range(1, 5):
            for mono in sp.weight_basis(w):
                a = sp.basis_state(mono)
                assert zt.coset(translate(a) + a.scale(w), w + 1).is_zero()


def test_higher_o_membership(vira_zt, heis_zt):
    sp = vira_zt.space
    el = higher_o_element(omega(sp), omega(sp), 1, 0)
    # components reach weight wt a + wt b + 1 + m = 6
    assert zt_contains(vira_zt, el, 6)
    sp = heis_zt.space
    el = higher_o_element(alpha(sp), alpha(sp), 1, 1)
    assert zt_contains(heis_zt, el, 4)
    with pytest.raises(ValueError):
        higher_o_element(alpha(sp), alpha(sp), 0, 1)


def zt_contains(zt, state, level):
    return zt.coset(state, level).is_zero()


def test_higher_o_equals_circ_at_zero(vira_zt):
    sp = vira_zt.space
    assert higher_o_element(omega(sp), omega(sp), 0, 0) == circ(omega(sp), omega(sp))


# ---------------------------------------------------------------- o_space


def test_o_space_level_zero_all_families():
    for pres in (
        heisenberg_presentation(1, 1),
        virasoro_presentation("1/2"),
        affine_sl2_presentation(1),
    ):
        tr = o_space(pres, 0)
        assert tr.certified
        assert tr.rank == 0  # O cap V_0 = 0, so A(V)_0 is one-dimensional


def test_o_space_monotone_history(vira_zt):
    hist = vira_zt.relations.history
    for (n1, d1), (n2, d2) in zip(hist, hist[1:]):
        assert n2 == n1 + 1
        assert all(x <= y for x, y in zip(d1, d2))


def test_o_space_explicit_bound(vira_zt):
    tr = o_space(virasoro_presentation("1/2"), 4, nprime=6)
    assert tr.certified
    assert tr.subspace.rank == vira_zt.relations.level_relations(4).rank


# -------------------------------------------------------- filtration dims


def test_virasoro_filtration_dims(vira_zt):
    # A(V) = polynomial ring on a weight-2 class: dims floor(n/2)+1
    rep = zhu_filtration_dims(vira_zt)
    assert rep["certified"]
    assert rep["dims"] == [n // 2 + 1 for n in range(7)] == [1, 1, 2, 2, 3, 3, 4]


def test_heisenberg_filtration_dims(heis_zt):
    rep = zhu_filtration_dims(heis_zt)
    assert rep["certified"]
    assert rep["dims"] == [n + 1 for n in range(7)]


def test_affine_sl2_filtration_dims(sl2_zt):
    # enveloping-algebra filtration: C(n+3, 3)
    rep = zhu_filtration_dims(sl2_zt)
    assert rep["certified"]
    assert rep["dims"] == [math.comb(n + 3, 3) for n in range(4)] == [1, 4, 10, 20]


def test_virasoro_a4_dimension(vira_zt):
    assert vira_zt.level_dim(4) == 3


def test_heisenberg_a3_dimension(heis_zt):
    assert heis_zt.level_dim(3) == 4


def test_identity_coset_nonzero(vira_zt, heis_zt, sl2_zt):
    for zt in (vira_zt, heis_zt, sl2_zt):
        for i in range(min(3, zt.n_max) + 1):
            assert not zt.identity_coset(i).is_zero()


def test_star_filtration_compatible(vira_zt):
    sp = vira_zt.space
    rng = random.Random(47)
    for _ in range(5):
        wa, a = pick_homogeneous(rng, sp, 1, 3)
        wb, b = pick_homogeneous(rng, sp, 1, 3)
        prod = star(a, b)
        assert max(prod.weights() or {0}) <= wa + wb
        vec = vira_zt.star_coset(a, b, wa, wb)
        assert vec.dim == vira_zt.level_dim(wa + wb)


# ---------------------------------------------------------------- gr A(V)


def test_gr_dims_heisenberg(heis_zt):
    gr = heis_zt.gr()
    assert gr.dims() == [1] * 7
    # each degree spanned by the class of a(-1)^n 1
    sp = heis_zt.space
    for n in range(7):
        mono = (((0, -1),) * n, 0)
        assert not gr.class_of(sp.basis_state(mono)).is_zero()


def test_gr_dims_virasoro(vira_zt):
    assert vira_zt.gr().dims() == [1, 0, 1, 0, 1, 0, 1]


def test_gr_dims_affine(sl2_zt):
    # gr of the enveloping filtration: symmetric algebra on 3 variables
    assert sl2_zt.gr().dims() == [math.comb(n + 2, 2) for n in range(4)]


def test_gr_commutative_all_families(vira_zt, heis_zt, sl2_zt):
    for zt in (vira_zt, heis_zt, sl2_zt):
        assert zt.gr().check_commutative()


def test_gr_product_is_class_of_minus_one_mode(heis_zt):
    gr = heis_zt.gr()
    sp = heis_zt.space
    a = sp.basis_state((((0, -1), (0, -1)), 0))
    b = sp.basis_state((((0, -1),), 0))
    top = mode_act(a, -1, b)
    assert gr.class_of(top) == gr.product_table(2, 1)[(0, 0)]


# ---------------------------------------------------------------- V/C2(V)


def test_c2_dims_heisenberg(heis_zt):
    slice_ = c2_quotient(heis_zt.space, 6)
    assert slice_.dims() == [1] * 7


def test_c2_dims_virasoro(vira_zt):
    slice_ = c2_quotient(vira_zt.space, 6)
    assert slice_.dims() == [1, 0, 1, 0, 1, 0, 1]


def test_c2_kills_deep_modes(heis_zt):
    sp = heis_zt.space
    slice_ = c2_quotient(sp, 6)
    rng = random.Random(53)
    for _ in range(8):
        wa, a = pick_homogeneous(rng, sp, 1, 3)
        wb, b = pick_homogeneous(rng, sp, 0, 2)
        el = mode_act(a, -2, b)
        if not el.is_zero():
            assert slice_.class_of(el).is_zero()


def test_c2_product_commutative(vira_zt, heis_zt):
    for zt in (vira_zt, heis_zt):
        sp = zt.space
        slice_ = c2_quotient(sp, 5)
        for wa in range(1, 3):
            for wb in range(1, 3):
                for am in sp.weight_basis(wa):
                    for bm in sp.weight_basis(wb):
                        a, b = sp.basis_state(am), sp.basis_state(bm)
                        assert slice_.product_class(a, b) == slice_.product_class(b, a)


# ---------------------------------------------------------------- phi


def test_phi_identity_class(vira_zt):
    gr = vira_zt.gr()
    assert not phi_map(gr, vira_zt.space.vacuum_like()).is_zero()


def test_phi_kills_c2(vira_zt, heis_zt, sl2_zt):
    rng = random.Random(59)
    for zt in (vira_zt, heis_zt, sl2_zt):
        sp = zt.space
        gr = zt.gr()
        for _ in range(6):
            wa, a = pick_homogeneous(rng, sp, 1, 2)
            wb, b = pick_homogeneous(rng, sp, 0, max(0, zt.n_max - wa - 1))
            el = mode_act(a, -2, b)
            if not el.is_zero():
                assert phi_map(gr, el).is_zero()


def test_phi_degreewise_surjective_rank(vira_zt, heis_zt, sl2_zt):
    # rank of phi on the C2-quotient representatives equals dim S_n
    for zt in (vira_zt, heis_zt, sl2_zt):
        sp = zt.space
        gr = zt.gr()
        c2 = c2_quotient(sp, zt.n_max)
        for n in range(zt.n_max + 1):
            images = [phi_map(gr, sp.basis_state(m)) for m in c2.reps[n]]
            from zhualg.exactlin import rref

            rank = rref(images, dim=len(gr.reps[n])).rank if images else 0
            assert rank == len(gr.reps[n])


def test_phi_multiplicative(vira_zt, heis_zt):
    for zt in (vira_zt, heis_zt):
        sp = zt.space
        gr = zt.gr()
        c2 = c2_quotient(sp, zt.n_max)
        for wa in range(1, 3):
            for wb in range(1, 3):
                if wa + wb > zt.n_max:
                    continue
                for am in c2.reps[wa]:
                    for bm in c2.reps[wb]:
                        a, b = sp.basis_state(am), sp.basis_state(bm)
                        lhs = phi_map(gr, mode_act(a, -1, b))
                        # product of classes via the graded table
                        ca, cb = gr.class_of(a), gr.class_of(b)
                        table = gr.product_table(wa, wb)
                        rhs = SparseVec(len(gr.reps[wa + wb]))
                        for i, x in ca.entries.items():
                            for j, y in cb.entries.items():
                                rhs = rhs + table[(i, j)].scale(x * y)
                        assert lhs == rhs


# -------------------------------------------------- strong generation


def test_strong_generation_heisenberg(heis_zt):
    sp = heis_zt.space
    rep = check_voa_strong_generation(sp, [alpha(sp)], 6)
    assert rep["passed"]


def test_strong_generation_virasoro(vira_zt):
    sp = vira_zt.space
    rep = check_voa_strong_generation(sp, [omega(sp)], 6)
    assert rep["passed"]


def test_strong_generation_empty_fails_at_two(vira_zt):
    rep = check_voa_strong_generation(vira_zt.space, [], 6)
    assert not rep["passed"]
    assert rep["first_failure"] == 2


# -------------------------------------------------- generation witness


def test_witness_heisenberg(heis_zt):
    rep = gr_finite_generation_witness(heis_zt.gr())
    assert rep["generator_degrees"] == [0, 1] or rep["generator_degrees"] == [1]
    assert rep["new_generators_per_degree"][1] == 1
    assert sum(rep["new_generators_per_degree"][2:]) == 0
    assert rep["witness"]


def test_witness_virasoro(vira_zt):
    rep = gr_finite_generation_witness(vira_zt.gr())
    assert rep["new_generators_per_degree"][2] == 1
    assert sum(rep["new_generators_per_degree"][3:]) == 0
    assert rep["witness"]


def test_witness_affine(sl2_zt):
    rep = gr_finite_generation_witness(sl2_zt.gr())
    assert rep["new_generators_per_degree"][1] == 3
    assert sum(rep["new_generators_per_degree"][2:]) == 0
    assert rep["witness"]
