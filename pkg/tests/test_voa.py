"""Engine tests: PBW bases against partition oracles, mode actions against
hand commutators and a normal-ordering oracle, weight additivity, and the
standard commutator identity for vertex-operator modes."""

import random
from functools import lru_cache

import pytest

from zhualg.presets import (
    affine_sl2_presentation,
    heisenberg_presentation,
    make_module,
    virasoro_presentation,
)
from zhualg.rational import Rat, binomial
from zhualg.voa import (
    CutoffExceeded,
    GeneratorSpec,
    ModulePresentation,
    PresentationError,
    Space,
    VOAPresentation,
    generator_mode_act,
    mode_act,
    translate,
    verify_presentation,
    weight_basis,
)


# ---------------------------------------------------------------- oracles


@lru_cache(maxsize=None)
def partitions_min_part(n, minpart=1, maxpart=None):
    """Number of partitions of n with all parts >= minpart (and <= maxpart)."""
    if n == 0:
        return 1
    if maxpart is None:
        maxpart = n
    total = 0
    for k in range(min(n, maxpart), minpart - 1, -1):
        total += partitions_min_part(n - k, minpart, k)
    return total


@lru_cache(maxsize=None)
def colored_partitions(n, colors, maxkey=None):
    """Partitions of n into parts carrying one of `colors` labels, counted
    up to reordering (multisets of (part, color))."""
    if n == 0:
        return 1
    total = 0
    start = n if maxkey is None else min(n, maxkey[0])
    for k in range(start, 0, -1):
        for c in range(colors):
            key = (k, c)
            if maxkey is not None and key > maxkey:
                continue
            total += colored_partitions(n - k, colors, key)
    return total


@pytest.fixture(scope="module")
def vira():
    return Space(virasoro_presentation("1/2"), 10)


@pytest.fixture(scope="module")
def heis():
    return Space(heisenberg_presentation(1, 1), 10)


@pytest.fixture(scope="module")
def sl2():
    return Space(affine_sl2_presentation(1), 6)


# ---------------------------------------------------------------- bases


def test_heisenberg_weight_basis_counts(heis):
    assert len(weight_basis(heis, 4)) == 5  # partitions of 4
    for n in range(9):
        assert len(weight_basis(heis, n)) == partitions_min_part(n, 1)


def test_virasoro_weight_basis_counts(vira):
    assert len(weight_basis(vira, 6)) == 4  # partitions into parts >= 2
    for n in range(10):
        assert len(weight_basis(vira, n)) == partitions_min_part(n, 2)


def test_vacuum_weight_zero(heis, vira, sl2):
    for sp in (heis, vira, sl2):
        assert weight_basis(sp, 0) == [((), 0)]


def test_heisenberg_rank2_colored_counts():
    sp = Space(heisenberg_presentation(2, 1), 6)
    for n in range(7):
        assert len(weight_basis(sp, n)) == colored_partitions(n, 2)


def test_affine_sl2_counts(sl2):
    for n in range(6):
        assert len(weight_basis(sl2, n)) == colored_partitions(n, 3)


def test_module_bases_count_bottom():
    V = affine_sl2_presentation(1)
    M = make_module(V, "weyl:2")
    sp = Space(M, 4)
    for n in range(5):
        assert len(sp.weight_basis(n)) == 3 * colored_partitions(n, 3)


def test_cutoff_is_enforced(heis):
    with pytest.raises(CutoffExceeded):
        weight_basis(heis, heis.cutoff + 1)


# ---------------------------------------------------------------- lie modes


def test_heisenberg_single_commutator(heis):
    a = heis.basis_state((((0, -1),), 0))
    up = generator_mode_act(0, 1, a)  # alpha_1 alpha_{-1} |0> = level |0>
    assert up == heis.vacuum_like()


def test_annihilation_of_vacuum(heis, vira, sl2):
    for sp in (heis, vira, sl2):
        for g in sp.pres.generators:
            for m in range(1 - g.weight, 3):
                assert generator_mode_act(g, m, sp.vacuum_like()).is_zero()


def test_virasoro_l0_grading(vira):
    for n in range(7):
        for mono in vira.weight_basis(n):
            st = vira.basis_state(mono)
            assert generator_mode_act(0, 0, st) == st.scale(n)


def test_virasoro_central_term(vira):
    # L_2 L_{-2} |0> = (c/2) |0>  since (m^3-m)/12 = 1/2 at m=2
    omega = vira.basis_state((((0, -2),), 0))
    res = generator_mode_act(0, 2, omega)
    assert res == vira.vacuum_like().scale(Rat(1, 4))  # c=1/2 -> c/2 = 1/4


def test_sl2_cartan_charge(sl2):
    # h_0 is diagonal with eigenvalue = charge on every basis monomial
    for n in range(4):
        for mono in sl2.weight_basis(n):
            st = sl2.basis_state(mono)
            assert generator_mode_act(1, 0, st) == st.scale(sl2.mono_charge(mono))


def test_fock_bottom_action():
    V = heisenberg_presentation(1, 1)
    M = make_module(V, "fock:3/2")
    sp = Space(M, 5)
    w = sp.vacuum_like()
    assert generator_mode_act(0, 0, w) == w.scale(Rat(3, 2))
    assert generator_mode_act(0, 1, w).is_zero()


def test_weyl_bottom_action():
    V = affine_sl2_presentation(1)
    M = make_module(V, "weyl:1")
    sp = Space(M, 4)
    v0, v1 = sp.vacuum_like(0), sp.vacuum_like(1)
    assert generator_mode_act(2, 0, v0) == v1  # f v0 = v1
    assert generator_mode_act(2, 0, v1).is_zero()
    assert generator_mode_act(0, 0, v1) == v0  # e v1 = 1*(1) v0
    assert generator_mode_act(1, 0, v0) == v0  # h v0 = v0


# ---------------------------------------------------------------- mode_act


def test_vacuum_mode_is_identity(heis):
    one = heis.vacuum_like()
    rng = random.Random(5)
    for n in range(-3, 3):
        for mono in heis.weight_basis(3):
            v = heis.basis_state(mono)
            got = mode_act(one, n, v)
            assert got == (v if n == -1 else heis.zero())


def test_virasoro_mode_weight_grading(vira):
    omega = vira.basis_state((((0, -2),), 0))
    # omega_1 = L_0: on omega gives 2*omega
    assert mode_act(omega, 1, omega) == omega.scale(2)


def test_mode_act_matches_lie_modes(heis, vira, sl2):
    # single-generator states: (g_{-w}1)_n must equal the Lie mode g_{n-w+1}
    for sp in (heis, vira, sl2):
        for g in sp.pres.generators:
            gstate = sp.generator_state(g.gid)
            for n in range(-2, 4):
                for mono in sp.weight_basis(2):
                    v = sp.basis_state(mono)
                    if 2 - (n - g.weight + 1) > sp.cutoff:
                        continue
                    assert mode_act(gstate, n, v) == generator_mode_act(
                        g, n - g.weight + 1, v
                    )


def test_heisenberg_normal_ordering_oracle(heis):
    """(a_{-1}^2 1)_n agrees with sum_{j<0} a_j a_{n-1-j} + sum_{j>=0} a_{n-1-j} a_j."""
    sq = heis.basis_state((((0, -1), (0, -1)), 0))

    def oracle(n, v):
        out = heis.zero()
        lo = -heis.cutoff - 2
        for j in range(lo, 0):
            out = out + generator_mode_act(0, j, generator_mode_act(0, n - 1 - j, v))
        for j in range(0, heis.cutoff + 2):
            out = out + generator_mode_act(0, n - 1 - j, generator_mode_act(0, j, v))
        return out

    rng = random.Random(17)
    for n in range(-3, 4):
        for wt in range(0, 4):
            basis = heis.weight_basis(wt)
            terms = {m: Rat(rng.randint(-3, 3)) for m in basis}
            v = heis.state(terms)
            if wt + 2 - n - 1 > heis.cutoff or wt + 2 - n - 1 < 0:
                continue
            assert mode_act(sq, n, v) == oracle(n, v)


def test_weight_additivity(heis, vira, sl2):
    for sp in (heis, vira, sl2):
        for wa in range(1, 4):
            for mono_a in sp.weight_basis(wa)[:3]:
                a = sp.voa_space.basis_state(mono_a)
                for wv in range(0, 3):
                    for mono_v in sp.weight_basis(wv)[:3]:
                        v = sp.basis_state(mono_v)
                        for n in range(-2, 3):
                            wt_out = wa + wv - n - 1
                            if wt_out > sp.cutoff:
                                continue
                            got = mode_act(a, n, v)
                            if wt_out < 0:
                                assert got.is_zero()
                            elif not got.is_zero():
                                assert got.weight() == wt_out


def test_borcherds_commutator_sampled(heis, vira, sl2):
    """[a_m, b_n] v = sum_i C(m,i) (a_i b)_{m+n-i} v on low-weight samples."""
    rng = random.Random(23)
    for sp in (heis, vira, sl2):
        cases = 0
        while cases < 6:
            wa = rng.randint(1, 2)
            wb = rng.randint(1, 2)
            wv = rng.randint(0, 2)
            basis_a = sp.voa_space.weight_basis(wa)
            basis_b = sp.voa_space.weight_basis(wb)
            basis_v = sp.weight_basis(wv)
            if not (basis_a and basis_b and basis_v):
                continue
            a = sp.voa_space.basis_state(rng.choice(basis_a))
            b = sp.voa_space.basis_state(rng.choice(basis_b))
            v = sp.basis_state(rng.choice(basis_v))
            m, n = rng.randint(-1, 2), rng.randint(-1, 2)
            if wa + wb + wv - m - n - 2 > sp.cutoff or wa + wb - m - 1 > sp.cutoff:
                continue
            lhs = mode_act(a, m, mode_act(b, n, v)) - mode_act(b, n, mode_act(a, m, v))
            rhs = sp.zero()
            for i in range(0, wa + wb):
                cb = binomial(m, i)
                if cb:
                    aib = mode_act(a, i, b)
                    if not aib.is_zero():
                        rhs = rhs + mode_act(aib, m + n - i, v).scale(cb)
            assert lhs == rhs
            cases += 1


# ---------------------------------------------------------------- translate


def test_translate_vacuum(heis):
    assert translate(heis.vacuum_like()).is_zero()


def test_translate_virasoro_generator(vira):
    omega = vira.basis_state((((0, -2),), 0))
    assert translate(omega) == vira.basis_state((((0, -3),), 0))


def test_translate_heisenberg_generator(heis):
    a = heis.basis_state((((0, -1),), 0))
    assert translate(a) == heis.basis_state((((0, -2),), 0))


def test_translate_derivative_property(heis, vira):
    # (L(-1)a)_n = -n a_{n-1} on samples
    rng = random.Random(31)
    for sp in (heis, vira):
        for wa in range(1, 4):
            for mono in sp.weight_basis(wa)[:2]:
                a = sp.basis_state(mono)
                ta = translate(a)
                for n in range(-1, 3):
                    for mono_v in sp.weight_basis(1):
                        v = sp.basis_state(mono_v)
                        wt_out = wa + 1 + 1 - n - 1
                        if wt_out > sp.cutoff or wt_out < 0:
                            continue
                        assert mode_act(ta, n, v) == mode_act(a, n - 1, v).scale(-n)


# ---------------------------------------------------------------- validation


def test_verify_presentation_passes(vira, sl2):
    for pres in (virasoro_presentation("1/2"), affine_sl2_presentation(1)):
        report = verify_presentation(pres, cutoff=4)
        assert all(c["passed"] for c in report), report


def test_verify_presentation_rejects_corrupted_sl2():
    gens = [
        GeneratorSpec(0, "e", 1, charge=2),
        GeneratorSpec(1, "h", 1, charge=0),
        GeneratorSpec(2, "f", 1, charge=-2),
    ]
    struct = {(0, 2): {1: 1}, (1, 0): {0: 2}, (1, 2): {2: -3}}  # corrupted
    form = {(0, 2): 1, (1, 1): 2}
    with pytest.raises(PresentationError) as err:
        VOAPresentation("affine", gens, level=1, struct=struct, form=form)
    assert "Jacobi" in str(err.value) or "invariance" in str(err.value)


def test_cft_type_enforced():
    with pytest.raises(PresentationError):
        VOAPresentation("heisenberg", [GeneratorSpec(0, "a", 0)], level=1)


def test_weyl_matrices_validated():
    V = affine_sl2_presentation(1)
    mats, charges = [[[0, 0], [1, 0]], [[1, 0], [0, -1]], [[0, 1], [0, 0]]], [1, -1]
    # swapped e and f matrices: [e,f] = h fails
    with pytest.raises(PresentationError):
        ModulePresentation(V, "weyl", matrices=mats, bottom_charges=charges)


def test_non_homogeneous_mode_act_rejected(heis):
    mixed = heis.vacuum_like() + heis.basis_state((((0, -1),), 0))
    with pytest.raises(ValueError):
        mode_act(mixed, 0, heis.vacuum_like())
