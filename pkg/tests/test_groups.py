import numpy as np
import pytest

from densecap.errors import NumericalError
from densecap.groups import (AbelianGroup, TableGroup, build_cyclic_shift_rep, build_diagonal_character_rep,
                             decompose_abelian, direct_sum_rep, projector_onto_block, symmetric_group_s3,
                             verify_decomposition, weyl_heisenberg_qubit)
from densecap.symplectic import (count_commutative_subgroups, enumerate_commutative_subgroups,
                                 symplectic_product)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_shift_rep_decomposes_into_all_characters(d):
    rep = build_cyclic_shift_rep(d)
    rep.validate()
    dec = decompose_abelian(rep, seed=3)
    assert [b.label for b in dec.blocks] == [(w,) for w in range(d)]
    assert dec.multiplicity_free
    assert verify_decomposition(rep, dec) < 1e-9


def test_decomposition_is_seed_independent_up_to_residual():
    rep = build_cyclic_shift_rep(4)
    for seed in range(5):
        assert verify_decomposition(rep, decompose_abelian(rep, seed)) < 1e-9


def test_multiplicities_found():
    rep = build_cyclic_shift_rep(3).tensor(build_cyclic_shift_rep(3))
    dec = decompose_abelian(rep)
    assert [b.multiplicity for b in dec.blocks] == [3, 3, 3]
    rep = build_diagonal_character_rep([2, 2], [(0, 0), (1, 0), (1, 0), (0, 1)])
    dec = decompose_abelian(rep)
    assert {b.label: b.multiplicity for b in dec.blocks} == {(0, 0): 1, (0, 1): 1, (1, 0): 2}


def test_block_projectors_resolve_identity():
    rep = build_cyclic_shift_rep(2).tensor(build_cyclic_shift_rep(2))
    dec = decompose_abelian(rep)
    P = sum(projector_onto_block(dec, lab) for lab in dec.labels)
    assert np.allclose(P, np.eye(4))


def test_projective_and_nonabelian_rejected():
    wh = weyl_heisenberg_qubit()
    wh.validate()
    assert wh.is_projective
    with pytest.raises(ValueError):
        decompose_abelian(wh)
    group, standard = symmetric_group_s3()
    rep, _ = direct_sum_rep(group, [np.stack(standard)], [1])
    with pytest.raises(ValueError):
        decompose_abelian(rep)


def test_s3_standard_irrep_is_a_representation():
    group, standard = symmetric_group_s3()
    rep, dec = direct_sum_rep(group, [np.ones((6, 1, 1)), np.stack(standard)], [2, 2])
    rep.validate()
    assert verify_decomposition(rep, dec) < 1e-12
    assert dec.dim == 6


def test_bad_cayley_table():
    with pytest.raises(ValueError):
        TableGroup([[0, 1], [0, 1]])


def test_broken_rep_fails_validation():
    rep = build_cyclic_shift_rep(3)
    rep.matrices[1] = np.eye(3)
    with pytest.raises(NumericalError):
        rep.validate()


def test_abelian_group_indexing():
    g = AbelianGroup([2, 3])
    assert g.order == 6
    assert g.multiply(g.index((1, 2)), g.index((1, 1))) == g.index((0, 0))


@pytest.mark.parametrize("p,n,m,expected", [(2, 1, 1, 3), (2, 2, 1, 15), (2, 2, 2, 15), (3, 1, 1, 4),
                                            (3, 2, 2, 40), (2, 3, 3, 135)])
def test_subgroup_counts(p, n, m, expected):
    assert count_commutative_subgroups(p, n, m) == expected


@pytest.mark.parametrize("p,n,m", [(2, 1, 1), (2, 2, 1), (2, 2, 2), (3, 1, 1), (3, 2, 1), (3, 2, 2)])
def test_enumeration_matches_formula(p, n, m):
    subs = enumerate_commutative_subgroups(p, n, m)
    assert len(subs) == count_commutative_subgroups(p, n, m)
    for s in subs:
        for u in s.generators:
            for v in s.generators:
                assert symplectic_product(u, v, p) == 0


def test_large_counts_are_exact():
    c = count_commutative_subgroups(5, 6, 6)
    assert c == (5 + 1) * (25 + 1) * (125 + 1) * (625 + 1) * (3125 + 1) * (15625 + 1)


def test_subgroup_guards():
    with pytest.raises(ValueError):
        count_commutative_subgroups(4, 1, 1)
    with pytest.raises(ValueError):
        count_commutative_subgroups(2, 1, 2)
    with pytest.raises(ValueError):
        enumerate_commutative_subgroups(5, 4, 1)
