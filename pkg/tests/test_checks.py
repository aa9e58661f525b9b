import copy
import math

import numpy as np
import pytest

import densecap.checks as checks
from densecap.capacity import capacity_direct, capacity_measured, memory_gap
from densecap.channels import MeasurementBasis, gio_kraus_from_columns, gram, kraus_apply
from densecap.checks import (FOUND, INCONCLUSIVE, NOT_FOUND, SUSPECT_NUMERIC, UNKNOWN, USEFUL_ALL_BASES,
                             USELESS, SearchOptions, SixItemWitness, basis_from_decomposition, check_A2,
                             check_C1, check_max_entangled_C1, classify, gram_decompose, recovery_map_check,
                             usefulness_witness, verify_six_item)
from densecap.groups import build_diagonal_character_rep, decompose_abelian, direct_sum_rep, symmetric_group_s3
from densecap.linalg import haar_unitary, random_density
from densecap.states import (analytic_vectors, build_classical_quantum, build_max_entangled, build_section32,
                             build_useful_protocol, s3_example, shift_rep_with_dec)

BELL = np.array([1, 0, 0, 1]) / math.sqrt(2)
ZDIAG = build_diagonal_character_rep([2], [[0], [1]])
ZDEC = decompose_abelian(ZDIAG)


def _unit_rows(rng, l, d):
    V = rng.standard_normal((l, d)) + 1j * rng.standard_normal((l, d))
    return V / np.linalg.norm(V, axis=1)[:, None]


def test_A2_on_bell():
    assert check_A2(BELL, ZDIAG, MeasurementBasis.fourier(2)).residual < 1e-9
    w = check_A2(BELL, ZDIAG, MeasurementBasis.computational(2))
    assert w.residual > 0.1 and not w.passed


def test_recovery_reports_worst_group_element():
    r = recovery_map_check(BELL, ZDIAG, MeasurementBasis.computational(2))
    assert not r.passed and r.max_residual > 0.1 and r.worst_g in (0, 1)
    assert recovery_map_check(BELL, ZDIAG, MeasurementBasis.fourier(2)).max_residual < 1e-9


def test_A2_implies_A3_and_matches_gap(rng):
    rep, dec = shift_rep_with_dec(3)
    for t in range(20):
        if t % 2:
            c = build_section32(3, rng.dirichlet(np.ones(3)), rep, dec)
            rho, basis = c.rho, c.basis
        else:
            rho, basis = random_density(9, rng), MeasurementBasis(haar_unitary(3, rng))
        w = check_A2(rho, rep, basis)
        assert w.passed == (memory_gap(rho, rep, basis) <= 1e-7)
        if w.passed:
            assert recovery_map_check(rho, rep, basis, witness=w).passed


def test_C1_on_bell():
    assert check_C1(BELL, ZDEC, MeasurementBasis.fourier(2)).passed
    r = check_C1(BELL, ZDEC, MeasurementBasis.computational(2))
    assert not r.passed
    assert r.max_distribution_distance == pytest.approx(1.0)


def test_C1_on_weyl_block_state():
    rep, dec = s3_example()
    c = build_max_entangled(dec, rep)
    assert check_C1(c.state, dec, c.basis).passed
    assert memory_gap(c.state, rep, c.basis) < 1e-9


def test_max_entangled_criterion():
    assert check_max_entangled_C1(shift_rep_with_dec(3)[1])
    group, standard = symmetric_group_s3()
    _, once = direct_sum_rep(group, [np.stack(standard)], [1])
    _, twice = direct_sum_rep(group, [np.stack(standard)], [2])
    assert not check_max_entangled_C1(once)
    assert check_max_entangled_C1(twice)


def test_six_item_witnesses(rng):
    c = build_section32(3, [0.6, 0.3, 0.1])
    w = c.extra["witness"]
    assert verify_six_item(c.rho, c.rep, c.basis, w) < 1e-8
    bad = copy.deepcopy(w)
    bad.V_AB = bad.V_AB @ haar_unitary(bad.V_AB.shape[0], rng)
    assert verify_six_item(c.rho, c.rep, c.basis, bad) > 1e-2
    again = SixItemWitness.from_dict(w.to_dict())
    assert verify_six_item(c.rho, c.rep, c.basis, again) < 1e-8


def test_six_item_classical_quantum(rng):
    rep, dec = shift_rep_with_dec(3)
    states = [random_density(3, rng) for _ in range(2)]
    c = build_classical_quantum([0.4, 0.6], states, rep, dec, MeasurementBasis(haar_unitary(2, rng)))
    assert verify_six_item(c.rho, rep, c.basis, c.extra["witness"]) < 1e-10
    assert memory_gap(c.rho, rep, c.basis) < 1e-9


def test_gram_identity_closed_form():
    g = gram_decompose(np.eye(4))
    assert g.status == FOUND and g.residual < 1e-12
    assert np.allclose(g.probs, 0.25)
    k = np.arange(4)
    assert np.allclose(g.theta, 2 * np.pi * np.outer(k, k) / 4)


def test_gram_l2_closed_form():
    c = 1 / math.sqrt(2)
    g = gram_decompose(np.array([[1, c], [c, 1]]))
    assert g.residual < 1e-12
    assert np.allclose(g.probs, [0.5, 0.5])
    assert np.allclose(g.theta, [[0, 0], [math.pi / 4, -math.pi / 4]])


def test_gram_l2_complex_entry(rng):
    for _ in range(10):
        V = _unit_rows(rng, 2, 3)
        g = gram_decompose(gram(V).J)
        assert g.residual < 1e-12


def test_gram_search_l3_and_reconstruction(rng):
    for t in range(5):
        V = _unit_rows(rng, 3, 3)
        J = gram(V).J
        g = gram_decompose(J, SearchOptions(seed=t))
        assert g.found and g.residual < 1e-6
        U = g.vectors()
        assert np.linalg.norm(gram(U).J - J) < 1e-6 * 3
        # Kraus operators from the columns of U give the phase-unitary mixture
        rho = random_density(3, rng)
        mix = sum(p * np.diag(np.exp(1j * th)) @ rho @ np.diag(np.exp(-1j * th))
                  for p, th in zip(g.probs, g.theta.T))
        assert np.linalg.norm(kraus_apply(gio_kraus_from_columns(U), rho) - mix) < 1e-8


def test_gram_search_analytic_vectors_not_found():
    g = gram_decompose(gram(analytic_vectors()).J, SearchOptions(restarts=4))
    assert g.status == NOT_FOUND and g.residual > 1e-4


def test_gram_failure_small_l_is_suspect(monkeypatch, rng):
    monkeypatch.setattr(checks, "_alternating", lambda J, K, s, it, tgt: (np.full(K, 1 / K), np.zeros((3, K))))
    monkeypatch.setattr(checks, "_polish", lambda J, p, th: (p, th))
    g = gram_decompose(gram(_unit_rows(rng, 3, 2)).J, SearchOptions(restarts=2))
    assert g.status == SUSPECT_NUMERIC


def test_basis_from_decomposition_closes_gap(rng):
    rep, dec = shift_rep_with_dec(3)
    V = _unit_rows(rng, 3, 3)
    psi = (dec.W[:, :3] @ V).ravel() / math.sqrt(3)
    g = gram_decompose(gram(V).J, SearchOptions(n_atoms=3))
    E = basis_from_decomposition(V, g)
    assert memory_gap(psi, rep, E) < 1e-7


def test_usefulness_witness():
    w = usefulness_witness(analytic_vectors())
    assert w.verdict == USEFUL_ALL_BASES and w.rank == 4
    assert usefulness_witness(np.eye(3)).verdict == INCONCLUSIVE
    w = usefulness_witness(_unit_rows(np.random.default_rng(5), 4, 2))
    assert w.verdict == USEFUL_ALL_BASES


def test_classify_examples(rng):
    rep, dec = shift_rep_with_dec(3)
    c = build_max_entangled(dec, rep)
    r = classify(c.state, rep, dec)
    assert r.verdict == USELESS and r.useless_at_basis
    assert r.gap_bits < 1e-7

    u = build_useful_protocol(5, 2, "analytic")
    r = classify(u.state, u.rep, u.dec, opts=SearchOptions(restarts=2))
    assert r.verdict == USEFUL_ALL_BASES

    r = classify(random_density(6, rng), rep, dec, opts=SearchOptions(n_bases=4))
    assert r.verdict == UNKNOWN
    assert r.conditions["basis-search"]["bases_tried"] == 5
    assert r.C_c_measured_bits <= r.C_c_bits + 1e-9


def test_classify_with_basis_is_consistent():
    r = classify(BELL, ZDIAG, ZDEC, MeasurementBasis.computational(2))
    assert not r.useless_at_basis and not r.conditions["A2"]["passed"] and not r.conditions["C1"]["passed"]
    assert r.warnings == []
    r = classify(BELL, ZDIAG, ZDEC, MeasurementBasis.fourier(2))
    assert r.verdict == USELESS and r.conditions["A3"]["passed"]


def test_classify_entangled_block_component():
    group, standard = symmetric_group_s3()
    rep, dec = direct_sum_rep(group, [np.stack(standard)], [1])
    phi = np.eye(2).ravel() / math.sqrt(2)
    r = classify(phi, rep, dec)
    assert r.verdict == USEFUL_ALL_BASES
    assert r.certificate["kind"] == "entangled-block-component"
    assert capacity_direct(phi, rep) - capacity_measured(phi, rep, haar_unitary(2, np.random.default_rng(0))) > 1e-6
