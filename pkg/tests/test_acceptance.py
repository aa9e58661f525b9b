"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
from math import prod

import numpy as np
import pytest

from densecap.capacity import (capacity_decomposed, capacity_direct, capacity_measured, memory_gap,
                               per_outcome_capacity)
from densecap.channels import MeasurementBasis, gram
from densecap.checks import FOUND, SearchOptions, check_A2, check_C1, gram_decompose, verify_six_item
from densecap.groups import build_diagonal_character_rep, decompose_abelian
from densecap.linalg import haar_unitary, random_density
from densecap.reproduce import (_multiplicity_rep, suite_appendix, suite_illumination, suite_private, suite_sec32,
                                suite_sec33, suite_sec43, suite_sec5b)
from densecap.states import build_classical_quantum, build_section32, random_c1_state, shift_rep_with_dec
from densecap.symplectic import count_commutative_subgroups, enumerate_commutative_subgroups


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


def _failures(rows):
    return [r.name for r in rows if not r.passed]


def _three_reps():
    z2 = build_diagonal_character_rep([2], [[0], [1]])
    z3, z3dec = shift_rep_with_dec(3)
    z22 = build_diagonal_character_rep([2, 2], [(0, 0), (1, 0), (1, 0), (0, 1)])
    return [(z2, decompose_abelian(z2)), (z3, z3dec), (z22, decompose_abelian(z22))]


def test_01_max_entangled_capacity(report):
    rows = [r for r in suite_sec33() if "bits" in r.name]
    worst = max(abs(r.actual - r.expected) for r in rows)
    report(1, not _failures(rows), f"Z_l capacity and measured capacity, l=2..5, max error {worst:.2e}")


def test_02_A2_and_recovery(report):
    rows = [r for r in suite_sec33() + suite_sec32() if "A2" in r.name or "A3" in r.name]
    worst = max(r.actual for r in rows)
    report(2, not _failures(rows) and len(rows) == 80, f"{len(rows)} A2/A3 residuals, max {worst:.2e}")


def test_03_oracle_equivalence(report):
    rng = np.random.default_rng(3)
    reps = _three_reps()
    worst = worst_pure = 0.0
    for t in range(200):
        rep, dec = reps[t % 3]
        dB = 1 + t % 3
        rho = random_density(rep.dim * dB, rng)
        r = capacity_decomposed(rho, dec, (rep.dim, dB))
        worst = max(worst, abs(r.C_c - capacity_direct(rho, rep, (rep.dim, dB))))
        if t % 4 == 0:
            psi = random_density(rep.dim * dB, rng, rank=1)
            r = capacity_decomposed(psi, dec, (rep.dim, dB))
            worst_pure = max(worst_pure, abs(r.C_c_pure_variant - capacity_direct(psi, rep, (rep.dim, dB))))
    report(3, worst < 1e-8 and worst_pure < 1e-8,
           f"200 mixed states max |delta| {worst:.2e}; pure variant max |delta| {worst_pure:.2e}")


def test_04_data_processing(report):
    rng = np.random.default_rng(4)
    reps = _three_reps()
    min_gap, worst_id = np.inf, 0.0
    for t in range(1000):
        rep, _ = reps[t % 3]
        dB = 2 + t % 2
        dims = (rep.dim, dB)
        rho = random_density(rep.dim * dB, rng, rank=1 + t % 4)
        U = haar_unitary(dB, rng)
        measured = capacity_measured(rho, rep, U, dims, check=False)
        min_gap = min(min_gap, capacity_direct(rho, rep, dims) - measured)
        worst_id = max(worst_id, abs(measured - per_outcome_capacity(rho, rep, U, dims)))
    report(4, min_gap >= -1e-9 and worst_id < 1e-8,
           f"1000 draws, min gap {min_gap:.2e}, per-outcome identity max {worst_id:.2e}")


def test_05_C1_matches_gap(report):
    rng = np.random.default_rng(5)
    reps = [shift_rep_with_dec(3), _multiplicity_rep()]
    mismatches, useless = 0, 0
    for t in range(200):
        rep, dec = reps[t % 2]
        dB = 2 + t % 2
        if t % 4 < 2:
            psi, basis = random_c1_state(dec, dB, rng)
        else:
            psi = random_density(rep.dim * dB, rng, rank=1)
            basis = MeasurementBasis(haar_unitary(dB, rng))
            if t % 4 == 3:  # a C1 state read out at a foreign basis
                psi, _ = random_c1_state(dec, dB, rng)
        c1 = check_C1(psi, dec, basis).passed
        zero = memory_gap(psi, rep, basis) <= 1e-7
        useless += zero
        mismatches += c1 != zero
    rows = suite_appendix(seed=5)
    report(5, mismatches == 0 and 0 < useless < 200 and not _failures(rows),
           f"{mismatches} mismatches over 200 pairs ({useless} useless); "
           f"C1-form A2 max {rows[0].actual:.2e}")


def _random_V(l, dB, rng):
    V = rng.standard_normal((l, dB)) + 1j * rng.standard_normal((l, dB))
    return V / np.linalg.norm(V, axis=1, keepdims=True)


def test_06_gram_decomposability(report):
    rng = np.random.default_rng(6)
    opts = SearchOptions(restarts=16)
    worst = {2: 0.0, 3: 0.0}
    found = 0
    for l in (2, 3):
        for _ in range(100):
            d = gram_decompose(gram(_random_V(l, l, rng)).J, opts)
            found += d.status == FOUND
            worst[l] = max(worst[l], d.residual)
    closed = max(gram_decompose(gram(_random_V(2, 2, rng)).J).residual, gram_decompose(np.eye(4)).residual)
    report(6, found == 200 and max(worst.values()) < 1e-6 and closed < 1e-12,
           f"l=2 max residual {worst[2]:.2e}, l=3 max residual {worst[3]:.2e}, closed forms {closed:.2e}")


def test_07_useful_instance(report):
    rows = [r for r in suite_sec43() if r.name.startswith("analytic")]
    values = {r.name: r.actual for r in rows}
    report(7, not _failures(rows),
           f"rank {values['analytic-witness-rank']}, "
           f"smallest singular value {values['analytic-smallest-singular-value']:.3e}, "
           f"min gap over 200 bases {values['analytic-min-gap-over-200-bases']:.3e}")


def test_08_subgroup_counts(report):
    rows = [r for r in suite_sec5b() if r.name.startswith(("count", "enumerate"))]
    lagrangian = all(count_commutative_subgroups(p, n, n) == prod(p ** i + 1 for i in range(1, n + 1))
                     for p in (2, 3, 5, 7) for n in range(1, 7))
    big = count_commutative_subgroups(101, 8, 8) == prod(101 ** i + 1 for i in range(1, 9))
    small = len(enumerate_commutative_subgroups(3, 2, 2)) == count_commutative_subgroups(3, 2, 2)
    report(8, not _failures(rows) and lagrangian and big and small,
           f"{len(rows)} count/enumeration rows; m=n product cross-check exact")


def test_09_illumination(report):
    rows = [r for r in suite_illumination() if "stein" in r.name]
    report(9, not _failures(rows),
           "Z3 exponents " + ", ".join(f"{r.name}={r.actual:.10f}" for r in rows))


def test_10_private_bounds(report):
    rows = suite_private(seed=10)
    gap_row = next(r for r in rows if "gap-identity" in r.name)
    report(10, not _failures(rows), f"Z_l bounds match log2 l; gap identity max {gap_row.actual:.2e}")


def test_11_six_item_witness(report):
    rng = np.random.default_rng(11)
    worst = 0.0
    for l in (2, 3, 4):
        c = build_section32(l, rng.dirichlet(np.ones(l)))
        worst = max(worst, verify_six_item(c.rho, c.rep, c.basis, c.extra["witness"]))
    rep, dec = shift_rep_with_dec(3)
    cq = build_classical_quantum([0.2, 0.8], [random_density(3, rng), random_density(3, rng)], rep, dec)
    worst = max(worst, verify_six_item(cq.rho, rep, cq.basis, cq.extra["witness"]))

    c = build_section32(3, np.full(3, 1 / 3))
    w = c.extra["witness"]
    w.eta_RB[0] = w.eta_RB[0] + 0.05 * np.eye(w.eta_RB[0].shape[0])
    perturbed = verify_six_item(c.rho, c.rep, c.basis, w)
    report(11, worst < 1e-8 and perturbed > 1e-2,
           f"constructed witnesses max residual {worst:.2e}; perturbed witness residual {perturbed:.2e}")
