"""Machine-checked regeneration of every worked example, grouped into suites."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .capacity import capacity_direct, capacity_measured, memory_gap, private_lower_bound, stein_exponent
from .checks import (USEFUL_ALL_BASES, NOT_FOUND, SearchOptions, check_A2, check_C1, check_max_entangled_C1,
                     gram_decompose, recovery_map_check, usefulness_witness, verify_six_item)
from .channels import gram
from .groups import build_cyclic_shift_rep, decompose_abelian, direct_sum_rep, symmetric_group_s3
from .linalg import haar_unitary, random_density
from .states import (analytic_vectors, build_dephased, build_illumination,
                     build_max_entangled, build_section32, build_useful_protocol, purify, random_c1_state,
                     s3_example, shift_rep_with_dec)
from .symplectic import count_commutative_subgroups, enumerate_commutative_subgroups

SUITES = ("sec32", "sec33", "sec43", "sec5b", "illumination", "appendix", "private")


@dataclass
class Row:
    name: str
    expected: object
    actual: object
    tol: float | None
    mode: str  # "abs": |actual - expected| <= tol; "lt"/"gt": against tol; "eq": exact

    @property
    def passed(self) -> bool:
        if self.mode == "abs":
            return abs(float(self.actual) - float(self.expected)) <= self.tol
        if self.mode == "lt":
            return float(self.actual) < self.tol
        if self.mode == "gt":
            return float(self.actual) > self.tol
        return self.actual == self.expected

    def as_list(self) -> list:
        return [self.name, _fmt(self.expected), _fmt(self.actual),
                "" if self.tol is None else _fmt(self.tol), "PASS" if self.passed else "FAIL"]


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def suite_sec32(seed: int = 0) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    for t in range(20):
        l = 2 + t % 3
        c = build_section32(l, rng.dirichlet(np.ones(l)))
        S = np.array(c.extra["states"])
        rows.append(Row(f"draw{t}-l{l}-orthonormal", 0, np.linalg.norm(S.conj() @ S.T - np.eye(l)), 1e-10, "lt"))
        w = check_A2(c.rho, c.rep, c.basis)
        rows.append(Row(f"draw{t}-l{l}-A2-residual", "<1e-7", w.residual, 1e-7, "lt"))
        rec = recovery_map_check(c.rho, c.rep, c.basis, witness=w)
        rows.append(Row(f"draw{t}-l{l}-A3-residual", "<1e-7", rec.max_residual, 1e-7, "lt"))
        rows.append(Row(f"draw{t}-l{l}-six-item", "<1e-8",
                        verify_six_item(c.rho, c.rep, c.basis, c.extra["witness"]), 1e-8, "lt"))
    c = build_section32(3, np.full(3, 1 / 3))
    cq = sum(np.kron(np.outer(phi, phi.conj()), c.basis.projector(k)) / 3 for k, phi in enumerate(c.extra["phis"].T))
    rows.append(Row("uniform-PJ-classical-quantum-form", 0, np.linalg.norm(c.rho - cq), 1e-10, "lt"))
    rows.append(Row("uniform-PJ-separable-flag", True, c.extra["separable"], None, "eq"))
    return rows


def suite_sec33(seed: int = 0) -> list[Row]:
    rows = []
    for l in (2, 3, 4, 5):
        rep, dec = shift_rep_with_dec(l, seed)
        c = build_max_entangled(dec, rep)
        cc = capacity_direct(c.state, rep)
        rows.append(Row(f"Z{l}-capacity-bits", math.log2(l), cc, 1e-8, "abs"))
        rows.append(Row(f"Z{l}-measured-bits", math.log2(l), capacity_measured(c.state, rep, c.basis), 1e-8, "abs"))
        w = check_A2(c.state, rep, c.basis)
        rows.append(Row(f"Z{l}-A2-residual", "<1e-7", w.residual, 1e-7, "lt"))
        rows.append(Row(f"Z{l}-A3-residual", "<1e-7",
                        recovery_map_check(c.state, rep, c.basis, witness=w).max_residual, 1e-7, "lt"))
        for p in (0.0, 0.3, 0.7, 1.0):
            rho = build_dephased(c.state, rep, p)
            w = check_A2(rho, rep, c.basis)
            rows.append(Row(f"Z{l}-dephased-p{p}-A2-residual", "<1e-7", w.residual, 1e-7, "lt"))
            rows.append(Row(f"Z{l}-dephased-p{p}-A3-residual", "<1e-7",
                            recovery_map_check(rho, rep, c.basis, witness=w).max_residual, 1e-7, "lt"))
    return rows


def suite_sec43(seed: int = 0, n_bases: int = 200) -> list[Row]:
    rows = []
    c = build_useful_protocol(5, 2, "analytic")
    wit = c.extra["witness"]
    rows.append(Row("analytic-witness-rank", 4, wit.rank, None, "eq"))
    rows.append(Row("analytic-smallest-singular-value", ">1e-6", wit.smallest_relevant_singular_value, 1e-6, "gt"))
    cc = capacity_direct(c.state, c.rep)
    rng = np.random.default_rng(seed)
    worst = min(cc - capacity_measured(c.state, c.rep, haar_unitary(2, rng), check=False) for _ in range(n_bases))
    rows.append(Row(f"analytic-min-gap-over-{n_bases}-bases", ">1e-6", worst, 1e-6, "gt"))
    gd = gram_decompose(gram(analytic_vectors()).J, SearchOptions(restarts=8, seed=seed))
    rows.append(Row("analytic-gram-search", NOT_FOUND, gd.status, None, "eq"))
    c4 = build_useful_protocol(4, 2, "random", seed)
    rows.append(Row("random-l4-dB2-witness", USEFUL_ALL_BASES, c4.extra["witness"].verdict, None, "eq"))
    orth = usefulness_witness(np.eye(2))
    rows.append(Row("orthonormal-V-witness", "INCONCLUSIVE", orth.verdict, None, "eq"))
    return rows


def suite_sec5b(seed: int = 0) -> list[Row]:
    rows = []
    for (p, n, m), expected in {(2, 1, 1): 3, (2, 2, 1): 15, (2, 2, 2): 15, (3, 1, 1): 4}.items():
        count = count_commutative_subgroups(p, n, m)
        rows.append(Row(f"count-p{p}-n{n}-m{m}", expected, count, None, "eq"))
        rows.append(Row(f"enumerate-p{p}-n{n}-m{m}", count, len(enumerate_commutative_subgroups(p, n, m)), None, "eq"))
    # Z_2 acting by shift (x) shift on C^4: each character appears twice
    rep, dec = _multiplicity_rep(seed)
    c = build_max_entangled(dec, rep)
    rows.append(Row("abelian-multiplicity-gap", 0, memory_gap(c.state, rep, c.basis), 1e-7, "lt"))
    rep, dec = s3_example()
    c = build_max_entangled(dec, rep)
    rows.append(Row("S3-max-entangled-criterion", True, check_max_entangled_C1(dec), None, "eq"))
    rows.append(Row("S3-weyl-state-C1", True, check_C1(c.state, dec, c.basis).passed, None, "eq"))
    rows.append(Row("S3-weyl-state-gap", 0, memory_gap(c.state, rep, c.basis), 1e-7, "lt"))
    group, standard = symmetric_group_s3()
    _, bad = direct_sum_rep(group, [np.stack(standard)], [1])
    rows.append(Row("S3-standard-once-criterion", False, check_max_entangled_C1(bad), None, "eq"))
    return rows


def suite_illumination(seed: int = 0) -> list[Row]:
    c = build_illumination(3)
    rows = [
        Row("Z3-stein-bits", math.log2(3), stein_exponent(c.state, c.rep, c.dims), 1e-8, "abs"),
        Row("Z3-measured-stein-bits", math.log2(3), stein_exponent(c.state, c.rep, c.dims, c.basis), 1e-8, "abs"),
    ]
    c5 = build_illumination(5)
    rows.append(Row("Z5-gram-identity", 0, np.linalg.norm(c5.extra["gram"] - np.eye(5)), 1e-12, "lt"))
    return rows


def suite_appendix(seed: int = 0, trials: int = 100) -> list[Row]:
    rng = np.random.default_rng(seed)
    reps = [shift_rep_with_dec(3, seed), _multiplicity_rep(seed)]
    worst = 0.0
    for t in range(trials):
        rep, dec = reps[t % 2]
        psi, basis = random_c1_state(dec, 2 + t % 3, rng)
        worst = max(worst, check_A2(psi, rep, basis).residual)
    return [Row(f"C1-form-{trials}-trials-max-A2-residual", "<1e-7", worst, 1e-7, "lt")]


def _multiplicity_rep(seed=0):
    rep = build_cyclic_shift_rep(2).tensor(build_cyclic_shift_rep(2))
    return rep, decompose_abelian(rep, seed)


def suite_private(seed: int = 0, trials: int = 100) -> list[Row]:
    rows = []
    for l in (2, 3, 4, 5):
        rep, dec = shift_rep_with_dec(l, seed)
        c = build_max_entangled(dec, rep)
        r = private_lower_bound(c.state, rep, (l, l, 1), c.basis)
        rows.append(Row(f"Z{l}-private-bound-bits", math.log2(l), r.lower_bound, 1e-8, "abs"))
        rows.append(Row(f"Z{l}-private-measured-bits", math.log2(l), r.measured_lower_bound, 1e-8, "abs"))
    rng = np.random.default_rng(seed)
    rep, _ = shift_rep_with_dec(2, seed)
    worst = 0.0
    for t in range(trials):
        dB = 2 + t % 2
        rho = random_density(2 * dB, rng, rank=1 + t % 3)
        psi = purify(rho)
        dE = psi.size // (2 * dB)
        basis = haar_unitary(dB, rng)
        r = private_lower_bound(psi, rep, (2, dB, dE), basis)
        worst = max(worst, abs(r.gap - memory_gap(rho, rep, basis)))
    rows.append(Row(f"random-{trials}-gap-identity", "<1e-8", worst, 1e-8, "lt"))
    c = build_section32(3, rng.dirichlet(np.ones(3)))
    psi = purify(c.rho)
    r = private_lower_bound(psi, c.rep, (3, 3, psi.size // 9), c.basis)
    rows.append(Row("section32-private-bound-equal", 0, abs(r.gap), 1e-7, "lt"))
    return rows


def run_suite(name: str, seed: int = 0) -> list[Row]:
    fn = {
        "sec32": suite_sec32, "sec33": suite_sec33, "sec43": suite_sec43, "sec5b": suite_sec5b,
        "illumination": suite_illumination, "appendix": suite_appendix, "private": suite_private,
    }.get(name)
    if fn is None:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return fn(seed)


def rows_to_csv(rows: list[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "expected", "actual", "tol", "status"])
    for r in rows:
        w.writerow(r.as_list())
    return buf.getvalue()
