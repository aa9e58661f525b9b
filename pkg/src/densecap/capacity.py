"""Dense-coding capacities with and without Bob's quantum memory.

All functions return bits unless ``base="e"`` is passed. States live on
``A (x) B`` with the representation acting on A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import MeasurementBasis, conditional_states, measure_channel, twirl
from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError, NumericalError
from .groups import IrrepDecomposition, Representation
from .linalg import (as_density, entropy_of_spectrum, is_pure, partial_trace, relative_entropy,
                     von_neumann_entropy)


def _dims(rho: np.ndarray, rep_dim: int, dims=None) -> tuple[int, int]:
    if dims is not None:
        return tuple(dims)
    n = rho.shape[0]
    if n % rep_dim:
        raise DimensionError(f"state dimension {n} is not a multiple of representation dim {rep_dim}")
    return rep_dim, n // rep_dim


def _scale(base) -> float:
    return 1.0 if base == "e" else math.log(base)


def capacity_direct(rho, rep: Representation, dims=None, base=2, tol: Tolerances = DEFAULT_TOL,
                    check: bool = True) -> float:
    """C_c(rho) = H(G(rho)) - H(rho).

    With ``check`` the value is cross-checked against D(rho || G(rho)).
    """
    rho = as_density(rho, tol)
    dims = _dims(rho, rep.dim, dims)
    g_rho = twirl(rho, rep, dims, 0)
    value = von_neumann_entropy(g_rho, "e", tol) - von_neumann_entropy(rho, "e", tol)
    if check:
        d = relative_entropy(rho, g_rho, "e", tol)
        if not abs(d - value) < 1e-8:
            raise NumericalError(f"H(G(rho)) - H(rho) = {value} disagrees with D(rho||G(rho)) = {d}")
    return max(value, 0.0) / _scale(base)


@dataclass
class CapacityReport:
    C_c: float  # bits
    method: str
    P_Lambda: list[float]
    block_entropies: list[float]  # H(tr_{H_lambda} rho_lambda), bits
    labels: list
    C_c_pure_variant: float | None = None
    C_c_measured: float | None = None
    gap: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def C_c_nats(self) -> float:
        return self.C_c * math.log(2)


def block_marginals(rho, dec: IrrepDecomposition, dB: int, tol: Tolerances = DEFAULT_TOL):
    """Per-block weight ``P(lambda)`` and normalized block state on ``H (x) M (x) B``.

    Yields ``(index, block, P, rho_lambda)`` with ``rho_lambda`` reshaped to
    dims ``(d_lambda, n_lambda, d_B)`` (``None`` when ``P`` is negligible).
    """
    W = np.kron(dec.W, np.eye(dB))
    r = W.conj().T @ rho @ W
    for i, b in enumerate(dec.blocks):
        s = dec.block_slice(i)
        idx = np.arange(s.start * dB, s.stop * dB)
        sub = r[np.ix_(idx, idx)]
        p = float(np.real(np.trace(sub)))
        yield i, b, max(p, 0.0), (sub / p if p > tol.prob else None)


def capacity_decomposed(rho, dec: IrrepDecomposition, dims=None, base=2,
                        tol: Tolerances = DEFAULT_TOL) -> CapacityReport:
    """Capacity from the block structure of the representation.

    ``H(P_Lambda) + sum_lambda P(lambda) (log d_lambda + H(tr_{H_lambda} rho_lambda)) - H(rho)``.
    For pure states the variant with the marginal on ``H_lambda`` (the
    complement of ``M_lambda (x) B`` in the block) is computed as well and
    must agree.
    """
    rho = as_density(rho, tol)
    dA, dB = _dims(rho, dec.dim, dims)
    P, ent, ent_alt, labels = [], [], [], []
    total = 0.0
    pure = is_pure(rho, tol)
    for i, b, p, rl in block_marginals(rho, dec, dB, tol):
        labels.append(b.label)
        P.append(p)
        if rl is None:
            ent.append(0.0)
            ent_alt.append(0.0)
            continue
        shape = (b.dim, b.multiplicity, dB)
        h = von_neumann_entropy(partial_trace(rl, shape, [1, 2]), "e", tol)
        ent.append(h)
        total += p * (math.log(b.dim) + h)
        if pure:
            ent_alt.append(von_neumann_entropy(partial_trace(rl, shape, [0]), "e", tol))
    h_rho = von_neumann_entropy(rho, "e", tol)
    value = entropy_of_spectrum(P, "e", tol.prob) + total - h_rho
    alt = None
    if pure:
        alt = entropy_of_spectrum(P, "e", tol.prob) + sum(
            p * (math.log(b.dim) + h) for p, b, h in zip(P, dec.blocks, ent_alt))
        if abs(alt - value) > 1e-8:
            raise NumericalError(f"pure-state block formula {alt} disagrees with {value}")
    s = _scale(base)
    return CapacityReport(
        C_c=max(value, 0.0) / s,
        method="decomposed",
        P_Lambda=P,
        block_entropies=[h / s for h in ent],
        labels=labels,
        C_c_pure_variant=None if alt is None else max(alt, 0.0) / s,
    )


def capacity_measured(rho, rep: Representation, basis, dims=None, base=2,
                      tol: Tolerances = DEFAULT_TOL, check: bool = True) -> float:
    """C_c(B(rho)) = D(B(rho) || G(B(rho))).

    With ``check`` the value is compared with ``sum_k P_K(k) C_c(rho_{A|k})``.
    """
    rho = as_density(rho, tol)
    dims = _dims(rho, rep.dim, dims)
    b_rho = measure_channel(rho, basis, dims, 1)
    gb_rho = twirl(b_rho, rep, dims, 0)
    value = von_neumann_entropy(gb_rho, "e", tol) - von_neumann_entropy(b_rho, "e", tol)
    if check:
        d = relative_entropy(b_rho, gb_rho, "e", tol)
        if not math.isfinite(d):
            raise NumericalError("support of B(rho) escapes G(B(rho))")
        per = per_outcome_capacity(rho, rep, basis, dims, "e", tol)
        if abs(per - value) > 1e-8 or abs(d - value) > 1e-8:
            raise NumericalError(f"measured capacity {value} vs per-outcome {per} vs D {d}")
    return max(value, 0.0) / _scale(base)


def per_outcome_capacity(rho, rep: Representation, basis, dims=None, base=2,
                         tol: Tolerances = DEFAULT_TOL) -> float:
    """sum_k P_K(k) C_c(rho_{A|k}) with each conditional state living on A alone."""
    rho = as_density(rho, tol)
    dims = _dims(rho, rep.dim, dims)
    probs, states, _ = conditional_states(rho, basis, dims, tol)
    total = 0.0
    for p, s in zip(probs, states):
        if s is not None:
            total += p * capacity_direct(s, rep, (rep.dim, 1), "e", tol, check=False)
    return total / _scale(base)


def memory_gap(rho, rep: Representation, basis, dims=None, base=2,
               tol: Tolerances = DEFAULT_TOL) -> float:
    """C_c(rho) - C_c(B(rho)); non-negative by data processing."""
    return (capacity_direct(rho, rep, dims, base, tol)
            - capacity_measured(rho, rep, basis, dims, base, tol))


def is_useless_at(rho, rep, basis, dims=None, tol: Tolerances = DEFAULT_TOL) -> bool:
    return memory_gap(rho, rep, basis, dims, 2, tol) <= tol.zero


@dataclass
class PrivateReport:
    lower_bound: float
    measured_lower_bound: float | None
    gap: float | None
    leak: float  # D(rho_AE || G(rho_AE)) in bits


def private_lower_bound(psi_abe, rep: Representation, dims, basis=None, base=2,
                        tol: Tolerances = DEFAULT_TOL) -> PrivateReport:
    """Lower bounds on the private dense-coding capacity.

    ``psi_abe`` is a pure state on ``A (x) B (x) E`` with ``dims = (d_A, d_B, d_E)``.
    The bound is ``D(rho_AB||G(rho_AB)) - D(rho_AE||G(rho_AE))``; with a basis
    the first term is replaced by its measured counterpart. The difference of
    the two bounds is checked against the memory gap of ``rho_AB``.
    """
    dA, dB, dE = dims
    rho = as_density(psi_abe, tol)
    if not is_pure(rho, tol):
        raise NumericalError("private lower bound needs a pure state on ABE")
    rho_ab = partial_trace(rho, dims, [0, 1])
    rho_ae = partial_trace(rho, dims, [0, 2])
    first = relative_entropy(rho_ab, twirl(rho_ab, rep, (dA, dB), 0), "e", tol)
    leak = relative_entropy(rho_ae, twirl(rho_ae, rep, (dA, dE), 0), "e", tol)
    s = _scale(base)
    lower = (first - leak) / s
    measured = gap = None
    if basis is not None:
        b_rho = measure_channel(rho_ab, basis, (dA, dB), 1)
        first_b = relative_entropy(b_rho, twirl(b_rho, rep, (dA, dB), 0), "e", tol)
        measured = (first_b - leak) / s
        gap = lower - measured
        expected = memory_gap(rho_ab, rep, basis, (dA, dB), base, tol)
        if abs(gap - expected) > 1e-8:
            raise NumericalError(f"private-bound gap {gap} differs from memory gap {expected}")
    return PrivateReport(lower, measured, gap, leak / s)


def stein_exponent(psi, rep: Representation, dims, basis=None, base=2,
                   tol: Tolerances = DEFAULT_TOL) -> float:
    """Type-II error exponent for telling id from the twirl G acting on the probe.

    ``D(psi || (G (x) id)(psi))`` with the probe as factor 0 and the idler as
    factor 1. With ``basis`` the idler is measured first, giving the exponent
    achievable without storing the idler.
    """
    rho = as_density(psi, tol)
    if basis is not None:
        rho = measure_channel(rho, basis, dims, 1)
    value = relative_entropy(rho, twirl(rho, rep, dims, 0), "e", tol)
    return value / _scale(base)
