"""Numerical tolerances shared by every module.

A single :class:`Tolerances` instance is threaded through the library and
echoed into reports, so a result can always be traced to the thresholds that
produced it.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10  # relative ||A - A^dag||_F before symmetrizing is refused
    psd: float = 1e-10  # most negative eigenvalue accepted for a state
    trace: float = 1e-10  # |tr rho - 1| and |<psi|psi> - 1|
    cutoff: float = 1e-10  # relative eigenvalue cutoff defining supports
    support_leak: float = 1e-9  # mass outside supp(sigma) before D(rho||sigma) = inf
    rep: float = 1e-9  # representation / decomposition residuals
    eig: float = 1e-10  # eigensolver reconstruction residual
    zero: float = 1e-7  # bits; capacities closer than this are equal
    a2: float = 1e-7  # Frobenius residual of the Petz-type equality
    recovery: float = 1e-7  # trace-norm residual of the recovery map
    c1: float = 1e-7  # C1 distribution / marginal distances
    gram: float = 1e-6  # Gram decomposition residual for success
    rank: float = 1e-9  # relative singular-value threshold for numerical rank
    prob: float = 1e-12  # outcome probabilities below this are dropped
    cluster: float = 1e-8  # eigenvalue clustering when grouping characters

    def replace(self, **changes: float) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOL = Tolerances()

LN2 = 0.6931471805599453


def max_workers() -> int:
    """Thread cap taken from ``DENSECAP_THREADS`` (default: 1)."""
    value = os.environ.get("DENSECAP_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1
