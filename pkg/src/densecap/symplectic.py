"""Commutative subgroups of the Weyl-Heisenberg group over F_p.

Two Weyl operators commute exactly when their index vectors in ``F_p^{2n}``
are orthogonal under the symplectic form, so commutative ``m``-dimensional
subgroups are the ``m``-dimensional isotropic subspaces.

Vectors are stored as ``(x_1..x_n, z_1..z_n)`` with form
``<(x,z),(x',z')> = x.z' - z.x' (mod p)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np


@dataclass(frozen=True)
class SymplecticSubspace:
    p: int
    n: int
    generators: tuple[tuple[int, ...], ...]  # reduced row echelon basis

    @property
    def dim(self) -> int:
        return len(self.generators)


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p ** 0.5) + 1))


def symplectic_product(u, v, p: int) -> int:
    u, v = np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64)
    n = len(u) // 2
    return int((u[:n] @ v[n:] - u[n:] @ v[:n]) % p)


def count_commutative_subgroups(p: int, n: int, m: int) -> int:
    """Number of ``m``-dimensional isotropic subspaces of ``F_p^{2n}``.

    Ordered choices of ``m`` mutually commuting independent vectors, divided
    by the number of ordered bases of an ``m``-dimensional space counted the
    same way. For ``m == n`` the result is cross-checked against the
    Lagrangian count ``prod_{i=1}^{n} (p^i + 1)``.
    """
    if not _is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    num = prod(p ** (2 * (n - i)) - 1 for i in range(m))
    den = prod(p ** i - 1 for i in range(1, m + 1))
    count, rem = divmod(num, den)
    if rem:
        raise ArithmeticError("subgroup count is not an integer")
    if m == n:
        lagrangian = prod(p ** i + 1 for i in range(1, n + 1))
        if lagrangian != count:
            raise ArithmeticError(f"Lagrangian cross-check failed: {count} != {lagrangian}")
    return count


def _rref(rows: list[list[int]], p: int) -> tuple[tuple[int, ...], ...]:
    A = [list(r) for r in rows]
    inv = {a: pow(a, p - 2, p) for a in range(1, p)}
    r = 0
    ncols = len(A[0]) if A else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] % p), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        s = inv[A[r][c] % p]
        A[r] = [(x * s) % p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c] % p:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        r += 1
    return tuple(tuple(row) for row in A[:r])


def enumerate_commutative_subgroups(p: int, n: int, m: int) -> list[SymplecticSubspace]:
    """All ``m``-dimensional isotropic subspaces of ``F_p^{2n}``, sorted, duplicate-free.

    Exhaustive search, intended for ``p^{2n} <= 2^16``. Each subspace is
    represented by its reduced row echelon basis.
    """
    if not _is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if p ** (2 * n) > 2 ** 16:
        raise ValueError("enumeration limited to p^(2n) <= 2^16")
    vectors = [tuple(int(x) for x in np.unravel_index(i, (p,) * (2 * n))) for i in range(1, p ** (2 * n))]
    found: set[tuple[tuple[int, ...], ...]] = set()

    def extend(basis: list[tuple[int, ...]], span: set):
        if len(basis) == m:
            found.add(_rref([list(b) for b in basis], p))
            return
        for v in vectors:
            # only extend with vectors larger than the last to limit revisits
            if basis and v <= basis[-1]:
                continue
            if v in span:
                continue
            if any(symplectic_product(v, b, p) for b in basis):
                continue
            new_span = {tuple((a * x + y) % p for x, y in zip(v, s)) for s in span for a in range(p)}
            extend(basis + [v], new_span)

    extend([], {tuple([0] * (2 * n))})
    return [SymplecticSubspace(p, n, g) for g in sorted(found)]
