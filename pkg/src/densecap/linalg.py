"""Support-aware dense linear algebra on Hermitian matrices.

Everything here works on plain ``numpy`` arrays. Density matrices carry no
dimension metadata of their own; functions that need the tensor structure
take a ``dims`` sequence (e.g. ``(d_A, d_B)``).

Internal computations use natural logarithms. Entropies and relative
entropies take a ``base`` argument and default to bits.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError, NumericalError


class SpectralDecomposition(NamedTuple):
    values: np.ndarray  # real, descending
    vectors: np.ndarray  # unitary, eigenvectors as columns


def _square(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError("matrix has non-finite entries")
    return A


def hermitize(A, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Return (A + A^dag)/2, refusing inputs that are far from Hermitian."""
    A = _square(A)
    norm = np.linalg.norm(A)
    skew = np.linalg.norm(A - A.conj().T)
    if norm > 0 and skew > tol.herm * norm:
        raise NumericalError(f"matrix is not Hermitian (relative skew {skew / norm:.3e})")
    return 0.5 * (A + A.conj().T)


def _normalize_phases(V: np.ndarray) -> np.ndarray:
    # Make the first non-negligible component of every column real positive.
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12 * max(1.0, np.abs(col).max()))
        if idx.size:
            z = col[idx[0]]
            V[:, j] = col * (abs(z) / z)
    return V


def hermitian_eig(A, tol: Tolerances = DEFAULT_TOL) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The output is deterministic: eigenvalues are sorted in descending order
    and each eigenvector is rotated so that its first non-negligible
    component is real and positive.
    """
    A = hermitize(A, tol)
    w, V = np.linalg.eigh(A)
    order = np.argsort(-w, kind="stable")
    w, V = w[order], _normalize_phases(V[:, order])
    scale = max(np.linalg.norm(A), 1.0)
    residual = np.linalg.norm((V * w) @ V.conj().T - A)
    if residual > max(tol.eig, 1e-12) * scale * 10:
        raise NumericalError(f"eigendecomposition did not converge (residual {residual:.3e})")
    return SpectralDecomposition(w, V)


def _support_mask(w: np.ndarray, cutoff: float) -> np.ndarray:
    top = np.max(np.abs(w)) if w.size else 0.0
    return w > cutoff * top


def matrix_function_on_support(A, f: str, cutoff: float | None = None,
                               base: float = math.e,
                               tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Apply ``f`` in {"sqrt", "inv_sqrt", "log"} to the support of a PSD matrix.

    Eigenvalues at or below ``cutoff * lambda_max`` are treated as zero and
    mapped to zero, so ``inv_sqrt`` is the pseudo-inverse square root and
    ``log`` is the logarithm restricted to the support.
    """
    cutoff = tol.cutoff if cutoff is None else cutoff
    w, V = hermitian_eig(A, tol)
    scale = max(np.abs(w).max(initial=0.0), 1.0)
    if w.size and w.min() < -tol.psd * scale:
        raise NumericalError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    keep = _support_mask(w, cutoff)
    out = np.zeros_like(w)
    if f == "sqrt":
        out[keep] = np.sqrt(w[keep])
    elif f == "inv_sqrt":
        out[keep] = 1.0 / np.sqrt(w[keep])
    elif f == "log":
        out[keep] = np.log(w[keep]) / math.log(base)
    else:
        raise ValueError(f"unknown matrix function {f!r}")
    return (V * out) @ V.conj().T


def support_projector(A, cutoff: float | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    cutoff = tol.cutoff if cutoff is None else cutoff
    w, V = hermitian_eig(A, tol)
    Vs = V[:, _support_mask(w, cutoff)]
    return Vs @ Vs.conj().T


def _log_base(base) -> float:
    return math.log(base) if base not in ("e", None) else 1.0


def entropy_of_spectrum(p, base=2, cutoff: float = 0.0) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > cutoff]
    return float(-np.sum(p * np.log(p)) / _log_base(base))


def von_neumann_entropy(rho, base=2, tol: Tolerances = DEFAULT_TOL) -> float:
    """-tr rho log rho over the support of ``rho`` (bits by default)."""
    rho = hermitize(rho, tol)
    w = np.linalg.eigvalsh(rho)
    top = max(w.max(initial=0.0), 0.0)
    return max(0.0, entropy_of_spectrum(w, base, cutoff=tol.cutoff * top))


def relative_entropy(rho, sigma, base=2, tol: Tolerances = DEFAULT_TOL) -> float:
    """D(rho || sigma) = tr rho (log rho - log sigma).

    Returns ``math.inf`` when more than ``tol.support_leak`` of the weight of
    ``rho`` lies outside the support of ``sigma``.
    """
    rho, sigma = _square(rho), _square(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    P = support_projector(sigma, tol=tol)
    leak = float(np.real(np.trace(rho) - np.trace(P @ rho)))
    if leak > tol.support_leak:
        return math.inf
    log_sigma = matrix_function_on_support(sigma, "log", tol=tol)
    value = -von_neumann_entropy(rho, base="e", tol=tol) - float(np.real(np.trace(rho @ log_sigma)))
    return value / _log_base(base)


def tensor(*ops) -> np.ndarray:
    """Kronecker product of any number of arrays (vectors or matrices)."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def hadamard(A, B) -> np.ndarray:
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        raise DimensionError(f"Hadamard product needs equal shapes, got {A.shape} and {B.shape}")
    return A * B


def _check_dims(rho: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"matrix of shape {rho.shape} does not match dims {dims}")
    return dims


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep`` (indices into ``dims``).

    The kept subsystems appear in ascending order in the output.
    """
    rho = np.asarray(rho, dtype=complex)
    dims = _check_dims(rho, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep={keep} out of range for {n} subsystems")
    row = list(range(n))
    col = [n + i for i in range(n)]
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out_idx = [row[i] for i in keep] + [col[i] for i in keep]
    t = np.einsum(rho.reshape(dims + dims), row + col, out_idx)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dk, dk)


def permute_subsystems(rho, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator; ``order[i]`` is the old index of new factor i."""
    rho = np.asarray(rho, dtype=complex)
    dims = _check_dims(rho, dims)
    n = len(dims)
    order = list(order)
    t = rho.reshape(dims + dims).transpose(order + [n + i for i in order])
    d = rho.shape[0]
    return t.reshape(d, d)


def embed(op, dims: Sequence[int], index: int) -> np.ndarray:
    """Operator ``op`` acting on factor ``index`` of ``dims``, identity elsewhere."""
    dims = tuple(dims)
    left = int(np.prod(dims[:index]))
    right = int(np.prod(dims[index + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def as_density(state, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Accept a state vector or a density matrix and return a validated density matrix."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        norm = np.linalg.norm(state)
        if abs(norm - 1) > tol.trace * 1e3:
            raise NumericalError(f"state vector has norm {norm:.12f}")
        return ket_to_dm(state)
    rho = hermitize(state, tol)
    tr = np.real(np.trace(rho))
    if abs(tr - 1) > tol.trace * max(1, rho.shape[0]) * 1e2:
        raise NumericalError(f"density matrix has trace {tr:.12f}")
    w = np.linalg.eigvalsh(rho)
    if w.min() < -tol.psd * 1e2:
        raise NumericalError(f"density matrix is not PSD (min eigenvalue {w.min():.3e})")
    return rho


def is_pure(state, tol: Tolerances = DEFAULT_TOL) -> bool:
    state = np.asarray(state)
    if state.ndim == 1:
        return True
    w = np.linalg.eigvalsh(hermitize(state, tol))
    return bool(w[-1] > 1 - 1e-9)


def pure_vector(state, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """State vector of a pure state given as vector or rank-one density matrix."""
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return state / np.linalg.norm(state)
    w, V = hermitian_eig(state, tol)
    if w[0] < 1 - 1e-9:
        raise NumericalError(f"state is not pure (largest eigenvalue {w[0]:.12f})")
    return V[:, 0]


def schmidt(psi, dims: Sequence[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt coefficients and vectors of a bipartite pure state.

    Returns ``(s, left, right)`` with ``psi = sum_i s_i left[:, i] (x) right[:, i]``.
    """
    dA, dB = dims
    M = np.asarray(psi, dtype=complex).reshape(dA, dB)
    u, s, vh = np.linalg.svd(M)
    return s, u, vh.T


# -- random objects ---------------------------------------------------------

def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a complex Gaussian matrix."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph


def random_pure(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    rank = d if rank is None else rank
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def complete_basis(V: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns ``V`` (d x r) to a d x d unitary."""
    d, r = V.shape
    if r == d:
        return V
    P = np.eye(d) - V @ V.conj().T
    u, s, _ = np.linalg.svd(P)
    return np.hstack([V, u[:, : d - r]])
