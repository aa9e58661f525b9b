"""Group twirl, Bob's basis measurement, and genuinely incoherent operations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError, NumericalError
from .groups import Representation
from .linalg import as_density, embed, hermitize, partial_trace


@dataclass
class MeasurementBasis:
    """Orthonormal basis ``{|e_k>}``; ``vectors[:, k]`` is ``|e_k>``."""

    vectors: np.ndarray

    def __post_init__(self):
        E = np.asarray(self.vectors, dtype=complex)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise DimensionError(f"basis must be a square matrix of column vectors, got {E.shape}")
        if np.linalg.norm(E.conj().T @ E - np.eye(E.shape[0])) > 1e-10 * E.shape[0]:
            raise NumericalError("basis vectors are not orthonormal")
        self.vectors = E

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @classmethod
    def computational(cls, d: int) -> "MeasurementBasis":
        return cls(np.eye(d))

    @classmethod
    def fourier(cls, d: int) -> "MeasurementBasis":
        k = np.arange(d)
        return cls(np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d))

    @classmethod
    def from_rows(cls, rows) -> "MeasurementBasis":
        return cls(np.asarray(rows, dtype=complex).T)

    def projector(self, k: int) -> np.ndarray:
        e = self.vectors[:, k]
        return np.outer(e, e.conj())


def _as_basis(basis) -> MeasurementBasis:
    return basis if isinstance(basis, MeasurementBasis) else MeasurementBasis(basis)


def twirl(rho, rep: Representation, dims: Sequence[int], subsystem: int = 0) -> np.ndarray:
    """(1/|G|) sum_g U_g rho U_g^dag with ``U_g`` acting on factor ``subsystem``.

    Cocycle phases cancel between ``U_g`` and ``U_g^dag``, so projective
    representations need no special handling.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    dims = tuple(dims)
    if dims[subsystem] != rep.dim:
        raise DimensionError(f"representation dim {rep.dim} does not match subsystem dim {dims[subsystem]}")
    if rho.shape[0] != int(np.prod(dims)):
        raise DimensionError(f"state of size {rho.shape[0]} does not match dims {dims}")
    left = int(np.prod(dims[:subsystem]))
    right = int(np.prod(dims[subsystem + 1:]))
    d = rep.dim
    t = rho.reshape(left, d, right, left, d, right)
    out = np.zeros_like(t)
    for U in rep.matrices:  # fixed summation order
        out += np.einsum("ab,ibjkcl,dc->iajkdl", U, t, U.conj(), optimize=True)
    out /= rep.order
    return out.reshape(rho.shape)


def measure_channel(rho, basis, dims: Sequence[int], subsystem: int = 1) -> np.ndarray:
    """sum_k (I (x) |e_k><e_k|) rho (I (x) |e_k><e_k|) on factor ``subsystem``.

    The measured factor stays in place as a classical register.
    """
    basis = _as_basis(basis)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    dims = tuple(dims)
    if dims[subsystem] != basis.dim:
        raise DimensionError(f"basis dim {basis.dim} does not match subsystem dim {dims[subsystem]}")
    E = embed(basis.vectors, dims, subsystem)
    # rotate into the basis, dephase, rotate back
    r = E.conj().T @ rho @ E
    left = int(np.prod(dims[:subsystem]))
    right = int(np.prod(dims[subsystem + 1:]))
    d = basis.dim
    t = r.reshape(left, d, right, left, d, right)
    mask = np.eye(d)[None, :, None, None, :, None]
    r = (t * mask).reshape(r.shape)
    return E @ r @ E.conj().T


def conditional_states(rho, basis, dims: Sequence[int] = None, tol: Tolerances = DEFAULT_TOL):
    """Outcome probabilities and conditional states on A for a measurement on B.

    Returns ``(probs, states, dropped)``: ``probs[k] = P_K(k)``,
    ``states[k]`` the normalized ``<e_k| rho |e_k>`` (``None`` when dropped)
    and ``dropped`` the outcome indices with ``P_K(k) < tol.prob``.
    """
    basis = _as_basis(basis)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    dB = basis.dim
    dA = rho.shape[0] // dB if dims is None else dims[0]
    if dA * dB != rho.shape[0]:
        raise DimensionError("state size is not d_A * d_B")
    t = rho.reshape(dA, dB, dA, dB)
    probs, states, dropped = [], [], []
    for k in range(dB):
        e = basis.vectors[:, k]
        block = np.einsum("b,ibjc,c->ij", e.conj(), t, e)
        p = float(np.real(np.trace(block)))
        probs.append(max(p, 0.0))
        if p < tol.prob:
            states.append(None)
            dropped.append(k)
        else:
            states.append(hermitize(block / p, tol.replace(herm=1e-8)))
    return np.array(probs), states, dropped


def cnot_matrix(basis) -> np.ndarray:
    """CX_{B -> B~} = sum_{k,k'} |e_k><e_k| (x) |e_{k'+k}><e_{k'}| on B (x) B~."""
    E = _as_basis(basis).vectors
    d = E.shape[0]
    CX = np.zeros((d * d, d * d), dtype=complex)
    for k in range(d):
        Pk = np.outer(E[:, k], E[:, k].conj())
        shift = sum(np.outer(E[:, (kp + k) % d], E[:, kp].conj()) for kp in range(d))
        CX += np.kron(Pk, shift)
    return CX


def cnot_extend(rho, basis, dims: Sequence[int]) -> np.ndarray:
    """rho' = CX (rho (x) |e_0><e_0|) CX^dag on A (x) B (x) B~."""
    basis = _as_basis(basis)
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    dA, dB = dims
    if dB != basis.dim:
        raise DimensionError("basis dimension does not match B")
    e0 = basis.vectors[:, 0]
    big = np.kron(rho, np.outer(e0, e0.conj()))
    C = np.kron(np.eye(dA), cnot_matrix(basis))
    return C @ big @ C.conj().T


def trace_copy(rho_ext, dims: Sequence[int]) -> np.ndarray:
    """tr_{B~} of a state on A (x) B (x) B~."""
    dA, dB = dims
    return partial_trace(rho_ext, (dA, dB, dB), [0, 1])


# -- genuinely incoherent operations ------------------------------------------

@dataclass
class GramMatrix:
    """J(V) = V^dag V for ``l`` unit vectors stored as the rows of ``V``."""

    J: np.ndarray
    V: np.ndarray | None = None

    @property
    def l(self) -> int:
        return self.J.shape[0]

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> None:
        J = hermitize(self.J, tol.replace(herm=1e-9))
        if np.max(np.abs(np.diag(J) - 1)) > 1e-10:
            raise NumericalError("Gram matrix must have unit diagonal")
        if np.linalg.eigvalsh(J).min() < -1e-10:
            raise NumericalError("Gram matrix must be PSD")
        if self.V is not None and np.linalg.norm(gram_of(self.V) - J) > 1e-10:
            raise NumericalError("stored vectors do not reproduce the Gram matrix")


def gram_of(V) -> np.ndarray:
    V = np.asarray(V, dtype=complex)
    return V.conj() @ V.T  # J[a, b] = <v_a | v_b>


def gram(V, tol: Tolerances = DEFAULT_TOL) -> GramMatrix:
    """Gram matrix ``J[a, b] = <v_a|v_b>`` of the rows of ``V`` (each a unit vector)."""
    V = np.asarray(V, dtype=complex)
    if V.ndim != 2:
        raise DimensionError("V must be an l x d_B array of row vectors")
    norms = np.linalg.norm(V, axis=1)
    if np.max(np.abs(norms - 1)) > 1e-10:
        raise NumericalError("rows of V must be unit vectors")
    out = GramMatrix(gram_of(V), V)
    out.validate(tol)
    return out


@dataclass
class GIOChannel:
    """Hadamard-product channel ``rho -> A (.) rho`` with A PSD and unit diagonal."""

    A: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=complex)
        GramMatrix(self.A).validate()

    @property
    def l(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_gram(cls, g: GramMatrix) -> "GIOChannel":
        return cls(g.J)


def gio_apply(ch, rho) -> np.ndarray:
    A = ch.A if isinstance(ch, GIOChannel) else ch.J if isinstance(ch, GramMatrix) else np.asarray(ch)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != A.shape:
        raise DimensionError(f"channel on dim {A.shape[0]} applied to shape {rho.shape}")
    return A * rho


def gio_kraus_from_columns(V) -> list[np.ndarray]:
    """Diagonal Kraus operators of Gamma_{J(V)}, one per column of ``V``.

    Rows of ``V`` are the vectors ``v_j``. Since
    ``J[a, b] = sum_k conj(v_{a,k}) v_{b,k}``, the operators
    ``K_k = diag(conj(v_{1,k}), ..., conj(v_{l,k}))`` give
    ``sum_k K_k rho K_k^dag = J(V) (.) rho``.
    """
    V = np.asarray(V, dtype=complex)
    if np.max(np.abs(np.linalg.norm(V, axis=1) - 1)) > 1e-10:
        raise NumericalError("rows of V must be unit vectors")
    return [np.diag(V[:, k].conj()) for k in range(V.shape[1])]


def kraus_apply(kraus, rho) -> np.ndarray:
    return sum(K @ rho @ K.conj().T for K in kraus)
