"""Finite groups, (projective) unitary representations and irrep block structure.

Group elements are addressed by integer index ``0 .. |G|-1``. For abelian
groups ``Z_{d_1} x ... x Z_{d_m}`` the index enumerates element tuples in
lexicographic order, so ``group.elements[i]`` is the tuple label.

An :class:`IrrepDecomposition` stores a unitary ``W`` whose columns are
grouped block by block. Inside block ``lambda`` (irrep dimension ``d``,
multiplicity ``n``) column ``offset + i * n + m`` is basis vector ``i`` of
``H_lambda`` tensored with basis vector ``m`` of ``M_lambda``, so that
``W^dag U_g W = (+)_lambda U_{lambda,g} (x) I_n``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import schur

from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError, NumericalError
from .linalg import hermitian_eig


class FiniteGroup:
    """Common interface: ``order``, ``elements``, ``multiply``, ``identity``, ``inverse``."""

    elements: list
    abelian: bool

    @property
    def order(self) -> int:
        return len(self.elements)

    def multiply(self, i: int, j: int) -> int:
        raise NotImplementedError

    @cached_property
    def table(self) -> np.ndarray:
        n = self.order
        return np.array([[self.multiply(i, j) for j in range(n)] for i in range(n)], dtype=int)

    @cached_property
    def identity(self) -> int:
        for e in range(self.order):
            if all(self.multiply(e, g) == g for g in range(self.order)):
                return e
        raise ValueError("group has no identity")

    def inverse(self, i: int) -> int:
        return int(np.flatnonzero(self.table[i] == self.identity)[0])

    def label(self, i: int) -> str:
        return str(i)


class AbelianGroup(FiniteGroup):
    """Z_{d_1} x ... x Z_{d_m} with elements as tuples in lexicographic order."""

    abelian = True

    def __init__(self, orders: Sequence[int]):
        self.orders = tuple(int(d) for d in orders)
        if not self.orders or any(d < 1 for d in self.orders):
            raise ValueError(f"invalid cyclic factor orders {orders}")
        self.elements = list(itertools.product(*(range(d) for d in self.orders)))
        self._index = {g: i for i, g in enumerate(self.elements)}

    def multiply(self, i: int, j: int) -> int:
        a, b = self.elements[i], self.elements[j]
        return self._index[tuple((x + y) % d for x, y, d in zip(a, b, self.orders))]

    def index(self, g) -> int:
        g = (g,) if np.isscalar(g) else tuple(g)
        return self._index[tuple(int(x) % d for x, d in zip(g, self.orders))]

    @cached_property
    def identity(self) -> int:
        return 0

    def label(self, i: int) -> str:
        return ",".join(str(x) for x in self.elements[i])

    def __repr__(self) -> str:
        return f"AbelianGroup({list(self.orders)})"


class TableGroup(FiniteGroup):
    """Group given by an explicit Cayley table ``table[i][j] = index of g_i g_j``."""

    def __init__(self, table):
        t = np.asarray(table, dtype=int)
        n = t.shape[0]
        if t.shape != (n, n) or t.min() < 0 or t.max() >= n:
            raise ValueError("Cayley table must be a square array of element indices")
        self.elements = list(range(n))
        self.__dict__["table"] = t
        self._validate()
        self.abelian = bool(np.array_equal(t, t.T))

    def multiply(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def _validate(self) -> None:
        t, n = self.table, self.order
        for row in t:
            if len(set(row.tolist())) != n:
                raise ValueError("Cayley table rows must be permutations (cancellation law)")
        ids = [e for e in range(n) if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
        if len(ids) != 1:
            raise ValueError("Cayley table must have a unique two-sided identity")
        if n <= 64:
            # (ab)c == a(bc) for all triples: t[t[a], :] == t[a][t]
            for a in range(n):
                if not np.array_equal(t[t[a]], t[a][t]):
                    raise ValueError("Cayley table is not associative")

    def __repr__(self) -> str:
        return f"TableGroup(order={self.order})"


def symmetric_group_s3() -> tuple[TableGroup, list[np.ndarray]]:
    """S_3 as a Cayley table together with the matrices of its standard 2-dim irrep."""
    perms = list(itertools.permutations(range(3)))
    index = {p: i for i, p in enumerate(perms)}

    def compose(p, q):  # (p q)(x) = p(q(x))
        return tuple(p[q[x]] for x in range(3))

    table = [[index[compose(p, q)] for q in perms] for p in perms]
    # standard irrep: permutation matrices restricted to the sum-zero plane
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float).T
    basis /= np.linalg.norm(basis, axis=0)
    standard = []
    for p in perms:
        P = np.zeros((3, 3))
        for x in range(3):
            P[p[x], x] = 1
        standard.append(basis.T @ P @ basis)
    return TableGroup(table), standard


@dataclass
class Representation:
    """Projective unitary representation ``g -> U_g`` with ``U_g U_h = c(g,h) U_{gh}``.

    ``cocycle`` is ``None`` for an ordinary representation; otherwise an
    ``|G| x |G|`` array of unit complex numbers.
    """

    group: FiniteGroup
    matrices: np.ndarray  # shape (|G|, d, d)
    cocycle: np.ndarray | None = None

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=complex)
        if self.matrices.ndim != 3 or self.matrices.shape[0] != self.group.order \
                or self.matrices.shape[1] != self.matrices.shape[2]:
            raise DimensionError(
                f"need {self.group.order} square matrices, got array of shape {self.matrices.shape}")
        if self.cocycle is not None:
            self.cocycle = np.asarray(self.cocycle, dtype=complex)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def is_projective(self) -> bool:
        return self.cocycle is not None and not np.allclose(self.cocycle, 1)

    def __getitem__(self, g: int) -> np.ndarray:
        return self.matrices[g]

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> float:
        """Check unitarity and the (projective) multiplication law; return the worst residual."""
        d = self.dim
        worst = 0.0
        for U in self.matrices:
            worst = max(worst, np.linalg.norm(U.conj().T @ U - np.eye(d)))
        t = self.group.table
        c = self.cocycle if self.cocycle is not None else np.ones(t.shape)
        if np.any(np.abs(np.abs(c) - 1) > tol.rep):
            raise NumericalError("cocycle values must have unit modulus")
        for i in range(self.order):
            for j in range(self.order):
                r = np.linalg.norm(self.matrices[i] @ self.matrices[j] - c[i, j] * self.matrices[t[i, j]])
                worst = max(worst, r)
        if worst > tol.rep:
            raise NumericalError(f"not a (projective) unitary representation: residual {worst:.3e}")
        return worst

    def with_phases(self, phases) -> "Representation":
        """Same projective class with every ``U_g`` multiplied by ``phases[g]``."""
        phases = np.asarray(phases, dtype=complex)
        t = self.group.table
        c = self.cocycle if self.cocycle is not None else np.ones(t.shape, dtype=complex)
        c = c * phases[:, None] * phases[None, :] / phases[t]
        return Representation(self.group, self.matrices * phases[:, None, None], c)

    def tensor(self, other: "Representation") -> "Representation":
        """Diagonal action ``U_g (x) V_g`` of the same group."""
        if other.group is not self.group and other.group.order != self.group.order:
            raise DimensionError("tensor of representations of different groups")
        mats = np.stack([np.kron(a, b) for a, b in zip(self.matrices, other.matrices)])
        c = None
        if self.cocycle is not None or other.cocycle is not None:
            one = np.ones((self.order, self.order))
            c = (self.cocycle if self.cocycle is not None else one) * \
                (other.cocycle if other.cocycle is not None else one)
        return Representation(self.group, mats, c)


@dataclass
class IrrepBlock:
    label: object  # character tuple for abelian groups, any hashable otherwise
    dim: int
    multiplicity: int
    matrices: np.ndarray  # (|G|, dim, dim)


@dataclass
class IrrepDecomposition:
    blocks: list[IrrepBlock]
    W: np.ndarray
    seed: int | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=complex)

    @property
    def dim(self) -> int:
        return self.W.shape[0]

    @property
    def offsets(self) -> list[int]:
        out, pos = [], 0
        for b in self.blocks:
            out.append(pos)
            pos += b.dim * b.multiplicity
        return out

    def block_slice(self, index: int) -> slice:
        off = self.offsets[index]
        b = self.blocks[index]
        return slice(off, off + b.dim * b.multiplicity)

    def block_columns(self, index: int) -> np.ndarray:
        """Columns of ``W`` spanning ``H_lambda (x) M_lambda`` for block ``index``."""
        return self.W[:, self.block_slice(index)]

    @property
    def labels(self) -> list:
        return [b.label for b in self.blocks if b.multiplicity > 0]

    @property
    def multiplicity_free(self) -> bool:
        return all(b.multiplicity <= 1 for b in self.blocks)

    @property
    def abelian_blocks(self) -> bool:
        return all(b.dim == 1 for b in self.blocks)

    def block_index(self, label) -> int:
        for i, b in enumerate(self.blocks):
            if b.label == label:
                return i
        raise KeyError(label)

    def block_form(self, g: int) -> np.ndarray:
        """``(+)_lambda U_{lambda,g} (x) I_{n_lambda}`` as a dense matrix."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            s = self.block_slice(i)
            out[s, s] = np.kron(b.matrices[g], np.eye(b.multiplicity))
        return out


# -- constructors -------------------------------------------------------------

def build_cyclic_shift_rep(d: int) -> Representation:
    """Regular representation of Z_d by cyclic shifts ``|t> -> |t + g mod d>``."""
    if d < 2:
        raise ValueError("cyclic shift representation needs d >= 2")
    X = np.roll(np.eye(d), 1, axis=0)
    mats = np.stack([np.linalg.matrix_power(X, g) for g in range(d)])
    return Representation(AbelianGroup([d]), mats)


def build_diagonal_character_rep(orders: Sequence[int], weights: Sequence[Sequence[int]]) -> Representation:
    """Diagonal representation ``U_g = diag(exp(2 pi i <w_j, g>))`` of an abelian group.

    ``weights[j]`` is the weight tuple of diagonal slot ``j``; the phase is
    ``sum_i w_i g_i / d_i`` in units of ``2 pi``.
    """
    group = AbelianGroup(orders)
    W = np.array([tuple(w) if not np.isscalar(w) else (w,) for w in weights], dtype=float)
    if W.shape[1] != len(group.orders):
        raise DimensionError("each weight needs one entry per cyclic factor")
    G = np.array(group.elements, dtype=float) / np.array(group.orders, dtype=float)
    phases = np.exp(2j * np.pi * (G @ W.T))  # (|G|, d)
    mats = np.stack([np.diag(p) for p in phases])
    return Representation(group, mats)


def weyl_heisenberg_qubit() -> Representation:
    """Projective representation {I, X, Z, XZ} of Z_2 x Z_2."""
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1, -1]).astype(complex)
    group = AbelianGroup([2, 2])
    mats = np.stack([np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b) for a, b in group.elements])
    t = group.table
    c = np.zeros(t.shape, dtype=complex)
    for i in range(4):
        for j in range(4):
            prod = mats[i] @ mats[j]
            target = mats[t[i, j]]
            c[i, j] = np.trace(target.conj().T @ prod) / 2
    return Representation(group, mats, c)


def direct_sum_rep(group: FiniteGroup, irreps: Sequence[np.ndarray], multiplicities: Sequence[int],
                   labels: Sequence | None = None) -> tuple[Representation, IrrepDecomposition]:
    """Representation ``(+)_lambda U_lambda (x) I_{n_lambda}`` with its decomposition (W = I).

    ``irreps[i]`` is an array of shape ``(|G|, d_i, d_i)``.
    """
    labels = list(range(len(irreps))) if labels is None else list(labels)
    blocks = [IrrepBlock(lab, np.asarray(m).shape[1], int(n), np.asarray(m, dtype=complex))
              for lab, m, n in zip(labels, irreps, multiplicities) if n > 0]
    d = sum(b.dim * b.multiplicity for b in blocks)
    dec = IrrepDecomposition(blocks, np.eye(d))
    mats = np.stack([dec.block_form(g) for g in range(group.order)])
    return Representation(group, mats), dec


# -- decompositions -------------------------------------------------------------

def decompose_abelian(rep: Representation, seed: int = 0,
                      tol: Tolerances = DEFAULT_TOL) -> IrrepDecomposition:
    """Simultaneously diagonalize an ordinary representation of an abelian group.

    A random real combination of the Hermitian operators ``U_g + U_g^dag`` and
    ``i (U_g - U_g^dag)`` is diagonalized; its eigenspaces are then refined by
    the characters of every ``U_g`` and grouped into blocks of identical
    character. Blocks are ordered by their character's label.
    """
    if rep.is_projective:
        raise ValueError("automatic decomposition only handles ordinary representations; "
                         "supply the decomposition of a projective representation explicitly")
    mats = rep.matrices
    for a in mats:
        for b in mats:
            if np.linalg.norm(a @ b - b @ a) > tol.rep * 10:
                raise ValueError("representation matrices do not commute; "
                                 "supply the decomposition explicitly")
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((len(mats), 2))
    H = sum(c0 * (U + U.conj().T) + c1 * 1j * (U - U.conj().T) for (c0, c1), U in zip(coeffs, mats))
    w, V = hermitian_eig(H, tol)
    scale = max(1.0, np.abs(w).max())
    clusters, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[start] - w[i] > tol.cluster * scale:
            clusters.append(list(range(start, i)))
            start = i
    V = _refine(mats, V, clusters, tol)
    chars = np.stack([np.diag(V.conj().T @ U @ V) for U in mats], axis=1)  # (d, |G|)

    group = rep.group
    labels = [_character_label(group, row, tol) for row in chars]
    order = sorted(range(len(labels)), key=lambda i: (labels[i], i))
    blocks, cols = [], []
    for label, idx in itertools.groupby(order, key=lambda i: labels[i]):
        idx = list(idx)
        mean = chars[idx].mean(axis=0)
        blocks.append(IrrepBlock(label, 1, len(idx), (mean / np.abs(mean)).reshape(-1, 1, 1)))
        cols.extend(idx)
    dec = IrrepDecomposition(blocks, V[:, cols], seed=seed)
    res = verify_decomposition(rep, dec)
    if res > tol.rep * 100:
        raise NumericalError(f"abelian decomposition failed (residual {res:.3e})")
    return dec


def _refine(mats, V, clusters, tol):
    # An unlucky random draw can merge distinct characters into one
    # eigenspace; split every cluster by diagonalizing each U_g inside it.
    V = V.copy()
    for U in mats:
        refined = []
        for idx in clusters:
            if len(idx) == 1:
                refined.append(idx)
                continue
            Vs = V[:, idx]
            T, Z = schur(Vs.conj().T @ U @ Vs, output="complex")
            ev = np.diag(T)
            order = np.lexsort((ev.imag.round(9), ev.real.round(9)))
            V[:, idx] = (Vs @ Z)[:, order]
            ev = ev[order]
            start = 0
            for i in range(1, len(idx) + 1):
                if i == len(idx) or abs(ev[i] - ev[start]) > tol.cluster * 1e2:
                    refined.append(idx[start:i])
                    start = i
        clusters = refined
    return V


def _character_label(group: FiniteGroup, row: np.ndarray, tol: Tolerances) -> tuple:
    """Weight tuple ``w`` with ``chi(g) = exp(2 pi i <w, g/d>)`` for an abelian group."""
    if isinstance(group, AbelianGroup):
        label = []
        for axis, d in enumerate(group.orders):
            gen = [0] * len(group.orders)
            gen[axis] = 1 % d
            val = row[group.index(gen)]
            w = int(round(np.angle(val) / (2 * np.pi) * d)) % d
            label.append(w)
        return tuple(label)
    # generic abelian table group: round the character values themselves
    return tuple(np.round(np.angle(row) / (2 * np.pi), 6) % 1.0)


def verify_decomposition(rep: Representation, dec: IrrepDecomposition) -> float:
    """max_g || W^dag U_g W - (+)_lambda U_{lambda,g} (x) I ||_F."""
    if dec.dim != rep.dim:
        raise DimensionError(f"decomposition acts on dim {dec.dim}, representation on {rep.dim}")
    W = dec.W
    worst = np.linalg.norm(W.conj().T @ W - np.eye(dec.dim))
    for g in range(rep.order):
        worst = max(worst, np.linalg.norm(W.conj().T @ rep.matrices[g] @ W - dec.block_form(g)))
    return float(worst)


def projector_onto_block(dec: IrrepDecomposition, label) -> np.ndarray:
    """Orthogonal projector Pi_lambda onto ``H_lambda (x) M_lambda``."""
    cols = dec.block_columns(dec.block_index(label))
    return cols @ cols.conj().T
