"""Builders for the state families whose memory (un)usefulness is known."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import MeasurementBasis, gram, twirl
from .checks import SixItemWitness, check_max_entangled_C1, usefulness_witness, USEFUL_ALL_BASES
from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError, NumericalError
from .groups import (IrrepDecomposition, Representation, build_cyclic_shift_rep,
                     build_diagonal_character_rep, decompose_abelian, direct_sum_rep, symmetric_group_s3)
from .linalg import as_density, haar_unitary, hermitian_eig, ket_to_dm


@dataclass
class ConstructionRecipe:
    family: str
    params: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self) -> dict:
        return {"family": self.family, "params": _jsonable(self.params), "note": self.note}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


@dataclass
class Construction:
    """A constructed state with everything needed to check it."""

    state: np.ndarray  # vector for pure states, matrix otherwise
    rep: Representation
    dec: IrrepDecomposition
    dims: tuple
    basis: MeasurementBasis | None
    recipe: ConstructionRecipe
    extra: dict = field(default_factory=dict)

    @property
    def rho(self) -> np.ndarray:
        return ket_to_dm(self.state) if self.state.ndim == 1 else self.state


def _check_distribution(p, name):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < -1e-12) or abs(p.sum() - 1) > 1e-10:
        raise ValueError(f"{name} must be a probability distribution")
    return np.clip(p, 0, None)


def shift_rep_with_dec(l: int, seed: int = 0):
    rep = build_cyclic_shift_rep(l)
    return rep, decompose_abelian(rep, seed)


def canonical_vector(dec: IrrepDecomposition, i: int) -> np.ndarray:
    """First basis vector of ``H_lambda (x) M_lambda`` for block ``i``."""
    return dec.block_columns(i)[:, 0]


# -- mixtures of controlled-phase states -------------------------------------

def build_lla(P_Lambda, theta_lk, P_KJ, theta_kj, P_J, dec: IrrepDecomposition, rep: Representation,
              basis: MeasurementBasis | None = None, family: str = "lla") -> Construction:
    """Mixture of ``|Psi_j> = sum_k e^{i theta_kj} sqrt(P(k|j)) |phi_k>|e_k>``.

    ``|phi_k> = sum_lambda e^{i theta_{lambda,k}} sqrt(P_Lambda) |psi_lambda>``
    with ``|psi_lambda>`` the canonical vector of block ``lambda``. Such
    mixtures are memory useless at the basis ``{|e_k>}``. The decomposition
    witness for the extended state is attached as ``extra["witness"]``.
    """
    P_Lambda = _check_distribution(P_Lambda, "P_Lambda")
    P_J = _check_distribution(P_J, "P_J")
    theta_lk = np.asarray(theta_lk, dtype=float)
    theta_kj = np.asarray(theta_kj, dtype=float)
    P_KJ = np.asarray(P_KJ, dtype=float)
    nL, dB = theta_lk.shape
    if nL != len(P_Lambda) or nL > len(dec.blocks):
        raise DimensionError("theta_lk rows must match P_Lambda and available blocks")
    if P_KJ.shape != (dB, len(P_J)) or theta_kj.shape != P_KJ.shape:
        raise DimensionError("P_KJ and theta_kj must be d_B x |J|")
    for j in range(len(P_J)):
        _check_distribution(P_KJ[:, j], "P_{K|J}")
    basis = basis or MeasurementBasis.computational(dB)
    dA = dec.dim
    psis = np.stack([canonical_vector(dec, i) for i in range(nL)], axis=1)  # dA x nL
    phis = psis @ (np.sqrt(P_Lambda)[:, None] * np.exp(1j * theta_lk))  # dA x dB, column k = phi_k
    states = []
    for j in range(len(P_J)):
        coef = np.exp(1j * theta_kj[:, j]) * np.sqrt(P_KJ[:, j])
        M = phis * coef[None, :]  # A x (coordinates on basis)
        states.append((M @ basis.vectors.T).ravel())
    rho = sum(p * ket_to_dm(s) for p, s in zip(P_J, states))
    extra = {"states": states, "phis": phis, "witness": lla_witness(P_Lambda, theta_lk, P_KJ, theta_kj,
                                                                    P_J, dec, rep, basis)}
    recipe = ConstructionRecipe(family, {"P_Lambda": P_Lambda, "theta_lk": theta_lk, "P_KJ": P_KJ,
                                         "theta_kj": theta_kj, "P_J": P_J})
    return Construction(rho, rep, dec, (dA, dB), basis, recipe, extra)


def lla_witness(P_Lambda, theta_lk, P_KJ, theta_kj, P_J, dec, rep, basis) -> SixItemWitness:
    """Single-block witness: ``L = A``, ``R = B``, ``V_AB`` a B-controlled block phase."""
    dA, dB = dec.dim, basis.dim
    nL = theta_lk.shape[0]
    E = basis.vectors
    # V_AB^dag = sum_k V_k (x) |e_k><e_k| with V_k = (+)_lambda e^{-i theta_{lambda,k}} on block lambda
    Vdag = np.zeros((dA * dB, dA * dB), dtype=complex)
    for k in range(dB):
        phase = np.ones(dA, dtype=complex)
        for i in range(nL):
            phase[dec.block_slice(i)] = np.exp(-1j * theta_lk[i, k])
        Vk = dec.W @ np.diag(phase) @ dec.W.conj().T
        Vdag += np.kron(Vk, np.outer(E[:, k], E[:, k].conj()))
    V_AB = Vdag.conj().T
    psi_A = sum(math.sqrt(P_Lambda[i]) * canonical_vector(dec, i) for i in range(nL))
    eta_L = [[ket_to_dm(U @ psi_A)] for U in rep.matrices]
    eta_RB = np.zeros((dB * dB, dB * dB), dtype=complex)
    for j in range(len(P_J)):
        v = sum(np.exp(1j * theta_kj[k, j]) * math.sqrt(P_KJ[k, j]) * np.kron(E[:, k], E[:, k])
                for k in range(dB))
        eta_RB += P_J[j] * ket_to_dm(v)
    return SixItemWitness([(dA, dB)], V_AB, eta_L, [eta_RB], np.ones((rep.order, 1)))


def build_section32(l: int, P_J, rep: Representation | None = None, dec: IrrepDecomposition | None = None,
                    seed: int = 0) -> Construction:
    """Mixture of the ``l`` orthonormal states ``|Psi_j> = sum_k w^{jk}/sqrt(l) |phi_k>|e_k>``.

    ``|phi_k> = sum_s w^{sk}/sqrt(l) |psi_{lambda_s}>`` with ``w = e^{2 pi i/l}``
    and ``{|e_k>}`` the computational basis of ``C^l``. The state is
    separable exactly when ``P_J`` is uniform.
    """
    if rep is None:
        rep, dec = shift_rep_with_dec(l, seed)
    if dec is None or sum(1 for b in dec.blocks if b.dim == 1) < l:
        raise ValueError(f"need a decomposition with at least {l} one-dimensional irreps")
    P_J = _check_distribution(P_J, "P_J")
    if len(P_J) != l:
        raise DimensionError("P_J must have l entries")
    idx = np.arange(l)
    phase = 2 * np.pi * np.outer(idx, idx) / l
    c = build_lla(np.full(l, 1 / l), phase, np.full((l, l), 1 / l), phase, P_J, dec, rep,
                  MeasurementBasis.computational(l), family="section32")
    c.recipe.params = {"l": l, "P_J": P_J}
    c.extra["separable"] = bool(np.allclose(P_J, 1 / l, atol=1e-12))
    return c


# -- pure states in the C1 form ------------------------------------------------

def random_c1_state(dec: IrrepDecomposition, dB: int, rng: np.random.Generator,
                    basis: MeasurementBasis | None = None) -> tuple[np.ndarray, MeasurementBasis]:
    """Random pure state meeting the pure-state uselessness condition at a basis.

    ``|Psi> = sum_k sqrt(P_K(k)) |psi_k>|e_k>`` with ``|psi_k>`` having block
    weights ``P_Lambda`` and ``k``-independent ``H_lambda`` marginals: each
    block component is a fixed random state rotated by a random unitary on
    ``M_lambda`` and a random phase. Returns ``(psi, basis)``.
    """
    nb = len(dec.blocks)
    P_L = rng.dirichlet(np.ones(nb))
    P_K = rng.dirichlet(np.ones(dB))
    basis = basis or MeasurementBasis(haar_unitary(dB, rng))
    seeds = []
    for b in dec.blocks:
        x = rng.standard_normal((b.dim, b.multiplicity)) + 1j * rng.standard_normal((b.dim, b.multiplicity))
        seeds.append(x / np.linalg.norm(x))
    cols = np.zeros((dec.dim, dB), dtype=complex)
    for k in range(dB):
        coords = np.zeros(dec.dim, dtype=complex)
        for i, b in enumerate(dec.blocks):
            U = haar_unitary(b.multiplicity, rng)
            comp = np.exp(2j * np.pi * rng.random()) * seeds[i] @ U.T
            coords[dec.block_slice(i)] = math.sqrt(P_L[i]) * comp.ravel()
        cols[:, k] = math.sqrt(P_K[k]) * (dec.W @ coords)
    psi = (cols @ basis.vectors.T).ravel()
    return psi / np.linalg.norm(psi), basis


# -- maximally entangled states ----------------------------------------------

def build_max_entangled(dec: IrrepDecomposition, rep: Representation | None = None) -> Construction:
    """A maximally entangled state together with a basis at which the memory is useless.

    * abelian, multiplicity free: ``|Phi> = sum_s |psi_s>|v_s>/sqrt(l)`` with
      ``|v_s> = sum_k e^{-2 pi i ks/l} |k>/sqrt(l)``; measuring ``{|k>}`` is optimal.
    * abelian with multiplicity: ``|Phi> = sum_c |w_c>|c>/sqrt(r)`` over the
      columns of ``W``, measured in the Fourier basis.
    * general groups with ``n_lambda >= d_lambda``: the Weyl-operator
      construction on ``H_lambda (x) M_lambda``, measured in the computational basis.
    """
    l = len(dec.blocks)
    dA = dec.dim
    if dec.abelian_blocks and dec.multiplicity_free:
        ks = np.arange(l)
        V = np.exp(-2j * np.pi * np.outer(ks, ks) / l) / math.sqrt(l)  # row s = v_s
        psis = np.stack([canonical_vector(dec, s) for s in range(l)], axis=1)
        psi = (psis @ V).ravel() / math.sqrt(l)
        basis = MeasurementBasis.computational(l)
        recipe = ConstructionRecipe("max-entangled", {"path": "abelian-multiplicity-free", "l": l})
        return Construction(psi, rep, dec, (dA, l), basis, recipe, {"V": V, "P_Lambda": np.full(l, 1 / l)})
    if dec.abelian_blocks:
        psi = dec.W.ravel() / math.sqrt(dA)  # sum_c W[:, c] (x) |c>
        recipe = ConstructionRecipe("max-entangled", {"path": "abelian-multiplicity",
                                                      "multiplicities": [b.multiplicity for b in dec.blocks]})
        return Construction(psi, rep, dec, (dA, dA), MeasurementBasis.fourier(dA), recipe)
    if not check_max_entangled_C1(dec):
        raise ValueError("some irrep has multiplicity below its dimension; no basis makes the memory useless")
    return _build_weyl_blocks(dec, rep)


def _build_weyl_blocks(dec: IrrepDecomposition, rep) -> Construction:
    l = len(dec.blocks)
    dims = [(b.dim, b.multiplicity) for b in dec.blocks]
    D = sum(d * n for d, n in dims)
    counts = []
    for d, n in dims:
        counts += [d, n]
    n_outer = int(np.prod([d * n for d, n in dims]))
    dB = n_outer * l
    # psi_{lambda,k,k'} = Z^k (x) X^k' sum_j |j>|j>/sqrt(d)
    comps = []
    for i, (d, n) in enumerate(dims):
        table = {}
        for k in range(d):
            for kp in range(n):
                x = np.zeros((d, n), dtype=complex)
                for j in range(d):
                    x[j, (j + kp) % n] = np.exp(2j * np.pi * j * k / d) / math.sqrt(d)
                table[k, kp] = x.ravel()
        comps.append(table)
    dA = dec.dim
    M = np.zeros((dA, dB), dtype=complex)
    col = 0
    for ks in np.ndindex(*counts):
        for lp in range(l):
            coords = np.zeros(dA, dtype=complex)
            for i, (d, n) in enumerate(dims):
                amp = math.sqrt(d * n / D) * np.exp(2j * np.pi * (i + 1) * (lp + 1) / l)
                coords[dec.block_slice(i)] = amp * comps[i][ks[2 * i], ks[2 * i + 1]]
            M[:, col] = dec.W @ coords / math.sqrt(n_outer * l)
            col += 1
    psi = M.ravel()
    recipe = ConstructionRecipe("max-entangled", {"path": "weyl-blocks", "dims": dims})
    return Construction(psi, rep, dec, (dA, dB), MeasurementBasis.computational(dB), recipe)


def s3_example() -> tuple[Representation, IrrepDecomposition]:
    """S_3 acting as trivial (+) trivial (+) standard (x) I_2 on C^6."""
    group, standard = symmetric_group_s3()
    trivial = np.ones((group.order, 1, 1))
    return direct_sum_rep(group, [trivial, np.stack(standard)], [2, 2], ["trivial", "standard"])


def build_dephased(phi, rep: Representation, p: float, dims=None) -> np.ndarray:
    """(1 - p) |Phi><Phi| + p G(|Phi><Phi|)."""
    if not 0 <= p <= 1:
        raise ValueError("dephasing weight must lie in [0, 1]")
    rho = as_density(phi)
    dims = dims or (rep.dim, rho.shape[0] // rep.dim)
    return (1 - p) * rho + p * twirl(rho, rep, dims, 0)


# -- states useful at every basis ----------------------------------------------

def analytic_vectors() -> np.ndarray:
    """Five unit vectors in C^2 whose products span all of C^{2x2}."""
    V = np.zeros((5, 2), dtype=complex)
    for j in range(1, 6):
        if j <= 4:
            V[j - 1] = [1 / j, 1j ** j * math.sqrt(1 - 1 / j ** 2)]
        else:
            V[j - 1] = [1, 0]
    return V


def build_useful_protocol(l: int, dB: int, source: str = "random", seed: int = 0,
                          rep: Representation | None = None, dec: IrrepDecomposition | None = None,
                          max_retries: int = 100, tol: Tolerances = DEFAULT_TOL) -> Construction:
    """Pure state ``sum_j |psi_{lambda_j}>|v_j>/sqrt(l)`` with Bob's memory useful at every basis.

    ``source="random"`` samples Gaussian vectors until the product vectors
    are linearly independent; ``source="analytic"`` uses the fixed five
    vectors in C^2.
    """
    if not 1 < dB * dB <= l:
        raise ValueError(f"need 1 < d_B^2 <= l, got d_B={dB}, l={l}")
    if rep is None:
        rep = build_diagonal_character_rep([l], [[w] for w in range(l)])
        dec = decompose_abelian(rep, seed)
    if dec is None or not dec.multiplicity_free or len(dec.blocks) < l:
        raise ValueError(f"need a multiplicity-free decomposition with at least {l} irreps")
    attempts = []
    if source == "analytic":
        if (l, dB) != (5, 2):
            raise ValueError("the analytic vectors have l = 5 and d_B = 2")
        V = analytic_vectors()
        wit = usefulness_witness(V, tol)
    elif source == "random":
        rng = np.random.default_rng(seed)
        for attempt in range(max_retries):
            s = int(rng.integers(0, 2 ** 63 - 1))
            r = np.random.default_rng(s)
            V = r.standard_normal((l, dB)) + 1j * r.standard_normal((l, dB))
            V /= np.linalg.norm(V, axis=1)[:, None]
            wit = usefulness_witness(V, tol)
            attempts.append(s)
            if wit.verdict == USEFUL_ALL_BASES:
                break
        else:
            raise NumericalError(f"no linearly independent sample in {max_retries} tries")
    else:
        raise ValueError(f"unknown source {source!r}")
    if wit.verdict != USEFUL_ALL_BASES:
        raise NumericalError("vector family fails the independence test")
    psis = np.stack([canonical_vector(dec, i) for i in range(l)], axis=1)
    psi = (psis @ V).ravel() / math.sqrt(l)
    recipe = ConstructionRecipe("useful", {"l": l, "d_B": dB, "source": source, "seed": seed,
                                           "attempt_seeds": attempts, "V": V})
    return Construction(psi, rep, dec, (dec.dim, dB), None, recipe, {"V": V, "witness": wit})


# -- illumination and purification ---------------------------------------------

def build_illumination(d: int) -> Construction:
    """Probe-idler input ``sum_t |tt>/sqrt(d)`` for detecting a random shift on the probe.

    The idler's Schmidt vectors are ``|+_{-lambda}>``; the idler basis is their
    discrete Fourier transform ``|e_k> = sum_lambda e^{2 pi i k lambda/d} |+_{-lambda}>/sqrt(d)``,
    which is the computational basis.
    """
    rep = build_cyclic_shift_rep(d)
    dec = decompose_abelian(rep)
    t = np.arange(d)
    F = np.exp(2j * np.pi * np.outer(t, t) / d) / math.sqrt(d)  # column lam = |+_lam>
    psi = np.eye(d).ravel() / math.sqrt(d)
    schmidt_idler = F[:, (-t) % d]  # column lam = |+_{-lam}>
    E = schmidt_idler @ F  # e_k = sum_lam w^{k lam} |+_{-lam}> / sqrt(d)
    recipe = ConstructionRecipe("illumination", {"d": d})
    return Construction(psi, rep, dec, (d, d), MeasurementBasis(E), recipe,
                        {"gram": gram(F.T).J, "schmidt_idler": schmidt_idler})


def purify(rho, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Vector on ``S (x) E`` with ``tr_E = rho``; ``d_E`` is the rank of ``rho``."""
    rho = as_density(rho, tol)
    w, V = hermitian_eig(rho, tol)
    keep = w > tol.cutoff
    w, V = w[keep], V[:, keep]
    dE = len(w)
    psi = (V * np.sqrt(w)[None, :]).ravel()  # sum_i sqrt(w_i) |v_i>|i>
    psi /= np.linalg.norm(psi)
    return psi if dE else np.zeros(0)


def purification_dim(rho, tol: Tolerances = DEFAULT_TOL) -> int:
    return int(np.sum(np.linalg.eigvalsh(as_density(rho, tol)) > tol.cutoff))


# -- basis-diagonal separable states -------------------------------------------

def build_classical_quantum(P_K, states_A, rep: Representation, dec: IrrepDecomposition | None = None,
                            basis: MeasurementBasis | None = None) -> Construction:
    """``sum_k P_K(k) rho_{A|k} (x) |e_k><e_k|``, which the measurement leaves unchanged."""
    P_K = _check_distribution(P_K, "P_K")
    dB = len(P_K)
    basis = basis or MeasurementBasis.computational(dB)
    states_A = [as_density(s) for s in states_A]
    rho = sum(p * np.kron(s, basis.projector(k)) for k, (p, s) in enumerate(zip(P_K, states_A)))
    recipe = ConstructionRecipe("classical-quantum", {"P_K": P_K})
    c = Construction(rho, rep, dec, (rep.dim, dB), basis, recipe)
    c.extra["witness"] = classical_quantum_witness(P_K, states_A, rep, basis)
    return c


def classical_quantum_witness(P_K, states_A, rep: Representation, basis: MeasurementBasis) -> SixItemWitness:
    """One block per outcome: ``L_k = A``, one-dimensional ``R_k``, ``V_AB: |a>_k -> |a>|e_k>``."""
    dA, dB = rep.dim, basis.dim
    V = np.zeros((dA * dB, dA * dB), dtype=complex)
    for k in range(dB):
        for a in range(dA):
            V[:, k * dA + a] = np.kron(np.eye(dA)[a], basis.vectors[:, k])
    eta_L = [[U @ s @ U.conj().T for s in states_A] for U in rep.matrices]
    eta_RB = [basis.projector(k) for k in range(dB)]
    p = np.tile(np.asarray(P_K, dtype=float), (rep.order, 1))
    return SixItemWitness([(dA, 1)] * dB, V, eta_L, eta_RB, p)
