"""Criteria certifying or refuting that Bob's quantum memory is useless.

Every check works at desk scale on dense matrices. The decision over *all*
measurement bases is only attempted for pure states of multiplicity-free
representations; everything else is reported with numerical evidence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, nnls

from .capacity import capacity_direct, capacity_measured
from .channels import GramMatrix, MeasurementBasis, cnot_extend, gram, measure_channel, twirl
from .config import DEFAULT_TOL, Tolerances, max_workers
from .errors import DimensionError, NumericalError
from .groups import IrrepDecomposition, Representation
from .linalg import (as_density, haar_unitary, is_pure, matrix_function_on_support, pure_vector,
                     schmidt, support_projector)

USELESS = "USELESS"
USEFUL_ALL_BASES = "USEFUL-ALL-BASES"
UNKNOWN = "UNKNOWN"
INCONCLUSIVE = "INCONCLUSIVE"
FOUND = "FOUND"
NOT_FOUND = "NOT-FOUND"
SUSPECT_NUMERIC = "SUSPECT-NUMERIC"


def _basis(basis) -> MeasurementBasis:
    return basis if isinstance(basis, MeasurementBasis) else MeasurementBasis(basis)


def _dims(rho, rep_dim, dims):
    return tuple(dims) if dims is not None else (rep_dim, rho.shape[0] // rep_dim)


# -- Petz-type equality ---------------------------------------------------------

@dataclass
class A2Witness:
    rhs: np.ndarray
    residual: float
    T: np.ndarray  # recovery factor sqrt(G(rho)) pinv sqrt(G B(rho)) (+) I_perp
    passed: bool


def check_A2(rho, rep: Representation, basis, dims=None, tol: Tolerances = DEFAULT_TOL) -> A2Witness:
    """Compare rho with sqrt(G rho) [G B rho]^{-1/2} B rho [G B rho]^{-1/2} sqrt(G rho).

    Inverses are pseudo-inverses on the support of ``G(B(rho))``, which
    contains the supports of ``rho``, ``B(rho)`` and ``G(rho)``.
    """
    rho = as_density(rho, tol)
    basis = _basis(basis)
    dims = _dims(rho, rep.dim, dims)
    g_rho = twirl(rho, rep, dims, 0)
    b_rho = measure_channel(rho, basis, dims, 1)
    gb_rho = twirl(b_rho, rep, dims, 0)
    P = support_projector(gb_rho, tol=tol)
    escape = np.linalg.norm(b_rho - P @ b_rho @ P)
    if escape > 1e-8:
        raise NumericalError(f"support of B(rho) escapes that of G(B(rho)) by {escape:.3e}")
    F = matrix_function_on_support(g_rho, "sqrt", tol=tol) @ matrix_function_on_support(gb_rho, "inv_sqrt", tol=tol)
    rhs = F @ b_rho @ F.conj().T
    residual = float(np.linalg.norm(rho - rhs))
    T = F + (np.eye(P.shape[0]) - P)
    return A2Witness(rhs, residual, T, residual < tol.a2)


@dataclass
class RecoveryResult:
    max_residual: float
    worst_g: int
    passed: bool


def recovery_map_check(rho, rep: Representation, basis, dims=None, tol: Tolerances = DEFAULT_TOL,
                       witness: A2Witness | None = None) -> RecoveryResult:
    """max_g || T B(U_g rho U_g^dag) T^dag - U_g rho U_g^dag ||_1 for the A2 recovery factor T."""
    rho = as_density(rho, tol)
    basis = _basis(basis)
    dims = _dims(rho, rep.dim, dims)
    if witness is None:
        witness = check_A2(rho, rep, basis, dims, tol)
    T = witness.T
    eye_b = np.eye(dims[1])
    worst, worst_g = 0.0, 0
    for g, U in enumerate(rep.matrices):
        Ug = np.kron(U, eye_b)
        target = Ug @ rho @ Ug.conj().T
        out = T @ measure_channel(target, basis, dims, 1) @ T.conj().T
        r = float(np.abs(np.linalg.eigvalsh(0.5 * (out - target + (out - target).conj().T))).sum())
        if r > worst:
            worst, worst_g = r, g
    return RecoveryResult(worst, worst_g, worst < tol.recovery)


# -- pure states --------------------------------------------------------------------

@dataclass
class C1Result:
    passed: bool
    max_distribution_distance: float
    max_marginal_distance: float
    P_K: list[float]
    P_Lambda: list[float]
    P_Lambda_given_k: list[list[float]]  # rows for kept outcomes
    kept_outcomes: list[int]


def check_C1(psi, dec: IrrepDecomposition, basis, dims=None, tol: Tolerances = DEFAULT_TOL) -> C1Result:
    """Test the pure-state condition: P_{Lambda|k} = P_Lambda and k-independent H_lambda marginals."""
    basis = _basis(basis)
    psi = pure_vector(psi, tol)
    dA = dec.dim
    dB = basis.dim
    if dims is not None and tuple(dims) != (dA, dB) or psi.size != dA * dB:
        raise DimensionError("state, decomposition and basis dimensions disagree")
    M = dec.W.conj().T @ psi.reshape(dA, dB) @ basis.vectors.conj()  # columns: unnormalized <e_k|psi>
    P_K = np.sum(np.abs(M) ** 2, axis=0)
    kept = [k for k in range(dB) if P_K[k] > tol.prob]
    P_L = np.array([np.sum(np.abs(M[dec.block_slice(i), :]) ** 2) for i in range(len(dec.blocks))])
    cond, marg = [], []
    for k in kept:
        col = M[:, k] / math.sqrt(P_K[k])
        row, ms = [], []
        for i, b in enumerate(dec.blocks):
            x = col[dec.block_slice(i)].reshape(b.dim, b.multiplicity)
            w = float(np.sum(np.abs(x) ** 2))
            row.append(w)
            ms.append(x @ x.conj().T / w if w > tol.prob else None)
        cond.append(row)
        marg.append(ms)
    cond_arr = np.array(cond)
    dist = float(np.max(np.abs(cond_arr - P_L[None, :]).sum(axis=1))) if kept else 0.0
    mdist = 0.0
    for i in range(len(dec.blocks)):
        if P_L[i] <= tol.prob:
            continue
        ref = None
        for ms in marg:
            if ms[i] is None:
                continue
            if ref is None:
                ref = ms[i]
            else:
                mdist = max(mdist, float(np.linalg.norm(ms[i] - ref)))
    return C1Result(dist < tol.c1 and mdist < tol.c1, dist, mdist, P_K.tolist(), P_L.tolist(),
                    cond_arr.tolist(), kept)


def check_max_entangled_C1(dec: IrrepDecomposition) -> bool:
    """A maximally entangled state meets C1 iff every present irrep has n_lambda >= d_lambda."""
    return all(b.multiplicity >= b.dim for b in dec.blocks if b.multiplicity > 0)


# -- general mixed states: decomposition witness ------------------------------------

@dataclass
class SixItemWitness:
    """Data for ``U_g rho' U_g^dag = V_AB ((+)_j p_{j|g} eta_{L_j,g} (x) eta_{R_j B~}) V_AB^dag``.

    ``blocks[j] = (dim L_j, dim R_j)``; ``eta_L[g][j]`` acts on ``L_j``;
    ``eta_RB[j]`` acts on ``R_j (x) B~``; ``p[g, j] = p_{j|g}``.
    """

    blocks: list[tuple[int, int]]
    V_AB: np.ndarray
    eta_L: list[list[np.ndarray]]
    eta_RB: list[np.ndarray]
    p: np.ndarray

    def validate(self, dA: int, dB: int) -> None:
        if sum(a * b for a, b in self.blocks) != dA * dB:
            raise DimensionError("block dimensions must add up to d_A * d_B")
        if np.asarray(self.V_AB).shape != (dA * dB, dA * dB):
            raise DimensionError("V_AB has the wrong shape")
        p = np.asarray(self.p)
        if np.any(p < -1e-12) or np.max(np.abs(p.sum(axis=1) - 1)) > 1e-9:
            raise NumericalError("p_{.|g} must be probability distributions")

    def to_dict(self) -> dict:
        from .io import matrix_to_json
        return {
            "blocks": [list(b) for b in self.blocks],
            "V_AB": matrix_to_json(self.V_AB),
            "eta_L": [[matrix_to_json(m) for m in row] for row in self.eta_L],
            "eta_RB": [matrix_to_json(m) for m in self.eta_RB],
            "p": np.asarray(self.p).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SixItemWitness":
        from .io import matrix_from_json
        return cls([tuple(b) for b in d["blocks"]], matrix_from_json(d["V_AB"]),
                   [[matrix_from_json(m) for m in row] for row in d["eta_L"]],
                   [matrix_from_json(m) for m in d["eta_RB"]], np.asarray(d["p"], dtype=float))


def six_item_form(w: SixItemWitness, g: int, dB: int) -> np.ndarray:
    """V_AB ((+)_j p_{j|g} eta_{L_j,g} (x) eta_{R_j B~}) V_AB^dag on AB (x) B~."""
    n_ab = sum(a * b for a, b in w.blocks)
    out = np.zeros((n_ab, dB, n_ab, dB), dtype=complex)
    off = 0
    for j, (dl, dr) in enumerate(w.blocks):
        size = dl * dr
        blk = w.p[g][j] * np.kron(w.eta_L[g][j], w.eta_RB[j])  # (dl*dr*dB)^2
        out[off:off + size, :, off:off + size, :] = blk.reshape(size, dB, size, dB)
        off += size
    out = out.reshape(n_ab * dB, n_ab * dB)
    V = np.kron(w.V_AB, np.eye(dB))
    return V @ out @ V.conj().T


def verify_six_item(rho, rep: Representation, basis, w: SixItemWitness, dims=None) -> float:
    """Largest Frobenius residual over g of the decomposition equation for ``rho'``."""
    rho = as_density(rho)
    basis = _basis(basis)
    dA, dB = _dims(rho, rep.dim, dims)
    w.validate(dA, dB)
    ext = cnot_extend(rho, basis, (dA, dB))
    worst = 0.0
    for g, U in enumerate(rep.matrices):
        Ug = np.kron(U, np.eye(dB * dB))
        lhs = Ug @ ext @ Ug.conj().T
        worst = max(worst, float(np.linalg.norm(lhs - six_item_form(w, g, dB))))
    return worst


# -- Gram matrix decomposition ------------------------------------------------------

@dataclass
class GramDecomposition:
    """``J/l = sum_k p_k Z_k |+><+| Z_k^dag`` with ``Z_k = diag(exp(i theta[:, k]))``."""

    probs: np.ndarray
    theta: np.ndarray  # (l, K)
    residual: float
    status: str
    method: str
    restarts_used: int = 0

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def model(self) -> np.ndarray:
        Z = np.exp(1j * self.theta)
        return (Z * self.probs) @ Z.conj().T  # = sum_k p_k z_k z_k^dag

    def atoms(self, cutoff: float = 1e-12) -> int:
        return int(np.sum(self.probs > cutoff))

    def vectors(self, dB: int | None = None, cutoff: float = 1e-12) -> np.ndarray:
        """Rows ``u_lambda = sum_k sqrt(p_k) exp(-i theta_{lambda,k}) |k>`` over the atoms kept."""
        keep = np.flatnonzero(self.probs > cutoff)
        U = np.sqrt(self.probs[keep])[None, :] * np.exp(-1j * self.theta[:, keep])
        if dB is not None:
            if len(keep) > dB:
                raise DimensionError(f"decomposition uses {len(keep)} atoms, more than d_B = {dB}")
            U = np.hstack([U, np.zeros((U.shape[0], dB - len(keep)))])
        return U

    def to_dict(self) -> dict:
        return {"probs": self.probs.tolist(), "theta": self.theta.tolist(), "residual": self.residual,
                "status": self.status, "method": self.method}


@dataclass
class SearchOptions:
    restarts: int = 64
    iterations: int = 2000
    n_atoms: int | None = None  # default l**2
    seed: int = 0
    n_bases: int = 32  # random bases tried by the heuristic basis search


def _gram_residual(J, probs, theta) -> float:
    Z = np.exp(1j * theta)
    return float(np.linalg.norm(J - (Z * probs) @ Z.conj().T)) / J.shape[0]


def _closed_form_identity(l: int):
    k = np.arange(l)
    return np.full(l, 1.0 / l), 2 * np.pi * np.outer(k, k) / l


def _closed_form_l2(J):
    z = J[0, 1]
    th = math.acos(min(1.0, abs(z)))
    thp = float(np.angle(z)) if abs(z) > 0 else 0.0
    theta = np.array([[0.0, 0.0], [th - thp, -th - thp]])
    return np.array([0.5, 0.5]), theta


def gram_decompose(J, opts: SearchOptions | None = None, tol: Tolerances = DEFAULT_TOL) -> GramDecomposition:
    """Write ``J/l`` as a mixture of diagonal-unitary rotations of the maximally coherent state.

    Closed forms are used for ``J = I`` and ``l = 2``. Otherwise a seeded
    multi-start alternating minimization runs over ``K`` atoms: phases are
    updated per atom by coordinate-wise polar alignment, probabilities by
    non-negative least squares (the unit diagonal fixes their sum). Each
    restart is finished with a Levenberg-Marquardt-type polish. The search
    succeeds when the residual ``||J/l - sum_k p_k Z_k|+><+|Z_k^dag||_F``
    drops below ``tol.gram``; for ``l <= 3`` a failure is reported as
    ``SUSPECT-NUMERIC`` because a decomposition always exists there.
    """
    opts = opts or SearchOptions()
    J = np.asarray(J.J if isinstance(J, GramMatrix) else J, dtype=complex)
    GramMatrix(J).validate(tol)
    l = J.shape[0]
    if l == 1:
        return GramDecomposition(np.ones(1), np.zeros((1, 1)), 0.0, FOUND, "trivial")
    if np.linalg.norm(J - np.eye(l)) < 1e-12:
        p, th = _closed_form_identity(l)
        return GramDecomposition(p, th, _gram_residual(J, p, th), FOUND, "closed-form-identity")
    if l == 2 and (opts.n_atoms is None or opts.n_atoms >= 2):
        p, th = _closed_form_l2(J)
        return GramDecomposition(p, th, _gram_residual(J, p, th), FOUND, "closed-form-l2")

    K = opts.n_atoms or l * l
    rng = np.random.default_rng(opts.seed)
    seeds = rng.integers(0, 2 ** 63 - 1, size=opts.restarts)
    best = None
    for r, s in enumerate(seeds):
        p, th = _alternating(J, K, int(s), opts.iterations, tol.gram * l / 10)
        p, th = _polish(J, p, th)
        res = _gram_residual(J, p, th)
        if best is None or res < best[0]:
            best = (res, p, th)
        if res < tol.gram:
            return GramDecomposition(p, th, res, FOUND, "alternating-minimization", r + 1)
    res, p, th = best
    status = SUSPECT_NUMERIC if l <= 3 else NOT_FOUND
    return GramDecomposition(p, th, res, status, "alternating-minimization", opts.restarts)


def _alternating(J, K, seed, iterations, target):
    l = J.shape[0]
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, (l, K))
    th[0] = 0.0
    p = np.full(K, 1.0 / K)
    iu = np.triu_indices(l, 1)
    last = math.inf
    for it in range(iterations):
        Z = np.exp(1j * th)
        M = (Z * p) @ Z.conj().T
        for k in range(K):
            z = Z[:, k]
            R = J - M + p[k] * np.outer(z, z.conj())
            for lam in range(l):
                s = R[lam] @ z - R[lam, lam] * z[lam]
                if abs(s) > 1e-300:
                    z[lam] = s / abs(s)
            z = z * np.conj(z[0])
            Z[:, k] = z
            M = (J - R) + p[k] * np.outer(z, z.conj())  # other atoms plus the updated one
        A = np.stack([(Z[:, k][:, None] * Z[:, k].conj()[None, :])[iu] for k in range(K)], axis=1)
        A_real = np.vstack([A.real, A.imag, np.ones((1, K))])
        b = np.concatenate([J[iu].real, J[iu].imag, [1.0]])
        p, _ = nnls(A_real, b)
        if p.sum() <= 0:
            p = np.full(K, 1.0 / K)
        p = p / p.sum()
        th = np.angle(Z)
        res = _gram_residual(J, p, th) * l
        if res < target:
            break
        if it % 50 == 49:  # stalled: leave the rest to the polish step
            if res > last * (1 - 1e-4):
                break
            last = res
    return p, th


def _polish(J, p, th):
    l, K = th.shape
    iu = np.triu_indices(l, 1)

    def unpack(x):
        s = x[:K]
        t = np.vstack([np.zeros(K), x[K:].reshape(l - 1, K)])
        return s * s / np.dot(s, s), t

    def resid(x):
        pp, tt = unpack(x)
        Z = np.exp(1j * tt)
        D = (J - (Z * pp) @ Z.conj().T)[iu]
        return np.concatenate([D.real, D.imag])

    x0 = np.concatenate([np.sqrt(np.maximum(p, 1e-12)), (th[1:] - th[:1]).ravel()])
    sol = least_squares(resid, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    pp, tt = unpack(sol.x)
    if _gram_residual(J, pp, tt) < _gram_residual(J, p, th):
        return pp, tt
    return p, th


# -- usefulness for every basis ---------------------------------------------------

@dataclass
class WitnessResult:
    verdict: str
    rank: int
    required_rank: int
    singular_values: list[float]

    @property
    def smallest_relevant_singular_value(self) -> float:
        sv = self.singular_values
        return sv[self.required_rank - 1] if len(sv) >= self.required_rank else 0.0


def usefulness_witness(V, tol: Tolerances = DEFAULT_TOL) -> WitnessResult:
    """Linear-independence test on the vectors ``(conj(v_{j,t}) v_{j,s})_j``.

    Rank ``d_B^2`` means the GIO built from ``V`` is extremal and is not a
    mixture of diagonal unitaries, so the pure state built from ``V`` keeps a
    memory gap at every basis.
    """
    V = np.asarray(V, dtype=complex)
    if np.max(np.abs(np.linalg.norm(V, axis=1) - 1)) > 1e-10:
        raise NumericalError("rows of V must be unit vectors")
    l, dB = V.shape
    cols = [V[:, t].conj() * V[:, s] for t in range(dB) for s in range(dB)]
    M = np.stack(cols, axis=1)
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > tol.rank * sv.max())) if sv.size and sv.max() > 0 else 0
    verdict = USEFUL_ALL_BASES if dB > 1 and rank == dB * dB else INCONCLUSIVE
    return WitnessResult(verdict, rank, dB * dB, sv.tolist())


# -- orchestration --------------------------------------------------------------------

@dataclass
class CheckReport:
    verdict: str
    C_c_bits: float
    C_c_measured_bits: float | None = None
    gap_bits: float | None = None
    useless_at_basis: bool | None = None
    basis: np.ndarray | None = None
    conditions: dict = field(default_factory=dict)
    certificate: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int | None = None

    def to_dict(self) -> dict:
        from .io import matrix_to_json
        out = {
            "verdict": self.verdict,
            "C_c_bits": self.C_c_bits,
            "C_c_nats": self.C_c_bits * math.log(2),
            "C_c_measured_bits": self.C_c_measured_bits,
            "gap_bits": self.gap_bits,
            "useless_at_basis": self.useless_at_basis,
            "basis": None if self.basis is None else matrix_to_json(self.basis),
            "conditions": self.conditions,
            "certificate": self.certificate,
            "warnings": self.warnings,
            "tolerances": self.tolerances,
            "seed": self.seed,
        }
        return out


def pure_state_vectors(psi, dec: IrrepDecomposition, dB: int, tol: Tolerances = DEFAULT_TOL):
    """Split a pure state as ``sum_lambda sqrt(P(lambda)) |psi_lambda>|v_lambda>``.

    Returns ``(P, V, product)`` where rows of ``V`` are the unit vectors
    ``v_lambda`` of the blocks with non-negligible weight and ``product`` is
    False when some block component is entangled across ``H_lambda (x) B``.
    """
    if not dec.multiplicity_free:
        raise ValueError("vector form needs a multiplicity-free representation")
    psi = pure_vector(psi, tol)
    M = dec.W.conj().T @ psi.reshape(dec.dim, dB)
    P, V, product = [], [], True
    for i, b in enumerate(dec.blocks):
        X = M[dec.block_slice(i), :]
        w = float(np.sum(np.abs(X) ** 2))
        if w <= tol.prob:
            continue
        s, _, right = schmidt(X.ravel() / math.sqrt(w), (b.dim, dB))
        if len(s) > 1 and s[1] > 1e-7:
            product = False
        P.append(w)
        V.append(right[:, 0] * 1.0)
    return np.array(P), np.array(V), product


def basis_from_decomposition(V, dec_gram: GramDecomposition) -> np.ndarray | None:
    """Bob's basis realizing ``v_lambda = sum_k sqrt(p_k) e^{i phi_{lambda,k}} |e_k>``.

    Needs a decomposition with at most ``d_B`` atoms; returns the basis as
    columns, or ``None`` if there are too many atoms.
    """
    V = np.asarray(V, dtype=complex)
    dB = V.shape[1]
    if dec_gram.atoms() > dB:
        return None
    U = dec_gram.vectors(dB)  # rows u_lambda in coordinates of the new basis
    # Y with Y u_lambda = v_lambda: Procrustes on the column matrices
    a, _, bh = np.linalg.svd(V.T @ U.conj())
    return a @ bh


def fourier_of_schmidt_basis(rho, dims) -> np.ndarray:
    """Fourier transform of Bob's marginal eigenbasis (the Schmidt basis for pure states)."""
    dA, dB = dims
    from .linalg import hermitian_eig, partial_trace
    _, F = hermitian_eig(partial_trace(rho, dims, [1]))
    k = np.arange(dB)
    return F @ (np.exp(2j * np.pi * np.outer(k, k) / dB) / math.sqrt(dB))


def _haar_bases(dB, n, seed):
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 63 - 1, size=n)
    return [haar_unitary(dB, np.random.default_rng(int(s))) for s in seeds]


def classify(rho, rep: Representation, dec: IrrepDecomposition | None = None, basis=None, dims=None,
             opts: SearchOptions | None = None, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Run every applicable criterion and return a verdict with its evidence."""
    opts = opts or SearchOptions()
    rho = as_density(rho, tol)
    dims = _dims(rho, rep.dim, dims)
    dA, dB = dims
    cc = capacity_direct(rho, rep, dims, 2, tol)
    report = CheckReport(UNKNOWN, cc, tolerances=tol.as_dict(), seed=opts.seed)
    pure = is_pure(rho, tol)

    if basis is not None:
        basis = _basis(basis)
        _basis_conditions(report, rho, rep, dec, basis, dims, pure, tol)
        if report.useless_at_basis:
            report.verdict = USELESS
            report.certificate = {"kind": "A2-at-basis", "A2_residual": report.conditions["A2"]["residual"]}
            return report

    if pure and dec is not None and dec.multiplicity_free:
        _pure_multiplicity_free(report, rho, rep, dec, dims, opts, tol)
        return report

    # heuristic search over bases
    candidates = [("fourier-of-schmidt", fourier_of_schmidt_basis(rho, dims))]
    candidates += [(f"haar-{i}", U) for i, U in enumerate(_haar_bases(dB, opts.n_bases, opts.seed))]

    def evaluate(item):
        name, E = item
        return name, E, capacity_measured(rho, rep, E, dims, 2, tol, check=False)

    with ThreadPoolExecutor(max_workers()) as pool:
        results = list(pool.map(evaluate, candidates))
    name, E, best = max(results, key=lambda r: r[2])
    report.conditions["basis-search"] = {"bases_tried": len(results), "best_basis": name,
                                         "best_measured_bits": best, "gap_bits": cc - best}
    if report.basis is None:
        report.C_c_measured_bits, report.gap_bits = best, cc - best
        report.basis, report.useless_at_basis = E, cc - best <= tol.zero
    if cc - best <= tol.zero:
        w = check_A2(rho, rep, E, dims, tol)
        if w.passed:
            report.verdict = USELESS
            report.certificate = {"kind": "A2-at-searched-basis", "A2_residual": w.residual,
                                  "basis": _rows(E.T)}
        else:
            report.warnings.append("searched basis closes the gap but fails the A2 check")
    return report


def _basis_conditions(report, rho, rep, dec, basis, dims, pure, tol):
    cm = capacity_measured(rho, rep, basis, dims, 2, tol)
    gap = report.C_c_bits - cm
    report.C_c_measured_bits, report.gap_bits = cm, gap
    report.basis = basis.vectors
    report.useless_at_basis = gap <= tol.zero
    w = check_A2(rho, rep, basis, dims, tol)
    report.conditions["A2"] = {"residual": w.residual, "passed": w.passed}
    if w.passed:
        rec = recovery_map_check(rho, rep, basis, dims, tol, w)
        report.conditions["A3"] = {"max_residual": rec.max_residual, "worst_g": rec.worst_g,
                                   "passed": rec.passed}
    if w.passed != report.useless_at_basis:
        report.warnings.append("A2 verdict disagrees with the capacity gap at this basis")
    if pure and dec is not None:
        c1 = check_C1(pure_vector(rho), dec, basis, dims, tol)
        report.conditions["C1"] = {"passed": c1.passed,
                                   "max_distribution_distance": c1.max_distribution_distance,
                                   "max_marginal_distance": c1.max_marginal_distance}
        if c1.passed != report.useless_at_basis:
            report.warnings.append("C1 verdict disagrees with the capacity gap at this basis")


def _pure_multiplicity_free(report, rho, rep, dec, dims, opts, tol):
    dA, dB = dims
    psi = pure_vector(rho, tol)
    P, V, product = pure_state_vectors(psi, dec, dB, tol)
    report.conditions["block-product"] = {"passed": product}
    if not product:
        report.verdict = USEFUL_ALL_BASES
        report.certificate = {"kind": "entangled-block-component"}
        return
    wit = usefulness_witness(V, tol)
    report.conditions["usefulness-witness"] = {"verdict": wit.verdict, "rank": wit.rank,
                                               "required_rank": wit.required_rank,
                                               "singular_values": wit.singular_values}
    if wit.verdict == USEFUL_ALL_BASES:
        report.verdict = USEFUL_ALL_BASES
        report.certificate = {"kind": "extremal-GIO", "rank": wit.rank, "V": _rows(V)}
        return
    J = gram(V, tol)
    l = V.shape[0]
    # prefer decompositions with at most d_B atoms: they yield Bob's basis directly
    attempts = [SearchOptions(opts.restarts, opts.iterations, min(dB, l * l), opts.seed)]
    if dB < l * l:
        attempts.append(SearchOptions(opts.restarts, opts.iterations, opts.n_atoms, opts.seed))
    gd = None
    for a in attempts:
        gd = gram_decompose(J, a, tol)
        if gd.found:
            break
    report.conditions["F-gram"] = gd.to_dict()
    if gd.status == SUSPECT_NUMERIC:
        report.warnings.append("SUSPECT-NUMERIC: no Gram decomposition found although one exists for l <= 3")
    if not gd.found:
        return
    report.verdict = USELESS
    report.certificate = {"kind": "gram-decomposition", **gd.to_dict()}
    E = basis_from_decomposition(V, gd)
    if E is None:
        report.warnings.append("decomposition uses more atoms than d_B; no basis of B realizes it")
        return
    gap = report.C_c_bits - capacity_measured(psi, rep, E, dims, 2, tol)
    report.certificate["basis_gap_bits"] = gap
    if gap > tol.zero:
        report.warnings.append("basis built from the Gram decomposition does not close the gap")
    if report.basis is None:  # no basis was supplied: report the one just found
        report.basis, report.C_c_measured_bits, report.gap_bits = E, report.C_c_bits - gap, gap
        report.useless_at_basis = gap <= tol.zero
    else:
        report.certificate["basis"] = _rows(E.T)


def _rows(V):
    from .io import matrix_to_json
    return matrix_to_json(np.asarray(V))
