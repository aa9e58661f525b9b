import math

import numpy as np
import pytest

from densecap.capacity import capacity_direct, capacity_measured, memory_gap
from densecap.checks import USEFUL_ALL_BASES, check_A2, check_C1, usefulness_witness
from densecap.errors import NumericalError
from densecap.linalg import partial_trace, random_density, schmidt
from densecap.states import (ConstructionRecipe, analytic_vectors, build_dephased, build_illumination, build_lla,
                             build_max_entangled, build_section32, build_useful_protocol, purify,
                             random_c1_state, s3_example, shift_rep_with_dec)
from densecap.groups import build_diagonal_character_rep, decompose_abelian


def test_section32_pure_member_is_entangled():
    c = build_section32(2, [1.0, 0.0])
    s, _, _ = schmidt(c.extra["states"][0], (2, 2))
    assert np.sum(s > 1e-9) == 2
    assert not c.extra["separable"]


def test_section32_uniform_is_classical_quantum():
    c = build_section32(3, np.full(3, 1 / 3))
    cq = sum(np.kron(np.outer(phi, phi.conj()), c.basis.projector(k)) / 3
             for k, phi in enumerate(c.extra["phis"].T))
    assert np.linalg.norm(c.rho - cq) < 1e-10
    assert c.extra["separable"]


@pytest.mark.parametrize("l", [2, 3, 4, 5])
def test_section32_orthonormal_and_useless(l, rng):
    c = build_section32(l, rng.dirichlet(np.ones(l)))
    S = np.array(c.extra["states"])
    assert np.linalg.norm(S.conj() @ S.T - np.eye(l)) < 1e-10
    assert check_A2(c.rho, c.rep, c.basis).residual < 1e-9


def test_lla_general_family(rng):
    rep, dec = shift_rep_with_dec(4)
    dB, nJ = 3, 2
    P_KJ = rng.dirichlet(np.ones(dB), size=nJ).T
    c = build_lla(rng.dirichlet(np.ones(4)), rng.uniform(0, 6, (4, dB)), P_KJ, rng.uniform(0, 6, (dB, nJ)),
                  [0.3, 0.7], dec, rep)
    assert memory_gap(c.rho, rep, c.basis) < 1e-9


def test_max_entangled_paths():
    rep = build_diagonal_character_rep([2], [[0], [1]])
    c = build_max_entangled(decompose_abelian(rep), rep)
    assert np.allclose(partial_trace(c.rho, c.dims, [0]), np.eye(2) / 2)
    rep, dec = shift_rep_with_dec(4)
    c = build_max_entangled(dec, rep)
    assert capacity_direct(c.state, rep) == pytest.approx(2)
    assert capacity_measured(c.state, rep, c.basis) == pytest.approx(2)
    rep, dec = s3_example()
    c = build_max_entangled(dec, rep)
    assert c.dims == (6, 16)
    assert np.linalg.norm(partial_trace(c.rho, c.dims, [0]) - np.eye(6) / 6) < 1e-10
    assert check_C1(c.state, dec, c.basis).passed


def test_dephased_family():
    rep, dec = shift_rep_with_dec(2)
    c = build_max_entangled(dec, rep)
    assert np.allclose(build_dephased(c.state, rep, 0), c.rho)
    assert capacity_direct(build_dephased(c.state, rep, 1), rep) == pytest.approx(0, abs=1e-12)
    assert check_A2(build_dephased(c.state, rep, 0.5), rep, c.basis).residual < 1e-9
    with pytest.raises(ValueError):
        build_dephased(c.state, rep, 1.5)


def test_useful_protocol():
    c = build_useful_protocol(5, 2, "analytic")
    assert c.extra["witness"].rank == 4
    assert np.allclose(c.extra["V"], analytic_vectors())
    c = build_useful_protocol(4, 2, "random", seed=3)
    assert usefulness_witness(c.extra["V"]).verdict == USEFUL_ALL_BASES
    assert c.recipe.to_dict()["params"]["attempt_seeds"]
    with pytest.raises(ValueError):
        build_useful_protocol(3, 2)


def test_useful_protocol_retry_cap(monkeypatch):
    import densecap.states as states
    monkeypatch.setattr(states, "usefulness_witness",
                        lambda V, tol=None: type("W", (), {"verdict": "INCONCLUSIVE"})())
    with pytest.raises(NumericalError):
        build_useful_protocol(4, 2, max_retries=3)


def test_illumination():
    c = build_illumination(2)
    assert np.allclose(c.state, np.array([1, 0, 0, 1]) / math.sqrt(2))
    c = build_illumination(5)
    assert np.linalg.norm(c.extra["gram"] - np.eye(5)) < 1e-12
    # the idler basis is the Fourier transform of the idler Schmidt vectors
    assert np.allclose(np.abs(c.basis.vectors), np.eye(5), atol=1e-12)


def test_purify(rng):
    psi = purify(np.diag([1.0, 0.0]))
    assert psi.size == 2
    psi = purify(np.eye(2) / 2)
    assert np.allclose(np.abs(psi), np.array([1, 0, 0, 1]) / math.sqrt(2))
    rho = random_density(4, rng)
    psi = purify(rho)
    assert np.linalg.norm(partial_trace(np.outer(psi, psi.conj()), (4, 4), [0]) - rho) < 1e-10


def test_random_c1_state_is_useless(rng):
    rep, dec = shift_rep_with_dec(3)
    psi, basis = random_c1_state(dec, 3, rng)
    assert check_C1(psi, dec, basis).passed
    assert memory_gap(psi, rep, basis) < 1e-9


def test_recipe_is_json_friendly():
    import json
    r = ConstructionRecipe("x", {"V": np.array([1j, 2.0]), "n": np.int64(3)})
    json.dumps(r.to_dict())
