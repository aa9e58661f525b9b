import math

import numpy as np
import pytest

from densecap.channels import (GIOChannel, MeasurementBasis, cnot_extend, conditional_states, gio_apply,
                               gio_kraus_from_columns, gram, kraus_apply, measure_channel, trace_copy, twirl)
from densecap.errors import DimensionError, NumericalError
from densecap.groups import build_cyclic_shift_rep, build_diagonal_character_rep, weyl_heisenberg_qubit
from densecap.linalg import haar_unitary, random_density

BELL = np.array([1, 0, 0, 1]) / math.sqrt(2)
ZDIAG = build_diagonal_character_rep([2], [[0], [1]])  # {I, Z}


def test_twirl_of_plus_is_maximally_mixed():
    plus = np.full((2, 2), 0.5)
    assert np.allclose(twirl(plus, ZDIAG, (2,), 0), np.eye(2) / 2)


def test_twirl_is_idempotent_and_trace_preserving(rng):
    rep = build_cyclic_shift_rep(3)
    rho = random_density(6, rng)
    t = twirl(rho, rep, (3, 2), 0)
    assert np.trace(t) == pytest.approx(1)
    assert np.allclose(twirl(t, rep, (3, 2), 0), t)


def test_twirl_on_second_factor(rng):
    rep = build_cyclic_shift_rep(2)
    rho = random_density(6, rng)
    direct = sum(np.kron(np.eye(3), U) @ rho @ np.kron(np.eye(3), U).conj().T for U in rep.matrices) / 2
    assert np.allclose(twirl(rho, rep, (3, 2), 1), direct)


def test_projective_twirl():
    rho = random_density(2, np.random.default_rng(0))
    assert np.allclose(twirl(rho, weyl_heisenberg_qubit(), (2,), 0), np.eye(2) / 2)


def test_measurement_dephases_bob(rng):
    rho = np.outer(BELL, BELL)
    out = measure_channel(rho, MeasurementBasis.computational(2), (2, 2))
    assert np.allclose(out, np.diag([0.5, 0, 0, 0.5]))
    U = haar_unitary(2, rng)
    out = measure_channel(random_density(4, rng), U, (2, 2))
    assert np.allclose(measure_channel(out, U, (2, 2)), out)


def test_conditional_states_of_bell():
    p, states, dropped = conditional_states(BELL, MeasurementBasis.fourier(2), (2, 2))
    assert np.allclose(p, [0.5, 0.5])
    assert np.allclose(states[0], np.full((2, 2), 0.5))
    assert dropped == []
    p, states, dropped = conditional_states(np.kron([1, 0], [1, 0]), MeasurementBasis.computational(2), (2, 2))
    assert dropped == [1] and states[1] is None


def test_cnot_extension_copies_outcome(rng):
    basis = MeasurementBasis(haar_unitary(3, rng))
    rho = random_density(6, rng)
    ext = cnot_extend(rho, basis, (2, 3))
    assert np.allclose(trace_copy(ext, (2, 3)), measure_channel(rho, basis, (2, 3)))


def test_basis_validation():
    with pytest.raises(NumericalError):
        MeasurementBasis(np.ones((2, 2)))
    with pytest.raises(DimensionError):
        measure_channel(np.eye(6) / 6, MeasurementBasis.computational(2), (2, 3))


def test_gram_and_gio(rng):
    V = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    V /= np.linalg.norm(V, axis=1)[:, None]
    J = gram(V).J
    assert np.allclose(np.diag(J), 1)
    assert np.allclose(J[0, 1], np.vdot(V[0], V[1]))
    rho = random_density(4, rng)
    ch = GIOChannel(J)
    assert np.allclose(gio_apply(ch, rho), kraus_apply(gio_kraus_from_columns(V), rho))
    assert np.allclose(np.diag(gio_apply(ch, rho)), np.diag(rho))


def test_gram_rejects_unnormalized():
    with pytest.raises(NumericalError):
        gram(np.ones((2, 2)))
