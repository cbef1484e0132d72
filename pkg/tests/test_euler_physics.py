import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import InvalidStateError
from app.physics.euler import (
    ConservedState,
    GasModel,
    PrimitiveState,
    ale_eigen,
    ale_jacobian,
    ale_normal_flux,
    conserved_to_primitive,
    entropy,
    eos_pressure,
    max_signal_speed,
    normal_flux,
    physical_flux,
    primitive_to_conserved,
    sound_speed,
)
from tests.helpers import random_states

positive = st.floats(min_value=0.1, max_value=10.0)
velocity = st.floats(min_value=-5.0, max_value=5.0)


@settings(max_examples=50, deadline=None)
@given(rho=positive, u=velocity, v=velocity, p=positive)
def test_primitive_conserved_inverse(rho, u, v, p):
    gas = GasModel(1.4)
    W = np.array([rho, u, v, p])
    back = conserved_to_primitive(primitive_to_conserved(W, gas), gas)
    np.testing.assert_allclose(back, W, rtol=1e-12, atol=1e-12)


def test_dataclass_states_convert(gas):
    q = primitive_to_conserved(PrimitiveState(1.0, (2.0, 0.0), 0.4), gas)
    assert isinstance(q, ConservedState)
    assert q.rho == 1.0
    assert q.mom == (2.0, 0.0)
    assert q.rhoE == pytest.approx(0.4 / 0.4 + 2.0)
    w = conserved_to_primitive(q, gas)
    assert w.p == pytest.approx(0.4)


def test_eos_pressure_and_sound_speed(gas):
    assert eos_pressure(2.0, 1.25, gas) == pytest.approx(1.0)
    q = primitive_to_conserved(np.array([1.4, 0.0, 0.0, 1.0]), gas)
    assert float(sound_speed(q, gas)) == pytest.approx(1.0)


@pytest.mark.parametrize("state", [
    [0.0, 0.0, 0.0, 1.0],
    [-1.0, 0.0, 0.0, 1.0],
    [1.0, 2.0, 0.0, 1.0],      # kinetic energy exceeds total energy
    [np.nan, 0.0, 0.0, 1.0],
])
def test_invalid_states_raise(gas, state):
    with pytest.raises(InvalidStateError):
        conserved_to_primitive(np.array(state), gas)


def test_eos_rejects_non_positive_energy(gas):
    with pytest.raises(InvalidStateError):
        eos_pressure(1.0, 0.0, gas)


def test_gamma_must_exceed_one():
    with pytest.raises(ValueError):
        GasModel(1.0)


def test_entropy_of_reference_state(gas):
    q = primitive_to_conserved(np.array([2.0, 0.3, -0.1, 2.0 ** 1.4]), gas)
    assert entropy(q, gas) == pytest.approx(1.0)


def test_normal_flux_matches_flux_tensor(gas, rng):
    Q = random_states(rng, 20)
    theta = rng.uniform(0, 2 * np.pi, 20)
    n = np.column_stack([np.cos(theta), np.sin(theta)])
    F = physical_flux(Q, gas)
    np.testing.assert_allclose(normal_flux(Q, n, gas), np.einsum("kvd,kd->kv", F, n), rtol=1e-13, atol=1e-13)


def test_eigenvectors_are_inverse(gas, rng):
    Q = random_states(rng, 30, speed=2.0)
    theta = rng.uniform(0, 2 * np.pi, 30)
    n = np.column_stack([np.cos(theta), np.sin(theta)])
    Vn = rng.uniform(-1, 1, 30)
    lam, R, L = ale_eigen(Q, n, Vn, gas)
    np.testing.assert_allclose(np.einsum("kij,kjl->kil", L, R), np.broadcast_to(np.eye(4), R.shape), atol=1e-12)
    assert np.all(lam[:, 0] <= lam[:, 1])
    assert np.all(lam[:, 2] <= lam[:, 3])


def test_jacobian_matches_finite_differences(gas, rng):
    Q = random_states(rng, 5, speed=1.5)
    n = np.array([0.6, 0.8])
    Vn = 0.3
    h = 1e-6
    for q in Q:
        A = ale_jacobian(q, n, Vn, gas)
        numeric = np.empty((4, 4))
        for j in range(4):
            dq = np.zeros(4)
            dq[j] = h
            numeric[:, j] = (ale_normal_flux(q + dq, n, Vn, gas) - ale_normal_flux(q - dq, n, Vn, gas)) / (2 * h)
        np.testing.assert_allclose(A, numeric, rtol=1e-6, atol=1e-6)


def test_max_signal_speed(gas):
    q = primitive_to_conserved(np.array([1.4, 2.0, 0.0, 1.0]), gas)
    assert max_signal_speed(q, np.array([1.0, 0.0]), 0.5, gas) == pytest.approx(1.5 + 1.0)
    assert max_signal_speed(q, np.array([-1.0, 0.0]), 0.0, gas) == pytest.approx(3.0)
