from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from channels import (
    ChannelSpec,
    PauliParams,
    QuantumChannel,
    adjoint_apply,
    amplitude_damping_1q,
    apply,
    check_completeness,
    completeness_deviation,
    compose,
    embed,
    from_spec,
    identity_channel,
    lift_iid,
    pauli_channel_1q,
    pauli_single_error_channel,
    unitary_channel,
)
from errors import DimensionError, ProbabilityError
from testkit import SeededGenerator, channel_action_equal, random_channel, remix_kraus

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@pytest.mark.parametrize(
    "channel",
    [
        pauli_channel_1q(PauliParams(p_x=0.1, p_y=0.02, p_z=0.3)),
        amplitude_damping_1q(0.37),
        lift_iid(amplitude_damping_1q(0.2), 3),
        pauli_single_error_channel(5, 0.01),
        embed(amplitude_damping_1q(0.5), 1, 3),
    ],
    ids=["pauli", "damping", "damping^3", "single-error", "embedded"],
)
def test_constructors_are_complete(channel):
    assert check_completeness(channel)


def test_five_qubit_isotropic_lift():
    channel = lift_iid(pauli_channel_1q(PauliParams.isotropic(0.05)), 5)
    assert channel.size == 1024
    assert channel.dim == 32
    assert completeness_deviation(channel) < 1e-10


def test_zero_weight_operators_are_pruned():
    pure_x = pauli_channel_1q(PauliParams(p_x=0.1))
    assert pure_x.size == 2
    assert lift_iid(pure_x, 5).size == 32
    assert pauli_channel_1q(PauliParams()).size == 1


def test_pauli_params_validation():
    with pytest.raises(ValueError):
        PauliParams(p_x=0.5, p_y=0.4, p_z=0.2)
    with pytest.raises(ValueError):
        PauliParams(p_x=-0.1)
    assert PauliParams.isotropic(0.1).p_y == 0.1


def test_amplitude_damping():
    with pytest.raises(ProbabilityError):
        amplitude_damping_1q(1.5)
    excited = np.diag([0.0, 1.0])
    assert np.allclose(apply(amplitude_damping_1q(1.0), excited), np.diag([1.0, 0.0]))
    assert np.allclose(apply(amplitude_damping_1q(0.25), excited), np.diag([0.25, 0.75]))


def test_apply():
    rho = np.diag([1.0, 0.0])
    assert np.allclose(apply(pauli_channel_1q(PauliParams(p_x=1.0)), rho), np.diag([0.0, 1.0]))
    assert np.allclose(apply(identity_channel(2), rho), rho)
    # off-diagonal inputs are allowed
    ket_bra = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(apply(pauli_channel_1q(PauliParams(p_z=0.5)), ket_bra), 0.0)
    with pytest.raises(DimensionError):
        apply(identity_channel(2), np.eye(4))


@given(seeds)
@hsettings(max_examples=20, deadline=None)
def test_adjoint_is_dual(seed):
    gen = SeededGenerator(seed)
    channel = random_channel(gen, 4)
    rho, a = gen.density(4), gen.hermitian(4)
    lhs = np.trace(a @ apply(channel, rho))
    rhs = np.trace(adjoint_apply(channel, a) @ rho)
    assert np.isclose(lhs, rhs, atol=1e-12)


def test_compose_with_identity(gen):
    channel = random_channel(gen, 4)
    assert channel_action_equal(compose(identity_channel(4), channel), channel) < 1e-12
    assert channel_action_equal(compose(channel, identity_channel(4)), channel) < 1e-12


def test_compose_of_unitaries():
    u = unitary_channel(np.array([[0, 1], [1, 0]]))
    assert channel_action_equal(compose(u, u), identity_channel(2)) < 1e-12
    with pytest.raises(DimensionError):
        compose(identity_channel(2), identity_channel(4))


def test_kraus_gauge_freedom(gen):
    channel = random_channel(gen, 4, m=3)
    remixed = remix_kraus(channel, gen.unitary(3))
    assert channel_action_equal(channel, remixed) < 1e-10


def test_lift_and_embed_need_single_qubit():
    with pytest.raises(DimensionError):
        lift_iid(identity_channel(4), 2)
    with pytest.raises(DimensionError):
        embed(identity_channel(2), 3, 3)


def test_embed_acts_on_one_qubit():
    flip = embed(pauli_channel_1q(PauliParams(p_x=1.0)), 0, 2)
    rho = np.zeros((4, 4))
    rho[0, 0] = 1.0
    out = apply(flip, rho)
    # |00> -> |10>, qubit 0 is the most significant
    assert np.isclose(out[2, 2], 1.0)


def test_channel_shape_validation():
    with pytest.raises(DimensionError):
        QuantumChannel(np.ones((2, 2, 3)))
    assert QuantumChannel(np.eye(2)).size == 1


def test_from_spec():
    damping = from_spec(ChannelSpec(kind="damping", gamma=0.1, qubits=2))
    assert damping.dim == 4 and damping.size == 4
    pauli = from_spec(ChannelSpec(px=0.1, qubits=5), qubits=3)
    assert pauli.dim == 8 and pauli.size == 8
    single = from_spec(ChannelSpec(pz=1.0, qubits=3, target_qubit=2))
    assert single.dim == 8 and single.label.endswith("@q2")
    with pytest.raises(DimensionError):
        from_spec(ChannelSpec(pz=0.1, qubits=3, target_qubit=3))


@given(seeds, st.integers(min_value=1, max_value=3))
@hsettings(max_examples=15, deadline=None)
def test_lift_equals_sequential_embeds(seed, n):
    gen = SeededGenerator(seed)
    for single in (pauli_channel_1q(gen.pauli()), amplitude_damping_1q(float(gen.uniform(1)[0]))):
        sequential = reduce(compose, [embed(single, q, n) for q in range(n)])
        assert channel_action_equal(lift_iid(single, n), sequential) < 1e-12
