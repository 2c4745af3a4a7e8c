import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from config import settings
from errors import DimensionError, NonHermitianError, NotPSDError
from operator_algebra import (
    X,
    Z,
    dagger,
    hermitian_eig,
    is_hermitian,
    kron,
    kron_all,
    pauli_string,
    psd_pinv_sqrt,
    psd_sqrt,
    support_rank,
)
from testkit import SeededGenerator

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def test_kron_matches_derived(derived):
    expected = np.array([[complex(re, im) for re, im in row] for row in derived["kron_x_z"]["value"]])
    assert np.array_equal(kron(X, Z), expected)


def test_kron_respects_qubit_limit(monkeypatch):
    monkeypatch.setattr(settings, "max_qubits", 2)
    kron(np.eye(2), np.eye(2))
    with pytest.raises(DimensionError):
        kron(np.eye(4), np.eye(2))


def test_pauli_string_is_kron_of_letters():
    assert np.array_equal(pauli_string("xz"), kron(X, Z))
    assert np.array_equal(pauli_string("XZI"), kron_all([X, Z, np.eye(2)]))
    with pytest.raises(ValueError):
        pauli_string("XQ")


@given(seeds, st.integers(min_value=1, max_value=6))
@hsettings(max_examples=25, deadline=None)
def test_hermitian_eig_reconstructs(seed, dim):
    m = SeededGenerator(seed).hermitian(dim)
    eig = hermitian_eig(m)
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    assert np.allclose(eig.reconstruct(), m, atol=1e-10)


def test_hermitian_eig_rejects_bad_input():
    with pytest.raises(NonHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        hermitian_eig(np.ones(3))


def test_is_hermitian_scales_with_entries():
    m = 1e6 * np.array([[1.0, 1.0], [1.0, 1.0]])
    m[0, 1] += 1e-6
    assert is_hermitian(m)
    assert not is_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(seeds, st.integers(min_value=1, max_value=8))
@hsettings(max_examples=25, deadline=None)
def test_psd_sqrt_squares_back(seed, dim):
    rho = SeededGenerator(seed).density(dim)
    root = psd_sqrt(rho)
    assert np.allclose(root @ root, rho, atol=1e-8)
    assert np.allclose(root, dagger(root), atol=1e-12)


def test_psd_sqrt_clamps_roundoff_and_rejects_negative():
    assert np.allclose(psd_sqrt(np.diag([1.0, -1e-15])), np.diag([1.0, 0.0]))
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1.0]))


def test_pinv_sqrt_inverts_on_support_only():
    m = np.diag([4.0, 0.0])
    assert np.allclose(psd_pinv_sqrt(m), np.diag([0.5, 0.0]))
    assert support_rank(m) == 1


@given(seeds)
@hsettings(max_examples=20, deadline=None)
def test_pinv_sqrt_of_rank_deficient_state(seed):
    rho = SeededGenerator(seed).density(4, rank=2)
    inv = psd_pinv_sqrt(rho)
    support = inv @ rho @ inv
    # a rank-2 projector
    assert np.allclose(support @ support, support, atol=1e-8)
    assert np.isclose(np.trace(support).real, 2.0, atol=1e-8)
    assert support_rank(rho) == 2
    assert np.allclose(psd_sqrt(rho) @ psd_sqrt(rho), rho, atol=1e-8)
