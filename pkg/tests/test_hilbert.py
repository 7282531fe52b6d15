import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localreal import hilbert
from localreal.hilbert import DimensionMismatch, Operator, State, commutator_norm, expectation, identity, tensor

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_tensor_identities():
    i4 = tensor(identity(2), identity(2))
    assert np.array_equal(i4.entries, np.eye(4))


def test_tensor_diagonal_product():
    zz = tensor(Operator(SZ, hermitian=True), Operator(SZ, hermitian=True))
    assert np.array_equal(zz.entries, np.diag([1.0, -1.0, -1.0, 1.0]))


def test_tensor_preserves_hermitian_flag():
    xx = tensor(Operator(SX, hermitian=True), Operator(SX, hermitian=True))
    assert xx.hermitian
    assert np.max(np.abs(xx.entries - xx.entries.conj().T)) == 0.0


def test_tensor_dimension_multiplicative():
    rng = np.random.default_rng(5)
    for _ in range(20):
        da, db = rng.integers(1, 6, size=2)
        a = Operator(rng.standard_normal((da, da)))
        b = Operator(rng.standard_normal((db, db)))
        assert tensor(a, b).dim == da * db


@settings(max_examples=50)
@given(st.integers(2, 5), st.integers(0, 2**31))
def test_hermiticity_closure(dim, seed):
    rng = np.random.default_rng(seed)
    m1 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m2 = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = Operator((m1 + m1.conj().T) / 2, hermitian=True)
    b = Operator((m2 + m2.conj().T) / 2, hermitian=True)
    t = tensor(a, b)
    assert np.max(np.abs(t.entries - t.entries.conj().T)) <= 1e-12


def test_expectation_eigenstate():
    zero = State([1.0, 0.0])
    assert expectation(zero, Operator(SZ)) == pytest.approx(1.0, abs=1e-15)
    assert expectation(zero, Operator(SX)) == pytest.approx(0.0, abs=1e-15)


def test_expectation_singlet_parallel_spins():
    singlet = State(np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0))
    zz = tensor(Operator(SZ, hermitian=True), Operator(SZ, hermitian=True))
    assert expectation(singlet, zz).real == pytest.approx(-1.0, abs=1e-12)


def test_expectation_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        expectation(State([1.0, 0.0]), identity(4))


def test_expectation_hermitian_imag_small():
    rng = np.random.default_rng(11)
    for _ in range(100):
        dim = int(rng.integers(2, 8))
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        s = State(v / np.linalg.norm(v))
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        h = Operator((m + m.conj().T) / 2, hermitian=True)
        assert abs(expectation(s, h).imag) <= 1e-12


def test_commutator_self_is_zero():
    assert commutator_norm(Operator(SX), Operator(SX)) == 0.0


def test_commutator_disjoint_tensor_factors():
    a = tensor(Operator(SX, hermitian=True), identity(2))
    b = tensor(identity(2), Operator(SY, hermitian=True))
    assert commutator_norm(a, b) <= 1e-15


def test_commutator_pauli_pair_norm_two():
    # [sx, sz] = -2i sy, spectral norm 2
    assert commutator_norm(Operator(SX), Operator(SZ)) == pytest.approx(2.0, abs=1e-12)


def test_commutator_norm_exactly_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(50):
        dim = int(rng.integers(2, 6))
        a = Operator(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        b = Operator(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        assert commutator_norm(a, b) == commutator_norm(b, a)


def test_commutator_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        commutator_norm(identity(2), identity(3))


def test_operator_rejects_non_square():
    with pytest.raises(ValueError):
        Operator(np.zeros((2, 3)))


def test_operator_hermitian_flag_validated():
    with pytest.raises(ValueError):
        Operator(np.array([[0.0, 1.0], [0.0, 0.0]]), hermitian=True)


def test_state_norm_validated():
    with pytest.raises(ValueError):
        State([1.0, 1.0])


def test_values_are_immutable():
    op = identity(2)
    with pytest.raises(ValueError):
        op.entries[0, 0] = 5.0
    s = State([1.0, 0.0])
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0.0
