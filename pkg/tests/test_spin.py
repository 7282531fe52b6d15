import math

import numpy as np
import pytest
from hypothesis import given, settings

from localreal import sampling, spin
from localreal.spin import (
    ChshSettings,
    as_unit_vector,
    chsh_optimize,
    chsh_value,
    pauli_dot,
    planar_settings,
    singlet_state,
    spin_correlation,
)
from util import random_rotation, unit_pair, unit_vectors

TWO_SQRT2 = 2.0 * math.sqrt(2.0)

X = np.array([1.0, 0.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])


def test_pauli_dot_axes():
    assert np.array_equal(pauli_dot(Z).entries, np.diag([1.0, -1.0]).astype(complex))
    assert np.array_equal(pauli_dot(X).entries, np.array([[0, 1], [1, 0]], dtype=complex))


def test_pauli_dot_diagonal_direction():
    op = pauli_dot((X + Z) / math.sqrt(2.0))
    expected = (pauli_dot(X).entries + pauli_dot(Z).entries) / math.sqrt(2.0)
    assert np.allclose(op.entries, expected, atol=1e-15)
    eig = np.linalg.eigvalsh(op.entries)
    assert np.allclose(sorted(eig), [-1.0, 1.0], atol=1e-12)


@settings(max_examples=50)
@given(unit_vectors())
def test_pauli_dot_spectrum(a):
    op = pauli_dot(a)
    assert abs(np.trace(op.entries)) <= 1e-12
    eig = np.linalg.eigvalsh(op.entries)
    assert np.allclose(sorted(eig), [-1.0, 1.0], atol=1e-12)


def test_pauli_dot_rejects_non_unit():
    with pytest.raises(ValueError):
        pauli_dot([1.0, 1.0, 0.0])


def test_singlet_amplitudes():
    psi = singlet_state()
    expected = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
    assert np.array_equal(psi.amplitudes, expected.astype(complex))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-15)


def test_singlet_antisymmetric_under_swap():
    psi = singlet_state().amplitudes
    swapped = psi.reshape(2, 2).T.reshape(4)
    assert np.array_equal(swapped, -psi)


def test_spin_correlation_axis_cases():
    assert spin_correlation(Z, Z) == pytest.approx(-1.0, abs=1e-12)
    assert spin_correlation(Z, X) == pytest.approx(0.0, abs=1e-12)
    assert spin_correlation(Z, -Z) == pytest.approx(1.0, abs=1e-12)


def test_spin_correlation_equals_negated_inner_product():
    rng = sampling.generator(17, 0)
    worst = 0.0
    for _ in range(1000):
        a, b = unit_pair(rng)
        worst = max(worst, abs(spin_correlation(a, b) + float(np.dot(a, b))))
    assert worst <= 1e-12


def test_spin_correlation_rotation_invariant():
    rng = np.random.default_rng(23)
    for _ in range(100):
        a, b = unit_pair(rng)
        r = random_rotation(rng)
        ra = as_unit_vector(r @ a / np.linalg.norm(r @ a))
        rb = as_unit_vector(r @ b / np.linalg.norm(r @ b))
        assert spin_correlation(ra, rb) == pytest.approx(spin_correlation(a, b), abs=1e-12)


def test_chsh_value_quantum_at_known_angles():
    s = planar_settings(0.0, math.pi / 2.0, math.pi / 4.0, 3.0 * math.pi / 4.0)
    assert chsh_value(spin_correlation, s) == pytest.approx(TWO_SQRT2, abs=1e-12)


def test_chsh_value_degenerate_settings():
    s = ChshSettings(Z, Z, X, X)
    assert chsh_value(spin_correlation, s) == pytest.approx(0.0, abs=1e-12)


def test_chsh_value_constant_correlation_saturates():
    s = planar_settings(0.0, 1.0, 2.0, 3.0)
    assert chsh_value(lambda a, b: -1.0, s) == 2.0


def test_chsh_value_swap_symmetry_exact():
    rng = sampling.generator(29, 0)
    for _ in range(200):
        vecs = [sampling.random_unit_vector(rng) for _ in range(4)]
        s = ChshSettings(*vecs)
        swapped = ChshSettings(vecs[0], vecs[1], vecs[3], vecs[2])
        assert chsh_value(spin_correlation, s) == chsh_value(spin_correlation, swapped)


def test_chsh_quantum_ceiling():
    rng = sampling.generator(31, 0)
    worst = 0.0
    for _ in range(10_000):
        s = ChshSettings(*(sampling.random_unit_vector(rng) for _ in range(4)))
        worst = max(worst, chsh_value(spin_correlation, s))
    assert worst <= TWO_SQRT2 + 1e-9


def test_chsh_optimize_quantum_reaches_maximum():
    settings_out, value = chsh_optimize(spin_correlation)
    assert value == pytest.approx(TWO_SQRT2, abs=1e-9)
    assert chsh_value(spin_correlation, settings_out) == pytest.approx(value, abs=1e-12)


def test_chsh_optimize_null_correlation():
    _, value = chsh_optimize(lambda a, b: 0.0)
    assert value == 0.0


def test_chsh_optimize_constant_correlation():
    _, value = chsh_optimize(lambda a, b: -1.0)
    assert value == 2.0


def test_chsh_optimize_inner_product_correlation():
    # The three-point component-reporting model reproduces +a.b, which reaches
    # the same optimum as the quantum correlation: its variables are not
    # bounded by 1, so the classical ceiling does not protect it.
    from localreal.lhv import model_correlation, sqrt3_model

    m = sqrt3_model()
    _, value = chsh_optimize(lambda a, b: model_correlation(m, a, b))
    assert value == pytest.approx(TWO_SQRT2, abs=1e-9)


def test_chsh_optimize_deterministic():
    s1, v1 = chsh_optimize(lambda a, b: -float(np.dot(a, b)))
    s2, v2 = chsh_optimize(lambda a, b: -float(np.dot(a, b)))
    assert v1 == v2
    assert np.array_equal(s1.a, s2.a)
    assert np.array_equal(s1.b_prime, s2.b_prime)
