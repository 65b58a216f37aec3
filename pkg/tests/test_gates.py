import numpy as np
import pytest

from crabforge.gates import GATE_NAMES, build_gate
from crabforge.model import InvalidInputError


def test_cnot():
    expected = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
    np.testing.assert_array_equal(build_gate("cnot").matrix, expected)


def test_hadamard_on_qubit_two():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    np.testing.assert_allclose(build_gate("hadamard", 2).matrix, np.kron(np.eye(2), h))


def test_pi8_on_qubit_one():
    w = np.exp(1j * np.pi / 4)
    np.testing.assert_allclose(build_gate("pi8", 1).matrix, np.diag([1, 1, w, w]), atol=1e-15)


@pytest.mark.parametrize("name", [*GATE_NAMES, "identity"])
@pytest.mark.parametrize("qubit", [1, 2])
def test_unitary(name, qubit):
    m = build_gate(name, qubit).matrix
    assert np.abs(m.conj().T @ m - np.eye(4)).max() < 1e-12


@pytest.mark.parametrize("qubit", [1, 2])
def test_phase_is_pi8_squared_twice(qubit):
    s = build_gate("phase", qubit).matrix
    t = build_gate("pi8", qubit).matrix
    overlap = abs(np.trace((s @ s).conj().T @ np.linalg.matrix_power(t, 4)))
    assert overlap == pytest.approx(4.0, abs=1e-12)


def test_unknown_gate():
    with pytest.raises(InvalidInputError):
        build_gate("toffoli")
    with pytest.raises(InvalidInputError):
        build_gate("hadamard", 3)
