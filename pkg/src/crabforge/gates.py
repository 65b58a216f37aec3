"""Ideal two-qubit targets for the universal set CNOT, Hadamard, phase, pi/8."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import InvalidInputError

GATE_NAMES = ("cnot", "hadamard", "phase", "pi8")

_SINGLE_QUBIT = {
    "hadamard": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "phase": np.diag([1, 1j]).astype(complex),
    "pi8": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
}

_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True, eq=False)
class GateTarget:
    name: str
    target_qubit: int
    matrix: np.ndarray


def build_gate(name: str, target_qubit: int = 2) -> GateTarget:
    """Ideal 4x4 unitary in the |q1 q2> ordering (qubit 1 is the left factor).

    Single-qubit gates act on ``target_qubit``; CNOT always uses qubit 1 as
    control and qubit 2 as target.
    """
    name = name.lower()
    if target_qubit not in (1, 2):
        raise InvalidInputError(f"target_qubit must be 1 or 2, got {target_qubit}")
    if name == "cnot":
        matrix = _CNOT.copy()
    elif name == "identity":
        matrix = np.eye(4, dtype=complex)
    elif name in _SINGLE_QUBIT:
        u = _SINGLE_QUBIT[name]
        eye = np.eye(2)
        matrix = np.kron(u, eye) if target_qubit == 1 else np.kron(eye, u)
    else:
        raise InvalidInputError(f"unknown gate {name!r}; expected one of {GATE_NAMES + ('identity',)}")
    matrix.setflags(write=False)
    return GateTarget(name, target_qubit, matrix)
