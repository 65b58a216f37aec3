"""Two-transmon Bose-Hubbard model with tunable coupling.

Each transmon is truncated to ``levels_per_mode`` levels. The two modes are
embedded with mode 1 as the left tensor factor, so basis state ``|n1 n2>`` has
index ``levels_per_mode * n1 + n2``.

Control channels, in order: detuning of mode 1, detuning of mode 2, drive
amplitude on mode 1, drive amplitude on mode 2, coupling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

CHANNEL_NAMES = ("delta1", "delta2", "f1", "f2", "g")
NUM_CHANNELS = len(CHANNEL_NAMES)

# Planck constant in eV per GHz, used only when reporting energies.
EV_PER_GHZ = 4.1357e-6

_FREQUENCY_SCALE = {"angular": 1.0, "ordinary": 2.0 * np.pi}


class InvalidDimensionError(ValueError):
    pass


class InvalidInputError(ValueError):
    pass


def annihilation_op(d: int) -> np.ndarray:
    """Truncated lowering operator with ``A[n-1, n] = sqrt(n)``."""
    if d < 2:
        raise InvalidDimensionError(f"truncation dimension must be >= 2, got {d}")
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


def number_op(d: int) -> np.ndarray:
    if d < 2:
        raise InvalidDimensionError(f"truncation dimension must be >= 2, got {d}")
    return np.diag(np.arange(d, dtype=float)).astype(complex)


@dataclass(frozen=True)
class ControlValues:
    """Instantaneous values of the five control channels (rad/ns)."""

    delta1: float = 0.0
    delta2: float = 0.0
    f1: float = 0.0
    f2: float = 0.0
    g: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.delta1, self.delta2, self.f1, self.f2, self.g], dtype=float)


@dataclass(frozen=True)
class TransmonModel:
    """Physical parameters of the two-transmon system.

    ``frequency_convention="angular"`` uses all coefficients as rad/ns.
    ``"ordinary"`` reads them as GHz and multiplies the whole Hamiltonian
    by 2*pi.
    """

    levels_per_mode: int = 3
    anharmonicity: float = 0.2
    gate_time: float = 40.0
    frequency_convention: str = "angular"

    def __post_init__(self):
        if self.levels_per_mode < 2:
            raise InvalidDimensionError("levels_per_mode must be >= 2")
        if not self.gate_time > 0:
            raise InvalidInputError("gate_time must be positive")
        if not np.isfinite(self.anharmonicity):
            raise InvalidInputError("anharmonicity must be finite")
        if self.frequency_convention not in _FREQUENCY_SCALE:
            raise InvalidInputError(
                f"frequency_convention must be one of {sorted(_FREQUENCY_SCALE)}"
            )

    @property
    def num_channels(self) -> int:
        return NUM_CHANNELS

    @property
    def dim(self) -> int:
        return self.levels_per_mode**2

    @property
    def frequency_scale(self) -> float:
        return _FREQUENCY_SCALE[self.frequency_convention]

    @property
    def computational_indices(self) -> np.ndarray:
        """Indices of |00>, |01>, |10>, |11> in the full basis."""
        d = self.levels_per_mode
        return np.array([0, 1, d, d + 1])

    @cached_property
    def operators(self) -> tuple[np.ndarray, np.ndarray]:
        """Drift matrix and the stack of five control operators (unscaled)."""
        d = self.levels_per_mode
        eye = np.eye(d)
        a = annihilation_op(d)
        n = number_op(d)
        a1, a2 = np.kron(a, eye), np.kron(eye, a)
        n1, n2 = np.kron(n, eye), np.kron(eye, n)
        ident = np.eye(d * d)

        drift = 0.5 * self.anharmonicity * (n1 @ (n1 - ident) + n2 @ (n2 - ident))
        controls = np.array(
            [
                n1,
                n2,
                1j * (a1 - a1.conj().T),
                1j * (a2 - a2.conj().T),
                a1 @ a2.conj().T + a2 @ a1.conj().T,
            ]
        )
        return drift, controls

    @cached_property
    def real_frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Real symmetric form of the Hamiltonian.

        With ``P = diag(i**(n1 + n2))`` every term of ``P^dag H P`` is real:
        ``P^dag a P = i a`` turns the drive into ``-(a + a^dag)`` and leaves
        number operators and the exchange coupling unchanged. Returns the
        diagonal of ``P`` and the rotated drift and control operators, with
        the frequency scale folded in.
        """
        d = self.levels_per_mode
        excitations = np.add.outer(np.arange(d), np.arange(d)).ravel()
        phases = 1j**excitations
        drift, controls = self.operators
        rot = lambda op: (phases.conj()[:, None] * op * phases[None, :])
        drift_r = rot(drift)
        controls_r = np.array([rot(op) for op in controls])
        assert np.abs(drift_r.imag).max() == 0 and np.abs(controls_r.imag).max() < 1e-15
        s = self.frequency_scale
        return phases, s * drift_r.real.copy(), s * controls_r.real.copy()


def assemble_hamiltonian(model: TransmonModel, cv: ControlValues | np.ndarray) -> np.ndarray:
    """Hamiltonian at one instant for the given channel values."""
    values = cv.as_array() if isinstance(cv, ControlValues) else np.asarray(cv, dtype=float)
    if values.shape != (NUM_CHANNELS,):
        raise InvalidInputError(f"expected {NUM_CHANNELS} control values, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("control values must be finite")
    drift, controls = model.operators
    h = drift + np.tensordot(values, controls, axes=1)
    return model.frequency_scale * h
