"""Chopped random basis: randomized Fourier frequencies and signal synthesis.

Every channel carries ``num_components`` frequencies. Its coefficient row
holds ``2 * num_components`` values, cosine amplitudes first and sine
amplitudes second. The initial pulse guess is fixed to 1, so the control
signal is the expansion itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import NUM_CHANNELS, InvalidInputError, TransmonModel
from .propagate import ControlGrid

RANDOMIZATION_MODES = ("qutip", "original")


@dataclass(frozen=True, eq=False)
class CrabBasis:
    """Per-channel basis frequencies in rad/ns, shape ``(5, num_components)``."""

    frequencies: np.ndarray
    gate_time: float
    randomization_mode: str = "qutip"
    seed: int | None = None

    def __post_init__(self):
        freqs = np.array(self.frequencies, dtype=float)
        if freqs.ndim != 2 or freqs.shape[0] != NUM_CHANNELS or freqs.shape[1] < 1:
            raise InvalidInputError(f"frequencies must have shape (5, Nc), got {freqs.shape}")
        if self.randomization_mode not in RANDOMIZATION_MODES:
            raise InvalidInputError(f"unknown randomization mode {self.randomization_mode!r}")
        freqs.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)

    @property
    def num_components(self) -> int:
        return self.frequencies.shape[1]

    @property
    def num_coefficients(self) -> int:
        """Coefficients per channel (cos block plus sin block)."""
        return 2 * self.num_components

    def __eq__(self, other):
        if not isinstance(other, CrabBasis):
            return NotImplemented
        return (
            self.gate_time == other.gate_time
            and self.randomization_mode == other.randomization_mode
            and self.seed == other.seed
            and np.array_equal(self.frequencies, other.frequencies)
        )

    def design_matrix(self, times: np.ndarray) -> np.ndarray:
        """Basis functions at ``times``, shape ``(5, 2*Nc, len(times))``."""
        phase = self.frequencies[:, :, None] * np.asarray(times, dtype=float)[None, None, :]
        return np.concatenate([np.cos(phase), np.sin(phase)], axis=1)


def basis_frequencies(gate_time: float, offsets: np.ndarray, mode: str = "qutip") -> np.ndarray:
    """Map random offsets, shape ``(5, Nc)``, to basis frequencies.

    ``qutip``: ``k*2pi/T + r`` with ``r`` in rad/ns.
    ``original``: ``(k + r)*2pi/T`` with ``r`` dimensionless.
    """
    offsets = np.asarray(offsets, dtype=float)
    k = np.arange(1, offsets.shape[-1] + 1)
    base = 2.0 * np.pi / gate_time
    if mode == "qutip":
        return k * base + offsets
    if mode == "original":
        return (k + offsets) * base
    raise InvalidInputError(f"unknown randomization mode {mode!r}")


def sample_basis(
    model: TransmonModel, num_components: int = 10, mode: str = "qutip", seed: int = 0
) -> CrabBasis:
    if num_components < 1:
        raise InvalidInputError("num_components must be >= 1")
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-0.5, 0.5, size=(NUM_CHANNELS, num_components))
    freqs = basis_frequencies(model.gate_time, offsets, mode)
    return CrabBasis(freqs, model.gate_time, mode, seed)


def _check_coefficients(basis: CrabBasis, coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    expected = (NUM_CHANNELS, basis.num_coefficients)
    if coeffs.shape != expected:
        coeffs = coeffs.reshape(expected)
    if not np.all(np.isfinite(coeffs)):
        raise InvalidInputError("coefficients must be finite")
    return coeffs


def synthesize_signal(basis: CrabBasis, coeffs, channel: int, t: float) -> float:
    """Value of one control channel at time ``t`` (ns)."""
    if not 0 <= channel < NUM_CHANNELS:
        raise InvalidInputError(f"channel must be in [0, {NUM_CHANNELS}), got {channel}")
    if not 0.0 <= t <= basis.gate_time:
        raise InvalidInputError(f"t={t} outside [0, {basis.gate_time}]")
    coeffs = _check_coefficients(basis, coeffs)
    nc = basis.num_components
    w = basis.frequencies[channel]
    a, b = coeffs[channel, :nc], coeffs[channel, nc:]
    return float(np.sum(a * np.cos(w * t)) + np.sum(b * np.sin(w * t)))


def midpoint_times(gate_time: float, num_steps: int) -> np.ndarray:
    return (np.arange(num_steps) + 0.5) * (gate_time / num_steps)


def sample_grid(basis: CrabBasis, coeffs, num_steps: int = 1000) -> ControlGrid:
    """Sample all channels at the midpoints of ``num_steps`` equal slices."""
    if num_steps < 2:
        raise InvalidInputError("num_steps must be >= 2")
    coeffs = _check_coefficients(basis, coeffs)
    design = basis.design_matrix(midpoint_times(basis.gate_time, num_steps))
    values = np.einsum("ck,ckm->cm", coeffs, design)
    return ControlGrid(values, basis.gate_time)


@dataclass(eq=False)
class CrabSolution:
    """An optimized pulse: basis, coefficients and how it was obtained."""

    basis: CrabBasis
    coefficients: np.ndarray
    model: TransmonModel
    gate_name: str
    achieved_infidelity: float
    rng_seed: int
    target_qubit: int = 2
    converged: bool = True
    evaluations: int = 0
    restarts: int = 0
    num_steps: int = 1000
    fidelity_form: str = "linear"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coefficients = _check_coefficients(self.basis, self.coefficients).copy()
        if not 0.0 <= self.achieved_infidelity <= 1.0:
            raise InvalidInputError("achieved_infidelity must lie in [0, 1]")

    def grid(self, num_steps: int | None = None) -> ControlGrid:
        return sample_grid(self.basis, self.coefficients, num_steps or self.num_steps)

    def __eq__(self, other):
        if not isinstance(other, CrabSolution):
            return NotImplemented
        return (
            self.basis == other.basis
            and np.array_equal(self.coefficients, other.coefficients)
            and self.model == other.model
            and self.gate_name == other.gate_name
            and self.achieved_infidelity == other.achieved_infidelity
            and self.rng_seed == other.rng_seed
            and self.target_qubit == other.target_qubit
            and self.converged == other.converged
            and self.evaluations == other.evaluations
            and self.restarts == other.restarts
            and self.num_steps == other.num_steps
            and self.fidelity_form == other.fidelity_form
        )
