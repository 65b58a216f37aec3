"""Piecewise-constant propagation and computational-subspace infidelity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import NUM_CHANNELS, InvalidInputError, TransmonModel, assemble_hamiltonian

FIDELITY_FORMS = ("linear", "squared")


@dataclass(frozen=True, eq=False)
class ControlGrid:
    """Channel values (rad/ns) on ``num_steps`` equal slices of ``[0, gate_time]``.

    ``values[c, m]`` is held constant over slice ``m``.
    """

    values: np.ndarray
    gate_time: float

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != NUM_CHANNELS or values.shape[1] < 1:
            raise InvalidInputError(f"grid values must have shape (5, M), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def num_steps(self) -> int:
        return self.values.shape[1]

    @property
    def dt(self) -> float:
        return self.gate_time / self.num_steps

    @property
    def times(self) -> np.ndarray:
        """Slice midpoints."""
        return (np.arange(self.num_steps) + 0.5) * self.dt

    def __eq__(self, other):
        if not isinstance(other, ControlGrid):
            return NotImplemented
        return self.gate_time == other.gate_time and np.array_equal(self.values, other.values)


@dataclass(frozen=True)
class PropagationResult:
    full_unitary: np.ndarray
    computational_block: np.ndarray
    leakage: float


def matrix_exp_hermitian(h: np.ndarray, scale: float) -> np.ndarray:
    """``exp(-i * scale * h)`` through the eigendecomposition of ``h``."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidInputError("matrix must be square")
    if np.abs(h - h.conj().T).max(initial=0.0) > 1e-9:
        raise InvalidInputError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def _check_grid(model: TransmonModel, grid: ControlGrid):
    if abs(grid.dt * grid.num_steps - model.gate_time) > 1e-9 * model.gate_time:
        raise InvalidInputError(
            f"grid spans {grid.gate_time} ns but the model gate time is {model.gate_time} ns"
        )


def _propagate_columns(model: TransmonModel, values: np.ndarray, dt: float, columns) -> np.ndarray:
    """``U[:, columns]`` in the lab basis."""
    phases, drift, controls = model.real_frame
    columns = np.asarray(columns, dtype=np.int64)
    ur, ui = _kernels.propagate_real_frame(
        drift,
        controls,
        np.ascontiguousarray(values, dtype=float),
        float(dt),
        columns,
        _kernels.COS_C,
        _kernels.SIN_C,
    )
    # U = P U_r P^dag
    return phases[:, None] * (ur + 1j * ui) * phases.conj()[columns][None, :]


def leakage_of(block: np.ndarray) -> float:
    """One minus the mean squared column norm of the computational block."""
    norms = np.sum(np.abs(block) ** 2, axis=0)
    return float(np.clip(1.0 - norms.mean(), 0.0, 1.0))


def propagate(model: TransmonModel, grid: ControlGrid) -> PropagationResult:
    """Full propagator ``U(T)`` for the sampled controls."""
    _check_grid(model, grid)
    full = _propagate_columns(model, grid.values, grid.dt, np.arange(model.dim))
    comp = model.computational_indices
    block = full[np.ix_(comp, comp)]
    return PropagationResult(full, block, leakage_of(block))


def computational_block(model: TransmonModel, grid: ControlGrid) -> np.ndarray:
    """4x4 computational block only; propagates just the four relevant columns."""
    _check_grid(model, grid)
    comp = model.computational_indices
    cols = _propagate_columns(model, grid.values, grid.dt, comp)
    return cols[comp]


def propagate_reference(model: TransmonModel, grid: ControlGrid) -> np.ndarray:
    """Slow path: dense Hamiltonian per slice, exponentiated by eigendecomposition."""
    _check_grid(model, grid)
    u = np.eye(model.dim, dtype=complex)
    for m in range(grid.num_steps):
        h = assemble_hamiltonian(model, grid.values[:, m])
        u = matrix_exp_hermitian(h, grid.dt) @ u
    return u


def block_infidelity(block: np.ndarray, target: np.ndarray, form: str = "linear") -> float:
    """``1 - |Tr(target^dag block)| / d`` (linear) or ``1 - |Tr|^2 / d^2`` (squared)."""
    block = np.asarray(block)
    target = np.asarray(target)
    if block.shape != target.shape or block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise InvalidInputError(f"shape mismatch: block {block.shape}, target {target.shape}")
    d = target.shape[0]
    overlap = abs(np.vdot(target, block))  # Tr(target^dag block)
    if form == "linear":
        value = 1.0 - overlap / d
    elif form == "squared":
        value = 1.0 - (overlap / d) ** 2
    else:
        raise InvalidInputError(f"unknown fidelity form {form!r}")
    # a leaky block can only lower the overlap; rounding can push it a hair above d
    return float(min(max(value, 0.0), 1.0))


def infidelity(result: PropagationResult | np.ndarray, target, form: str = "linear") -> float:
    """Gate infidelity of a propagation result (or a bare 4x4 block) against a target.

    ``target`` may be a ``GateTarget`` or a 4x4 matrix.
    """
    block = result.computational_block if isinstance(result, PropagationResult) else result
    matrix = getattr(target, "matrix", target)
    return block_infidelity(block, matrix, form)
