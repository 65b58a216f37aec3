"""Disturbance injection, -1 dB tolerance searches and half-normal bounds.

White noise is added to sampled signal values (one draw per channel per
slice). Distortion is added to basis coefficients before synthesis. All
sigmas are in rad/ns; eV values are derived only for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .crab import CrabSolution, sample_grid
from .gates import GateTarget, build_gate
from .model import EV_PER_GHZ, InvalidInputError
from .optimize import CostFunction
from .propagate import ControlGrid, block_infidelity, computational_block
from .seeds import derive_seed

DISTURBANCE_KINDS = ("noise", "distortion")


@dataclass(frozen=True)
class DisturbanceConfig:
    start_sigma: float = 0.1
    step_db: float = -1.0
    realizations_required: int = 30
    max_steps: int = 120
    seed: int = 0
    threshold: float = 1e-2

    def __post_init__(self):
        if not self.start_sigma > 0:
            raise InvalidInputError("start_sigma must be positive")
        if not self.step_db < 0:
            raise InvalidInputError("step_db must be negative")
        if self.realizations_required < 1 or self.max_steps < 1:
            raise InvalidInputError("realizations_required and max_steps must be >= 1")

    def sigma(self, step: int) -> float:
        return self.start_sigma * 10.0 ** (step * self.step_db / 20.0)


@dataclass(frozen=True)
class StepRecord:
    sigma: float
    pass_count: int
    first_fail_infidelity: float | None


@dataclass
class ToleranceReport:
    kind: str
    tolerated_sigma: float | None
    steps: list = field(default_factory=list)
    solution_id: str = ""

    @property
    def found(self) -> bool:
        return self.tolerated_sigma is not None

    @property
    def tolerated_sigma_ev(self) -> float | None:
        return None if self.tolerated_sigma is None else to_ev(self.tolerated_sigma)


def to_ev(sigma: float) -> float:
    return EV_PER_GHZ * sigma


def half_normal_mean(sigma: float) -> float:
    """Mean of |X| for X ~ N(0, sigma^2)."""
    if sigma < 0:
        raise InvalidInputError("sigma must be non-negative")
    return sigma * math.sqrt(2.0 / math.pi)


def distortion_energy_bound(sigma: float, n_coefficients: int) -> float:
    """Amplitude bound ``n * E|Delta|`` on a sum of ``n`` perturbed unit basis functions."""
    if n_coefficients < 1:
        raise InvalidInputError("n_coefficients must be >= 1")
    return n_coefficients * half_normal_mean(sigma)


def apply_white_noise(grid: ControlGrid, sigma: float, seed: int) -> ControlGrid:
    if sigma < 0:
        raise InvalidInputError("sigma must be non-negative")
    if sigma == 0:
        return grid
    rng = np.random.default_rng(seed)
    return ControlGrid(grid.values + rng.normal(0.0, sigma, grid.values.shape), grid.gate_time)


def apply_coefficient_distortion(solution: CrabSolution, sigma: float, seed: int) -> np.ndarray:
    if sigma < 0:
        raise InvalidInputError("sigma must be non-negative")
    coeffs = solution.coefficients
    if sigma == 0:
        return coeffs.copy()
    rng = np.random.default_rng(seed)
    return coeffs + rng.normal(0.0, sigma, coeffs.shape)


class _Evaluator:
    """Infidelity of a solution under one disturbance draw."""

    def __init__(self, solution: CrabSolution, gate: GateTarget, kind: str):
        if kind not in DISTURBANCE_KINDS:
            raise InvalidInputError(f"unknown disturbance kind {kind!r}")
        self.solution = solution
        self.kind = kind
        self.gate = gate
        self.cost = CostFunction(
            solution.model, solution.basis, gate, solution.num_steps, solution.fidelity_form
        )
        self.clean_grid = self.cost.grid(solution.coefficients)

    def clean(self) -> float:
        return self(0.0, 0)

    def __call__(self, sigma: float, seed: int) -> float:
        if self.kind == "noise":
            grid = apply_white_noise(self.clean_grid, sigma, seed)
            block = computational_block(self.solution.model, grid)
            return block_infidelity(block, self.cost.target, self.solution.fidelity_form)
        coeffs = apply_coefficient_distortion(self.solution, sigma, seed)
        return self.cost(coeffs)


def tolerance_search(
    solution: CrabSolution,
    gate: GateTarget | None = None,
    kind: str = "noise",
    config: DisturbanceConfig | None = None,
    *,
    disturbance_scale: float = 1.0,
) -> ToleranceReport:
    """Largest sigma on the dB ladder that every one of a batch of draws tolerates.

    Step ``n`` tries ``start_sigma * 10**(n*step_db/20)`` and draws
    disturbance ``r`` from ``derive_seed(config.seed, n, r)``. A batch is
    abandoned at its first failure, which does not change the verdict.
    ``disturbance_scale`` multiplies the sigma actually injected (not the
    reported one) and exists for testing.
    """
    config = config or DisturbanceConfig()
    gate = gate or build_gate(solution.gate_name, solution.target_qubit)
    evaluate = _Evaluator(solution, gate, kind)
    clean = evaluate.clean()
    if not clean < config.threshold:
        raise InvalidInputError(
            f"clean infidelity {clean:.6g} is not below the threshold {config.threshold}"
        )
    solution_id = solution.metadata.get("solution_id", f"{solution.gate_name}_{solution.rng_seed}")
    report = ToleranceReport(kind, None, [], solution_id)
    for n in range(config.max_steps):
        sigma = config.sigma(n)
        passed, first_fail = 0, None
        for r in range(config.realizations_required):
            value = evaluate(sigma * disturbance_scale, derive_seed(config.seed, n, r))
            if value >= config.threshold:
                first_fail = value
                break
            passed += 1
        report.steps.append(StepRecord(sigma, passed, first_fail))
        if passed == config.realizations_required:
            report.tolerated_sigma = sigma
            break
    return report


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    mean_infidelity: float
    min_infidelity: float
    max_infidelity: float


def sweep_infidelity_vs_sigma(
    solution: CrabSolution,
    gate: GateTarget | None = None,
    kind: str = "noise",
    sigma_list=(),
    realizations: int = 30,
    seed: int = 0,
) -> list[SweepRow]:
    """Infidelity statistics per sigma; draw ``r`` at row ``i`` uses ``derive_seed(seed, i, r)``."""
    sigma_list = list(sigma_list)
    if not sigma_list:
        raise InvalidInputError("sigma_list must not be empty")
    gate = gate or build_gate(solution.gate_name, solution.target_qubit)
    evaluate = _Evaluator(solution, gate, kind)
    rows = []
    for i, sigma in enumerate(sigma_list):
        values = np.array([evaluate(sigma, derive_seed(seed, i, r)) for r in range(realizations)])
        rows.append(SweepRow(float(sigma), float(values.mean()), float(values.min()), float(values.max())))
    return rows


def disturbed_grid(solution: CrabSolution, kind: str, sigma: float, seed: int) -> ControlGrid:
    """The control grid actually propagated for one disturbance draw."""
    if kind == "noise":
        return apply_white_noise(solution.grid(), sigma, seed)
    if kind == "distortion":
        coeffs = apply_coefficient_distortion(solution, sigma, seed)
        return sample_grid(solution.basis, coeffs, solution.num_steps)
    raise InvalidInputError(f"unknown disturbance kind {kind!r}")
