"""Nelder-Mead search over CRAB coefficients and multi-run campaigns."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .crab import CrabBasis, CrabSolution, midpoint_times, sample_basis
from .gates import GateTarget, build_gate
from .model import NUM_CHANNELS, InvalidInputError, TransmonModel
from .propagate import FIDELITY_FORMS, ControlGrid, block_infidelity, computational_block
from .seeds import derive_seed, rng_for

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    target_infidelity: float = 1e-2
    max_cost_evaluations: int = 200_000
    initial_coefficient_scale: float = 0.05
    initial_simplex_spread: float = 0.1
    restart_limit: int = 5
    seed: int = 0
    spread_tolerance: float = 1e-6
    polish: bool = False
    amplitude_limit: float | None = None
    num_components: int = 10
    randomization_mode: str = "qutip"
    num_steps: int = 1000
    fidelity_form: str = "linear"

    def __post_init__(self):
        if not 0.0 < self.target_infidelity < 1.0:
            raise InvalidInputError("target_infidelity must lie in (0, 1)")
        for name in ("max_cost_evaluations", "restart_limit", "num_components"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be >= 1")
        if self.num_steps < 2:
            raise InvalidInputError("num_steps must be >= 2")
        if self.initial_coefficient_scale <= 0 or self.initial_simplex_spread <= 0:
            raise InvalidInputError("initial scale and simplex spread must be positive")
        if self.fidelity_form not in FIDELITY_FORMS:
            raise InvalidInputError(f"fidelity_form must be one of {FIDELITY_FORMS}")
        if self.amplitude_limit is not None and self.amplitude_limit <= 0:
            raise InvalidInputError("amplitude_limit must be positive")


# --------------------------------------------------------------------------
# Nelder-Mead


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    evaluations: int
    iterations: int
    converged: bool
    reason: str
    history: list = field(default_factory=list)


class _Stop(Exception):
    pass


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0,
    config: OptimizerConfig | None = None,
    *,
    steps=None,
    max_evaluations: int | None = None,
    target: float | None = None,
    spread_tolerance: float | None = None,
    callback: Callable[[int, float], None] | None = None,
) -> NelderMeadResult:
    """Minimize ``objective`` with the classic simplex rules.

    Coefficients are 1 (reflection), 2 (expansion), 1/2 (contraction) and
    1/2 (shrink). The search stops as soon as an evaluation drops below
    ``target``, when the spread of simplex values falls under
    ``spread_tolerance``, or when the evaluation budget runs out. Keyword
    arguments override the matching ``config`` fields; ``target`` defaults
    to the config threshold unless ``config.polish`` is set.

    ``steps`` sets the per-coordinate simplex displacement; by default it is
    ``spread * max(|x_i|, scale)`` from the config.
    """
    config = config or OptimizerConfig()
    if max_evaluations is None:
        max_evaluations = config.max_cost_evaluations
    if target is None and not config.polish:
        target = config.target_infidelity
    if spread_tolerance is None:
        spread_tolerance = config.spread_tolerance

    x0 = np.array(x0, dtype=float).ravel()
    n = x0.size
    if steps is None:
        steps = config.initial_simplex_spread * np.maximum(np.abs(x0), config.initial_coefficient_scale)
    steps = np.broadcast_to(np.asarray(steps, dtype=float), (n,))

    count = 0
    best_x, best_f = x0.copy(), np.inf

    def f(x):
        nonlocal count, best_x, best_f
        if count >= max_evaluations:
            raise _Stop("budget")
        count += 1
        value = float(objective(x))
        if not np.isfinite(value):
            value = np.inf
        if value < best_f:
            best_f, best_x = value, x.copy()
        if target is not None and value < target:
            raise _Stop("target")
        return value

    sim = np.tile(x0, (n + 1, 1))
    sim[np.arange(1, n + 1), np.arange(n)] += steps
    fs = np.full(n + 1, np.inf)
    history: list[float] = []
    iterations = 0
    reason = "budget"
    try:
        for i in range(n + 1):
            fs[i] = f(sim[i])
        if not np.isfinite(fs).all():
            raise InvalidInputError("objective is not finite on the initial simplex")
        while True:
            order = np.argsort(fs, kind="stable")
            sim, fs = sim[order], fs[order]
            history.append(best_f)
            if callback is not None:
                callback(iterations, best_f)
            if fs[-1] - fs[0] < spread_tolerance:
                reason = "spread"
                break
            iterations += 1
            centroid = sim[:-1].mean(axis=0)
            worst = sim[-1]
            xr = centroid + (centroid - worst)
            fr = f(xr)
            if fr < fs[0]:
                xe = centroid + 2.0 * (centroid - worst)
                fe = f(xe)
                if fe < fr:
                    sim[-1], fs[-1] = xe, fe
                else:
                    sim[-1], fs[-1] = xr, fr
            elif fr < fs[-2]:
                sim[-1], fs[-1] = xr, fr
            else:
                if fr < fs[-1]:
                    xc = centroid + 0.5 * (xr - centroid)
                    fc = f(xc)
                    accept = fc <= fr
                else:
                    xc = centroid + 0.5 * (worst - centroid)
                    fc = f(xc)
                    accept = fc < fs[-1]
                if accept:
                    sim[-1], fs[-1] = xc, fc
                else:
                    sim[1:] = sim[0] + 0.5 * (sim[1:] - sim[0])
                    for i in range(1, n + 1):
                        fs[i] = f(sim[i])
    except _Stop as stop:
        reason = str(stop)
    history.append(best_f)
    converged = target is not None and best_f < target
    return NelderMeadResult(best_x, best_f, count, iterations, converged, reason, history)


# --------------------------------------------------------------------------
# Cost


class CostFunction:
    """Coefficient vector -> gate infidelity, with the basis sampled once."""

    def __init__(
        self,
        model: TransmonModel,
        basis: CrabBasis,
        target: GateTarget | np.ndarray,
        num_steps: int = 1000,
        fidelity_form: str = "linear",
        amplitude_limit: float | None = None,
    ):
        self.model = model
        self.basis = basis
        self.target = np.asarray(getattr(target, "matrix", target))
        self.num_steps = num_steps
        self.fidelity_form = fidelity_form
        self.amplitude_limit = amplitude_limit
        self.design = basis.design_matrix(midpoint_times(basis.gate_time, num_steps))
        self.shape = (NUM_CHANNELS, basis.num_coefficients)

    def grid(self, vector) -> ControlGrid:
        coeffs = np.asarray(vector, dtype=float).reshape(self.shape)
        values = np.einsum("ck,ckm->cm", coeffs, self.design)
        if self.amplitude_limit is not None:
            values = np.clip(values, -self.amplitude_limit, self.amplitude_limit)
        return ControlGrid(values, self.basis.gate_time)

    def __call__(self, vector) -> float:
        block = computational_block(self.model, self.grid(vector))
        return block_infidelity(block, self.target, self.fidelity_form)


def cost(
    model: TransmonModel,
    basis: CrabBasis,
    coefficient_vector,
    target: GateTarget | np.ndarray,
    num_steps: int = 1000,
    fidelity_form: str = "linear",
) -> float:
    vector = np.asarray(coefficient_vector, dtype=float)
    if vector.size != NUM_CHANNELS * basis.num_coefficients:
        raise InvalidInputError(
            f"expected {NUM_CHANNELS * basis.num_coefficients} coefficients, got {vector.size}"
        )
    return CostFunction(model, basis, target, num_steps, fidelity_form)(vector)


def solution_cost(solution: CrabSolution, num_steps: int | None = None) -> float:
    """Re-evaluate a stored solution against its own gate."""
    gate = build_gate(solution.gate_name, solution.target_qubit)
    return cost(
        solution.model,
        solution.basis,
        solution.coefficients,
        gate,
        num_steps or solution.num_steps,
        solution.fidelity_form,
    )


# --------------------------------------------------------------------------
# Single gate and campaigns


def optimize_gate(
    model: TransmonModel,
    gate: GateTarget,
    config: OptimizerConfig | None = None,
    seed: int | None = None,
) -> CrabSolution:
    """Find CRAB coefficients for ``gate``.

    Attempt ``r`` samples its basis from ``derive_seed(seed, r)`` and its
    starting coefficients from ``derive_seed(seed, r, 1)``. An attempt that
    stalls above the threshold triggers a fresh basis, up to
    ``restart_limit`` attempts; all attempts share the evaluation budget.
    """
    config = config or OptimizerConfig()
    seed = config.seed if seed is None else seed
    budget = config.max_cost_evaluations
    used = 0
    best: CrabSolution | None = None
    for attempt in range(config.restart_limit):
        basis = sample_basis(
            model, config.num_components, config.randomization_mode, derive_seed(seed, attempt)
        )
        objective = CostFunction(
            model, basis, gate, config.num_steps, config.fidelity_form, config.amplitude_limit
        )
        scale = config.initial_coefficient_scale
        x0 = rng_for(seed, attempt, 1).uniform(-scale, scale, NUM_CHANNELS * basis.num_coefficients)
        result = nelder_mead(objective, x0, config, max_evaluations=budget - used)
        used += result.evaluations
        log.debug(
            "gate %s seed %d attempt %d: %.6g after %d evaluations (%s)",
            gate.name, seed, attempt, result.fun, result.evaluations, result.reason,
        )
        solution = CrabSolution(
            basis=basis,
            coefficients=result.x.reshape(NUM_CHANNELS, basis.num_coefficients),
            model=model,
            gate_name=gate.name,
            achieved_infidelity=result.fun,
            rng_seed=seed,
            target_qubit=gate.target_qubit,
            converged=result.fun < config.target_infidelity,
            evaluations=used,
            restarts=attempt,
            num_steps=config.num_steps,
            fidelity_form=config.fidelity_form,
        )
        if best is None or solution.achieved_infidelity < best.achieved_infidelity:
            best = solution
        best.evaluations = used
        if solution.converged or used >= budget:
            break
    return best


@dataclass
class CampaignResult:
    gate_name: str
    solutions: list
    average_infidelity: float
    minimum_infidelity: float
    wall_times: list = field(default_factory=list)

    @property
    def converged(self) -> list:
        return [s for s in self.solutions if s.converged]

    @property
    def num_failed(self) -> int:
        return len(self.solutions) - len(self.converged)

    @property
    def first_try_rate(self) -> float:
        if not self.solutions:
            return float("nan")
        return sum(s.converged and s.restarts == 0 for s in self.solutions) / len(self.solutions)


def _timed_run(args):
    model, gate, config, seed = args
    start = time.perf_counter()
    solution = optimize_gate(model, gate, config, seed)
    return solution, time.perf_counter() - start


def run_campaign(
    model: TransmonModel,
    gate: GateTarget,
    config: OptimizerConfig | None = None,
    num_solutions: int = 30,
    jobs: int = 1,
) -> CampaignResult:
    """Independent optimizations with seeds ``config.seed + i``.

    Statistics cover converged runs only; failed runs stay in ``solutions``.
    """
    if num_solutions < 1:
        raise InvalidInputError("num_solutions must be >= 1")
    config = config or OptimizerConfig()
    tasks = [(model, gate, config, config.seed + i) for i in range(num_solutions)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_timed_run, tasks))
    else:
        outcomes = [_timed_run(t) for t in tasks]
    solutions = [o[0] for o in outcomes]
    values = np.array([s.achieved_infidelity for s in solutions if s.converged])
    if values.size:
        average, minimum = float(values.mean()), float(values.min())
    else:
        average = minimum = float("nan")
    if values.size < num_solutions:
        log.warning("%s: %d of %d runs did not converge", gate.name, num_solutions - values.size, num_solutions)
    return CampaignResult(gate.name, solutions, average, minimum, [o[1] for o in outcomes])


def with_seed(config: OptimizerConfig, seed: int) -> OptimizerConfig:
    return replace(config, seed=seed)
