"""CRAB pulse synthesis and robustness benchmarking for a two-transmon gate set."""

from .crab import CrabBasis, CrabSolution, sample_basis, sample_grid, synthesize_signal
from .gates import GATE_NAMES, GateTarget, build_gate
from .model import (
    ControlValues,
    InvalidDimensionError,
    InvalidInputError,
    TransmonModel,
    annihilation_op,
    assemble_hamiltonian,
    number_op,
)
from .optimize import CampaignResult, OptimizerConfig, cost, nelder_mead, optimize_gate, run_campaign
from .propagate import ControlGrid, PropagationResult, infidelity, matrix_exp_hermitian, propagate
from .robustness import (
    DisturbanceConfig,
    ToleranceReport,
    apply_coefficient_distortion,
    apply_white_noise,
    distortion_energy_bound,
    half_normal_mean,
    sweep_infidelity_vs_sigma,
    tolerance_search,
)
from .seeds import derive_seed
from .spectrum import SpectrumTable, dft_spectrum

__version__ = "0.1.0"
