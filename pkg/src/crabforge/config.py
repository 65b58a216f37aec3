"""Run configuration: one YAML file, overridable from the command line.

Schema (every key optional; defaults shown)::

    model:
      levels_per_mode: 3
      anharmonicity: 0.2          # rad/ns
      gate_time: 40.0             # ns
      frequency_convention: angular   # or "ordinary" (multiply by 2 pi)
    crab:
      num_components: 10          # frequency pairs per channel
      randomization_mode: qutip   # or "original"
      num_steps: 1000
      fidelity_form: linear       # or "squared"
    optimizer:
      target_infidelity: 0.01
      max_cost_evaluations: 200000
      initial_coefficient_scale: 0.05
      initial_simplex_spread: 0.1
      restart_limit: 5
      spread_tolerance: 1.0e-6
      polish: false
      amplitude_limit: null
    disturbance:
      start_sigma: 0.1            # rad/ns
      step_db: -1.0
      realizations_required: 30
      max_steps: 120
      threshold: 0.01
    campaign:
      gates: [cnot, hadamard, phase, pi8]
      runs: 30
      seed: 0
      output_dir: runs
      jobs: null                  # null -> os.cpu_count()

Seeds: optimization run ``i`` of a gate uses ``seed + i``. The tolerance
search for a solution uses ``derive_seed(seed, kind, solution rng_seed)``
with kind 1 for noise and 2 for distortion.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .crab import RANDOMIZATION_MODES
from .gates import GATE_NAMES
from .model import TransmonModel
from .optimize import OptimizerConfig
from .robustness import DisturbanceConfig

SEED_ENV = "CRABFORGE_SEED"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: dict = field(default_factory=dict)
    crab: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)
    disturbance: dict = field(default_factory=dict)
    gates: list = field(default_factory=lambda: list(GATE_NAMES))
    runs: int = 30
    seed: int = 0
    output_dir: str = "runs"
    jobs: int | None = None

    _MODEL_KEYS = {f.name for f in dataclasses.fields(TransmonModel)}
    _CRAB_KEYS = {"num_components", "randomization_mode", "num_steps", "fidelity_form"}
    _OPT_KEYS = {f.name for f in dataclasses.fields(OptimizerConfig)} - _CRAB_KEYS - {"seed"}
    _DIST_KEYS = {f.name for f in dataclasses.fields(DisturbanceConfig)} - {"seed"}

    @classmethod
    def from_dict(cls, data: dict | None) -> "RunConfig":
        data = dict(data or {})
        sections = {"model", "crab", "optimizer", "disturbance", "campaign"}
        unknown = set(data) - sections
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        campaign = dict(data.get("campaign") or {})
        allowed_campaign = {"gates", "runs", "seed", "output_dir", "jobs"}
        if set(campaign) - allowed_campaign:
            raise ConfigError(f"unknown campaign keys: {sorted(set(campaign) - allowed_campaign)}")
        cfg = cls(
            model=dict(data.get("model") or {}),
            crab=dict(data.get("crab") or {}),
            optimizer=dict(data.get("optimizer") or {}),
            disturbance=dict(data.get("disturbance") or {}),
            **campaign,
        )
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
        return cls.from_dict(data)

    def apply_env(self, environ=os.environ) -> "RunConfig":
        if SEED_ENV in environ:
            try:
                self.seed = int(environ[SEED_ENV])
            except ValueError as exc:
                raise ConfigError(f"{SEED_ENV} must be an integer") from exc
        return self

    # builders ------------------------------------------------------------

    def _check(self, section: dict, allowed: set, name: str):
        extra = set(section) - allowed
        if extra:
            raise ConfigError(f"unknown {name} keys: {sorted(extra)}")

    def transmon_model(self) -> TransmonModel:
        self._check(self.model, self._MODEL_KEYS, "model")
        try:
            return TransmonModel(**self.model)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"model: {exc}") from exc

    def optimizer_config(self) -> OptimizerConfig:
        self._check(self.optimizer, self._OPT_KEYS, "optimizer")
        self._check(self.crab, self._CRAB_KEYS, "crab")
        if self.crab.get("randomization_mode", "qutip") not in RANDOMIZATION_MODES:
            raise ConfigError(f"crab.randomization_mode must be one of {RANDOMIZATION_MODES}")
        try:
            return OptimizerConfig(seed=self.seed, **self.optimizer, **self.crab)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"optimizer: {exc}") from exc

    def disturbance_config(self, seed: int = 0) -> DisturbanceConfig:
        self._check(self.disturbance, self._DIST_KEYS, "disturbance")
        try:
            return DisturbanceConfig(seed=seed, **self.disturbance)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"disturbance: {exc}") from exc

    def validate(self) -> "RunConfig":
        """Build every sub-config once so errors surface before any run."""
        self.transmon_model()
        self.optimizer_config()
        self.disturbance_config()
        bad = [g for g in self.gates if g not in GATE_NAMES]
        if bad:
            raise ConfigError(f"unknown gates {bad}; expected {GATE_NAMES}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self

    def snapshot(self) -> dict:
        return {
            "model": dict(self.model),
            "crab": dict(self.crab),
            "optimizer": dict(self.optimizer),
            "disturbance": dict(self.disturbance),
            "campaign": {
                "gates": list(self.gates),
                "runs": self.runs,
                "seed": self.seed,
                "output_dir": str(self.output_dir),
                "jobs": self.jobs,
            },
        }
