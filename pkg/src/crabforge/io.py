"""Solution files (JSON) and CSV writers.

A solution file stores everything needed to rebuild the pulse without
re-sampling: basis frequencies, coefficients, model parameters and the run
configuration. Python's float repr is round-trip exact, so
``load_solution(save_solution(s)) == s`` bit for bit.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
from pathlib import Path

import numpy as np

from .crab import CrabBasis, CrabSolution
from .model import TransmonModel

SCHEMA_VERSION = 1


class SolutionFileError(ValueError):
    pass


def solution_to_dict(solution: CrabSolution, config_snapshot: dict | None = None) -> dict:
    m = solution.model
    b = solution.basis
    return {
        "schema_version": SCHEMA_VERSION,
        "gate_name": solution.gate_name,
        "target_qubit": solution.target_qubit,
        "achieved_infidelity": solution.achieved_infidelity,
        "rng_seed": solution.rng_seed,
        "converged": solution.converged,
        "evaluations": solution.evaluations,
        "restarts": solution.restarts,
        "num_steps": solution.num_steps,
        "fidelity_form": solution.fidelity_form,
        "model": {
            "levels_per_mode": m.levels_per_mode,
            "anharmonicity": m.anharmonicity,
            "gate_time": m.gate_time,
            "frequency_convention": m.frequency_convention,
        },
        "basis": {
            "randomization_mode": b.randomization_mode,
            "seed": b.seed,
            "gate_time": b.gate_time,
            "frequencies": b.frequencies.tolist(),
        },
        "coefficients": solution.coefficients.tolist(),
        "metadata": solution.metadata,
        "config": config_snapshot or {},
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def solution_from_dict(data: dict) -> CrabSolution:
    try:
        if data["schema_version"] != SCHEMA_VERSION:
            raise SolutionFileError(f"unsupported schema version {data['schema_version']}")
        b = data["basis"]
        basis = CrabBasis(
            np.array(b["frequencies"], dtype=float), b["gate_time"], b["randomization_mode"], b["seed"]
        )
        return CrabSolution(
            basis=basis,
            coefficients=np.array(data["coefficients"], dtype=float),
            model=TransmonModel(**data["model"]),
            gate_name=data["gate_name"],
            achieved_infidelity=data["achieved_infidelity"],
            rng_seed=data["rng_seed"],
            target_qubit=data["target_qubit"],
            converged=data["converged"],
            evaluations=data["evaluations"],
            restarts=data["restarts"],
            num_steps=data["num_steps"],
            fidelity_form=data["fidelity_form"],
            metadata=dict(data.get("metadata", {})),
        )
    except (KeyError, TypeError) as exc:
        raise SolutionFileError(f"malformed solution file: {exc!r}") from exc


def save_solution(path, solution: CrabSolution, config_snapshot: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(solution_to_dict(solution, config_snapshot), indent=1) + "\n")
    return path


def load_solution(path) -> CrabSolution:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SolutionFileError(f"{path}: not valid JSON ({exc})") from exc
    solution = solution_from_dict(data)
    solution.metadata.setdefault("solution_id", Path(path).stem)
    return solution


def write_csv(path, header, rows) -> Path:
    """Comma-separated, header row, LF line endings, floats in repr form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value
