"""Tolerated white-noise and coefficient-distortion sigma for CNOT solutions.

Runs a small campaign, then the -1 dB searches on every converged solution,
and prints per-solution values next to the energy bounds mu_noise and mu_dist.

    python scripts/tolerance_table.py --runs 5
"""

from __future__ import annotations

import argparse

import numpy as np

from crabforge import (
    DisturbanceConfig,
    OptimizerConfig,
    TransmonModel,
    build_gate,
    derive_seed,
    distortion_energy_bound,
    half_normal_mean,
    run_campaign,
    tolerance_search,
)
from crabforge.model import EV_PER_GHZ


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--gate", default="cnot")
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    campaign = run_campaign(TransmonModel(), build_gate(args.gate), OptimizerConfig(seed=args.seed), args.runs, args.jobs)
    print(f"{'run':>4} {'infidelity':>12} {'noise [eV]':>11} {'dist [eV]':>11}")
    noise, dist = [], []
    for sol in campaign.converged:
        row = []
        for index, kind in enumerate(("noise", "distortion"), start=1):
            cfg = DisturbanceConfig(seed=derive_seed(args.seed, index, sol.rng_seed))
            report = tolerance_search(sol, None, kind, cfg)
            row.append(report.tolerated_sigma)
        noise.append(row[0])
        dist.append(row[1])
        print(f"{sol.rng_seed:>4} {sol.achieved_infidelity:>12.6e} {row[0] * EV_PER_GHZ:>11.3e} {row[1] * EV_PER_GHZ:>11.3e}")
    if not noise:
        print("no converged solutions")
        return
    n_avg, d_avg = float(np.mean(noise)) * EV_PER_GHZ, float(np.mean(dist)) * EV_PER_GHZ
    n_coeff = 2 * campaign.converged[0].basis.num_components
    print(f"average noise sigma {n_avg:.3e} eV -> mu_noise {half_normal_mean(n_avg):.3e} eV")
    print(f"average dist  sigma {d_avg:.3e} eV -> mu_dist  {distortion_energy_bound(d_avg, n_coeff):.3e} eV")


if __name__ == "__main__":
    main()
