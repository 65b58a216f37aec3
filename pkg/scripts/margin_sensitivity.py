"""How tolerated sigma depends on the clean-infidelity margin below threshold.

Optimizes one solution, then sweeps the acceptance threshold of the noise and
distortion searches. The optimizer stops just under 1e-2, so the tolerated
sigma is governed by the small margin left; this script makes that visible.

    python scripts/margin_sensitivity.py --seed 0
"""

from __future__ import annotations

import argparse

from crabforge import DisturbanceConfig, OptimizerConfig, TransmonModel, build_gate, optimize_gate, tolerance_search


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--gate", default="cnot")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--realizations", type=int, default=30)
    args = parser.parse_args()

    sol = optimize_gate(TransmonModel(), build_gate(args.gate), OptimizerConfig(), seed=args.seed)
    if not sol.converged:
        print(f"run did not converge (best {sol.achieved_infidelity:.4e})")
        return
    print(f"clean infidelity {sol.achieved_infidelity:.6e}")
    print(f"{'threshold':>10} {'margin':>10} {'noise sigma':>12} {'dist sigma':>12}")
    for threshold in (1e-2, 1.001e-2, 1.01e-2, 1.1e-2, 1.5e-2):
        sig = []
        for kind in ("noise", "distortion"):
            cfg = DisturbanceConfig(threshold=threshold, realizations_required=args.realizations, seed=args.seed)
            sig.append(tolerance_search(sol, None, kind, cfg).tolerated_sigma)
        margin = threshold - sol.achieved_infidelity
        print(f"{threshold:>10.4e} {margin:>10.2e} {sig[0]:>12.3e} {sig[1]:>12.3e}")


if __name__ == "__main__":
    main()
