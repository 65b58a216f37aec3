"""Average and minimum infidelity per gate over an optimization campaign.

    python scripts/infidelity_table.py --runs 30 --jobs 4
"""

from __future__ import annotations

import argparse
import time

from crabforge import GATE_NAMES, OptimizerConfig, TransmonModel, build_gate, run_campaign


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--gates", nargs="+", default=list(GATE_NAMES), choices=GATE_NAMES)
    args = parser.parse_args()

    model = TransmonModel()
    config = OptimizerConfig(seed=args.seed)
    print(f"{'gate':<9} {'average':>12} {'minimum':>12} {'converged':>10} {'first try':>10} {'mean evals':>11}")
    for name in args.gates:
        start = time.perf_counter()
        c = run_campaign(model, build_gate(name), config, args.runs, jobs=args.jobs)
        evals = sum(s.evaluations for s in c.solutions) / len(c.solutions)
        print(
            f"{name:<9} {c.average_infidelity:>12.4e} {c.minimum_infidelity:>12.4e} "
            f"{len(c.converged):>5}/{len(c.solutions):<4} {c.first_try_rate:>10.2f} {evals:>11.0f}"
            f"   ({time.perf_counter() - start:.0f} s)"
        )


if __name__ == "__main__":
    main()
