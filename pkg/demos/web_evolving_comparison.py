#!/usr/bin/env python3
"""Compare all defender strategies on the evolving web scenario.

The attacker population starts as a mainstream/database/unknown mix, surges
to 90% unknown on [330, 660), then reverts.  The adaptive planner learns the
shift from its own attack observations and re-routes; the bandit baselines
only see scalar rewards.  The hindsight table shows what any single fixed
configuration would have earned on the same seeds.
"""

import argparse

import numpy as np

from mtdsim.harness import ExperimentConfig, run_experiment

STRATEGIES = ("ata-fmdp", "fpl", "eps-greedy", "urs")
PHASES = ((0, 330, "initial mix"), (330, 660, "unknown surge"), (660, 1000, "mix returns"))


def phase_means(iteration_records):
    rows = []
    for lo, hi, label in PHASES:
        vals = [
            np.mean([r.reward for r in records if lo <= r.t < hi])
            for records in iteration_records
        ]
        rows.append((label, float(np.mean(vals))))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--iterations", type=int, default=5)
    parser.add_argument("--seed", type=int, default=10)
    args = parser.parse_args()

    print(f"web-evolving, alpha={args.alpha}, {args.iterations} iterations x 1000 steps")
    print()
    results = {}
    for strategy in STRATEGIES:
        config = ExperimentConfig(
            scenario="web-evolving",
            strategy=strategy,
            alpha=args.alpha,
            iterations=args.iterations,
            seed=args.seed,
            include_hindsight=(strategy == STRATEGIES[0]),
        )
        results[strategy] = run_experiment(config)

    print(f"{'strategy':<12} {'mean avg reward':>16} {'std':>8}")
    for strategy, result in results.items():
        print(f"{strategy:<12} {result.mean_avg_reward:>16.3f} {result.std_avg_reward:>8.3f}")

    adaptive = results["ata-fmdp"]
    print()
    print("adaptive planner by scenario phase:")
    for label, mean in phase_means(adaptive.iteration_records):
        print(f"  {label:<14} mean reward {mean:8.3f}")

    print()
    print("hindsight (same seeds, one fixed configuration):")
    for label, value in sorted(adaptive.static_table.items(), key=lambda kv: -kv[1]):
        print(f"  static:{label:<16} {value:8.3f}")
    print(f"  best={adaptive.best_static:.3f}  worst={adaptive.worst_static:.3f}")


if __name__ == "__main__":
    main()
