#!/usr/bin/env python3
"""Watch the adaptive defender shut down the targeted node.

On the evolving network scenario an unknown attacker that deals certain
damage 100 to any configuration with node 0 online takes over the whole
population during [330, 660).  Taking a node offline costs 50 once, so the
planner should pay it and park node 0 offline for the duration.  The demo
prints the fraction of steps each node spends offline per phase, plus the
reward comparison against the baselines.
"""

import argparse

import numpy as np

from mtdsim.harness import ExperimentConfig, run_experiment

PHASES = ((0, 330, "mixed src/tgt"), (330, 660, "unknown vs node0"), (660, 1000, "mix returns"))


def offline_fractions(iteration_records, n_nodes=2):
    """Per-phase fraction of steps each node spends offline (post-switch)."""
    table = {}
    for lo, hi, label in PHASES:
        fracs = np.zeros(n_nodes)
        total = 0
        for records in iteration_records:
            for rec in records:
                if lo <= rec.t < hi:
                    bits = rec.action.split("|")
                    fracs += np.array([b == "0" for b in bits], dtype=float)
                    total += 1
        table[label] = fracs / total
    return table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=5)
    parser.add_argument("--seed", type=int, default=10)
    args = parser.parse_args()

    print(f"net-evolving, alpha=1.0, {args.iterations} iterations x 1000 steps")
    print()
    results = {}
    for strategy in ("ata-fmdp", "fpl", "eps-greedy", "urs"):
        config = ExperimentConfig(
            domain="network",
            scenario="net-evolving",
            strategy=strategy,
            iterations=args.iterations,
            seed=args.seed,
            include_hindsight=False,
        )
        results[strategy] = run_experiment(config)
        print(f"{strategy:<12} mean avg reward {results[strategy].mean_avg_reward:8.3f}")

    print()
    print("adaptive planner: fraction of steps spent offline, per node and phase")
    table = offline_fractions(results["ata-fmdp"].iteration_records)
    print(f"{'phase':<18} {'node0':>8} {'node1':>8}")
    for label, fracs in table.items():
        print(f"{label:<18} {fracs[0]:>8.3f} {fracs[1]:>8.3f}")


if __name__ == "__main__":
    main()
