#!/usr/bin/env python3
"""Show that policy regret grows linearly against a punishing adversary.

The adversary watches the defender's first configuration choice; from the
second step on, the play earns nothing whenever that first choice was the
adversary's target.  Any strategy that picks the target first with
probability p then suffers expected policy regret ~ p*T: no amount of later
adaptation undoes the first move.  The demo runs uniform random switching,
fits mean regret against the horizon, and compares the slope to p.
"""

import argparse

from mtdsim.harness import theorem1_regret_experiment


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=400, help="runs per horizon")
    parser.add_argument("--configs", type=int, default=2)
    parser.add_argument("--switch-cost", type=float, default=0.01)
    parser.add_argument("--seed", type=int, default=10)
    args = parser.parse_args()

    fit = theorem1_regret_experiment(
        n_runs=args.runs,
        seed=args.seed,
        n_configs=args.configs,
        switch_cost=args.switch_cost,
    )

    print(f"uniform defender over {args.configs} configurations, "
          f"switch cost {args.switch_cost}, {args.runs} runs per horizon")
    print()
    print(f"{'horizon T':>10} {'mean policy regret':>20} {'regret / T':>12}")
    for horizon, regret in zip(fit.horizons, fit.mean_regrets):
        print(f"{horizon:>10} {regret:>20.2f} {regret / horizon:>12.4f}")
    print()
    print(f"linear fit: regret = {fit.slope:.4f} * T + {fit.intercept:.2f}"
          f"   (R^2 = {fit.r_squared:.5f})")
    print(f"first-pick probability p = {fit.first_action_prob}; "
          f"slope is within {fit.slope_relative_error:.1%} of p")


if __name__ == "__main__":
    main()
