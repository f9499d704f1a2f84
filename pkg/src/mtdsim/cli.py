"""Command-line interface: experiment runs, hindsight bounds, property checks, LP dumps."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .alp import alp_to_dict, build_alp, build_basis, build_state_basis, uniform_theta
from .domain import DomainError
from .estimator import ThreatEstimator
from .harness import (
    ExperimentConfig,
    alp_exactness_check,
    avg_regret_bound_check,
    cold_posterior_table,
    estimator_unbiasedness_check,
    hindsight_bounds,
    perturb_posterior_table,
    random_posterior_table,
    resolve_domain,
    resolve_scenario,
    run_experiment,
    theorem1_regret_experiment,
)


def _parse_reopt_period(text: str) -> int | None:
    if text.lower() in ("never", "none", "inf"):
        return None
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            "reopt-period must be a positive integer or 'never'"
        ) from exc
    if value < 1:
        raise argparse.ArgumentTypeError("reopt-period must be >= 1 (or 'never')")
    return value


def _add_selector_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--domain", default="web",
                        help="'web', 'network', or a domain JSON file (default: web)")
    parser.add_argument("--scenario", default="web-evolving",
                        help="built-in scenario name or a scenario JSON file")
    parser.add_argument("--alpha", type=float, default=1.0,
                        help="switching-cost weight (default: 1.0)")
    parser.add_argument("--timesteps", type=int, default=None,
                        help="steps per iteration (default: the scenario horizon)")
    parser.add_argument("--iterations", type=int, default=10)
    parser.add_argument("--seed", type=int, default=10)
    parser.add_argument("--start-state", default=None, metavar="LABEL",
                        help="starting configuration label (default: first enumerated)")


def _start_state_index(domain, label: str | None) -> int:
    if label is None:
        return 0
    return domain.space.index_of_label(label)


def cmd_run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    domain = resolve_domain(args.domain, scenario, args.alpha, args.seed)
    config = ExperimentConfig(
        domain=args.domain,
        scenario=args.scenario,
        strategy=args.strategy,
        alpha=args.alpha,
        timesteps=args.timesteps,
        iterations=args.iterations,
        seed=args.seed,
        reopt_period=args.reopt_period,
        out_dir=args.out,
        start_state=_start_state_index(domain, args.start_state),
        beta=args.beta,
        epsilon=args.epsilon,
        fpl_explore=args.fpl_explore,
        fpl_rate=args.fpl_rate,
        fpl_lmax=args.fpl_lmax,
    )
    result = run_experiment(config)
    print(
        f"strategy={config.strategy} alpha={config.alpha} "
        f"mean_avg_reward={result.mean_avg_reward:.3f} "
        f"std_avg_reward={result.std_avg_reward:.3f}"
    )
    if result.static_table:
        best_label = max(result.static_table, key=result.static_table.get)
        worst_label = min(result.static_table, key=result.static_table.get)
        print(
            f"hindsight: best_static={result.best_static:.3f} ({best_label}) "
            f"worst_static={result.worst_static:.3f} ({worst_label})"
        )
    if args.out is not None:
        print(f"wrote steps.csv, rolling.csv, summary.csv, meta.json to {args.out}")
    return 0


def cmd_hindsight(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    domain = resolve_domain(args.domain, scenario, args.alpha, args.seed)
    timesteps = scenario.horizon if args.timesteps is None else args.timesteps
    best, worst, table = hindsight_bounds(
        domain, scenario, timesteps, args.iterations, args.seed,
        _start_state_index(domain, args.start_state),
    )
    for label, value in table.items():
        print(f"static:{label} mean_avg_reward={value:.3f}")
    print(f"best_static={best:.3f} worst_static={worst:.3f}")
    if args.out is not None:
        import csv
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["config", "mean_avg_reward"])
            for label, value in table.items():
                writer.writerow([label, repr(float(value))])
        print(f"wrote {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    failures = 0

    def report(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        failures += 0 if ok else 1
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    rng = np.random.default_rng(args.seed)

    # Exact-basis planner against value iteration.
    from .environments import make_web_app_domain

    web = make_web_app_domain(alpha=1.0)
    worst_err, all_match = 0.0, True
    posteriors = [cold_posterior_table(web)] + [
        random_posterior_table(web, rng) for _ in range(3)
    ]
    for table in posteriors:
        err, match, _ = alp_exactness_check(web, table)
        worst_err = max(worst_err, err)
        all_match = all_match and match
    report(
        "alp-vs-value-iteration",
        worst_err <= 1e-5 and all_match,
        f"max value error {worst_err:.2e} over {len(posteriors)} posteriors, "
        f"policies {'match' if all_match else 'differ'}",
    )

    # Estimator recovers the attacker-type distribution.
    err, ok = estimator_unbiasedness_check(
        np.array([0.6, 0.4]), np.array([0.5, 1.0]), samples=args.samples, beta=1.0,
        rng=np.random.default_rng(args.seed),
    )
    report("estimator-unbiasedness", ok, f"max componentwise error {err:.4f} (tol 0.05)")

    # Planning under a perturbed posterior stays within the value-loss bound.
    worst_ratio, all_ok = 0.0, True
    base = cold_posterior_table(web)
    for k in range(args.perturbations):
        true_table = base if k % 2 == 0 else random_posterior_table(web, rng)
        est_table = perturb_posterior_table(true_table, rng)
        gap, bound, ok = avg_regret_bound_check(web, true_table, est_table)
        all_ok = all_ok and ok
        if bound > 0:
            worst_ratio = max(worst_ratio, gap / bound)
    report(
        "value-loss-bound",
        all_ok,
        f"max gap/bound ratio {worst_ratio:.3f} over {args.perturbations} perturbations",
    )

    # Linear-regret adversary: slope matches the first-pick probability.
    fit = theorem1_regret_experiment(n_runs=args.runs, seed=args.seed)
    ok = fit.r_squared >= 0.99 and fit.slope_relative_error <= 0.2
    report(
        "linear-regret-adversary",
        ok,
        f"slope {fit.slope:.4f} vs p={fit.first_action_prob} "
        f"(rel err {fit.slope_relative_error:.3f}), R^2 {fit.r_squared:.5f}",
    )

    print(f"{4 - failures}/4 checks passed")
    return 0 if failures == 0 else 1


def cmd_dump_lp(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    domain = resolve_domain(args.domain, scenario, args.alpha, args.seed)
    if args.estimator is not None:
        posterior = ThreatEstimator.load(domain, args.estimator).posterior_table()
    else:
        posterior = cold_posterior_table(domain)
    basis = build_state_basis(domain.space) if args.basis == "state" else build_basis(domain.space)
    alp = build_alp(domain, posterior, basis, uniform_theta(domain.space))
    payload = json.dumps(alp_to_dict(alp), indent=2, sort_keys=True)
    if args.out == "-":
        print(payload)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload + "\n")
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtdsim",
        description="Moving-target-defense switching experiments: adaptive planner vs. baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one strategy over a scenario and summarize")
    _add_selector_args(p_run)
    p_run.add_argument("--strategy", default="ata-fmdp",
                       help="ata-fmdp, fpl, eps-greedy, urs, or static:<config-label>")
    p_run.add_argument("--reopt-period", type=_parse_reopt_period, default=1,
                       help="re-plan every N steps, or 'never' (default: 1)")
    p_run.add_argument("--out", default=None, help="directory for CSV/JSON outputs")
    p_run.add_argument("--beta", type=float, default=2.0, help="count decay (default: 2)")
    p_run.add_argument("--epsilon", type=float, default=0.2)
    p_run.add_argument("--fpl-explore", type=float, default=0.007)
    p_run.add_argument("--fpl-rate", type=float, default=0.1)
    p_run.add_argument("--fpl-lmax", type=int, default=1000)
    p_run.set_defaults(func=cmd_run)

    p_hind = sub.add_parser("hindsight", help="average reward of every static configuration")
    _add_selector_args(p_hind)
    p_hind.add_argument("--out", default=None, help="CSV file for the per-config table")
    p_hind.set_defaults(func=cmd_hindsight)

    p_verify = sub.add_parser("verify", help="run the property-check suite")
    p_verify.add_argument("--seed", type=int, default=10)
    p_verify.add_argument("--samples", type=int, default=10_000,
                          help="estimator Monte-Carlo samples")
    p_verify.add_argument("--perturbations", type=int, default=100,
                          help="posterior perturbations for the value-loss bound")
    p_verify.add_argument("--runs", type=int, default=400,
                          help="runs per horizon for the linear-regret fit")
    p_verify.set_defaults(func=cmd_verify)

    p_dump = sub.add_parser("dump-lp", help="emit the assembled approximate LP as JSON")
    _add_selector_args(p_dump)
    p_dump.add_argument("--basis", choices=("factored", "state"), default="factored")
    p_dump.add_argument("--estimator", default=None,
                        help="estimator-state JSON to derive the posterior from")
    p_dump.add_argument("--out", default="-", help="output file, or '-' for stdout")
    p_dump.set_defaults(func=cmd_dump_lp)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
