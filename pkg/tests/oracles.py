"""Independent reference computations used by the unit and acceptance tests.

The LP oracle solves min c@x over {rows@x <= bounds, lower <= x <= upper} by
brute-force vertex enumeration, so it shares no code path with the simplex
implementation under test.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from mtdsim.lp import INFEASIBLE, OPTIMAL, LPProblem, solve_lp


@dataclass
class VertexSolution:
    status: str
    objective_value: float | None


def enumerate_vertices(problem: LPProblem) -> VertexSolution:
    """Optimum by checking every basic point of the inequality system.

    Requires finite variable bounds (the box makes the region a polytope, so
    a nonempty region always contains a vertex and the optimum is at one).
    """
    n = problem.n_vars
    if not (np.all(np.isfinite(problem.lower)) and np.all(np.isfinite(problem.upper))):
        raise ValueError("vertex enumeration needs a bounded box")
    G = np.vstack([problem.rows, np.eye(n), -np.eye(n)])
    h = np.concatenate([problem.bounds, problem.upper, -problem.lower])
    best = None
    for rows in combinations(range(G.shape[0]), n):
        sub = G[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        v = np.linalg.solve(sub, h[list(rows)])
        if np.all(G @ v <= h + 1e-9):
            value = float(problem.c @ v)
            if best is None or value < best:
                best = value
    if best is None:
        return VertexSolution(INFEASIBLE, None)
    return VertexSolution(OPTIMAL, best)


def random_box_lp(rng: np.random.Generator) -> LPProblem:
    """A small random LP over the box [-2, 3]^n; roughly half are anchored feasible."""
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, 9))
    rows = rng.normal(size=(m, n))
    lower = np.full(n, -2.0)
    upper = np.full(n, 3.0)
    if rng.random() < 0.5:
        anchor = rng.uniform(lower, upper)
        bounds = rows @ anchor + np.abs(rng.normal(size=m))
    else:
        bounds = rng.normal(size=m)
    c = rng.normal(size=n)
    return LPProblem(c=c, rows=rows, bounds=bounds, lower=lower, upper=upper)


def compare_simplex_to_vertices(n_cases: int, seed: int, tol: float = 1e-6) -> list[str]:
    """Run ``n_cases`` random LPs through both solvers; return any mismatches."""
    rng = np.random.default_rng(seed)
    problems = [random_box_lp(rng) for _ in range(n_cases)]
    mismatches = []
    for idx, problem in enumerate(problems):
        got = solve_lp(problem)
        want = enumerate_vertices(problem)
        if got.status != want.status:
            mismatches.append(f"case {idx}: status {got.status} != {want.status}")
            continue
        if got.status == OPTIMAL:
            if abs(got.objective_value - want.objective_value) > tol * (
                1.0 + abs(want.objective_value)
            ):
                mismatches.append(
                    f"case {idx}: objective {got.objective_value:.9f} "
                    f"!= {want.objective_value:.9f}"
                )
                continue
            x = got.x
            if (
                np.any(problem.rows @ x > problem.bounds + 1e-7)
                or np.any(x < problem.lower - 1e-9)
                or np.any(x > problem.upper + 1e-9)
            ):
                mismatches.append(f"case {idx}: reported optimum violates constraints")
    return mismatches
