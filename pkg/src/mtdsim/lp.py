"""Small dense linear programs via the two-phase simplex method.

Problems are stated as: minimize ``c @ x`` subject to ``rows @ x <= bounds``
and optional per-variable lower/upper bounds (variables are free by default).
Pivoting follows Bland's rule (lowest eligible index enters; ties in the
ratio test leave by lowest basis index), which makes the solver deterministic
and immune to cycling.  Intended for the small programs produced by the
planners here, not for large-scale use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9  # pivot / feasibility tolerance
SOL_TOL = 1e-7  # phase-1 residual above this means infeasible

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPProblem:
    """minimize c @ x  s.t.  rows @ x <= bounds,  lower <= x <= upper."""

    c: np.ndarray
    rows: np.ndarray
    bounds: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = self.c.shape[0]
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, n)
        self.bounds = np.atleast_1d(np.asarray(self.bounds, dtype=float))
        if self.bounds.shape != (self.rows.shape[0],):
            raise ValueError("one bound per constraint row required")
        self.lower = (
            np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        )
        self.upper = (
            np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("variable bounds must match the variable count")

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    def debug_dump(self) -> str:
        """Plain-text rendering of the program, for eyeballing."""
        lines = ["min " + " + ".join(f"{v:g}*x{i}" for i, v in enumerate(self.c))]
        for row, b in zip(self.rows, self.bounds):
            terms = " + ".join(f"{v:g}*x{i}" for i, v in enumerate(row) if v != 0) or "0"
            lines.append(f"  {terms} <= {b:g}")
        for i, (lo, up) in enumerate(zip(self.lower, self.upper)):
            if np.isfinite(lo) or np.isfinite(up):
                lines.append(f"  {lo:g} <= x{i} <= {up:g}")
        return "\n".join(lines)


@dataclass
class LPSolution:
    status: str
    x: np.ndarray | None = None
    objective_value: float | None = None


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])


def _run_simplex(tab: np.ndarray, basis: list[int], max_iter: int) -> str:
    """Iterate on a tableau whose last row holds reduced costs.

    ``tab`` is (m+1, n+1): constraint rows with the rhs in the last column,
    then the reduced-cost row (objective negated in its last cell).
    """
    m = len(basis)
    for _ in range(max_iter):
        rc = tab[-1, :-1]
        eligible = np.nonzero(rc < -FEAS_TOL)[0]
        if eligible.size == 0:
            return OPTIMAL
        col = int(eligible[0])  # Bland: lowest index enters
        colvals = tab[:m, col]
        positive = colvals > FEAS_TOL
        if not np.any(positive):
            return UNBOUNDED
        ratios = np.full(m, np.inf)
        ratios[positive] = tab[:m, -1][positive] / colvals[positive]
        best = float(ratios.min())
        ties = np.nonzero(ratios <= best + FEAS_TOL * (1.0 + abs(best)))[0]
        leave = int(ties[np.argmin(np.asarray(basis)[ties])])  # Bland: lowest basis index leaves
        _pivot(tab, leave, col)
        basis[leave] = col
    raise RuntimeError("simplex exceeded its iteration limit")


def solve_lp(problem: LPProblem, max_iter: int = 100_000) -> LPSolution:
    """Two-phase simplex; returns status optimal/infeasible/unbounded."""
    n = problem.n_vars
    lo, up = problem.lower, problem.upper
    if np.any(lo > up):
        return LPSolution(INFEASIBLE)

    # Rewrite onto nonnegative variables u: x = offset + T @ u.  Finite lower
    # bounds shift, upper-bounded-only variables flip, free variables split.
    cols: list[np.ndarray] = []
    offset = np.zeros(n)
    range_rows: list[tuple[int, float]] = []  # (u column, width) for lo <= x <= up

    def unit(i: int, sign: float) -> np.ndarray:
        col = np.zeros(n)
        col[i] = sign
        return col

    for i in range(n):
        if np.isfinite(lo[i]):
            offset[i] = lo[i]
            cols.append(unit(i, 1.0))
            if np.isfinite(up[i]):
                range_rows.append((len(cols) - 1, up[i] - lo[i]))
        elif np.isfinite(up[i]):
            offset[i] = up[i]
            cols.append(unit(i, -1.0))
        else:
            cols.append(unit(i, 1.0))
            cols.append(unit(i, -1.0))

    T = np.stack(cols, axis=1) if cols else np.zeros((n, 0))
    n_u = T.shape[1]
    A = problem.rows @ T
    b = problem.bounds - problem.rows @ offset
    if range_rows:
        add = np.zeros((len(range_rows), n_u))
        for r, (u_index, _) in enumerate(range_rows):
            add[r, u_index] = 1.0
        A = np.vstack([A, add])
        b = np.concatenate([b, [width for _, width in range_rows]])
    c_u = problem.c @ T

    m = A.shape[0]
    if m == 0:
        if np.any(c_u < -FEAS_TOL):
            return LPSolution(UNBOUNDED)
        x = offset.copy()
        return LPSolution(OPTIMAL, x, float(problem.c @ x))

    # Slack form A u + s = b with b >= 0; flipped rows get artificials.
    flip = b < 0
    A_std = np.hstack([A, np.eye(m)])
    A_std[flip] *= -1.0
    b_std = np.where(flip, -b, b)
    flip_rows = np.nonzero(flip)[0]
    n_art = flip_rows.size
    art_cols = np.zeros((m, n_art))
    for k, r in enumerate(flip_rows):
        art_cols[r, k] = 1.0
    full = np.hstack([A_std, art_cols])
    n_total = full.shape[1]

    basis = [0] * m
    for r in range(m):
        basis[r] = n_u + r  # slack
    for k, r in enumerate(flip_rows):
        basis[r] = n_u + m + k  # artificial

    tab = np.zeros((m + 1, n_total + 1))
    tab[:m, :n_total] = full
    tab[:m, -1] = b_std
    # Phase-1 reduced costs: cost 1 on artificials, priced out for the basis.
    for r in flip_rows:
        tab[-1] -= tab[r]
    tab[-1, n_u + m : n_total] += 1.0

    if n_art:
        status = _run_simplex(tab, basis, max_iter)
        if status != OPTIMAL:  # phase 1 cannot be unbounded; defensive
            return LPSolution(INFEASIBLE)
        if -tab[-1, -1] > SOL_TOL:
            return LPSolution(INFEASIBLE)
        # Drive surviving artificials out of the basis (degenerate rows).
        drop: list[int] = []
        for r in range(m):
            if basis[r] >= n_u + m:
                piv_candidates = np.nonzero(np.abs(tab[r, : n_u + m]) > FEAS_TOL)[0]
                if piv_candidates.size:
                    col = int(piv_candidates[0])
                    _pivot(tab, r, col)
                    basis[r] = col
                else:
                    drop.append(r)  # redundant row
        if drop:
            keep = [r for r in range(m) if r not in drop]
            tab = np.vstack([tab[keep], tab[-1:]])
            basis = [basis[r] for r in keep]
            m = len(basis)

    # Phase 2: real objective over structural + slack columns.
    tab = np.hstack([tab[:, : n_u + m], tab[:, -1:]])
    c_full = np.concatenate([c_u, np.zeros(m)])
    zrow = np.concatenate([c_full, [0.0]])
    for r, bv in enumerate(basis):
        if c_full[bv] != 0.0:
            zrow -= c_full[bv] * tab[r]
    tab[-1] = zrow

    status = _run_simplex(tab, basis, max_iter)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED)

    u = np.zeros(n_u + m)
    for r, bv in enumerate(basis):
        u[bv] = tab[r, -1]
    x = offset + T @ u[:n_u]
    return LPSolution(OPTIMAL, x, float(problem.c @ x))
