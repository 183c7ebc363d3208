"""Two-phase primal simplex with a Bland fallback against cycling.

Solves ``max c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0``. This is a
dense revised simplex: every iteration refactors the basis from the original
data, so the occupation LPs (hundreds of rows, thousands of heavily
degenerate columns) do not accumulate tableau round-off. No presolve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..errors import DomainError

PIVOT_TOL = 1e-9
COST_TOL = 1e-10
ZERO_TOL = 1e-12
CHECK_TOL = 1e-9
STALL_LIMIT = 50


class InfeasibleLP(DomainError):
    pass


class UnboundedLP(DomainError):
    pass


@dataclass
class LPResult:
    value: float
    x: np.ndarray
    basis: np.ndarray
    iterations: int
    primal_residual: float
    min_reduced_cost: float


def _basic_solution(A, b, basis):
    lu = lu_factor(A[:, basis])
    xb = lu_solve(lu, b)
    xb[np.abs(xb) < ZERO_TOL] = 0.0
    return lu, xb


def _ratio_test(xb, w, basis, bland):
    """Leaving row, or -1 if the direction is unbounded.

    Minimum ratio over rows with a usable pivot. Among near-ties Bland mode
    takes the lowest basic index; otherwise the largest pivot, for stability.
    """
    scale = max(1.0, np.abs(w).max())
    rows = np.flatnonzero(w > PIVOT_TOL * scale)
    if rows.size == 0:
        return -1
    ratios = np.maximum(xb[rows], 0.0) / w[rows]
    best = ratios.min()
    tied = rows[ratios <= best + ZERO_TOL * (1.0 + best)]
    if bland:
        return int(tied[np.argmin(basis[tied])])
    return int(tied[np.argmax(w[tied])])


def _simplex(A, b, cost, basis, n_enter, max_iter, floor=-np.inf):
    """Minimise cost.x from a feasible basis. Returns (status, iterations):
    0 optimal, 1 unbounded, 2 iteration limit. ``floor`` is a known lower
    bound on the objective; reaching it ends the search.

    Pricing is Dantzig's most negative reduced cost. After STALL_LIMIT
    consecutive degenerate pivots it switches to Bland's lowest-index rule
    until the objective moves again, which rules out cycling.
    """
    stalled = 0
    for it in range(max_iter):
        lu, xb = _basic_solution(A, b, basis)
        if cost[basis] @ xb <= floor + ZERO_TOL:
            return 0, it
        y = lu_solve(lu, cost[basis], trans=1)
        d = cost[:n_enter] - A[:, :n_enter].T @ y
        d[basis[basis < n_enter]] = 0.0
        bland = stalled >= STALL_LIMIT
        if bland:
            cand = np.flatnonzero(d < -COST_TOL)
            if cand.size == 0:
                return 0, it
            j = cand[0]
        else:
            j = int(np.argmin(d))
            if d[j] >= -COST_TOL:
                return 0, it
        w = lu_solve(lu, A[:, j])
        r = _ratio_test(xb, w, basis, bland)
        if r < 0:
            return 1, it
        step = max(xb[r], 0.0) / w[r]
        stalled = stalled + 1 if step * -d[j] <= ZERO_TOL else 0
        basis[r] = j
    return 2, max_iter


def _dual_cleanup(A, b, cost, basis, max_iter):
    """Dual simplex steps from an optimal but slightly infeasible basis.

    Degenerate primal pivots can leave basics at -1e-7 or so on badly scaled
    bases. Each step removes the most negative basic while keeping reduced
    costs nonnegative. Returns the number of steps taken.
    """
    n = A.shape[1]
    for it in range(max_iter):
        lu, xb = _basic_solution(A, b, basis)
        r = int(np.argmin(xb))
        if xb[r] >= -ZERO_TOL:
            return it
        y = lu_solve(lu, cost[basis], trans=1)
        d = np.maximum(cost - A.T @ y, 0.0)
        e = np.zeros(len(basis))
        e[r] = 1.0
        alpha = lu_solve(lu, e, trans=1) @ A
        alpha[basis] = 0.0
        scale = max(1.0, np.abs(alpha).max())
        cols = np.flatnonzero(alpha < -PIVOT_TOL * scale)
        if cols.size == 0:
            raise InfeasibleLP("no entering column repairs a negative basic")
        ratios = d[cols] / -alpha[cols]
        best = ratios.min()
        tied = cols[ratios <= best + ZERO_TOL * (1.0 + best)]
        basis[r] = int(tied[np.argmin(alpha[tied])])
    raise DomainError("dual cleanup iteration limit reached")


def solve_standard(c, A, b, max_iter: int = 100_000) -> LPResult:
    """Minimise c.x subject to A x = b, x >= 0."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    m, n = A.shape

    # phase 1: one artificial per row
    Af = np.hstack([A, np.eye(m)])
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    status, it1 = _simplex(Af, b, cost1, basis, n, max_iter, floor=0.0)
    _, xb = _basic_solution(Af, b, basis)
    infeas = xb[basis >= n].sum()
    if status != 0 or infeas > CHECK_TOL * max(1.0, b.sum()):
        raise InfeasibleLP(f"phase 1 ended with infeasibility {infeas:.3g}")

    # pivot zero-level artificials out; a row that cannot pivot is redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < n:
            continue
        lu = lu_factor(Af[:, basis])
        e = np.zeros(m)
        e[r] = 1.0
        row = lu_solve(lu, e, trans=1) @ A
        row[basis[basis < n]] = 0.0
        j = int(np.argmax(np.abs(row)))
        if abs(row[j]) > 1e-9:
            basis[r] = j
        else:
            keep[r] = False
    rows = np.flatnonzero(keep)
    A_r, b_r, basis = A[rows], b[rows], basis[rows].copy()

    status, it2 = _simplex(A_r, b_r, c, basis, n, max_iter)
    if status == 1:
        raise UnboundedLP("objective is unbounded")
    if status == 2:
        raise DomainError("simplex iteration limit reached")
    # repair round-off infeasibility, then re-check optimality from there
    while _dual_cleanup(A_r, b_r, c, basis, max_iter):
        status, it = _simplex(A_r, b_r, c, basis, n, max_iter)
        it2 += it
        if status != 0:
            raise DomainError("simplex failed after feasibility repair")

    lu, xb = _basic_solution(A_r, b_r, basis)
    x = np.zeros(n)
    x[basis] = xb
    y = lu_solve(lu, c[basis], trans=1)
    reduced = c - A_r.T @ y
    resid = float(np.abs(A @ x - b).max()) if m else 0.0
    if x.min() < -CHECK_TOL or resid > CHECK_TOL:
        raise DomainError(f"basic solution not feasible (min x {x.min():.3g}, residual {resid:.3g})")
    return LPResult(float(c @ x), x, basis, it1 + it2, resid, float(reduced.min()))


def solve_lp(lp, max_iter: int = 100_000) -> LPResult:
    """Maximise an LP given as any object with ``c, A_eq, b_eq, A_ub, b_ub`` and
    an optional ``redundant_rows`` tuple of equality rows to drop.

    Inequality rows with an infinite right-hand side are ignored.
    """
    c = np.asarray(lp.c, dtype=float)
    A_eq = np.asarray(lp.A_eq, dtype=float).reshape(-1, c.size)
    b_eq = np.asarray(lp.b_eq, dtype=float).reshape(-1)
    drop = list(getattr(lp, "redundant_rows", ()) or ())
    if drop:
        keep = np.setdiff1d(np.arange(A_eq.shape[0]), drop)
        A_eq, b_eq = A_eq[keep], b_eq[keep]
    A_ub = np.zeros((0, c.size)) if lp.A_ub is None else np.asarray(lp.A_ub, dtype=float).reshape(-1, c.size)
    b_ub = np.zeros(0) if lp.b_ub is None else np.asarray(lp.b_ub, dtype=float).reshape(-1)
    finite = np.isfinite(b_ub)
    A_ub, b_ub = A_ub[finite], b_ub[finite]
    n, k = c.size, b_ub.size
    A = np.zeros((A_eq.shape[0] + k, n + k))
    A[:A_eq.shape[0], :n] = A_eq
    A[A_eq.shape[0]:, :n] = A_ub
    A[A_eq.shape[0]:, n:] = np.eye(k)
    b = np.concatenate([b_eq, b_ub])
    cost = np.concatenate([-c, np.zeros(k)])
    res = solve_standard(cost, A, b, max_iter=max_iter)
    # reduced costs are reported for the maximisation, so optimality means >= -tol
    return LPResult(-res.value, res.x[:n], res.basis, res.iterations, res.primal_residual,
                    res.min_reduced_cost)
