"""A small dense linear programming engine.

``solve`` handles general problems (bounds, <=, =, >= rows) with a two-phase
revised simplex. ``solve_with_rows`` handles problems whose constraint family
is too large to write down: it solves the LP dual by column generation, so
each row returned by the oracle is appended as a new dual column and the
simplex continues from the current basis instead of restarting.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
_PIVOT_TOL = 1e-9
_REFACTOR_EVERY = 100
_DEGENERATE_SWITCH = 50


class SolverError(RuntimeError):
    pass


class RowGenerationLimit(SolverError):
    """Row generation ran out of rounds; ``best`` holds the last relaxation."""

    def __init__(self, message: str, best: "LpSolution"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class Constraint:
    coeffs: np.ndarray
    relation: str  # "<=", "=", ">="
    rhs: float


@dataclass
class LpProblem:
    objective: np.ndarray
    sense: str = "max"
    lower: np.ndarray | None = None  # default 0
    upper: np.ndarray | None = None  # default +inf
    constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = len(self.objective)
        self.lower = np.zeros(n) if self.lower is None else np.asarray(self.lower, dtype=float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', not {self.sense!r}")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise ValueError("bounds do not match the number of variables")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")
        for c in self.constraints:
            self._check(c)

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def _check(self, c: Constraint) -> None:
        if len(c.coeffs) != self.n_vars:
            raise ValueError("constraint length does not match the number of variables")
        if c.relation not in ("<=", "=", ">="):
            raise ValueError(f"bad relation {c.relation!r}")
        if not np.isfinite(c.rhs):
            raise ValueError("constraint rhs must be finite")

    def add(self, coeffs, relation: str, rhs: float) -> int:
        c = Constraint(np.asarray(coeffs, dtype=float), relation, float(rhs))
        self._check(c)
        self.constraints.append(c)
        return len(self.constraints) - 1


@dataclass
class LpSolution:
    status: str  # "optimal", "infeasible", "unbounded"
    objective_value: float = np.nan
    variable_values: np.ndarray | None = None
    active_constraint_ids: list[int] = field(default_factory=list)
    iterations: int = 0
    rounds: int = 0
    generated_rows: list[tuple[np.ndarray, float]] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# A row oracle maps a candidate x to violated rows (coeffs, rhs) meaning
# coeffs . x <= rhs; an empty list means x satisfies the hidden family.
RowOracle = Callable[[np.ndarray], Sequence[tuple[np.ndarray, float]]]


class _Simplex:
    """Revised primal simplex for ``min c.y, A y = b, y >= 0`` from a feasible basis."""

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: Sequence[int]):
        self.A = np.array(A, dtype=float)
        self.b = np.array(b, dtype=float)
        self.c = np.array(c, dtype=float)
        self.basis = list(basis)
        self.blocked = np.zeros(self.A.shape[1], dtype=bool)
        self.iterations = 0
        self._refactor()

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def _refactor(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.B0inv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise SolverError("singular basis") from exc
        # basis inverse = E_k ... E_1 B0inv, one eta (r, u) per pivot since
        self.etas: list[tuple[int, np.ndarray]] = []
        self.xB = self.B0inv @ self.b
        self.xB[np.abs(self.xB) < 1e-13] = 0.0

    def ftran(self, a: np.ndarray) -> np.ndarray:
        x = self.B0inv @ a
        for r, u in self.etas:
            t = x[r] / u[r]
            x -= t * u
            x[r] = t
        return x

    def btran(self, w: np.ndarray) -> np.ndarray:
        w = np.array(w, dtype=float)
        for r, u in reversed(self.etas):
            w[r] -= (w @ u - w[r]) / u[r]
        return w @ self.B0inv

    def row(self, r: int) -> np.ndarray:
        e = np.zeros(self.m)
        e[r] = 1.0
        return self.btran(e)

    def add_columns(self, cols: np.ndarray, costs: np.ndarray) -> None:
        self.A = np.hstack([self.A, np.asarray(cols, dtype=float).reshape(self.m, -1)])
        self.c = np.concatenate([self.c, np.asarray(costs, dtype=float)])
        self.blocked = np.concatenate([self.blocked, np.zeros(len(costs), dtype=bool)])

    def multipliers(self) -> np.ndarray:
        return self.btran(self.c[self.basis])

    def values(self) -> np.ndarray:
        y = np.zeros(self.A.shape[1])
        y[self.basis] = self.xB
        return y

    def run(self, max_iter: int = 200000) -> str:
        """Pivot to optimality; returns "optimal" or "unbounded".

        A long run of degenerate pivots triggers a one-off random shift of the
        basic values; the shift is undone at the end by dual simplex pivots.
        After a second stall the entering rule falls back to Bland's.
        """
        degenerate = 0
        bland = shifted = False
        saved_b = None
        while True:
            if self.iterations >= max_iter:
                raise SolverError("iteration limit reached")
            pi = self.multipliers()
            d = self.c - pi @ self.A
            d[self.basis] = 0.0
            d[self.blocked] = 0.0
            candidates = np.flatnonzero(d < -OPT_TOL)
            if len(candidates) == 0:
                if saved_b is None:
                    return "optimal"
                self.b = saved_b
                saved_b = None
                self._refactor()
                self._dual_cleanup(max_iter)
                continue
            if degenerate >= _DEGENERATE_SWITCH:
                if not shifted:
                    saved_b = self.b.copy()
                    self._shift()
                    shifted = True
                    degenerate = 0
                else:
                    bland = True
            j = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])
            u = self.ftran(self.A[:, j])
            rows = np.flatnonzero(u > _PIVOT_TOL)
            if len(rows) == 0:
                return "unbounded"
            ratios = self.xB[rows] / u[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12]
            if bland:
                r = int(tied[np.argmin(np.asarray(self.basis)[tied])])
            else:
                r = int(tied[np.argmax(u[tied])])
            step = self.xB[r] / u[r]
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            self._pivot(r, j, u)

    def _shift(self) -> None:
        rng = np.random.default_rng(12345)
        delta = rng.uniform(1e-7, 1e-6, self.m) * max(1.0, np.abs(self.b).max())
        self.b = self.b + self.A[:, self.basis] @ delta
        self._refactor()

    def _dual_cleanup(self, max_iter: int) -> None:
        """Dual simplex pivots until the basic values are nonnegative again."""
        scale = max(1.0, np.abs(self.b).max())
        while True:
            r = int(np.argmin(self.xB))
            if self.xB[r] >= -FEAS_TOL * scale:
                self.xB[self.xB < 0] = 0.0
                return
            if self.iterations >= max_iter:
                raise SolverError("iteration limit reached")
            alpha = self.row(r) @ self.A
            d = self.c - self.multipliers() @ self.A
            ok = alpha < -_PIVOT_TOL
            ok[self.basis] = False
            ok[self.blocked] = False
            cols = np.flatnonzero(ok)
            if len(cols) == 0:
                raise SolverError("primal infeasible after removing the shift")
            ratio = np.maximum(d[cols], 0.0) / -alpha[cols]
            j = int(cols[np.argmin(ratio)])
            self._pivot(r, j, self.ftran(self.A[:, j]))

    def _pivot(self, r: int, j: int, u: np.ndarray) -> None:
        self.iterations += 1
        self.basis[r] = j
        if len(self.etas) + 1 >= _REFACTOR_EVERY:
            self._refactor()
            return
        step = self.xB[r] / u[r]
        self.xB -= step * u
        self.xB[r] = step
        self.xB[np.abs(self.xB) < 1e-13] = 0.0
        self.etas.append((r, u.copy()))


def _standard_form(p: LpProblem):
    """Rewrite ``p`` as min c.y, A y = b, y >= 0.

    Column t of the structural part stands for ``sign[t] * (x[var[t]] - shift)``.
    """
    n = p.n_vars
    c_sign = -1.0 if p.sense == "max" else 1.0
    var, sign = [], []
    shift = np.zeros(n)
    extra_rows = []  # (column, width) for variables bounded on both sides
    for k in range(n):
        lo, hi = p.lower[k], p.upper[k]
        if np.isfinite(lo):
            shift[k] = lo
            var.append(k)
            sign.append(1.0)
            if np.isfinite(hi):
                extra_rows.append((len(var) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[k] = hi
            var.append(k)
            sign.append(-1.0)
        else:
            var += [k, k]
            sign += [1.0, -1.0]
    var = np.array(var, dtype=np.int64)
    sign = np.array(sign)
    costs = c_sign * p.objective[var] * sign
    n_struct = len(var)
    rels = [con.relation for con in p.constraints] + ["<="] * len(extra_rows)
    m = len(rels)
    n_slack = sum(r != "=" for r in rels)
    A = np.zeros((m, n_struct + n_slack))
    b = np.zeros(m)
    for i, con in enumerate(p.constraints):
        A[i, :n_struct] = con.coeffs[var] * sign
        b[i] = con.rhs - con.coeffs @ shift
    for i, (col, width) in enumerate(extra_rows, start=len(p.constraints)):
        A[i, col] = 1.0
        b[i] = width
    slack_of_row = {}
    s = n_struct
    for i, rel in enumerate(rels):
        if rel != "=":
            A[i, s] = 1.0 if rel == "<=" else -1.0
            slack_of_row[i] = s
            s += 1
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    c = np.concatenate([costs, np.zeros(n_slack)])
    return A, b, c, (var, sign), shift, slack_of_row


def solve(p: LpProblem) -> LpSolution:
    A, b, c, (var, sign), shift, slack_of_row = _standard_form(p)
    m, n = A.shape
    if m == 0:
        # only one-sided bounds: optimal at y = 0 unless some column improves forever
        if np.any(c < 0):
            return LpSolution("unbounded")
        return LpSolution("optimal", float(p.objective @ shift), shift.copy())

    # phase 1: a slack with +1 can start basic, other rows get an artificial
    basis = []
    art_cols = []
    for i in range(m):
        s = slack_of_row.get(i)
        if s is not None and A[i, s] > 0:
            basis.append(s)
        else:
            basis.append(n + len(art_cols))
            art_cols.append(i)
    art = np.zeros((m, len(art_cols)))
    for t, i in enumerate(art_cols):
        art[i, t] = 1.0
    A1 = np.hstack([A, art])
    c1 = np.concatenate([np.zeros(n), np.ones(len(art_cols))])
    sx = _Simplex(A1, b, c1, basis)
    if art_cols:
        sx.run()
        if sx.c[sx.basis] @ sx.xB > 1e-8 * max(1.0, np.abs(b).max()):
            return LpSolution("infeasible", iterations=sx.iterations)
        _drive_out_artificials(sx, n)
    sx.blocked[n:] = True
    sx.c = np.concatenate([c, np.zeros(len(art_cols))])
    status = sx.run()
    if status == "unbounded":
        return LpSolution("unbounded", iterations=sx.iterations)
    sx._refactor()
    y = sx.values()[:n]
    x = shift + np.bincount(var, weights=sign * y[: len(var)], minlength=p.n_vars)
    active = []
    for i, con in enumerate(p.constraints):
        lhs = con.coeffs @ x
        if con.relation == "=" or abs(lhs - con.rhs) <= FEAS_TOL * max(1.0, abs(con.rhs)):
            active.append(i)
    sol = LpSolution("optimal", float(p.objective @ x), x, active, sx.iterations)
    _check_feasible(p, x)
    return sol


def _drive_out_artificials(sx: _Simplex, n_real: int) -> None:
    """Pivot zero-valued artificials out of the basis where a real column allows."""
    for r in range(sx.m):
        if sx.basis[r] < n_real:
            continue
        row = sx.row(r) @ sx.A[:, :n_real]
        nonbasic = np.ones(n_real, dtype=bool)
        nonbasic[[j for j in sx.basis if j < n_real]] = False
        options = np.flatnonzero(nonbasic & (np.abs(row) > 1e-9))
        if len(options):
            j = int(options[np.argmax(np.abs(row[options]))])
            sx._pivot(r, j, sx.ftran(sx.A[:, j]))
    sx._refactor()


def _check_feasible(p: LpProblem, x: np.ndarray) -> None:
    scale = max(1.0, np.abs(x).max(initial=0.0))
    tol = FEAS_TOL * scale * 10
    if np.any(x < p.lower - tol) or np.any(x > p.upper + tol):
        raise SolverError("solution violates variable bounds")
    for i, con in enumerate(p.constraints):
        lhs = con.coeffs @ x
        bad = (
            (con.relation == "<=" and lhs > con.rhs + tol)
            or (con.relation == ">=" and lhs < con.rhs - tol)
            or (con.relation == "=" and abs(lhs - con.rhs) > tol)
        )
        if bad:
            raise SolverError(f"constraint {i} violated by {lhs - con.rhs:.3e}")


def _as_upper_rows(p: LpProblem) -> list[tuple[np.ndarray, float]]:
    rows = []
    for con in p.constraints:
        if con.relation in ("<=", "="):
            rows.append((con.coeffs, con.rhs))
        if con.relation in (">=", "="):
            rows.append((-con.coeffs, -con.rhs))
    return rows


def solve_with_rows(
    p: LpProblem,
    oracle: RowOracle,
    max_rounds: int = 10000,
    tol: float = FEAS_TOL,
) -> LpSolution:
    """Maximize/minimize ``p`` subject to its rows plus every row the oracle can produce.

    Each round solves the current relaxation, asks the oracle for rows the
    relaxed optimum violates and adds them. Raises RowGenerationLimit if the
    oracle still reports violations after ``max_rounds`` rounds.
    """
    n = p.n_vars
    c = p.objective if p.sense == "max" else -p.objective
    rows = _as_upper_rows(p)
    # dual columns for the bounds: x_k <= u_k is (e_k, u_k), -x_k <= -l_k is (-e_k, -l_k)
    start = []
    for k in range(n):
        if c[k] > 0 and np.isfinite(p.upper[k]):
            start.append((k, 1.0, p.upper[k]))
        elif c[k] < 0 and np.isfinite(p.lower[k]):
            start.append((k, -1.0, -p.lower[k]))
        elif c[k] == 0 and (np.isfinite(p.upper[k]) or np.isfinite(p.lower[k])):
            if np.isfinite(p.upper[k]):
                start.append((k, 1.0, p.upper[k]))
            else:
                start.append((k, -1.0, -p.lower[k]))
    if len(start) < n:
        return _solve_with_rows_restarting(p, oracle, max_rounds)

    cols = [np.zeros(n) for _ in range(n)]
    costs = []
    for k, s, h in start:
        cols[k][k] = s
        costs.append(h)
    basis = list(range(n))
    # remaining finite bounds become ordinary dual columns too
    bound_rows = []
    for k in range(n):
        if np.isfinite(p.upper[k]) and start[k][1] != 1.0:
            bound_rows.append((k, 1.0, p.upper[k]))
        if np.isfinite(p.lower[k]) and start[k][1] != -1.0:
            bound_rows.append((k, -1.0, -p.lower[k]))
    for k, s, h in bound_rows:
        col = np.zeros(n)
        col[k] = s
        cols.append(col)
        costs.append(h)
    n_fixed = len(cols)
    for g, h in rows:
        cols.append(np.asarray(g, dtype=float))
        costs.append(h)
    A = np.array(cols).T
    sx = _Simplex(A, c, np.array(costs), basis)
    generated: list[tuple[np.ndarray, float]] = []
    rounds = 0
    while True:
        status = sx.run()
        if status == "unbounded":
            return LpSolution("infeasible", iterations=sx.iterations, rounds=rounds)
        sx._refactor()
        x = sx.multipliers()
        violated = list(oracle(x))
        if not violated:
            break
        if rounds >= max_rounds:
            best = _row_solution(p, sx, x, n_fixed, rows, generated, rounds)
            raise RowGenerationLimit(f"still violated after {rounds} rounds", best)
        rounds += 1
        new_cols = np.array([np.asarray(g, dtype=float) for g, _ in violated]).T
        sx.add_columns(new_cols, np.array([h for _, h in violated], dtype=float))
        generated.extend((np.asarray(g, dtype=float), float(h)) for g, h in violated)
    return _row_solution(p, sx, x, n_fixed, rows, generated, rounds)


def _row_solution(p, sx, x, n_fixed, rows, generated, rounds) -> LpSolution:
    y = sx.values()
    all_rows = rows + generated
    active = [i for i in range(len(all_rows)) if y[n_fixed + i] > 1e-12]
    return LpSolution(
        "optimal",
        float(p.objective @ x),
        x,
        active,
        sx.iterations,
        rounds,
        generated,
    )


def _solve_with_rows_restarting(p: LpProblem, oracle: RowOracle, max_rounds: int) -> LpSolution:
    """Fallback when bounds do not give a starting dual basis: re-solve each round."""
    work = LpProblem(p.objective, p.sense, p.lower, p.upper, list(p.constraints))
    generated = []
    for rounds in range(max_rounds + 1):
        sol = solve(work)
        if not sol.optimal:
            sol.rounds = rounds
            return sol
        violated = list(oracle(sol.variable_values))
        if not violated:
            sol.rounds = rounds
            sol.generated_rows = generated
            return sol
        if rounds == max_rounds:
            raise RowGenerationLimit(f"still violated after {rounds} rounds", sol)
        for g, h in violated:
            work.add(g, "<=", h)
            generated.append((np.asarray(g, dtype=float), float(h)))
    raise AssertionError("unreachable")
