"""Dense bounded-variable primal simplex.

Two-phase method on an explicit tableau.  Nonbasic variables rest at one of
their finite bounds (or at zero when free), so variable bounds never become
rows.  Phase 1 introduces one artificial column per row whose initial
residual the row's slack cannot absorb, and minimizes total artificial
magnitude; phase 2 optimizes the caller's objective.  Dantzig pricing with a
switch to Bland's rule after a run of degenerate pivots keeps the iteration
finite.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import LpBreakdownError

LE, EQ, GE = "<=", "=", ">="
MIN, MAX = "min", "max"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9
DEGENERATE_CAP = 40

_AT_LB, _AT_UB, _FREE, _BASIC = 0, 1, 2, 3


@dataclass(frozen=True)
class LinearProgram:
    """min/max objective @ x subject to a @ x (rel) rhs and lb <= x <= ub."""

    lb: np.ndarray
    ub: np.ndarray
    a: np.ndarray
    rel: tuple
    rhs: np.ndarray
    objective: np.ndarray = None
    sense: str = MIN

    def __post_init__(self):
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if a.size == 0:
            a = a.reshape(0, lb.size)
        rel = tuple(self.rel)
        obj = self.objective
        if obj is not None:
            obj = np.asarray(obj, dtype=float)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "rhs", rhs)
        object.__setattr__(self, "objective", obj)
        n = lb.size
        if ub.shape != (n,):
            raise ValueError("bound vectors must have equal length")
        if a.shape != (len(rel), n) or rhs.shape != (len(rel),):
            raise ValueError("constraint matrix/relations/rhs shapes disagree")
        if not np.isfinite(a).all() or not np.isfinite(rhs).all():
            raise ValueError("constraint coefficients must be finite")
        if np.isnan(lb).any() or np.isnan(ub).any():
            raise ValueError("bounds may be infinite but not NaN")
        if any(r not in (LE, EQ, GE) for r in rel):
            raise ValueError("relations must be one of <=, =, >=")
        if obj is not None:
            if obj.shape != (n,) or not np.isfinite(obj).all():
                raise ValueError("objective must be a finite vector over the variables")
        if self.sense not in (MIN, MAX):
            raise ValueError("sense must be 'min' or 'max'")

    @property
    def n_vars(self) -> int:
        return self.lb.size

    @property
    def n_rows(self) -> int:
        return len(self.rel)


@dataclass(frozen=True)
class LpOutcome:
    status: str
    assignment: np.ndarray = None
    objective_value: float = None

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL


class _Simplex:
    """One solve owns one tableau; nothing here is shared."""

    def __init__(self, prog: LinearProgram):
        self.prog = prog
        n, m = prog.n_vars, prog.n_rows
        self.n_struct = n
        self.m = m

        # Column layout: structurals, one slack per row, artificials appended.
        lo = list(prog.lb)
        hi = list(prog.ub)
        for r in prog.rel:
            if r == LE:
                lo.append(0.0)
                hi.append(np.inf)
            elif r == GE:
                lo.append(-np.inf)
                hi.append(0.0)
            else:
                lo.append(0.0)
                hi.append(0.0)
        self.lo = np.array(lo, dtype=float)
        self.hi = np.array(hi, dtype=float)
        self.tab = np.hstack([prog.a, np.eye(m)]) if m else np.zeros((0, n + m))
        self.ncols = n + m
        self.art_cols: list = []

        # Nonbasic placement: finite bound nearest zero, else free at zero.
        self.status = np.full(self.ncols, _AT_LB, dtype=np.int8)
        self.xval = np.zeros(self.ncols, dtype=float)
        for j in range(self.ncols):
            lo_f, hi_f = np.isfinite(self.lo[j]), np.isfinite(self.hi[j])
            if lo_f and hi_f:
                if abs(self.lo[j]) <= abs(self.hi[j]):
                    self.status[j], self.xval[j] = _AT_LB, self.lo[j]
                else:
                    self.status[j], self.xval[j] = _AT_UB, self.hi[j]
            elif lo_f:
                self.status[j], self.xval[j] = _AT_LB, self.lo[j]
            elif hi_f:
                self.status[j], self.xval[j] = _AT_UB, self.hi[j]
            else:
                self.status[j], self.xval[j] = _FREE, 0.0

        self.basis = np.empty(m, dtype=int)
        self.phase1_cost = np.zeros(self.ncols, dtype=float)
        residual = prog.rhs - self.tab[:, :n] @ self.xval[:n] if m else np.zeros(0)
        extra_cols = []
        for i in range(m):
            s = n + i
            sval = min(max(residual[i], self.lo[s]), self.hi[s])
            leftover = residual[i] - sval
            if abs(leftover) <= 1e-12:
                self.basis[i] = s
                self.status[s] = _BASIC
                self.xval[s] = residual[i]
            else:
                # Slack rests at the bound nearest the residual; an artificial
                # one-sided toward the leftover carries the infeasibility.
                self.xval[s] = sval
                self.status[s] = _AT_LB if sval == self.lo[s] else _AT_UB
                col = np.zeros(m)
                col[i] = 1.0
                extra_cols.append(col)
                j = self.ncols + len(extra_cols) - 1
                self.art_cols.append(j)
                self.basis[i] = j
                if leftover > 0:
                    self.lo = np.append(self.lo, 0.0)
                    self.hi = np.append(self.hi, np.inf)
                    self.phase1_cost = np.append(self.phase1_cost, 1.0)
                else:
                    self.lo = np.append(self.lo, -np.inf)
                    self.hi = np.append(self.hi, 0.0)
                    self.phase1_cost = np.append(self.phase1_cost, -1.0)
                self.status = np.append(self.status, _BASIC)
                self.xval = np.append(self.xval, leftover)
        if extra_cols:
            self.tab = np.hstack([self.tab, np.column_stack(extra_cols)])
            self.ncols = self.tab.shape[1]
        else:
            self.phase1_cost = self.phase1_cost[: self.ncols]
        self.blocked = np.zeros(self.ncols, dtype=bool)  # columns barred from entering

    # -- pivoting core --------------------------------------------------------

    def iterate(self, cost: np.ndarray, phase: int) -> str:
        m = self.m
        max_iter = 20000 + 200 * (m + self.ncols)
        degen_run = 0
        bland = False
        for _ in range(max_iter):
            cb = cost[self.basis] if m else np.zeros(0)
            reduced = cost - (cb @ self.tab if m else 0.0)

            movable = (self.status != _BASIC) & ~self.blocked & (self.hi - self.lo > 0)
            down_ok = movable & ((self.status == _AT_LB) | (self.status == _FREE)) & (
                reduced < -OPT_TOL
            )
            up_ok = movable & ((self.status == _AT_UB) | (self.status == _FREE)) & (
                reduced > OPT_TOL
            )
            cand = np.nonzero(down_ok | up_ok)[0]
            if cand.size == 0:
                return OPTIMAL
            if bland:
                e = int(cand[0])
            else:
                e = int(cand[np.argmax(np.abs(reduced[cand]))])
            direction = 1.0 if reduced[e] < 0 else -1.0

            col = self.tab[:, e] if m else np.zeros(0)
            # Basic variables move by -t * direction * col.
            limit = np.inf
            leave_row = -1
            leave_to = 0
            step = -direction * col
            for i in range(m):
                w = step[i]
                if w > PIVOT_TOL:
                    bound = self.hi[self.basis[i]]
                    if np.isfinite(bound):
                        t = (bound - self.xval[self.basis[i]]) / w
                        if t < limit - 1e-12 or (
                            bland and abs(t - limit) <= 1e-12 and leave_row >= 0
                            and self.basis[i] < self.basis[leave_row]
                        ):
                            limit, leave_row, leave_to = max(t, 0.0), i, _AT_UB
                elif w < -PIVOT_TOL:
                    bound = self.lo[self.basis[i]]
                    if np.isfinite(bound):
                        t = (bound - self.xval[self.basis[i]]) / w
                        if t < limit - 1e-12 or (
                            bland and abs(t - limit) <= 1e-12 and leave_row >= 0
                            and self.basis[i] < self.basis[leave_row]
                        ):
                            limit, leave_row, leave_to = max(t, 0.0), i, _AT_LB

            flip = np.inf
            if np.isfinite(self.lo[e]) and np.isfinite(self.hi[e]):
                flip = self.hi[e] - self.lo[e]

            t_star = min(limit, flip)
            if not np.isfinite(t_star):
                if phase == 1:
                    raise LpBreakdownError("phase-1 objective unbounded; tableau corrupt")
                return UNBOUNDED

            if t_star >= flip - 1e-12 and flip <= limit:
                # Bound flip: the entering variable runs to its other bound.
                self.xval[e] = self.hi[e] if direction > 0 else self.lo[e]
                self.status[e] = _AT_UB if direction > 0 else _AT_LB
                if m:
                    self.xval[self.basis] += step * t_star
                degen_run = 0
                bland = False
                continue

            if leave_row < 0:
                raise LpBreakdownError("ratio test found no blocking row")
            w_piv = self.tab[leave_row, e]
            if abs(w_piv) < PIVOT_TOL:
                raise LpBreakdownError("pivot element below tolerance")

            if t_star <= 1e-10:
                degen_run += 1
                if degen_run > DEGENERATE_CAP:
                    bland = True
            else:
                degen_run = 0
                bland = False

            leaving = self.basis[leave_row]
            if m:
                self.xval[self.basis] += step * t_star
            self.xval[e] = self.xval[e] + direction * t_star
            self.xval[leaving] = self.lo[leaving] if leave_to == _AT_LB else self.hi[leaving]
            self.status[leaving] = leave_to
            self.status[e] = _BASIC
            self.basis[leave_row] = e

            piv_row = self.tab[leave_row, :] / w_piv
            self.tab -= np.outer(self.tab[:, e], piv_row)
            self.tab[leave_row, :] = piv_row
        raise LpBreakdownError("iteration limit exceeded; possible cycling")

    # -- phases ---------------------------------------------------------------

    def solve(self) -> LpOutcome:
        prog = self.prog
        if (prog.lb > prog.ub + 1e-12).any():
            return LpOutcome(status=INFEASIBLE)

        if self.art_cols:
            self.iterate(self.phase1_cost, phase=1)
            infeas = float(self.phase1_cost @ self.xval)
            if abs(infeas) > FEAS_TOL:
                return LpOutcome(status=INFEASIBLE)
            self._retire_artificials()

        obj_status = OPTIMAL
        if prog.objective is not None:
            cost = np.zeros(self.ncols)
            sign = 1.0 if prog.sense == MIN else -1.0
            cost[: self.n_struct] = sign * prog.objective
            obj_status = self.iterate(cost, phase=2)
            if obj_status == UNBOUNDED:
                return LpOutcome(status=UNBOUNDED)

        x = self.xval[: self.n_struct].copy()
        self._verify(x)
        value = None
        if prog.objective is not None:
            value = float(prog.objective @ x)
        return LpOutcome(status=OPTIMAL, assignment=x, objective_value=value)

    def _retire_artificials(self):
        """Freeze artificials at zero; pivot basic ones out where possible."""
        art = set(self.art_cols)
        for i in range(self.m):
            b = self.basis[i]
            if b not in art:
                continue
            row = self.tab[i, :]
            pick = -1
            best = PIVOT_TOL
            for j in range(self.ncols):
                if j in art or self.status[j] == _BASIC:
                    continue
                if abs(row[j]) > best:
                    best = abs(row[j])
                    pick = j
            if pick < 0:
                continue  # redundant row; artificial stays basic at ~0
            w_piv = row[pick]
            piv_row = row / w_piv
            self.tab -= np.outer(self.tab[:, pick], piv_row)
            self.tab[i, :] = piv_row
            self.status[b] = _AT_LB
            old = self.xval[pick]
            self.xval[b] = 0.0
            self.xval[pick] = old  # degenerate swap: values unchanged
            self.status[pick] = _BASIC
            self.basis[i] = pick
        for j in self.art_cols:
            self.lo[j] = 0.0
            self.hi[j] = 0.0
            self.blocked[j] = True
            if self.status[j] != _BASIC:
                self.xval[j] = 0.0

    def _verify(self, x):
        prog = self.prog
        lhs = prog.a @ x if prog.n_rows else np.zeros(0)
        viol = 0.0
        for i, r in enumerate(prog.rel):
            d = lhs[i] - prog.rhs[i]
            if r == LE:
                viol = max(viol, d)
            elif r == GE:
                viol = max(viol, -d)
            else:
                viol = max(viol, abs(d))
        lbv = np.where(np.isfinite(prog.lb), prog.lb - x, -np.inf).max(initial=0.0)
        ubv = np.where(np.isfinite(prog.ub), x - prog.ub, -np.inf).max(initial=0.0)
        viol = max(viol, lbv, ubv)
        if viol > 50 * FEAS_TOL:
            raise LpBreakdownError(
                "final point violates constraints by %.3g" % viol
            )


def lp_solve(prog: LinearProgram) -> LpOutcome:
    """Solve the program; status optimal/infeasible/unbounded."""
    return _Simplex(prog).solve()


def lp_feasible(prog: LinearProgram) -> LpOutcome:
    """Feasibility only (phase 1); any objective on ``prog`` is ignored."""
    if prog.objective is None:
        return _Simplex(prog).solve()
    stripped = LinearProgram(
        lb=prog.lb, ub=prog.ub, a=prog.a, rel=prog.rel, rhs=prog.rhs
    )
    return _Simplex(stripped).solve()
