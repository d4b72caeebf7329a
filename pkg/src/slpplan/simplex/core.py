"""Self-contained two-phase simplex for the planner's LPs.

The method is the bounded-variable primal simplex in computational form:

    min c'x   s.t.   A x = r,   row_lb <= r <= row_ub,   col_lb <= x <= col_ub,

where every constraint row gets a row-activity variable r (equality rows pin
row_lb == row_ub, '<=' rows leave row_lb = -inf).  A basis consists of m
variables (structural or row); all nonbasic variables sit on a bound (free
variables at zero).

Instead of a full m x m basis inverse, the solver maintains the inverse of the
n x n *working matrix* M: one row per nonbasic row (its constraint
coefficients) or per nonbasic structural variable (a unit row).  Every basis
exchange is a single row replacement of M, so each pivot costs one
Sherman-Morrison rank-1 update plus one back-transformation, both O(n^2) with
n the structural variable count -- far below the row count of the assembled
planning LPs.  Phase 1 minimizes the sum of bound violations of basic
variables (the artificial-free equivalent of driving artificials to zero) and
certifies infeasibility when that sum cannot reach zero.

Pricing is Dantzig's rule with a deterministic lowest-index tie-break; Bland's
rule engages after 5*(m+n) pivots to guarantee termination.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..errors import SimplexBreakdown
from .backend import BACKEND_NAME, kernels

__all__ = ["LpSolution", "solve", "warm_start_solve",
           "TOL_FEAS", "TOL_DJ", "TOL_PIVOT"]

TOL_FEAS = 1e-7    # feasibility / bound-violation tolerance
TOL_DJ = 1e-9      # reduced-cost optimality tolerance
TOL_PIVOT = 1e-10  # minimum acceptable pivot magnitude
_DELTA_TOL = 1e-9  # minimum |rate| for a basic variable to block the step
_REFACTOR_EVERY = 128

BASIC, NB_LOWER, NB_UPPER, NB_FREE, NB_FIXED = 0, 1, 2, 3, 4


@dataclass
class LpSolution:
    """Certified solver outcome.

    status is exactly one of "optimal", "infeasible", "unbounded".  On
    optimal, x holds the structural variable values, and basis/at_upper
    snapshot the final basis for warm starts.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    pivots: int
    basis: np.ndarray | None = None
    at_upper: np.ndarray | None = None
    max_violation: float = 0.0
    phase1_pivots: int = 0
    warm_started: bool = False
    backend: str = BACKEND_NAME
    duals: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


class _Simplex:
    def __init__(self, lp, check_invariants: bool = False):
        self.n = int(lp.n)
        self.m_eq = lp.A_eq.shape[0]
        m_in = lp.A_in.shape[0]
        self.m = self.m_eq + m_in
        self.A = sp.vstack([lp.A_eq, lp.A_in], format="csr") if self.m else sp.csr_matrix((0, self.n))
        self.A.sort_indices()
        self.AT = self.A.T.tocsr()
        self.c = np.asarray(lp.c, dtype=float)

        row_lb = np.concatenate([np.asarray(lp.b_eq, float), np.full(m_in, -np.inf)])
        row_ub = np.concatenate([np.asarray(lp.b_eq, float), np.asarray(lp.b_in, float)])
        self.vlb = np.concatenate([np.asarray(lp.lb, float), row_lb])
        self.vub = np.concatenate([np.asarray(lp.ub, float), row_ub])
        self.nv = self.n + self.m

        self.status = np.empty(self.nv, dtype=np.int8)
        self.value = np.zeros(self.nv)
        self.Minv = np.eye(self.n)
        # slot bookkeeping: slot_kind[slot] = row id r (>=0) or ~j for a dummy
        # row pinning structural j
        self.slot_kind = np.empty(self.n, dtype=np.int64)
        self.row_slot = np.full(self.m, -1, dtype=np.int64)
        self.struct_slot = np.full(self.n, -1, dtype=np.int64)

        self.pivots = 0
        self.phase1_pivots = 0
        self.check_invariants = check_invariants
        self._since_refactor = 0
        self._bland_after = 5 * (self.m + self.n)
        self._max_pivots = 50 * (self.m + self.n) + 10_000

    # ------------------------------------------------------------------ setup

    def _pin_nonbasic(self, j: int):
        lo, hi = self.vlb[j], self.vub[j]
        if lo == hi:
            self.status[j] = NB_FIXED
            self.value[j] = lo
        elif np.isinf(lo) and np.isinf(hi):
            self.status[j] = NB_FREE
            self.value[j] = 0.0
        elif np.isinf(hi) or (not np.isinf(lo) and abs(lo) <= abs(hi)):
            self.status[j] = NB_LOWER
            self.value[j] = lo
        else:
            self.status[j] = NB_UPPER
            self.value[j] = hi

    def cold_start(self):
        """All-row basis: every row variable basic, structurals pinned at bounds."""
        for j in range(self.n):
            self._pin_nonbasic(j)
        self.status[self.n:] = BASIC
        self.slot_kind[:] = ~np.arange(self.n)
        self.struct_slot[:] = np.arange(self.n)
        self.row_slot[:] = -1
        self.Minv = np.eye(self.n)
        self.value[self.n:] = self.A @ self.value[: self.n]
        self._since_refactor = 0

    def warm_start(self, basis, at_upper) -> bool:
        """Install a basis snapshot; returns False (caller falls back to cold)
        if the hint is malformed or the resulting working matrix is singular."""
        basis = np.asarray(basis, dtype=np.int64)
        if (
            basis.ndim != 1
            or len(basis) != self.m
            or len(np.unique(basis)) != self.m
            or np.any(basis < 0)
            or np.any(basis >= self.nv)
        ):
            return False
        at_upper = np.asarray(at_upper, dtype=bool)
        if at_upper.shape != (self.nv,):
            return False
        self.status[:] = NB_LOWER
        for j in range(self.nv):
            lo, hi = self.vlb[j], self.vub[j]
            if lo == hi:
                self.status[j] = NB_FIXED
                self.value[j] = lo
            elif at_upper[j] and not np.isinf(hi):
                self.status[j] = NB_UPPER
                self.value[j] = hi
            elif not np.isinf(lo):
                self.status[j] = NB_LOWER
                self.value[j] = lo
            elif not np.isinf(hi):
                self.status[j] = NB_UPPER
                self.value[j] = hi
            else:
                self.status[j] = NB_FREE
                self.value[j] = 0.0
        self.status[basis] = BASIC
        self.row_slot[:] = -1
        self.struct_slot[:] = -1
        slot = 0
        for r in range(self.m):
            if self.status[self.n + r] != BASIC:
                self.slot_kind[slot] = r
                self.row_slot[r] = slot
                slot += 1
        for j in range(self.n):
            if self.status[j] != BASIC:
                self.slot_kind[slot] = ~j
                self.struct_slot[j] = slot
                slot += 1
        if slot != self.n:
            return False
        try:
            self._refactor()
        except SimplexBreakdown:
            return False
        return True

    # ------------------------------------------------------- linear algebra

    def _build_M(self):
        M = np.empty((self.n, self.n))
        for slot in range(self.n):
            kind = self.slot_kind[slot]
            if kind >= 0:
                M[slot] = self.A.getrow(kind).toarray()
            else:
                M[slot] = 0.0
                M[slot, ~kind] = 1.0
        return M

    def _refactor(self):
        M = self._build_M()
        try:
            self.Minv = np.linalg.inv(M)
        except np.linalg.LinAlgError:
            raise SimplexBreakdown("singular working basis") from None
        self._recompute_values()
        self._since_refactor = 0

    def _recompute_values(self):
        rhs = np.empty(self.n)
        for slot in range(self.n):
            kind = self.slot_kind[slot]
            rhs[slot] = self.value[self.n + kind] if kind >= 0 else self.value[~kind]
        x = self.Minv @ rhs
        nb_struct = self.status[: self.n] != BASIC
        x[nb_struct] = self.value[: self.n][nb_struct]
        self.value[: self.n] = x
        if self.m:
            act = self.A @ x
            basic_rows = self.status[self.n:] == BASIC
            self.value[self.n:][basic_rows] = act[basic_rows]

    def _new_slot_row(self, leaving: int) -> np.ndarray:
        if leaving >= self.n:  # a row variable leaves: its row joins M
            return np.asarray(self.A.getrow(leaving - self.n).todense()).ravel()
        row = np.zeros(self.n)
        row[leaving] = 1.0
        return row

    def _consistency_residual(self) -> float:
        if not self.m:
            return 0.0
        act = self.A @ self.value[: self.n]
        return float(np.max(np.abs(act - self.value[self.n:]))) if self.m else 0.0

    # ------------------------------------------------------------- pricing

    def _effective_costs(self, phase: int) -> np.ndarray:
        ce = np.zeros(self.nv)
        if phase == 2:
            ce[: self.n] = self.c
            return ce
        basic = self.status == BASIC
        below = basic & (self.value < self.vlb - TOL_FEAS)
        above = basic & (self.value > self.vub + TOL_FEAS)
        ce[below] = -1.0
        ce[above] = 1.0
        return ce

    def _reduced_costs(self, ce: np.ndarray) -> np.ndarray:
        """d over all variables; meaningful for nonbasic ones only."""
        y2 = np.zeros(self.m)
        basic_rows = self.status[self.n:] == BASIC
        rc = ce[self.n:][basic_rows]
        if np.any(rc):
            y2[basic_rows] = -rc
            t = self.AT @ y2
        else:
            t = 0.0
        h = ce[: self.n] - t
        yhat = kernels.btran(self.Minv, h)
        d = np.zeros(self.nv)
        nb_s = self.struct_slot >= 0
        d[: self.n][nb_s] = yhat[self.struct_slot[nb_s]]
        nb_r = self.row_slot >= 0
        d[self.n:][nb_r] = ce[self.n:][nb_r] + yhat[self.row_slot[nb_r]]
        return d

    def _choose_entering(self, d: np.ndarray, bland: bool):
        """Returns (variable id, direction) or (None, 0) at optimality."""
        st = self.status
        can_up = ((st == NB_LOWER) | (st == NB_FREE)) & (d < -TOL_DJ)
        can_dn = ((st == NB_UPPER) | (st == NB_FREE)) & (d > TOL_DJ)
        eligible = can_up | can_dn
        if not np.any(eligible):
            return None, 0
        idx = np.nonzero(eligible)[0]
        if bland:
            q = int(idx[0])
        else:
            q = int(idx[np.argmax(np.abs(d[idx]))])
        return q, (1 if d[q] < 0 else -1)

    # --------------------------------------------------------------- pivots

    def _direction(self, q: int):
        slot = self.struct_slot[q] if q < self.n else self.row_slot[q - self.n]
        dx = kernels.take_col(self.Minv, slot)
        nb = self.struct_slot >= 0
        dx[nb] = 0.0
        if q < self.n:
            dx[q] = 1.0
        drow = self.A @ dx if self.m else np.zeros(0)
        return slot, dx, drow

    def _apply_step(self, q, direction, theta, dx, drow):
        if theta != 0.0:
            self.value[: self.n] += direction * theta * dx
            if self.m:
                self.value[self.n:] += direction * theta * drow
            # nonbasic variables are pinned exactly
            nb_s = self.struct_slot >= 0
            if q < self.n:
                nb_s = nb_s.copy()
                nb_s[q] = False
            pinned = np.nonzero(nb_s)[0]
            # restore pins (their direction components are exact zeros modulo fp)
            for j in pinned:
                if self.status[j] == NB_FREE:
                    self.value[j] = 0.0
                elif self.status[j] == NB_UPPER:
                    self.value[j] = self.vub[j]
                else:
                    self.value[j] = self.vlb[j]

    def _pivot(self, q, direction, theta, leaving, leave_bound, slot_q, dx, drow):
        self._apply_step(q, direction, theta, dx, drow)
        self.value[q] = self.value[q] if q < self.n else self.value[q]
        new_row = self._new_slot_row(leaving)
        den = kernels.row_replace(self.Minv, slot_q, new_row, TOL_PIVOT)
        if abs(den) < TOL_PIVOT:
            # stale inverse may be to blame: rebuild and retry once
            self._refactor()
            den = kernels.row_replace(self.Minv, slot_q, new_row, TOL_PIVOT)
            if abs(den) < TOL_PIVOT:
                raise SimplexBreakdown(
                    f"pivot magnitude {abs(den):.3e} below tolerance {TOL_PIVOT:g}"
                )
        # bookkeeping: q becomes basic, `leaving` takes the slot
        if q < self.n:
            self.struct_slot[q] = -1
        else:
            self.row_slot[q - self.n] = -1
        if leaving < self.n:
            self.slot_kind[slot_q] = ~leaving
            self.struct_slot[leaving] = slot_q
        else:
            self.slot_kind[slot_q] = leaving - self.n
            self.row_slot[leaving - self.n] = slot_q
        self.status[q] = BASIC
        self.status[leaving] = NB_UPPER if leave_bound == self.vub[leaving] else NB_LOWER
        if self.vlb[leaving] == self.vub[leaving]:
            self.status[leaving] = NB_FIXED
        self.value[leaving] = leave_bound
        self.pivots += 1
        self._since_refactor += 1
        if self._since_refactor >= _REFACTOR_EVERY:
            self._refactor()
        if self.check_invariants:
            res = self._consistency_residual()
            if res > 1e-9:
                self._refactor()
                res = self._consistency_residual()
                if res > 1e-9:
                    raise SimplexBreakdown(f"consistency residual {res:.3e} after pivot")

    def _max_violation(self) -> float:
        basic = self.status == BASIC
        lo = np.maximum(self.vlb[basic] - self.value[basic], 0.0)
        hi = np.maximum(self.value[basic] - self.vub[basic], 0.0)
        both = np.maximum(lo, hi)
        return float(both.max()) if len(both) else 0.0

    # ---------------------------------------------------------------- phases

    def run_phase(self, phase: int) -> str:
        """Iterate until optimal ("done"), "infeasible" (phase 1 stalls above
        tolerance), or "unbounded" (phase 2 ray)."""
        while True:
            if phase == 1 and self._max_violation() <= TOL_FEAS:
                return "done"
            if self.pivots >= self._max_pivots:
                raise SimplexBreakdown("pivot limit exceeded")
            bland = self.pivots >= self._bland_after
            ce = self._effective_costs(phase)
            d = self._reduced_costs(ce)
            q, direction = self._choose_entering(d, bland)
            if q is None:
                if self._since_refactor > 0:
                    # re-certify against a fresh factorization
                    self._refactor()
                    d = self._reduced_costs(self._effective_costs(phase))
                    q, direction = self._choose_entering(d, bland)
                    if q is None:
                        return self._phase_exit(phase)
                else:
                    return self._phase_exit(phase)
            slot_q, dx, drow = self._direction(q)
            basic_ids = np.nonzero(self.status == BASIC)[0]
            delta = np.concatenate([dx, drow]) if self.m else dx
            rates = direction * delta[basic_ids]
            thetas, bounds = kernels.ratio_thetas(
                self.value[basic_ids],
                self.vlb[basic_ids],
                self.vub[basic_ids],
                rates,
                TOL_FEAS,
                _DELTA_TOL,
            )
            k = int(np.argmin(thetas)) if len(thetas) else -1
            theta_block = thetas[k] if k >= 0 else np.inf
            own_range = self.vub[q] - self.vlb[q]

            if own_range < theta_block:
                # bound flip: no basis change
                self._apply_step(q, direction, own_range, dx, drow)
                self.status[q] = NB_UPPER if direction > 0 else NB_LOWER
                self.value[q] = self.vub[q] if direction > 0 else self.vlb[q]
                self.pivots += 1
                continue
            if not np.isfinite(theta_block):
                if phase == 2:
                    return "unbounded"
                raise SimplexBreakdown("unblocked ray while repairing feasibility")
            # deterministic tie-break: widest pivot among near-minimal ratios,
            # lowest variable id under Bland
            near = np.nonzero(thetas <= theta_block + 1e-12)[0]
            if bland:
                k = int(near[np.argmin(basic_ids[near])])
            else:
                k = int(near[np.argmax(np.abs(rates[near]))])
            leaving = int(basic_ids[k])
            self._pivot(q, direction, float(thetas[k]), leaving, float(bounds[k]),
                        slot_q, dx, drow)

    def _phase_exit(self, phase: int) -> str:
        if phase == 1:
            return "done" if self._max_violation() <= TOL_FEAS else "infeasible"
        return "done"


def _extract(core: _Simplex, status: str, warm: bool) -> LpSolution:
    if status != "optimal":
        return LpSolution(
            status=status,
            x=None,
            objective=None,
            pivots=core.pivots,
            phase1_pivots=core.phase1_pivots,
            warm_started=warm,
            max_violation=core._max_violation(),
        )
    x = core.value[: core.n].copy()
    basis = np.nonzero(core.status == BASIC)[0].astype(np.int64)
    at_upper = core.status == NB_UPPER
    return LpSolution(
        status="optimal",
        x=x,
        objective=float(core.c @ x),
        pivots=core.pivots,
        basis=basis,
        at_upper=at_upper,
        max_violation=core._max_violation(),
        phase1_pivots=core.phase1_pivots,
        warm_started=warm,
    )


def _run(core: _Simplex, warm: bool) -> LpSolution:
    if core._max_violation() > TOL_FEAS:
        r = core.run_phase(1)
        core.phase1_pivots = core.pivots
        if r == "infeasible":
            return _extract(core, "infeasible", warm)
    r = core.run_phase(2)
    if r == "unbounded":
        return _extract(core, "unbounded", warm)
    core._refactor()
    if core._max_violation() > 10 * TOL_FEAS:
        raise SimplexBreakdown(
            f"optimal basis lost feasibility ({core._max_violation():.3e})"
        )
    return _extract(core, "optimal", warm)


def solve(lp, check_invariants: bool = False) -> LpSolution:
    """Solve the LP from a cold (all-row-variable) basis.

    Returns a certified LpSolution; raises SimplexBreakdown on numerical
    failure, which is reported distinctly from infeasibility.
    """
    core = _Simplex(lp, check_invariants=check_invariants)
    core.cold_start()
    return _run(core, warm=False)


def warm_start_solve(lp, basis_hint, check_invariants: bool = False) -> LpSolution:
    """Solve starting from a basis snapshot of a structurally identical LP.

    `basis_hint` is an LpSolution or a (basis, at_upper) pair.  Malformed or
    singular hints fall back to a cold start and solve identically.
    """
    if isinstance(basis_hint, LpSolution):
        basis, at_upper = basis_hint.basis, basis_hint.at_upper
    else:
        basis, at_upper = basis_hint
    core = _Simplex(lp, check_invariants=check_invariants)
    warm = False
    if basis is not None and at_upper is not None:
        try:
            warm = core.warm_start(basis, at_upper)
        except (ValueError, IndexError, TypeError):
            warm = False
    if not warm:
        core.cold_start()
    return _run(core, warm=warm)
