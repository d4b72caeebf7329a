"""NumPy implementations of the per-pivot simplex kernels.

These are the fallback for the compiled extension; both backends expose the
same four functions operating on the dense working-basis inverse.
"""

import numpy as np
from scipy.linalg.blas import dger

__all__ = ["btran", "take_col", "row_replace", "ratio_thetas"]


def btran(Minv, h):
    """Solve y^T M = h^T, i.e. y = Minv^T h."""
    return Minv.T @ h


def take_col(Minv, slot):
    """Entering direction on structural variables: column `slot` of Minv."""
    return Minv[:, slot].copy()


def row_replace(Minv, slot, new_row, pivot_tol):
    """Sherman-Morrison update of Minv after replacing row `slot` of M.

    Returns the pivot denominator; if its magnitude is below pivot_tol the
    inverse is left untouched so the caller can recover.
    """
    v = new_row @ Minv
    den = v[slot]
    if abs(den) < pivot_tol:
        return den
    col = Minv[:, slot] / den
    v[slot] -= 1.0
    # Minv -= outer(col, v), in place via BLAS rank-1 update on the transpose
    dger(-1.0, v, col, a=Minv.T, overwrite_a=1)
    return den


def ratio_thetas(vals, lb, ub, rates, feas_tol, delta_tol):
    """Blocking step lengths for basic variables moving at `rates` per unit step.

    Returns (thetas, bounds): theta[i] = +inf where variable i never blocks,
    else the nonnegative step at which it reaches `bounds[i]`.  A variable
    currently violating a bound blocks when it reaches that bound (phase-1
    signature change); feasible variables block at the bound ahead.
    """
    n = len(vals)
    thetas = np.full(n, np.inf)
    bounds = np.zeros(n)
    up = rates > delta_tol
    dn = rates < -delta_tol

    viol_lo = vals < lb - feas_tol
    viol_hi = vals > ub + feas_tol

    m = up & viol_lo
    thetas[m] = (lb[m] - vals[m]) / rates[m]
    bounds[m] = lb[m]
    m = up & ~viol_lo & ~viol_hi & np.isfinite(ub)
    thetas[m] = (ub[m] - vals[m]) / rates[m]
    bounds[m] = ub[m]

    m = dn & viol_hi
    thetas[m] = (ub[m] - vals[m]) / rates[m]
    bounds[m] = ub[m]
    m = dn & ~viol_hi & ~viol_lo & np.isfinite(lb)
    thetas[m] = (lb[m] - vals[m]) / rates[m]
    bounds[m] = lb[m]

    np.maximum(thetas, 0.0, out=thetas)
    return thetas, bounds
