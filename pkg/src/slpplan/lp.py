"""Sparse standard-form LP assembly for the per-iteration planning problem.

Decision vector layout (N = number of grid intervals):

    u_0 .. u_{N-1}                  steering commands
    e_psi_0, e_y_0, .., e_y_N       states, interleaved per station
    t_u                             epigraph bound on max |u_j|
    t_du                            epigraph bound on max |u_j - u_{j-1}|
    sigma                           shared corridor/footprint slack
    sigma_epsi_N, sigma_ey_N        terminal pose slacks

The objective is t_u + lambda * t_du + W_sigma * (sigma + sigma_epsi_N +
sigma_ey_N); all state constraints are softened so the LP is always feasible
with a finite optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = ["LinearProgram", "PlanResult", "assemble", "add_parallel_overtake", "write_lp_format"]


@dataclass
class LinearProgram:
    """min c'x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lb <= x <= ub."""

    n: int
    c: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    A_in: sp.csr_matrix
    b_in: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: dict[str, int]
    eq_labels: list[str] = field(default_factory=list)
    in_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.A_eq.shape != (len(self.b_eq), self.n):
            raise ValueError("equality system dimensions inconsistent")
        if self.A_in.shape != (len(self.b_in), self.n):
            raise ValueError("inequality system dimensions inconsistent")
        if len(self.lb) != self.n or len(self.ub) != self.n:
            raise ValueError("bound vector length mismatch")
        if np.any(self.lb > self.ub):
            raise ValueError("lower bound above upper bound")
        if len(self.names) != len(set(self.names.values())):
            raise ValueError("duplicate variable index in name map")


@dataclass
class PlanResult:
    """States/inputs of a finished plan plus solver diagnostics."""

    states: np.ndarray            # (N+1, 2) of (e_psi, e_y)
    inputs: np.ndarray            # (N,)
    slacks: dict[str, float]
    objective: float | None
    iterations: int
    diagnostics: list[dict] = field(default_factory=list)
    converged: bool = True
    method: str = "slp"


class _Builder:
    def __init__(self, n):
        self.n = n
        self.rows: list[tuple[dict[int, float], float, str]] = []

    def add(self, coeffs: dict[int, float], rhs: float, label: str):
        self.rows.append((coeffs, float(rhs), label))

    def build(self):
        data, ri, ci = [], [], []
        b = np.empty(len(self.rows))
        labels = []
        for r, (coeffs, rhs, label) in enumerate(self.rows):
            for j, v in coeffs.items():
                ri.append(r)
                ci.append(j)
                data.append(v)
            b[r] = rhs
            labels.append(label)
        A = sp.csr_matrix((data, (ri, ci)), shape=(len(self.rows), self.n))
        return A, b, labels


def assemble(stages, corridor, blocks, start, end, params, settings) -> LinearProgram:
    """Build the per-iteration LP from linearized stages, corridor bounds and
    footprint blocks.

    `start` is (e_psi, e_y, delta_prev); `end` is the target (e_psi, e_y).
    Hard constraints: input box +-delta_max and rate box +-ddelta_max * T_s.
    Soft constraints (via sigma/terminal slacks): corridor, footprint rows,
    and terminal pose.
    """
    N = len(stages)
    if N < 1:
        raise ValueError("need at least one stage")
    n = N + 2 * (N + 1) + 5
    iu = lambda j: j
    ipsi = lambda j: N + 2 * j
    iey = lambda j: N + 2 * j + 1
    it_u = N + 2 * (N + 1)
    it_du = it_u + 1
    isig = it_u + 2
    isig_psi = it_u + 3
    isig_ey = it_u + 4

    names = {f"u_{j}": iu(j) for j in range(N)}
    for j in range(N + 1):
        names[f"e_psi_{j}"] = ipsi(j)
        names[f"e_y_{j}"] = iey(j)
    names.update(
        t_u=it_u, t_du=it_du, sigma=isig, sigma_epsi_N=isig_psi, sigma_ey_N=isig_ey
    )

    start_psi, start_ey, u_prev = float(start[0]), float(start[1]), float(start[2])
    end_psi, end_ey = float(end[0]), float(end[1])

    eq = _Builder(n)
    eq.add({ipsi(0): 1.0}, start_psi, "init_e_psi")
    eq.add({iey(0): 1.0}, start_ey, "init_e_y")
    for j, st in enumerate(stages):
        # z_{j+1} - A_j z_j - B_j u_j = g_j
        for r in range(2):
            coeffs = {
                (ipsi(j + 1) if r == 0 else iey(j + 1)): 1.0,
                ipsi(j): -st.A[r, 0],
                iey(j): -st.A[r, 1],
            }
            if st.B[r] != 0.0:
                coeffs[iu(j)] = coeffs.get(iu(j), 0.0) - st.B[r]
            eq.add(coeffs, st.g[r], f"dyn_{'e_psi' if r == 0 else 'e_y'}_{j}")

    ineq = _Builder(n)
    ineq.add({ipsi(N): 1.0, isig_psi: -1.0}, end_psi, "terminal_e_psi_hi")
    ineq.add({ipsi(N): -1.0, isig_psi: -1.0}, -end_psi, "terminal_e_psi_lo")
    ineq.add({iey(N): 1.0, isig_ey: -1.0}, end_ey, "terminal_e_y_hi")
    ineq.add({iey(N): -1.0, isig_ey: -1.0}, -end_ey, "terminal_e_y_lo")

    grid = np.array([st.station for st in stages] + [stages[-1].station + stages[-1].step])
    for j in range(1, N + 1):
        ineq.add({iey(j): 1.0, isig: -1.0}, corridor.upper_at(grid[j]), f"corridor_hi_{j}")
        ineq.add({iey(j): -1.0, isig: -1.0}, -corridor.lower_at(grid[j]), f"corridor_lo_{j}")

    du_max = params.ddelta_max * settings.t_s
    for j in range(N):
        if j == 0:
            ineq.add({iu(0): 1.0}, du_max + u_prev, "rate_hi_0")
            ineq.add({iu(0): -1.0}, du_max - u_prev, "rate_lo_0")
            ineq.add({iu(0): 1.0, it_du: -1.0}, u_prev, "epi_du_hi_0")
            ineq.add({iu(0): -1.0, it_du: -1.0}, -u_prev, "epi_du_lo_0")
        else:
            ineq.add({iu(j): 1.0, iu(j - 1): -1.0}, du_max, f"rate_hi_{j}")
            ineq.add({iu(j): -1.0, iu(j - 1): 1.0}, du_max, f"rate_lo_{j}")
            ineq.add({iu(j): 1.0, iu(j - 1): -1.0, it_du: -1.0}, 0.0, f"epi_du_hi_{j}")
            ineq.add({iu(j): -1.0, iu(j - 1): 1.0, it_du: -1.0}, 0.0, f"epi_du_lo_{j}")
        ineq.add({iu(j): 1.0, it_u: -1.0}, 0.0, f"epi_u_hi_{j}")
        ineq.add({iu(j): -1.0, it_u: -1.0}, 0.0, f"epi_u_lo_{j}")

    for blk in blocks:
        j = blk.j
        for r in range(len(blk.covered)):
            ineq.add(
                {
                    ipsi(j): -blk.Q_lower[r, 0],
                    iey(j): -blk.Q_lower[r, 1],
                    isig: -1.0,
                },
                -blk.q_lower[r],
                f"fp_lo_{j}_{blk.covered[r]}",
            )
            ineq.add(
                {
                    ipsi(j): blk.Q_upper[r, 0],
                    iey(j): blk.Q_upper[r, 1],
                    isig: -1.0,
                },
                blk.q_upper[r],
                f"fp_hi_{j}_{blk.covered[r]}",
            )

    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    lb[:N] = -params.delta_max
    ub[:N] = params.delta_max
    lb[it_u:] = 0.0

    c = np.zeros(n)
    c[it_u] = 1.0
    c[it_du] = settings.smoothing_weight
    c[isig] = settings.slack_weight
    c[isig_psi] = settings.slack_weight
    c[isig_ey] = settings.slack_weight

    A_eq, b_eq, eq_labels = eq.build()
    A_in, b_in, in_labels = ineq.build()
    return LinearProgram(
        n=n, c=c, A_eq=A_eq, b_eq=b_eq, A_in=A_in, b_in=b_in,
        lb=lb, ub=ub, names=names, eq_labels=eq_labels, in_labels=in_labels,
    )


def add_parallel_overtake(lp: LinearProgram, envelopes, grid) -> LinearProgram:
    """Append parallel-overtake heading rows: over each envelope's station span,
    e_psi_j is pinned to the envelope heading within the reused terminal
    heading slack."""
    grid = np.asarray(grid, dtype=float)
    N = len(grid) - 1
    isig_psi = lp.names["sigma_epsi_N"]
    extra = _Builder(lp.n)
    for l, env in enumerate(envelopes):
        js = [j for j in range(1, N + 1) if env.s_begin <= grid[j] <= env.s_end]
        for j in js:
            ipsi = lp.names[f"e_psi_{j}"]
            extra.add({ipsi: 1.0, isig_psi: -1.0}, env.heading, f"par_hi_{l}_{j}")
            extra.add({ipsi: -1.0, isig_psi: -1.0}, -env.heading, f"par_lo_{l}_{j}")
    A_x, b_x, labels = extra.build()
    return LinearProgram(
        n=lp.n,
        c=lp.c,
        A_eq=lp.A_eq,
        b_eq=lp.b_eq,
        A_in=sp.vstack([lp.A_in, A_x], format="csr"),
        b_in=np.concatenate([lp.b_in, b_x]),
        lb=lp.lb,
        ub=lp.ub,
        names=lp.names,
        eq_labels=lp.eq_labels,
        in_labels=lp.in_labels + labels,
    )


def _lin_expr(row: sp.csr_matrix, idx_to_name: dict[int, str]) -> str:
    parts = []
    for j, v in zip(row.indices, row.data):
        parts.append(f"{'+' if v >= 0 else '-'} {abs(v):.17g} {idx_to_name[j]}")
    text = " ".join(parts) if parts else "0 "
    return text.lstrip("+ ")


def write_lp_format(lp: LinearProgram, path) -> None:
    """Write the LP in CPLEX text interchange format for external cross-checks."""
    idx_to_name = {v: k for k, v in lp.names.items()}
    lines = ["Minimize", " obj: " + _lin_expr(sp.csr_matrix(lp.c), idx_to_name)]
    lines.append("Subject To")
    for r in range(lp.A_eq.shape[0]):
        label = lp.eq_labels[r] if lp.eq_labels else f"eq{r}"
        lines.append(f" {label}: {_lin_expr(lp.A_eq.getrow(r), idx_to_name)} = {lp.b_eq[r]:.17g}")
    for r in range(lp.A_in.shape[0]):
        label = lp.in_labels[r] if lp.in_labels else f"in{r}"
        lines.append(f" {label}: {_lin_expr(lp.A_in.getrow(r), idx_to_name)} <= {lp.b_in[r]:.17g}")
    lines.append("Bounds")
    for name, j in lp.names.items():
        lo, hi = lp.lb[j], lp.ub[j]
        if lo == -np.inf and hi == np.inf:
            lines.append(f" {name} free")
        elif hi == np.inf:
            lines.append(f" {name} >= {lo:.17g}")
        else:
            lines.append(f" {lo:.17g} <= {name} <= {hi:.17g}")
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
