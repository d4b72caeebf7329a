"""Vehicle rectangle geometry in the road-aligned frame: corner positions,
lateral boundary lines, coverage index sets, and linearized stacked corridor
inequalities per station.

Corner numbering (seen from above, driving toward +s at e_psi = 0):

    c2 (rear-left)  ---- c1 (front-left)      e_y ^
    c3 (rear-right) ---- c4 (front-right)         +--> s

Corners rotate rigidly with the heading error: longitudinal body offset
xi in {b, -a} and lateral body offset zeta in {+w, -w} map to

    s_ci   = s   + xi * cos(e_psi) - zeta * sin(e_psi)
    e_y,ci = e_y + xi * sin(e_psi) + zeta * cos(e_psi)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frenet import Corridor

__all__ = [
    "CornerOffsets",
    "BoundaryLine",
    "FootprintConstraintBlock",
    "corner_positions",
    "boundary_lines",
    "coverage_set",
    "linearized_block",
]

# anchor corners of the lateral boundary lines
_LOWER_ANCHOR = 2  # c3, rear-right
_UPPER_ANCHOR = 1  # c2, rear-left


@dataclass(frozen=True)
class CornerOffsets:
    """Body-frame corner offsets (c1..c4) derived from (a, b, w)."""

    xi: np.ndarray       # longitudinal: (b, -a, -a, b)
    zeta: np.ndarray     # lateral:      (w,  w, -w, -w)

    @classmethod
    def from_params(cls, params) -> "CornerOffsets":
        a, b, w = params.a, params.b, params.w
        return cls(xi=np.array([b, -a, -a, b]), zeta=np.array([w, w, -w, -w]))


@dataclass(frozen=True)
class BoundaryLine:
    """Lateral boundary affine in s: value(s) = e_y0 + slope * (s - s0)."""

    slope: float
    s0: float
    e_y0: float

    def value(self, s):
        return self.e_y0 + self.slope * (np.asarray(s, dtype=float) - self.s0)


@dataclass(frozen=True)
class FootprintConstraintBlock:
    """Stacked footprint rows for station j: Q_lower z_j >= q_lower and
    Q_upper z_j <= q_upper, one row per covered grid station."""

    j: int
    Q_lower: np.ndarray   # (n_cov, 2)
    q_lower: np.ndarray   # (n_cov,)
    Q_upper: np.ndarray   # (n_cov, 2)
    q_upper: np.ndarray   # (n_cov,)
    covered: np.ndarray   # (n_cov,) grid indices

    def __post_init__(self):
        if len(self.covered) < 2:
            raise ValueError("footprint block must cover at least two stations")


def corner_positions(s: float, z, params) -> np.ndarray:
    """(4, 2) array of (s_ci, e_y_ci) for corners c1..c4."""
    off = CornerOffsets.from_params(params)
    e_psi, e_y = float(z[0]), float(z[1])
    c, sn = np.cos(e_psi), np.sin(e_psi)
    s_c = s + off.xi * c - off.zeta * sn
    ey_c = e_y + off.xi * sn + off.zeta * c
    return np.stack([s_c, ey_c], axis=1)


def boundary_lines(s_j: float, z_j, params) -> tuple[BoundaryLine, BoundaryLine]:
    """(lower, upper) lateral boundary lines, both with slope tan(e_psi),
    anchored at the rear-right (c3) and rear-left (c2) corners."""
    corners = corner_positions(s_j, z_j, params)
    slope = float(np.tan(z_j[0]))
    lo = corners[_LOWER_ANCHOR]
    up = corners[_UPPER_ANCHOR]
    return (
        BoundaryLine(slope=slope, s0=float(lo[0]), e_y0=float(lo[1])),
        BoundaryLine(slope=slope, s0=float(up[0]), e_y0=float(up[1])),
    )


def coverage_set(j: int, z_ref_j, grid, params) -> np.ndarray:
    """Grid indices whose stations the footprint at j can reach, extended by one
    station on each side and clipped to [0, N].

    The raw span is [s_j + min rear-corner offset, s_j + max front-corner
    offset], evaluated at the reference heading.
    """
    grid = np.asarray(grid, dtype=float)
    N = len(grid) - 1
    if not 1 <= j <= N - 1:
        raise ValueError("coverage sets exist for interior stations only")
    off = CornerOffsets.from_params(params)
    e_psi = float(z_ref_j[0])
    ds = off.xi * np.cos(e_psi) - off.zeta * np.sin(e_psi)
    lo = min(ds[1], ds[2])   # rear corners c2, c3
    hi = max(ds[0], ds[3])   # front corners c1, c4
    s_j = grid[j]
    inside = np.nonzero(
        (grid >= s_j + lo - 1e-9) & (grid <= s_j + hi + 1e-9)
    )[0]
    inside = inside[(inside >= 1) & (inside <= N - 1)]
    if len(inside) == 0:
        inside = np.array([j])
    k_first = max(0, int(inside[0]) - 1)
    k_last = min(N, int(inside[-1]) + 1)
    return np.arange(k_first, k_last + 1)


def _taylor_coeffs(s_eval, s_j, e_psi_ref, anchor_xi, anchor_zeta):
    """First-order coefficients of the boundary value at station s_eval.

    Returns (g, h) with boundary ~ g * e_psi + 1 * e_y + h around the
    reference heading.
    """
    E = e_psi_ref
    c, sn, t = np.cos(E), np.sin(E), np.tan(E)
    sec2 = 1.0 / c**2
    rel = s_eval - s_j - anchor_xi * c + anchor_zeta * sn
    beta_ref_minus_ey = anchor_xi * sn + anchor_zeta * c + t * rel
    g = (
        anchor_xi * c
        - anchor_zeta * sn
        + sec2 * rel
        + t * (anchor_xi * sn + anchor_zeta * c)
    )
    h = beta_ref_minus_ey - g * E
    return g, h


def linearized_block(
    j: int, z_ref_j, grid, corridor: Corridor, params
) -> FootprintConstraintBlock:
    """Taylor-expand the boundary lines in (e_psi_j, e_y_j) about the reference
    and stack one inequality row per covered station, with the corridor bounds
    absorbed into the q-vectors."""
    grid = np.asarray(grid, dtype=float)
    covered = coverage_set(j, z_ref_j, grid, params)
    s_eval = grid[covered]
    s_j = float(grid[j])
    e_psi_ref = float(z_ref_j[0])
    off = CornerOffsets.from_params(params)

    g_lo, h_lo = _taylor_coeffs(
        s_eval, s_j, e_psi_ref, off.xi[_LOWER_ANCHOR], off.zeta[_LOWER_ANCHOR]
    )
    g_up, h_up = _taylor_coeffs(
        s_eval, s_j, e_psi_ref, off.xi[_UPPER_ANCHOR], off.zeta[_UPPER_ANCHOR]
    )
    ones = np.ones_like(s_eval)
    return FootprintConstraintBlock(
        j=j,
        Q_lower=np.stack([g_lo, ones], axis=1),
        q_lower=np.asarray(corridor.lower_at(s_eval), dtype=float) - h_lo,
        Q_upper=np.stack([g_up, ones], axis=1),
        q_upper=np.asarray(corridor.upper_at(s_eval), dtype=float) - h_up,
        covered=covered,
    )
