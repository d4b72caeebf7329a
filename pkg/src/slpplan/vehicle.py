"""Spatial-domain kinematic bicycle dynamics, analytic Jacobians, grid
construction, per-station linearization/discretization, and a nonlinear RK4
simulator for validation.

State z = (e_psi, e_y) evolves in the road-aligned frame with arc length s as
the independent variable:

    e_psi' = (1 - kappa_s * e_y) * tan(delta) / (l * cos(e_psi)) - kappa_s
    e_y'   = (1 - kappa_s * e_y) * tan(e_psi)

The curvature form (kappa_s = 1/rho_s) keeps straight roads regular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularStateError
from .frenet import RoadCenterline

__all__ = [
    "E_PSI_LIMIT",
    "LinearizedStage",
    "spatial_dynamics",
    "jacobians",
    "build_grid",
    "linearize_discretize",
    "simulate_nonlinear",
]

# hard guard below the |e_psi| = 90 deg pole of the spatial transform
E_PSI_LIMIT = np.radians(89.0)


@dataclass(frozen=True)
class LinearizedStage:
    """One step of z_{j+1} = A_j z_j + B_j u_j + g_j."""

    A: np.ndarray       # (2, 2)
    B: np.ndarray       # (2,)
    g: np.ndarray       # (2,)
    station: float      # s_j
    step: float         # delta s_j > 0


def _check_regular(e_psi: float, factor: float, where: str = ""):
    if abs(e_psi) >= E_PSI_LIMIT:
        raise SingularStateError(f"|e_psi| >= 89 deg{where}")
    if factor <= 1e-9:
        raise SingularStateError(f"1 - kappa_s * e_y <= 0 (off the curvature center){where}")


def spatial_dynamics(z, u: float, kappa_s: float, params):
    """Right-hand side (e_psi', e_y') of the spatial bicycle model."""
    e_psi, e_y = float(z[0]), float(z[1])
    f = 1.0 - kappa_s * e_y
    _check_regular(e_psi, f)
    de_psi = f * np.tan(u) / (params.l * np.cos(e_psi)) - kappa_s
    de_y = f * np.tan(e_psi)
    return np.array([de_psi, de_y])


def jacobians(z_ref, u_ref: float, kappa_s: float, params):
    """Analytic (A_c, B_c, r_c): d f/d z, d f/d u, and f at the reference."""
    e_psi, e_y = float(z_ref[0]), float(z_ref[1])
    if abs(u_ref) >= np.pi / 2:
        raise SingularStateError("|delta_ref| >= 90 deg")
    f = 1.0 - kappa_s * e_y
    _check_regular(e_psi, f)
    l = params.l
    cos_e = np.cos(e_psi)
    tan_u = np.tan(u_ref)
    A_c = np.array(
        [
            [f * tan_u * np.sin(e_psi) / (l * cos_e**2), -kappa_s * tan_u / (l * cos_e)],
            [f / cos_e**2, -kappa_s * np.tan(e_psi)],
        ]
    )
    B_c = np.array([f / (l * cos_e * np.cos(u_ref) ** 2), 0.0])
    r_c = np.array([f * tan_u / (l * cos_e) - kappa_s, f * np.tan(e_psi)])
    return A_c, B_c, r_c


def build_grid(s_t: float, S: float, N: int, envelopes=()) -> np.ndarray:
    """N+1 uniform stations over [s_t, s_t + S] plus every envelope corner
    strictly inside the range (deduplicated within 1e-9 m)."""
    if S <= 0:
        raise ValueError("horizon S must be positive")
    if N < 2:
        raise ValueError("need N >= 2 grid intervals")
    stations = list(np.linspace(s_t, s_t + S, N + 1))
    for env in envelopes:
        for corner in (env.s_begin, env.s_end):
            if s_t < corner < s_t + S:
                stations.append(float(corner))
    stations.sort()
    out = [stations[0]]
    for s in stations[1:]:
        if s - out[-1] > 1e-9:
            out.append(s)
    return np.array(out)


def linearize_discretize(grid, z_refs, u_refs, cl: RoadCenterline, params):
    """Forward-Euler discretization of the linearized dynamics about the reference.

    A_j = I + ds_j A_c,  B_j = ds_j B_c,  g_j = ds_j (r_c - A_c z_ref - B_c u_ref),
    with kappa_s evaluated at s_j.  Exact at the reference: propagating
    (z_ref_j, u_ref_j) gives z_ref_j + ds_j f(z_ref_j, u_ref_j).
    """
    grid = np.asarray(grid, dtype=float)
    z_refs = np.asarray(z_refs, dtype=float)
    u_refs = np.asarray(u_refs, dtype=float)
    n_steps = len(grid) - 1
    if len(z_refs) != n_steps + 1 or len(u_refs) != n_steps:
        raise ValueError("reference lengths must be N+1 states and N inputs")
    stages = []
    for j in range(n_steps):
        ds = float(grid[j + 1] - grid[j])
        kappa = float(cl.curvature_at(grid[j]))
        try:
            A_c, B_c, r_c = jacobians(z_refs[j], float(u_refs[j]), kappa, params)
        except SingularStateError as err:
            raise SingularStateError(f"{err} at station index {j}") from None
        stages.append(
            LinearizedStage(
                A=np.eye(2) + ds * A_c,
                B=ds * B_c,
                g=ds * (r_c - A_c @ z_refs[j] - B_c * u_refs[j]),
                station=float(grid[j]),
                step=ds,
            )
        )
    return stages


def simulate_nonlinear(z_0, u_sequence, grid, cl: RoadCenterline, params, substeps: int = 8):
    """Integrate the nonlinear dynamics across the grid with fixed-step RK4.

    Zero-order-hold input per interval, >= 8 substeps each; kappa_s follows the
    centerline within substeps.  Returns the (N+1, 2) state sequence.
    """
    grid = np.asarray(grid, dtype=float)
    u_sequence = np.asarray(u_sequence, dtype=float)
    if len(u_sequence) != len(grid) - 1:
        raise ValueError("need one input per grid interval")
    substeps = max(8, int(substeps))
    states = np.empty((len(grid), 2))
    states[0] = z_0
    z = np.array(z_0, dtype=float)

    def rhs(s, z, u):
        return spatial_dynamics(z, u, float(cl.curvature_at(s)), params)

    for j in range(len(grid) - 1):
        h = (grid[j + 1] - grid[j]) / substeps
        u = float(u_sequence[j])
        s = float(grid[j])
        try:
            for _ in range(substeps):
                k1 = rhs(s, z, u)
                k2 = rhs(s + 0.5 * h, z + 0.5 * h * k1, u)
                k3 = rhs(s + 0.5 * h, z + 0.5 * h * k2, u)
                k4 = rhs(s + h, z + h * k3, u)
                z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                s += h
        except SingularStateError as err:
            raise SingularStateError(f"{err} within interval {j}") from None
        states[j + 1] = z
    return states
