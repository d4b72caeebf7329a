"""Road-aligned (s, e_y) frame: centerline fitting, bidirectional transforms,
obstacle envelope mapping, and corridor bound construction.

Conventions: s is arc length along the centerline, e_y is the signed lateral
offset, positive to the LEFT of the tangent direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CorridorError, ProjectionError

__all__ = [
    "RoadCenterline",
    "Corridor",
    "ObstacleEnvelope",
    "build_centerline",
    "global_to_frenet",
    "frenet_to_global",
    "map_obstacles",
    "corridor_bounds",
    "inflate_envelope",
]


@dataclass(frozen=True)
class RoadCenterline:
    """Arc-length sampled centerline with unwrapped headings and signed curvature."""

    stations: np.ndarray    # (M,) strictly increasing arc length
    positions: np.ndarray   # (M, 2)
    headings: np.ndarray    # (M,) rad, unwrapped
    curvatures: np.ndarray  # (M,) 1/m, signed (positive = turning left)

    @property
    def length(self) -> float:
        return float(self.stations[-1] - self.stations[0])

    def position_at(self, s):
        x = np.interp(s, self.stations, self.positions[:, 0])
        y = np.interp(s, self.stations, self.positions[:, 1])
        return np.stack([x, y], axis=-1)

    def heading_at(self, s):
        return np.interp(s, self.stations, self.headings)

    def curvature_at(self, s):
        return np.interp(s, self.stations, self.curvatures)


@dataclass(frozen=True)
class ObstacleEnvelope:
    """Minimal axis-aligned rectangle of a transformed obstacle in the (s, e_y) plane."""

    s_begin: float
    s_end: float
    e_y_low: float
    e_y_high: float
    heading: float  # long-axis heading of the transformed polygon, in (-pi/2, pi/2]

    def __post_init__(self):
        if not self.s_begin < self.s_end:
            raise ValueError("envelope requires s_begin < s_end")
        if not self.e_y_low < self.e_y_high:
            raise ValueError("envelope requires e_y_low < e_y_high")


def inflate_envelope(env: ObstacleEnvelope, margin: float) -> ObstacleEnvelope:
    """Grow an envelope by `margin` on all four sides."""
    return ObstacleEnvelope(
        s_begin=env.s_begin - margin,
        s_end=env.s_end + margin,
        e_y_low=env.e_y_low - margin,
        e_y_high=env.e_y_high + margin,
        heading=env.heading,
    )


class Corridor:
    """Piecewise-constant lateral bounds e_y_min(s) <= e_y <= e_y_max(s).

    Values are constant on [breakpoints[i], breakpoints[i+1]).  Queries exactly
    at an interior breakpoint return the tighter of the two adjacent values,
    which is the safe choice at obstacle corners.
    """

    def __init__(self, breakpoints: np.ndarray, lower: np.ndarray, upper: np.ndarray):
        breakpoints = np.asarray(breakpoints, dtype=float)
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if len(breakpoints) != len(lower) + 1 or len(lower) != len(upper):
            raise ValueError("corridor arrays inconsistent")
        if not np.all(np.diff(breakpoints) > 0):
            raise ValueError("corridor breakpoints must be strictly increasing")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("corridor bounds must be finite")
        if not np.all(lower < upper):
            raise CorridorError("corridor has e_y_min >= e_y_max on some interval")
        self.breakpoints = breakpoints
        self.lower = lower
        self.upper = upper

    def _interval_index(self, s):
        i = np.searchsorted(self.breakpoints, s, side="right") - 1
        return np.clip(i, 0, len(self.lower) - 1)

    def _eval(self, values, s, tighter):
        s = np.asarray(s, dtype=float)
        i = self._interval_index(s)
        out = values[i]
        # at an interior breakpoint, combine with the interval ending there
        on_bp = np.isin(s, self.breakpoints[1:-1])
        if np.any(on_bp):
            left = values[np.maximum(i - 1, 0)]
            out = np.where(on_bp, tighter(out, left), out)
        return out if out.ndim else float(out)

    def lower_at(self, s):
        return self._eval(self.lower, s, np.maximum)

    def upper_at(self, s):
        return self._eval(self.upper, s, np.minimum)


def build_centerline(waypoints, resample_step: float = 0.5) -> RoadCenterline:
    """Fit an arc-length parameterized centerline through (x, y) waypoints.

    Cumulative chord-length parameterization; headings from central finite
    differences of positions (one-sided at the ends), unwrapped; curvature as
    the finite-difference derivative of heading.  A straight waypoint sequence
    yields exactly zero curvature.
    """
    wp = np.asarray(waypoints, dtype=float)
    if wp.ndim != 2 or wp.shape[1] != 2 or len(wp) < 2:
        raise ValueError("need at least two (x, y) waypoints")
    seg = np.diff(wp, axis=0)
    seglen = np.hypot(seg[:, 0], seg[:, 1])
    if np.any(seglen < 1e-12):
        raise ValueError("duplicate consecutive waypoints")
    if resample_step <= 0:
        raise ValueError("resample_step must be positive")

    # resample each chord so waypoint corners stay exact sample points
    pts = [wp[0]]
    for k in range(len(seg)):
        n = max(1, int(np.ceil(seglen[k] / resample_step)))
        t = np.arange(1, n + 1) / n
        pts.append(wp[k] + t[:, None] * seg[k])
    pos = np.vstack(pts)
    d = np.hypot(*np.diff(pos, axis=0).T)
    stations = np.concatenate([[0.0], np.cumsum(d)])

    tang = np.empty_like(pos)
    tang[1:-1] = pos[2:] - pos[:-2]
    tang[0] = pos[1] - pos[0]
    tang[-1] = pos[-1] - pos[-2]
    headings = np.unwrap(np.arctan2(tang[:, 1], tang[:, 0]))

    curv = np.zeros_like(headings)
    if len(pos) > 2:
        curv[1:-1] = (headings[2:] - headings[:-2]) / (stations[2:] - stations[:-2])
        curv[0] = (headings[1] - headings[0]) / (stations[1] - stations[0])
        curv[-1] = (headings[-1] - headings[-2]) / (stations[-1] - stations[-2])
    return RoadCenterline(stations=stations, positions=pos, headings=headings, curvatures=curv)


def frenet_to_global(s, e_y, cl: RoadCenterline):
    """Map road-aligned (s, e_y) to global (x, y): centerline(s) + e_y * left-normal(s)."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < cl.stations[0] - 1e-9) or np.any(s_arr > cl.stations[-1] + 1e-9):
        raise ProjectionError("station out of centerline range")
    p = cl.position_at(s_arr)
    psi = cl.heading_at(s_arr)
    n = np.stack([-np.sin(psi), np.cos(psi)], axis=-1)
    return p + np.asarray(e_y, dtype=float)[..., None] * n if p.ndim > 1 else p + e_y * n


def _tangent_gap(q, s, cl):
    """Signed tangential mismatch (q - p(s)) . t(s); zero at the true projection."""
    p = cl.position_at(s)
    psi = cl.heading_at(s)
    return (q[0] - p[0]) * np.cos(psi) + (q[1] - p[1]) * np.sin(psi)


def global_to_frenet(point, cl: RoadCenterline):
    """Project a global point to (s, e_y).

    The projection solves (q - p(s)) . t(s) = 0 near the closest sample, with
    t the interpolated-heading tangent, so frenet_to_global is its exact
    inverse.  Raises ProjectionError when the point lies beyond the local
    curvature center (ambiguous) or projects outside the station range.
    """
    q = np.asarray(point, dtype=float)
    d2 = np.sum((cl.positions - q) ** 2, axis=1)
    i = int(np.argmin(d2))
    lo = max(0, i - 2)
    hi = min(len(cl.stations) - 1, i + 2)
    a, b = cl.stations[lo], cl.stations[hi]
    ga, gb = _tangent_gap(q, a, cl), _tangent_gap(q, b, cl)
    if ga * gb > 0:
        # projection sits at or beyond a road end
        g_end = ga if abs(ga) < abs(gb) else gb
        if abs(g_end) > 1e-9:
            raise ProjectionError("point projects beyond the centerline ends")
        s_star = a if abs(ga) < abs(gb) else b
    else:
        for _ in range(90):
            mid = 0.5 * (a + b)
            gm = _tangent_gap(q, mid, cl)
            if ga * gm <= 0:
                b, gb = mid, gm
            else:
                a, ga = mid, gm
        s_star = 0.5 * (a + b)

    psi = cl.heading_at(s_star)
    p = cl.position_at(s_star)
    e_y = -(q[0] - p[0]) * np.sin(psi) + (q[1] - p[1]) * np.cos(psi)
    kappa = cl.curvature_at(s_star)
    if abs(kappa) > 1e-12 and abs(e_y) >= 0.95 / abs(kappa):
        raise ProjectionError(
            f"projection ambiguous: |e_y|={abs(e_y):.3f} m beyond local radius "
            f"{1.0 / abs(kappa):.3f} m"
        )
    return float(s_star), float(e_y)


def map_obstacles(polygons, cl: RoadCenterline) -> list[ObstacleEnvelope]:
    """Transform global-frame polygons into (s, e_y) rectangle envelopes.

    Each envelope is the axis-aligned bounding rectangle of the transformed
    vertex set; its heading is the direction of the longest transformed edge,
    wrapped to (-pi/2, pi/2].  Output is sorted by s_begin.
    """
    envelopes = []
    for poly in polygons:
        verts = np.asarray(poly, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise ValueError("obstacle polygon needs >= 3 (x, y) vertices")
        se = np.array([global_to_frenet(v, cl) for v in verts])
        edges = np.diff(np.vstack([se, se[:1]]), axis=0)
        k = int(np.argmax(np.hypot(edges[:, 0], edges[:, 1])))
        heading = float(np.arctan2(edges[k, 1], edges[k, 0]))
        if heading > np.pi / 2:
            heading -= np.pi
        elif heading <= -np.pi / 2:
            heading += np.pi
        envelopes.append(
            ObstacleEnvelope(
                s_begin=float(se[:, 0].min()),
                s_end=float(se[:, 0].max()),
                e_y_low=float(se[:, 1].min()),
                e_y_high=float(se[:, 1].max()),
                heading=heading,
            )
        )
    envelopes.sort(key=lambda e: e.s_begin)
    return envelopes


def _halfwidth_profile(road_halfwidth, s0: float, s1: float):
    """Normalize scalar-or-table halfwidth to (breakpoints, values) on [s0, s1]."""
    if np.isscalar(road_halfwidth):
        return np.array([s0, s1]), np.array([float(road_halfwidth)])
    tab = np.asarray(road_halfwidth, dtype=float)
    if tab.ndim != 2 or tab.shape[1] != 2:
        raise ValueError("halfwidth table must be [(s, halfwidth), ...]")
    bps = [s0]
    vals = [tab[0, 1]]
    for s, hw in tab:
        if s <= bps[-1]:
            vals[-1] = hw
            continue
        if s >= s1:
            break
        bps.append(float(s))
        vals.append(float(hw))
    bps.append(s1)
    return np.array(bps), np.array(vals)


def corridor_bounds(
    envelopes,
    sides,
    road_halfwidth,
    cl: RoadCenterline,
    min_gap: float = 0.0,
) -> Corridor:
    """Build piecewise-constant corridor bounds around obstacle envelopes.

    Across an envelope passed on the left the lower bound is raised to its
    e_y_high; passed on the right the upper bound is lowered to its e_y_low.
    Breakpoints are inserted at every envelope corner station.  `min_gap`
    (usually twice the vehicle half-width) triggers CorridorError wherever
    the remaining gap is narrower.
    """
    if len(envelopes) != len(sides):
        raise ValueError("one pass side per envelope required")
    s0, s1 = float(cl.stations[0]), float(cl.stations[-1])
    bps, hw = _halfwidth_profile(road_halfwidth, s0, s1)
    bset = set(bps.tolist())
    for env in envelopes:
        for corner in (env.s_begin, env.s_end):
            if s0 < corner < s1:
                bset.add(float(corner))
    bps_all = np.array(sorted(bset))
    mid = 0.5 * (bps_all[:-1] + bps_all[1:])
    idx = np.clip(np.searchsorted(bps, mid, side="right") - 1, 0, len(hw) - 1)
    lower = -hw[idx]
    upper = hw[idx].copy()

    for env, side in zip(envelopes, sides):
        covered = (mid > env.s_begin) & (mid < env.s_end)
        if side == "left":
            lower = np.where(covered, np.maximum(lower, env.e_y_high), lower)
        elif side == "right":
            upper = np.where(covered, np.minimum(upper, env.e_y_low), upper)
        else:
            raise ValueError(f"pass side must be 'left' or 'right', got {side!r}")

    gap = upper - lower
    if np.any(gap < min_gap):
        k = int(np.argmin(gap))
        raise CorridorError(
            f"corridor gap {gap[k]:.3f} m on [{bps_all[k]:.2f}, {bps_all[k + 1]:.2f}] m "
            f"is narrower than the required {min_gap:.3f} m"
        )
    return Corridor(bps_all, lower, upper)
