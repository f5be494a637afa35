"""Reference generation for the platoon.

A `Path` is an ordered list of waypoints with cumulative arc length. The
built-in course is a figure-eight (lemniscate) resampled at uniform arc
spacing and tiled over as many laps as an episode needs, so follower targeting
can stay a plain backward walk over one array with no wrap-around logic.

Followers target the waypoint a desired arc gap behind their predecessor
(backward accumulation over segment lengths). The leader tracks a smooth
time-parameterized reference sampled by arc length, with the tangent and
curvature interpolated between waypoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import VelocityReference

DEFAULT_SPACING = 0.05


@dataclass(frozen=True)
class Path:
    """Waypoint polyline with per-vertex arc length, tangent and curvature.

    cx, cy are the waypoint coordinates; arc[i] is the cumulative arc length
    at vertex i (arc[0] == 0). tangent is the unwrapped tangent angle and
    curvature the signed discrete (Menger) curvature per vertex, both used by
    the interpolating reference sampler.
    """

    cx: np.ndarray
    cy: np.ndarray
    arc: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray

    def __len__(self) -> int:
        return len(self.cx)

    @property
    def total_length(self) -> float:
        return float(self.arc[-1])

    def segment_length(self, i: int) -> float:
        """Length of the segment ending at vertex i (from vertex i-1)."""
        return float(self.arc[i] - self.arc[i - 1])


def menger_curvature(ax, ay, bx, by, cx, cy) -> float:
    """Signed curvature of the circle through three points (positive = left turn).

    Exactly 1/R for points on a circle of radius R; 0 for collinear points.
    """
    ux, uy = bx - ax, by - ay
    wx, wy = cx - bx, cy - by
    cross = ux * wy - uy * wx
    la = math.hypot(ux, uy)
    lb = math.hypot(wx, wy)
    lc = math.hypot(cx - ax, cy - ay)
    denom = la * lb * lc
    if denom == 0.0:
        return 0.0
    return 2.0 * cross / denom


def build_path(cx, cy) -> Path:
    """Construct a Path from raw coordinates, validating its invariants."""
    cx = np.asarray(cx, dtype=float)
    cy = np.asarray(cy, dtype=float)
    if cx.ndim != 1 or cx.shape != cy.shape:
        raise ValueError("path coordinates must be two equal-length 1-D arrays")
    if len(cx) < 2:
        raise ValueError(f"path needs at least 2 waypoints, got {len(cx)}")
    seg = np.hypot(np.diff(cx), np.diff(cy))
    if np.any(seg <= 0.0):
        raise ValueError("path has coincident consecutive waypoints")
    arc = np.concatenate(([0.0], np.cumsum(seg)))

    # Tangents: central difference inside, one-sided at the ends, unwrapped so
    # linear interpolation between vertices never jumps across +-pi.
    dx = np.empty(len(cx))
    dy = np.empty(len(cy))
    dx[1:-1] = cx[2:] - cx[:-2]
    dy[1:-1] = cy[2:] - cy[:-2]
    dx[0], dy[0] = cx[1] - cx[0], cy[1] - cy[0]
    dx[-1], dy[-1] = cx[-1] - cx[-2], cy[-1] - cy[-2]
    tangent = np.unwrap(np.arctan2(dy, dx))

    curvature = np.zeros(len(cx))
    for i in range(1, len(cx) - 1):
        curvature[i] = menger_curvature(cx[i - 1], cy[i - 1], cx[i], cy[i],
                                        cx[i + 1], cy[i + 1])
    return Path(cx=cx, cy=cy, arc=arc, tangent=tangent, curvature=curvature)


def figure_eight(scale: float = 14.0, spacing: float = DEFAULT_SPACING,
                 laps: int = 1) -> Path:
    """Figure-eight course through all four quadrants, start point (scale, 0).

    Lemniscate x = a cos(t)/(1+sin^2 t), y = a sin(t) cos(t)/(1+sin^2 t),
    resampled at uniform arc spacing (~`spacing`) and repeated `laps` times.
    Traversal from (a, 0) runs Q1 -> Q3 -> Q2 -> Q4 and back to the start.
    """
    if scale <= 0 or spacing <= 0 or laps < 1:
        raise ValueError("figure_eight requires scale > 0, spacing > 0, laps >= 1")
    t = np.linspace(0.0, 2.0 * math.pi, 20001)
    denom = 1.0 + np.sin(t) ** 2
    x = scale * np.cos(t) / denom
    y = scale * np.sin(t) * np.cos(t) / denom
    chord = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))))
    lap_len = chord[-1]
    # Round the per-lap sample count so lap copies tile seamlessly: the seam
    # segment has the same length as every other segment.
    n = max(2, int(round(lap_len / spacing)))
    s = np.arange(n) * (lap_len / n)
    lap_x = np.interp(s, chord, x)
    lap_y = np.interp(s, chord, y)
    return build_path(np.tile(lap_x, laps), np.tile(lap_y, laps))


def load_path_xy(path_file: str, spacing: float | None = None) -> Path:
    """Load waypoints from a text file with one 'x y' pair per line.

    Lines starting with '#' and blank lines are skipped. When `spacing` is
    given the polyline is resampled at that uniform arc spacing.
    """
    xs: list[float] = []
    ys: list[float] = []
    with open(path_file) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path_file}:{ln}: expected 'x y', got {line!r}")
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
    p = build_path(xs, ys)
    if spacing is not None:
        s = np.arange(0.0, p.total_length, spacing)
        return build_path(np.interp(s, p.arc, p.cx), np.interp(s, p.arc, p.cy))
    return p


FOLLOWER_HEADING_MODES = ("tangent", "predecessor")


@dataclass(frozen=True)
class PlatoonConfig:
    """Platoon composition: robot count, desired arc gap and cruise speed.

    start_poses optionally overrides the default on-path placement; when None
    the robots are seeded on the path at the desired gaps behind the leader.
    follower_heading selects the heading reference for followers: the target
    waypoint's path tangent (default) or the predecessor robot's actual
    heading.
    """

    n_robots: int = 3
    gap_des: float = 1.0
    v_d: float = 2.0
    start_poses: tuple[tuple[float, float, float], ...] | None = None
    follower_heading: str = "tangent"

    def validate(self) -> None:
        if self.n_robots < 1:
            raise ValueError(f"n_robots must be >= 1, got {self.n_robots}")
        if not self.gap_des > 0:
            raise ValueError(f"gap_des must be > 0, got {self.gap_des}")
        if not self.v_d > 0:
            raise ValueError(f"v_d must be > 0, got {self.v_d}")
        if self.start_poses is not None and len(self.start_poses) != self.n_robots:
            raise ValueError(
                f"start_poses has {len(self.start_poses)} entries for "
                f"{self.n_robots} robots")
        if self.follower_heading not in FOLLOWER_HEADING_MODES:
            raise ValueError(
                f"follower_heading must be one of {FOLLOWER_HEADING_MODES}, "
                f"got {self.follower_heading!r}")


@dataclass(frozen=True)
class FollowerTarget:
    index: int
    pose: tuple[float, float, float]
    velocity: VelocityReference


def target_waypoint(path: Path, leader_index: int, gap_des: float) -> int:
    """Index of the waypoint a desired arc gap behind the leader's index.

    Walks backwards accumulating segment lengths until the accumulated
    distance reaches gap_des, clamping at index 0 when the path behind is
    shorter than the gap. Equivalently: the largest i <= leader_index whose
    arc distance to the leader is >= gap_des.
    """
    if not 0 <= leader_index < len(path):
        raise ValueError(f"leader_index {leader_index} outside path of {len(path)} points")
    if gap_des < 0:
        raise ValueError(f"gap_des must be >= 0, got {gap_des}")
    d = 0.0
    i = leader_index
    while d < gap_des and i > 0:
        d += path.segment_length(i)
        i -= 1
    return i


def reference_pose(path: Path, index: int) -> tuple[float, float, float]:
    """Waypoint position with the forward-difference tangent as heading
    (backward difference at the last index)."""
    if not 0 <= index < len(path):
        raise ValueError(f"index {index} outside path of {len(path)} points")
    j = index if index < len(path) - 1 else index - 1
    theta = math.atan2(path.cy[j + 1] - path.cy[j], path.cx[j + 1] - path.cx[j])
    return float(path.cx[index]), float(path.cy[index]), theta


def reference_velocity(path: Path, index: int, v_d: float) -> VelocityReference:
    """Reference twist at a waypoint: v_d along the path, omega_d = curvature * v_d."""
    if not 0 <= index < len(path):
        raise ValueError(f"index {index} outside path of {len(path)} points")
    return VelocityReference(v_d=v_d, omega_d=float(path.curvature[index]) * v_d)


def follower_target(path: Path, leader_index: int, gap_des: float,
                    v_d: float) -> FollowerTarget:
    """Full follower reference: target waypoint plus its pose and twist."""
    idx = target_waypoint(path, leader_index, gap_des)
    return FollowerTarget(index=idx, pose=reference_pose(path, idx),
                          velocity=reference_velocity(path, idx, v_d))


def gap_error(path: Path, idx_front: int, idx_rear: int, gap_des: float) -> float:
    """Arc length between two robots' nearest path indices minus the desired gap."""
    if idx_rear > idx_front:
        raise ValueError(f"idx_rear {idx_rear} is ahead of idx_front {idx_front}")
    return float(path.arc[idx_front] - path.arc[idx_rear]) - gap_des


def nearest_index(path: Path, x: float, y: float, hint: int | None = None,
                  window: int = 200) -> int:
    """Waypoint index closest to (x, y); ties break toward the larger index.

    With a hint, only indices within +-window of it are searched. That keeps
    the projection from jumping to the other branch at the figure-eight
    crossing and makes per-step progress tracking monotone in practice.
    """
    if hint is None:
        lo, hi = 0, len(path)
    else:
        lo = max(0, hint - window)
        hi = min(len(path), hint + window + 1)
    with np.errstate(over="ignore"):
        dx = path.cx[lo:hi] - x
        dy = path.cy[lo:hi] - y
        d2 = dx * dx + dy * dy
    # argmin on the reversed slice returns the last (largest-index) minimum.
    return hi - 1 - int(np.argmin(d2[::-1]))


def pose_at_arc(path: Path, s: float) -> tuple[float, float, float, float]:
    """Interpolated (x, y, theta, curvature) at arc-length position s.

    Position is linear between waypoints; heading interpolates the unwrapped
    vertex tangents, so it is continuous across segments. s is clamped to the
    path extent.
    """
    arc = path.arc
    if s <= 0.0:
        return float(path.cx[0]), float(path.cy[0]), float(path.tangent[0]), \
            float(path.curvature[0])
    if s >= arc[-1]:
        return float(path.cx[-1]), float(path.cy[-1]), float(path.tangent[-1]), \
            float(path.curvature[-1])
    j = int(np.searchsorted(arc, s, side="right")) - 1
    w = (s - arc[j]) / (arc[j + 1] - arc[j])
    return (
        float(path.cx[j] + w * (path.cx[j + 1] - path.cx[j])),
        float(path.cy[j] + w * (path.cy[j + 1] - path.cy[j])),
        float(path.tangent[j] + w * (path.tangent[j + 1] - path.tangent[j])),
        float(path.curvature[j] + w * (path.curvature[j + 1] - path.curvature[j])),
    )
