"""Core domain types: trajectories, site geometry, zone classification.

Coordinates are planar meters in a site-local top-view frame. All types are
immutable after construction and safe to share across threads; the zone
classifiers are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from functools import cached_property

import numpy as np

from . import geometry

BOUNDARY_TOL_M = 1e-9
FRAME_DT_TOL_S = 1e-6


class ObjectType(str, Enum):
    VEHICLE = "vehicle"
    PEDESTRIAN = "pedestrian"


class PedestrianZone(str, Enum):
    SIDEWALK = "sidewalk"
    CROSSWALK = "crosswalk"
    CIA = "cia"
    OTHER = "other"


class VehicleZone(str, Enum):
    BEFORE_CROSSWALK = "before_crosswalk"
    ON_CROSSWALK = "on_crosswalk"
    AFTER_CROSSWALK = "after_crosswalk"


@dataclass(frozen=True)
class TrackPoint:
    t: float  # seconds since scene start
    x: float  # meters
    y: float  # meters


@dataclass(frozen=True)
class ObjectTrack:
    object_id: str
    object_type: ObjectType
    points: tuple[TrackPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "object_type", ObjectType(self.object_type))

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.points], dtype=np.float64)

    @cached_property
    def xy(self) -> np.ndarray:
        return np.ascontiguousarray(
            [[p.x, p.y] for p in self.points], dtype=np.float64
        )

    @property
    def t_start(self) -> float:
        return self.points[0].t

    @property
    def t_end(self) -> float:
        return self.points[-1].t

    def slice_until(self, t: float) -> "ObjectTrack":
        """History prefix with all points at time <= t (for prediction)."""
        keep = [p for p in self.points if p.t <= t + FRAME_DT_TOL_S]
        return ObjectTrack(self.object_id, self.object_type, tuple(keep))


@dataclass(frozen=True)
class Scene:
    scene_code: str
    spot_id: str
    start_time: datetime
    fps: float
    tracks: tuple[ObjectTrack, ...]

    def __post_init__(self):
        object.__setattr__(self, "tracks", tuple(self.tracks))

    def tracks_of(self, object_type: ObjectType) -> list[ObjectTrack]:
        return [tr for tr in self.tracks if tr.object_type == object_type]


@dataclass(frozen=True)
class SiteGeometry:
    crosswalk: np.ndarray
    cia: np.ndarray
    sidewalks: tuple[np.ndarray, ...]
    approach_axis: np.ndarray  # unit vector, vehicle travel direction
    stop_line: np.ndarray      # (2,2) segment on the approach side

    def __post_init__(self):
        object.__setattr__(self, "crosswalk", geometry.as_polygon(self.crosswalk))
        object.__setattr__(self, "cia", geometry.as_polygon(self.cia))
        object.__setattr__(
            self, "sidewalks", tuple(geometry.as_polygon(s) for s in self.sidewalks)
        )
        axis = np.asarray(self.approach_axis, dtype=np.float64)
        if axis.shape != (2,) or abs(float(np.hypot(*axis)) - 1.0) > 1e-9:
            raise ValueError("approach_axis must be a 2d unit vector")
        object.__setattr__(self, "approach_axis", axis)
        line = np.asarray(self.stop_line, dtype=np.float64)
        if line.shape != (2, 2):
            raise ValueError("stop_line must be a (2,2) segment")
        object.__setattr__(self, "stop_line", line)
        for name in ("crosswalk", "cia"):
            if not geometry.is_simple(getattr(self, name)):
                raise ValueError(f"{name} polygon is self-intersecting")
        for s in self.sidewalks:
            if not geometry.is_simple(s):
                raise ValueError("sidewalk polygon is self-intersecting")
        if self._regions_overlap(self.crosswalk, self.cia):
            raise ValueError("cia and crosswalk interiors overlap")

    @staticmethod
    def _regions_overlap(a: np.ndarray, b: np.ndarray) -> bool:
        # sampled interior-overlap check (centroids + vertices strictly
        # inside the other region); adjacency along a shared edge is fine
        def strictly_inside(poly: np.ndarray, pts: np.ndarray) -> bool:
            inside = geometry.contains_points(poly, pts, tol=0.0)
            clear = geometry.edge_distances(poly, pts) > 1e-9
            return bool((inside & clear).any())

        ca = geometry.polygon_centroid(a)[None, :]
        cb = geometry.polygon_centroid(b)[None, :]
        return (
            strictly_inside(b, ca)
            or strictly_inside(a, cb)
            or strictly_inside(b, a)
            or strictly_inside(a, b)
        )

    @cached_property
    def crosswalk_centroid(self) -> np.ndarray:
        return geometry.polygon_centroid(self.crosswalk)


@dataclass(frozen=True)
class SiteMetadata:
    spot_id: str
    name: str
    crosswalk_length_m: float
    school_zone: bool
    speed_camera: bool
    fence: bool
    red_urethane: bool
    num_lanes: int
    signalized: bool
    speed_limit_kmh: float
    neighborhood: str
    district: str
    city: str
    province: str

    def __post_init__(self):
        if self.num_lanes < 1:
            raise ValueError(f"{self.spot_id}: num_lanes must be >= 1")
        if self.speed_limit_kmh <= 0:
            raise ValueError(f"{self.spot_id}: speed_limit_kmh must be positive")
        for attr in ("spot_id", "neighborhood", "district", "city", "province"):
            if not getattr(self, attr):
                raise ValueError(f"site {self.spot_id!r}: {attr} must be non-empty")

    @property
    def road_flags(self) -> dict[str, bool]:
        return {
            "school_zone": self.school_zone,
            "speed_camera": self.speed_camera,
            "fence": self.fence,
            "red_urethane": self.red_urethane,
        }


# ---------------------------------------------------------------------------
# zone classification


def classify_pedestrian_zone(p: TrackPoint, g: SiteGeometry) -> PedestrianZone:
    """First containing region in the order crosswalk -> cia -> sidewalk."""
    labels = classify_pedestrian_zones(np.array([[p.x, p.y]]), g)
    return labels[0]


def classify_pedestrian_zones(xy: np.ndarray, g: SiteGeometry) -> list[PedestrianZone]:
    n = xy.shape[0]
    out = [PedestrianZone.OTHER] * n
    undecided = np.ones(n, dtype=bool)
    regions: list[tuple[PedestrianZone, np.ndarray]] = [
        (PedestrianZone.CROSSWALK, g.crosswalk),
        (PedestrianZone.CIA, g.cia),
    ]
    regions.extend((PedestrianZone.SIDEWALK, s) for s in g.sidewalks)
    for zone, poly in regions:
        if not undecided.any():
            break
        hit = geometry.contains_points(poly, xy, tol=BOUNDARY_TOL_M) & undecided
        for i in np.flatnonzero(hit):
            out[i] = zone
        undecided &= ~hit
    return out


def classify_vehicle_zone(p: TrackPoint, g: SiteGeometry) -> VehicleZone:
    return classify_vehicle_zones(np.array([[p.x, p.y]]), g)[0]


def classify_vehicle_zones(xy: np.ndarray, g: SiteGeometry) -> list[VehicleZone]:
    on = geometry.contains_points(g.crosswalk, xy, tol=BOUNDARY_TOL_M)
    proj = (xy - g.crosswalk_centroid) @ g.approach_axis
    out = []
    for i in range(xy.shape[0]):
        if on[i]:
            out.append(VehicleZone.ON_CROSSWALK)
        elif proj[i] > BOUNDARY_TOL_M:
            out.append(VehicleZone.AFTER_CROSSWALK)
        else:
            # ties within the boundary tolerance go to "before" so the
            # label is stable under frame translation float noise
            out.append(VehicleZone.BEFORE_CROSSWALK)
    return out


# ---------------------------------------------------------------------------
# validation


def validate_scene(s: Scene, g: SiteGeometry, bbox_margin_m: float = 200.0) -> list[str]:
    """Collect invariant violations; an empty list means the scene is usable."""
    violations: list[str] = []
    if not s.scene_code:
        violations.append("scene_code is empty")
    if s.fps <= 0:
        violations.append(f"fps must be positive, got {s.fps}")
    if s.start_time.tzinfo is None:
        violations.append("start_time is not timezone-aware")
    if len(s.tracks) == 0:
        violations.append("scene has no tracks")
        return violations

    all_pts = np.vstack([g.crosswalk, g.cia, *g.sidewalks])
    lo = all_pts.min(axis=0) - bbox_margin_m
    hi = all_pts.max(axis=0) + bbox_margin_m
    dt_expected = 1.0 / s.fps if s.fps > 0 else None

    for k, tr in enumerate(s.tracks):
        label = f"track {k} ({tr.object_id})"
        if len(tr.points) < 2:
            violations.append(f"{label}: fewer than 2 points")
            continue
        ts = tr.times
        deltas = np.diff(ts)
        bad = np.flatnonzero(deltas <= 0)
        if bad.size:
            violations.append(f"{label}: time not strictly increasing at index {bad[0] + 1}")
        elif dt_expected is not None:
            off = np.flatnonzero(np.abs(deltas - dt_expected) > FRAME_DT_TOL_S)
            if off.size:
                violations.append(
                    f"{label}: frame interval deviates from 1/fps at index {off[0] + 1}"
                )
        if (ts < 0).any():
            violations.append(f"{label}: negative timestamps")
        xy = tr.xy
        if not np.isfinite(xy).all():
            violations.append(f"{label}: non-finite coordinates")
        else:
            out = (xy < lo).any(axis=1) | (xy > hi).any(axis=1)
            if out.any():
                violations.append(
                    f"{label}: point {int(np.flatnonzero(out)[0])} outside site bounding box"
                )
    return violations
