"""Behavioral feature extraction from validated scenes.

Produces one FeatureRecord per scene: per-vehicle speed/acceleration/zone/
distance/stop features, per-pedestrian speed/zone features, and for
interactive scenes the relative position, vehicle-pedestrian distance,
pedestrian safety margin (PSM) and predictive collision risk level.

PSM sign convention: PSM = T2 - T1 with T1 the pedestrian's and T2 the
vehicle's interpolated passage time at the conflict point, so a negative
value means the vehicle passed first.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum

import numpy as np

from . import kernels
from .config import Config, DEFAULT_CONFIG
from .geometry import contains_points, distance_to_polygon
from .scene_model import (
    FRAME_DT_TOL_S,
    ObjectTrack,
    ObjectType,
    PedestrianZone,
    Scene,
    SiteGeometry,
    SiteMetadata,
    VehicleZone,
    classify_pedestrian_zones,
    classify_vehicle_zones,
    validate_scene,
)


class SceneType(str, Enum):
    CAR_ONLY = "car_only"
    PEDESTRIAN_ONLY = "pedestrian_only"
    INTERACTIVE = "interactive"


class Accel(str, Enum):
    ACCELERATION = "acceleration"
    DECELERATION = "deceleration"
    NO_CHANGE = "no_change"


class StopBehavior(str, Enum):
    STOP = "stop"
    NO_STOP = "no_stop"


class RelativePosition(str, Enum):
    FRONT = "front"
    BEHIND = "behind"


class SceneValidationError(ValueError):
    def __init__(self, scene_code: str, violations: list[str]):
        super().__init__(f"scene {scene_code!r} failed validation: {violations}")
        self.scene_code = scene_code
        self.violations = violations


class FeatureExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class VehicleFeatures:
    object_id: str
    speed_series_kmh: tuple[float, ...]
    average_speed_kmh: float
    acceleration_series: tuple[Accel, ...]
    position_series: tuple[VehicleZone, ...]
    crosswalk_distance_series_m: tuple[float, ...]
    stop_behavior: StopBehavior | None


@dataclass(frozen=True)
class PedestrianFeatures:
    object_id: str
    speed_series_kmh: tuple[float, ...]
    average_speed_kmh: float
    position_series: tuple[PedestrianZone, ...]


@dataclass(frozen=True)
class InteractiveFeatures:
    relative_position_series: tuple[RelativePosition, ...]
    vp_distance_series_m: tuple[float, ...]
    psm_s: float | None
    pcr_level: int | None  # numeric 1..4, see safetycube.pcr.RiskLevel


@dataclass(frozen=True)
class FeatureRecord:
    scene_code: str
    spot_id: str
    start_time: datetime
    fps: float
    scene_type: SceneType
    vehicle: VehicleFeatures | None
    pedestrian: PedestrianFeatures | None
    interactive: InteractiveFeatures | None
    warnings: tuple[str, ...] = ()

    @property
    def psm_s(self) -> float | None:
        return self.interactive.psm_s if self.interactive else None

    @property
    def pcr_level(self) -> int | None:
        return self.interactive.pcr_level if self.interactive else None


# ---------------------------------------------------------------------------
# scene typing


def _tracks_overlap(a: ObjectTrack, b: ObjectTrack) -> bool:
    lo = max(a.t_start, b.t_start)
    hi = min(a.t_end, b.t_end)
    if hi - lo < -FRAME_DT_TOL_S:
        return False
    return bool(((a.times >= lo - FRAME_DT_TOL_S) & (a.times <= hi + FRAME_DT_TOL_S)).any())


def classify_scene_type(s: Scene) -> SceneType:
    kind, _ = _scene_type_and_warnings(s)
    return kind


def _scene_type_and_warnings(s: Scene) -> tuple[SceneType, list[str]]:
    if len(s.tracks) == 0:
        raise ValueError(f"scene {s.scene_code!r} has no tracks")
    vehicles = s.tracks_of(ObjectType.VEHICLE)
    pedestrians = s.tracks_of(ObjectType.PEDESTRIAN)
    if vehicles and pedestrians:
        if any(_tracks_overlap(v, p) for v in vehicles for p in pedestrians):
            return SceneType.INTERACTIVE, []
        # both types present but never concurrent: classify by the
        # first-appearing type and flag it; upstream segmentation should
        # have split this scene
        first = min(s.tracks, key=lambda tr: tr.t_start)
        kind = (
            SceneType.CAR_ONLY
            if first.object_type == ObjectType.VEHICLE
            else SceneType.PEDESTRIAN_ONLY
        )
        return kind, ["vehicle and pedestrian tracks never overlap in time"]
    if vehicles:
        return SceneType.CAR_ONLY, []
    return SceneType.PEDESTRIAN_ONLY, []


# ---------------------------------------------------------------------------
# kinematic series


def smooth_positions(xy: np.ndarray, window: int) -> np.ndarray:
    """Moving average with odd-reflection padding (exact on linear motion)."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"smoothing window must be odd and >= 1, got {window}")
    if window == 1 or xy.shape[0] < 3:
        return np.asarray(xy, dtype=np.float64)
    k = window // 2
    pad = np.pad(np.asarray(xy, dtype=np.float64), ((k, k), (0, 0)), mode="reflect", reflect_type="odd")
    kern = np.full(window, 1.0 / window)
    return np.column_stack([np.convolve(pad[:, i], kern, mode="valid") for i in range(2)])


def _velocities(track: ObjectTrack, window: int) -> np.ndarray:
    xy = smooth_positions(track.xy, window)
    t = track.times
    return np.column_stack([np.gradient(xy[:, 0], t, edge_order=1),
                            np.gradient(xy[:, 1], t, edge_order=1)])


def speed_series(track: ObjectTrack, window: int = 5) -> np.ndarray:
    """Per-frame speed in km/h from smoothed central differences."""
    if len(track) < 2:
        raise ValueError(f"track {track.object_id!r} has fewer than 2 points")
    v = _velocities(track, window)
    return np.hypot(v[:, 0], v[:, 1]) * 3.6


def acceleration_series(
    speeds_kmh, fps: float, threshold_mps2: float = 0.2
) -> list[Accel]:
    speeds = np.asarray(speeds_kmh, dtype=np.float64)
    if speeds.size < 2:
        raise ValueError("need at least 2 speed samples")
    a = np.diff(speeds / 3.6) * fps
    out = []
    for ai in a:
        if ai > threshold_mps2:
            out.append(Accel.ACCELERATION)
        elif ai < -threshold_mps2:
            out.append(Accel.DECELERATION)
        else:
            out.append(Accel.NO_CHANGE)
    return out


def crosswalk_distance_series(track: ObjectTrack, g: SiteGeometry) -> np.ndarray:
    """Per-frame distance to the crosswalk region edge; 0 inside."""
    return distance_to_polygon(g.crosswalk, track.xy)


def stop_behavior(
    track: ObjectTrack,
    g: SiteGeometry,
    v_stop_kmh: float = 1.0,
    min_dur_s: float = 0.5,
    window: int = 5,
) -> StopBehavior | None:
    """Stop iff speed stays below v_stop for >= min_dur while still before
    the crosswalk; None when the vehicle never reaches the crosswalk."""
    zones = classify_vehicle_zones(track.xy, g)
    on_idx = [i for i, z in enumerate(zones) if z == VehicleZone.ON_CROSSWALK]
    if not on_idx:
        return None
    first_on = on_idx[0]
    speeds = speed_series(track, window)
    dt = float(np.median(np.diff(track.times)))
    run = 0
    for i in range(first_on):
        if zones[i] == VehicleZone.BEFORE_CROSSWALK and speeds[i] < v_stop_kmh:
            run += 1
            if run * dt >= min_dur_s:
                return StopBehavior.STOP
        else:
            run = 0
    return StopBehavior.NO_STOP


# ---------------------------------------------------------------------------
# interactive series


def _overlap_alignment(veh: ObjectTrack, ped: ObjectTrack):
    """Vehicle frame indices inside the temporal overlap, plus the pedestrian
    position linearly interpolated at those times."""
    lo = max(veh.t_start, ped.t_start)
    hi = min(veh.t_end, ped.t_end)
    idx = np.flatnonzero((veh.times >= lo - FRAME_DT_TOL_S) & (veh.times <= hi + FRAME_DT_TOL_S))
    if idx.size == 0:
        raise ValueError(
            f"tracks {veh.object_id!r} and {ped.object_id!r} do not overlap in time"
        )
    t = veh.times[idx]
    px = np.interp(t, ped.times, ped.xy[:, 0])
    py = np.interp(t, ped.times, ped.xy[:, 1])
    return idx, np.column_stack([px, py]), t


def vp_distance_series(veh: ObjectTrack, ped: ObjectTrack) -> np.ndarray:
    idx, ped_xy, _ = _overlap_alignment(veh, ped)
    diff = veh.xy[idx] - ped_xy
    return np.hypot(diff[:, 0], diff[:, 1])


def relative_position_series(
    veh: ObjectTrack, ped: ObjectTrack, g: SiteGeometry, window: int = 5
) -> list[RelativePosition]:
    """front iff the pedestrian is ahead of the vehicle along its heading;
    exact abeam (projection 0) ties to behind."""
    idx, ped_xy, _ = _overlap_alignment(veh, ped)
    vel = _velocities(veh, window)
    heading = np.array(g.approach_axis, dtype=np.float64)
    out = []
    for i, k in enumerate(idx):
        v = vel[k]
        n = np.hypot(v[0], v[1])
        if n > 1e-9:
            heading = v / n
        proj = float((ped_xy[i] - veh.xy[k]) @ heading)
        out.append(RelativePosition.FRONT if proj > 0 else RelativePosition.BEHIND)
    return out


def compress_runs(labels) -> list:
    """Run-length compression for storage: drop consecutive duplicates."""
    out = []
    for lab in labels:
        if not out or out[-1] != lab:
            out.append(lab)
    return out


# ---------------------------------------------------------------------------
# conflict point and PSM


def conflict_point(
    veh: ObjectTrack, ped: ObjectTrack, d_conflict_m: float = 1.0, window: int = 5
) -> np.ndarray | None:
    """First crossing of the two (smoothed) trajectory polylines, scanning
    the pedestrian path in order; if they never cross, the pedestrian-path
    point of closest approach when within d_conflict; otherwise None."""
    ped_xy = np.ascontiguousarray(smooth_positions(ped.xy, window))
    veh_xy = np.ascontiguousarray(smooth_positions(veh.xy, window))
    found, x, y = kernels.first_polyline_intersection(ped_xy, veh_xy)
    if found:
        return np.array([x, y])
    dist, x, y = kernels.polyline_closest_point(ped_xy, veh_xy)
    if dist < d_conflict_m:
        return np.array([x, y])
    return None


def crosswalk_entry_point(ped: ObjectTrack, g: SiteGeometry) -> np.ndarray | None:
    """Alternate conflict point: first pedestrian sample inside the crosswalk."""
    inside = contains_points(g.crosswalk, ped.xy)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        return None
    return ped.xy[hits[0]].copy()


def compute_psm(
    veh: ObjectTrack,
    ped: ObjectTrack,
    cp: np.ndarray,
    fps: float,
    d_conflict_m: float = 1.0,
    window: int = 5,
) -> float | None:
    """T2 - T1: interpolated vehicle passage time minus pedestrian passage
    time at the conflict point (smoothed paths, noise-limited otherwise);
    None if either track stays farther than d_conflict from it."""
    px, py = float(cp[0]), float(cp[1])
    ped_xy = np.ascontiguousarray(smooth_positions(ped.xy, window))
    veh_xy = np.ascontiguousarray(smooth_positions(veh.xy, window))
    d_ped, t1 = kernels.closest_approach_time(ped_xy, ped.times, px, py)
    d_veh, t2 = kernels.closest_approach_time(veh_xy, veh.times, px, py)
    if d_ped > d_conflict_m or d_veh > d_conflict_m:
        return None
    return float(t2 - t1)


# ---------------------------------------------------------------------------
# orchestration


def _pick_interactive_pair(s: Scene) -> tuple[ObjectTrack, ObjectTrack]:
    """Closest vehicle-pedestrian pair by minimum separation over the
    overlapping frames."""
    best = None
    best_d = np.inf
    for v in s.tracks_of(ObjectType.VEHICLE):
        for p in s.tracks_of(ObjectType.PEDESTRIAN):
            if not _tracks_overlap(v, p):
                continue
            d = float(vp_distance_series(v, p).min())
            if d < best_d:
                best_d = d
                best = (v, p)
    assert best is not None
    return best


def _first_track(s: Scene, object_type: ObjectType) -> ObjectTrack:
    return min(s.tracks_of(object_type), key=lambda tr: tr.t_start)


def extract_features(
    s: Scene,
    g: SiteGeometry,
    meta: SiteMetadata | None = None,
    config: Config = DEFAULT_CONFIG,
    predictor=None,
) -> FeatureRecord:
    """Compute the full behavioral feature record for one scene.

    For interactive scenes the vehicle-pedestrian pair with minimum
    separation carries the interactive features; the PCR level comes from
    the risk module using `predictor` (constant-velocity by default).
    """
    violations = validate_scene(s, g, config.bbox_margin_m)
    if violations:
        raise SceneValidationError(s.scene_code, violations)
    kind, warnings = _scene_type_and_warnings(s)

    try:
        veh = ped = None
        if kind == SceneType.INTERACTIVE:
            veh, ped = _pick_interactive_pair(s)
        elif kind == SceneType.CAR_ONLY:
            veh = _first_track(s, ObjectType.VEHICLE)
        else:
            ped = _first_track(s, ObjectType.PEDESTRIAN)

        vehicle_features = None
        if veh is not None:
            speeds = speed_series(veh, config.smoothing_window)
            vehicle_features = VehicleFeatures(
                object_id=veh.object_id,
                speed_series_kmh=tuple(float(x) for x in speeds),
                average_speed_kmh=float(np.mean(speeds)),
                acceleration_series=tuple(
                    acceleration_series(speeds, s.fps, config.accel_threshold_mps2)
                ),
                position_series=tuple(classify_vehicle_zones(veh.xy, g)),
                crosswalk_distance_series_m=tuple(
                    float(x) for x in crosswalk_distance_series(veh, g)
                ),
                stop_behavior=stop_behavior(
                    veh, g, config.v_stop_kmh, config.stop_min_dur_s, config.smoothing_window
                ),
            )

        pedestrian_features = None
        if ped is not None:
            speeds = speed_series(ped, config.smoothing_window)
            pedestrian_features = PedestrianFeatures(
                object_id=ped.object_id,
                speed_series_kmh=tuple(float(x) for x in speeds),
                average_speed_kmh=float(np.mean(speeds)),
                position_series=tuple(classify_pedestrian_zones(ped.xy, g)),
            )

        interactive_features = None
        if kind == SceneType.INTERACTIVE:
            if config.conflict_point_mode == "crosswalk_entry":
                cp = crosswalk_entry_point(ped, g)
                if cp is None:
                    cp = conflict_point(veh, ped, config.d_conflict_m, config.smoothing_window)
            else:
                cp = conflict_point(veh, ped, config.d_conflict_m, config.smoothing_window)
            psm = (
                compute_psm(veh, ped, cp, s.fps, config.d_conflict_m, config.smoothing_window)
                if cp is not None
                else None
            )
            from .pcr import scene_pcr_level  # deferred: pcr depends on this module's types

            level = scene_pcr_level(veh, ped, config, predictor)
            interactive_features = InteractiveFeatures(
                relative_position_series=tuple(
                    relative_position_series(veh, ped, g, config.smoothing_window)
                ),
                vp_distance_series_m=tuple(float(x) for x in vp_distance_series(veh, ped)),
                psm_s=psm,
                pcr_level=int(level) if level is not None else None,
            )
    except SceneValidationError:
        raise
    except Exception as e:
        raise FeatureExtractionError(f"scene {s.scene_code!r}: {e}") from e

    return FeatureRecord(
        scene_code=s.scene_code,
        spot_id=s.spot_id,
        start_time=s.start_time,
        fps=s.fps,
        scene_type=kind,
        vehicle=vehicle_features,
        pedestrian=pedestrian_features,
        interactive=interactive_features,
        warnings=tuple(warnings),
    )
