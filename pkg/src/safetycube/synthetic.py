"""Deterministic crosswalk encounter generator with analytic ground truth.

A generated encounter puts the conflict point at the crosswalk centroid:
the vehicle travels along the approach axis through it, the pedestrian
crosses on the perpendicular. The pedestrian passes the conflict point at
T1 and the vehicle at T2 = T1 + offset, so the target PSM is the spec's
signed offset by construction. Randomness (noise, sampled speeds, minute
jitter in corpus timestamps) comes from counter-based Philox streams keyed
by the seed, so identical seeds reproduce identical scenes on any platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .geometry import polygon_centroid
from .scene_model import ObjectTrack, ObjectType, Scene, SiteGeometry, TrackPoint

KST = timezone(timedelta(hours=9))

_STOP_DWELL_S = 1.0
_STOP_ACCEL_MPS2 = 2.5


@dataclass(frozen=True)
class EncounterSpec:
    seed: int
    vehicle_speed_kmh: float
    pedestrian_speed_kmh: float
    offset_s: float                  # target PSM = T2 - T1
    yielding: bool | None = None     # derived from offset when None
    stop: bool = False
    noise_std_m: float = 0.0
    spot_id: str = "Spot E"
    start_time: datetime = datetime(2023, 1, 9, 8, 30, tzinfo=KST)
    fps: float = 30.0
    scene_code: str | None = None

    def __post_init__(self):
        if self.vehicle_speed_kmh <= 0 or self.pedestrian_speed_kmh <= 0:
            raise ValueError("speeds must be positive")
        if self.noise_std_m < 0:
            raise ValueError("noise std must be non-negative")
        if self.yielding is not None and self.yielding != (self.offset_s > 0):
            raise ValueError(
                f"yielding={self.yielding} contradicts offset_s={self.offset_s}"
            )


@dataclass(frozen=True)
class GroundTruth:
    conflict_point: tuple[float, float]
    t_ped: float   # T1
    t_veh: float   # T2
    psm: float
    vehicle_speed_kmh: float
    pedestrian_speed_kmh: float
    stop: bool


def _vehicle_profile(v: float, stop: bool, s_stop: float):
    """Distance-along-axis profile s(t) with s=0 (the conflict point)
    crossed at t=0; returns (s_of_t, decel_start_time).

    Without a stop this is linear. With one, the vehicle decelerates to rest
    at s_stop, dwells, then accelerates back toward cruise speed; the whole
    profile is anchored so the crossing still happens at t=0 exactly.
    """
    if not stop:
        return (lambda t: v * t), None
    a = _STOP_ACCEL_MPS2
    t_dec = v / a                      # deceleration duration
    d_dec = v * v / (2 * a)            # deceleration distance
    d_acc_full = v * v / (2 * a)       # distance to regain cruise speed
    gap = -s_stop                      # stop point to conflict point
    if gap <= 0:
        raise ValueError("stop point must lie before the conflict point")
    if gap >= d_acc_full:
        t_cross_after_go = v / a + (gap - d_acc_full) / v
    else:
        t_cross_after_go = math.sqrt(2 * gap / a)
    t_go = -t_cross_after_go           # dwell ends here (crossing at t=0)
    t_stop = t_go - _STOP_DWELL_S      # dwell starts here
    t_dec_start = t_stop - t_dec

    def s_of_t(t):
        if t >= t_go:
            dt = t - t_go
            if dt < v / a:
                return s_stop + 0.5 * a * dt * dt
            return s_stop + d_acc_full + v * (dt - v / a)
        if t >= t_stop:
            return s_stop
        if t >= t_dec_start:
            # dt seconds before rest: speed a*dt, remaining run (a*dt^2)/2
            dt = t_stop - t
            return s_stop - 0.5 * a * dt * dt
        return s_stop - d_dec - v * (t_dec_start - t)

    return s_of_t, t_dec_start


def generate_scene(spec: EncounterSpec, geometry: SiteGeometry) -> tuple[Scene, GroundTruth]:
    """Build one encounter scene plus its analytic ground truth."""
    axis = geometry.approach_axis
    perp = np.array([-axis[1], axis[0]])
    c = polygon_centroid(geometry.crosswalk)
    v = spec.vehicle_speed_kmh / 3.6
    u = spec.pedestrian_speed_kmh / 3.6
    fps = spec.fps
    dt = 1.0 / fps

    # stop point: 1 m upstream of the stop line along the approach axis
    stop_line_mid = geometry.stop_line.mean(axis=0)
    s_stop = float((stop_line_mid - c) @ axis) - 1.0

    # timeline: pedestrian crosses the conflict point at T1, vehicle at T2
    cw_half = 0.5 * abs(float((geometry.crosswalk.max(axis=0) - geometry.crosswalk.min(axis=0)) @ np.abs(perp)))
    ped_lead_m = max(cw_half + 2.0, 2.5 * u + 0.5)
    ped_exit_m = cw_half + 2.0
    veh_lead_m = max(2.5 * v, 12.0)
    veh_exit_m = max(2.5 * v, 10.0)  # long exits keep overlap evaluable for PCR

    s_profile, t_dec_start = _vehicle_profile(v, spec.stop, s_stop)
    if spec.stop:
        # ensure the cruise phase before braking is long enough for history
        veh_lead_t = (veh_lead_m / v) + (0.0 - t_dec_start)
    else:
        veh_lead_t = veh_lead_m / v
    veh_exit_t = veh_exit_m / v
    ped_lead_t = ped_lead_m / u
    ped_exit_t = ped_exit_m / u

    t1 = max(ped_lead_t, veh_lead_t - spec.offset_s) + 0.5
    t2 = t1 + spec.offset_s

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))

    def frame_times(t_from: float, t_to: float) -> np.ndarray:
        k0 = max(0, math.floor(t_from * fps))
        k1 = math.ceil(t_to * fps)
        return np.arange(k0, k1 + 1, dtype=np.float64) * dt

    tv = frame_times(t2 - veh_lead_t, t2 + veh_exit_t)
    sv = np.array([s_profile(t - t2) for t in tv])
    veh_xy = c[None, :] + sv[:, None] * axis[None, :]

    tp = frame_times(t1 - ped_lead_t, t1 + ped_exit_t)
    sp = u * (tp - t1)
    ped_xy = c[None, :] + sp[:, None] * perp[None, :]

    if spec.noise_std_m > 0:
        veh_xy = veh_xy + rng.normal(0.0, spec.noise_std_m, veh_xy.shape)
        ped_xy = ped_xy + rng.normal(0.0, spec.noise_std_m, ped_xy.shape)

    code = spec.scene_code or f"syn-{spec.seed:010d}"
    scene = Scene(
        scene_code=code,
        spot_id=spec.spot_id,
        start_time=spec.start_time,
        fps=fps,
        tracks=(
            ObjectTrack(
                "veh-0",
                ObjectType.VEHICLE,
                tuple(TrackPoint(float(t), float(x), float(y)) for t, (x, y) in zip(tv, veh_xy)),
            ),
            ObjectTrack(
                "ped-0",
                ObjectType.PEDESTRIAN,
                tuple(TrackPoint(float(t), float(x), float(y)) for t, (x, y) in zip(tp, ped_xy)),
            ),
        ),
    )
    truth = GroundTruth(
        conflict_point=(float(c[0]), float(c[1])),
        t_ped=t1,
        t_veh=t2,
        psm=spec.offset_s,
        vehicle_speed_kmh=spec.vehicle_speed_kmh,
        pedestrian_speed_kmh=spec.pedestrian_speed_kmh,
        stop=spec.stop,
    )
    return scene, truth


# ---------------------------------------------------------------------------
# corpus generation


@dataclass(frozen=True)
class CorpusComponent:
    """One stratum of the mixture; scenes are drawn with parameters uniform
    over the given ranges."""

    name: str
    weight: float
    spot_id: str
    period: str                          # "day" | "night"
    vehicle_speed_kmh: tuple[float, float]
    pedestrian_speed_kmh: tuple[float, float]
    offset_s: tuple[float, float]
    stop: bool = False
    noise_std_m: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusComponent":
        def rng_pair(v):
            if isinstance(v, (int, float)):
                return (float(v), float(v))
            return (float(v[0]), float(v[1]))

        return cls(
            name=d["name"],
            weight=float(d["weight"]),
            spot_id=d["spot_id"],
            period=d["period"],
            vehicle_speed_kmh=rng_pair(d["vehicle_speed_kmh"]),
            pedestrian_speed_kmh=rng_pair(d["pedestrian_speed_kmh"]),
            offset_s=rng_pair(d["offset_s"]),
            stop=bool(d.get("stop", False)),
            noise_std_m=float(d.get("noise_std_m", 0.0)),
        )


def load_corpus_spec(path: str | Path) -> list[CorpusComponent]:
    doc = json.loads(Path(path).read_text())
    return [CorpusComponent.from_dict(c) for c in doc["components"]]


_WEEKDAYS_2023_01 = [9, 10, 11, 12, 13, 16, 17, 18, 19, 20, 23, 24, 25, 26]
_PERIOD_HOURS = {"day": (8, 9), "night": (18, 19)}


def _quota_counts(weights: np.ndarray, n: int) -> np.ndarray:
    """Largest-remainder apportionment of n among the weights."""
    raw = weights * n
    counts = np.floor(raw).astype(int)
    rem = raw - counts
    short = n - counts.sum()
    for i in np.argsort(-rem)[:short]:
        counts[i] += 1
    return counts


def generate_corpus(
    components: list[CorpusComponent],
    n: int,
    seed: int,
    geometries: dict[str, SiteGeometry],
    with_truth: bool = False,
):
    """Draw n scenes from the mixture, deterministically for a fixed seed.

    Component counts follow exact largest-remainder quotas of the weights,
    so engineered shares hold up to integer rounding.
    """
    if n <= 0:
        raise ValueError(f"corpus size must be positive, got {n}")
    weights = np.array([c.weight for c in components], dtype=np.float64)
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError(f"mixture weights must sum to 1, got {weights.sum()}")
    counts = _quota_counts(weights, n)
    scenes = []
    truths = []
    idx = 0
    for ci, (comp, count) in enumerate(zip(components, counts)):
        if comp.period not in _PERIOD_HOURS:
            raise ValueError(f"component {comp.name!r}: unknown period {comp.period!r}")
        if comp.spot_id not in geometries:
            raise ValueError(f"component {comp.name!r}: unknown spot {comp.spot_id!r}")
        geom = geometries[comp.spot_id]
        for k in range(count):
            ss = np.random.SeedSequence(seed, spawn_key=(ci, k))
            rng = np.random.Generator(np.random.Philox(ss))
            day = _WEEKDAYS_2023_01[int(rng.integers(len(_WEEKDAYS_2023_01)))]
            hour = _PERIOD_HOURS[comp.period][int(rng.integers(2))]
            start = datetime(
                2023, 1, day, hour, int(rng.integers(60)), int(rng.integers(60)), tzinfo=KST
            )
            spec = EncounterSpec(
                seed=int(ss.generate_state(1)[0] % (2**31)),
                vehicle_speed_kmh=float(rng.uniform(*comp.vehicle_speed_kmh)),
                pedestrian_speed_kmh=float(rng.uniform(*comp.pedestrian_speed_kmh)),
                offset_s=float(rng.uniform(*comp.offset_s)),
                stop=comp.stop,
                noise_std_m=comp.noise_std_m,
                spot_id=comp.spot_id,
                start_time=start,
                scene_code=f"syn-{seed:06d}-{ci:02d}-{k:05d}",
            )
            scene, truth = generate_scene(spec, geom)
            scenes.append(scene)
            truths.append(truth)
            idx += 1
    return (scenes, truths) if with_truth else scenes
