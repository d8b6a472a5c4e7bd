from datetime import datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safetycube.config import DEFAULT_CONFIG
from safetycube.features import (
    Accel,
    RelativePosition,
    SceneType,
    SceneValidationError,
    StopBehavior,
    acceleration_series,
    classify_scene_type,
    compress_runs,
    compute_psm,
    conflict_point,
    crosswalk_distance_series,
    extract_features,
    relative_position_series,
    speed_series,
    stop_behavior,
    vp_distance_series,
)
from safetycube.scene_model import ObjectTrack, ObjectType, Scene, TrackPoint

KST = timezone(timedelta(hours=9))
FPS = 30.0


def track(points, object_type=ObjectType.VEHICLE, object_id="v0"):
    return ObjectTrack(object_id, object_type, tuple(TrackPoint(*p) for p in points))


def straight(x0, y0, vx, vy, n=60, t0=0.0, object_type=ObjectType.VEHICLE, object_id="v0"):
    return track(
        [(t0 + k / FPS, x0 + vx * k / FPS, y0 + vy * k / FPS) for k in range(n)],
        object_type,
        object_id,
    )


def scene_of(tracks, fps=FPS, spot="Spot E", code="s1"):
    return Scene(code, spot, datetime(2023, 1, 9, 8, 30, tzinfo=KST), fps, tuple(tracks))


# ---------------------------------------------------------------------------
# scene types


def test_scene_type_car_only():
    assert classify_scene_type(scene_of([straight(0, 0, 5, 0)])) == SceneType.CAR_ONLY


def test_scene_type_interactive():
    s = scene_of(
        [straight(0, 0, 5, 0), straight(3, -5, 0, 1.4, object_type=ObjectType.PEDESTRIAN, object_id="p0")]
    )
    assert classify_scene_type(s) == SceneType.INTERACTIVE


def test_scene_type_non_overlapping_tracks():
    veh = straight(0, 0, 5, 0, n=60, t0=0.0)  # t in [0, 2)
    ped = straight(0, -5, 0, 1.4, n=60, t0=5.0, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    s = scene_of([veh, ped])
    assert classify_scene_type(s) == SceneType.CAR_ONLY  # first-appearing type


def test_scene_type_empty_errors():
    s = Scene("s", "Spot E", datetime(2023, 1, 9, 8, 0, tzinfo=KST), FPS, ())
    with pytest.raises(ValueError):
        classify_scene_type(s)


# ---------------------------------------------------------------------------
# speed / acceleration


@pytest.mark.parametrize("window", [1, 3, 5, 9])
def test_speed_series_constant_velocity(window):
    tr = straight(0, 0, 4.0, 0.0, n=40)
    speeds = speed_series(tr, window)
    assert speeds.shape == (40,)
    assert np.allclose(speeds, 14.4, atol=1e-6)


def test_speed_series_stationary():
    tr = track([(k / FPS, 2.0, 3.0) for k in range(20)])
    assert np.allclose(speed_series(tr, 5), 0.0)


def test_speed_series_translation_invariant():
    rng = np.random.default_rng(5)
    pts = np.cumsum(rng.normal(0.2, 0.05, (50, 2)), axis=0)
    a = track([(k / FPS, x, y) for k, (x, y) in enumerate(pts)])
    b = track([(k / FPS, x + 100.0, y - 40.0) for k, (x, y) in enumerate(pts)])
    assert np.allclose(speed_series(a, 5), speed_series(b, 5))


def test_speed_series_too_short():
    with pytest.raises(ValueError):
        speed_series(track([(0.0, 0.0, 0.0)]), 5)


def test_average_speed_within_range():
    rng = np.random.default_rng(9)
    pts = np.cumsum(rng.normal(0.15, 0.03, (60, 2)), axis=0)
    tr = track([(k / FPS, x, y) for k, (x, y) in enumerate(pts)])
    speeds = speed_series(tr, 5)
    assert speeds.min() - 1e-12 <= speeds.mean() <= speeds.max() + 1e-12


def test_acceleration_series_constant_speed():
    labels = acceleration_series([20.0] * 10, FPS, 0.2)
    assert labels == [Accel.NO_CHANGE] * 9


def test_acceleration_series_decelerating():
    # 1 km/h drop per frame at 30 fps = -8.3 m/s^2, far beyond threshold
    speeds = [30.0 - k for k in range(10)]
    assert acceleration_series(speeds, FPS, 0.2) == [Accel.DECELERATION] * 9


def test_acceleration_series_mixed_pattern():
    # ramp up, plateau, ramp down
    speeds = [10.0, 14.0, 14.0, 10.0]
    got = acceleration_series(speeds, 1.0, 0.2)
    assert got == [Accel.ACCELERATION, Accel.NO_CHANGE, Accel.DECELERATION]


# ---------------------------------------------------------------------------
# distances


def test_crosswalk_distance_inside_zero(site_e):
    geom = site_e[1]
    tr = track([(0.0, 0.0, 0.0), (1 / FPS, 0.1, 0.0)])
    assert np.allclose(crosswalk_distance_series(tr, geom), 0.0)


def test_crosswalk_distance_outside(site_e):
    geom = site_e[1]
    x_edge = geom.crosswalk[:, 0].min()
    tr = track([(0.0, x_edge - 4.1, 0.0), (1 / FPS, x_edge - 4.1, 0.0)])
    assert np.allclose(crosswalk_distance_series(tr, geom), 4.1)


def test_crosswalk_distance_symmetry(site_e):
    geom = site_e[1]
    lo = geom.crosswalk[:, 0].min()
    hi = geom.crosswalk[:, 0].max()
    a = track([(0.0, lo - 2.5, 0.0), (1 / FPS, lo - 2.5, 0.0)])
    b = track([(0.0, hi + 2.5, 0.0), (1 / FPS, hi + 2.5, 0.0)])
    assert np.allclose(crosswalk_distance_series(a, geom), crosswalk_distance_series(b, geom))


def test_vp_distance_345():
    veh = track([(0.0, 0.0, 0.0), (1 / FPS, 0.0, 0.0)])
    ped = track([(0.0, 3.0, 4.0), (1 / FPS, 3.0, 4.0)], ObjectType.PEDESTRIAN, "p0")
    assert np.allclose(vp_distance_series(veh, ped), 5.0)


def test_vp_distance_no_overlap_errors():
    veh = straight(0, 0, 5, 0, n=10, t0=0.0)
    ped = straight(0, 0, 0, 1, n=10, t0=9.0, object_type=ObjectType.PEDESTRIAN)
    with pytest.raises(ValueError, match="overlap"):
        vp_distance_series(veh, ped)


# ---------------------------------------------------------------------------
# stop behavior


def make_stop_track(geom, dwell_s, v_kmh=20.0):
    """Approach, dwell at ~4 m before the crosswalk edge, then cross."""
    v = v_kmh / 3.6
    x_edge = geom.crosswalk[:, 0].min()
    xs = []
    x = x_edge - 12.0
    t = 0.0
    phase_end = None
    dwell_frames = int(round(dwell_s * FPS))
    held = 0
    while x < x_edge + 3.0:
        xs.append((t, x, 0.0))
        if x >= x_edge - 4.0 and held < dwell_frames:
            held += 1  # hold position
        else:
            x += v / FPS
        t += 1 / FPS
    return track(xs)


def test_stop_behavior_dwell_1s(site_e):
    geom = site_e[1]
    tr = make_stop_track(geom, dwell_s=1.0)
    assert stop_behavior(tr, geom, 1.0, 0.5) == StopBehavior.STOP


def test_stop_behavior_steady_pass(site_e):
    geom = site_e[1]
    tr = make_stop_track(geom, dwell_s=0.0)
    assert stop_behavior(tr, geom, 1.0, 0.5) == StopBehavior.NO_STOP


def test_stop_behavior_short_dwell(site_e):
    geom = site_e[1]
    tr = make_stop_track(geom, dwell_s=0.2)
    assert stop_behavior(tr, geom, 1.0, 0.5) == StopBehavior.NO_STOP


def test_stop_behavior_never_reaches_crosswalk(site_e):
    geom = site_e[1]
    x_edge = geom.crosswalk[:, 0].min()
    tr = track([(k / FPS, x_edge - 12.0 + 0.05 * k, 0.0) for k in range(30)])
    assert stop_behavior(tr, geom, 1.0, 0.5) is None


def test_stop_behavior_monotone_in_v_stop(site_e):
    geom = site_e[1]
    rng = np.random.default_rng(2)
    for dwell in (0.0, 0.3, 0.8, 1.5):
        tr = make_stop_track(geom, dwell_s=dwell)
        prev = None
        for v_stop in (0.5, 1.0, 2.0, 5.0, 10.0):
            got = stop_behavior(tr, geom, v_stop, 0.5)
            if prev == StopBehavior.STOP:
                assert got == StopBehavior.STOP  # raising v_stop never flips stop -> no_stop
            prev = got


# ---------------------------------------------------------------------------
# relative position


def test_relative_position_front(site_e):
    geom = site_e[1]
    veh = straight(-10, 0, 5, 0, n=30)
    ped = straight(-5, 0.5, 5, 0, n=30, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    labels = relative_position_series(veh, ped, geom)
    assert set(labels) == {RelativePosition.FRONT}


def test_relative_position_transition(site_e):
    geom = site_e[1]
    veh = straight(-10, 0, 5, 0, n=60)
    ped = track(
        [(k / FPS, -9.0, 0.5) for k in range(60)], ObjectType.PEDESTRIAN, "p0"
    )  # vehicle drives past the standing pedestrian
    labels = relative_position_series(veh, ped, geom)
    assert compress_runs(labels) == [RelativePosition.FRONT, RelativePosition.BEHIND]


def test_relative_position_abeam_ties_behind(site_e):
    geom = site_e[1]
    veh = straight(0, 0, 5, 0, n=10)
    ped = straight(0, 2.0, 5, 0, n=10, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    labels = relative_position_series(veh, ped, geom)
    assert set(labels) == {RelativePosition.BEHIND}


def test_compress_runs():
    assert compress_runs(["a", "a", "b", "b", "a"]) == ["a", "b", "a"]
    assert compress_runs([]) == []


# ---------------------------------------------------------------------------
# conflict point and PSM


def test_conflict_point_perpendicular_crossing():
    veh = straight(-10, 0, 5, 0, n=150)
    ped = straight(0, -5, 0, 1.4, n=150, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    cp = conflict_point(veh, ped)
    assert cp == pytest.approx([0.0, 0.0], abs=1e-9)


def test_conflict_point_parallel_far_apart():
    veh = straight(-10, 0, 5, 0, n=60)
    ped = straight(-10, 10, 5, 0, n=60, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    assert conflict_point(veh, ped, 1.0) is None


def test_conflict_point_near_miss_brute_force():
    # paths with min gap 0.5: compare against brute-force segment-pair scan
    veh = straight(-10, 0, 5, 0, n=120)
    ped = straight(5, 0.5, -2, 0, n=120, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    cp = conflict_point(veh, ped, 1.0)
    assert cp is not None

    best = (np.inf, None)
    pv, pp = veh.xy, ped.xy
    for i in range(len(pp) - 1):
        for j in range(len(pv) - 1):
            for q in (pp[i], pp[i + 1]):
                seg = pv[j + 1] - pv[j]
                u = np.clip(np.dot(q - pv[j], seg) / np.dot(seg, seg), 0, 1)
                d = np.linalg.norm(q - (pv[j] + u * seg))
                if d < best[0]:
                    best = (d, q)
            for q in (pv[j], pv[j + 1]):
                seg = pp[i + 1] - pp[i]
                u = np.clip(np.dot(q - pp[i], seg) / np.dot(seg, seg), 0, 1)
                proj = pp[i] + u * seg
                d = np.linalg.norm(q - proj)
                if d < best[0]:
                    best = (d, proj)
    assert best[0] == pytest.approx(0.5, abs=1e-9)
    assert np.linalg.norm(cp - best[1]) < 1e-6


def psm_scene(offset, v=6.0, u=1.4):
    """Vehicle crosses origin at t2, pedestrian at t1=4.0, psm = t2-t1."""
    t1 = 4.0
    t2 = t1 + offset
    n = 400
    veh = track([(k / FPS, v * (k / FPS - t2), 0.0) for k in range(n)])
    ped = track(
        [(k / FPS, 0.0, u * (k / FPS - t1)) for k in range(n)],
        ObjectType.PEDESTRIAN,
        "p0",
    )
    return veh, ped


@pytest.mark.parametrize("offset", [3.2, -1.5, 0.0])
def test_compute_psm_exemplars(offset):
    veh, ped = psm_scene(offset)
    cp = conflict_point(veh, ped)
    psm = compute_psm(veh, ped, cp, FPS)
    assert psm == pytest.approx(offset, abs=1e-9)


def test_compute_psm_undefined_when_track_far():
    veh, ped = psm_scene(1.0)
    cp = np.array([500.0, 500.0])
    assert compute_psm(veh, ped, cp, FPS) is None


@given(offset=st.floats(-4, 4), swap_sign=st.booleans())
@settings(max_examples=30, deadline=None)
def test_psm_sign_convention(offset, swap_sign):
    off = -offset if swap_sign else offset
    veh, ped = psm_scene(off)
    cp = conflict_point(veh, ped)
    psm = compute_psm(veh, ped, cp, FPS)
    # negative iff the vehicle's passage precedes the pedestrian's
    assert psm == pytest.approx(off, abs=1 / FPS)
    if abs(off) > 1e-6:
        assert (psm < 0) == (off < 0)


# ---------------------------------------------------------------------------
# extraction orchestration


def test_extract_car_only(site_e):
    meta, geom = site_e
    s = scene_of([straight(-10, 0, 5, 0, n=60)])
    rec = extract_features(s, geom, meta, DEFAULT_CONFIG)
    assert rec.scene_type == SceneType.CAR_ONLY
    assert rec.pedestrian is None and rec.interactive is None
    assert rec.vehicle.average_speed_kmh == pytest.approx(
        float(np.mean(rec.vehicle.speed_series_kmh)), abs=1e-9
    )


def test_extract_validation_error(site_e):
    meta, geom = site_e
    bad = scene_of([track([(0.0, 0, 0), (0.0, 1, 1)])])
    with pytest.raises(SceneValidationError):
        extract_features(bad, geom, meta, DEFAULT_CONFIG)


def test_extract_interactive_pairs_closest(site_e):
    meta, geom = site_e
    veh_near = straight(-10, 0, 5, 0, n=90, object_id="v-near")
    veh_far = straight(-10, 200, 5, 0, n=90, object_id="v-far")
    ped = straight(0, -3, 0, 1.4, n=90, object_type=ObjectType.PEDESTRIAN, object_id="p0")
    # widen the bounding box so the far vehicle is not a validation error
    cfg = DEFAULT_CONFIG.replace(bbox_margin_m=500.0)
    rec = extract_features(scene_of([veh_far, veh_near, ped]), geom, meta, cfg)
    assert rec.scene_type == SceneType.INTERACTIVE
    assert rec.vehicle.object_id == "v-near"
