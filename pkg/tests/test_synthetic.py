import numpy as np
import pytest

from safetycube.config import DEFAULT_CONFIG
from safetycube.features import compute_psm, conflict_point, speed_series, stop_behavior, StopBehavior
from safetycube.scene_model import ObjectType, validate_scene
from safetycube.synthetic import (
    CorpusComponent,
    EncounterSpec,
    generate_corpus,
    generate_scene,
    load_corpus_spec,
)
from safetycube.warehouse import bundled_data_path


@pytest.fixture
def geom(site_e):
    return site_e[1]


def spec_of(**kw):
    base = dict(seed=1, vehicle_speed_kmh=20.0, pedestrian_speed_kmh=5.0, offset_s=2.0)
    base.update(kw)
    return EncounterSpec(**base)


def test_generated_scene_validates(geom):
    scene, truth = generate_scene(spec_of(noise_std_m=0.03), geom)
    assert validate_scene(scene, geom) == []
    assert truth.psm == 2.0
    assert truth.t_veh - truth.t_ped == pytest.approx(2.0)


def test_determinism(geom):
    a, _ = generate_scene(spec_of(seed=9, noise_std_m=0.05), geom)
    b, _ = generate_scene(spec_of(seed=9, noise_std_m=0.05), geom)
    assert a.tracks[0].xy.tolist() == b.tracks[0].xy.tolist()
    assert a.tracks[1].xy.tolist() == b.tracks[1].xy.tolist()
    c, _ = generate_scene(spec_of(seed=10, noise_std_m=0.05), geom)
    assert a.tracks[0].xy.tolist() != c.tracks[0].xy.tolist()


@pytest.mark.parametrize("offset", [3.2, -1.5, 0.4, -0.12])
def test_psm_recovery_noiseless(geom, offset):
    scene, truth = generate_scene(spec_of(offset_s=offset), geom)
    veh = scene.tracks_of(ObjectType.VEHICLE)[0]
    ped = scene.tracks_of(ObjectType.PEDESTRIAN)[0]
    cp = conflict_point(veh, ped)
    assert cp == pytest.approx(truth.conflict_point, abs=1e-9)
    psm = compute_psm(veh, ped, cp, scene.fps)
    assert psm == pytest.approx(offset, abs=1e-9)


def test_noiseless_average_speed_matches_spec(geom):
    scene, _ = generate_scene(spec_of(vehicle_speed_kmh=23.0), geom)
    veh = scene.tracks_of(ObjectType.VEHICLE)[0]
    speeds = speed_series(veh, DEFAULT_CONFIG.smoothing_window)
    assert float(np.mean(speeds)) == pytest.approx(23.0, abs=0.01)
    ped = scene.tracks_of(ObjectType.PEDESTRIAN)[0]
    ped_speeds = speed_series(ped, DEFAULT_CONFIG.smoothing_window)
    assert float(np.mean(ped_speeds)) == pytest.approx(5.0, abs=0.01)


def test_stop_construction_inserts_stop(geom):
    scene, truth = generate_scene(spec_of(stop=True, offset_s=4.5), geom)
    veh = scene.tracks_of(ObjectType.VEHICLE)[0]
    assert stop_behavior(veh, geom, 1.0, 0.5) == StopBehavior.STOP
    ped = scene.tracks_of(ObjectType.PEDESTRIAN)[0]
    psm = compute_psm(veh, ped, conflict_point(veh, ped), scene.fps)
    assert psm == pytest.approx(4.5, abs=1 / scene.fps)


def test_ground_truth_sign_matches_offset(geom):
    rng = np.random.default_rng(0)
    for k in range(20):
        off = float(rng.uniform(-4, 4))
        if abs(off) < 0.05:
            continue
        scene, truth = generate_scene(spec_of(seed=k, offset_s=off, noise_std_m=0.02), geom)
        assert np.sign(truth.psm) == np.sign(off)


def test_spec_validation():
    with pytest.raises(ValueError):
        spec_of(vehicle_speed_kmh=0.0)
    with pytest.raises(ValueError):
        spec_of(noise_std_m=-1.0)
    with pytest.raises(ValueError):
        spec_of(offset_s=-1.0, yielding=True)
    assert spec_of(offset_s=1.0, yielding=True).yielding is True


# ---------------------------------------------------------------------------
# corpus


def small_mixture():
    return [
        CorpusComponent("a", 0.5, "Spot E", "day", (14, 20), (4.3, 5.4), (-4.0, -3.0)),
        CorpusComponent("b", 0.3, "Spot G", "night", (14, 20), (4.3, 5.4), (3.0, 4.0)),
        CorpusComponent("c", 0.2, "Spot I", "day", (4, 9), (4.3, 5.4), (-0.15, -0.09)),
    ]


def geometries(sites):
    return {spot: geom for spot, (meta, geom) in sites.items()}


def test_corpus_quotas_and_determinism(sites):
    geos = geometries(sites)
    scenes = generate_corpus(small_mixture(), 20, seed=5, geometries=geos)
    assert len(scenes) == 20
    by_spot = {}
    for s in scenes:
        by_spot[s.spot_id] = by_spot.get(s.spot_id, 0) + 1
    assert by_spot == {"Spot E": 10, "Spot G": 6, "Spot I": 4}
    again = generate_corpus(small_mixture(), 20, seed=5, geometries=geos)
    assert [s.scene_code for s in again] == [s.scene_code for s in scenes]
    assert scenes[0].tracks[0].xy.tolist() == again[0].tracks[0].xy.tolist()


def test_corpus_period_hours(sites):
    geos = geometries(sites)
    scenes, truths = generate_corpus(small_mixture(), 10, seed=1, geometries=geos, with_truth=True)
    for s in scenes:
        if s.spot_id == "Spot G":
            assert s.start_time.hour in (18, 19)
        else:
            assert s.start_time.hour in (8, 9)


def test_corpus_rejects_bad_inputs(sites):
    geos = geometries(sites)
    with pytest.raises(ValueError, match="positive"):
        generate_corpus(small_mixture(), 0, seed=1, geometries=geos)
    bad = small_mixture()
    bad[0] = CorpusComponent("a", 0.6, "Spot E", "day", (14, 20), (4.3, 5.4), (-4, -3))
    with pytest.raises(ValueError, match="sum to 1"):
        generate_corpus(bad, 10, seed=1, geometries=geos)


def test_bundled_corpus_spec_loads():
    comps = load_corpus_spec(bundled_data_path("scenario_corpus.json"))
    assert len(comps) == 46
    assert abs(sum(c.weight for c in comps) - 1.0) < 1e-9
    spots = {c.spot_id for c in comps}
    assert spots == {"Spot E", "Spot F", "Spot G", "Spot H", "Spot I"}
