import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from safetycube.config import DEFAULT_CONFIG
from safetycube.cube import CubeQuery
from safetycube.warehouse import (
    FactRow,
    Warehouse,
    WarehouseError,
    assemble_cube_inputs,
    bundled_data_path,
    day_night_label,
    export_result,
    feature_from_dict,
    feature_to_dict,
    import_result,
    load_scene_file,
    load_site_metadata,
    road_leaf_label,
    scene_from_dict,
    scene_to_dict,
    speed_bin,
    time_levels,
    write_scene_file,
)

KST = timezone(timedelta(hours=9))


def sample_scene_dict(code="sc-1", fps=30.0):
    return {
        "scene_code": code,
        "spot_id": "Spot E",
        "start_time": "2023-01-09T08:30:00+09:00",
        "fps": fps,
        "tracks": [
            {
                "object_id": "v0",
                "object_type": "vehicle",
                "points": [[k / fps, -10 + 5 * k / fps, 0.0] for k in range(30)],
            }
        ],
    }


# ---------------------------------------------------------------------------
# scene files


def test_load_scene_file_roundtrip(tmp_path):
    p = tmp_path / "scenes.jsonl"
    p.write_text(
        json.dumps(sample_scene_dict("a")) + "\n" + json.dumps(sample_scene_dict("b")) + "\n"
    )
    scenes = load_scene_file(p)
    assert [s.scene_code for s in scenes] == ["a", "b"]
    out = tmp_path / "copy.jsonl"
    write_scene_file(out, scenes)
    again = load_scene_file(out)
    assert [scene_to_dict(s) for s in again] == [scene_to_dict(s) for s in scenes]


def test_load_scene_file_empty(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("")
    assert load_scene_file(p) == []


def test_load_scene_file_missing_fps_names_line(tmp_path):
    d = sample_scene_dict()
    del d["fps"]
    p = tmp_path / "bad.jsonl"
    p.write_text(json.dumps(sample_scene_dict("ok")) + "\n" + json.dumps(d) + "\n")
    with pytest.raises(WarehouseError, match="bad.jsonl:2"):
        load_scene_file(p)


def test_load_scene_file_malformed_json(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text("{not json\n")
    with pytest.raises(WarehouseError, match="malformed JSON"):
        load_scene_file(p)


def test_load_scene_file_duplicate_code(tmp_path):
    p = tmp_path / "dup.jsonl"
    p.write_text(json.dumps(sample_scene_dict("x")) + "\n" + json.dumps(sample_scene_dict("x")) + "\n")
    with pytest.raises(WarehouseError, match="duplicate"):
        load_scene_file(p)


def test_scene_requires_timezone():
    d = sample_scene_dict()
    d["start_time"] = "2023-01-09T08:30:00"
    with pytest.raises(WarehouseError, match="timezone"):
        scene_from_dict(d)


# ---------------------------------------------------------------------------
# sites fixture


def test_bundled_sites_fixture(sites):
    assert len(sites) == 9
    assert sites["Spot D"][0].speed_camera is True
    cams = [s for s, (m, _) in sites.items() if m.speed_camera]
    assert cams == ["Spot D"]
    non_school = [s for s, (m, _) in sites.items() if not m.school_zone]
    assert non_school == ["Spot G"]
    fences = sorted(s for s, (m, _) in sites.items() if m.fence)
    assert fences == ["Spot E", "Spot F", "Spot H"]
    for m, _ in sites.values():
        assert m.speed_limit_kmh == 30.0
    signalized = sorted(s for s, (m, _) in sites.items() if m.signalized)
    assert signalized == ["Spot A", "Spot B", "Spot C", "Spot D"]


def test_sites_missing_field_errors(tmp_path):
    doc = json.loads(bundled_data_path("sites.json").read_text())
    del doc["sites"][0]["num_lanes"]
    p = tmp_path / "sites.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(WarehouseError, match="num_lanes"):
        load_site_metadata(p)


# ---------------------------------------------------------------------------
# dimension derivation


def test_day_night_boundary():
    cfg = DEFAULT_CONFIG
    assert day_night_label(datetime(2023, 1, 9, 8, 30, tzinfo=KST), cfg) == "daytime"
    assert day_night_label(datetime(2023, 1, 9, 5, 59, tzinfo=KST), cfg) == "nighttime"
    assert day_night_label(datetime(2023, 1, 9, 6, 0, tzinfo=KST), cfg) == "daytime"
    assert day_night_label(datetime(2023, 1, 9, 18, 0, tzinfo=KST), cfg) == "nighttime"


def test_time_levels():
    lv = time_levels(datetime(2023, 1, 9, 8, 30, tzinfo=KST), DEFAULT_CONFIG)
    assert lv == {
        "hour": "2023-01-09 08",
        "day_night": "daytime",
        "day": "2023-01-09",
        "week": "2023-W02",
    }


def test_speed_bin_labels():
    assert speed_bin(14.5, 10.0) == ("10-20", 10.0)
    assert speed_bin(0.0, 10.0) == ("00-10", 0.0)
    assert speed_bin(29.999, 10.0) == ("20-30", 20.0)


def test_road_leaf_label(sites):
    assert road_leaf_label(sites["Spot E"][0]) == "unsignalized+fence+school_zone"
    assert road_leaf_label(sites["Spot G"][0]) == "unsignalized"
    assert road_leaf_label(sites["Spot D"][0]) == "signalized+school_zone+speed_camera"


def fact_row(code, spot="Spot E", hour=8, scene_type="interactive", **kw):
    defaults = dict(
        avg_car_speed_kmh=17.0, avg_ped_speed_kmh=4.5, stop_behavior="no_stop",
        psm=1.5, pcr_level=2,
    )
    defaults.update(kw)
    return FactRow(
        scene_code=code,
        spot_id=spot,
        start_time=datetime(2023, 1, 9, hour, 30, tzinfo=KST),
        scene_type=scene_type,
        **defaults,
    )


def test_assemble_cube_inputs_unknown_spot(sites):
    with pytest.raises(WarehouseError, match="unknown spot"):
        assemble_cube_inputs([fact_row("x", spot="Spot Z")], sites)


def test_assemble_cube_inputs_keys_resolve(sites):
    facts, tables = assemble_cube_inputs(
        [fact_row("a"), fact_row("b", spot="Spot G", hour=18, scene_type="car_only",
                  avg_ped_speed_kmh=None, psm=None, pcr_level=None)],
        sites,
    )
    assert len(facts) == 2
    loc = tables["location"].members[facts[0].location_key]
    assert loc.values["spot"] == "Spot E"
    t = tables["time"].members[facts[1].time_key]
    assert t.values["day_night"] == "nighttime"
    b = tables["behavior"].members[facts[1].behavior_key]
    assert b.values["situation_sub_type"] == "car_only"
    assert b.attrs["avg_car_speed"] == "10-20"


# ---------------------------------------------------------------------------
# warehouse lifecycle


def test_warehouse_ingest_idempotent(tmp_path):
    wh = Warehouse(tmp_path / "wh")
    wh.init()
    scenes = [scene_from_dict(sample_scene_dict("a")), scene_from_dict(sample_scene_dict("b"))]
    assert wh.ingest_scenes(scenes) == 2
    assert wh.ingest_scenes(scenes) == 0
    assert len(wh.load_scenes()) == 2


def test_warehouse_write_facts_idempotent(tmp_path, sites):
    wh = Warehouse(tmp_path / "wh")
    wh.init()
    rows = [fact_row("a"), fact_row("b")]
    assert wh.write_facts(rows) == 2
    assert wh.write_facts(rows) == 0
    assert len(wh.load_fact_rows()) == 2
    cube = wh.build_cube()
    assert len(cube) == 2


def test_warehouse_write_facts_unknown_spot(tmp_path):
    wh = Warehouse(tmp_path / "wh")
    wh.init()
    with pytest.raises(WarehouseError, match="unknown spot"):
        wh.write_facts([fact_row("a", spot="Spot Z")])


def test_warehouse_check(tmp_path):
    wh = Warehouse(tmp_path / "nowhere")
    with pytest.raises(WarehouseError, match="manifest"):
        wh.check()


# ---------------------------------------------------------------------------
# feature record serialization


def test_feature_record_roundtrip(site_e):
    from safetycube.features import extract_features
    from safetycube.synthetic import EncounterSpec, generate_scene

    meta, geom = site_e
    scene, _ = generate_scene(
        EncounterSpec(seed=5, vehicle_speed_kmh=20.0, pedestrian_speed_kmh=5.0, offset_s=2.0),
        geom,
    )
    rec = extract_features(scene, geom, meta, DEFAULT_CONFIG)
    d = json.loads(json.dumps(feature_to_dict(rec)))
    again = feature_from_dict(d)
    assert again == rec


# ---------------------------------------------------------------------------
# export


def grid_for_export(sites):
    facts, tables = assemble_cube_inputs(
        [fact_row("a"), fact_row("b", psm=None, pcr_level=None, scene_type="car_only",
                  avg_ped_speed_kmh=None)],
        sites,
    )
    from safetycube.cube import Cube

    cube = Cube(facts, tables)
    return cube.aggregate(
        CubeQuery(group_by=(("behavior", "situation_sub_type"),), measures=("scene_count", "psm_mean"))
    )


def test_export_json_roundtrip(sites):
    grid = grid_for_export(sites)
    data = export_result(grid, "json")
    assert import_result(data) == grid


def test_export_csv_shape_and_nulls(sites):
    grid = grid_for_export(sites)
    text = export_result(grid, "csv").decode()
    lines = text.strip().split("\r\n")
    assert lines[0] == "behavior:situation_sub_type,psm_mean,scene_count"
    rows = dict(line.split(",", 1) for line in lines[1:])
    assert rows["car_only"] == ",1"          # null psm -> empty field
    assert rows["interactive"] == "1.5,1"


def test_export_unknown_format(sites):
    with pytest.raises(ValueError):
        export_result(grid_for_export(sites), "xml")


def test_export_single_cell_grid(sites):
    facts, tables = assemble_cube_inputs([fact_row("a")], sites)
    from safetycube.cube import Cube

    grid = Cube(facts, tables).aggregate(CubeQuery())
    text = export_result(grid, "csv").decode()
    assert text.strip().split("\r\n") == ["scene_count", "1"]
