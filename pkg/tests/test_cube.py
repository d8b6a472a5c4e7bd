import json

import numpy as np
import pytest

from safetycube.cube import (
    CellRef,
    ConceptHierarchy,
    Cube,
    CubeQuery,
    DEFAULT_HIERARCHIES,
    DimensionTable,
    FactFilter,
    FactRecord,
    Filter,
    Member,
    QueryError,
    ResultGrid,
    StaleCellError,
    aggregate,
    build_cube,
    dice,
    drill_down,
    drill_through,
    parse_fact_predicate,
    pivot,
    roll_up,
    slice_query,
)

from naive_oracle import assert_grid_matches_oracle, naive_aggregate, random_cube_inputs, random_query


def tiny_tables():
    loc = DimensionTable(
        "location",
        DEFAULT_HIERARCHIES["location"],
        [
            Member({"spot": "Spot A", "neighborhood": "N1", "district": "D1", "city": "C", "province": "P"}),
            Member({"spot": "Spot B", "neighborhood": "N1", "district": "D1", "city": "C", "province": "P"}),
            Member({"spot": "Spot C", "neighborhood": "N2", "district": "D2", "city": "C", "province": "P"}),
        ],
    )
    time = DimensionTable(
        "time",
        DEFAULT_HIERARCHIES["time"],
        [
            Member({"hour": "2023-01-09 08", "day_night": "daytime", "day": "2023-01-09", "week": "2023-W02"}, {"part": "daytime"}),
            Member({"hour": "2023-01-09 18", "day_night": "nighttime", "day": "2023-01-09", "week": "2023-W02"}, {"part": "nighttime"}),
        ],
    )
    road = DimensionTable(
        "road",
        DEFAULT_HIERARCHIES["road"],
        [
            Member({"road_sub_feature": "unsignalized+fence", "road_feature": "unsignalized", "segment": "crosswalk"}, {"fence": True, "school_zone": False}),
            Member({"road_sub_feature": "signalized", "road_feature": "signalized", "segment": "crosswalk"}, {"fence": False, "school_zone": True}),
        ],
    )
    behavior = DimensionTable(
        "behavior",
        DEFAULT_HIERARCHIES["behavior"],
        [
            Member(
                {"behavioral_feature": "interactive|avg_car_speed=20-30", "object_type": "vehicle_pedestrian", "situation_sub_type": "interactive", "situation_type": "interactive"},
                {"avg_car_speed": "20-30", "avg_car_speed_lo": 20.0, "pcr_level": "warning", "pcr_level_numeric": 3},
            ),
            Member(
                {"behavioral_feature": "car_only", "object_type": "vehicle", "situation_sub_type": "car_only", "situation_type": "single_object"},
                {"avg_car_speed": "10-20", "avg_car_speed_lo": 10.0},
            ),
        ],
    )
    return {"location": loc, "time": time, "road": road, "behavior": behavior}


def make_fact(i, lk=0, tk=0, rk=0, bk=0, psm=None, pcr=None):
    return FactRecord(f"s{i:03d}", lk, tk, rk, bk, psm, pcr)


def test_empty_cube_answers_zero():
    cube = build_cube([], tiny_tables())
    grid = cube.aggregate(CubeQuery(measures=("scene_count", "psm_mean")))
    assert grid.cell("scene_count", {}) == 0
    assert grid.cell("psm_mean", {}) is None


def test_duplicate_scene_code_errors():
    facts = [make_fact(1), make_fact(1)]
    with pytest.raises(ValueError, match="duplicate"):
        build_cube(facts, tiny_tables())


def test_dangling_key_errors():
    with pytest.raises(ValueError, match="dangling"):
        build_cube([make_fact(0, lk=7)], tiny_tables())


def test_pcr_level_mean_of_warning_and_danger():
    # numeric mapping mean: {3, 4} -> 3.5
    facts = [make_fact(0, pcr=3), make_fact(1, pcr=4)]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(CubeQuery(measures=("pcr_level_mean",)))
    assert grid.cell("pcr_level_mean", {}) == pytest.approx(3.5)


def test_psm_mean():
    facts = [make_fact(0, psm=3.2), make_fact(1, psm=-1.5)]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(CubeQuery(measures=("psm_mean",)))
    assert grid.cell("psm_mean", {}) == pytest.approx(0.85)


def test_null_measures_excluded_from_means_but_counted():
    facts = [make_fact(0, psm=2.0), make_fact(1), make_fact(2, psm=-1.0)]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(CubeQuery(measures=("scene_count", "psm_mean")))
    assert grid.cell("scene_count", {}) == 3
    assert grid.cell("psm_mean", {}) == pytest.approx(0.5)


def test_roll_up_and_drill_down_paths():
    q = CubeQuery(group_by=(("location", "spot"),))
    q2 = roll_up(q, "location")
    assert q2.level_of("location") == "neighborhood"
    q3 = drill_down(q2, "location")
    assert q3 == q
    # time@day_night -> day
    qt = CubeQuery(group_by=(("time", "day_night"),))
    assert roll_up(qt, "time").level_of("time") == "day"
    # all -> week
    q4 = drill_down(CubeQuery(), "time")
    assert q4.level_of("time") == "week"


def test_roll_up_at_all_errors():
    with pytest.raises(QueryError, match="all"):
        roll_up(CubeQuery(), "location")


def test_drill_down_at_leaf_errors():
    q = CubeQuery(group_by=(("behavior", "behavioral_feature"),))
    with pytest.raises(QueryError, match="leaf"):
        drill_down(q, "behavior")


def test_roll_up_to_all_removes_axis():
    q = CubeQuery(group_by=(("location", "province"),))
    assert roll_up(q, "location").group_by == ()


def test_slice_adds_filter_and_projects():
    cube = build_cube([make_fact(0), make_fact(1, lk=1)], tiny_tables())
    q = CubeQuery(group_by=(("location", "spot"), ("time", "day_night")))
    s = slice_query(q, "location", "Spot A", cube)
    assert s.level_of("location") is None
    assert Filter("location", "spot", "eq", "Spot A") in s.filters
    grid = cube.aggregate(s)
    assert grid.cell("scene_count", {"time": "daytime"}) == 1


def test_slice_unknown_member_errors():
    cube = build_cube([make_fact(0)], tiny_tables())
    with pytest.raises(QueryError, match="unknown member"):
        slice_query(CubeQuery(group_by=(("location", "spot"),)), "location", "Spot Z", cube)


def test_slice_on_scene_psm():
    facts = [make_fact(0, psm=-1.0), make_fact(1, psm=2.0), make_fact(2)]
    cube = build_cube(facts, tiny_tables())
    q = slice_query(CubeQuery(), "scene", "psm < 0")
    assert q.fact_filters == (FactFilter("psm", "lt", 0.0),)
    assert cube.aggregate(q).cell("scene_count", {}) == 1


def test_parse_fact_predicate_forms():
    assert parse_fact_predicate("psm < 0") == FactFilter("psm", "lt", 0.0)
    assert parse_fact_predicate("pcr_level >= 3") == FactFilter("pcr_level", "ge", 3.0)
    with pytest.raises(QueryError):
        parse_fact_predicate("speed > 1")


def test_dice_requires_two_dimensions():
    cube = build_cube([make_fact(0)], tiny_tables())
    with pytest.raises(QueryError, match="slice"):
        dice(CubeQuery(), [Filter("road", "road_feature", "eq", "unsignalized")], cube)
    q = dice(
        CubeQuery(),
        [
            Filter("road", "road_feature", "eq", "unsignalized"),
            Filter("behavior", "situation_type", "eq", "interactive"),
        ],
        cube,
    )
    assert len(q.filters) == 2


def test_dice_flag_filter():
    facts = [make_fact(0, rk=0), make_fact(1, rk=1)]
    cube = build_cube(facts, tiny_tables())
    q = dice(
        CubeQuery(),
        [
            Filter("road", "road_sub_feature", "flag", True, attr="fence"),
            Filter("time", "day_night", "eq", "daytime"),
        ],
        cube,
    )
    assert cube.aggregate(q).cell("scene_count", {}) == 1


def test_numeric_bin_filter():
    facts = [make_fact(0, bk=0), make_fact(1, bk=1)]
    cube = build_cube(facts, tiny_tables())
    q = CubeQuery(
        filters=(Filter("behavior", "behavioral_feature", "lt", 15.0, attr="avg_car_speed_lo"),)
    )
    assert cube.aggregate(q).cell("scene_count", {}) == 1


def test_pivot_transpose():
    facts = [make_fact(0, lk=0, tk=0), make_fact(1, lk=1, tk=1), make_fact(2, lk=0, tk=1)]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(CubeQuery(group_by=(("location", "spot"), ("time", "day_night"))))
    flipped = pivot(grid, ("time", "location"))
    assert [a.dimension for a in flipped.axes] == ["time", "location"]
    for coords, values in grid.iter_cells():
        assert flipped.cell("scene_count", coords) == values["scene_count"]
    same = pivot(grid, ("location", "time"))
    assert same == grid
    with pytest.raises(QueryError):
        pivot(grid, ("location", "road"))


def test_pivot_three_axis_multiset():
    rng = np.random.default_rng(0)
    facts = [
        make_fact(i, lk=int(rng.integers(3)), tk=int(rng.integers(2)), rk=int(rng.integers(2)))
        for i in range(40)
    ]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(
        CubeQuery(group_by=(("location", "spot"), ("time", "day_night"), ("road", "road_feature")))
    )
    rotated = pivot(grid, ("road", "location", "time"))
    def multiset(g):
        return sorted(
            (tuple(sorted(c.items())), v["scene_count"]) for c, v in g.iter_cells()
        )
    assert multiset(grid) == multiset(rotated)


def test_drill_through_partition_and_stale():
    rng = np.random.default_rng(1)
    facts = [
        make_fact(i, lk=int(rng.integers(3)), tk=int(rng.integers(2)), psm=float(rng.normal()))
        for i in range(30)
    ]
    cube = build_cube(facts, tiny_tables())
    q = CubeQuery(group_by=(("location", "spot"), ("time", "day_night")))
    grid = cube.aggregate(q)
    all_codes = []
    for coords, values in grid.iter_cells():
        codes = drill_through(cube, grid.cell_ref(coords))
        assert len(codes) == values["scene_count"]
        assert codes == sorted(codes)
        all_codes.extend(codes)
    assert sorted(all_codes) == sorted(f.scene_code for f in facts)

    rebuilt = build_cube(facts[:-1], tiny_tables())
    with pytest.raises(StaleCellError):
        drill_through(rebuilt, grid.cell_ref({"location": "Spot A", "time": "daytime"}))


def test_cell_ref_roundtrip():
    cube = build_cube([make_fact(0)], tiny_tables())
    grid = cube.aggregate(CubeQuery(group_by=(("location", "spot"),)))
    ref = grid.cell_ref({"location": "Spot A"})
    again = CellRef.from_dict(json.loads(json.dumps(ref.to_dict())))
    assert again == ref
    assert drill_through(cube, again) == ["s000"]


def test_grid_json_roundtrip():
    facts = [make_fact(0, psm=1.25), make_fact(1, lk=1), make_fact(2, lk=2, psm=-0.5)]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(
        CubeQuery(group_by=(("location", "district"),), measures=("scene_count", "psm_mean"))
    )
    parsed = ResultGrid.from_dict(json.loads(grid.to_json()))
    assert parsed == grid


def test_unknown_query_parts_error():
    cube = build_cube([make_fact(0)], tiny_tables())
    with pytest.raises(QueryError):
        cube.aggregate(CubeQuery(group_by=(("location", "galaxy"),)))
    with pytest.raises(QueryError):
        cube.aggregate(CubeQuery(measures=("mode",)))
    with pytest.raises(QueryError):
        cube.aggregate(CubeQuery(filters=(Filter("location", "spot", "eq", "Nowhere"),)))
    with pytest.raises(QueryError):
        cube.aggregate(CubeQuery(filters=(Filter("location", "spot", "zap", "Spot A"),)))


def test_behavior_family_grouping_with_na():
    facts = [make_fact(0, bk=0), make_fact(1, bk=1)]
    cube = build_cube(facts, tiny_tables())
    grid = cube.aggregate(
        CubeQuery(
            group_by=(("behavior", "behavioral_feature"),),
            behavior_families=("pcr_level",),
        )
    )
    labels = grid.axes[0].labels
    assert set(labels) == {"warning", "n/a"}
    total = sum(v["scene_count"] for _, v in grid.iter_cells())
    assert total == 2  # n/a keeps the partition complete


def test_oracle_equivalence_quick():
    rng = np.random.default_rng(42)
    facts, tables, hierarchies = random_cube_inputs(rng, 300)
    cube = Cube(facts, tables, hierarchies)
    for _ in range(40):
        q = random_query(rng, tables, hierarchies)
        grid = cube.aggregate(q)
        want = naive_aggregate(facts, tables, q)
        assert_grid_matches_oracle(grid, want, q.measures, pytest.approx)


def test_materialized_matches_lazy():
    rng = np.random.default_rng(43)
    facts, tables, hierarchies = random_cube_inputs(rng, 400)
    cube = Cube(facts, tables, hierarchies, materialize=True)
    for _ in range(30):
        q = random_query(rng, tables, hierarchies)
        lazy = cube.aggregate(q, use_materialized=False)
        default = cube.aggregate(q)
        assert [a.labels for a in default.axes] == [a.labels for a in lazy.axes]
        for m, arr in lazy.measures.items():
            other = default.measures[m]
            both_nan = np.isnan(arr) & np.isnan(other)
            assert np.allclose(np.where(both_nan, 0, arr), np.where(both_nan, 0, other), rtol=1e-12, atol=1e-12)


def test_materialized_path_rejects_fact_filters():
    cube = build_cube([make_fact(0, psm=1.0)], tiny_tables())
    q = CubeQuery(fact_filters=(FactFilter("psm", "lt", 0.0),))
    with pytest.raises(QueryError):
        cube.aggregate(q, use_materialized=True)
    # but the default path silently falls back to the scan
    assert cube.aggregate(q).cell("scene_count", {}) == 0


def test_hierarchy_validation():
    with pytest.raises(ValueError):
        ConceptHierarchy("x", ("leaf",))
    with pytest.raises(ValueError):
        ConceptHierarchy("x", ("a", "a", "all"))
    hier = ConceptHierarchy("x", ("leaf", "mid", "all"))
    assert hier.parent("leaf") == "mid"
    assert hier.child("all") == "mid"
    assert hier.parent("all") is None
    assert hier.child("leaf") is None
