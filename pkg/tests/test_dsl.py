import pytest

from safetycube.cube import FactFilter, Filter, QueryError
from safetycube.dsl import ScriptError, parse_script, run_script
from safetycube.warehouse import bundled_data_path


@pytest.fixture(scope="module")
def cube(mini_warehouse):
    return mini_warehouse.build_cube()


def test_parse_listing_style():
    script = parse_script(
        'Drill-down on Time (from "all" to "day_night")\n'
        'Drill-down on Location (from "all" to "spot")\n'
        'Dice for (Measure = "scene_count") and (Time = ["daytime" | "nighttime"] in day_night)'
        ' and (Road = "unsignalized" in crosswalk) and (Behavior = "interactive")\n'
        'Slice on Scene ("psm < 0")\n'
    )
    kinds = [s.kind for s in script.steps]
    assert kinds == ["drill_down", "drill_down", "dice", "slice"]


def test_continuation_lines():
    script = parse_script(
        'Dice for (Measure = "scene_count")\n'
        '    and (Road = "unsignalized" in crosswalk)\n'
        '    and (Behavior = "interactive")\n'
    )
    assert len(script.steps) == 1
    assert len(script.steps[0].payload["clauses"]) == 3


def test_scenario1_script_runs(cube):
    text = bundled_data_path("scenario1.olap").read_text()
    result = run_script(text, cube)
    q = result.query
    assert q.level_of("time") == "day_night"
    assert q.level_of("location") == "spot"
    assert q.level_of("behavior") == "situation_type"
    assert FactFilter("psm", "lt", 0.0) in q.fact_filters
    assert Filter("road", "road_feature", "eq", "unsignalized") in q.filters
    assert Filter("behavior", "situation_type", "eq", "interactive") in q.filters
    # every scene in the mini corpus is interactive; negatives only
    dims = [a.dimension for a in result.grid.axes]
    assert dims == ["location", "time", "behavior"]
    total = sum(v["scene_count"] for _, v in result.grid.iter_cells())
    assert total > 0


def test_scenario2_script_runs(cube):
    text = bundled_data_path("scenario2.olap").read_text()
    result = run_script(text, cube)
    q = result.query
    assert q.behavior_families == ("avg_car_speed",)
    assert q.level_of("location") is None  # sliced away
    assert Filter("location", "spot", "in", ("Spot E", "Spot G")) in q.filters
    labels = [a for a in result.grid.axes if a.dimension == "behavior"][0].labels
    assert all("-" in lab for lab in labels)  # speed-bin labels


def test_drill_down_multiple_levels(cube):
    result = run_script('Drill-down on Location (from "all" to "spot")', cube)
    assert result.query.level_of("location") == "spot"


def test_roll_up_step(cube):
    script = (
        'Drill-down on Location (from "all" to "spot")\n'
        "Roll-up on Location\n"
    )
    result = run_script(script, cube)
    assert result.query.level_of("location") == "neighborhood"


def test_pivot_step(cube):
    script = (
        'Drill-down on Time (from "all" to "day_night")\n'
        'Drill-down on Location (from "all" to "spot")\n'
        "Pivot (Time, Location)\n"
    )
    result = run_script(script, cube)
    assert [a.dimension for a in result.grid.axes] == ["time", "location"]


def test_slice_location(cube):
    script = (
        'Drill-down on Location (from "all" to "spot")\n'
        'Slice on Location (spot = "Spot I")\n'
    )
    result = run_script(script, cube)
    assert result.query.level_of("location") is None
    assert Filter("location", "spot", "eq", "Spot I") in result.query.filters


def test_unknown_dimension_errors():
    with pytest.raises(ScriptError):
        parse_script("Drill-down on Weather\n")


def test_unknown_member_errors(cube):
    with pytest.raises(QueryError):
        run_script('Slice on Location (spot = "Spot Z")\n', cube)


def test_unparseable_line_errors():
    with pytest.raises(ScriptError, match="unrecognized"):
        parse_script("Fold on Time\n")


def test_behavior_two_families(cube):
    script = (
        'Drill-down on Behavior (from "all" to "behavioral_feature")\n'
        'Dice for (Measure = "scene_count") and (Road = "unsignalized" in crosswalk)'
        ' and (Behavior = ("pcr level" and "avg. car speed") in an interactive scene)\n'
    )
    result = run_script(script, cube)
    assert result.query.behavior_families == ("pcr_level", "avg_car_speed")
    labels = result.grid.axes[-1].labels
    assert all("|" in lab for lab in labels)
