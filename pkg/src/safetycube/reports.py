"""Scripted scenario report pipelines over a warehouse snapshot.

Both reports run fixed OLAP sequences against the cube and return
JSON-serializable bundles of grids and plot-ready series. They are pure
functions of the warehouse snapshot plus config: re-running yields an
identical bundle.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .config import Config
from .cube import Cube, CubeQuery, Filter, FactFilter
from .pcr import RiskLevel
from .warehouse import Warehouse, speed_bin


class ReportError(RuntimeError):
    pass


def _psm_by_code(warehouse: Warehouse) -> dict[str, float]:
    return {
        row.scene_code: row.psm
        for row in warehouse.load_fact_rows()
        if row.psm is not None
    }


def _quantiles(values: list[float]) -> dict:
    if not values:
        return {"n": 0, "min": None, "q1": None, "median": None, "q3": None, "max": None}
    arr = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {
        "n": int(arr.size),
        "min": float(arr.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(arr.max()),
    }


def _base_interactive_query() -> CubeQuery:
    """The shared opening sequence: drill down to spot x day_night, dice to
    unsignalized interactive scenes in the city."""
    return CubeQuery(
        group_by=(("location", "spot"), ("time", "day_night")),
        filters=(
            Filter("time", "day_night", "in", ("daytime", "nighttime")),
            Filter("location", "city", "eq", "Osan City"),
            Filter("road", "road_feature", "eq", "unsignalized"),
            Filter("behavior", "situation_type", "eq", "interactive"),
        ),
    )


def report_scenario1(warehouse: Warehouse, config: Config | None = None) -> dict:
    """Non-yielding analysis at unsignalized crosswalks using PSM signs:
    per-spot day/night non-yield shares, negative-PSM distributions, and
    the per-speed-bin PSM comparison for the focus spot pair."""
    config = config or warehouse.load_config()
    cube = warehouse.build_cube(config)
    sites = warehouse.load_sites()
    psm_of = _psm_by_code(warehouse)

    base = _base_interactive_query()
    total_grid = cube.aggregate(
        dataclasses.replace(base, fact_filters=(FactFilter("psm", "nonnull"),))
    )
    if not total_grid.axes or not total_grid.axes[0].labels:
        raise ReportError("no interactive facts at unsignalized crosswalks")
    neg_grid = cube.aggregate(
        dataclasses.replace(base, fact_filters=(FactFilter("psm", "lt", 0.0),))
    )

    def safe_count(grid, coords) -> int:
        try:
            return int(grid.cell("scene_count", coords) or 0)
        except Exception:
            return 0

    shares = []
    spots = total_grid.axes[0].labels
    parts = total_grid.axes[1].labels
    for spot in spots:
        fence = sites[spot][0].fence if spot in sites else None
        for part in parts:
            total = safe_count(total_grid, {"location": spot, "time": part})
            neg = safe_count(neg_grid, {"location": spot, "time": part})
            shares.append(
                {
                    "spot": spot,
                    "part": part,
                    "fence": fence,
                    "interactive_scenes": int(total),
                    "non_yield_scenes": int(neg),
                    "non_yield_share": (neg / total) if total else None,
                }
            )

    # negative-PSM distributions per spot x part via drill-through
    distributions = []
    for spot in spots:
        for part in neg_grid.axes[1].labels if neg_grid.axes else ():
            coords = {"location": spot, "time": part}
            try:
                codes = cube.drill_through(neg_grid.cell_ref(coords))
            except Exception:
                codes = []
            values = [psm_of[c] for c in codes if c in psm_of]
            distributions.append(
                {"spot": spot, "part": part, "psm": _quantiles(values)}
            )

    # per-speed-bin negative PSM series for the focus pair (Fig 14 analogue)
    speed_bin_psm = {}
    for spot in ("Spot I", "Spot F"):
        if spot not in spots:
            continue
        q = CubeQuery(
            group_by=(("time", "day_night"), ("behavior", "behavioral_feature")),
            filters=(
                Filter("road", "road_feature", "eq", "unsignalized"),
                Filter("behavior", "situation_type", "eq", "interactive"),
                Filter("location", "spot", "eq", spot),
            ),
            measures=("scene_count", "psm_mean"),
            fact_filters=(FactFilter("psm", "lt", 0.0),),
            behavior_families=("avg_car_speed",),
        )
        grid = cube.aggregate(q)
        series = []
        if grid.axes:
            for part in grid.axes[0].labels:
                for bin_label in grid.axes[1].labels:
                    coords = {"time": part, "behavior": bin_label}
                    codes = cube.drill_through(grid.cell_ref(coords))
                    values = sorted(psm_of[c] for c in codes if c in psm_of)
                    if values:
                        series.append(
                            {
                                "part": part,
                                "speed_bin": bin_label,
                                "psm_values": values,
                                "summary": _quantiles(values),
                            }
                        )
        speed_bin_psm[spot] = series

    return {
        "scenario": 1,
        "operations": SCENARIO1_OPERATIONS,
        "non_yield_shares": shares,
        "negative_psm_distributions": distributions,
        "speed_bin_psm": speed_bin_psm,
    }


def report_scenario2(
    warehouse: Warehouse,
    config: Config | None = None,
    school_spot: str = "Spot E",
    control_spot: str = "Spot G",
) -> dict:
    """PCR-level analysis inside vs outside a school zone: scene ratios by
    speed bin, by PCR level, and speed-bin ratios within each level."""
    config = config or warehouse.load_config()
    sites = warehouse.load_sites()
    for spot, want_school in ((school_spot, True), (control_spot, False)):
        if spot not in sites:
            raise ReportError(f"unknown spot {spot!r}")
        meta = sites[spot][0]
        if meta.school_zone != want_school:
            raise ReportError(
                f"{spot} school_zone={meta.school_zone}, expected {want_school}"
            )
        if meta.signalized:
            raise ReportError(f"{spot} must be an unsignalized crosswalk")
    cube = warehouse.build_cube(config)
    pair = (school_spot, control_spot)

    def spot_query(spot: str, families: tuple[str, ...]) -> CubeQuery:
        return CubeQuery(
            group_by=(("behavior", "behavioral_feature"),),
            filters=(
                Filter("road", "road_feature", "eq", "unsignalized"),
                Filter("behavior", "situation_type", "eq", "interactive"),
                Filter("location", "spot", "eq", spot),
            ),
            behavior_families=families,
        )

    def ratio_table(spot: str, families: tuple[str, ...]) -> dict[str, float]:
        grid = cube.aggregate(spot_query(spot, families))
        if not grid.axes or not grid.axes[0].labels:
            raise ReportError(f"no interactive facts for {spot}")
        counts = {
            label: int(grid.cell("scene_count", {"behavior": label}))
            for label in grid.axes[0].labels
        }
        total = sum(counts.values())
        return {label: counts[label] / total for label in sorted(counts)}

    by_speed = {spot: ratio_table(spot, ("avg_car_speed",)) for spot in pair}
    by_level = {spot: ratio_table(spot, ("pcr_level",)) for spot in pair}

    # speed-bin shares within each PCR level (Fig 18 analogue)
    within_level = {}
    for spot in pair:
        grid = cube.aggregate(spot_query(spot, ("pcr_level", "avg_car_speed")))
        rows: dict[str, dict[str, float]] = {}
        if grid.axes:
            counts: dict[str, dict[str, int]] = {}
            for label in grid.axes[0].labels:
                level, _, bin_label = label.partition("|")
                n = int(grid.cell("scene_count", {"behavior": label}))
                counts.setdefault(level, {})[bin_label] = counts.setdefault(level, {}).get(bin_label, 0) + n
            for level, bins in counts.items():
                total = sum(bins.values())
                rows[level] = {b: bins[b] / total for b in sorted(bins)}
        within_level[spot] = {lvl: rows[lvl] for lvl in sorted(rows)}

    scene_counts = {}
    for spot in pair:
        grid = cube.aggregate(
            CubeQuery(
                group_by=(("behavior", "situation_sub_type"),),
                filters=(Filter("location", "spot", "eq", spot),),
            )
        )
        scene_counts[spot] = {
            label: int(grid.cell("scene_count", {"behavior": label}))
            for label in (grid.axes[0].labels if grid.axes else ())
        }

    return {
        "scenario": 2,
        "operations": SCENARIO2_OPERATIONS,
        "school_spot": school_spot,
        "control_spot": control_spot,
        "scene_counts": scene_counts,
        "scene_ratios_by_speed_bin": by_speed,
        "scene_ratios_by_pcr_level": by_level,
        "speed_bin_ratios_within_level": within_level,
        "pcr_level_order": [lvl.label for lvl in sorted(RiskLevel)],
    }


SCENARIO1_OPERATIONS = [
    'Drill-down on Time (from "all" to "day_night")',
    'Drill-down on Location (from "all" to "spot")',
    'Drill-down on Road (from "all" to "road_sub_feature")',
    'Drill-down on Behavior (from "all" to "scene_type")',
    'Dice for (Measure = "scene_count") and (Time = ["daytime" | "nighttime"] in day_night)'
    ' and (Location = "all spots" in Osan City) and (Road = "fence" in unsignalized crosswalk)'
    ' and (Behavior = "interactive")',
    'Slice on Scene ("psm < 0")',
]

SCENARIO2_OPERATIONS = [
    'Drill-down on Location (from "all" to "spot")',
    'Drill-down on Road (from "all" to "road_feature")',
    'Drill-down on Behavior (from "all" to "behavioral_feature")',
    'Dice for (Measure = "scene_count") and (Time = "all") and (Location = "all spots" in Osan City)'
    ' and (Road = "unsignalized" in crosswalk) and (Behavior = "avg. car speed" in interactive scene)',
    'Slice on Location (spot = ["Spot E" | "Spot G"])',
]
