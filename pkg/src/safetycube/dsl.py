"""Textual OLAP script language.

Scripts look like the analysis listings in the reports: one operation per
line, applied in order to an initially ungrouped query. Example:

    Drill-down on Time (from "all" to "day_night")
    Drill-down on Location (from "all" to "spot")
    Dice for (Measure = "scene_count") and (Time = ["daytime" | "nighttime"] in day_night)
        and (Road = "fence" in unsignalized crosswalk) and (Behavior = "interactive")
    Slice on Scene ("psm < 0")
    Pivot (Time, Location)

Lines starting with '#' are comments; a trailing backslash or leading
whitespace continues the previous line. Steps type-check against the cube's
hierarchies and dimension tables before execution.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

from .cube import (
    Cube,
    CubeQuery,
    Filter,
    QueryError,
    ResultGrid,
    drill_down,
    dice,
    parse_fact_predicate,
    pivot,
    roll_up,
    slice_query,
)

_DIM_ALIASES = {
    "time": "time",
    "location": "location",
    "road": "road",
    "behavior": "behavior",
    "scene": "scene",
}

_LEVEL_ALIASES = {
    ("behavior", "scene_type"): "situation_type",
}

_MEASURE_ALIASES = {
    "scene_count": "scene_count",
    "psm": "psm_mean",
    "psm_mean": "psm_mean",
    "pcr level": "pcr_level_mean",
    "pcr_level": "pcr_level_mean",
    "pcr_level_mean": "pcr_level_mean",
}

_BEHAVIOR_FAMILY_ALIASES = {
    "avg. car speed": "avg_car_speed",
    "avg car speed": "avg_car_speed",
    "average car speed": "avg_car_speed",
    "avg_car_speed": "avg_car_speed",
    "avg. ped speed": "avg_ped_speed",
    "avg_ped_speed": "avg_ped_speed",
    "pcr level": "pcr_level",
    "pcr_level": "pcr_level",
    "stop behavior": "stop_behavior",
    "stop_behavior": "stop_behavior",
    "psm sign": "psm_sign",
    "psm_sign": "psm_sign",
}

_ROAD_FLAGS = ("school_zone", "speed_camera", "fence", "red_urethane")


class ScriptError(QueryError):
    def __init__(self, lineno: int, line: str, message: str):
        super().__init__(f"line {lineno}: {message} in {line!r}")
        self.lineno = lineno


@dataclass(frozen=True)
class Step:
    kind: str          # drill_down | roll_up | slice | dice | pivot
    lineno: int
    text: str
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True)
class QueryScript:
    steps: tuple[Step, ...]
    source: str


def _norm_dim(token: str, lineno: int, line: str) -> str:
    dim = _DIM_ALIASES.get(token.strip().lower())
    if dim is None:
        raise ScriptError(lineno, line, f"unknown dimension {token!r}")
    return dim


def _norm_level(dim: str, token: str) -> str:
    token = token.strip().strip('"').lower()
    return _LEVEL_ALIASES.get((dim, token), token)


def _logical_lines(text: str):
    """Join indented/backslash continuations; yield (lineno, line)."""
    pending: tuple[int, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        continuation = raw[:1].isspace() or stripped.startswith("and (")
        if pending is not None and continuation:
            pending = (pending[0], pending[1].rstrip("\\").rstrip() + " " + stripped)
            continue
        if pending is not None:
            yield pending
        pending = (lineno, stripped)
    if pending is not None:
        yield pending


_RE_STEP = re.compile(
    r"^(Drill-down|Roll-up|Slice|Dice|Pivot)\s*(on|for)?\s*(.*)$", re.IGNORECASE
)
_RE_FROM_TO = re.compile(r'^(\w+)\s*(?:\(\s*from\s*"([^"]+)"\s*to\s*"([^"]+)"\s*\))?$')
_RE_SLICE = re.compile(r'^(\w+)\s*\(\s*(.*?)\s*\)$')
_RE_CLAUSE = re.compile(r"\(((?:[^()]|\([^()]*\))*)\)")


def parse_script(text: str) -> QueryScript:
    steps: list[Step] = []
    for lineno, line in _logical_lines(text):
        m = _RE_STEP.match(line)
        if not m:
            raise ScriptError(lineno, line, "unrecognized operation")
        op = m.group(1).lower().replace("-", "_")
        rest = m.group(3).strip()
        if op in ("drill_down", "roll_up"):
            mm = _RE_FROM_TO.match(rest)
            if not mm:
                raise ScriptError(lineno, line, "expected: on <Dim> [(from \"a\" to \"b\")]")
            dim = _norm_dim(mm.group(1), lineno, line)
            payload = {"dimension": dim}
            if mm.group(2):
                payload["from"] = _norm_level(dim, mm.group(2))
                payload["to"] = _norm_level(dim, mm.group(3))
            steps.append(Step(op, lineno, line, payload))
        elif op == "slice":
            mm = _RE_SLICE.match(rest)
            if not mm:
                raise ScriptError(lineno, line, "expected: on <Dim> (<level> = \"member\")")
            dim = _norm_dim(mm.group(1), lineno, line)
            steps.append(Step("slice", lineno, line, {"dimension": dim, "body": mm.group(2)}))
        elif op == "dice":
            clauses = _RE_CLAUSE.findall(rest)
            if not clauses:
                raise ScriptError(lineno, line, "dice needs parenthesized clauses")
            steps.append(Step("dice", lineno, line, {"clauses": clauses}))
        else:  # pivot
            dims = [
                _norm_dim(tok, lineno, line)
                for tok in rest.strip("() ").split(",")
                if tok.strip()
            ]
            if not dims:
                raise ScriptError(lineno, line, "pivot needs an axis order")
            steps.append(Step("pivot", lineno, line, {"order": dims}))
    return QueryScript(tuple(steps), text)


# ---------------------------------------------------------------------------
# execution


@dataclass
class ScriptResult:
    query: CubeQuery
    grid: ResultGrid
    trace: list[str]


def _quoted_values(body: str) -> list[str]:
    return re.findall(r'"([^"]*)"', body)


def _apply_slice(q: CubeQuery, step: Step, cube: Cube) -> CubeQuery:
    dim = step.payload["dimension"]
    body = step.payload["body"]
    if dim == "scene":
        values = _quoted_values(body)
        predicate = values[0] if values else body
        return slice_query(q, "scene", predicate)
    m = re.match(r'^(\w+)\s*=\s*(.*)$', body.strip())
    if not m:
        raise ScriptError(step.lineno, step.text, "expected <level> = \"member\"")
    level = _norm_level(dim, m.group(1))
    values = _quoted_values(m.group(2))
    if not values:
        raise ScriptError(step.lineno, step.text, "expected a quoted member")
    if level not in cube.hierarchies[dim].levels:
        raise ScriptError(step.lineno, step.text, f"unknown level {level!r}")
    if len(values) == 1:
        return slice_query(q, dim, values[0], cube, level=level)
    # multi-member slice: membership filter plus axis projection
    for v in values:
        if v not in cube.tables[dim].labels_at(level):
            raise ScriptError(step.lineno, step.text, f"unknown member {v!r}")
    qq = dataclasses.replace(q, filters=q.filters + (Filter(dim, level, "in", tuple(values)),))
    return qq.with_level(dim, None)


def _dice_clause(clause: str, q: CubeQuery, filters: list[Filter], cube: Cube,
                 lineno: int, text: str) -> CubeQuery:
    """Translate one parenthesized dice clause; returns the updated query
    (measures / behavior families), appending member filters as a side
    effect."""
    m = re.match(r"^\s*(\w+)\s*=\s*(.*)$", clause.strip())
    if not m:
        raise ScriptError(lineno, text, f"cannot parse clause {clause!r}")
    subject = m.group(1).lower()
    body = m.group(2).strip()
    values = [v.lower() for v in _quoted_values(body)]
    tail = re.sub(r'"[^"]*"|\[|\]|\|', " ", body).strip().lower()
    tail_words = tail.split()

    if subject == "measure":
        measures = []
        for v in values:
            if v not in _MEASURE_ALIASES:
                raise ScriptError(lineno, text, f"unknown measure {v!r}")
            measures.append(_MEASURE_ALIASES[v])
        return dataclasses.replace(q, measures=tuple(measures))

    if subject == "scene":
        return dataclasses.replace(
            q, fact_filters=q.fact_filters + (parse_fact_predicate(values[0] if values else body),)
        )

    dim = _norm_dim(subject, lineno, text)
    if dim == "time":
        if values == ["all"] or not values:
            return q
        level = tail_words[-1] if tail_words and tail_words[0] == "in" else "day_night"
        parts = tuple(values)
        filters.append(Filter("time", level, "in" if len(parts) > 1 else "eq",
                              parts if len(parts) > 1 else parts[0]))
        return q

    if dim == "location":
        if values and values[0] in ("all spots", "all"):
            if "osan" in tail:
                filters.append(Filter("location", "city", "eq", "Osan City"))
            return q
        label = _quoted_values(body)[0]
        filters.append(Filter("location", "spot", "eq", label))
        return q

    if dim == "road":
        road_filter_applied = False
        for v in values:
            if v in ("unsignalized", "signalized"):
                filters.append(Filter("road", "road_feature", "eq", v))
                road_filter_applied = True
            elif v.replace(" ", "_") in _ROAD_FLAGS:
                filters.append(
                    Filter("road", "road_sub_feature", "flag", True, attr=v.replace(" ", "_"))
                )
                road_filter_applied = True
        for w in ("unsignalized", "signalized"):
            if w in tail_words:
                filters.append(Filter("road", "road_feature", "eq", w))
                road_filter_applied = True
        if not road_filter_applied:
            raise ScriptError(lineno, text, f"cannot interpret road clause {clause!r}")
        return q

    # behavior clause: situation filters and/or family selection
    families: list[str] = []
    for v in values:
        if v in ("interactive", "single_object", "car_only", "pedestrian_only"):
            level = "situation_type" if v in ("interactive", "single_object") else "situation_sub_type"
            filters.append(Filter("behavior", level, "eq", v))
        elif v in _BEHAVIOR_FAMILY_ALIASES:
            families.append(_BEHAVIOR_FAMILY_ALIASES[v])
        else:
            raise ScriptError(lineno, text, f"unknown behavior term {v!r}")
    if "interactive" in tail_words:
        filters.append(Filter("behavior", "situation_type", "eq", "interactive"))
    if families:
        q = dataclasses.replace(q, behavior_families=tuple(families))
    return q


def run_script(script: QueryScript | str, cube: Cube) -> ScriptResult:
    """Type-check and execute a script against a cube snapshot."""
    if isinstance(script, str):
        script = parse_script(script)
    q = CubeQuery()
    pivots: list[tuple[str, ...]] = []
    trace: list[str] = []
    for step in script.steps:
        trace.append(step.text)
        if step.kind == "drill_down":
            target = step.payload.get("to")
            dim = step.payload["dimension"]
            q = drill_down(q, dim, cube.hierarchies)
            while target is not None and q.level_of(dim) != target:
                q = drill_down(q, dim, cube.hierarchies)
        elif step.kind == "roll_up":
            target = step.payload.get("to")
            dim = step.payload["dimension"]
            q = roll_up(q, dim, cube.hierarchies)
            while target not in (None, "all") and q.level_of(dim) != target:
                q = roll_up(q, dim, cube.hierarchies)
        elif step.kind == "slice":
            q = _apply_slice(q, step, cube)
        elif step.kind == "dice":
            filters: list[Filter] = []
            for clause in step.payload["clauses"]:
                q = _dice_clause(clause, q, filters, cube, step.lineno, step.text)
            dims = {f.dimension for f in filters}
            if len(dims) >= 2:
                q = dice(q, filters, cube)
            elif filters:
                for f in filters:
                    cube._member_mask(f)
                q = dataclasses.replace(q, filters=q.filters + tuple(filters))
        elif step.kind == "pivot":
            pivots.append(tuple(step.payload["order"]))
        else:  # pragma: no cover
            raise ScriptError(step.lineno, step.text, f"unknown step kind {step.kind}")
    grid = cube.aggregate(q)
    for order in pivots:
        grid = pivot(grid, order)
    return ScriptResult(query=q, grid=grid, trace=trace)
