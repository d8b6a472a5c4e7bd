"""Star-schema data cube with concept hierarchies and OLAP operations.

The fact grain is one scene: four dimension keys (location, time, road,
behavior), an implicit scene_count of 1, nullable psm / pcr_level measures,
and the scene_code as a degenerate key for drill-through. Aggregation is a
vectorized group-by over numpy key arrays; an optional materialized base
cuboid (unique key combinations with pre-summed measures) answers
filter-only queries without rescanning facts and is held to the same
results as the lazy path.

Cubes are immutable after build: rebuilds produce a new cube value with a
content-derived fingerprint, which stale drill-through references are
checked against.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

DIMENSIONS = ("location", "time", "road", "behavior")

DEFAULT_LEVELS = {
    "location": ("spot", "neighborhood", "district", "city", "province", "all"),
    "time": ("hour", "day_night", "day", "week", "all"),
    "road": ("road_sub_feature", "road_feature", "segment", "all"),
    "behavior": ("behavioral_feature", "object_type", "situation_sub_type", "situation_type", "all"),
}

MEASURES = ("scene_count", "psm_mean", "pcr_level_mean")

BEHAVIOR_FAMILIES = ("avg_car_speed", "avg_ped_speed", "pcr_level", "stop_behavior", "psm_sign")

FILTER_OPS = ("eq", "in", "flag", "attr_eq", "attr_in", "lt", "le", "gt", "ge")
FACT_FIELDS = ("psm", "pcr_level")
FACT_OPS = ("lt", "le", "gt", "ge", "eq", "ne", "nonnull")


class QueryError(ValueError):
    pass


class StaleCellError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# schema types


@dataclass(frozen=True)
class ConceptHierarchy:
    dimension: str
    levels: tuple[str, ...]  # ordered leaf -> ... -> "all"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.levels) < 2 or self.levels[-1] != "all":
            raise ValueError(f"{self.dimension}: hierarchy must end at 'all'")
        if len(set(self.levels)) != len(self.levels):
            raise ValueError(f"{self.dimension}: duplicate levels")

    @property
    def leaf(self) -> str:
        return self.levels[0]

    def parent(self, level: str) -> str | None:
        i = self.levels.index(level)
        return self.levels[i + 1] if i + 1 < len(self.levels) else None

    def child(self, level: str) -> str | None:
        i = self.levels.index(level)
        return self.levels[i - 1] if i > 0 else None


DEFAULT_HIERARCHIES = {
    d: ConceptHierarchy(d, levels) for d, levels in DEFAULT_LEVELS.items()
}


@dataclass(frozen=True)
class Member:
    values: dict[str, str]          # level -> label (below "all")
    attrs: dict[str, object] = field(default_factory=dict)


@dataclass
class DimensionTable:
    name: str
    hierarchy: ConceptHierarchy
    members: list[Member]

    def __post_init__(self):
        for level in self.hierarchy.levels[:-1]:
            for m in self.members:
                if level not in m.values:
                    raise ValueError(
                        f"dimension {self.name}: member missing level {level!r}"
                    )

    def labels_at(self, level: str) -> set[str]:
        if level == "all":
            return {"all"}
        return {m.values[level] for m in self.members}

    def level_labels(self, level: str) -> np.ndarray:
        if level == "all":
            return np.array(["all"] * len(self.members), dtype=object)
        return np.array([m.values[level] for m in self.members], dtype=object)

    def attr_values(self, attr: str) -> np.ndarray:
        return np.array([m.attrs.get(attr) for m in self.members], dtype=object)

    @property
    def attr_names(self) -> set[str]:
        names: set[str] = set()
        for m in self.members:
            names.update(m.attrs)
        return names


@dataclass(frozen=True)
class FactRecord:
    scene_code: str
    location_key: int
    time_key: int
    road_key: int
    behavior_key: int
    psm: float | None = None
    pcr_level: int | None = None  # numeric 1..4

    def key(self, dimension: str) -> int:
        return getattr(self, f"{dimension}_key")


# ---------------------------------------------------------------------------
# queries


@dataclass(frozen=True)
class Filter:
    dimension: str
    level: str
    op: str
    value: object = None
    attr: str | None = None

    def to_dict(self) -> dict:
        d = {"dimension": self.dimension, "level": self.level, "op": self.op}
        if self.value is not None:
            d["value"] = list(self.value) if isinstance(self.value, (tuple, set)) else self.value
        if self.attr is not None:
            d["attr"] = self.attr
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Filter":
        value = d.get("value")
        if isinstance(value, list):
            value = tuple(value)
        return cls(d["dimension"], d["level"], d["op"], value, d.get("attr"))


@dataclass(frozen=True)
class FactFilter:
    field: str
    op: str
    value: float | None = None

    def to_dict(self) -> dict:
        d = {"field": self.field, "op": self.op}
        if self.value is not None:
            d["value"] = self.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FactFilter":
        return cls(d["field"], d["op"], d.get("value"))


@dataclass(frozen=True)
class CubeQuery:
    group_by: tuple[tuple[str, str], ...] = ()   # (dimension, level), canonical order
    filters: tuple[Filter, ...] = ()
    measures: tuple[str, ...] = ("scene_count",)
    fact_filters: tuple[FactFilter, ...] = ()
    behavior_families: tuple[str, ...] = ("avg_car_speed",)

    def __post_init__(self):
        gb = tuple(sorted(self.group_by, key=lambda kv: DIMENSIONS.index(kv[0])))
        object.__setattr__(self, "group_by", gb)
        object.__setattr__(self, "filters", tuple(self.filters))
        object.__setattr__(self, "measures", tuple(self.measures))
        object.__setattr__(self, "fact_filters", tuple(self.fact_filters))
        object.__setattr__(self, "behavior_families", tuple(self.behavior_families))

    def level_of(self, dimension: str) -> str | None:
        for d, lvl in self.group_by:
            if d == dimension:
                return lvl
        return None

    def with_level(self, dimension: str, level: str | None) -> "CubeQuery":
        gb = [kv for kv in self.group_by if kv[0] != dimension]
        if level is not None and level != "all":
            gb.append((dimension, level))
        return dataclasses.replace(self, group_by=tuple(gb))

    def to_dict(self) -> dict:
        return {
            "group_by": [list(kv) for kv in self.group_by],
            "filters": [f.to_dict() for f in self.filters],
            "measures": list(self.measures),
            "fact_filters": [f.to_dict() for f in self.fact_filters],
            "behavior_families": list(self.behavior_families),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CubeQuery":
        return cls(
            group_by=tuple((g[0], g[1]) for g in d.get("group_by", [])),
            filters=tuple(Filter.from_dict(f) for f in d.get("filters", [])),
            measures=tuple(d.get("measures", ["scene_count"])),
            fact_filters=tuple(FactFilter.from_dict(f) for f in d.get("fact_filters", [])),
            behavior_families=tuple(d.get("behavior_families", ["avg_car_speed"])),
        )


@dataclass(frozen=True)
class Axis:
    dimension: str
    level: str
    labels: tuple[str, ...]


@dataclass(frozen=True)
class CellRef:
    fingerprint: str
    query: CubeQuery
    coords: tuple[tuple[str, str], ...]  # (dimension, label)

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "query": self.query.to_dict(),
            "coords": [list(c) for c in self.coords],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CellRef":
        return cls(
            d["fingerprint"],
            CubeQuery.from_dict(d["query"]),
            tuple((c[0], c[1]) for c in d.get("coords", [])),
        )


@dataclass(frozen=True)
class ResultGrid:
    axes: tuple[Axis, ...]
    measures: dict[str, np.ndarray]   # float arrays, nan encodes null
    query: CubeQuery
    fingerprint: str

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a.labels) for a in self.axes)

    def cell(self, measure: str, coords: dict[str, str]) -> float | None:
        idx = self._index(coords)
        v = float(self.measures[measure][idx])
        return None if np.isnan(v) else v

    def _index(self, coords: dict[str, str]) -> tuple[int, ...]:
        idx = []
        for ax in self.axes:
            if ax.dimension not in coords:
                raise QueryError(f"missing coordinate for axis {ax.dimension!r}")
            label = coords[ax.dimension]
            if label not in ax.labels:
                raise QueryError(f"label {label!r} not on axis {ax.dimension!r}")
            idx.append(ax.labels.index(label))
        return tuple(idx)

    def cell_ref(self, coords: dict[str, str]) -> CellRef:
        self._index(coords)  # validation
        ordered = tuple((ax.dimension, coords[ax.dimension]) for ax in self.axes)
        return CellRef(self.fingerprint, self.query, ordered)

    def iter_cells(self):
        """Yield (coords dict, {measure: value}) in row-major order."""
        if not self.axes:
            yield {}, {m: self.cell(m, {}) for m in self.measures}
            return
        for flat in np.ndindex(*self.shape):
            coords = {ax.dimension: ax.labels[i] for ax, i in zip(self.axes, flat)}
            values = {}
            for m, arr in self.measures.items():
                v = float(arr[flat])
                values[m] = None if np.isnan(v) else v
            yield coords, values

    def to_dict(self) -> dict:
        measures = {}
        for name in sorted(self.measures):
            arr = self.measures[name]
            if name == "scene_count":
                nested = np.where(np.isnan(arr), 0, arr).astype(np.int64).tolist()
            else:
                nested = _nan_to_none(arr.tolist())
            measures[name] = nested
        return {
            "axes": [
                {"dimension": a.dimension, "level": a.level, "labels": list(a.labels)}
                for a in self.axes
            ],
            "measures": measures,
            "query": self.query.to_dict(),
            "fingerprint": self.fingerprint,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> "ResultGrid":
        axes = tuple(
            Axis(a["dimension"], a["level"], tuple(a["labels"])) for a in d["axes"]
        )
        shape = tuple(len(a.labels) for a in axes)
        measures = {}
        for name, nested in d["measures"].items():
            arr = np.asarray(_none_to_nan(nested), dtype=np.float64).reshape(shape)
            measures[name] = arr
        return cls(axes, measures, CubeQuery.from_dict(d["query"]), d.get("fingerprint", ""))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultGrid):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _nan_to_none(nested):
    if isinstance(nested, list):
        return [_nan_to_none(x) for x in nested]
    return None if (isinstance(nested, float) and np.isnan(nested)) else nested


def _none_to_nan(nested):
    if isinstance(nested, list):
        return [_none_to_nan(x) for x in nested]
    return np.nan if nested is None else nested


# ---------------------------------------------------------------------------
# the cube


class Cube:
    def __init__(
        self,
        facts: list[FactRecord],
        tables: dict[str, DimensionTable],
        hierarchies: dict[str, ConceptHierarchy] | None = None,
        materialize: bool = True,
    ):
        self.hierarchies = dict(hierarchies or DEFAULT_HIERARCHIES)
        self.tables = dict(tables)
        for dim in DIMENSIONS:
            if dim not in self.tables:
                raise ValueError(f"missing dimension table {dim!r}")
            if dim not in self.hierarchies:
                raise ValueError(f"missing hierarchy {dim!r}")
        self.facts = list(facts)

        seen: set[str] = set()
        for f in self.facts:
            if f.scene_code in seen:
                raise ValueError(f"duplicate scene_code {f.scene_code!r}")
            seen.add(f.scene_code)
            for dim in DIMENSIONS:
                k = f.key(dim)
                if not (0 <= k < len(self.tables[dim].members)):
                    raise ValueError(
                        f"fact {f.scene_code!r}: dangling {dim} key {k}"
                    )
            if f.pcr_level is not None and f.pcr_level not in (1, 2, 3, 4):
                raise ValueError(
                    f"fact {f.scene_code!r}: pcr_level must be 1..4, got {f.pcr_level}"
                )

        n = len(self.facts)
        self._codes = np.array([f.scene_code for f in self.facts], dtype=object)
        self._keys = {
            dim: np.array([f.key(dim) for f in self.facts], dtype=np.int64)
            for dim in DIMENSIONS
        }
        self._psm = np.array(
            [np.nan if f.psm is None else f.psm for f in self.facts], dtype=np.float64
        )
        self._pcr = np.array(
            [np.nan if f.pcr_level is None else f.pcr_level for f in self.facts],
            dtype=np.float64,
        )
        self.fingerprint = self._fingerprint()
        self._cuboid = self._materialize() if (materialize and n) else None

    def __len__(self) -> int:
        return len(self.facts)

    def _fingerprint(self) -> str:
        h = hashlib.sha256()
        for f in sorted(self.facts, key=lambda f: f.scene_code):
            h.update(
                f"{f.scene_code}|{f.location_key}|{f.time_key}|{f.road_key}|"
                f"{f.behavior_key}|{f.psm!r}|{f.pcr_level!r}\n".encode()
            )
        return h.hexdigest()[:16]

    # -- materialized base cuboid ------------------------------------------
    def _materialize(self):
        stacked = np.stack([self._keys[d] for d in DIMENSIONS], axis=1)
        combos, inverse = np.unique(stacked, axis=0, return_inverse=True)
        ncombo = combos.shape[0]
        count = np.bincount(inverse, minlength=ncombo).astype(np.float64)
        psm_ok = ~np.isnan(self._psm)
        pcr_ok = ~np.isnan(self._pcr)
        return {
            "keys": {d: combos[:, i] for i, d in enumerate(DIMENSIONS)},
            "count": count,
            "psm_sum": np.bincount(inverse[psm_ok], weights=self._psm[psm_ok], minlength=ncombo),
            "psm_n": np.bincount(inverse[psm_ok], minlength=ncombo).astype(np.float64),
            "pcr_sum": np.bincount(inverse[pcr_ok], weights=self._pcr[pcr_ok], minlength=ncombo),
            "pcr_n": np.bincount(inverse[pcr_ok], minlength=ncombo).astype(np.float64),
        }

    # -- label resolution -----------------------------------------------------
    def _behavior_labels(self, families: tuple[str, ...]) -> np.ndarray:
        table = self.tables["behavior"]
        per_family = []
        for fam in families:
            if fam not in BEHAVIOR_FAMILIES and fam not in table.attr_names:
                raise QueryError(f"unknown behavior family {fam!r}")
            vals = table.attr_values(fam)
            per_family.append(np.array(["n/a" if v is None else str(v) for v in vals], dtype=object))
        if len(per_family) == 1:
            return per_family[0]
        joined = per_family[0].copy()
        for vals in per_family[1:]:
            joined = np.array([f"{a}|{b}" for a, b in zip(joined, vals)], dtype=object)
        return joined

    def member_labels(self, dimension: str, level: str, families: tuple[str, ...]) -> np.ndarray:
        """Per-member label array for a grouping level. Grouping the behavior
        leaf goes through the selected feature families when the table
        carries them; tables without family attributes (e.g. generic test
        hierarchies) group by the plain leaf labels."""
        table = self.tables[dimension]
        if level not in self.hierarchies[dimension].levels:
            raise QueryError(f"unknown level {level!r} for dimension {dimension!r}")
        if (
            dimension == "behavior"
            and level == self.hierarchies["behavior"].leaf
            and families
            and any(f in table.attr_names for f in families)
        ):
            return self._behavior_labels(families)
        return table.level_labels(level)

    # -- masks ---------------------------------------------------------------
    def _member_mask(self, flt: Filter) -> np.ndarray:
        """Per-member boolean mask for one filter."""
        if flt.dimension not in DIMENSIONS:
            raise QueryError(f"unknown dimension {flt.dimension!r}")
        table = self.tables[flt.dimension]
        hier = self.hierarchies[flt.dimension]
        if flt.level not in hier.levels:
            raise QueryError(
                f"unknown level {flt.level!r} for dimension {flt.dimension!r}"
            )
        if flt.op not in FILTER_OPS:
            raise QueryError(f"unknown filter op {flt.op!r}")

        if flt.op in ("eq", "in"):
            labels = table.level_labels(flt.level)
            known = table.labels_at(flt.level)
            values = (flt.value,) if flt.op == "eq" else tuple(flt.value)
            for v in values:
                if v not in known:
                    raise QueryError(
                        f"unknown member {v!r} at {flt.dimension}.{flt.level}"
                    )
            return np.isin(labels, values)

        if flt.attr is None:
            raise QueryError(f"filter op {flt.op!r} requires an attr")
        if flt.attr not in table.attr_names:
            raise QueryError(
                f"unknown attribute {flt.attr!r} on dimension {flt.dimension!r}"
            )
        vals = table.attr_values(flt.attr)
        if flt.op == "flag":
            return np.array([bool(v) for v in vals], dtype=bool)
        if flt.op == "attr_eq":
            return np.array([v == flt.value for v in vals], dtype=bool)
        if flt.op == "attr_in":
            targets = set(flt.value)
            return np.array([v in targets for v in vals], dtype=bool)
        # numeric comparisons; members lacking the attribute never match
        out = np.zeros(len(vals), dtype=bool)
        for i, v in enumerate(vals):
            if v is None:
                continue
            if flt.op == "lt":
                out[i] = v < flt.value
            elif flt.op == "le":
                out[i] = v <= flt.value
            elif flt.op == "gt":
                out[i] = v > flt.value
            elif flt.op == "ge":
                out[i] = v >= flt.value
        return out

    def _fact_measure_mask(self, ff: FactFilter) -> np.ndarray:
        if ff.field not in FACT_FIELDS:
            raise QueryError(f"unknown fact field {ff.field!r}")
        if ff.op not in FACT_OPS:
            raise QueryError(f"unknown fact filter op {ff.op!r}")
        x = self._psm if ff.field == "psm" else self._pcr
        ok = ~np.isnan(x)
        if ff.op == "nonnull":
            return ok
        if ff.value is None:
            raise QueryError(f"fact filter {ff.op!r} requires a value")
        with np.errstate(invalid="ignore"):
            if ff.op == "lt":
                return ok & (x < ff.value)
            if ff.op == "le":
                return ok & (x <= ff.value)
            if ff.op == "gt":
                return ok & (x > ff.value)
            if ff.op == "ge":
                return ok & (x >= ff.value)
            if ff.op == "eq":
                return ok & (x == ff.value)
            return ok & (x != ff.value)

    def fact_mask(self, q: CubeQuery) -> np.ndarray:
        mask = np.ones(len(self.facts), dtype=bool)
        for flt in q.filters:
            member_ok = self._member_mask(flt)
            mask &= member_ok[self._keys[flt.dimension]]
        for ff in q.fact_filters:
            mask &= self._fact_measure_mask(ff)
        return mask

    # -- aggregation -----------------------------------------------------------
    def _validate_query(self, q: CubeQuery) -> None:
        seen_dims = set()
        for dim, lvl in q.group_by:
            if dim not in DIMENSIONS:
                raise QueryError(f"unknown dimension {dim!r}")
            if dim in seen_dims:
                raise QueryError(f"dimension {dim!r} grouped twice")
            seen_dims.add(dim)
            if lvl not in self.hierarchies[dim].levels or lvl == "all":
                raise QueryError(f"cannot group {dim!r} at level {lvl!r}")
        for m in q.measures:
            if m not in MEASURES:
                raise QueryError(f"unknown measure {m!r}")
        if not q.measures:
            raise QueryError("query selects no measures")

    def aggregate(self, q: CubeQuery, use_materialized: bool | None = None) -> ResultGrid:
        self._validate_query(q)
        if use_materialized is None:
            use_materialized = self._cuboid is not None and not q.fact_filters
        if use_materialized and (self._cuboid is None or q.fact_filters):
            raise QueryError("query is not answerable from the materialized cuboid")
        if use_materialized:
            return self._aggregate_over(q, self._cuboid_view(q))
        return self._aggregate_over(q, self._fact_view(q))

    def _fact_view(self, q: CubeQuery):
        mask = self.fact_mask(q)
        return {
            "keys": {d: self._keys[d][mask] for d in DIMENSIONS},
            "count": np.ones(int(mask.sum()), dtype=np.float64),
            "psm_sum": np.where(np.isnan(self._psm[mask]), 0.0, self._psm[mask]),
            "psm_n": (~np.isnan(self._psm[mask])).astype(np.float64),
            "pcr_sum": np.where(np.isnan(self._pcr[mask]), 0.0, self._pcr[mask]),
            "pcr_n": (~np.isnan(self._pcr[mask])).astype(np.float64),
        }

    def _cuboid_view(self, q: CubeQuery):
        cub = self._cuboid
        mask = np.ones(cub["count"].shape[0], dtype=bool)
        for flt in q.filters:
            member_ok = self._member_mask(flt)
            mask &= member_ok[cub["keys"][flt.dimension]]
        return {
            "keys": {d: cub["keys"][d][mask] for d in DIMENSIONS},
            "count": cub["count"][mask],
            "psm_sum": cub["psm_sum"][mask],
            "psm_n": cub["psm_n"][mask],
            "pcr_sum": cub["pcr_sum"][mask],
            "pcr_n": cub["pcr_n"][mask],
        }

    def _aggregate_over(self, q: CubeQuery, view) -> ResultGrid:
        axes: list[Axis] = []
        axis_index: list[np.ndarray] = []
        nrows = view["count"].shape[0]
        for dim, lvl in q.group_by:
            labels_per_member = self.member_labels(dim, lvl, q.behavior_families)
            row_labels = labels_per_member[view["keys"][dim]]
            uniq = sorted(set(row_labels.tolist()))
            lookup = {lab: i for i, lab in enumerate(uniq)}
            axes.append(Axis(dim, lvl, tuple(uniq)))
            axis_index.append(
                np.array([lookup[lab] for lab in row_labels.tolist()], dtype=np.int64)
            )
        shape = tuple(len(a.labels) for a in axes)
        ncells = int(np.prod(shape)) if shape else 1
        if nrows == 0:
            flat = np.zeros(0, dtype=np.int64)
        elif axes:
            flat = np.ravel_multi_index(tuple(axis_index), shape)
        else:
            flat = np.zeros(nrows, dtype=np.int64)

        out: dict[str, np.ndarray] = {}
        count = np.bincount(flat, weights=view["count"], minlength=ncells)
        for name in q.measures:
            if name == "scene_count":
                arr = count.copy()
            elif name == "psm_mean":
                s = np.bincount(flat, weights=view["psm_sum"], minlength=ncells)
                n = np.bincount(flat, weights=view["psm_n"], minlength=ncells)
                with np.errstate(invalid="ignore", divide="ignore"):
                    arr = np.where(n > 0, s / n, np.nan)
            else:
                s = np.bincount(flat, weights=view["pcr_sum"], minlength=ncells)
                n = np.bincount(flat, weights=view["pcr_n"], minlength=ncells)
                with np.errstate(invalid="ignore", divide="ignore"):
                    arr = np.where(n > 0, s / n, np.nan)
            out[name] = arr.reshape(shape) if shape else arr.reshape(())
        return ResultGrid(tuple(axes), out, q, self.fingerprint)

    # -- drill-through -----------------------------------------------------------
    def drill_through(self, cell: CellRef) -> list[str]:
        if cell.fingerprint != self.fingerprint:
            raise StaleCellError(
                "cell references a different cube build "
                f"({cell.fingerprint} != {self.fingerprint})"
            )
        q = cell.query
        self._validate_query(q)
        mask = self.fact_mask(q)
        grouped = dict(q.group_by)
        for dim, label in cell.coords:
            if dim not in grouped:
                raise QueryError(f"coordinate {dim!r} is not a grouped dimension")
            labels = self.member_labels(dim, grouped[dim], q.behavior_families)
            mask &= labels[self._keys[dim]] == label
        return sorted(self._codes[mask].tolist())


def build_cube(
    facts,
    tables: dict[str, DimensionTable],
    hierarchies: dict[str, ConceptHierarchy] | None = None,
    materialize: bool = True,
) -> Cube:
    return Cube(list(facts), tables, hierarchies, materialize)


def aggregate(cube: Cube, q: CubeQuery, use_materialized: bool | None = None) -> ResultGrid:
    return cube.aggregate(q, use_materialized)


def drill_through(cube: Cube, cell: CellRef) -> list[str]:
    return cube.drill_through(cell)


# ---------------------------------------------------------------------------
# OLAP query transformations


def _hierarchy(source, dimension: str) -> ConceptHierarchy:
    hierarchies = source.hierarchies if isinstance(source, Cube) else source
    if dimension not in hierarchies:
        raise QueryError(f"unknown dimension {dimension!r}")
    return hierarchies[dimension]


def roll_up(q: CubeQuery, dimension: str, hierarchies=None) -> CubeQuery:
    """Climb one level up the dimension's concept hierarchy."""
    hier = _hierarchy(hierarchies or DEFAULT_HIERARCHIES, dimension)
    current = q.level_of(dimension)
    if current is None:
        raise QueryError(f"dimension {dimension!r} is already at 'all'")
    parent = hier.parent(current)
    return q.with_level(dimension, parent)


def drill_down(q: CubeQuery, dimension: str, hierarchies=None) -> CubeQuery:
    """Step one level down the dimension's concept hierarchy."""
    hier = _hierarchy(hierarchies or DEFAULT_HIERARCHIES, dimension)
    current = q.level_of(dimension) or "all"
    child = hier.child(current)
    if child is None:
        raise QueryError(f"dimension {dimension!r} is already at leaf level")
    return q.with_level(dimension, child)


def slice_query(q: CubeQuery, dimension: str, member: str, cube: Cube | None = None,
                level: str | None = None) -> CubeQuery:
    """Fix one dimension to a member (removing it from the axes), or apply a
    raw-measure predicate when dimension == "scene" (e.g. "psm < 0")."""
    if dimension == "scene":
        return dataclasses.replace(
            q, fact_filters=q.fact_filters + (parse_fact_predicate(member),)
        )
    if dimension not in DIMENSIONS:
        raise QueryError(f"unknown dimension {dimension!r}")
    lvl = level or q.level_of(dimension)
    if lvl is None:
        hier = _hierarchy(cube or DEFAULT_HIERARCHIES, dimension)
        lvl = hier.leaf
    if cube is not None:
        if member not in cube.tables[dimension].labels_at(lvl):
            raise QueryError(f"unknown member {member!r} at {dimension}.{lvl}")
    new_filters = q.filters + (Filter(dimension, lvl, "eq", member),)
    return dataclasses.replace(q, filters=new_filters).with_level(dimension, None)


def dice(q: CubeQuery, predicates, cube: Cube | None = None) -> CubeQuery:
    """Add a conjunction of member predicates spanning >= 2 dimensions."""
    predicates = tuple(predicates)
    dims = {p.dimension for p in predicates}
    if len(dims) < 2:
        raise QueryError("dice needs predicates over >= 2 dimensions; use slice for one")
    if cube is not None:
        for p in predicates:
            cube._member_mask(p)  # validates dimension/level/member/attr
    return dataclasses.replace(q, filters=q.filters + predicates)


def pivot(grid: ResultGrid, axis_order) -> ResultGrid:
    """Permute the grid's axes; the cell multiset is unchanged."""
    order = tuple(axis_order)
    dims = tuple(a.dimension for a in grid.axes)
    if sorted(order) != sorted(dims) or len(order) != len(dims):
        raise QueryError(f"axis order {order!r} is not a permutation of {dims!r}")
    perm = tuple(dims.index(d) for d in order)
    axes = tuple(grid.axes[i] for i in perm)
    measures = {m: np.transpose(arr, perm) if arr.ndim else arr for m, arr in grid.measures.items()}
    return ResultGrid(axes, measures, grid.query, grid.fingerprint)


def parse_fact_predicate(text: str) -> FactFilter:
    """Parse "psm < 0"-style raw-measure predicates."""
    import re

    m = re.match(r"\s*(psm|pcr_level)\s*(<=|>=|<|>|==|=|!=)\s*(-?\d+(?:\.\d+)?)\s*$", text)
    if not m:
        raise QueryError(f"cannot parse fact predicate {text!r}")
    field_, op, value = m.group(1), m.group(2), float(m.group(3))
    op_map = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge", "=": "eq", "==": "eq", "!=": "ne"}
    return FactFilter(field_, op_map[op], value)
