"""Warehouse persistence: scene ingestion, site metadata, fact storage,
dimension derivation, and result export.

Layout under one root directory:

    sites.json          site metadata + geometry (bundled nine-spot fixture
                        by default)
    scenes/<spot>.jsonl raw scenes, one JSON object per line
    features.jsonl      extracted feature records
    facts.jsonl         denormalized fact rows (append-only, idempotent per
                        scene_code); dimension tables are regenerated on load
    predictors/         serialized predictor files
    config.toml|json    analysis configuration (optional)
    manifest.json       format version + row counts

Timestamps are RFC 3339 with offset; day/night classification uses the
local clock of each timestamp.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass
from datetime import datetime
from importlib import resources
from pathlib import Path

import numpy as np

from .config import Config, DEFAULT_CONFIG
from .cube import (
    BEHAVIOR_FAMILIES,
    Cube,
    DEFAULT_HIERARCHIES,
    DimensionTable,
    FactRecord,
    Member,
    ResultGrid,
)
from .features import (
    Accel,
    FeatureRecord,
    InteractiveFeatures,
    PedestrianFeatures,
    SceneType,
    StopBehavior,
    RelativePosition,
    VehicleFeatures,
)
from .pcr import RiskLevel
from .scene_model import (
    ObjectTrack,
    ObjectType,
    PedestrianZone,
    Scene,
    SiteGeometry,
    SiteMetadata,
    TrackPoint,
    VehicleZone,
)

FORMAT_VERSION = 1


class WarehouseError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# scene (de)serialization


def scene_to_dict(s: Scene) -> dict:
    return {
        "scene_code": s.scene_code,
        "spot_id": s.spot_id,
        "start_time": s.start_time.isoformat(),
        "fps": s.fps,
        "tracks": [
            {
                "object_id": tr.object_id,
                "object_type": tr.object_type.value,
                "points": [[p.t, p.x, p.y] for p in tr.points],
            }
            for tr in s.tracks
        ],
    }


def scene_from_dict(obj: dict, where: str = "") -> Scene:
    try:
        tracks = tuple(
            ObjectTrack(
                object_id=str(tr["object_id"]),
                object_type=ObjectType(tr["object_type"]),
                points=tuple(TrackPoint(float(t), float(x), float(y)) for t, x, y in tr["points"]),
            )
            for tr in obj["tracks"]
        )
        start = datetime.fromisoformat(obj["start_time"])
        if start.tzinfo is None:
            raise ValueError("start_time missing timezone offset")
        return Scene(
            scene_code=str(obj["scene_code"]),
            spot_id=str(obj["spot_id"]),
            start_time=start,
            fps=float(obj["fps"]),
            tracks=tracks,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise WarehouseError(f"{where}: bad scene record: {e}") from e


def load_scene_file(path: str | Path) -> list[Scene]:
    """Parse a JSON Lines scene file; errors carry the offending line number."""
    path = Path(path)
    scenes: list[Scene] = []
    seen: set[str] = set()
    with path.open() as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise WarehouseError(f"{where}: malformed JSON: {e}") from e
            scene = scene_from_dict(obj, where)
            if scene.scene_code in seen:
                raise WarehouseError(f"{where}: duplicate scene_code {scene.scene_code!r}")
            seen.add(scene.scene_code)
            scenes.append(scene)
    return scenes


def write_scene_file(path: str | Path, scenes) -> None:
    with Path(path).open("w") as f:
        for s in scenes:
            f.write(json.dumps(scene_to_dict(s), sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# sites


def bundled_data_path(name: str) -> Path:
    return Path(str(resources.files("safetycube").joinpath("data").joinpath(name)))


def load_site_metadata(path: str | Path | None = None) -> dict[str, tuple[SiteMetadata, SiteGeometry]]:
    """Load the per-spot metadata + geometry map; defaults to the bundled
    nine-spot fixture."""
    path = Path(path) if path is not None else bundled_data_path("sites.json")
    doc = json.loads(path.read_text())
    out: dict[str, tuple[SiteMetadata, SiteGeometry]] = {}
    for entry in doc["sites"]:
        try:
            geom_raw = entry["geometry"]
            geom = SiteGeometry(
                crosswalk=geom_raw["crosswalk"],
                cia=geom_raw["cia"],
                sidewalks=tuple(geom_raw["sidewalks"]),
                approach_axis=geom_raw["approach_axis"],
                stop_line=geom_raw["stop_line"],
            )
            meta = SiteMetadata(
                spot_id=entry["spot_id"],
                name=entry["name"],
                crosswalk_length_m=float(entry["crosswalk_length_m"]),
                school_zone=bool(entry["school_zone"]),
                speed_camera=bool(entry["speed_camera"]),
                fence=bool(entry["fence"]),
                red_urethane=bool(entry["red_urethane"]),
                num_lanes=int(entry["num_lanes"]),
                signalized=bool(entry["signalized"]),
                speed_limit_kmh=float(entry["speed_limit_kmh"]),
                neighborhood=entry["neighborhood"],
                district=entry["district"],
                city=entry["city"],
                province=entry["province"],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise WarehouseError(f"sites.json entry {entry.get('spot_id')!r}: {e}") from e
        if meta.spot_id in out:
            raise WarehouseError(f"duplicate spot_id {meta.spot_id!r}")
        out[meta.spot_id] = (meta, geom)
    return out


# ---------------------------------------------------------------------------
# feature record (de)serialization


def feature_to_dict(r: FeatureRecord) -> dict:
    d = {
        "scene_code": r.scene_code,
        "spot_id": r.spot_id,
        "start_time": r.start_time.isoformat(),
        "fps": r.fps,
        "scene_type": r.scene_type.value,
        "warnings": list(r.warnings),
        "vehicle": None,
        "pedestrian": None,
        "interactive": None,
    }
    if r.vehicle:
        v = r.vehicle
        d["vehicle"] = {
            "object_id": v.object_id,
            "speed_series_kmh": list(v.speed_series_kmh),
            "average_speed_kmh": v.average_speed_kmh,
            "acceleration_series": [a.value for a in v.acceleration_series],
            "position_series": [z.value for z in v.position_series],
            "crosswalk_distance_series_m": list(v.crosswalk_distance_series_m),
            "stop_behavior": v.stop_behavior.value if v.stop_behavior else None,
        }
    if r.pedestrian:
        p = r.pedestrian
        d["pedestrian"] = {
            "object_id": p.object_id,
            "speed_series_kmh": list(p.speed_series_kmh),
            "average_speed_kmh": p.average_speed_kmh,
            "position_series": [z.value for z in p.position_series],
        }
    if r.interactive:
        i = r.interactive
        d["interactive"] = {
            # run-length compressed for storage; expanded on load
            "relative_position_series": _rle_encode([x.value for x in i.relative_position_series]),
            "vp_distance_series_m": list(i.vp_distance_series_m),
            "psm_s": i.psm_s,
            "pcr_level": i.pcr_level,
        }
    return d


def feature_from_dict(d: dict) -> FeatureRecord:
    vehicle = pedestrian = interactive = None
    if d.get("vehicle"):
        v = d["vehicle"]
        vehicle = VehicleFeatures(
            object_id=v["object_id"],
            speed_series_kmh=tuple(v["speed_series_kmh"]),
            average_speed_kmh=v["average_speed_kmh"],
            acceleration_series=tuple(Accel(a) for a in v["acceleration_series"]),
            position_series=tuple(VehicleZone(z) for z in v["position_series"]),
            crosswalk_distance_series_m=tuple(v["crosswalk_distance_series_m"]),
            stop_behavior=StopBehavior(v["stop_behavior"]) if v["stop_behavior"] else None,
        )
    if d.get("pedestrian"):
        p = d["pedestrian"]
        pedestrian = PedestrianFeatures(
            object_id=p["object_id"],
            speed_series_kmh=tuple(p["speed_series_kmh"]),
            average_speed_kmh=p["average_speed_kmh"],
            position_series=tuple(PedestrianZone(z) for z in p["position_series"]),
        )
    if d.get("interactive"):
        i = d["interactive"]
        interactive = InteractiveFeatures(
            relative_position_series=tuple(
                RelativePosition(x) for x in _rle_decode(i["relative_position_series"])
            ),
            vp_distance_series_m=tuple(i["vp_distance_series_m"]),
            psm_s=i["psm_s"],
            pcr_level=i["pcr_level"],
        )
    return FeatureRecord(
        scene_code=d["scene_code"],
        spot_id=d["spot_id"],
        start_time=datetime.fromisoformat(d["start_time"]),
        fps=d["fps"],
        scene_type=SceneType(d["scene_type"]),
        vehicle=vehicle,
        pedestrian=pedestrian,
        interactive=interactive,
        warnings=tuple(d.get("warnings", ())),
    )


def _rle_encode(labels: list[str]) -> list[list]:
    runs: list[list] = []
    for lab in labels:
        if runs and runs[-1][0] == lab:
            runs[-1][1] += 1
        else:
            runs.append([lab, 1])
    return runs


def _rle_decode(runs) -> list[str]:
    out: list[str] = []
    for lab, n in runs:
        out.extend([lab] * n)
    return out


# ---------------------------------------------------------------------------
# fact rows and dimension derivation


@dataclass(frozen=True)
class FactRow:
    """Denormalized fact storage row; dimension keys are re-derived on load."""

    scene_code: str
    spot_id: str
    start_time: datetime
    scene_type: str
    avg_car_speed_kmh: float | None
    avg_ped_speed_kmh: float | None
    stop_behavior: str | None
    psm: float | None
    pcr_level: int | None

    def to_dict(self) -> dict:
        return {
            "scene_code": self.scene_code,
            "spot_id": self.spot_id,
            "start_time": self.start_time.isoformat(),
            "scene_type": self.scene_type,
            "avg_car_speed_kmh": self.avg_car_speed_kmh,
            "avg_ped_speed_kmh": self.avg_ped_speed_kmh,
            "stop_behavior": self.stop_behavior,
            "psm": self.psm,
            "pcr_level": self.pcr_level,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FactRow":
        return cls(
            scene_code=d["scene_code"],
            spot_id=d["spot_id"],
            start_time=datetime.fromisoformat(d["start_time"]),
            scene_type=d["scene_type"],
            avg_car_speed_kmh=d.get("avg_car_speed_kmh"),
            avg_ped_speed_kmh=d.get("avg_ped_speed_kmh"),
            stop_behavior=d.get("stop_behavior"),
            psm=d.get("psm"),
            pcr_level=d.get("pcr_level"),
        )

    @classmethod
    def from_feature(cls, r: FeatureRecord) -> "FactRow":
        return cls(
            scene_code=r.scene_code,
            spot_id=r.spot_id,
            start_time=r.start_time,
            scene_type=r.scene_type.value,
            avg_car_speed_kmh=r.vehicle.average_speed_kmh if r.vehicle else None,
            avg_ped_speed_kmh=r.pedestrian.average_speed_kmh if r.pedestrian else None,
            stop_behavior=(
                r.vehicle.stop_behavior.value
                if r.vehicle and r.vehicle.stop_behavior
                else None
            ),
            psm=r.psm_s,
            pcr_level=r.pcr_level,
        )


def day_night_label(dt: datetime, config: Config) -> str:
    return "daytime" if config.day_start_hour <= dt.hour < config.day_end_hour else "nighttime"


def time_levels(dt: datetime, config: Config) -> dict[str, str]:
    iso = dt.isocalendar()
    return {
        "hour": dt.strftime("%Y-%m-%d %H"),
        "day_night": day_night_label(dt, config),
        "day": dt.strftime("%Y-%m-%d"),
        "week": f"{iso[0]}-W{iso[1]:02d}",
    }


def speed_bin(kmh: float, width: float) -> tuple[str, float]:
    lo = math.floor(kmh / width) * width
    return f"{int(lo):02d}-{int(lo + width):02d}", lo


def road_leaf_label(meta: SiteMetadata) -> str:
    parts = ["signalized" if meta.signalized else "unsignalized"]
    parts.extend(sorted(k for k, v in meta.road_flags.items() if v))
    return "+".join(parts)


_SITUATION = {
    "car_only": ("single_object", "car_only", "vehicle"),
    "pedestrian_only": ("single_object", "pedestrian_only", "pedestrian"),
    "interactive": ("interactive", "interactive", "vehicle_pedestrian"),
}


def behavior_member_fields(row: FactRow, config: Config) -> tuple[dict, dict]:
    """(level values, attrs) of the behavior member a fact row maps to."""
    situation_type, sub_type, object_type = _SITUATION[row.scene_type]
    attrs: dict[str, object] = {
        "situation_type": situation_type,
        "situation_sub_type": sub_type,
        "object_type": object_type,
        "avg_car_speed": None,
        "avg_car_speed_lo": None,
        "avg_ped_speed": None,
        "avg_ped_speed_lo": None,
        "pcr_level": None,
        "pcr_level_numeric": None,
        "stop_behavior": None,
        "psm_sign": None,
    }
    if row.avg_car_speed_kmh is not None:
        label, lo = speed_bin(row.avg_car_speed_kmh, config.speed_bin_kmh)
        attrs["avg_car_speed"] = label
        attrs["avg_car_speed_lo"] = lo
    if row.avg_ped_speed_kmh is not None:
        label, lo = speed_bin(row.avg_ped_speed_kmh, config.speed_bin_kmh)
        attrs["avg_ped_speed"] = label
        attrs["avg_ped_speed_lo"] = lo
    if row.pcr_level is not None:
        attrs["pcr_level"] = RiskLevel(row.pcr_level).label
        attrs["pcr_level_numeric"] = row.pcr_level
    if row.stop_behavior is not None:
        attrs["stop_behavior"] = row.stop_behavior
    if row.psm is not None:
        attrs["psm_sign"] = "negative" if row.psm < 0 else "non_negative"

    defined = {
        fam: attrs[fam] for fam in BEHAVIOR_FAMILIES if attrs.get(fam) is not None
    }
    # the sub-type prefix keeps leaf labels functionally determining their
    # parent levels even when no feature bins are defined
    leaf = "|".join([sub_type] + [f"{k}={v}" for k, v in sorted(defined.items())])
    values = {
        "behavioral_feature": leaf,
        "object_type": object_type,
        "situation_sub_type": sub_type,
        "situation_type": situation_type,
    }
    return values, attrs


def assemble_cube_inputs(
    rows: list[FactRow],
    sites: dict[str, tuple[SiteMetadata, SiteGeometry]],
    config: Config = DEFAULT_CONFIG,
) -> tuple[list[FactRecord], dict[str, DimensionTable]]:
    """Derive fact records plus regenerated dimension tables from fact rows.

    Member order is sorted by leaf label, so rebuilding from the same rows
    reproduces identical keys and cube fingerprints.
    """
    for row in rows:
        if row.spot_id not in sites:
            raise WarehouseError(
                f"fact {row.scene_code!r}: unknown spot_id {row.spot_id!r}"
            )

    # location members cover every known site, observed or not
    loc_members = []
    for spot_id in sorted(sites):
        meta, _ = sites[spot_id]
        loc_members.append(
            Member(
                values={
                    "spot": meta.spot_id,
                    "neighborhood": meta.neighborhood,
                    "district": meta.district,
                    "city": meta.city,
                    "province": meta.province,
                },
                attrs={"school_zone": meta.school_zone},
            )
        )
    loc_key = {m.values["spot"]: i for i, m in enumerate(loc_members)}

    road_by_label: dict[str, Member] = {}
    road_label_by_spot: dict[str, str] = {}
    for spot_id in sorted(sites):
        meta, _ = sites[spot_id]
        label = road_leaf_label(meta)
        road_label_by_spot[spot_id] = label
        road_by_label.setdefault(
            label,
            Member(
                values={
                    "road_sub_feature": label,
                    "road_feature": "signalized" if meta.signalized else "unsignalized",
                    "segment": "crosswalk",
                },
                attrs={"signalized": meta.signalized, **meta.road_flags},
            ),
        )
    road_members = [road_by_label[lab] for lab in sorted(road_by_label)]
    road_key = {m.values["road_sub_feature"]: i for i, m in enumerate(road_members)}

    time_by_label: dict[str, Member] = {}
    behavior_by_label: dict[str, Member] = {}
    derived = []
    for row in rows:
        tvals = time_levels(row.start_time, config)
        time_by_label.setdefault(
            tvals["hour"],
            Member(values=tvals, attrs={"part": tvals["day_night"], "hour_of_day": row.start_time.hour}),
        )
        bvals, battrs = behavior_member_fields(row, config)
        behavior_by_label.setdefault(bvals["behavioral_feature"], Member(values=bvals, attrs=battrs))
        derived.append((tvals["hour"], bvals["behavioral_feature"]))

    time_members = [time_by_label[lab] for lab in sorted(time_by_label)]
    time_key = {m.values["hour"]: i for i, m in enumerate(time_members)}
    behavior_members = [behavior_by_label[lab] for lab in sorted(behavior_by_label)]
    behavior_key = {m.values["behavioral_feature"]: i for i, m in enumerate(behavior_members)}

    facts = []
    for row, (hour_label, leaf_label) in zip(rows, derived):
        facts.append(
            FactRecord(
                scene_code=row.scene_code,
                location_key=loc_key[row.spot_id],
                time_key=time_key[hour_label],
                road_key=road_key[road_label_by_spot[row.spot_id]],
                behavior_key=behavior_key[leaf_label],
                psm=row.psm,
                pcr_level=row.pcr_level,
            )
        )
    tables = {
        "location": DimensionTable("location", DEFAULT_HIERARCHIES["location"], loc_members),
        "time": DimensionTable("time", DEFAULT_HIERARCHIES["time"], time_members),
        "road": DimensionTable("road", DEFAULT_HIERARCHIES["road"], road_members),
        "behavior": DimensionTable("behavior", DEFAULT_HIERARCHIES["behavior"], behavior_members),
    }
    return facts, tables


# ---------------------------------------------------------------------------
# warehouse


def _safe_name(spot_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "_", spot_id)


class Warehouse:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.scenes_dir = self.root / "scenes"
        self.sites_path = self.root / "sites.json"
        self.features_path = self.root / "features.jsonl"
        self.facts_path = self.root / "facts.jsonl"
        self.predictors_dir = self.root / "predictors"
        self.manifest_path = self.root / "manifest.json"

    # -- lifecycle -----------------------------------------------------------
    def init(self, sites_source: str | Path | None = None) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.scenes_dir.mkdir(exist_ok=True)
        self.predictors_dir.mkdir(exist_ok=True)
        if not self.sites_path.exists():
            src = Path(sites_source) if sites_source else bundled_data_path("sites.json")
            self.sites_path.write_text(src.read_text())
        self._write_manifest()

    def _write_manifest(self) -> None:
        self.manifest_path.write_text(
            json.dumps(
                {
                    "format_version": FORMAT_VERSION,
                    "scene_files": sorted(p.name for p in self.scenes_dir.glob("*.jsonl"))
                    if self.scenes_dir.exists()
                    else [],
                    "fact_count": sum(1 for _ in self._iter_fact_rows()),
                },
                indent=2,
                sort_keys=True,
            )
        )

    def check(self) -> None:
        if not self.manifest_path.exists():
            raise WarehouseError(f"{self.root}: not a warehouse (missing manifest.json)")
        manifest = json.loads(self.manifest_path.read_text())
        if manifest.get("format_version") != FORMAT_VERSION:
            raise WarehouseError(
                f"unsupported warehouse format {manifest.get('format_version')!r}"
            )

    # -- config / sites --------------------------------------------------------
    def load_config(self) -> Config:
        for name in ("config.toml", "config.json"):
            p = self.root / name
            if p.exists():
                return Config.from_file(p)
        return DEFAULT_CONFIG

    def load_sites(self) -> dict[str, tuple[SiteMetadata, SiteGeometry]]:
        path = self.sites_path if self.sites_path.exists() else None
        return load_site_metadata(path)

    # -- scenes ---------------------------------------------------------------
    def ingest_scenes(self, scenes) -> int:
        """Append scenes to their per-spot files, skipping already-present
        scene codes. Returns the number of newly stored scenes."""
        self.scenes_dir.mkdir(parents=True, exist_ok=True)
        existing = {s.scene_code for s in self.load_scenes()}
        by_spot: dict[str, list[Scene]] = {}
        added = 0
        for s in scenes:
            if s.scene_code in existing:
                continue
            existing.add(s.scene_code)
            by_spot.setdefault(s.spot_id, []).append(s)
            added += 1
        for spot_id, batch in by_spot.items():
            path = self.scenes_dir / f"{_safe_name(spot_id)}.jsonl"
            with path.open("a") as f:
                for s in batch:
                    f.write(json.dumps(scene_to_dict(s), sort_keys=True) + "\n")
        self._write_manifest()
        return added

    def load_scenes(self) -> list[Scene]:
        scenes: list[Scene] = []
        if not self.scenes_dir.exists():
            return scenes
        for path in sorted(self.scenes_dir.glob("*.jsonl")):
            scenes.extend(load_scene_file(path))
        return scenes

    # -- features ---------------------------------------------------------------
    def write_features(self, records) -> None:
        existing = {r.scene_code for r in self.load_features()}
        with self.features_path.open("a") as f:
            for r in records:
                if r.scene_code in existing:
                    continue
                existing.add(r.scene_code)
                f.write(json.dumps(feature_to_dict(r), sort_keys=True) + "\n")

    def load_features(self) -> list[FeatureRecord]:
        if not self.features_path.exists():
            return []
        out = []
        with self.features_path.open() as f:
            for line in f:
                if line.strip():
                    out.append(feature_from_dict(json.loads(line)))
        return out

    # -- facts -------------------------------------------------------------------
    def _iter_fact_rows(self):
        if not self.facts_path.exists():
            return
        with self.facts_path.open() as f:
            for line in f:
                if line.strip():
                    yield FactRow.from_dict(json.loads(line))

    def write_facts(self, records) -> int:
        """Append one fact row per feature record (or FactRow); re-writing a
        scene_code is a no-op. Returns the number of new facts."""
        sites = self.load_sites()
        rows = [
            r if isinstance(r, FactRow) else FactRow.from_feature(r) for r in records
        ]
        for row in rows:
            if row.spot_id not in sites:
                raise WarehouseError(
                    f"fact {row.scene_code!r}: unknown spot_id {row.spot_id!r}"
                )
        existing = {row.scene_code for row in self._iter_fact_rows()}
        added = 0
        with self.facts_path.open("a") as f:
            for row in rows:
                if row.scene_code in existing:
                    continue
                existing.add(row.scene_code)
                f.write(json.dumps(row.to_dict(), sort_keys=True) + "\n")
                added += 1
        self._write_manifest()
        return added

    def load_fact_rows(self) -> list[FactRow]:
        return list(self._iter_fact_rows())

    def build_cube(self, config: Config | None = None, materialize: bool = True) -> Cube:
        config = config or self.load_config()
        rows = self.load_fact_rows()
        facts, tables = assemble_cube_inputs(rows, self.load_sites(), config)
        return Cube(facts, tables, DEFAULT_HIERARCHIES, materialize=materialize)


# ---------------------------------------------------------------------------
# result export


def export_result(grid: ResultGrid, format: str = "json") -> bytes:
    """Serialize a result grid: canonical JSON (lossless round-trip) or
    RFC 4180 CSV with one row per cell."""
    if format == "json":
        return grid.to_json().encode()
    if format != "csv":
        raise ValueError(f"unknown export format {format!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    measure_names = sorted(grid.measures)
    writer.writerow([f"{a.dimension}:{a.level}" for a in grid.axes] + measure_names)
    for coords, values in grid.iter_cells():
        row = [coords[a.dimension] for a in grid.axes]
        for m in measure_names:
            v = values[m]
            if v is None:
                row.append("")
            elif m == "scene_count":
                row.append(str(int(v)))
            else:
                row.append(repr(v))
        writer.writerow(row)
    return buf.getvalue().encode()


def import_result(data: bytes) -> ResultGrid:
    return ResultGrid.from_dict(json.loads(data.decode()))
