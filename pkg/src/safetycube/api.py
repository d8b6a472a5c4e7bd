"""Read-only HTTP JSON API over a warehouse snapshot.

Endpoints:

    GET  /dimensions            hierarchies + dimension members
    POST /cube/query            CubeQuery JSON -> ResultGrid JSON
    GET  /scenes/{code}         raw tracks + per-frame PCRA polygons
    GET  /severity-map?level=L  mean PCR level per location member
    POST /reload                atomically swap in a fresh snapshot
    GET  /health

All handlers share one immutable snapshot; /cube/query responses are the
exact bytes the CLI would print for the same query. Errors come back as
{"error", "detail"} with status 400 (bad query) or 404 (unknown resource).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .config import Config
from .cube import Cube, CubeQuery, QueryError, StaleCellError
from .pcr import classify_pcr_level, eval_frames, pcra_pair
from .predictors import ConstantVelocityPredictor
from .scene_model import ObjectType, Scene
from .warehouse import Warehouse, scene_to_dict


@dataclass(frozen=True)
class Snapshot:
    cube: Cube
    scenes: dict[str, Scene]
    sites: dict
    config: Config


def _load_snapshot(warehouse: Warehouse, config: Config | None) -> Snapshot:
    cfg = config or warehouse.load_config()
    cube = warehouse.build_cube(cfg)
    scenes = {s.scene_code: s for s in warehouse.load_scenes()}
    return Snapshot(cube=cube, scenes=scenes, sites=warehouse.load_sites(), config=cfg)


def _scene_playback(snapshot: Snapshot, scene: Scene) -> dict:
    """Tracks plus per-frame PCRA polygons and risk level for the closest
    vehicle-pedestrian pair; single-object scenes get frames: []."""
    config = snapshot.config
    payload = scene_to_dict(scene)
    if scene.spot_id in snapshot.sites:
        geom = snapshot.sites[scene.spot_id][1]
        payload["site"] = {
            "crosswalk": geom.crosswalk.tolist(),
            "cia": geom.cia.tolist(),
            "sidewalks": [s.tolist() for s in geom.sidewalks],
            "stop_line": geom.stop_line.tolist(),
            "approach_axis": geom.approach_axis.tolist(),
        }
    frames = []
    vehicles = scene.tracks_of(ObjectType.VEHICLE)
    pedestrians = scene.tracks_of(ObjectType.PEDESTRIAN)
    if vehicles and pedestrians:
        from .features import _pick_interactive_pair, _tracks_overlap

        if any(_tracks_overlap(v, p) for v in vehicles for p in pedestrians):
            veh, ped = _pick_interactive_pair(scene)
            predictor = ConstantVelocityPredictor(window=config.state_window)
            for t_now, hv, hp in eval_frames(veh, ped, config):
                level = classify_pcr_level(hv, hp, predictor, config)
                areas_v = pcra_pair(hv, config, predictor, config.inflation_vehicle_m)
                areas_p = pcra_pair(hp, config, predictor, config.inflation_pedestrian_m)
                frames.append(
                    {
                        "t": t_now,
                        "level": int(level),
                        "level_label": level.label,
                        "vehicle_id": veh.object_id,
                        "pedestrian_id": ped.object_id,
                        "pcra": {
                            "vehicle": {str(a.h): a.polygon.tolist() for a in areas_v},
                            "pedestrian": {str(a.h): a.polygon.tolist() for a in areas_p},
                        },
                    }
                )
    payload["frames"] = frames
    payload["horizons_s"] = list(config.horizons)
    return payload


def create_app(
    warehouse_root: str | Path,
    config: Config | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    warehouse = Warehouse(warehouse_root)
    warehouse.check()
    app = FastAPI(title="safetycube", version="0.1.0")
    state = {"snapshot": _load_snapshot(warehouse, config)}
    lock = threading.Lock()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        if not Path(ui_dir).is_dir():
            raise ValueError(f"ui dir {ui_dir} does not exist")
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    def snap() -> Snapshot:
        return state["snapshot"]

    @app.exception_handler(QueryError)
    async def _query_error(_req: Request, exc: QueryError):
        return JSONResponse({"error": "bad_query", "detail": str(exc)}, status_code=400)

    @app.exception_handler(StaleCellError)
    async def _stale(_req: Request, exc: StaleCellError):
        return JSONResponse({"error": "stale_cell", "detail": str(exc)}, status_code=400)

    @app.exception_handler(RequestValidationError)
    async def _validation(_req: Request, exc: RequestValidationError):
        return JSONResponse({"error": "bad_request", "detail": str(exc)}, status_code=400)

    def _not_found(detail: str) -> JSONResponse:
        return JSONResponse({"error": "not_found", "detail": detail}, status_code=404)

    @app.get("/health")
    async def health():
        s = snap()
        return {"status": "ok", "facts": len(s.cube), "scenes": len(s.scenes)}

    @app.get("/dimensions")
    async def dimensions():
        s = snap()
        out = {}
        for dim, table in s.cube.tables.items():
            out[dim] = {
                "levels": list(s.cube.hierarchies[dim].levels),
                "members": [
                    {"values": m.values, "attrs": m.attrs} for m in table.members
                ],
            }
        return {"dimensions": out, "fingerprint": s.cube.fingerprint}

    @app.post("/cube/query")
    async def cube_query(body: dict):
        s = snap()
        try:
            q = CubeQuery.from_dict(body)
        except (KeyError, TypeError, ValueError) as e:
            raise QueryError(f"malformed query: {e}") from e
        grid = s.cube.aggregate(q)
        # byte-identical to the CLI's output for the same query
        return Response(content=grid.to_json(), media_type="application/json")

    @app.post("/cube/drill-through")
    async def cube_drill_through(body: dict):
        from .cube import CellRef

        s = snap()
        try:
            cell = CellRef.from_dict(body)
        except (KeyError, TypeError, ValueError) as e:
            raise QueryError(f"malformed cell ref: {e}") from e
        codes = s.cube.drill_through(cell)
        return {"scene_codes": codes, "count": len(codes)}

    @app.get("/scenes/{code}")
    async def scene(code: str):
        s = snap()
        if code not in s.scenes:
            return _not_found(f"unknown scene {code!r}")
        return _scene_playback(s, s.scenes[code])

    @app.get("/severity-map")
    async def severity_map(level: str = "district"):
        s = snap()
        hier = s.cube.hierarchies["location"]
        if level not in hier.levels or level == "all":
            raise QueryError(f"unknown location level {level!r}")
        grid = s.cube.aggregate(
            CubeQuery(group_by=(("location", level),), measures=("scene_count", "pcr_level_mean"))
        )
        members = []
        if grid.axes:
            for label in grid.axes[0].labels:
                members.append(
                    {
                        "member": label,
                        "mean_pcr_level": grid.cell("pcr_level_mean", {"location": label}),
                        "scene_count": int(grid.cell("scene_count", {"location": label})),
                    }
                )
        return {"level": level, "members": members, "scale": [1, 4]}

    @app.post("/reload")
    async def reload():
        with lock:
            state["snapshot"] = _load_snapshot(warehouse, config)
        s = snap()
        return {"status": "reloaded", "facts": len(s.cube), "fingerprint": s.cube.fingerprint}

    return app
