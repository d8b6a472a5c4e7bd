#!/usr/bin/env python3
"""Record real API exchanges for the explorer test suite.

Builds a small fixture warehouse with an engineered two-district severity
profile (Central mean 1.2, South mean 3.6), then captures the exact bytes
the HTTP API returns for the request sequence the explorer makes. Tests
replay these exchanges through a fake fetch, so the frontend is checked
against genuine server output without orchestrating a server in JS.

Run from frontend/:  python3 scripts/record_fixtures.py
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from safetycube.api import create_app
from safetycube.config import DEFAULT_CONFIG
from safetycube.features import extract_features
from safetycube.synthetic import CorpusComponent, generate_corpus
from safetycube.warehouse import Warehouse, load_site_metadata

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

DANGER = (-0.14, -0.10)
NORMAL = (3.2, 4.4)


def build_warehouse(root: Path) -> Warehouse:
    sites = load_site_metadata()
    geos = {spot: geom for spot, (meta, geom) in sites.items()}
    # Spot E (Central District): 1 danger / 14 normal -> mean (14*1+4)/15 = 1.2
    # Spot G (South District): 13 danger / 2 normal -> mean (2*1+13*4)/15 = 3.6
    comps = [
        CorpusComponent("e-danger", 1 / 30, "Spot E", "day", (5, 8), (4.3, 5.4), DANGER),
        CorpusComponent("e-normal", 14 / 30, "Spot E", "day", (14, 26), (4.3, 5.4), NORMAL),
        CorpusComponent("g-danger", 13 / 30, "Spot G", "day", (5, 8), (4.3, 5.4), DANGER),
        CorpusComponent("g-normal", 2 / 30, "Spot G", "day", (14, 26), (4.3, 5.4), NORMAL),
    ]
    scenes = generate_corpus(comps, 30, seed=424242, geometries=geos)
    wh = Warehouse(root)
    wh.init()
    wh.ingest_scenes(scenes)
    records = []
    for s in wh.load_scenes():
        meta, geom = sites[s.spot_id]
        records.append(extract_features(s, geom, meta, DEFAULT_CONFIG))
    wh.write_features(records)
    wh.write_facts(records)

    by_spot = {}
    for r in records:
        by_spot.setdefault(r.spot_id, []).append(r.pcr_level)
    for spot, levels in sorted(by_spot.items()):
        mean = sum(levels) / len(levels)
        print(f"{spot}: levels {sorted(levels)} mean {mean}")
    assert sum(by_spot["Spot E"]) / 15 == 1.2, "Central mean must be exactly 1.2"
    assert sum(by_spot["Spot G"]) / 15 == 3.6, "South mean must be exactly 3.6"
    return wh


def base_query(group_by):
    return {
        "group_by": group_by,
        "filters": [],
        "measures": ["scene_count"],
        "fact_filters": [],
        "behavior_families": ["avg_car_speed"],
    }


def main() -> int:
    exchanges = []
    with tempfile.TemporaryDirectory() as tmp:
        wh = build_warehouse(Path(tmp) / "wh")
        client = TestClient(create_app(wh.root))

        def record_get(path):
            r = client.get(path)
            assert r.status_code == 200, (path, r.status_code, r.text)
            exchanges.append(
                {"method": "GET", "path": path, "body": None, "status": 200, "response": r.text}
            )
            return json.loads(r.text)

        def record_post(path, body):
            r = client.post(path, json=body)
            assert r.status_code == 200, (path, r.status_code, r.text)
            exchanges.append(
                {"method": "POST", "path": path, "body": body, "status": 200, "response": r.text}
            )
            return json.loads(r.text)

        record_get("/dimensions")
        record_post("/cube/query", base_query([]))  # the store's initial query

        # the drill-down chain all -> province -> city -> district ->
        # neighborhood -> spot, as the explorer issues it
        spot_grid = None
        for level in ("province", "city", "district", "neighborhood", "spot"):
            spot_grid = record_post("/cube/query", base_query([["location", level]]))

        # drill-through on the Spot G cell of the spot-level grid
        cell = {
            "fingerprint": spot_grid["fingerprint"],
            "query": spot_grid["query"],
            "coords": [["location", "Spot G"]],
        }
        through = record_post("/cube/drill-through", cell)

        # one danger scene from Spot G for playback
        rows = {r.scene_code: r for r in wh.load_fact_rows()}
        danger_codes = [c for c in through["scene_codes"] if rows[c].pcr_level == 4]
        assert danger_codes, "fixture corpus must contain a Spot G danger scene"
        scene = record_get(f"/scenes/{danger_codes[0]}")
        danger_frames = [f for f in scene["frames"] if f["level"] == 4]
        assert danger_frames, "playback fixture must contain danger frames"

        # severity choropleth at district level; two members, means 1.2 / 3.6
        sev = record_get("/severity-map?level=district")
        means = sorted(m["mean_pcr_level"] for m in sev["members"])
        assert means == [1.2, 3.6], means

        # map click: slice the spot grid to the South District
        sliced = dict(
            base_query([]),
            filters=[{"dimension": "location", "level": "district", "op": "eq",
                      "value": "South District"}],
        )
        record_post("/cube/query", sliced)

    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "exchanges.json").write_text(json.dumps(exchanges, indent=1))
    print(f"recorded {len(exchanges)} exchanges -> {OUT / 'exchanges.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
