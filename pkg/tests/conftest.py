import numpy as np
import pytest

from safetycube.config import DEFAULT_CONFIG
from safetycube.warehouse import load_site_metadata


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Touch every geometry kernel once so numba JIT compilation happens
    outside any timed acceptance window."""
    from safetycube import kernels

    poly = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pts = np.array([0.5, 2.0])
    kernels.points_in_polygon(pts, pts, poly)
    kernels.points_edge_distance(pts, pts, poly)
    kernels.polygon_self_intersects(poly)
    kernels.polygons_boundary_cross(poly, poly + 0.5)
    line = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
    kernels.first_polyline_intersection(line, line[::-1].copy())
    kernels.polyline_closest_point(line, line + 3.0)
    kernels.closest_approach_time(line, np.array([0.0, 1.0, 2.0]), 0.5, 0.5)


@pytest.fixture(scope="session")
def sites():
    return load_site_metadata()


@pytest.fixture(scope="session")
def site_e(sites):
    return sites["Spot E"]


@pytest.fixture(scope="session")
def config():
    return DEFAULT_CONFIG


@pytest.fixture(scope="session")
def mini_warehouse(tmp_path_factory, sites):
    """Small extracted warehouse shared by DSL/CLI/API/report tests:
    4 spots x day/night with known non-yield, danger, and stop makeup."""
    from safetycube.features import extract_features
    from safetycube.synthetic import CorpusComponent, generate_corpus
    from safetycube.warehouse import Warehouse

    comps = []
    total = 0

    def comp(name, count, spot, period, veh, off, stop=False):
        nonlocal total
        total += count
        comps.append(
            CorpusComponent(name, count, spot, period, veh, (4.3, 5.4), off, stop=stop)
        )

    for spot in ("Spot E", "Spot F", "Spot G", "Spot I"):
        for period in ("day", "night"):
            comp(f"{spot}-{period}-ny", 3, spot, period, (14, 26), (-4.4, -3.0))
            comp(f"{spot}-{period}-y", 3, spot, period, (14, 26), (3.0, 4.4))
            comp(f"{spot}-{period}-danger", 1, spot, period, (5, 8), (-0.14, -0.1))
    comp("Spot F-day-stop", 2, "Spot F", "day", (18, 22), (4.8, 5.4), stop=True)
    comps = [
        CorpusComponent(c.name, c.weight / total, c.spot_id, c.period,
                        c.vehicle_speed_kmh, c.pedestrian_speed_kmh, c.offset_s, c.stop)
        for c in comps
    ]
    geos = {spot: geom for spot, (meta, geom) in sites.items()}
    scenes = generate_corpus(comps, total, seed=99, geometries=geos)

    root = tmp_path_factory.mktemp("mini_wh")
    wh = Warehouse(root)
    wh.init()
    wh.ingest_scenes(scenes)
    records = []
    for s in wh.load_scenes():
        meta, geom = sites[s.spot_id]
        records.append(extract_features(s, geom, meta, DEFAULT_CONFIG))
    wh.write_features(records)
    wh.write_facts(records)
    return wh
