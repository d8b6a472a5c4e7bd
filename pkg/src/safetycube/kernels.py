"""Hot geometry kernels.

Every function here operates on plain float64 arrays: polygons and polylines
are (n, 2) C-contiguous arrays, open rings (no repeated last vertex).

Two implementations are kept for each kernel: a loop form compiled with
numba's ``@njit`` and a vectorized/loop numpy fallback. The active path is
chosen at import time:

* default: numba when importable,
* ``SAFETYCUBE_NUMBA=0`` (or ``false``/``off``/``no``): pure numpy.

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import math
import os

import numpy as np

_EPS = 1e-12

_flag = os.environ.get("SAFETYCUBE_NUMBA", "").strip().lower()
_numba_requested = _flag not in ("0", "false", "off", "no")

if _numba_requested:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def _jit(fn):
    if NUMBA_ENABLED:
        return _njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# scalar helpers (shared by the loop kernels; compiled when numba is active)


def _seg_point_dist_sq(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    dd = dx * dx + dy * dy
    if dd <= _EPS:
        ex = px - ax
        ey = py - ay
        return ex * ex + ey * ey, 0.0
    u = ((px - ax) * dx + (py - ay) * dy) / dd
    if u < 0.0:
        u = 0.0
    elif u > 1.0:
        u = 1.0
    ex = px - (ax + u * dx)
    ey = py - (ay + u * dy)
    return ex * ex + ey * ey, u


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py):
    # assumes p collinear with a-b
    return (
        min(ax, bx) - _EPS <= px <= max(ax, bx) + _EPS
        and min(ay, by) - _EPS <= py <= max(ay, by) + _EPS
    )


def _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    if ((d1 > _EPS and d2 < -_EPS) or (d1 < -_EPS and d2 > _EPS)) and (
        (d3 > _EPS and d4 < -_EPS) or (d3 < -_EPS and d4 > _EPS)
    ):
        return True
    if abs(d1) <= _EPS and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if abs(d2) <= _EPS and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    if abs(d3) <= _EPS and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if abs(d4) <= _EPS and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    return False


_seg_point_dist_sq = _jit(_seg_point_dist_sq)
_orient = _jit(_orient)
_on_segment = _jit(_on_segment)
_segments_intersect = _jit(_segments_intersect)


# ---------------------------------------------------------------------------
# point-in-polygon / distance to boundary


def _points_in_polygon_loop(xs, ys, poly):
    n = poly.shape[0]
    m = xs.shape[0]
    out = np.empty(m, dtype=np.bool_)
    for k in range(m):
        x = xs[k]
        y = ys[k]
        inside = False
        j = n - 1
        for i in range(n):
            yi = poly[i, 1]
            yj = poly[j, 1]
            if (yi > y) != (yj > y):
                xcross = (poly[j, 0] - poly[i, 0]) * (y - yi) / (yj - yi) + poly[i, 0]
                if x < xcross:
                    inside = not inside
            j = i
        out[k] = inside
    return out


def _points_in_polygon_numpy(xs, ys, poly):
    px = poly[:, 0]
    py = poly[:, 1]
    qx = np.roll(px, 1)
    qy = np.roll(py, 1)
    y = ys[:, None]
    x = xs[:, None]
    crosses = (py[None, :] > y) != (qy[None, :] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = (qx - px)[None, :] * (y - py[None, :]) / (qy - py)[None, :] + px[None, :]
    hits = crosses & (x < xcross)
    return (hits.sum(axis=1) % 2).astype(bool)


def _points_edge_distance_loop(xs, ys, poly):
    n = poly.shape[0]
    m = xs.shape[0]
    out = np.empty(m, dtype=np.float64)
    for k in range(m):
        best = np.inf
        j = n - 1
        for i in range(n):
            d, _ = _seg_point_dist_sq(xs[k], ys[k], poly[j, 0], poly[j, 1], poly[i, 0], poly[i, 1])
            if d < best:
                best = d
            j = i
        out[k] = math.sqrt(best)
    return out


def _points_edge_distance_numpy(xs, ys, poly):
    a = poly
    b = np.roll(poly, -1, axis=0)
    d = b - a  # (n,2)
    dd = np.maximum((d * d).sum(axis=1), _EPS)
    pts = np.stack([xs, ys], axis=1)  # (m,2)
    rel = pts[:, None, :] - a[None, :, :]  # (m,n,2)
    u = np.clip((rel * d[None, :, :]).sum(axis=2) / dd[None, :], 0.0, 1.0)
    closest = a[None, :, :] + u[:, :, None] * d[None, :, :]
    diff = pts[:, None, :] - closest
    return np.sqrt((diff * diff).sum(axis=2).min(axis=1))


# ---------------------------------------------------------------------------
# polygon predicates


def _polygon_self_intersects_loop(poly):
    n = poly.shape[0]
    for i in range(n):
        inext = (i + 1) % n
        for j in range(i + 1, n):
            jnext = (j + 1) % n
            # skip adjacent edges (shared endpoint) including the wrap pair
            if j == i or jnext == i or inext == j:
                continue
            if _segments_intersect(
                poly[i, 0], poly[i, 1], poly[inext, 0], poly[inext, 1],
                poly[j, 0], poly[j, 1], poly[jnext, 0], poly[jnext, 1],
            ):
                return True
    return False


def _polygons_boundary_cross_loop(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    for i in range(na):
        inext = (i + 1) % na
        for j in range(nb):
            jnext = (j + 1) % nb
            if _segments_intersect(
                a[i, 0], a[i, 1], a[inext, 0], a[inext, 1],
                b[j, 0], b[j, 1], b[jnext, 0], b[jnext, 1],
            ):
                return True
    return False


def _polygon_self_intersects_numpy(poly):
    n = poly.shape[0]
    for i in range(n):
        inext = (i + 1) % n
        for j in range(i + 1, n):
            jnext = (j + 1) % n
            if j == i or jnext == i or inext == j:
                continue
            if _segments_intersect(
                poly[i, 0], poly[i, 1], poly[inext, 0], poly[inext, 1],
                poly[j, 0], poly[j, 1], poly[jnext, 0], poly[jnext, 1],
            ):
                return True
    return False


def _polygons_boundary_cross_numpy(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    for i in range(na):
        inext = (i + 1) % na
        for j in range(nb):
            jnext = (j + 1) % nb
            if _segments_intersect(
                a[i, 0], a[i, 1], a[inext, 0], a[inext, 1],
                b[j, 0], b[j, 1], b[jnext, 0], b[jnext, 1],
            ):
                return True
    return False


# ---------------------------------------------------------------------------
# polyline kernels (conflict point, PSM timing)


def _first_polyline_intersection_loop(a, b):
    """First intersection of polyline a with polyline b, scanning a's
    segments in order (ties within one a-segment resolved by b order).

    Returns (found, x, y).
    """
    na = a.shape[0]
    nb = b.shape[0]
    for i in range(na - 1):
        ax, ay = a[i, 0], a[i, 1]
        bx, by = a[i + 1, 0], a[i + 1, 1]
        for j in range(nb - 1):
            cx, cy = b[j, 0], b[j, 1]
            dx, dy = b[j + 1, 0], b[j + 1, 1]
            if _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy):
                rx = bx - ax
                ry = by - ay
                sx = dx - cx
                sy = dy - cy
                denom = rx * sy - ry * sx
                if abs(denom) > _EPS:
                    t = ((cx - ax) * sy - (cy - ay) * sx) / denom
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    return True, ax + t * rx, ay + t * ry
                # parallel overlap: return whichever endpoint lies on the
                # other segment, preferring the earliest along a
                if _on_segment(cx, cy, dx, dy, ax, ay):
                    return True, ax, ay
                if _on_segment(ax, ay, bx, by, cx, cy):
                    return True, cx, cy
                if _on_segment(ax, ay, bx, by, dx, dy):
                    return True, dx, dy
                return True, bx, by
    return False, 0.0, 0.0


def _polyline_closest_point_loop(a, b):
    """Point on polyline a at minimum distance to polyline b.

    Returns (dist, x, y); scan order keeps the earliest minimizer.
    """
    na = a.shape[0]
    nb = b.shape[0]
    best = np.inf
    bx_out = a[0, 0]
    by_out = a[0, 1]
    for i in range(na - 1):
        p0x, p0y = a[i, 0], a[i, 1]
        p1x, p1y = a[i + 1, 0], a[i + 1, 1]
        for j in range(nb - 1):
            q0x, q0y = b[j, 0], b[j, 1]
            q1x, q1y = b[j + 1, 0], b[j + 1, 1]
            # sample candidate closest pairs: endpoints of each segment
            # against the other segment; exact for the segment/segment
            # minimum because it is attained at an endpoint of one segment
            # unless the segments intersect (handled by the caller).
            d, u = _seg_point_dist_sq(q0x, q0y, p0x, p0y, p1x, p1y)
            if d < best:
                best = d
                bx_out = p0x + u * (p1x - p0x)
                by_out = p0y + u * (p1y - p0y)
            d, u = _seg_point_dist_sq(q1x, q1y, p0x, p0y, p1x, p1y)
            if d < best:
                best = d
                bx_out = p0x + u * (p1x - p0x)
                by_out = p0y + u * (p1y - p0y)
            d, _ = _seg_point_dist_sq(p0x, p0y, q0x, q0y, q1x, q1y)
            if d < best:
                best = d
                bx_out = p0x
                by_out = p0y
            d, _ = _seg_point_dist_sq(p1x, p1y, q0x, q0y, q1x, q1y)
            if d < best:
                best = d
                bx_out = p1x
                by_out = p1y
    return math.sqrt(best), bx_out, by_out


def _closest_approach_time_loop(pts, ts, px, py):
    """Earliest linearly-interpolated time at which the polyline attains its
    minimum distance to point (px, py). Returns (dist, t_star)."""
    n = pts.shape[0]
    best = np.inf
    t_star = ts[0]
    for i in range(n - 1):
        d, u = _seg_point_dist_sq(px, py, pts[i, 0], pts[i, 1], pts[i + 1, 0], pts[i + 1, 1])
        if d < best - _EPS:
            best = d
            t_star = ts[i] + u * (ts[i + 1] - ts[i])
    return math.sqrt(best), t_star


def _first_polyline_intersection_numpy(a, b):
    return _first_polyline_intersection_loop(a, b)


def _polyline_closest_point_numpy(a, b):
    # vectorized over b's segments for each segment of a
    na = a.shape[0]
    q0 = b[:-1]
    q1 = b[1:]
    dq = q1 - q0
    ddq = np.maximum((dq * dq).sum(axis=1), _EPS)
    best = np.inf
    out = (a[0, 0], a[0, 1])
    for i in range(na - 1):
        p0 = a[i]
        p1 = a[i + 1]
        dp = p1 - p0
        ddp = max(float(dp @ dp), _EPS)
        for q in (q0, q1):
            u = np.clip(((q - p0) @ dp) / ddp, 0.0, 1.0)
            closest = p0[None, :] + u[:, None] * dp[None, :]
            d2 = ((q - closest) ** 2).sum(axis=1)
            k = int(np.argmin(d2))
            if d2[k] < best:
                best = float(d2[k])
                out = (float(closest[k, 0]), float(closest[k, 1]))
        for p in (p0, p1):
            u = np.clip(((p[None, :] - q0) * dq).sum(axis=1) / ddq, 0.0, 1.0)
            closest = q0 + u[:, None] * dq
            d2 = ((p[None, :] - closest) ** 2).sum(axis=1)
            k = int(np.argmin(d2))
            if d2[k] < best:
                best = float(d2[k])
                out = (float(p[0]), float(p[1]))
    return math.sqrt(best), out[0], out[1]


def _closest_approach_time_numpy(pts, ts, px, py):
    p0 = pts[:-1]
    d = pts[1:] - p0
    dd = np.maximum((d * d).sum(axis=1), _EPS)
    rel = np.array([px, py])[None, :] - p0
    u = np.clip((rel * d).sum(axis=1) / dd, 0.0, 1.0)
    closest = p0 + u[:, None] * d
    diff = np.array([px, py])[None, :] - closest
    d2 = (diff * diff).sum(axis=1)
    # earliest strict minimum, matching the loop kernel's tolerance
    best = np.inf
    k_best = 0
    for k in range(d2.shape[0]):
        if d2[k] < best - _EPS:
            best = d2[k]
            k_best = k
    t_star = ts[k_best] + u[k_best] * (ts[k_best + 1] - ts[k_best])
    return math.sqrt(best), float(t_star)


# ---------------------------------------------------------------------------
# dispatch

if NUMBA_ENABLED:
    points_in_polygon = _jit(_points_in_polygon_loop)
    points_edge_distance = _jit(_points_edge_distance_loop)
    polygon_self_intersects = _jit(_polygon_self_intersects_loop)
    polygons_boundary_cross = _jit(_polygons_boundary_cross_loop)
    first_polyline_intersection = _jit(_first_polyline_intersection_loop)
    polyline_closest_point = _jit(_polyline_closest_point_loop)
    closest_approach_time = _jit(_closest_approach_time_loop)
else:
    points_in_polygon = _points_in_polygon_numpy
    points_edge_distance = _points_edge_distance_numpy
    polygon_self_intersects = _polygon_self_intersects_numpy
    polygons_boundary_cross = _polygons_boundary_cross_numpy
    first_polyline_intersection = _first_polyline_intersection_numpy
    polyline_closest_point = _polyline_closest_point_numpy
    closest_approach_time = _closest_approach_time_numpy


NUMPY_IMPLS = {
    "points_in_polygon": _points_in_polygon_numpy,
    "points_edge_distance": _points_edge_distance_numpy,
    "polygon_self_intersects": _polygon_self_intersects_numpy,
    "polygons_boundary_cross": _polygons_boundary_cross_numpy,
    "first_polyline_intersection": _first_polyline_intersection_numpy,
    "polyline_closest_point": _polyline_closest_point_numpy,
    "closest_approach_time": _closest_approach_time_numpy,
}

LOOP_IMPLS = {
    "points_in_polygon": _points_in_polygon_loop,
    "points_edge_distance": _points_edge_distance_loop,
    "polygon_self_intersects": _polygon_self_intersects_loop,
    "polygons_boundary_cross": _polygons_boundary_cross_loop,
    "first_polyline_intersection": _first_polyline_intersection_loop,
    "polyline_closest_point": _polyline_closest_point_loop,
    "closest_approach_time": _closest_approach_time_loop,
}
