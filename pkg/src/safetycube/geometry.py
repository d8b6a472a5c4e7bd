"""Polygon and polyline helpers built on the compiled kernels."""

from __future__ import annotations

import numpy as np

from . import kernels


def as_polygon(vertices) -> np.ndarray:
    """Coerce to an open (n,2) float64 ring and validate basic shape."""
    poly = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64))
    if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
        raise ValueError(f"polygon must be (n>=3, 2), got shape {poly.shape}")
    if not np.isfinite(poly).all():
        raise ValueError("polygon has non-finite vertices")
    if np.allclose(poly[0], poly[-1]) and poly.shape[0] > 3:
        poly = poly[:-1]
    return poly


def polygon_area(poly: np.ndarray) -> float:
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def polygon_centroid(poly: np.ndarray) -> np.ndarray:
    """Area centroid; falls back to the vertex mean for degenerate rings."""
    x = poly[:, 0]
    y = poly[:, 1]
    xn = np.roll(x, -1)
    yn = np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    if abs(a) < 1e-12:
        return poly.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def is_simple(poly: np.ndarray) -> bool:
    return not kernels.polygon_self_intersects(poly)


def contains_points(poly: np.ndarray, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Containment test; points within ``tol`` of the boundary count inside."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    xs = np.ascontiguousarray(pts[:, 0])
    ys = np.ascontiguousarray(pts[:, 1])
    inside = kernels.points_in_polygon(xs, ys, poly)
    if tol > 0:
        near = kernels.points_edge_distance(xs, ys, poly) < tol
        inside = inside | near
    return inside


def contains_point(poly: np.ndarray, x: float, y: float, tol: float = 1e-9) -> bool:
    return bool(contains_points(poly, np.array([[x, y]]), tol)[0])


def edge_distances(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    return kernels.points_edge_distance(
        np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), poly
    )


def distance_to_polygon(poly: np.ndarray, pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Distance to the polygon region: 0 inside, edge distance outside."""
    d = edge_distances(poly, pts)
    inside = contains_points(poly, pts, tol)
    d = d.copy()
    d[inside] = 0.0
    return d
