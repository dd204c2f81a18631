"""Planar geometric predicates used by the workspace, motion and heuristic layers.

Points are plain ``(x, y)`` tuples. Polygons are sequences of points in either
winding order; a polygon with collinear or repeated vertices is allowed and is
treated as the segments joining its vertices.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence, Tuple

Point = Tuple[float, float]
Polygon = Sequence[Point]

EPS = 1e-12


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def unit(angle: float) -> Point:
    return (math.cos(angle), math.sin(angle))


def rotate(p: Point, angle: float) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    return (c * p[0] - s * p[1], s * p[0] + c * p[1])


def segment_point_distance(a: Point, b: Point, p: Point) -> float:
    """Euclidean distance from ``p`` to the closed segment ``ab``."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    denom = dx * dx + dy * dy
    if denom <= EPS:
        return dist(a, p)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(a[0] + t * dx - p[0], a[1] + t * dy - p[1])


def _on_segment(a: Point, b: Point, p: Point) -> bool:
    return (
        min(a[0], b[0]) - EPS <= p[0] <= max(a[0], b[0]) + EPS
        and min(a[1], b[1]) - EPS <= p[1] <= max(a[1], b[1]) + EPS
    )


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    d1 = cross(c, d, a)
    d2 = cross(c, d, b)
    d3 = cross(a, b, c)
    d4 = cross(a, b, d)
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and (
        (d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)
    ):
        return True
    if abs(d1) <= EPS and _on_segment(c, d, a):
        return True
    if abs(d2) <= EPS and _on_segment(c, d, b):
        return True
    if abs(d3) <= EPS and _on_segment(a, b, c):
        return True
    if abs(d4) <= EPS and _on_segment(a, b, d):
        return True
    return False


def segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        segment_point_distance(a, b, c),
        segment_point_distance(a, b, d),
        segment_point_distance(c, d, a),
        segment_point_distance(c, d, b),
    )


def edges(poly: Polygon) -> Iterable[Tuple[Point, Point]]:
    n = len(poly)
    for i in range(n):
        yield poly[i], poly[(i + 1) % n]


def polygon_area(poly: Polygon) -> float:
    s = 0.0
    for a, b in edges(poly):
        s += a[0] * b[1] - b[0] * a[1]
    return 0.5 * s


def point_in_polygon(p: Point, poly: Polygon) -> bool:
    """Even-odd ray casting; points on the boundary count as inside."""
    for a, b in edges(poly):
        if segment_point_distance(a, b, p) <= EPS:
            return True
    inside = False
    x, y = p
    for (x1, y1), (x2, y2) in edges(poly):
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xi > x:
                inside = not inside
    return inside


def point_polygon_distance(p: Point, poly: Polygon) -> float:
    """Zero inside the polygon, distance to the nearest edge outside."""
    if abs(polygon_area(poly)) > EPS and point_in_polygon(p, poly):
        return 0.0
    return min(segment_point_distance(a, b, p) for a, b in edges(poly))


def segment_polygon_distance(a: Point, b: Point, poly: Polygon) -> float:
    if abs(polygon_area(poly)) > EPS and (point_in_polygon(a, poly) or point_in_polygon(b, poly)):
        return 0.0
    return min(segment_segment_distance(a, b, c, d) for c, d in edges(poly))


def polygon_distance(p: Polygon, q: Polygon) -> float:
    """Minimum distance between two polygons (zero when they overlap)."""
    if abs(polygon_area(p)) > EPS and point_in_polygon(q[0], p):
        return 0.0
    if abs(polygon_area(q)) > EPS and point_in_polygon(p[0], q):
        return 0.0
    best = math.inf
    for a, b in edges(p):
        for c, d in edges(q):
            best = min(best, segment_segment_distance(a, b, c, d))
            if best == 0.0:
                return 0.0
    return best


def box_corners(center: Point, hx: float, hy: float, yaw: float = 0.0) -> list[Point]:
    corners = [(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)]
    out = []
    for c in corners:
        r = rotate(c, yaw)
        out.append((center[0] + r[0], center[1] + r[1]))
    return out


def ray_disc_interval(origin: Point, direction: Point, center: Point, radius: float) -> Optional[Tuple[float, float]]:
    """Parameters ``(t_near, t_far)`` where the ray meets the disc, or None.

    ``direction`` must be a unit vector. Only intersections with ``t_far > 0``
    are reported.
    """
    ox, oy = origin[0] - center[0], origin[1] - center[1]
    b = ox * direction[0] + oy * direction[1]
    c = ox * ox + oy * oy - radius * radius
    disc = b * b - c
    if disc < 0:
        return None
    root = math.sqrt(disc)
    t0, t1 = -b - root, -b + root
    if t1 <= 0:
        return None
    return max(t0, 0.0), t1


def ray_polygon_interval(origin: Point, direction: Point, poly: Polygon) -> Optional[Tuple[float, float]]:
    """Near/far ray parameters of a convex polygon, or None if missed."""
    ts = []
    for a, b in edges(poly):
        t = _ray_edge_hit(origin, direction, a, b)
        if t is not None:
            ts.append(t)
    if abs(polygon_area(poly)) > EPS and point_in_polygon(origin, poly):
        ts.append(0.0)
    if not ts:
        return None
    t0, t1 = min(ts), max(ts)
    if t1 <= 0:
        return None
    return max(t0, 0.0), t1


def _ray_edge_hit(p: Point, r: Point, a: Point, b: Point) -> Optional[float]:
    sx, sy = b[0] - a[0], b[1] - a[1]
    denom = r[0] * sy - r[1] * sx
    if abs(denom) <= EPS:
        return None
    qpx, qpy = a[0] - p[0], a[1] - p[1]
    t = (qpx * sy - qpy * sx) / denom
    u = (qpx * r[1] - qpy * r[0]) / denom
    if t >= -EPS and -EPS <= u <= 1 + EPS:
        return max(t, 0.0)
    return None


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi
