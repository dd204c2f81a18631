"""Independent reference implementations used only by the tests.

They deliberately share no geometry code with the package: footprints go
through shapely, reachability through a plain breadth-first search, and the
heuristic and allocation checks re-derive their answers by brute force.
"""

from __future__ import annotations

import itertools
import math
from collections import deque

import numpy as np
import shapely
from shapely.geometry import LineString, Point, Polygon, box

N_ANGLES = 19
APPROACH = 0.04


def footprint(o):
    """Exact shapely geometry for boxes; discs are kept analytic."""
    if hasattr(o.shape, "radius"):
        return None
    c, s = math.cos(o.pose.yaw), math.sin(o.pose.yaw)
    hx, hy = o.shape.hx, o.shape.hy
    pts = [(o.pose.x + c * x - s * y, o.pose.y + s * x + c * y) for x, y in ((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy))]
    return Polygon(pts)


def blocking(ws, ignore=()):
    return [o for o in ws.objects if o.id not in ignore and o.location not in ("held", "storage")]


def clearance(ws, pts, ignore=()):
    """Distance from each point to the nearest obstacle footprint."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    best = np.full(len(pts), np.inf)
    geoms = shapely.points(pts)
    for o in blocking(ws, ignore):
        poly = footprint(o)
        if poly is None:
            d = np.hypot(pts[:, 0] - o.pose.x, pts[:, 1] - o.pose.y) - o.shape.radius
        else:
            d = shapely.distance(geoms, poly)
            d = np.where(shapely.contains(poly, geoms), -1.0, d)
        best = np.minimum(best, d)
    return best


def in_table(ws, pts, radius):
    t = ws.table
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    return ((pts[:, 0] >= t.xmin + radius) & (pts[:, 0] <= t.xmax - radius)
            & (pts[:, 1] >= t.ymin + radius) & (pts[:, 1] <= t.ymax - radius))


def revalidate(traj, ws, radius, ignore=(), delta=0.005, tol=1e-9):
    """Resample the path every ``delta`` and check every disc pose."""
    wps = [tuple(p) for p in traj.waypoints]
    pts = [wps[0]]
    for a, b in zip(wps, wps[1:]):
        n = max(1, math.ceil(math.dist(a, b) / delta))
        pts += [(a[0] + (b[0] - a[0]) * k / n, a[1] + (b[1] - a[1]) * k / n) for k in range(1, n + 1)]
    pts = np.array(pts)
    return bool(np.all(in_table(ws, pts, radius - tol)) and np.all(clearance(ws, pts, ignore) >= radius - tol))


class Grid:
    """Free-space grid for a disc of ``radius`` with extra ``margin``; 4-connected BFS."""

    def __init__(self, ws, radius, ignore=(), cell=0.005, margin=0.0):
        t = ws.table
        self.cell = cell
        self.x0, self.y0 = t.xmin, t.ymin
        self.nx = int(round(t.width / cell))
        self.ny = int(round(t.height / cell))
        xs = self.x0 + (np.arange(self.nx) + 0.5) * cell
        ys = self.y0 + (np.arange(self.ny) + 0.5) * cell
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        # the margin is kept from obstacles only; the table edge is a hard bound
        ok = in_table(ws, pts, radius) & (clearance(ws, pts, ignore) >= radius + margin)
        self.free = ok.reshape(self.nx, self.ny)

    def index(self, p):
        return (min(self.nx - 1, max(0, int((p[0] - self.x0) / self.cell))),
                min(self.ny - 1, max(0, int((p[1] - self.y0) / self.cell))))

    def reachable(self, start):
        seen = np.zeros_like(self.free)
        s = self.index(start)
        if not self.free[s]:
            return seen
        seen[s] = True
        queue = deque([s])
        while queue:
            i, j = queue.popleft()
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                if 0 <= a < self.nx and 0 <= b < self.ny and self.free[a, b] and not seen[a, b]:
                    seen[a, b] = True
                    queue.append((a, b))
        return seen

    def connected(self, start, goal):
        return bool(self.reachable(start)[self.index(goal)])


# ---------------------------------------------------------------------------
# side grasps


def angles(n=N_ANGLES):
    return [-math.pi / 2 + k * math.pi / (n - 1) for k in range(n)]


def pregrasp(ws, robot, target, ang):
    o = ws.object(target)
    axis = math.atan2(robot.base.y - o.pose.y, robot.base.x - o.pose.x)
    g = robot.gripper_radius
    u = (math.cos(axis + ang), math.sin(axis + ang))
    far = o.radius + g + APPROACH
    near = o.radius + g
    return (o.pose.x + far * u[0], o.pose.y + far * u[1]), (o.pose.x + near * u[0], o.pose.y + near * u[1])


def reach_ok(ws, robot, target, ang):
    """Some arm reaches the pre-grasp pose and the approach stays on the table."""
    q, contact = pregrasp(ws, robot, target, ang)
    g = robot.gripper_radius
    inside = bool(in_table(ws, [q, contact], g).all())
    return inside and any(math.dist(a.reach_center, q) <= a.reach_radius for a in robot.arms)


def ray_hit(c, u, o):
    """Entry and exit distances of the ray c + t u (t >= 0) through ``o``."""
    poly = footprint(o)
    if poly is None:
        fx, fy = c[0] - o.pose.x, c[1] - o.pose.y
        b = fx * u[0] + fy * u[1]
        disc = b * b - (fx * fx + fy * fy - o.shape.radius ** 2)
        if disc < 0:
            return None
        r = math.sqrt(disc)
        t0, t1 = -b - r, -b + r
        if t1 < 0:
            return None
        return max(t0, 0.0), t1
    far = 10.0
    seg = LineString([c, (c[0] + far * u[0], c[1] + far * u[1])])
    inter = seg.intersection(poly)
    if inter.is_empty:
        return None
    ts = [math.dist(c, p) for p in _coords(inter)]
    return min(ts), max(ts)


def _coords(geom):
    if hasattr(geom, "geoms"):
        for g in geom.geoms:
            yield from _coords(g)
    else:
        yield from geom.coords


def heuristic_set(ws, robot, target, inflation=None):
    """Brute-force rearrangement set for one robot-target pair."""
    feasible = [a for a in angles() if reach_ok(ws, robot, target, a)]
    if not feasible:
        return None
    alpha, beta = max(feasible), min(feasible)
    o = ws.object(target)
    c = (o.pose.x, o.pose.y)
    g = robot.gripper_radius
    axis = math.atan2(robot.base.y - c[1], robot.base.x - c[0])
    cap = math.dist(c, (robot.base.x, robot.base.y))
    standoff = o.radius + g + APPROACH
    others = [x for x in ws.objects if x.location == "table" and x.id != target and x.category != "fixture"]
    ends = []
    for ang in (alpha, beta):
        u = (math.cos(axis + ang), math.sin(axis + ang))
        far = 0.0
        for x in others:
            hit = ray_hit(c, u, x)
            if hit is not None and hit[0] < cap:
                far = max(far, hit[1] + g)
        t = max(standoff, min(far, cap))
        ends.append((c[0] + t * u[0], c[1] + t * u[1]))
    tri = Polygon([c, *ends])
    if tri.area <= 1e-12:
        # equal rays give one segment, opposite rays a segment through the center
        tri = LineString([c, *ends])
    infl = g if inflation is None else inflation
    out = set()
    for x in others:
        poly = footprint(x)
        if poly is None:
            d = tri.distance(Point(x.pose.x, x.pose.y)) - x.shape.radius
        else:
            d = tri.distance(poly)
        if d <= infl:
            out.add(x.id)
    return frozenset(out)


# ---------------------------------------------------------------------------
# allocation


def brute_force_allocation(robots, tasks, raw):
    """Best combined utility over every task order and robot choice per step."""
    best = -1.0
    for order in itertools.permutations(tasks):
        for choice in itertools.product(robots, repeat=len(tasks)):
            credited = set()
            total = 0.0
            for t, r in zip(order, choice):
                k = len(raw[(r, t)] - credited)
                total += 1.0 / (1.0 + k)
                credited |= raw[(r, t)]
            best = max(best, total)
    return best


def table_rect(ws):
    t = ws.table
    return box(t.xmin, t.ymin, t.xmax, t.ymax)
