"""Planar motion planning for an end-effector disc.

The configuration is the (x, y) center of the acting gripper footprint. Its
collision disc has the gripper radius, grown by the held object's radius
when carrying. The planner is a goal-biased RRT whose budget is converted to
a fixed number of samples, so results depend only on the seed and never on
machine speed. Before sampling, a conservative grid check proves
disconnection cheaply when the goal is enclosed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import ndimage

from . import geometry as geo
from .errors import InvalidStart, OutOfRangeAngle
from .workspace import FIXTURE, HELD, STORAGE, Box, Disc, WorkspaceSnapshot

Configuration = tuple  # (x, y)

STEP = 0.03
GOAL_BIAS = 0.1
DELTA = 0.005
N_ANGLES = 19
APPROACH_LENGTH = 0.04
SAMPLES_PER_MS = 5.0
GRID_CELL = 0.01


def discretized_angles(n: int = N_ANGLES) -> list[float]:
    """``n`` evenly spaced angles covering [-pi/2, pi/2] inclusive."""
    if n == 1:
        return [0.0]
    return [-math.pi / 2 + i * math.pi / (n - 1) for i in range(n)]


@dataclass(frozen=True)
class PointGoal:
    center: Configuration
    eps: float = 0.01

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("goal tolerance must be positive")


@dataclass(frozen=True)
class GraspGoal:
    """Side-grasp approach: pre-grasp pose ``standoff`` away from the target center.

    ``angle`` is measured from the target-to-base direction.
    """

    target: str
    angle: float
    standoff: float
    axis: float  # absolute heading of the target-to-base direction

    @property
    def heading(self) -> float:
        return self.axis + self.angle


GoalRegion = Union[PointGoal, GraspGoal]


@dataclass(frozen=True)
class MotionDomain:
    workspace: WorkspaceSnapshot
    arm: str
    moving_radius: float
    goal: GoalRegion
    ignore: frozenset = frozenset()
    ignore_obstacles: bool = False

    def __post_init__(self):
        if not self.moving_radius > 0:
            raise ValueError("moving radius must be positive")


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple
    cost: float

    @classmethod
    def through(cls, pts: Sequence[Configuration]) -> "Trajectory":
        pts = tuple((float(p[0]), float(p[1])) for p in pts)
        cost = sum(geo.dist(a, b) for a, b in zip(pts, pts[1:]))
        return cls(pts, cost)

    @property
    def start(self) -> Configuration:
        return self.waypoints[0]

    @property
    def end(self) -> Configuration:
        return self.waypoints[-1]

    def at(self, u: float) -> Configuration:
        """Point at arc-length fraction ``u`` in [0, 1]."""
        if self.cost == 0.0 or len(self.waypoints) == 1:
            return self.waypoints[0]
        s = min(max(u, 0.0), 1.0) * self.cost
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            seg = geo.dist(a, b)
            if s <= seg:
                t = s / seg if seg > 0 else 0.0
                return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
            s -= seg
        return self.waypoints[-1]


class FailureModel:
    """Seeded Bernoulli execution failures with probability ``p``."""

    def __init__(self, p: float = 0.0, seed: int = 0):
        if not 0.0 <= p < 1.0:
            raise ValueError("failure probability must lie in [0, 1)")
        self.p = p
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def draw_failure(self) -> bool:
        if self.p == 0.0:
            return False
        return bool(self._rng.random() < self.p)


def simulate_execute(traj: Trajectory, fm: FailureModel) -> bool:
    """True when the execution succeeds; the caller commits the effect."""
    return not fm.draw_failure()


# ---------------------------------------------------------------------------
# obstacles


class Obstacles:
    """Vectorized obstacle set for one motion domain."""

    def __init__(self, domain: MotionDomain):
        ws = domain.workspace
        self.radius = domain.moving_radius
        t = ws.table
        r = self.radius
        self.lo = np.array([t.xmin + r, t.ymin + r])
        self.hi = np.array([t.xmax - r, t.ymax - r])
        discs, polys = [], []
        if not domain.ignore_obstacles:
            for o in obstacle_objects(ws, domain.ignore):
                if isinstance(o.shape, Disc):
                    discs.append((o.pose.x, o.pose.y, o.shape.radius))
                else:
                    poly = o.polygon()
                    if geo.polygon_area(poly) < 0:
                        poly = poly[::-1]
                    polys.append(poly)
        self.discs = np.array(discs, dtype=float).reshape(-1, 3)
        self.polys = np.array(polys, dtype=float).reshape(-1, 4, 2)
        if len(self.polys):
            a = self.polys
            b = np.roll(self.polys, -1, axis=1)
            self.edges = np.concatenate([a, b], axis=2).reshape(-1, 4)
        else:
            self.edges = np.zeros((0, 4))

    def in_bounds(self, q) -> bool:
        return bool(np.all(q >= self.lo - 1e-12) and np.all(q <= self.hi + 1e-12))

    def clearance(self, pts: np.ndarray) -> np.ndarray:
        """Distance from each point to the nearest obstacle footprint."""
        pts = np.atleast_2d(pts)
        best = np.full(len(pts), np.inf)
        if len(self.discs):
            d = np.hypot(pts[:, None, 0] - self.discs[None, :, 0], pts[:, None, 1] - self.discs[None, :, 1])
            best = np.minimum(best, (d - self.discs[None, :, 2]).min(axis=1))
        if len(self.edges):
            d = _point_segment_dist(pts[:, None, :], self.edges[None, :, :2], self.edges[None, :, 2:])
            best = np.minimum(best, d.min(axis=1))
            best[_inside_any(pts, self.polys)] = 0.0
        return best

    def point_free(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        if not self.in_bounds(q):
            return False
        return bool(self.clearance(q[None, :])[0] >= self.radius)

    def segment_free(self, a, b) -> bool:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        # the valid region is a box, so endpoint checks cover the segment
        if not (self.in_bounds(a) and self.in_bounds(b)):
            return False
        r = self.radius
        if len(self.discs):
            d = _point_segment_dist(self.discs[:, :2], a[None, :], b[None, :])
            if np.any(d - self.discs[:, 2] < r):
                return False
        if len(self.edges):
            d = _segment_segment_dist(a, b, self.edges[:, :2], self.edges[:, 2:])
            if np.any(d < r):
                return False
            if np.any(_inside_any(np.stack([a, b]), self.polys)):
                return False
        return True


def _point_segment_dist(p, a, b):
    ab = b - a
    denom = np.maximum((ab * ab).sum(axis=-1), 1e-300)
    t = np.clip(((p - a) * ab).sum(axis=-1) / denom, 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(p - proj, axis=-1)


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _segment_segment_dist(a, b, c, d):
    """Distance between segment ab and each segment c[i]d[i]."""
    a2 = np.broadcast_to(a, c.shape)
    b2 = np.broadcast_to(b, c.shape)
    d1 = _cross2(d - c, a2 - c)
    d2 = _cross2(d - c, b2 - c)
    d3 = _cross2(b2 - a2, c - a2)
    d4 = _cross2(b2 - a2, d - a2)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    dist = np.minimum.reduce(
        [
            _point_segment_dist(a2, c, d),
            _point_segment_dist(b2, c, d),
            _point_segment_dist(c, a2, b2),
            _point_segment_dist(d, a2, b2),
        ]
    )
    return np.where(crossing, 0.0, dist)


def _inside_any(pts: np.ndarray, polys: np.ndarray) -> np.ndarray:
    """Point-in-convex-polygon for counter-clockwise quads."""
    if len(polys) == 0:
        return np.zeros(len(pts), dtype=bool)
    a = polys[None, :, :, :]
    b = np.roll(polys, -1, axis=1)[None, :, :, :]
    p = pts[:, None, None, :]
    c = _cross2(b - a, p - a)
    return np.any(np.all(c >= 0, axis=2), axis=1)


def obstacle_objects(ws: WorkspaceSnapshot, ignore: frozenset = frozenset()):
    """Objects that block motion: everything on the table or on fixtures."""
    for o in ws.objects:
        if o.id in ignore or o.location in (HELD, STORAGE):
            continue
        yield o


# ---------------------------------------------------------------------------
# predicates and goals


def collision_free(q: Configuration, domain: MotionDomain) -> bool:
    return Obstacles(domain).point_free(q)


def moving_radius(ws: WorkspaceSnapshot, arm_id: str) -> float:
    robot = ws.robot_of_arm(arm_id)
    held = ws.held_by(arm_id)
    return robot.gripper_radius + (held.radius if held is not None else 0.0)


def grasp_goal(target: str, angle: float, ws: WorkspaceSnapshot, arm_id: str,
               approach: float = APPROACH_LENGTH) -> GraspGoal:
    if not -math.pi / 2 - 1e-12 <= angle <= math.pi / 2 + 1e-12:
        raise OutOfRangeAngle(f"grasp angle {angle:.4f} outside [-pi/2, pi/2]")
    obj = ws.object(target)
    robot = ws.robot_of_arm(arm_id)
    axis = math.atan2(robot.base.y - obj.pose.y, robot.base.x - obj.pose.x)
    standoff = obj.radius + robot.gripper_radius + approach
    return GraspGoal(target=target, angle=angle, standoff=standoff, axis=axis)


def goal_point(goal: GoalRegion, ws: WorkspaceSnapshot) -> Configuration:
    if isinstance(goal, PointGoal):
        return goal.center
    c = ws.object(goal.target).xy
    u = geo.unit(goal.heading)
    return (c[0] + goal.standoff * u[0], c[1] + goal.standoff * u[1])


def contact_point(goal: GraspGoal, ws: WorkspaceSnapshot, arm_id: str) -> Configuration:
    """Where the final straight approach ends: gripper touching the target."""
    obj = ws.object(goal.target)
    r = obj.radius + ws.robot_of_arm(arm_id).gripper_radius
    u = geo.unit(goal.heading)
    return (obj.pose.x + r * u[0], obj.pose.y + r * u[1])


def in_goal(q: Configuration, goal: GoalRegion, ws: WorkspaceSnapshot) -> bool:
    if isinstance(goal, PointGoal):
        return geo.dist(q, goal.center) <= goal.eps
    return geo.dist(q, goal_point(goal, ws)) <= 1e-9


def goal_feasible(domain: MotionDomain, obstacles: Optional[Obstacles] = None) -> bool:
    """Goal pose reachable, collision-free, and (for grasps) approachable."""
    ws = domain.workspace
    obs = obstacles or Obstacles(domain)
    q = goal_point(domain.goal, ws)
    arm = ws.arm(domain.arm)
    if not arm.reaches(q):
        return False
    if not obs.point_free(q):
        return False
    if isinstance(domain.goal, GraspGoal):
        if not obs.segment_free(q, contact_point(domain.goal, ws, domain.arm)):
            return False
    return True


def validate_trajectory(traj: Trajectory, domain: MotionDomain, delta: float = DELTA) -> bool:
    """Re-check every waypoint and points every ``delta`` along each segment."""
    obs = Obstacles(domain)
    pts = [np.asarray(traj.waypoints[0], dtype=float)]
    for a, b in zip(traj.waypoints, traj.waypoints[1:]):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / delta)))
        for i in range(1, n + 1):
            pts.append(a + (b - a) * (i / n))
    pts = np.array(pts)
    if not all(obs.in_bounds(p) for p in pts):
        return False
    return bool(np.all(obs.clearance(pts) >= obs.radius))


# ---------------------------------------------------------------------------
# planners


def _grid_disconnected(obs: Obstacles, start, goal, cell: float) -> bool:
    """True only if no continuous collision-free path can join start and goal.

    A cell is marked blocked when every point in it is certainly invalid,
    using the 1-Lipschitz bound on clearance. Free cells are joined with
    8-connectivity, so a real path always stays inside one component.
    """
    lo, hi = obs.lo, obs.hi
    if np.any(hi < lo):
        return True
    nx = max(1, int(math.ceil((hi[0] - lo[0]) / cell)))
    ny = max(1, int(math.ceil((hi[1] - lo[1]) / cell)))
    xs = lo[0] + (np.arange(nx) + 0.5) * cell
    ys = lo[1] + (np.arange(ny) + 0.5) * cell
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
    half_diag = cell * math.sqrt(0.5)
    blocked = (obs.clearance(centers) + half_diag < obs.radius).reshape(nx, ny)
    labels, _ = ndimage.label(~blocked, structure=np.ones((3, 3), dtype=int))

    def index(p):
        i = min(nx - 1, max(0, int((p[0] - lo[0]) / cell)))
        j = min(ny - 1, max(0, int((p[1] - lo[1]) / cell)))
        return i, j

    ls, lg = labels[index(start)], labels[index(goal)]
    return ls == 0 or lg == 0 or ls != lg


@dataclass
class RRTPlanner:
    """Goal-biased RRT with a deterministic sample budget and call counters."""

    step: float = STEP
    goal_bias: float = GOAL_BIAS
    samples_per_ms: float = SAMPLES_PER_MS
    grid_cell: float = GRID_CELL
    attempts: int = 0
    seconds: float = 0.0
    attempts_by_arm: dict = field(default_factory=dict)

    def plan(self, domain: MotionDomain, start: Configuration, budget_ms: float, seed: int) -> Optional[Trajectory]:
        if budget_ms <= 0:
            raise ValueError("budget must be positive")
        self.attempts += 1
        self.attempts_by_arm[domain.arm] = self.attempts_by_arm.get(domain.arm, 0) + 1
        t0 = time.perf_counter()
        try:
            return self._plan(domain, start, budget_ms, seed)
        finally:
            self.seconds += time.perf_counter() - t0

    def _plan(self, domain, start, budget_ms, seed):
        ws = domain.workspace
        obs = Obstacles(domain)
        start = (float(start[0]), float(start[1]))
        if not obs.point_free(start):
            raise InvalidStart(f"start {start} is in collision")
        if in_goal(start, domain.goal, ws):
            return Trajectory((start,), 0.0)
        if not goal_feasible(domain, obs):
            return None
        goal = goal_point(domain.goal, ws)
        if obs.segment_free(start, goal):
            return Trajectory.through([start, goal])
        if _grid_disconnected(obs, start, goal, self.grid_cell):
            return None
        return self._grow(obs, start, goal, domain.goal, budget_ms, seed)

    def _grow(self, obs, start, goal, region, budget_ms, seed):
        rng = np.random.default_rng(seed)
        n_samples = max(1, int(budget_ms * self.samples_per_ms))
        nodes = np.empty((n_samples + 1, 2))
        parent = np.empty(n_samples + 1, dtype=int)
        nodes[0] = start
        parent[0] = -1
        count = 1
        goal_a = np.asarray(goal)
        span = obs.hi - obs.lo
        eps = region.eps if isinstance(region, PointGoal) else 0.0
        for _ in range(n_samples):
            if rng.random() < self.goal_bias:
                sample = goal_a
            else:
                sample = obs.lo + rng.random(2) * span
            d2 = ((nodes[:count] - sample) ** 2).sum(axis=1)
            near = int(np.argmin(d2))
            dist = math.sqrt(d2[near])
            if dist == 0.0:
                continue
            new = sample if dist <= self.step else nodes[near] + (sample - nodes[near]) * (self.step / dist)
            if not obs.segment_free(nodes[near], new):
                continue
            nodes[count] = new
            parent[count] = near
            count += 1
            gap = float(np.linalg.norm(new - goal_a))
            if gap <= eps or (gap <= self.step and obs.segment_free(new, goal_a)):
                # inside a tolerance region the last node already counts
                path = [] if gap <= eps else [tuple(goal_a)]
                i = count - 1
                while i >= 0:
                    path.append(tuple(nodes[i]))
                    i = parent[i]
                path.reverse()
                return Trajectory.through(path)
        return None


@dataclass
class IdealPlanner:
    """Motion oracle that returns a straight path whenever the goal is in reach."""

    attempts: int = 0
    seconds: float = 0.0
    attempts_by_arm: dict = field(default_factory=dict)

    def plan(self, domain: MotionDomain, start: Configuration, budget_ms: float, seed: int) -> Optional[Trajectory]:
        self.attempts += 1
        self.attempts_by_arm[domain.arm] = self.attempts_by_arm.get(domain.arm, 0) + 1
        t0 = time.perf_counter()
        goal = goal_point(domain.goal, domain.workspace)
        traj = Trajectory.through([start, goal])
        self.seconds += time.perf_counter() - t0
        return traj


def plan(domain: MotionDomain, start: Configuration, budget_ms: float, seed: int) -> Optional[Trajectory]:
    """One-shot RRT query with a throwaway counter."""
    return RRTPlanner().plan(domain, start, budget_ms, seed)
