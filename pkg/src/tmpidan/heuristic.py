"""Which objects must move before a robot can side-grasp a target.

A fan of rays is cast from the target toward the robot at the extreme
feasible grasp angles. The triangle they span, grown by the gripper radius,
marks the objects in the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import geometry as geo
from .errors import NoFeasibleAngle
from .motion import APPROACH_LENGTH, MotionDomain, discretized_angles, goal_feasible, grasp_goal, N_ANGLES
from .workspace import FIXTURE, TABLE, Disc, ObjectModel, RobotModel, WorkspaceSnapshot


@dataclass(frozen=True)
class GraspAngleRange:
    alpha: float  # maximum feasible angle
    beta: float  # minimum feasible angle

    def __post_init__(self):
        if not -math.pi / 2 - 1e-12 <= self.beta <= self.alpha <= math.pi / 2 + 1e-12:
            raise ValueError("need -pi/2 <= beta <= alpha <= pi/2")


@dataclass(frozen=True)
class InflatedTriangle:
    """Triangle (target center, two ray ends) offset outward by ``inflation``.

    When both rays coincide the shape degenerates to a capsule around one
    segment; membership is tested the same way.
    """

    vertices: tuple
    inflation: float

    @property
    def degenerate(self) -> bool:
        return abs(geo.polygon_area(self.vertices)) <= 1e-12

    def distance(self, obj: ObjectModel) -> float:
        return obj.distance_to_polygon(list(self.vertices))

    def touches(self, obj: ObjectModel) -> bool:
        return self.distance(obj) <= self.inflation

    def contains_point(self, p: geo.Point) -> bool:
        return geo.point_polygon_distance(p, list(self.vertices)) <= self.inflation


def _robot_arm_ids(robot: RobotModel) -> list[str]:
    return [a.id for a in robot.arms]


def feasible_angles(robot: RobotModel, target: str, ws: WorkspaceSnapshot, n_angles: int = N_ANGLES) -> list[float]:
    """Discretized grasp angles usable by some arm with all obstacles ignored.

    With obstacles gone the table interior is convex, so a straight path from
    the arm's rest pose reaches every valid goal and planning reduces to the
    goal check.
    """
    out = []
    for ang in discretized_angles(n_angles):
        for arm_id in _robot_arm_ids(robot):
            goal = grasp_goal(target, ang, ws, arm_id)
            dom = MotionDomain(ws, arm_id, robot.gripper_radius, goal, ignore_obstacles=True)
            if goal_feasible(dom):
                out.append(ang)
                break
    if not out:
        raise NoFeasibleAngle(f"robot {robot.id} cannot grasp {target} from any side angle")
    return out


def angle_range(robot: RobotModel, target: str, ws: WorkspaceSnapshot, n_angles: int = N_ANGLES) -> GraspAngleRange:
    angles = feasible_angles(robot, target, ws, n_angles)
    return GraspAngleRange(alpha=max(angles), beta=min(angles))


def _ray_obstacles(ws: WorkspaceSnapshot, target: str) -> list[ObjectModel]:
    return [o for o in ws.objects if o.location == TABLE and o.id != target and o.category != FIXTURE]


def ray_length(origin: geo.Point, direction: geo.Point, obstacles, gripper: float, standoff: float, cap: float) -> float:
    """Far edge of the farthest obstacle hit plus ``gripper``, within [standoff, cap]."""
    far = 0.0
    for o in obstacles:
        if isinstance(o.shape, Disc):
            hit = geo.ray_disc_interval(origin, direction, o.xy, o.shape.radius)
        else:
            hit = geo.ray_polygon_interval(origin, direction, o.polygon())
        if hit is not None and hit[0] < cap:
            far = max(far, hit[1] + gripper)
    return max(standoff, min(far, cap))


def build_triangle(target: str, rng: GraspAngleRange, robot: RobotModel, ws: WorkspaceSnapshot,
                   inflation: Optional[float] = None) -> InflatedTriangle:
    obj = ws.object(target)
    g = robot.gripper_radius
    c = obj.xy
    base = robot.base.xy
    axis = math.atan2(base[1] - c[1], base[0] - c[0])
    cap = geo.dist(c, base)
    standoff = obj.radius + g + APPROACH_LENGTH
    obstacles = _ray_obstacles(ws, target)
    ends = []
    for ang in (rng.alpha, rng.beta):
        u = geo.unit(axis + ang)
        t = ray_length(c, u, obstacles, g, standoff, cap)
        ends.append((c[0] + t * u[0], c[1] + t * u[1]))
    return InflatedTriangle((c, ends[0], ends[1]), g if inflation is None else inflation)


def objects_to_rearrange(robot: RobotModel, target: str, ws: WorkspaceSnapshot,
                         inflation: Optional[float] = None, n_angles: int = N_ANGLES) -> frozenset:
    rng = angle_range(robot, target, ws, n_angles)
    tri = build_triangle(target, rng, robot, ws, inflation)
    return frozenset(o.id for o in _ray_obstacles(ws, target) if tri.touches(o))
