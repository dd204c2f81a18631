"""Scene builders shared by the unit and acceptance tests."""

from __future__ import annotations

import itertools
import math

import numpy as np
import oracles

from tmpidan.domains.clutter import STORAGE_RECT, TABLE_RECT, baxter, generate_clutter
from tmpidan.motion import MotionDomain, PointGoal
from tmpidan.workspace import (
    FIXTURE,
    GRASPABLE,
    ArmModel,
    Box,
    Disc,
    TARGET,
    ObjectModel,
    Pose,
    RobotModel,
    Scenario,
    WorkspaceSnapshot,
)

GRIPPER = 0.05


def solo_robot(reach=2.0, gripper=GRIPPER, base=(0.45, -0.15), center=(0.45, -0.05)) -> RobotModel:
    return RobotModel("solo", Pose(base[0], base[1], math.pi / 2), (ArmModel("arm", center, reach),), gripper)


def workspace(objects=(), robots=None) -> WorkspaceSnapshot:
    return WorkspaceSnapshot(TABLE_RECT, STORAGE_RECT, tuple(objects), robots or (solo_robot(),))


def disc(oid, x, y, r=0.03, category=GRASPABLE, **kw) -> ObjectModel:
    return ObjectModel(oid, Disc(r), Pose(x, y), category, **kw)


def corridor(gap: float, wall_x: float = 0.45, hx: float = 0.02):
    """A wall across the table with one opening of width ``gap`` centred at y = 0.3.

    Returns the motion domain for moving between opposite corners of the two
    halves, so no straight segment joins start and goal.
    """
    t = TABLE_RECT
    lo_top = 0.3 - gap / 2
    hi_bot = 0.3 + gap / 2
    walls = (
        ObjectModel("wall_lo", Box(hx, lo_top / 2), Pose(wall_x, lo_top / 2), FIXTURE),
        ObjectModel("wall_hi", Box(hx, (t.ymax - hi_bot) / 2), Pose(wall_x, (t.ymax + hi_bot) / 2), FIXTURE),
    )
    ws = workspace(walls)
    dom = MotionDomain(ws, "arm", GRIPPER, PointGoal((0.75, 0.5), 0.01))
    return dom, (0.15, 0.1)


def oracle_solvable(sc, max_blockers=3, margin=0.02) -> bool:
    """Conservative solvability check for a single-target clutter scene.

    Blockers are the brute-force heuristic set. Every blocker must be
    graspable, and some removal order must exist in which each next object
    (and finally the target) has a side-grasp pose joined to an arm's rest
    pose by a grid path keeping ``margin`` of extra clearance.
    """
    ws = sc.snapshot
    robot = ws.robots[0]
    target = sc.targets[0]
    blockers = oracles.heuristic_set(ws, robot, target)
    if blockers is None or len(blockers) > max_blockers:
        return False
    if any(ws.object(b).category != GRASPABLE for b in blockers):
        return False
    removed: set = set()
    pending = set(blockers)
    while True:
        nxt = [b for b in sorted(pending) if _graspable(ws, robot, b, removed, margin)]
        if not nxt:
            break
        removed.add(nxt[0])
        pending.discard(nxt[0])
    return not pending and _graspable(ws, robot, target, removed, margin)


def _graspable(ws, robot, oid, removed, margin) -> bool:
    ignore = set(removed) | {oid}
    grid = oracles.Grid(ws, robot.gripper_radius, ignore=ignore, margin=margin)
    g = robot.gripper_radius
    for arm in robot.arms:
        home = ws.table.clamp(arm.reach_center, g + ws.params.home_margin)
        seen = grid.reachable(home)
        for ang in oracles.angles():
            q, contact = oracles.pregrasp(ws, robot, oid, ang)
            if math.dist(arm.reach_center, q) > arm.reach_radius:
                continue
            if not seen[grid.index(q)]:
                continue
            seg = [(q[0] + (contact[0] - q[0]) * k / 20, q[1] + (contact[1] - q[1]) * k / 20) for k in range(21)]
            if (oracles.clearance(ws, seg, ignore) >= g + margin).all() and oracles.in_table(ws, seg, g).all():
                return True
    return False


def solvable_instances(count: int, n_objects: int = 8, start_seed: int = 0, max_blockers: int = 3):
    out = []
    seed = start_seed
    while len(out) < count:
        sc = generate_clutter(n_objects, seed=seed)
        if oracle_solvable(sc, max_blockers):
            out.append(sc)
        seed += 1
    return out


def needs_two(sc, margin=0.02) -> bool:
    """The target is ungraspable after removing any one object but graspable after a removal chain of two."""
    ws = sc.snapshot
    robot = ws.robots[0]
    target = sc.targets[0]
    movable = [o.id for o in ws.objects if o.category == GRASPABLE]
    if _graspable(ws, robot, target, set(), 0.0):
        return False
    if any(_graspable(ws, robot, target, {m}, 0.0) for m in movable):
        return False
    for a, b in itertools.permutations(movable, 2):
        if (_graspable(ws, robot, a, set(), margin) and _graspable(ws, robot, b, {a}, margin)
                and _graspable(ws, robot, target, {a, b}, margin)):
            return True
    return False


def channel_scene(seed: int):
    """Randomized walled channel: target at the closed end behind two blockers, plus distractors."""
    rng = np.random.default_rng(seed)
    cx = float(rng.uniform(0.30, 0.60))
    half = float(rng.uniform(0.115, 0.13))
    ty = float(rng.uniform(0.49, 0.51))
    r_t, r_a, r_b = (float(v) for v in rng.uniform(0.025, 0.035, 3))
    ya = ty - r_t - r_a - float(rng.uniform(0.03, 0.05))
    yb = ya - r_a - r_b - float(rng.uniform(0.03, 0.05))
    wall_y = (yb - r_b - 0.01, 0.60)
    h = (wall_y[1] - wall_y[0]) / 2
    cy = (wall_y[0] + wall_y[1]) / 2
    objects = [
        ObjectModel("wall_l", Box(0.03, h), Pose(cx - half, cy), FIXTURE),
        ObjectModel("wall_r", Box(0.03, h), Pose(cx + half, cy), FIXTURE),
        ObjectModel("target", Disc(r_t), Pose(cx, ty), TARGET),
        ObjectModel("A", Disc(r_a), Pose(cx, ya), GRASPABLE),
        ObjectModel("B", Disc(r_b), Pose(cx, yb), GRASPABLE),
    ]
    for i in range(int(rng.integers(0, 4))):
        r = float(rng.uniform(0.02, 0.035))
        for _ in range(200):
            cand = ObjectModel(f"d{i}", Disc(r), Pose(float(rng.uniform(r, 0.9 - r)), float(rng.uniform(0.42, 0.6 - r))))
            if abs(cand.pose.x - cx) > half + 0.03 + r + 0.01 and all(cand.distance_to_object(o) > 0.01 for o in objects):
                objects.append(cand)
                break
    snap = WorkspaceSnapshot(TABLE_RECT, STORAGE_RECT, tuple(objects), (baxter(),))
    return Scenario(snapshot=snap, targets=("target",), seed=seed, name=f"channel-{seed}")


def two_blocker_instances(count: int, start_seed: int = 0):
    out = []
    seed = start_seed
    while len(out) < count:
        sc = channel_scene(seed)
        if needs_two(sc):
            out.append(sc)
        seed += 1
    return out
