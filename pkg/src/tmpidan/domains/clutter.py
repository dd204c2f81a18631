"""Table-top clutter: grasp a target, moving blockers to storage or pushing them."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NoFeasibleAngle, PackingFailure
from ..graph import ActionSpec, AugmentedArcSpec, HyperArc, Node, NodeKind, build
from ..heuristic import objects_to_rearrange
from ..planner import STANDARD_GOALS, Binding, DomainTemplate
from ..workspace import (
    FIXTURE,
    GRASPABLE,
    HELD,
    PUSHABLE_ONLY,
    STORAGE,
    TABLE,
    TARGET,
    ArmModel,
    Box,
    Disc,
    ObjectModel,
    Pose,
    Rect,
    RobotModel,
    Scenario,
    WorkspaceSnapshot,
    WorldParams,
)

TABLE_RECT = Rect(0.0, 0.0, 0.9, 0.6)
STORAGE_RECT = Rect(1.06, -0.05, 1.66, 0.55)
GRIPPER = 0.05
RADIUS_RANGE = (0.02, 0.04)
MAX_TRIES = 10_000
MAX_CANDIDATES = 3

LABELS = (
    "grasped_target_object",
    "grasped_object_closest_target_object",
    "grasped_object_closest_to_arms",
    "pushed_largest_object",
    "placed_object_storage_area",
    "END",
)


def baxter() -> RobotModel:
    """Two-armed robot at the near long edge; only the right arm reaches storage."""
    return RobotModel(
        id="baxter",
        base=Pose(0.45, -0.15, math.pi / 2),
        arms=(ArmModel("left", (0.25, -0.05), 0.8), ArmModel("right", (0.65, -0.05), 0.8)),
        gripper_radius=GRIPPER,
    )


_PANDA_SITES = (
    (Pose(0.45, -0.15, math.pi / 2), (0.45, -0.05)),
    (Pose(0.45, 0.75, -math.pi / 2), (0.45, 0.65)),
    (Pose(-0.15, 0.30, 0.0), (-0.05, 0.30)),
    (Pose(1.05, 0.30, math.pi), (0.95, 0.30)),
)


def pandas(n: int) -> tuple:
    """``n`` single-arm robots around the table."""
    if not 1 <= n <= len(_PANDA_SITES):
        raise ValueError("between 1 and 4 robots are supported")
    out = []
    for i in range(n):
        base, reach = _PANDA_SITES[i]
        out.append(RobotModel(f"R{i + 1}", base, (ArmModel(f"R{i + 1}.arm", reach, 0.9),), GRIPPER))
    return tuple(out)


def _keep_out_points(ws: WorkspaceSnapshot) -> list:
    """Arm rest poses and handover points must stay clear of clutter."""
    pts = []
    for r in ws.robots:
        for a in r.arms:
            pts.append(ws.arm_home(a.id, GRIPPER))
        if len(r.arms) == 2:
            a, b = r.arms
            mid = ((a.reach_center[0] + b.reach_center[0]) / 2, (a.reach_center[1] + b.reach_center[1]) / 2)
            pts.append(ws.table.clamp(mid, GRIPPER + RADIUS_RANGE[1] + ws.params.home_margin))
    return pts


def generate_clutter(n_objects: int, n_robots: int = 1, seed: int = 0, n_targets: int | None = None) -> Scenario:
    """Rejection-sample non-overlapping discs; the seed fixes everything."""
    if n_objects < 1:
        raise ValueError("need at least one object")
    if not 1 <= n_robots <= 4:
        raise ValueError("between 1 and 4 robots are supported")
    n_targets = n_robots if n_targets is None else n_targets
    rng = np.random.default_rng(seed)
    robots = (baxter(),) if n_robots == 1 else pandas(n_robots)
    params = WorldParams()
    ws = WorkspaceSnapshot(TABLE_RECT, STORAGE_RECT, (), robots, params=params)
    keep = np.array(_keep_out_points(ws))
    keep_r = GRIPPER + RADIUS_RANGE[1] + 0.01
    centers = np.zeros((0, 2))
    radii = np.zeros(0)
    gap = 0.002
    for _ in range(n_objects):
        for _ in range(MAX_TRIES):
            r = rng.uniform(*RADIUS_RANGE)
            c = np.array([rng.uniform(TABLE_RECT.xmin + r, TABLE_RECT.xmax - r),
                          rng.uniform(TABLE_RECT.ymin + r, TABLE_RECT.ymax - r)])
            if len(keep) and np.min(np.hypot(*(keep - c).T)) < keep_r + r:
                continue
            if len(radii) and np.any(np.hypot(*(centers - c).T) < radii + r + gap):
                continue
            centers = np.vstack([centers, c])
            radii = np.append(radii, r)
            break
        else:
            raise PackingFailure(f"could not place object {len(radii) + 1} of {n_objects} in {MAX_TRIES} tries")
    threshold = params.push_ratio * GRIPPER
    objects = []
    for i, (c, r) in enumerate(zip(centers, radii)):
        cat = PUSHABLE_ONLY if 2 * r > threshold else GRASPABLE
        objects.append(ObjectModel(f"o{i + 1}", Disc(float(r)), Pose(float(c[0]), float(c[1])), cat))
    graspable = [o.id for o in objects if o.category == GRASPABLE]
    if len(graspable) < n_targets:
        raise PackingFailure("not enough graspable objects to pick targets from")
    picks = sorted(rng.choice(len(graspable), size=n_targets, replace=False).tolist())
    targets = tuple(graspable[i] for i in picks)
    objects = [o if o.id not in targets else ObjectModel(o.id, o.shape, o.pose, TARGET) for o in objects]
    snap = WorkspaceSnapshot(TABLE_RECT, STORAGE_RECT, tuple(objects), robots, params=params)
    return Scenario(snapshot=snap, targets=targets, seed=seed, name=f"clutter-{n_objects}-{seed}")


def two_blocker_scene(seed: int = 0) -> Scenario:
    """Target at the end of a walled channel with two blockers in series.

    The far blocker cannot be grasped until the near one is gone, and the
    target needs both removed, so an ideal run needs three graphs.
    """
    wall_y = (0.20, 0.60)
    h = (wall_y[1] - wall_y[0]) / 2
    cy = (wall_y[0] + wall_y[1]) / 2
    objects = (
        ObjectModel("wall_l", Box(0.03, h), Pose(0.33, cy), FIXTURE),
        ObjectModel("wall_r", Box(0.03, h), Pose(0.57, cy), FIXTURE),
        ObjectModel("target", Disc(0.03), Pose(0.45, 0.50), TARGET),
        ObjectModel("A", Disc(0.03), Pose(0.45, 0.38), GRASPABLE),
        ObjectModel("B", Disc(0.03), Pose(0.45, 0.26), GRASPABLE),
    )
    snap = WorkspaceSnapshot(TABLE_RECT, STORAGE_RECT, objects, (baxter(),))
    return Scenario(snapshot=snap, targets=("target",), seed=seed, name="two-blocker")


# ---------------------------------------------------------------------------
# binding


def _robot_holding(ws: WorkspaceSnapshot, ctx: dict) -> list:
    robot = ws.robot(ctx["robot"])
    return [a.holding for a in robot.arms if a.holding is not None]


def _candidates(ws: WorkspaceSnapshot, ctx: dict, category: str) -> list:
    """Heuristic set first, falling back to every movable object of ``category``."""
    target = ctx["target"]
    held = [o for o in _robot_holding(ws, ctx) if o != target and ws.object(o).category == category]
    if held:
        return [ws.object(o) for o in held]
    tried = ctx.setdefault("tried", set())
    movable = [o for o in ws.objects if o.location == TABLE and o.category == category and o.id != target]
    try:
        marked = objects_to_rearrange(ws.robot(ctx["robot"]), target, ws)
    except NoFeasibleAngle:
        marked = frozenset()
    for pool in ([o for o in movable if o.id in marked], movable):
        fresh = [o for o in pool if o.id not in tried]
        if fresh:
            return fresh
    return movable


def _by_target(ws: WorkspaceSnapshot, ctx: dict, objs: list) -> list:
    t = ws.object(ctx["target"]).xy
    return sorted(objs, key=lambda o: (math.dist(o.xy, t), o.id))


def _role_target(ws, ctx, arg):
    return [ctx["target"]]


def _role_closest_target(ws, ctx, arg):
    return [o.id for o in _by_target(ws, ctx, _candidates(ws, ctx, GRASPABLE))][:MAX_CANDIDATES]


def _role_closest_arms(ws, ctx, arg):
    robot = ws.robot(ctx["robot"])
    homes = [ws.arm_home(a.id, robot.gripper_radius) for a in robot.arms]
    objs = _candidates(ws, ctx, GRASPABLE)
    objs.sort(key=lambda o: (min(math.dist(o.xy, h) for h in homes), o.id))
    return [o.id for o in objs][:MAX_CANDIDATES]


def _role_largest_pushable(ws, ctx, arg):
    objs = _by_target(ws, ctx, _candidates(ws, ctx, PUSHABLE_ONLY))
    objs.sort(key=lambda o: -o.max_dimension)
    return [o.id for o in objs][:MAX_CANDIDATES]


def _role_held(ws, ctx, arg):
    held = _robot_holding(ws, ctx)
    return sorted(held, key=lambda o: o == ctx["target"])


def _target_held(ws, ctx):
    t = ws.object(ctx["target"])
    return t.location == HELD and ws.robot_of_arm(t.held_by).id == ctx["robot"]


def _last_held(ws, ctx):
    oid = ctx.get("last_obj")
    return oid is not None and ws.object(oid).location == HELD


def _last_stored(ws, ctx):
    oid = ctx.get("last_obj")
    return oid is not None and ws.object(oid).location == STORAGE


def _on_fire(label: str, ws: WorkspaceSnapshot, ctx: dict) -> None:
    # a successful rearrangement changes the scene, so earlier failures may now succeed
    if label in ("placed_object_storage_area", "pushed_largest_object"):
        ctx["tried"] = set()


def clutter_template() -> DomainTemplate:
    nodes = [Node(i, lbl) for i, lbl in enumerate(LABELS)]
    kinds = {"pushed_largest_object": NodeKind.FAILURE, "placed_object_storage_area": NodeKind.FAILURE,
             "END": NodeKind.SUCCESS}
    nodes = [Node(n.id, n.label, kinds.get(n.label, NodeKind.INTERNAL)) for n in nodes]
    ids = {n.label: n.id for n in nodes}
    place = (ActionSpec("place", "$held", target="storage"),)
    arcs = [
        HyperArc(0, ids["END"], frozenset({ids["grasped_target_object"]}), (ActionSpec("sense", "$target"),), 1.0),
        HyperArc(1, ids["placed_object_storage_area"], frozenset({ids["grasped_object_closest_target_object"]}), place, 1.0),
        HyperArc(2, ids["placed_object_storage_area"], frozenset({ids["grasped_object_closest_to_arms"]}), place, 1.0),
    ]
    augmented = (
        AugmentedArcSpec("grasped_target_object", (ActionSpec("pick", "$target"),), 0.0),
        AugmentedArcSpec("grasped_object_closest_target_object", (ActionSpec("pick", "$closest_target"),), 1.0),
        AugmentedArcSpec("grasped_object_closest_to_arms", (ActionSpec("pick", "$closest_arms"),), 2.0),
        AugmentedArcSpec("pushed_largest_object", (ActionSpec("push", "$largest_pushable"),), 3.0),
    )
    phi = {
        "INIT": lambda ws, ctx: True,
        "grasped_target_object": _target_held,
        "grasped_object_closest_target_object": _last_held,
        "grasped_object_closest_to_arms": _last_held,
        "pushed_largest_object": lambda ws, ctx: True,
        "placed_object_storage_area": _last_stored,
        "END": _target_held,
    }
    roles = {
        "target": _role_target,
        "closest_target": _role_closest_target,
        "closest_arms": _role_closest_arms,
        "largest_pushable": _role_largest_pushable,
        "held": _role_held,
    }
    binding = Binding(phi=phi, goals=dict(STANDARD_GOALS), roles=roles, on_fire=_on_fire)
    return DomainTemplate("clutter", build(nodes, arcs), augmented, binding, ("left", "right"))
