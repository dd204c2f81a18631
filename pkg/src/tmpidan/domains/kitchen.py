"""Kitchen chores for a mobile two-armed robot: prepare a cabbage and set the table.

The template is a single unfolded chain. The radish blocking the cabbage is
moved aside and later put back, so it is manipulated twice. Washing and
cooking only flip symbolic tags.
"""

from __future__ import annotations

import math

from ..graph import ActionSpec, AugmentedArcSpec, HyperArc, Node, NodeKind, build
from ..planner import STANDARD_GOALS, Binding, DomainTemplate
from ..workspace import (
    FIXTURE,
    GRASPABLE,
    HELD,
    TABLE,
    TARGET,
    ArmModel,
    Box,
    Destination,
    Disc,
    ObjectModel,
    Pose,
    Rect,
    RobotModel,
    Scenario,
    WorkspaceSnapshot,
)

FLOOR = Rect(0.0, 0.0, 3.0, 2.0)
UNUSED_STORAGE = Rect(3.2, 0.0, 3.6, 0.4)
REACH = 0.7
GRIPPER = 0.04

STATIONS = (
    ("worktable", Pose(0.6, 0.3, math.pi / 2)),
    ("dishwasher", Pose(1.5, 0.3, math.pi / 2)),
    ("microwave", Pose(2.4, 0.3, math.pi / 2)),
    ("meal_table", Pose(1.5, 1.7, -math.pi / 2)),
)
START = Pose(1.5, 1.0, math.pi / 2)

# named table poses used as place destinations
POSES = {
    "radish_home": (0.6, 0.80),
    "radish_aside": (0.28, 0.75),
    "meal_spot_1": (1.42, 1.25),
    "meal_spot_2": (1.62, 1.25),
}

SEQUENCE = (
    ("at_worktable", (ActionSpec("move-base", target="worktable"),)),
    ("radish_aside", (ActionSpec("pick", "radish"), ActionSpec("place", "radish", target="radish_aside"))),
    ("cabbage_staged", (ActionSpec("pick", "cabbage"),)),
    ("radish_restored", (ActionSpec("pick", "radish"), ActionSpec("place", "radish", target="radish_home"))),
    ("cabbage_in_dishwasher", (ActionSpec("move-base", target="dishwasher"),
                               ActionSpec("place", "cabbage", target="dishwasher"))),
    ("cabbage_washed", (ActionSpec("wash", "cabbage"),)),
    ("cabbage_in_microwave", (ActionSpec("pick", "cabbage"), ActionSpec("move-base", target="microwave"),
                              ActionSpec("place", "cabbage", target="microwave"))),
    ("cabbage_cooked", (ActionSpec("cook", "cabbage"),)),
    ("glass_in_dishwasher", (ActionSpec("move-base", target="dishwasher"), ActionSpec("pick", "glass"),
                             ActionSpec("place", "glass", target="dishwasher"))),
    ("glass_washed", (ActionSpec("wash", "glass"),)),
    ("cabbage_served", (ActionSpec("pick", "glass"), ActionSpec("move-base", target="microwave"),
                        ActionSpec("pick", "cabbage"), ActionSpec("move-base", target="meal_table"),
                        ActionSpec("place", "cabbage", target="meal_spot_1"))),
    ("glass_served", (ActionSpec("place", "glass", target="meal_spot_2"),)),
)


def pr2() -> RobotModel:
    # reach centers sit ahead of the base, to either side
    def offset(dx, dy):
        c, s = math.cos(START.yaw - math.pi / 2), math.sin(START.yaw - math.pi / 2)
        return (START.x + c * dx - s * dy, START.y + s * dx + c * dy)

    return RobotModel(
        "pr2", START,
        (ArmModel("left", offset(-0.2, 0.1), REACH), ArmModel("right", offset(0.2, 0.1), REACH)),
        GRIPPER,
    )


def kitchen_scenario(seed: int = 0) -> Scenario:
    wall_h = 0.24
    objects = (
        ObjectModel("wall_l", Box(0.03, wall_h), Pose(0.45, 0.65 + wall_h), FIXTURE),
        ObjectModel("wall_r", Box(0.03, wall_h), Pose(0.75, 0.65 + wall_h), FIXTURE),
        ObjectModel("dishwasher", Box(0.15, 0.10), Pose(1.5, 0.85), FIXTURE, kind="dishwasher"),
        ObjectModel("microwave", Box(0.15, 0.10), Pose(2.4, 0.85), FIXTURE, kind="microwave"),
        ObjectModel("cabbage", Disc(0.04), Pose(0.6, 0.98), TARGET, tags=frozenset({"raw", "dirty"})),
        ObjectModel("radish", Disc(0.03), Pose(*POSES["radish_home"]), GRASPABLE),
        ObjectModel("glass", Disc(0.03), Pose(1.85, 0.65), GRASPABLE, tags=frozenset({"dirty"})),
    )
    snap = WorkspaceSnapshot(FLOOR, UNUSED_STORAGE, objects, (pr2(),), stations=STATIONS)
    return Scenario(snapshot=snap, targets=("cabbage",), seed=seed, name="kitchen")


def _at(ws: WorkspaceSnapshot, oid: str, pose: str) -> bool:
    o = ws.object(oid)
    return o.location == TABLE and math.dist(o.xy, POSES[pose]) < 1e-9


def _in(ws: WorkspaceSnapshot, oid: str, fixture: str) -> bool:
    return ws.object(oid).on_fixture == fixture


def _served(ws: WorkspaceSnapshot) -> bool:
    cab, glass = ws.object("cabbage"), ws.object("glass")
    return (_at(ws, "cabbage", "meal_spot_1") and "cooked" in cab.tags and "clean" in cab.tags
            and _at(ws, "glass", "meal_spot_2") and "clean" in glass.tags)


_PHI = {
    "at_worktable": lambda ws, ctx: ws.robot(ctx["robot"]).base == ws.station("worktable"),
    "radish_aside": lambda ws, ctx: _at(ws, "radish", "radish_aside"),
    "cabbage_staged": lambda ws, ctx: ws.object("cabbage").location == HELD,
    "radish_restored": lambda ws, ctx: _at(ws, "radish", "radish_home") and ws.object("cabbage").location == HELD,
    "cabbage_in_dishwasher": lambda ws, ctx: _in(ws, "cabbage", "dishwasher"),
    "cabbage_washed": lambda ws, ctx: "clean" in ws.object("cabbage").tags,
    "cabbage_in_microwave": lambda ws, ctx: _in(ws, "cabbage", "microwave"),
    "cabbage_cooked": lambda ws, ctx: "cooked" in ws.object("cabbage").tags,
    "glass_in_dishwasher": lambda ws, ctx: _in(ws, "glass", "dishwasher"),
    "glass_washed": lambda ws, ctx: "clean" in ws.object("glass").tags,
    "cabbage_served": lambda ws, ctx: _at(ws, "cabbage", "meal_spot_1"),
    "glass_served": lambda ws, ctx: _at(ws, "glass", "meal_spot_2"),
    "all_served": lambda ws, ctx: _served(ws),
    "not_all_served": lambda ws, ctx: not _served(ws),
}


def _destinations(target: str, ws: WorkspaceSnapshot, ctx: dict) -> list:
    if target in POSES:
        return [Destination.pose(*POSES[target])]
    if ws.has_object(target) and ws.object(target).category == FIXTURE:
        return [Destination.on(target)]
    return []


def kitchen_template() -> DomainTemplate:
    labels = [lbl for lbl, _ in SEQUENCE] + ["all_served", "not_all_served"]
    kinds = {"all_served": NodeKind.SUCCESS, "not_all_served": NodeKind.FAILURE}
    nodes = [Node(i, lbl, kinds.get(lbl, NodeKind.INTERNAL)) for i, lbl in enumerate(labels)]
    ids = {n.label: n.id for n in nodes}
    arcs = []
    for (prev, _), (lbl, actions) in zip(SEQUENCE, SEQUENCE[1:]):
        arcs.append(HyperArc(len(arcs), ids[lbl], frozenset({ids[prev]}), actions, 1.0))
    last = ids[SEQUENCE[-1][0]]
    arcs.append(HyperArc(len(arcs), ids["all_served"], frozenset({last}), (ActionSpec("sense"),), 1.0))
    arcs.append(HyperArc(len(arcs), ids["not_all_served"], frozenset({last}), (ActionSpec("sense"),), 2.0))
    first_label, first_actions = SEQUENCE[0]
    augmented = (AugmentedArcSpec(first_label, first_actions, 1.0),)
    binding = Binding(phi=dict(_PHI), goals=dict(STANDARD_GOALS), destinations=_destinations)
    return DomainTemplate("kitchen", build(nodes, arcs), augmented, binding, ("left", "right", "base"))
