"""Tower of Hanoi with three rods in a triangle and a two-armed robot.

Every graph of the network performs exactly one disk move, so an ideal run
has depth ``2**n - 1``. The move to make is recomputed from the current
configuration each time, which keeps the plan optimal after a failure.
"""

from __future__ import annotations

import math
from typing import Optional

from ..graph import ActionSpec, AugmentedArcSpec, HyperArc, Node, NodeKind, build
from ..planner import STANDARD_GOALS, Binding, DomainTemplate
from ..workspace import (
    FIXTURE,
    GRASPABLE,
    HELD,
    ArmModel,
    Destination,
    Disc,
    ObjectModel,
    Pose,
    Rect,
    RobotModel,
    Scenario,
    WorkspaceSnapshot,
)

RODS = ("A", "B", "C")
ROD_POSITIONS = {"A": (0.25, 0.22), "B": (0.65, 0.22), "C": (0.45, 0.46)}
GOAL_ROD = "C"
TABLE_RECT = Rect(0.0, 0.0, 0.9, 0.6)
STORAGE_RECT = Rect(1.06, -0.05, 1.66, 0.55)


def rod_id(name: str) -> str:
    return f"rod{name}"


def disk_id(k: int) -> str:
    return f"disk{k}"


def disk_radius(k: int) -> float:
    return 0.012 + 0.004 * k


def hanoi_scenario(n: int, reach: float = 0.8) -> Scenario:
    """All ``n`` disks stacked on rod A, largest at the bottom."""
    if not 1 <= n <= 6:
        raise ValueError("between 1 and 6 disks are supported")
    objects = [
        ObjectModel(rod_id(r), Disc(0.01), Pose(*ROD_POSITIONS[r]), FIXTURE, kind="rod") for r in RODS
    ]
    for level, k in enumerate(range(n, 0, -1)):
        objects.append(
            ObjectModel(disk_id(k), Disc(disk_radius(k)), Pose(*ROD_POSITIONS["A"]), GRASPABLE,
                        location=f"on:{rod_id('A')}", stack_level=level)
        )
    robot = RobotModel(
        "baxter", Pose(0.45, -0.15, math.pi / 2),
        (ArmModel("left", (0.25, -0.05), reach), ArmModel("right", (0.65, -0.05), reach)), 0.05,
    )
    snap = WorkspaceSnapshot(TABLE_RECT, STORAGE_RECT, tuple(objects), (robot,))
    return Scenario(snapshot=snap, targets=(), seed=0, name=f"hanoi-{n}")


def configuration(ws: WorkspaceSnapshot) -> dict:
    """Disk index -> rod name for every disk resting on a rod."""
    out = {}
    for o in ws.objects:
        if o.id.startswith("disk") and o.on_fixture:
            out[int(o.id[4:])] = o.on_fixture[3:]
    return out


def next_move(config: dict, n: int, goal: str = GOAL_ROD) -> Optional[tuple]:
    """First move of the optimal solution from an arbitrary legal configuration."""

    def first(k: int, target: str) -> Optional[tuple]:
        if k == 0:
            return None
        if config[k] == target:
            return first(k - 1, target)
        spare = next(r for r in RODS if r not in (config[k], target))
        return first(k - 1, spare) or (config[k], target)

    return first(n, goal)


def _n_disks(ws: WorkspaceSnapshot) -> int:
    return sum(1 for o in ws.objects if o.id.startswith("disk"))


def _planned(ws: WorkspaceSnapshot) -> Optional[tuple]:
    conf = configuration(ws)
    n = _n_disks(ws)
    if len(conf) < n:
        return None
    return next_move(conf, n)


def _all_done(ws: WorkspaceSnapshot, ctx: dict) -> bool:
    conf = configuration(ws)
    return len(conf) == _n_disks(ws) and all(r == GOAL_ROD for r in conf.values())


def _checked(i: str, j: str):
    return lambda ws, ctx: _planned(ws) == (i, j)


def _picked(i: str):
    def pred(ws, ctx):
        d = ctx.get("disk")
        return d is not None and ws.object(d).location == HELD and ctx.get("move", ("",))[0] == i
    return pred


def _placed(j: str):
    def pred(ws, ctx):
        d = ctx.get("disk")
        return d is not None and ws.object(d).on_fixture == rod_id(j)
    return pred


def _held_by_second_arm(ws, ctx):
    d = ctx.get("disk")
    return d is not None and ws.object(d).location == HELD and ws.object(d).held_by != ctx.get("first_arm")


def _role_top(ws, ctx, arg):
    stack = ws.resting_on(rod_id(arg))
    return [stack[-1].id] if stack else []


def _role_held(ws, ctx, arg):
    robot = ws.robot(ctx["robot"])
    return [a.holding for a in robot.arms if a.holding is not None]


def _destinations(target: str, ws: WorkspaceSnapshot, ctx: dict) -> list:
    # only the rod chosen by the last check is a legal destination
    move = ctx.get("move")
    if move is None or rod_id(move[1]) != target:
        return []
    return [Destination.on(target)]


def _on_fire(label: str, ws: WorkspaceSnapshot, ctx: dict) -> None:
    if label.startswith("checked_"):
        i, j = label[len("checked_")], label[len("checked_") + 1]
        ctx["move"] = (i, j)
        ctx["disk"] = _role_top(ws, ctx, i)[0]
    elif label.startswith("picked_"):
        ctx["first_arm"] = ws.object(ctx["disk"]).held_by


def hanoi_template() -> DomainTemplate:
    pairs = [(i, j) for i in RODS for j in RODS if i != j]
    labels = ["acquired", "updated"]
    labels += [f"checked_{i}{j}" for i, j in pairs]
    labels += [f"picked_{i}" for i in RODS]
    labels += [f"placed_to_rod_{j}" for j in RODS]
    labels += ["handed_over_left", "handed_over_right", "handed_over", "staged", "all_done", "not_done"]
    kinds = {"all_done": NodeKind.SUCCESS, "not_done": NodeKind.FAILURE}
    nodes = [Node(i, lbl, kinds.get(lbl, NodeKind.INTERNAL)) for i, lbl in enumerate(labels)]
    ids = {n.label: n.id for n in nodes}
    sense = (ActionSpec("sense"),)
    arcs = []

    def arc(parent, children, actions, cost=1.0):
        arcs.append(HyperArc(len(arcs), ids[parent], frozenset(ids[c] for c in children), tuple(actions), cost))

    arc("updated", ["acquired"], sense)
    for i, j in pairs:
        arc(f"checked_{i}{j}", ["updated"], sense)
    for i, j in pairs:
        arc(f"picked_{i}", [f"checked_{i}{j}"], [ActionSpec("pick", f"$top@{i}")])
    for i, j in pairs:
        arc(f"placed_to_rod_{j}", [f"picked_{i}", f"checked_{i}{j}"],
            [ActionSpec("place", "$held", target=rod_id(j))])
    for i in RODS:
        arc("handed_over_left", [f"picked_{i}"], [ActionSpec("wait")], 2.0)
    arc("handed_over_right", ["handed_over_left"], [ActionSpec("handover", "$held")])
    arc("handed_over", ["handed_over_right"], [ActionSpec("wait")])
    for j in RODS:
        arc(f"placed_to_rod_{j}", ["handed_over"], [ActionSpec("place", "$held", target=rod_id(j))])
    for j in RODS:
        arc("staged", [f"placed_to_rod_{j}"], sense)
    arc("all_done", ["staged"], sense, 1.0)
    arc("not_done", ["staged"], sense, 2.0)

    augmented = (AugmentedArcSpec("acquired", sense, 1.0),)
    phi = {lbl: (lambda ws, ctx: True) for lbl in labels}
    phi.update({f"checked_{i}{j}": _checked(i, j) for i, j in pairs})
    phi.update({f"picked_{i}": _picked(i) for i in RODS})
    phi.update({f"placed_to_rod_{j}": _placed(j) for j in RODS})
    phi["handed_over_right"] = _held_by_second_arm
    phi["all_done"] = _all_done
    phi["not_done"] = lambda ws, ctx: not _all_done(ws, ctx)
    binding = Binding(
        phi=phi,
        goals=dict(STANDARD_GOALS),
        roles={"top": _role_top, "held": _role_held},
        destinations=_destinations,
        on_fire=_on_fire,
        auto_handover=False,
    )
    return DomainTemplate("hanoi", build(nodes, arcs), augmented, binding, ("left", "right"))
