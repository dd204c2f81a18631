"""Top-down table-top world model, knowledge base and deterministic sensing.

Everything here is an immutable value. :func:`apply` returns a new
:class:`KnowledgeBase`; callers keep the old one if they need it.

Object locations are encoded as strings: ``"table"``, ``"storage"``,
``"held"`` (see ``held_by``) or ``"on:<fixture id>"`` for objects resting on a
fixture such as an appliance or a Hanoi rod.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from . import geometry as geo
from .errors import InconsistentEffect, ScenarioError

TABLE = "table"
STORAGE = "storage"
HELD = "held"

GRASPABLE = "graspable"
PUSHABLE_ONLY = "pushable-only"
TARGET = "target"
FIXTURE = "fixture"
CATEGORIES = (GRASPABLE, PUSHABLE_ONLY, TARGET, FIXTURE)
TAGS = frozenset({"clean", "dirty", "cooked", "raw"})


@dataclass(frozen=True)
class Disc:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")


@dataclass(frozen=True)
class Box:
    hx: float
    hy: float

    def __post_init__(self):
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("box half-extents must be positive")


Shape = Union[Disc, Box]


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    yaw: float = 0.0

    @property
    def xy(self) -> geo.Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class Rect:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, p: geo.Point, margin: float = 0.0) -> bool:
        return (
            self.xmin + margin <= p[0] <= self.xmax - margin
            and self.ymin + margin <= p[1] <= self.ymax - margin
        )

    def clamp(self, p: geo.Point, margin: float = 0.0) -> geo.Point:
        return (
            min(max(p[0], self.xmin + margin), self.xmax - margin),
            min(max(p[1], self.ymin + margin), self.ymax - margin),
        )

    def distance_to(self, p: geo.Point) -> float:
        dx = max(self.xmin - p[0], 0.0, p[0] - self.xmax)
        dy = max(self.ymin - p[1], 0.0, p[1] - self.ymax)
        return math.hypot(dx, dy)

    @property
    def center(self) -> geo.Point:
        return ((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    def corners(self) -> list[geo.Point]:
        return [(self.xmin, self.ymin), (self.xmax, self.ymin), (self.xmax, self.ymax), (self.xmin, self.ymax)]


@dataclass(frozen=True)
class ObjectModel:
    id: str
    shape: Shape
    pose: Pose
    category: str = GRASPABLE
    tags: frozenset = frozenset()
    location: str = TABLE
    held_by: Optional[str] = None
    kind: Optional[str] = None
    stack_level: int = 0

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        bad = set(self.tags) - TAGS
        if bad:
            raise ValueError(f"unknown tags {sorted(bad)}")

    @property
    def xy(self) -> geo.Point:
        return self.pose.xy

    @property
    def radius(self) -> float:
        """Radius of the smallest disc around the center covering the footprint."""
        if isinstance(self.shape, Disc):
            return self.shape.radius
        return math.hypot(self.shape.hx, self.shape.hy)

    @property
    def max_dimension(self) -> float:
        if isinstance(self.shape, Disc):
            return 2 * self.shape.radius
        return 2 * max(self.shape.hx, self.shape.hy)

    @property
    def on_fixture(self) -> Optional[str]:
        return self.location[3:] if self.location.startswith("on:") else None

    def polygon(self) -> list[geo.Point]:
        assert isinstance(self.shape, Box)
        return geo.box_corners(self.xy, self.shape.hx, self.shape.hy, self.pose.yaw)

    def distance_to_point(self, p: geo.Point) -> float:
        """Signed-free clearance from ``p`` to the footprint (0 inside a box)."""
        if isinstance(self.shape, Disc):
            return geo.dist(self.xy, p) - self.shape.radius
        return geo.point_polygon_distance(p, self.polygon())

    def distance_to_segment(self, a: geo.Point, b: geo.Point) -> float:
        if isinstance(self.shape, Disc):
            return geo.segment_point_distance(a, b, self.xy) - self.shape.radius
        return geo.segment_polygon_distance(a, b, self.polygon())

    def distance_to_polygon(self, poly: Sequence[geo.Point]) -> float:
        if isinstance(self.shape, Disc):
            return geo.point_polygon_distance(self.xy, poly) - self.shape.radius
        return geo.polygon_distance(self.polygon(), poly)

    def distance_to_object(self, other: "ObjectModel") -> float:
        if isinstance(other.shape, Disc):
            return self.distance_to_point(other.xy) - other.shape.radius
        return self.distance_to_polygon(other.polygon())

    def overlaps(self, other: "ObjectModel") -> bool:
        return self.distance_to_object(other) < 0.0 or (
            not isinstance(self.shape, Disc) and self.distance_to_object(other) <= 0.0
        )

    def at(self, x: float, y: float) -> "ObjectModel":
        return replace(self, pose=Pose(x, y, self.pose.yaw))


@dataclass(frozen=True)
class ArmModel:
    id: str
    reach_center: geo.Point
    reach_radius: float
    holding: Optional[str] = None

    def reaches(self, p: geo.Point) -> bool:
        return geo.dist(self.reach_center, p) <= self.reach_radius


@dataclass(frozen=True)
class RobotModel:
    id: str
    base: Pose
    arms: tuple
    gripper_radius: float = 0.05

    def __post_init__(self):
        if not self.gripper_radius > 0:
            raise ValueError("gripper radius must be positive")
        if not 1 <= len(self.arms) <= 2:
            raise ValueError("a robot has one or two arms")

    def arm(self, arm_id: str) -> ArmModel:
        for a in self.arms:
            if a.id == arm_id:
                return a
        raise KeyError(arm_id)


@dataclass(frozen=True)
class WorldParams:
    push_distance: float = 0.10
    push_ratio: float = 1.5
    storage_pitch: float = 0.05
    push_mode: str = "away"  # or "lateral"
    home_margin: float = 0.005


@dataclass(frozen=True)
class WorkspaceSnapshot:
    table: Rect
    storage: Rect
    objects: tuple = ()
    robots: tuple = ()
    epoch: int = 0
    stations: tuple = ()
    params: WorldParams = field(default_factory=WorldParams)

    @cached_property
    def _objects(self) -> dict:
        return {o.id: o for o in self.objects}

    @cached_property
    def _arms(self) -> dict:
        return {a.id: (r, a) for r in self.robots for a in r.arms}

    def object(self, oid: str) -> ObjectModel:
        try:
            return self._objects[oid]
        except KeyError:
            raise KeyError(f"unknown object {oid!r}") from None

    def has_object(self, oid: str) -> bool:
        return oid in self._objects

    def robot(self, rid: str) -> RobotModel:
        for r in self.robots:
            if r.id == rid:
                return r
        raise KeyError(f"unknown robot {rid!r}")

    def arm(self, arm_id: str) -> ArmModel:
        return self._arms[arm_id][1]

    def robot_of_arm(self, arm_id: str) -> RobotModel:
        return self._arms[arm_id][0]

    def station(self, name: str) -> Pose:
        for n, p in self.stations:
            if n == name:
                return p
        raise KeyError(f"unknown station {name!r}")

    def on_table(self) -> list[ObjectModel]:
        return [o for o in self.objects if o.location == TABLE]

    def in_storage(self) -> list[ObjectModel]:
        return [o for o in self.objects if o.location == STORAGE]

    def resting_on(self, fixture_id: str) -> list[ObjectModel]:
        return sorted(
            (o for o in self.objects if o.location == f"on:{fixture_id}"), key=lambda o: o.stack_level
        )

    def held_by(self, arm_id: str) -> Optional[ObjectModel]:
        h = self.arm(arm_id).holding
        return self.object(h) if h is not None else None

    def arm_home(self, arm_id: str, radius: float) -> geo.Point:
        """Rest position of an arm's end-effector on the table."""
        arm = self.arm(arm_id)
        return self.table.clamp(arm.reach_center, radius + self.params.home_margin)

    def with_objects(self, objs: Iterable[ObjectModel]) -> "WorkspaceSnapshot":
        by_id = {o.id: o for o in objs}
        return replace(self, objects=tuple(by_id.get(o.id, o) for o in self.objects))

    def with_arm(self, arm: ArmModel) -> "WorkspaceSnapshot":
        robots = []
        for r in self.robots:
            arms = tuple(arm if a.id == arm.id else a for a in r.arms)
            robots.append(replace(r, arms=arms))
        return replace(self, robots=tuple(robots))

    def with_robot(self, robot: RobotModel) -> "WorkspaceSnapshot":
        return replace(self, robots=tuple(robot if r.id == robot.id else r for r in self.robots))


# ---------------------------------------------------------------------------
# invariants


def _overlapping_pairs(objs: Sequence[ObjectModel]) -> list[tuple[str, str]]:
    out = []
    for i in range(len(objs)):
        for j in range(i + 1, len(objs)):
            a, b = objs[i], objs[j]
            if geo.dist(a.xy, b.xy) > a.radius + b.radius:
                continue
            if a.overlaps(b):
                out.append((a.id, b.id))
    return out


def overlapping_pairs(snapshot: WorkspaceSnapshot) -> list[tuple[str, str]]:
    return _overlapping_pairs(snapshot.on_table()) + _overlapping_pairs(snapshot.in_storage())


def overlap_free(snapshot: WorkspaceSnapshot) -> bool:
    """True iff no two non-held objects on the same surface intersect."""
    return not overlapping_pairs(snapshot)


def is_pushable_only(obj: ObjectModel, gripper_radius: float, ratio: float) -> bool:
    return obj.max_dimension > ratio * gripper_radius


def validate_snapshot(snapshot: WorkspaceSnapshot) -> list[str]:
    """Human-readable invariant violations; empty when the snapshot is sound."""
    problems = []
    for a, b in overlapping_pairs(snapshot):
        problems.append(f"objects {a} and {b} overlap")
    for o in snapshot.objects:
        if o.location == TABLE and not snapshot.table.contains(o.xy):
            problems.append(f"object {o.id} lies outside the table bounds")
        if o.location == STORAGE and not snapshot.storage.contains(o.xy):
            problems.append(f"object {o.id} lies outside the storage area")
        if o.on_fixture and not snapshot.has_object(o.on_fixture):
            problems.append(f"object {o.id} rests on unknown fixture {o.on_fixture}")
        if o.location == HELD:
            if o.held_by is None or o.held_by not in snapshot._arms:
                problems.append(f"object {o.id} is held by an unknown arm")
            elif snapshot.arm(o.held_by).holding != o.id:
                problems.append(f"object {o.id} and arm {o.held_by} disagree about holding")
    if snapshot.robots:
        g = min(r.gripper_radius for r in snapshot.robots)
        for o in snapshot.objects:
            if o.category in (GRASPABLE, PUSHABLE_ONLY):
                expect = is_pushable_only(o, g, snapshot.params.push_ratio)
                if expect != (o.category == PUSHABLE_ONLY):
                    problems.append(
                        f"object {o.id} category {o.category} inconsistent with push threshold"
                    )
    for r in snapshot.robots:
        for a in r.arms:
            if a.holding is not None:
                if not snapshot.has_object(a.holding) or snapshot.object(a.holding).held_by != a.id:
                    problems.append(f"arm {a.id} claims to hold {a.holding}")
    ids = [o.id for o in snapshot.objects]
    if len(set(ids)) != len(ids):
        problems.append("duplicate object ids")
    return problems


# ---------------------------------------------------------------------------
# effects


@dataclass(frozen=True)
class Destination:
    """Where a placed object ends up: ``storage``, a table ``pose`` or ``on`` a fixture."""

    kind: str
    x: float = 0.0
    y: float = 0.0
    fixture: Optional[str] = None

    @classmethod
    def storage(cls) -> "Destination":
        return cls("storage")

    @classmethod
    def pose(cls, x: float, y: float) -> "Destination":
        return cls("pose", x, y)

    @classmethod
    def on(cls, fixture: str) -> "Destination":
        return cls("on", fixture=fixture)


@dataclass(frozen=True)
class ActionEffect:
    verb: str
    obj: Optional[str] = None
    arm: Optional[str] = None
    to_arm: Optional[str] = None
    destination: Optional[Destination] = None
    robot: Optional[str] = None
    station: Optional[str] = None
    direction: Optional[geo.Point] = None


def storage_slot(snapshot: WorkspaceSnapshot, obj: ObjectModel) -> Optional[geo.Point]:
    """First free grid cell of the storage area, row-major from its low corner."""
    pitch = snapshot.params.storage_pitch
    s = snapshot.storage
    nx = int(math.floor(s.width / pitch + 1e-9))
    ny = int(math.floor(s.height / pitch + 1e-9))
    stored = snapshot.in_storage()
    for iy in range(ny):
        for ix in range(nx):
            c = (s.xmin + pitch * (ix + 0.5), s.ymin + pitch * (iy + 0.5))
            cand = obj.at(*c)
            if all(not cand.overlaps(o) for o in stored if o.id != obj.id):
                return c
    return None


def _require(cond: bool, precondition: str, detail: str = ""):
    if not cond:
        raise InconsistentEffect(precondition, detail)


def _table_fits(snapshot: WorkspaceSnapshot, cand: ObjectModel) -> Optional[str]:
    if isinstance(cand.shape, Disc):
        inside = snapshot.table.contains(cand.xy, cand.shape.radius)
    else:
        inside = all(snapshot.table.contains(p) for p in cand.polygon())
    if not inside:
        return "destination outside table"
    for o in snapshot.on_table():
        if o.id != cand.id and cand.overlaps(o):
            return f"destination overlaps {o.id}"
    return None


def _pick(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.obj is not None and s.has_object(e.obj), "pick: object exists", str(e.obj))
    _require(e.arm is not None and e.arm in s._arms, "pick: arm exists", str(e.arm))
    o = s.object(e.obj)
    arm = s.arm(e.arm)
    _require(arm.holding is None, "pick: arm empty", f"{arm.id} holds {arm.holding}")
    _require(o.category in (GRASPABLE, TARGET), "pick: object graspable", f"{o.id} is {o.category}")
    _require(o.location != HELD, "pick: object not already held", o.id)
    if o.on_fixture:
        top = s.resting_on(o.on_fixture)[-1]
        _require(top.id == o.id, "pick: object on top of its stack", f"{top.id} is above {o.id}")
    o2 = replace(o, location=HELD, held_by=arm.id, stack_level=0)
    return s.with_objects([o2]).with_arm(replace(arm, holding=o.id))


def _place(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.arm is not None and e.arm in s._arms, "place: arm exists", str(e.arm))
    arm = s.arm(e.arm)
    _require(arm.holding is not None, "place: arm holding", arm.id)
    _require(e.obj is None or e.obj == arm.holding, "place: arm holds the object", f"{arm.id} holds {arm.holding}")
    o = s.object(arm.holding)
    dest = e.destination
    _require(dest is not None, "place: destination given")
    if dest.kind == "storage":
        slot = storage_slot(s, o)
        _require(slot is not None, "place: free storage cell")
        o2 = replace(o.at(*slot), location=STORAGE, held_by=None)
    elif dest.kind == "pose":
        cand = replace(o.at(dest.x, dest.y), location=TABLE, held_by=None)
        why = _table_fits(s, cand)
        _require(why is None, "place: destination free", why or "")
        o2 = cand
    elif dest.kind == "on":
        _require(dest.fixture is not None and s.has_object(dest.fixture), "place: fixture exists", str(dest.fixture))
        fx = s.object(dest.fixture)
        _require(fx.category == FIXTURE, "place: destination is a fixture", fx.id)
        stack = s.resting_on(fx.id)
        if fx.kind == "rod":
            _require(
                all(o.radius < d.radius for d in stack),
                "place: disk smaller than every disk on the rod",
                f"{o.id} onto {fx.id}",
            )
        o2 = replace(o.at(*fx.xy), location=f"on:{fx.id}", held_by=None, stack_level=len(stack))
    else:
        raise InconsistentEffect("place: known destination kind", dest.kind)
    return s.with_objects([o2]).with_arm(replace(arm, holding=None))


def _push(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.obj is not None and s.has_object(e.obj), "push: object exists", str(e.obj))
    o = s.object(e.obj)
    _require(o.category == PUSHABLE_ONLY, "push: object is pushable-only", f"{o.id} is {o.category}")
    _require(o.location == TABLE, "push: object on table", o.id)
    _require(e.arm is not None and e.arm in s._arms, "push: arm exists", str(e.arm))
    _require(s.arm(e.arm).holding is None, "push: arm empty", e.arm)
    d = e.direction
    if d is None:
        base = s.robot_of_arm(e.arm).base.xy
        n = geo.dist(base, o.xy)
        d = ((o.pose.x - base[0]) / n, (o.pose.y - base[1]) / n) if n > 0 else (1.0, 0.0)
    k = s.params.push_distance
    cand = o.at(o.pose.x + d[0] * k, o.pose.y + d[1] * k)
    why = _table_fits(s, cand)
    _require(why is None, "push: destination free", why or "")
    return s.with_objects([cand])


def _handover(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.arm in s._arms and e.to_arm in s._arms, "handover: arms exist", f"{e.arm}->{e.to_arm}")
    src, dst = s.arm(e.arm), s.arm(e.to_arm)
    _require(s.robot_of_arm(src.id).id == s.robot_of_arm(dst.id).id, "handover: same robot")
    _require(src.holding is not None, "handover: giving arm holding", src.id)
    _require(dst.holding is None, "handover: receiving arm empty", dst.id)
    o = s.object(src.holding)
    o2 = replace(o, held_by=dst.id)
    return s.with_objects([o2]).with_arm(replace(src, holding=None)).with_arm(replace(dst, holding=o.id))


def _move_base(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.robot is not None, "move-base: robot given")
    r = s.robot(e.robot)
    _require(e.station is not None, "move-base: station given")
    try:
        target = s.station(e.station)
    except KeyError:
        raise InconsistentEffect("move-base: station exists", str(e.station)) from None
    arms = []
    for a in r.arms:
        local = geo.rotate((a.reach_center[0] - r.base.x, a.reach_center[1] - r.base.y), -r.base.yaw)
        w = geo.rotate(local, target.yaw)
        arms.append(replace(a, reach_center=(target.x + w[0], target.y + w[1])))
    return s.with_robot(replace(r, base=target, arms=tuple(arms)))


def _appliance_of(s: WorkspaceSnapshot, o: ObjectModel) -> Optional[str]:
    f = o.on_fixture
    return s.object(f).kind if f and s.has_object(f) else None


def _cook(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.obj is not None and s.has_object(e.obj), "cook: object exists", str(e.obj))
    o = s.object(e.obj)
    _require(_appliance_of(s, o) == "microwave", "cook: object at microwave", o.id)
    return s.with_objects([replace(o, tags=(o.tags - {"raw"}) | {"cooked"})])


def _wash(s: WorkspaceSnapshot, e: ActionEffect) -> WorkspaceSnapshot:
    _require(e.obj is not None and s.has_object(e.obj), "wash: object exists", str(e.obj))
    o = s.object(e.obj)
    _require(_appliance_of(s, o) == "dishwasher", "wash: object at dishwasher", o.id)
    return s.with_objects([replace(o, tags=(o.tags - {"dirty"}) | {"clean"})])


_EFFECTS = {
    "pick": _pick,
    "place": _place,
    "push": _push,
    "handover": _handover,
    "move-base": _move_base,
    "cook": _cook,
    "wash": _wash,
    "wait": lambda s, e: s,
    "sense": lambda s, e: s,
}


def apply_effect(snapshot: WorkspaceSnapshot, effect: ActionEffect) -> WorkspaceSnapshot:
    """Apply one effect to a snapshot; the epoch is advanced by one."""
    try:
        fn = _EFFECTS[effect.verb]
    except KeyError:
        raise InconsistentEffect("known verb", effect.verb) from None
    out = fn(snapshot, effect)
    return replace(out, epoch=snapshot.epoch + 1)


@dataclass(frozen=True)
class KnowledgeBase:
    current: WorkspaceSnapshot
    history: tuple = ()
    log: tuple = ()  # effects, aligned with history

    def __post_init__(self):
        epochs = [s.epoch for s in self.history] + [self.current.epoch]
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ValueError("knowledge-base epochs must strictly increase")


def sense(kb: KnowledgeBase) -> WorkspaceSnapshot:
    """Perfect, deterministic observation of the stored configuration."""
    return kb.current


def apply(kb: KnowledgeBase, effect: ActionEffect) -> KnowledgeBase:
    new = apply_effect(kb.current, effect)
    return KnowledgeBase(current=new, history=kb.history + (kb.current,), log=kb.log + (effect,))


# ---------------------------------------------------------------------------
# scenario documents


@dataclass(frozen=True)
class Scenario:
    snapshot: WorkspaceSnapshot
    targets: tuple = ()
    seed: int = 0
    name: str = "scenario"


def _shape_doc(shape: Shape) -> dict:
    if isinstance(shape, Disc):
        return {"disc": {"radius": shape.radius}}
    return {"box": {"hx": shape.hx, "hy": shape.hy}}


def _rect_doc(r: Rect) -> list:
    return [r.xmin, r.ymin, r.xmax, r.ymax]


def scenario_to_dict(sc: Scenario) -> dict:
    s = sc.snapshot
    return {
        "name": sc.name,
        "seed": sc.seed,
        "epoch": s.epoch,
        "table": _rect_doc(s.table),
        "storage": _rect_doc(s.storage),
        "params": asdict(s.params),
        "objects": [
            {
                "id": o.id,
                "shape": _shape_doc(o.shape),
                "pose": [o.pose.x, o.pose.y, o.pose.yaw],
                "category": o.category,
                "tags": sorted(o.tags),
                "location": o.location,
                **({"held_by": o.held_by} if o.held_by else {}),
                **({"kind": o.kind} if o.kind else {}),
                **({"stack_level": o.stack_level} if o.stack_level else {}),
            }
            for o in s.objects
        ],
        "robots": [
            {
                "id": r.id,
                "base": [r.base.x, r.base.y, r.base.yaw],
                "gripper_radius": r.gripper_radius,
                "arms": [
                    {
                        "id": a.id,
                        "reach_center": list(a.reach_center),
                        "reach_radius": a.reach_radius,
                        **({"holding": a.holding} if a.holding else {}),
                    }
                    for a in r.arms
                ],
            }
            for r in s.robots
        ],
        "stations": [{"name": n, "pose": [p.x, p.y, p.yaw]} for n, p in s.stations],
        "targets": list(sc.targets),
    }


def _rect(v, where: str) -> Rect:
    if not (isinstance(v, list) and len(v) == 4):
        raise ScenarioError(f"{where}: expected [xmin, ymin, xmax, ymax]")
    r = Rect(*map(float, v))
    if not (r.xmax > r.xmin and r.ymax > r.ymin):
        raise ScenarioError(f"{where}: empty rectangle")
    return r


def _shape(doc, where: str) -> Shape:
    try:
        if "disc" in doc:
            return Disc(float(doc["disc"]["radius"]))
        if "box" in doc:
            return Box(float(doc["box"]["hx"]), float(doc["box"]["hy"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    raise ScenarioError(f"{where}: shape must be a disc or a box")


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    for key in ("table", "storage", "objects", "robots"):
        if key not in doc:
            raise ScenarioError(f"missing key {key!r}")
    try:
        objects = []
        for i, od in enumerate(doc["objects"]):
            where = f"objects[{i}]"
            pose = od.get("pose", [0, 0, 0])
            objects.append(
                ObjectModel(
                    id=str(od["id"]),
                    shape=_shape(od.get("shape", {}), where),
                    pose=Pose(float(pose[0]), float(pose[1]), float(pose[2]) if len(pose) > 2 else 0.0),
                    category=od.get("category", GRASPABLE),
                    tags=frozenset(od.get("tags", [])),
                    location=od.get("location", TABLE),
                    held_by=od.get("held_by"),
                    kind=od.get("kind"),
                    stack_level=int(od.get("stack_level", 0)),
                )
            )
        robots = []
        for i, rd in enumerate(doc["robots"]):
            b = rd["base"]
            arms = tuple(
                ArmModel(
                    id=str(a["id"]),
                    reach_center=(float(a["reach_center"][0]), float(a["reach_center"][1])),
                    reach_radius=float(a["reach_radius"]),
                    holding=a.get("holding"),
                )
                for a in rd["arms"]
            )
            robots.append(
                RobotModel(
                    id=str(rd["id"]),
                    base=Pose(float(b[0]), float(b[1]), float(b[2]) if len(b) > 2 else 0.0),
                    arms=arms,
                    gripper_radius=float(rd.get("gripper_radius", 0.05)),
                )
            )
        stations = tuple(
            (st["name"], Pose(*(float(v) for v in st["pose"]))) for st in doc.get("stations", [])
        )
        params = WorldParams(**doc.get("params", {}))
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"invalid scenario field: {exc}") from None
    snap = WorkspaceSnapshot(
        table=_rect(doc["table"], "table"),
        storage=_rect(doc["storage"], "storage"),
        objects=tuple(objects),
        robots=tuple(robots),
        epoch=int(doc.get("epoch", 0)),
        stations=stations,
        params=params,
    )
    targets = tuple(str(t) for t in doc.get("targets", []))
    for t in targets:
        if not snap.has_object(t):
            raise ScenarioError(f"target {t!r} is not an object")
    return Scenario(snapshot=snap, targets=targets, seed=int(doc.get("seed", 0)), name=doc.get("name", "scenario"))


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2, sort_keys=False) + "\n"


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def load_scenario(path: Union[str, Path]) -> Scenario:
    return loads_scenario(Path(path).read_text())


def save_scenario(sc: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_scenario(sc))
