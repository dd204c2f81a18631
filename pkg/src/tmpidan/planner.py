"""The iterative-deepening task and motion planning loop.

A :class:`NetworkSearch` owns one graph network for one robot and one task.
Each :meth:`NetworkSearch.step` picks the cheapest feasible hyper-arcs of
the active graph, grounds their actions on the robot's arms, asks the motion
layer for plans, simulates executions and fires the first arc that works.
A graph that ends in a failure terminal, or runs out of arcs to try, is
followed by a fresh copy of the template bound to the current workspace.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import geometry as geo
from .allocation import Assignment, allocate, raw_sets
from .errors import DepthLimitReached, EmptyFeasibleSet, InconsistentEffect, InvalidStart
from .graph import (
    ActionSpec,
    AndOrGraph,
    AugmentedArcSpec,
    AugmentedGraph,
    GraphNetwork,
    HyperArc,
    expand,
    feasible_transitions,
    fire,
    is_solved,
    solved_at_depth,
    start_network,
)
from .motion import (
    FailureModel,
    GraspGoal,
    IdealPlanner,
    MotionDomain,
    Obstacles,
    PointGoal,
    RRTPlanner,
    Trajectory,
    discretized_angles,
    grasp_goal,
    moving_radius,
    simulate_execute,
)
from .workspace import (
    FIXTURE,
    HELD,
    STORAGE,
    TABLE,
    ActionEffect,
    Destination,
    KnowledgeBase,
    ObjectModel,
    Scenario,
    WorkspaceSnapshot,
    apply,
    apply_effect,
    sense,
)

Predicate = Callable[[WorkspaceSnapshot, dict], bool]

DROP_PITCH = 0.04

# Motion-goal constructors per geometric verb. Only grasps are parameterized;
# the other verbs resolve to point goals built by the executor.
STANDARD_GOALS = {
    "pick": grasp_goal,
    "place": PointGoal,
    "push": PointGoal,
    "handover": PointGoal,
    "move-base": PointGoal,
}


@dataclass
class Binding:
    """Maps node labels to snapshot predicates and role names to objects.

    ``phi`` must cover every label of the template and ``goals`` every
    geometric verb it uses. ``roles`` resolve ``$name`` or ``$name@arg``
    object references to candidate ids, best first. ``destinations``
    resolves a place target to candidate :class:`Destination` values.
    """

    phi: Mapping[str, Predicate]
    goals: Mapping[str, Callable]
    roles: Mapping[str, Callable] = field(default_factory=dict)
    destinations: Optional[Callable] = None
    on_fire: Optional[Callable] = None
    auto_handover: bool = True
    new_context: Callable[[], dict] = dict

    def check_total(self, graph: AndOrGraph, augmented: Sequence[AugmentedArcSpec] = ()) -> list[str]:
        """Labels and verbs the binding does not cover."""
        missing = [f"label {n.label}" for n in graph.nodes if n.label not in self.phi]
        actions = [a for arc in graph.arcs for a in arc.actions] + [a for s in augmented for a in s.actions]
        for a in actions:
            if a.geometric and a.verb not in self.goals:
                missing.append(f"verb {a.verb}")
        return sorted(set(missing))


@dataclass(frozen=True)
class DomainTemplate:
    name: str
    graph: AndOrGraph
    augmented_arcs: tuple
    binding: Binding
    agents: tuple

    @property
    def node_count(self) -> int:
        """Nodes once augmented with the root."""
        return len(self.graph.nodes) + 1

    @property
    def arc_count(self) -> int:
        return len(self.graph.arcs) + len(self.augmented_arcs)


@dataclass(frozen=True)
class PlannerConfig:
    depth_limit: int = 64
    budget_ms: float = 1000.0
    fail_prob: float = 0.0
    seed: int = 0
    n_angles: int = 19
    ideal_motion: bool = False
    plans_per_agent: int = 2

    def __post_init__(self):
        if self.depth_limit < 1:
            raise ValueError("depth limit must be at least 1")
        if not self.budget_ms > 0:
            raise ValueError("motion budget must be positive")
        if not 0.0 <= self.fail_prob < 1.0:
            raise ValueError("failure probability must lie in [0, 1)")


@dataclass
class RunMetrics:
    d: int = 0
    tp_s: float = 0.0
    mp_s: float = 0.0
    attempts: int = 0
    executions: int = 0
    rearranged: int = 0
    solved: bool = False
    work: int = 0
    bound: int = 0  # (|N| + |H|) * d summed over networks
    exit: str = ""

    def absorb(self, other: "RunMetrics") -> None:
        self.d += other.d
        self.tp_s += other.tp_s
        self.mp_s += other.mp_s
        self.attempts += other.attempts
        self.executions += other.executions
        self.rearranged += other.rearranged
        self.work += other.work
        self.bound += other.bound


@dataclass
class MultiRunMetrics:
    per_robot: dict  # robot id -> RunMetrics
    assignment: Assignment
    combined_utility: float
    per_task: dict = field(default_factory=dict)  # task -> solved


# ---------------------------------------------------------------------------
# candidate selection


def find_next_optimal(fts: Sequence[tuple], graph: AugmentedGraph) -> list[tuple]:
    """All minimum-cost candidates, ordered by arc id."""
    if not fts:
        raise EmptyFeasibleSet("no feasible transitions")
    low = min(graph.arc(a).cost for a, _ in fts)
    return sorted((t for t in fts if graph.arc(t[0]).cost == low), key=lambda t: t[0])


@dataclass
class Counters:
    attempts: int = 0
    executions: int = 0
    mp_s: float = 0.0
    rearranged: int = 0


@dataclass
class CandidateResult:
    snapshot: Optional[WorkspaceSnapshot]
    kb: KnowledgeBase


def _lifted_ignore(ws: WorkspaceSnapshot) -> frozenset:
    """A grasped object is carried above the clutter; only fixtures stay in the way."""
    return frozenset(o.id for o in ws.objects if o.category != FIXTURE)


class Executor:
    """Grounds actions for one robot and runs them through motion and execution."""

    def __init__(self, robot_id: str, binding: Binding, config: PlannerConfig, ctx: dict,
                 motion, failures: FailureModel, counters: Counters, rng: random.Random):
        self.robot_id = robot_id
        self.binding = binding
        self.config = config
        self.ctx = ctx
        self.motion = motion
        self.failures = failures
        self.counters = counters
        self.rng = rng

    # -- motion helpers -------------------------------------------------

    def _plan(self, domain: MotionDomain, start) -> Optional[Trajectory]:
        t0 = time.perf_counter()
        try:
            traj = self.motion.plan(domain, start, self.config.budget_ms, self.rng.getrandbits(32))
        except InvalidStart:
            traj = None
        finally:
            self.counters.mp_s += time.perf_counter() - t0
        self.counters.attempts += 1
        return traj

    def _run(self, kb: KnowledgeBase, plans: list) -> Optional[KnowledgeBase]:
        """Execute plans cheapest first until one succeeds and its effect applies."""
        plans = sorted(plans, key=lambda p: (p[0].cost, p[1]))
        for traj, _, effects in plans:
            self.counters.executions += 1
            if not simulate_execute(traj, self.failures):
                continue
            try:
                nk = kb
                for e in effects:
                    nk = apply(nk, e)
                return nk
            except InconsistentEffect:
                continue
        return None

    def _arms(self, ws: WorkspaceSnapshot) -> list:
        return list(ws.robot(self.robot_id).arms)

    def _home(self, ws: WorkspaceSnapshot, arm_id: str) -> tuple:
        return ws.arm_home(arm_id, moving_radius(ws, arm_id))

    # -- resolution -----------------------------------------------------

    def resolve(self, ref: Optional[str], ws: WorkspaceSnapshot) -> list[str]:
        if ref is None:
            return []
        if not ref.startswith("$"):
            return [ref]
        name, _, arg = ref[1:].partition("@")
        fn = self.binding.roles[name]
        return list(fn(ws, self.ctx, arg or None))

    def _holder(self, ws: WorkspaceSnapshot, oid: str) -> Optional[str]:
        o = ws.object(oid)
        if o.location == HELD and ws.robot_of_arm(o.held_by).id == self.robot_id:
            return o.held_by
        return None

    # -- verbs ----------------------------------------------------------

    def run_action(self, action: ActionSpec, kb: KnowledgeBase) -> Optional[KnowledgeBase]:
        ws = sense(kb)
        if not action.geometric:
            oid = (self.resolve(action.obj, ws) or [None])[0]
            try:
                return apply(kb, ActionEffect(action.verb, obj=oid))
            except InconsistentEffect:
                return None
        return getattr(self, "_" + action.verb.replace("-", "_"))(action, kb, ws)

    def _pick(self, action, kb, ws):
        for oid in self.resolve(action.obj, ws):
            if self._holder(ws, oid) is not None:
                self.ctx["last_obj"] = oid
                return kb
            plans = self._grasp_plans(ws, oid)
            if not plans:
                self.ctx.setdefault("tried", set()).add(oid)
                continue
            nk = self._run(kb, plans)
            if nk is not None:
                self.ctx["last_obj"] = oid
                return nk
        return None

    def _grasp_plans(self, ws: WorkspaceSnapshot, oid: str) -> list:
        obj = ws.object(oid)
        if obj.location == HELD:
            return []
        ignore = {oid}
        fixture = obj.on_fixture
        if fixture:
            ignore |= {fixture} | {o.id for o in ws.resting_on(fixture)}
        arms = [a for a in self._arms(ws) if a.holding is None]
        arms.sort(key=lambda a: geo.dist(a.reach_center, obj.xy))
        angles = sorted(discretized_angles(self.config.n_angles), key=lambda a: (abs(a), a))
        plans = []
        for rank, arm in enumerate(arms):
            found = 0
            for ang in angles:
                goal = self.binding.goals["pick"](oid, ang, ws, arm.id)
                dom = MotionDomain(ws, arm.id, moving_radius(ws, arm.id), goal, ignore=frozenset(ignore))
                if not self.config.ideal_motion and not arm.reaches(obj.xy):
                    continue
                traj = self._plan(dom, self._home(ws, arm.id))
                if traj is not None:
                    plans.append((traj, rank, [ActionEffect("pick", obj=oid, arm=arm.id)]))
                    found += 1
                    if found >= self.config.plans_per_agent:
                        break
        return plans

    def _reaches_destination(self, ws: WorkspaceSnapshot, arm_id: str, dest: Destination) -> bool:
        if self.config.ideal_motion:
            return True
        arm = ws.arm(arm_id)
        if dest.kind == "storage":
            return ws.storage.distance_to(arm.reach_center) <= arm.reach_radius
        return arm.reaches(self._dest_point(ws, dest))

    def _dest_point(self, ws: WorkspaceSnapshot, dest: Destination) -> tuple:
        if dest.kind == "on":
            return ws.object(dest.fixture).xy
        return (dest.x, dest.y)

    def _drop_points(self, ws: WorkspaceSnapshot, r: float) -> list:
        """Candidate release poses on the table edge facing the storage area."""
        t, s = ws.table, ws.storage
        m = r + ws.params.home_margin
        edge = t.clamp(s.center, m)
        # slide along whichever table edge the storage center was clamped onto
        along_y = edge[0] != s.center[0]
        lo, hi = (t.ymin, t.ymax) if along_y else (t.xmin, t.xmax)
        pts = []
        for v in np.arange(lo + m, hi - m + 1e-9, DROP_PITCH):
            p = (edge[0], float(v)) if along_y else (float(v), edge[1])
            if p not in pts:
                pts.append(p)
        pts.sort(key=lambda p: geo.dist(p, edge))
        return [edge] + [p for p in pts if p != edge]

    def _place_goals(self, ws: WorkspaceSnapshot, arm_id: str, dest: Destination):
        r = moving_radius(ws, arm_id)
        lifted = _lifted_ignore(ws)
        if dest.kind == "storage":
            # drop points behind a fixture cannot be reached
            probe = Obstacles(MotionDomain(ws, arm_id, r, PointGoal((0.0, 0.0)), ignore=lifted))
            pts = [p for p in self._drop_points(ws, r) if probe.point_free(p)]
            return [(PointGoal(p, 0.01), lifted) for p in pts]
        if dest.kind == "on":
            return [(PointGoal(ws.object(dest.fixture).xy, 0.01), lifted | {dest.fixture})]
        return [(PointGoal((dest.x, dest.y), 0.01), lifted)]

    def _handover_kb(self, kb: KnowledgeBase, giver: str, taker: str) -> Optional[KnowledgeBase]:
        ws = sense(kb)
        a, b = ws.arm(giver), ws.arm(taker)
        mid = ((a.reach_center[0] + b.reach_center[0]) / 2, (a.reach_center[1] + b.reach_center[1]) / 2)
        r = moving_radius(ws, giver)
        point = ws.table.clamp(mid, r + ws.params.home_margin)
        dom = MotionDomain(ws, giver, r, PointGoal(point, 0.01), ignore=_lifted_ignore(ws))
        traj = self._plan(dom, self._home(ws, giver))
        if traj is None:
            return None
        oid = a.holding
        return self._run(kb, [(traj, 0, [ActionEffect("handover", obj=oid, arm=giver, to_arm=taker)])])

    def _destinations(self, target: Optional[str], ws: WorkspaceSnapshot) -> list:
        if target is None:
            return []
        if target == "storage":
            return [Destination.storage()]
        if self.binding.destinations is None:
            raise ValueError(f"no destination resolver for {target!r}")
        return list(self.binding.destinations(target, ws, self.ctx))

    def _place(self, action, kb, ws):
        objs = self.resolve(action.obj, ws)
        for oid in objs:
            arm_id = self._holder(ws, oid)
            if arm_id is None:
                continue
            for dest in self._destinations(action.target, ws):
                nk = self._place_one(kb, arm_id, oid, dest)
                if nk is not None:
                    self.ctx["last_obj"] = oid
                    self.ctx["last_dest"] = dest
                    o = ws.object(oid)
                    if o.category != "target":
                        self.counters.rearranged += 1
                    return nk
        return None

    def _place_one(self, kb, arm_id, oid, dest):
        ws = sense(kb)
        if not self._reaches_destination(ws, arm_id, dest):
            if not self.binding.auto_handover:
                return None
            others = [a.id for a in self._arms(ws) if a.id != arm_id and a.holding is None]
            others = [a for a in others if self._reaches_destination(ws, a, dest)]
            if not others:
                return None
            kb2 = self._handover_kb(kb, arm_id, others[0])
            if kb2 is None:
                return None
            kb, arm_id, ws = kb2, others[0], sense(kb2)
        plans = []
        for rank, (goal, ignore) in enumerate(self._place_goals(ws, arm_id, dest)):
            dom = MotionDomain(ws, arm_id, moving_radius(ws, arm_id), goal, ignore=ignore)
            traj = self._plan(dom, self._home(ws, arm_id))
            if traj is not None:
                plans.append((traj, rank, [ActionEffect("place", obj=oid, arm=arm_id, destination=dest)]))
                if len(plans) >= self.config.plans_per_agent:
                    break
        if not plans:
            return None
        return self._run(kb, plans)

    def _push_directions(self, ws: WorkspaceSnapshot, obj: ObjectModel) -> list:
        base = ws.robot(self.robot_id).base.xy
        v = (obj.pose.x - base[0], obj.pose.y - base[1])
        n = math.hypot(*v) or 1.0
        away = (v[0] / n, v[1] / n)
        lat = [(-away[1], away[0]), (away[1], -away[0])]
        target = self.ctx.get("target")
        if target and ws.has_object(target):
            t = ws.object(target).xy
            w = (obj.pose.x - t[0], obj.pose.y - t[1])
            lat.sort(key=lambda d: -(d[0] * w[0] + d[1] * w[1]))
        if ws.params.push_mode == "lateral":
            return lat + [away]
        return [away]

    def _push(self, action, kb, ws):
        for oid in self.resolve(action.obj, ws):
            obj = ws.object(oid)
            arms = [a for a in self._arms(ws) if a.holding is None]
            arms.sort(key=lambda a: geo.dist(a.reach_center, obj.xy))
            plans = []
            for rank, arm in enumerate(arms):
                g = ws.robot_of_arm(arm.id).gripper_radius
                for d in self._push_directions(ws, obj):
                    effect = ActionEffect("push", obj=oid, arm=arm.id, direction=d)
                    try:
                        apply_effect(ws, effect)
                    except InconsistentEffect:
                        continue
                    back = obj.radius + g + 0.005
                    start_pt = (obj.pose.x - back * d[0], obj.pose.y - back * d[1])
                    dom = MotionDomain(ws, arm.id, g, PointGoal(start_pt, 0.005), ignore=frozenset({oid}))
                    if not self.config.ideal_motion and not arm.reaches(start_pt):
                        continue
                    traj = self._plan(dom, self._home(ws, arm.id))
                    if traj is not None:
                        plans.append((traj, rank, [effect]))
                        break
            if not plans:
                self.ctx.setdefault("tried", set()).add(oid)
                continue
            nk = self._run(kb, plans)
            if nk is not None:
                self.ctx["last_obj"] = oid
                self.counters.rearranged += 1
                return nk
        return None

    def _handover(self, action, kb, ws):
        for oid in self.resolve(action.obj, ws):
            giver = self._holder(ws, oid)
            if giver is None:
                continue
            takers = [a.id for a in self._arms(ws) if a.id != giver and a.holding is None]
            if action.agent_hint and action.agent_hint in takers:
                takers = [action.agent_hint]
            for taker in takers:
                nk = self._handover_kb(kb, giver, taker)
                if nk is not None:
                    return nk
        return None

    def _move_base(self, action, kb, ws):
        robot = ws.robot(self.robot_id)
        station = action.target
        try:
            dest = ws.station(station)
        except KeyError:
            return None
        t0 = time.perf_counter()
        traj = Trajectory.through([robot.base.xy, dest.xy])
        self.counters.mp_s += time.perf_counter() - t0
        self.counters.attempts += 1
        return self._run(kb, [(traj, 0, [ActionEffect("move-base", robot=robot.id, station=station)])])


def execute_candidate(candidate: tuple, graph: AugmentedGraph, executor: Executor,
                      kb: KnowledgeBase) -> CandidateResult:
    """Run every action of the candidate arc; the parent predicate must then hold."""
    arc_id, parent = candidate
    arc = graph.arc(arc_id)
    for action in arc.actions:
        nk = executor.run_action(action, kb)
        if nk is None:
            return CandidateResult(None, kb)
        kb = nk
    ws = sense(kb)
    label = graph.node(parent).label
    if not executor.binding.phi[label](ws, executor.ctx):
        return CandidateResult(None, kb)
    return CandidateResult(ws, kb)


# ---------------------------------------------------------------------------
# network search


class NetworkSearch:
    """One graph network solving one task for one robot."""

    def __init__(self, template: DomainTemplate, robot_id: str, kb: KnowledgeBase, config: PlannerConfig,
                 ctx: dict, motion, failures: FailureModel, rng: random.Random):
        self.template = template
        self.robot_id = robot_id
        self.config = config
        self.ctx = ctx
        self.counters = Counters()
        self.executor = Executor(robot_id, template.binding, config, ctx, motion, failures, self.counters, rng)
        self.tp_s = 0.0
        t0 = time.perf_counter()
        self.net: GraphNetwork = start_network(
            template.graph, sense(kb), template.augmented_arcs, depth_limit=config.depth_limit
        )
        self.tp_s += time.perf_counter() - t0
        self.exhausted: set = set()
        self.done = False
        self.solved = False
        self.exit = ""

    def _expand(self, kb: KnowledgeBase, reason: str) -> None:
        t0 = time.perf_counter()
        try:
            self.net = expand(self.net, sense(kb), self.template.graph, self.template.augmented_arcs, reason)
            self.exhausted = set()
        except DepthLimitReached:
            self.done, self.exit = True, "depth-limit"
        finally:
            self.tp_s += time.perf_counter() - t0

    def step(self, kb: KnowledgeBase) -> KnowledgeBase:
        """Try the cheapest remaining candidates of the active graph once."""
        if self.done:
            return kb
        t0 = time.perf_counter()
        g = self.net.last
        all_fts = feasible_transitions(g)
        fts = [t for t in all_fts if t[0] not in self.exhausted]
        cands = find_next_optimal(fts, g) if fts else []
        self.tp_s += time.perf_counter() - t0
        if not all_fts:
            self.done, self.exit = True, "empty-feasible-set"
            return kb
        if not cands:
            self._expand(kb, "retry")
            return kb
        for cand in cands:
            res = execute_candidate(cand, g, self.executor, kb)
            kb = res.kb
            if res.snapshot is None:
                self.exhausted.add(cand[0])
                continue
            t0 = time.perf_counter()
            g = fire(g, cand[0])
            self.net = self.net.with_last(g)
            self.tp_s += time.perf_counter() - t0
            hook = self.template.binding.on_fire
            if hook is not None:
                hook(g.node(cand[1]).label, res.snapshot, self.ctx)
            break
        t0 = time.perf_counter()
        solved = is_solved(g)
        failed = g.failed()
        self.tp_s += time.perf_counter() - t0
        if solved:
            self.done, self.solved, self.exit = True, True, "solved"
        elif failed:
            self._expand(kb, "failure")
        return kb

    def metrics(self) -> RunMetrics:
        size = len(self.template.graph.nodes) + 1 + len(self.template.graph.arcs) + len(self.template.augmented_arcs)
        assert self.solved == (solved_at_depth(self.net) is not None)
        return RunMetrics(
            d=self.net.depth,
            tp_s=self.tp_s,
            mp_s=self.counters.mp_s,
            attempts=self.counters.attempts,
            executions=self.counters.executions,
            rearranged=self.counters.rearranged,
            solved=self.solved,
            work=self.net.work,
            bound=size * self.net.depth,
            exit=self.exit,
        )


def _motion(config: PlannerConfig):
    return IdealPlanner() if config.ideal_motion else RRTPlanner()


def _robot_seed(seed: int, index: int) -> int:
    return (seed * 1_000_003 + index * 7919) & 0xFFFFFFFF


def run_single(template: DomainTemplate, scenario: Scenario, config: PlannerConfig,
               robot_id: Optional[str] = None, target: Optional[str] = None) -> RunMetrics:
    """Solve one task with one robot until solved, depth limit, or no arc is left."""
    return solve(template, scenario, config, robot_id, target)[0]


def solve(template: DomainTemplate, scenario: Scenario, config: PlannerConfig,
          robot_id: Optional[str] = None, target: Optional[str] = None) -> tuple[RunMetrics, KnowledgeBase]:
    """Like :func:`run_single` but also returns the final knowledge base and its effect log."""
    ws = scenario.snapshot
    robot_id = robot_id or ws.robots[0].id
    target = target if target is not None else (scenario.targets[0] if scenario.targets else None)
    kb = KnowledgeBase(ws)
    ctx = template.binding.new_context()
    ctx.update(robot=robot_id, target=target)
    search = NetworkSearch(
        template, robot_id, kb, config, ctx, _motion(config),
        FailureModel(config.fail_prob, _robot_seed(config.seed, 0)), random.Random(config.seed),
    )
    while not search.done:
        kb = search.step(kb)
    return search.metrics(), kb


def _release_target(kb: KnowledgeBase, target: Optional[str]) -> KnowledgeBase:
    """Hand a grasped target off to storage so the arm is free for the next task."""
    if target is None:
        return kb
    ws = sense(kb)
    if not ws.has_object(target) or ws.object(target).location != HELD:
        return kb
    try:
        return apply(kb, ActionEffect("place", obj=target, arm=ws.object(target).held_by,
                                      destination=Destination.storage()))
    except InconsistentEffect:
        return kb


def run_multi(template: DomainTemplate, scenario: Scenario, config: PlannerConfig,
              targets: Optional[Sequence[str]] = None) -> MultiRunMetrics:
    """Allocate targets, then interleave one search step per robot in turn."""
    ws = scenario.snapshot
    robots = [r.id for r in ws.robots]
    targets = list(targets if targets is not None else scenario.targets)
    raw = raw_sets(ws, robots, targets)
    assignment = allocate(robots, targets, seed=config.seed, raw=raw)
    kb = KnowledgeBase(ws)
    queues = {r: list(assignment.order[r]) for r in robots}
    metrics = {r: RunMetrics(solved=True) for r in robots}
    per_task: dict = {}
    motion = {r: _motion(config) for r in robots}
    failures = {r: FailureModel(config.fail_prob, _robot_seed(config.seed, i)) for i, r in enumerate(robots)}
    rngs = {r: random.Random(_robot_seed(config.seed, i + 101)) for i, r in enumerate(robots)}
    active: dict = {}

    def start(r: str):
        nonlocal kb
        if not queues[r]:
            active.pop(r, None)
            return
        t = queues[r].pop(0)
        ctx = template.binding.new_context()
        ctx.update(robot=r, target=t)
        active[r] = (t, NetworkSearch(template, r, kb, config, ctx, motion[r], failures[r], rngs[r]))

    for r in robots:
        start(r)
    while active:
        for r in robots:
            if r not in active:
                continue
            t, search = active[r]
            kb = search.step(kb)
            if search.done:
                m = search.metrics()
                solved = m.solved
                metrics[r].absorb(m)
                metrics[r].solved = metrics[r].solved and solved
                metrics[r].exit = m.exit if not solved else metrics[r].exit or "solved"
                per_task[t] = solved
                if solved:
                    kb = _release_target(kb, t)
                start(r)
    for r in robots:
        if not assignment.order[r]:
            metrics[r].exit = "idle"
    return MultiRunMetrics(per_robot=metrics, assignment=assignment,
                           combined_utility=assignment.combined_utility, per_task=per_task)
