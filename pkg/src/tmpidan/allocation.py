"""Greedy multi-robot task allocation driven by rearrangement counts.

A task is a target object. For every (robot, task) pair the raw set holds
the objects that robot would have to move first. The corrected count
discounts objects already credited to earlier allocations, whether to the
same robot or to another one. An object is credited at most once because
the discount uses the union of earlier sets.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional, Sequence

from .errors import FewerTasksThanRobots, MissingRawSet, NoFeasibleAngle, TooLarge
from .heuristic import objects_to_rearrange
from .workspace import FIXTURE, TABLE, WorkspaceSnapshot


@dataclass(frozen=True)
class ObstacleLedger:
    raw: Mapping  # (robot, task) -> frozenset of object ids
    history: tuple = ()  # ((robot, task), ...) in allocation order

    def __post_init__(self):
        tasks = [t for _, t in self.history]
        if len(set(tasks)) != len(tasks):
            raise ValueError("a task can be allocated only once")

    def credited(self) -> frozenset:
        out: set = set()
        for key in self.history:
            out |= self.raw[key]
        return frozenset(out)

    def record(self, robot: str, task: str) -> "ObstacleLedger":
        return ObstacleLedger(self.raw, self.history + ((robot, task),))


def corrected_count(ledger: ObstacleLedger, robot: str, task: str) -> int:
    key = (robot, task)
    if key not in ledger.raw:
        raise MissingRawSet(f"no rearrangement set for robot {robot} and task {task}")
    return len(ledger.raw[key] - ledger.credited())


def utility(count: int) -> float:
    if count < 0:
        raise ValueError("count must be non-negative")
    return 1.0 / (1.0 + count)


@dataclass
class Assignment:
    binding: dict  # task -> robot
    order: dict  # robot -> list of tasks in execution order
    steps: list = field(default_factory=list)  # (robot, task, corrected count) in allocation order

    @property
    def combined_utility(self) -> float:
        return math.fsum(utility(k) for _, _, k in self.steps)

    def indicator(self, robot: str, task: str) -> int:
        return int(self.binding.get(task) == robot)


def raw_sets(ws: WorkspaceSnapshot, robots: Sequence[str], tasks: Sequence[str]) -> dict:
    """Heuristic sets for every pair; an unreachable target counts every other object."""
    out = {}
    movable = frozenset(o.id for o in ws.objects if o.location == TABLE and o.category != FIXTURE)
    for r in robots:
        robot = ws.robot(r)
        for t in tasks:
            try:
                out[(r, t)] = objects_to_rearrange(robot, t, ws)
            except NoFeasibleAngle:
                out[(r, t)] = movable - {t}
    return out


def _check(robots: Sequence[str], tasks: Sequence[str]):
    if not robots:
        raise ValueError("need at least one robot")
    if len(tasks) < len(robots):
        raise FewerTasksThanRobots(f"{len(tasks)} tasks for {len(robots)} robots")


def allocate(robots: Sequence[str], tasks: Sequence[str], ws: Optional[WorkspaceSnapshot] = None,
             seed: int = 0, raw: Optional[Mapping] = None) -> Assignment:
    """Sequential greedy allocation in a seeded random task order.

    Ties in utility go to a robot without tasks; remaining ties are broken
    by the seeded generator.
    """
    _check(robots, tasks)
    if raw is None:
        if ws is None:
            raise ValueError("either a workspace or raw sets are required")
        raw = raw_sets(ws, robots, tasks)
    rng = random.Random(seed)
    order = list(tasks)
    rng.shuffle(order)
    ledger = ObstacleLedger(raw)
    result = Assignment(binding={}, order={r: [] for r in robots})
    for t in order:
        counts = {r: corrected_count(ledger, r, t) for r in robots}
        best = min(counts.values())
        tied = [r for r in robots if counts[r] == best]
        if len(tied) > 1:
            idle = [r for r in tied if not result.order[r]]
            tied = idle or tied
        winner = tied[0] if len(tied) == 1 else rng.choice(tied)
        result.binding[t] = winner
        result.order[winner].append(t)
        result.steps.append((winner, t, counts[winner]))
        ledger = ledger.record(winner, t)
    return result


def exhaustive_allocate(robots: Sequence[str], tasks: Sequence[str], ws: Optional[WorkspaceSnapshot] = None,
                        raw: Optional[Mapping] = None, max_robots: int = 3, max_tasks: int = 6) -> Assignment:
    """Best allocation over every task order and robot choice.

    The corrected count of a step depends only on which pairs were allocated
    before it, so a memo over those sets replaces enumerating sequences.
    """
    _check(robots, tasks)
    if len(robots) > max_robots or len(tasks) > max_tasks:
        raise TooLarge(f"oracle limited to {max_robots} robots and {max_tasks} tasks")
    if raw is None:
        if ws is None:
            raise ValueError("either a workspace or raw sets are required")
        raw = raw_sets(ws, robots, tasks)
    for r in robots:
        for t in tasks:
            if (r, t) not in raw:
                raise MissingRawSet(f"no rearrangement set for robot {r} and task {t}")
    robots = list(robots)
    tasks = list(tasks)

    @lru_cache(maxsize=None)
    def best(done: frozenset) -> tuple:
        """(value, first step) for the remaining tasks given allocated pairs ``done``."""
        left = [t for t in tasks if all(t != dt for _, dt in done)]
        if not left:
            return 0.0, None
        credited: set = set()
        for pair in done:
            credited |= raw[pair]
        top = (-1.0, None)
        for t in left:
            for r in robots:
                k = len(raw[(r, t)] - credited)
                val = utility(k) + best(done | {(r, t)})[0]
                if val > top[0] + 1e-12:
                    top = (val, (r, t, k))
        return top

    result = Assignment(binding={}, order={r: [] for r in robots})
    done: frozenset = frozenset()
    while len(done) < len(tasks):
        _, (r, t, k) = best(done)
        result.binding[t] = r
        result.order[r].append(t)
        result.steps.append((r, t, k))
        done = done | {(r, t)}
    return result
