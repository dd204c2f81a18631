"""AND/OR graphs, their augmentation with a workspace root, and graph networks.

Graphs are values: ``fire``, ``mark_achieved`` and ``expand`` return new
objects and leave their inputs untouched. The structural part (nodes and
hyper-arcs) of an :class:`AndOrGraph` is shared between all augmented copies.

Work accounting
---------------
Every augmented graph carries a ``work`` counter that is incremented once per
node that becomes achieved (the visit includes notifying the arcs that list
the node as a child) and once per hyper-arc that becomes enabled. Each node
and each arc can contribute at most once, so the counter of one graph never
exceeds ``|N| + |H|`` and a network of depth ``d`` stays within
``(|N| + |H|) * d``.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence

from .errors import AlreadySolved, CycleError, DanglingRef, DepthLimitReached, InfeasibleFire

NodeId = int
ArcId = int

DEFAULT_DEPTH_LIMIT = 256

GEOMETRIC_VERBS = frozenset({"pick", "place", "push", "handover", "move-base"})
NON_GEOMETRIC_VERBS = frozenset({"cook", "wash", "wait", "sense"})
VERBS = GEOMETRIC_VERBS | NON_GEOMETRIC_VERBS


class NodeKind(str, enum.Enum):
    INTERNAL = "internal"
    SUCCESS = "success-terminal"
    FAILURE = "failure-terminal"
    ROOT = "augmented-root"


@dataclass(frozen=True)
class ActionSpec:
    """One symbolic action carried by a hyper-arc.

    ``obj`` and ``target`` are either concrete ids or role names (leading
    ``$``) that a domain binding resolves against the current workspace.
    """

    verb: str
    obj: Optional[str] = None
    agent_hint: Optional[str] = None
    target: Optional[str] = None

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ValueError(f"unknown verb {self.verb!r}")

    @property
    def geometric(self) -> bool:
        return self.verb in GEOMETRIC_VERBS


@dataclass(frozen=True)
class Node:
    id: NodeId
    label: str
    kind: NodeKind = NodeKind.INTERNAL


@dataclass(frozen=True)
class HyperArc:
    id: ArcId
    parent: NodeId
    children: frozenset
    actions: tuple = ()
    cost: float = 1.0
    name: Optional[str] = None

    def __post_init__(self):
        if not self.children:
            raise ValueError("a hyper-arc needs at least one child")
        if self.cost < 0:
            raise ValueError("arc cost must be non-negative")


class AndOrGraph:
    """Validated, append-only AND/OR graph structure."""

    def __init__(self, nodes: Sequence[Node], arcs: Sequence[HyperArc]):
        self.nodes: tuple[Node, ...] = tuple(nodes)
        self.arcs: tuple[HyperArc, ...] = tuple(arcs)
        self._node_index = {n.id: n for n in self.nodes}
        self._arc_index = {a.id: a for a in self.arcs}
        self._label_index = {n.label: n.id for n in self.nodes}
        self._child_arcs: dict[NodeId, list[ArcId]] = {n.id: [] for n in self.nodes}
        self._parent_arcs: dict[NodeId, list[ArcId]] = {n.id: [] for n in self.nodes}
        for a in self.arcs:
            self._parent_arcs[a.parent].append(a.id)
            for c in a.children:
                self._child_arcs[c].append(a.id)

    def node(self, nid: NodeId) -> Node:
        return self._node_index[nid]

    def arc(self, aid: ArcId) -> HyperArc:
        return self._arc_index[aid]

    def node_id(self, label: str) -> NodeId:
        return self._label_index[label]

    def has_label(self, label: str) -> bool:
        return label in self._label_index

    def arcs_from_child(self, nid: NodeId) -> Sequence[ArcId]:
        return self._child_arcs[nid]

    def arcs_into(self, nid: NodeId) -> Sequence[ArcId]:
        return self._parent_arcs[nid]

    def leaves(self) -> list[NodeId]:
        return [n.id for n in self.nodes if not self._parent_arcs[n.id] and n.kind is not NodeKind.ROOT]

    def topological_order(self) -> list[NodeId]:
        """Children before parents (Kahn's algorithm)."""
        indeg = {n.id: 0 for n in self.nodes}
        succ: dict[NodeId, set] = {n.id: set() for n in self.nodes}
        for a in self.arcs:
            for c in a.children:
                if a.parent not in succ[c]:
                    succ[c].add(a.parent)
                    indeg[a.parent] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for p in sorted(succ[n]):
                indeg[p] -= 1
                if indeg[p] == 0:
                    ready.append(p)
        if len(order) != len(self.nodes):
            raise CycleError("graph contains a cycle")
        return order

    def structural_key(self) -> tuple:
        nodes = tuple((n.id, n.label, n.kind.value) for n in self.nodes)
        arcs = tuple(
            (a.id, a.parent, tuple(sorted(a.children)), a.actions, a.cost, a.name) for a in self.arcs
        )
        return nodes, arcs

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"AndOrGraph(nodes={len(self.nodes)}, arcs={len(self.arcs)})"


def build(nodes: Iterable[Node], arcs: Iterable[HyperArc]) -> AndOrGraph:
    """Validate ``nodes`` and ``arcs`` and return the graph.

    Raises DanglingRef for unknown endpoints and CycleError for self-loops or
    longer cycles. Terminal nodes may not appear among an arc's children.
    """
    nodes = list(nodes)
    arcs = list(arcs)
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate node ids")
    labels = [n.label for n in nodes]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate node labels")
    arc_ids = [a.id for a in arcs]
    if len(set(arc_ids)) != len(arc_ids):
        raise ValueError("duplicate arc ids")
    known = set(ids)
    kinds = {n.id: n.kind for n in nodes}
    for a in arcs:
        for end in (a.parent, *a.children):
            if end not in known:
                raise DanglingRef(f"arc {a.id} references missing node {end}")
        if a.parent in a.children:
            raise CycleError(f"arc {a.id} is a self-loop on node {a.parent}")
        for c in a.children:
            if kinds[c] in (NodeKind.SUCCESS, NodeKind.FAILURE):
                raise ValueError(f"terminal node {c} cannot be a child of arc {a.id}")
        if kinds[a.parent] is NodeKind.ROOT:
            raise ValueError(f"augmented root {a.parent} cannot be an arc parent")
    g = AndOrGraph(nodes, arcs)
    g.topological_order()
    return g


@dataclass(frozen=True)
class AugmentedArcSpec:
    """Arc from the augmented root (plus optional extra children) to ``parent``."""

    parent: str
    actions: tuple = ()
    cost: float = 1.0
    extra_children: tuple = ()
    name: Optional[str] = None


_identity = itertools.count(1)


class AugmentedGraph:
    """An AND/OR graph with a root node bound to a workspace snapshot."""

    def __init__(
        self,
        base: AndOrGraph,
        full: AndOrGraph,
        root: NodeId,
        binding: Any,
        augmented_arcs: frozenset,
        achieved: frozenset,
        enabled: frozenset,
        work: int,
        identity: int,
    ):
        self.base = base
        self.full = full
        self.root = root
        self.binding = binding
        self.augmented_arcs = augmented_arcs
        self.achieved = achieved
        self.enabled = enabled
        self.work = work
        self.identity = identity

    @property
    def nodes(self):
        return self.full.nodes

    @property
    def arcs(self):
        return self.full.arcs

    def node(self, nid: NodeId) -> Node:
        return self.full.node(nid)

    def arc(self, aid: ArcId) -> HyperArc:
        return self.full.arc(aid)

    def node_id(self, label: str) -> NodeId:
        return self.full.node_id(label)

    def is_achieved(self, node: NodeId | str) -> bool:
        if isinstance(node, str):
            node = self.node_id(node)
        return node in self.achieved

    def achieved_labels(self) -> set[str]:
        return {self.full.node(n).label for n in self.achieved}

    def failed(self) -> bool:
        return any(self.full.node(n).kind is NodeKind.FAILURE for n in self.achieved)

    def _with(self, achieved, enabled, work) -> "AugmentedGraph":
        return AugmentedGraph(
            self.base, self.full, self.root, self.binding, self.augmented_arcs,
            achieved, enabled, work, self.identity,
        )

    def structural_hash(self) -> str:
        payload = repr((self.full.structural_key(), self.root, sorted(self.achieved), self.work))
        return hashlib.sha256(payload.encode()).hexdigest()

    def __repr__(self):
        return (
            f"AugmentedGraph(id={self.identity}, nodes={len(self.full.nodes)}, "
            f"arcs={len(self.full.arcs)}, achieved={sorted(self.achieved_labels())})"
        )


def _propagate(full: AndOrGraph, achieved: set, enabled: set, new_nodes: Iterable[NodeId]) -> int:
    """Mark ``new_nodes`` achieved and enable arcs whose children all hold."""
    work = 0
    for n in new_nodes:
        if n in achieved:
            continue
        achieved.add(n)
        work += 1
        for aid in full.arcs_from_child(n):
            if aid in enabled:
                continue
            if all(c in achieved for c in full.arc(aid).children):
                enabled.add(aid)
                work += 1
    return work


def augment(graph: AndOrGraph, snapshot: Any, augmented_arcs: Sequence[AugmentedArcSpec], root_label: str = "INIT") -> AugmentedGraph:
    """Add a root bound to ``snapshot`` plus the arcs leaving it.

    The root counts as achieved from construction, so arcs whose only child is
    the root are immediately enabled.
    """
    root_id = max((n.id for n in graph.nodes), default=-1) + 1
    next_arc = max((a.id for a in graph.arcs), default=-1) + 1
    new_arcs = []
    for spec in augmented_arcs:
        if not graph.has_label(spec.parent):
            raise DanglingRef(f"augmented arc targets unknown node {spec.parent!r}")
        extra = []
        for lbl in spec.extra_children:
            if not graph.has_label(lbl):
                raise DanglingRef(f"augmented arc uses unknown child {lbl!r}")
            extra.append(graph.node_id(lbl))
        new_arcs.append(
            HyperArc(
                id=next_arc,
                parent=graph.node_id(spec.parent),
                children=frozenset([root_id, *extra]),
                actions=tuple(spec.actions),
                cost=spec.cost,
                name=spec.name,
            )
        )
        next_arc += 1
    root = Node(root_id, root_label, NodeKind.ROOT)
    full = build([*graph.nodes, root], [*graph.arcs, *new_arcs])
    achieved: set = set()
    enabled: set = set()
    work = _propagate(full, achieved, enabled, [root_id])
    return AugmentedGraph(
        base=graph,
        full=full,
        root=root_id,
        binding=snapshot,
        augmented_arcs=frozenset(a.id for a in new_arcs),
        achieved=frozenset(achieved),
        enabled=frozenset(enabled),
        work=work,
        identity=next(_identity),
    )


def mark_achieved(g: AugmentedGraph, nodes: Iterable[NodeId | str]) -> AugmentedGraph:
    """Return a copy with extra nodes achieved (used to seed leaf facts)."""
    ids = [g.node_id(n) if isinstance(n, str) else n for n in nodes]
    achieved = set(g.achieved)
    enabled = set(g.enabled)
    work = g.work + _propagate(g.full, achieved, enabled, ids)
    return g._with(frozenset(achieved), frozenset(enabled), work)


def _arc_order(g: AugmentedGraph, aid: ArcId):
    return (g.arc(aid).cost, aid)


def feasible_transitions(g: AugmentedGraph) -> list[tuple[ArcId, NodeId]]:
    """Enabled arcs whose parent is not yet achieved, ordered by (cost, id)."""
    out = [(aid, g.arc(aid).parent) for aid in g.enabled if g.arc(aid).parent not in g.achieved]
    out.sort(key=lambda t: _arc_order(g, t[0]))
    return out


def fire(g: AugmentedGraph, arc: ArcId) -> AugmentedGraph:
    """Mark the parent of ``arc`` achieved; the arc must be feasible."""
    a = g.arc(arc)
    if arc not in g.enabled or a.parent in g.achieved:
        missing = [g.node(c).label for c in a.children if c not in g.achieved]
        raise InfeasibleFire(f"arc {arc} is not feasible (unachieved children: {missing})")
    achieved = set(g.achieved)
    enabled = set(g.enabled)
    work = g.work + _propagate(g.full, achieved, enabled, [a.parent])
    return g._with(frozenset(achieved), frozenset(enabled), work)


def is_solved(g: AugmentedGraph) -> bool:
    return any(g.node(n).kind is NodeKind.SUCCESS for n in g.achieved)


@dataclass(frozen=True)
class Transition:
    source: int
    reason: str
    epoch: Optional[int] = None


@dataclass(frozen=True)
class GraphNetwork:
    graphs: tuple = ()
    transitions: tuple = ()
    depth_limit: int = DEFAULT_DEPTH_LIMIT

    def __post_init__(self):
        if self.depth_limit < 1:
            raise ValueError("depth limit must be positive")
        if self.graphs and len(self.transitions) != len(self.graphs) - 1:
            raise ValueError("a network of d graphs needs d - 1 transitions")

    @property
    def depth(self) -> int:
        return len(self.graphs)

    @property
    def last(self) -> AugmentedGraph:
        return self.graphs[-1]

    @property
    def work(self) -> int:
        return sum(g.work for g in self.graphs)

    def with_last(self, g: AugmentedGraph) -> "GraphNetwork":
        return GraphNetwork(self.graphs[:-1] + (g,), self.transitions, self.depth_limit)


def start_network(graph: AndOrGraph, snapshot: Any, augmented_arcs: Sequence[AugmentedArcSpec], depth_limit: int = DEFAULT_DEPTH_LIMIT, root_label: str = "INIT") -> GraphNetwork:
    g = augment(graph, snapshot, augmented_arcs, root_label=f"{root_label}#0")
    return GraphNetwork((g,), (), depth_limit)


def expand(
    net: GraphNetwork,
    snapshot: Any,
    template: AndOrGraph,
    augmented_arcs: Sequence[AugmentedArcSpec],
    reason: str = "failure",
    root_label: str = "INIT",
) -> GraphNetwork:
    """Append a fresh augmented copy of ``template`` bound to ``snapshot``."""
    if net.graphs and is_solved(net.last):
        raise AlreadySolved("the last graph of the network is already solved")
    if net.depth >= net.depth_limit:
        raise DepthLimitReached(f"depth limit {net.depth_limit} reached")
    g = augment(template, snapshot, augmented_arcs, root_label=f"{root_label}#{net.depth}")
    if not net.graphs:
        return GraphNetwork((g,), (), net.depth_limit)
    epoch = getattr(snapshot, "epoch", None)
    t = Transition(source=net.depth - 1, reason=reason, epoch=epoch)
    return GraphNetwork(net.graphs + (g,), net.transitions + (t,), net.depth_limit)


def solved_at_depth(net: GraphNetwork) -> Optional[int]:
    """1-based index of the first solved graph, or None."""
    for i, g in enumerate(net.graphs, start=1):
        if is_solved(g):
            return i
    return None


def graph_from_mapping(doc: Mapping) -> tuple[AndOrGraph, list[AugmentedArcSpec]]:
    """Inverse of :func:`graph_to_mapping`."""
    kinds = {k.value: k for k in NodeKind}
    nodes = [Node(int(n["id"]), n["label"], kinds[n.get("kind", "internal")]) for n in doc["nodes"]]
    arcs = []
    for a in doc["arcs"]:
        arcs.append(
            HyperArc(
                id=int(a["id"]),
                parent=int(a["parent"]),
                children=frozenset(int(c) for c in a["children"]),
                actions=tuple(ActionSpec(**x) for x in a.get("actions", [])),
                cost=float(a.get("cost", 1.0)),
                name=a.get("name"),
            )
        )
    aug = [
        AugmentedArcSpec(
            parent=s["parent"],
            actions=tuple(ActionSpec(**x) for x in s.get("actions", [])),
            cost=float(s.get("cost", 1.0)),
            extra_children=tuple(s.get("extra_children", [])),
            name=s.get("name"),
        )
        for s in doc.get("augmented_arcs", [])
    ]
    return build(nodes, arcs), aug


def _action_doc(a: ActionSpec) -> dict:
    d = {"verb": a.verb}
    for k in ("obj", "agent_hint", "target"):
        v = getattr(a, k)
        if v is not None:
            d[k] = v
    return d


def graph_to_mapping(graph: AndOrGraph, augmented_arcs: Sequence[AugmentedArcSpec] = ()) -> dict:
    return {
        "nodes": [{"id": n.id, "label": n.label, "kind": n.kind.value} for n in graph.nodes],
        "arcs": [
            {
                "id": a.id,
                "parent": a.parent,
                "children": sorted(a.children),
                "actions": [_action_doc(x) for x in a.actions],
                "cost": a.cost,
                **({"name": a.name} if a.name else {}),
            }
            for a in graph.arcs
        ],
        "augmented_arcs": [
            {
                "parent": s.parent,
                "actions": [_action_doc(x) for x in s.actions],
                "cost": s.cost,
                **({"extra_children": list(s.extra_children)} if s.extra_children else {}),
                **({"name": s.name} if s.name else {}),
            }
            for s in augmented_arcs
        ],
    }
