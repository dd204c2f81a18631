from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmpidan.errors import AlreadySolved, CycleError, DanglingRef, DepthLimitReached, InfeasibleFire
from tmpidan.graph import (
    ActionSpec,
    AugmentedArcSpec,
    HyperArc,
    Node,
    NodeKind,
    augment,
    build,
    expand,
    feasible_transitions,
    fire,
    graph_from_mapping,
    graph_to_mapping,
    is_solved,
    mark_achieved,
    solved_at_depth,
    start_network,
)

LABELS = ["object_clear", "gripper_empty", "object_in_hand", "object_on_table", "target_on_table"]


def pick_and_place():
    """Five-node pick-and-place graph: h1 grasps, h2 stores, h3 places the target."""
    kinds = {"object_on_table": NodeKind.FAILURE, "target_on_table": NodeKind.SUCCESS}
    nodes = [Node(i, lbl, kinds.get(lbl, NodeKind.INTERNAL)) for i, lbl in enumerate(LABELS)]
    arcs = [
        HyperArc(0, 2, frozenset({0, 1}), (ActionSpec("pick", "o"),)),
        HyperArc(1, 3, frozenset({2}), (ActionSpec("place", "o"),), cost=2.0),
        HyperArc(2, 4, frozenset({2}), (ActionSpec("place", "o"),)),
    ]
    return build(nodes, arcs)


AUG = (AugmentedArcSpec("object_clear", (ActionSpec("sense"),)), AugmentedArcSpec("gripper_empty"))


def test_pick_and_place_shape():
    g = pick_and_place()
    assert (len(g.nodes), len(g.arcs)) == (5, 3)
    a = augment(g, None, AUG)
    assert (len(a.nodes), len(a.arcs)) == (6, 5)
    assert a.node(a.root).kind is NodeKind.ROOT
    assert a.is_achieved(a.root)


def test_single_success_node_is_valid():
    g = build([Node(0, "done", NodeKind.SUCCESS)], [])
    assert g.leaves() == [0]


@pytest.mark.parametrize("arcs, err", [
    ([HyperArc(0, 0, frozenset({0}))], CycleError),
    ([HyperArc(0, 0, frozenset({1})), HyperArc(1, 1, frozenset({0}))], CycleError),
    ([HyperArc(0, 0, frozenset({7}))], DanglingRef),
])
def test_build_rejects(arcs, err):
    with pytest.raises(err):
        build([Node(0, "a"), Node(1, "b")], arcs)


def test_terminal_cannot_be_child():
    with pytest.raises(ValueError):
        build([Node(0, "a"), Node(1, "s", NodeKind.SUCCESS)], [HyperArc(0, 0, frozenset({1}))])


def test_empty_augmented_spec_leaves_root_isolated():
    a = augment(pick_and_place(), None, ())
    assert feasible_transitions(a) == []
    assert not is_solved(a)


def test_augment_twice_structurally_equal_distinct_identity():
    g = pick_and_place()
    a, b = augment(g, None, AUG), augment(g, None, AUG)
    assert a.structural_hash() == b.structural_hash()
    assert a.identity != b.identity


def test_feasible_transitions_after_leaves():
    a = augment(pick_and_place(), None, AUG)
    a = mark_achieved(a, ["object_clear", "gripper_empty"])
    assert feasible_transitions(a) == [(0, a.node_id("object_in_hand"))]


def test_fire_order_reaches_success():
    a = augment(pick_and_place(), None, AUG)
    assert not is_solved(a)
    with pytest.raises(InfeasibleFire):
        fire(a, 0)
    for arc in (3, 4, 0, 2):
        a = fire(a, arc)
    assert a.is_achieved("object_in_hand")
    assert is_solved(a)
    assert feasible_transitions(a) == [(1, a.node_id("object_on_table"))]


def test_failure_terminal_is_not_success():
    a = augment(pick_and_place(), None, AUG)
    for arc in (3, 4, 0, 1):
        a = fire(a, arc)
    assert a.failed() and not is_solved(a)


def test_brute_force_transitions_with_or_arcs():
    """Seven nodes, two OR arcs into ``p``: compare against a truth table over every achievement set."""
    nodes = [Node(i, f"n{i}") for i in range(6)] + [Node(6, "p", NodeKind.SUCCESS)]
    arcs = [
        HyperArc(0, 6, frozenset({0, 1})),
        HyperArc(1, 6, frozenset({2, 3, 4})),
        HyperArc(2, 5, frozenset({0})),
    ]
    g = build(nodes, arcs)
    for bits in itertools.product([False, True], repeat=6):
        achieved = {i for i, b in enumerate(bits) if b}
        a = mark_achieved(augment(g, None, ()), achieved)
        got = {aid for aid, _ in feasible_transitions(a)}
        want = {arc.id for arc in arcs if arc.children <= achieved and arc.parent not in achieved}
        assert got == want, achieved


@st.composite
def random_dag(draw):
    n = draw(st.integers(2, 9))
    arcs = []
    for aid in range(draw(st.integers(1, 12))):
        parent = draw(st.integers(1, n - 1))
        kids = draw(st.sets(st.integers(0, parent - 1), min_size=1, max_size=3))
        arcs.append(HyperArc(aid, parent, frozenset(kids)))
    return n, arcs


@given(random_dag(), st.data())
@settings(max_examples=60, deadline=None)
def test_fire_semantics_monotone_and_bounded(dag, data):
    n, arcs = dag
    g = build([Node(i, f"n{i}") for i in range(n)], arcs)
    a = mark_achieved(augment(g, None, ()), [0])
    seen = set(a.achieved)
    while True:
        fts = feasible_transitions(a)
        for arc in g.arcs:
            ok = arc.children <= a.achieved and arc.parent not in a.achieved
            assert ok == any(t[0] == arc.id for t in fts)
        if not fts:
            break
        aid, _ = data.draw(st.sampled_from(fts))
        a = fire(a, aid)
        assert seen <= a.achieved
        seen = set(a.achieved)
    assert a.work <= len(a.nodes) + len(a.arcs)


@given(random_dag(), st.integers(0, 8), st.integers(1, 8))
@settings(max_examples=40, deadline=None)
def test_cycle_injection_rejected(dag, lo, hi):
    n, arcs = dag
    lo, hi = lo % n, hi % n
    if lo >= hi:
        return
    # an arc with parent lo and child hi closes a cycle iff hi is already an ancestor of lo
    g = build([Node(i, f"n{i}") for i in range(n)], arcs)
    up = {lo}
    changed = True
    while changed:
        changed = False
        for a in g.arcs:
            if a.children & up and a.parent not in up:
                up.add(a.parent)
                changed = True
    bad = arcs + [HyperArc(len(arcs), lo, frozenset({hi}))]
    if hi in up:
        with pytest.raises(CycleError):
            build([Node(i, f"n{i}") for i in range(n)], bad)
    else:
        build([Node(i, f"n{i}") for i in range(n)], bad)


def test_network_expand_and_depth():
    g = pick_and_place()
    net = start_network(g, "s0", AUG, depth_limit=2)
    first = net.last.structural_hash()
    net = expand(net, "s1", g, AUG, "failure")
    assert net.depth == 2
    assert net.graphs[0].structural_hash() == first
    assert net.last.binding == "s1"
    assert net.last.node(net.last.root).label == "INIT#1"
    assert net.transitions[0].reason == "failure"
    with pytest.raises(DepthLimitReached):
        expand(net, "s2", g, AUG)
    assert solved_at_depth(net) is None


def test_expand_solved_network_refused():
    g = pick_and_place()
    net = start_network(g, None, AUG)
    a = net.last
    for arc in (3, 4, 0, 2):
        a = fire(a, arc)
    net = net.with_last(a)
    assert solved_at_depth(net) == 1
    with pytest.raises(AlreadySolved):
        expand(net, None, g, AUG)


def test_mapping_round_trip():
    g = pick_and_place()
    doc = graph_to_mapping(g, AUG)
    g2, aug2 = graph_from_mapping(doc)
    assert g2.structural_key() == g.structural_key()
    assert tuple(aug2) == AUG


def test_unknown_verb():
    with pytest.raises(ValueError):
        ActionSpec("teleport")
    assert ActionSpec("pick").geometric and not ActionSpec("cook").geometric
