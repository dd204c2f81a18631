from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import disc, solo_robot, workspace
from tmpidan.allocation import (
    ObstacleLedger,
    allocate,
    corrected_count,
    exhaustive_allocate,
    raw_sets,
    utility,
)
from tmpidan.errors import FewerTasksThanRobots, MissingRawSet, TooLarge
from tmpidan.workspace import TARGET

fs = frozenset


def test_corrected_count_examples():
    raw = {("r1", "t0"): fs("a"), ("r1", "t1"): fs("ab"), ("r1", "t2"): fs("bc"),
           ("r2", "t1"): fs("c"), ("r1", "t3"): fs("abc")}
    assert corrected_count(ObstacleLedger(raw), "r1", "t3") == 3
    assert corrected_count(ObstacleLedger(raw, (("r1", "t1"),)), "r1", "t2") == 1
    both = ObstacleLedger(raw, (("r2", "t1"), ("r1", "t0")))
    assert corrected_count(both, "r1", "t3") == 1
    with pytest.raises(MissingRawSet):
        corrected_count(both, "r9", "t3")


def test_ledger_refuses_double_allocation():
    with pytest.raises(ValueError):
        ObstacleLedger({}, (("r1", "t1"), ("r2", "t1")))


@pytest.mark.parametrize("k, u", [(0, 1.0), (1, 0.5), (3, 0.25)])
def test_utility_values(k, u):
    assert utility(k) == u


def test_utility_rejects_negative():
    with pytest.raises(ValueError):
        utility(-1)


def test_allocate_unambiguous():
    raw = {("r1", "t1"): fs(), ("r2", "t1"): fs("xy"), ("r1", "t2"): fs("abc"), ("r2", "t2"): fs("d")}
    for seed in range(5):
        a = allocate(["r1", "r2"], ["t1", "t2"], seed=seed, raw=raw)
        assert a.binding == {"t1": "r1", "t2": "r2"}
    assert exhaustive_allocate(["r1", "r2"], ["t1", "t2"], raw=raw).binding == a.binding


def _shuffled(seed, items):
    items = list(items)
    random.Random(seed).shuffle(items)
    return items


def test_tie_goes_to_idle_robot():
    raw = {("r1", "t1"): fs(), ("r2", "t1"): fs("x"), ("r1", "t2"): fs("y"), ("r2", "t2"): fs("z")}
    seeds = [s for s in range(50) if _shuffled(s, ["t1", "t2"]) == ["t1", "t2"]]
    assert seeds
    for s in seeds:
        assert allocate(["r1", "r2"], ["t1", "t2"], seed=s, raw=raw).binding["t2"] == "r2"


def test_errors():
    with pytest.raises(FewerTasksThanRobots):
        allocate(["r1", "r2"], ["t1"], raw={})
    raw = {(r, t): fs() for r in "abcd" for t in range(7)}
    with pytest.raises(TooLarge):
        exhaustive_allocate(list("abcd"), list(range(7)), raw=raw)
    with pytest.raises(MissingRawSet):
        exhaustive_allocate(["a"], [0, 1], raw={("a", 0): fs()})


def test_single_robot_queues_everything():
    raw = {("r", t): fs(t) for t in "pqr"}
    a = exhaustive_allocate(["r"], list("pqr"), raw=raw)
    assert sorted(a.order["r"]) == list("pqr")
    assert a.combined_utility == pytest.approx(1.5)


def test_crafted_greedy_gap():
    # greedy takes the cheap task first and pays full price for the shared blockers later
    raw = {("r", "t1"): fs("a"), ("r", "t2"): fs("abc"), ("r", "t3"): fs("abc")}
    best = exhaustive_allocate(["r"], ["t1", "t2", "t3"], raw=raw).combined_utility
    assert best == pytest.approx(1 / 4 + 1 + 1)
    assert best == pytest.approx(oracles.brute_force_allocation(["r"], ["t1", "t2", "t3"], raw))
    for s in range(10):
        assert allocate(["r"], ["t1", "t2", "t3"], seed=s, raw=raw).combined_utility <= best + 1e-12


@st.composite
def instance(draw):
    n_r = draw(st.integers(1, 3))
    n_t = draw(st.integers(n_r, 5))
    pool = list("abcdefgh")
    robots = [f"r{i}" for i in range(n_r)]
    tasks = [f"t{j}" for j in range(n_t)]
    raw = {(r, t): fs(draw(st.sets(st.sampled_from(pool), max_size=5))) for r in robots for t in tasks}
    return robots, tasks, raw


@given(instance(), st.integers(0, 1000))
@settings(max_examples=80, deadline=None)
def test_exhaustive_matches_brute_force(inst, seed):
    robots, tasks, raw = inst
    best = exhaustive_allocate(robots, tasks, raw=raw)
    assert math.isclose(best.combined_utility, oracles.brute_force_allocation(robots, tasks, raw), abs_tol=1e-12)
    g = allocate(robots, tasks, seed=seed, raw=raw)
    assert g.combined_utility <= best.combined_utility + 1e-12
    for a in (g, best):
        assert all(sum(a.indicator(r, t) for r in robots) == 1 for t in tasks)
        assert all(0 < utility(k) <= 1 for _, _, k in a.steps)


def test_raw_sets_from_workspace():
    ws = workspace([disc("t", 0.45, 0.3, category=TARGET), disc("far", 0.8, 0.55), disc("u", 0.2, 0.55)],
                   robots=(solo_robot(reach=0.1),))
    # unreachable target: everything else on the table counts
    assert raw_sets(ws, ["solo"], ["t"]) == {("solo", "t"): fs({"far", "u"})}
    ws = workspace(ws.objects)
    assert raw_sets(ws, ["solo"], ["t"]) == {("solo", "t"): fs()}
