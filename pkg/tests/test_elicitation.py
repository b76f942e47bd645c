import json
import random

import pytest

from emmkit import (
    BINARY,
    FactorNode,
    UsageError,
    ValidationError,
    make_lattice,
    start_session,
    start_session_raw,
)
from emmkit.elicitation import ACTIVE, COMPLETE, CONFLICTED
from emmkit.persistence import replay_session, session_log_lines
from support import binary_lattice, brute_force_monotone_maps, three_scale


def node_with_children(n, scale=BINARY, out=BINARY):
    return FactorNode(
        id="parent",
        prompt="Generalized question?",
        scale=out,
        children=[FactorNode(id=f"c{i}", prompt=f"Child {i}?", scale=scale) for i in range(n)],
    )


def conflicted_session():
    """Deterministic recipe: one 3-valued child.  Greedy opens in the
    middle (best worst-case tightening); answering medium there caps the
    bottom point at medium, so answering high at the bottom contradicts."""
    three = three_scale()
    s = start_session_raw(make_lattice([three]), three, strategy="greedy", expert="e1")
    assert s.pending == (1,)
    s.step(1)
    assert s.status == ACTIVE
    assert s.pending == (0,)
    assert s.fn.bounds(s.pending) == (0, 1)
    s.step(2)  # above the inferred cap: contradiction
    assert s.status == CONFLICTED
    return s


def test_session_sizes():
    s = start_session(node_with_children(3), expert="e1")
    assert s.counts == {"asked": 0, "inferred": 0, "remaining": 8}
    s1 = start_session(node_with_children(1), expert="e1")
    assert s1.counts["remaining"] == 2
    s243 = start_session(node_with_children(5, scale=three_scale(), out=three_scale()),
                         strategy="greedy", expert="e1")
    assert s243.counts["remaining"] == 243


def test_start_session_needs_children():
    with pytest.raises(ValidationError):
        start_session(FactorNode(id="leaf", prompt="Leaf?"))


def test_first_yes_infers_the_strict_up_set():
    s = start_session(node_with_children(3), expert="e1")
    assert s.pending == (0, 0, 1)  # bottom of the shortest chain
    s.step(1)
    counts = s.counts
    assert counts["asked"] == 1
    assert counts["inferred"] == 3  # (0,1,1), (1,0,1), (1,1,1)
    assert counts["asked"] + counts["inferred"] + counts["remaining"] == 8


def test_counts_invariant_holds_throughout():
    rng = random.Random(11)
    s = start_session(node_with_children(3), expert="e1")
    while s.status == ACTIVE:
        s.step(rng.randint(0, 1))
        c = s.counts
        assert c["asked"] + c["inferred"] + c["remaining"] == 8
    assert s.status == COMPLETE
    assert s.counts["remaining"] == 0


def test_scripted_constant_one_within_bound():
    s = start_session(node_with_children(3), expert="e1")
    while s.status == ACTIVE:
        s.step(1)
    assert s.status == COMPLETE
    assert s.counts["asked"] <= 6


def test_conflict_is_transactional_and_reject_restores():
    s = conflicted_session()
    assert [c["point"] for c in s.conflict.conflicting] == [[1]]
    pending_before = s.pending
    bounds_before = [s.fn.bounds(p) for p in s.fn.lattice.points()]
    s.resolve_conflict("reject")
    assert s.status == ACTIVE
    assert s.pending == pending_before  # same question, ready for a new answer
    assert [s.fn.bounds(p) for p in s.fn.lattice.points()] == bounds_before
    s.step(1)  # an in-range answer proceeds normally
    assert s.status in (ACTIVE, COMPLETE)


def test_revise_matches_fresh_session_on_surviving_log():
    s = conflicted_session()
    removed = {c["seq"] for c in s.conflict.conflicting}
    survivors = [(a.point, a.value) for a in s.fn.answers if a.seq not in removed]
    s.resolve_conflict("revise")
    assert s.status == ACTIVE
    fresh = start_session_raw(
        make_lattice([three_scale()]), three_scale(), strategy="greedy", expert="e1"
    )
    for p, v in survivors:
        fresh.fn.record(p, v)
    assert [s.fn.bounds(p) for p in s.fn.lattice.points()] == \
           [fresh.fn.bounds(p) for p in fresh.fn.lattice.points()]
    assert s.counts["asked"] == len(survivors)
    # the once-impossible answer is now acceptable
    s.step(0)
    assert s.status != CONFLICTED


def test_resolve_requires_conflicted_state():
    s = start_session(node_with_children(2), expert="e1")
    with pytest.raises(UsageError):
        s.resolve_conflict("reject")
    bad = conflicted_session()
    with pytest.raises(UsageError):
        bad.resolve_conflict("nonsense")


def test_step_requires_active_state():
    s = conflicted_session()
    with pytest.raises(UsageError):
        s.step(1)


def test_finalize_policies():
    s = start_session(node_with_children(2), expert="e1")
    with pytest.raises(ValidationError):
        s.finalize("require-complete")
    assert set(s.finalize("min").fn.values()) == {0}
    assert set(s.finalize("max").fn.values()) == {1}
    with pytest.raises(UsageError):
        s.finalize("halfway")
    while s.status == ACTIVE:
        s.step(0)
    table = s.finalize("max")  # policy is moot once complete
    assert set(table.fn.values()) == {0}
    assert table.policy == "complete"
    assert table.expert == "e1"
    assert table.node_id == "parent"


def test_abort():
    s = start_session(node_with_children(2), expert="e1")
    s.abort()
    assert s.status == "aborted"
    with pytest.raises(UsageError):
        s.finalize("min")


def test_round_trip_fidelity_against_scripted_oracles():
    l = binary_lattice(3)
    for target in brute_force_monotone_maps((2, 2, 2), 2):
        s = start_session_raw(l, BINARY, expert="e1")
        while s.status == ACTIVE:
            s.step(target[s.pending])
        assert s.counts["asked"] <= 6
        table = s.finalize("min")
        assert table.fn.values() == [target[p] for p in l.points()]


def test_log_replay_round_trip():
    rng = random.Random(3)
    s = start_session(node_with_children(3), strategy="hansel", expert="replayer")
    for _ in range(3):
        if s.status != ACTIVE:
            break
        lo, hi = s.fn.bounds(s.pending)
        s.step(rng.randint(lo, hi))
    rebuilt = replay_session([json.loads(line) for line in session_log_lines(s)])
    assert rebuilt.id == s.id
    assert rebuilt.pending == s.pending
    assert rebuilt.counts == s.counts
    assert rebuilt.status == s.status
    assert rebuilt.expert == "replayer"
    assert [rebuilt.fn.bounds(p) for p in rebuilt.fn.lattice.points()] == \
           [s.fn.bounds(p) for p in s.fn.lattice.points()]


def test_log_replay_preserves_conflict_and_resolution():
    s = conflicted_session()
    rebuilt = replay_session([json.loads(line) for line in session_log_lines(s)])
    assert rebuilt.status == CONFLICTED
    assert rebuilt.conflict.point == s.conflict.point
    assert rebuilt.conflict.conflicting == s.conflict.conflicting
    s.resolve_conflict("revise")
    rebuilt2 = replay_session([json.loads(line) for line in session_log_lines(s)])
    assert rebuilt2.status == s.status
    assert rebuilt2.counts == s.counts
    assert rebuilt2.pending == s.pending
