"""Elicitation sessions: a scheduler, a partial function, and an oracle's
answers, wired into a small state machine.

A session walks the question schedule for one hierarchy node.  Every
applied answer triggers monotone closure, so the interesting number is
``inferred``: points the expert never had to answer.  Conflicting answers
never pass silently -- the session parks in Conflicted and resumption is
an explicit, logged decision (reject the new answer, or revise the old
ones it contradicts).

Finalization turns the partial function into a concrete table.  Sessions
stopped early complete via the min (pessimistic, the default) or max
(optimistic) extension; ``require-complete`` refuses instead.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from .errors import UsageError, ValidationError
from .lattice import Lattice, Point, ValueScale, make_lattice
from .monotone import ConflictError, PartialMonotoneFn, TotalMonotoneFn
from .scheduler import QuestionPlan

ACTIVE = "active"
CONFLICTED = "conflicted"
COMPLETE = "complete"
ABORTED = "aborted"

FINALIZE_POLICIES = ("min", "max", "require-complete")

LOG_FORMAT_VERSION = 1


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class ConflictState:
    """What the session is stuck on while status == conflicted."""

    point: Point
    value: int
    bounds: tuple[int, int]
    conflicting: list[dict[str, Any]]  # [{"seq", "point", "value"}]


@dataclass
class ElicitedFunction:
    """A finished table plus where it came from."""

    fn: TotalMonotoneFn
    expert: str
    session_id: str
    policy: str
    node_id: str | None = None


@dataclass
class Session:
    """Single-writer elicitation session for one node."""

    id: str
    node_id: str | None
    expert: str
    strategy: str
    fn: PartialMonotoneFn
    plan: QuestionPlan
    status: str = ACTIVE
    asked: int = 0
    pending: Point | None = None
    conflict: ConflictState | None = None
    events: list[dict[str, Any]] = field(default_factory=list)
    child_ids: list[str] | None = None

    # -- bookkeeping -----------------------------------------------------

    @property
    def counts(self) -> dict[str, int]:
        determined = self.fn.determined_count()
        total = self.fn.lattice.point_count
        return {
            "asked": self.asked,
            "inferred": determined - self.asked,
            "remaining": total - determined,
        }

    def _log(self, kind: str, payload: dict[str, Any]) -> None:
        self.events.append(
            {"seq": len(self.events), "ts": _now(), "kind": kind, "payload": payload}
        )

    def _advance(self) -> None:
        self.pending = self.plan.next_question(self.fn)
        if self.pending is None:
            self.status = COMPLETE
        else:
            self.status = ACTIVE
            self._log("question-posed", {"point": list(self.pending)})

    # -- state machine ---------------------------------------------------

    def step(self, answer: int) -> "Session":
        """Apply an answer to the pending question."""
        if self.status != ACTIVE:
            raise UsageError(f"session {self.id} is {self.status}, not active")
        assert self.pending is not None
        point = self.pending
        try:
            self.fn.record(point, answer)
        except ConflictError as exc:
            self.status = CONFLICTED
            self.conflict = ConflictState(
                point=point,
                value=answer,
                bounds=exc.bounds,
                conflicting=[
                    {"seq": a.seq, "point": list(a.point), "value": a.value}
                    for a in exc.conflicting
                ],
            )
            self._log(
                "conflict",
                {
                    "point": list(point),
                    "value": answer,
                    "bounds": list(exc.bounds),
                    "conflicting": self.conflict.conflicting,
                },
            )
            return self
        self.asked += 1
        self._log("answer", {"point": list(point), "value": int(answer)})
        self._advance()
        return self

    def resolve_conflict(self, strategy: str) -> "Session":
        """Leave the conflicted state.

        reject: drop the offending answer; prior bounds stand untouched.
        revise: remove the cited prior answers and replay the survivors;
        the offending answer stays recorded in the conflict log only.
        """
        if self.status != CONFLICTED:
            raise UsageError(f"session {self.id} is {self.status}; nothing to resolve")
        assert self.conflict is not None
        if strategy == "reject":
            self._log("resolution", {"strategy": "reject", "removed": []})
        elif strategy == "revise":
            removed = {c["seq"] for c in self.conflict.conflicting}
            survivors = [a for a in self.fn.answers if a.seq not in removed]
            fresh = PartialMonotoneFn(self.fn.lattice, self.fn.out_scale)
            for a in survivors:
                fresh.record(a.point, a.value)
            self.fn = fresh
            self.asked = len(survivors)
            self._log("resolution", {"strategy": "revise", "removed": sorted(removed)})
        else:
            raise UsageError(f"unknown conflict resolution {strategy!r} (reject or revise)")
        self.conflict = None
        self._advance()
        return self

    def abort(self) -> "Session":
        if self.status in (COMPLETE, ABORTED):
            return self
        self.status = ABORTED
        self._log("aborted", {})
        return self

    def finalize(self, policy: str = "min") -> ElicitedFunction:
        """Freeze the session into a table.

        Complete sessions yield their unique table whatever the policy;
        active ones complete per policy; require-complete refuses while
        any point is undetermined.
        """
        if policy not in FINALIZE_POLICIES:
            raise UsageError(f"unknown finalize policy {policy!r} (one of {FINALIZE_POLICIES})")
        if self.status not in (ACTIVE, COMPLETE):
            raise UsageError(f"cannot finalize a {self.status} session")
        remaining = self.counts["remaining"]
        if remaining == 0:
            table = self.fn.min_extension()  # lo == hi everywhere
            applied = "complete"
        elif policy == "require-complete":
            raise ValidationError(
                f"session {self.id} still has {remaining} undetermined points"
            )
        else:
            table = self.fn.min_extension() if policy == "min" else self.fn.max_extension()
            applied = policy
        self._log("finalize", {"policy": policy, "applied": applied})
        return ElicitedFunction(
            fn=table, expert=self.expert, session_id=self.id, policy=applied, node_id=self.node_id
        )


def start_session(node, strategy: str = "hansel", expert: str = "anonymous") -> Session:
    """Open a session for a hierarchy node.

    The node must carry an output scale and at least one child with a
    scale; the scenario space is the product of the children's scales.
    Any object with ``id``, ``scale`` and ``children`` attributes works.
    """
    children = list(getattr(node, "children", []) or [])
    if not children:
        raise ValidationError(f"node {getattr(node, 'id', node)!r} has no children to elicit over")
    lattice = make_lattice([child.scale for child in children])
    return start_session_raw(
        lattice,
        node.scale,
        strategy=strategy,
        expert=expert,
        node_id=getattr(node, "id", None),
        child_ids=[child.id for child in children],
    )


def start_session_raw(
    lattice: Lattice,
    out_scale: ValueScale,
    strategy: str = "hansel",
    expert: str = "anonymous",
    node_id: str | None = None,
    child_ids: list[str] | None = None,
    session_id: str | None = None,
) -> Session:
    plan = QuestionPlan.for_lattice(lattice, out_scale, strategy)
    session = Session(
        id=session_id or uuid.uuid4().hex[:12],
        node_id=node_id,
        expert=expert,
        strategy=strategy,
        fn=PartialMonotoneFn(lattice, out_scale),
        plan=plan,
        child_ids=child_ids,
    )
    session._log(
        "session-started",
        {
            "format_version": LOG_FORMAT_VERSION,
            "session_id": session.id,
            "node_id": node_id,
            "expert": expert,
            "strategy": strategy,
            "child_scales": [list(s.labels) for s in lattice.dims],
            "out_scale": list(out_scale.labels),
            "child_ids": child_ids,
        },
    )
    session._advance()
    return session
