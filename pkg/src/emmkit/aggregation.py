"""Aggregation rules: how a parent node combines its children's values.

Four computational rules (majority, weighted threshold, critical
threshold, max) cover the formulas domain experts usually accept, and the
table rule covers everyone else: when no formula fits, the node's logic
is elicited point by point and stored verbatim.  All rules are monotone
in every argument, which is what lets elicitation prune questions.

Tie behavior is always an explicit parameter (default pessimistic) and
every binding serializes into the model document, so a decision can be
audited down to the rule that produced it.

The group utilities combine several experts' finished models on one
scenario.  Disagreement handling is deliberately thin: the engine flags
and locates differences; deliberation stays with the humans.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from statistics import mean, median
from typing import Sequence, Union

from .elicitation import ElicitedFunction
from .errors import ValidationError
from .lattice import Point
from .monotone import TotalMonotoneFn

WEIGHT_TOLERANCE = 1e-9

TIE_LOW = "low"
TIE_HIGH = "high"


def _check_binary(answers: Sequence[int]) -> list[int]:
    values = [int(v) for v in answers]
    if not values:
        raise ValidationError("no answers to aggregate")
    if any(v not in (0, 1) for v in values):
        raise ValidationError(f"rule expects binary answers, got {values}")
    return values


def eval_majority(answers: Sequence[int], tie: str = TIE_LOW) -> int:
    """1 iff strictly more ones than zeros; ties resolve per tie policy."""
    values = _check_binary(answers)
    ones = sum(values)
    zeros = len(values) - ones
    if ones == zeros:
        return 1 if tie == TIE_HIGH else 0
    return 1 if ones > zeros else 0


def eval_weighted(answers: Sequence[int], weights: Sequence[float], threshold: float) -> int:
    """1 iff the weighted score reaches the threshold (inclusive)."""
    values = _check_binary(answers)
    weights = [float(w) for w in weights]
    if len(weights) != len(values):
        raise ValidationError(f"{len(weights)} weights for {len(values)} answers")
    _check_weights(weights, threshold)
    score = sum(v * w for v, w in zip(values, weights))
    return 1 if score >= threshold else 0


def _check_weights(weights: Sequence[float], threshold: float) -> None:
    if any(w < 0 for w in weights):
        raise ValidationError(f"weights must be non-negative: {list(weights)}")
    total = sum(weights)
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise ValidationError(f"weights must sum to 1.0, got {total!r}")
    if not 0 < threshold <= 1:
        raise ValidationError(f"threshold must lie in (0, 1], got {threshold!r}")


def eval_critical(
    answers: Sequence[int],
    critical: Sequence[int],
    fallback: "AggregationBinding",
) -> int:
    """Lowest value if any critical answer is at its lowest; else fallback.

    ``critical`` holds positions into ``answers``; the fallback rule is
    applied to the full answer vector.
    """
    values = [int(v) for v in answers]
    if not values:
        raise ValidationError("no answers to aggregate")
    for pos in critical:
        if not 0 <= pos < len(values):
            raise ValidationError(f"critical position {pos} out of range for {len(values)} answers")
        if values[pos] == 0:
            return 0
    return apply_binding(fallback, values)


def eval_max(answers: Sequence[int]) -> int:
    """Worst-case combination: the highest (most severe / most favorable,
    depending on the scale's reading) child value wins."""
    values = [int(v) for v in answers]
    if not values:
        raise ValidationError("no answers to aggregate")
    if any(v < 0 for v in values):
        raise ValidationError(f"negative value index in {values}")
    return max(values)


def eval_table(table: ElicitedFunction, scenario: Point) -> int:
    """Look the scenario up in an elicited table."""
    return table.fn(scenario)


# -- bindings ------------------------------------------------------------


@dataclass(frozen=True)
class Majority:
    tie: str = TIE_LOW

    def __post_init__(self):
        if self.tie not in (TIE_LOW, TIE_HIGH):
            raise ValidationError(f"tie policy must be 'low' or 'high', got {self.tie!r}")


@dataclass(frozen=True)
class Weighted:
    weights: tuple[float, ...]
    threshold: float

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        _check_weights(self.weights, self.threshold)


@dataclass(frozen=True)
class CriticalThreshold:
    critical: frozenset[str]
    fallback: "AggregationBinding"

    def __post_init__(self):
        object.__setattr__(self, "critical", frozenset(self.critical))
        if isinstance(self.fallback, CriticalThreshold):
            raise ValidationError("critical-threshold fallback cannot itself be critical-threshold")


@dataclass(frozen=True)
class MaxRule:
    pass


@dataclass
class TableRule:
    table: ElicitedFunction


AggregationBinding = Union[Majority, Weighted, CriticalThreshold, MaxRule, TableRule]


def apply_binding(
    binding: AggregationBinding,
    values: Sequence[int],
    child_ids: Sequence[str] | None = None,
) -> int:
    """Evaluate one node: children's values in, parent's value out."""
    if isinstance(binding, Majority):
        return eval_majority(values, tie=binding.tie)
    if isinstance(binding, Weighted):
        return eval_weighted(values, binding.weights, binding.threshold)
    if isinstance(binding, CriticalThreshold):
        positions = _critical_positions(binding.critical, child_ids, len(values))
        return eval_critical(values, positions, binding.fallback)
    if isinstance(binding, MaxRule):
        return eval_max(values)
    if isinstance(binding, TableRule):
        return eval_table(binding.table, tuple(int(v) for v in values))
    raise ValidationError(f"unknown aggregation binding {binding!r}")


def _critical_positions(critical, child_ids, arity: int) -> list[int]:
    if child_ids is None:
        # standalone use: ids are stringified positions
        positions = []
        for c in critical:
            try:
                positions.append(int(c))
            except (TypeError, ValueError):
                raise ValidationError(f"critical id {c!r} needs child ids to resolve") from None
        return positions
    index = {cid: i for i, cid in enumerate(child_ids)}
    missing = [c for c in critical if c not in index]
    if missing:
        raise ValidationError(f"critical ids {missing} are not children of this node")
    return [index[c] for c in critical]


def describe_binding(binding: AggregationBinding) -> str:
    """One-line citation used in explanation traces."""
    if isinstance(binding, Majority):
        return f"majority (ties -> {binding.tie})"
    if isinstance(binding, Weighted):
        ws = ", ".join(f"{w:g}" for w in binding.weights)
        return f"weighted [{ws}] >= {binding.threshold:g}"
    if isinstance(binding, CriticalThreshold):
        crit = ", ".join(sorted(binding.critical))
        return f"critical({crit}) else {describe_binding(binding.fallback)}"
    if isinstance(binding, MaxRule):
        return "max"
    if isinstance(binding, TableRule):
        t = binding.table
        return f"elicited table (expert {t.expert}, session {t.session_id}, {t.policy})"
    return repr(binding)


# -- groups of experts -----------------------------------------------------


@dataclass
class GroupVerdict:
    """Outcome of putting one scenario to several experts' models."""

    per_expert: dict[str, int]
    labels: dict[str, str] = field(default_factory=dict)
    aggregate: int | None = None
    aggregate_label: str | None = None
    disagreement: bool = False
    tie: bool = False
    rule: str = "majority"


GROUP_RULES = ("majority", "unanimity")


def group_aggregate(models, leaf_answers, rule: str = "majority", policy: str = "full") -> GroupVerdict:
    """Evaluate each expert's model on one scenario and combine the root
    values.

    majority: the most common value wins; an exact tie for first place
    sets the tie flag and leaves no aggregate.  unanimity: any split sets
    the tie flag.  Disagreement is flagged whenever values differ at all.
    """
    models = list(models)
    if not models:
        raise ValidationError("no models to aggregate")
    if rule not in GROUP_RULES:
        raise ValidationError(f"unknown group rule {rule!r} (one of {GROUP_RULES})")
    shape0 = models[0].tree.shape_signature()
    for m in models[1:]:
        if m.tree.shape_signature() != shape0:
            raise ValidationError(
                f"models of {models[0].expert!r} and {m.expert!r} have different tree shapes"
            )
    out = models[0].tree.root.scale
    per_expert: dict[str, int] = {}
    for m in models:
        value, _ = m.evaluate(leaf_answers, policy=policy)
        per_expert[m.expert] = value
    values = list(per_expert.values())
    verdict = GroupVerdict(
        per_expert=per_expert,
        labels={e: out.label(v) for e, v in per_expert.items()},
        disagreement=len(set(values)) > 1,
        rule=rule,
    )
    if rule == "unanimity":
        if verdict.disagreement:
            verdict.tie = True
        else:
            verdict.aggregate = values[0]
    else:
        counts = Counter(values).most_common()
        if len(counts) > 1 and counts[0][1] == counts[1][1]:
            verdict.tie = True
        else:
            verdict.aggregate = counts[0][0]
    if verdict.aggregate is not None:
        verdict.aggregate_label = out.label(verdict.aggregate)
    return verdict


def disagreement_points(model_a, model_b, node_id: str) -> list[Point]:
    """Lattice points where two experts' elicited tables differ.

    Both sides must have the node bound to a table over the same scenario
    space (the rest of the tree may be unresolved); the result follows
    the lattice's canonical order.  Accepts expert models or bare trees.
    """
    tables = []
    for m in (model_a, model_b):
        tree = getattr(m, "tree", m)
        node = tree.find(node_id)
        binding = node.aggregation
        if not isinstance(binding, TableRule):
            owner = getattr(m, "expert", None) or tree.author or "the document"
            raise ValidationError(f"node {node_id!r} of {owner}'s model is not table-bound")
        tables.append(binding.table.fn)
    a, b = tables
    if a.lattice != b.lattice:
        raise ValidationError(f"tables at {node_id!r} cover different scenario spaces")
    return [p for p in a.lattice.iter_points() if a(p) != b(p)]


def combine_weights(per_member_weights: Sequence[Sequence[float]], how: str = "mean") -> list[float]:
    """Fold several members' weight vectors into one (mean or median);
    the result is re-normalized to sum to 1."""
    rows = [list(map(float, row)) for row in per_member_weights]
    if not rows:
        raise ValidationError("no weight vectors to combine")
    arity = len(rows[0])
    if any(len(r) != arity for r in rows):
        raise ValidationError("weight vectors have mixed lengths")
    fold = {"mean": mean, "median": median}.get(how)
    if fold is None:
        raise ValidationError(f"unknown combination {how!r} (mean or median)")
    combined = [fold([r[i] for r in rows]) for i in range(arity)]
    total = sum(combined)
    if total <= 0:
        raise ValidationError("combined weights sum to zero")
    return [w / total for w in combined]


def table_from_total(fn: TotalMonotoneFn, expert: str = "scripted", session_id: str = "direct") -> TableRule:
    """Wrap an existing total function as a table binding (fixtures, tests)."""
    return TableRule(ElicitedFunction(fn=fn, expert=expert, session_id=session_id, policy="complete"))
