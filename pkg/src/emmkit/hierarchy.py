"""Decision-model spec trees: build, validate, evaluate, explain.

A spec tree is the questionnaire's skeleton: a root decision question,
generalized questions as branches, observable questions as leaves.  Two
document shapes are accepted:

* plain -- a nested JSON object mapping each question to its children
  (leaves map to {}).  Nodes default to a binary no/yes scale and an
  unresolved aggregation, so a plain document is a specification to be
  completed, not yet an evaluable model.
* extended -- explicit node objects carrying id, prompt, scale labels,
  reversed flag, aggregation binding, gate threshold and short-circuit
  group.

A tree with every internal node's aggregation resolved, owned by one
expert, is an ExpertModel and can be evaluated bottom-up on a scenario.
Evaluation produces the value *and* an explanation trace: per node, the
value, the rule or table that produced it, and which subtrees were never
visited (and why) -- the trace is the model's explanation structure,
truncatable to any depth for executive-level or full-detail readings.

Gates implement early exit.  Pruning never happens implicitly: only
nodes the author placed in a short-circuit group, with a gate threshold,
ever cut evaluation short (a single unfavorable answer must not stop
everything unless the author said so).  Under the strict-gate policy a
gated node may also be answered directly: an answer at or below the gate
makes the detailed questions beneath it moot.  Pruned subtrees are
assumed pessimistically (scale minimum) wherever a sibling aggregation
still needs a value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Iterator

from . import aggregation
from .aggregation import AggregationBinding, TableRule, describe_binding
from .errors import EvaluationError, SpecFormatError, ValidationError
from .lattice import BINARY, ValueScale, make_lattice

FAN_OUT_LIMIT = 5  # more children than this gets a warning, not an error

POLICY_FULL = "full"
POLICY_STRICT_GATE = "strict-gate"
POLICIES = (POLICY_FULL, POLICY_STRICT_GATE)


@dataclass
class FactorNode:
    """One question in the tree; a leaf when it has no children."""

    id: str
    prompt: str
    scale: ValueScale = BINARY
    reversed: bool = False
    children: list["FactorNode"] = field(default_factory=list)
    aggregation: AggregationBinding | None = None  # None = unresolved
    gate: int | None = None
    short_circuit_group: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator["FactorNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class ModelSpecTree:
    """The questionnaire skeleton plus document metadata."""

    root: FactorNode
    title: str = ""
    author: str = ""
    version: str = ""

    def nodes(self) -> list[FactorNode]:
        return list(self.root.walk())

    def leaves(self) -> list[FactorNode]:
        return [n for n in self.nodes() if n.is_leaf]

    def branches(self) -> list[FactorNode]:
        """Internal nodes other than the root."""
        return [n for n in self.nodes() if not n.is_leaf and n is not self.root]

    def find(self, node_id: str) -> FactorNode:
        for n in self.root.walk():
            if n.id == node_id:
                return n
        raise ValidationError(f"no node with id {node_id!r}")

    def parent_of(self, node_id: str) -> FactorNode | None:
        for n in self.root.walk():
            if any(c.id == node_id for c in n.children):
                return n
        return None

    def height(self) -> int:
        def depth(node: FactorNode) -> int:
            return 1 + max((depth(c) for c in node.children), default=0)

        return depth(self.root)

    def shape_signature(self):
        """Structure + scales, ignoring bindings; group aggregation
        requires models to share this."""

        def sig(node: FactorNode):
            return (node.id, node.scale.labels, tuple(sig(c) for c in node.children))

        return sig(self.root)

    def unresolved(self) -> list[FactorNode]:
        return [n for n in self.nodes() if not n.is_leaf and n.aggregation is None]


@dataclass
class ExpertModel:
    """A spec tree every internal node of which can actually be computed."""

    tree: ModelSpecTree
    expert: str = "anonymous"

    def __post_init__(self):
        bad = [n.id for n in self.tree.unresolved()]
        if bad:
            raise ValidationError(
                f"cannot build an expert model while aggregations are unresolved at: {bad}"
            )

    def evaluate(self, leaf_answers, policy: str = POLICY_FULL):
        return evaluate(self, leaf_answers, policy=policy)


# -- parsing ---------------------------------------------------------------


def _slugify(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-")
    return slug or "node"


def parse_spec(document: dict[str, Any]) -> ModelSpecTree:
    """Parse a plain or extended document (already JSON-decoded)."""
    if not isinstance(document, dict):
        raise SpecFormatError(f"spec document must be an object, got {type(document).__name__}")
    if "root" in document or "format_version" in document:
        return _parse_extended(document)
    return _parse_plain(document)


def _parse_plain(document: dict[str, Any]) -> ModelSpecTree:
    if not document:
        raise SpecFormatError("plain document is empty; expected one root question")
    if len(document) != 1:
        raise SpecFormatError(
            f"plain document must have exactly one root question, found {len(document)}"
        )
    used: set[str] = set()

    def build(prompt: str, children: Any) -> FactorNode:
        if not isinstance(prompt, str) or not prompt.strip():
            raise SpecFormatError(f"node prompt must be non-empty text, got {prompt!r}")
        if not isinstance(children, dict):
            raise SpecFormatError(f"children of {prompt!r} must be an object, got {type(children).__name__}")
        seen_prompts = set()
        for child_prompt in children:
            if child_prompt in seen_prompts:
                raise SpecFormatError(f"duplicate prompt under {prompt!r}: {child_prompt!r}")
            seen_prompts.add(child_prompt)
        node = FactorNode(id=_unique_slug(prompt, used), prompt=prompt)
        node.children = [build(p, c) for p, c in children.items()]
        return node

    (root_prompt, root_children), = document.items()
    return ModelSpecTree(root=build(root_prompt, root_children))


def _unique_slug(prompt: str, used: set[str]) -> str:
    base = _slugify(prompt)
    slug, i = base, 2
    while slug in used:
        slug = f"{base}-{i}"
        i += 1
    used.add(slug)
    return slug


def _parse_extended(document: dict[str, Any]) -> ModelSpecTree:
    root_doc = document.get("root")
    if not isinstance(root_doc, dict):
        raise SpecFormatError("extended document needs a 'root' node object")
    meta = document.get("metadata") or {}
    seen_ids: set[str] = set()

    def build(doc: dict[str, Any]) -> FactorNode:
        if "id" not in doc or "prompt" not in doc:
            raise SpecFormatError(f"extended node needs 'id' and 'prompt': {doc!r}")
        node_id = str(doc["id"])
        if node_id in seen_ids:
            raise SpecFormatError(f"duplicate node id {node_id!r} (a node may have only one parent)")
        seen_ids.add(node_id)
        labels = doc.get("scale") or list(BINARY.labels)
        is_reversed = bool(doc.get("reversed", False))
        # reversed documents list labels most-favorable-first; storage is
        # always ascending, the flag survives for round-tripping
        scale = ValueScale(tuple(reversed(labels)) if is_reversed else tuple(labels))
        children = [build(c) for c in doc.get("children", [])]
        node = FactorNode(
            id=node_id,
            prompt=str(doc["prompt"]),
            scale=scale,
            reversed=is_reversed,
            children=children,
            gate=doc.get("gate"),
            short_circuit_group=doc.get("short_circuit_group"),
        )
        agg_doc = doc.get("aggregation")
        if agg_doc is not None:
            node.aggregation = binding_from_dict(agg_doc, node)
        if node.gate is not None and not 0 <= node.gate < scale.size:
            raise SpecFormatError(f"gate {node.gate} out of range for node {node_id!r}")
        return node

    root = build(root_doc)
    return ModelSpecTree(
        root=root,
        title=str(meta.get("title", "")),
        author=str(meta.get("author", "")),
        version=str(meta.get("version", "")),
    )


# -- aggregation binding (de)serialization ----------------------------------


def binding_to_dict(binding: AggregationBinding) -> dict[str, Any]:
    if isinstance(binding, aggregation.Majority):
        return {"rule": "majority", "tie": binding.tie}
    if isinstance(binding, aggregation.Weighted):
        return {"rule": "weighted", "weights": list(binding.weights), "threshold": binding.threshold}
    if isinstance(binding, aggregation.CriticalThreshold):
        return {
            "rule": "critical",
            "critical": sorted(binding.critical),
            "fallback": binding_to_dict(binding.fallback),
        }
    if isinstance(binding, aggregation.MaxRule):
        return {"rule": "max"}
    if isinstance(binding, TableRule):
        t = binding.table
        return {
            "rule": "table",
            "values": t.fn.values(),
            "provenance": {
                "expert": t.expert,
                "session": t.session_id,
                "policy": t.policy,
                "node": t.node_id,
            },
        }
    raise ValidationError(f"cannot serialize binding {binding!r}")


def binding_from_dict(doc: dict[str, Any], node: FactorNode) -> AggregationBinding:
    from .elicitation import ElicitedFunction
    from .monotone import TotalMonotoneFn

    if not isinstance(doc, dict) or "rule" not in doc:
        raise SpecFormatError(f"aggregation binding needs a 'rule' field: {doc!r}")
    rule = doc["rule"]
    if rule == "majority":
        return aggregation.Majority(tie=doc.get("tie", aggregation.TIE_LOW))
    if rule == "weighted":
        return aggregation.Weighted(tuple(doc["weights"]), float(doc["threshold"]))
    if rule == "critical":
        return aggregation.CriticalThreshold(
            frozenset(doc["critical"]), binding_from_dict(doc["fallback"], node)
        )
    if rule == "max":
        return aggregation.MaxRule()
    if rule == "table":
        if not node.children:
            raise SpecFormatError(f"table binding on leaf node {node.id!r}")
        lattice = make_lattice([c.scale for c in node.children])
        prov = doc.get("provenance") or {}
        fn = TotalMonotoneFn.from_values(lattice, node.scale, doc["values"])
        return TableRule(
            ElicitedFunction(
                fn=fn,
                expert=str(prov.get("expert", "unknown")),
                session_id=str(prov.get("session", "unknown")),
                policy=str(prov.get("policy", "complete")),
                node_id=prov.get("node"),
            )
        )
    raise SpecFormatError(f"unknown aggregation rule {rule!r}")


def node_to_dict(node: FactorNode) -> dict[str, Any]:
    """Extended-form JSON object for one node (recursive)."""
    labels = list(node.scale.labels)
    doc: dict[str, Any] = {
        "id": node.id,
        "prompt": node.prompt,
        "scale": list(reversed(labels)) if node.reversed else labels,
    }
    if node.reversed:
        doc["reversed"] = True
    if node.gate is not None:
        doc["gate"] = node.gate
    if node.short_circuit_group is not None:
        doc["short_circuit_group"] = node.short_circuit_group
    if node.aggregation is not None:
        doc["aggregation"] = binding_to_dict(node.aggregation)
    doc["children"] = [node_to_dict(c) for c in node.children]
    return doc


# -- editing -----------------------------------------------------------------


def add_factor(tree: ModelSpecTree, parent_id: str, node: FactorNode) -> ModelSpecTree:
    """Append a factor under an existing parent."""
    parent = tree.find(parent_id)  # raises on unknown parent
    existing = {n.id for n in tree.nodes()}
    clash = [n.id for n in node.walk() if n.id in existing]
    if clash:
        raise ValidationError(f"node ids already present in the tree: {clash}")
    parent.children.append(node)
    return tree


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class SpecIssue:
    level: str  # "error" | "warning"
    node_id: str
    code: str
    message: str


def validate_spec(tree: ModelSpecTree | None) -> list[SpecIssue]:
    """Structural report; empty list means fully valid and resolved."""
    issues: list[SpecIssue] = []
    if tree is None or tree.root is None:
        return [SpecIssue("error", "", "empty-tree", "document has no root node")]
    seen: set[str] = set()
    for node in tree.root.walk():
        if node.id in seen:
            issues.append(
                SpecIssue("error", node.id, "duplicate-id", f"node id {node.id!r} appears twice")
            )
        seen.add(node.id)
        if len(node.children) > FAN_OUT_LIMIT:
            issues.append(
                SpecIssue(
                    "warning",
                    node.id,
                    "fan-out",
                    f"{len(node.children)} children; more than {FAN_OUT_LIMIT} is hard to elicit and answer",
                )
            )
        if node.is_leaf:
            continue
        binding = node.aggregation
        if binding is None:
            issues.append(
                SpecIssue(
                    "warning",
                    node.id,
                    "unresolved-aggregation",
                    "no aggregation bound yet; resolve with a rule or elicit a table",
                )
            )
            continue
        issues.extend(_check_binding(node, binding))
    return issues


def _check_binding(node: FactorNode, binding: AggregationBinding) -> list[SpecIssue]:
    issues = []
    arity = len(node.children)
    if isinstance(binding, aggregation.Weighted) and len(binding.weights) != arity:
        issues.append(
            SpecIssue(
                "error",
                node.id,
                "scale-mismatch",
                f"{len(binding.weights)} weights for {arity} children",
            )
        )
    if isinstance(binding, aggregation.CriticalThreshold):
        child_ids = {c.id for c in node.children}
        missing = sorted(binding.critical - child_ids)
        if missing:
            issues.append(
                SpecIssue(
                    "error", node.id, "scale-mismatch", f"critical ids {missing} are not children"
                )
            )
    if isinstance(binding, TableRule):
        expected = make_lattice([c.scale for c in node.children])
        table = binding.table.fn
        if table.lattice.shape != expected.shape:
            issues.append(
                SpecIssue(
                    "error",
                    node.id,
                    "scale-mismatch",
                    f"table covers shape {table.lattice.shape}, children span {expected.shape}",
                )
            )
        elif table.out_scale.size != node.scale.size:
            issues.append(
                SpecIssue(
                    "error",
                    node.id,
                    "scale-mismatch",
                    f"table output scale has {table.out_scale.size} values, node scale {node.scale.size}",
                )
            )
    return issues


# -- evaluation ----------------------------------------------------------------


@dataclass
class PrunedBranch:
    """A subtree evaluation skipped, and the answer that made it moot."""

    node_id: str
    prompt: str
    gating_node: str
    gating_value: int
    assumed_value: int | None = None  # fed to the parent's rule, if any


@dataclass
class TraceNode:
    node_id: str
    prompt: str
    value: int
    label: str
    rule: str
    children: list["TraceNode"] = field(default_factory=list)
    pruned: list[PrunedBranch] = field(default_factory=list)

    def visited_ids(self) -> set[str]:
        ids = {self.node_id}
        for c in self.children:
            ids |= c.visited_ids()
        return ids

    def to_dict(self) -> dict[str, Any]:
        return {
            "node": self.node_id,
            "prompt": self.prompt,
            "value": self.value,
            "label": self.label,
            "rule": self.rule,
            "children": [c.to_dict() for c in self.children],
            "pruned": [
                {
                    "node": p.node_id,
                    "prompt": p.prompt,
                    "gating_node": p.gating_node,
                    "gating_value": p.gating_value,
                    "assumed_value": p.assumed_value,
                }
                for p in self.pruned
            ],
        }


@dataclass
class ExplanationTrace:
    """The explanation structure of one evaluation."""

    root: TraceNode
    policy: str

    @property
    def value(self) -> int:
        return self.root.value

    def visited_ids(self) -> set[str]:
        return self.root.visited_ids()

    def truncated(self, depth: int) -> "ExplanationTrace":
        """Keep the root plus ``depth`` levels of reasons below it."""
        if depth < 0:
            raise ValidationError(f"explanation depth must be >= 0, got {depth}")

        def cut(node: TraceNode, budget: int) -> TraceNode:
            clone = TraceNode(
                node_id=node.node_id,
                prompt=node.prompt,
                value=node.value,
                label=node.label,
                rule=node.rule,
                pruned=list(node.pruned),
            )
            if budget > 0:
                clone.children = [cut(c, budget - 1) for c in node.children]
            return clone

        return ExplanationTrace(root=cut(self.root, depth), policy=self.policy)

    def to_dict(self) -> dict[str, Any]:
        return {"policy": self.policy, "root": self.root.to_dict()}


def _normalize_answers(tree: ModelSpecTree, answers) -> dict[str, int]:
    known = {n.id: n for n in tree.nodes()}
    normalized: dict[str, int] = {}
    for key, raw in dict(answers).items():
        node = known.get(str(key))
        if node is None:
            raise EvaluationError(f"answer for unknown node {key!r}")
        normalized[node.id] = node.scale.index_of(raw)
    return normalized


def evaluate(model: ExpertModel, leaf_answers, policy: str = POLICY_FULL):
    """Bottom-up value at the root plus the full explanation trace.

    ``leaf_answers`` maps node ids to value indices or labels.  Under the
    strict-gate policy a gated node may be answered directly; at or below
    its gate the answer stands for the whole subtree.  Under the full
    policy every leaf needs an answer and every node is visited once.
    """
    if policy not in POLICIES:
        raise ValidationError(f"unknown policy {policy!r} (one of {POLICIES})")
    answers = _normalize_answers(model.tree, leaf_answers)
    root_trace = _eval_node(model.tree.root, answers, policy)
    return root_trace.value, ExplanationTrace(root=root_trace, policy=policy)


def _eval_node(node: FactorNode, answers: dict[str, int], policy: str) -> TraceNode:
    scale = node.scale
    if node.is_leaf:
        if node.id not in answers:
            raise EvaluationError(f"missing answer for leaf {node.id!r} ({node.prompt})")
        v = answers[node.id]
        return TraceNode(node.id, node.prompt, v, scale.label(v), "answer")

    gated_direct = (
        policy == POLICY_STRICT_GATE
        and node.gate is not None
        and node.id in answers
        and answers[node.id] <= node.gate
    )
    if gated_direct:
        v = answers[node.id]
        trace = TraceNode(node.id, node.prompt, v, scale.label(v), "gate: answered directly")
        trace.pruned = [
            PrunedBranch(c.id, c.prompt, gating_node=node.id, gating_value=v) for c in node.children
        ]
        return trace

    if node.aggregation is None:
        raise EvaluationError(f"node {node.id!r} has no aggregation bound; resolve it first")

    values: list[int] = []
    child_traces: list[TraceNode] = []
    pruned: list[PrunedBranch] = []
    fired: tuple[str, int, str] | None = None  # (node id, value, group)
    for child in node.children:
        if fired is not None and child.short_circuit_group == fired[2]:
            assumed = 0  # pessimistic stand-in for a subtree never visited
            pruned.append(
                PrunedBranch(
                    child.id,
                    child.prompt,
                    gating_node=fired[0],
                    gating_value=fired[1],
                    assumed_value=assumed,
                )
            )
            values.append(assumed)
            continue
        child_trace = _eval_node(child, answers, policy)
        child_traces.append(child_trace)
        values.append(child_trace.value)
        if (
            policy == POLICY_STRICT_GATE
            and fired is None
            and child.gate is not None
            and child.short_circuit_group is not None
            and child_trace.value <= child.gate
        ):
            fired = (child.id, child_trace.value, child.short_circuit_group)

    v = aggregation.apply_binding(node.aggregation, values, child_ids=[c.id for c in node.children])
    if not 0 <= v < scale.size:
        raise EvaluationError(
            f"aggregation at {node.id!r} produced {v}, outside its scale {list(scale.labels)}"
        )
    trace = TraceNode(
        node.id, node.prompt, v, scale.label(v), describe_binding(node.aggregation)
    )
    trace.children = child_traces
    trace.pruned = pruned
    return trace


def explain(model: ExpertModel, leaf_answers, depth: int, policy: str = POLICY_FULL) -> ExplanationTrace:
    """Evaluate and truncate the trace: depth 0 is the verdict alone,
    depth 1 adds its direct reasons, and so on."""
    _, trace = evaluate(model, leaf_answers, policy=policy)
    return trace.truncated(depth)


def resolve_model(tree: ModelSpecTree, expert: str = "anonymous") -> ExpertModel:
    return ExpertModel(tree=tree, expert=expert)
