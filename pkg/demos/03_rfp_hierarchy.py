"""A decision hierarchy end to end: load, validate, resolve, evaluate,
explain.

The bundled document asks "Should we respond to the RFP?" over four
generalized branches and thirteen observable questions.  Plain documents
arrive unresolved; here each branch gets a rule, one branch gets a gate,
and evaluation returns both the verdict and its explanation trace.
"""

import json

from emmkit import CriticalThreshold, Majority, evaluate, resolve_model, validate_spec
from emmkit.oracle import builtin_rfp_document
from emmkit.persistence import load_spec

tree = load_spec(builtin_rfp_document())
print(f"loaded: {tree.root.prompt!r}")
print(f"  {len(tree.nodes())} nodes, {len(tree.branches())} branches, {len(tree.leaves())} leaves")

print("\nvalidation before any resolution:")
for issue in validate_spec(tree)[:3]:
    print(f"  {issue.level}: {issue.node_id}: {issue.message}")
print("  ...")

# resolve: majority everywhere, but a missing fee is a deal-breaker
for node in tree.nodes():
    if not node.is_leaf:
        node.aggregation = Majority(tie="high")
tree.root.aggregation = CriticalThreshold(frozenset({"can-we-earn-a-fee"}), Majority(tie="high"))
model = resolve_model(tree, expert="pi")
print("\nresolved every branch; issues left:", len(validate_spec(tree)))

answers = {leaf.id: 1 for leaf in tree.leaves()}
answers["would-we-work-with-the-tm-again"] = 0
value, trace = evaluate(model, answers)
print(f"\nall favorable but one: {trace.root.label!r}")

answers["can-we-earn-a-fee"] = 0
value, trace = evaluate(model, answers)
print(f"no fee: {trace.root.label!r} (critical question overrode the rest)")

print("\nexplanation at depth 1:")
from emmkit import explain

for child in explain(model, answers, depth=1).root.children:
    print(f"  {child.prompt}  ->  {child.label}   [{child.rule}]")

print("\ngated branch: a generalized 'no' skips its detail questions")
gated = load_spec(builtin_rfp_document())
for node in gated.nodes():
    if not node.is_leaf:
        node.aggregation = Majority(tie="high")
branch = gated.branches()[0]
branch.gate = 0
branch.short_circuit_group = "feasibility"
gated_model = resolve_model(gated, "pi")
partial_answers = {leaf.id: 1 for leaf in gated.leaves()
                   if leaf.id not in {c.id for c in branch.children}}
partial_answers[branch.id] = 0
value, trace = evaluate(gated_model, partial_answers, policy="strict-gate")
print(f"  verdict {trace.root.label!r}; visited {len(trace.visited_ids())} of {len(gated.nodes())} nodes")
print(f"  skipped: {[p.prompt for p in trace.root.children[0].pruned]}")
