"""The aggregation rule toolbox, and what happens when experts disagree.

Every rule is monotone, so any of them can back a generalized question.
When no formula satisfies the expert, the table rule stores the elicited
answers verbatim.
"""

from emmkit import (
    BINARY,
    FactorNode,
    Majority,
    ModelSpecTree,
    ValueScale,
    Weighted,
    disagreement_points,
    eval_critical,
    eval_majority,
    eval_max,
    eval_weighted,
    group_aggregate,
    make_lattice,
    resolve_model,
    start_session_raw,
)
from emmkit.aggregation import TableRule

answers = (1, 0, 1)
print(f"answers to (impact, dissemination, risk) = {answers}")
print(f"  majority:             {eval_majority(answers)}")
print(f"  weighted 0.5/.25/.25: {eval_weighted(answers, (0.5, 0.25, 0.25), 0.5)}  (score 0.75 >= 0.5)")
print(f"  critical on impact:   {eval_critical(answers, critical=[0], fallback=Majority(tie='high'))}")
print(f"  critical, impact=no:  {eval_critical((0, 1, 1), critical=[0], fallback=Majority(tie='high'))}")
print(f"  max of (2,3,2):       {eval_max((2, 3, 2))}")

print("\nno formula fits? elicit the table instead:")
lattice = make_lattice([BINARY] * 3)
session = start_session_raw(lattice, BINARY, expert="holdout")
quirky = lambda p: int(p[0] and (p[1] or p[2]))  # impact plus any backup
while session.status == "active":
    session.step(quirky(session.pending))
table = session.finalize()
print(f"  asked {session.counts['asked']}, inferred {session.counts['inferred']}")
print(f"  stored table: {table.fn.values()}")

yn = ValueScale(("N", "Y"))


def vote_model(binding, expert):
    root = FactorNode(
        id="go", prompt="Proceed?", scale=yn, aggregation=binding,
        children=[FactorNode(id=f"q{i}", prompt=f"Q{i}?", scale=yn) for i in range(3)],
    )
    return resolve_model(ModelSpecTree(root=root), expert=expert)


print("\nthree experts, one scenario (Y, N, Y):")
group = [
    vote_model(Majority(), "expert-1"),
    vote_model(Weighted((0.2, 0.6, 0.2), 0.5), "expert-2"),
    vote_model(Weighted((0.5, 0.25, 0.25), 0.5), "expert-3"),
]
verdict = group_aggregate(group, {"q0": "Y", "q1": "N", "q2": "Y"}, rule="majority")
for expert, label in verdict.labels.items():
    print(f"  {expert}: {label}")
print(f"  majority verdict: {verdict.aggregate_label}, disagreement flagged: {verdict.disagreement}")

print("\nwhere exactly do two elicited models differ?")


def table_model(fn, expert):
    session = start_session_raw(lattice, BINARY, expert=expert)
    while session.status == "active":
        session.step(fn(session.pending))
    root = FactorNode(
        id="go", prompt="Proceed?", aggregation=TableRule(session.finalize()),
        children=[FactorNode(id=f"q{i}", prompt=f"Q{i}?") for i in range(3)],
    )
    return resolve_model(ModelSpecTree(root=root), expert=expert)


strict = table_model(lambda p: int(all(p)), "strict")
lenient = table_model(lambda p: int(p[0] and p[2]), "lenient")
print(f"  disagreement points: {disagreement_points(strict, lenient, 'go')}")
