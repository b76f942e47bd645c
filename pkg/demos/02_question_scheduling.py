"""How few questions pin down a whole decision table.

For binary factors the cube splits into saturated chains; walking them
shortest-first with closure applied after every answer restores any
monotone rule within C(n, n//2) + C(n, n//2 + 1) questions.  General
ordinal scales fall back to a greedy worst-case-information schedule.
"""

import random

from emmkit import (
    BINARY,
    QuestionPlan,
    ValueScale,
    hansel_chains,
    make_lattice,
    new_partial,
    question_bound,
)

part = hansel_chains(3)
print(f"the 3-cube splits into {part.chain_count} chains:")
for chain in part.visit_order():
    print("  ", " < ".join(str(p) for p in chain))
print(f"worst case questions: {question_bound(3)} (of 8 scenarios)")


def elicit(lattice, out, strategy, answer):
    f = new_partial(lattice, out)
    plan = QuestionPlan.for_lattice(lattice, out, strategy)
    asked = 0
    while (q := plan.next_question(f)) is not None:
        f.record(q, answer(q))
        asked += 1
    return f, asked


print("\neliciting 'at least two of three' on the 3-cube:")
rule = lambda p: int(sum(p) >= 2)
f, asked = elicit(make_lattice([BINARY] * 3), BINARY, "hansel", rule)
print(f"  asked {asked} questions, inferred {8 - asked}")
print(f"  table: {f.min_extension().values()}")

print("\nat 8 factors the gap widens (256 scenarios):")
rng = random.Random(1)
lattice = make_lattice([BINARY] * 8)
seeds = [tuple(rng.randint(0, 1) for _ in range(8)) for _ in range(4)]
target = lambda p: int(any(all(x >= y for x, y in zip(p, s)) for s in seeds))
f, asked = elicit(lattice, BINARY, "hansel", target)
print(f"  asked {asked} of 256 (bound {question_bound(8)})")

print("\nordinal scales use the greedy schedule; low/medium/high pair:")
tri = ValueScale(("low", "medium", "high"))
lattice = make_lattice([tri, tri])
f, asked = elicit(lattice, tri, "greedy", lambda p: max(p))
print(f"  asked {asked} of {lattice.point_count} for the worst-case rule")
print(f"  table: {f.min_extension().values()}")
