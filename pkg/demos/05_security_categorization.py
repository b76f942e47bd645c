"""FIPS-199 security categorization as a ready-made model.

The standard's worst-case rule (overall impact = highest factor impact)
means only the five observable questions ever reach the expert: 243 leaf
scenarios instead of 2187 free parent-level combinations.
"""

from itertools import product

from emmkit import fisma

model = fisma.build_model()
print("the categorization tree:")
for node in model.tree.nodes():
    depth = 0 if node is model.tree.root else (1 if not node.is_leaf or node.id == "availability" else 2)
    print(f"  {'  ' * depth}{node.prompt}")

print("\nworked example (levels 1=low, 2=medium, 3=high):")
level = fisma.categorize(secrets=1, personal_data=2, defacement=3, alteration=1, availability=2)
print(f"  confidentiality max(1,2) = 2, integrity max(3,1) = 3, availability 2")
print(f"  overall: max(2,3,2) = {level} -> {fisma.level_label(level)}")

counts = fisma.table_elicitation_counts()
print(f"\nelicitation budget with max everywhere: {counts['leaf_scenarios']} scenarios")
print(f"without the max rule: {counts['parent_level_combinations']} parent-level combinations")

print("\ninformation-type classification (0=na .. 3=high):")
for name, triple in fisma.CLASSIFICATION_EXAMPLES.items():
    print(f"  {name}: ({triple.confidentiality},{triple.integrity},{triple.availability})"
          f" -> {triple.label()}")
total = fisma.total_impact(fisma.CLASSIFICATION_EXAMPLES.values())
print(f"  combined: {fisma.CLASSIFICATION_SCALE.label(total)}")

print("\nsanity: the preset equals brute-force max on all 243 scenarios:", end=" ")
ok = all(
    model.evaluate(dict(zip(fisma.LEAF_ORDER, combo)))[0] == max(combo)
    for combo in product(range(3), repeat=5)
)
print("yes" if ok else "NO")

print("\nwhen the expert's judgment is not the max, use a table instead:")
b = fisma.ITEM_IMPACT_DIALOGUE["item_b"]
print(f"  observed factor levels {b['levels']} judged impact {b['impact']}"
      f" (a max rule would say {max(b['levels'])})")
