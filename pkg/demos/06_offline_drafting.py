"""Drafting factors and hierarchies with an LLM -- exercised offline.

Drafts are untrusted: a hierarchy is accepted only if every input factor
appears exactly once as a leaf.  Offline mode (the default) returns the
bundled fixtures, so this whole path runs without network access.
"""

from emmkit import OracleError, validate_spec
from emmkit.oracle import llm_generate_factors, llm_generate_hierarchy, render_prompt

factors = llm_generate_factors("Should we respond to the call for proposals?")
print(f"{len(factors)} candidate factors, e.g.:")
for q in factors[:3]:
    print(f"  - {q}")

draft = llm_generate_hierarchy(factors)
print(f"\nhierarchy draft: root {draft.root.prompt!r}")
for group in draft.root.children:
    print(f"  {group.prompt}  ({len(group.children)} questions)")

print("\nstructural review:")
for issue in validate_spec(draft):
    if issue.code == "fan-out":
        print(f"  {issue.level}: {issue.node_id}: {issue.message}")
print("  (unresolved-aggregation warnings omitted; drafts arrive unresolved by design)")

print("\ndrafts that drop or invent factors are rejected:")
try:
    llm_generate_hierarchy(factors + ["Is the moon full tonight?"])
except OracleError as err:
    print(f"  {str(err)[:120]}...")

print("\nprompt templates are versioned assets:")
text = render_prompt("factor-ideation", decision="Should we respond to the RFP?")
print("  " + text.splitlines()[0])
