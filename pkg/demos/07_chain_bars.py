"""Rendering an elicited model as chain-ordered bars.

A binary table laid out along the question schedule's chains makes the
acceptance frontier visible: filled bars are scenarios the expert
accepts, empty bars scenarios they reject, and comparing two experts
column by column shows exactly where their models part ways.
"""

from pathlib import Path

from emmkit import BINARY, FactorNode, ModelSpecTree, make_lattice, resolve_model, start_session_raw
from emmkit.aggregation import TableRule, disagreement_points
from emmkit.persistence import export_chain_layout, render_chain_svg

lattice = make_lattice([BINARY] * 4)


def elicited_model(fn, expert):
    session = start_session_raw(lattice, BINARY, expert=expert)
    while session.status == "active":
        session.step(fn(session.pending))
    root = FactorNode(
        id="accept", prompt="Accept the case?", aggregation=TableRule(session.finalize()),
        children=[FactorNode(id=f"sign{i}", prompt=f"Sign {i} present?") for i in range(4)],
    )
    print(f"  {expert}: asked {session.counts['asked']} of {lattice.point_count}")
    return resolve_model(ModelSpecTree(root=root), expert=expert)


print("eliciting two experts over 4 binary factors:")
careful = elicited_model(lambda p: int(sum(p) >= 3), "careful")
eager = elicited_model(lambda p: int(sum(p) >= 3 or (p[0] and p[1])), "eager")

layout = export_chain_layout(careful, "accept")
print(f"\nlayout: {layout['chain_count']} chains, longest {max(len(c) for c in layout['chains'])}")
row = layout["chains"][layout["chain_count"] - 1]
print("  longest chain bottom-to-top:",
      " ".join(f"{tuple(e['point'])}={'#' if e['value'] else '.'}" for e in row))

differences = set(map(tuple, disagreement_points(careful, eager, "accept")))
print(f"\nexperts differ at: {sorted(differences)}")

out_dir = Path(__file__).resolve().parent / "out"
out_dir.mkdir(exist_ok=True)
for model in (careful, eager):
    svg = render_chain_svg(export_chain_layout(model, "accept"), highlight=differences)
    path = out_dir / f"{model.expert}.svg"
    path.write_text(svg, encoding="utf-8")
    print(f"wrote {path}")
print("differing bars carry the accent outline in both renderings")
