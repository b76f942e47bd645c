"""Ready-made FIPS-199 security-categorization model.

The standard folds answers upward with a worst-case maximum: a system's
impact level is the highest impact among its factors.  That gives a
two-level tree (confidentiality and integrity each generalize two
observable questions; availability is asked directly) in which every
aggregation is the max rule, so only the five leaf questions ever need a
domain expert.

Levels follow the standard's wording: 1 = low, 2 = medium, 3 = high.
Internally the engine indexes scales from 0, so the helpers here accept
and return 1-based levels and translate at the boundary.  The
information-type classification examples use the standard's 4-valued
scale (0 = not applicable) where index and level coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .hierarchy import ExpertModel, FactorNode, ModelSpecTree
from .aggregation import MaxRule
from .lattice import ValueScale

#: Scale of the categorization model; index i is level i+1.
IMPACT_SCALE = ValueScale(("low", "medium", "high"))

#: Scale used by the information-type examples; index equals the level.
CLASSIFICATION_SCALE = ValueScale(("na", "low", "moderate", "high"))

LEVEL_LOW, LEVEL_MEDIUM, LEVEL_HIGH = 1, 2, 3

LEAF_ORDER = ("secrets", "personal_data", "defacement", "alteration", "availability")


def level_label(level: int) -> str:
    """1 -> low, 2 -> medium, 3 -> high."""
    return IMPACT_SCALE.label(_level_to_index(level))


def _level_to_index(level: int) -> int:
    if level not in (1, 2, 3):
        raise ValidationError(f"impact level must be 1, 2 or 3, got {level!r}")
    return level - 1


def _index_to_level(index: int) -> int:
    return index + 1


def build_model(expert: str = "doctrine") -> ExpertModel:
    """The categorization tree with max bound at every internal node."""
    confidentiality = FactorNode(
        id="confidentiality",
        prompt="How confidential is the system's data?",
        scale=IMPACT_SCALE,
        aggregation=MaxRule(),
        children=[
            FactorNode(
                id="secrets",
                prompt="Are there secrets or private information that you need to protect?",
                scale=IMPACT_SCALE,
            ),
            FactorNode(
                id="personal_data",
                prompt="Is there personal identifiable information (PII), contract data, or other special kinds of data?",
                scale=IMPACT_SCALE,
            ),
        ],
    )
    integrity = FactorNode(
        id="integrity",
        prompt="What is the importance of the system's integrity?",
        scale=IMPACT_SCALE,
        aggregation=MaxRule(),
        children=[
            FactorNode(
                id="defacement",
                prompt="What would be the impacts of the system getting defaced?",
                scale=IMPACT_SCALE,
            ),
            FactorNode(
                id="alteration",
                prompt="What could happen if the data was altered?",
                scale=IMPACT_SCALE,
            ),
        ],
    )
    availability = FactorNode(
        id="availability",
        prompt="How important is the availability of the data?",
        scale=IMPACT_SCALE,
    )
    root = FactorNode(
        id="security_impact",
        prompt="What is the system's overall security impact?",
        scale=IMPACT_SCALE,
        aggregation=MaxRule(),
        children=[confidentiality, integrity, availability],
    )
    tree = ModelSpecTree(
        root=root,
        title="FIPS-199 security categorization",
        author=expert,
        version="1",
    )
    return ExpertModel(tree=tree, expert=expert)


def categorize(
    secrets: int,
    personal_data: int,
    defacement: int,
    alteration: int,
    availability: int,
) -> int:
    """Overall impact level (1..3) from the five leaf levels (1..3)."""
    model = build_model()
    answers = {
        "secrets": _level_to_index(secrets),
        "personal_data": _level_to_index(personal_data),
        "defacement": _level_to_index(defacement),
        "alteration": _level_to_index(alteration),
        "availability": _level_to_index(availability),
    }
    value, _ = model.evaluate(answers)
    return _index_to_level(value)


@dataclass(frozen=True)
class SecurityObjectiveTriple:
    """Impact of one information type on the three security objectives,
    on the 4-valued scale (0 = not applicable .. 3 = high)."""

    confidentiality: int
    integrity: int
    availability: int

    def __post_init__(self):
        for name, v in (
            ("confidentiality", self.confidentiality),
            ("integrity", self.integrity),
            ("availability", self.availability),
        ):
            if not 0 <= v <= 3:
                raise ValidationError(f"{name} must be in 0..3, got {v!r}")

    @property
    def impact(self) -> int:
        return max(self.confidentiality, self.integrity, self.availability)

    def label(self) -> str:
        return CLASSIFICATION_SCALE.label(self.impact)


#: Worked information-type classifications from the standard's worksheet.
CLASSIFICATION_EXAMPLES: dict[str, SecurityObjectiveTriple] = {
    "public information": SecurityObjectiveTriple(0, 2, 2),
    "investigative information": SecurityObjectiveTriple(3, 2, 2),
    "administrative information": SecurityObjectiveTriple(1, 1, 1),
}


def total_impact(items) -> int:
    """Highest impact across items; an item is a triple or a bare level."""
    items = list(items)
    if not items:
        raise ValidationError("no items to combine")
    impacts = [item.impact if isinstance(item, SecurityObjectiveTriple) else int(item) for item in items]
    return max(impacts)


#: Sample per-item impact dialogue: factor levels observed today for three
#: protected items, with the expert's judged per-item impact.  Useful as
#: scripted single-point answers in elicitation tests; these judgments are
#: the expert's own and are *not* the max of their inputs.
ITEM_IMPACT_DIALOGUE = {
    "item_a": {"factors": ("y1", "y2"), "levels": (2, 1), "impact": 2},
    "item_b": {"factors": ("y3", "y4"), "levels": (3, 2), "impact": 2},
    "item_c": {"factors": ("y5", "y6", "y7", "y8"), "levels": (1, 1, 3, 3), "impact": 3},
}


def table_elicitation_counts() -> dict[str, int]:
    """How large the elicitation job becomes with and without the max rule.

    With max bound everywhere only the leaf scenarios matter (3^5).
    Without it, each two-child branch is a free 3-valued table over 9
    scenarios (9 * 3 = 27 input/output combinations), the root then spans
    27 * 27 * 3 parent-level combinations, and fixing the root's own value
    multiplies by 3 once more.
    """
    model = build_model()
    leaf_scenarios = 1
    for leaf in model.tree.leaves():
        leaf_scenarios *= leaf.scale.size
    parent_level = 1
    for child in model.tree.root.children:
        if child.is_leaf:
            parent_level *= child.scale.size
        else:
            inputs = 1
            for grandchild in child.children:
                inputs *= grandchild.scale.size
            parent_level *= inputs * child.scale.size
    return {
        "leaf_scenarios": leaf_scenarios,
        "parent_level_combinations": parent_level,
        "total_function_space": parent_level * model.tree.root.scale.size,
    }
