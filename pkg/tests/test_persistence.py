import json
import random

import pytest

from emmkit import (
    BINARY,
    FactorNode,
    IoError,
    Majority,
    MaxRule,
    ModelSpecTree,
    SpecFormatError,
    TotalMonotoneFn,
    ValidationError,
    ValueScale,
    Weighted,
    make_lattice,
    resolve_model,
    start_session_raw,
)
from emmkit.aggregation import CriticalThreshold, TableRule, table_from_total
from emmkit.oracle import builtin_rfp_document_bytes
from emmkit.persistence import (
    canonical_bytes,
    export_chain_layout,
    load_model,
    load_spec,
    render_chain_svg,
    save_model,
    save_spec,
)
from support import binary_lattice, three_scale


def test_rfp_bytes_parse_and_round_trip():
    raw = builtin_rfp_document_bytes()
    tree = load_spec(raw)
    assert len(tree.nodes()) == 18
    assert len(tree.leaves()) == 13
    again = save_spec(tree, form="plain")
    assert again == canonical_bytes(json.loads(raw))
    # and idempotently
    assert save_spec(load_spec(again), form="plain") == again


def test_plain_form_preserves_key_order():
    doc = {"Root?": {"B?": {}, "A?": {}, "M?": {}}}
    tree = load_spec(doc)
    assert [c.prompt for c in tree.root.children] == ["B?", "A?", "M?"]
    assert json.loads(save_spec(tree, form="plain")) == doc


def test_plain_form_refuses_extended_features():
    tree = load_spec({"Root?": {"A?": {}}})
    tree.root.aggregation = Majority()
    with pytest.raises(SpecFormatError):
        save_spec(tree, form="plain")
    with pytest.raises(ValidationError):
        save_spec(tree, form="sideways")


def test_extended_schema_validation():
    with pytest.raises(SpecFormatError) as err:
        load_spec({"format_version": 1, "root": {"prompt": "missing id"}})
    assert "root" in str(err.value)
    with pytest.raises(SpecFormatError):
        load_spec({"format_version": 999, "root": {"id": "r", "prompt": "R?"}})
    with pytest.raises(SpecFormatError):
        load_spec(b"not json at all")
    with pytest.raises(IoError):
        load_spec("/nonexistent/path.spec.json")


def random_tree(rng: random.Random) -> ModelSpecTree:
    scales = [
        BINARY,
        three_scale(),
        ValueScale(("bad", "ok", "good", "great")),
    ]
    counter = [0]

    def node(depth) -> FactorNode:
        counter[0] += 1
        nid = f"n{counter[0]}"
        scale = scales[rng.randrange(len(scales))]
        kids = []
        if depth < 3 and rng.random() < 0.6:
            kids = [node(depth + 1) for _ in range(rng.randrange(1, 4))]
        f = FactorNode(
            id=nid,
            prompt=f"Question {counter[0]}?",
            scale=scale,
            reversed=rng.random() < 0.2,
            children=kids,
            gate=(rng.randrange(scale.size - 1) if kids and rng.random() < 0.3 else None),
            short_circuit_group=("g" if kids and rng.random() < 0.3 else None),
        )
        if kids:
            choice = rng.random()
            if choice < 0.3:
                f.aggregation = Majority(tie=rng.choice(["low", "high"]))
            elif choice < 0.5:
                w = [rng.random() + 0.05 for _ in kids]
                total = sum(w)
                f.aggregation = Weighted(tuple(x / total for x in w), 0.5)
            elif choice < 0.65:
                f.aggregation = CriticalThreshold(frozenset({kids[0].id}), Majority())
            elif choice < 0.8:
                f.aggregation = MaxRule()
            # else left unresolved
        return f

    return ModelSpecTree(root=node(0), title="fuzz", author="fuzzer", version="7")


def test_extended_round_trip_fuzz():
    rng = random.Random(2024)
    for _ in range(500):
        tree = random_tree(rng)
        data = save_spec(tree, form="extended")
        again = save_spec(load_spec(data), form="extended")
        assert again == data


def test_table_binding_round_trips():
    l = binary_lattice(3)
    s = start_session_raw(l, BINARY, expert="tabler")
    while s.status == "active":
        s.step(s.pending[0])
    tree = ModelSpecTree(
        root=FactorNode(
            id="r", prompt="R?", aggregation=TableRule(s.finalize()),
            children=[FactorNode(id=f"c{i}", prompt=f"C{i}?") for i in range(3)],
        ),
        author="tabler",
    )
    data = save_spec(tree, form="extended")
    loaded = load_spec(data)
    binding = loaded.root.aggregation
    assert isinstance(binding, TableRule)
    assert binding.table.fn.values() == s.finalize().fn.values()
    assert binding.table.expert == "tabler"
    assert save_spec(loaded, form="extended") == data


def test_load_model_requires_resolution():
    tree = load_spec({"Root?": {"A?": {}}})
    with pytest.raises(SpecFormatError):
        load_model(save_spec(tree, form="extended"))
    tree.root.aggregation = Majority()
    model = load_model(save_spec(ModelSpecTree(root=tree.root, author="me"), form="extended"))
    assert model.expert == "me"
    assert json.loads(save_model(model))["kind"] == "expert-model"


def layout_model(fn, n=3, expert="e1"):
    l = binary_lattice(n)
    total = TotalMonotoneFn.from_callable(l, BINARY, fn)
    tree = ModelSpecTree(
        root=FactorNode(
            id="r", prompt="R?", aggregation=table_from_total(total, expert=expert),
            children=[FactorNode(id=f"c{i}", prompt=f"C{i}?") for i in range(n)],
        )
    )
    return resolve_model(tree, expert)


def test_chain_layout_constant_tables():
    ones = export_chain_layout(layout_model(lambda p: 1), "r")
    assert ones["chain_count"] == 3
    assert {e["value"] for chain in ones["chains"] for e in chain} == {1}
    covered = sorted(tuple(e["point"]) for chain in ones["chains"] for e in chain)
    assert covered == sorted(binary_lattice(3).points())
    zeros = export_chain_layout(layout_model(lambda p: 0), "r")
    assert {e["value"] for chain in zeros["chains"] for e in chain} == {0}


def test_chain_layout_matches_scheduler_order():
    layout = export_chain_layout(layout_model(lambda p: p[0]), "r")
    from emmkit import hansel_chains

    expected = hansel_chains(3).visit_order()
    got = [[tuple(e["point"]) for e in chain] for chain in layout["chains"]]
    assert got == [list(c) for c in expected]
    positions = [[e["position"] for e in chain] for chain in layout["chains"]]
    assert positions == [list(range(len(c))) for c in expected]


def test_chain_layout_eleven_factors():
    model = layout_model(lambda p: int(sum(p) >= 6), n=11)
    layout = export_chain_layout(model, "r")
    assert layout["chain_count"] == 462


def test_chain_layout_guards():
    model = layout_model(lambda p: 1)
    with pytest.raises(ValidationError):
        export_chain_layout(model, "nonexistent")
    tri = make_lattice([three_scale()] * 2)
    total = TotalMonotoneFn.from_callable(tri, three_scale(), lambda p: max(p))
    tree = ModelSpecTree(
        root=FactorNode(
            id="r", prompt="R?", scale=three_scale(),
            aggregation=table_from_total(total),
            children=[FactorNode(id=f"c{i}", prompt=f"C{i}?", scale=three_scale()) for i in range(2)],
        )
    )
    with pytest.raises(ValidationError):
        export_chain_layout(resolve_model(tree, "e1"), "r")
    majority_tree = ModelSpecTree(
        root=FactorNode(
            id="r", prompt="R?", aggregation=Majority(),
            children=[FactorNode(id="c0", prompt="C0?")],
        )
    )
    with pytest.raises(ValidationError):
        export_chain_layout(resolve_model(majority_tree, "e1"), "r")


def test_svg_rendering():
    layout = export_chain_layout(layout_model(lambda p: p[0]), "r")
    svg = render_chain_svg(layout)
    assert svg.startswith("<svg")
    assert svg.count("<rect") == 8
    assert svg.count('fill="#000000"') == 4  # half the cube has first coord 1
    marked = render_chain_svg(layout, highlight={(1, 0, 0)})
    assert marked.count('stroke="#d03030"') == 1


def test_canonical_bytes_are_stable():
    doc = {"b": 1, "a": [1, 2, {"x": True}]}
    assert canonical_bytes(doc) == canonical_bytes(json.loads(json.dumps(doc)))
    assert canonical_bytes(doc).endswith(b"\n")
