import json

import pytest
from click.testing import CliRunner

from emmkit import (
    FactorNode,
    Majority,
    ModelSpecTree,
    TotalMonotoneFn,
    ValueScale,
    Weighted,
    make_lattice,
)
from emmkit.aggregation import table_from_total
from emmkit.cli import main
from emmkit.oracle import builtin_rfp_document_bytes
from emmkit.persistence import save_spec

YN = ValueScale(("N", "Y"))


@pytest.fixture
def runner():
    return CliRunner()


def write_vote_model(path, binding, expert):
    tree = ModelSpecTree(
        root=FactorNode(
            id="go", prompt="Proceed?", scale=YN, aggregation=binding,
            children=[
                FactorNode(id="q17", prompt="Impact?", scale=YN),
                FactorNode(id="q18", prompt="Dissemination?", scale=YN),
                FactorNode(id="q19", prompt="Risks?", scale=YN),
            ],
        ),
        author=expert,
    )
    path.write_bytes(save_spec(tree, form="extended"))
    return path


def write_table_model(path, fn, expert):
    l = make_lattice([YN] * 3)
    total = TotalMonotoneFn.from_callable(l, YN, fn)
    tree = ModelSpecTree(
        root=FactorNode(
            id="go", prompt="Proceed?", scale=YN,
            aggregation=table_from_total(total, expert=expert),
            children=[FactorNode(id=f"q{i}", prompt=f"Q{i}?", scale=YN) for i in range(3)],
        ),
        author=expert,
    )
    path.write_bytes(save_spec(tree, form="extended"))
    return path


def test_fisma_demo_prints_high(runner):
    result = runner.invoke(main, ["fisma", "demo"])
    assert result.exit_code == 0
    assert "high" in result.output
    assert "243" in result.output and "2187" in result.output


def test_fisma_demo_json(runner):
    result = runner.invoke(main, ["fisma", "demo", "--json"])
    assert result.exit_code == 0
    payload = json.loads(result.output)
    assert payload["level"] == 3
    assert payload["label"] == "high"
    assert payload["classification_examples"]["public information"]["impact"] == 2


def test_spec_validate(runner, tmp_path):
    spec_file = tmp_path / "rfp.spec.json"
    spec_file.write_bytes(builtin_rfp_document_bytes())
    result = runner.invoke(main, ["spec", "validate", str(spec_file)])
    assert result.exit_code == 0  # warnings only
    assert "unresolved-aggregation" in result.output
    broken = tmp_path / "broken.spec.json"
    broken.write_text('{"A?": {}, "B?": {}}', encoding="utf-8")
    result = runner.invoke(main, ["spec", "validate", str(broken)])
    assert result.exit_code == 3


def test_spec_validate_json(runner, tmp_path):
    spec_file = tmp_path / "rfp.spec.json"
    spec_file.write_bytes(builtin_rfp_document_bytes())
    result = runner.invoke(main, ["spec", "validate", str(spec_file), "--json"])
    issues = json.loads(result.output)
    assert all(issue["level"] == "warning" for issue in issues)


def test_spec_new_scripted(runner, tmp_path):
    out = tmp_path / "new.spec.json"
    stdin = "Should we do it?\nshould-we-do-it :: Is it cheap?\nshould-we-do-it :: Is it fun?\n\n"
    result = runner.invoke(main, ["spec", "new", "--out", str(out)], input=stdin)
    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert list(doc) == ["Should we do it?"]
    assert set(doc["Should we do it?"]) == {"Is it cheap?", "Is it fun?"}


def test_elicit_scripted_constant_no(runner, tmp_path):
    spec_file = tmp_path / "rfp.spec.json"
    spec_file.write_bytes(builtin_rfp_document_bytes())
    oracle_file = tmp_path / "oracle.json"
    oracle_file.write_text('{"form": "const:0"}', encoding="utf-8")
    model_file = tmp_path / "out.model.json"
    log_file = tmp_path / "session.log.jsonl"
    result = runner.invoke(main, [
        "elicit", "--spec", str(spec_file),
        "--node", "does-the-topic-of-or-do-topics-within-the-rfp-align",
        "--expert", "e1", "--oracle", f"scripted:{oracle_file}",
        "--out", str(model_file), "--log", str(log_file),
    ])
    assert result.exit_code == 0, result.output
    assert "complete" in result.output
    asked = int(result.output.split("asked=")[-1].split()[0])
    assert asked <= 6
    assert "asked=1" in result.output  # progress printed after each answer
    saved = json.loads(model_file.read_text())
    node = [c for c in saved["root"]["children"]
            if c["id"] == "does-the-topic-of-or-do-topics-within-the-rfp-align"][0]
    assert node["aggregation"]["rule"] == "table"
    assert set(node["aggregation"]["values"]) == {0}
    assert log_file.exists()


def test_elicit_human_mode_reads_labels(runner, tmp_path):
    spec_file = tmp_path / "rfp.spec.json"
    spec_file.write_bytes(builtin_rfp_document_bytes())
    answers = "\n".join(["no"] * 6) + "\n"
    result = runner.invoke(main, [
        "elicit", "--spec", str(spec_file),
        "--node", "do-we-have-personnel-with-qualifications",
        "--expert", "human-1",
    ], input=answers)
    assert result.exit_code == 0, result.output
    assert "complete" in result.output


def test_elicit_conflict_exit_code(runner, tmp_path):
    tree = ModelSpecTree(
        root=FactorNode(
            id="root", prompt="Overall?", scale=ValueScale(("low", "medium", "high")),
            children=[FactorNode(id="c", prompt="C?", scale=ValueScale(("low", "medium", "high")))],
        )
    )
    spec_file = tmp_path / "tri.spec.json"
    spec_file.write_bytes(save_spec(tree, form="extended"))
    oracle_file = tmp_path / "oracle.json"
    # medium at the middle, then an impossible high at the bottom
    oracle_file.write_text('{"mapping": {"1": 1, "0": 2, "2": 2}}', encoding="utf-8")
    result = runner.invoke(main, [
        "elicit", "--spec", str(spec_file), "--node", "root",
        "--expert", "e1", "--oracle", f"scripted:{oracle_file}", "--strategy", "greedy",
    ])
    assert result.exit_code == 4
    assert "conflict" in result.output


def test_eval_command(runner, tmp_path):
    model_file = write_vote_model(tmp_path / "m.model.json", Majority(), "e1")
    result = runner.invoke(main, [
        "eval", "--model", str(model_file),
        "--answers", '{"q17": "Y", "q18": "N", "q19": "Y"}',
    ])
    assert result.exit_code == 0, result.output
    assert "Y (1)" in result.output
    result = runner.invoke(main, [
        "eval", "--model", str(model_file),
        "--answers", '{"q17": "Y", "q18": "N", "q19": "Y"}',
        "--explain-depth", "0", "--json",
    ])
    payload = json.loads(result.output)
    assert payload["value"] == 1
    assert payload["trace"]["root"]["children"] == []


def test_eval_missing_answers_file(runner, tmp_path):
    model_file = write_vote_model(tmp_path / "m.model.json", Majority(), "e1")
    result = runner.invoke(main, [
        "eval", "--model", str(model_file), "--answers", str(tmp_path / "nope.json"),
    ])
    assert result.exit_code == 5


def test_group_command(runner, tmp_path):
    files = [
        write_vote_model(tmp_path / "a.json", Majority(), "e1"),
        write_vote_model(tmp_path / "b.json", Weighted((0.2, 0.6, 0.2), 0.5), "e2"),
        write_vote_model(tmp_path / "c.json", Weighted((0.5, 0.25, 0.25), 0.5), "e3"),
    ]
    args = ["group", "--answers", '{"q17": "Y", "q18": "N", "q19": "Y"}']
    for f in files:
        args += ["--models", str(f)]
    result = runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    assert "majority: Y (1)" in result.output
    assert "disagreement" in result.output
    result = runner.invoke(main, args + ["--json"])
    payload = json.loads(result.output)
    assert payload["per_expert"] == {"e1": 1, "e2": 0, "e3": 1}
    assert payload["aggregate"] == 1


def test_diff_and_viz_commands(runner, tmp_path):
    a = write_table_model(tmp_path / "a.json", lambda p: int(all(p)), "e1")
    b = write_table_model(tmp_path / "b.json", lambda p: int(p[0] and p[2]), "e2")
    result = runner.invoke(main, ["diff", "--models", str(a), "--models", str(b), "--node", "go"])
    assert result.exit_code == 0, result.output
    assert "(1, 0, 1)" in result.output
    result = runner.invoke(main, ["diff", "--models", str(a), "--models", str(b), "--node", "go", "--json"])
    assert json.loads(result.output)["points"] == [[1, 0, 1]]
    svg_path = tmp_path / "chains.svg"
    result = runner.invoke(main, ["viz", "--model", str(a), "--node", "go", "--out", str(svg_path)])
    assert result.exit_code == 0, result.output
    assert svg_path.read_text().startswith("<svg")
    result = runner.invoke(main, ["diff", "--models", str(a), "--node", "go"])
    assert result.exit_code == 2  # usage: needs exactly two models


def test_unknown_node_is_validation_error(runner, tmp_path):
    model_file = write_vote_model(tmp_path / "m.json", Majority(), "e1")
    result = runner.invoke(main, ["viz", "--model", str(model_file), "--node", "ghost", "--out", str(tmp_path / "x.svg")])
    assert result.exit_code == 3
