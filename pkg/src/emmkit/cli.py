"""Operator command line.

Exit codes: 0 ok, 2 usage, 3 validation, 4 conflict, 5 io, 6 oracle.
Errors print one line to stderr as ``error:<category>: <message>``.
Read commands take --json for machine consumption; the only interactive
prompts anywhere are the human-oracle questions of ``elicit`` and the
factor dialogue of ``spec new`` (both read stdin, so they pipe cleanly).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import fisma, oracle, persistence
from .elicitation import CONFLICTED, start_session
from .errors import EmmError, IoError, UsageError
from .hierarchy import FactorNode, add_factor, validate_spec
from .aggregation import TableRule, disagreement_points, group_aggregate
from .oracle import HumanOracle, load_oracle, oracle_answer

EXIT_CODES = {"usage": 2, "validation": 3, "conflict": 4, "io": 5, "oracle": 6}


def _fail(category: str, message: str) -> None:
    click.echo(f"error:{category}: {message}", err=True)
    sys.exit(EXIT_CODES.get(category, 3))


def engine_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EmmError as exc:
            _fail(exc.category, str(exc))
        except OSError as exc:
            _fail("io", str(exc))

    return wrapper


@click.group()
@click.version_option(package_name="emmkit")
def main():
    """Hierarchical expert decision models over ordinal factors."""


# -- spec ----------------------------------------------------------------------


@main.group()
def spec():
    """Create and check model-spec documents."""


@spec.command("new")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True, help="Where to write the document.")
@click.option("--form", type=click.Choice(["plain", "extended"]), default="plain", show_default=True)
@engine_errors
def spec_new(out_path, form):
    """Build a spec interactively: a root question, then factors under it.

    Reads stdin: first the root question, then lines of the form
    PARENT-ID :: PROMPT (blank line to finish).  Prints each node's id as
    it is created.
    """
    click.echo("Root question:", err=True)
    root_prompt = sys.stdin.readline().strip()
    if not root_prompt:
        raise UsageError("no root question given")
    tree = persistence.parse_spec({root_prompt: {}})
    click.echo(f"root id: {tree.root.id}")
    click.echo("Add factors as 'PARENT-ID :: PROMPT' (blank line to finish):", err=True)
    used = {tree.root.id}
    for line in sys.stdin:
        line = line.strip()
        if not line:
            break
        if "::" not in line:
            raise UsageError(f"expected 'PARENT-ID :: PROMPT', got {line!r}")
        parent_id, prompt = (part.strip() for part in line.split("::", 1))
        node_id = _fresh_slug(prompt, used)
        add_factor(tree, parent_id, FactorNode(id=node_id, prompt=prompt))
        click.echo(f"added {node_id} under {parent_id}")
    Path(out_path).write_bytes(persistence.save_spec(tree, form=form))
    click.echo(f"wrote {out_path} ({len(tree.nodes())} nodes)")


def _fresh_slug(prompt: str, used: set[str]) -> str:
    from .hierarchy import _slugify

    base = _slugify(prompt)
    slug, i = base, 2
    while slug in used:
        slug = f"{base}-{i}"
        i += 1
    used.add(slug)
    return slug


@spec.command("validate")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable report.")
@engine_errors
def spec_validate(file, as_json):
    """Structural report for a spec document; exits 3 on errors."""
    tree = persistence.load_spec(file)
    issues = validate_spec(tree)
    if as_json:
        click.echo(json.dumps([issue.__dict__ for issue in issues], indent=2))
    else:
        if not issues:
            click.echo(f"ok: {len(tree.nodes())} nodes, no issues")
        for issue in issues:
            click.echo(f"{issue.level}: [{issue.code}] {issue.node_id}: {issue.message}")
    if any(issue.level == "error" for issue in issues):
        sys.exit(EXIT_CODES["validation"])


# -- elicit ---------------------------------------------------------------------


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--node", "node_id", required=True)
@click.option("--expert", required=True)
@click.option("--oracle", "oracle_spec", default="human", show_default=True,
              help="scripted:<file> | human | llm")
@click.option("--strategy", type=click.Choice(["hansel", "greedy"]), default="hansel", show_default=True)
@click.option("--policy", type=click.Choice(["min", "max", "require-complete"]), default="min",
              show_default=True, help="Completion policy at finalize.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Write the model document with the elicited table bound.")
@click.option("--log", "log_path", type=click.Path(dir_okay=False), help="Write the session event log.")
@engine_errors
def elicit(spec_path, node_id, expert, oracle_spec, strategy, policy, out_path, log_path):
    """Run an elicitation session for one node of a spec."""
    tree = persistence.load_spec(spec_path)
    node = tree.find(node_id)
    session = start_session(node, strategy=strategy, expert=expert)
    binding = load_oracle(oracle_spec, ask=_terminal_ask(node, session))
    interactive = isinstance(binding, HumanOracle)
    while session.status == "active":
        point = session.pending
        context = _question_context(node, point, session)
        if interactive:
            _print_scenario(node, point, session)
        answer = oracle_answer(binding, point, context)
        session.step(answer)
        counts = session.counts
        click.echo(
            f"answered f{tuple(point)}={answer}  "
            f"asked={counts['asked']} inferred={counts['inferred']} remaining={counts['remaining']}"
        )
        if session.status == CONFLICTED:
            conflict = session.conflict
            click.echo("conflict: that answer contradicts earlier ones:", err=True)
            for prior in conflict.conflicting:
                click.echo(f"  answer #{prior['seq']}: f{tuple(prior['point'])}={prior['value']}", err=True)
            if log_path:
                persistence.write_session_log(session, log_path)
            _fail("conflict", "session parked in conflicted state; resolve and re-run")
    table = session.finalize(policy)
    counts = session.counts
    click.echo(f"complete: asked={counts['asked']} inferred={counts['inferred']} of {session.fn.lattice.point_count}")
    if log_path:
        persistence.write_session_log(session, log_path)
        click.echo(f"log written to {log_path}")
    if out_path:
        node.aggregation = TableRule(table)
        tree.author = tree.author or expert
        doc = persistence.save_spec(tree, form="extended")
        Path(out_path).write_bytes(doc)
        click.echo(f"model written to {out_path}")


def _question_context(node, point, session):
    children = node.children
    return {
        "prompt": node.prompt,
        "out_labels": list(node.scale.labels),
        "scenario_lines": [
            f"{child.prompt}: {child.scale.label(v)}" for child, v in zip(children, point)
        ],
    }


def _print_scenario(node, point, session):
    counts = session.counts
    click.echo("")
    click.echo(f"[{counts['asked'] + 1}] {node.prompt}")
    for child, v in zip(node.children, point):
        click.echo(f"    {child.prompt}  ->  {child.scale.label(v)}")
    click.echo(f"    answers: {', '.join(node.scale.labels)}")


def _terminal_ask(node, session):
    def ask(point, context):
        line = input("your answer: ")
        return node.scale.index_of(line.strip())

    return ask


# -- eval -----------------------------------------------------------------------


def _load_answers(answers: str) -> dict:
    text = answers.strip()
    if text.startswith("{"):
        return json.loads(text)
    try:
        return json.loads(Path(answers).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read answers {answers!r}: {exc}") from exc


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--answers", required=True, help="JSON file or inline JSON object of node-id -> answer.")
@click.option("--policy", type=click.Choice(["strict-gate", "full"]), default="full", show_default=True)
@click.option("--explain-depth", "depth", type=int, default=None,
              help="Truncate the explanation to this depth (default: full trace).")
@click.option("--json", "as_json", is_flag=True)
@engine_errors
def eval_cmd(model_path, answers, policy, depth, as_json):
    """Evaluate a model on a scenario and print the explanation."""
    model = persistence.load_model(model_path)
    answer_map = _load_answers(answers)
    value, trace = model.evaluate(answer_map, policy=policy)
    if depth is not None:
        trace = trace.truncated(depth)
    if as_json:
        click.echo(json.dumps({"value": value, "label": trace.root.label, "trace": trace.to_dict()}, indent=2))
        return
    click.echo(f"{trace.root.prompt}  ->  {trace.root.label} ({value})")
    _print_trace(trace.root, indent=1)


def _print_trace(node, indent):
    for child in node.children:
        click.echo(f"{'  ' * indent}{child.prompt}  ->  {child.label}  [{child.rule}]")
        _print_trace(child, indent + 1)
    for pruned in node.pruned:
        click.echo(f"{'  ' * indent}{pruned.prompt}  ->  skipped (answer at {pruned.gating_node} settled it)")


# -- group / diff / viz ------------------------------------------------------------


@main.command()
@click.option("--models", "model_paths", type=click.Path(exists=True, dir_okay=False),
              multiple=True, required=True)
@click.option("--answers", required=True)
@click.option("--rule", type=click.Choice(["majority", "unanimity"]), default="majority", show_default=True)
@click.option("--json", "as_json", is_flag=True)
@engine_errors
def group(model_paths, answers, rule, as_json):
    """Put one scenario to several experts' models and combine the verdicts."""
    models = [persistence.load_model(p) for p in model_paths]
    verdict = group_aggregate(models, _load_answers(answers), rule=rule)
    if as_json:
        click.echo(json.dumps(verdict.__dict__, indent=2))
        return
    for expert, value in verdict.per_expert.items():
        click.echo(f"{expert}: {verdict.labels[expert]} ({value})")
    if verdict.tie:
        click.echo(f"{rule}: tie, no aggregate")
    else:
        click.echo(f"{rule}: {verdict.aggregate_label} ({verdict.aggregate})")
    if verdict.disagreement:
        click.echo("disagreement flagged: experts differ on this scenario")


@main.command()
@click.option("--models", "model_paths", type=click.Path(exists=True, dir_okay=False),
              multiple=True, required=True)
@click.option("--node", "node_id", required=True)
@click.option("--json", "as_json", is_flag=True)
@engine_errors
def diff(model_paths, node_id, as_json):
    """Points where two experts' elicited tables disagree."""
    if len(model_paths) != 2:
        raise UsageError(f"diff needs exactly two --models, got {len(model_paths)}")
    a, b = (persistence.load_spec(p) for p in model_paths)
    points = disagreement_points(a, b, node_id)
    if as_json:
        click.echo(json.dumps({"node": node_id, "points": [list(p) for p in points]}))
        return
    if not points:
        click.echo(f"models agree at every point of {node_id}")
    labels = [m.author or f"model {i + 1}" for i, m in enumerate((a, b))]
    for p in points:
        click.echo(f"differs at {p}: {labels[0]}={_table_value(a, node_id, p)} {labels[1]}={_table_value(b, node_id, p)}")


def _table_value(tree, node_id, point):
    return tree.find(node_id).aggregation.table.fn(point)


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--node", "node_id", required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@engine_errors
def viz(model_path, node_id, out_path):
    """Render a node's elicited table as chain-ordered bars (SVG)."""
    model = persistence.load_spec(model_path)
    layout = persistence.export_chain_layout(model, node_id)
    Path(out_path).write_text(persistence.render_chain_svg(layout), encoding="utf-8")
    click.echo(f"wrote {out_path}: {layout['chain_count']} chains over {layout['n']} factors")


# -- fisma --------------------------------------------------------------------------


@main.group("fisma")
def fisma_group():
    """FIPS-199 security categorization preset."""


@fisma_group.command("demo")
@click.option("--json", "as_json", is_flag=True)
@engine_errors
def fisma_demo(as_json):
    """The worked security-categorization example."""
    model = fisma.build_model()
    levels = {"secrets": 1, "personal_data": 2, "defacement": 3, "alteration": 1, "availability": 2}
    answers = {k: v - 1 for k, v in levels.items()}
    value, trace = model.evaluate(answers)
    level = value + 1
    counts = fisma.table_elicitation_counts()
    if as_json:
        click.echo(json.dumps({
            "leaves": levels,
            "level": level,
            "label": fisma.level_label(level),
            "trace": trace.to_dict(),
            "elicitation_counts": counts,
            "classification_examples": {
                name: {"triple": [t.confidentiality, t.integrity, t.availability],
                       "impact": t.impact, "label": t.label()}
                for name, t in fisma.CLASSIFICATION_EXAMPLES.items()
            },
        }, indent=2))
        return
    click.echo("Security categorization, worst-case (max) aggregation everywhere.")
    click.echo("")
    for leaf in model.tree.leaves():
        click.echo(f"  {leaf.prompt}  ->  {fisma.level_label(levels[leaf.id])}")
    click.echo("")
    for branch in trace.root.children:
        click.echo(f"  {branch.prompt}  ->  {branch.label}")
    click.echo("")
    click.echo(f"  {trace.root.prompt}  ->  {trace.root.label} (level {level})")
    click.echo("")
    click.echo(f"With max bound everywhere the expert answers {counts['leaf_scenarios']} leaf"
               f" scenarios; free tables would need {counts['parent_level_combinations']}"
               f" parent-level combinations.")
    click.echo("")
    click.echo("Information-type classification examples (0=na..3=high):")
    for name, t in fisma.CLASSIFICATION_EXAMPLES.items():
        click.echo(f"  {name}: ({t.confidentiality},{t.integrity},{t.availability}) -> {t.label()} ({t.impact})")
    combined = fisma.total_impact(list(fisma.CLASSIFICATION_EXAMPLES.values()))
    click.echo(f"  combined impact: {fisma.CLASSIFICATION_SCALE.label(combined)} ({combined})")


# -- serve ---------------------------------------------------------------------------


@main.command()
@click.option("--port", type=int, default=8440, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", type=click.Path(file_okay=False), default="emmkit-data", show_default=True,
              help="Where session logs and documents persist across restarts.")
@engine_errors
def serve(port, host, data_dir):
    """Start the HTTP service (no authentication; bind accordingly)."""
    import uvicorn

    from .service import create_app

    app = create_app(data_dir)
    click.echo(f"serving on http://{host}:{port} (data dir: {data_dir}); no auth, keep it local")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
