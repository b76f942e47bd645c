"""Document formats and storage.

Everything on disk is JSON (documents) or JSON lines (session logs), and
serialization is canonical: stable key order, two-space indent, a single
trailing newline, UTF-8.  Saving the same object twice yields identical
bytes, so documents diff cleanly and round-trip tests can compare bytes.

Formats (conventional extensions in parentheses):

* plain spec document (``.spec.json``) -- nested prompt -> children map;
  key order is preserved through a parse/save round trip.
* extended spec / model document (``.spec.json`` / ``.model.json``) --
  explicit node objects; validated against an embedded JSON schema.
* session log (``.log.jsonl``) -- append-only event records, one JSON
  object per line, strictly increasing ``seq``; replaying a log rebuilds
  the session (bounds, counts, pending question) exactly.
* chain layout (``.chains.json`` + ``.svg``) -- an elicited binary table
  arranged by the question schedule's chains, for the bar visualization.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

import jsonschema

from .aggregation import TableRule
from .elicitation import LOG_FORMAT_VERSION, Session, start_session_raw
from .errors import IoError, SpecFormatError, ValidationError
from .hierarchy import (
    ExpertModel,
    FactorNode,
    ModelSpecTree,
    node_to_dict,
    parse_spec,
)
from .lattice import ValueScale, make_lattice
from .scheduler import hansel_chains

SPEC_FORMAT_VERSION = 1
LAYOUT_FORMAT_VERSION = 1

_BINDING_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["rule"],
    "properties": {
        "rule": {"enum": ["majority", "weighted", "critical", "max", "table"]},
        "tie": {"enum": ["low", "high"]},
        "weights": {"type": "array", "items": {"type": "number"}},
        "threshold": {"type": "number"},
        "critical": {"type": "array", "items": {"type": "string"}},
        "fallback": {"$ref": "#/$defs/binding"},
        "values": {"type": "array", "items": {"type": "integer"}},
        "provenance": {"type": "object"},
    },
}

_NODE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["id", "prompt"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "prompt": {"type": "string", "minLength": 1},
        "scale": {"type": "array", "items": {"type": "string"}, "minItems": 2},
        "reversed": {"type": "boolean"},
        "gate": {"type": ["integer", "null"]},
        "short_circuit_group": {"type": ["string", "null"]},
        "aggregation": {"$ref": "#/$defs/binding"},
        "children": {"type": "array", "items": {"$ref": "#/$defs/node"}},
    },
}

EXTENDED_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format_version", "root"],
    "properties": {
        "format_version": {"const": SPEC_FORMAT_VERSION},
        "kind": {"enum": ["model-spec", "expert-model"]},
        "metadata": {
            "type": "object",
            "properties": {
                "title": {"type": "string"},
                "author": {"type": "string"},
                "version": {"type": "string"},
            },
        },
        "root": {"$ref": "#/$defs/node"},
    },
    "$defs": {"node": _NODE_SCHEMA, "binding": _BINDING_SCHEMA},
}


def canonical_bytes(document: Any) -> bytes:
    """The one true byte encoding of a JSON document."""
    return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _decode(source: str | Path | bytes | dict) -> dict:
    if isinstance(source, dict):
        return source
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        try:
            raw = Path(source).read_bytes()
        except OSError as exc:
            raise IoError(f"cannot read {source}: {exc}") from exc
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = str(source).encode("utf-8")
    try:
        decoded = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as exc:
        raise SpecFormatError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(decoded, dict):
        raise SpecFormatError(f"document must be a JSON object, got {type(decoded).__name__}")
    return decoded


def load_spec(source: str | Path | bytes | dict) -> ModelSpecTree:
    """Read a spec document (plain or extended) from a path, bytes, JSON
    text, or an already-decoded object."""
    document = _decode(source)
    if "root" in document or "format_version" in document:
        try:
            jsonschema.validate(document, EXTENDED_SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "(document)"
            raise SpecFormatError(f"extended document invalid at {path}: {exc.message}") from exc
    return parse_spec(document)


def save_spec(tree: ModelSpecTree, form: str = "extended") -> bytes:
    """Serialize a tree canonically.

    The plain form carries prompts and structure only; saving a tree that
    uses scales, bindings, gates or flags in the plain form would lose
    them, so that is an error.
    """
    if form == "extended":
        document: dict[str, Any] = {
            "format_version": SPEC_FORMAT_VERSION,
            "kind": "model-spec",
            "metadata": {"title": tree.title, "author": tree.author, "version": tree.version},
            "root": node_to_dict(tree.root),
        }
        return canonical_bytes(document)
    if form == "plain":
        def plainify(node: FactorNode) -> dict:
            if node.scale.labels != ("no", "yes") or node.reversed or node.gate is not None \
                    or node.short_circuit_group is not None or node.aggregation is not None:
                raise SpecFormatError(
                    f"node {node.id!r} carries extended fields; save in the extended form"
                )
            return {child.prompt: plainify(child) for child in node.children}

        return canonical_bytes({tree.root.prompt: plainify(tree.root)})
    raise ValidationError(f"unknown document form {form!r} (plain or extended)")


def load_model(source: str | Path | bytes | dict, expert: str | None = None) -> ExpertModel:
    """Load an extended document with all aggregations resolved."""
    tree = load_spec(source)
    unresolved = [n.id for n in tree.unresolved()]
    if unresolved:
        raise SpecFormatError(f"document is a spec, not a model: unresolved nodes {unresolved}")
    return ExpertModel(tree=tree, expert=expert or tree.author or "anonymous")


def save_model(model: ExpertModel) -> bytes:
    document = {
        "format_version": SPEC_FORMAT_VERSION,
        "kind": "expert-model",
        "metadata": {
            "title": model.tree.title,
            "author": model.expert,
            "version": model.tree.version,
        },
        "root": node_to_dict(model.tree.root),
    }
    return canonical_bytes(document)


# -- session logs -------------------------------------------------------------


def session_log_lines(session: Session) -> list[str]:
    """One JSON text line per event, in order."""
    return [json.dumps(event, ensure_ascii=False, sort_keys=True) for event in session.events]


def write_session_log(session: Session, path: str | Path) -> None:
    Path(path).write_text("\n".join(session_log_lines(session)) + "\n", encoding="utf-8")


def append_session_events(path: str | Path, events: Iterable[dict]) -> None:
    """Append newly produced events to an existing log file."""
    with open(path, "a", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")


def read_session_log(source: str | Path | bytes) -> list[dict]:
    if isinstance(source, (str, Path)) and not str(source).lstrip().startswith("{"):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read session log {source}: {exc}") from exc
    else:
        text = source.decode("utf-8") if isinstance(source, bytes) else str(source)
    records = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except ValueError as exc:
            raise SpecFormatError(f"session log line {i + 1} is not JSON: {exc}") from exc
    return records


def replay_session(records: list[dict]) -> Session:
    """Rebuild a session from its event log.

    The replayed session reproduces bounds, counts, status, pending
    question and the conflict state (when the log ends inside one).
    """
    if not records:
        raise SpecFormatError("session log is empty")
    seqs = [r.get("seq") for r in records]
    if seqs != sorted(set(int(s) for s in seqs)):
        raise SpecFormatError("session log sequence numbers are not strictly increasing")
    head = records[0]
    if head.get("kind") != "session-started":
        raise SpecFormatError("session log must start with a session-started record")
    payload = head.get("payload", {})
    if payload.get("format_version") != LOG_FORMAT_VERSION:
        raise SpecFormatError(
            f"unsupported session log format_version {payload.get('format_version')!r}"
        )
    lattice = make_lattice([ValueScale(tuple(labels)) for labels in payload["child_scales"]])
    session = start_session_raw(
        lattice,
        ValueScale(tuple(payload["out_scale"])),
        strategy=payload.get("strategy", "hansel"),
        expert=payload.get("expert", "anonymous"),
        node_id=payload.get("node_id"),
        child_ids=payload.get("child_ids"),
        session_id=payload.get("session_id"),
    )
    for record in records[1:]:
        kind = record.get("kind")
        body = record.get("payload", {})
        if kind == "question-posed":
            continue  # derived state; recomputed by the scheduler
        if kind == "answer":
            point = tuple(body["point"])
            if session.pending != point:
                raise SpecFormatError(
                    f"log answers {point} but the schedule poses {session.pending}"
                )
            session.step(int(body["value"]))
        elif kind == "conflict":
            session.step(int(body["value"]))
        elif kind == "resolution":
            session.resolve_conflict(body["strategy"])
        elif kind == "finalize":
            session.finalize(body["policy"])
        elif kind == "aborted":
            session.abort()
        else:
            raise SpecFormatError(f"unknown session log record kind {kind!r}")
    return session


# -- chain layout ---------------------------------------------------------------


def export_chain_layout(model: ExpertModel | ModelSpecTree, node_id: str) -> dict[str, Any]:
    """Arrange a node's elicited binary table along the question
    schedule's chains.

    The node must be table-bound with binary children and a binary
    outcome; other nodes of the tree may still be unresolved.  Chains
    appear in the scheduler's visit order; each element carries its
    point, stored value, chain index, and position within the chain.
    """
    tree = model if isinstance(model, ModelSpecTree) else model.tree
    node = tree.find(node_id)
    binding = node.aggregation
    if not isinstance(binding, TableRule):
        raise ValidationError(f"node {node_id!r} is not table-bound; nothing to lay out")
    fn = binding.table.fn
    if any(k != 2 for k in fn.lattice.shape) or fn.out_scale.size != 2:
        raise ValidationError(
            f"chain layout needs binary children and a binary outcome; "
            f"node {node_id!r} spans shape {fn.lattice.shape} with "
            f"{fn.out_scale.size} output values"
        )
    n = fn.lattice.n
    partition = hansel_chains(n)
    chains = []
    for ci, chain in enumerate(partition.visit_order()):
        chains.append(
            [
                {"point": list(p), "value": fn(p), "chain": ci, "position": pi}
                for pi, p in enumerate(chain)
            ]
        )
    return {
        "format_version": LAYOUT_FORMAT_VERSION,
        "kind": "chain-layout",
        "node": node_id,
        "prompt": node.prompt,
        "n": n,
        "expert": getattr(model, "expert", binding.table.expert),
        "chain_count": len(chains),
        "chains": chains,
    }


def render_chain_svg(layout: dict[str, Any], cell: int = 12, highlight: set | None = None) -> str:
    """Minimal bar rendering: one column per chain, stacked bottom-up,
    filled for value 1, empty for 0.  ``highlight`` marks points (as
    tuples) with an accent outline, used by the model-diff view."""
    chains = layout["chains"]
    highlight = highlight or set()
    gap = max(2, cell // 4)
    tallest = max((len(c) for c in chains), default=0)
    width = len(chains) * (cell + gap) + gap
    height = tallest * cell + 2 * gap
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{layout.get("node", "")} ({layout.get("chain_count", len(chains))} chains)</title>',
    ]
    for ci, chain in enumerate(chains):
        x = gap + ci * (cell + gap)
        for element in chain:
            y = height - gap - (element["position"] + 1) * cell
            fill = "#000000" if element["value"] else "#ffffff"
            stroke = "#d03030" if tuple(element["point"]) in highlight else "#000000"
            stroke_width = 2 if tuple(element["point"]) in highlight else 1
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="{stroke}" stroke-width="{stroke_width}"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
