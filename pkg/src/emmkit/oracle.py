"""Answer sources: scripted fixtures, live humans, and LLM drafting.

Every elicitation question ultimately goes to an oracle.  Scripted
oracles make tests and demos deterministic; human oracles are wired to
whatever asks the user (CLI prompt, web session); LLM bindings cover the
drafting work that comes *before* elicitation -- proposing candidate
factors for a decision and grouping them into a hierarchy draft.

The engine treats an LLM strictly as an untrusted draft generator: its
output must parse and pass structural validation (every input factor
appears exactly once as a leaf) or it is rejected with diagnostics.  With
the offline flag set (the default), no network is ever touched and the
bundled fixtures -- a 20-question bank for a proposal-submission decision
and its 7-group hierarchy -- are returned instead, so the whole drafting
path is testable without a live model.

LLM answering of scenario questions during elicitation exists but is off
by default; when enabled, both the model's answer and the expert's remain
on record and the human decides.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Callable

import requests

from .errors import OracleError, ValidationError
from .hierarchy import ModelSpecTree, parse_spec
from .lattice import Point

ASSET_VERSION = "v1"

DEFAULT_KEY_ENV = "EMMKIT_API_KEY"


def _asset_text(name: str) -> str:
    node = resources.files("emmkit.assets")
    for part in f"{ASSET_VERSION}/{name}".split("/"):
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


def _asset_json(name: str) -> Any:
    return json.loads(_asset_text(name))


def render_prompt(template_id: str, **params: Any) -> str:
    """Fill one of the bundled prompt templates; ids are stable API."""
    try:
        template = _asset_text(f"prompts/{template_id}.txt")
    except FileNotFoundError:
        raise OracleError(f"unknown prompt template {template_id!r}") from None
    try:
        return template.format(**params)
    except KeyError as exc:
        raise OracleError(f"prompt template {template_id!r} needs parameter {exc}") from None


# -- bindings ---------------------------------------------------------------


@dataclass
class ScriptedOracle:
    """Deterministic answers: a total point map, a closed form, or a callable.

    Closed forms: ``const:<v>``, ``max``, ``min``, ``coord:<i>``.
    """

    mapping: dict[Point, int] | None = None
    form: str | None = None
    fn: Callable[[Point], int] | None = None

    def answer(self, point: Point) -> int:
        if self.mapping is not None:
            if tuple(point) not in self.mapping:
                raise OracleError(f"scripted fixture has no answer for {tuple(point)}")
            return int(self.mapping[tuple(point)])
        if self.fn is not None:
            return int(self.fn(tuple(point)))
        if self.form is not None:
            return _closed_form(self.form, tuple(point))
        raise OracleError("scripted oracle has neither mapping, form nor callable")


def _closed_form(form: str, point: Point) -> int:
    if form.startswith("const:"):
        return int(form.split(":", 1)[1])
    if form == "max":
        return max(point)
    if form == "min":
        return min(point)
    if form.startswith("coord:"):
        i = int(form.split(":", 1)[1])
        if not 0 <= i < len(point):
            raise OracleError(f"coord:{i} out of range for point {point}")
        return point[i]
    raise OracleError(f"unknown closed form {form!r}")


@dataclass
class HumanOracle:
    """Defers to a callable that asks a person; raising aborts the session."""

    ask: Callable[[Point, dict[str, Any] | None], int]

    def answer(self, point: Point, context: dict[str, Any] | None = None) -> int:
        try:
            return int(self.ask(tuple(point), context))
        except (EOFError, KeyboardInterrupt) as exc:
            raise OracleError("human oracle aborted") from exc


@dataclass
class LlmOracle:
    """Chat-completion endpoint binding; offline by default."""

    endpoint: str = ""
    model: str = ""
    offline: bool = True
    answer_scenarios: bool = False
    api_key_env: str = DEFAULT_KEY_ENV
    timeout: float = 60.0
    extra_headers: dict[str, str] = field(default_factory=dict)


OracleBinding = ScriptedOracle | HumanOracle | LlmOracle


def oracle_answer(binding: OracleBinding, point: Point, context: dict[str, Any] | None = None) -> int:
    """One scenario question, one value index back."""
    if isinstance(binding, ScriptedOracle):
        return binding.answer(point)
    if isinstance(binding, HumanOracle):
        return binding.answer(point, context)
    if isinstance(binding, LlmOracle):
        return _llm_scenario_answer(binding, point, context)
    raise OracleError(f"unknown oracle binding {binding!r}")


def _llm_scenario_answer(binding: LlmOracle, point: Point, context: dict[str, Any] | None) -> int:
    if not binding.answer_scenarios:
        raise OracleError(
            "LLM answering of scenario questions is disabled by default; "
            "enable answer_scenarios explicitly to allow it"
        )
    if binding.offline:
        raise OracleError("no offline fixture for LLM scenario answers; use a scripted oracle")
    context = context or {}
    labels = list(context.get("out_labels") or [])
    if not labels:
        raise OracleError("scenario answering needs the output-scale labels in the context")
    scenario_lines = "\n".join(
        f"- {line}" for line in context.get("scenario_lines", [str(point)])
    )
    content = _chat(
        binding,
        render_prompt(
            "scenario-answer",
            prompt=context.get("prompt", "the generalized question"),
            labels=", ".join(labels),
            scenario=scenario_lines,
        ),
    )
    answer = content.strip().strip(".").lower()
    for i, label in enumerate(labels):
        if label.lower() == answer:
            return i
    raise OracleError(f"LLM scenario answer {content!r} is not one of {labels}")


def _chat(binding: LlmOracle, prompt: str) -> str:
    """POST a single-message chat request; return the first choice's text."""
    if not binding.endpoint or not binding.model:
        raise OracleError("LLM binding needs an endpoint and a model name")
    headers = {"Content-Type": "application/json", **binding.extra_headers}
    key = os.environ.get(binding.api_key_env, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = {"model": binding.model, "messages": [{"role": "user", "content": prompt}]}
    try:
        resp = requests.post(binding.endpoint, json=body, headers=headers, timeout=binding.timeout)
        resp.raise_for_status()
        payload = resp.json()
    except requests.RequestException as exc:
        raise OracleError(f"LLM transport failure: {exc}") from exc
    except ValueError as exc:
        raise OracleError(f"LLM response is not JSON: {exc}") from exc
    try:
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        raise OracleError(f"unexpected LLM response shape: {json.dumps(payload)[:500]}") from None


# -- factor drafting ----------------------------------------------------------


def builtin_factor_bank() -> list[str]:
    """The bundled 20-question bank for the proposal-submission decision."""
    return list(_asset_json("rfp_questions.json"))


def builtin_rfp_document_bytes() -> bytes:
    """The bundled plain-form RFP model spec, byte-exact."""
    return _asset_text("rfp_model_spec.json").encode("utf-8")


def builtin_rfp_document() -> dict:
    return _asset_json("rfp_model_spec.json")


def llm_generate_factors(decision_text: str, binding: LlmOracle | None = None) -> list[str]:
    """Candidate supporting factors (one question each) for a decision.

    Offline (the default) returns the bundled bank; online sends the
    factor-ideation prompt and parses a numbered or bulleted list.
    """
    if not decision_text or not decision_text.strip():
        raise ValidationError("decision text is empty")
    binding = binding or LlmOracle()
    if binding.offline:
        return builtin_factor_bank()
    content = _chat(binding, render_prompt("factor-ideation", decision=decision_text))
    factors = parse_factor_list(content)
    if not factors:
        raise OracleError(f"could not parse any factors out of the response: {content[:500]!r}")
    return factors


_LIST_ITEM = re.compile(r"^\s*(?:[-*]\s*)?(?:\d+[.):]\s*)?(.+?)\s*$")


def parse_factor_list(content: str) -> list[str]:
    """Parse factor prompts out of a numbered list, a bulleted list, or a
    JSON array of strings."""
    text = _strip_fences(content)
    try:
        decoded = json.loads(text)
    except ValueError:
        decoded = None
    if isinstance(decoded, list) and all(isinstance(x, str) for x in decoded):
        return [x.strip() for x in decoded if x.strip()]
    factors = []
    for line in text.splitlines():
        raw = line.strip().strip("*")
        if not raw:
            continue
        if not re.match(r"^\s*(?:[-*]|\d+[.):])", line):
            continue  # prose around the list
        m = _LIST_ITEM.match(raw)
        if m:
            item = m.group(1).strip().strip("*").strip()
            if item:
                factors.append(item)
    return factors


def _strip_fences(content: str) -> str:
    text = content.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\n?", "", text)
        text = re.sub(r"\n?```$", "", text)
    return text.strip()


# -- hierarchy drafting --------------------------------------------------------


def builtin_hierarchy_groups() -> dict[str, Any]:
    """The bundled grouping of the factor bank into generalized questions."""
    return _asset_json("rfp_hierarchy.json")


def llm_generate_hierarchy(
    factors: list[str],
    binding: LlmOracle | None = None,
    fan_out: int = 5,
    decision_text: str = "the decision under evaluation",
) -> ModelSpecTree:
    """A hierarchy draft whose leaves are exactly the given factors.

    The draft is structurally checked before it is returned: each input
    factor must appear exactly once as a leaf.  Drafts violating that are
    rejected with a list of what is missing or invented.  Fan-out beyond
    the limit is left in (validate_spec reports it as a warning).
    """
    factors = [f.strip() for f in factors if f and f.strip()]
    if len(factors) < 2:
        raise ValidationError(f"need at least 2 factors to build a hierarchy, got {len(factors)}")
    binding = binding or LlmOracle()
    if binding.offline:
        fixture = builtin_hierarchy_groups()
        bank = builtin_factor_bank()
        document: dict[str, Any] = {
            fixture["root"]: {
                group["prompt"]: {bank[q - 1]: {} for q in group["questions"]}
                for group in fixture["groups"]
            }
        }
    else:
        content = _chat(
            binding,
            render_prompt(
                "hierarchy-grouping",
                decision=decision_text,
                count=len(factors),
                fan_out=fan_out,
                factors="\n".join(f"{i + 1}. {f}" for i, f in enumerate(factors)),
            ),
        )
        try:
            document = json.loads(_strip_fences(content))
        except ValueError as exc:
            raise OracleError(f"hierarchy response is not JSON: {exc}; raw: {content[:500]!r}") from exc
    draft = parse_spec(document)
    _check_coverage(draft, factors)
    return draft


def _check_coverage(draft: ModelSpecTree, factors: list[str]) -> None:
    leaf_prompts = sorted(leaf.prompt for leaf in draft.leaves())
    wanted = sorted(factors)
    if leaf_prompts == wanted:
        return
    missing = _multiset_diff(wanted, leaf_prompts)
    extra = _multiset_diff(leaf_prompts, wanted)
    raise OracleError(
        "hierarchy draft does not cover the input factors exactly once each; "
        f"missing: {missing or 'none'}; invented or duplicated: {extra or 'none'}"
    )


def _multiset_diff(a: list[str], b: list[str]) -> list[str]:
    rest = list(b)
    out = []
    for x in a:
        if x in rest:
            rest.remove(x)
        else:
            out.append(x)
    return out


def load_oracle(specifier: str, ask: Callable | None = None) -> OracleBinding:
    """Parse a CLI oracle specifier: ``scripted:<file>``, ``human``, ``llm``."""
    if specifier == "human":
        if ask is None:
            raise ValidationError("human oracle needs an interactive prompt function")
        return HumanOracle(ask=ask)
    if specifier == "llm":
        return LlmOracle(
            endpoint=os.environ.get("EMMKIT_LLM_ENDPOINT", ""),
            model=os.environ.get("EMMKIT_LLM_MODEL", ""),
            offline=os.environ.get("EMMKIT_LLM_OFFLINE", "1") != "0",
        )
    if specifier.startswith("scripted:"):
        path = specifier.split(":", 1)[1]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise OracleError(f"cannot read scripted oracle file {path!r}: {exc}") from exc
        except ValueError as exc:
            raise OracleError(f"scripted oracle file {path!r} is not JSON: {exc}") from exc
        if "form" in doc:
            return ScriptedOracle(form=str(doc["form"]))
        if "mapping" in doc:
            mapping = {
                tuple(int(c) for c in key.split(",")): int(v)
                for key, v in doc["mapping"].items()
            }
            return ScriptedOracle(mapping=mapping)
        raise OracleError(f"scripted oracle file {path!r} needs a 'form' or 'mapping' field")
    raise ValidationError(f"unknown oracle specifier {specifier!r}")
