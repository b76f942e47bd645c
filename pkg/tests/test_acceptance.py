"""Acceptance suite: one test per release criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see
them) and enforces its own wall-clock budget.  Expected values are exact
unless stated otherwise; the brute-force oracles live in support.py and
in-line here, never in the code under test.
"""

import json
import random
import time
from contextlib import contextmanager
from itertools import product
from math import comb

import numpy as np
import pytest

from emmkit import (
    BINARY,
    FactorNode,
    LatticeTooLargeError,
    Majority,
    ModelSpecTree,
    QuestionPlan,
    ValueScale,
    Weighted,
    eval_critical,
    eval_majority,
    eval_weighted,
    fisma,
    group_aggregate,
    hansel_chains,
    make_lattice,
    new_partial,
    resolve_model,
)
from emmkit.monotone import ConflictError
from emmkit.oracle import builtin_factor_bank, builtin_rfp_document_bytes, llm_generate_factors, llm_generate_hierarchy
from emmkit.persistence import canonical_bytes, load_spec, save_spec
from emmkit.hierarchy import validate_spec
from support import random_monotone_boolean, three_scale


@contextmanager
def criterion(name: str, budget_seconds: float):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"FAIL  {name}")
        raise
    elapsed = time.perf_counter() - started
    if elapsed >= budget_seconds:
        print(f"FAIL  {name} (over budget: {elapsed:.2f}s >= {budget_seconds}s)")
        raise AssertionError(f"{name} exceeded its {budget_seconds}s budget ({elapsed:.2f}s)")
    print(f"PASS  {name} ({elapsed:.2f}s)")


def test_security_categorization_worked_example():
    with criterion("security-categorization worked example", 1.0):
        assert fisma.categorize(secrets=1, personal_data=2, defacement=3,
                                alteration=1, availability=2) == 3
        assert fisma.level_label(3) == "high"
        assert fisma.total_impact([2, 2, 3]) == 3
        examples = fisma.CLASSIFICATION_EXAMPLES
        assert examples["public information"].impact == 2
        assert examples["investigative information"].impact == 3
        assert examples["administrative information"].impact == 1


def test_rule_regression():
    with criterion("aggregation-rule regression", 1.0):
        assert eval_weighted((1, 0, 1), (0.5, 0.25, 0.25), 0.5) == 1  # score 0.75
        score = 1 * 0.5 + 0 * 0.25 + 1 * 0.25
        assert score == 0.75
        assert eval_majority((1, 0, 1)) == 1
        for q18, q19 in product((0, 1), repeat=2):
            assert eval_critical((0, q18, q19), critical=[0], fallback=Majority(tie="high")) == 0


def test_group_example():
    with criterion("three-expert group verdict", 1.0):
        yn = ValueScale(("N", "Y"))

        def vote_model(binding, expert):
            root = FactorNode(
                id="go", prompt="Proceed?", scale=yn, aggregation=binding,
                children=[FactorNode(id=f"q{i}", prompt=f"Q{i}?", scale=yn) for i in range(3)],
            )
            return resolve_model(ModelSpecTree(root=root), expert=expert)

        models = [
            vote_model(Majority(), "e1"),                       # Y on (Y,N,Y)
            vote_model(Weighted((0.2, 0.6, 0.2), 0.5), "e2"),   # N on (Y,N,Y)
            vote_model(Majority(tie="high"), "e3"),             # Y on (Y,N,Y)
        ]
        verdict = group_aggregate(models, {"q0": "Y", "q1": "N", "q2": "Y"}, rule="majority")
        assert verdict.per_expert == {"e1": 1, "e2": 0, "e3": 1}
        assert verdict.aggregate == 1 and verdict.aggregate_label == "Y"
        assert verdict.disagreement is True


def test_chain_partition_suite():
    with criterion("chain partitions for n = 1..12", 10.0):
        for n in range(1, 13):
            part = hansel_chains(n)
            assert part.chain_count == comb(n, n // 2)
            seen = set()
            for chain in part.chains:
                for p in chain:
                    assert p not in seen
                    seen.add(p)
                for a, b in zip(chain, chain[1:]):
                    diffs = [i for i in range(n) if a[i] != b[i]]
                    assert len(diffs) == 1 and b[diffs[0]] == a[diffs[0]] + 1
            assert len(seen) == 2 ** n
        assert hansel_chains(11).chain_count == 462


def all_monotone_boolean_functions(n: int) -> np.ndarray:
    """Brute force: every f: 2^n -> {0,1}, filtered by the definition."""
    points = list(product((0, 1), repeat=n))
    count = len(points)
    funcs = (np.arange(2 ** count, dtype=np.uint32)[:, None] >> np.arange(count)) & 1
    keep = np.ones(len(funcs), dtype=bool)
    for i, p in enumerate(points):
        for j, q in enumerate(points):
            if i != j and all(x <= y for x, y in zip(p, q)):
                keep &= funcs[:, i] <= funcs[:, j]
    return funcs[keep], points


def test_elicitation_fidelity_and_bound():
    with criterion("elicitation fidelity and question bound", 60.0):
        expected_counts = {1: 3, 2: 6, 3: 20}
        for n in (1, 2, 3, 4):
            funcs, points = all_monotone_boolean_functions(n)
            if n in expected_counts:
                assert len(funcs) == expected_counts[n]
            lattice = make_lattice([BINARY] * n)
            bound = comb(n, n // 2) + comb(n, n // 2 + 1)
            index = {p: i for i, p in enumerate(points)}
            for row in funcs:
                f = new_partial(lattice, BINARY)
                plan = QuestionPlan.for_lattice(lattice, BINARY, "hansel")
                asked = 0
                while (q := plan.next_question(f)) is not None:
                    f.record(q, int(row[index[q]]))
                    asked += 1
                assert asked <= bound
                got = f.min_extension()
                assert all(got(p) == int(row[index[p]]) for p in points)
        # 1000 random monotone targets at n = 8 under the same bound
        rng = random.Random(20240817)
        n = 8
        lattice = make_lattice([BINARY] * n)
        bound = comb(8, 4) + comb(8, 5)
        for _ in range(1000):
            target = random_monotone_boolean((2,) * n, rng)
            f = new_partial(lattice, BINARY)
            plan = QuestionPlan.for_lattice(lattice, BINARY, "hansel")
            asked = 0
            while (q := plan.next_question(f)) is not None:
                f.record(q, target(q))
                asked += 1
            assert asked <= bound
            got = f.min_extension()
            assert all(got(p) == target(p) for p in lattice.iter_points())


def brute_force_family(shape, m) -> tuple[np.ndarray, list]:
    """All monotone maps shape -> {0..m-1} as a (F, N) value matrix."""
    points = list(product(*(range(k) for k in shape)))
    pairs = [
        (i, j)
        for i, p in enumerate(points)
        for j, q in enumerate(points)
        if i != j and all(x <= y for x, y in zip(p, q))
    ]
    rows = []
    for values in product(range(m), repeat=len(points)):
        if all(values[i] <= values[j] for i, j in pairs):
            rows.append(values)
    return np.array(rows, dtype=np.int16), points


def test_closure_matches_brute_force_oracle():
    with criterion("closure equals the brute-force consistency oracle", 60.0):
        for shape, m, out in (((2, 2, 2), 2, BINARY), ((3, 3), 3, three_scale())):
            family, points = brute_force_family(shape, m)
            lattice = make_lattice([BINARY if k == 2 else three_scale() for k in shape])
            index = {p: i for i, p in enumerate(points)}
            choices = [(p, v) for p in points for v in range(m)]
            order = list(lattice.iter_points())
            for length in (1, 2, 3):
                for seq in product(choices, repeat=length):
                    f = new_partial(lattice, out)
                    mask = np.ones(len(family), dtype=bool)
                    for p, v in seq:
                        new_mask = mask & (family[:, index[p]] == v)
                        if not new_mask.any():
                            with pytest.raises(ConflictError):
                                f.record(p, v)
                            break
                        f.record(p, v)  # oracle says consistent: must not raise
                        mask = new_mask
                        sub = family[mask]
                        for q in order:
                            col = sub[:, index[q]]
                            assert f.bounds(q) == (int(col.min()), int(col.max()))


def test_rfp_document_round_trip_and_gating():
    with criterion("plain document round-trip and strict-gate pruning", 1.0):
        raw = builtin_rfp_document_bytes()
        tree = load_spec(raw)
        assert len(tree.nodes()) == 18
        assert len(tree.branches()) == 4
        assert len(tree.leaves()) == 13
        assert save_spec(tree, form="plain") == canonical_bytes(json.loads(raw))

        gated = load_spec(raw)
        for node in gated.nodes():
            if not node.is_leaf:
                node.aggregation = Majority(tie="high")
        tm_branch = gated.branches()[0]
        tm_branch.gate = 0
        tm_branch.short_circuit_group = "exit-early"
        model = resolve_model(gated, "e1")
        answers = {leaf.id: 1 for leaf in gated.leaves()
                   if leaf.id not in {c.id for c in tm_branch.children}}
        answers[tm_branch.id] = 0  # the generalized "no"
        value, trace = model.evaluate(answers, policy="strict-gate")
        visited = trace.visited_ids()
        for leaf in tm_branch.children:
            assert leaf.id not in visited
        assert tm_branch.id in visited


def test_scale_arithmetic_guards():
    with criterion("scale arithmetic and the dense-storage cap", 1.0):
        assert make_lattice([BINARY] * 20).point_count == 1_048_576
        assert make_lattice([three_scale()] * 5).point_count == 243
        eight = make_lattice([three_scale()] * 8)
        assert eight.point_count == 6561
        assert len(eight.points()) == 6561
        counts = fisma.table_elicitation_counts()
        assert counts["parent_level_combinations"] == 27 * 27 * 3 == 2187
        five = ValueScale(("a", "b", "c", "d", "e"))
        huge = make_lattice([five] * 20)
        assert huge.point_count == 5 ** 20 == 95_367_431_640_625
        with pytest.raises(LatticeTooLargeError) as err:
            new_partial(huge, five)
        assert "deeper hierarchy" in str(err.value)


def test_offline_drafting_fixtures(monkeypatch):
    with criterion("offline drafting fixtures, no network", 1.0):
        from emmkit import oracle as oracle_module

        def no_network(*args, **kwargs):
            raise AssertionError("offline mode must not touch the network")

        monkeypatch.setattr(oracle_module.requests, "post", no_network)
        factors = llm_generate_factors("Should we respond to the call for proposals?")
        assert len(factors) == 20
        assert factors == builtin_factor_bank()
        draft = llm_generate_hierarchy(factors)
        assert sorted(leaf.prompt for leaf in draft.leaves()) == sorted(factors)
        wide = [n for n in draft.nodes() if len(n.children) > 5]
        issues = validate_spec(draft)
        flagged = {i.node_id for i in issues if i.code == "fan-out"}
        assert wide and flagged == {n.id for n in wide}
