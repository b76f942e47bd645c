"""Brute-force oracles and drivers shared across the test suite.

Everything here is deliberately independent of the engine's closure and
scheduling code paths: plain enumeration and componentwise comparisons
only, so these functions can sit on the other side of an equivalence
check.
"""

from __future__ import annotations

import random
from itertools import product

from emmkit import BINARY, QuestionPlan, ValueScale, make_lattice, new_partial


def grid_points(shape):
    """All points of a product space, plain itertools order."""
    return list(product(*(range(k) for k in shape)))


def pointwise_leq(a, b):
    return all(x <= y for x, y in zip(a, b))


def brute_force_monotone_maps(shape, m):
    """Every monotone assignment point -> {0..m-1}, as dicts.

    Pure filter over all m^N assignments; the independent oracle for
    anything claiming to enumerate or bound monotone functions.
    """
    points = grid_points(shape)
    comparable = [
        (i, j)
        for i, p in enumerate(points)
        for j, q in enumerate(points)
        if i != j and pointwise_leq(p, q)
    ]
    maps = []
    for values in product(range(m), repeat=len(points)):
        if all(values[i] <= values[j] for i, j in comparable):
            maps.append(dict(zip(points, values)))
    return maps


def run_elicitation(lattice, out_scale, strategy, answer_fn, max_steps=None):
    """Drive a question plan against a scripted answer source.

    Returns (partial function, questions asked, proposed points in order).
    """
    f = new_partial(lattice, out_scale)
    plan = QuestionPlan.for_lattice(lattice, out_scale, strategy)
    proposals = []
    limit = max_steps if max_steps is not None else lattice.point_count + 1
    while len(proposals) <= limit:
        q = plan.next_question(f)
        if q is None:
            return f, len(proposals), proposals
        proposals.append(q)
        f.record(q, answer_fn(q))
    raise AssertionError(f"scheduler did not terminate within {limit} questions")


def random_monotone_boolean(shape, rng: random.Random):
    """A random monotone 0/1 target: the union of a few random up-sets."""
    points = grid_points(shape)
    seeds = [points[rng.randrange(len(points))] for _ in range(rng.randrange(1, len(shape) + 4))]
    return lambda p: int(any(pointwise_leq(s, p) for s in seeds))


def binary_lattice(n):
    return make_lattice([BINARY] * n)


def three_scale():
    return ValueScale(("low", "medium", "high"))
