"""Question scheduling: which scenario to ask about next.

Two strategies:

* ``hansel`` -- for binary cubes with a binary outcome.  The cube is
  partitioned into saturated chains (the classical recursive-doubling
  construction); chains are visited shortest first and within a chain the
  lowest undetermined point is asked.  Driving this schedule to completion
  never needs more than C(n, n//2) + C(n, n//2 + 1) answers.

* ``greedy`` -- for any lattice / output arity.  Picks the undetermined
  point whose *worst-case* answer tightens the bounds the most.  No
  optimality claim; it never asks about a determined point, so it never
  exceeds one question per point.

Both are pure functions of the partial function's current state, so a
session needs no cursor beyond the partial function itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import ValidationError
from .lattice import Lattice, Point, ValueScale
from .monotone import PartialMonotoneFn

MAX_CHAIN_DIMENSION = 20


@dataclass(frozen=True)
class ChainPartition:
    """Disjoint saturated chains covering the binary n-cube.

    Chain count is C(n, n//2); consecutive elements of a chain differ by
    +1 in exactly one coordinate.
    """

    n: int
    chains: tuple[tuple[Point, ...], ...]

    @property
    def chain_count(self) -> int:
        return len(self.chains)

    def visit_order(self) -> tuple[tuple[Point, ...], ...]:
        """Chains by increasing length, ties by lexicographic head."""
        cached = getattr(self, "_order", None)
        if cached is None:
            cached = tuple(sorted(self.chains, key=lambda c: (len(c), c[0])))
            object.__setattr__(self, "_order", cached)
        return cached


def hansel_chains(n: int) -> ChainPartition:
    """Partition the binary n-cube into saturated chains.

    Recursive doubling: each chain (v1 < ... < vs) over n-1 coordinates
    becomes (v1.0, ..., vs.0, vs.1) and (v1.1, ..., v(s-1).1) after a new
    last coordinate is appended; empty second halves are dropped.
    """
    if not 1 <= n <= MAX_CHAIN_DIMENSION:
        raise ValidationError(f"chain partition supports 1 <= n <= {MAX_CHAIN_DIMENSION}, got {n}")
    chains: list[list[Point]] = [[(0,), (1,)]]
    for _ in range(n - 1):
        grown: list[list[Point]] = []
        for chain in chains:
            grown.append([p + (0,) for p in chain] + [chain[-1] + (1,)])
            if len(chain) > 1:
                grown.append([p + (1,) for p in chain[:-1]])
        chains = grown
    return ChainPartition(n, tuple(tuple(c) for c in chains))


def question_bound(n: int) -> int:
    """Worst-case answers needed to pin down a monotone function of n
    binary factors under the chain schedule."""
    if n < 1:
        raise ValidationError(f"dimension must be >= 1, got {n}")
    return comb(n, n // 2) + comb(n, n // 2 + 1)


def next_question_hansel(partition: ChainPartition, f: PartialMonotoneFn) -> Point | None:
    """Lowest undetermined point of the first unfinished chain, or None.

    Chains are scanned in the partition's visit order; None means every
    point is determined.
    """
    if f.out_scale.size != 2:
        raise ValidationError("the chain schedule needs a binary output scale")
    if f.lattice.shape != (2,) * partition.n:
        raise ValidationError(
            f"partition is over the {partition.n}-cube, function is over shape {f.lattice.shape}"
        )
    open_points = f.undetermined_mask()
    for chain in partition.visit_order():
        for p in chain:
            if open_points[p]:
                return p
    return None


def next_question_greedy(lattice: Lattice, f: PartialMonotoneFn) -> Point | None:
    """Undetermined point with the best worst-case closure tightening.

    For each candidate p the score is the minimum over feasible answers v
    of the total bound reduction (sum over points of the shrink in
    hi - lo) that recording f(p) = v would cause.  Ties break toward lower
    rank, then lexicographic order; None means done.
    """
    best: tuple[int, int, Point] | None = None  # (-score, rank, point) minimized
    span_before = f.span_total()
    for p in lattice.iter_points():
        lo, hi = f.bounds(p)
        if lo == hi:
            continue
        worst = None
        for v in range(lo, hi + 1):
            tightened = span_before - _span_after(f, p, v)
            worst = tightened if worst is None else min(worst, tightened)
        key = (-(worst or 0), lattice.rank(p), p)
        if best is None or key < best:
            best = key
    return best[2] if best else None


def _span_after(f: PartialMonotoneFn, p: Point, v: int) -> int:
    probe = f.copy()
    probe.record(p, v)  # v is feasible, so this cannot conflict
    return probe.span_total()


@dataclass
class QuestionPlan:
    """Strategy selector a session carries around."""

    strategy: str
    partition: ChainPartition | None = None

    @classmethod
    def for_lattice(cls, lattice: Lattice, out_scale: ValueScale, strategy: str) -> "QuestionPlan":
        if strategy == "hansel":
            if any(k != 2 for k in lattice.shape) or out_scale.size != 2:
                raise ValidationError(
                    "the hansel strategy needs binary factors and a binary outcome; "
                    "use the greedy strategy for k-valued scales"
                )
            return cls("hansel", hansel_chains(lattice.n))
        if strategy == "greedy":
            return cls("greedy")
        raise ValidationError(f"unknown strategy {strategy!r} (expected 'hansel' or 'greedy')")

    def next_question(self, f: PartialMonotoneFn) -> Point | None:
        if self.strategy == "hansel":
            assert self.partition is not None
            return next_question_hansel(self.partition, f)
        return next_question_greedy(f.lattice, f)
