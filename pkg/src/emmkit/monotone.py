"""Partial monotone functions: record answers, propagate closure, extend.

The working object is a pair of dense value-bound grids (lo, hi) over a
lattice.  Recording an answer f(p) = v raises lo on the up-set of p and
lowers hi on the down-set, which is exactly the inference "more favorable
inputs never worsen the outcome".  A point is determined once lo == hi.

The bounds are always *tight*: lo(p) is the least value any monotone
function consistent with the answers can take at p, hi(p) the greatest.
Consequently an answer conflicts with the log if and only if it falls
outside [lo(p), hi(p)], and recording is transactional: a conflicting
answer leaves the grids untouched and raises ConflictError carrying the
prior answers that exclude it.

Storage is dense (two int grids), which keeps closure a pair of numpy
slice updates.  Lattices beyond the configurable cap are refused: past
roughly a million points the right tool is a deeper hierarchy of smaller
nodes, not a flat table.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import EmmError, LatticeTooLargeError, ValidationError
from .lattice import Lattice, Point, ValueScale, leq

#: Largest point count a dense function will allocate (2**20).
DEFAULT_DENSE_CAP = 1 << 20

#: Largest point count enumerate_consistent will walk.
DEFAULT_ENUMERATION_CAP = 32


@dataclass(frozen=True)
class Answer:
    """One logged oracle answer."""

    seq: int
    point: Point
    value: int
    ts: float


class ConflictError(EmmError):
    """The answer contradicts the monotone closure of prior answers."""

    category = "conflict"

    def __init__(self, point: Point, value: int, bounds: tuple[int, int], conflicting: list[Answer]):
        self.point = point
        self.value = value
        self.bounds = bounds
        self.conflicting = conflicting
        lo, hi = bounds
        culprits = ", ".join(f"f{a.point}={a.value}" for a in conflicting)
        super().__init__(
            f"answer f{point}={value} conflicts with monotone closure "
            f"(feasible range [{lo}, {hi}]); prior answers excluding it: {culprits}"
        )


class TotalMonotoneFn:
    """A total monotone assignment of output values to lattice points."""

    def __init__(self, lattice: Lattice, out_scale: ValueScale, grid: np.ndarray, check: bool = True):
        grid = np.asarray(grid, dtype=np.int16).reshape(lattice.shape)
        if check:
            if grid.min() < 0 or grid.max() > out_scale.size - 1:
                raise ValidationError("function values out of output-scale range")
            if not _grid_is_monotone(grid):
                raise ValidationError("assignment is not monotone")
        self.lattice = lattice
        self.out_scale = out_scale
        self.grid = grid

    def __call__(self, p: Point) -> int:
        return int(self.grid[self.lattice.check_point(p)])

    def values(self) -> list[int]:
        """Values in the lattice's canonical point order."""
        return [int(self.grid[p]) for p in self.lattice.iter_points()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TotalMonotoneFn):
            return NotImplemented
        return self.lattice == other.lattice and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash((self.lattice, self.grid.tobytes()))

    @classmethod
    def from_callable(cls, lattice: Lattice, out_scale: ValueScale, fn, check: bool = True) -> "TotalMonotoneFn":
        grid = np.zeros(lattice.shape, dtype=np.int16)
        for p in lattice.iter_points():
            grid[p] = fn(p)
        return cls(lattice, out_scale, grid, check=check)

    @classmethod
    def from_values(cls, lattice: Lattice, out_scale: ValueScale, values, check: bool = True) -> "TotalMonotoneFn":
        """Inverse of values(): rebuild from the canonical point order."""
        values = list(values)
        if len(values) != lattice.point_count:
            raise ValidationError(f"expected {lattice.point_count} values, got {len(values)}")
        grid = np.zeros(lattice.shape, dtype=np.int16)
        for p, v in zip(lattice.iter_points(), values):
            grid[p] = v
        return cls(lattice, out_scale, grid, check=check)


def _grid_is_monotone(grid: np.ndarray) -> bool:
    # Covering pairs only: along each axis, values may not decrease.
    return all(bool(np.all(np.diff(grid, axis=axis) >= 0)) for axis in range(grid.ndim))


def is_monotone(candidate) -> bool:
    """True iff the assignment never decreases along any covering pair.

    Accepts a TotalMonotoneFn or a bare value grid.
    """
    grid = candidate.grid if isinstance(candidate, TotalMonotoneFn) else np.asarray(candidate)
    return _grid_is_monotone(grid)


class PartialMonotoneFn:
    """Value bounds per lattice point, closed under monotonicity.

    Single-writer: hand it between threads, never mutate concurrently.
    """

    def __init__(self, lattice: Lattice, out_scale: ValueScale, max_points: int = DEFAULT_DENSE_CAP):
        if lattice.point_count > max_points:
            raise LatticeTooLargeError(
                f"lattice has {lattice.point_count:,} points, above the dense-storage cap "
                f"of {max_points:,}; split the factors into a deeper hierarchy of smaller "
                f"nodes instead of eliciting one flat table"
            )
        self.lattice = lattice
        self.out_scale = out_scale
        self._lo = np.zeros(lattice.shape, dtype=np.int16)
        self._hi = np.full(lattice.shape, out_scale.size - 1, dtype=np.int16)
        self.answers: list[Answer] = []

    # -- reads ---------------------------------------------------------

    def bounds(self, p: Point) -> tuple[int, int]:
        p = self.lattice.check_point(p)
        return int(self._lo[p]), int(self._hi[p])

    def is_determined(self, p: Point) -> bool:
        lo, hi = self.bounds(p)
        return lo == hi

    def value_at(self, p: Point) -> int | None:
        lo, hi = self.bounds(p)
        return lo if lo == hi else None

    def determined_count(self) -> int:
        return int(np.count_nonzero(self._lo == self._hi))

    def undetermined_mask(self) -> np.ndarray:
        """Boolean grid, True where the value is still open."""
        return self._lo != self._hi

    def undetermined_points(self) -> list[Point]:
        return [p for p in self.lattice.iter_points() if not self.is_determined(p)]

    def span_total(self) -> int:
        """Sum over points of hi - lo; 0 means fully determined."""
        return int((self._hi - self._lo).sum())

    # -- writes --------------------------------------------------------

    def record(self, p: Point, v: int) -> None:
        """Log f(p) = v and apply monotone closure.

        Transactional: raises ConflictError and changes nothing when v is
        outside the feasible range at p.
        """
        p = self.lattice.check_point(p)
        v = int(v)
        if not 0 <= v <= self.out_scale.size - 1:
            raise ValidationError(f"value {v} out of range for scale {list(self.out_scale.labels)}")
        lo, hi = self.bounds(p)
        if not lo <= v <= hi:
            raise ConflictError(p, v, (lo, hi), self.conflicting_answers(p, v))
        up = tuple(slice(c, None) for c in p)
        down = tuple(slice(0, c + 1) for c in p)
        np.maximum(self._lo[up], v, out=self._lo[up])
        np.minimum(self._hi[down], v, out=self._hi[down])
        self.answers.append(Answer(len(self.answers), p, v, time.time()))

    def conflicting_answers(self, p: Point, v: int) -> list[Answer]:
        """Prior answers whose closure excludes f(p) = v."""
        return [
            a
            for a in self.answers
            if (leq(a.point, p) and a.value > v) or (leq(p, a.point) and a.value < v)
        ]

    def copy(self) -> "PartialMonotoneFn":
        dup = PartialMonotoneFn.__new__(PartialMonotoneFn)
        dup.lattice = self.lattice
        dup.out_scale = self.out_scale
        dup._lo = self._lo.copy()
        dup._hi = self._hi.copy()
        dup.answers = list(self.answers)
        return dup

    # -- completions -----------------------------------------------------

    def min_extension(self) -> TotalMonotoneFn:
        """Total function taking lo everywhere (most pessimistic completion)."""
        return TotalMonotoneFn(self.lattice, self.out_scale, self._lo.copy())

    def max_extension(self) -> TotalMonotoneFn:
        """Total function taking hi everywhere (most optimistic completion)."""
        return TotalMonotoneFn(self.lattice, self.out_scale, self._hi.copy())


def new_partial(lattice: Lattice, out_scale: ValueScale, max_points: int = DEFAULT_DENSE_CAP) -> PartialMonotoneFn:
    return PartialMonotoneFn(lattice, out_scale, max_points=max_points)


def enumerate_consistent(f: PartialMonotoneFn, cap: int = DEFAULT_ENUMERATION_CAP) -> list[TotalMonotoneFn]:
    """All total monotone functions that agree with f's logged answers.

    Works from the raw answer log, not from the lo/hi grids, so it serves
    as an independent check of the closure updates.  Backtracks over
    points in ascending-rank order; every immediate predecessor of a point
    is assigned before the point itself.
    """
    lattice, out = f.lattice, f.out_scale
    if lattice.point_count > cap:
        raise ValidationError(
            f"enumeration over {lattice.point_count} points exceeds the cap of {cap}"
        )
    pinned: dict[Point, int] = {}
    for a in f.answers:
        if pinned.get(a.point, a.value) != a.value:
            return []  # two answers disagree at one point
        pinned[a.point] = a.value

    order = lattice.points()
    preds: list[list[Point]] = []
    for p in order:
        preds.append([p[:i] + (c - 1,) + p[i + 1 :] for i, c in enumerate(p) if c > 0])

    results: list[TotalMonotoneFn] = []
    assigned: dict[Point, int] = {}

    def walk(i: int) -> None:
        if i == len(order):
            grid = np.zeros(lattice.shape, dtype=np.int16)
            for q, v in assigned.items():
                grid[q] = v
            results.append(TotalMonotoneFn(lattice, out, grid, check=False))
            return
        p = order[i]
        floor = max((assigned[q] for q in preds[i]), default=0)
        choices = range(floor, out.size) if p not in pinned else (
            [pinned[p]] if pinned[p] >= floor else []
        )
        for v in choices:
            assigned[p] = v
            walk(i + 1)
        assigned.pop(p, None)

    walk(0)
    return results
