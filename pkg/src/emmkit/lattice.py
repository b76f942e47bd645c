"""Product posets of ordinal value scales.

A decision factor takes one of k ordered values; index 0 is always the
least favorable value and k-1 the most favorable (negatively phrased
factors are reversed when a document is ingested, so the encoding is
uniform here).  A set of factors spans a product lattice whose points are
value tuples ordered componentwise.  Everything downstream -- monotone
closure, question scheduling, chain layouts -- works over these lattices.

Lattices are cheap descriptions: construction never materializes the
point set, so a 20-factor space is fine to *describe* even though dense
storage over it is capped elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

from .errors import ValidationError

# A point is a tuple of value indices, one per factor.
Point = tuple[int, ...]


@dataclass(frozen=True)
class ValueScale:
    """An ordered answer scale. ``labels[i]`` is the i-th least favorable value."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise ValidationError(f"a value scale needs at least 2 labels, got {list(self.labels)!r}")
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError(f"value scale labels must be distinct: {list(self.labels)!r}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def label(self, index: int) -> str:
        if not 0 <= index < self.size:
            raise ValidationError(f"value index {index} out of range for scale {list(self.labels)}")
        return self.labels[index]

    def index_of(self, value: int | str) -> int:
        """Resolve a label or a numeric index to an index.

        Label text wins over digits: on a scale ("0", "1") the string "1"
        means the label "1", not position one.
        """
        if isinstance(value, str):
            if value in self.labels:
                return self.labels.index(value)
            if value.lstrip("-").isdigit():
                return self.index_of(int(value))
            raise ValidationError(f"{value!r} is not a label of scale {list(self.labels)}")
        index = int(value)
        if not 0 <= index < self.size:
            raise ValidationError(f"value index {index} out of range for scale {list(self.labels)}")
        return index


#: Default scale for yes/no factors; "no" is the unfavorable answer.
BINARY = ValueScale(("no", "yes"))


@dataclass(frozen=True)
class Lattice:
    """Product of ordinal scales, ordered componentwise."""

    dims: tuple[ValueScale, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValidationError("a lattice needs at least one dimension")

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.size for s in self.dims)

    @property
    def point_count(self) -> int:
        return math.prod(self.shape)

    @property
    def top(self) -> Point:
        return tuple(k - 1 for k in self.shape)

    @property
    def bottom(self) -> Point:
        return (0,) * self.n

    def contains(self, p: Iterable[int]) -> bool:
        p = tuple(p)
        return len(p) == self.n and all(0 <= c < k for c, k in zip(p, self.shape))

    def check_point(self, p: Point) -> Point:
        p = tuple(p)
        if len(p) != self.n:
            raise ValidationError(f"point {p} has {len(p)} coordinates, lattice has {self.n}")
        for c, k in zip(p, self.shape):
            if not 0 <= c < k:
                raise ValidationError(f"point {p} out of range for shape {self.shape}")
        return p

    def rank(self, p: Point) -> int:
        """Coordinate sum; drives the canonical ordering and chain layouts."""
        return sum(p)

    def iter_points(self) -> Iterator[Point]:
        """All points, ascending rank then lexicographic. Deterministic."""
        return iter(sorted(product(*(range(k) for k in self.shape)), key=lambda p: (sum(p), p)))

    def points(self) -> list[Point]:
        return list(self.iter_points())

    def up_set(self, p: Point) -> set[Point]:
        """{q : p <= q}, including p itself."""
        p = self.check_point(p)
        return set(product(*(range(c, k) for c, k in zip(p, self.shape))))

    def down_set(self, p: Point) -> set[Point]:
        """{q : q <= p}, including p itself."""
        p = self.check_point(p)
        return set(product(*(range(c + 1) for c in p)))

    def index(self, p: Point) -> int:
        """Row-major position of p; dense arrays are addressed with this."""
        p = self.check_point(p)
        idx = 0
        for c, k in zip(p, self.shape):
            idx = idx * k + c
        return idx


def make_lattice(scales: Iterable[ValueScale]) -> Lattice:
    return Lattice(tuple(scales))


def leq(a: Point, b: Point) -> bool:
    """Componentwise order: a <= b iff every coordinate of a is <= b's."""
    if len(a) != len(b):
        raise ValidationError(f"cannot compare points of different dimension: {a} vs {b}")
    return all(x <= y for x, y in zip(a, b))
