"""Points, lines, planes, intervals, ratio division, and parallelism.

Lines are stored unnormalized as (origin, direction); equality is
extensional (same point set).  All predicates are decided exactly over the
rational field, so every answer here is a certainty, not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional

from .errors import DegenerateGeometry, DimensionMismatch, PreconditionError
from .field import (
    Vector,
    collinearity_scalar,
    format_vector,
    linearly_independent,
    affine_rank,
    _int_rank,
    _int_row,
)


class Line:
    """Affine subspace of dimension 1: {origin + t·direction : t ∈ ℚ}."""

    __slots__ = ("origin", "direction")

    def __init__(self, origin: Vector, direction: Vector):
        if origin.dim != direction.dim:
            raise DimensionMismatch(
                f"line origin dim {origin.dim} vs direction dim {direction.dim}"
            )
        if direction.is_zero():
            raise DegenerateGeometry("line direction must be nonzero")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "direction", direction)

    def __setattr__(self, name, value):
        raise AttributeError("Line is immutable")

    @property
    def dim(self) -> int:
        return self.origin.dim

    def point_at(self, t) -> Vector:
        t = Fraction(t)
        return Vector(o + t * d for o, d in zip(self.origin.coords, self.direction.coords))

    def contains(self, p: Vector) -> bool:
        """Exact membership: p − origin must be a multiple of direction."""
        return collinearity_scalar(p - self.origin, self.direction) is not None

    def param_of(self, p: Vector) -> Optional[Fraction]:
        """The t with point_at(t) = p, or None if p is off the line."""
        return collinearity_scalar(p - self.origin, self.direction)

    def canonical(self) -> tuple[Vector, Vector]:
        """Canonical (origin, direction) pair shared by all representations."""
        j = next(i for i, c in enumerate(self.direction.coords) if c != 0)
        d = (Fraction(1) / self.direction.coords[j]) * self.direction
        o = self.origin - (self.origin.coords[j] / self.direction.coords[j]) * self.direction
        return o, d

    def __eq__(self, other) -> bool:
        if not isinstance(other, Line):
            return NotImplemented
        if self.origin.dim != other.origin.dim:
            return False
        return (
            not linearly_independent(self.direction, other.direction)
            and self.contains(other.origin)
        )

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"Line({self.origin!r}, {self.direction!r})"

    def __str__(self) -> str:
        return format_line(self)


def format_line(line: Line) -> str:
    """Text form ``line (origin) dir (direction)`` used in certificates."""
    return f"line {format_vector(line.origin)} dir {format_vector(line.direction)}"


def line_through(a: Vector, b: Vector) -> Line:
    """The unique line containing the two distinct points a and b."""
    if a == b:
        raise DegenerateGeometry(f"line_through needs distinct points, got {a} twice")
    return Line(a, b - a)


def divides_in_ratio(a: Vector, b: Vector, r, s) -> Vector:
    """The point (r/(r+s))·(b − a) + a; may lie outside the closed interval."""
    r, s = Fraction(r), Fraction(s)
    if r + s == 0:
        raise PreconditionError("divides_in_ratio with r + s = 0")
    t = r / (r + s)
    return Vector(x + t * (y - x) for x, y in zip(a.coords, b.coords))


@dataclass(frozen=True)
class RatioPoint:
    """A point on line a‾b remembered together with the ratio that produced it."""

    r: Fraction
    s: Fraction
    point: Vector


def ratio_point(a: Vector, b: Vector, r, s) -> RatioPoint:
    r, s = Fraction(r), Fraction(s)
    return RatioPoint(r, s, divides_in_ratio(a, b, r, s))


def ratio_of(a: Vector, b: Vector, c: Vector) -> Optional[tuple[Fraction, Fraction]]:
    """Return (t, 1−t) with c = t·(b−a) + a, or None when c is off line a‾b."""
    if a == b:
        raise PreconditionError("ratio_of needs a ≠ b")
    t = collinearity_scalar(c - a, b - a)
    if t is None:
        return None
    return t, 1 - t


def in_interval(a: Vector, b: Vector, c: Vector, kind: str = "closed") -> bool:
    """Exact membership of c in the closed or open interval between a and b.

    For a = b the closed interval is {a} and the open interval is empty.
    """
    if kind not in ("closed", "open"):
        raise ValueError(f"interval kind must be 'closed' or 'open', got {kind!r}")
    if a == b:
        return kind == "closed" and c == a
    t = collinearity_scalar(c - a, b - a)
    if t is None:
        return False
    if kind == "closed":
        return 0 <= t <= 1
    return 0 < t < 1


def lines_parallel(l0: Line, l1: Line) -> bool:
    """Parallel = dependent directions; the lines are then equal or disjoint."""
    if l0.dim != l1.dim:
        raise DimensionMismatch(f"line dims {l0.dim} vs {l1.dim}")
    return not linearly_independent(l0.direction, l1.direction)


def _solve_two_unknowns(c0: Vector, c1: Vector, rhs: Vector) -> Optional[tuple[Fraction, Fraction]]:
    """Solve t·c0 + u·c1 = rhs exactly; None when inconsistent or underdetermined."""
    n = c0.dim
    pivot = None
    for i in range(n):
        for j in range(i + 1, n):
            det = c0.coords[i] * c1.coords[j] - c0.coords[j] * c1.coords[i]
            if det != 0:
                pivot = (i, j, det)
                break
        if pivot:
            break
    if pivot is None:
        return None
    i, j, det = pivot
    t = (rhs.coords[i] * c1.coords[j] - rhs.coords[j] * c1.coords[i]) / det
    u = (c0.coords[i] * rhs.coords[j] - c0.coords[j] * rhs.coords[i]) / det
    for k in range(n):
        if t * c0.coords[k] + u * c1.coords[k] != rhs.coords[k]:
            return None
    return t, u


def line_intersection(l0: Line, l1: Line) -> Optional[Vector]:
    """The unique common point of two lines, or None (parallel, equal, or skew)."""
    if l0.dim != l1.dim:
        raise DimensionMismatch(f"line dims {l0.dim} vs {l1.dim}")
    if not linearly_independent(l0.direction, l1.direction):
        return None
    sol = _solve_two_unknowns(l0.direction, -l1.direction, l1.origin - l0.origin)
    if sol is None:
        return None
    t, _ = sol
    return l0.point_at(t)


class Plane:
    """Affine subspace of dimension 2: origin + span{dir1, dir2}."""

    __slots__ = ("origin", "dir1", "dir2")

    def __init__(self, origin: Vector, dir1: Vector, dir2: Vector):
        if not (origin.dim == dir1.dim == dir2.dim):
            raise DimensionMismatch("plane origin/direction dims differ")
        if not linearly_independent(dir1, dir2):
            raise DegenerateGeometry("plane directions must be linearly independent")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "dir1", dir1)
        object.__setattr__(self, "dir2", dir2)

    def __setattr__(self, name, value):
        raise AttributeError("Plane is immutable")

    @property
    def dim(self) -> int:
        return self.origin.dim

    def point_at(self, s, t) -> Vector:
        s, t = Fraction(s), Fraction(t)
        return Vector(
            o + s * d1 + t * d2
            for o, d1, d2 in zip(self.origin.coords, self.dir1.coords, self.dir2.coords)
        )

    def contains(self, p: Vector) -> bool:
        rows = [_int_row(self.dir1), _int_row(self.dir2), _int_row(p - self.origin)]
        return _int_rank(rows) == 2

    def contains_line(self, line: Line) -> bool:
        return self.contains(line.origin) and self.contains(line.origin + line.direction)

    def __repr__(self) -> str:
        return f"Plane({self.origin!r}, {self.dir1!r}, {self.dir2!r})"


def plane_through(a: Vector, b: Vector, c: Vector) -> Plane:
    """The plane containing three points of affine rank 2."""
    if affine_rank([a, b, c]) != 2:
        raise DegenerateGeometry("plane_through needs three points of affine rank 2")
    return Plane(a, b - a, c - a)


def containing_plane(l0: Line, l1: Line) -> Optional[Plane]:
    """The unique plane holding both lines, or None (equal lines or skew lines)."""
    if l0 == l1:
        return None
    if lines_parallel(l0, l1):
        return Plane(l0.origin, l0.direction, l1.origin - l0.origin)
    p = line_intersection(l0, l1)
    if p is None:
        return None
    return Plane(p, l0.direction, l1.direction)


class Crossing(NamedTuple):
    line: Line
    on_l0: Vector
    on_l1: Vector


def crossing_line(p: Vector, l0: Line, l1: Line) -> Optional[Crossing]:
    """A line through p meeting l0 and l1 at two distinct points.

    Requires l0 and l1 to be distinct, non-parallel, coplanar lines with p in
    their common plane.  Returns None only when p is the intersection point of
    l0 and l1 (every candidate line then meets both at that single point).
    """
    if l0 == l1:
        raise PreconditionError("crossing_line needs two distinct lines")
    if lines_parallel(l0, l1):
        raise PreconditionError("crossing_line needs non-parallel lines")
    meet = line_intersection(l0, l1)
    if meet is None:
        raise PreconditionError("crossing_line needs coplanar (intersecting) lines")
    plane = Plane(meet, l0.direction, l1.direction)
    if not plane.contains(p):
        raise PreconditionError("crossing_line needs p in the plane of the two lines")

    if p == meet:
        return None
    if l0.contains(p):
        for q1 in (l1.point_at(1), l1.point_at(0)):
            if q1 != meet:
                return Crossing(line_through(p, q1), p, q1)
    if l1.contains(p):
        for q0 in (l0.point_at(1), l0.point_at(0)):
            if q0 != meet:
                return Crossing(line_through(p, q0), q0, p)
    # p on neither line: aim at candidate points of l0, preferring origin+dir,
    # then origin, extending deterministically until non-degenerate (at most
    # two candidates can fail: one hitting the intersection point, one making
    # the candidate line parallel to l1).
    ks = [1, 0, 2, -1, 3, -2]
    for k in ks:
        q0 = l0.point_at(k)
        if q0 == meet:
            continue
        if not linearly_independent(q0 - p, l1.direction):
            continue
        cand = line_through(p, q0)
        q1 = line_intersection(cand, l1)
        if q1 is None:
            continue
        return Crossing(cand, q0, q1)
    raise DegenerateGeometry("crossing_line found no candidate; malformed input")
