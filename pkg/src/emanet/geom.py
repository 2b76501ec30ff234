"""Exact planar primitives.

Coordinates are :class:`fractions.Fraction` values. Ray travel lengths of
grade <= 2 live in Z[sqrt 2] (over the rationals) and are represented by
:class:`RayTime`. Rotated frames are handled by re-indexing the eight base
directions, so no coordinate is ever rotated numerically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Union

from .errors import DuplicatePoint

SQRT2 = math.sqrt(2.0)

Number = Union[int, Fraction]

# Base direction i points at angle i*45 degrees; unnormalized integer vectors.
DIRS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
DIR_NAMES = ("E", "NE", "N", "NW", "W", "SW", "S", "SE")


def as_coord(value) -> Fraction:
    """Parse an int, Fraction or decimal/ratio string into an exact Fraction.

    Floats are rejected on purpose: their binary expansion is rarely what the
    caller meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {type(value).__name__} as an exact coordinate")


def format_coord(value: Fraction) -> str:
    """Render a Fraction as a plain decimal string when it terminates, else ``p/q``."""
    value = Fraction(value)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(value.numerator)
    scaled = value * 10**digits
    assert scaled.denominator == 1
    sign = "-" if scaled < 0 else ""
    text = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def sign(x) -> int:
    return (x > 0) - (x < 0)


def sign_zsqrt2(a, b) -> int:
    """Exact sign of ``a + b*sqrt(2)`` for rational ``a``, ``b``."""
    sa, sb = sign(a), sign(b)
    if sa == sb or sb == 0:
        return sa
    if sa == 0:
        return sb
    # opposite signs: compare a^2 with 2 b^2
    return sa * sign(a * a - 2 * b * b)


@dataclass(frozen=True)
class Point:
    id: int
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", as_coord(self.x))
        object.__setattr__(self, "y", as_coord(self.y))

    @property
    def xy(self):
        return (self.x, self.y)


class Order(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True, order=False)
class RayTime:
    """The real number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * SQRT2

    def __add__(self, other):
        other = _as_raytime(other)
        return RayTime(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        other = _as_raytime(other)
        return RayTime(self.a - other.a, self.b - other.b)

    def __mul__(self, other):
        other = _as_raytime(other)
        return RayTime(self.a * other.a + 2 * self.b * other.b, self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def sign(self) -> int:
        return sign_zsqrt2(self.a, self.b)

    def __eq__(self, other):
        if not isinstance(other, (RayTime, int, Fraction)):
            return NotImplemented
        other = _as_raytime(other)
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __lt__(self, other):
        return compare_times(self, _as_raytime(other)) is Order.LT

    def __le__(self, other):
        return compare_times(self, _as_raytime(other)) is not Order.GT

    def __gt__(self, other):
        return compare_times(self, _as_raytime(other)) is Order.GT

    def __ge__(self, other):
        return compare_times(self, _as_raytime(other)) is not Order.LT

    def __repr__(self):
        if self.b == 0:
            return f"RayTime({self.a})"
        if self.a == 0:
            return f"RayTime({self.b}*sqrt2)"
        return f"RayTime({self.a} + {self.b}*sqrt2)"


def _as_raytime(value) -> RayTime:
    if isinstance(value, RayTime):
        return value
    return RayTime(Fraction(value), Fraction(0))


def compare_times(t1: RayTime, t2: RayTime) -> Order:
    """Exact total order on ``a + b*sqrt(2)`` values."""
    return Order(sign_zsqrt2(t1.a - t2.a, t1.b - t2.b))


class Orientation(enum.IntEnum):
    CW = -1
    COLLINEAR = 0
    CCW = 1


def orientation(a: Point, b: Point, c: Point) -> Orientation:
    cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    return Orientation(sign(cross))


@dataclass(frozen=True)
class Frame:
    """Logical rotation by ``step * 45`` degrees.

    Logical direction ``j`` is base direction ``(j + step) % 8``.
    """

    step: int = 0

    def __post_init__(self):
        if not 0 <= self.step < 8:
            raise ValueError(f"frame step must be in 0..7, got {self.step}")

    def base_dir(self, logical: int) -> int:
        return (logical + self.step) % 8

    @property
    def axes(self):
        """Integer vectors of the frame's r1 and r3 directions (equal length)."""
        return DIRS[self.step], DIRS[(self.step + 2) % 8]

    @property
    def axis_norm2(self) -> int:
        return 1 if self.step % 2 == 0 else 2

    def to_frame(self, dx, dy):
        """Frame coordinates of a base-frame vector, scaled by ``sqrt(axis_norm2)``."""
        (e1x, e1y), (e3x, e3y) = self.axes
        return dx * e1x + dy * e1y, dx * e3x + dy * e3y

    def to_base(self, fx, fy):
        """Inverse of :meth:`to_frame`; exact for Fraction input."""
        (e1x, e1y), (e3x, e3y) = self.axes
        n2 = self.axis_norm2
        return (
            Fraction(fx * e1x + fy * e3x, n2) if n2 != 1 else fx * e1x + fy * e3x,
            Fraction(fx * e1y + fy * e3y, n2) if n2 != 1 else fx * e1y + fy * e3y,
        )


class ConeId(enum.IntEnum):
    """The eight 22.5-degree wedges of a frame's upper half-plane, counter-clockwise."""

    C_r1b1 = 0
    C_b1r2 = 1
    C_r2a1 = 2
    C_a1r3 = 3
    C_r3a2 = 4
    C_a2r4 = 5
    C_r4b2 = 6
    C_b2r5 = 7


# Boundary directions in frame coordinates; each component is (a, b) = a + b*sqrt2.
R1 = ((1, 0), (0, 0))
B1 = ((1, 1), (1, 0))
R2 = ((1, 0), (1, 0))
A1 = ((1, 0), (1, 1))
R3 = ((0, 0), (1, 0))
A2 = ((-1, 0), (1, 1))
R4 = ((-1, 0), (1, 0))
B2 = ((-1, -1), (1, 0))
R5 = ((-1, 0), (0, 0))

GUIDES = (R1, B1, R2, A1, R3, A2, R4, B2, R5)
CONE_BOUNDS = {cone: (GUIDES[cone], GUIDES[cone + 1]) for cone in ConeId}
TOP_CONES = (ConeId.C_a1r3, ConeId.C_r3a2)
RIGHT_CANDIDATE_CONES = (ConeId.C_b1r2, ConeId.C_r2a1)
LEFT_CANDIDATE_CONES = (ConeId.C_a2r4, ConeId.C_r4b2)
CANDIDATE_CONES = RIGHT_CANDIDATE_CONES + LEFT_CANDIDATE_CONES


def dot_zsqrt2(vec, dx, dy):
    """``<(dx, dy), vec>`` for a Z[sqrt2] vector, returned as ``(a, b)``."""
    (ax, bx), (ay, by) = vec
    return ax * dx + ay * dy, bx * dx + by * dy


def cross_from(vec, dx, dy):
    """``cross(vec, d)`` = ``vec_x*dy - vec_y*dx`` as ``(a, b)``."""
    (ax, bx), (ay, by) = vec
    return ax * dy - ay * dx, bx * dy - by * dx


def cone_in_frame(fx, fy) -> Optional[ConeId]:
    """Cone of a frame-coordinate direction, or None outside the open upper half-plane."""
    if fy <= 0:
        return None
    index = 0
    for guide in GUIDES[1:8]:
        a, b = cross_from(guide, fx, fy)
        if sign_zsqrt2(a, b) >= 0:
            index += 1
        else:
            break
    return ConeId(index)


def cone_of(p: Point, q: Point, frame: Frame = Frame(0)) -> Optional[ConeId]:
    """Cone of ``q`` around ``p`` in ``frame``.

    Wedges are half-open ``[lower, upper)``; a direction on a boundary belongs to
    the wedge counter-clockwise of it.
    """
    if p.x == q.x and p.y == q.y:
        raise DuplicatePoint(f"points {p.id} and {q.id} coincide")
    fx, fy = frame.to_frame(q.x - p.x, q.y - p.y)
    return cone_in_frame(fx, fy)


class RayHit(NamedTuple):
    point: tuple
    t1: RayTime
    t2: RayTime


def ray_time(param, direction: int) -> RayTime:
    """Travel length after moving ``param`` units of the unnormalized direction vector."""
    if direction % 2 == 0:
        return RayTime(param, 0)
    return RayTime(0, param)


def ray_intersection(o1: Point, d1: int, o2: Point, d2: int) -> Optional[RayHit]:
    """Meeting point of two forward rays with base directions ``d1`` and ``d2``.

    Head-on collinear rays meet at the midpoint with equal times. Parallel
    non-collinear and co-directed rays give None.
    """
    v1x, v1y = DIRS[d1 % 8]
    v2x, v2y = DIRS[d2 % 8]
    wx, wy = o2.x - o1.x, o2.y - o1.y
    cr = v1x * v2y - v1y * v2x
    if cr == 0:
        if (v1x, v1y) != (-v2x, -v2y):
            return None
        if wx * v1y - wy * v1x != 0:
            return None
        along = Fraction(wx * v1x + wy * v1y, v1x * v1x + v1y * v1y)
        if along <= 0:
            return None
        s = along / 2
        point = (o1.x + s * v1x, o1.y + s * v1y)
        return RayHit(point, ray_time(s, d1), ray_time(s, d2))
    s1 = Fraction(wx * v2y - wy * v2x) / cr
    s2 = Fraction(wx * v1y - wy * v1x) / cr
    if s1 < 0 or s2 < 0:
        return None
    point = (o1.x + s1 * v1x, o1.y + s1 * v1y)
    return RayHit(point, ray_time(s1, d1), ray_time(s2, d2))
