"""Exact integer-lattice geometry: disc hulls, cones, rotated rectangles.

No floating point decides any predicate here; radii and tangents are
``Fraction``s and every test is a sign of an integer (or rational)
expression.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

Vec = tuple[int, int]
Rational = int | Fraction


def cross(a: Vec, b: Vec) -> int:
    return a[0] * b[1] - a[1] * b[0]


def dot(a: Vec, b: Vec) -> int:
    return a[0] * b[0] + a[1] * b[1]


def sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def primitive(v: Vec) -> Vec:
    """Shortest lattice vector on the line through the origin and ``v``,
    sign-normalized so lines in both directions share one key."""
    g = math.gcd(v[0], v[1])
    if g == 0:
        raise ValueError("zero vector has no direction")
    x, y = v[0] // g, v[1] // g
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return (x, y)


def _half(v: Vec) -> int:
    return 0 if v[1] > 0 or (v[1] == 0 and v[0] > 0) else 1


def _angle_cmp(a: Vec, b: Vec) -> int:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    c = cross(a, b)
    return -1 if c > 0 else (1 if c < 0 else 0)


def sort_by_angle(vectors: Iterable[Vec]) -> list[Vec]:
    """Counterclockwise from the positive x-axis."""
    return sorted(vectors, key=cmp_to_key(_angle_cmp))


def disc_points(r: Rational) -> list[Vec]:
    """Lattice points in the closed disc of radius ``r`` about the origin."""
    r = Fraction(r)
    r2 = r * r
    bound = math.floor(r)
    pts = []
    for x in range(-bound, bound + 1):
        for y in range(-bound, bound + 1):
            if x * x + y * y <= r2:
                pts.append((x, y))
    return pts


def convex_hull(points: Iterable[Vec]) -> list[Vec]:
    """Strict hull vertices (collinear points dropped) in counterclockwise
    order, starting at the vertex of least polar angle."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return sort_by_angle(pts)

    def chain(seq: Sequence[Vec]) -> list[Vec]:
        out: list[Vec] = []
        for p in seq:
            while len(out) >= 2 and cross(sub(out[-1], out[-2]), sub(p, out[-2])) <= 0:
                out.pop()
            out.append(p)
        return out

    ring = chain(pts)[:-1] + chain(pts[::-1])[:-1]
    # rotate the CCW ring to start at the smallest polar angle
    start = min(range(len(ring)), key=cmp_to_key(lambda i, j: _angle_cmp(ring[i], ring[j])))
    return ring[start:] + ring[:start]


def convex_hull_ball(r: Rational) -> list[Vec]:
    """Vertices of the hull of the lattice points within distance ``r``."""
    if Fraction(r) < 1:
        raise ValueError("radius must be >= 1")
    return convex_hull(disc_points(r))


def cone_bounds(axis: Vec, tan_phi: Rational) -> tuple[Vec, Vec]:
    """Integer direction vectors of the cone's clockwise and
    counterclockwise boundary rays (axis rotated by -phi and +phi)."""
    t = Fraction(tan_phi)
    p, q = t.numerator, t.denominator
    ax, ay = axis
    perp = (-ay, ax)
    ccw = (q * ax + p * perp[0], q * ay + p * perp[1])
    cw = (q * ax - p * perp[0], q * ay - p * perp[1])
    return cw, ccw


def in_cone(v: Vec, axis: Vec, tan_phi: Rational) -> bool:
    """Closed cone of half-angle phi (< 90 degrees) about ``axis``."""
    if dot(v, axis) <= 0:
        return False
    cw, ccw = cone_bounds(axis, tan_phi)
    return cross(cw, v) >= 0 and cross(v, ccw) >= 0


def cone_filter(vectors: Iterable[Vec], axis: Vec, tan_phi: Rational) -> list[Vec]:
    """The vectors inside the closed cone, order preserved."""
    return [v for v in vectors if in_cone(v, axis, tan_phi)]


def rational_cbrt_inv_sq(r: Rational, max_den: int = 10_000) -> Fraction:
    """r ** (-2/3) as a Fraction: exact when r is a perfect cube."""
    r = Fraction(r)
    num, den = r.numerator, r.denominator
    cn, cd = round(num ** (1 / 3)), round(den ** (1 / 3))
    if cn ** 3 == num and cd ** 3 == den:
        return Fraction(cd * cd, cn * cn)
    return Fraction(float(r) ** (-2 / 3)).limit_denominator(max_den)


class Rectangle:
    """Open rectangle with a corner at ``origin``, long side ``h`` along
    ``axis`` and short side ``w`` to its left.  Membership is exact."""

    def __init__(self, axis: Vec, h: Rational, w: Rational, origin: Vec = (0, 0)) -> None:
        self.axis = axis
        self.h = Fraction(h)
        self.w = Fraction(w)
        self.origin = origin
        self.norm2 = dot(axis, axis)

    def along(self, p: Vec) -> int:
        """Projection onto the axis, scaled by |axis|."""
        return dot(sub(p, self.origin), self.axis)

    def across(self, p: Vec) -> int:
        """Signed distance to the long side through the origin, scaled by |axis|."""
        return cross(self.axis, sub(p, self.origin))

    def _strictly_between(self, value: int, length: Fraction) -> bool:
        # 0 < value < length * |axis|
        return value > 0 and value * value < length * length * self.norm2

    def contains(self, p: Vec) -> bool:
        return self._strictly_between(self.along(p), self.h) and self._strictly_between(self.across(p), self.w)

    def in_prefix(self, p: Vec, depth: Rational) -> bool:
        """Inside the rectangle and within ``depth`` of the starting short side."""
        return self.contains(p) and self._strictly_between(self.along(p), Fraction(depth))

    def lattice_points(self) -> list[Vec]:
        ux, uy = self.axis
        norm = math.sqrt(self.norm2)
        hx, hy = ux / norm * float(self.h), uy / norm * float(self.h)
        wx, wy = -uy / norm * float(self.w), ux / norm * float(self.w)
        ox, oy = self.origin
        xs = [ox, ox + hx, ox + wx, ox + hx + wx]
        ys = [oy, oy + hy, oy + wy, oy + hy + wy]
        pts = []
        for x in range(math.floor(min(xs)) - 1, math.ceil(max(xs)) + 2):
            for y in range(math.floor(min(ys)) - 1, math.ceil(max(ys)) + 2):
                if self.contains((x, y)):
                    pts.append((x, y))
        return pts
