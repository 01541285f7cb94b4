"""Exact integer predicates.

Coordinates are Python ints, so every cross product below is exact no matter
how large the inputs get. Nothing in a decision path touches floats.
"""
from __future__ import annotations

import enum
from typing import NamedTuple, Sequence

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class DegenerateInput(ValueError):
    """Point set cannot support a triangulation (too few points, all collinear)."""


class DuplicatePoint(ValueError):
    pass


class Point(NamedTuple):
    x: int
    y: int


class Orientation(enum.IntEnum):
    CLOCKWISE = -1
    COLLINEAR = 0
    COUNTERCLOCKWISE = 1


def cross(p, q, r) -> int:
    """(q - p) x (r - p)."""
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def orient(p, q, r) -> int:
    """Sign of the cross product as -1, 0 or 1."""
    c = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (c > 0) - (c < 0)


def orientation(p, q, r) -> Orientation:
    return Orientation(orient(p, q, r))


def _between(a, b, c) -> bool:
    # c collinear with ab assumed; true iff c lies on the closed segment ab
    return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])


def segments_cross(a, b, c, d) -> bool:
    """Proper crossing: the open segments ab and cd meet in exactly one point
    that is interior to both."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    if o1 == 0 or o2 == 0 or o1 == o2:
        return False
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    return o3 != 0 and o4 != 0 and o3 != o4


def segments_conflict(a, b, c, d) -> bool:
    """True iff closed segments ab and cd share a point other than a common endpoint.

    This is the planarity test: proper crossings, T-junctions and collinear
    overlaps all count. Two segments meeting only at a shared endpoint do not.
    """
    a, b, c, d = tuple(a), tuple(b), tuple(c), tuple(d)
    shared = {a, b} & {c, d}
    if len(shared) == 2:
        return True  # same segment
    if len(shared) == 1:
        s = shared.pop()
        p = b if a == s else a
        q = d if c == s else c
        if orient(s, p, q) != 0:
            return False
        # collinear: overlap iff p and q leave s in the same direction
        return (p[0] - s[0]) * (q[0] - s[0]) + (p[1] - s[1]) * (q[1] - s[1]) > 0
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _between(a, b, c):
        return True
    if o2 == 0 and _between(a, b, d):
        return True
    if o3 == 0 and _between(c, d, a):
        return True
    if o4 == 0 and _between(c, d, b):
        return True
    return False


def point_on_open_segment(a, b, p) -> bool:
    return orient(a, b, p) == 0 and _between(a, b, p) and tuple(p) != tuple(a) and tuple(p) != tuple(b)


def is_strictly_convex_quad(a, b, c, d) -> bool:
    """True iff a, b, c, d (in boundary order, either orientation) bound a
    strictly convex quadrilateral. Any collinear consecutive triple gives False."""
    s = orient(a, b, c)
    if s == 0:
        return False
    return orient(b, c, d) == s and orient(c, d, a) == s and orient(d, a, b) == s


def _monotone_chain(points: Sequence, order: list[int], keep_collinear: bool) -> list[int]:
    def half(seq):
        chain: list[int] = []
        for i in seq:
            while len(chain) >= 2:
                o = orient(points[chain[-2]], points[chain[-1]], points[i])
                if o < 0 or (o == 0 and not keep_collinear):
                    chain.pop()
                else:
                    break
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(reversed(order))
    return lower[:-1] + upper[:-1]


def _sorted_indices(points: Sequence) -> list[int]:
    if len(points) < 3:
        raise DegenerateInput("need at least 3 points")
    order = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1]))
    for i, j in zip(order, order[1:]):
        if tuple(points[i]) == tuple(points[j]):
            raise DuplicatePoint(f"points {i} and {j} coincide at {tuple(points[i])}")
    return order


def convex_hull(points: Sequence) -> list[int]:
    """Hull vertex indices in CCW order; points strictly inside hull edges are left out."""
    order = _sorted_indices(points)
    hull = _monotone_chain(points, order, keep_collinear=False)
    if len(hull) < 3:
        raise DegenerateInput("all points are collinear")
    return hull


def hull_boundary(points: Sequence) -> list[int]:
    """Every point on the hull boundary, collinear ones included, in CCW order.

    Consecutive entries (cyclically) are exactly the hull edges any
    triangulation of the point set must contain.
    """
    order = _sorted_indices(points)
    strict = _monotone_chain(points, order, keep_collinear=False)
    if len(strict) < 3:
        raise DegenerateInput("all points are collinear")
    return _monotone_chain(points, order, keep_collinear=True)
