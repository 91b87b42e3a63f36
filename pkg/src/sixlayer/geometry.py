"""Small 2D geometry kit: simple-polygon checks, point-in-polygon,
segment/polygon interior intersection.

Everything works on plain ``(x, y)`` float tuples.  Precision is plain IEEE
double with a small epsilon for orientation tests; inputs are desk-scale
footprints, not survey data.
"""

from __future__ import annotations

import math

Point = tuple[float, float]

_EPS = 1e-12


def _orient(a: Point, b: Point, c: Point) -> float:
    """Signed area of triangle abc (positive = counterclockwise)."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    """True if p lies on segment [a, b], assuming p is collinear with it."""
    return (
        min(a[0], b[0]) - _EPS <= p[0] <= max(a[0], b[0]) + _EPS
        and min(a[1], b[1]) - _EPS <= p[1] <= max(a[1], b[1]) + _EPS
    )


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True if segments [a,b] and [c,d] share at least one point."""
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if ((o1 > _EPS and o2 < -_EPS) or (o1 < -_EPS and o2 > _EPS)) and (
        (o3 > _EPS and o4 < -_EPS) or (o3 < -_EPS and o4 > _EPS)
    ):
        return True
    if abs(o1) <= _EPS and _on_segment(c, a, b):
        return True
    if abs(o2) <= _EPS and _on_segment(d, a, b):
        return True
    if abs(o3) <= _EPS and _on_segment(a, c, d):
        return True
    if abs(o4) <= _EPS and _on_segment(b, c, d):
        return True
    return False


def polygon_edges(vertices: tuple[Point, ...]) -> list[tuple[Point, Point]]:
    return [(vertices[i], vertices[(i + 1) % len(vertices)]) for i in range(len(vertices))]


def is_simple_polygon(vertices: tuple[Point, ...]) -> bool:
    """True for a non-degenerate, non-self-intersecting closed ring.

    Adjacent edges may share only their common vertex; non-adjacent edges
    must not touch at all.  Zero-length edges and spikes (an edge folding
    straight back onto its predecessor) are rejected.
    """
    n = len(vertices)
    if n < 3:
        return False
    edges = polygon_edges(vertices)
    for a, b in edges:
        if math.dist(a, b) <= _EPS:
            return False
    for i in range(n):
        a, b = edges[i]
        nxt = edges[(i + 1) % n]
        # Spike: the next edge heads straight back through this one.
        if abs(_orient(a, b, nxt[1])) <= _EPS and _on_segment(nxt[1], a, b) and math.dist(nxt[1], b) > _EPS:
            return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    return True


def point_strictly_inside(point: Point, vertices: tuple[Point, ...]) -> bool:
    """True iff the point lies in the polygon interior (boundary excluded)."""
    for a, b in polygon_edges(vertices):
        if abs(_orient(a, b, point)) <= _EPS and _on_segment(point, a, b):
            return False
    x, y = point
    inside = False
    for a, b in polygon_edges(vertices):
        (x1, y1), (x2, y2) = a, b
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > x:
                inside = not inside
    return inside


def _segment_edge_params(p: Point, q: Point, a: Point, b: Point) -> list[float]:
    """Parameters t in [0,1] where segment p+t(q-p) meets edge [a,b]."""
    rx, ry = q[0] - p[0], q[1] - p[1]
    sx, sy = b[0] - a[0], b[1] - a[1]
    denom = rx * sy - ry * sx
    qpx, qpy = a[0] - p[0], a[1] - p[1]
    if abs(denom) > _EPS:
        t = (qpx * sy - qpy * sx) / denom
        u = (qpx * ry - qpy * rx) / denom
        if -_EPS <= t <= 1 + _EPS and -_EPS <= u <= 1 + _EPS:
            return [min(max(t, 0.0), 1.0)]
        return []
    # Parallel: collinear overlap contributes both overlap ends.
    if abs(qpx * ry - qpy * rx) > _EPS:
        return []
    length2 = rx * rx + ry * ry
    if length2 <= _EPS:
        return []
    t0 = ((a[0] - p[0]) * rx + (a[1] - p[1]) * ry) / length2
    t1 = ((b[0] - p[0]) * rx + (b[1] - p[1]) * ry) / length2
    lo, hi = sorted((t0, t1))
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    return [lo, hi] if lo <= hi else []


def segment_intersects_interior(p: Point, q: Point, vertices: tuple[Point, ...]) -> bool:
    """True iff segment [p,q] passes through the polygon's interior.

    Touching the boundary (grazing a vertex or sliding along an edge) does
    not count.  The segment is cut at every boundary crossing and each piece
    is classified by its midpoint.
    """
    params = [0.0, 1.0]
    for a, b in polygon_edges(vertices):
        params.extend(_segment_edge_params(p, q, a, b))
    params = sorted(set(params))
    for t0, t1 in zip(params, params[1:]):
        if t1 - t0 <= _EPS:
            continue
        tm = (t0 + t1) / 2.0
        mid = (p[0] + tm * (q[0] - p[0]), p[1] + tm * (q[1] - p[1]))
        if point_strictly_inside(mid, vertices):
            return True
    return False


def scale_polygon(vertices: tuple[Point, ...], factor: float) -> tuple[Point, ...]:
    """Scale a polygon about its vertex centroid."""
    cx = sum(v[0] for v in vertices) / len(vertices)
    cy = sum(v[1] for v in vertices) / len(vertices)
    return tuple((cx + (x - cx) * factor, cy + (y - cy) * factor) for x, y in vertices)
