"""Hierarchical triangular mesh: trixel ids, point lookup, region covers.

The sphere is split into 8 octahedral faces, each subdivided as a
quad-tree by joining normalized edge midpoints. A depth-d trixel id packs
a leading marker bit, 3 face bits and d two-bit child digits, so ids at
depth d occupy 4 + 2d bits and faces are ids 8..15. Containment is the
prefix relation: a trixel contains another iff its id is a bit-prefix of
the other's.

Faces 0..3 (ids 8..11) tile the northern hemisphere anticlockwise from
ra 0, faces 4..7 the southern. Child digit i keeps parent corner i with
the two adjacent edge midpoints; digit 3 is the central midpoint triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import Convex, Region, UnitVec3, arc_distance_deg

MAX_DEPTH = 30

_EQ = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (-1.0, 0.0, 0.0), (0.0, -1.0, 0.0))
_NP = (0.0, 0.0, 1.0)
_SP = (0.0, 0.0, -1.0)

FACE_CORNERS: tuple[tuple[tuple[float, float, float], ...], ...] = tuple(
    [(_EQ[k], _EQ[(k + 1) % 4], _NP) for k in range(4)]
    + [(_EQ[(k + 1) % 4], _EQ[k], _SP) for k in range(4)]
)

_TIE_EPS = -1e-15

INSIDE = 1
PARTIAL = 0
OUTSIDE = -1


class HtmError(ValueError):
    """Malformed trixel id or out-of-range depth."""


@dataclass(frozen=True)
class Trixel:
    v0: UnitVec3
    v1: UnitVec3
    v2: UnitVec3

    def corners(self) -> tuple[UnitVec3, UnitVec3, UnitVec3]:
        return (self.v0, self.v1, self.v2)


def base_trixels() -> list[Trixel]:
    """The 8 octahedral faces, in face order (ids 8..15)."""
    return [Trixel(*(UnitVec3(*c) for c in corners)) for corners in FACE_CORNERS]


def _mid(a, b):
    x, y, z = a[0] + b[0], a[1] + b[1], a[2] + b[2]
    n = math.sqrt(x * x + y * y + z * z)
    return (x / n, y / n, z / n)


def _children(corners):
    v0, v1, v2 = corners
    w0 = _mid(v1, v2)
    w1 = _mid(v2, v0)
    w2 = _mid(v0, v1)
    return ((v0, w2, w1), (v1, w0, w2), (v2, w1, w0), (w0, w1, w2))


def subdivide(t: Trixel) -> list[Trixel]:
    """The 4 child trixels: corners 0..2 keep a parent corner, 3 is central."""
    kids = _children((t.v0.as_tuple(), t.v1.as_tuple(), t.v2.as_tuple()))
    return [Trixel(*(UnitVec3(*c) for c in kid)) for kid in kids]


def _edge_dots(corners, p):
    (ax, ay, az), (bx, by, bz), (cx, cy, cz) = corners
    px, py, pz = p
    d0 = (ay * bz - az * by) * px + (az * bx - ax * bz) * py + (ax * by - ay * bx) * pz
    d1 = (by * cz - bz * cy) * px + (bz * cx - bx * cz) * py + (bx * cy - by * cx) * pz
    d2 = (cy * az - cz * ay) * px + (cz * ax - cx * az) * py + (cx * ay - cy * ax) * pz
    return d0, d1, d2


def _contains(corners, p, eps=_TIE_EPS) -> bool:
    d0, d1, d2 = _edge_dots(corners, p)
    return d0 >= eps and d1 >= eps and d2 >= eps


def _pick(cands, p):
    """First candidate whose edge tests all pass; else the most-interior one."""
    best_i = 0
    best_min = -math.inf
    for i, corners in enumerate(cands):
        m = min(_edge_dots(corners, p))
        if m >= _TIE_EPS:
            return i, corners
        if m > best_min:
            best_min = m
            best_i = i
    return best_i, cands[best_i]


def point_to_id(p: UnitVec3, depth: int) -> int:
    """Trixel id at the given depth containing p. Deterministic on edges:
    the lowest face/child digit whose (non-strict) plane tests pass wins."""
    if not (0 <= depth <= MAX_DEPTH):
        raise HtmError(f"depth out of range 0..{MAX_DEPTH}: {depth}")
    pt = (p.x, p.y, p.z)
    face, corners = _pick(FACE_CORNERS, pt)
    hid = 8 + face
    for _ in range(depth):
        digit, corners = _pick(_children(corners), pt)
        hid = (hid << 2) | digit
    return hid


def id_depth(hid: int) -> int:
    """Depth encoded in the id's bit length; raises on malformed ids."""
    if hid < 8:
        raise HtmError(f"not a trixel id (no leading marker): {hid}")
    bl = hid.bit_length()
    if bl % 2 != 0:
        raise HtmError(f"malformed trixel id (odd bit length): {hid}")
    depth = (bl - 4) // 2
    if depth > MAX_DEPTH:
        raise HtmError(f"trixel id deeper than {MAX_DEPTH}: {hid}")
    return depth


def parent(hid: int) -> int:
    if id_depth(hid) == 0:
        raise HtmError(f"face trixel has no parent: {hid}")
    return hid >> 2


def children_ids(hid: int) -> tuple[int, int, int, int]:
    id_depth(hid)
    return (hid << 2, (hid << 2) | 1, (hid << 2) | 2, (hid << 2) | 3)


def _corners_of_id(hid: int):
    depth = id_depth(hid)
    face = hid >> (2 * depth)
    corners = FACE_CORNERS[face - 8]
    for level in range(depth - 1, -1, -1):
        digit = (hid >> (2 * level)) & 3
        corners = _children(corners)[digit]
    return corners


def id_to_trixel(hid: int) -> Trixel:
    corners = _corners_of_id(hid)
    return Trixel(*(UnitVec3(*c) for c in corners))


def prefix_contains(a: int, b: int) -> bool:
    """True iff trixel a contains trixel b (a's id is a digit-prefix of b's)."""
    da, db = id_depth(a), id_depth(b)
    if da > db:
        return False
    return (b >> (2 * (db - da))) == a


def trixel_area_sr(t: Trixel) -> float:
    """Spherical area (steradians) by Girard's excess."""
    corners = [t.v0.as_tuple(), t.v1.as_tuple(), t.v2.as_tuple()]

    def _cross(u, v):
        return (
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        )

    total = 0.0
    for i in range(3):
        a, b, c = corners[i], corners[(i + 1) % 3], corners[(i + 2) % 3]
        ab = _cross(a, b)
        ac = _cross(a, c)
        num = ab[0] * ac[0] + ab[1] * ac[1] + ab[2] * ac[2]
        den = math.sqrt(
            (ab[0] ** 2 + ab[1] ** 2 + ab[2] ** 2)
            * (ac[0] ** 2 + ac[1] ** 2 + ac[2] ** 2)
        )
        total += math.acos(max(-1.0, min(1.0, num / den)))
    return total - math.pi


def trixel_max_edge_deg(t: Trixel) -> float:
    c = t.corners()
    return max(arc_distance_deg(c[i], c[(i + 1) % 3]) for i in range(3))


# -- trixel vs region classification ----------------------------------------


def _circle_intersects_arc(n, l, a, b) -> bool:
    """Does the small circle {p . n = l} meet the great arc from a to b?"""
    ex = a[1] * b[2] - a[2] * b[1]
    ey = a[2] * b[0] - a[0] * b[2]
    ez = a[0] * b[1] - a[1] * b[0]
    en = math.sqrt(ex * ex + ey * ey + ez * ez)
    if en < 1e-15:
        return False
    ex, ey, ez = ex / en, ey / en, ez / en
    # p(t) = a cos t + w sin t walks the great circle from a toward b
    wx = ey * a[2] - ez * a[1]
    wy = ez * a[0] - ex * a[2]
    wz = ex * a[1] - ey * a[0]
    nu = n[0] * a[0] + n[1] * a[1] + n[2] * a[2]
    nw = n[0] * wx + n[1] * wy + n[2] * wz
    amp = math.hypot(nu, nw)
    if amp < abs(l):
        return False
    span = math.atan2(en, a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
    phi = math.atan2(nw, nu)
    delta = math.acos(max(-1.0, min(1.0, l / amp))) if amp > 0 else 0.0
    for t in (phi - delta, phi + delta):
        t %= 2.0 * math.pi
        if -1e-12 <= t <= span + 1e-12:
            return True
    return False


def _classify_halfspace(corners, normal, l) -> int:
    n = normal
    d = [
        n[0] * c[0] + n[1] * c[1] + n[2] * c[2]
        for c in corners
    ]
    edges = ((corners[0], corners[1]), (corners[1], corners[2]), (corners[2], corners[0]))
    if any(_circle_intersects_arc(n, l, a, b) for a, b in edges):
        return PARTIAL
    # No boundary crossing: either the boundary circle sits wholly inside
    # the trixel, or the trixel is entirely on one side of it.
    if abs(l) < 1.0:
        if abs(n[2]) < 0.9:
            tx, ty, tz = -n[1], n[0], 0.0
        else:
            tx, ty, tz = n[2], 0.0, -n[0]
        tn = math.sqrt(tx * tx + ty * ty + tz * tz)
        s = math.sqrt(max(0.0, 1.0 - l * l))
        q = (l * n[0] + s * tx / tn, l * n[1] + s * ty / tn, l * n[2] + s * tz / tn)
        if _contains(corners, q):
            return PARTIAL
    else:
        if l >= 1.0:
            return OUTSIDE  # open cap {p.n > 1} is empty
        # l = -1: everything but the antipodal point
        anti = (-n[0], -n[1], -n[2])
        return PARTIAL if _contains(corners, anti) else INSIDE
    if all(x > l for x in d):
        return INSIDE
    if all(x < l for x in d):
        return OUTSIDE
    return PARTIAL


def classify_trixel_convex(t_corners, c: Convex) -> int:
    """Conservative: INSIDE/OUTSIDE only when provable, else PARTIAL."""
    verdict = INSIDE
    for h in c.constraints:
        r = _classify_halfspace(t_corners, h.normal.as_tuple(), h.l)
        if r == OUTSIDE:
            return OUTSIDE
        if r == PARTIAL:
            verdict = PARTIAL
    return verdict


def classify_trixel(t: Trixel, c: Convex) -> int:
    return classify_trixel_convex(
        (t.v0.as_tuple(), t.v1.as_tuple(), t.v2.as_tuple()), c
    )


def _classify_region(t_corners, r: Region) -> int:
    verdict = OUTSIDE
    for c in r.convexes:
        res = classify_trixel_convex(t_corners, c)
        if res == INSIDE:
            return INSIDE
        if res == PARTIAL:
            verdict = PARTIAL
    return verdict


# -- region cover ------------------------------------------------------------


def cover(region: Region, max_ranges: int = 20, max_depth: int = 20) -> list[tuple[int, int]]:
    """Sound trixel-range cover of a region.

    Breadth-first refinement of boundary trixels; fully-inside trixels are
    accepted whole, refinement stops once the budget is hit and remaining
    boundary trixels are accepted conservatively. All ranges are emitted at
    the deepest level reached, sorted, disjoint and coalesced; if more than
    max_ranges remain, nearest ranges are merged (which only widens the
    cover, never drops any of it).
    """
    if max_ranges < 1:
        raise HtmError("max_ranges must be >= 1")
    if not (0 <= max_depth <= MAX_DEPTH):
        raise HtmError(f"max_depth out of range 0..{MAX_DEPTH}")
    accepted: list[tuple[int, int]] = []  # (id, depth)
    frontier = [(8 + f, FACE_CORNERS[f]) for f in range(8)]
    depth = 0
    while True:
        boundary = []
        for hid, corners in frontier:
            res = _classify_region(corners, region)
            if res == INSIDE:
                accepted.append((hid, depth))
            elif res == PARTIAL:
                boundary.append((hid, corners))
        if not boundary:
            deepest = depth
            break
        if depth >= max_depth or len(boundary) > max_ranges:
            accepted.extend((hid, depth) for hid, _ in boundary)
            deepest = depth
            break
        frontier = [
            ((hid << 2) | digit, kid)
            for hid, corners in boundary
            for digit, kid in enumerate(_children(corners))
        ]
        depth += 1
    if not accepted:
        return []
    ranges = []
    for hid, d in accepted:
        shift = 2 * (deepest - d)
        ranges.append((hid << shift, ((hid + 1) << shift) - 1))
    ranges.sort()
    merged = [ranges[0]]
    for lo, hi in ranges[1:]:
        mlo, mhi = merged[-1]
        if lo <= mhi + 1:
            merged[-1] = (mlo, max(mhi, hi))
        else:
            merged.append((lo, hi))
    while len(merged) > max_ranges:
        gap_at = min(
            range(1, len(merged)),
            key=lambda i: merged[i][0] - merged[i - 1][1],
        )
        lo = merged[gap_at - 1][0]
        hi = merged[gap_at][1]
        merged[gap_at - 1 : gap_at + 1] = [(lo, hi)]
    return merged


# -- vectorized id computation ----------------------------------------------


def ids_for_points(x: np.ndarray, y: np.ndarray, z: np.ndarray, depth: int) -> np.ndarray:
    """point_to_id for arrays of unit-vector components (same tie-breaks)."""
    if not (0 <= depth <= MAX_DEPTH):
        raise HtmError(f"depth out of range 0..{MAX_DEPTH}: {depth}")
    pts = np.stack([np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)], axis=1)
    n = pts.shape[0]
    faces = np.array([FACE_CORNERS[f] for f in range(8)])  # (8, 3, 3)
    mind = np.empty((n, 8))
    for f in range(8):
        mind[:, f] = _min_edge_dots_arr(faces[f, 0], faces[f, 1], faces[f, 2], pts)
    choice = _pick_arr(mind)
    ids = (8 + choice).astype(np.int64)
    a = faces[choice, 0]
    b = faces[choice, 1]
    c = faces[choice, 2]
    for _ in range(depth):
        w0 = _mid_arr(b, c)
        w1 = _mid_arr(c, a)
        w2 = _mid_arr(a, b)
        kids = ((a, w2, w1), (b, w0, w2), (c, w1, w0), (w0, w1, w2))
        mind = np.empty((n, 4))
        for i, (p0, p1, p2) in enumerate(kids):
            mind[:, i] = _min_edge_dots_arr(p0, p1, p2, pts)
        choice = _pick_arr(mind)
        ids = (ids << 2) | choice
        na, nb, nc = np.empty_like(a), np.empty_like(b), np.empty_like(c)
        for i, (p0, p1, p2) in enumerate(kids):
            m = choice == i
            na[m] = p0[m]
            nb[m] = p1[m]
            nc[m] = p2[m]
        a, b, c = na, nb, nc
    return ids


def _mid_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = a + b
    return s / np.sqrt((s * s).sum(axis=-1, keepdims=True))


def _min_edge_dots_arr(a, b, c, pts) -> np.ndarray:
    d0 = (np.cross(a, b) * pts).sum(axis=-1)
    d1 = (np.cross(b, c) * pts).sum(axis=-1)
    d2 = (np.cross(c, a) * pts).sum(axis=-1)
    return np.minimum(np.minimum(d0, d1), d2)


def _pick_arr(mind: np.ndarray) -> np.ndarray:
    ok = mind >= _TIE_EPS
    first_ok = ok.argmax(axis=1)
    fallback = mind.argmax(axis=1)
    return np.where(ok.any(axis=1), first_ok, fallback).astype(np.int64)
