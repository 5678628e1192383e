"""Region store and boolean algebra over half-space constraint tables.

Regions live in a store as numbered sets of convexes, each convex a
numbered set of half-space constraints; region ids are never reused. The
boolean operations work structurally: OR concatenates convex lists, AND
forms the NxM pairwise constraint union, NOT expands a convex's complement
into disjoint convexes (prefix-conjunction form) and folds multi-convex
complements through the AND product.

Simplification rests on two exact cap relations. A constraint is the open
cap of angular radius acos(l) about its normal, so for caps A and B:
A contains B iff angle(centers) + radius(B) <= radius(A), and A, B are
disjoint iff angle(centers) >= radius(A) + radius(B). Contained-cap
constraints are redundant, a disjoint pair empties its convex, and the
same relations decide convex-in-convex containment and the
(A and B) or (A and not B) merge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import (
    Convex,
    HalfSpace,
    Region,
    UnitVec3,
    angle_between_deg,
    inside_convex,
    negate_halfspace,
)

_TOL_DEG = 1e-9
_MAX_TYPE_LEN = 16


class RegionStoreError(ValueError):
    """Unknown ids, bad arguments, or constraint-table violations."""


@dataclass
class StoredConvex:
    convex_id: int
    constraints: list[tuple[int, HalfSpace]] = field(default_factory=list)
    next_halfspace_id: int = 1

    def halfspaces(self) -> list[HalfSpace]:
        return [h for _, h in self.constraints]


@dataclass
class StoredRegion:
    region_id: int
    rtype: str
    comment: str
    convexes: list[StoredConvex] = field(default_factory=list)
    next_convex_id: int = 1

    def geometry(self) -> Region:
        return Region(tuple(Convex(tuple(c.halfspaces())) for c in self.convexes))


@dataclass(frozen=True)
class CompiledPredicate:
    """Store-independent, immutable containment test for one region."""

    convexes: tuple[tuple[np.ndarray, np.ndarray], ...]  # (normals (k,3), ls (k,))

    def evaluate(self, p: UnitVec3) -> bool:
        v = np.array(p.as_tuple())
        return any((normals @ v > ls).all() for normals, ls in self.convexes)

    def evaluate_batch(self, xyz: np.ndarray) -> np.ndarray:
        """xyz: (n, 3) unit vectors -> boolean mask."""
        n = xyz.shape[0]
        out = np.zeros(n, dtype=bool)
        for normals, ls in self.convexes:
            out |= ((xyz @ normals.T) > ls).all(axis=1)
        return out

    @property
    def text(self) -> str:
        if not self.convexes:
            return "false"
        parts = []
        for normals, ls in self.convexes:
            if len(ls) == 0:
                parts.append("true")
                continue
            terms = [
                f"(p.x*{float(nx)!r} + p.y*{float(ny)!r} + p.z*{float(nz)!r} > {float(l)!r})"
                for (nx, ny, nz), l in zip(normals, ls)
            ]
            parts.append("and(" + ", ".join(terms) + ")")
        return "or(" + ", ".join(parts) + ")"


# -- geometric simplification (shared by the store and NOT) -----------------


def _cap_radius(h: HalfSpace) -> float:
    return math.degrees(math.acos(min(1.0, max(-1.0, h.l))))


def _contains_cap(outer: HalfSpace, inner: HalfSpace) -> bool:
    return (
        angle_between_deg(outer.normal, inner.normal) + _cap_radius(inner)
        <= _cap_radius(outer) + _TOL_DEG
    )


def _disjoint_caps(a: HalfSpace, b: HalfSpace) -> bool:
    return (
        angle_between_deg(a.normal, b.normal)
        >= _cap_radius(a) + _cap_radius(b) - _TOL_DEG
    )


def simplify_convex(halfspaces: list[HalfSpace]) -> list[HalfSpace] | None:
    """Drop implied constraints, detect provable emptiness (None)."""
    kept = [h for h in halfspaces if h.l > -1.0]
    for h in kept:
        if h.l >= 1.0:
            return None
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            if _disjoint_caps(kept[i], kept[j]):
                return None
    # weakest-first removal so mutual (equal) caps keep exactly one
    alive = [True] * len(kept)
    for j in range(len(kept)):
        for i in range(len(kept)):
            if i == j or not alive[i] or not alive[j]:
                continue
            if _contains_cap(kept[j], kept[i]):
                alive[j] = False
                break
    return [h for h, ok in zip(kept, alive) if ok]


def _constraints_equal(a: HalfSpace, b: HalfSpace) -> bool:
    return (
        a.normal.dot(b.normal) >= 1.0 - 1e-12 and abs(a.l - b.l) <= 1e-12
    )


def _constraints_negated(a: HalfSpace, b: HalfSpace) -> bool:
    return (
        a.normal.dot(b.normal) <= -1.0 + 1e-12 and abs(a.l + b.l) <= 1e-12
    )


def _convex_in_convex(inner: list[HalfSpace], outer: list[HalfSpace]) -> bool:
    """Sufficient test: every outer constraint is implied by some inner one."""
    return all(any(_contains_cap(b, a) for a in inner) for b in outer)


def _try_merge(ca: list[HalfSpace], cb: list[HalfSpace]) -> list[HalfSpace] | None:
    """(A and b) or (A and not b) -> A, for convexes differing in one
    negated constraint."""
    if len(ca) != len(cb) or not ca:
        return None
    used = [False] * len(cb)
    odd_a = None
    for a in ca:
        hit = False
        for j, b in enumerate(cb):
            if not used[j] and _constraints_equal(a, b):
                used[j] = True
                hit = True
                break
        if not hit:
            if odd_a is not None:
                return None
            odd_a = a
    if odd_a is None:
        return None  # identical convexes; containment rule handles them
    odd_b = [b for j, b in enumerate(cb) if not used[j]]
    if len(odd_b) != 1 or not _constraints_negated(odd_a, odd_b[0]):
        return None
    return [a for a in ca if a is not odd_a]


def simplify_region_geometry(convex_lists: list[list[HalfSpace]]) -> list[list[HalfSpace]]:
    """Full membership-preserving reduction, run to a fixpoint."""
    convexes = []
    for cl in convex_lists:
        s = simplify_convex(list(cl))
        if s is not None:
            convexes.append(s)
    changed = True
    while changed:
        changed = False
        # merge (A and b) | (A and not b)
        for i in range(len(convexes)):
            for j in range(i + 1, len(convexes)):
                merged = _try_merge(convexes[i], convexes[j])
                if merged is not None:
                    merged = simplify_convex(merged)
                    keep = [
                        c for k, c in enumerate(convexes) if k != i and k != j
                    ]
                    if merged is not None:
                        keep.append(merged)
                    convexes = keep
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        # drop convexes contained in another
        for i in range(len(convexes)):
            for j in range(len(convexes)):
                if i != j and _convex_in_convex(convexes[i], convexes[j]):
                    # i is inside j: i is redundant; on mutual containment
                    # (equal convexes) keep the earlier index
                    if i < j and _convex_in_convex(convexes[j], convexes[i]):
                        continue
                    convexes.pop(i)
                    changed = True
                    break
            if changed:
                break
    return convexes


def complement_convex_lists(halfspaces: list[HalfSpace]) -> list[list[HalfSpace]]:
    """Disjoint complement of one convex: the j-th output keeps constraints
    1..j-1 and negates the j-th, so outputs are pairwise disjoint."""
    out = []
    for j in range(len(halfspaces)):
        out.append(list(halfspaces[:j]) + [negate_halfspace(halfspaces[j])])
    return out


# -- the store ---------------------------------------------------------------


class RegionStore:
    """Mutable catalog of named regions. Single-writer, multi-reader."""

    def __init__(self):
        self.regions: dict[int, StoredRegion] = {}
        self._next_region_id = 1

    # construction

    def region_new(self, rtype: str, comment: str = "") -> int:
        if len(rtype) > _MAX_TYPE_LEN:
            raise RegionStoreError(
                f"region type longer than {_MAX_TYPE_LEN} chars: {rtype!r}"
            )
        rid = self._next_region_id
        self._next_region_id += 1
        self.regions[rid] = StoredRegion(rid, rtype, comment)
        return rid

    def _get(self, rid: int) -> StoredRegion:
        try:
            return self.regions[rid]
        except KeyError:
            raise RegionStoreError(f"unknown regionID: {rid}") from None

    def region_new_convex(self, rid: int) -> int:
        reg = self._get(rid)
        cid = reg.next_convex_id
        reg.next_convex_id += 1
        reg.convexes.append(StoredConvex(cid))
        return cid

    def region_new_convex_constraint(
        self, rid: int, cid: int, x: float, y: float, z: float, l: float
    ) -> int:
        reg = self._get(rid)
        for convex in reg.convexes:
            if convex.convex_id == cid:
                break
        else:
            raise RegionStoreError(f"unknown convexID {cid} in region {rid}")
        if not (-1.0 <= l <= 1.0):
            raise RegionStoreError(f"constraint length outside [-1, 1]: {l!r}")
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0:
            raise RegionStoreError("constraint normal must be non-zero")
        hid = convex.next_halfspace_id
        convex.next_halfspace_id += 1
        convex.constraints.append(
            (hid, HalfSpace(UnitVec3(x / n, y / n, z / n), l))
        )
        return hid

    def region_drop(self, rid: int) -> None:
        self._get(rid)
        del self.regions[rid]

    # boolean algebra

    def _new_from_convex_lists(
        self, lists: list[list[HalfSpace]], rtype: str, comment: str
    ) -> int:
        rid = self.region_new(rtype, comment)
        for halfspaces in lists:
            cid = self.region_new_convex(rid)
            for h in halfspaces:
                self.region_new_convex_constraint(
                    rid, cid, h.normal.x, h.normal.y, h.normal.z, h.l
                )
        return rid

    def _convex_lists(self, rid: int) -> list[list[HalfSpace]]:
        return [c.halfspaces() for c in self._get(rid).convexes]

    def region_or(self, id1: int, id2: int, rtype: str, comment: str = "") -> int:
        lists = self._convex_lists(id1) + self._convex_lists(id2)
        return self._new_from_convex_lists(lists, rtype, comment)

    def region_and(self, id1: int, id2: int, rtype: str, comment: str = "") -> int:
        lists = [
            a + b for a in self._convex_lists(id1) for b in self._convex_lists(id2)
        ]
        return self._new_from_convex_lists(lists, rtype, comment)

    def region_not(self, id1: int, rtype: str, comment: str = "") -> int:
        sources = self._convex_lists(id1)
        if not sources:
            acc: list[list[HalfSpace]] = [[]]  # complement of empty is the sphere
        else:
            acc = complement_convex_lists(sources[0])
            for cvx in sources[1:]:
                comp = complement_convex_lists(cvx)
                acc = [a + c for a in acc for c in comp]
                acc = simplify_region_geometry(acc)
        return self._new_from_convex_lists(acc, rtype, comment)

    def region_simplify(self, rid: int) -> None:
        reg = self._get(rid)
        reduced = simplify_region_geometry([c.halfspaces() for c in reg.convexes])
        reg.convexes = []
        for halfspaces in reduced:
            cid = reg.next_convex_id
            reg.next_convex_id += 1
            convex = StoredConvex(cid)
            for h in halfspaces:
                hid = convex.next_halfspace_id
                convex.next_halfspace_id += 1
                convex.constraints.append((hid, h))
            reg.convexes.append(convex)

    # queries

    def geometry(self, rid: int) -> Region:
        return self._get(rid).geometry()

    def regions_on_point(self, p: UnitVec3) -> list[tuple[int, int]]:
        """(regionID, convexID) for every convex containing p: a convex
        counts when zero of its half-spaces exclude the point."""
        hits = []
        for rid in sorted(self.regions):
            for convex in self.regions[rid].convexes:
                excluded = sum(
                    1 for _, h in convex.constraints if p.dot(h.normal) <= h.l
                )
                if excluded == 0:
                    hits.append((rid, convex.convex_id))
        return hits

    def points_in_region(
        self, points: list[tuple[int, UnitVec3]], rid: int
    ) -> list[int]:
        pred = self.region_predicate(rid)
        if not points:
            return []
        xyz = np.array([p.as_tuple() for _, p in points])
        mask = pred.evaluate_batch(xyz)
        return [pid for (pid, _), ok in zip(points, mask) if ok]

    def region_predicate(self, rid: int) -> CompiledPredicate:
        reg = self._get(rid)
        compiled = []
        for convex in reg.convexes:
            hs = convex.halfspaces()
            normals = np.array([h.normal.as_tuple() for h in hs]).reshape(len(hs), 3)
            ls = np.array([h.l for h in hs])
            compiled.append((normals, ls))
        return CompiledPredicate(tuple(compiled))

    # introspection / persistence

    def records(self):
        """Plain-structure dump: (rid, type, comment, [(cid, [(hid, x, y, z, l)])])."""
        out = []
        for rid in sorted(self.regions):
            reg = self.regions[rid]
            out.append(
                (
                    rid,
                    reg.rtype,
                    reg.comment,
                    [
                        (
                            c.convex_id,
                            [
                                (hid, h.normal.x, h.normal.y, h.normal.z, h.l)
                                for hid, h in c.constraints
                            ],
                        )
                        for c in reg.convexes
                    ],
                )
            )
        return out

    def contains(self, rid: int, p: UnitVec3) -> bool:
        return any(
            inside_convex(c, p) for c in self.geometry(rid).convexes
        )

    def export_state(self):
        """Counters plus full records, sufficient to reconstruct the store."""
        counters = {
            rid: (reg.next_convex_id, [c.next_halfspace_id for c in reg.convexes])
            for rid, reg in self.regions.items()
        }
        return self._next_region_id, self.records(), counters

    @classmethod
    def import_state(cls, state) -> "RegionStore":
        next_rid, records, counters = state
        store = cls()
        store._next_region_id = next_rid
        for rid, rtype, comment, convexes in records:
            reg = StoredRegion(rid, rtype, comment)
            next_cid, hid_counters = counters[rid]
            reg.next_convex_id = next_cid
            for (cid, constraints), next_hid in zip(convexes, hid_counters):
                convex = StoredConvex(cid)
                convex.next_halfspace_id = next_hid
                for hid, x, y, z, l in constraints:
                    convex.constraints.append((hid, HalfSpace(UnitVec3(x, y, z), l)))
                reg.convexes.append(convex)
            store.regions[rid] = reg
        return store
