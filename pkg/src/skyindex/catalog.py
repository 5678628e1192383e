"""Catalog ingestion: CSV parsing, derived unit vectors and mesh ids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import htm


DEFAULT_HTM_DEPTH = 20


class CatalogError(ValueError):
    """Ingest failure; message carries line/column context."""


@dataclass(eq=False)
class Catalog:
    """Column-oriented point catalog with derived (x, y, z) and mesh ids."""

    objid: np.ndarray
    ra: np.ndarray
    dec: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    htm_depth: int = DEFAULT_HTM_DEPTH
    htmid: np.ndarray = field(default=None)
    _htm_order: np.ndarray = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.objid)

    def ensure_htm(self) -> np.ndarray:
        if self.htmid is None:
            self.htmid = htm.ids_for_points(self.x, self.y, self.z, self.htm_depth)
        return self.htmid

    def htm_order(self) -> np.ndarray:
        """Row permutation sorting the catalog by mesh id (cached)."""
        if self._htm_order is None:
            self._htm_order = np.argsort(self.ensure_htm(), kind="stable")
        return self._htm_order

    def points(self):
        """(objid, UnitVec3) pairs; handy for the region-store queries."""
        from .geom import UnitVec3

        return [
            (int(i), UnitVec3(float(px), float(py), float(pz)))
            for i, px, py, pz in zip(self.objid, self.x, self.y, self.z)
        ]


def from_arrays(
    objid,
    ra,
    dec,
    htm_depth: int = DEFAULT_HTM_DEPTH,
    compute_htm: bool = True,
) -> Catalog:
    objid = np.asarray(objid, dtype=np.int64)
    ra = np.mod(np.asarray(ra, dtype=float), 360.0)
    ra[ra >= 360.0] = 0.0  # fmod of a negative epsilon can round to 360
    dec = np.asarray(dec, dtype=float)
    if len(np.unique(objid)) != len(objid):
        raise CatalogError("duplicate objID")
    if len(dec) and (dec.min() < -90.0 or dec.max() > 90.0):
        raise CatalogError("dec out of range [-90, 90]")
    rr = np.radians(ra)
    dd = np.radians(dec)
    x = np.cos(dd) * np.cos(rr)
    y = np.cos(dd) * np.sin(rr)
    z = np.sin(dd)
    cat = Catalog(objid, ra, dec, x, y, z, htm_depth=htm_depth)
    if compute_htm:
        cat.ensure_htm()
    return cat


def from_points(pairs, htm_depth: int = DEFAULT_HTM_DEPTH) -> Catalog:
    """pairs: iterable of (objid, SkyPoint-or-(ra, dec))."""
    from .geom import SkyPoint

    ids, ras, decs = [], [], []
    for objid, p in pairs:
        if not isinstance(p, SkyPoint):
            p = SkyPoint(p[0], p[1])
        ids.append(int(objid))
        ras.append(p.ra)
        decs.append(p.dec)
    return from_arrays(ids, ras, decs, htm_depth=htm_depth)


def ingest_csv(path, htm_depth: int = DEFAULT_HTM_DEPTH) -> Catalog:
    """Read an objID,ra,dec CSV. ra is normalized into [0, 360); a dec
    outside [-90, 90], a malformed number, or a repeated objID is an error
    naming the offending line."""
    ids: list[int] = []
    ras: list[float] = []
    decs: list[float] = []
    seen: dict[int, int] = {}
    with open(path, "r", newline="") as fh:
        header = fh.readline()
        if header == "":
            raise CatalogError(f"{path}: empty file, expected objID,ra,dec header")
        cols = [c.strip().lower() for c in header.strip().split(",")]
        if cols != ["objid", "ra", "dec"]:
            raise CatalogError(
                f"{path}:1: expected header objID,ra,dec, got {header.strip()!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise CatalogError(
                    f"{path}:{lineno}: expected 3 comma-separated fields, got {len(parts)}"
                )
            try:
                objid = int(parts[0].strip())
            except ValueError:
                raise CatalogError(
                    f"{path}:{lineno}: column 1: invalid objID {parts[0].strip()!r}"
                ) from None
            values = []
            for col, text in enumerate(parts[1:], start=2):
                try:
                    values.append(float(text.strip()))
                except ValueError:
                    raise CatalogError(
                        f"{path}:{lineno}: column {col}: invalid number {text.strip()!r}"
                    ) from None
            ra, dec = values
            if not (-90.0 <= dec <= 90.0):
                raise CatalogError(
                    f"{path}:{lineno}: dec out of range [-90, 90]: {dec!r}"
                )
            if objid in seen:
                raise CatalogError(
                    f"{path}:{lineno}: duplicate objID {objid} (first at line {seen[objid]})"
                )
            seen[objid] = lineno
            ids.append(objid)
            ras.append(ra)  # from_arrays normalizes into [0, 360)
            decs.append(dec)
    return from_arrays(ids, ras, decs, htm_depth=htm_depth)


def htm_cone_search(
    cat: Catalog,
    center,
    radius,
    max_ranges: int = 20,
    max_depth: int | None = None,
) -> list[tuple[int, float]]:
    """Cone search through the mesh index: cover the circle with trixel
    ranges, range-scan the id-sorted catalog, then run the exact chord
    filter on the candidates."""
    from .geom import Convex, Region, as_degrees, circle_to_halfspace, sky_to_vec

    r = as_degrees(radius)
    depth_cap = cat.htm_depth if max_depth is None else min(max_depth, cat.htm_depth)
    v = sky_to_vec(center)
    region = Region((Convex((circle_to_halfspace(v, r),)),))
    ranges = htm.cover(region, max_ranges=max_ranges, max_depth=depth_cap)
    if not ranges:
        return []
    ids = cat.ensure_htm()
    order = cat.htm_order()
    sorted_ids = ids[order]
    cover_depth = (ranges[0][0].bit_length() - 4) // 2
    shift = 2 * (cat.htm_depth - cover_depth)
    limit = 4.0 * math.sin(math.radians(r) / 2.0) ** 2
    found_ids = []
    found_d2 = []
    for lo, hi in ranges:
        a = int(np.searchsorted(sorted_ids, lo << shift, side="left"))
        b = int(np.searchsorted(sorted_ids, ((hi + 1) << shift) - 1, side="right"))
        if b <= a:
            continue
        idx = order[a:b]
        dx = cat.x[idx] - v.x
        dy = cat.y[idx] - v.y
        dz = cat.z[idx] - v.z
        d2 = dx * dx + dy * dy + dz * dz
        hit = d2 < limit
        found_ids.append(cat.objid[idx][hit])
        found_d2.append(d2[hit])
    if not found_ids:
        return []
    oid = np.concatenate(found_ids)
    d2 = np.concatenate(found_d2)
    dist = np.degrees(2.0 * np.arcsin(np.sqrt(d2) / 2.0))
    idx = np.lexsort((oid, dist))
    return [(int(i), float(d)) for i, d in zip(oid[idx], dist[idx])]


def random_catalog(n: int, seed: int, compute_htm: bool = False) -> Catalog:
    """The benchmark fixture: n points uniform on the sphere.

    Generator: numpy default_rng(seed); ra = uniform[0, 360),
    dec = degrees(arcsin(uniform[-1, 1])); objid = 0..n-1.
    """
    rng = np.random.default_rng(seed)
    ra = rng.uniform(0.0, 360.0, n)
    dec = np.degrees(np.arcsin(rng.uniform(-1.0, 1.0, n)))
    return from_arrays(np.arange(n, dtype=np.int64), ra, dec, compute_htm=compute_htm)
