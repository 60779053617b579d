"""Planar polygon arithmetic: projection, area, boolean clipping, triangulation.

All boolean operations run in 2D after projecting onto a shared plane basis.
Clipping itself is delegated to shapely (GEOS) with vertex snapping; every
other quantity (areas, triangulation) is computed here so tests can check the
two routes against each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np
import shapely
from shapely.geometry import Polygon as ShapelyPolygon
from shapely.geometry.polygon import orient

Point3 = tuple[float, float, float]
Point2 = tuple[float, float]
Ring3 = tuple[Point3, ...]
Ring2 = tuple[Point2, ...]


class GeometryError(Exception):
    pass


class NonPlanar(GeometryError):
    pass


@dataclass(frozen=True)
class Tolerances:
    coplanar_tol: float = 1e-4   # m
    snap_tol: float = 1e-6       # m
    angle_tol: float = 1e-3      # rad
    min_area: float = 0.01       # m^2

    def __post_init__(self):
        for name in ("coplanar_tol", "snap_tol", "angle_tol", "min_area"):
            if getattr(self, name) <= 0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOLERANCES = Tolerances()


def _as_point3(p) -> Point3:
    x, y, z = p
    return (float(x), float(y), float(z))


def _as_ring3(ring) -> Ring3:
    return tuple(_as_point3(p) for p in ring)


@dataclass(frozen=True)
class PlanarPolygon:
    """A planar polygon in 3D: support plane plus outer ring and hole rings.

    Outer ring is counter-clockwise when viewed against the normal,
    holes clockwise.
    """
    origin: Point3
    normal: Point3
    outer: Ring3
    holes: tuple[Ring3, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_point3(self.origin))
        object.__setattr__(self, "normal", _as_point3(self.normal))
        object.__setattr__(self, "outer", _as_ring3(self.outer))
        object.__setattr__(self, "holes", tuple(_as_ring3(h) for h in self.holes))

    def plane_offset(self) -> float:
        return float(np.dot(self.origin, self.normal))

    def max_plane_deviation(self) -> float:
        n = np.asarray(self.normal)
        o = np.asarray(self.origin)
        dev = 0.0
        for ring in (self.outer, *self.holes):
            pts = np.asarray(ring)
            dev = max(dev, float(np.abs((pts - o) @ n).max()))
        return dev

    def area(self, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
        return area(project(self, tol))


@dataclass(frozen=True)
class Basis:
    """Orthonormal frame mapping plane coordinates (u, v) back to 3D."""
    origin: Point3
    u: Point3
    v: Point3

    @property
    def normal(self) -> Point3:
        n = np.cross(self.u, self.v)
        return (float(n[0]), float(n[1]), float(n[2]))

    def to_2d(self, points: Iterable[Point3]) -> list[Point2]:
        o = np.asarray(self.origin)
        u = np.asarray(self.u)
        v = np.asarray(self.v)
        pts = np.asarray(list(points)) - o
        return [(float(p @ u), float(p @ v)) for p in pts]

    def to_3d(self, points: Iterable[Point2]) -> list[Point3]:
        o = np.asarray(self.origin)
        u = np.asarray(self.u)
        v = np.asarray(self.v)
        return [tuple((o + a * u + b * v).tolist()) for a, b in points]


@dataclass(frozen=True)
class Polygon2D:
    outer: Ring2
    holes: tuple[Ring2, ...]
    basis: Basis

    def shapely(self) -> ShapelyPolygon:
        return ShapelyPolygon(self.outer, [list(h) for h in self.holes])


def basis_for_normal(origin: Point3, normal: Sequence[float]) -> Basis:
    """Deterministic orthonormal frame with u x v = normal."""
    n = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise GeometryError("zero normal")
    n = n / norm
    # pick the world axis least aligned with the normal as seed
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(n)))] = 1.0
    u = np.cross(seed, n)
    u = u / np.linalg.norm(u)
    v = np.cross(n, u)
    return Basis(_as_point3(origin), tuple(u.tolist()), tuple(v.tolist()))


def ring_area_2d(ring: Sequence[Point2]) -> float:
    """Signed shoelace area (positive for counter-clockwise rings)."""
    a = 0.0
    m = len(ring)
    for i in range(m):
        x0, y0 = ring[i]
        x1, y1 = ring[(i + 1) % m]
        a += x0 * y1 - x1 * y0
    return a / 2.0


def project(polygon: PlanarPolygon, tol: Tolerances = DEFAULT_TOLERANCES) -> Polygon2D:
    """Project a planar polygon into its own plane frame.

    Raises NonPlanar if any vertex deviates from the plane by more
    than coplanar_tol.
    """
    dev = polygon.max_plane_deviation()
    if dev > tol.coplanar_tol:
        raise NonPlanar(f"point deviates {dev:.3e} m from plane (> {tol.coplanar_tol})")
    basis = basis_for_normal(polygon.origin, polygon.normal)
    outer = tuple(basis.to_2d(polygon.outer))
    holes = tuple(tuple(basis.to_2d(h)) for h in polygon.holes)
    return Polygon2D(outer, holes, basis)


def project_onto(polygon: PlanarPolygon, basis: Basis,
                 tol: Tolerances = DEFAULT_TOLERANCES,
                 check_plane: bool = True) -> Polygon2D:
    """Project a polygon onto a foreign plane frame along the frame normal."""
    if check_plane:
        n = np.asarray(basis.normal)
        o = np.asarray(basis.origin)
        for ring in (polygon.outer, *polygon.holes):
            pts = np.asarray(ring)
            dev = float(np.abs((pts - o) @ n).max())
            if dev > tol.coplanar_tol:
                raise NonPlanar(f"polygon lies {dev:.3e} m off the target plane")
    outer = tuple(basis.to_2d(polygon.outer))
    holes = tuple(tuple(basis.to_2d(h)) for h in polygon.holes)
    return Polygon2D(outer, holes, basis)


def area(polygon: Polygon2D) -> float:
    """Shoelace area of the outer ring minus hole areas, clamped at 0."""
    a = abs(ring_area_2d(polygon.outer))
    for h in polygon.holes:
        a -= abs(ring_area_2d(h))
    return max(a, 0.0)


def _from_shapely(geom, basis: Basis, snap_tol: float) -> list[Polygon2D]:
    polys = []
    if geom.is_empty:
        return polys
    if geom.geom_type == "Polygon":
        parts = [geom]
    elif geom.geom_type in ("MultiPolygon", "GeometryCollection"):
        parts = [g for g in geom.geoms if g.geom_type == "Polygon"]
    else:
        parts = []
    for part in parts:
        if part.area <= snap_tol * snap_tol:
            continue
        part = orient(part, sign=1.0)  # CCW outer, CW holes
        outer = tuple((float(x), float(y)) for x, y in part.exterior.coords[:-1])
        holes = tuple(
            tuple((float(x), float(y)) for x, y in ring.coords[:-1])
            for ring in part.interiors
        )
        polys.append(Polygon2D(outer, holes, basis))
    # deterministic output order
    polys.sort(key=lambda p: (min(p.outer), len(p.outer)))
    return polys


BooleanOp = Literal["union", "intersection", "difference"]


def boolean_2d(a: Polygon2D, b: Polygon2D, op: BooleanOp,
               tol: Tolerances = DEFAULT_TOLERANCES) -> list[Polygon2D]:
    """2D boolean of two polygons sharing a basis. Empty list is a legal result."""
    sa = shapely.set_precision(a.shapely(), tol.snap_tol)
    sb = shapely.set_precision(b.shapely(), tol.snap_tol)
    if op == "union":
        out = sa.union(sb)
    elif op == "intersection":
        out = sa.intersection(sb)
    elif op == "difference":
        out = sa.difference(sb)
    else:
        raise ValueError(f"unknown boolean op {op!r}")
    return _from_shapely(out, a.basis, tol.snap_tol)


def boolean_many(base: Polygon2D, others: Sequence[Polygon2D], op: BooleanOp,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> list[Polygon2D]:
    geom = shapely.set_precision(base.shapely(), tol.snap_tol)
    for other in others:
        so = shapely.set_precision(other.shapely(), tol.snap_tol)
        if op == "union":
            geom = geom.union(so)
        elif op == "intersection":
            geom = geom.intersection(so)
        elif op == "difference":
            geom = geom.difference(so)
        else:
            raise ValueError(f"unknown boolean op {op!r}")
    return _from_shapely(geom, base.basis, tol.snap_tol)


def normals_angle(na: Sequence[float], nb: Sequence[float]) -> float:
    """Unsigned angle between two direction vectors."""
    a = np.asarray(na, dtype=float)
    b = np.asarray(nb, dtype=float)
    c = float(np.clip(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)), -1.0, 1.0))
    return math.acos(c)


def planes_coincide(a: PlanarPolygon, b: PlanarPolygon, tol: Tolerances) -> bool:
    """True when the two support planes agree within tolerance.

    Orientation-insensitive: anti-parallel normals still coincide.
    """
    ang = normals_angle(a.normal, b.normal)
    if min(ang, math.pi - ang) > tol.angle_tol:
        return False
    n = np.asarray(a.normal)
    gap = abs(float((np.asarray(b.origin) - np.asarray(a.origin)) @ n))
    return gap <= tol.coplanar_tol


def overlap_area(a: PlanarPolygon, b: PlanarPolygon,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Area of the planar intersection; 0 when the planes differ."""
    if not planes_coincide(a, b, tol):
        return 0.0
    return projected_overlap(a, b, tol)


def projected_overlap(a: PlanarPolygon, b: PlanarPolygon,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Intersection area after projecting b onto a's plane along a's normal.

    Callers must have checked that the normals are (anti-)parallel.
    """
    pa = project(a, tol)
    pb = project_onto(b, pa.basis, tol, check_plane=False)
    pieces = boolean_2d(pa, pb, "intersection", tol)
    return sum(area(p) for p in pieces)


def plane_gap(a: PlanarPolygon, b: PlanarPolygon) -> float:
    n = np.asarray(a.normal)
    return abs(float((np.asarray(b.origin) - np.asarray(a.origin)) @ n))


# --- triangulation (ear clipping with hole bridging) ---------------------

def _bridge_holes(outer: list[Point2], holes: list[list[Point2]]) -> list[Point2]:
    """Connect holes to the outer ring with zero-width bridges."""
    ring = list(outer)
    # process holes by rightmost vertex, right-to-left
    remaining = sorted(holes, key=lambda h: -max(p[0] for p in h))
    for hole in remaining:
        hi = max(range(len(hole)), key=lambda i: hole[i])
        hx, hy = hole[hi]

        def bridge_cost(i):
            x, y = ring[i]
            # prefer vertices to the right of the hole's rightmost point,
            # which keeps the bridge from crossing the hole itself
            penalty = 0.0 if x >= hx - 1e-12 else 1e9
            return penalty + (x - hx) ** 2 + (y - hy) ** 2

        best = min(range(len(ring)), key=bridge_cost)
        hole_seq = hole[hi:] + hole[:hi]
        ring = (ring[:best + 1] + hole_seq + [hole_seq[0]] + ring[best:])
    return ring


def _ear_clip(ring: list[Point2]) -> list[tuple[Point2, Point2, Point2]]:
    pts = list(ring)
    tris: list[tuple[Point2, Point2, Point2]] = []
    if ring_area_2d(pts) < 0:
        pts.reverse()

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def point_in_tri(p, a, b, c):
        d1 = cross(a, b, p)
        d2 = cross(b, c, p)
        d3 = cross(c, a, p)
        return d1 > 1e-14 and d2 > 1e-14 and d3 > 1e-14

    guard = 0
    while len(pts) > 3 and guard < 10 * len(ring) ** 2:
        guard += 1
        n = len(pts)
        clipped = False
        for i in range(n):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % n]
            if cross(a, b, c) <= 1e-14:
                continue
            if any(point_in_tri(p, a, b, c) for p in pts if p not in (a, b, c)):
                continue
            tris.append((a, b, c))
            del pts[i]
            clipped = True
            break
        if not clipped:
            # collinear leftovers: drop a degenerate vertex
            n = len(pts)
            for i in range(n):
                if abs(cross(pts[i - 1], pts[i], pts[(i + 1) % n])) <= 1e-14:
                    del pts[i]
                    clipped = True
                    break
            if not clipped:
                break
    if len(pts) == 3:
        if abs(cross(pts[0], pts[1], pts[2])) > 1e-14:
            tris.append((pts[0], pts[1], pts[2]))
    return tris


def triangulate(polygon: Polygon2D) -> list[tuple[Point3, Point3, Point3]]:
    """Triangles covering the polygon; total area matches area(polygon)."""
    outer = list(polygon.outer)
    if ring_area_2d(outer) < 0:
        outer.reverse()
    holes = []
    for h in polygon.holes:
        h = list(h)
        if ring_area_2d(h) > 0:
            h.reverse()
        holes.append(h)
    ring = _bridge_holes(outer, holes) if holes else outer
    tris2 = _ear_clip(ring)
    out = []
    for tri in tris2:
        p3 = polygon.basis.to_3d(tri)
        out.append((p3[0], p3[1], p3[2]))
    return out


def polygon_from_rect(x0: float, y0: float, x1: float, y1: float,
                      basis: Basis) -> Polygon2D:
    return Polygon2D(((x0, y0), (x1, y0), (x1, y1), (x0, y1)), (), basis)


def polygon2d_to_planar(polygon: Polygon2D) -> PlanarPolygon:
    outer = tuple(polygon.basis.to_3d(polygon.outer))
    holes = tuple(tuple(polygon.basis.to_3d(h)) for h in polygon.holes)
    return PlanarPolygon(polygon.basis.origin, polygon.basis.normal, outer, holes)
