"""Closed triangle meshes: validity checks, volume, planar facets, containment."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import (
    Basis,
    GeometryError,
    PlanarPolygon,
    Tolerances,
    DEFAULT_TOLERANCES,
    basis_for_normal,
    ring_area_2d,
)

_KEY_DIGITS = 9  # vertex position hashing resolution (~1 nm)


def _pos_key(p) -> tuple:
    return tuple(round(float(c), _KEY_DIGITS) for c in p)


@dataclass(frozen=True)
class TriangleMesh:
    vertices: tuple[tuple[float, float, float], ...]
    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices",
                           tuple(tuple(float(c) for c in v) for v in self.vertices))
        object.__setattr__(self, "triangles",
                           tuple(tuple(int(i) for i in t) for t in self.triangles))

    @cached_property
    def _v(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def is_closed(self) -> bool:
        """Every undirected edge shared by exactly two triangles, once per direction.

        Edges are keyed by vertex index, so a mesh may consist of several
        shells (e.g. a wall decomposed into boxes around an opening).
        """
        directed: dict[tuple[int, int], int] = {}
        for a, b, c in self.triangles:
            if len({a, b, c}) < 3:
                return False
            for e in ((a, b), (b, c), (c, a)):
                directed[e] = directed.get(e, 0) + 1
        for (a, b), n in directed.items():
            if n != 1 or directed.get((b, a), 0) != 1:
                return False
        return True

    def volume(self) -> float:
        """Signed volume (positive for outward-oriented shells)."""
        v = self._v
        total = 0.0
        for a, b, c in self.triangles:
            total += float(np.dot(v[a], np.cross(v[b], v[c]))) / 6.0
        return total

    def surface_area(self) -> float:
        v = self._v
        total = 0.0
        for a, b, c in self.triangles:
            total += float(np.linalg.norm(np.cross(v[b] - v[a], v[c] - v[a]))) / 2.0
        return total

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self._v.min(axis=0), self._v.max(axis=0)

    def triangle_normal(self, i: int) -> np.ndarray:
        a, b, c = self.triangles[i]
        v = self._v
        n = np.cross(v[b] - v[a], v[c] - v[a])
        norm = np.linalg.norm(n)
        if norm == 0:
            raise GeometryError(f"degenerate triangle {i}")
        return n / norm

    def contains_point(self, point, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Strict containment by ray parity; points near the surface are outside."""
        p = np.asarray(point, dtype=float)
        if self.distance_to_surface(p) <= tol.snap_tol:
            return False
        # fixed irrational direction avoids axis-aligned degeneracies
        d = np.array([0.57735026, 0.80178373, 0.15430335])
        d = d / np.linalg.norm(d)
        v = self._v
        crossings = 0
        for a, b, c in self.triangles:
            if _ray_hits_triangle(p, d, v[a], v[b], v[c]):
                crossings += 1
        return crossings % 2 == 1

    def distance_to_surface(self, point) -> float:
        p = np.asarray(point, dtype=float)
        v = self._v
        best = float("inf")
        for a, b, c in self.triangles:
            best = min(best, _point_triangle_distance(p, v[a], v[b], v[c]))
            if best == 0.0:
                return 0.0
        return best

    def facets(self, tol: Tolerances = DEFAULT_TOLERANCES) -> list[PlanarPolygon]:
        """Connected coplanar triangle groups as boundary polygons with holes."""
        n_tri = len(self.triangles)
        planes = []
        v = self._v
        for i in range(n_tri):
            n = self.triangle_normal(i)
            a = self.triangles[i][0]
            off = float(np.dot(v[a], n))
            planes.append((n, off))

        def same_plane(i, j):
            ni, oi = planes[i]
            nj, oj = planes[j]
            return (np.dot(ni, nj) > 1.0 - 1e-9
                    and abs(oi - oj) <= tol.coplanar_tol)

        # adjacency by shared (position-keyed) edges
        edge_owner: dict[frozenset, list[int]] = {}
        for i, (a, b, c) in enumerate(self.triangles):
            ka, kb, kc = (_pos_key(self.vertices[k]) for k in (a, b, c))
            for e in (frozenset((ka, kb)), frozenset((kb, kc)), frozenset((kc, ka))):
                edge_owner.setdefault(e, []).append(i)

        parent = list(range(n_tri))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for owners in edge_owner.values():
            for i in owners:
                for j in owners:
                    if i < j and same_plane(i, j):
                        parent[find(i)] = find(j)

        groups: dict[int, list[int]] = {}
        for i in range(n_tri):
            groups.setdefault(find(i), []).append(i)

        facets = []
        for tris in groups.values():
            facets.append(self._facet_polygon(tris, tol))
        facets.sort(key=lambda f: (f.normal, f.plane_offset(), f.outer[0]))
        return facets

    def _facet_polygon(self, tri_ids: list[int], tol: Tolerances) -> PlanarPolygon:
        normal = self.triangle_normal(tri_ids[0])
        origin = self._v[self.triangles[tri_ids[0]][0]]
        basis = basis_for_normal(tuple(origin), normal)

        # boundary edges: directed edges not cancelled by a reverse edge
        counts: dict[tuple, int] = {}
        for i in tri_ids:
            a, b, c = self.triangles[i]
            ka, kb, kc = (_pos_key(self.vertices[k]) for k in (a, b, c))
            for e in ((ka, kb), (kb, kc), (kc, ka)):
                rev = (e[1], e[0])
                if counts.get(rev, 0) > 0:
                    counts[rev] -= 1
                else:
                    counts[e] = counts.get(e, 0) + 1
        boundary = [e for e, n in counts.items() if n > 0]

        succ: dict[tuple, tuple] = {}
        for a, b in boundary:
            succ[a] = b
        rings = []
        visited = set()
        for start, _ in boundary:
            if start in visited:
                continue
            ring = [start]
            visited.add(start)
            cur = succ.get(start)
            while cur is not None and cur != start:
                ring.append(cur)
                visited.add(cur)
                cur = succ.get(cur)
            if cur == start and len(ring) >= 3:
                rings.append(ring)

        ring2d = [(r, basis.to_2d(r)) for r in rings]
        ring2d = [(r, p, ring_area_2d(p)) for r, p in ring2d]
        # drop collinear bridge vertices
        ring2d.sort(key=lambda t: -abs(t[2]))
        if not ring2d:
            raise GeometryError("facet with no boundary ring")
        outer = ring2d[0]
        holes = ring2d[1:]
        outer_pts = _simplify_ring(outer[0], outer[1])
        hole_pts = [
            _simplify_ring(r, p)
            for r, p, a in holes if abs(a) > tol.snap_tol
        ]
        return PlanarPolygon(tuple(origin.tolist()), tuple(normal.tolist()),
                             tuple(outer_pts), tuple(tuple(h) for h in hole_pts))


def _simplify_ring(ring3, ring2):
    """Remove collinear intermediate vertices (keeps facet rectangles clean)."""
    keep = []
    m = len(ring2)
    for i in range(m):
        x0, y0 = ring2[i - 1]
        x1, y1 = ring2[i]
        x2, y2 = ring2[(i + 1) % m]
        cross = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
        if abs(cross) > 1e-12:
            keep.append(ring3[i])
    return keep if len(keep) >= 3 else list(ring3)


def _ray_hits_triangle(p, d, a, b, c, eps=1e-12) -> bool:
    """Moller-Trumbore intersection for t > 0."""
    e1 = b - a
    e2 = c - a
    h = np.cross(d, e2)
    det = float(np.dot(e1, h))
    if abs(det) < eps:
        return False
    inv = 1.0 / det
    s = p - a
    u = float(np.dot(s, h)) * inv
    if u < 0.0 or u > 1.0:
        return False
    q = np.cross(s, e1)
    v = float(np.dot(d, q)) * inv
    if v < 0.0 or u + v > 1.0:
        return False
    t = float(np.dot(e2, q)) * inv
    return t > eps


def _point_triangle_distance(p, a, b, c) -> float:
    # project onto the triangle plane, clamp to the triangle
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = float(np.dot(ab, ap))
    d2 = float(np.dot(ac, ap))
    if d1 <= 0 and d2 <= 0:
        return float(np.linalg.norm(ap))
    bp = p - b
    d3 = float(np.dot(ab, bp))
    d4 = float(np.dot(ac, bp))
    if d3 >= 0 and d4 <= d3:
        return float(np.linalg.norm(bp))
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        t = d1 / (d1 - d3)
        return float(np.linalg.norm(ap - t * ab))
    cp = p - c
    d5 = float(np.dot(ab, cp))
    d6 = float(np.dot(ac, cp))
    if d6 >= 0 and d5 <= d6:
        return float(np.linalg.norm(cp))
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        t = d2 / (d2 - d6)
        return float(np.linalg.norm(ap - t * ac))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return float(np.linalg.norm(bp - t * (c - b)))
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return float(np.linalg.norm(p - (a + ab * v + ac * w)))


def box_mesh(x0, y0, z0, x1, y1, z1) -> TriangleMesh:
    """Axis-aligned box as an outward-oriented closed mesh."""
    verts = [
        (x0, y0, z0), (x1, y0, z0), (x1, y1, z0), (x0, y1, z0),
        (x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1),
    ]
    quads = [
        (0, 3, 2, 1),  # bottom (-z)
        (4, 5, 6, 7),  # top (+z)
        (0, 1, 5, 4),  # south (-y)
        (1, 2, 6, 5),  # east (+x)
        (2, 3, 7, 6),  # north (+y)
        (3, 0, 4, 7),  # west (-x)
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return TriangleMesh(tuple(verts), tuple(tris))


def merge_meshes(meshes: list[TriangleMesh]) -> TriangleMesh:
    verts: list = []
    tris: list = []
    for m in meshes:
        off = len(verts)
        verts.extend(m.vertices)
        tris.extend((a + off, b + off, c + off) for a, b, c in m.triangles)
    return TriangleMesh(tuple(verts), tuple(tris))


def hollow_box_mesh(outer: tuple, cavity: tuple) -> TriangleMesh:
    """Shell solid: outer box minus cavity box, tiled with plain boxes.

    `outer` and `cavity` are (x0, y0, z0, x1, y1, z1); the cavity must not
    poke through the outer box sides, but may be flush with its top/bottom.
    """
    ox0, oy0, oz0, ox1, oy1, oz1 = outer
    cx0, cy0, cz0, cx1, cy1, cz1 = cavity
    boxes = [
        box_mesh(ox0, oy0, oz0, cx0, oy1, oz1),   # west slab
        box_mesh(cx1, oy0, oz0, ox1, oy1, oz1),   # east slab
        box_mesh(cx0, oy0, oz0, cx1, cy0, oz1),   # south slab
        box_mesh(cx0, cy1, oz0, cx1, oy1, oz1),   # north slab
    ]
    if cz0 - oz0 > 1e-12:
        boxes.append(box_mesh(cx0, cy0, oz0, cx1, cy1, cz0))  # below cavity
    if oz1 - cz1 > 1e-12:
        boxes.append(box_mesh(cx0, cy0, cz1, cx1, cy1, oz1))  # above cavity
    return merge_meshes(boxes)
